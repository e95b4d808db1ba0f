//! Brute-force ground truth for small ground sets, plus random instance
//! generators.
//!
//! Every decision here is a single LP over all `2^m` subsets, built from the
//! class definitions directly. Nothing is shared with the solver modules
//! except the LP engine itself.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::ground::{FullTable, PartialSetFunction, Rational, SetPoint};
use crate::lp::{self, Bounds, ExactLP, LPOutcome, LpError, Relation};
use crate::submodular::{verify_square_certificate, SquareCertificate, SquareTuple};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("ground set of size {m} exceeds the oracle limit of {limit} for this class")]
    TooLarge { m: usize, limit: usize },
    #[error("infeasible generator parameters: {0}")]
    InfeasibleParameters(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("solver returned an unexpected outcome: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleClass {
    MonotoneSubadditive,
    GeneralSubadditive,
    Xos,
    Submodular,
}

impl OracleClass {
    pub fn limit(self) -> usize {
        match self {
            OracleClass::MonotoneSubadditive | OracleClass::GeneralSubadditive => 4,
            OracleClass::Xos | OracleClass::Submodular => 5,
        }
    }
}

/// One variable per subset (indexed by mask) plus the class constraints.
/// XOS adds a supporting vector per subset after the first `2^m` variables.
fn class_model(m: usize, class: OracleClass) -> ExactLP {
    let n = 1usize << m;
    let mut model = ExactLP::new();
    let nonneg = class != OracleClass::Submodular;
    for s in 0..n {
        model.add_var(format!("w{s:b}"), if nonneg { Bounds::nonnegative() } else { Bounds::free() });
    }
    let one = Rational::one();
    let pairs = (0..n).tuple_combinations::<(usize, usize)>();
    match class {
        OracleClass::MonotoneSubadditive | OracleClass::GeneralSubadditive => {
            if class == OracleClass::MonotoneSubadditive {
                for s in 0..n {
                    for e in 0..m {
                        if s >> e & 1 == 0 {
                            model.add_constraint([(s, one.clone()), (s | 1 << e, -&one)], Relation::Le, Rational::zero());
                        }
                    }
                }
            }
            for (a, b) in pairs {
                let u = a | b;
                if u == a || u == b {
                    continue;
                }
                model.add_constraint([(a, one.clone()), (b, one.clone()), (u, -&one)], Relation::Ge, Rational::zero());
            }
        }
        OracleClass::Submodular => {
            for (a, b) in pairs {
                let (u, i) = (a | b, a & b);
                if u == a || u == b {
                    continue;
                }
                model.add_constraint(
                    [(a, one.clone()), (b, one.clone()), (u, -&one), (i, -&one)],
                    Relation::Ge,
                    Rational::zero(),
                );
            }
        }
        OracleClass::Xos => {
            // w is monotone, and each w_S is attained by a nonnegative vector
            // on S that stays below w on every subset of S; then w is the
            // maximum of these linear functions.
            for s in 0..n {
                for e in 0..m {
                    if s >> e & 1 == 0 {
                        model.add_constraint([(s, one.clone()), (s | 1 << e, -&one)], Relation::Le, Rational::zero());
                    }
                }
            }
            for s in 0..n {
                let elems: Vec<usize> = (0..m).filter(|e| s >> e & 1 == 1).collect();
                let vars: Vec<usize> =
                    elems.iter().map(|e| model.add_var(format!("v{s:b}_{e}"), Bounds::nonnegative())).collect();
                let mut row: Vec<(usize, Rational)> = vars.iter().map(|&v| (v, one.clone())).collect();
                row.push((s, -&one));
                model.add_constraint(row, Relation::Eq, Rational::zero());
                for sub in 1..n {
                    if sub & s != sub || sub == s {
                        continue;
                    }
                    let mut row: Vec<(usize, Rational)> = elems
                        .iter()
                        .zip(&vars)
                        .filter(|(e, _)| sub >> **e & 1 == 1)
                        .map(|(_, &v)| (v, one.clone()))
                        .collect();
                    row.push((sub, -&one));
                    model.add_constraint(row, Relation::Le, Rational::zero());
                }
            }
        }
    }
    model
}

fn mask_of(s: &SetPoint) -> usize {
    s.to_mask().expect("small ground set") as usize
}

fn feasible(model: &ExactLP) -> Result<bool, OracleError> {
    match lp::solve(model)? {
        LPOutcome::Feasible { .. } | LPOutcome::Optimal { .. } => Ok(true),
        LPOutcome::Infeasible(_) => Ok(false),
        other => Err(OracleError::Internal(format!("{other:?}"))),
    }
}

fn check_size(m: usize, class: OracleClass) -> Result<(), OracleError> {
    if m > class.limit() {
        return Err(OracleError::TooLarge { m, limit: class.limit() });
    }
    Ok(())
}

/// Whether some class member `g` on `2^[m]` has `lo <= g(S) <= hi` for each
/// listed `(S, lo, hi)`.
pub fn full_domain_within(
    m: usize,
    class: OracleClass,
    bounds: &[(SetPoint, Rational, Rational)],
) -> Result<bool, OracleError> {
    check_size(m, class)?;
    let mut model = class_model(m, class);
    for (s, lo, hi) in bounds {
        let k = mask_of(s);
        if lo == hi {
            model.add_constraint([(k, Rational::one())], Relation::Eq, lo.clone());
        } else {
            model.add_constraint([(k, Rational::one())], Relation::Ge, lo.clone());
            model.add_constraint([(k, Rational::one())], Relation::Le, hi.clone());
        }
    }
    feasible(&model)
}

/// Extendibility by brute force over the whole cube.
pub fn full_domain_extend(h: &PartialSetFunction, class: OracleClass) -> Result<bool, OracleError> {
    let pins: Vec<_> = h.points().iter().map(|(s, f)| (s.clone(), f.clone(), f.clone())).collect();
    full_domain_within(h.m(), class, &pins)
}

/// Whether `g` with `f_i <= g(T_i) <= alpha f_i` exists in the class.
pub fn alpha_feasible(h: &PartialSetFunction, class: OracleClass, alpha: &Rational) -> Result<bool, OracleError> {
    let bounds: Vec<_> = h.points().iter().map(|(s, f)| (s.clone(), f.clone(), f * alpha)).collect();
    full_domain_within(h.m(), class, &bounds)
}

/// Bisection for the best approximation factor of a positive partial
/// function; returns `[lo, hi]` of width at most `tol` with `hi` feasible.
pub fn bisect_alpha(
    h: &PartialSetFunction,
    class: OracleClass,
    tol: &Rational,
) -> Result<(Rational, Rational), OracleError> {
    let one = Rational::one();
    if alpha_feasible(h, class, &one)? {
        return Ok((one.clone(), one));
    }
    let vals: Vec<&Rational> = h.points().iter().map(|(_, f)| f).collect();
    let mut lo = one;
    let mut hi = Rational::from(h.len()) * *vals.iter().max().expect("nonempty") / *vals.iter().min().expect("nonempty");
    while !alpha_feasible(h, class, &hi)? {
        hi = &hi * Rational::from(2i64);
    }
    let half = Rational::new(1, 2);
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) * &half;
        if alpha_feasible(h, class, &mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// Least fraction of entries to change so that the table joins the class.
///
/// Tries every set of changed entries in order of size; `None` if more than
/// `max_changes` would be needed.
pub fn distance_to_class_within(
    table: &FullTable,
    class: OracleClass,
    max_changes: usize,
) -> Result<Option<Rational>, OracleError> {
    let m = table.m();
    if m > 4 {
        return Err(OracleError::TooLarge { m, limit: 4 });
    }
    let n = 1usize << m;
    for k in 0..=max_changes.min(n) {
        for free in (0..n).combinations(k) {
            let pins: Vec<_> = (0..n)
                .filter(|s| !free.contains(s))
                .map(|s| {
                    let v = table.get(s as u64).clone();
                    (SetPoint::from_mask(s as u64), v.clone(), v)
                })
                .collect();
            if full_domain_within(m, class, &pins)? {
                return Ok(Some(Rational::new(k as i64, n as i64)));
            }
        }
    }
    Ok(None)
}

pub fn distance_to_class(table: &FullTable, class: OracleClass) -> Result<Rational, OracleError> {
    Ok(distance_to_class_within(table, class, 1 << table.m())?.expect("changing everything always works"))
}

/// A rational in `[lo, hi]` with denominator at most 6.
pub fn random_rational(lo: &Rational, hi: &Rational, rng: &mut impl Rng) -> Rational {
    let d = rng.gen_range(1..=6i64);
    let scale = Rational::from(d);
    let a = (lo * &scale).numer();
    let b = (hi * &scale).numer();
    // Interior numerators of lo*d and hi*d, rounding toward the inside.
    let a_int = num_integer::Integer::div_ceil(&a, &(lo * &scale).denom());
    let b_int = num_integer::Integer::div_floor(&b, &(hi * &scale).denom());
    let a_i: i64 = num_traits::ToPrimitive::to_i64(&a_int).expect("small bound");
    let b_i: i64 = num_traits::ToPrimitive::to_i64(&b_int).expect("small bound");
    if a_i > b_i {
        return lo.clone();
    }
    Rational::new(rng.gen_range(a_i..=b_i), d)
}

/// `n` distinct random subsets of `[m]` with random values in `[lo, hi]`.
pub fn random_partial_function(
    m: usize,
    n: usize,
    lo: &Rational,
    hi: &Rational,
    rng: &mut impl Rng,
) -> Result<PartialSetFunction, OracleError> {
    if m > 20 || n > 1 << m || lo > hi {
        return Err(OracleError::InfeasibleParameters(format!("m={m}, n={n}, range [{lo}, {hi}]")));
    }
    let masks = rand::seq::index::sample(rng, 1 << m, n);
    let points = masks
        .into_iter()
        .map(|k| (SetPoint::from_mask(k as u64), random_rational(lo, hi, rng)))
        .collect();
    Ok(PartialSetFunction::new(m, points).expect("distinct sets"))
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `n` pairwise incomparable subsets of `[m]`.
pub fn random_antichain(m: usize, n: usize, rng: &mut impl Rng) -> Result<Vec<SetPoint>, OracleError> {
    if m > 20 || n as u128 > binomial(m, m / 2) {
        return Err(OracleError::InfeasibleParameters(format!("no antichain of {n} sets over {m} elements")));
    }
    let all = 1u64 << m;
    for _ in 0..64 {
        let mut family: Vec<SetPoint> = Vec::with_capacity(n);
        for _ in 0..(n * 50).max(100) {
            if family.len() == n {
                break;
            }
            let s = SetPoint::from_mask(rng.gen_range(0..all));
            if family.iter().all(|t| t.incomparable(&s)) {
                family.push(s);
            }
        }
        if family.len() == n {
            return Ok(family);
        }
    }
    // The middle layer always has room.
    let mut middle: Vec<SetPoint> =
        (0..all).filter(|k| k.count_ones() as usize == m / 2).map(SetPoint::from_mask).collect();
    middle.shuffle(rng);
    middle.truncate(n);
    Ok(middle)
}

/// A random certificate together with a partial function it refutes.
///
/// Squares are chained so that later squares often reuse earlier sets; the
/// defined sets are exactly the unbalanced ones, with values nudged until the
/// weighted balance is positive.
pub fn random_valid_square_certificate(
    m: usize,
    max_squares: usize,
    rng: &mut impl Rng,
) -> Result<(SquareCertificate, PartialSetFunction), OracleError> {
    if !(2..=20).contains(&m) || max_squares == 0 {
        return Err(OracleError::InfeasibleParameters(format!("m={m}, max_squares={max_squares}")));
    }
    let all = 1u64 << m;
    let random_incomparable = |rng: &mut dyn rand::RngCore, a: &SetPoint| -> Option<SetPoint> {
        (0..200).map(|_| SetPoint::from_mask(rng.gen_range(0..all))).find(|b| a.incomparable(b))
    };
    for _ in 0..1000 {
        let k = rng.gen_range(1..=max_squares);
        let mut tuples: Vec<(SquareTuple, u64)> = Vec::new();
        let mut seen: Vec<SetPoint> = Vec::new();
        while tuples.len() < k {
            let a = if !seen.is_empty() && rng.gen_bool(0.7) {
                seen[rng.gen_range(0..seen.len())].clone()
            } else {
                SetPoint::from_mask(rng.gen_range(0..all))
            };
            let Some(b) = random_incomparable(rng, &a) else { continue };
            let t = SquareTuple::new(a, b);
            seen.extend([t.top.clone(), t.bottom.clone()]);
            tuples.push((t, rng.gen_range(1..=2)));
        }
        let cert = SquareCertificate { tuples }.normalized();
        let net = cert.net_counts();
        if net.is_empty() {
            continue;
        }
        let mut pts: Vec<(SetPoint, Rational)> =
            net.keys().map(|s| (s.clone(), Rational::from(rng.gen_range(-5i64..=5)))).collect();
        let slack: Rational = pts.iter().map(|(s, f)| f * Rational::from(net[s] as i64)).sum();
        if !slack.is_positive() {
            let (idx, n) = pts.iter().enumerate().map(|(i, (s, _))| (i, net[s])).find(|(_, n)| *n > 0).expect("balances sum to zero");
            let bump = (-slack + Rational::one()) / Rational::from(n as i64);
            pts[idx].1 += bump;
        }
        let h = PartialSetFunction::new(m, pts).expect("distinct sets");
        if verify_square_certificate(&cert, &h) {
            return Ok((cert, h));
        }
    }
    Err(OracleError::InfeasibleParameters("no certificate found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::rat;
    use crate::submodular::is_antichain;
    use crate::testers::trial_rng;

    fn cube() -> PartialSetFunction {
        PartialSetFunction::from_literal(
            2,
            &[(&[], rat(0, 1)), (&[0], rat(0, 1)), (&[1], rat(0, 1)), (&[0, 1], rat(1, 1))],
        )
    }

    #[test]
    fn small_cube() {
        assert!(!full_domain_extend(&cube(), OracleClass::Submodular).unwrap());
        assert!(!full_domain_extend(&cube(), OracleClass::MonotoneSubadditive).unwrap());
        assert!(!full_domain_extend(&cube(), OracleClass::GeneralSubadditive).unwrap());
        assert!(!full_domain_extend(&cube(), OracleClass::Xos).unwrap());
        let modular = PartialSetFunction::from_literal(2, &[(&[0], rat(1, 1)), (&[0, 1], rat(3, 1))]);
        for class in [OracleClass::MonotoneSubadditive, OracleClass::Xos, OracleClass::Submodular] {
            assert!(full_domain_extend(&modular, class).unwrap(), "{class:?}");
        }
    }

    #[test]
    fn xos_gadget() {
        let h = PartialSetFunction::from_literal(
            3,
            &[(&[0, 1], rat(2, 1)), (&[1, 2], rat(2, 1)), (&[0, 2], rat(2, 1)), (&[0, 1, 2], rat(7, 2))],
        );
        assert!(!full_domain_extend(&h, OracleClass::Xos).unwrap());
        assert!(full_domain_extend(&h, OracleClass::MonotoneSubadditive).unwrap());
        let (lo, hi) = bisect_alpha(&h, OracleClass::Xos, &rat(1, 1 << 20)).unwrap();
        assert!(lo <= rat(7, 6) && rat(7, 6) <= hi);
    }

    #[test]
    fn too_large() {
        let h = PartialSetFunction::from_literal(5, &[(&[0], rat(1, 1))]);
        assert!(matches!(
            full_domain_extend(&h, OracleClass::GeneralSubadditive),
            Err(OracleError::TooLarge { m: 5, limit: 4 })
        ));
    }

    #[test]
    fn distances() {
        let t = FullTable::new(2, vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 1)]).unwrap();
        assert_eq!(distance_to_class(&t, OracleClass::MonotoneSubadditive).unwrap(), rat(1, 4));
        let fine = FullTable::from_fn(3, |k| Rational::from(k.count_ones() as i64)).unwrap();
        assert_eq!(distance_to_class(&fine, OracleClass::Submodular).unwrap(), rat(0, 1));
        // Two disjoint violations.
        let two = FullTable::from_fn(4, |k| match k {
            0 => rat(0, 1),
            0b0011 | 0b1100 => rat(5, 1),
            _ => Rational::from(k.count_ones() as i64),
        })
        .unwrap();
        assert!(distance_to_class(&two, OracleClass::MonotoneSubadditive).unwrap() >= rat(2, 16));
    }

    #[test]
    fn generators() {
        let mut rng = trial_rng(11, 0);
        for _ in 0..50 {
            let h = random_partial_function(4, 6, &rat(0, 1), &rat(10, 1), &mut rng).unwrap();
            assert_eq!(h.len(), 6);
            assert!(h.points().iter().all(|(_, v)| *v >= rat(0, 1) && *v <= rat(10, 1)));
            let a = random_antichain(6, 10, &mut rng).unwrap();
            assert_eq!(a.len(), 10);
            assert!(is_antichain(&a));
            let (cert, h) = random_valid_square_certificate(4, 4, &mut rng).unwrap();
            assert!(verify_square_certificate(&cert, &h));
        }
        assert!(random_antichain(4, 7, &mut rng).is_err());
        assert!(random_partial_function(2, 5, &rat(0, 1), &rat(1, 1), &mut rng).is_err());
    }
}
