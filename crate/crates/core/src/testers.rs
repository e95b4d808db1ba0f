//! Property testers for subadditive, XOS and nonmonotone subadditive functions.
//!
//! Each tester draws `ceil(1/eps)` sets `T` from the middle layers `M_lambda`,
//! queries the sets below `T` and rejects on an exact violation. Every
//! rejection carries a witness that can be re-checked by querying again.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ground::{submasks, FullTable, PartialSetFunction, Rational, SetPoint};
use crate::xos;

#[derive(Debug, thiserror::Error)]
pub enum TesterError {
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    EpsilonOutOfRange(f64),
    #[error("ground set of size {0} is too large for mask-based testing")]
    GroundTooLarge(usize),
    #[error("oracle returned negative value {value} at {set}")]
    NegativeValue { set: SetPoint, value: Rational },
    #[error(transparent)]
    Xos(#[from] xos::XosError),
}

type Eval = dyn Fn(&SetPoint) -> Rational + Send + Sync;

/// Value oracle for a set function with a query counter.
#[derive(Clone)]
pub struct FunctionOracle {
    m: usize,
    eval: Arc<Eval>,
    count: Arc<AtomicU64>,
}

impl std::fmt::Debug for FunctionOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FunctionOracle(m={}, queries={})", self.m, self.query_count())
    }
}

impl FunctionOracle {
    pub fn from_fn(m: usize, eval: impl Fn(&SetPoint) -> Rational + Send + Sync + 'static) -> Self {
        FunctionOracle { m, eval: Arc::new(eval), count: Arc::new(AtomicU64::new(0)) }
    }

    pub fn from_table(table: FullTable) -> Self {
        let m = table.m();
        FunctionOracle::from_fn(m, move |s| table.eval(s).clone())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Counted query.
    pub fn evaluate(&self, s: &SetPoint) -> Rational {
        self.count.fetch_add(1, Ordering::Relaxed);
        (self.eval)(s)
    }

    pub fn query_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset_count(&self) {
        self.count.store(0, Ordering::Relaxed);
    }

    /// The whole table, without touching the counter.
    pub fn to_table(&self) -> FullTable {
        FullTable::from_fn(self.m, |mask| (self.eval)(&SetPoint::from_mask(mask))).expect("table fits")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleVariant {
    /// Layers up to `m/2 + lambda sqrt(m)`.
    OneSided,
    /// Layers within `lambda sqrt(m)` of `m/2`.
    TwoSided,
}

/// `sqrt(ln(4/eps))`.
pub fn lambda(epsilon: f64) -> f64 {
    (4.0 / epsilon).ln().sqrt()
}

fn check_epsilon(epsilon: f64) -> Result<(), TesterError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(TesterError::EpsilonOutOfRange(epsilon))
    }
}

/// Inclusive range of set sizes in `M_lambda`.
pub fn layer_range(m: usize, epsilon: f64, variant: SampleVariant) -> Result<(usize, usize), TesterError> {
    check_epsilon(epsilon)?;
    let half = m as f64 / 2.0;
    let spread = lambda(epsilon) * (m as f64).sqrt();
    let hi = ((half + spread).floor() as usize).min(m);
    let lo = match variant {
        SampleVariant::OneSided => 0,
        SampleVariant::TwoSided => (half - spread).ceil().max(0.0) as usize,
    };
    Ok((lo, hi))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Uniform draw from `M_lambda`: a layer weighted by its size, then a uniform
/// subset of that size.
pub fn sample_m_lambda(
    m: usize,
    epsilon: f64,
    variant: SampleVariant,
    rng: &mut impl Rng,
) -> Result<SetPoint, TesterError> {
    let (lo, hi) = layer_range(m, epsilon, variant)?;
    let total: u128 = (lo..=hi).map(|k| binomial(m, k)).sum();
    let mut pick = rng.gen_range(0..total);
    let mut size = lo;
    for k in lo..=hi {
        let w = binomial(m, k);
        if pick < w {
            size = k;
            break;
        }
        pick -= w;
    }
    let chosen = rand::seq::index::sample(rng, m, size);
    Ok(chosen.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TesterClass {
    Subadditive,
    Xos,
    SubadditiveNonmonotone,
}

impl TesterClass {
    pub fn variant(self) -> SampleVariant {
        match self {
            TesterClass::SubadditiveNonmonotone => SampleVariant::TwoSided,
            _ => SampleVariant::OneSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TesterWitness {
    /// `f(set) < f(subset)`.
    Monotonicity { set: SetPoint, value: Rational, subset: SetPoint, subset_value: Rational },
    /// Sets inside `set` whose union is `set` and whose values sum below `f(set)`.
    Cover { set: SetPoint, value: Rational, cover: Vec<(SetPoint, Rational)>, total: Rational },
    /// Weights covering every element of `set` at least once, with
    /// `sum alpha f < f(set)`; entries are `(S, alpha, f(S))`.
    FractionalCover { set: SetPoint, value: Rational, weights: Vec<(SetPoint, Rational, Rational)>, total: Rational },
}

impl TesterWitness {
    pub fn set(&self) -> &SetPoint {
        match self {
            TesterWitness::Monotonicity { set, .. }
            | TesterWitness::Cover { set, .. }
            | TesterWitness::FractionalCover { set, .. } => set,
        }
    }

    /// Re-queries every value the witness relies on.
    pub fn verify(&self, oracle: &FunctionOracle) -> bool {
        match self {
            TesterWitness::Monotonicity { set, subset, .. } => {
                subset.is_subset_of(set) && oracle.evaluate(set) < oracle.evaluate(subset)
            }
            TesterWitness::Cover { set, cover, .. } => {
                let union = cover.iter().fold(SetPoint::empty(), |u, (s, _)| u.union(s));
                if union != *set || cover.iter().any(|(s, _)| !s.is_subset_of(set)) || cover.is_empty() {
                    return false;
                }
                let total: Rational = cover.iter().map(|(s, _)| oracle.evaluate(s)).sum();
                total < oracle.evaluate(set)
            }
            TesterWitness::FractionalCover { set, weights, .. } => {
                if weights.iter().any(|(s, a, _)| !s.is_subset_of(set) || a.is_negative()) {
                    return false;
                }
                let covered = set.iter().all(|e| {
                    weights.iter().filter(|(s, _, _)| s.contains(e)).map(|(_, a, _)| a.clone()).sum::<Rational>()
                        >= Rational::one()
                });
                let total: Rational = weights.iter().map(|(s, a, _)| a * oracle.evaluate(s)).sum();
                covered && total < oracle.evaluate(set)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TesterReport {
    pub class: TesterClass,
    pub verdict: Verdict,
    pub queries: u64,
    pub witness: Option<TesterWitness>,
    pub iterations_run: usize,
    pub iterations_planned: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub stream: u64,
}

/// Generator for trial `stream` under `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn iterations(epsilon: f64) -> usize {
    (1.0 / epsilon).ceil() as usize
}

/// Distinct sets queried below `t`, indexed by compressed mask.
struct Queried {
    elements: Vec<usize>,
    values: Vec<Option<Rational>>,
}

impl Queried {
    fn expand(&self, mask: u64) -> SetPoint {
        self.elements.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &e)| e).collect()
    }
}

fn query_below(
    oracle: &FunctionOracle,
    t: &SetPoint,
    min_size: usize,
    cache: &mut HashMap<SetPoint, Rational>,
) -> Result<Queried, TesterError> {
    let elements = t.to_vec();
    let k = elements.len();
    if k >= 63 {
        return Err(TesterError::GroundTooLarge(k));
    }
    let full = (1u64 << k) - 1;
    let mut values = vec![None; 1 << k];
    for mask in submasks(full) {
        if (mask.count_ones() as usize) < min_size {
            continue;
        }
        let s: SetPoint = elements.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &e)| e).collect();
        let v = match cache.get(&s) {
            Some(v) => v.clone(),
            None => {
                let v = oracle.evaluate(&s);
                if v.is_negative() {
                    return Err(TesterError::NegativeValue { set: s, value: v });
                }
                cache.insert(s, v.clone());
                v
            }
        };
        values[mask as usize] = Some(v);
    }
    Ok(Queried { elements, values })
}

fn monotonicity(q: &Queried) -> Option<TesterWitness> {
    let full = q.values.len() - 1;
    let top = q.values[full].as_ref()?;
    let (mask, v) = q
        .values
        .iter()
        .enumerate()
        .filter_map(|(m, v)| Some((m, v.as_ref()?)))
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
    (v > top).then(|| TesterWitness::Monotonicity {
        set: q.expand(full as u64),
        value: top.clone(),
        subset: q.expand(mask as u64),
        subset_value: v.clone(),
    })
}

/// Cheapest family of queried sets with union `t`, via the cheapest queried
/// superset of each piece and a partition recursion.
fn cover_violation(q: &Queried) -> Option<TesterWitness> {
    let n = q.values.len();
    let full = n - 1;
    let k = n.trailing_zeros() as usize;
    let top = q.values[full].as_ref()?;
    if full == 0 {
        return None;
    }
    // up[x]: cheapest queried superset of x inside t, with its mask.
    let mut up: Vec<Option<(Rational, usize)>> = q.values.iter().enumerate().map(|(m, v)| v.clone().map(|v| (v, m))).collect();
    for bit in 0..k {
        for x in 0..n {
            if x >> bit & 1 == 0 {
                if let Some(cand) = up[x | 1 << bit].clone() {
                    if up[x].as_ref().is_none_or(|cur| cand.0 < cur.0) {
                        up[x] = Some(cand);
                    }
                }
            }
        }
    }
    let mut best: Vec<Option<Rational>> = vec![None; n];
    let mut choice: Vec<usize> = vec![0; n];
    best[0] = Some(Rational::zero());
    for x in 1..n {
        let low = x & x.wrapping_neg();
        let rest = x ^ low;
        // Pieces containing the lowest element of x.
        let mut sub = rest;
        loop {
            let piece = sub | low;
            if let (Some((c, _)), Some(b)) = (&up[piece], &best[x ^ piece]) {
                let cand = c + b;
                if best[x].as_ref().is_none_or(|cur| cand < *cur) {
                    best[x] = Some(cand);
                    choice[x] = piece;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let total = best[full].clone()?;
    if total >= *top {
        return None;
    }
    let mut cover = Vec::new();
    let mut x = full;
    while x != 0 {
        let piece = choice[x];
        let (v, mask) = up[piece].clone().expect("chosen piece has a superset");
        cover.push((q.expand(mask as u64), v));
        x ^= piece;
    }
    cover.sort();
    Some(TesterWitness::Cover { set: q.expand(full as u64), value: top.clone(), cover, total })
}

fn fractional_violation(q: &Queried) -> Result<Option<TesterWitness>, TesterError> {
    let full = q.values.len() - 1;
    let top = q.values[full].clone().expect("top is queried");
    let t = q.expand(full as u64);
    let points: Vec<(SetPoint, Rational)> = q
        .values
        .iter()
        .enumerate()
        .filter(|(m, _)| *m != 0)
        .filter_map(|(m, v)| Some((q.expand(m as u64), v.clone()?)))
        .collect();
    let m = t.bound();
    let h = PartialSetFunction::new(m, points).expect("distinct subsets");
    let cover = xos::fractional_cover(&h, &t)?.expect("t covers itself");
    if cover.value >= top {
        return Ok(None);
    }
    let weights = cover.weights.iter().map(|(i, a)| (h.set_at(*i).clone(), a.clone(), h.value_at(*i).clone())).collect();
    Ok(Some(TesterWitness::FractionalCover { set: t, value: top, weights, total: cover.value }))
}

/// Runs the checks of one tester iteration on `t`.
pub fn examine(
    oracle: &FunctionOracle,
    class: TesterClass,
    epsilon: f64,
    t: &SetPoint,
    cache: &mut HashMap<SetPoint, Rational>,
) -> Result<Option<TesterWitness>, TesterError> {
    let min_size = match class {
        TesterClass::SubadditiveNonmonotone => layer_range(oracle.m(), epsilon, SampleVariant::TwoSided)?.0,
        _ => 0,
    };
    let q = query_below(oracle, t, min_size, cache)?;
    Ok(match class {
        TesterClass::Subadditive => monotonicity(&q).or_else(|| cover_violation(&q)),
        TesterClass::Xos => match monotonicity(&q) {
            Some(w) => Some(w),
            None => fractional_violation(&q)?,
        },
        TesterClass::SubadditiveNonmonotone => cover_violation(&q),
    })
}

/// One run of a tester.
pub fn run_tester(
    oracle: &FunctionOracle,
    class: TesterClass,
    epsilon: f64,
    seed: u64,
    stream: u64,
) -> Result<TesterReport, TesterError> {
    check_epsilon(epsilon)?;
    let mut rng = trial_rng(seed, stream);
    let planned = iterations(epsilon);
    let mut queries = 0;
    for it in 0..planned {
        let t = sample_m_lambda(oracle.m(), epsilon, class.variant(), &mut rng)?;
        let mut cache = HashMap::new();
        let witness = examine(oracle, class, epsilon, &t, &mut cache)?;
        queries += cache.len() as u64;
        log::debug!("iteration {it}: T = {t}, {} queries", cache.len());
        if let Some(w) = witness {
            return Ok(TesterReport {
                class,
                verdict: Verdict::Reject,
                queries,
                witness: Some(w),
                iterations_run: it + 1,
                iterations_planned: planned,
                epsilon,
                seed,
                stream,
            });
        }
    }
    Ok(TesterReport {
        class,
        verdict: Verdict::Accept,
        queries,
        witness: None,
        iterations_run: planned,
        iterations_planned: planned,
        epsilon,
        seed,
        stream,
    })
}

pub fn test_subadditive(oracle: &FunctionOracle, epsilon: f64, seed: u64) -> Result<TesterReport, TesterError> {
    run_tester(oracle, TesterClass::Subadditive, epsilon, seed, 0)
}

pub fn test_xos(oracle: &FunctionOracle, epsilon: f64, seed: u64) -> Result<TesterReport, TesterError> {
    run_tester(oracle, TesterClass::Xos, epsilon, seed, 0)
}

pub fn test_nonmonotone_subadditive(
    oracle: &FunctionOracle,
    epsilon: f64,
    seed: u64,
) -> Result<TesterReport, TesterError> {
    run_tester(oracle, TesterClass::SubadditiveNonmonotone, epsilon, seed, 0)
}

/// `trials` runs on streams `0..trials`, spread over `jobs` threads; the
/// result is ordered by stream regardless of `jobs`.
pub fn run_trials(
    oracle: &FunctionOracle,
    class: TesterClass,
    epsilon: f64,
    seed: u64,
    trials: u64,
    jobs: usize,
) -> Result<Vec<TesterReport>, TesterError> {
    let jobs = jobs.max(1) as u64;
    if jobs == 1 {
        return (0..trials).map(|s| run_tester(oracle, class, epsilon, seed, s)).collect();
    }
    let mut reports: Vec<TesterReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                scope.spawn(move || {
                    (0..trials)
                        .filter(|s| s % jobs == w)
                        .map(|s| run_tester(oracle, class, epsilon, seed, s))
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect::<Result<Vec<Vec<_>>, _>>()
    })?
    .into_iter()
    .flatten()
    .collect();
    reports.sort_by_key(|r| r.stream);
    Ok(reports)
}

/// Per-run query bound: `2^(m/2 + lambda sqrt m) / eps` for the monotone
/// testers, and `max_T |Q(T)| * ceil(1/eps)` for the nonmonotone one.
pub fn query_bound(class: TesterClass, m: usize, epsilon: f64) -> Result<f64, TesterError> {
    check_epsilon(epsilon)?;
    Ok(match class {
        TesterClass::SubadditiveNonmonotone => {
            let (lo, hi) = layer_range(m, epsilon, SampleVariant::TwoSided)?;
            let worst: u128 = (lo..=hi).map(|k| binomial(hi, k)).sum();
            worst as f64 * iterations(epsilon) as f64
        }
        _ => (m as f64 / 2.0 + lambda(epsilon) * (m as f64).sqrt()).exp2() / epsilon,
    })
}

/// All sets of `M_lambda` on which the tester would reject.
pub fn bad_sets(oracle: &FunctionOracle, class: TesterClass, epsilon: f64) -> Result<Vec<SetPoint>, TesterError> {
    let m = oracle.m();
    if m >= 63 {
        return Err(TesterError::GroundTooLarge(m));
    }
    let (lo, hi) = layer_range(m, epsilon, class.variant())?;
    let mut bad = Vec::new();
    for mask in 0..(1u64 << m) {
        let size = mask.count_ones() as usize;
        if size < lo || size > hi {
            continue;
        }
        let t = SetPoint::from_mask(mask);
        if examine(oracle, class, epsilon, &t, &mut HashMap::new())?.is_some() {
            bad.push(t);
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::rat;

    fn card(m: usize) -> FunctionOracle {
        FunctionOracle::from_fn(m, |s| Rational::from(s.len()))
    }

    #[test]
    fn support_of_samples() {
        let mut rng = trial_rng(1, 0);
        let (_, hi) = layer_range(4, 0.25, SampleVariant::OneSided).unwrap();
        let bound = 2.0 + lambda(0.25) * 2.0;
        assert!(hi as f64 <= bound);
        for _ in 0..10_000 {
            let s = sample_m_lambda(4, 0.25, SampleVariant::OneSided, &mut rng).unwrap();
            assert!(s.len() as f64 <= bound && s.within(4));
        }
        let (lo, _) = layer_range(16, 0.25, SampleVariant::TwoSided).unwrap();
        let floor = 8.0 - lambda(0.25) * 4.0;
        for _ in 0..10_000 {
            let s = sample_m_lambda(16, 0.25, SampleVariant::TwoSided, &mut rng).unwrap();
            assert!(s.len() >= lo && s.len() as f64 >= floor);
        }
        assert!(matches!(
            sample_m_lambda(4, 1.0, SampleVariant::OneSided, &mut rng),
            Err(TesterError::EpsilonOutOfRange(_))
        ));
    }

    #[test]
    fn modular_accepts() {
        let o = card(8);
        for class in [TesterClass::Subadditive, TesterClass::Xos, TesterClass::SubadditiveNonmonotone] {
            let r = run_tester(&o, class, 0.25, 7, 0).unwrap();
            assert_eq!(r.verdict, Verdict::Accept, "{class:?}");
            assert_eq!(r.iterations_run, 4);
        }
    }

    #[test]
    fn queries_match_counter() {
        let o = card(6);
        let reports = run_trials(&o, TesterClass::Subadditive, 0.2, 3, 20, 3).unwrap();
        assert_eq!(reports.iter().map(|r| r.queries).sum::<u64>(), o.query_count());
        let again = run_trials(&card(6), TesterClass::Subadditive, 0.2, 3, 20, 1).unwrap();
        assert_eq!(reports, again);
    }

    #[test]
    fn planted_violations_are_caught() {
        // Nonempty sets cost 1 except the full set.
        let o = FunctionOracle::from_fn(3, |s| match s.len() {
            0 => rat(0, 1),
            3 => rat(5, 1),
            _ => rat(1, 1),
        });
        let mut cache = HashMap::new();
        let w = examine(&o, TesterClass::Subadditive, 0.5, &SetPoint::full(3), &mut cache).unwrap().unwrap();
        assert!(matches!(&w, TesterWitness::Cover { total, .. } if *total == rat(2, 1)));
        assert!(w.verify(&o));
        assert_eq!(cache.len(), 8);

        let dip = FunctionOracle::from_fn(2, |s| if s.len() == 2 { rat(1, 1) } else { rat(2, 1) });
        let w = examine(&dip, TesterClass::Xos, 0.5, &SetPoint::full(2), &mut HashMap::new()).unwrap().unwrap();
        assert!(matches!(w, TesterWitness::Monotonicity { .. }));
        assert!(w.verify(&dip));
    }

    #[test]
    fn fractional_gadget() {
        // Nonempty proper sets valued 2, full set 7/2.
        let o = FunctionOracle::from_fn(3, |s| match s.len() {
            0 => rat(0, 1),
            1 | 2 => rat(2, 1),
            _ => rat(7, 2),
        });
        let t = SetPoint::full(3);
        assert!(examine(&o, TesterClass::Subadditive, 0.5, &t, &mut HashMap::new()).unwrap().is_none());
        let w = examine(&o, TesterClass::Xos, 0.5, &t, &mut HashMap::new()).unwrap().unwrap();
        assert!(matches!(&w, TesterWitness::FractionalCover { total, .. } if *total == rat(3, 1)));
        assert!(w.verify(&o));
    }

    #[test]
    fn nonmonotone_ignores_monotonicity() {
        let o = FunctionOracle::from_fn(4, |s| if s.len() == 2 { rat(3, 1) } else { rat(2, 1) });
        let t: SetPoint = [0, 1, 2].into_iter().collect();
        assert!(examine(&o, TesterClass::SubadditiveNonmonotone, 0.5, &t, &mut HashMap::new()).unwrap().is_none());
    }

    #[test]
    fn query_bounds() {
        let b = query_bound(TesterClass::Subadditive, 12, 0.1).unwrap();
        assert!(b > 4096.0 * 10.0);
        let nb = query_bound(TesterClass::SubadditiveNonmonotone, 16, 0.1).unwrap();
        assert!(nb < 65536.0 * 10.0);
    }
}
