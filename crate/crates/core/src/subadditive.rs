//! Subadditive extension through minimum-cost covers.
//!
//! A partial function extends to a monotone subadditive function exactly when
//! no defined set can be covered more cheaply than its own value by other
//! defined sets. Without monotonicity only covers whose union is exactly the
//! target count.

use serde::Serialize;

use crate::ground::{GroundError, PartialSetFunction, Rational, SetPoint, ValueClass};
use crate::xos::{self, XosError};

/// Targets larger than this are refused by the cover DP.
pub const MAX_COVER_TARGET: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum SubadditiveError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error("cover target has {0} elements; the limit is {MAX_COVER_TARGET}")]
    TargetTooLarge(usize),
    #[error(transparent)]
    Xos(#[from] XosError),
    #[error("invalid gadget: {0}")]
    InvalidGadget(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverVariant {
    /// Covers may overshoot the target.
    Monotone,
    /// Covers use only subsets of the target and must union to it.
    ExactUnion,
}

/// A cheapest cover: positions into the partial function and total cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    pub cost: Rational,
    pub members: Vec<usize>,
}

/// A defined set that other defined sets cover too cheaply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverViolation {
    pub target: SetPoint,
    pub target_value: Rational,
    pub cover: Vec<SetPoint>,
    pub cover_sum: Rational,
}

impl CoverViolation {
    /// Checks the violation against `h` without any solver.
    pub fn verify(&self, h: &PartialSetFunction, variant: CoverVariant) -> bool {
        if self.cover.is_empty() || h.get(&self.target) != Some(&self.target_value) {
            return false;
        }
        let mut sum = Rational::zero();
        let mut union = SetPoint::empty();
        for s in &self.cover {
            match h.get(s) {
                Some(v) => sum += v,
                None => return false,
            }
            union = union.union(s);
        }
        let shape = match variant {
            CoverVariant::Monotone => self.target.is_subset_of(&union),
            CoverVariant::ExactUnion => union == self.target,
        };
        shape && sum == self.cover_sum && sum < self.target_value
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubadditiveVerdict {
    Extendible,
    NotExtendible(CoverViolation),
}

impl SubadditiveVerdict {
    pub fn is_extendible(&self) -> bool {
        matches!(self, SubadditiveVerdict::Extendible)
    }
}

/// Positions of `t`'s elements, used to compress masks to `|t|` bits.
fn compress(t: &SetPoint, s: &SetPoint) -> u32 {
    t.iter()
        .enumerate()
        .filter(|(_, e)| s.contains(*e))
        .fold(0u32, |acc, (k, _)| acc | 1 << k)
}

/// Cheapest cover of `t` by defined sets.
pub fn min_cover(
    h: &PartialSetFunction,
    t: &SetPoint,
    variant: CoverVariant,
) -> Result<Option<Cover>, SubadditiveError> {
    let k = t.len();
    if k > MAX_COVER_TARGET {
        return Err(SubadditiveError::TargetTooLarge(k));
    }
    let usable = |s: &SetPoint| match variant {
        CoverVariant::Monotone => true,
        CoverVariant::ExactUnion => s.is_subset_of(t),
    };
    if k == 0 {
        // Every family covers the empty set; at least one member is required.
        let best = h
            .points()
            .iter()
            .enumerate()
            .filter(|(_, (s, _))| usable(s))
            .min_by(|a, b| a.1 .1.cmp(&b.1 .1).then(a.0.cmp(&b.0)));
        return Ok(best.map(|(i, (_, v))| Cover { cost: v.clone(), members: vec![i] }));
    }

    let moves: Vec<(u32, usize)> = h
        .points()
        .iter()
        .enumerate()
        .filter(|(_, (s, _))| usable(s))
        .map(|(i, (s, _))| (compress(t, s), i))
        .filter(|(mask, _)| *mask != 0)
        .collect();
    let full = (1u32 << k) - 1;
    let mut best: Vec<Option<Rational>> = vec![None; 1 << k];
    let mut parent: Vec<(u32, usize)> = vec![(0, usize::MAX); 1 << k];
    best[0] = Some(Rational::zero());
    for mask in 0..full {
        let Some(cur) = best[mask as usize].clone() else { continue };
        for &(add, i) in &moves {
            let next = (mask | add) as usize;
            if next as u32 == mask {
                continue;
            }
            let cand = &cur + h.value_at(i);
            if best[next].as_ref().is_none_or(|b| cand < *b) {
                best[next] = Some(cand);
                parent[next] = (mask, i);
            }
        }
    }
    let Some(cost) = best[full as usize].clone() else { return Ok(None) };
    let mut members = Vec::new();
    let mut at = full;
    while at != 0 {
        let (prev, i) = parent[at as usize];
        members.push(i);
        at = prev;
    }
    members.sort_unstable();
    Ok(Some(Cover { cost, members }))
}

/// Cost of the cheapest cover, or `None` when `t` cannot be covered.
pub fn min_cover_value(
    h: &PartialSetFunction,
    t: &SetPoint,
    variant: CoverVariant,
) -> Result<Option<Rational>, SubadditiveError> {
    Ok(min_cover(h, t, variant)?.map(|c| c.cost))
}

fn extend_with(
    h: &PartialSetFunction,
    variant: CoverVariant,
) -> Result<SubadditiveVerdict, SubadditiveError> {
    h.check_class(ValueClass::Subadditive)?;
    for (t, f) in h.points() {
        let cover = min_cover(h, t, variant)?.expect("a defined set covers itself");
        if cover.cost < *f {
            return Ok(SubadditiveVerdict::NotExtendible(CoverViolation {
                target: t.clone(),
                target_value: f.clone(),
                cover: cover.members.iter().map(|&i| h.set_at(i).clone()).collect(),
                cover_sum: cover.cost,
            }));
        }
    }
    Ok(SubadditiveVerdict::Extendible)
}

/// Decides extension to a monotone subadditive function.
pub fn extend_monotone_subadditive(
    h: &PartialSetFunction,
) -> Result<SubadditiveVerdict, SubadditiveError> {
    extend_with(h, CoverVariant::Monotone)
}

/// Decides extension to a subadditive function that need not be monotone.
pub fn extend_general_subadditive(
    h: &PartialSetFunction,
) -> Result<SubadditiveVerdict, SubadditiveError> {
    extend_with(h, CoverVariant::ExactUnion)
}

/// Optimal factor together with the defined point attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Approximation {
    pub alpha: Rational,
    pub argmax: SetPoint,
}

/// Smallest `alpha` such that some monotone subadditive `g` has
/// `f_i <= g(T_i) <= alpha * f_i`.
///
/// The largest monotone subadditive function below the caps `alpha * f` is
/// the cover roof of the caps, which scales linearly in `alpha`, so the
/// optimum is the worst ratio between a value and its cover roof.
pub fn approx_monotone_subadditive_exact(
    h: &PartialSetFunction,
) -> Result<Approximation, SubadditiveError> {
    h.check_positive()?;
    let mut best: Option<Approximation> = None;
    for (t, f) in h.points() {
        let roof = min_cover_value(h, t, CoverVariant::Monotone)?.expect("self cover");
        let ratio = f / &roof;
        if best.as_ref().is_none_or(|b| ratio > b.alpha) {
            best = Some(Approximation { alpha: ratio, argmax: t.clone() });
        }
    }
    best.ok_or_else(|| SubadditiveError::InvalidGadget("empty partial function".into()))
}

/// Upper bound on the subadditive factor via the optimal XOS factor.
pub fn approx_subadditive_via_xos(h: &PartialSetFunction) -> Result<Rational, SubadditiveError> {
    Ok(xos::approx_xos(h)?.alpha)
}

/// Result of a cover-freeness check; the witness is `(target, cover)` by position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverFree {
    Yes,
    No { target: usize, cover: Vec<usize> },
}

/// Checks that no member lies inside the union of `r` other members.
///
/// Families with at most `r` members are checked against the union of all
/// the other members, so that a family containing a pair `A ⊆ B` is never
/// reported cover-free.
pub fn is_r_cover_free(family: &[SetPoint], r: usize) -> CoverFree {
    use itertools::Itertools;
    assert!(r >= 1, "r must be positive");
    let n = family.len();
    if n < 2 {
        return CoverFree::Yes;
    }
    let size = r.min(n - 1);
    for (t, target) in family.iter().enumerate() {
        let others: Vec<usize> = (0..n).filter(|&j| j != t).collect();
        for combo in others.into_iter().combinations(size) {
            let union = combo.iter().fold(SetPoint::empty(), |u, &j| u.union(&family[j]));
            if target.is_subset_of(&union) {
                return CoverFree::No { target: t, cover: combo };
            }
        }
    }
    CoverFree::Yes
}

/// The hardness gadget: every set of `cover_sets` valued 1 and the full set
/// valued `k + 1`, extendible exactly when every set cover of `[m]` by
/// `cover_sets` has more than `k` members.
pub fn gen_set_cover_gadget(
    m: usize,
    cover_sets: &[SetPoint],
    k: u64,
) -> Result<PartialSetFunction, SubadditiveError> {
    let full = SetPoint::full(m);
    if cover_sets.contains(&full) {
        return Err(SubadditiveError::InvalidGadget(
            "the full ground set is reserved for the gadget's top value".into(),
        ));
    }
    let mut pts: Vec<(SetPoint, Rational)> =
        cover_sets.iter().map(|s| (s.clone(), Rational::one())).collect();
    pts.push((full, Rational::from(k as i64 + 1)));
    Ok(PartialSetFunction::new(m, pts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{rat, set};

    fn h(m: usize, pts: &[(&[usize], i64)]) -> PartialSetFunction {
        let pts: Vec<(&[usize], Rational)> = pts.iter().map(|(s, v)| (*s, Rational::from(*v))).collect();
        PartialSetFunction::from_literal(m, &pts)
    }

    #[test]
    fn cover_values() {
        let a = h(2, &[(&[0], 1), (&[1], 1)]);
        assert_eq!(min_cover_value(&a, &set(&[0, 1]), CoverVariant::Monotone).unwrap(), Some(rat(2, 1)));
        let b = h(3, &[(&[0, 1], 1), (&[1, 2], 1)]);
        assert_eq!(min_cover_value(&b, &set(&[0, 1, 2]), CoverVariant::Monotone).unwrap(), Some(rat(2, 1)));
        let c = h(2, &[(&[0], 1)]);
        assert_eq!(min_cover_value(&c, &set(&[0, 1]), CoverVariant::Monotone).unwrap(), None);
        assert_eq!(min_cover_value(&c, &set(&[]), CoverVariant::Monotone).unwrap(), Some(rat(1, 1)));
        assert_eq!(min_cover_value(&c, &set(&[]), CoverVariant::ExactUnion).unwrap(), None);
    }

    #[test]
    fn monotone_examples() {
        assert!(extend_monotone_subadditive(&h(2, &[(&[0], 1), (&[1], 1), (&[0, 1], 2)])).unwrap().is_extendible());
        let bad = h(3, &[(&[0, 1], 1), (&[1, 2], 1), (&[0, 1, 2], 3)]);
        match extend_monotone_subadditive(&bad).unwrap() {
            SubadditiveVerdict::NotExtendible(v) => {
                assert_eq!(v.cover, vec![set(&[0, 1]), set(&[1, 2])]);
                assert_eq!(v.cover_sum, rat(2, 1));
                assert!(v.verify(&bad, CoverVariant::Monotone));
            }
            other => panic!("{other:?}"),
        }
        let ok = PartialSetFunction::from_literal(
            3,
            &[(&[0], rat(1, 1)), (&[1], rat(1, 1)), (&[2], rat(1, 1)), (&[0, 1, 2], rat(5, 2))],
        );
        assert!(extend_monotone_subadditive(&ok).unwrap().is_extendible());
    }

    #[test]
    fn monotonicity_is_a_singleton_cover() {
        let down = h(2, &[(&[0], 3), (&[0, 1], 2)]);
        let SubadditiveVerdict::NotExtendible(v) = extend_monotone_subadditive(&down).unwrap() else {
            panic!()
        };
        assert_eq!(v.target, set(&[0]));
        assert_eq!(v.cover, vec![set(&[0, 1])]);
        assert!(extend_general_subadditive(&down).unwrap().is_extendible());
    }

    #[test]
    fn general_examples() {
        let a = h(2, &[(&[0], 1), (&[1], 1), (&[0, 1], 3)]);
        let SubadditiveVerdict::NotExtendible(v) = extend_general_subadditive(&a).unwrap() else { panic!() };
        assert!(v.verify(&a, CoverVariant::ExactUnion));
        let b = h(3, &[(&[0, 1], 1), (&[1, 2], 1), (&[0, 1, 2], 3)]);
        assert!(!extend_general_subadditive(&b).unwrap().is_extendible());
        let c = h(3, &[(&[0], 1), (&[1, 2], 1), (&[0, 1], 5)]);
        assert!(extend_general_subadditive(&c).unwrap().is_extendible());
    }

    #[test]
    fn approximation_examples() {
        let a = h(3, &[(&[0], 1), (&[1], 1), (&[2], 1), (&[0, 1, 2], 6)]);
        assert_eq!(approx_monotone_subadditive_exact(&a).unwrap().alpha, rat(2, 1));
        let b = h(3, &[(&[0, 1], 1), (&[1, 2], 1), (&[0, 1, 2], 3)]);
        let ap = approx_monotone_subadditive_exact(&b).unwrap();
        assert_eq!(ap.alpha, rat(3, 2));
        assert_eq!(ap.argmax, set(&[0, 1, 2]));
        let ext = h(2, &[(&[0], 1), (&[1], 1), (&[0, 1], 2)]);
        assert_eq!(approx_monotone_subadditive_exact(&ext).unwrap().alpha, rat(1, 1));
        let zero = h(1, &[(&[0], 0)]);
        assert!(approx_monotone_subadditive_exact(&zero).is_err());
    }

    #[test]
    fn cover_free_examples() {
        assert_eq!(is_r_cover_free(&[set(&[0]), set(&[1]), set(&[2])], 2), CoverFree::Yes);
        let fam = [set(&[0, 1]), set(&[1, 2]), set(&[0, 2]), set(&[0, 1, 2])];
        match is_r_cover_free(&fam, 2) {
            CoverFree::No { target, cover } => {
                let u = cover.iter().fold(SetPoint::empty(), |u, &j| u.union(&fam[j]));
                assert!(fam[target].is_subset_of(&u));
            }
            CoverFree::Yes => panic!(),
        }
        assert!(matches!(is_r_cover_free(&[set(&[0]), set(&[0, 1])], 3), CoverFree::No { .. }));
    }

    #[test]
    fn gadget() {
        let v = [set(&[0, 1]), set(&[1, 2])];
        assert!(extend_monotone_subadditive(&gen_set_cover_gadget(3, &v, 1).unwrap()).unwrap().is_extendible());
        assert!(!extend_monotone_subadditive(&gen_set_cover_gadget(3, &v, 2).unwrap()).unwrap().is_extendible());
        assert!(gen_set_cover_gadget(2, &[set(&[0, 1])], 0).is_err());
    }

    #[test]
    fn rejects_negative_values() {
        let neg = h(1, &[(&[0], -1)]);
        assert!(matches!(
            extend_monotone_subadditive(&neg),
            Err(SubadditiveError::Ground(GroundError::NegativeValueForClass { .. }))
        ));
    }
}
