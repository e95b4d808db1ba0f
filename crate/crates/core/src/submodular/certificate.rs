use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::SubmodularError;
use crate::ground::{strict_set, GroundError, PartialSetFunction, Rational, SetPoint};
use crate::lp::{ExactLP, FarkasWitness};

/// `({a, b}, a ∪ b, a ∩ b)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareTuple {
    pub a: SetPoint,
    pub b: SetPoint,
    pub top: SetPoint,
    pub bottom: SetPoint,
}

impl SquareTuple {
    /// Stores the middle pair in sorted order.
    pub fn new(a: SetPoint, b: SetPoint) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let top = a.union(&b);
        let bottom = a.intersection(&b);
        SquareTuple { a, b, top, bottom }
    }

    /// The middle sets are comparable, so the square is `{top, bottom}` twice.
    pub fn is_degenerate(&self) -> bool {
        !self.a.incomparable(&self.b)
    }

    pub fn is_well_formed(&self) -> bool {
        self.top == self.a.union(&self.b) && self.bottom == self.a.intersection(&self.b)
    }
}

/// A multiset of squares refuting submodular extendibility.
///
/// Valid when every set whose middle count differs from its top/bottom
/// count is defined, and `sum_i f_i (tb(T_i) - m(T_i)) > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SquareCertificate {
    pub tuples: Vec<(SquareTuple, u64)>,
}

impl SquareCertificate {
    /// `tb(S) - m(S)` for every involved set with nonzero balance, sorted.
    pub fn net_counts(&self) -> BTreeMap<SetPoint, i128> {
        let mut net: BTreeMap<SetPoint, i128> = BTreeMap::new();
        for (t, k) in &self.tuples {
            let k = *k as i128;
            *net.entry(t.top.clone()).or_default() += k;
            *net.entry(t.bottom.clone()).or_default() += k;
            *net.entry(t.a.clone()).or_default() -= k;
            *net.entry(t.b.clone()).or_default() -= k;
        }
        net.retain(|_, v| *v != 0);
        net
    }

    /// Every set appearing in some tuple, sorted and deduplicated.
    pub fn involved_sets(&self) -> Vec<SetPoint> {
        let mut v: Vec<SetPoint> = self
            .tuples
            .iter()
            .flat_map(|(t, _)| [t.a.clone(), t.b.clone(), t.top.clone(), t.bottom.clone()])
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn total_squares(&self) -> u64 {
        self.tuples.iter().map(|(_, k)| *k).sum()
    }

    /// Merges equal tuples and drops zero counts; order follows first appearance.
    pub fn normalized(&self) -> SquareCertificate {
        let mut order: Vec<SquareTuple> = Vec::new();
        let mut counts: HashMap<SquareTuple, u64> = HashMap::new();
        for (t, k) in &self.tuples {
            if *k == 0 {
                continue;
            }
            let e = counts.entry(t.clone()).or_insert_with(|| {
                order.push(t.clone());
                0
            });
            *e += k;
        }
        SquareCertificate { tuples: order.into_iter().map(|t| { let k = counts[&t]; (t, k) }).collect() }
    }

    /// `sum_i f_i (tb(T_i) - m(T_i))`, or `None` when an unbalanced set is undefined.
    pub fn slack(&self, h: &PartialSetFunction) -> Option<Rational> {
        let mut sum = Rational::zero();
        for (s, n) in self.net_counts() {
            let f = h.get(&s)?;
            sum += f * &Rational::from_bigints((n).into(), 1.into());
        }
        Some(sum)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = CertificateDoc {
            tuples: self
                .tuples
                .iter()
                .map(|(t, k)| TupleDoc {
                    a: t.a.to_vec(),
                    b: t.b.to_vec(),
                    top: Some(t.top.to_vec()),
                    bottom: Some(t.bottom.to_vec()),
                    count: *k,
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("plain data serializes")
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    /// Parses `{"tuples":[{"a":[..],"b":[..],"count":k}]}` over ground set size `m`;
    /// top and bottom are recomputed.
    pub fn from_json(bytes: &[u8], m: usize) -> Result<Self, GroundError> {
        let doc: CertificateDoc = serde_json::from_slice(bytes)?;
        let mut tuples = Vec::with_capacity(doc.tuples.len());
        for t in doc.tuples {
            let a = strict_set(t.a, m)?;
            let b = strict_set(t.b, m)?;
            tuples.push((SquareTuple::new(a, b), t.count));
        }
        Ok(SquareCertificate { tuples })
    }
}

#[derive(Serialize, Deserialize)]
struct TupleDoc {
    a: Vec<usize>,
    b: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    top: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bottom: Option<Vec<usize>>,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct CertificateDoc {
    tuples: Vec<TupleDoc>,
}

/// Scales nonnegative rationals by the least common multiple of their
/// denominators, e.g. `(1/2, 1/3)` becomes `(3, 2)`.
pub fn integral_multiplicities(ys: &[Rational]) -> Result<Vec<u64>, SubmodularError> {
    if ys.iter().any(|y| y.is_negative()) {
        return Err(SubmodularError::WitnessInvalid("negative square multiplier".into()));
    }
    let scale = Rational::from(Rational::denominator_lcm(ys));
    ys.iter()
        .map(|y| {
            (y * &scale).numer().to_u64().ok_or_else(|| {
                SubmodularError::WitnessInvalid("square multiplicity exceeds 64 bits".into())
            })
        })
        .collect()
}

/// Checks both certificate properties exactly.
pub fn verify_square_certificate(cert: &SquareCertificate, h: &PartialSetFunction) -> bool {
    if !cert.tuples.iter().all(|(t, _)| t.is_well_formed() && t.top.within(h.m())) {
        return false;
    }
    match cert.slack(h) {
        Some(s) => s.is_positive(),
        None => false,
    }
}

/// The LP over a set family together with the square behind each row.
#[derive(Debug, Clone)]
pub struct FamilyLp {
    pub lp: ExactLP,
    pub family: Vec<SetPoint>,
    /// For each LP row, the square it encodes, if any.
    pub row_squares: Vec<Option<SquareTuple>>,
}

/// Turns a Farkas witness of the family LP into an integral certificate.
///
/// Multipliers on square rows are scaled by the least common multiple of
/// their denominators; any common multiple, such as the product, also works.
pub fn extract_square_certificate(
    h: &PartialSetFunction,
    flp: &FamilyLp,
    farkas: &FarkasWitness,
) -> Result<SquareCertificate, SubmodularError> {
    if !crate::lp::verify_farkas(&flp.lp, farkas)? {
        return Err(SubmodularError::WitnessInvalid("Farkas witness does not verify".into()));
    }
    let weighted: Vec<(&SquareTuple, &Rational)> = flp
        .row_squares
        .iter()
        .zip(&farkas.multipliers)
        .filter_map(|(t, y)| Some((t.as_ref()?, y)))
        .filter(|(_, y)| !y.is_zero())
        .collect();
    let ys: Vec<Rational> = weighted.iter().map(|(_, y)| (*y).clone()).collect();
    let counts = integral_multiplicities(&ys)?;
    let tuples = weighted
        .iter()
        .zip(counts)
        .filter(|((t, _), _)| !t.is_degenerate())
        .map(|((t, _), k)| ((*t).clone(), k))
        .collect();
    let cert = SquareCertificate { tuples }.normalized();
    if !verify_square_certificate(&cert, h) {
        return Err(SubmodularError::WitnessInvalid("extracted certificate does not verify".into()));
    }
    Ok(cert)
}

/// A square that `value` violates, which exists whenever `cert` is valid and
/// `value` agrees with `h` on the defined sets.
pub fn refuting_square<F>(cert: &SquareCertificate, value: F) -> Result<Option<SquareTuple>, SubmodularError>
where
    F: Fn(&SetPoint) -> Option<Rational>,
{
    for (t, _) in &cert.tuples {
        let get = |s: &SetPoint| value(s).ok_or_else(|| SubmodularError::IncompleteAssignment(s.clone()));
        let lhs = get(&t.a)? + get(&t.b)?;
        let rhs = get(&t.top)? + get(&t.bottom)?;
        if lhs < rhs {
            return Ok(Some(t.clone()));
        }
    }
    Ok(None)
}
