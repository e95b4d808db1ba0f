//! Finite subsets of `{0, 1, ...}` stored as bit arrays.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitAnd, BitOr, Sub};

use smallvec::SmallVec;

/// A finite set of element indices.
///
/// One machine word holds elements `0..64` inline; larger indices spill to
/// further words. Trailing zero words are always trimmed, so equal sets have
/// equal representations.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SetPoint {
    words: SmallVec<[u64; 1]>,
}

impl SetPoint {
    pub fn empty() -> Self {
        SetPoint { words: SmallVec::new() }
    }

    pub fn from_mask(mask: u64) -> Self {
        let mut s = SetPoint::empty();
        if mask != 0 {
            s.words.push(mask);
        }
        s
    }

    /// `{0, ..., m-1}`.
    pub fn full(m: usize) -> Self {
        let mut s = SetPoint::empty();
        let mut left = m;
        while left >= 64 {
            s.words.push(u64::MAX);
            left -= 64;
        }
        if left > 0 {
            s.words.push((1u64 << left) - 1);
        }
        s
    }

    pub fn singleton(i: usize) -> Self {
        let mut s = SetPoint::empty();
        s.insert(i);
        s
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(elems: I) -> Self {
        let mut s = SetPoint::empty();
        for e in elems {
            s.insert(e);
        }
        s
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, i: usize) {
        let (w, b) = (i / 64, i % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn remove(&mut self, i: usize) {
        let (w, b) = (i / 64, i % 64);
        if w < self.words.len() {
            self.words[w] &= !(1 << b);
            self.trim();
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        let (w, b) = (i / 64, i % 64);
        w < self.words.len() && self.words[w] >> b & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// The set as a single word, if every element is below 64.
    pub fn to_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    /// Like [`to_mask`](Self::to_mask) but panics on large elements.
    pub fn mask(&self) -> u64 {
        self.to_mask().expect("set does not fit in one word")
    }

    /// Largest element plus one, or 0 for the empty set.
    pub fn bound(&self) -> usize {
        match self.words.last() {
            None => 0,
            Some(w) => (self.words.len() - 1) * 64 + 64 - w.leading_zeros() as usize,
        }
    }

    /// True when every element is `< m`.
    pub fn within(&self, m: usize) -> bool {
        self.bound() <= m
    }

    pub fn union(&self, other: &SetPoint) -> SetPoint {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, s) in words.iter_mut().zip(short.words.iter()) {
            *w |= s;
        }
        SetPoint { words }
    }

    pub fn intersection(&self, other: &SetPoint) -> SetPoint {
        let mut s = SetPoint {
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(a, b)| a & b)
                .collect(),
        };
        s.trim();
        s
    }

    pub fn difference(&self, other: &SetPoint) -> SetPoint {
        let mut s = self.clone();
        for (w, o) in s.words.iter_mut().zip(other.words.iter()) {
            *w &= !o;
        }
        s.trim();
        s
    }

    pub fn is_subset_of(&self, other: &SetPoint) -> bool {
        self.words.len() <= other.words.len()
            && self.words.iter().zip(other.words.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn is_superset_of(&self, other: &SetPoint) -> bool {
        other.is_subset_of(self)
    }

    /// Neither set contains the other.
    pub fn incomparable(&self, other: &SetPoint) -> bool {
        !self.is_subset_of(other) && !other.is_subset_of(self)
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Characteristic vector of length `m`.
    pub fn indicator(&self, m: usize) -> Vec<bool> {
        (0..m).map(|i| self.contains(i)).collect()
    }

    /// Smallest element in `self` xor `other`.
    fn first_difference(&self, other: &SetPoint) -> Option<usize> {
        let n = self.words.len().max(other.words.len());
        (0..n).find_map(|i| {
            let a = self.words.get(i).copied().unwrap_or(0);
            let b = other.words.get(i).copied().unwrap_or(0);
            let x = a ^ b;
            (x != 0).then(|| i * 64 + x.trailing_zeros() as usize)
        })
    }

    fn has_element_above(&self, d: usize) -> bool {
        self.bound() > d + 1
    }
}

/// Lexicographic order on the ascending element sequences, so
/// `{} < {0} < {0,1} < {0,2} < {1}`.
impl Ord for SetPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.first_difference(other) {
            None => Ordering::Equal,
            Some(d) => {
                if self.contains(d) {
                    if other.has_element_above(d) {
                        Ordering::Less
                    } else {
                        Ordering::Greater
                    }
                } else if self.has_element_above(d) {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
        }
    }
}

impl PartialOrd for SetPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for SetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, e) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

impl BitOr for &SetPoint {
    type Output = SetPoint;
    fn bitor(self, rhs: &SetPoint) -> SetPoint {
        self.union(rhs)
    }
}

impl BitAnd for &SetPoint {
    type Output = SetPoint;
    fn bitand(self, rhs: &SetPoint) -> SetPoint {
        self.intersection(rhs)
    }
}

impl Sub for &SetPoint {
    type Output = SetPoint;
    fn sub(self, rhs: &SetPoint) -> SetPoint {
        self.difference(rhs)
    }
}

impl FromIterator<usize> for SetPoint {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        SetPoint::from_elements(iter)
    }
}

impl serde::Serialize for SetPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> serde::Deserialize<'de> for SetPoint {
    /// Accepts any index list; strict ordering is checked by the document parser.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Ok(SetPoint::from_elements(v))
    }
}

/// Shorthand for a set literal.
pub fn set(elems: &[usize]) -> SetPoint {
    SetPoint::from_elements(elems.iter().copied())
}

/// Subsets of `mask`, in increasing numeric order, including `0` and `mask`.
pub fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            Some(((cur | !mask).wrapping_add(1)) & mask)
        };
        Some(cur)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn order_is_lexicographic() {
        let mut v = vec![set(&[1]), set(&[0, 2]), set(&[]), set(&[0, 1]), set(&[0])];
        v.sort();
        assert_eq!(v, vec![set(&[]), set(&[0]), set(&[0, 1]), set(&[0, 2]), set(&[1])]);
        assert!(set(&[70]) > set(&[3, 70]));
        assert!(set(&[3]) < set(&[3, 70]));
    }

    #[test]
    fn wide_sets() {
        let a = set(&[1, 65, 130]);
        let b = set(&[65, 2]);
        assert_eq!(a.intersection(&b), set(&[65]));
        assert_eq!(a.union(&b).to_vec(), vec![1, 2, 65, 130]);
        assert_eq!(a.bound(), 131);
        assert!(a.to_mask().is_none());
        let mut c = a.clone();
        c.remove(130);
        c.remove(65);
        assert_eq!(c, set(&[1]));
        assert_eq!(c.to_mask(), Some(2));
        assert_eq!(SetPoint::full(64).len(), 64);
        assert_eq!(SetPoint::full(65).bound(), 65);
    }

    #[test]
    fn submask_enumeration() {
        let v: Vec<u64> = submasks(0b101).collect();
        assert_eq!(v, vec![0, 1, 4, 5]);
        assert_eq!(submasks(0).count(), 1);
    }

    fn arb_set() -> impl Strategy<Value = SetPoint> {
        proptest::collection::vec(0usize..140, 0..12).prop_map(SetPoint::from_elements)
    }

    proptest! {
        #[test]
        fn lattice_laws(s in arb_set(), t in arb_set(), u in arb_set()) {
            let i = s.intersection(&t);
            let un = s.union(&t);
            prop_assert!(i.is_subset_of(&s));
            prop_assert!(s.is_subset_of(&un));
            prop_assert_eq!(un.len() + i.len(), s.len() + t.len());
            prop_assert_eq!(s.union(&t.union(&u)), s.union(&t).union(&u));
            prop_assert_eq!(s.intersection(&t.intersection(&u)), i.intersection(&u));
            prop_assert_eq!(s.union(&s), s.clone());
            prop_assert_eq!(t.intersection(&s), i.clone());
        }

        #[test]
        fn order_matches_sequences(s in arb_set(), t in arb_set()) {
            prop_assert_eq!(s.cmp(&t), s.to_vec().cmp(&t.to_vec()));
        }
    }
}
