use std::collections::HashSet;

use super::SubmodularError;
use crate::ground::SetPoint;

pub const DEFAULT_CLOSURE_CAP: usize = 50_000;

/// Smallest family containing `d` that is closed under union and intersection,
/// sorted. Fails once more than `cap` sets have been produced.
pub fn lattice_closure(d: &[SetPoint], cap: usize) -> Result<Vec<SetPoint>, SubmodularError> {
    let mut seen: HashSet<SetPoint> = HashSet::new();
    let mut all: Vec<SetPoint> = Vec::new();
    for s in d {
        if seen.insert(s.clone()) {
            all.push(s.clone());
        }
    }
    if all.len() > cap {
        return Err(SubmodularError::ClosureCapExceeded { size: all.len(), cap });
    }
    // Every set is combined once with every set before it.
    let mut next = 0;
    while next < all.len() {
        let x = all[next].clone();
        for k in 0..next {
            for s in [x.union(&all[k]), x.intersection(&all[k])] {
                if !seen.contains(&s) {
                    seen.insert(s.clone());
                    all.push(s);
                    if all.len() > cap {
                        return Err(SubmodularError::ClosureCapExceeded { size: all.len(), cap });
                    }
                }
            }
        }
        next += 1;
    }
    all.sort();
    Ok(all)
}

/// Members of the lattice closure that lie between two defined sets.
pub fn interval_family(d: &[SetPoint], cap: usize) -> Result<Vec<SetPoint>, SubmodularError> {
    let closure = lattice_closure(d, cap)?;
    Ok(closure
        .into_iter()
        .filter(|s| d.iter().any(|hi| s.is_subset_of(hi)) && d.iter().any(|lo| lo.is_subset_of(s)))
        .collect())
}

/// No member contains another.
pub fn is_antichain(d: &[SetPoint]) -> bool {
    d.iter().enumerate().all(|(i, a)| d[i + 1..].iter().all(|b| a.incomparable(b)))
}
