use serde::{Deserialize, Serialize};

use super::model::{ExactLP, LpError, Relation};
use crate::ground::Rational;

/// One multiplier per constraint certifying that an [`ExactLP`] has no
/// feasible point.
///
/// Each row is read in `<=` form (a `>=` row `a.x >= b` as `-a.x <= -b`);
/// inequality multipliers must be nonnegative, equality multipliers are free.
/// The combination `c.x <= d` holds for every feasible `x`, so the witness is
/// valid when `c.x > d` everywhere on the variable box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FarkasWitness {
    pub multipliers: Vec<Rational>,
}

/// The combined row `c.x <= d` of a witness.
pub fn combined_row(lp: &ExactLP, w: &FarkasWitness) -> Result<(Vec<Rational>, Rational), LpError> {
    if w.multipliers.len() != lp.num_constraints() {
        return Err(LpError::DimensionMismatch(format!(
            "{} multipliers for {} constraints",
            w.multipliers.len(),
            lp.num_constraints()
        )));
    }
    lp.check_dimensions()?;
    let mut c = vec![Rational::zero(); lp.num_vars()];
    let mut d = Rational::zero();
    for (row, y) in lp.constraints().iter().zip(&w.multipliers) {
        if y.is_zero() {
            continue;
        }
        let y = if row.rel == Relation::Ge { -y } else { y.clone() };
        for (j, a) in &row.coeffs {
            c[*j] += &y * a;
        }
        d += &y * &row.rhs;
    }
    Ok((c, d))
}

/// Checks the witness from the LP data alone.
pub fn verify_farkas(lp: &ExactLP, w: &FarkasWitness) -> Result<bool, LpError> {
    let (c, d) = combined_row(lp, w)?;
    for (row, y) in lp.constraints().iter().zip(&w.multipliers) {
        if row.rel != Relation::Eq && y.is_negative() {
            return Ok(false);
        }
    }
    // An empty box makes any combination a contradiction.
    if lp
        .bounds()
        .iter()
        .any(|b| matches!((&b.lower, &b.upper), (Some(l), Some(u)) if l > u))
    {
        return Ok(true);
    }
    let mut min = Rational::zero();
    for (cj, b) in c.iter().zip(lp.bounds()) {
        if cj.is_positive() {
            match &b.lower {
                Some(l) => min += cj * l,
                None => return Ok(false),
            }
        } else if cj.is_negative() {
            match &b.upper {
                Some(u) => min += cj * u,
                None => return Ok(false),
            }
        }
    }
    Ok(min > d)
}
