use std::fmt;

use crate::ground::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Optional lower and upper bound of one variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Bounds {
    pub fn free() -> Self {
        Bounds { lower: None, upper: None }
    }

    pub fn nonnegative() -> Self {
        Bounds { lower: Some(Rational::zero()), upper: None }
    }

    pub fn between(lower: Rational, upper: Rational) -> Self {
        Bounds { lower: Some(lower), upper: Some(upper) }
    }

    pub fn at_least(lower: Rational) -> Self {
        Bounds { lower: Some(lower), upper: None }
    }

    pub fn at_most(upper: Rational) -> Self {
        Bounds { lower: None, upper: Some(upper) }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lower.as_ref().is_none_or(|l| x >= l) && self.upper.as_ref().is_none_or(|u| x <= u)
    }
}

/// One sparse row `sum coeffs[k].1 * x[coeffs[k].0]  rel  rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub rel: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(j, a)| a * &x[*j]).sum()
    }

    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.rel {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub direction: Direction,
    pub coeffs: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// A linear program over exact rationals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExactLP {
    names: Vec<String>,
    bounds: Vec<Bounds>,
    constraints: Vec<Constraint>,
    objective: Option<Objective>,
}

impl ExactLP {
    pub fn new() -> Self {
        ExactLP::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, bounds: Bounds) -> usize {
        self.names.push(name.into());
        self.bounds.push(bounds);
        self.names.len() - 1
    }

    /// Adds a row; repeated indices are summed and zero coefficients dropped.
    pub fn add_constraint(
        &mut self,
        coeffs: impl IntoIterator<Item = (usize, Rational)>,
        rel: Relation,
        rhs: Rational,
    ) -> usize {
        let coeffs = combine(coeffs);
        self.constraints.push(Constraint { coeffs, rel, rhs });
        self.constraints.len() - 1
    }

    pub fn set_objective(
        &mut self,
        direction: Direction,
        coeffs: impl IntoIterator<Item = (usize, Rational)>,
    ) {
        self.objective = Some(Objective { direction, coeffs: combine(coeffs) });
    }

    pub fn clear_objective(&mut self) {
        self.objective = None;
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<&Objective> {
        self.objective.as_ref()
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective
            .as_ref()
            .map(|o| o.coeffs.iter().map(|(j, c)| c * &x[*j]).sum())
            .unwrap_or_default()
    }

    /// Every row and bound holds exactly at `x`.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && self.bounds.iter().zip(x).all(|(b, v)| b.contains(v))
            && self.constraints.iter().all(|c| c.satisfied_by(x))
    }

    pub fn check_dimensions(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let bad_row = self.constraints.iter().position(|c| c.coeffs.iter().any(|(j, _)| *j >= n));
        if let Some(i) = bad_row {
            return Err(LpError::DimensionMismatch(format!(
                "constraint {i} references a variable beyond {n}"
            )));
        }
        if let Some(o) = &self.objective {
            if o.coeffs.iter().any(|(j, _)| *j >= n) {
                return Err(LpError::DimensionMismatch(format!(
                    "objective references a variable beyond {n}"
                )));
            }
        }
        Ok(())
    }
}

fn combine(coeffs: impl IntoIterator<Item = (usize, Rational)>) -> Vec<(usize, Rational)> {
    let mut v: Vec<(usize, Rational)> = coeffs.into_iter().collect();
    v.sort_by_key(|(j, _)| *j);
    let mut out: Vec<(usize, Rational)> = Vec::with_capacity(v.len());
    for (j, a) in v {
        match out.last_mut() {
            Some((k, b)) if *k == j => *b += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|(_, a)| !a.is_zero());
    out
}

impl fmt::Display for ExactLP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |coeffs: &[(usize, Rational)]| {
            if coeffs.is_empty() {
                return "0".to_string();
            }
            coeffs
                .iter()
                .map(|(j, a)| format!("{a}*{}", self.names[*j]))
                .collect::<Vec<_>>()
                .join(" + ")
        };
        match &self.objective {
            Some(o) => writeln!(f, "{:?} {}", o.direction, term(&o.coeffs))?,
            None => writeln!(f, "feasibility")?,
        }
        for (i, c) in self.constraints.iter().enumerate() {
            writeln!(f, "  r{i}: {} {} {}", term(&c.coeffs), c.rel, c.rhs)?;
        }
        for (name, b) in self.names.iter().zip(&self.bounds) {
            let lo = b.lower.as_ref().map_or("-inf".to_string(), |v| v.to_string());
            let hi = b.upper.as_ref().map_or("+inf".to_string(), |v| v.to_string());
            writeln!(f, "  {lo} <= {name} <= {hi}")?;
        }
        Ok(())
    }
}
