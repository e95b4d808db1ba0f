//! XOS extension: fractional covers and supporting linear functions.

use serde::Serialize;

use crate::ground::{GroundError, PartialSetFunction, Rational, SetPoint, ValueClass};
use crate::lp::{self, Bounds, Direction, ExactLP, LPOutcome, LpError, Relation};

#[derive(Debug, thiserror::Error)]
pub enum XosError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("the empty set has positive value {0}, which no XOS function can approximate")]
    PositiveEmptySet(Rational),
    #[error("solver returned an unexpected outcome: {0}")]
    Internal(String),
}

/// Optimal fractional cover of a set by defined sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FractionalCover {
    pub value: Rational,
    /// Positive weights only, keyed by position in the partial function.
    pub weights: Vec<(usize, Rational)>,
}

/// Minimum of `sum a_S f(S)` over nonnegative `a` covering every element of
/// `s` at least once; `None` when some element lies in no defined set.
pub fn fractional_cover(h: &PartialSetFunction, s: &SetPoint) -> Result<Option<FractionalCover>, XosError> {
    h.check_class(ValueClass::Xos)?;
    if s.is_empty() {
        return Ok(Some(FractionalCover { value: Rational::zero(), weights: vec![] }));
    }
    let useful: Vec<usize> = (0..h.len()).filter(|&i| !h.set_at(i).intersection(s).is_empty()).collect();
    if s.iter().any(|e| !useful.iter().any(|&i| h.set_at(i).contains(e))) {
        return Ok(None);
    }
    let mut model = ExactLP::new();
    let vars: Vec<usize> = useful.iter().map(|&i| model.add_var(format!("a{i}"), Bounds::nonnegative())).collect();
    for e in s.iter() {
        let row = useful
            .iter()
            .zip(&vars)
            .filter(|(&i, _)| h.set_at(i).contains(e))
            .map(|(_, &v)| (v, Rational::one()));
        model.add_constraint(row, Relation::Ge, Rational::one());
    }
    model.set_objective(
        Direction::Minimize,
        useful.iter().zip(&vars).map(|(&i, &v)| (v, h.value_at(i).clone())),
    );
    match lp::solve(&model)? {
        LPOutcome::Optimal { assignment, value } => {
            let weights = useful
                .iter()
                .zip(&vars)
                .filter(|(_, &v)| !assignment[v].is_zero())
                .map(|(&i, &v)| (i, assignment[v].clone()))
                .collect();
            Ok(Some(FractionalCover { value, weights }))
        }
        other => Err(XosError::Internal(format!("fractional cover LP: {other:?}"))),
    }
}

/// Value of the largest XOS function below `h` at `s`, if `s` is coverable.
pub fn eval_xos_roof(h: &PartialSetFunction, s: &SetPoint) -> Result<Option<Rational>, XosError> {
    Ok(fractional_cover(h, s)?.map(|c| c.value))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum XosVerdict {
    /// One nonnegative vector per defined point; their maximum extends `h`.
    Extendible { vectors: Vec<Vec<Rational>> },
    /// A fractional cover of `target` cheaper than its value.
    NotExtendible {
        target: SetPoint,
        target_value: Rational,
        weights: Vec<(SetPoint, Rational)>,
        cover_value: Rational,
    },
}

impl XosVerdict {
    pub fn is_extendible(&self) -> bool {
        matches!(self, XosVerdict::Extendible { .. })
    }

    /// Checks the verdict's witness against `h` by direct evaluation.
    pub fn verify(&self, h: &PartialSetFunction) -> bool {
        match self {
            XosVerdict::Extendible { vectors } => {
                vectors.len() == h.len()
                    && vectors.iter().all(|w| w.len() == h.m() && w.iter().all(|x| !x.is_negative()))
                    && h.points().iter().all(|(t, f)| eval_max_linear(vectors, t) == *f)
            }
            XosVerdict::NotExtendible { target, target_value, weights, cover_value } => {
                if h.get(target) != Some(target_value) {
                    return false;
                }
                let mut sum = Rational::zero();
                for (s, a) in weights {
                    match h.get(s) {
                        Some(v) if !a.is_negative() => sum += a * v,
                        _ => return false,
                    }
                }
                let covered = target.iter().all(|e| {
                    let c: Rational = weights.iter().filter(|(s, _)| s.contains(e)).map(|(_, a)| a).sum();
                    c >= Rational::one()
                });
                covered && sum == *cover_value && sum < *target_value
            }
        }
    }
}

/// `max_j w_j . chi(s)`, zero for an empty list.
pub fn eval_max_linear(vectors: &[Vec<Rational>], s: &SetPoint) -> Rational {
    vectors
        .iter()
        .map(|w| s.iter().map(|e| &w[e]).sum::<Rational>())
        .max()
        .unwrap_or_default()
}

/// Variables `w[i][e]` for `e` in `T_i`; entries outside the support are zero.
fn vector_vars(model: &mut ExactLP, h: &PartialSetFunction) -> Vec<Vec<(usize, usize)>> {
    (0..h.len())
        .map(|i| {
            h.set_at(i)
                .iter()
                .map(|e| (e, model.add_var(format!("w{i}_{e}"), Bounds::nonnegative())))
                .collect()
        })
        .collect()
}

fn dot(vars: &[(usize, usize)], s: &SetPoint, scale: Rational) -> Vec<(usize, Rational)> {
    vars.iter().filter(|(e, _)| s.contains(*e)).map(|(_, v)| (*v, scale.clone())).collect()
}

fn read_vectors(h: &PartialSetFunction, vars: &[Vec<(usize, usize)>], x: &[Rational]) -> Vec<Vec<Rational>> {
    vars.iter()
        .map(|vs| {
            let mut w = vec![Rational::zero(); h.m()];
            for (e, v) in vs {
                w[*e] = x[*v].clone();
            }
            w
        })
        .collect()
}

/// Decides XOS extendibility, with supporting vectors or a cheap fractional cover.
pub fn extend_xos(h: &PartialSetFunction) -> Result<XosVerdict, XosError> {
    h.check_class(ValueClass::Xos)?;
    for (t, f) in h.points() {
        let cover = fractional_cover(h, t)?.expect("a defined set covers itself");
        if cover.value < *f {
            return Ok(XosVerdict::NotExtendible {
                target: t.clone(),
                target_value: f.clone(),
                weights: cover.weights.iter().map(|(i, a)| (h.set_at(*i).clone(), a.clone())).collect(),
                cover_value: cover.value,
            });
        }
    }
    let mut model = ExactLP::new();
    let vars = vector_vars(&mut model, h);
    for (i, (t, f)) in h.points().iter().enumerate() {
        for (j, vj) in vars.iter().enumerate() {
            let rel = if i == j { Relation::Eq } else { Relation::Le };
            let row = dot(vj, t, Rational::one());
            model.add_constraint(row, rel, f.clone());
        }
    }
    match lp::solve(&model)? {
        LPOutcome::Feasible { assignment } => {
            Ok(XosVerdict::Extendible { vectors: read_vectors(h, &vars, &assignment) })
        }
        other => Err(XosError::Internal(format!("supporting-vector LP after passing covers: {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct XosApproximation {
    pub alpha: Rational,
    pub vectors: Vec<Vec<Rational>>,
}

/// Smallest `alpha` with an XOS `F` satisfying `f_i <= F(T_i) <= alpha f_i`,
/// solved as one LP over `alpha` and one vector per defined point.
pub fn approx_xos(h: &PartialSetFunction) -> Result<XosApproximation, XosError> {
    h.check_positive()?;
    if let Some(v) = h.get(&SetPoint::empty()) {
        return Err(XosError::PositiveEmptySet(v.clone()));
    }
    let mut model = ExactLP::new();
    let alpha = model.add_var("alpha", Bounds::free());
    let vars = vector_vars(&mut model, h);
    for (i, (t, f)) in h.points().iter().enumerate() {
        let own = dot(&vars[i], t, Rational::one());
        model.add_constraint(own.clone(), Relation::Ge, f.clone());
        let mut cap = own.clone();
        cap.push((alpha, -f));
        model.add_constraint(cap, Relation::Le, Rational::zero());
        for (j, vj) in vars.iter().enumerate() {
            if j == i {
                continue;
            }
            let mut row = dot(vj, t, Rational::one());
            row.extend(dot(&vars[i], t, -Rational::one()));
            model.add_constraint(row, Relation::Le, Rational::zero());
        }
    }
    model.set_objective(Direction::Minimize, [(alpha, Rational::one())]);
    match lp::solve(&model)? {
        LPOutcome::Optimal { assignment, value } => Ok(XosApproximation {
            alpha: value,
            vectors: read_vectors(h, &vars, &assignment),
        }),
        other => Err(XosError::Internal(format!("approximation LP: {other:?}"))),
    }
}

/// `max_i f_i / roof(T_i)`, the closed form of the optimal XOS factor.
pub fn approx_xos_closed_form(h: &PartialSetFunction) -> Result<Rational, XosError> {
    h.check_positive()?;
    if let Some(v) = h.get(&SetPoint::empty()) {
        return Err(XosError::PositiveEmptySet(v.clone()));
    }
    let mut best = Rational::one();
    for (t, f) in h.points() {
        let roof = eval_xos_roof(h, t)?.expect("self cover");
        best = Rational::max(best, f / &roof);
    }
    Ok(best)
}
