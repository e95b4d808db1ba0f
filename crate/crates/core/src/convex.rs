//! Convex extension of functions given on finitely many points of `R^m`.
//!
//! The roof `g(x)` is the cheapest convex combination of data values at `x`.
//! Outside the hull the canonical extension is the maximum, over vertices
//! `(y, mu)` of `{T_i . y + mu <= f_i}`, of `x . y + mu`.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;

use crate::ground::{ConvexPartialFunction, GroundError, Rational};
use crate::lp::{self, Bounds, Direction, ExactLP, LPOutcome, LpError, Relation};

/// Above this dimension vertex enumeration must be requested explicitly.
pub const MAX_TILDE_DIM: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum ConvexError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("the data points span an affine space of dimension {dim} < {m}; project onto their affine hull first")]
    DegenerateHull { dim: usize, m: usize },
    #[error("vertex enumeration in dimension {m} exceeds the default limit of {limit}")]
    DimensionTooLarge { m: usize, limit: usize },
    #[error("no data points")]
    Empty,
    #[error("solver returned an unexpected outcome: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DualVertex {
    pub y: Vec<Rational>,
    pub mu: Rational,
}

impl DualVertex {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.y, x) + &self.mu
    }

    /// Indices of the data points whose constraint is tight.
    pub fn tight(&self, ch: &ConvexPartialFunction) -> Vec<usize> {
        ch.points().iter().enumerate().filter(|(_, (t, f))| self.eval(t) == *f).map(|(i, _)| i).collect()
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Row-reduces in place and returns the rank.
fn row_reduce(rows: &mut [Vec<Rational>]) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else { continue };
        rows.swap(rank, p);
        let inv = rows[rank][c].recip();
        for v in rows[rank].iter_mut() {
            *v *= &inv;
        }
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[c].is_zero() {
                continue;
            }
            let k = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot) {
                *v -= &k * pv;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Solves a square system exactly, `None` when singular.
fn solve_square(mut a: Vec<Vec<Rational>>, b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = a.len();
    for (row, v) in a.iter_mut().zip(b) {
        row.push(v);
    }
    if row_reduce(&mut a) < n || (0..n).any(|r| a[r][r] != Rational::one()) {
        return None;
    }
    Some(a.into_iter().map(|mut r| r.pop().expect("augmented")).collect())
}

/// Dimension of the affine hull.
pub fn affine_dimension(points: &[Vec<Rational>]) -> usize {
    let Some(base) = points.first() else { return 0 };
    let mut diffs: Vec<Vec<Rational>> =
        points[1..].iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    row_reduce(&mut diffs)
}

fn check_dim(ch: &ConvexPartialFunction, x: &[Rational]) -> Result<(), ConvexError> {
    if x.len() != ch.dim() {
        return Err(ConvexError::DimensionMismatch { got: x.len(), expected: ch.dim() });
    }
    Ok(())
}

/// The roof value at `x` with an optimal combination, or `None` outside the hull.
pub fn roof_solution(
    ch: &ConvexPartialFunction,
    x: &[Rational],
) -> Result<Option<(Rational, Vec<Rational>)>, ConvexError> {
    check_dim(ch, x)?;
    if ch.is_empty() {
        return Err(ConvexError::Empty);
    }
    let mut model = ExactLP::new();
    for i in 0..ch.len() {
        model.add_var(format!("l{i}"), Bounds::nonnegative());
    }
    for (j, xj) in x.iter().enumerate() {
        model.add_constraint(
            ch.points().iter().enumerate().map(|(i, (t, _))| (i, t[j].clone())),
            Relation::Eq,
            xj.clone(),
        );
    }
    model.add_constraint((0..ch.len()).map(|i| (i, Rational::one())), Relation::Eq, Rational::one());
    model.set_objective(Direction::Minimize, ch.points().iter().enumerate().map(|(i, (_, f))| (i, f.clone())));
    match lp::solve(&model)? {
        LPOutcome::Optimal { value, assignment } => Ok(Some((value, assignment))),
        LPOutcome::Infeasible(_) => Ok(None),
        other => Err(ConvexError::Internal(format!("{other:?}"))),
    }
}

/// The roof value at `x`, or `None` when `x` lies outside the hull.
pub fn roof_value(ch: &ConvexPartialFunction, x: &[Rational]) -> Result<Option<Rational>, ConvexError> {
    Ok(roof_solution(ch, x)?.map(|(v, _)| v))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConvexVerdict {
    Extendible,
    /// The roof at `T_index` drops strictly below the data value.
    NotExtendible { index: usize, roof: Rational, value: Rational },
}

impl ConvexVerdict {
    pub fn is_extendible(&self) -> bool {
        matches!(self, ConvexVerdict::Extendible)
    }
}

fn roof_at_data(ch: &ConvexPartialFunction) -> Result<Vec<Rational>, ConvexError> {
    ch.points()
        .iter()
        .map(|(t, _)| roof_value(ch, t)?.ok_or_else(|| ConvexError::Internal("data point outside its own hull".into())))
        .collect()
}

pub fn extend_convex(ch: &ConvexPartialFunction) -> Result<ConvexVerdict, ConvexError> {
    for (i, ((_, f), g)) in ch.points().iter().zip(roof_at_data(ch)?).enumerate() {
        if g < *f {
            return Ok(ConvexVerdict::NotExtendible { index: i, roof: g, value: f.clone() });
        }
    }
    Ok(ConvexVerdict::Extendible)
}

/// `max_i f_i / g(T_i)`.
pub fn approx_convex(ch: &ConvexPartialFunction) -> Result<Rational, ConvexError> {
    ch.check_positive()?;
    let roofs = roof_at_data(ch)?;
    Ok(ch.points().iter().zip(&roofs).map(|((_, f), g)| f / g).max().expect("nonempty"))
}

/// Whether some convex function has `c_i <= f(T_i) <= d_i`: the roof of the
/// upper bounds must stay above every lower bound.
pub fn bounds_feasible(
    points: &[Vec<Rational>],
    lower: &[Rational],
    upper: &[Rational],
) -> Result<bool, ConvexError> {
    let dim = points.first().map_or(0, |p| p.len());
    let ch = ConvexPartialFunction::new(dim, points.iter().cloned().zip(upper.iter().cloned()).collect())?;
    for ((t, c), d) in points.iter().zip(lower).zip(upper) {
        let g = roof_value(&ch, t)?.ok_or_else(|| ConvexError::Internal("data point outside its hull".into()))?;
        if g < *c || g > *d {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bisection on `alpha` with [`bounds_feasible`] as the oracle; returns an
/// interval `[lo, hi]` of width at most `tol` containing the optimum, with
/// `hi` feasible.
pub fn approx_convex_bisect(ch: &ConvexPartialFunction, tol: &Rational) -> Result<(Rational, Rational), ConvexError> {
    ch.check_positive()?;
    let pts: Vec<Vec<Rational>> = ch.points().iter().map(|(t, _)| t.clone()).collect();
    let f: Vec<Rational> = ch.points().iter().map(|(_, v)| v.clone()).collect();
    let feasible = |a: &Rational| -> Result<bool, ConvexError> {
        let upper: Vec<Rational> = f.iter().map(|v| v * a).collect();
        bounds_feasible(&pts, &f, &upper)
    };
    let one = Rational::one();
    if feasible(&one)? {
        return Ok((one.clone(), one));
    }
    let mut lo = one;
    let mut hi = f.iter().max().expect("nonempty") / f.iter().min().expect("nonempty");
    let half = Rational::new(1, 2);
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) * &half;
        if feasible(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// All vertices of the dual polyhedron, sorted, using up to `jobs` threads.
pub fn enumerate_dual_vertices_par(ch: &ConvexPartialFunction, jobs: usize) -> Result<Vec<DualVertex>, ConvexError> {
    let m = ch.dim();
    let pts: Vec<Vec<Rational>> = ch.points().iter().map(|(t, _)| t.clone()).collect();
    let dim = affine_dimension(&pts);
    if dim < m || pts.is_empty() {
        return Err(ConvexError::DegenerateHull { dim, m });
    }
    let feasible = |v: &DualVertex| ch.points().iter().all(|(t, f)| v.eval(t) <= *f);
    let try_subset = |subset: &[usize]| -> Option<DualVertex> {
        let a: Vec<Vec<Rational>> = subset
            .iter()
            .map(|&i| {
                let mut row = ch.points()[i].0.clone();
                row.push(Rational::one());
                row
            })
            .collect();
        let b = subset.iter().map(|&i| ch.points()[i].1.clone()).collect();
        let mut sol = solve_square(a, b)?;
        let mu = sol.pop().expect("m + 1 unknowns");
        let v = DualVertex { y: sol, mu };
        feasible(&v).then_some(v)
    };
    let jobs = jobs.max(1);
    let found: BTreeSet<DualVertex> = if jobs == 1 {
        (0..ch.len()).combinations(m + 1).filter_map(|s| try_subset(&s)).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs)
                .map(|w| {
                    let try_subset = &try_subset;
                    scope.spawn(move || {
                        (0..ch.len())
                            .combinations(m + 1)
                            .enumerate()
                            .filter(|(k, _)| k % jobs == w)
                            .filter_map(|(_, s)| try_subset(&s))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
        })
    };
    Ok(found.into_iter().collect())
}

pub fn enumerate_dual_vertices(ch: &ConvexPartialFunction) -> Result<Vec<DualVertex>, ConvexError> {
    enumerate_dual_vertices_par(ch, 1)
}

/// Maximum of `x . y + mu` over the dual vertices together with a maximizer.
pub fn eval_tilde_vertex(
    ch: &ConvexPartialFunction,
    x: &[Rational],
    allow_large: bool,
) -> Result<(Rational, DualVertex), ConvexError> {
    check_dim(ch, x)?;
    if ch.dim() > MAX_TILDE_DIM && !allow_large {
        return Err(ConvexError::DimensionTooLarge { m: ch.dim(), limit: MAX_TILDE_DIM });
    }
    let vertices = enumerate_dual_vertices(ch)?;
    vertices
        .into_iter()
        .map(|v| (v.eval(x), v))
        .max_by(|a, b| a.0.cmp(&b.0))
        .ok_or_else(|| ConvexError::Internal("no dual vertex".into()))
}

/// The canonical extension at `x`. Cost grows like `n^(m+1)`.
pub fn eval_tilde(ch: &ConvexPartialFunction, x: &[Rational], allow_large: bool) -> Result<Rational, ConvexError> {
    Ok(eval_tilde_vertex(ch, x, allow_large)?.0)
}

/// A decomposition `x = lambda y + (1 - lambda) z` with `y, z` in the hull.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExteriorSplit {
    pub lambda: Rational,
    pub y: Vec<Rational>,
    pub z: Vec<Rational>,
    /// `lambda g(y) + (1 - lambda) g(z)`.
    pub value: Rational,
}

/// For `x` outside the hull, a split whose value reaches the canonical
/// extension at `x`.
///
/// `y` is the centroid of the points tight at the maximizing vertex and `z`
/// moves toward `y` as `lambda` doubles until it enters their hull, where the
/// roof agrees with the vertex's affine function.
pub fn exterior_split(ch: &ConvexPartialFunction, x: &[Rational], allow_large: bool) -> Result<ExteriorSplit, ConvexError> {
    let (_, vertex) = eval_tilde_vertex(ch, x, allow_large)?;
    let tight = vertex.tight(ch);
    let face = ConvexPartialFunction::new(ch.dim(), tight.iter().map(|&i| ch.points()[i].clone()).collect())?;
    let k = Rational::from(tight.len());
    let w: Vec<Rational> = (0..ch.dim())
        .map(|j| tight.iter().map(|&i| ch.points()[i].0[j].clone()).sum::<Rational>() / &k)
        .collect();
    let mut lambda = Rational::from(2i64);
    for _ in 0..256 {
        let step = (&lambda - Rational::one()).recip();
        let z: Vec<Rational> = w.iter().zip(x).map(|(wj, xj)| wj + (wj - xj) * &step).collect();
        if roof_value(&face, &z)?.is_some() {
            let gy = roof_value(ch, &w)?.ok_or_else(|| ConvexError::Internal("centroid outside hull".into()))?;
            let gz = roof_value(ch, &z)?.ok_or_else(|| ConvexError::Internal("split point outside hull".into()))?;
            let value = &lambda * gy + (Rational::one() - &lambda) * gz;
            return Ok(ExteriorSplit { lambda, y: w, z, value });
        }
        lambda *= Rational::from(2i64);
    }
    Err(ConvexError::Internal("line search did not enter the tight face".into()))
}
