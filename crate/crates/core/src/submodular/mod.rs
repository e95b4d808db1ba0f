//! Submodular extension over the interval family of the lattice closure,
//! with square and boolean certificates of non-extendibility.

mod certificate;
mod circuit;
mod fixing;
mod lattice;
mod rewrite;

pub use certificate::{
    extract_square_certificate, integral_multiplicities, refuting_square, verify_square_certificate, FamilyLp, SquareCertificate,
    SquareTuple,
};
pub use circuit::{
    boolean_to_square, square_to_boolean, BooleanCircuitCertificate, Gate, GateKind, Role, MAX_GATES,
};
pub use fixing::{fixed_functions_assignment, fixing_algorithm, FixReport, FixSource, GateStatus, ProofTree};
pub use lattice::{interval_family, is_antichain, lattice_closure, DEFAULT_CLOSURE_CAP};
pub use rewrite::lattice_rewrite;

use std::collections::HashMap;

use crate::ground::{GroundError, PartialSetFunction, Rational, SetPoint};
use crate::lp::{self, Bounds, Direction, ExactLP, LPOutcome, LpError, Relation};

#[derive(Debug, thiserror::Error)]
pub enum SubmodularError {
    #[error("lattice closure exceeded the cap of {cap} sets (reached {size})")]
    ClosureCapExceeded { size: usize, cap: usize },
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("invalid witness: {0}")]
    WitnessInvalid(String),
    #[error("cannot merge gates: creator {0} is unbalanced but undefined")]
    MergeStuck(SetPoint),
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),
    #[error("fixing invariant broken: {0}")]
    InvariantBroken(String),
    #[error("assignment has no value at {0}")]
    IncompleteAssignment(SetPoint),
    #[error("certificate expands to {0} gates")]
    TooManyGates(u128),
    #[error("solver returned an unexpected outcome: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubmodularVerdict {
    /// A submodular assignment on the interval family agreeing with `h`.
    Extendible { family: Vec<SetPoint>, values: Vec<Rational> },
    /// The defined sets form an antichain, which always extends.
    AntichainShortcut { family: Vec<SetPoint>, values: Vec<Rational> },
    NotExtendible(SquareCertificate),
}

impl SubmodularVerdict {
    pub fn is_extendible(&self) -> bool {
        !matches!(self, SubmodularVerdict::NotExtendible(_))
    }
}

/// Variables per family member and one `>=` row per square inside the family.
fn family_model(family: &[SetPoint], bounds: impl Fn(&SetPoint) -> Bounds) -> (ExactLP, Vec<Option<SquareTuple>>) {
    let mut model = ExactLP::new();
    for s in family {
        model.add_var(format!("w{s}"), bounds(s));
    }
    let index: HashMap<&SetPoint, usize> = family.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let mut rows = Vec::new();
    for (i, a) in family.iter().enumerate() {
        for b in &family[i + 1..] {
            if !a.incomparable(b) {
                continue;
            }
            let t = SquareTuple::new(a.clone(), b.clone());
            let (Some(&top), Some(&bot)) = (index.get(&t.top), index.get(&t.bottom)) else { continue };
            let one = Rational::one();
            model.add_constraint(
                [(index[&t.a], one.clone()), (index[&t.b], one.clone()), (top, -&one), (bot, -&one)],
                Relation::Ge,
                Rational::zero(),
            );
            rows.push(Some(t));
        }
    }
    (model, rows)
}

/// The extension LP over the interval family with the defined values pinned.
pub fn family_lp(h: &PartialSetFunction, cap: usize) -> Result<FamilyLp, SubmodularError> {
    let d: Vec<SetPoint> = h.domain().cloned().collect();
    let family = interval_family(&d, cap)?;
    let (mut lp, mut row_squares) = family_model(&family, |_| Bounds::free());
    for (k, s) in family.iter().enumerate() {
        if let Some(f) = h.get(s) {
            lp.add_constraint([(k, Rational::one())], Relation::Eq, f.clone());
            row_squares.push(None);
        }
    }
    Ok(FamilyLp { lp, family, row_squares })
}

/// Decides submodular extendibility, producing a square certificate on failure.
pub fn extend_submodular(h: &PartialSetFunction, cap: usize) -> Result<SubmodularVerdict, SubmodularError> {
    let d: Vec<SetPoint> = h.domain().cloned().collect();
    if is_antichain(&d) {
        let mut pts: Vec<(SetPoint, Rational)> = h.points().to_vec();
        pts.sort();
        let (family, values) = pts.into_iter().unzip();
        return Ok(SubmodularVerdict::AntichainShortcut { family, values });
    }
    let flp = family_lp(h, cap)?;
    match lp::solve(&flp.lp)? {
        LPOutcome::Feasible { assignment } => {
            Ok(SubmodularVerdict::Extendible { family: flp.family, values: assignment })
        }
        LPOutcome::Infeasible(w) => Ok(SubmodularVerdict::NotExtendible(extract_square_certificate(h, &flp, &w)?)),
        other => Err(SubmodularError::Internal(format!("{other:?}"))),
    }
}

/// Smallest `alpha` with a submodular `w` on the interval family and
/// `f_i <= w(T_i) <= alpha f_i`.
pub fn approx_submodular(h: &PartialSetFunction, cap: usize) -> Result<Rational, SubmodularError> {
    h.check_positive()?;
    let d: Vec<SetPoint> = h.domain().cloned().collect();
    let family = interval_family(&d, cap)?;
    let (mut model, _) = family_model(&family, |_| Bounds::free());
    let alpha = model.add_var("alpha", Bounds::free());
    for (k, s) in family.iter().enumerate() {
        if let Some(f) = h.get(s) {
            model.add_constraint([(k, Rational::one())], Relation::Ge, f.clone());
            model.add_constraint([(k, Rational::one()), (alpha, -f)], Relation::Le, Rational::zero());
        }
    }
    model.set_objective(Direction::Minimize, [(alpha, Rational::one())]);
    match lp::solve(&model)? {
        LPOutcome::Optimal { value, .. } => Ok(value),
        other => Err(SubmodularError::Internal(format!("{other:?}"))),
    }
}
