use super::certificate::{verify_square_certificate, SquareCertificate};
use super::circuit::{boolean_to_square, square_to_boolean, Role};
use super::fixing::fixed_functions_assignment;
use super::SubmodularError;
use crate::ground::{PartialSetFunction, SetPoint};

/// Rewrites a valid certificate so that every involved set comes from the
/// lattice closure of the defined sets.
///
/// Coordinate `i` of each gate's new creator is the fixed-function value of
/// the gate under the inputs' `i`-th bits. Boundary gates keep their
/// creators. Squares whose middle sets became comparable cancel out and are
/// dropped.
pub fn lattice_rewrite(cert: &SquareCertificate, h: &PartialSetFunction) -> Result<SquareCertificate, SubmodularError> {
    if !verify_square_certificate(cert, h) {
        return Err(SubmodularError::WitnessInvalid("input certificate does not verify".into()));
    }
    let bc = square_to_boolean(cert, h)?;
    let inputs = bc.input_gates();
    let mut creators = vec![SetPoint::empty(); bc.len()];
    for i in 0..h.m() {
        let bits: Vec<bool> = inputs.iter().map(|&g| bc.gates[g].creator.contains(i)).collect();
        let values = fixed_functions_assignment(&bc, &bits)?;
        for (c, v) in creators.iter_mut().zip(values) {
            if v {
                c.insert(i);
            }
        }
    }
    for (g, gate) in bc.gates.iter().enumerate() {
        if gate.role != Role::Intermediate && creators[g] != gate.creator {
            return Err(SubmodularError::InvariantBroken(format!(
                "boundary gate {g} changed creator from {} to {}",
                gate.creator, creators[g]
            )));
        }
    }
    let rewritten = bc.with_creators(creators);
    let squares = boolean_to_square(&rewritten)?;
    let pruned = SquareCertificate {
        tuples: squares.tuples.into_iter().filter(|(t, _)| !t.is_degenerate()).collect(),
    }
    .normalized();
    if !verify_square_certificate(&pruned, h) {
        return Err(SubmodularError::InvariantBroken("rewritten certificate does not verify".into()));
    }
    Ok(pruned)
}
