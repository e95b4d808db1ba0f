//! Fixed gates of cyclic AND/OR circuits.
//!
//! A gate is fixed to `b` under an input assignment when a proof tree
//! derives it: inputs are leaves; an AND gate is 0 from one 0 child or 1 from
//! two 1 children; an OR gate is 1 from one 1 child or 0 from two 0 children.
//! Proofs here are stored as justification lists, one per gate, whose
//! unfolding is the tree (a gate may label several nodes of it).

use super::circuit::{BooleanCircuitCertificate, GateKind, Role};
use super::SubmodularError;

/// How a fixed gate obtained its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixSource {
    Input,
    /// Assigned by the walk from the inputs to the outputs.
    Walk,
    /// Found afterwards by closing the derivation rules.
    Closure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GateStatus {
    Fixed { value: bool, children: Vec<usize>, source: FixSource },
    Unfixed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixReport {
    pub status: Vec<GateStatus>,
    /// Gates in the order they were fixed.
    pub order: Vec<usize>,
}

/// A proof tree node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTree {
    pub gate: usize,
    pub value: bool,
    pub children: Vec<ProofTree>,
}

impl FixReport {
    pub fn value(&self, g: usize) -> Option<bool> {
        match &self.status[g] {
            GateStatus::Fixed { value, .. } => Some(*value),
            GateStatus::Unfixed => None,
        }
    }

    pub fn is_fixed(&self, g: usize) -> bool {
        self.value(g).is_some()
    }

    /// The proof tree of a fixed gate.
    pub fn proof_tree(&self, g: usize) -> Option<ProofTree> {
        match &self.status[g] {
            GateStatus::Fixed { value, children, .. } => Some(ProofTree {
                gate: g,
                value: *value,
                children: children.iter().map(|&c| self.proof_tree(c).expect("children are fixed")).collect(),
            }),
            GateStatus::Unfixed => None,
        }
    }
}

fn fix(report: &mut FixReport, g: usize, value: bool, children: Vec<usize>, source: FixSource) {
    report.status[g] = GateStatus::Fixed { value, children, source };
    report.order.push(g);
}

/// The walk from each input to an output, then closure of the derivation rules.
///
/// From the current gate `cg` with OR consumer `g2`, AND consumer `g3` and
/// co-input `g1`: if exactly one of `g2`, `g3` is valued, the other takes
/// `cg`'s value; if neither is, a 0 moves to `g3` and a 1 moves to `g2`.
pub fn fixing_algorithm(bc: &BooleanCircuitCertificate, inputs: &[bool]) -> Result<FixReport, SubmodularError> {
    bc.check_structure()?;
    let input_gates = bc.input_gates();
    if inputs.len() != input_gates.len() {
        return Err(SubmodularError::InvariantBroken(format!(
            "{} input bits for {} input gates",
            inputs.len(),
            input_gates.len()
        )));
    }
    let consumers = bc.consumers();
    let mut report = FixReport { status: vec![GateStatus::Unfixed; bc.len()], order: Vec::new() };
    let broken = |msg: String| Err(SubmodularError::InvariantBroken(msg));

    for (&x, &bit) in input_gates.iter().zip(inputs) {
        fix(&mut report, x, bit, vec![], FixSource::Input);
        let mut cg = x;
        let mut steps = 0;
        while bc.gates[cg].role != Role::Output {
            steps += 1;
            if steps > bc.len() {
                return broken("walk revisits gates".into());
            }
            let cons = &consumers[cg];
            let g2 = cons.iter().copied().find(|&g| bc.gates[g].kind == GateKind::Or);
            let g3 = cons.iter().copied().find(|&g| bc.gates[g].kind == GateKind::And);
            let (Some(g2), Some(g3)) = (g2, g3) else {
                return broken(format!("gate {cg} does not feed one OR and one AND gate"));
            };
            let other = |g: usize| bc.gates[g].inputs.iter().copied().find(|&p| p != cg);
            let g1 = match (other(g2), other(g3)) {
                (Some(a), Some(b)) if a == b => a,
                _ => return broken(format!("gates {g2} and {g3} do not share a second input")),
            };
            let v = report.value(cg).expect("current gate is valued");
            let g1v = report.value(g1);
            let (next, children) = match (report.value(g2), report.value(g3)) {
                (Some(_), None) => {
                    // AND of cg and g1: a 1 needs g1 at 1 as well.
                    let ch = if v {
                        if g1v != Some(true) {
                            return broken(format!("AND gate {g3} lacks a 1 on gate {g1}"));
                        }
                        vec![cg, g1]
                    } else {
                        vec![cg]
                    };
                    (g3, ch)
                }
                (None, Some(_)) => {
                    let ch = if v {
                        vec![cg]
                    } else {
                        if g1v != Some(false) {
                            return broken(format!("OR gate {g2} lacks a 0 on gate {g1}"));
                        }
                        vec![cg, g1]
                    };
                    (g2, ch)
                }
                (None, None) => (if v { g2 } else { g3 }, vec![cg]),
                (Some(_), Some(_)) => {
                    return broken(format!("both consumers of gate {cg} are already valued"));
                }
            };
            fix(&mut report, next, v, children, FixSource::Walk);
            cg = next;
        }
    }

    close(bc, &mut report);
    Ok(report)
}

/// Applies the derivation rules until nothing changes.
fn close(bc: &BooleanCircuitCertificate, report: &mut FixReport) {
    loop {
        let mut changed = false;
        for g in 0..bc.len() {
            if report.is_fixed(g) || bc.gates[g].kind == GateKind::Input {
                continue;
            }
            let ins = &bc.gates[g].inputs;
            let vals: Vec<Option<bool>> = ins.iter().map(|&p| report.value(p)).collect();
            // Absorbing value: 0 for AND, 1 for OR.
            let absorb = bc.gates[g].kind == GateKind::Or;
            let derived = if let Some(k) = vals.iter().position(|v| *v == Some(absorb)) {
                Some((absorb, vec![ins[k]]))
            } else if vals.iter().all(|v| *v == Some(!absorb)) {
                Some((!absorb, ins.clone()))
            } else {
                None
            };
            if let Some((value, children)) = derived {
                fix(report, g, value, children, FixSource::Closure);
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

/// Fixed gates keep their value; every unfixed gate is set to 1.
pub fn fixed_functions_assignment(
    bc: &BooleanCircuitCertificate,
    inputs: &[bool],
) -> Result<Vec<bool>, SubmodularError> {
    let report = fixing_algorithm(bc, inputs)?;
    Ok((0..bc.len()).map(|g| report.value(g).unwrap_or(true)).collect())
}
