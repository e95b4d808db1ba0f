use std::collections::BTreeMap;

use serde::Serialize;

use super::certificate::{SquareCertificate, SquareTuple};
use super::SubmodularError;
use crate::ground::{PartialSetFunction, Rational, SetPoint};

/// Upper limit on gates produced when expanding multiplicities.
pub const MAX_GATES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Input,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    #[serde(rename = "IP")]
    Input,
    #[serde(rename = "IM")]
    Intermediate,
    #[serde(rename = "OP")]
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gate {
    pub kind: GateKind,
    pub role: Role,
    pub creator: SetPoint,
    /// Two gate indices for AND/OR gates, empty for inputs.
    pub inputs: Vec<usize>,
}

/// A cyclic AND/OR circuit with a creator set per gate.
///
/// Gates are ordered inputs first, then outputs, then intermediates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BooleanCircuitCertificate {
    pub gates: Vec<Gate>,
}

impl BooleanCircuitCertificate {
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = usize> + '_ {
        (0..self.gates.len()).filter(move |&g| self.gates[g].role == role)
    }

    pub fn input_gates(&self) -> Vec<usize> {
        self.with_role(Role::Input).collect()
    }

    pub fn count(&self, role: Role) -> usize {
        self.with_role(role).count()
    }

    /// For every gate, the gates it feeds, in index order.
    pub fn consumers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.gates.len()];
        for (g, gate) in self.gates.iter().enumerate() {
            for &p in &gate.inputs {
                out[p].push(g);
            }
        }
        out
    }

    /// Whether `values` respects the logic of every AND/OR gate.
    pub fn satisfied_by(&self, values: &[bool]) -> bool {
        self.gates.iter().enumerate().all(|(g, gate)| match gate.kind {
            GateKind::Input => true,
            GateKind::And => values[g] == gate.inputs.iter().all(|&p| values[p]),
            GateKind::Or => values[g] == gate.inputs.iter().any(|&p| values[p]),
        })
    }

    /// The structural conditions: degrees, AND/OR pairing and gate ordering.
    pub fn check_structure(&self) -> Result<(), SubmodularError> {
        let bad = |msg: String| Err(SubmodularError::MalformedCircuit(msg));
        let n = self.gates.len();
        let rank = |r: Role| match r {
            Role::Input => 0,
            Role::Output => 1,
            Role::Intermediate => 2,
        };
        if self.gates.windows(2).any(|w| rank(w[0].role) > rank(w[1].role)) {
            return bad("gates are not ordered inputs, outputs, intermediates".into());
        }
        let consumers = self.consumers();
        for (g, gate) in self.gates.iter().enumerate() {
            let is_input = gate.kind == GateKind::Input;
            if is_input != (gate.role == Role::Input) {
                return bad(format!("gate {g}: only input gates may have kind INPUT"));
            }
            let want_in = if is_input { 0 } else { 2 };
            if gate.inputs.len() != want_in || gate.inputs.iter().any(|&p| p >= n) {
                return bad(format!("gate {g} has fan-in {} (expected {want_in})", gate.inputs.len()));
            }
            let want_out = if gate.role == Role::Output { 0 } else { 2 };
            if consumers[g].len() != want_out {
                return bad(format!("gate {g} has fan-out {} (expected {want_out})", consumers[g].len()));
            }
        }
        for (g, gate) in self.gates.iter().enumerate() {
            if gate.kind != GateKind::And {
                continue;
            }
            let mut pair = gate.inputs.clone();
            pair.sort_unstable();
            let partner = self.gates.iter().any(|o| {
                let mut q = o.inputs.clone();
                q.sort_unstable();
                o.kind == GateKind::Or && q == pair
            });
            if !partner {
                return bad(format!("AND gate {g} has no OR gate on the same inputs"));
            }
        }
        Ok(())
    }

    /// `sum_i f_i (n_i^OP - n_i^IP)`, or `None` if a boundary creator is undefined.
    pub fn slack(&self, h: &PartialSetFunction) -> Option<Rational> {
        let mut sum = Rational::zero();
        for gate in &self.gates {
            match gate.role {
                Role::Output => sum += h.get(&gate.creator)?,
                Role::Input => sum -= h.get(&gate.creator)?,
                Role::Intermediate => {}
            }
        }
        Some(sum)
    }

    /// Every certificate condition, including one satisfying assignment per coordinate.
    pub fn verify(&self, h: &PartialSetFunction) -> Result<(), SubmodularError> {
        self.check_structure()?;
        for i in 0..h.m() {
            let bits: Vec<bool> = self.gates.iter().map(|g| g.creator.contains(i)).collect();
            if !self.satisfied_by(&bits) {
                return Err(SubmodularError::MalformedCircuit(format!(
                    "coordinate {i} of the creator sets is not a satisfying assignment"
                )));
            }
        }
        match self.slack(h) {
            Some(s) if s.is_positive() => Ok(()),
            Some(s) => Err(SubmodularError::MalformedCircuit(format!("weighted balance {s} is not positive"))),
            None => Err(SubmodularError::MalformedCircuit("a boundary gate maps to an undefined set".into())),
        }
    }

    /// Same circuit with new creator sets.
    pub fn with_creators(&self, creators: Vec<SetPoint>) -> Self {
        assert_eq!(creators.len(), self.gates.len());
        BooleanCircuitCertificate {
            gates: self
                .gates
                .iter()
                .zip(creators)
                .map(|(g, c)| Gate { creator: c, ..g.clone() })
                .collect(),
        }
    }
}

/// Builds the boolean certificate of a square certificate.
///
/// Each square becomes two inputs feeding an OR output (creator `a ∪ b`) and
/// an AND output (creator `a ∩ b`). Then every input gate is merged with an
/// output gate of equal creator into an intermediate gate, smallest creator
/// first and earliest gates first.
pub fn square_to_boolean(
    cert: &SquareCertificate,
    h: &PartialSetFunction,
) -> Result<BooleanCircuitCertificate, SubmodularError> {
    let total: u128 = cert.tuples.iter().map(|(_, k)| *k as u128 * 4).sum();
    if total > MAX_GATES as u128 {
        return Err(SubmodularError::TooManyGates(total));
    }
    let mut gates: Vec<Gate> = Vec::with_capacity(total as usize);
    for (t, k) in &cert.tuples {
        for _ in 0..*k {
            let base = gates.len();
            let input = |c: &SetPoint| Gate { kind: GateKind::Input, role: Role::Input, creator: c.clone(), inputs: vec![] };
            gates.push(input(&t.a));
            gates.push(input(&t.b));
            let wires = vec![base, base + 1];
            gates.push(Gate { kind: GateKind::Or, role: Role::Output, creator: t.top.clone(), inputs: wires.clone() });
            gates.push(Gate { kind: GateKind::And, role: Role::Output, creator: t.bottom.clone(), inputs: wires });
        }
    }

    let mut by_creator: BTreeMap<SetPoint, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (g, gate) in gates.iter().enumerate() {
        let e = by_creator.entry(gate.creator.clone()).or_default();
        match gate.role {
            Role::Input => e.0.push(g),
            _ => e.1.push(g),
        }
    }
    // alias[input] = output slot that absorbs it.
    let mut alias: Vec<Option<usize>> = vec![None; gates.len()];
    for (creator, (ins, outs)) in &by_creator {
        for (&i, &o) in ins.iter().zip(outs) {
            alias[i] = Some(o);
            gates[o].role = Role::Intermediate;
        }
        if ins.len() != outs.len() && !h.contains(creator) {
            return Err(SubmodularError::MergeStuck(creator.clone()));
        }
    }
    for gate in gates.iter_mut() {
        for p in gate.inputs.iter_mut() {
            if let Some(o) = alias[*p] {
                *p = o;
            }
        }
    }

    let rank = |r: Role| match r {
        Role::Input => 0,
        Role::Output => 1,
        Role::Intermediate => 2,
    };
    let mut keep: Vec<usize> = (0..gates.len()).filter(|&g| alias[g].is_none()).collect();
    keep.sort_by_key(|&g| (rank(gates[g].role), g));
    let mut new_id = vec![usize::MAX; gates.len()];
    for (k, &g) in keep.iter().enumerate() {
        new_id[g] = k;
    }
    let out = keep
        .iter()
        .map(|&g| {
            let mut gate = gates[g].clone();
            for p in gate.inputs.iter_mut() {
                *p = new_id[*p];
            }
            gate
        })
        .collect();
    Ok(BooleanCircuitCertificate { gates: out })
}

/// Reads one square off each AND gate and the OR gate sharing its inputs.
pub fn boolean_to_square(bc: &BooleanCircuitCertificate) -> Result<SquareCertificate, SubmodularError> {
    bc.check_structure()?;
    let mut tuples = Vec::new();
    for (g, gate) in bc.gates.iter().enumerate() {
        if gate.kind != GateKind::And {
            continue;
        }
        let (p, q) = (gate.inputs[0], gate.inputs[1]);
        let or = bc
            .gates
            .iter()
            .find(|o| o.kind == GateKind::Or && (o.inputs == [p, q] || o.inputs == [q, p]))
            .ok_or_else(|| SubmodularError::MalformedCircuit(format!("AND gate {g} has no partner")))?;
        let t = SquareTuple::new(bc.gates[p].creator.clone(), bc.gates[q].creator.clone());
        if t.top != or.creator || t.bottom != gate.creator {
            return Err(SubmodularError::MalformedCircuit(format!(
                "gate {g}: creators are not the union and intersection of its inputs"
            )));
        }
        tuples.push((t, 1));
    }
    Ok(SquareCertificate { tuples }.normalized())
}
