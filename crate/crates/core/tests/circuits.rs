use extendkit::ground::{rat, set, PartialSetFunction, Rational, SetPoint};
use extendkit::submodular::*;

fn gate(kind: GateKind, role: Role, inputs: Vec<usize>) -> Gate {
    Gate { kind, role, creator: SetPoint::empty(), inputs }
}

/// x1, x2 | y1 = AND(z1, x1), y2 = OR(z2, x2) | z1 = AND(z2, x2), z2 = OR(z1, x1)
fn two_loop_circuit() -> BooleanCircuitCertificate {
    use GateKind::*;
    BooleanCircuitCertificate {
        gates: vec![
            gate(Input, Role::Input, vec![]),
            gate(Input, Role::Input, vec![]),
            gate(And, Role::Output, vec![4, 0]),
            gate(Or, Role::Output, vec![5, 1]),
            gate(And, Role::Intermediate, vec![5, 1]),
            gate(Or, Role::Intermediate, vec![4, 0]),
        ],
    }
}

#[test]
fn fixing_leaves_the_loop_unfixed() {
    let bc = two_loop_circuit();
    bc.check_structure().unwrap();
    let report = fixing_algorithm(&bc, &[false, true]).unwrap();
    assert_eq!(report.value(2), Some(false));
    assert_eq!(report.value(3), Some(true));
    assert!(!report.is_fixed(4));
    assert!(!report.is_fixed(5));
    let a = fixed_functions_assignment(&bc, &[false, true]).unwrap();
    assert_eq!(a, vec![false, true, false, true, true, true]);
    assert!(bc.satisfied_by(&a));
    let tree = report.proof_tree(2).unwrap();
    assert_eq!(tree.children.len(), 1);
    assert_eq!(tree.children[0].gate, 0);
}

#[test]
fn fixed_assignment_satisfies_every_input_pattern() {
    let bc = two_loop_circuit();
    for bits in 0..4u8 {
        let inputs = [bits & 1 == 1, bits & 2 == 2];
        let a = fixed_functions_assignment(&bc, &inputs).unwrap();
        assert!(bc.satisfied_by(&a), "{inputs:?}");
        assert_eq!(&a[..2], &inputs);
    }
}

fn defined(m: usize, pts: &[(SetPoint, Rational)]) -> PartialSetFunction {
    PartialSetFunction::new(m, pts.to_vec()).unwrap()
}

#[test]
fn merging_four_squares() {
    let z = set(&[0, 1, 2]);
    let cert = SquareCertificate {
        tuples: vec![
            (SquareTuple::new(set(&[0, 1]), set(&[1, 2])), 1),
            (SquareTuple::new(z.clone(), set(&[0, 5])), 1),
            (SquareTuple::new(set(&[0, 1, 2, 3]), set(&[0, 1, 2, 4])), 1),
            (SquareTuple::new(z.clone(), set(&[2, 6])), 1),
        ],
    };
    let mut pts: Vec<(SetPoint, Rational)> = Vec::new();
    for (s, n) in cert.net_counts() {
        pts.push((s, if n > 0 { rat(1, 1) } else { rat(0, 1) }));
    }
    assert!(!pts.iter().any(|(s, _)| *s == z));
    let h = defined(7, &pts);
    assert!(verify_square_certificate(&cert, &h));
    let bc = square_to_boolean(&cert, &h).unwrap();
    assert_eq!(bc.count(Role::Input), 6);
    assert_eq!(bc.count(Role::Intermediate), 2);
    assert_eq!(bc.count(Role::Output), 6);
    bc.verify(&h).unwrap();
    assert!(bc.gates.iter().filter(|g| g.role == Role::Intermediate).all(|g| g.creator == z));
    let mut back = boolean_to_square(&bc).unwrap().tuples;
    let mut orig = cert.tuples.clone();
    back.sort();
    orig.sort();
    assert_eq!(back, orig);
}

#[test]
fn merge_requires_defined_creators() {
    let cert = SquareCertificate { tuples: vec![(SquareTuple::new(set(&[0]), set(&[1])), 1)] };
    let h = PartialSetFunction::from_literal(2, &[(&[0], rat(0, 1)), (&[1], rat(0, 1)), (&[0, 1], rat(1, 1))]);
    assert!(matches!(square_to_boolean(&cert, &h), Err(SubmodularError::MergeStuck(s)) if s == set(&[])));
}

#[test]
fn rewrite_moves_into_the_closure() {
    let h = PartialSetFunction::from_literal(
        3,
        &[(&[], rat(0, 1)), (&[0], rat(0, 1)), (&[1, 2], rat(0, 1)), (&[0, 1, 2], rat(1, 1))],
    );
    let cert = SquareCertificate {
        tuples: vec![
            (SquareTuple::new(set(&[0]), set(&[1])), 1),
            (SquareTuple::new(set(&[0, 1]), set(&[1, 2])), 1),
        ],
    };
    assert!(verify_square_certificate(&cert, &h));
    let bc = square_to_boolean(&cert, &h).unwrap();
    bc.verify(&h).unwrap();
    let out = lattice_rewrite(&cert, &h).unwrap();
    assert!(verify_square_certificate(&out, &h));
    let d: Vec<SetPoint> = h.domain().cloned().collect();
    for s in out.involved_sets() {
        assert!(d.contains(&s), "{s} is outside the defined sets");
    }
    assert_eq!(out.tuples, vec![(SquareTuple::new(set(&[0]), set(&[1, 2])), 1)]);
}

#[test]
fn rewrite_rejects_invalid_input() {
    let h = PartialSetFunction::from_literal(
        2,
        &[(&[], rat(0, 1)), (&[0], rat(0, 1)), (&[1], rat(0, 1)), (&[0, 1], rat(0, 1))],
    );
    let cert = SquareCertificate { tuples: vec![(SquareTuple::new(set(&[0]), set(&[1])), 1)] };
    assert!(lattice_rewrite(&cert, &h).is_err());
}
