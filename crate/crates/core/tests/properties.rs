use extendkit::convex;
use extendkit::ground::{rat, ConvexPartialFunction, FullTable, PartialSetFunction, Rational, SetPoint};
use extendkit::oracle::{self, OracleClass};
use extendkit::subadditive::{self, CoverFree, CoverVariant, SubadditiveVerdict};
use extendkit::submodular::{self, SubmodularVerdict, DEFAULT_CLOSURE_CAP};
use extendkit::testers::{self, FunctionOracle, TesterClass};
use extendkit::xos::{self, XosVerdict};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    testers::trial_rng(seed, 1)
}

fn instance(seed: u64, lo: i64, hi: i64) -> PartialSetFunction {
    let mut r = rng(seed);
    let m = r.gen_range(1..=4usize);
    let n = r.gen_range(1..=8usize).min(1 << m);
    oracle::random_partial_function(m, n, &rat(lo, 1), &rat(hi, 1), &mut r).unwrap()
}

fn convex_instance(seed: u64) -> ConvexPartialFunction {
    let mut r = rng(seed);
    loop {
        let dim = r.gen_range(1..=2usize);
        let mut pts: Vec<Vec<Rational>> = Vec::new();
        while pts.len() < dim + 1 + r.gen_range(0..4) {
            let p: Vec<Rational> = (0..dim).map(|_| Rational::from(r.gen_range(-4..=4i64))).collect();
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        if convex::affine_dimension(&pts) < dim {
            continue;
        }
        let vals = pts.iter().map(|_| oracle::random_rational(&rat(-6, 1), &rat(6, 1), &mut r)).collect::<Vec<_>>();
        return ConvexPartialFunction::new(dim, pts.into_iter().zip(vals).collect()).unwrap();
    }
}

fn hull_point(ch: &ConvexPartialFunction, r: &mut ChaCha8Rng) -> Vec<Rational> {
    let w: Vec<i64> = (0..ch.len()).map(|k| r.gen_range(0..=3) + i64::from(k == 0)).collect();
    let total = Rational::from(w.iter().sum::<i64>());
    (0..ch.dim())
        .map(|j| ch.points().iter().zip(&w).map(|((t, _), &k)| &t[j] * Rational::from(k)).sum::<Rational>() / &total)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scaling_preserves_subadditive_verdicts(seed in any::<u64>(), c in 1i64..20, d in 1i64..20) {
        let h = instance(seed, 1, 10);
        let c = rat(c, d);
        let g = h.scaled(&c);
        for variant in [CoverVariant::Monotone, CoverVariant::ExactUnion] {
            let (a, b) = match variant {
                CoverVariant::Monotone => (
                    subadditive::extend_monotone_subadditive(&h).unwrap(),
                    subadditive::extend_monotone_subadditive(&g).unwrap(),
                ),
                CoverVariant::ExactUnion => (
                    subadditive::extend_general_subadditive(&h).unwrap(),
                    subadditive::extend_general_subadditive(&g).unwrap(),
                ),
            };
            prop_assert_eq!(a.is_extendible(), b.is_extendible());
            if let SubadditiveVerdict::NotExtendible(v) = a {
                prop_assert!(v.verify(&h, variant));
            }
            for (t, _) in h.points() {
                let x = subadditive::min_cover_value(&h, t, variant).unwrap();
                let y = subadditive::min_cover_value(&g, t, variant).unwrap();
                prop_assert_eq!(x.map(|v| v * &c), y);
            }
        }
        let alpha = subadditive::approx_monotone_subadditive_exact(&h).unwrap().alpha;
        prop_assert_eq!(&alpha, &subadditive::approx_monotone_subadditive_exact(&g).unwrap().alpha);
        let ext = subadditive::extend_monotone_subadditive(&h).unwrap().is_extendible();
        prop_assert_eq!(ext, alpha == Rational::one());
    }

    #[test]
    fn cover_free_families_always_extend(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = r.gen_range(3..=8usize);
        let family: Vec<SetPoint> = oracle::random_antichain(m, r.gen_range(1..=3), &mut r).unwrap();
        let rr = r.gen_range(1..=3usize);
        prop_assume!(subadditive::is_r_cover_free(&family, rr) == CoverFree::Yes);
        for _ in 0..20 {
            let pts = family
                .iter()
                .map(|s| (s.clone(), oracle::random_rational(&rat(1, 1), &Rational::from(rr as i64 + 1), &mut r)))
                .collect();
            let h = PartialSetFunction::new(m, pts).unwrap();
            prop_assert!(subadditive::extend_monotone_subadditive(&h).unwrap().is_extendible());
        }
    }

    #[test]
    fn xos_verdicts_are_sound(seed in any::<u64>()) {
        let h = instance(seed, 0, 10);
        let v = xos::extend_xos(&h).unwrap();
        prop_assert!(v.verify(&h));
        match &v {
            XosVerdict::Extendible { vectors } => {
                for (t, f) in h.points() {
                    prop_assert_eq!(&xos::eval_max_linear(vectors, t), f);
                }
                prop_assert!(vectors.iter().flatten().all(|x| !x.is_negative()));
                prop_assert!(subadditive::extend_monotone_subadditive(&h).unwrap().is_extendible());
            }
            XosVerdict::NotExtendible { weights, cover_value, target_value, .. } => {
                prop_assert!(cover_value < target_value);
                let total: Rational = weights.iter().map(|(s, a)| a * h.get(s).unwrap()).sum();
                prop_assert_eq!(&total, cover_value);
            }
        }
    }

    #[test]
    fn xos_factor_dominates_subadditive_factor(seed in any::<u64>()) {
        let mut h = instance(seed, 1, 10);
        if h.contains(&SetPoint::empty()) {
            let pts = h.points().iter().filter(|(s, _)| !s.is_empty()).cloned().collect::<Vec<_>>();
            prop_assume!(!pts.is_empty());
            h = PartialSetFunction::new(h.m(), pts).unwrap();
        }
        let a = subadditive::approx_monotone_subadditive_exact(&h).unwrap().alpha;
        let b = xos::approx_xos(&h).unwrap().alpha;
        prop_assert!(a <= b);
    }

    #[test]
    fn submodular_certificates_and_circuits(seed in any::<u64>()) {
        let h = instance(seed, -5, 5);
        let verdict = submodular::extend_submodular(&h, DEFAULT_CLOSURE_CAP).unwrap();
        prop_assert_eq!(verdict.is_extendible(), oracle::full_domain_extend(&h, OracleClass::Submodular).unwrap());
        if let SubmodularVerdict::NotExtendible(cert) = verdict {
            prop_assert!(submodular::verify_square_certificate(&cert, &h));
            if let Ok(bc) = submodular::square_to_boolean(&cert, &h) {
                let back = submodular::boolean_to_square(&bc).unwrap();
                prop_assert!(submodular::verify_square_certificate(&back, &h));
            }
            // Any completion of h on the involved sets violates some square.
            let mut r = rng(seed ^ 0xabc);
            for _ in 0..10 {
                let extra: Vec<(SetPoint, Rational)> = cert
                    .involved_sets()
                    .into_iter()
                    .filter(|s| !h.contains(s))
                    .map(|s| (s, oracle::random_rational(&rat(-20, 1), &rat(20, 1), &mut r)))
                    .collect();
                let value = |s: &SetPoint| h.get(s).cloned().or_else(|| extra.iter().find(|(t, _)| t == s).map(|(_, v)| v.clone()));
                prop_assert!(submodular::refuting_square(&cert, value).unwrap().is_some());
            }
        }
    }

    #[test]
    fn convex_roof_and_tilde(seed in any::<u64>()) {
        let ch = convex_instance(seed);
        let mut r = rng(seed ^ 1);
        let vertices = convex::enumerate_dual_vertices(&ch).unwrap();
        let tilde = |x: &[Rational]| vertices.iter().map(|v| v.eval(x)).max().unwrap();
        if convex::extend_convex(&ch).unwrap().is_extendible() {
            for (t, f) in ch.points() {
                prop_assert_eq!(&tilde(t), f);
            }
        }
        // Supporting affine functions below the data stay below the roof.
        for v in &vertices {
            for _ in 0..5 {
                let x = hull_point(&ch, &mut r);
                prop_assert!(v.eval(&x) <= convex::roof_value(&ch, &x).unwrap().unwrap());
            }
        }
        for _ in 0..5 {
            let (x1, x2) = (hull_point(&ch, &mut r), hull_point(&ch, &mut r));
            let g1 = convex::roof_value(&ch, &x1).unwrap().unwrap();
            let g2 = convex::roof_value(&ch, &x2).unwrap().unwrap();
            for t in [rat(1, 4), rat(1, 2), rat(3, 4)] {
                let s = Rational::one() - &t;
                let mid: Vec<Rational> = x1.iter().zip(&x2).map(|(a, b)| &t * a + &s * b).collect();
                let g = convex::roof_value(&ch, &mid).unwrap().unwrap();
                prop_assert!(g <= &t * &g1 + &s * &g2);
                prop_assert_eq!(g, tilde(&mid));
            }
        }
    }

    #[test]
    fn non_bad_sets_extend(seed in any::<u64>(), pick in 0usize..3) {
        let mut r = rng(seed);
        let m = r.gen_range(2..=4usize);
        let class = [TesterClass::Subadditive, TesterClass::Xos, TesterClass::SubadditiveNonmonotone][pick];
        let values = (0..1 << m).map(|_| oracle::random_rational(&rat(0, 1), &rat(6, 1), &mut r)).collect();
        let table = FullTable::new(m, values).unwrap();
        let o = FunctionOracle::from_table(table.clone());
        let eps = 0.3;
        let bad = testers::bad_sets(&o, class, eps).unwrap();
        let (lo, hi) = testers::layer_range(m, eps, class.variant()).unwrap();
        let pts: Vec<(SetPoint, Rational)> = (0..1u64 << m)
            .map(SetPoint::from_mask)
            .filter(|s| (lo..=hi).contains(&s.len()) && !bad.contains(s))
            .map(|s| (s.clone(), table.eval(&s).clone()))
            .collect();
        prop_assume!(!pts.is_empty());
        let h = PartialSetFunction::new(m, pts).unwrap();
        let ok = match class {
            TesterClass::Subadditive => subadditive::extend_monotone_subadditive(&h).unwrap().is_extendible(),
            TesterClass::Xos => xos::extend_xos(&h).unwrap().is_extendible(),
            TesterClass::SubadditiveNonmonotone => subadditive::extend_general_subadditive(&h).unwrap().is_extendible(),
        };
        prop_assert!(ok, "{:?}: bad {:?}", class, bad);
    }

    #[test]
    fn distance_zero_iff_in_class(seed in any::<u64>(), pick in 0usize..4) {
        let mut r = rng(seed);
        let m = r.gen_range(1..=3usize);
        let class = [OracleClass::MonotoneSubadditive, OracleClass::GeneralSubadditive, OracleClass::Xos, OracleClass::Submodular][pick];
        let values = (0..1u64 << m)
            .map(|k| if k == 0 && class == OracleClass::Xos { rat(0, 1) } else { Rational::from(r.gen_range(0..=4i64)) })
            .collect();
        let table = FullTable::new(m, values).unwrap();
        let d = oracle::distance_to_class(&table, class).unwrap();
        let inside = oracle::full_domain_extend(&table.to_partial(), class).unwrap();
        prop_assert_eq!(d.is_zero(), inside);
        prop_assert_eq!(inside, oracle::full_domain_extend(&table.to_partial(), class).unwrap());
    }
}
