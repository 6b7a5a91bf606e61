use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rigidity_core::infinite::*;
use rigidity_core::prestress::PSState;
use rigidity_core::rigidity;
use rigidity_core::tensegrity::member_slack;
use rigidity_core::ToleranceContext;

fn tol() -> ToleranceContext {
    ToleranceContext::default()
}

fn spec(family: Family) -> GeneratorSpec {
    GeneratorSpec::new(family)
}

#[test]
fn lacunary_residual_is_exactly_zero_at_interior_joints() {
    let s = spec(Family::Lacunary);
    for level in 1..6 {
        let f = generate(&s, level).unwrap().framework;
        let w = s.candidate_stress_exact(level).unwrap().unwrap();
        let r = rigidity::bar_rigidity_matrix_in::<BigRational>(&f).unwrap();
        let residual = r.left_apply(&w.values);
        let outer = [2 * level + 1, 2 * level + 2];
        for v in 0..f.vertex_count() {
            if outer.contains(&v) {
                continue;
            }
            assert!(residual[2 * v].is_zero() && residual[2 * v + 1].is_zero(), "joint {v}");
        }
    }
}

#[test]
fn lacunary_balance_at_joint_one() {
    // bars [0,1] and [1,3]: 1 · (1 − 0) + 1/2 · (1 − 3) = 0
    let w: Vec<f64> = vec![1.0, 0.5];
    let balance = w[0] * (1.0 - 0.0) + w[1] * (1.0 - 3.0);
    assert_eq!(balance, 0.0);
}

#[test]
fn lacunary_energy_closed_form() {
    let s = spec(Family::Lacunary);
    for n in [1usize, 4, 10] {
        let e = partial_energy_exact(&s, n).unwrap().unwrap();
        let expected = BigInt::from(2) * (BigInt::from(2).pow(n as u32 + 1) - 1);
        assert_eq!(e, BigRational::from_integer(expected));
    }
    let report = infinite_energy_report(&s, &(1..=10).collect::<Vec<_>>(), &tol()).unwrap();
    assert_eq!(report.partial_energies[9], 4094.0);
    assert_eq!(report.verdict, EnergyVerdict::Divergent);
}

#[test]
fn lacunary_summable_towards_four() {
    let s = spec(Family::Lacunary);
    let levels: Vec<usize> = (1..=12).collect();
    let r = summability_report(&s, &levels, &tol()).unwrap();
    assert!(r.summable);
    for (k, (&sum, tail)) in r.partial_abs_sums.iter().zip(&r.tail_bounds).enumerate() {
        let n = levels[k] as i32;
        assert!((sum - (4.0 - 2f64.powi(1 - n))).abs() < 1e-12);
        assert!(sum <= 4.0 && 4.0 <= sum + tail.unwrap());
    }
    let bps = bps_probe(&s, 4, &tol(), 0).unwrap();
    assert_eq!(bps.verdict, BpsVerdict::NotSupported);
}

#[test]
fn lacunary_lacks_uniform_structure() {
    let r = uniform_structure_check(&spec(Family::Lacunary), &[1, 2, 3, 4]).unwrap();
    assert!(!r.pass);
    assert!(r.max_degree <= 2);
    assert!(r.note.unwrap().contains("uniform structure fails"));
}

#[test]
fn uniform_bounds_hold() {
    let t = uniform_structure_check(&spec(Family::TriangleTiling), &[1, 2, 3]).unwrap();
    assert!(t.pass && t.max_degree <= 6 && (t.max_length - 1.0).abs() < 1e-12);
    let s = uniform_structure_check(&spec(Family::Strip), &[1, 5, 9]).unwrap();
    assert!(s.pass && s.max_length <= 2f64.sqrt() + 1e-12);
}

#[test]
fn dyadic_stress_is_nest_stable() {
    let a = solve_symmetric_stress(5, &tol()).unwrap();
    let b = solve_symmetric_stress(7, &tol()).unwrap();
    for k in 0..5 {
        assert!((a.connector_values[k] - b.connector_values[k]).abs() < 1e-8);
        assert!((a.square_values[k] - b.square_values[k]).abs() < 1e-8);
    }
    assert!(solve_symmetric_stress(2, &tol()).is_err());
}

#[test]
fn dyadic_summable_and_bps() {
    let s = spec(Family::DyadicSquares);
    let r = summability_report(&s, &[1, 2, 3, 4, 5, 6], &tol()).unwrap();
    assert!(r.summable, "{r:?}");
    let e = infinite_energy_report(&s, &[1, 2, 3, 4, 5, 6], &tol()).unwrap();
    assert_eq!(e.verdict, EnergyVerdict::Finite);
    let bps = bps_probe(&s, 4, &tol(), 7).unwrap();
    assert_eq!(bps.verdict, BpsVerdict::BpsEvidence, "{bps:?}");
    assert!(bps.flex_energies.iter().all(|(_, e)| *e > 0.0));
    assert!(bps.cross_terms.iter().filter(|c| c.declared_orthogonal).all(|c| c.value.abs() < 1e-9));
}

#[test]
fn dyadic_residuals_decay() {
    let s = spec(Family::DyadicSquares);
    let levels: Vec<usize> = (1..=8).collect();
    let p = truncation_residual_profile(&s, &levels, SequenceSpace::EllQ(1.0), &tol()).unwrap();
    assert!(p.strong_decay, "{:?}", p.residual_ratio);
    assert!(p.reports.iter().all(|r| r.lower_bound_holds));
}

#[test]
fn constant_dictionary_field_is_rejected() {
    let s = spec(Family::DyadicSquares);
    let constant = DictionaryField::new("constant", DecayClass::C0, |_| vec![1.0, 0.0]);
    assert!(weak_pairing_profile(&s, &[1, 2, 3, 4], &[constant], &tol()).is_err());
    let bounded = DictionaryField::new("constant", DecayClass::Bounded, |_| vec![1.0, 0.0]);
    assert!(weak_pairing_profile(&s, &[1, 2, 3, 4], &[bounded], &tol()).is_err());
}

#[test]
fn square_in_square_probe_matches_prestress() {
    let bps = bps_probe(&spec(Family::SquareInSquare), 1, &tol(), 0).unwrap();
    assert_eq!(bps.verdict, BpsVerdict::BpsEvidence);
    assert_eq!(bps.ps_state, Some(PSState::CertifiedPS));
}

#[test]
fn strip_profiles() {
    let s = spec(Family::Strip);
    let levels: Vec<usize> = (1..=20).collect();
    let p = truncation_residual_profile(&s, &levels, SequenceSpace::EllQ(1.0), &tol()).unwrap();
    assert!(!p.strong_decay);
    for r in &p.reports {
        assert!((r.residual_sup - 1.0).abs() < 1e-12);
    }
    let w = weak_pairing_profile(&s, &levels, &s.default_dictionary(), &tol()).unwrap();
    assert!(w.weak_decay, "{w:?}");
    assert!(w.series[0].pairings.iter().rev().take(10).all(|&x| x == 0.0));
    assert!(w.series[1].ratio.unwrap() < DECAY_THRESHOLD);
    let sum = summability_report(&s, &[1, 2, 3], &tol()).unwrap();
    assert!(!sum.summable);
}

#[test]
fn strip_monotonicity_at_level_twenty() {
    let r = strip_monotonicity(20, 5, 1.0, false, false).unwrap();
    assert!(r.holds);
    assert_eq!(r.maxima.len(), 15);
}

#[test]
fn triangle_contraction_and_residual() {
    let s = spec(Family::TriangleTiling);
    let t = generate(&s, 8).unwrap();
    let f = &t.framework;
    let w = s.candidate_stress(8, &tol()).unwrap();
    let residual = rigidity::bar_rigidity_matrix(f).left_apply(&w.values);
    for v in 0..f.vertex_count() {
        if f.members().iter().filter(|m| m.i == v || m.j == v).count() == 6 {
            assert!(residual[2 * v].abs() <= 1e-12 && residual[2 * v + 1].abs() <= 1e-12);
        }
    }
    let u = &s.candidate_flexes(8).unwrap()[0].field;
    let slack = member_slack(&t.as_tensegrity().unwrap(), u, &tol()).unwrap();
    assert!(slack.is_flex);
    assert!(slack.raw.iter().all(|x| (x + 0.5).abs() <= 1e-12));
    let sup = sequence_norm(&u.values, 2, SequenceSpace::C0).unwrap();
    assert!((sup - 4.0).abs() < 1e-12);
}
