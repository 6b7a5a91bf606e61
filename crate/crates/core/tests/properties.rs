use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rigidity_core::cones;
use rigidity_core::infinite::{Family, GeneratorSpec, SequenceSpace};
use rigidity_core::linalg::dense;
use rigidity_core::linalg::Matrix;
use rigidity_core::prestress::{self, PSState, SearchBudget, SecondOrderOutcome};
use rigidity_core::rigidity;
use rigidity_core::tensegrity::{self, Verdict};
use rigidity_core::{
    expand_to_cable_strut, parse_framework, to_canonical_json, Coordinate, Framework, Member, MemberKind, StressField,
    Tensegrity, ToleranceContext, VelocityField,
};

fn tol() -> ToleranceContext {
    ToleranceContext::default()
}

/// Distinct integer points in `[−3, 3]²` and a member choice per pair:
/// 0 none, 1 bar, 2 cable, 3 strut.
fn small_framework(kinds: &'static [u8]) -> impl Strategy<Value = Framework> {
    (3usize..=6)
        .prop_flat_map(move |n| {
            (
                prop::collection::hash_set((-3i64..=3, -3i64..=3), n),
                prop::collection::vec(prop::sample::select(kinds), n * (n - 1) / 2),
            )
        })
        .prop_filter_map("needs a member", |(pts, choice)| {
            let pts: Vec<(i64, i64)> = {
                let mut v: Vec<_> = pts.into_iter().collect();
                v.sort();
                v
            };
            let n = pts.len();
            let mut members = Vec::new();
            let mut c = choice.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    match c.next().unwrap() {
                        1 => members.push(Member::bar(i, j)),
                        2 => members.push(Member::cable(i, j)),
                        3 => members.push(Member::strut(i, j)),
                        _ => {}
                    }
                }
            }
            if members.is_empty() {
                return None;
            }
            let vertices = pts.iter().map(|&(x, y)| vec![Coordinate::from(x), Coordinate::from(y)]).collect();
            Framework::new(2, vertices, members).ok()
        })
}

fn bar_framework() -> impl Strategy<Value = Framework> {
    small_framework(&[0, 1, 1])
}

fn tensegrity_strategy() -> impl Strategy<Value = Tensegrity> {
    small_framework(&[0, 2, 3]).prop_filter_map("tensegrity", |f| Tensegrity::new(f).ok())
}

fn random_field(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_json_round_trips(f in small_framework(&[0, 1, 2, 3])) {
        let text = to_canonical_json(&f);
        let g = parse_framework(&text).unwrap();
        prop_assert_eq!(to_canonical_json(&g), text);
    }

    #[test]
    fn cable_strut_expansion_is_idempotent(f in small_framework(&[0, 1, 2, 3])) {
        let once = expand_to_cable_strut(&f);
        let twice = expand_to_cable_strut(once.framework());
        prop_assert_eq!(once.members(), twice.members());
        prop_assert_eq!(once.framework().vertices(), f.vertices());
    }

    #[test]
    fn trivial_fields_are_flexes(f in bar_framework()) {
        let r = rigidity::bar_rigidity_matrix(&f);
        let trivial = rigidity::trivial_flex_space(&f.placement(), 2);
        for u in &trivial.basis {
            prop_assert!(dense::norm_inf(&r.apply(u)) <= tol().cert_tol);
        }
    }

    #[test]
    fn signed_and_unsigned_zero_sets_agree(t in tensegrity_strategy(), seed in any::<u64>()) {
        let unsigned = rigidity::bar_rigidity_matrix(t.framework());
        let signed = rigidity::tensegrity_rigidity_matrix(&t);
        let mut u = random_field(seed, 2 * t.framework().vertex_count());
        // include exact flexes some of the time
        if seed % 2 == 0 {
            let flexes = rigidity::flex_space(&t.framework().bar_closure(), &tol());
            if let Some(v) = flexes.basis.first() {
                u = v.clone();
            }
        }
        let a = unsigned.apply(&u);
        let b = signed.apply(&u);
        let zero = |x: &[f64]| dense::norm_inf(x) <= tol().cert_tol;
        prop_assert_eq!(zero(&a), zero(&b));
    }

    #[test]
    fn float_rank_matches_exact_rank(f in bar_framework()) {
        let float = rigidity::bar_rigidity_matrix(&f).rank(&tol());
        prop_assert_eq!(Some(float), rigidity::exact_rank(&f));
    }

    #[test]
    fn dichotomy_is_exclusive(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 3), 1..=6)) {
        let a = Matrix::from_fn(rows.len(), 3, |i, j| rows[i][j] as f64);
        let kernel = cones::strict_positive_left_kernel(&a).is_some();
        let flex = cones::flexible_direction(&a).is_some();
        prop_assert!(kernel != flex);
        prop_assert!(cones::dichotomy(&a, &tol()).is_ok());
    }

    #[test]
    fn exact_and_float_dichotomy_agree(rows in prop::collection::vec(prop::collection::vec(-4i64..=4, 4), 1..=7)) {
        let r = rigidity_core::suites::dichotomy_trial(&rows, &tol());
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn strip_top_row_drift_is_dominated(level in 3usize..=10, a in 0.1f64..3.0) {
        let r = rigidity_core::infinite::strip_monotonicity(level, 1, a, false, false).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }

    #[test]
    fn projection_is_optimal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.random_range(2..=4usize);
        let gens: Vec<Vec<f64>> = (0..rng.random_range(1..=5usize))
            .map(|_| (0..dim).map(|_| rng.random_range(-3..=3) as f64).collect())
            .collect();
        let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect();
        let p = cones::cone_project(&gens, &w, &tol());
        for _ in 0..1000 {
            let mut x = vec![0.0; dim];
            for g in &gens {
                dense::axpy(rng.random_range(0.0..3.0), g, &mut x);
            }
            let dist = dense::norm(&x.iter().zip(&w).map(|(a, b)| a - b).collect::<Vec<_>>());
            prop_assert!(p.distance <= dist + 1e-9);
        }
    }

    #[test]
    fn methods_agree(t in tensegrity_strategy()) {
        let direct = tensegrity::first_order_rigidity_direct(&t, &tol());
        let cert = tensegrity::roth_whiteley_certify(&t, &tol()).unwrap();
        prop_assert_eq!(direct.verdict, cert.verdict);
    }

    #[test]
    fn witnesses_are_nontrivial_flexes(t in tensegrity_strategy()) {
        let c = tensegrity::first_order_rigidity_direct(&t, &tol());
        if c.verdict == Verdict::Flexible {
            let u = c.witness_flex.unwrap();
            let slack = tensegrity::member_slack(&t, &u, &tol()).unwrap();
            prop_assert!(slack.is_flex);
            let trivial = rigidity::trivial_flex_space(&t.framework().placement(), 2);
            prop_assert!(dense::norm(&trivial.nontrivial_part(&u.values)) >= 10.0 * tol().cert_tol);
        }
    }

    #[test]
    fn proper_stress_forces_zero_slack(t in tensegrity_strategy()) {
        if let Some(w) = tensegrity::proper_equilibrium_stress(&t, &tol()) {
            let c = tensegrity::first_order_rigidity_direct(&t, &tol());
            if let Some(u) = c.witness_flex {
                let slack = tensegrity::member_slack(&t, &u, &tol()).unwrap();
                let total: f64 = w.values.iter().zip(&slack.signed).map(|(a, s)| a.abs() * s).sum();
                prop_assert!(total.abs() <= 1e-7);
                prop_assert!(slack.signed.iter().all(|s| s.abs() <= 1e-7));
            }
        }
    }

    #[test]
    fn stress_matrix_rows_sum_to_zero(f in bar_framework(), seed in any::<u64>()) {
        let w = StressField::new(random_field(seed, f.member_count()));
        let om = prestress::stress_matrix(&f, &w).unwrap();
        prop_assert!(om.max_row_sum() <= 1e-12);
    }

    #[test]
    fn energy_form_is_the_inflated_quadratic(f in bar_framework(), seed in any::<u64>()) {
        let w = StressField::new(random_field(seed, f.member_count()));
        let u = VelocityField::new(2, random_field(seed ^ 1, 2 * f.vertex_count()));
        let e = prestress::energy_form(&f, &w, &u).unwrap();
        let q = prestress::stress_matrix(&f, &w).unwrap().quadratic(&u.values);
        prop_assert!((e - q).abs() <= 1e-10 * e.abs().max(1.0));
    }

    #[test]
    fn second_order_extension_is_exclusive(f in bar_framework(), seed in any::<u64>()) {
        let flexes = rigidity::flex_space(&f, &tol());
        if flexes.basis.is_empty() {
            return Ok(());
        }
        let coeffs = random_field(seed, flexes.basis.len());
        let mut u = vec![0.0; 2 * f.vertex_count()];
        for (v, c) in flexes.basis.iter().zip(coeffs) {
            dense::axpy(c, v, &mut u);
        }
        let u = VelocityField::new(2, u);
        let probe = &prestress::wps_probe(&f, std::slice::from_ref(&u), &tol()).unwrap()[0];
        match prestress::second_order_extend(&f, &u, &tol()).unwrap() {
            SecondOrderOutcome::Extended(_) => prop_assert!(!probe.witnessed),
            SecondOrderOutcome::Blocked { .. } => prop_assert!(probe.witnessed),
            SecondOrderOutcome::Undecided { .. } => {}
        }
    }

    #[test]
    fn prestress_hierarchy(f in bar_framework(), seed in any::<u64>()) {
        let v = prestress::prestress_stability(&f, &tol(), &SearchBudget::default()).unwrap();
        if v.flex_dim == 0 {
            prop_assert_eq!(v.state, PSState::CertifiedPS);
        }
        if v.state == PSState::CertifiedPS && v.flex_dim > 0 {
            let w = v.stress.clone().unwrap();
            let flexes = rigidity::flex_space(&f, &tol());
            let mut u = vec![0.0; 2 * f.vertex_count()];
            for (b, c) in flexes.basis.iter().zip(random_field(seed, flexes.dim())) {
                dense::axpy(c, b, &mut u);
            }
            let e = prestress::energy_form(&f, &w, &VelocityField::new(2, u.clone())).unwrap();
            prop_assert!(e > 0.0);
            let probe = &prestress::wps_probe(&f, &[VelocityField::new(2, u)], &tol()).unwrap()[0];
            prop_assert!(probe.witnessed || probe.trivial);
        }
    }

    #[test]
    fn dual_of_dual(q in 1.01f64..50.0) {
        let s = SequenceSpace::ell_q(q).unwrap();
        match s.dual().unwrap().dual().unwrap() {
            SequenceSpace::EllQ(r) => prop_assert!((r - q).abs() <= 1e-9 * q),
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

#[test]
fn partial_sums_are_nondecreasing_for_nonnegative_families() {
    for family in [Family::Lacunary, Family::DyadicSquares] {
        let spec = GeneratorSpec::new(family);
        let levels: Vec<usize> = (1..=6).collect();
        let p = rigidity_core::infinite::truncation_residual_profile(&spec, &levels, SequenceSpace::C0, &tol()).unwrap();
        assert!(p.abs_sum_nondecreasing, "{family}");
    }
}

#[test]
fn reports_are_nest_stable() {
    // the same members carry the same values at levels n, n + 1 and n + 2
    for family in Family::ALL {
        let spec = GeneratorSpec::new(family);
        let f = spec.truncation(3).unwrap().framework;
        let w = spec.candidate_stress(3, &tol()).unwrap();
        for up in [4, 5] {
            let g = spec.truncation(up).unwrap().framework;
            let v = spec.candidate_stress(up, &tol()).unwrap();
            for (m, x) in f.members().iter().zip(&w.values) {
                let y = v.values[g.member_index(m).unwrap()];
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{family} {}", m.label());
            }
        }
    }
}

#[test]
fn member_kinds_survive_expansion() {
    let f = Framework::from_f64(2, &[vec![0.0, 0.0], vec![1.0, 0.0]], vec![Member::bar(0, 1)]).unwrap();
    let t = expand_to_cable_strut(&f);
    assert_eq!(t.framework().count_kind(MemberKind::Cable), 1);
    assert_eq!(t.framework().count_kind(MemberKind::Strut), 1);
}
