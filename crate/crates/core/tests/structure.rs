use std::sync::Arc;

use entrolab_core::checks::*;
use entrolab_core::entropy::{from_entropy_vars, potential_eval, to_entropy_vars, AffineShift, EntropyPair};
use entrolab_core::linalg::state;
use entrolab_core::system::*;
use entrolab_core::{Error, State};
use proptest::prelude::*;

fn euler_pairs(e: &Euler) -> Vec<EulerEntropy> {
    [EntropyGenerator::Physical, EntropyGenerator::Tadmor, EntropyGenerator::Homogeneous { alpha: 1.0 }]
        .into_iter()
        .map(|g| EulerEntropy::new(e, g).unwrap())
        .collect()
}

#[test]
fn compatible_pairs_pass_both_checks() {
    let burgers = ScalarLaw::burgers();
    let exp = ScalarLaw::new(ScalarFlux::Exponential { k: 1.0 }).unwrap();
    let mut cases: Vec<(Box<dyn System>, Box<dyn EntropyPair>)> = vec![
        (Box::new(burgers.clone()), Box::new(ScalarQuadratic::new(burgers.flux_kind()))),
        (Box::new(exp.clone()), Box::new(ScalarQuadratic::new(exp.flux_kind()))),
        (Box::new(SymmetricCubic), Box::new(SymmetricQuadratic)),
        (Box::new(SymmetricCubic), Box::new(EtaLambda { lambda: 0.25 })),
    ];
    for d in [1, 2] {
        let s = IsentropicEuler::new(1.4, 1.0, d).unwrap();
        cases.push((Box::new(s.clone()), Box::new(IsentropicEnergy::new(&s))));
    }
    for d in [1, 2, 3] {
        let e = Euler::new(1.4, d).unwrap();
        for p in euler_pairs(&e) {
            cases.push((Box::new(e.clone()), Box::new(p)));
        }
    }
    for (sys, pair) in &cases {
        let states = sample_states(sys.as_ref(), 100, 11);
        let a = check_entropy_pair(sys.as_ref(), pair.as_ref(), &states).unwrap();
        assert!(a.passed(), "{} {} {}", sys.id(), pair.id(), a.max_residual);
        let b = check_symmetrizer(sys.as_ref(), pair.as_ref(), &states).unwrap();
        assert!(b.passed(), "{} {} {}", sys.id(), pair.id(), b.max_residual);
        assert_eq!(a.states_tested, 100);
    }
}

#[test]
fn kruzhkov_values_are_compatible_away_from_kink() {
    let b = ScalarLaw::burgers();
    let mut states = sample_states(&b, 100, 4);
    states.push(state(&[0.5]));
    let rep = check_entropy_pair(&b, &Kruzhkov::new(b.flux_kind(), 0.5), &states).unwrap();
    assert!(rep.passed());
    assert_eq!(rep.skipped, 1);
    assert!(matches!(
        check_symmetrizer(&b, &Kruzhkov::new(b.flux_kind(), 0.5), &states),
        Err(Error::NotStrictlyConvex(_))
    ));
}

#[test]
fn euler_symmetrizer_at_reference_primitive_state() {
    let e = Euler::new(1.4, 1).unwrap();
    let u = e.conserved(1.0, &[0.3], 1.0);
    let rep = check_symmetrizer(&e, &euler_pairs(&e)[0], &[u]).unwrap();
    assert!(rep.max_residual < 1e-8);
}

#[test]
fn classification_gates() {
    let b = ScalarLaw::burgers();
    let rb = symmetrizer_search(&b, &sample_states(&b, 20, 1), &[]).unwrap();
    assert_eq!(rb.verdict, SearchVerdict::Entropic);

    let e = Euler::new(1.4, 1).unwrap();
    let pairs = euler_pairs(&e);
    let refs: Vec<&dyn EntropyPair> = pairs.iter().map(|p| p as &dyn EntropyPair).collect();
    let re = symmetrizer_search(&e, &sample_states(&e, 20, 1), &refs).unwrap();
    assert_eq!(re.verdict, SearchVerdict::Entropic, "{re:?}");
    assert_eq!(re.gradient_freedom_min, 3);

    let rr = symmetrizer_search(&Rozhdestvenskii, &sample_states(&Rozhdestvenskii, 25, 1), &[]).unwrap();
    assert_eq!(rr.verdict, SearchVerdict::NonEntropic);
    assert_eq!(rr.pattern_label, "diagonal");
    assert_eq!(rr.nullspace_dim_max, 3);
    assert_eq!(rr.forced_zero_states, 25);

    let few = symmetrizer_search(&Rozhdestvenskii, &sample_states(&Rozhdestvenskii, 5, 1), &[]).unwrap();
    assert_eq!(few.verdict, SearchVerdict::Inconclusive);
}

#[test]
fn godunov_potentials_on_euler() {
    let e = Euler::new(1.4, 1).unwrap();
    let states = sample_states(&e, 50, 21);
    for p in euler_pairs(&e) {
        let rep = check_godunov_potentials(&e, &p, &states).unwrap();
        assert!(rep.passed(), "{} {}", p.id(), rep.max_residual);
    }
    let e2 = Euler::new(5.0 / 3.0, 2).unwrap();
    let rep = check_godunov_potentials(&e2, &euler_pairs(&e2)[1], &sample_states(&e2, 20, 3)).unwrap();
    assert!(rep.passed());
}

#[test]
fn passing_pair_and_convexity_imply_potential_check() {
    let s = IsentropicEuler::new(2.0, 0.5, 2).unwrap();
    let p = IsentropicEnergy::new(&s);
    let states = sample_states(&s, 30, 8);
    assert!(check_entropy_pair(&s, &p, &states).unwrap().passed());
    assert!(check_convexity(&s, &p, &states, None).unwrap().passed());
    assert!(check_godunov_potentials(&s, &p, &states).unwrap().passed());
}

#[test]
fn convexity_reports() {
    let e = Euler::new(1.4, 1).unwrap();
    let states = sample_states(&e, 50, 2);
    let rep = check_convexity(&e, &euler_pairs(&e)[0], &states, None).unwrap();
    assert!(rep.passed());
    let degenerate = EulerEntropy::new(&e, EntropyGenerator::Homogeneous { alpha: 0.0 }).unwrap();
    assert!(!check_convexity(&e, &degenerate, &states, None).unwrap().passed());
    let demo = sample_states(&SymmetricCubic, 50, 2);
    let q = check_convexity(&SymmetricCubic, &SymmetricQuadratic, &demo, Some(&default_lambda_grid())).unwrap();
    assert_eq!(q.metrics["min_eigenvalue"], 1.0);
    assert!(q.metrics["lambda_hi"] < 1.0 / 3.0);
}

/// Independent inverse of the Tadmor entropy variables: velocity from
/// `-v_m / v_E`, `S` eliminated through `v_E = -exp(-gamma S/(gamma+1)) rho^(1-gamma)`,
/// then bisection in `ln rho` on the `v_rho` component.
fn bisection_inverse(e: &Euler, pair: &EulerEntropy, v: &State, gamma: f64) -> State {
    let ve = v[2];
    let vel = -v[1] / ve;
    let at = |lr: f64| {
        let rho = lr.exp();
        let s = -(gamma + 1.0) / gamma * (-ve * rho.powf(gamma - 1.0)).ln();
        e.conserved(rho, &[vel], rho.powf(gamma) * s.exp())
    };
    let resid = |lr: f64| pair.grad(&at(lr)).unwrap()[0] - v[0];
    let (mut lo, mut hi) = (-10.0_f64, 10.0_f64);
    let flo = resid(lo);
    assert!(flo * resid(hi) < 0.0, "bracket");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (resid(mid) > 0.0) == (flo > 0.0) { lo = mid } else { hi = mid }
    }
    at(0.5 * (lo + hi))
}

#[test]
fn euler_entropy_variable_round_trip() {
    let e = Euler::new(1.4, 1).unwrap();
    let states = sample_states(&e, 100, 5);
    for p in euler_pairs(&e) {
        for u in &states {
            let v = to_entropy_vars(&e, &p, u).unwrap();
            let back = from_entropy_vars(&e, &p, &v, None).unwrap();
            assert!((&back - u).amax() < 1e-10 * u.amax().max(1.0));
        }
    }
    let tadmor = &euler_pairs(&e)[1];
    for u in states.iter().take(10) {
        let v = tadmor.grad(u).unwrap();
        let oracle = bisection_inverse(&e, tadmor, &v, 1.4);
        let newton = from_entropy_vars(&e, tadmor, &v, None).unwrap();
        assert!((oracle - newton).amax() < 1e-9);
    }
}

#[test]
fn potential_identity_at_registered_states() {
    let e = Euler::new(1.4, 2).unwrap();
    let p = &euler_pairs(&e)[0];
    for u in sample_states(&e, 10, 6) {
        let v = p.grad(&u).unwrap();
        let pot = potential_eval(&e, p, &v, None).unwrap();
        for j in 0..2 {
            let lhs = pot.psi[j] + p.flux(&u, j).unwrap();
            let rhs = v.dot(&flux_eval(&e, &u, j).unwrap());
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
    }
}

#[test]
fn homogeneity_degrees() {
    let scalings = [0.5, 2.0, 10.0];
    let e = Euler::new(1.4, 2).unwrap();
    let rep = check_homogeneity(&e, None, &sample_states(&e, 20, 1), &scalings).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert!((rep.metrics["flux_degree_min"] - 1.0).abs() < 1e-10);
    assert!((rep.metrics["flux_degree_max"] - 1.0).abs() < 1e-10);

    for (g, alpha) in [(1.4, 0.0), (1.4, 1.0), (5.0 / 3.0, 0.0)] {
        let e = Euler::new(g, 1).unwrap();
        let p = EulerEntropy::new(&e, EntropyGenerator::Homogeneous { alpha }).unwrap();
        let rep = check_homogeneity(&e, Some(&p), &sample_states(&e, 20, 2), &scalings).unwrap();
        let expect = (alpha + g) / (1.0 - g);
        assert!(rep.passed(), "{rep:?}");
        assert!((rep.metrics["entropy_var_degree_min"] - expect).abs() < 1e-8);
        assert!((rep.metrics["expected_entropy_var_degree"] - expect).abs() < 1e-12);
        if alpha > 0.0 {
            assert!((rep.metrics["inverse_map_degree_max"] - expect).abs() < 1e-8);
        }
    }

    let ur = UltraRelativistic::new(3).unwrap();
    let rep = check_homogeneity(&ur, None, &sample_states(&ur, 20, 3), &scalings).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert!((rep.metrics["temporal_flux_degree_max"] - 1.0).abs() < 1e-10);
}

#[test]
fn homogeneity_fit_is_scale_invariant() {
    let e = Euler::new(1.4, 1).unwrap();
    let states = sample_states(&e, 10, 1);
    let a = check_homogeneity(&e, None, &states, &[0.5, 2.0, 10.0]).unwrap();
    let b = check_homogeneity(&e, None, &states, &[1.5, 6.0, 30.0]).unwrap();
    assert!((a.metrics["flux_degree_min"] - b.metrics["flux_degree_min"]).abs() < 1e-10);
    assert!((a.metrics["flux_degree_max"] - b.metrics["flux_degree_max"]).abs() < 1e-10);
}

#[test]
fn analytic_jacobian_invariant_all_dimensions() {
    for sys in [Euler::new(1.4, 3).unwrap()] {
        for u in sample_states(&sys, 100, 13) {
            for j in 0..3 {
                let a = jacobian_eval(&sys, &u, j).unwrap();
                let f = fd_jacobian(&sys, &u, j).unwrap();
                assert!((&a - f).amax() <= 1e-6 * (1.0 + a.amax()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euler_round_trip(rho in 0.2..5.0f64, vel in -2.0..2.0f64, p in 0.2..5.0f64) {
        let e = Euler::new(1.4, 1).unwrap();
        let pair = EulerEntropy::new(&e, EntropyGenerator::Physical).unwrap();
        let u = e.conserved(rho, &[vel], p);
        let v = to_entropy_vars(&e, &pair, &u).unwrap();
        let back = from_entropy_vars(&e, &pair, &v, None).unwrap();
        prop_assert!((back - &u).amax() < 1e-10 * u.amax().max(1.0));
    }

    #[test]
    fn shifted_pair_stays_compatible(c0 in -2.0..2.0f64, c1 in -2.0..2.0f64, c2 in -2.0..2.0f64) {
        let sys: Arc<dyn System> = Arc::new(Euler::new(1.4, 1).unwrap());
        let e = Euler::new(1.4, 1).unwrap();
        let base: Arc<dyn EntropyPair> = Arc::new(EulerEntropy::new(&e, EntropyGenerator::Tadmor).unwrap());
        let shifted = AffineShift::new(base, sys.clone(), state(&[c0, c1, c2])).unwrap();
        let states = sample_states(sys.as_ref(), 5, 3);
        prop_assert!(check_entropy_pair(sys.as_ref(), &shifted, &states).unwrap().passed());
        prop_assert!(check_symmetrizer(sys.as_ref(), &shifted, &states).unwrap().passed());
    }
}
