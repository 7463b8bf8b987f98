use entrolab_core::dlm::*;
use entrolab_core::entropy::EntropyPair;
use entrolab_core::linalg::state;
use entrolab_core::system::*;
use entrolab_core::State;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};

fn four_paths(sys: &dyn System, a: &State, b: &State) -> Vec<Path> {
    let n = a.len();
    let fwd: Vec<usize> = (0..n).collect();
    let rev: Vec<usize> = (0..n).rev().collect();
    let mut paths = vec![
        make_path(&PathFamily::Straight, a, b, Some(sys)).unwrap(),
        make_path(&PathFamily::Bulged { factor: 0.2 }, a, b, Some(sys)).unwrap(),
        make_path(&PathFamily::Bulged { factor: -0.2 }, a, b, Some(sys)).unwrap(),
    ];
    let reordered = make_path(&PathFamily::Reordered { order: fwd }, a, b, Some(sys))
        .or_else(|_| make_path(&PathFamily::Reordered { order: rev }, a, b, Some(sys)))
        .unwrap();
    paths.push(reordered);
    paths
}

#[test]
fn gradient_amplitude_is_path_independent() {
    let a = state(&[0.0, 0.0]);
    let b = state(&[1.0, 1.0]);
    let paths: Vec<Path> = [
        PathFamily::Straight,
        PathFamily::Bezier { controls: vec![vec![1.0, 0.0]] },
        PathFamily::Bezier { controls: vec![vec![0.5, 0.0]] },
        PathFamily::Reordered { order: vec![1, 0] },
    ]
    .iter()
    .map(|f| make_path(f, &a, &b, None).unwrap())
    .collect();
    let probe = perfect_derivative_probe(|u: &State| Ok(u.clone()), &paths, 16).unwrap();
    assert!(probe.max_spread < 1e-12);
    assert!((probe.amplitudes[0].value - 1.0).abs() < 1e-14);
    assert_eq!(probe.verdict, PathVerdict::PathIndependent);
}

#[test]
fn euler_entropy_gradient_is_path_independent() {
    let e = Euler::new(1.4, 1).unwrap();
    let pair = EulerEntropy::new(&e, EntropyGenerator::Physical).unwrap();
    let a = e.conserved(1.0, &[0.0], 1.0);
    let b = e.conserved(0.125, &[0.0], 0.1);
    let paths: Vec<Path> = four_paths(&e, &a, &b).into_iter().take(3).collect();
    let probe = perfect_derivative_probe(|u: &State| pair.grad(u), &paths, 16).unwrap();
    assert_eq!(probe.verdict, PathVerdict::PathIndependent, "{probe:?}");
    let exact = pair.eta(&b).unwrap() - pair.eta(&a).unwrap();
    assert!((probe.amplitudes[0].value - exact).abs() < 1e-10);
}

#[test]
fn burgers_ledger() {
    let b = ScalarLaw::burgers();
    let quad = ScalarQuadratic::new(b.flux_kind());
    let entropic = make_path(&PathFamily::Straight, &state(&[1.0]), &state(&[0.0]), Some(&b)).unwrap();
    let sp = shock_entropy_production(&b, &quad, &[1.0], 0.5, &entropic, 16).unwrap();
    assert!((sp.value + 1.0 / 12.0).abs() < 1e-14);
    assert!(sp.discrepancy.unwrap() < 1e-14);
    let expansion = make_path(&PathFamily::Straight, &state(&[0.0]), &state(&[1.0]), Some(&b)).unwrap();
    let sp = shock_entropy_production(&b, &quad, &[1.0], 0.5, &expansion, 16).unwrap();
    assert!((sp.value - 1.0 / 12.0).abs() < 1e-14);
    let kr = Kruzhkov::new(b.flux_kind(), 0.5);
    let sp = shock_entropy_production(&b, &kr, &[1.0], 0.5, &entropic, 16).unwrap();
    assert!((sp.value + 0.25).abs() < 1e-15);
    assert!(sp.path_route.is_none());
}

#[test]
fn rozhdestvenskii_production_uses_path_only() {
    let p = make_path(&PathFamily::Straight, &state(&[1.0, 2.0, 3.0]), &state(&[0.0, 1.0, 2.0]), Some(&Rozhdestvenskii)).unwrap();
    let sp = shock_entropy_production(&Rozhdestvenskii, &RozhdestvenskiiQuadratic, &[1.0], 0.3, &p, 16).unwrap();
    assert!(sp.closed_form.is_none());
    assert!(sp.path_route.is_some());
}

fn random_jump(sys: &dyn System, rng: &mut SampleRng) -> (State, State) {
    (sys.sample_state(rng), sys.sample_state(rng))
}

#[test]
fn shock_production_path_independent_for_entropy_pairs() {
    let e = Euler::new(1.4, 1).unwrap();
    let iso = IsentropicEuler::new(1.4, 1.0, 1).unwrap();
    let cases: Vec<(Box<dyn System>, Box<dyn EntropyPair>)> = vec![
        (Box::new(e.clone()), Box::new(EulerEntropy::new(&e, EntropyGenerator::Physical).unwrap())),
        (Box::new(e.clone()), Box::new(EulerEntropy::new(&e, EntropyGenerator::Tadmor).unwrap())),
        (Box::new(iso.clone()), Box::new(IsentropicEnergy::new(&iso))),
        (Box::new(SymmetricCubic), Box::new(EtaLambda { lambda: 0.25 })),
    ];
    let mut rng = SampleRng::seed_from_u64(17);
    for (sys, pair) in &cases {
        for _ in 0..50 {
            let (a, b) = random_jump(sys.as_ref(), &mut rng);
            let sigma = rng.random_range(-1.0..1.0);
            let paths = four_paths(sys.as_ref(), &a, &b);
            let probe = production_probe(sys.as_ref(), pair.as_ref(), &[1.0], sigma, &paths, 16).unwrap();
            assert!(probe.max_spread < 1e-8, "{} {} {}", sys.id(), pair.id(), probe.max_spread);
            let cf = closed_form_production(pair.as_ref(), &[1.0], sigma, &a, &b).unwrap();
            assert!((probe.amplitudes[0].value - cf).abs() < 1e-8);
        }
    }
}

#[test]
fn swapping_states_negates_production() {
    let e = Euler::new(1.4, 1).unwrap();
    let pair = EulerEntropy::new(&e, EntropyGenerator::Tadmor).unwrap();
    let mut rng = SampleRng::seed_from_u64(3);
    for _ in 0..10 {
        let (a, b) = random_jump(&e, &mut rng);
        let f = make_path(&PathFamily::Straight, &a, &b, Some(&e)).unwrap();
        let r = make_path(&PathFamily::Straight, &b, &a, Some(&e)).unwrap();
        let ef = shock_entropy_production(&e, &pair, &[1.0], 0.4, &f, 16).unwrap().value;
        let er = shock_entropy_production(&e, &pair, &[1.0], 0.4, &r, 16).unwrap().value;
        assert!((ef + er).abs() < 1e-10);
        // Viewing the same shock from the other side leaves E unchanged.
        let mirrored = shock_entropy_production(&e, &pair, &[-1.0], -0.4, &r, 16).unwrap().value;
        assert!((ef - mirrored).abs() < 1e-10);
    }
}

#[test]
fn doubling_order_shrinks_error() {
    use entrolab_core::quadrature::GaussLegendre;
    let e = Euler::new(1.4, 1).unwrap();
    let pair = EulerEntropy::new(&e, EntropyGenerator::Physical).unwrap();
    let a = e.conserved(1.0, &[0.0], 1.0);
    let b = e.conserved(0.6, &[0.3], 0.7);
    let p = make_path(&PathFamily::Bulged { factor: 0.1 }, &a, &b, Some(&e)).unwrap();
    let exact = pair.eta(&b).unwrap() - pair.eta(&a).unwrap();
    let q = |n: usize| {
        GaussLegendre::new(n).integrate(0.0, 1.0, |s| Ok(pair.grad(&p.phi(s))?.dot(&p.dphi(s)))).unwrap()
    };
    let (e2, e4, e8) = ((q(2) - exact).abs(), (q(4) - exact).abs(), (q(8) - exact).abs());
    assert!(e4 * 10.0 <= e2 && e8 * 10.0 <= e4, "{e2} {e4} {e8}");
}

#[test]
fn inadmissible_path_rejected() {
    let e = Euler::new(1.4, 1).unwrap();
    let a = e.conserved(1.0, &[0.0], 1.0);
    let b = e.conserved(1.0, &[0.0], 1.0);
    let bad = PathFamily::Bezier { controls: vec![vec![-1.0, 0.0, 1.0]] };
    assert!(matches!(make_path(&bad, &a, &b, Some(&e)), Err(entrolab_core::Error::InadmissibleState(_))));
}

proptest! {
    #[test]
    fn endpoints_exact(a0 in -3.0..3.0f64, a1 in -3.0..3.0f64, b0 in -3.0..3.0f64, b1 in -3.0..3.0f64, f in -1.0..1.0f64) {
        let (a, b) = (state(&[a0, a1]), state(&[b0, b1]));
        for fam in [PathFamily::Straight, PathFamily::Bulged { factor: f }, PathFamily::Reordered { order: vec![1, 0] }] {
            let p = make_path(&fam, &a, &b, None).unwrap();
            prop_assert!((p.phi(0.0) - &a).amax() <= 1e-14);
            prop_assert!((p.phi(1.0) - &b).amax() <= 1e-14);
        }
    }
}
