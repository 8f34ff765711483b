//! End-to-end acceptance suite. Each test prints one pass line; run with
//! `--nocapture` to see them all.

use std::sync::Arc;

use floatlab::convexfn::{self, ConvexFunction};
use floatlab::epigraph::{self, EllipsoidSpec};
use floatlab::experiments::{self, DeltaLadder, GridSpec};
use floatlab::floating::{self, FloatParams};
use floatlab::geom::{self, Mat};
use floatlab::parser;
use floatlab::surface;

fn parabola_half() -> ConvexFunction {
    convexfn::quadratic_form(Mat::new1(0.5), 0.0).unwrap()
}

fn parabola() -> ConvexFunction {
    convexfn::quadratic_form(Mat::new1(1.0), 0.0).unwrap()
}

fn paraboloid_half() -> ConvexFunction {
    convexfn::quadratic_form(Mat::new2(0.5, 0.0, 0.0, 0.5), 0.0).unwrap()
}

/// max(x², −x) or max(x², x): one-sided linear branch glued to the parabola.
fn parabola_linear_max(sign: f64) -> ConvexFunction {
    let eval = Arc::new(move |x: &floatlab::Point| (x[0] * x[0]).max(sign * x[0]));
    let grad = Arc::new(move |x: &floatlab::Point| {
        if x[0] * x[0] >= sign * x[0] {
            [2.0 * x[0], 0.0]
        } else {
            [sign, 0.0]
        }
    });
    let hess = Arc::new(move |x: &floatlab::Point| {
        if x[0] * x[0] >= sign * x[0] {
            Mat::new1(2.0)
        } else {
            Mat::new1(0.0)
        }
    });
    ConvexFunction::from_parts(1, eval, Some(grad), Some(hess)).unwrap()
}

fn pass(criterion: u32, label: &str) {
    println!("ACCEPTANCE {criterion} ({label}): PASS");
}

#[test]
fn acceptance_01_parabola_floating_exactness() {
    let psi = parabola_half();
    for delta in [1e-2, 1e-3, 1e-4] {
        let params = FloatParams::for_function(&psi, delta).unwrap();
        let ev = floating::floating_value(&psi, &[0.0, 0.0], &params).unwrap();
        let oracle = 0.5 * (1.5 * delta).powf(2.0 / 3.0);
        assert!(
            (ev.psi_delta - oracle).abs() <= 1e-5,
            "delta {delta}: psi_delta {} vs oracle {oracle}",
            ev.psi_delta
        );
    }
    let params = FloatParams::for_function(&psi, 1e-3).unwrap();
    let ev = floating::floating_value(&psi, &[1.0, 0.0], &params).unwrap();
    assert!((ev.slope[0] - 1.0).abs() <= 1e-3, "maximizing slope {}", ev.slope[0]);
    pass(1, "parabola floating exactness");
}

#[test]
fn acceptance_02_theorem_1d() {
    let psi = parabola_half();
    let ladder = DeltaLadder::new(1e-2, 1e-5, 7).unwrap();
    let rep = experiments::theorem_ratio(&psi, &ladder, &GridSpec::default_for(1)).unwrap();
    let limit = 1.642325;
    assert!(
        (rep.extrapolated_limit - limit).abs() <= 0.01 * limit,
        "extrapolated {} vs {limit}",
        rep.extrapolated_limit
    );
    let row = rep
        .rows
        .iter()
        .find(|r| (r.delta - 1e-4).abs() < 1e-10)
        .expect("ladder contains 1e-4");
    assert!(
        (row.ratio - 1.641125).abs() <= 0.01 * 1.641125,
        "R(1e-4) = {}",
        row.ratio
    );
    pass(2, "limit theorem n=1");
}

#[test]
fn acceptance_03_theorem_2d() {
    let psi = paraboloid_half();
    let ladder = DeltaLadder::default_for(2);
    let rep = experiments::theorem_ratio(&psi, &ladder, &GridSpec::default_for(2)).unwrap();
    let limit = 2.0 * std::f64::consts::PI.sqrt();
    assert!(
        (rep.extrapolated_limit - limit).abs() <= 0.03 * limit,
        "extrapolated {} vs {limit}",
        rep.extrapolated_limit
    );
    pass(3, "limit theorem n=2");
}

#[test]
fn acceptance_04_proposition_ratio_constant() {
    let psi = parabola_half();
    let ladder = DeltaLadder::new(1e-2, 1e-4, 5).unwrap();
    let rep = experiments::proposition_ratio(&psi, &ladder, &GridSpec::default_for(1)).unwrap();
    let target = 1.642325;
    for row in &rep.rows {
        assert!(
            (row.ratio - target).abs() <= 0.01 * target,
            "delta {}: ratio {}",
            row.delta,
            row.ratio
        );
    }
    pass(4, "weighted-difference ratio is delta-independent");
}

#[test]
fn acceptance_05_pointwise_rates() {
    let psi = parabola();
    let ladder = DeltaLadder::new(1e-3, 1e-5, 3).unwrap();
    let rep = experiments::pointwise_rate(&psi, &[0.0, 0.0], &ladder).unwrap();
    let target = 0.825486;
    assert!((rep.limit_target - target).abs() < 1e-5);
    let (_, ratio) = *rep.rows.last().unwrap();
    assert!((ratio - target).abs() <= 0.02 * target, "pointwise ratio {ratio}");

    // Locally affine point: max(x²/2, |x|) equals |x| on (0, 2)
    let flat = parser::parse("max(quad(0.5), pownorm(1,1))").unwrap();
    let rep = experiments::pointwise_rate(&flat, &[1.0, 0.0], &ladder).unwrap();
    let (_, ratio) = *rep.rows.last().unwrap();
    assert!(ratio <= 0.05, "locally affine ratio {ratio}");
    pass(5, "pointwise asymptotics");
}

#[test]
fn acceptance_06_uniform_bound() {
    let psi = parabola_half();
    let grid = floating::grid_1d(-2.0, 2.0, 81);
    let rep = experiments::uniform_bound_check(&psi, &grid, 1e-4).unwrap();
    assert!(rep.pass, "{rep:?}");
    pass(6, "uniform ratio bound");
}

#[test]
fn acceptance_07_valuation_identity() {
    let psi1 = parabola_linear_max(-1.0);
    let psi2 = parabola_linear_max(1.0);
    let rep = surface::check_valuation(&psi1, &psi2, 1e-3).unwrap();
    assert!(rep.pass, "{rep:?}");
    let oracle = 2.584426;
    assert!((rep.lhs - oracle).abs() <= 1e-3, "lhs {}", rep.lhs);
    assert!((rep.rhs - oracle).abs() <= 1e-3, "rhs {}", rep.rhs);
    pass(7, "valuation identity");
}

#[test]
fn acceptance_08_affine_invariance_battery() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5150);
    for trial in 0..20 {
        let dim = if trial % 2 == 0 { 1 } else { 2 };
        let (psi, a) = if dim == 1 {
            let q = rng.gen_range(0.3..2.0);
            let scale: f64 = rng.gen_range(0.4..2.5);
            (convexfn::quadratic_form(Mat::new1(q), 0.0).unwrap(), Mat::new1(scale))
        } else {
            let d1 = rng.gen_range(0.4..1.5);
            let d2 = rng.gen_range(0.4..1.5);
            let off = rng.gen_range(-0.2..0.2);
            let psi = convexfn::quadratic_form(Mat::new2(d1, off, off, d2), 0.0).unwrap();
            // triangular with moderate condition number
            let a = Mat::new2(
                rng.gen_range(0.5..2.0),
                rng.gen_range(-0.5..0.5),
                0.0,
                rng.gen_range(0.5..2.0),
            );
            (psi, a)
        };
        let t = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        let rep = surface::check_affine_invariance(&psi, a, t, 5e-3).unwrap();
        assert!(rep.pass, "trial {trial}: {rep:?}");
    }
    pass(8, "affine invariance battery");
}

#[test]
fn acceptance_09_isoperimetric() {
    let rep = surface::check_isoperimetric(&parabola(), 2e-3).unwrap();
    assert!(rep.pass && rep.rel_gap <= 2e-3, "{rep:?}");
    assert!((rep.lhs - 2.233127).abs() < 2e-3);

    let rep = surface::check_isoperimetric(&paraboloid_half(), 2e-3).unwrap();
    assert!(rep.pass && rep.rel_gap <= 2e-3, "{rep:?}");
    assert!((rep.lhs - std::f64::consts::TAU).abs() < 2e-2);

    let quartic = convexfn::quartic_gauge_2d().unwrap();
    let rep = surface::check_isoperimetric(&quartic, 2e-3).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.rhs - rep.lhs > 0.01 * rep.rhs, "strict gap: {rep:?}");
    pass(9, "isoperimetric inequality");
}

#[test]
fn acceptance_10_gauge_relation_discriminator() {
    let rep = surface::check_gauge_relation(1.0, 1.0, 1e-2).unwrap();
    let two_pi = std::f64::consts::TAU;
    assert!((rep.lhs - two_pi).abs() <= 0.005 * two_pi, "asa {}", rep.lhs);
    assert!((rep.rhs - two_pi).abs() <= 0.005 * two_pi, "scaled as_p {}", rep.rhs);
    assert!(rep.pass);
    assert!(rep.notes.iter().any(|n| n.contains("matched constant: derivation-final")), "{rep:?}");
    pass(10, "gauge relation discriminator");
}

#[test]
fn acceptance_11_cap_sandwich_battery() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
    let mut failures = 0;
    for _ in 0..200 {
        let m = rng.gen_range(1..=3usize);
        let axes: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..3.0)).collect();
        let h = rng.gen_range(0.0..axes[m - 1]);
        let e = EllipsoidSpec::new(axes).unwrap();
        let exact = epigraph::ellipsoid_cap_volume(&e, h).unwrap();
        let (lower, upper) = epigraph::ellipsoid_cap_bounds(&e, h).unwrap();
        if !(lower - 1e-12 <= exact && exact <= upper + 1e-12) {
            failures += 1;
        }
    }
    assert_eq!(failures, 0);
    pass(11, "ellipsoid cap sandwich, 200 random configurations");
}

#[test]
fn acceptance_12_property_suites() {
    let catalog: Vec<(&str, ConvexFunction)> = vec![
        ("parabola_half", parabola_half()),
        ("parabola", parabola()),
        ("kinked", parser::parse("max(quad(1), pownorm(1,1))").unwrap()),
        ("paraboloid_half", paraboloid_half()),
    ];

    // Floating monotonicity in δ, ψ_δ ≥ ψ, f_δ ≤ f on sample points.
    for (name, psi) in &catalog {
        let pts: Vec<floatlab::Point> = if psi.dim() == 1 {
            vec![[-1.3, 0.0], [-0.4, 0.0], [0.7, 0.0], [2.0, 0.0]]
        } else {
            vec![[0.0, 0.0], [0.8, -0.6], [-1.5, 1.0]]
        };
        let p_small = FloatParams::for_function(psi, 1e-4).unwrap();
        let p_large = FloatParams::for_function(psi, 1e-3).unwrap();
        for x in &pts {
            let a = floating::floating_value(psi, x, &p_small).unwrap();
            let b = floating::floating_value(psi, x, &p_large).unwrap();
            assert!(a.psi_delta >= a.psi - 1e-9, "{name}: psi_delta < psi at {x:?}");
            assert!(
                a.psi_delta <= b.psi_delta + 1e-6,
                "{name}: monotonicity in delta at {x:?}"
            );
            let f = (-a.psi).exp();
            let f_delta = (-a.psi_delta).exp();
            assert!(f_delta <= f + 1e-12, "{name}: f_delta > f at {x:?}");
        }
    }

    // D(δ) monotone and log-log slope 2/(n+2) ± 0.05 for the smooth
    // positive-Hessian members.
    for (name, psi) in &catalog {
        if *name == "kinked" || psi.dim() == 2 {
            continue;
        }
        let ladder = DeltaLadder::new(1e-2, 1e-4, 5).unwrap();
        let rep = experiments::theorem_ratio(psi, &ladder, &GridSpec::default_for(1)).unwrap();
        for w in rep.rows.windows(2) {
            assert!(w[1].difference <= w[0].difference + 1e-12, "{name}: D not monotone");
            assert!(w[1].difference >= 0.0);
        }
        let want = 2.0 / 3.0;
        assert!(
            (rep.log_log_slope - want).abs() <= 0.05,
            "{name}: slope {}",
            rep.log_log_slope
        );
    }

    // Translation equivariance: ψ(· − t) floats to ψ_δ(· − t).
    let psi = parabola_half();
    let shifted = convexfn::precompose_affine(&psi, Mat::new1(1.0), [-0.75, 0.0]).unwrap();
    let params = FloatParams::for_function(&psi, 1e-3).unwrap();
    let params_s = FloatParams::for_function(&shifted, 1e-3).unwrap();
    for &x in &[-1.0f64, 0.2, 1.4] {
        let base = floating::floating_value(&psi, &[x - 0.75, 0.0], &params).unwrap();
        let moved = floating::floating_value(&shifted, &[x, 0.0], &params_s).unwrap();
        assert!(
            (base.psi_delta - moved.psi_delta).abs() <= 1e-6,
            "translation equivariance at {x}"
        );
    }

    // 2-homogeneity spot-check helper stays sound on the catalog.
    assert!(surface::is_two_homogeneous(&parabola(), 50, 3));
    assert!(!surface::is_two_homogeneous(
        &convexfn::quadratic_form(Mat::new1(1.0), 0.5).unwrap(),
        50,
        3
    ));

    // Disk oracle consistency with the ellipsoid cap machinery.
    let h = 0.1;
    let disk = EllipsoidSpec::new(vec![1.0, 1.0]).unwrap();
    let seg = epigraph::ellipsoid_cap_volume(&disk, h).unwrap();
    let r_delta = floating::disk_floating_body(1.0, seg).unwrap();
    assert!((r_delta - (1.0 - h)).abs() < 1e-6);

    let _ = geom::unit_ball_volume(2);
    pass(12, "property suites");
}
