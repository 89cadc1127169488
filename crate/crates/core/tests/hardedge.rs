use mbhe::biorthogonal::{build_system, ProblemSpec};
use mbhe::equilibrium::EquilibriumMeasure;
use mbhe::hardedge::*;
use mbhe::potential::PotentialSpec;
use mbhe::quad::tanh_sinh_real;
use mbhe::specialfn::{bessel_j, meijer_g, EvalMethod, EvalStrategy, MeijerFamily, MeijerGPattern};
use mbhe::Complex64;
use proptest::prelude::*;

fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// ∫₀¹ J_α(a√u) J_α(b√u) du in Lommel's closed form, a = 2√x, b = 2√y.
fn lommel(alpha: f64, x: f64, y: f64) -> f64 {
    let a = 2.0 * x.sqrt();
    let b = 2.0 * y.sqrt();
    let j = |t: f64| bessel_j(alpha, t).unwrap();
    let dj = |t: f64| bessel_j(alpha - 1.0, t).unwrap() - alpha / t * j(t);
    if (x - y).abs() < 1e-12 {
        dj(a).powi(2) + (1.0 - alpha * alpha / (a * a)) * j(a).powi(2)
    } else {
        2.0 * (b * j(a) * dj(b) - a * dj(a) * j(b)) / (a * a - b * b)
    }
}

fn bessel_form(alpha: f64, x: f64, y: f64) -> f64 {
    (x / y).powf(alpha / 2.0) * lommel(alpha, x, y)
}

#[test]
fn value_at_one_one() {
    let k = limit_kernel(0.0, 1, 1.0, 1.0, DEFAULT_NODES).unwrap();
    let oracle = bessel_j(0.0, 2.0).unwrap().powi(2) + bessel_j(1.0, 2.0).unwrap().powi(2);
    assert!((k - oracle).abs() < 1e-12);
    assert!((k - 0.382_739).abs() < 1e-6);
}

#[test]
fn theta_one_reduces_to_bessel_kernel() {
    let grid = [0.2, 0.7, 1.5, 2.6, 4.0];
    for alpha in [0.0, 0.5] {
        for &x in &grid {
            for &y in &grid {
                let k = limit_kernel(alpha, 1, x, y, DEFAULT_NODES).unwrap();
                let oracle = bessel_form(alpha, x, y);
                assert!(
                    (k - oracle).abs() < 1e-8,
                    "alpha {alpha} ({x}, {y}): {k} vs {oracle}"
                );
            }
        }
    }
    let a = limit_kernel(0.0, 1, 1.0, 4.0, DEFAULT_NODES).unwrap();
    let b = limit_kernel(0.0, 1, 4.0, 1.0, DEFAULT_NODES).unwrap();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn theta_two_matches_brute_force_quadrature() {
    // plain tanh-sinh in u on the unscaled integrand; Meijer factors by the
    // contour integral except near ζ = 0, where it loses accuracy
    let (alpha, theta, x, y) = (0.5, 2u32, 1.0, 1.0);
    let by_contour = EvalStrategy::with_method(EvalMethod::MellinBarnes);
    let by_series = EvalStrategy::with_method(EvalMethod::ResidueSeries);
    let pick = |zeta: f64| if zeta > 0.1 { by_contour } else { by_series };
    let first = MeijerGPattern::new(MeijerFamily::ThetaZero, theta, alpha, 0).unwrap();
    let second = MeijerGPattern::new(MeijerFamily::OneZero, theta, alpha, 0).unwrap();
    let f = |p: mbhe::quad::TsPoint| {
        let u = p.x;
        let (zx, zy) = ((u * x).powi(2), (u * y).powi(2));
        let a = meijer_g(&first, Complex64::new(zx, 0.0), &pick(zx))
            .unwrap()
            .re;
        let b = meijer_g(&second, Complex64::new(zy, 0.0), &pick(zy))
            .unwrap()
            .re;
        u * a * b
    };
    let oracle = 4.0 * x * tanh_sinh_real(f, 0.0, 1.0, 1e-11).unwrap();
    let k = limit_kernel(alpha, theta, x, y, DEFAULT_NODES).unwrap();
    assert!((k - oracle).abs() < 1e-8, "{k} vs {oracle}");
}

#[test]
fn diagonal_is_positive() {
    for theta in 1..=3 {
        for alpha in [-0.5, 0.0, 0.5] {
            for i in 1..=10 {
                let x = 0.5 * i as f64;
                let k = limit_kernel(alpha, theta, x, x, DEFAULT_NODES).unwrap();
                assert!(k > 0.0, "theta {theta} alpha {alpha} x {x}: {k}");
            }
        }
    }
}

#[test]
fn factor_kernel_values() {
    let v = factor_kernel(0.0, 1, 1.0, 0.0).unwrap();
    assert!((v - bessel_j(0.0, 2.0).unwrap()).abs() < 1e-13);
    // θ = 2, α = 1/2 at the origin: leading Puiseux coefficients
    // Γ(b₂ − b₁)/Γ(1 + b₁) · 1/(Γ(1 + α/θ) Γ(1 − (1−α)/θ))
    let v = factor_kernel(0.5, 2, 0.0, 0.0).unwrap();
    let oracle = gamma(0.5) / gamma(0.75) / (gamma(1.25) * gamma(0.75));
    assert!((v - oracle).abs() < 1e-12, "{v} vs {oracle}");
    // θ = 1: x^{−α} G^{1,0}(α, 0 | x) G^{1,0}(0, −α | y) = J_α(2√x) J_α(2√y) (xy)^{−α/2}
    let (x, y) = (0.8, 2.1);
    let v = factor_kernel(0.5, 1, x, y).unwrap();
    let oracle = bessel_j(0.5, 2.0 * f64::sqrt(x)).unwrap()
        * bessel_j(0.5, 2.0 * f64::sqrt(y)).unwrap()
        / (x * y).powf(0.25);
    assert!((v - oracle).abs() < 1e-12);
}

#[test]
fn limit_kernel_is_the_scaled_integral_of_the_factor_kernel() {
    // K(x, y) = θ² ∫₀¹ u^α k(ux, uy) du · x^α
    let (alpha, theta, x, y) = (0.3, 3u32, 1.2, 0.7);
    let f = |p: mbhe::quad::TsPoint| {
        p.x.powf(alpha) * factor_kernel(alpha, theta, p.x * x, p.x * y).unwrap()
    };
    let oracle = 9.0 * x.powf(alpha) * tanh_sinh_real(f, 0.0, 1.0, 1e-12).unwrap();
    let k = limit_kernel(alpha, theta, x, y, DEFAULT_NODES).unwrap();
    assert!((k - oracle).abs() < 1e-9 * oracle.abs().max(1.0));
}

fn predictions(theta: u32, alpha: f64) -> (EquilibriumMeasure, HardEdgePredictions) {
    let eq = EquilibriumMeasure::solve(&PotentialSpec::linear(), theta as f64).unwrap();
    let p = HardEdgePredictions::from_measure(&eq, alpha).unwrap();
    (eq, p)
}

#[test]
fn constants_for_the_laguerre_case() {
    // θ = 1, V = x: c = ρ = 1 and Re g(0) = Re g̃(0) = −1
    let (_, p) = predictions(1, 0.0);
    for n in [4usize, 10] {
        let expected = (2.0 * std::f64::consts::PI * n as f64).sqrt() * (-(n as f64)).exp();
        assert!((p.c_n(n) / expected - 1.0).abs() < 1e-10);
        assert!((p.c_tilde_n(n) / expected - 1.0).abs() < 1e-10);
    }
    // main-term Meijer factor of q_n at z = 0 is 1 for α = 0
    let q0 = p.predict_qn(6, Complex64::new(0.0, 0.0)).unwrap();
    assert!((q0.re / p.c_tilde_n(6) - 1.0).abs() < 1e-14);
}

#[test]
fn polynomials_approach_their_predictions() {
    let (_, pred) = predictions(1, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut last = (f64::INFINITY, f64::INFINITY);
    for n in [8usize, 16, 32] {
        let sys =
            build_system(&ProblemSpec::new(PotentialSpec::linear(), 1, 0.0, n).unwrap()).unwrap();
        let s = pred.scale(n);
        let dp = (sys.eval_p(n, 1.0 / s) / pred.predict_pn(n, one).unwrap().re - 1.0).abs();
        let dq = (sys.eval_q(n, 1.0 / s) / pred.predict_qn(n, one).unwrap().re - 1.0).abs();
        assert!(dp < last.0 && dq < last.1, "n = {n}: {dp} {dq}");
        last = (dp, dq);
    }
    assert!(last.0 < 0.05 && last.1 < 0.05);
}

#[test]
fn last_term_identity() {
    for (theta, alpha, tol) in [(1u32, 0.0, 0.1), (2, 0.5, 0.05)] {
        let (eq, pred) = predictions(theta, alpha);
        let n = 32;
        let sys =
            build_system(&ProblemSpec::new(PotentialSpec::linear(), theta, alpha, n).unwrap())
                .unwrap();
        let s = pred.scale(n);
        let th = theta as f64;
        let (x, y) = (1.0, 0.5);
        let lhs = sys.eval_p(n, x / s)
            * sys.eval_q(n, (y / s).powi(theta as i32))
            * (-(n as f64) * x / s).exp()
            / sys.kappa(n)
            / (eq.rho * n as f64).powf(alpha * (1.0 + 1.0 / th) + 1.0 / th);
        let rhs = th * eq.c.powf(-th / (th + 1.0)) * factor_kernel(alpha, theta, x, y).unwrap();
        assert!(
            (lhs / rhs - 1.0).abs() < tol,
            "theta {theta}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn scaled_kernel_converges() {
    let (eq, _) = predictions(2, 0.5);
    let grid = [0.5, 1.75, 3.0];
    let limits: Vec<f64> = grid
        .iter()
        .flat_map(|&x| {
            grid.iter()
                .map(move |&y| limit_kernel(0.5, 2, x, y, DEFAULT_NODES).unwrap())
        })
        .collect();
    let mut last = f64::INFINITY;
    for n in [8usize, 16, 32] {
        let sys =
            build_system(&ProblemSpec::new(PotentialSpec::linear(), 2, 0.5, n).unwrap()).unwrap();
        let mut sup: f64 = 0.0;
        for (i, &x) in grid.iter().enumerate() {
            for (j, &y) in grid.iter().enumerate() {
                sup = sup
                    .max((sys.eval_kernel_scaled(eq.rho, x, y).unwrap() - limits[3 * i + j]).abs());
            }
        }
        assert!(sup < last, "n = {n}: {sup}");
        last = sup;
    }
}

#[test]
fn errors() {
    assert!(limit_kernel(0.0, 1, 0.0, 1.0, DEFAULT_NODES).is_err());
    assert!(limit_kernel(-1.0, 1, 1.0, 1.0, DEFAULT_NODES).is_err());
    assert!(limit_kernel(0.0, 0, 1.0, 1.0, DEFAULT_NODES).is_err());
    assert!(factor_kernel(0.0, 1, -1.0, 1.0).is_err());
    let eq = EquilibriumMeasure::solve(&PotentialSpec::linear(), 1.5).unwrap();
    assert!(HardEdgePredictions::from_measure(&eq, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn alpha_zero_theta_one_is_symmetric(x in 0.05f64..5.0, y in 0.05f64..5.0) {
        let a = limit_kernel(0.0, 1, x, y, DEFAULT_NODES).unwrap();
        let b = limit_kernel(0.0, 1, y, x, DEFAULT_NODES).unwrap();
        prop_assert!((a - b).abs() < 1e-11);
    }

    #[test]
    fn diagonal_positive_for_random_parameters(theta in 1u32..=3, alpha in -0.9f64..2.0, x in 0.01f64..5.0) {
        prop_assert!(limit_kernel(alpha, theta, x, x, DEFAULT_NODES).unwrap() > 0.0);
    }
}
