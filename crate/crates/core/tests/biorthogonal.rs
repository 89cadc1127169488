use mbhe::biorthogonal::*;
use mbhe::potential::PotentialSpec;
use mbhe::quad::{tanh_sinh_real, TsPoint};
use mbhe::Complex64;
use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};
use std::f64::consts::PI;

fn linear(theta: u32, alpha: f64, n: usize) -> ProblemSpec {
    ProblemSpec::new(PotentialSpec::linear(), theta, alpha, n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn moment_examples() {
    let m = compute_moments(&linear(1, 0.0, 1), 3).unwrap();
    assert_eq!(m[3].to_f64(), 6.0);
    let m = compute_moments(&linear(1, 0.5, 4), 0).unwrap();
    assert!(rel(m[0].to_f64(), PI.sqrt() / 16.0) < 1e-15);
    let gauss = ProblemSpec::new(PotentialSpec::parse("x^2").unwrap(), 1, 0.0, 2).unwrap();
    let m = compute_moments(&gauss, 4).unwrap();
    assert!(rel(m[0].to_f64(), (PI / 8.0).sqrt()) < 1e-15);
    // ∫ x^4 e^{−2x²} = 3√(π/8)/16
    assert!(rel(m[4].to_f64(), 3.0 * (PI / 8.0).sqrt() / 16.0) < 1e-15);
}

#[test]
fn quadrature_moments_match_gamma_closed_form() {
    // V = 2x goes through the quadrature path; its moments are Γ(a+α+1)/(2n)^{a+α+1}
    let spec = ProblemSpec::new(PotentialSpec::parse("2x").unwrap(), 2, 0.3, 3).unwrap();
    let m = compute_moments(&spec, 9).unwrap();
    for (a, v) in m.iter().enumerate() {
        let s = Float::with_val(256, 0.3f64) + (a as u32 + 1);
        let exact = Float::with_val(256, s.gamma_ref())
            / Float::with_val(
                256,
                Float::with_val(256, &s * Float::with_val(256, 6.0f64).ln()).exp(),
            );
        let err = Float::with_val(256, v - &exact) / &exact;
        assert!(err.to_f64().abs() < 1e-35, "a = {a}: {}", err.to_f64());
    }
}

fn factorial(j: u32) -> Float {
    Float::with_val(1024, Integer::from(Integer::factorial(j)))
}

#[test]
fn laguerre_norms_and_coefficients() {
    let n = 16usize;
    let sys = build_system(&linear(1, 0.0, n).with_precision(512).unwrap()).unwrap();
    for j in 0..=16u32 {
        let f = factorial(j);
        let nf = Float::with_val(1024, n as u32);
        let expected = Float::with_val(1024, &f * &f) / Float::with_val(1024, (&nf).pow(2 * j + 1));
        let err = Float::with_val(1024, &sys.kappas[j as usize] - &expected) / &expected;
        assert!(err.to_f64().abs() < 1e-20, "kappa_{j}: {}", err.to_f64());
    }
    // monic Laguerre: coefficient of x^k in p_j is (−1)^{j−k} C(j,k) j!/k! n^{k−j}
    for j in [3usize, 7] {
        for k in 0..=j {
            let binom = Integer::from(Integer::binomial_u(j as u32, k as u32));
            let sign = if (j - k) % 2 == 0 { 1.0 } else { -1.0 };
            let mut v = Float::with_val(512, binom) * factorial(j as u32);
            v /= factorial(k as u32);
            v *= sign * (n as f64).powi(k as i32 - j as i32);
            assert!(rel(sys.p_coeffs[j][k].to_f64(), v.to_f64()) < 1e-30);
            // θ = 1 makes q_j = p_j
            assert!(rel(sys.q_coeffs[j][k].to_f64(), v.to_f64()) < 1e-30);
        }
    }
    assert!(sys.max_offdiagonal_residual() < 1e-16);
}

#[test]
fn degree_zero_and_single_term_kernel() {
    let spec = ProblemSpec::new(PotentialSpec::parse("x + x^2").unwrap(), 2, 0.5, 1).unwrap();
    let sys = build_system(&spec).unwrap();
    assert_eq!(sys.p_coeffs[0].len(), 1);
    assert_eq!(sys.p_coeffs[0][0].to_f64(), 1.0);
    assert_eq!(sys.q_coeffs[0][0].to_f64(), 1.0);
    assert_eq!(sys.kappas[0], sys.moments()[0]);
    let m0 = sys.moments()[0].to_f64();
    for (x, y) in [(0.3, 0.7), (1.2, 0.1)] {
        let k = sys.eval_kernel_kn(x, y).unwrap();
        assert!(rel(k, spec.weight(x) / m0) < 1e-14);
    }
}

#[test]
fn theta_two_is_positive_and_biorthogonal() {
    let sys = build_system(&linear(2, 0.0, 2)).unwrap();
    assert!(sys.kappas.iter().all(|k| *k > 0));
    let floor = 10f64.powf(-(sys.precision_bits as f64) / 8.0);
    assert!(sys.max_offdiagonal_residual() < floor);
}

/// ∫ p_j(x) q_k(x^θ) w(x) dx by double-precision quadrature, independent of
/// the moment matrix.
fn direct_pairing(sys: &BiorthogonalSystem, j: usize, k: usize) -> f64 {
    let spec = &sys.spec;
    let t_max = spec.cutoff(spec.max_power(), 64);
    let th = spec.theta as i32;
    let f = |p: TsPoint| sys.eval_p(j, p.x) * sys.eval_q(k, p.x.powi(th)) * spec.weight(p.x);
    tanh_sinh_real(f, 0.0, 1.0, 1e-13).unwrap() + tanh_sinh_real(f, 1.0, t_max, 1e-13).unwrap()
}

#[test]
fn general_potential_biorthogonality_by_direct_quadrature() {
    let spec = ProblemSpec::new(PotentialSpec::parse("x + x^2/2").unwrap(), 2, -0.4, 5).unwrap();
    let sys = build_system(&spec).unwrap();
    let kmax = sys.kappas.iter().map(|k| k.to_f64()).fold(0.0, f64::max);
    for j in 0..=5 {
        for k in 0..=5 {
            let v = direct_pairing(&sys, j, k);
            if j == k {
                assert!(
                    rel(v, sys.kappa(j)) < 1e-8,
                    "kappa_{j}: {v} vs {}",
                    sys.kappa(j)
                );
            } else {
                assert!(v.abs() / kmax < 1e-9, "({j},{k}): {v}");
            }
        }
    }
}

#[test]
fn trace_of_kernel_is_n() {
    let sys = build_system(&linear(1, 0.0, 8)).unwrap();
    let f = |p: TsPoint| sys.eval_kernel_kn(p.x, p.x).unwrap();
    let trace =
        tanh_sinh_real(f, 0.0, 2.0, 1e-10).unwrap() + tanh_sinh_real(f, 2.0, 20.0, 1e-10).unwrap();
    assert!((trace - 8.0).abs() < 1e-6, "trace {trace}");
}

#[test]
fn rebuild_is_bit_for_bit() {
    let spec = ProblemSpec::new(PotentialSpec::parse("x^2").unwrap(), 3, 0.25, 4).unwrap();
    let a = build_system(&spec).unwrap();
    let b = build_system(&spec).unwrap();
    assert_eq!(a.kappas, b.kappas);
    assert_eq!(a.p_coeffs, b.p_coeffs);
    assert_eq!(a.q_coeffs, b.q_coeffs);
}

#[test]
fn kappa_ratio_approaches_one() {
    // θ = 1, α = 0, V = x: c = 1, ℓ = −2
    let mut last = f64::INFINITY;
    for n in [8usize, 16, 32] {
        let sys = build_system(&linear(1, 0.0, n)).unwrap();
        let ratio = kappa_ratio(&sys.kappas[n], n, 1, 0.0, 1.0, -2.0);
        let dev = (ratio - 1.0).abs();
        // Stirling: (n!)²/(2π n^{2n+1} e^{−2n}) = 1 + 1/(6n) + …
        assert!(
            (dev - 1.0 / (6.0 * n as f64)).abs() < 1.0 / (n * n) as f64,
            "n = {n}: {dev}"
        );
        assert!(dev < last);
        last = dev;
    }
}

#[test]
fn riemann_hilbert_conditions() {
    let sys = build_system(&linear(2, 0.0, 8)).unwrap();
    let report = sys.rh_check(&[0.2, 1.0, 2.5], 1e-12).unwrap();
    assert!(report.jump_residual < 1e-8, "{report:?}");
    assert!(report.jump_residual_tilde < 1e-8, "{report:?}");
    assert!(report.symmetry_residual < 1e-8, "{report:?}");
    let lead = sys.cauchy_leading().norm();
    for &(r, p, _) in &report.decay {
        assert!(p < 2.0 * lead, "R = {r}: {p}");
    }
    let (_, far, _) = report.decay[report.decay.len() - 1];
    assert!(rel(far, lead) < 1e-3);
}

#[test]
fn cauchy_transform_matches_moment_series_far_out() {
    // C̃q_n(z) = −(1/2πi) Σ_k z^{−k−1} ∫ x^k q_n(x^θ) w, whose first term is κ_n z^{−n−1}
    let sys = build_system(&linear(1, 0.5, 4)).unwrap();
    let z = Complex64::new(-300.0, 40.0);
    let (_, q) = sys.cauchy_transforms(z).unwrap();
    let m = compute_moments(&sys.spec, 60).unwrap();
    let mut series = Complex64::new(0.0, 0.0);
    for k in 4..40 {
        let mut mu = 0.0;
        for (l, c) in sys.q_coeffs[4].iter().enumerate() {
            mu += c.to_f64() * m[k + l].to_f64();
        }
        series -= mu * z.powi(-(k as i32) - 1);
    }
    series /= Complex64::new(0.0, 2.0 * PI);
    assert!((q - series).norm() / series.norm() < 1e-8);
}

#[test]
fn errors() {
    assert!(ProblemSpec::new(PotentialSpec::linear(), 0, 0.0, 4).is_err());
    assert!(ProblemSpec::new(PotentialSpec::linear(), 1, -1.0, 4).is_err());
    assert!(ProblemSpec::new(PotentialSpec::linear(), 1, 0.0, 0).is_err());
    assert!(linear(1, 0.0, 4).with_precision(64).is_err());
    let sys = build_system(&linear(2, 0.0, 3)).unwrap();
    assert!(sys.eval_kernel_kn(-1.0, 1.0).is_err());
    assert!(sys.cauchy_p(Complex64::new(2.0, 0.0)).is_err());
    assert!(sys.cauchy_p(Complex64::new(-1.0, 0.1)).is_err());
    assert!(sys.cauchy_q(Complex64::new(0.5, 0.0)).is_err());
    assert_eq!(default_precision(4), 256);
    assert_eq!(default_precision(64), 1024);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norms_positive_and_residuals_below_floor(theta in 1u32..=3, alpha in -0.9f64..2.0, n in 1usize..=6, quad in 0.0f64..1.0) {
        let mut coeffs = vec![1.0];
        if quad > 0.5 {
            coeffs.push(quad);
        }
        let spec = ProblemSpec::new(PotentialSpec::new(coeffs).unwrap(), theta, alpha, n).unwrap();
        let sys = build_system(&spec).unwrap();
        prop_assert!(sys.kappas.iter().all(|k| *k > 0));
        let floor = 10f64.powf(-(sys.precision_bits as f64) / 8.0);
        prop_assert!(sys.max_offdiagonal_residual() < floor);
        for j in 0..=n {
            prop_assert_eq!(sys.p_coeffs[j].len(), j + 1);
            prop_assert_eq!(sys.p_coeffs[j][j].to_f64(), 1.0);
            prop_assert_eq!(sys.q_coeffs[j][j].to_f64(), 1.0);
        }
    }

    #[test]
    fn kernel_integrates_to_one_in_first_variable(theta in 1u32..=2, alpha in -0.5f64..1.0, x in 0.05f64..3.0) {
        // ∫ K_n(y, x) dy = Σ_j q_j(x^θ) ∫ p_j q_0 w / κ_j = q_0 = 1
        let sys = build_system(&linear(theta, alpha, 4)).unwrap();
        let f = |p: TsPoint| sys.eval_kernel_kn(p.x, x).unwrap();
        let v = tanh_sinh_real(f, 0.0, 2.0, 1e-11).unwrap() + tanh_sinh_real(f, 2.0, 20.0, 1e-11).unwrap();
        prop_assert!((v - 1.0).abs() < 1e-8);
    }
}
