//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use mbhe::biorthogonal::{build_system, kappa_ratio, ProblemSpec};
use mbhe::equilibrium::EquilibriumMeasure;
use mbhe::hardedge::{limit_kernel, HardEdgePredictions, DEFAULT_NODES};
use mbhe::parametrix::*;
use mbhe::potential::PotentialSpec;
use mbhe::specialfn::{
    bessel_j, meijer_g, meijer_jump_identity_residual, EvalStrategy, MeijerFamily, MeijerGPattern,
};
use mbhe::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Float, Integer};
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn linear() -> PotentialSpec {
    PotentialSpec::linear()
}

fn closed_form_equilibrium() -> Outcome {
    // ψ = (2π)⁻¹ √((4 − x)/x) on [0, 4]: d₁ = 1/π, d₂ = 1/(4π), ℓ = −2, ρ = 1
    let m = EquilibriumMeasure::solve(&linear(), 1.0).map_err(|e| e.to_string())?;
    let errs = [
        ((m.c - 1.0).abs(), 1e-8),
        ((m.b - 4.0).abs(), 1e-8),
        ((m.d1 - 1.0 / PI).abs(), 1e-5),
        ((m.d2 - 1.0 / (4.0 * PI)).abs(), 1e-4),
        ((m.ell + 2.0).abs(), 1e-5),
        ((m.rho - 1.0).abs(), 1e-5),
    ];
    let worst = errs.iter().map(|(e, t)| e / t).fold(0.0, f64::max);
    ensure(
        worst <= 1.0,
        format!(
            "c={:.12} b={:.12} d1={:.9} d2={:.9} ell={:.9} rho={:.9}",
            m.c, m.b, m.d1, m.d2, m.ell, m.rho
        ),
    )
}

/// Root of the Laurent-coefficient equation for V = Σ v_m x^m: the s⁰
/// coefficient of V'(J_c(s)) J_c(s) at infinity equals 1 + θ.
fn laurent_c(v: &PotentialSpec, theta: f64) -> f64 {
    // J_c(s)^m = c^m (s + 1)^m (1 + 1/s)^{m/θ}, whose s⁰ coefficient is
    // c^m Σ_k C(m, k) C(m/θ, k) by expanding both factors
    let binom = |a: f64, k: usize| (0..k).fold(1.0, |acc, i| acc * (a - i as f64) / (i + 1) as f64);
    let f = |c: f64| {
        let mut total = 0.0;
        for (i, &vm) in v.coefficients.iter().enumerate() {
            let m = (i + 1) as f64;
            let coeff: f64 = (0..=i + 1).map(|k| binom(m, k) * binom(m / theta, k)).sum();
            total += m * vm * c.powi(i as i32 + 1) * coeff;
        }
        total - (1.0 + theta)
    };
    let (mut lo, mut hi) = (1e-6, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn closed_form_c_and_b() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for theta in [2.0, 3.0] {
        let m = EquilibriumMeasure::solve(&linear(), theta).map_err(|e| e.to_string())?;
        let b = (1.0 + theta).powf(1.0 + 1.0 / theta);
        ok &= (m.c - theta).abs() < 1e-8 && (m.b - b).abs() < 1e-8;
        ok &= (laurent_c(&linear(), theta) - theta).abs() < 1e-10;
        detail.push(format!(
            "θ={theta}: |Δc|={:.1e} |Δb|={:.1e}",
            (m.c - theta).abs(),
            (m.b - b).abs()
        ));
    }
    let v = PotentialSpec::new(vec![0.0, 1.0]).unwrap();
    let m = EquilibriumMeasure::solve(&v, 1.0).map_err(|e| e.to_string())?;
    let c = 1.0 / 6f64.sqrt();
    ok &= (m.c - c).abs() < 1e-7 && (m.b - 4.0 * c).abs() < 1e-7;
    ok &= (laurent_c(&v, 1.0) - c).abs() < 1e-10;
    detail.push(format!(
        "V=x²: |Δc|={:.1e} |Δb|={:.1e}",
        (m.c - c).abs(),
        (m.b - 4.0 * c).abs()
    ));
    ensure(ok, detail.join("; "))
}

fn equilibrium_consistency() -> Outcome {
    let mut worst = [0.0f64; 4];
    let mut failures = Vec::new();
    for v in ["x", "x^2", "x + x^2/2"] {
        for theta in [1.0, 2.0, 3.0] {
            let m = EquilibriumMeasure::solve(&PotentialSpec::parse(v).unwrap(), theta)
                .map_err(|e| e.to_string())?;
            let c = m.verify().map_err(|e| e.to_string())?;
            worst[0] = worst[0].max(c.mass_error);
            worst[1] = worst[1].max(c.re_phi_sup);
            worst[2] = worst[2].max((c.slope_at_zero + 1.0 / (1.0 + theta)).abs());
            worst[3] = worst[3].max((c.slope_at_b - 0.5).abs());
            if !c.passes(theta) {
                failures.push(format!("{v} θ={theta}: {c:?}"));
            }
        }
    }
    let detail = format!(
        "max |∫ψ−1|={:.1e} max sup|Re φ|={:.1e} max slope dev {:.1e} / {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    );
    ensure(
        failures.is_empty(),
        if failures.is_empty() {
            detail
        } else {
            failures.join("; ")
        },
    )
}

fn meijer_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let strategy = EvalStrategy::default();
    let alphas = [-0.5, 0.5, 1.7];
    let mut jump: f64 = 0.0;
    for theta in 1..=3u32 {
        for &alpha in &alphas {
            for k in 0..=theta {
                for _ in 0..20 {
                    let z =
                        Complex64::from_polar(rng.gen_range(0.1..20.0), rng.gen_range(-3.1..3.1));
                    let r = meijer_jump_identity_residual(theta, alpha, k, z, &strategy)
                        .map_err(|e| e.to_string())?;
                    jump = jump.max(r);
                }
            }
        }
    }
    // θ = 1: G^{1,0}_{0,2}(0, −α | ζ) = ζ^{−α/2} J_α(2√ζ)
    let mut bessel: f64 = 0.0;
    for &alpha in &alphas {
        let p = MeijerGPattern::new(MeijerFamily::OneZero, 1, alpha, 0).unwrap();
        let zs = [1e-6, 1e-3, 0.05]
            .into_iter()
            .chain((1..=40).map(|i| 0.25 * i as f64));
        for z in zs {
            let g = meijer_g(&p, Complex64::new(z, 0.0), &strategy).map_err(|e| e.to_string())?;
            let j = z.powf(-alpha / 2.0)
                * bessel_j(alpha, 2.0 * z.sqrt()).map_err(|e| e.to_string())?;
            bessel = bessel.max((g - j).norm());
        }
    }
    ensure(
        jump < 1e-8 && bessel < 1e-10,
        format!("jump identity {jump:.2e}, Bessel reduction {bessel:.2e}"),
    )
}

fn random_off_axis(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = 10f64.powf(rng.gen_range(-1.0..1.0));
    let quarter = rng.gen_range(0..4) as f64;
    let phi = quarter * PI / 2.0 - PI + rng.gen_range(0.05..0.45) * PI;
    Complex64::from_polar(r, phi)
}

fn parametrix_suite() -> Outcome {
    let err = |e: ParametrixError| e.to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut det, mut jump, mut airy_det, mut exp_dev) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let radii: Vec<f64> = (0..10).map(|i| 0.15 * 1.45f64.powi(i)).collect();
    for (theta, alpha) in [(1u32, 0.3), (2, 0.5), (3, -0.4)] {
        for pm in [
            build_mei_p(theta, alpha).map_err(err)?,
            build_mei_q(theta, alpha).map_err(err)?,
        ] {
            for _ in 0..20 {
                det = det.max(
                    pm.determinant_residual(random_off_axis(&mut rng))
                        .map_err(err)?,
                );
            }
            for ray in pm.jump_rays() {
                for &r in &radii {
                    jump = jump.max(pm.jump_residual(&ray, r).map_err(err)?);
                }
            }
            let zs: Vec<Complex64> = [1e3, 1e4, 1e5]
                .iter()
                .map(|&r| Complex64::from_polar(r, PI / 4.0))
                .collect();
            let rep = asymptotic_residual(&pm, &zs).map_err(err)?;
            exp_dev = exp_dev.max((rep.fitted_exponent + 1.0 / (theta as f64 + 1.0)).abs());
        }
    }
    let airy = build_airy();
    for _ in 0..20 {
        airy_det =
            airy_det.max((airy.determinant(random_off_axis(&mut rng)).map_err(err)? - 1.0).norm());
    }
    for ray in airy.jump_rays() {
        for &r in &radii {
            jump = jump.max(airy.jump_residual(&ray, r).map_err(err)?);
        }
    }
    let zs: Vec<Complex64> = [5.0, 10.0, 25.0, 40.0]
        .iter()
        .map(|&r| Complex64::from_polar(r, PI / 4.0))
        .collect();
    let airy_exp = asymptotic_residual(&airy, &zs)
        .map_err(err)?
        .fitted_exponent;
    // global parametrices on (0, b) for the Laguerre-type map
    for (theta, alpha) in [(1u32, 0.0), (2, 0.5), (3, -0.5)] {
        let m = EquilibriumMeasure::solve(&linear(), theta as f64).map_err(|e| e.to_string())?;
        for kind in [GlobalKind::P, GlobalKind::Q] {
            let g = build_global(m.map().clone(), alpha, theta, kind).map_err(err)?;
            for k in 1..=10 {
                jump = jump.max(
                    g.jump_residual(m.b * (k as f64 - 0.5) / 10.0)
                        .map_err(err)?,
                );
            }
        }
    }
    let ok = det < 1e-6
        && jump < 1e-7
        && airy_det < 1e-10
        && exp_dev < 0.2
        && (airy_exp + 1.5).abs() < 0.2;
    ensure(
        ok,
        format!(
            "det {det:.1e}, jumps {jump:.1e}, Airy det {airy_det:.1e}, Mei exponent dev {exp_dev:.3}, Airy exponent {airy_exp:.3}"
        ),
    )
}

fn biorthogonal_exactness() -> Outcome {
    let n = 16usize;
    let spec = ProblemSpec::new(linear(), 1, 0.0, n)
        .and_then(|s| s.with_precision(512))
        .map_err(|e| e.to_string())?;
    let sys = build_system(&spec).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for j in 0..=16u32 {
        let f = Float::with_val(1024, Integer::from(Integer::factorial(j)));
        let expected = Float::with_val(1024, &f * &f)
            / Float::with_val(1024, Float::with_val(1024, n as u32).pow(2 * j + 1));
        let rel = Float::with_val(1024, &sys.kappas[j as usize] - &expected) / &expected;
        worst = worst.max(rel.to_f64().abs());
    }
    let off = sys.max_offdiagonal_residual();
    ensure(
        worst < 1e-20 && off < 1e-16,
        format!("max rel κ error {worst:.1e}, off-diagonal {off:.1e}"),
    )
}

fn kappa_law() -> Outcome {
    let mut devs = Vec::new();
    for n in [8usize, 16, 32] {
        let sys = build_system(&ProblemSpec::new(linear(), 1, 0.0, n).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        // 2π θ^{−1/2} c^{α+1} e^{nℓ} = 2π e^{−2n} here
        devs.push((kappa_ratio(&sys.kappas[n], n, 1, 0.0, 1.0, -2.0) - 1.0).abs());
    }
    ensure(
        devs.windows(2).all(|w| w[1] < w[0]),
        format!("|ratio − 1| = {}", sci(&devs)),
    )
}

fn limit_kernel_value() -> Outcome {
    let k = limit_kernel(0.0, 1, 1.0, 1.0, DEFAULT_NODES).map_err(|e| e.to_string())?;
    // J₀(2)² + J₁(2)²
    let oracle = bessel_j(0.0, 2.0).unwrap().powi(2) + bessel_j(1.0, 2.0).unwrap().powi(2);
    ensure(
        (k - 0.382_739_0).abs() < 1e-6 && (k - oracle).abs() < 1e-10,
        format!("K(1,1) = {k:.10}"),
    )
}

fn kernel_convergence() -> Outcome {
    let grid = [0.5, 1.75, 3.0];
    let mut detail = Vec::new();
    let mut ok = true;
    for (theta, alpha) in [(1u32, 0.0), (2, 0.5)] {
        let m = EquilibriumMeasure::solve(&linear(), theta as f64).map_err(|e| e.to_string())?;
        let mut limits = Vec::new();
        for &x in &grid {
            for &y in &grid {
                limits.push(
                    limit_kernel(alpha, theta, x, y, DEFAULT_NODES).map_err(|e| e.to_string())?,
                );
            }
        }
        let mut errs = Vec::new();
        for n in [8usize, 16, 32, 64] {
            let spec = ProblemSpec::new(linear(), theta, alpha, n).map_err(|e| e.to_string())?;
            let sys = build_system(&spec).map_err(|e| e.to_string())?;
            let mut sup: f64 = 0.0;
            for (i, &x) in grid.iter().enumerate() {
                for (j, &y) in grid.iter().enumerate() {
                    let k = sys
                        .eval_kernel_scaled(m.rho, x, y)
                        .map_err(|e| e.to_string())?;
                    sup = sup.max((k - limits[3 * i + j]).abs());
                }
            }
            errs.push(sup);
        }
        ok &= errs.windows(2).all(|w| w[1] < w[0]);
        detail.push(format!("(θ,α)=({theta},{alpha}): {}", sci(&errs)));
    }
    ensure(ok, detail.join("; "))
}

fn polynomial_asymptotics() -> Outcome {
    let m = EquilibriumMeasure::solve(&linear(), 1.0).map_err(|e| e.to_string())?;
    let pred = HardEdgePredictions::from_measure(&m, 0.0).map_err(|e| e.to_string())?;
    let one = Complex64::new(1.0, 0.0);
    let mut devs = Vec::new();
    for n in [8usize, 16, 32] {
        let sys = build_system(&ProblemSpec::new(linear(), 1, 0.0, n).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let s = pred.scale(n);
        let p = pred.predict_pn(n, one).map_err(|e| e.to_string())?.re;
        let q = pred.predict_qn(n, one).map_err(|e| e.to_string())?.re;
        devs.push((
            (sys.eval_p(n, 1.0 / s) / p - 1.0).abs(),
            (sys.eval_q(n, 1.0 / s) / q - 1.0).abs(),
        ));
    }
    let ok = devs.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1);
    let (p, q): (Vec<f64>, Vec<f64>) = devs.into_iter().unzip();
    ensure(
        ok,
        format!("|p ratio − 1| = {}, |q ratio − 1| = {}", sci(&p), sci(&q)),
    )
}

fn rh_residual() -> Outcome {
    let sys = build_system(&ProblemSpec::new(linear(), 2, 0.0, 8).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let rep = sys
        .rh_check(&[0.2, 1.0, 2.5], 1e-12)
        .map_err(|e| e.to_string())?;
    let r = rep.max_residual();
    ensure(r < 1e-8, format!("max residual {r:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (
            "closed-form equilibrium, theta=1, V=x",
            closed_form_equilibrium,
        ),
        ("closed-form c and b", closed_form_c_and_b),
        ("equilibrium internal consistency", equilibrium_consistency),
        ("Meijer identity suite", meijer_identities),
        ("parametrix suite", parametrix_suite),
        ("biorthogonal exactness", biorthogonal_exactness),
        ("kappa_n large-n law", kappa_law),
        ("limit kernel K(1,1)", limit_kernel_value),
        ("scaled kernel convergence", kernel_convergence),
        ("hard-edge polynomial asymptotics", polynomial_asymptotics),
        ("Riemann-Hilbert residual, n=8, theta=2", rh_residual),
    ];
    let mut failed = 0;
    let mut total = Duration::ZERO;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let dt = start.elapsed();
        total += dt;
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} {:>2} {name}: {detail} [{:.2}s]",
            i + 1,
            dt.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        total.as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
