use crate::config::{potential_spec, Command, Format, Grid, RunConfig};
use crate::{at, fmt_num, to_csv, to_json_text, Check, Outcome, RunError};
use mbhe::biorthogonal::{build_system, kappa_ratio, BiorthogonalSystem, ProblemSpec};
use mbhe::equilibrium::EquilibriumMeasure;
use mbhe::hardedge::{limit_kernel, DEFAULT_NODES};
use mbhe::parametrix::{
    asymptotic_residual, build_airy, build_global, build_mei_p, build_mei_q, m_cyc, m_cyc_inverse,
    omega, omega_determinant, CMatrix, GlobalKind, HalfPlane, ParametrixKind, ParametrixMatrix,
};
use mbhe::specialfn::{
    bessel_j, meijer_g, meijer_jump_identity_residual, EvalMethod, EvalStrategy, MeijerFamily,
    MeijerGPattern,
};
use mbhe::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;

type Result<T> = std::result::Result<T, RunError>;

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Equilibrium => equilibrium(cfg),
        Command::LimitKernel => limit_kernel_table(cfg),
        Command::FiniteN => finite_n(cfg),
        Command::Converge => converge(cfg),
        Command::CheckParametrix => check_parametrix(cfg),
        Command::CheckIdentities => check_identities(cfg),
    }
}

fn header(cfg: &RunConfig) -> Value {
    json!({ "command": cfg.command.name(), "config": cfg })
}

fn finish_json(cfg: &RunConfig, results: Value, checks: Vec<Check>) -> Outcome {
    let mut v = header(cfg);
    v["results"] = results;
    v["checks"] = json!(checks);
    v["passed"] = json!(checks.iter().all(|c| c.pass));
    Outcome {
        artifact: to_json_text(v),
        checks,
    }
}

fn solve_measure(cfg: &RunConfig) -> Result<EquilibriumMeasure> {
    let v = potential_spec(&cfg.potential).map_err(at("potential", "new"))?;
    EquilibriumMeasure::solve(&v, cfg.theta).map_err(at("equilibrium", "solve"))
}

fn equilibrium(cfg: &RunConfig) -> Result<Outcome> {
    let m = solve_measure(cfg)?;
    let v = m.verify().map_err(at("equilibrium", "verify"))?;
    let checks = vec![
        Check::below("mass_error", v.mass_error, 1e-6),
        Check::below("re_phi_sup", v.re_phi_sup, 1e-6),
        Check::below("phi_max_outside", v.phi_max_outside, 0.0),
        Check::within(
            "slope_at_zero",
            v.slope_at_zero,
            -1.0 / (1.0 + cfg.theta),
            0.01,
        ),
        Check::within("slope_at_b", v.slope_at_b, 0.5, 0.01),
    ];
    let xs: Vec<f64> = match cfg.grid {
        Some(g) => g.values(),
        None => (1..=64).map(|k| m.b * k as f64 / 65.0).collect(),
    };
    let psi: Vec<f64> = xs.iter().map(|&x| m.psi(x)).collect();
    Ok(match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = xs
                .iter()
                .zip(&psi)
                .map(|(&x, &p)| vec![fmt_num(x), fmt_num(p)])
                .collect();
            Outcome {
                artifact: to_csv(&["x", "psi"], &rows),
                checks,
            }
        }
        Format::Json => {
            let results = json!({
                "theta": m.theta,
                "c": m.c,
                "b": m.b,
                "d1": m.d1,
                "d2": m.d2,
                "ell": m.ell,
                "rho": m.rho,
                "psi": xs.iter().zip(&psi).map(|(&x, &p)| json!({ "x": x, "psi": p })).collect::<Vec<_>>(),
            });
            finish_json(cfg, results, checks)
        }
    })
}

fn limit_values(cfg: &RunConfig, pairs: &[(f64, f64)]) -> Result<Vec<f64>> {
    let theta = cfg.theta_u32();
    pairs
        .par_iter()
        .map(|&(x, y)| {
            limit_kernel(cfg.alpha, theta, x, y, DEFAULT_NODES)
                .map_err(at("hardedge", "limit_kernel"))
        })
        .collect()
}

fn kernel_artifact(
    cfg: &RunConfig,
    pairs: &[(f64, f64)],
    values: &[f64],
    extra: Value,
    checks: Vec<Check>,
) -> Outcome {
    match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = pairs
                .iter()
                .zip(values)
                .map(|(&(x, y), &k)| vec![fmt_num(x), fmt_num(y), fmt_num(k)])
                .collect();
            Outcome {
                artifact: to_csv(&["x", "y", "value"], &rows),
                checks,
            }
        }
        Format::Json => {
            let mut results = extra;
            results["kernel"] = json!(pairs
                .iter()
                .zip(values)
                .map(|(&(x, y), &k)| json!({ "x": x, "y": y, "value": k }))
                .collect::<Vec<_>>());
            finish_json(cfg, results, checks)
        }
    }
}

fn limit_kernel_table(cfg: &RunConfig) -> Result<Outcome> {
    let pairs = cfg.kernel_grid().pairs();
    let values = limit_values(cfg, &pairs)?;
    let diag_min = pairs
        .iter()
        .zip(&values)
        .filter(|((x, y), _)| x == y)
        .map(|(_, &k)| k)
        .fold(f64::INFINITY, f64::min);
    let checks = vec![Check {
        name: "diagonal_min".into(),
        value: diag_min,
        condition: "> 0".into(),
        pass: diag_min > 0.0,
    }];
    Ok(kernel_artifact(cfg, &pairs, &values, json!({}), checks))
}

fn system(cfg: &RunConfig, n: usize) -> Result<BiorthogonalSystem> {
    let v = potential_spec(&cfg.potential).map_err(at("potential", "new"))?;
    let mut spec = ProblemSpec::new(v, cfg.theta_u32(), cfg.alpha, n)
        .map_err(at("biorthogonal", "problem_spec"))?;
    if let Some(bits) = cfg.precision_bits {
        spec = spec
            .with_precision(bits)
            .map_err(at("biorthogonal", "problem_spec"))?;
    }
    build_system(&spec).map_err(at("biorthogonal", "build_system"))
}

fn scaled_kernel(sys: &BiorthogonalSystem, rho: f64, pairs: &[(f64, f64)]) -> Result<Vec<f64>> {
    pairs
        .iter()
        .map(|&(x, y)| {
            sys.eval_kernel_scaled(rho, x, y)
                .map_err(at("biorthogonal", "eval_kernel_scaled"))
        })
        .collect()
}

fn finite_n(cfg: &RunConfig) -> Result<Outcome> {
    let n = cfg.n_list[0];
    let m = solve_measure(cfg)?;
    let sys = system(cfg, n)?;
    let pairs = cfg.kernel_grid().pairs();
    let values = scaled_kernel(&sys, m.rho, &pairs)?;
    let offdiag = sys.max_offdiagonal_residual();
    let checks = vec![Check::below("max_offdiagonal_residual", offdiag, 1e-16)];
    let extra = json!({
        "n": n,
        "rho": m.rho,
        "kappa_n": sys.kappa(n),
        "kappa_ratio": kappa_ratio(&sys.kappas[n], n, cfg.theta_u32(), cfg.alpha, m.c, m.ell),
        "max_offdiagonal_residual": offdiag,
    });
    Ok(kernel_artifact(cfg, &pairs, &values, extra, checks))
}

/// Local rate −Δ ln err / Δ ln n between consecutive rows.
fn local_rates(ns: &[usize], errs: &[f64]) -> Vec<Option<f64>> {
    (0..ns.len())
        .map(|i| {
            (i > 0).then(|| -(errs[i] / errs[i - 1]).ln() / (ns[i] as f64 / ns[i - 1] as f64).ln())
        })
        .collect()
}

fn converge(cfg: &RunConfig) -> Result<Outcome> {
    let m = solve_measure(cfg)?;
    let grid: Grid = cfg.kernel_grid();
    let pairs = grid.pairs();
    let limits = limit_values(cfg, &pairs)?;
    let errs: Vec<f64> = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let sys = system(cfg, n)?;
            let k = scaled_kernel(&sys, m.rho, &pairs)?;
            Ok(k.iter()
                .zip(&limits)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let rates = local_rates(&cfg.n_list, &errs);
    let worst_step = errs.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let checks = vec![Check {
        name: "sup_err_ratio_max".into(),
        value: worst_step,
        condition: "< 1 (strictly decreasing)".into(),
        pass: errs.windows(2).all(|w| w[1] < w[0]),
    }];
    Ok(match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = cfg
                .n_list
                .iter()
                .zip(&errs)
                .zip(&rates)
                .map(|((&n, &e), r)| {
                    vec![
                        n.to_string(),
                        fmt_num(e),
                        r.map(fmt_num).unwrap_or_default(),
                    ]
                })
                .collect();
            Outcome {
                artifact: to_csv(&["n", "sup_err", "fitted_rate"], &rows),
                checks,
            }
        }
        Format::Json => {
            let rows: Vec<Value> = cfg
                .n_list
                .iter()
                .zip(&errs)
                .zip(&rates)
                .map(|((&n, &e), r)| json!({ "n": n, "sup_err": e, "fitted_rate": r }))
                .collect();
            finish_json(cfg, json!({ "rho": m.rho, "rows": rows }), checks)
        }
    })
}

/// Random ζ away from ℝ ∪ iℝ and the Airy rays, 0.1 ≤ |ζ| ≤ 10.
fn random_off_axis(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = 10f64.powf(rng.gen_range(-1.0..1.0));
    let quarter = rng.gen_range(0..4) as f64;
    let phi = quarter * PI / 2.0 - PI + rng.gen_range(0.05..0.45) * PI;
    Complex64::from_polar(r, phi)
}

struct Row {
    kind: &'static str,
    test: &'static str,
    max_residual: f64,
    fitted_exponent: Option<f64>,
    check: Check,
}

const JUMP_TOL: f64 = 1e-7;
/// Normalized residuals below this are rounding noise of a terminating expansion.
const EXACT: f64 = 1e-11;

fn local_rows(pm: &ParametrixMatrix, rng: &mut ChaCha8Rng) -> Result<Vec<Row>> {
    let kind = pm.kind.name();
    let airy = pm.kind == ParametrixKind::Airy;
    let zs: Vec<Complex64> = (0..20).map(|_| random_off_axis(rng)).collect();
    let det = zs
        .par_iter()
        .map(|&z| {
            if airy {
                pm.determinant(z).map(|d| (d - 1.0).norm())
            } else {
                pm.determinant_residual(z)
            }
        })
        .collect::<std::result::Result<Vec<f64>, _>>()
        .map_err(at("parametrix", "determinant"))?
        .into_iter()
        .fold(0.0, f64::max);
    let det_tol = if airy { 1e-10 } else { 1e-6 };

    let radii: Vec<f64> = (0..10).map(|i| 0.15 * 1.45f64.powi(i)).collect();
    let tasks: Vec<_> = pm
        .jump_rays()
        .into_iter()
        .flat_map(|ray| radii.iter().map(move |&r| (ray, r)))
        .collect();
    let jump = tasks
        .par_iter()
        .map(|(ray, r)| pm.jump_residual(ray, *r))
        .collect::<std::result::Result<Vec<f64>, _>>()
        .map_err(at("parametrix", "jump_residual"))?
        .into_iter()
        .fold(0.0, f64::max);

    let residuals = |radii: &[f64]| {
        let zs: Vec<Complex64> = radii
            .iter()
            .map(|&r| Complex64::from_polar(r, PI / 4.0))
            .collect();
        let samples = zs
            .par_iter()
            .map(|&z| pm.normalized_residual(z))
            .collect::<std::result::Result<Vec<f64>, _>>();
        samples.map(|s| (zs, s))
    };
    let (zs, samples) = if airy {
        residuals(&[5.0, 10.0, 25.0, 40.0])
    } else {
        // the contour integral used for integer α cancels beyond |ζ| ~ 10³
        residuals(&[1e3, 1e4, 1e5]).or_else(|_| residuals(&[1e2, 3e2, 1e3]))
    }
    .map_err(at("parametrix", "normalized_residual"))?;
    let predicted = pm.predicted_decay();
    let max_res = samples.iter().copied().fold(0.0, f64::max);
    let asym = if max_res < EXACT {
        // the expansion terminates, e.g. θ = 1 and α = −1/2 on the q-side
        Row {
            kind,
            test: "asymptotic",
            max_residual: max_res,
            fitted_exponent: None,
            check: Check::below(format!("{kind}_asymptotic_exact"), max_res, EXACT),
        }
    } else {
        let rep = asymptotic_residual(pm, &zs).map_err(at("parametrix", "asymptotic_residual"))?;
        Row {
            kind,
            test: "asymptotic",
            max_residual: max_res,
            fitted_exponent: Some(rep.fitted_exponent),
            check: Check::within(
                format!("{kind}_fitted_exponent"),
                rep.fitted_exponent,
                predicted,
                0.2,
            ),
        }
    };
    Ok(vec![
        Row {
            kind,
            test: "determinant",
            max_residual: det,
            fitted_exponent: None,
            check: Check::below(format!("{kind}_determinant"), det, det_tol),
        },
        Row {
            kind,
            test: "jump",
            max_residual: jump,
            fitted_exponent: None,
            check: Check::below(format!("{kind}_jump"), jump, JUMP_TOL),
        },
        asym,
    ])
}

fn global_rows(cfg: &RunConfig, m: &EquilibriumMeasure) -> Result<Vec<Row>> {
    let theta = cfg.theta_u32();
    let mut rows = Vec::new();
    for gk in [GlobalKind::P, GlobalKind::Q] {
        let g = build_global(m.map().clone(), cfg.alpha, theta, gk)
            .map_err(at("parametrix", "build_global"))?;
        let kind = g.kind.name();
        let b = m.b;
        let xs: Vec<f64> = (1..=10).map(|k| b * (k as f64 - 0.5) / 10.0).collect();
        let jump = xs
            .iter()
            .map(|&x| g.jump_residual(x))
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(at("parametrix", "global_jump_residual"))?
            .into_iter()
            .fold(0.0, f64::max);
        rows.push(Row {
            kind,
            test: "jump",
            max_residual: jump,
            fitted_exponent: None,
            check: Check::below(format!("{kind}_jump"), jump, JUMP_TOL),
        });
        let (first, _) = g
            .eval(Complex64::new(1e7, 1e3))
            .map_err(at("parametrix", "global_eval"))?;
        let inf = (first - 1.0).norm();
        rows.push(Row {
            kind,
            test: "infinity",
            max_residual: inf,
            fitted_exponent: None,
            check: Check::below(format!("{kind}_infinity"), inf, 1e-5),
        });
        let slope = g
            .fitted_exponent_at_zero(1e-8, 1e-10, 0.3)
            .map_err(at("parametrix", "fitted_exponent_at_zero"))?;
        let dev = (slope - g.exponent_at_zero()).abs();
        rows.push(Row {
            kind,
            test: "exponent_at_zero",
            max_residual: dev,
            fitted_exponent: Some(slope),
            check: Check::within(
                format!("{kind}_exponent_at_zero"),
                slope,
                g.exponent_at_zero(),
                1e-3,
            ),
        });
    }
    Ok(rows)
}

fn check_parametrix(cfg: &RunConfig) -> Result<Outcome> {
    let theta = cfg.theta_u32();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    let p = build_mei_p(theta, cfg.alpha).map_err(at("parametrix", "build_mei_p"))?;
    rows.extend(local_rows(&p, &mut rng)?);
    let q = build_mei_q(theta, cfg.alpha).map_err(at("parametrix", "build_mei_q"))?;
    rows.extend(local_rows(&q, &mut rng)?);
    rows.extend(local_rows(&build_airy(), &mut rng)?);
    let m = solve_measure(cfg)?;
    rows.extend(global_rows(cfg, &m)?);

    let checks: Vec<Check> = rows.iter().map(|r| r.check.clone()).collect();
    Ok(match cfg.format {
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.kind.to_string(),
                        r.test.to_string(),
                        fmt_num(r.max_residual),
                        r.fitted_exponent.map(fmt_num).unwrap_or_default(),
                    ]
                })
                .collect();
            Outcome {
                artifact: to_csv(&["kind", "test", "max_residual", "fitted_exponent"], &table),
                checks,
            }
        }
        Format::Json => {
            let results: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "kind": r.kind,
                        "test": r.test,
                        "max_residual": r.max_residual,
                        "fitted_exponent": r.fitted_exponent,
                    })
                })
                .collect();
            finish_json(cfg, json!(results), checks)
        }
    })
}

fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_identities(cfg: &RunConfig) -> Result<Outcome> {
    let theta = cfg.theta_u32();
    let alpha = cfg.alpha;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let strategy = EvalStrategy::default();
    let mut checks = Vec::new();

    // jump of G^{θ+1,0} across the negative axis, every k
    let mut tasks = Vec::new();
    for k in 0..=theta {
        for _ in 0..20 {
            let z = Complex64::from_polar(rng.gen_range(0.1..20.0), rng.gen_range(-3.1..3.1));
            tasks.push((k, z));
        }
    }
    let jump = tasks
        .par_iter()
        .map(|&(k, z)| meijer_jump_identity_residual(theta, alpha, k, z, &strategy))
        .collect::<std::result::Result<Vec<f64>, _>>()
        .map_err(at("specialfn", "meijer_jump_identity_residual"))?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::below("meijer_jump_identity", jump, 1e-8));

    // θ = 1: G^{1,0}_{0,2}(0, −α | ζ) = ζ^{−α/2} J_α(2√ζ)
    let p = MeijerGPattern::new(MeijerFamily::OneZero, 1, alpha, 0)
        .map_err(at("specialfn", "pattern"))?;
    let mut bessel: f64 = 0.0;
    for i in 1..=40 {
        let z = 0.25 * i as f64;
        let g =
            meijer_g(&p, Complex64::new(z, 0.0), &strategy).map_err(at("specialfn", "meijer_g"))?;
        let j = z.powf(-alpha / 2.0)
            * bessel_j(alpha, 2.0 * z.sqrt()).map_err(at("specialfn", "bessel_j"))?;
        bessel = bessel.max((g - j).norm());
    }
    checks.push(Check::below("bessel_reduction", bessel, 1e-10));

    // residue series against the Mellin–Barnes integral
    let series = EvalStrategy::with_method(EvalMethod::ResidueSeries);
    let contour = EvalStrategy::with_method(EvalMethod::MellinBarnes);
    let mut tasks = Vec::new();
    for fam in [
        MeijerFamily::ThetaZero,
        MeijerFamily::ThetaPlusOneZero,
        MeijerFamily::OneZero,
        MeijerFamily::ThetaPlusOneZeroDual,
    ] {
        for _ in 0..5 {
            let k = rng.gen_range(0..=theta);
            let z = Complex64::from_polar(rng.gen_range(0.2..8.0), rng.gen_range(-3.0..3.0));
            tasks.push((fam, k, z));
        }
    }
    let agreement = tasks
        .par_iter()
        .map(|&(fam, k, z)| -> std::result::Result<f64, RunError> {
            let p =
                MeijerGPattern::new(fam, theta, alpha, k).map_err(at("specialfn", "pattern"))?;
            if p.has_log_collision() {
                return Ok(0.0);
            }
            let s = meijer_g(&p, z, &series).map_err(at("specialfn", "meijer_g"))?;
            let q = meijer_g(&p, z, &contour).map_err(at("specialfn", "mellin_barnes"))?;
            Ok((s - q).norm() / s.norm().max(1e-300))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::below("series_vs_contour", agreement, 1e-7));

    let d = theta as usize + 1;
    let cyc = frob(&(m_cyc(theta) * m_cyc_inverse(theta) - CMatrix::identity(d, d)));
    checks.push(Check::below("m_cyc_inverse", cyc, 1e-14));
    let mut om: f64 = 0.0;
    for half in [HalfPlane::Upper, HalfPlane::Lower] {
        let det = omega(theta, half).determinant();
        om = om.max((det - omega_determinant(theta, half)).norm() / det.norm());
    }
    checks.push(Check::below("omega_determinant", om, 1e-10));

    // determinant identities of the local parametrices
    for (name, pm) in [
        (
            "mei_p_determinant",
            build_mei_p(theta, alpha).map_err(at("parametrix", "build_mei_p"))?,
        ),
        (
            "mei_q_determinant",
            build_mei_q(theta, alpha).map_err(at("parametrix", "build_mei_q"))?,
        ),
    ] {
        let zs: Vec<Complex64> = (0..20).map(|_| random_off_axis(&mut rng)).collect();
        let r = zs
            .par_iter()
            .map(|&z| pm.determinant_residual(z))
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(at("parametrix", "determinant_residual"))?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(Check::below(name, r, 1e-7));
    }

    Ok(match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| vec![c.name.clone(), fmt_num(c.value), c.pass.to_string()])
                .collect();
            Outcome {
                artifact: to_csv(&["identity", "max_residual", "pass"], &rows),
                checks,
            }
        }
        Format::Json => {
            let results: Vec<Value> = checks
                .iter()
                .map(|c| json!({ "identity": c.name, "max_residual": c.value }))
                .collect();
            finish_json(cfg, json!(results), checks)
        }
    })
}
