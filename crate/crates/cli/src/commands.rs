//! One function per subcommand. Each returns the rendered artifact and a
//! one-line summary.

use std::f64::consts::FRAC_PI_2;

use anyhow::Result;
use loewner_lab::driving::{deterministic_driver, sample_brownian};
use loewner_lab::estimators::{
    beta_histogram, estimate_count_scaling_multi, estimate_moment, estimate_tip_harmonic_measure,
    forward_martingale_test, radial_theta_simulate, reverse_martingale_test, CountConfig,
    CountDirection, DrivingModel, FlatnessReport,
};
use loewner_lab::invariants::{run_checks, CheckLevel};
use loewner_lab::loewner::{tip_profile, trace};
use loewner_lab::report::{render, Meta};
use loewner_lab::spectra::{
    dims_of_beta, figure1_curves, spectrum_row, spectrum_table, ExponentPoint, SpectrumParams,
};
use loewner_lab::{Complex64, DriverKind, SlitMapChain};
use serde::Serialize;
use serde_json::json;

use crate::settings::{at_least, positive, Level, ParamError, Settings};

pub struct Outcome {
    pub text: String,
    pub summary: String,
    /// Set by `check` when an invariant is violated.
    pub failed: bool,
}

fn emit<T: Serialize, R: Serialize>(s: &Settings, meta: &Meta, data: &T, rows: &[R], summary: String) -> Result<Outcome> {
    Ok(Outcome {
        text: render(s.format(), meta, data, rows)?,
        summary,
        failed: false,
    })
}

pub fn run(command: &str, s: &Settings) -> Result<Outcome> {
    match command {
        "trace" => trace_cmd(s),
        "spectrum" => spectrum(s),
        "moments" => moments(s),
        "counts" => counts(s),
        "tip-profile" => profile(s),
        "hm" => harmonic(s),
        "theta-sde" => theta_sde(s),
        "martingale" => martingale(s),
        "check" => check(s),
        other => unreachable!("unknown command {other}"),
    }
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    re: f64,
    im: f64,
}

fn trace_cmd(s: &Settings) -> Result<Outcome> {
    let kappa = s.kappa()?;
    let (steps, dt) = s.time_grid(4096)?;
    let seed = s.seed();
    if let Some(y) = s.y_min {
        positive("y_min", y)?;
    }
    let chain = SlitMapChain::from_path(&sample_brownian(kappa, steps, dt, seed)?);
    let rows: Vec<TraceRow> = trace(&chain, s.y_min)?
        .into_iter()
        .map(|(t, z)| TraceRow { t, re: z.re, im: z.im })
        .collect();
    let meta = Meta::new("trace", json!({"steps": steps, "dt": dt, "y_min": s.y_min}))
        .kappa(kappa)
        .seed(seed);
    let tip = rows.last().expect("trace includes t = 0");
    let summary = format!(
        "trace: kappa={kappa} steps={steps} dt={dt} seed={seed} tip=({:.6}, {:.6})",
        tip.re, tip.im
    );
    emit(s, &meta, &rows, &rows, summary)
}

#[derive(Serialize)]
struct CurveRow {
    kappa: f64,
    alpha: f64,
    f_tip: f64,
}

fn spectrum(s: &Settings) -> Result<Outcome> {
    let points = at_least("points", s.points.unwrap_or(401), 2)?;
    if let Some(kappas) = &s.kappas {
        let curves = figure1_curves(kappas, points)?;
        let rows: Vec<CurveRow> = curves
            .iter()
            .flat_map(|c| {
                c.alpha.iter().zip(&c.f_tip).map(|(&alpha, &f_tip)| CurveRow {
                    kappa: c.kappa,
                    alpha,
                    f_tip,
                })
            })
            .collect();
        let meta = Meta::new("spectrum", json!({"kappas": kappas, "points": points}));
        let summary = curves
            .iter()
            .map(|c| format!("kappa={} max={:.12} at alpha={:.6}", c.kappa, c.max_value, c.alpha_at_max))
            .collect::<Vec<_>>()
            .join("; ");
        return emit(s, &meta, &curves, &rows, format!("spectrum curves: {summary}"));
    }

    let kappa = s.kappa()?;
    let p = SpectrumParams::new(kappa)?;
    let base = Meta::new(
        "spectrum",
        json!({"points": points, "alpha": s.alpha, "beta": s.beta, "lambda": s.lambda}),
    )
    .kappa(kappa);
    if s.beta.is_some() || s.lambda.is_some() {
        let e = match (s.beta, s.lambda) {
            (Some(beta), None) => ExponentPoint::from_beta(kappa, beta)?,
            (None, Some(lambda)) => ExponentPoint::from_lambda(kappa, lambda)?,
            _ => return Err(ParamError::new("beta", "give either --beta or --lambda, not both").into()),
        };
        let dims = dims_of_beta(kappa, e.beta).ok();
        let summary = format!(
            "exponents: kappa={kappa} r={:.12} lambda={:.12} zeta={:.12} beta={:.12} rho={:.12} q={:.12}",
            e.r, e.lambda, e.zeta, e.beta, e.rho, e.q
        );
        let data = json!({"point": e, "dhat_dbeta": dims});
        return emit(s, &base, &data, &[e], summary);
    }

    let rows = match s.alpha {
        Some(alpha) => vec![spectrum_row(kappa, alpha)?],
        None => spectrum_table(kappa, points)?,
    };
    let meta = base
        .note("f_bulk is the conjectured bulk spectrum, included for comparison only")
        .note(format!("holder_exponent={}", p.holder_exponent()));
    let (imax, best) = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.f_tip.total_cmp(&b.1.f_tip))
        .expect("nonempty table");
    let summary = format!(
        "spectrum: kappa={kappa} d={} alpha_*={} max F_tip={:.12} at alpha={:.6} (row {imax}) alpha in [{:.6}, {:.6}]",
        p.d, p.alpha_star, best.f_tip, best.alpha, p.alpha_minus, p.alpha_plus
    );
    let data = json!({"params": p, "holder_exponent": p.holder_exponent(), "rows": rows});
    emit(s, &meta, &data, &rows, summary)
}

#[derive(Serialize)]
struct MomentRow {
    t: f64,
    mean: f64,
    stderr: f64,
}

fn moments(s: &Settings) -> Result<Outcome> {
    let kappa = s.kappa()?;
    let seed = s.seed();
    let samples = s.samples_or(20_000)?;
    let tmax = positive("tmax", s.tmax.unwrap_or(32.0))?;
    if s.histogram == Some(true) {
        let width = positive("bin_width", s.bin_width.unwrap_or(0.05))?;
        let h = beta_histogram(kappa, tmax, samples, seed, DrivingModel::Brownian, width)?;
        let meta = Meta::new("moments", json!({"histogram": true, "t": tmax, "samples": samples, "bin_width": width}))
            .kappa(kappa)
            .seed(seed);
        let summary = format!(
            "beta histogram: kappa={kappa} t={tmax} samples={samples} mode={:.4} beta_hash={:.4} underflow={} overflow={}",
            h.mode, h.beta_hash, h.underflow, h.overflow
        );
        return emit(s, &meta, &h, &h.bins, summary);
    }
    let lambda = s.lambda.ok_or_else(|| ParamError::new("lambda", "required"))?;
    let grid: Vec<f64> = std::iter::successors(Some(2.0), |t| Some(t * 2.0))
        .take_while(|&t| t <= tmax * (1.0 + 1e-12))
        .collect();
    if grid.len() < 2 {
        return Err(ParamError::new("tmax", "need tmax ≥ 4 for a slope fit").into());
    }
    let e = estimate_moment(kappa, lambda, &grid, samples, seed)?;
    let rows: Vec<MomentRow> = e
        .t_grid
        .iter()
        .zip(e.mean.iter().zip(&e.stderr))
        .map(|(&t, (&mean, &stderr))| MomentRow { t, mean, stderr })
        .collect();
    let meta = Meta::new("moments", json!({"lambda": lambda, "t_grid": grid, "samples": samples}))
        .kappa(kappa)
        .seed(seed);
    let summary = format!(
        "moments: kappa={kappa} lambda={lambda} slope={:.4} ± {:.4} expected={:.4}",
        e.fitted_slope, e.slope_stderr, e.expected_slope
    );
    emit(s, &meta, &e, &rows, summary)
}

#[derive(Serialize)]
struct CountRow {
    n: u32,
    beta: f64,
    count: u64,
    scanned: u64,
    mean: f64,
    stderr: f64,
}

fn counts(s: &Settings) -> Result<Outcome> {
    let kappa = s.kappa()?;
    let seed = s.seed();
    let paths = at_least("samples", s.samples.unwrap_or(50), 2)?;
    let beta = s.beta.unwrap_or(0.0);
    let n_min = s.n_min.unwrap_or(3);
    let n_max = s.n_max.unwrap_or(6);
    if n_min > n_max {
        return Err(ParamError::new("n_min", format!("{n_min} exceeds n_max = {n_max}")).into());
    }
    let cfg = CountConfig::new(kappa, (n_min..=n_max).collect(), paths, seed);
    let scaling = estimate_count_scaling_multi(&cfg, &[(beta, CountDirection::Auto)])?
        .pop()
        .expect("one β requested");
    let rows: Vec<CountRow> = scaling
        .stats
        .iter()
        .map(|c| CountRow {
            n: c.n,
            beta: c.beta,
            count: c.count,
            scanned: c.scanned,
            mean: c.mean,
            stderr: c.stderr,
        })
        .collect();
    let meta = Meta::new("counts", json!({"beta": beta, "n_min": n_min, "n_max": n_max, "paths": paths}))
        .kappa(kappa)
        .seed(seed);
    let summary = format!(
        "counts: kappa={kappa} beta={beta} n={n_min}..{n_max} paths={paths} slope={:.4} ± {:.4} expected={:.4}",
        scaling.slope, scaling.slope_stderr, scaling.expected_slope
    );
    emit(s, &meta, &scaling, &rows, summary)
}

#[derive(Serialize)]
struct ProfileRow {
    y: f64,
    deriv_mod: f64,
    v: f64,
}

fn profile(s: &Settings) -> Result<Outcome> {
    let kappa = s.kappa()?;
    let n_max = s.n_max.unwrap_or(6);
    if n_max > 10 {
        return Err(ParamError::new("n_max", "heights below 2^-10 are not supported").into());
    }
    // steps of capacity 4^-(n_max+2) keep the smallest height above the slit scale
    let (steps, dt) = s.time_grid(1 << (2 * n_max + 4).max(10))?;
    let seed = s.seed();
    let chain = SlitMapChain::from_path(&sample_brownian(kappa, steps, dt, seed)?);
    let grid: Vec<f64> = (0..=n_max as i32).map(|j| 2f64.powi(-j)).collect();
    let p = tip_profile(&chain, steps, &grid)?;
    let rows: Vec<ProfileRow> = (0..grid.len())
        .map(|k| ProfileRow {
            y: p.y_grid[k],
            deriv_mod: p.deriv_mod[k],
            v: p.v_cum[k],
        })
        .collect();
    let last = rows.last().expect("nonempty grid");
    let meta = Meta::new("tip-profile", json!({"steps": steps, "dt": dt, "n_max": n_max}))
        .kappa(kappa)
        .seed(seed);
    let summary = format!(
        "tip-profile: kappa={kappa} t={} log v/log y at y=2^-{n_max}: {:.4}",
        chain.total_time(),
        last.v.ln() / last.y.ln()
    );
    emit(s, &meta, &p, &rows, summary)
}

#[derive(Serialize)]
struct HarmonicRow {
    eps: f64,
    mu: f64,
    x_minus: f64,
    x_plus: f64,
    arc_samples: usize,
}

fn harmonic(s: &Settings) -> Result<Outcome> {
    let kappa = s.kappa()?;
    let (steps, dt) = s.time_grid(1024)?;
    let seed = s.seed();
    let slit = s.slit == Some(true);
    let lo = positive("eps_min", s.eps_min.unwrap_or(1e-3))?;
    let hi = positive("eps_max", s.eps_max.unwrap_or(1e-1))?;
    let count = at_least("eps_count", s.eps_count.unwrap_or(8), 2)?;
    if hi <= lo {
        return Err(ParamError::new("eps_max", "must exceed eps_min").into());
    }
    let circle = s.circle_samples.unwrap_or(256);
    let path = if slit {
        deterministic_driver(DriverKind::Constant, kappa, steps, dt)?
    } else {
        sample_brownian(kappa, steps, dt, seed)?
    };
    let chain = SlitMapChain::from_path(&path);
    let eps: Vec<f64> = (0..count)
        .map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64))
        .collect();
    let est = estimate_tip_harmonic_measure(&chain, steps, &eps, circle)?;
    let rows: Vec<HarmonicRow> = (0..eps.len())
        .map(|k| HarmonicRow {
            eps: est.eps_grid[k],
            mu: est.mu[k],
            x_minus: est.x_minus[k],
            x_plus: est.x_plus[k],
            arc_samples: est.arc_samples[k],
        })
        .collect();
    let mut meta = Meta::new(
        "hm",
        json!({"steps": steps, "dt": dt, "slit": slit, "eps": eps, "circle_samples": circle}),
    )
    .kappa(kappa);
    if !slit {
        meta = meta.seed(seed);
    }
    let summary = format!(
        "hm: kappa={kappa} {} t={} exponent={:.4}",
        if slit { "slit" } else { "brownian" },
        est.t,
        est.exponent()?
    );
    emit(s, &meta, &est, &rows, summary)
}

fn theta_sde(s: &Settings) -> Result<Outcome> {
    let kappa = s.kappa()?;
    let seed = s.seed();
    let u = s.u.unwrap_or(0.6);
    let theta0 = s.theta0.unwrap_or(FRAC_PI_2);
    let tmax = positive("tmax", s.tmax.unwrap_or(3.0))?;
    let samples = s.samples_or(10_000)?;
    let r = radial_theta_simulate(kappa, u, theta0, tmax, samples, seed)?;
    let meta = Meta::new("theta-sde", json!({"u": u, "theta0": theta0, "tmax": tmax, "samples": samples}))
        .kappa(kappa)
        .seed(seed);
    let summary = format!(
        "theta-sde: kappa={kappa} u={u} drift={:.4} chi2={:.2} dof={} p={:.4}",
        r.drift, r.chi_square, r.dof, r.p_value
    );
    emit(s, &meta, &r, &r.bins, summary)
}

#[derive(Serialize)]
struct FlatnessRow {
    grid: f64,
    mean: f64,
    stderr: f64,
    diff_stderr: f64,
    stopped_fraction: Option<f64>,
}

fn flatness_rows(r: &FlatnessReport) -> Vec<FlatnessRow> {
    (0..r.grid.len())
        .map(|k| FlatnessRow {
            grid: r.grid[k],
            mean: r.mean[k],
            stderr: r.stderr[k],
            diff_stderr: r.diff_stderr[k],
            stopped_fraction: r.stopped_fraction.as_ref().map(|f| f[k]),
        })
        .collect()
}

fn martingale(s: &Settings) -> Result<Outcome> {
    let kappa = s.kappa()?;
    let seed = s.seed();
    let samples = s.samples_or(10_000)?;
    let tmax = positive("tmax", s.tmax.unwrap_or(4.0))?;
    let (report, params) = if s.forward == Some(true) {
        let u = s.u.unwrap_or(0.6);
        let grid = [0.0, 0.5, 1.0, 1.5, 2.0];
        let z = Complex64::new(0.0, 1.0);
        let r = forward_martingale_test(kappa, u, z, &grid, tmax, samples, seed)?;
        (r, json!({"flow": "forward", "u": u, "z": [0.0, 1.0], "s_grid": grid, "tmax": tmax, "samples": samples}))
    } else {
        let r_exp = s.r.unwrap_or(1.0);
        let grid = [0.0, tmax / 4.0, tmax / 2.0, tmax];
        let r = reverse_martingale_test(kappa, r_exp, &grid, 1.0, samples, seed)?;
        (r, json!({"flow": "reverse", "r": r_exp, "delta": 1.0, "t_grid": grid, "samples": samples}))
    };
    let meta = Meta::new("martingale", params).kappa(kappa).seed(seed);
    let summary = format!(
        "martingale: kappa={kappa} max deviation {:.2} standard errors (flat within 3: {})",
        report.max_deviation,
        report.is_flat(3.0)
    );
    emit(s, &meta, &report, &flatness_rows(&report), summary)
}

#[derive(Serialize)]
struct CheckRow<'a> {
    name: &'a str,
    checked: usize,
    violations: usize,
    max_error: f64,
    tolerance: f64,
    passed: bool,
}

fn check(s: &Settings) -> Result<Outcome> {
    let level = s.level.unwrap_or(Level::Fast);
    let seed = s.seed();
    let lvl = match level {
        Level::Fast => CheckLevel::Fast,
        Level::Full => CheckLevel::Full,
    };
    let outcomes = run_checks(lvl, seed)?;
    let rows: Vec<CheckRow> = outcomes
        .iter()
        .map(|o| CheckRow {
            name: &o.name,
            checked: o.checked,
            violations: o.violations,
            max_error: o.max_error,
            tolerance: o.tolerance,
            passed: o.passed(),
        })
        .collect();
    let failed: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    let meta = Meta::new("check", json!({"level": format!("{level:?}").to_lowercase(), "sizes": lvl.sizes()})).seed(seed);
    let summary = if failed.is_empty() {
        format!("check {}: {} of {} checks passed", meta.params["level"].as_str().unwrap_or(""), rows.len(), rows.len())
    } else {
        format!("check FAILED: {}", failed.join(", "))
    };
    let mut out = emit(s, &meta, &outcomes, &rows, summary)?;
    out.failed = !failed.is_empty();
    Ok(out)
}
