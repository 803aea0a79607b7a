//! Acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL criterion N: ...` line (run with `--nocapture` to see them).
//!
//! All Monte-Carlo criteria use the one master seed below, fixed in advance.

use std::f64::consts::PI;
use std::time::Instant;

use loewner_lab::driving::{deterministic_driver, DriverKind};
use loewner_lab::estimators::{
    estimate_count_scaling_multi, estimate_moment, estimate_tip_harmonic_measure,
    forward_martingale_test, radial_theta_simulate, reverse_martingale_test, CountConfig,
    CountDirection,
};
use loewner_lab::invariants::{
    chain_roundtrip, duality_checks, inequality_suite, reverse_identity, spectra_identities,
    step_roundtrip, CheckLevel, CheckOutcome, DUALITY_STEP, IDENTITY_KAPPAS,
};
use loewner_lab::spectra::figure1_curves;
use loewner_lab::{Complex64, SlitMapChain, SpectrumParams};

const SEED: u64 = 20_261_018;

fn verdict(n: u32, ok: bool, detail: String) {
    println!("{} criterion {n}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn summarise(outcomes: &[CheckOutcome]) -> (bool, String) {
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed())
        .map(|o| format!("{} ({} violations, max {:.2e})", o.name, o.violations, o.max_error))
        .collect();
    let checked: usize = outcomes.iter().map(|o| o.checked).sum();
    let worst = outcomes
        .iter()
        .map(|o| o.max_error / o.tolerance.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    if failed.is_empty() {
        (true, format!("{checked} evaluations, worst error/tolerance {worst:.3}"))
    } else {
        (false, failed.join("; "))
    }
}

#[test]
fn criterion_01_exponent_identities() {
    let start = Instant::now();
    let n = CheckLevel::Full.sizes().grid_points;
    let (ok, detail) = summarise(&spectra_identities(&IDENTITY_KAPPAS, n).unwrap());
    let secs = start.elapsed().as_secs_f64();
    verdict(1, ok && secs < 1.0, format!("{detail} in {secs:.3}s"));
}

#[test]
fn criterion_02_finite_difference_duality() {
    let start = Instant::now();
    let n = CheckLevel::Full.sizes().grid_points;
    let (ok, detail) = summarise(&duality_checks(&IDENTITY_KAPPAS, n, DUALITY_STEP).unwrap());
    let secs = start.elapsed().as_secs_f64();
    verdict(2, ok && secs < 1.0, format!("{detail} in {secs:.3}s"));
}

#[test]
fn criterion_03_flow_exactness() {
    let start = Instant::now();
    let s = CheckLevel::Full.sizes();
    let outcomes = vec![
        step_roundtrip(s.step_triples, SEED),
        chain_roundtrip(s.roundtrip_chains, 1000, SEED).unwrap(),
        reverse_identity(s.reverse_chains, 1000, SEED).unwrap(),
    ];
    let (ok, detail) = summarise(&outcomes);
    let secs = start.elapsed().as_secs_f64();
    verdict(3, ok && secs < 30.0, format!("{detail} in {secs:.1}s"));
}

#[test]
fn criterion_04_inequality_suite() {
    let start = Instant::now();
    let s = CheckLevel::Full.sizes();
    let report = inequality_suite(s.corpus_chains, s.corpus_steps, SEED).unwrap();
    let (ok, detail) = summarise(&report.outcomes);
    let lower = report.beurling_lower_constant;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        4,
        ok && lower > 0.0 && secs < 120.0,
        format!("{} chains, {detail}, lower Beurling constant {lower:.3}, {secs:.1}s", report.chains),
    );
}

#[test]
fn criterion_05_moment_scaling() {
    let grid = [2.0, 4.0, 8.0, 16.0, 32.0];
    let mut lines = Vec::new();
    let mut ok = true;
    for (kappa, lambda, target, fixed_tol, use_sigma) in
        [(8.0 / 3.0, 4.0 / 3.0, -2.0 / 3.0, 0.07_f64, true), (2.0, 1.25, -0.75, 0.08, false)]
    {
        let est = estimate_moment(kappa, lambda, &grid, 20_000, SEED).unwrap();
        let tol = if use_sigma { fixed_tol.max(3.0 * est.slope_stderr) } else { fixed_tol };
        let err = (est.fitted_slope - target).abs();
        ok &= err <= tol;
        lines.push(format!(
            "κ={kappa:.4} λ={lambda:.4} slope {:.4} ± {:.4} (target {target:.4}, tol {tol:.3})",
            est.fitted_slope, est.slope_stderr
        ));
    }
    verdict(5, ok, lines.join("; "));
}

#[test]
fn criterion_06_martingale_flatness() {
    let reverse = reverse_martingale_test(8.0 / 3.0, 1.0, &[0.0, 1.0, 2.0, 4.0], 1.0, 10_000, SEED).unwrap();
    let forward = forward_martingale_test(
        2.0,
        0.6,
        Complex64::new(0.0, 1.0),
        &[0.0, 0.5, 1.0, 1.5, 2.0],
        4.0,
        10_000,
        SEED,
    )
    .unwrap();
    verdict(
        6,
        reverse.is_flat(3.0) && forward.is_flat(3.0),
        format!(
            "reverse max deviation {:.2} SE, forward max deviation {:.2} SE",
            reverse.max_deviation, forward.max_deviation
        ),
    );
}

#[test]
fn criterion_07_count_scaling() {
    let kappa = 2.0;
    let beta_sharp = SpectrumParams::new(kappa).unwrap().beta_hash;
    let cfg = CountConfig::new(kappa, vec![3, 4, 5, 6], 50, SEED);
    let out = estimate_count_scaling_multi(
        &cfg,
        &[(0.0, CountDirection::Auto), (beta_sharp, CountDirection::Auto)],
    )
    .unwrap();
    let (zero, sharp) = (&out[0], &out[1]);
    let ok_zero = (zero.slope - 1.0).abs() <= 0.3;
    let ok_sharp = (sharp.slope - 2.0).abs() <= 0.25;
    let means = |c: &loewner_lab::estimators::CountScaling| {
        c.stats.iter().map(|s| format!("{:.3}", s.mean)).collect::<Vec<_>>().join(",")
    };
    verdict(
        7,
        ok_zero && ok_sharp,
        format!(
            "β=0 slope {:.3} ± {:.3} (means {}); β_#={beta_sharp:.4} slope {:.3} ± {:.3}",
            zero.slope,
            zero.slope_stderr,
            means(zero),
            sharp.slope,
            sharp.slope_stderr
        ),
    );
}

#[test]
fn criterion_08_harmonic_measure() {
    let start = Instant::now();
    // Vertical slit of height 1 at t = 1/2 with κ = 2.
    let slit = |n: usize| {
        SlitMapChain::from_path(&deterministic_driver(DriverKind::Constant, 2.0, n, 0.5 / n as f64).unwrap())
    };
    let chain = slit(1024);
    let small: Vec<f64> = (0..8).map(|k| 1e-3 * 100f64.powf(k as f64 / 7.0)).collect();
    let exponent = estimate_tip_harmonic_measure(&chain, 1024, &small, 256)
        .unwrap()
        .exponent()
        .unwrap();
    // Radii far beyond the slit height see a flat boundary.
    let short = slit(64);
    let large = [20.0, 50.0, 100.0];
    let est = estimate_tip_harmonic_measure(&short, 64, &large, 256).unwrap();
    let worst = est
        .mu
        .iter()
        .zip(&large)
        .map(|(m, e)| (m / (2.0 * e / PI) - 1.0).abs())
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        8,
        (exponent - 0.5).abs() <= 0.1 && worst <= 0.1 && secs < 60.0,
        format!("slit exponent {exponent:.4}, flat-regime max |μπ/2ε - 1| = {worst:.2e}, {secs:.1}s"),
    );
}

#[test]
fn criterion_09_radial_stationarity() {
    let start = Instant::now();
    let r = radial_theta_simulate(2.0, 0.6, PI / 2.0, 3.0, 10_000, SEED).unwrap();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        9,
        r.p_value > 0.01 && secs < 120.0,
        format!("χ² = {:.2} on {} dof, p = {:.3}, {secs:.1}s", r.chi_square, r.dof, r.p_value),
    );
}

#[test]
fn criterion_10_tip_spectrum_curves() {
    let curves = figure1_curves(&[2.0, 4.0, 6.0], 401).unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    for c in &curves {
        let d = (1.0 + c.kappa / 8.0).min(2.0);
        let p = SpectrumParams::new(c.kappa).unwrap();
        let peak = (c.max_value - d).abs().max((c.alpha_at_max - p.alpha_star).abs());
        let (a, f) = (&c.alpha, &c.f_tip);
        let ends = f[0].abs().max(f[f.len() - 1].abs());
        let ends_at = (a[0] - p.alpha_minus).abs().max((a[a.len() - 1] - p.alpha_plus).abs());
        // slopes of consecutive chords must not increase
        let chords: Vec<f64> = (1..a.len()).map(|i| (f[i] - f[i - 1]) / (a[i] - a[i - 1])).collect();
        let convex_excess = chords.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max);
        let good = peak <= 1e-10 && ends <= 1e-10 && ends_at <= 1e-10 && convex_excess <= 1e-9;
        ok &= good;
        lines.push(format!(
            "κ={}: max {:.12} at α={:.6} (peak err {peak:.1e}, end err {ends:.1e}, chord excess {convex_excess:.1e})",
            c.kappa, c.max_value, c.alpha_at_max
        ));
    }
    verdict(10, ok, lines.join("; "));
}
