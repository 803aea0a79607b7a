//! Deterministic checks: exponent identities, finite-difference duality, flow
//! roundtrips and the conformal-map inequality suite on a corpus of chains.
//!
//! Every check returns a [`CheckOutcome`] counting evaluations and violations.
//! Inequalities are tested exactly as stated up to a relative rounding slack.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driving::{sample_brownian, stream_rng};
use crate::error::Result;
use crate::loewner::{
    dyadic_sum, forward_flow_with, inverse_map, reverse_flow_tip, shifted_inverse, tip_profile,
    trace_point_with_bound, HalfPlanePoint, SlitMapChain,
};
use crate::spectra::{
    dims_of_beta, f_tip, forward_exponents, r_of_lambda, rho_of_beta, two_minus_rho_parts,
    ExponentPoint, SpectrumParams,
};

/// κ values of the exponent-algebra checks.
pub const IDENTITY_KAPPAS: [f64; 6] = [0.5, 2.0, 8.0 / 3.0, 4.0, 6.0, 8.0 - 1e-6];

pub const IDENTITY_TOL: f64 = 1e-10;
pub const DUALITY_TOL: f64 = 1e-6;
pub const DUALITY_STEP: f64 = 1e-5;
pub const STEP_ROUNDTRIP_TOL: f64 = 1e-12;
pub const CHAIN_ROUNDTRIP_TOL: f64 = 1e-9;
/// Relative slack granted to inequalities for rounding in long compositions.
pub const INEQUALITY_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckLevel {
    Fast,
    Full,
}

/// Sizes of the randomised checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSizes {
    pub grid_points: usize,
    pub step_triples: usize,
    pub roundtrip_chains: usize,
    pub reverse_chains: usize,
    pub corpus_chains: usize,
    pub corpus_steps: usize,
}

impl CheckLevel {
    pub fn sizes(self) -> CheckSizes {
        match self {
            CheckLevel::Fast => CheckSizes {
                grid_points: 401,
                step_triples: 10_000,
                roundtrip_chains: 20,
                reverse_chains: 20,
                corpus_chains: 60,
                corpus_steps: 256,
            },
            CheckLevel::Full => CheckSizes {
                grid_points: 2001,
                step_triples: 100_000,
                roundtrip_chains: 100,
                reverse_chains: 100,
                corpus_chains: 1000,
                corpus_steps: 256,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    /// Largest error (identities) or largest relative excess (inequalities).
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            checked: 0,
            violations: 0,
            max_error: f64::NEG_INFINITY,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.checked > 0 && self.violations == 0
    }

    fn record(&mut self, err: f64) {
        self.checked += 1;
        if !(err <= self.tolerance) {
            self.violations += 1;
        }
        if err.is_nan() || err > self.max_error {
            self.max_error = if err.is_nan() { f64::INFINITY } else { err };
        }
    }

    /// `got` against `want` with tolerance scaled by `max(1, |want|)`.
    fn record_close(&mut self, got: f64, want: f64) {
        self.record((got - want).abs() / want.abs().max(1.0));
    }

    /// `lo ≤ x`, recorded as the relative excess `(lo - x)/max(|lo|, |x|)`.
    fn record_le(&mut self, lo: f64, x: f64) {
        let scale = lo.abs().max(x.abs()).max(f64::MIN_POSITIVE);
        self.record((lo - x) / scale);
    }

    fn merge(mut self, other: &Self) -> Self {
        self.checked += other.checked;
        self.violations += other.violations;
        if other.max_error > self.max_error || other.max_error.is_nan() {
            self.max_error = other.max_error;
        }
        self
    }
}

fn merge_all(name: &str, tol: f64, parts: impl IntoIterator<Item = CheckOutcome>) -> CheckOutcome {
    parts
        .into_iter()
        .fold(CheckOutcome::new(name, tol), |acc, p| acc.merge(&p))
}

fn beta_grid(p: &SpectrumParams, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| p.beta_minus + (p.beta_plus - p.beta_minus) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Closed-form identities of the exponent algebra on dense β, `1 - β` and `u` grids.
pub fn spectra_identities(kappas: &[f64], n: usize) -> Result<Vec<CheckOutcome>> {
    let tol = IDENTITY_TOL;
    let mut decomposition = CheckOutcome::new("rho = zeta + lambda*beta", tol);
    let mut endpoints = CheckOutcome::new("rho(beta_pm) = 2, rho(beta_hash) = 0", tol);
    let mut dim_star = CheckOutcome::new("d_{beta_*} = d", tol);
    let mut tip = CheckOutcome::new("F_tip(alpha) = d_{1-1/alpha}", tol);
    let mut forward = CheckOutcome::new("2 - rho_forward(u) = F_tip(u)", tol);
    let mut q_rel = CheckOutcome::new("(1-2q)/(1+2q) = beta", tol);
    let mut roundtrip = CheckOutcome::new("r(lambda(r)) = r", tol);

    for &kappa in kappas {
        let p = SpectrumParams::new(kappa)?;
        for beta in beta_grid(&p, n) {
            let e = ExponentPoint::from_beta(kappa, beta)?;
            decomposition.record_close(e.zeta + e.lambda * e.beta, e.rho);
            decomposition.record_close(rho_of_beta(kappa, beta)?, e.rho);
            q_rel.record_close((1.0 - 2.0 * e.q) / (1.0 + 2.0 * e.q), beta);
            roundtrip.record_close(r_of_lambda(kappa, e.lambda), e.r);
        }
        endpoints.record_close(rho_of_beta(kappa, p.beta_plus)?, 2.0);
        endpoints.record_close(rho_of_beta(kappa, p.beta_minus)?, 2.0);
        endpoints.record_close(rho_of_beta(kappa, p.beta_hash)?, 0.0);
        dim_star.record_close(dims_of_beta(kappa, p.beta_star)?.1, p.d);

        // α = 1/w with w = 1 - β resolved directly, so the grid reaches α_+
        // even when 1 - β_+ is below the spacing of doubles near 1.
        let w_lo = p.one_minus_beta_plus;
        let w_hi = 1.0 - p.beta_minus;
        for k in 0..n {
            let w = w_lo * (w_hi / w_lo).powf(k as f64 / (n - 1) as f64);
            let (_, d_beta) = two_minus_rho_parts(&p, w);
            tip.record_close(f_tip(kappa, 1.0 / w)?, d_beta);
        }

        if kappa < 8.0 {
            let x_lo: f64 = 1e-3;
            let x_hi = p.alpha_star - 0.5;
            for k in 0..n {
                let u = 0.5 + x_lo * (x_hi / x_lo).powf(k as f64 / (n - 1) as f64);
                let fe = forward_exponents(kappa, u)?;
                forward.record_close(2.0 - fe.rho_u, f_tip(kappa, u)?);
            }
        }
    }
    Ok(vec![decomposition, endpoints, dim_star, tip, forward, q_rel, roundtrip])
}

/// Central differences: `dζ/dλ = -β` and `dρ/dβ = λ`.
///
/// Errors are relative to `max(1, |target|)`. The `ζ(λ)` check stays
/// `1e-2` below `λ_c`, where `r(λ)` has a square-root branch point that a
/// step of `h` cannot resolve.
pub fn duality_checks(kappas: &[f64], n: usize, h: f64) -> Result<Vec<CheckOutcome>> {
    let mut zeta = CheckOutcome::new("d zeta / d lambda = -beta", DUALITY_TOL);
    let mut rho = CheckOutcome::new("d rho / d beta = lambda", DUALITY_TOL);
    for &kappa in kappas {
        let p = SpectrumParams::new(kappa)?;
        for beta in beta_grid(&p, n) {
            let e = ExponentPoint::from_beta(kappa, beta)?;
            let d_rho =
                (rho_of_beta(kappa, beta + h)? - rho_of_beta(kappa, beta - h)?) / (2.0 * h);
            rho.record_close(d_rho, e.lambda);
            if e.lambda + h <= p.lambda_c - 1e-2 {
                let up = ExponentPoint::from_lambda(kappa, e.lambda + h)?.zeta;
                let down = ExponentPoint::from_lambda(kappa, e.lambda - h)?.zeta;
                zeta.record_close((up - down) / (2.0 * h), -e.beta);
            }
        }
    }
    Ok(vec![zeta, rho])
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi / lo).ln()).exp()
}

/// `slit_forward ∘ slit_reverse` and `slit_reverse ∘ slit_forward` on random
/// `(z, v, a, dt)`. The error is relative to `max(|z|, |z - v|)`: the maps act
/// on `z - v`, so a point close to the origin but far from `v` carries the
/// rounding of `|z - v|`.
pub fn step_roundtrip(n: usize, seed: u64) -> CheckOutcome {
    use crate::loewner::{slit_forward, slit_reverse};
    let parts: Vec<CheckOutcome> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let mut out = CheckOutcome::new("step", STEP_ROUNDTRIP_TOL);
            let z = Complex64::new(rng.random_range(-4.0..4.0), log_uniform(&mut rng, 1e-4, 10.0));
            let v = rng.random_range(-2.0..2.0);
            let a = log_uniform(&mut rng, 0.25, 4.0);
            let dt = log_uniform(&mut rng, 1e-6, 1e-1);
            let there = slit_reverse(z, v, a, dt).and_then(|w| slit_forward(w, v, a, dt));
            let back = slit_forward(z, v, a, dt).and_then(|w| slit_reverse(w, v, a, dt));
            let scale = z.norm().max((z - v).norm());
            for r in [there, back] {
                out.record(r.map_or(f64::INFINITY, |w| (w - z).norm() / scale));
            }
            out
        })
        .collect();
    merge_all("forward/reverse per-step roundtrip", STEP_ROUNDTRIP_TOL, parts)
}

fn random_brownian_chain(seed: u64, index: u64, n_steps: usize) -> Result<(crate::DrivingPath, SlitMapChain)> {
    let mut rng = stream_rng(seed, index);
    let kappa = rng.random_range(0.5..7.5);
    let path = sample_brownian(kappa, n_steps, 1.0 / n_steps as f64, seed ^ (index << 20))?;
    let chain = SlitMapChain::from_path(&path);
    Ok((path, chain))
}

/// `g_T(f_T(w)) = w` through the whole chain for random `w`, on Brownian chains.
pub fn chain_roundtrip(n_chains: usize, n_steps: usize, seed: u64) -> Result<CheckOutcome> {
    let parts = (0..n_chains)
        .into_par_iter()
        .map(|i| {
            let (_, chain) = random_brownian_chain(seed, i as u64, n_steps)?;
            let mut rng = stream_rng(seed.wrapping_add(1), i as u64);
            let mut out = CheckOutcome::new("chain", CHAIN_ROUNDTRIP_TOL);
            for _ in 0..10 {
                let w = HalfPlanePoint::new(rng.random_range(-3.0..3.0), log_uniform(&mut rng, 1e-2, 3.0))?;
                let inv = inverse_map(&chain, w);
                let back = forward_flow_with(&chain, inv.value, chain.len(), 0.0);
                let wc = w.to_complex();
                out.record((back.value - wc).norm() / wc.norm());
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_all("full-chain inverse roundtrip", CHAIN_ROUNDTRIP_TOL, parts))
}

/// `h_{T,T}(z) = f̂_T(z) - V_T`, reverse flow against the composed inverse.
pub fn reverse_identity(n_chains: usize, n_steps: usize, seed: u64) -> Result<CheckOutcome> {
    let parts = (0..n_chains)
        .into_par_iter()
        .map(|i| {
            let (path, chain) = random_brownian_chain(seed, i as u64, n_steps)?;
            let mut rng = stream_rng(seed.wrapping_add(2), i as u64);
            let mut out = CheckOutcome::new("reverse", CHAIN_ROUNDTRIP_TOL);
            let m = rng.random_range(1..=n_steps);
            let z = HalfPlanePoint::new(rng.random_range(-1.0..1.0), log_uniform(&mut rng, 1e-2, 2.0))?;
            let rev = reverse_flow_tip(&path, path.time_at(m), z)?;
            let fhat = shifted_inverse(&chain, z.to_complex(), m)?;
            let vt = chain.driving_at(m);
            out.record((rev.value - (fhat.value - vt)).norm());
            out.record((rev.deriv - fhat.deriv).norm() / fhat.deriv.norm().max(1.0));
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_all("reverse-flow identity", CHAIN_ROUNDTRIP_TOL, parts))
}

/// Outcomes of the inequality suite plus the fitted lower Beurling constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub outcomes: Vec<CheckOutcome>,
    /// `min |f̂'(iy)|·√(2at+1)/y` over the corpus: the largest `c` with
    /// `c·y/√(2at+1) ≤ |f̂'(iy)|` everywhere.
    pub beurling_lower_constant: f64,
    pub chains: usize,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(CheckOutcome::passed) && self.beurling_lower_constant > 0.0
    }
}

const N_INEQ: usize = 9;
const INEQ_NAMES: [&str; N_INEQ] = [
    "Koebe distortion, horizontal",
    "Koebe growth, horizontal",
    "Koebe distortion, radial",
    "Koebe growth, radial",
    "derivative time-stability",
    "v >= y|f'|/2",
    "dyadic-sum bracketing",
    "upper Beurling bound",
    "tip Koebe-1/4 bracket",
];

const X_GRID: [f64; 8] = [-4.0, -2.0, -1.0, -0.25, 0.25, 1.0, 2.0, 4.0];
const R_GRID: [f64; 5] = [1.25, 1.5, 2.0, 3.0, 4.0];
/// Dyadic heights `2^0 … 2^-8`.
const N_HEIGHTS: i32 = 9;

fn chain_inequalities(chain: &SlitMapChain, rng: &mut impl Rng) -> Result<([CheckOutcome; N_INEQ], f64)> {
    let mut out: [CheckOutcome; N_INEQ] =
        std::array::from_fn(|k| CheckOutcome::new(INEQ_NAMES[k], INEQUALITY_SLACK));
    let [dist_h, growth_h, dist_r, growth_r, stability, half, bracket, beurling, tip] = &mut out;
    let mut c_min = f64::INFINITY;
    let a = chain.a();
    let f = |z: Complex64, k: usize| shifted_inverse(chain, z, k);
    let heights: Vec<f64> = (0..N_HEIGHTS).map(|j| 2f64.powi(-j)).collect();

    for _ in 0..2 {
        let k = rng.random_range(1..=chain.len());
        let t = chain.time_at(k);
        for &y in &heights {
            let base = f(Complex64::new(0.0, y), k)?;
            let d0 = base.deriv.norm();
            for &x in &X_GRID {
                let g = f(Complex64::new(y * x, y), k)?;
                let c = (x * x + 4.0).powi(2);
                dist_h.record_le(d0 / c, g.deriv.norm());
                dist_h.record_le(g.deriv.norm(), c * d0);
                let bound = (x * x + 4.0).powf(1.5) * x.abs() / 2.0 * y * d0;
                growth_h.record_le((g.value - base.value).norm(), bound);
            }
            for &r in &R_GRID {
                let g = f(Complex64::new(0.0, y * r), k)?;
                dist_r.record_le(d0 / r.powi(3), g.deriv.norm());
                dist_r.record_le(g.deriv.norm(), r * d0);
                growth_r.record_le((g.value - base.value).norm(), (r * r - 1.0) / 2.0 * y * d0);
            }
            beurling.record_le(d0, (2.0 * a * t + 1.0).sqrt() / y);
            c_min = c_min.min(d0 * (2.0 * a * t + 1.0).sqrt() / y);
        }

        // unshifted f_t at z = x + iy, compared with f_{t+s} for the next few steps
        for &y in &heights[..4] {
            let z = Complex64::new(chain.driving_at(0) + rng.random_range(-1.0..1.0), y);
            let at = |j: usize| f(Complex64::new(z.re - chain.driving_at(j), y), j);
            let d_t = at(k)?.deriv.norm();
            for j in [k + 1, k + 4, k + 16, k + 64] {
                if j > chain.len() {
                    break;
                }
                let s = chain.time_at(j) - t;
                let e = (5.0 * a * s / (y * y)).exp();
                let d_s = at(j)?.deriv.norm();
                stability.record_le(d_t / e, d_s);
                stability.record_le(d_s, e * d_t);
            }
        }

        let profile = tip_profile(chain, k, &heights)?;
        for (j, (&y, (&d, &v))) in heights
            .iter()
            .zip(profile.deriv_mod.iter().zip(&profile.v_cum))
            .enumerate()
        {
            half.record_le(y * d / 2.0, v);
            let sum = dyadic_sum(chain, k, j as u32)?;
            bracket.record_le(2.0 * v / 3.0, sum);
            bracket.record_le(sum, 8.0 * v / 3.0);
        }

        // γ(t) from a much lower height; its distance to the true tip is at most `err`
        let (gamma, err) = trace_point_with_bound(chain, k, Some(heights[N_HEIGHTS as usize - 1] * 1e-4))?;
        for (&y, (&d, &v)) in heights.iter().zip(profile.deriv_mod.iter().zip(&profile.v_cum)) {
            let dist = (gamma - f(Complex64::new(0.0, y), k)?.value).norm();
            tip.record_le(y * d / 4.0 - err, dist);
            tip.record_le(dist, v + err);
        }
    }
    Ok((out, c_min))
}

/// Koebe distortion and growth bounds, derivative time-stability, the arc-length
/// bounds and dyadic bracketing, the upper Beurling bound and the tip
/// Koebe-1/4 bracket over `n_chains` Brownian chains with random κ.
pub fn inequality_suite(n_chains: usize, n_steps: usize, seed: u64) -> Result<InequalityReport> {
    let parts = (0..n_chains)
        .into_par_iter()
        .map(|i| {
            let (_, chain) = random_brownian_chain(seed, i as u64, n_steps)?;
            let mut rng = stream_rng(seed.wrapping_add(3), i as u64);
            chain_inequalities(&chain, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let beurling_lower_constant = parts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let outcomes = (0..N_INEQ)
        .map(|k| merge_all(INEQ_NAMES[k], INEQUALITY_SLACK, parts.iter().map(|p| p.0[k].clone())))
        .collect();
    Ok(InequalityReport {
        outcomes,
        beurling_lower_constant,
        chains: n_chains,
    })
}

/// Every deterministic check at the given level.
pub fn run_checks(level: CheckLevel, seed: u64) -> Result<Vec<CheckOutcome>> {
    let sizes = level.sizes();
    let mut all = spectra_identities(&IDENTITY_KAPPAS, sizes.grid_points)?;
    all.extend(duality_checks(&IDENTITY_KAPPAS, sizes.grid_points, DUALITY_STEP)?);
    all.push(step_roundtrip(sizes.step_triples, seed));
    all.push(chain_roundtrip(sizes.roundtrip_chains, 1000, seed)?);
    all.push(reverse_identity(sizes.reverse_chains, 1000, seed)?);
    let ineq = inequality_suite(sizes.corpus_chains, sizes.corpus_steps, seed)?;
    let mut lower = CheckOutcome::new("lower Beurling constant > 0", 0.0);
    lower.record(-ineq.beurling_lower_constant);
    all.extend(ineq.outcomes);
    all.push(lower);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_all(outcomes: &[CheckOutcome]) {
        for o in outcomes {
            assert!(o.passed(), "{o:?}");
        }
    }

    #[test]
    fn identities_hold() {
        assert_all(&spectra_identities(&IDENTITY_KAPPAS, 201).unwrap());
    }

    #[test]
    fn duality_holds() {
        assert_all(&duality_checks(&IDENTITY_KAPPAS, 201, DUALITY_STEP).unwrap());
    }

    #[test]
    fn roundtrips_hold() {
        assert!(step_roundtrip(2000, 1).passed());
        assert!(chain_roundtrip(5, 500, 2).unwrap().passed());
        assert!(reverse_identity(5, 500, 3).unwrap().passed());
    }

    #[test]
    fn small_corpus_has_no_violations() {
        let report = inequality_suite(8, 128, 4).unwrap();
        assert_all(&report.outcomes);
        assert!(report.beurling_lower_constant > 0.0);
    }

    #[test]
    fn outcome_bookkeeping() {
        let mut o = CheckOutcome::new("x", 1e-3);
        assert!(!o.passed());
        o.record(1e-4);
        assert!(o.passed());
        o.record(f64::NAN);
        assert!(!o.passed());
        assert_eq!(o.max_error, f64::INFINITY);
        let mut le = CheckOutcome::new("le", 0.0);
        le.record_le(1.0, 2.0);
        le.record_le(2.0, 2.0);
        assert!(le.passed());
        le.record_le(2.0, 1.0);
        assert_eq!(le.violations, 1);
    }
}
