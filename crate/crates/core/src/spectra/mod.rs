//! Closed-form exponent algebra of the SLE_κ tip spectrum.
//!
//! Conventions: `a = 2/κ`, driving function a standard Brownian motion.
//! Expressions that cancel catastrophically near `κ = 8` or near the
//! endpoints `β_±` are evaluated in rationalised forms.

mod table;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub use table::{figure1_curves, spectrum_row, spectrum_table, Figure1Curve, SpectrumRow};

/// Relative slack used when checking that β lies in `[β_-, β_+]`.
const RANGE_SLACK: f64 = 1e-9;

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(LabError::param("kappa", format!("must be positive and finite, got {kappa}")));
    }
    Ok(())
}

/// `κ² + 4κ + 32 + 4κ√(8+κ)`, the common numerator/denominator of `1 - β_±`.
fn edge_poly(kappa: f64) -> f64 {
    kappa * kappa + 4.0 * kappa + 32.0 + 4.0 * kappa * (8.0 + kappa).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    pub kappa: f64,
    pub a: f64,
    /// `min(1 + κ/8, 2)`.
    pub d: f64,
    pub r_c: f64,
    pub r_star: f64,
    pub lambda_c: f64,
    pub beta_hash: f64,
    pub beta_star: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    pub alpha_minus: f64,
    pub alpha_star: f64,
    /// Infinite at `κ = 8`.
    pub alpha_plus: f64,
    /// `1 - β_+`, kept separately because it underflows the β scale near κ = 8.
    pub one_minus_beta_plus: f64,
}

impl SpectrumParams {
    pub fn new(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        let k4 = (kappa + 4.0) * (kappa + 4.0);
        let p = edge_poly(kappa);
        let sq = (8.0 + kappa).sqrt();
        let one_minus_beta_plus = (kappa - 8.0).powi(2) / p;
        let one_minus_beta_minus = p / k4;
        let beta_star = kappa / 4f64.max(kappa - 4.0) - 1.0;
        let alpha_star = if kappa <= 8.0 {
            4.0 / (8.0 - kappa)
        } else {
            (kappa - 4.0) / (kappa - 8.0)
        };
        Ok(Self {
            kappa,
            a: 2.0 / kappa,
            d: (1.0 + kappa / 8.0).min(2.0),
            r_c: 0.5 + 4.0 / kappa,
            r_star: (8.0 / kappa).min(1.0),
            lambda_c: 1.0 + 3.0 * kappa / 32.0 + 2.0 / kappa,
            beta_hash: -4.0 / (kappa + 4.0),
            beta_star,
            beta_plus: -1.0 + kappa * (12.0 + kappa + 4.0 * sq) / k4,
            beta_minus: -1.0 + kappa / (12.0 + kappa + 4.0 * sq),
            r_plus: 4.0 / kappa * (sq - 2.0),
            r_minus: 4.0 / kappa * (-2.0 - sq),
            alpha_minus: 1.0 / one_minus_beta_minus,
            alpha_star,
            alpha_plus: p / (kappa - 8.0).powi(2),
            one_minus_beta_plus,
        })
    }

    /// Optimal Hölder exponent `(1 - β_+)/2` of the path in capacity time.
    pub fn holder_exponent(&self) -> f64 {
        self.one_minus_beta_plus / 2.0
    }
}

/// One point of the `r ↦ (λ, ζ, β, ρ, q)` parametrisation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub r: f64,
    pub lambda: f64,
    pub zeta: f64,
    pub beta: f64,
    pub rho: f64,
    pub q: f64,
}

impl ExponentPoint {
    /// Exponents for `r ≤ r_c` (the endpoint corresponds to β = 1).
    pub fn from_r(kappa: f64, r: f64) -> Result<Self> {
        check_kappa(kappa)?;
        let r_c = 0.5 + 4.0 / kappa;
        if !(r <= r_c) {
            return Err(LabError::Range(format!("r = {r} exceeds r_c = {r_c}")));
        }
        let lambda = r * (1.0 + kappa / 4.0) - kappa * r * r / 8.0;
        let zeta = r - kappa * r * r / 8.0;
        let denom = 4.0 + kappa - kappa * r;
        let beta = (kappa * r - 4.0) / denom;
        let rho = kappa * kappa * r * r / (8.0 * denom);
        debug_assert!(
            (rho - (zeta + lambda * beta)).abs() <= 1e-9 * (1.0 + rho.abs()),
            "ρ(r) disagrees with ζ + λβ"
        );
        Ok(Self {
            r,
            lambda,
            zeta,
            beta,
            rho,
            q: r_c - r,
        })
    }

    /// Exponents for `λ ≤ λ_c`, using the root `r(λ)` on the bijective branch.
    pub fn from_lambda(kappa: f64, lambda: f64) -> Result<Self> {
        check_kappa(kappa)?;
        let lambda_c = 1.0 + 3.0 * kappa / 32.0 + 2.0 / kappa;
        if !(lambda <= lambda_c) {
            return Err(LabError::Range(format!(
                "λ = {lambda} exceeds λ_c = {lambda_c}"
            )));
        }
        Self::from_r(kappa, r_of_lambda(kappa, lambda)).map(|p| Self { lambda, ..p })
    }

    /// Exponents for `β ∈ (-1, 1]`.
    pub fn from_beta(kappa: f64, beta: f64) -> Result<Self> {
        check_kappa(kappa)?;
        if !(beta > -1.0 && beta <= 1.0) {
            return Err(LabError::Range(format!("β = {beta} outside (-1, 1]")));
        }
        let r = (4.0 + kappa - kappa / (beta + 1.0)) / kappa;
        let r_c = 0.5 + 4.0 / kappa;
        Self::from_r(kappa, r.min(r_c)).map(|p| Self { beta, ..p })
    }
}

/// `r(λ) = (4+κ - √((4+κ)² - 8λκ))/κ`, evaluated as `8λ/(4+κ+√(…))`.
pub fn r_of_lambda(kappa: f64, lambda: f64) -> f64 {
    let k = 4.0 + kappa;
    8.0 * lambda / (k + (k * k - 8.0 * lambda * kappa).sqrt())
}

/// `ρ(β) = κ/(8(β+1))·[((κ+4)/κ)(β+1) - 1]²`.
pub fn rho_of_beta(kappa: f64, beta: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if !(beta > -1.0) || !beta.is_finite() {
        return Err(LabError::Domain(format!("ρ(β) needs β > -1, got {beta}")));
    }
    let b = beta + 1.0;
    let m = (kappa + 4.0) * b - kappa;
    Ok(m * m / (8.0 * kappa * b))
}

/// `(2 - ρ)` and `(2 - ρ)/(1 - β)` written through `w = 1 - β`.
///
/// With `B = β + 1`, `2 - ρ = (κ+4)²(B - B_-)(w - δ)/(8κB)` where
/// `δ = 1 - β_+`; dividing by `w` gives a form with no 0/0 at `κ = 8, β = 1`.
pub(crate) fn two_minus_rho_parts(p: &SpectrumParams, w: f64) -> (f64, f64) {
    let k4 = (p.kappa + 4.0).powi(2);
    let b = 2.0 - w;
    let b_minus = p.beta_minus + 1.0;
    let delta = p.one_minus_beta_plus;
    let base = k4 * (b - b_minus) / (8.0 * p.kappa * b);
    let ratio = if delta == 0.0 { 1.0 } else { 1.0 - delta / w };
    (base * (w - delta), base * ratio)
}

fn check_beta_range(p: &SpectrumParams, beta: f64) -> Result<f64> {
    let slack = RANGE_SLACK * (1.0 + beta.abs());
    if !(beta >= p.beta_minus - slack && beta <= p.beta_plus + slack) {
        return Err(LabError::Range(format!(
            "β = {beta} outside [β_-, β_+] = [{}, {}]",
            p.beta_minus, p.beta_plus
        )));
    }
    Ok(beta.clamp(p.beta_minus, p.beta_plus))
}

/// `(d̂_β, d_β)` for `β ∈ [β_-, β_+]`. At `κ = 8, β = 1` the limit `d = 2` is returned.
///
/// Near κ = 8 the gap `1 - β_+` is below the spacing of doubles around 1, so
/// a β that rounds onto (or past) `β_+` is evaluated at `1 - β = 1 - β_+` exactly.
pub fn dims_of_beta(kappa: f64, beta: f64) -> Result<(f64, f64)> {
    let p = SpectrumParams::new(kappa)?;
    let beta = check_beta_range(&p, beta)?;
    let w = if beta >= p.beta_plus {
        p.one_minus_beta_plus
    } else {
        (1.0 - beta).max(p.one_minus_beta_plus)
    };
    let (two_minus_rho, dbeta) = two_minus_rho_parts(&p, w);
    Ok((two_minus_rho / 2.0, dbeta))
}

/// `F_tip(α) = d_{1-1/α}`, expanded as
/// `-(κ-8)²α/(16κ) + (3κ+8)(κ+8)/(32κ) - κ/(32(2α-1))`.
pub fn f_tip(kappa: f64, alpha: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if !(alpha > 0.5 && alpha.is_finite()) {
        return Err(LabError::Domain(format!("F_tip needs α > 1/2, got {alpha}")));
    }
    Ok(-(kappa - 8.0).powi(2) * alpha / (16.0 * kappa)
        + (3.0 * kappa + 8.0) * (kappa + 8.0) / (32.0 * kappa)
        - kappa / (32.0 * (2.0 * alpha - 1.0)))
}

/// Conjectured almost-sure bulk spectrum, for comparison plots only.
pub fn f_bulk(kappa: f64, alpha: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if !(alpha > 0.5 && alpha.is_finite()) {
        return Err(LabError::Domain(format!("F_bulk needs α > 1/2, got {alpha}")));
    }
    let c = (4.0 + kappa).powi(2) / (8.0 * kappa);
    Ok(alpha + c - c * alpha * alpha / (2.0 * alpha - 1.0))
}

/// `d(r) = 1 + (κ - κ²r²/8)/(8 + κ - 2κr)`.
pub fn dim_of_r(kappa: f64, r: f64) -> f64 {
    1.0 + (kappa - kappa * kappa * r * r / 8.0) / (8.0 + kappa - 2.0 * kappa * r)
}

/// Exponents of the forward-flow martingale indexed by `u > 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardExponents {
    pub u: f64,
    pub r_u: f64,
    pub lambda_u: f64,
    pub xi_u: f64,
    pub rho_u: f64,
}

impl ForwardExponents {
    pub fn martingale(&self) -> crate::loewner::MartingaleExponents {
        crate::loewner::MartingaleExponents {
            r: self.r_u,
            lambda: self.lambda_u,
            xi: self.xi_u,
        }
    }
}

/// `r = 1/2 - 2a - 1/(4u-2)`, `λ = r²/(2a) + r(1 - 1/(2a))`, `ξ = r²/(4a)` and
/// `ρ(u) = -(u-1)(λ+r) - (r+ξ)`, for `κ < 8`.
pub fn forward_exponents(kappa: f64, u: f64) -> Result<ForwardExponents> {
    check_kappa(kappa)?;
    if kappa >= 8.0 {
        return Err(LabError::Domain(format!("forward exponents need κ < 8, got {kappa}")));
    }
    if !(u > 0.5 && u.is_finite()) {
        return Err(LabError::Domain(format!("forward exponents need u > 1/2, got {u}")));
    }
    let a = 2.0 / kappa;
    let r = 0.5 - 2.0 * a - 1.0 / (4.0 * u - 2.0);
    let lambda = r * r / (2.0 * a) + r * (1.0 - 1.0 / (2.0 * a));
    let xi = r * r / (4.0 * a);
    let rho = -(u - 1.0) * (lambda + r) - (r + xi);
    Ok(ForwardExponents {
        u,
        r_u: r,
        lambda_u: lambda,
        xi_u: xi,
        rho_u: rho,
    })
}

/// The displayed closed form of `ρ(u)`.
pub fn forward_rho_closed_form(kappa: f64, u: f64) -> f64 {
    let a = 2.0 / kappa;
    let x = u - 0.5;
    (1.0 / (8.0 * a) + 2.0 * a - 1.0) * x + (0.5 - 1.0 / (8.0 * a)) + 1.0 / (32.0 * a * x)
}

#[cfg(test)]
mod tests;
