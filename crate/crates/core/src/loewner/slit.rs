//! Elementary vertical-slit maps.
//!
//! With the driving value held at `v` for capacity time `dt`, the chordal
//! Loewner equation `∂_t g = a / (g - v)` integrates in closed form to
//! `(g - v)² = (z - v)² + 2a·dt`; the reverse equation `∂_t h = a / (u - h)`
//! integrates to `(h - u)² = (z - u)² - 2a·dt`. Every map here is one of these
//! two closed forms, so compositions are exact up to rounding.

use num_complex::Complex64;

use crate::error::{LabError, Result};

/// Square root of `w` on the branch with nonnegative imaginary part.
///
/// When `w` is a positive real the root is real and its sign follows `sign`,
/// which lets real boundary points keep their side of the slit.
#[inline]
pub(crate) fn sqrt_upper(w: Complex64, sign: f64) -> Complex64 {
    let s = w.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && sign < 0.0) {
        -s
    } else {
        s
    }
}

/// Forward slit map and its derivative with `rc = √(2a·dt)` precomputed.
///
/// `(z - v)² + rc²` is evaluated as `(ζ - i·rc)(ζ + i·rc)` which avoids the
/// cancellation of the expanded form near the branch points.
#[inline]
pub(crate) fn forward_kernel(z: Complex64, v: f64, rc: f64) -> (Complex64, Complex64) {
    let zeta = Complex64::new(z.re - v, z.im);
    let w = Complex64::new(zeta.re, zeta.im - rc) * Complex64::new(zeta.re, zeta.im + rc);
    let s = sqrt_upper(w, zeta.re);
    (Complex64::new(s.re + v, s.im), zeta / s)
}

/// Reverse slit map and its derivative with `rc = √(2a·dt)` precomputed.
#[inline]
pub(crate) fn reverse_kernel(z: Complex64, u: f64, rc: f64) -> (Complex64, Complex64) {
    let zeta = Complex64::new(z.re - u, z.im);
    let w = Complex64::new(zeta.re - rc, zeta.im) * Complex64::new(zeta.re + rc, zeta.im);
    let s = sqrt_upper(w, zeta.re);
    (Complex64::new(s.re + u, s.im), zeta / s)
}

fn check_step(a: f64, dt: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(LabError::param("a", format!("must be positive and finite, got {a}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LabError::param("dt", format!("must be positive and finite, got {dt}")));
    }
    Ok(())
}

fn check_forward_input(z: Complex64, v: f64, a: f64, dt: f64) -> Result<()> {
    check_step(a, dt)?;
    if !v.is_finite() || !z.re.is_finite() || !z.im.is_finite() {
        return Err(LabError::param("z", "non-finite input"));
    }
    if z.im < 0.0 {
        return Err(LabError::Domain(format!("point {z} lies below the real axis")));
    }
    if z.im == 0.0 {
        let x = z.re - v;
        if x * x <= 2.0 * a * dt {
            return Err(LabError::Domain(format!(
                "boundary point {} is swallowed by the slit at {v} within the step",
                z.re
            )));
        }
    }
    Ok(())
}

/// `v + √((z - v)² + 2a·dt)` on the upper-half-plane branch.
pub fn slit_forward(z: Complex64, v: f64, a: f64, dt: f64) -> Result<Complex64> {
    check_forward_input(z, v, a, dt)?;
    Ok(forward_kernel(z, v, (2.0 * a * dt).sqrt()).0)
}

/// Complex derivative of [`slit_forward`]: `(z - v) / √((z - v)² + 2a·dt)`.
pub fn slit_forward_deriv(z: Complex64, v: f64, a: f64, dt: f64) -> Result<Complex64> {
    check_forward_input(z, v, a, dt)?;
    Ok(forward_kernel(z, v, (2.0 * a * dt).sqrt()).1)
}

/// `u + √((z - u)² - 2a·dt)` on the upper-half-plane branch.
///
/// Inverse of [`slit_forward`] with the same driving value; points move up.
pub fn slit_reverse(z: Complex64, u: f64, a: f64, dt: f64) -> Result<Complex64> {
    check_reverse_input(z, u, a, dt)?;
    Ok(reverse_kernel(z, u, (2.0 * a * dt).sqrt()).0)
}

/// Complex derivative of [`slit_reverse`].
pub fn slit_reverse_deriv(z: Complex64, u: f64, a: f64, dt: f64) -> Result<Complex64> {
    check_reverse_input(z, u, a, dt)?;
    Ok(reverse_kernel(z, u, (2.0 * a * dt).sqrt()).1)
}

fn check_reverse_input(z: Complex64, u: f64, a: f64, dt: f64) -> Result<()> {
    check_step(a, dt)?;
    if !u.is_finite() || !z.re.is_finite() || !z.im.is_finite() {
        return Err(LabError::param("z", "non-finite input"));
    }
    if z.im <= 0.0 {
        return Err(LabError::Domain(format!(
            "reverse slit map needs Im z > 0, got {z}"
        )));
    }
    Ok(())
}
