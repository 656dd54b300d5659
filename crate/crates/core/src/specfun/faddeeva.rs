//! Faddeeva function `w(z) = exp(-z^2) erfc(-iz)` and the complex
//! complementary error function built on it.
//!
//! Upper half plane, two regimes split at `|z| = SWITCH_RADIUS`:
//!
//! * inside: trapezoidal rule on `w(z) = (i/pi) int exp(-t^2)/(z - t) dt`
//!   with step `h = 0.5` and the pole correction
//!   `2 exp(-z^2) / (1 -/+ exp(-2 pi i z / h))`, applied while
//!   `Im z < pi/h`. The discretization error is of order `exp(-pi^2/h^2)`
//!   (about 1e-17). When `Re z` lies within `h/4` of a node the grid is
//!   shifted by `h/2` so the pole term and the sum never nearly cancel.
//! * outside: Laplace continued fraction
//!   `w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))`
//!   evaluated backward with a fixed depth.
//!
//! The lower half plane uses `w(z) = 2 exp(-z^2) - w(-z)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Radius at which evaluation switches from the trapezoidal sum to the
/// continued fraction.
pub const SWITCH_RADIUS: f64 = 8.0;

const STEP: f64 = 0.5;
const NODES: i32 = 15;
const CF_DEPTH: u32 = 40;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const MAX_EXP: f64 = 700.0;

fn check_finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(invalid("z", format!("must be finite, got {z}")))
    }
}

/// `w(z)` for finite `z`. Fails with a range error where `w` overflows
/// (deep in the lower half plane).
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    check_finite(z)?;
    if z.im >= 0.0 {
        return Ok(faddeeva_upper(z));
    }
    // w(z) = 2 exp(-z^2) - w(-z)
    let e = -(z * z);
    if e.re > MAX_EXP {
        return Err(Error::Range(format!("w({z}) overflows")));
    }
    Ok(2.0 * e.exp() - faddeeva_upper(-z))
}

fn faddeeva_upper(z: Complex64) -> Complex64 {
    debug_assert!(z.im >= 0.0);
    if z == Complex64::new(0.0, 0.0) {
        // the nodal sum leaves a residue of order 1e-17 in the imaginary part
        return Complex64::new(1.0, 0.0);
    }
    if z.norm() >= SWITCH_RADIUS {
        continued_fraction(z)
    } else {
        trapezoid(z)
    }
}

fn continued_fraction(z: Complex64) -> Complex64 {
    let mut r = Complex64::new(0.0, 0.0);
    for k in (1..=CF_DEPTH).rev() {
        r = (0.5 * k as f64) / (z - r);
    }
    Complex64::new(0.0, FRAC_1_SQRT_PI) / (z - r)
}

fn trapezoid(z: Complex64) -> Complex64 {
    let frac = z.re / STEP - (z.re / STEP).round();
    let shifted = frac.abs() < 0.25;
    let offset = if shifted { 0.5 } else { 0.0 };

    let mut sum = Complex64::new(0.0, 0.0);
    for n in -NODES..NODES {
        let t = (n as f64 + offset) * STEP;
        sum += (-t * t).exp() / (z - t);
    }
    let mut w = sum * Complex64::new(0.0, STEP / PI);

    if z.im < PI / STEP {
        let e = (Complex64::new(0.0, -2.0 * PI / STEP) * z).exp();
        let denom = if shifted { 1.0 + e } else { 1.0 - e };
        w += 2.0 * (-(z * z)).exp() / denom;
    }
    w
}

/// Complementary error function `erfc(z) = exp(-z^2) w(iz)` for
/// `Re z >= 0`, and `2 - erfc(-z)` otherwise.
pub fn erfc_complex(z: Complex64) -> Result<Complex64> {
    check_finite(z)?;
    if z.re >= 0.0 {
        Ok(erfc_right(z))
    } else {
        Ok(2.0 - erfc_right(-z))
    }
}

fn erfc_right(z: Complex64) -> Complex64 {
    debug_assert!(z.re >= 0.0);
    let iz = Complex64::new(-z.im, z.re);
    let damp = (-(z * z)).exp();
    if damp == Complex64::new(0.0, 0.0) {
        return damp;
    }
    damp * faddeeva_upper(iz)
}

/// Scaled form `exp(z^2) erfc(z) = w(iz)` for `Re z >= 0`. Never overflows.
pub(crate) fn erfcx_right(z: Complex64) -> Complex64 {
    debug_assert!(z.re >= 0.0);
    faddeeva_upper(Complex64::new(-z.im, z.re))
}
