//! Cumulative integrals of Gaussian chirps,
//! `F(upper) = int_{-inf}^{upper} exp(-a y^2 + b y + c) dy` with `Re a > 0`.
//!
//! Two independent evaluations:
//!
//! * [`GaussianChirp::cumulative`]: closed form through the Faddeeva function,
//!   `F = (1/2) sqrt(pi/a) exp(c + b^2/(4a)) erfc(sqrt(a) (m - upper))`,
//!   `m = b/(2a)`, principal branch of `sqrt(a)`.
//! * [`GaussianChirp::cumulative_quad`]: adaptive quadrature only. On the real
//!   axis when the chirp is short enough and the result does not cancel;
//!   otherwise along the steepest-descent contour from `upper`.

use num_complex::Complex64;

use super::faddeeva::erfcx_right;
use super::quadrature::{integrate_complex, integrate_complex_with, QuadOptions};
use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;
const MAX_EXP: f64 = 700.0;

/// Envelope level below which the real-axis integrand is dropped.
pub const ENVELOPE_CUTOFF: f64 = 1e-16;

/// Largest total chirp phase, radians, attempted on the real axis.
pub const REAL_AXIS_PHASE_BUDGET: f64 = 1.0e4;

/// Panel cap for the real-axis attempt.
const REAL_AXIS_MAX_PANELS: usize = 60_000;

/// Upper limit of the Laplace variable on the descent contour.
const LAPLACE_CUTOFF: f64 = 50.0;

/// Integrand `exp(-a y^2 + b y + c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChirp {
    a: Complex64,
    b: Complex64,
    c: Complex64,
}

/// Which path the quadrature evaluation took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChirpRoute {
    /// Nothing left above the envelope cutoff.
    Empty,
    RealAxis,
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpQuadrature {
    pub value: Complex64,
    pub route: ChirpRoute,
    pub evaluations: usize,
}

fn checked_exp(e: Complex64, what: &str) -> Result<Complex64> {
    if e.re > MAX_EXP {
        return Err(Error::Range(format!("exp({e}) overflows in {what}")));
    }
    Ok(e.exp())
}

impl GaussianChirp {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !(finite(a) && finite(b) && finite(c)) {
            return Err(Error::Domain(format!(
                "non-finite coefficients a={a}, b={b}, c={c}"
            )));
        }
        if a.re <= 0.0 {
            return Err(Error::Domain(format!("Re(a) must be > 0, got a = {a}")));
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }
    pub fn b(&self) -> Complex64 {
        self.b
    }
    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn exponent(&self, y: f64) -> Complex64 {
        (-self.a * y + self.b) * y + self.c
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        self.exponent(y).exp()
    }

    /// Stationary point `b/(2a)` of the exponent.
    pub fn saddle(&self) -> Complex64 {
        self.b / (2.0 * self.a)
    }

    /// Exponent at the saddle, `c + b^2/(4a)`.
    fn peak_exponent(&self) -> Complex64 {
        self.c + self.b * self.b / (4.0 * self.a)
    }

    /// `d/dy Im(exponent)`.
    pub fn phase_rate(&self, y: f64) -> f64 {
        (-2.0 * self.a * y + self.b).im
    }

    /// Center and 1/e half-width of `|integrand|` on the real axis.
    pub fn envelope(&self) -> (f64, f64) {
        (self.b.re / (2.0 * self.a.re), 1.0 / self.a.re.sqrt())
    }

    /// `int |integrand| dy` over the real line.
    pub fn envelope_integral(&self) -> f64 {
        let (center, width) = self.envelope();
        SQRT_PI * width * self.exponent(center).re.exp()
    }

    /// Integral over the whole real line, `sqrt(pi/a) exp(c + b^2/(4a))`.
    pub fn full_line(&self) -> Result<Complex64> {
        let sa = self.a.sqrt();
        Ok(SQRT_PI / sa * checked_exp(self.peak_exponent(), "full-line integral")?)
    }

    /// Closed-form cumulative integral up to `upper` (may be infinite).
    pub fn cumulative(&self, upper: f64) -> Result<Complex64> {
        if upper.is_nan() {
            return Err(Error::Domain("upper limit is NaN".into()));
        }
        if upper == f64::INFINITY {
            return self.full_line();
        }
        if upper == f64::NEG_INFINITY {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let sa = self.a.sqrt();
        let z = sa * (self.saddle() - upper);
        let half = 0.5 * SQRT_PI / sa;
        let at_upper = self.exponent(upper);
        if z.re >= 0.0 {
            // erfc(z) exp(peak) = w(iz) exp(exponent(upper))
            if at_upper.re < -MAX_EXP {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok(half * checked_exp(at_upper, "cumulative integral")? * erfcx_right(z))
        } else {
            let full = self.full_line()?;
            let tail = if at_upper.re < -MAX_EXP {
                Complex64::new(0.0, 0.0)
            } else {
                half * checked_exp(at_upper, "cumulative integral")? * erfcx_right(-z)
            };
            Ok(full - tail)
        }
    }

    /// Cumulative integral by quadrature, without special functions.
    ///
    /// The real-axis attempt integrates over the part of `(-inf, upper]` where
    /// the envelope exceeds [`ENVELOPE_CUTOFF`] of its peak, with panels
    /// limited to `pi/4` of chirp phase. It is accepted when the total phase is
    /// within [`REAL_AXIS_PHASE_BUDGET`] and rounding on the cancelling sum
    /// stays below `1e-11` of the result; otherwise the contour route is used.
    pub fn cumulative_quad(&self, upper: f64) -> Result<ChirpQuadrature> {
        if upper.is_nan() {
            return Err(Error::Domain("upper limit is NaN".into()));
        }
        let (center, width) = self.envelope();
        let reach = width * (-ENVELOPE_CUTOFF.ln()).sqrt();
        let lo = center - reach;
        let hi = upper.min(center + reach);
        if hi <= lo {
            return Ok(ChirpQuadrature {
                value: Complex64::new(0.0, 0.0),
                route: ChirpRoute::Empty,
                evaluations: 0,
            });
        }
        let mut evaluations = 0;
        if self.total_phase(lo, hi) <= REAL_AXIS_PHASE_BUDGET {
            let scale = self.envelope_integral();
            let opts = QuadOptions {
                max_panels: REAL_AXIS_MAX_PANELS,
                ..QuadOptions::with_tolerances(1e-15 * scale, 1e-12)
            };
            let rate = |y: f64| self.phase_rate(y);
            match integrate_complex_with(|y| self.eval(y), lo, hi, &opts, Some(&rate)) {
                Ok(r) => {
                    evaluations += r.evaluations;
                    let panels = (r.evaluations / 15).max(1) as f64;
                    let rounding = 8.0 * f64::EPSILON * scale * panels.sqrt();
                    if rounding + r.abs_error_estimate <= 1e-11 * r.value.norm() {
                        return Ok(ChirpQuadrature {
                            value: r.value,
                            route: ChirpRoute::RealAxis,
                            evaluations,
                        });
                    }
                }
                // phase rounding on long chirps can keep the estimate above
                // tolerance; the contour does not have that problem
                Err(Error::NotConverged { evaluations: n, .. }) => evaluations += n,
                Err(e) => return Err(e),
            }
        }
        let (value, n) = self.contour(upper)?;
        Ok(ChirpQuadrature {
            value,
            route: ChirpRoute::Contour,
            evaluations: evaluations + n,
        })
    }

    fn total_phase(&self, lo: f64, hi: f64) -> f64 {
        // |phase_rate| is piecewise linear; integrate it exactly
        let slope = -2.0 * self.a.im;
        let r0 = self.phase_rate(lo);
        let r1 = self.phase_rate(hi);
        if slope == 0.0 || r0.signum() == r1.signum() {
            0.5 * (r0.abs() + r1.abs()) * (hi - lo)
        } else {
            let root = lo + r0.abs() / slope.abs();
            0.5 * r0.abs() * (root - lo) + 0.5 * r1.abs() * (hi - root)
        }
    }

    /// Substitute `w = sqrt(a) (y - m)`, which maps the integral onto
    /// `exp(peak)/sqrt(a) int_{-inf}^{W} exp(-w^2) dw`, and integrate along a
    /// path that avoids oscillation:
    ///
    /// * small `|W|`, or `W` close to the imaginary axis: straight segment
    ///   from 0 to `W` plus the half line `(-inf, 0]`;
    /// * otherwise the steepest-descent path `w^2 = W^2 + tau`, `tau >= 0`,
    ///   which ends in the left valley when `Re W < 0` and in the right one
    ///   when `Re W > 0` (then the full line is subtracted).
    fn contour(&self, upper: f64) -> Result<(Complex64, usize)> {
        if upper == f64::NEG_INFINITY {
            return Ok((Complex64::new(0.0, 0.0), 0));
        }
        let sa = self.a.sqrt();
        let peak = self.peak_exponent();
        if upper == f64::INFINITY {
            let full = self.full_line_quad()?;
            return Ok((full.0, full.1));
        }
        let w_up = sa * (upper - self.saddle());
        let w2 = w_up * w_up;
        let at_upper = self.exponent(upper);

        if w_up.norm() <= 2.0 || (w2.re < 0.0 && w2.im.abs() < 4.0) {
            let scale = peak.re.max(at_upper.re);
            if scale > MAX_EXP {
                return Err(Error::Range(format!(
                    "exp({scale}) overflows on the contour"
                )));
            }
            let tol = 1e-15 * scale.exp() * (1.0 + w_up.norm());
            let seg = integrate_complex(
                |t| (peak - w2 * (t * t)).exp(),
                0.0,
                1.0,
                tol.max(f64::MIN_POSITIVE),
                1e-13,
            )?;
            let half_line = 0.5 * SQRT_PI * checked_exp(peak, "contour")?;
            return Ok(((half_line + w_up * seg.value) / sa, seg.evaluations));
        }

        let tol = 1e-16 / (1.0 + w_up.norm());
        let laplace = integrate_complex(
            |tau| (-tau).exp() / (2.0 * (w2 + tau).sqrt()),
            0.0,
            LAPLACE_CUTOFF,
            tol,
            1e-13,
        )?;
        let tail = if at_upper.re < -MAX_EXP {
            Complex64::new(0.0, 0.0)
        } else {
            checked_exp(at_upper, "contour")? * laplace.value / sa
        };
        if w_up.re < 0.0 {
            Ok((tail, laplace.evaluations))
        } else {
            let (full, n) = self.full_line_quad()?;
            Ok((full - tail, laplace.evaluations + n))
        }
    }

    /// Full-line integral along the steepest-descent line through the saddle,
    /// `exp(peak)/sqrt(a) int exp(-t^2) dt`.
    fn full_line_quad(&self) -> Result<(Complex64, usize)> {
        let sa = self.a.sqrt();
        let g = integrate_complex(
            |t| Complex64::new((-t * t).exp(), 0.0),
            -9.0,
            9.0,
            1e-17,
            1e-14,
        )?;
        Ok((
            checked_exp(self.peak_exponent(), "full-line integral")? * g.value / sa,
            g.evaluations,
        ))
    }
}

/// Closed-form `int_{-inf}^{upper} exp(-a y^2 + b y + c) dy`.
pub fn gaussian_chirp_cumulative(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    upper: f64,
) -> Result<Complex64> {
    GaussianChirp::new(a, b, c)?.cumulative(upper)
}
