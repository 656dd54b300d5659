//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands of one
//! real variable.
//!
//! Panel rule: 15-point Kronrod with the embedded 7-point Gauss rule; the
//! error estimate of a panel is `|K15 - G7|`. The panel with the largest
//! estimate is bisected until the summed estimate drops below
//! `max(tol_abs, tol_rel * |value|)`, or below the rounding floor
//! `50 eps int |f|` when the requested tolerance is tighter than that.
//!
//! For chirped integrands the caller can supply the local phase rate
//! `dphi/dx`; the interval is then pre-split so that no panel advances more
//! than `max_phase_per_panel` radians (evaluated at the panel midpoint).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const ROUNDING_FLOOR: f64 = 50.0 * f64::EPSILON;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Bisection depth below which a panel may not be split further.
    pub max_depth: u32,
    /// Hard cap on the number of live panels.
    pub max_panels: usize,
    /// Phase budget per panel, radians; only used with a phase-rate callback.
    pub max_phase_per_panel: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            tol_abs: 1e-13,
            tol_rel: 1e-12,
            max_depth: 48,
            max_panels: 1 << 20,
            max_phase_per_panel: std::f64::consts::FRAC_PI_4,
        }
    }
}

impl QuadOptions {
    pub fn with_tolerances(tol_abs: f64, tol_rel: f64) -> Self {
        Self {
            tol_abs,
            tol_rel,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    /// Kronrod estimate of `int |f|`, the scale for rounding error.
    magnitude: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Max-heap on error; ties resolved by position so the order is total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn sample<F: Fn(f64) -> Complex64>(f: &F, x: f64) -> Result<Complex64> {
    let v = f(x);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand { abscissa: x })
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, depth: u32) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = sample(f, center)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut m = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (lo, hi) = (sample(f, center - dx)?, sample(f, center + dx)?);
        let s = lo + hi;
        m += (lo.norm() + hi.norm()) * WGK[j];
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let value = k * half;
    let error = ((k - g) * half).norm();
    Ok(Panel {
        a,
        b,
        value,
        error,
        magnitude: m * half.abs(),
        depth,
    })
}

/// Integrate `f` over `[a, b]` with default depth and panel limits.
pub fn integrate_complex<F>(
    f: F,
    a: f64,
    b: f64,
    tol_abs: f64,
    tol_rel: f64,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    integrate_complex_with(
        f,
        a,
        b,
        &QuadOptions::with_tolerances(tol_abs, tol_rel),
        None,
    )
}

/// Integrate `f` over `[a, b]`. When `phase_rate` is given, the initial
/// partition respects `opts.max_phase_per_panel`.
pub fn integrate_complex_with<F>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
    phase_rate: Option<&dyn Fn(f64) -> f64>,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("limits", format!("must be finite, got [{a}, {b}]")));
    }
    if a > b {
        return Err(invalid("limits", format!("require a <= b, got [{a}, {b}]")));
    }
    if !(opts.tol_abs > 0.0 && opts.tol_rel > 0.0) {
        return Err(invalid("tolerance", "tolerances must be > 0"));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: Complex64::new(0.0, 0.0),
            abs_error_estimate: 0.0,
            evaluations: 0,
        });
    }

    let mut seeds = vec![(a, b, 0u32)];
    if let Some(rate) = phase_rate {
        seeds = phase_partition(a, b, rate, opts)?;
    }

    let mut heap = BinaryHeap::with_capacity(seeds.len() * 2);
    let mut evaluations = 0usize;
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    let mut total_mag = 0.0;
    for (pa, pb, depth) in seeds {
        let p = kronrod(&f, pa, pb, depth)?;
        evaluations += 15;
        total += p.value;
        total_err += p.error;
        total_mag += p.magnitude;
        heap.push(p);
    }
    let target = |value: Complex64, magnitude: f64| {
        opts.tol_abs
            .max(opts.tol_rel * value.norm())
            .max(ROUNDING_FLOOR * magnitude)
    };

    loop {
        if total_err <= target(total, total_mag) {
            // running sums drift; confirm against a fresh sum
            let (v, e, m) = resum(&heap);
            total = v;
            total_err = e;
            total_mag = m;
            if total_err <= target(total, total_mag) {
                break;
            }
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if worst.depth >= opts.max_depth
            || heap.len() + 2 > opts.max_panels
            || mid <= worst.a
            || mid >= worst.b
        {
            heap.push(worst);
            let (v, e, _) = resum(&heap);
            return Err(Error::NotConverged {
                estimate: v,
                abs_error: e,
                evaluations,
            });
        }
        let left = kronrod(&f, worst.a, mid, worst.depth + 1)?;
        let right = kronrod(&f, mid, worst.b, worst.depth + 1)?;
        evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_mag += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);
    }

    Ok(QuadratureResult {
        value: total,
        abs_error_estimate: total_err,
        evaluations,
    })
}

/// Sum panels in left-to-right order so the result does not depend on the
/// refinement history.
fn resum(heap: &BinaryHeap<Panel>) -> (Complex64, f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels
        .iter()
        .fold((Complex64::new(0.0, 0.0), 0.0, 0.0), |(v, e, m), p| {
            (v + p.value, e + p.error, m + p.magnitude)
        })
}

fn phase_partition(
    a: f64,
    b: f64,
    rate: &dyn Fn(f64) -> f64,
    opts: &QuadOptions,
) -> Result<Vec<(f64, f64, u32)>> {
    let mut out = Vec::new();
    let mut stack = vec![(a, b, 0u32)];
    while let Some((pa, pb, depth)) = stack.pop() {
        let mid = 0.5 * (pa + pb);
        let advance = rate(mid).abs() * (pb - pa);
        if !advance.is_finite() {
            return Err(Error::NonFiniteIntegrand { abscissa: mid });
        }
        if advance > opts.max_phase_per_panel && depth < opts.max_depth {
            if out.len() + stack.len() + 2 > opts.max_panels {
                return Err(invalid(
                    "phase_rate",
                    format!(
                        "chirp needs more than {} panels on [{a}, {b}]",
                        opts.max_panels
                    ),
                ));
            }
            // right half pushed first so panels come out left to right
            stack.push((mid, pb, depth + 1));
            stack.push((pa, mid, depth + 1));
        } else {
            out.push((pa, pb, depth));
        }
    }
    Ok(out)
}
