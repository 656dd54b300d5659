//! Pattern diagnostics: fringe extrema, visibility, and translation lag.

use crate::error::{invalid, Result};

/// Indices `i` with `v[i-1] < v[i] > v[i+1]`.
pub fn strict_local_maxima(v: &[f64]) -> Vec<usize> {
    (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1])
        .collect()
}

/// Indices `i` with `v[i-1] > v[i] < v[i+1]`.
pub fn strict_local_minima(v: &[f64]) -> Vec<usize> {
    (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] < v[i - 1] && v[i] < v[i + 1])
        .collect()
}

/// `(max - min) / (max + min)`; zero for an empty slice.
pub fn visibility(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if v.is_empty() || hi + lo == 0.0 {
        0.0
    } else {
        (hi - lo) / (hi + lo)
    }
}

/// Visibility of the samples whose abscissa lies in `[lo, hi]`.
pub fn window_visibility(xs: &[f64], v: &[f64], lo: f64, hi: f64) -> f64 {
    let window: Vec<f64> = xs
        .iter()
        .zip(v)
        .filter(|(x, _)| **x >= lo && **x <= hi)
        .map(|(_, y)| *y)
        .collect();
    visibility(&window)
}

/// Translation `L` for which `b(x) ~ a(x - L)`, both sampled on the same
/// uniform grid with spacing `step`.
///
/// The first differences of both curves are cross-correlated over integer
/// shifts up to `max_shift` samples; the peak is refined by a parabola through
/// its neighbours. Differencing removes the common saturation level so the
/// correlation is driven by the edge and its fringes.
pub fn correlation_lag(a: &[f64], b: &[f64], step: f64, max_shift: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(invalid("pattern", "curves must share a grid"));
    }
    if a.len() < 2 * max_shift + 3 {
        return Err(invalid("max_shift", "too large for the grid"));
    }
    let da: Vec<f64> = a.windows(2).map(|w| w[1] - w[0]).collect();
    let db: Vec<f64> = b.windows(2).map(|w| w[1] - w[0]).collect();
    let n = da.len() as isize;
    let shift = max_shift as isize;
    let corr = |k: isize| -> f64 {
        let lo = 0.max(-k);
        let hi = n.min(n - k);
        (lo..hi)
            .map(|i| da[i as usize] * db[(i + k) as usize])
            .sum()
    };
    let scores: Vec<f64> = (-shift..=shift).map(corr).collect();
    let best = scores
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    let mut offset = best as f64 - shift as f64;
    if best > 0 && best + 1 < scores.len() {
        let (l, c, r) = (scores[best - 1], scores[best], scores[best + 1]);
        let denom = l - 2.0 * c + r;
        if denom < 0.0 {
            offset += 0.5 * (l - r) / denom;
        }
    }
    Ok(offset * step)
}
