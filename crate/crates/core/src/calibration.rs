//! Affine calibration of the model pattern to counts, and the sigma scan.
//!
//! The model is fixed up to an overall scale, so counts are fitted as
//! `counts ~ scale * p12_normalized + background` by ordinary least squares.

use rayon::prelude::*;

use crate::diffraction::{edge_sweep, Method};
use crate::error::{invalid, Error, Result};
use crate::geometry::{SetupGeometry, SourceModel};

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Counts per unit normalized `p12`.
    pub scale: f64,
    /// Counts.
    pub background: f64,
    pub residual_sum_squares: f64,
    /// `n - 2`.
    pub degrees_of_freedom: usize,
    /// `counts - scale * model - background`, in input order.
    pub per_point_residuals: Vec<f64>,
    /// Normal-equation standard errors with variance `RSS / dof`.
    pub scale_std_error: f64,
    pub background_std_error: f64,
}

/// Least-squares `(scale, background)` minimizing
/// `sum (counts - scale * model - background)^2`.
///
/// The 2x2 normal equations are solved in centred form. A negative or zero
/// scale is returned as is (for example on signal-free data).
pub fn fit_scale_offset(model: &[f64], counts: &[f64]) -> Result<FitResult> {
    let n = model.len();
    if counts.len() != n {
        return Err(invalid(
            "counts",
            format!("length {} does not match model length {n}", counts.len()),
        ));
    }
    if n < 3 {
        return Err(invalid(
            "counts",
            format!("need at least 3 points, got {n}"),
        ));
    }
    if model.iter().chain(counts).any(|v| !v.is_finite()) {
        return Err(invalid("counts", "non-finite value"));
    }
    let nf = n as f64;
    let mean_p = model.iter().sum::<f64>() / nf;
    let mean_c = counts.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (p, c) in model.iter().zip(counts) {
        let dp = p - mean_p;
        sxx += dp * dp;
        sxy += dp * (c - mean_c);
    }
    let spread = model.iter().map(|p| p * p).sum::<f64>();
    if sxx <= 1e-24 * spread || sxx == 0.0 {
        return Err(Error::Singular("model vector is constant".into()));
    }
    let scale = sxy / sxx;
    let background = mean_c - scale * mean_p;
    let per_point_residuals: Vec<f64> = model
        .iter()
        .zip(counts)
        .map(|(p, c)| c - scale * p - background)
        .collect();
    let rss = per_point_residuals.iter().map(|r| r * r).sum::<f64>();
    let dof = n - 2;
    let variance = rss / dof as f64;
    Ok(FitResult {
        scale,
        background,
        residual_sum_squares: rss,
        degrees_of_freedom: dof,
        per_point_residuals,
        scale_std_error: (variance / sxx).sqrt(),
        background_std_error: (variance * (1.0 / nf + mean_p * mean_p / sxx)).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaScan {
    pub best_sigma: f64,
    pub best_index: usize,
    /// One fit per scanned sigma, in grid order.
    pub fits: Vec<FitResult>,
}

/// Fit the pattern at every `sigma` in `sigma_grid` and keep the one with the
/// smallest residual sum of squares. RSS values within `1e-12` of the total
/// sum of squares of each other count as ties, resolved toward smaller sigma.
///
/// `table` holds `(edge position, counts)` with strictly increasing edge
/// positions; `source` supplies the wavelength.
pub fn fit_sigma_scan(
    geometry: &SetupGeometry,
    source: &SourceModel,
    table: &[(f64, f64)],
    sigma_grid: &[f64],
    method: Method,
) -> Result<SigmaScan> {
    if sigma_grid.is_empty() {
        return Err(invalid("sigma_grid", "empty"));
    }
    if sigma_grid.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(invalid("sigma_grid", "all values must be finite and > 0"));
    }
    if sigma_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("sigma_grid", "must be strictly increasing"));
    }
    let edges: Vec<f64> = table.iter().map(|r| r.0).collect();
    let counts: Vec<f64> = table.iter().map(|r| r.1).collect();
    let fits = sigma_grid
        .par_iter()
        .map(|&sigma| {
            let pattern = edge_sweep(geometry, &source.with_sigma(sigma)?, &edges, method)?;
            fit_scale_offset(&pattern.normalized(), &counts)
        })
        .collect::<Result<Vec<_>>>()?;

    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let total = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>();
    let min_rss = fits
        .iter()
        .map(|f| f.residual_sum_squares)
        .fold(f64::INFINITY, f64::min);
    let best_index = fits
        .iter()
        .position(|f| f.residual_sum_squares <= min_rss + 1e-12 * total)
        .expect("at least one fit");
    Ok(SigmaScan {
        best_sigma: sigma_grid[best_index],
        best_index,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffraction::linspace;
    use proptest::prelude::*;

    fn model() -> Vec<f64> {
        (0..20)
            .map(|i| ((i as f64) * 0.7).sin() + 0.1 * i as f64)
            .collect()
    }

    #[test]
    fn exact_affine_data() {
        let p = model();
        let c: Vec<f64> = p.iter().map(|p| 5.0 * p + 7.0).collect();
        let f = fit_scale_offset(&p, &c).unwrap();
        assert!((f.scale - 5.0).abs() < 1e-12);
        assert!((f.background - 7.0).abs() < 1e-12);
        assert!(f.residual_sum_squares < 1e-20);
        assert_eq!(f.degrees_of_freedom, 18);
        let f = fit_scale_offset(&p, &p).unwrap();
        assert!((f.scale - 1.0).abs() < 1e-14 && f.background.abs() < 1e-14);
        assert!(f.residual_sum_squares < 1e-25);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            fit_scale_offset(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::Singular(_))
        ));
        assert!(fit_scale_offset(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_scale_offset(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        assert!(fit_scale_offset(&[1.0, 2.0, f64::NAN], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn standard_errors_match_textbook_line_fit() {
        // y = 2x + 1 with residuals +1, -1, -1, +1 at x = 0..3
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [2.0, 2.0, 4.0, 8.0];
        let f = fit_scale_offset(&x, &y).unwrap();
        // sxx = 5, sxy = 10 -> slope 2, intercept 4 - 3 = 1, rss = 4
        assert!((f.scale - 2.0).abs() < 1e-14);
        assert!((f.background - 1.0).abs() < 1e-14);
        assert!((f.residual_sum_squares - 4.0).abs() < 1e-12);
        assert!((f.scale_std_error - (2.0f64 / 5.0).sqrt()).abs() < 1e-14);
        assert!((f.background_std_error - (2.0 * (0.25 + 2.25 / 5.0f64)).sqrt()).abs() < 1e-14);
    }

    fn lab() -> (SetupGeometry, SourceModel) {
        (
            SetupGeometry::laboratory(1.52e-3),
            SourceModel::laboratory(),
        )
    }

    #[test]
    fn single_sigma_scan() {
        let (g, s) = lab();
        let edges = linspace(-1e-3, 4e-3, 30).unwrap();
        let pat = edge_sweep(&g, &s, &edges, Method::ClosedForm).unwrap();
        let table: Vec<(f64, f64)> = edges
            .iter()
            .zip(pat.normalized())
            .map(|(e, p)| (*e, 100.0 * p))
            .collect();
        let scan = fit_sigma_scan(&g, &s, &table, &[1.1e-3], Method::ClosedForm).unwrap();
        assert_eq!(scan.best_sigma, 1.1e-3);
        assert_eq!(scan.fits.len(), 1);
    }

    #[test]
    fn flat_counts_tie_toward_smallest_sigma() {
        let (g, s) = lab();
        let edges = linspace(-1e-3, 4e-3, 30).unwrap();
        let table: Vec<(f64, f64)> = edges.iter().map(|e| (*e, 50.0)).collect();
        let grid = [0.7e-3, 0.8e-3, 0.9e-3];
        let scan = fit_sigma_scan(&g, &s, &table, &grid, Method::ClosedForm).unwrap();
        assert_eq!(scan.best_index, 0);
        for f in &scan.fits {
            assert_eq!(f.residual_sum_squares, 0.0);
        }
    }

    #[test]
    fn sigma_scan_validates_grid() {
        let (g, s) = lab();
        let table = [(0.0, 1.0), (1e-3, 2.0), (2e-3, 3.0)];
        assert!(fit_sigma_scan(&g, &s, &table, &[], Method::ClosedForm).is_err());
        assert!(fit_sigma_scan(&g, &s, &table, &[1e-3, 1e-3], Method::ClosedForm).is_err());
        assert!(fit_sigma_scan(&g, &s, &table, &[-1e-3], Method::ClosedForm).is_err());
    }

    fn data() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0..1.0f64, 0.0..1000.0f64), 5..40).prop_filter(
            "model must vary",
            |v| {
                let lo = v.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
                let hi = v.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
                hi - lo > 1e-3
            },
        )
    }

    fn close(a: f64, b: f64, scale: f64) -> bool {
        (a - b).abs() <= 1e-9 * scale.max(1.0)
    }

    proptest! {
        #[test]
        fn permutation_invariant(rows in data(), rot in 0usize..40) {
            let (p, c): (Vec<f64>, Vec<f64>) = rows.iter().cloned().unzip();
            let k = rot % p.len();
            let (mut p2, mut c2) = (p.clone(), c.clone());
            p2.rotate_left(k);
            c2.rotate_left(k);
            p2.reverse();
            c2.reverse();
            let a = fit_scale_offset(&p, &c).unwrap();
            let b = fit_scale_offset(&p2, &c2).unwrap();
            let mag = a.scale.abs() + a.background.abs();
            prop_assert!(close(a.scale, b.scale, mag));
            prop_assert!(close(a.background, b.background, mag));
            prop_assert!(close(a.residual_sum_squares, b.residual_sum_squares, a.residual_sum_squares));
        }

        #[test]
        fn scaling_counts(rows in data(), alpha in 0.01..100.0f64) {
            let (p, c): (Vec<f64>, Vec<f64>) = rows.iter().cloned().unzip();
            let cs: Vec<f64> = c.iter().map(|c| alpha * c).collect();
            let a = fit_scale_offset(&p, &c).unwrap();
            let b = fit_scale_offset(&p, &cs).unwrap();
            let mag = alpha * (a.scale.abs() + a.background.abs());
            prop_assert!(close(b.scale, alpha * a.scale, mag));
            prop_assert!(close(b.background, alpha * a.background, mag));
            let rss = alpha * alpha * a.residual_sum_squares;
            prop_assert!(close(b.residual_sum_squares, rss, rss));
        }

        #[test]
        fn shifting_counts(rows in data(), shift in -500.0..500.0f64) {
            let (p, c): (Vec<f64>, Vec<f64>) = rows.iter().cloned().unzip();
            let cs: Vec<f64> = c.iter().map(|c| c + shift).collect();
            let a = fit_scale_offset(&p, &c).unwrap();
            let b = fit_scale_offset(&p, &cs).unwrap();
            let mag = a.scale.abs() + a.background.abs() + shift.abs();
            prop_assert!(close(b.scale, a.scale, mag));
            prop_assert!(close(b.background, a.background + shift, mag));
        }
    }
}
