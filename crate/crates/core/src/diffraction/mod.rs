//! Coincidence diffraction model.
//!
//! With the edge at `edge`, photon 2 is transmitted for `y <= edge`. Detection
//! of photon 1 at `y1` fixes the source point `y' = y1 + (y - y1) d1/D` for each
//! edge-plane point `y`, so the coincidence amplitude is
//!
//! ```text
//! a12(edge) = int_{-inf}^{edge} exp(-y'^2/sigma^2)
//!             exp(i k0 (y - y1)^2 / (2D)) exp(i k0 (y - y2)^2 / (2 d3)) dy
//! ```
//!
//! up to the constant prefactor and the global phase `exp(i k0 (D + d3))`,
//! both dropped. The integrand is a Gaussian chirp `exp(-a y^2 + b y + c)`.

pub mod analysis;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{SetupGeometry, SourceModel};
use crate::specfun::{fresnel_cs, GaussianChirp};

/// Number of points on the default edge grid.
pub const DEFAULT_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Faddeeva closed form.
    #[default]
    ClosedForm,
    /// Adaptive quadrature of the same integrand.
    Quadrature,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed",
            Method::Quadrature => "quad",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(Method::ClosedForm),
            "quad" => Ok(Method::Quadrature),
            other => Err(invalid(
                "method",
                format!("expected `closed` or `quad`, got `{other}`"),
            )),
        }
    }
}

/// The coincidence integrand for one geometry and source.
#[derive(Debug, Clone, Copy)]
pub struct CoincidenceModel {
    geometry: SetupGeometry,
    source: SourceModel,
    chirp: GaussianChirp,
}

impl CoincidenceModel {
    pub fn new(geometry: SetupGeometry, source: SourceModel) -> Result<Self> {
        let d = geometry.total_arm1();
        let ratio = geometry.d1() / d;
        let offset = geometry.y1() * geometry.d2() / d;
        let inv_s2 = 1.0 / (source.sigma() * source.sigma());
        let chirp1 = 0.5 * source.k0() / d;
        let chirp2 = 0.5 * source.k0() / geometry.d3();
        let (y1, y2) = (geometry.y1(), geometry.y2());

        // -(ratio y + offset)^2/sigma^2 + i chirp1 (y - y1)^2 + i chirp2 (y - y2)^2
        let a = Complex64::new(ratio * ratio * inv_s2, -(chirp1 + chirp2));
        let b = Complex64::new(
            -2.0 * ratio * offset * inv_s2,
            -2.0 * (chirp1 * y1 + chirp2 * y2),
        );
        let c = Complex64::new(
            -offset * offset * inv_s2,
            chirp1 * y1 * y1 + chirp2 * y2 * y2,
        );
        Ok(Self {
            geometry,
            source,
            chirp: GaussianChirp::new(a, b, c)?,
        })
    }

    pub fn geometry(&self) -> &SetupGeometry {
        &self.geometry
    }
    pub fn source(&self) -> &SourceModel {
        &self.source
    }
    pub fn chirp(&self) -> &GaussianChirp {
        &self.chirp
    }

    /// Integrand at edge-plane point `y`, written directly from the source
    /// amplitude and the two paraxial phases.
    pub fn integrand(&self, y: f64) -> Complex64 {
        let g = &self.geometry;
        let src = g.correlated_source_coord(y) / self.source.sigma();
        // phases relative to the on-axis distances d1 + d2 and d3
        let phase = self.source.k0() * (g.path_sum_excess(y) + g.detector_distance_excess(y));
        Complex64::from_polar((-src * src).exp(), phase)
    }

    /// Edge-plane position where the source amplitude peaks.
    pub fn envelope_center(&self) -> f64 {
        let g = &self.geometry;
        g.y1() * (1.0 - g.total_arm1() / g.d1())
    }

    /// 1/e half-width of the source amplitude mapped to the edge plane.
    pub fn envelope_width(&self) -> f64 {
        let g = &self.geometry;
        self.source.sigma() * g.total_arm1() / g.d1()
    }

    /// Transverse scale of the edge fringes, `sqrt(lambda d_eff)`.
    pub fn fringe_scale(&self) -> f64 {
        (self.source.wavelength() * self.geometry.effective().d_eff).sqrt()
    }

    pub fn amplitude(&self, edge: f64, method: Method) -> Result<Complex64> {
        match method {
            Method::ClosedForm => self.chirp.cumulative(edge),
            Method::Quadrature => Ok(self.chirp.cumulative_quad(edge)?.value),
        }
    }

    pub fn probability(&self, edge: f64, method: Method) -> Result<f64> {
        Ok(self.amplitude(edge, method)?.norm_sqr())
    }

    /// Amplitude with nothing blocked (edge at `+inf`), closed form.
    pub fn unblocked_amplitude(&self) -> Result<Complex64> {
        self.chirp.full_line()
    }

    pub fn unblocked_probability(&self) -> Result<f64> {
        Ok(self.unblocked_amplitude()?.norm_sqr())
    }

    /// `[y_c - 3 sqrt(lambda d_eff), envelope center + 4 envelope widths]`,
    /// `points` samples.
    pub fn default_grid(&self, points: usize) -> Result<Vec<f64>> {
        let start = self.geometry.effective().y_c - 3.0 * self.fringe_scale();
        let stop = self.envelope_center() + 4.0 * self.envelope_width();
        linspace(start, stop, points)
    }
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(invalid(
            "grid",
            format!("need at least 2 points, got {points}"),
        ));
    }
    if !(start.is_finite() && stop.is_finite() && start < stop) {
        return Err(invalid(
            "grid",
            format!("need finite start < stop, got [{start}, {stop}]"),
        ));
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                stop
            } else {
                start + step * i as f64
            }
        })
        .collect())
}

pub fn coincidence_amplitude(
    geometry: &SetupGeometry,
    source: &SourceModel,
    edge: f64,
    method: Method,
) -> Result<Complex64> {
    CoincidenceModel::new(*geometry, *source)?.amplitude(edge, method)
}

/// `p12 = |a12|^2`.
pub fn coincidence_probability(
    geometry: &SetupGeometry,
    source: &SourceModel,
    edge: f64,
    method: Method,
) -> Result<f64> {
    CoincidenceModel::new(*geometry, *source)?.probability(edge, method)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("grid", "empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(invalid("grid", "contains non-finite values"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("grid", "must be strictly increasing"));
    }
    Ok(())
}

/// Coincidence probability against edge position.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgePattern {
    pub edge_positions: Vec<f64>,
    pub p12: Vec<f64>,
    /// `p12` with nothing blocked.
    pub unblocked: f64,
    pub geometry: SetupGeometry,
    pub source: SourceModel,
    pub method: Method,
}

impl EdgePattern {
    /// `p12 / unblocked`.
    pub fn normalized(&self) -> Vec<f64> {
        self.p12.iter().map(|p| p / self.unblocked).collect()
    }

    pub fn len(&self) -> usize {
        self.p12.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p12.is_empty()
    }
}

/// Evaluate `p12` at every grid point. Results are in grid order and equal
/// to sequential evaluation.
pub fn edge_sweep(
    geometry: &SetupGeometry,
    source: &SourceModel,
    grid: &[f64],
    method: Method,
) -> Result<EdgePattern> {
    check_grid(grid)?;
    let model = CoincidenceModel::new(*geometry, *source)?;
    let p12 = grid
        .par_iter()
        .map(|&edge| model.probability(edge, method))
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgePattern {
        edge_positions: grid.to_vec(),
        p12,
        unblocked: model.unblocked_probability()?,
        geometry: *geometry,
        source: *source,
        method,
    })
}

/// Range of D1 positions summed over to form the D2 singles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// Width, in D1 position, over which the source amplitude stays significant
/// for a fixed edge-plane point: `sigma (d1 + d2) / d2`.
pub fn detector1_acceptance(geometry: &SetupGeometry, source: &SourceModel) -> f64 {
    source.sigma() * geometry.total_arm1() / geometry.d2()
}

impl TraceRange {
    pub const MIN_POINTS: usize = 32;
    pub const MIN_WIDTHS: f64 = 6.0;

    /// Eight acceptance widths centred on the D1 position that maps the middle
    /// of `grid` onto the source center, 64 points.
    pub fn around(geometry: &SetupGeometry, source: &SourceModel, grid: &[f64]) -> Self {
        let mid = 0.5 * (grid[0] + grid[grid.len() - 1]);
        let center = -mid * geometry.d1() / geometry.d2();
        let half = 4.0 * detector1_acceptance(geometry, source);
        Self {
            start: center - half,
            stop: center + half,
            points: 64,
        }
    }

    fn validate(&self, geometry: &SetupGeometry, source: &SourceModel) -> Result<Vec<f64>> {
        if self.points < Self::MIN_POINTS {
            return Err(invalid(
                "trace_points",
                format!("need at least {}, got {}", Self::MIN_POINTS, self.points),
            ));
        }
        let need = Self::MIN_WIDTHS * detector1_acceptance(geometry, source);
        let span = self.stop - self.start;
        if span.is_nan() || span < need {
            return Err(invalid(
                "trace_range",
                format!(
                    "[{:e}, {:e}] m is narrower than {} acceptance widths ({need:e} m)",
                    self.start,
                    self.stop,
                    Self::MIN_WIDTHS
                ),
            ));
        }
        linspace(self.start, self.stop, self.points)
    }
}

/// Singles of both detectors against edge position.
#[derive(Debug, Clone, PartialEq)]
pub struct SinglesCurve {
    pub edge_positions: Vec<f64>,
    /// D2 singles: `p12` summed over the traced D1 positions.
    pub s2: Vec<f64>,
    /// D1 singles; D1's arm has no obstruction so this does not depend on the edge.
    pub s1: f64,
    /// `s2` with nothing blocked.
    pub s2_unblocked: f64,
}

impl SinglesCurve {
    pub fn s2_normalized(&self) -> Vec<f64> {
        self.s2.iter().map(|s| s / self.s2_unblocked).collect()
    }
}

/// D2 singles obtained by summing coincidence probabilities over D1
/// positions with uniform weights, i.e. discarding where photon 1 landed.
pub fn traced_singles(
    geometry: &SetupGeometry,
    source: &SourceModel,
    grid: &[f64],
    trace: &TraceRange,
    method: Method,
) -> Result<SinglesCurve> {
    check_grid(grid)?;
    let positions = trace.validate(geometry, source)?;
    let models = positions
        .iter()
        .map(|&y1| CoincidenceModel::new(geometry.with_y1(y1)?, *source))
        .collect::<Result<Vec<_>>>()?;
    let s2 = grid
        .par_iter()
        .map(|&edge| {
            models
                .iter()
                .map(|m| m.probability(edge, method))
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let s2_unblocked = models
        .iter()
        .map(|m| m.unblocked_probability())
        .sum::<Result<f64>>()?;
    Ok(SinglesCurve {
        edge_positions: grid.to_vec(),
        s2,
        s1: s2_unblocked,
        s2_unblocked,
    })
}

/// Classical knife-edge intensity normalized to 1 when unblocked:
/// `I = ((C(v) + 1/2)^2 + (S(v) + 1/2)^2) / 2`, `v = (edge - y_c) sqrt(2/(lambda d_eff))`.
pub fn classical_edge_pattern(
    d_eff: f64,
    y_c: f64,
    wavelength: f64,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if !(d_eff.is_finite() && d_eff > 0.0) {
        return Err(invalid("d_eff", format!("must be > 0, got {d_eff}")));
    }
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(invalid(
            "wavelength",
            format!("must be > 0, got {wavelength}"),
        ));
    }
    let scale = (2.0 / (wavelength * d_eff)).sqrt();
    Ok(grid
        .iter()
        .map(|&edge| {
            let (c, s) = fresnel_cs((edge - y_c) * scale);
            0.5 * ((c + 0.5).powi(2) + (s + 0.5).powi(2))
        })
        .collect())
}
