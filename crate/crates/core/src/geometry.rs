//! Experimental geometry: distances along the optical axis and the transverse
//! detector positions, plus the paraxial path-length maps used by the
//! coincidence integral.
//!
//! Photon 1 travels `d1 + d2` from the edge plane to detector D1 (the source
//! sits `d2` from the edge plane), photon 2 travels `d3` from the edge plane
//! to detector D2. All lengths are meters.

use std::f64::consts::TAU;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupGeometry {
    d1: f64,
    d2: f64,
    d3: f64,
    y1: f64,
    y2: f64,
}

impl SetupGeometry {
    pub fn new(d1: f64, d2: f64, d3: f64, y1: f64, y2: f64) -> Result<Self> {
        for (name, v) in [("d1", d1), ("d2", d2), ("d3", d3)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [("y1", y1), ("y2", y2)] {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        Ok(Self { d1, d2, d3, y1, y2 })
    }

    /// Laboratory geometry: d1 = 50 cm, d2 = 28 cm, d3 = 22 cm, y1 = 0.15 mm,
    /// with D2 at `y2`.
    pub fn laboratory(y2: f64) -> Self {
        Self::new(0.50, 0.28, 0.22, 0.15e-3, y2).expect("laboratory geometry is valid")
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }
    pub fn d2(&self) -> f64 {
        self.d2
    }
    pub fn d3(&self) -> f64 {
        self.d3
    }
    pub fn y1(&self) -> f64 {
        self.y1
    }
    pub fn y2(&self) -> f64 {
        self.y2
    }

    /// Total path `D = d1 + d2` from detector D1 back to the edge plane.
    pub fn total_arm1(&self) -> f64 {
        self.d1 + self.d2
    }

    pub fn with_y1(self, y1: f64) -> Result<Self> {
        Self::new(self.d1, self.d2, self.d3, y1, self.y2)
    }

    pub fn with_y2(self, y2: f64) -> Result<Self> {
        Self::new(self.d1, self.d2, self.d3, self.y1, y2)
    }

    /// Source-plane coordinate correlated with edge-plane coordinate `y`.
    pub fn correlated_source_coord(&self, y: f64) -> f64 {
        source_coord(y, self.y1, self.d1, self.d2)
    }

    /// Paraxial `r1 + r2`: path from D1 through the source to edge-plane point `y`.
    pub fn paraxial_path_sum(&self, y: f64) -> f64 {
        self.total_arm1() + self.path_sum_excess(y)
    }

    /// `paraxial_path_sum(y) - (d1 + d2)`, without the cancellation.
    pub fn path_sum_excess(&self, y: f64) -> f64 {
        let dy = y - self.y1;
        dy * dy / (2.0 * self.total_arm1())
    }

    /// Paraxial distance from edge-plane point `y` to detector D2.
    pub fn paraxial_detector_distance(&self, y: f64) -> f64 {
        self.d3 + self.detector_distance_excess(y)
    }

    /// `paraxial_detector_distance(y) - d3`.
    pub fn detector_distance_excess(&self, y: f64) -> f64 {
        let dy = y - self.y2;
        dy * dy / (2.0 * self.d3)
    }

    pub fn effective(&self) -> EffectiveGeometry {
        let d = self.total_arm1();
        let sum = d + self.d3;
        EffectiveGeometry {
            d_eff: d * self.d3 / sum,
            y_c: (self.y1 * self.d3 + self.y2 * d) / sum,
        }
    }
}

/// Linear map from edge-plane coordinate to source coordinate. Accepts
/// `d1 = 0`, where every `y` maps onto `y1`.
pub fn source_coord(y: f64, y1: f64, d1: f64, d2: f64) -> f64 {
    y1 + (y - y1) * (d1 / (d1 + d2))
}

/// Single-distance equivalent of the two quadratic phases: the two chirps
/// combine into one centered at `y_c` with propagation distance `d_eff`,
/// `1/d_eff = 1/(d1+d2) + 1/d3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveGeometry {
    pub d_eff: f64,
    pub y_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    wavelength: f64,
    k0: f64,
    sigma: f64,
}

impl SourceModel {
    /// `sigma` is the 1/e half-width of the pair amplitude `exp(-y'^2/sigma^2)`.
    pub fn new(wavelength: f64, sigma: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(invalid(
                "wavelength",
                format!("must be finite and > 0, got {wavelength}"),
            ));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(
                "sigma",
                format!("must be finite and > 0, got {sigma}"),
            ));
        }
        Ok(Self {
            wavelength,
            k0: TAU / wavelength,
            sigma,
        })
    }

    /// 810 nm down-converted photons, sigma = 0.85 mm.
    pub fn laboratory() -> Self {
        Self::new(810e-9, 0.85e-3).expect("laboratory source is valid")
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn k0(&self) -> f64 {
        self.k0
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn with_sigma(self, sigma: f64) -> Result<Self> {
        Self::new(self.wavelength, sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lab() -> SetupGeometry {
        SetupGeometry::laboratory(1.52e-3)
    }

    #[test]
    fn rejects_nonpositive_distances() {
        assert!(SetupGeometry::new(0.0, 0.28, 0.22, 0.0, 0.0).is_err());
        assert!(SetupGeometry::new(0.5, -0.28, 0.22, 0.0, 0.0).is_err());
        assert!(SetupGeometry::new(0.5, 0.28, f64::NAN, 0.0, 0.0).is_err());
        assert!(SetupGeometry::new(0.5, 0.28, 0.22, f64::INFINITY, 0.0).is_err());
        assert!(SourceModel::new(0.0, 1e-3).is_err());
        assert!(SourceModel::new(810e-9, -1.0).is_err());
    }

    #[test]
    fn total_arm_is_exact_sum() {
        let g = lab();
        assert_eq!(g.total_arm1(), 0.50 + 0.28);
    }

    #[test]
    fn k0_matches_wavelength() {
        let s = SourceModel::laboratory();
        let expected = TAU / 810e-9;
        assert!((s.k0() - expected).abs() <= f64::EPSILON * expected);
    }

    #[test]
    fn source_coord_examples() {
        let g = lab();
        assert_eq!(g.correlated_source_coord(g.y1()), g.y1());
        // 0.15 mm + 1.0 mm * 50/78
        let v = g.correlated_source_coord(1.15e-3);
        assert!((v - 0.791_025_641_025_641e-3).abs() < 1e-15, "{v}");
        assert!((v - 0.7910e-3).abs() < 1e-7);
        for y in [-3e-3, 0.0, 2e-3, 1.0] {
            assert_eq!(source_coord(y, 0.15e-3, 0.0, 0.28), 0.15e-3);
        }
    }

    #[test]
    fn path_sum_examples() {
        let g = lab();
        assert_eq!(g.paraxial_path_sum(g.y1()), 0.78);
        let v = g.paraxial_path_sum(g.y1() + 1e-3);
        assert!((v - 0.780_000_641_025_641).abs() < 1e-15, "{v}");
        let w = g.paraxial_detector_distance(g.y2());
        assert_eq!(w, 0.22);
        let w = g.paraxial_detector_distance(g.y2() + 1e-3);
        assert!((w - 0.220_002_272_727_272_7).abs() < 1e-15, "{w}");
    }

    #[test]
    fn effective_geometry_examples() {
        let g = lab();
        let e = g.effective();
        assert!((e.d_eff - 0.1716).abs() < 1e-15);
        let same = SetupGeometry::new(0.5, 0.28, 0.22, 2e-3, 2e-3).unwrap();
        assert!((same.effective().y_c - 2e-3).abs() < 1e-18);
        let far = SetupGeometry::new(0.5, 0.28, 1e6, 0.15e-3, 1.52e-3).unwrap();
        let yc = far.effective().y_c;
        // relative to the detector separation y2 - y1
        assert!((yc - 0.15e-3).abs() / (1.52e-3 - 0.15e-3) < 1e-6, "{yc}");
    }

    proptest! {
        #[test]
        fn source_coord_is_affine(
            ya in -5e-3..5e-3f64, yb in -5e-3..5e-3f64, alpha in -2.0..2.0f64,
            d1 in 0.05..2.0f64, d2 in 0.05..2.0f64, y1 in -3e-3..3e-3f64,
        ) {
            let g = SetupGeometry::new(d1, d2, 0.3, y1, 0.0).unwrap();
            let lhs = g.correlated_source_coord(alpha * ya + (1.0 - alpha) * yb);
            let rhs = alpha * g.correlated_source_coord(ya)
                + (1.0 - alpha) * g.correlated_source_coord(yb);
            prop_assert!((lhs - rhs).abs() <= 1e-15);
            if ya < yb {
                prop_assert!(g.correlated_source_coord(ya) <= g.correlated_source_coord(yb));
            }
        }

        #[test]
        fn paraxial_distances_are_minimal_at_vertex(
            dy in -5e-3..5e-3f64, d1 in 0.05..2.0f64, d2 in 0.05..2.0f64, d3 in 0.05..2.0f64,
            y1 in -3e-3..3e-3f64, y2 in -3e-3..3e-3f64,
        ) {
            let g = SetupGeometry::new(d1, d2, d3, y1, y2).unwrap();
            prop_assert!(g.paraxial_path_sum(y1 + dy) >= g.total_arm1());
            let (p, m) = (g.paraxial_path_sum(y1 + dy), g.paraxial_path_sum(y1 - dy));
            prop_assert!((p - m).abs() <= 1e-15 * p);
            prop_assert!(g.paraxial_detector_distance(y2 + dy) >= d3);
            let (p, m) = (g.paraxial_detector_distance(y2 + dy), g.paraxial_detector_distance(y2 - dy));
            prop_assert!((p - m).abs() <= 1e-15 * p);
            if dy.abs() > 1e-9 {
                prop_assert!(g.paraxial_path_sum(y1 + dy) > g.total_arm1());
            }
        }

        #[test]
        fn effective_distance_is_harmonic_combination(
            d1 in 0.05..2.0f64, d2 in 0.05..2.0f64, d3 in 0.05..2.0f64,
        ) {
            let g = SetupGeometry::new(d1, d2, d3, 0.0, 0.0).unwrap();
            let e = g.effective();
            let lhs = 1.0 / e.d_eff;
            let rhs = 1.0 / g.total_arm1() + 1.0 / d3;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }
}
