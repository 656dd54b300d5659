//! Two-photon ghost diffraction from a straight sharp edge.
//!
//! One photon of a position-momentum entangled pair passes a knife edge at
//! transverse position `edge` on its way to detector D2, the other reaches D1
//! unobstructed. The coincidence amplitude as a function of the edge position
//! is a cumulative Gaussian-chirp integral; it shows Fresnel edge fringes that
//! are absent from either detector's singles.
//!
//! Modules, bottom up:
//! * [`geometry`]: setup distances, source model, paraxial maps
//! * [`specfun`]: Faddeeva/erfc, Fresnel integrals, adaptive quadrature,
//!   Gaussian-chirp integrals
//! * [`diffraction`]: coincidence amplitude, edge sweeps, traced singles,
//!   classical knife-edge curve
//! * [`counts`]: Poisson counting records
//! * [`calibration`]: affine fits and sigma scans
//! * [`config`], [`cli`]: run configuration and commands

pub mod calibration;
pub mod cli;
pub mod config;
pub mod counts;
pub mod diffraction;
pub mod error;
pub mod geometry;
pub mod specfun;

pub use error::{Error, Result};
pub use geometry::{EffectiveGeometry, SetupGeometry, SourceModel};
