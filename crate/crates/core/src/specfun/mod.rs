//! Special functions and quadrature for Gaussian-chirp integrals.

pub mod chirp;
pub mod faddeeva;
pub mod fresnel;
pub mod quadrature;

pub use chirp::{gaussian_chirp_cumulative, ChirpRoute, GaussianChirp};
pub use faddeeva::{erfc_complex, faddeeva};
pub use fresnel::fresnel_cs;
pub use quadrature::{integrate_complex, integrate_complex_with, QuadOptions, QuadratureResult};
