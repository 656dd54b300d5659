//! Synthetic counting records: Poisson coincidences with a flat accidental
//! floor, and Poisson singles for both detectors.
//!
//! Each grid point draws from its own ChaCha20 stream (key from the seed,
//! stream id = grid index), so records do not depend on evaluation order or
//! thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::diffraction::{EdgePattern, SinglesCurve};
use crate::error::{invalid, Error, Result};

/// Name recorded in run metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha20 (rand_chacha 0.9), key = seed_from_u64(seed), stream = grid index";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingConfig {
    /// Pair rate, counts/s, at unit normalized `p12`.
    pub pair_rate_scale: f64,
    /// Seconds per edge position.
    pub integration_time: f64,
    /// Accidental coincidence rate, counts/s.
    pub accidental_rate: f64,
    /// D1 singles rate, counts/s.
    pub singles_rate_1: f64,
    /// D2 singles rate, counts/s, at unit normalized `s2`.
    pub singles_rate_2_scale: f64,
    pub rng_seed: u64,
}

impl Default for CountingConfig {
    fn default() -> Self {
        // about 2000 coincidences per 30 s point when unblocked
        Self {
            pair_rate_scale: 65.0,
            integration_time: 30.0,
            accidental_rate: 1.5,
            singles_rate_1: 60_000.0,
            singles_rate_2_scale: 60_000.0,
            rng_seed: 1,
        }
    }
}

impl CountingConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pair_rate_scale", self.pair_rate_scale),
            ("accidental_rate", self.accidental_rate),
            ("singles_rate_1", self.singles_rate_1),
            ("singles_rate_2_scale", self.singles_rate_2_scale),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.integration_time.is_finite() && self.integration_time > 0.0) {
            return Err(invalid(
                "integration_time",
                format!("must be > 0, got {}", self.integration_time),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountsRecord {
    /// Meters, stored as raw bits so records compare exactly.
    edge_bits: u64,
    pub coincidences: u64,
    pub singles1: u64,
    pub singles2: u64,
    time_bits: u64,
}

impl CountsRecord {
    pub fn new(
        edge_position: f64,
        coincidences: u64,
        singles1: u64,
        singles2: u64,
        integration_time: f64,
    ) -> Self {
        Self {
            edge_bits: edge_position.to_bits(),
            coincidences,
            singles1,
            singles2,
            time_bits: integration_time.to_bits(),
        }
    }

    pub fn edge_position(&self) -> f64 {
        f64::from_bits(self.edge_bits)
    }

    pub fn integration_time(&self) -> f64 {
        f64::from_bits(self.time_bits)
    }
}

/// Poisson means `(coincidences, singles1, singles2)` at every grid point.
pub fn expected_counts(
    pattern: &EdgePattern,
    singles: &SinglesCurve,
    cfg: &CountingConfig,
) -> Result<Vec<(f64, f64, f64)>> {
    cfg.validate()?;
    if pattern.edge_positions != singles.edge_positions {
        return Err(invalid(
            "singles",
            "pattern and singles must share the edge grid",
        ));
    }
    let t = cfg.integration_time;
    let p = pattern.normalized();
    let s2 = singles.s2_normalized();
    Ok(p.iter()
        .zip(&s2)
        .map(|(p, s)| {
            (
                cfg.pair_rate_scale * p * t + cfg.accidental_rate * t,
                cfg.singles_rate_1 * t,
                cfg.singles_rate_2_scale * s * t,
            )
        })
        .collect())
}

/// One Poisson draw per mean, reproducible from `cfg.rng_seed`.
pub fn simulate_counts(
    pattern: &EdgePattern,
    singles: &SinglesCurve,
    cfg: &CountingConfig,
) -> Result<Vec<CountsRecord>> {
    let means = expected_counts(pattern, singles, cfg)?;
    means
        .par_iter()
        .enumerate()
        .map(|(i, &(mc, m1, m2))| {
            let mut rng = point_rng(cfg.rng_seed, i as u64);
            Ok(CountsRecord::new(
                pattern.edge_positions[i],
                poisson(&mut rng, mc)?,
                poisson(&mut rng, m1)?,
                poisson(&mut rng, m2)?,
                cfg.integration_time,
            ))
        })
        .collect()
}

/// The generator used for grid point `index`.
pub fn point_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Largest mean accepted; counts are reported as `u64` below `2^63`.
const MAX_MEAN: f64 = 9.223_372_036_854_776e18;

/// One Poisson variate with the given mean.
pub fn poisson<R: rand::Rng + ?Sized>(rng: &mut R, mean: f64) -> Result<u64> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(invalid(
            "mean",
            format!("must be finite and >= 0, got {mean}"),
        ));
    }
    if mean > MAX_MEAN {
        return Err(Error::Range(format!(
            "expected count {mean:e} exceeds 2^63 - 1"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Range(format!("poisson({mean:e}): {e}")))?;
    Ok(dist.sample(rng) as u64)
}
