//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fail.

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use edge_ghost::calibration::{fit_scale_offset, fit_sigma_scan};
use edge_ghost::cli::cmd_simulate;
use edge_ghost::config::{GridSpacing, GridSpec, RunConfig};
use edge_ghost::counts::{expected_counts, simulate_counts, CountingConfig};
use edge_ghost::diffraction::analysis::{
    correlation_lag, strict_local_maxima, strict_local_minima, window_visibility,
};
use edge_ghost::diffraction::{
    classical_edge_pattern, edge_sweep, linspace, traced_singles, CoincidenceModel, EdgePattern,
    Method, TraceRange,
};
use edge_ghost::specfun::{faddeeva, fresnel_cs};
use edge_ghost::{SetupGeometry, SourceModel};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lab_pattern(y2: f64, grid: &[f64]) -> EdgePattern {
    edge_sweep(
        &SetupGeometry::laboratory(y2),
        &SourceModel::laboratory(),
        grid,
        Method::ClosedForm,
    )
    .unwrap()
}

fn lab_grid() -> Vec<f64> {
    linspace(-1e-3, 4e-3, 512).unwrap()
}

fn method_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    // sequential on purpose: the budget is for one core
    for case in 0..100 {
        let mut len = || rng.random_range(0.05..=2.0);
        let (d1, d2, d3) = (len(), len(), len());
        let mut off = || rng.random_range(-3e-3..=3e-3);
        let (y1, y2, edge) = (off(), off(), off());
        let sigma = rng.random_range(0.2e-3..=3e-3);
        let wavelength = rng.random_range(400e-9..=1000e-9);
        let m = CoincidenceModel::new(
            SetupGeometry::new(d1, d2, d3, y1, y2).unwrap(),
            SourceModel::new(wavelength, sigma).unwrap(),
        )
        .unwrap();
        let closed = m.amplitude(edge, Method::ClosedForm);
        let quad = m.amplitude(edge, Method::Quadrature);
        let (closed, quad) = match (closed, quad) {
            (Ok(c), Ok(q)) => (c, q),
            (c, q) => return Err(format!("case {case}: closed {c:?}, quad {q:?}")),
        };
        let rel = (closed - quad).norm() / closed.norm();
        if rel > worst || rel.is_nan() {
            worst = rel;
            worst_case = format!(
                "case {case}: d=({d1:.3},{d2:.3},{d3:.3}) m, edge {edge:.2e} m, |a| {:.2e}",
                closed.norm()
            );
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-8 && elapsed <= Duration::from_secs(10),
        format!(
            "max relative error {worst:.2e} ({worst_case}); {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn paper_pattern() -> Outcome {
    let grid = lab_grid();
    let start = Instant::now();
    let pattern = lab_pattern(1.52e-3, &grid);
    let elapsed = start.elapsed();
    let p = pattern.normalized();
    let maxima = strict_local_maxima(&p).len();
    let end = p[p.len() - 1];
    check(
        maxima >= 3 && (end - 1.0).abs() <= 0.02 && elapsed <= Duration::from_secs(5),
        format!(
            "{maxima} strict maxima, p(4 mm) = {end:.5}; {:.3} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn detector_shift() -> Outcome {
    let grid = lab_grid();
    let step = grid[1] - grid[0];
    let g = SetupGeometry::laboratory(1.52e-3);
    let total = g.total_arm1();
    let expected = 0.2e-3 * total / (total + g.d3());
    let patterns: Vec<Vec<f64>> = [1.52e-3, 1.32e-3, 1.12e-3]
        .iter()
        .map(|&y2| lab_pattern(y2, &grid).normalized())
        .collect();
    let mut lags = vec![];
    for pair in patterns.windows(2) {
        // lower y2 first, so a shift toward larger edge positions is positive
        lags.push(correlation_lag(&pair[1], &pair[0], step, 80).map_err(|e| e.to_string())?);
    }
    check(
        lags.iter().all(|l| (l - expected).abs() <= 0.03e-3),
        format!(
            "lags {:.4} mm, {:.4} mm; expected {:.4} mm",
            lags[0] * 1e3,
            lags[1] * 1e3,
            expected * 1e3
        ),
    )
}

fn classical_limit() -> Outcome {
    let g = SetupGeometry::laboratory(1.52e-3);
    let s = SourceModel::new(810e-9, 50e-3).unwrap();
    let eff = g.effective();
    let grid = lab_grid();
    let quantum = edge_sweep(&g, &s, &grid, Method::ClosedForm)
        .unwrap()
        .normalized();
    let classical = classical_edge_pattern(eff.d_eff, eff.y_c, s.wavelength(), &grid).unwrap();
    let worst = quantum
        .iter()
        .zip(&classical)
        .map(|(q, c)| (q - c).abs())
        .fold(0.0, f64::max);
    let m = CoincidenceModel::new(g, s).unwrap();
    let at_edge =
        m.probability(eff.y_c, Method::ClosedForm).unwrap() / m.unblocked_probability().unwrap();
    check(
        worst <= 0.01 && (at_edge - 0.25).abs() <= 0.01 && (eff.d_eff - 0.1716).abs() < 1e-4,
        format!(
            "d_eff {:.4} m, y_c {:.4} mm, max |quantum - classical| {worst:.2e}, I(y_c)/I(inf) {at_edge:.5}",
            eff.d_eff,
            eff.y_c * 1e3
        ),
    )
}

fn singles_flatness() -> Outcome {
    let g = SetupGeometry::laboratory(1.52e-3);
    let s = SourceModel::laboratory();
    let grid = lab_grid();
    let trace = TraceRange::around(&g, &s, &grid);
    let singles = traced_singles(&g, &s, &grid, &trace, Method::ClosedForm)
        .unwrap()
        .s2_normalized();
    let coincidences = lab_pattern(1.52e-3, &grid).normalized();
    let (lo, hi) = (g.effective().y_c, 4e-3);
    let vs = window_visibility(&grid, &singles, lo, hi);
    let vc = window_visibility(&grid, &coincidences, lo, hi);
    // contrast of the first fringe alone, for the record
    let max = strict_local_maxima(&coincidences)[0];
    let min = strict_local_minima(&coincidences)
        .into_iter()
        .find(|&i| i > max)
        .unwrap();
    let (pmax, pmin) = (coincidences[max], coincidences[min]);
    check(
        vs < 0.05 && vc > 0.2,
        format!(
            "over [y_c, 4 mm]: singles {vs:.4}, coincidences {vc:.3} (first fringe alone {:.3})",
            (pmax - pmin) / (pmax + pmin)
        ),
    )
}

/// Laboratory setup over `points` edge positions with the given saturation
/// mean and accidental floor per point.
fn counting_setup(
    points: usize,
    saturation: f64,
    floor: f64,
) -> (
    EdgePattern,
    edge_ghost::diffraction::SinglesCurve,
    CountingConfig,
) {
    let g = SetupGeometry::laboratory(1.52e-3);
    let s = SourceModel::laboratory();
    let grid = linspace(-1e-3, 4e-3, points).unwrap();
    let pattern = edge_sweep(&g, &s, &grid, Method::ClosedForm).unwrap();
    let trace = TraceRange::around(&g, &s, &grid);
    let singles = traced_singles(&g, &s, &grid, &trace, Method::ClosedForm).unwrap();
    let time = 30.0;
    let cfg = CountingConfig {
        pair_rate_scale: (saturation - floor) / time,
        integration_time: time,
        accidental_rate: floor / time,
        ..CountingConfig::default()
    };
    (pattern, singles, cfg)
}

fn statistical_round_trip() -> Outcome {
    let (pattern, singles, cfg) = counting_setup(150, 2000.0, 50.0);
    let injected_scale = cfg.pair_rate_scale * cfg.integration_time;
    let injected_background = cfg.accidental_rate * cfg.integration_time;
    let records = simulate_counts(&pattern, &singles, &cfg).unwrap();
    let counts: Vec<f64> = records.iter().map(|r| r.coincidences as f64).collect();
    let fit = fit_scale_offset(&pattern.normalized(), &counts).unwrap();
    let z_scale = (fit.scale - injected_scale) / fit.scale_std_error;
    let z_background = (fit.background - injected_background) / fit.background_std_error;

    let last = pattern.len() - 1;
    let draws: Vec<f64> = (0..200)
        .map(|seed| {
            let cfg = CountingConfig {
                rng_seed: seed,
                ..cfg
            };
            simulate_counts(&pattern, &singles, &cfg).unwrap()[last].coincidences as f64
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / 200.0;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 199.0;
    let dispersion = var / mean;
    check(
        z_scale.abs() <= 3.0 && z_background.abs() <= 3.0 && (0.8..=1.2).contains(&dispersion),
        format!(
            "scale {:.1} +- {:.1} (z {z_scale:+.2}), background {:.1} +- {:.1} (z {z_background:+.2}), dispersion {dispersion:.3}",
            fit.scale, fit.scale_std_error, fit.background, fit.background_std_error
        ),
    )
}

fn sigma_recovery() -> Outcome {
    let (pattern, singles, cfg) = counting_setup(150, 2000.0, 50.0);
    let expected = expected_counts(&pattern, &singles, &cfg).unwrap();
    let table: Vec<(f64, f64)> = pattern
        .edge_positions
        .iter()
        .zip(&expected)
        .map(|(x, e)| (*x, e.0))
        .collect();
    let grid: Vec<f64> = (0..9).map(|i| (65 + 5 * i) as f64 / 1e5).collect();
    let g = SetupGeometry::laboratory(1.52e-3);
    let s = SourceModel::laboratory();
    let scan = fit_sigma_scan(&g, &s, &table, &grid, Method::ClosedForm).unwrap();

    // the same scan on one Poisson realization, reported only
    let noisy: Vec<(f64, f64)> = simulate_counts(&pattern, &singles, &cfg)
        .unwrap()
        .iter()
        .map(|r| (r.edge_position(), r.coincidences as f64))
        .collect();
    let noisy_best = fit_sigma_scan(&g, &s, &noisy, &grid, Method::ClosedForm)
        .unwrap()
        .best_sigma;
    check(
        scan.best_sigma == 0.85e-3,
        format!(
            "expected counts: best sigma {:.2} mm; Poisson draw (seed {}): {:.2} mm",
            scan.best_sigma * 1e3,
            cfg.rng_seed,
            noisy_best * 1e3
        ),
    )
}

/// Composite Simpson rule with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn special_functions() -> Outcome {
    let w0 = faddeeva(Complex64::new(0.0, 0.0)).map_err(|e| e.to_string())?;
    let wi = faddeeva(Complex64::new(0.0, 1.0)).map_err(|e| e.to_string())?;
    // w(i) = e erfc(1), erf from its Maclaurin series
    let mut erf = 0.0;
    let mut term = 1.0; // (-1)^n / n!
    for n in 0..40 {
        erf += term / (2 * n + 1) as f64;
        term *= -1.0 / (n + 1) as f64;
    }
    erf *= 2.0 / std::f64::consts::PI.sqrt();
    let oracle = std::f64::consts::E * (1.0 - erf);
    let err_w = (wi - Complex64::new(oracle, 0.0)).norm();

    let (c, s) = fresnel_cs(1.0);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let c_ref = simpson(|t| (half_pi * t * t).cos(), 0.0, 1.0, 4000);
    let s_ref = simpson(|t| (half_pi * t * t).sin(), 0.0, 1.0, 4000);
    let err_cs = (c - c_ref).abs().max((s - s_ref).abs());
    check(
        w0 == Complex64::new(1.0, 0.0) && err_w <= 1e-12 && err_cs <= 1e-10,
        format!("w(0) = {w0}, |w(i) - oracle| {err_w:.1e}, C(1) = {c:.12}, S(1) = {s:.12}, max error {err_cs:.1e}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = RunConfig::laboratory();
    cfg.grid = GridSpec {
        start: -1e-3,
        stop: 4e-3,
        spacing: GridSpacing::Points(150),
    };
    cfg.counting.rng_seed = 12345;
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    cmd_simulate(&cfg, &a).map_err(|e| e.to_string())?;
    cmd_simulate(&cfg, &b).map_err(|e| e.to_string())?;
    let (ba, bb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    check(
        ba == bb && !ba.is_empty(),
        format!("{} bytes, identical: {}", ba.len(), ba == bb),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("method equivalence", method_equivalence),
        ("paper-geometry pattern", paper_pattern),
        ("detector shift", detector_shift),
        ("classical limit", classical_limit),
        ("singles flatness", singles_flatness),
        ("statistical round trip", statistical_round_trip),
        ("sigma recovery", sigma_recovery),
        ("special functions", special_functions),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
