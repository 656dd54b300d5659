//! Command-line commands. Each writes one CSV (LF line endings, floats with
//! nine significant digits) plus a `<file>.meta` sidecar that holds the
//! resolved configuration in parseable form.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::calibration::{fit_scale_offset, fit_sigma_scan, FitResult};
use crate::config::{self, emit_config, parse_config, GridSpacing, GridSpec, RunConfig};
use crate::counts::{simulate_counts, RNG_ALGORITHM};
use crate::diffraction::{classical_edge_pattern, edge_sweep, traced_singles, Method, TraceRange};
use crate::error::{Error, Result};

pub const PATTERN_HEADER: &str = "edge_position_m,p12_normalized";
pub const SINGLES_HEADER: &str = "edge_position_m,s2_normalized";
pub const CLASSICAL_HEADER: &str = "edge_position_m,intensity_normalized";
pub const SIMULATE_HEADER: &str =
    "edge_position_m,coincidences,singles1,singles2,integration_time_s";
pub const FIT_HEADER: &str = "edge_position_m,coincidences,model_counts,residual";

#[derive(Debug, Parser)]
#[command(
    name = "edge-ghost",
    version,
    about = "Two-photon edge diffraction patterns, count simulation and fitting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file; laboratory values when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output CSV; overrides `out` in the config.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "closed|quad")]
    pub method: Option<Method>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Edge grid, e.g. `-1mm,4mm,10um`.
    #[arg(long, value_name = "START,STOP,STEP", allow_hyphen_values = true)]
    pub grid: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalized coincidence pattern.
    Pattern(Common),
    /// Normalized D2 singles.
    Singles(Common),
    /// Classical knife-edge curve for the effective geometry.
    Classical(Common),
    /// Poisson counts.
    Simulate(Common),
    /// Fit scale and background to a `simulate` CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        counts: PathBuf,
        /// Scan sigma over a grid first, e.g. `0.65mm,1.05mm,0.05mm`.
        #[arg(long, value_name = "START,STOP,STEP")]
        sigma_scan: Option<String>,
    },
    /// One pattern per D2 position; files are `<out stem>_y2_<n>.<ext>`.
    SweepDetector {
        #[command(flatten)]
        common: Common,
        #[arg(
            long,
            value_name = "LIST",
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "1.52mm,1.32mm,1.12mm"
        )]
        y2: Vec<String>,
    },
}

fn with_path(path: &Path, e: io::Error) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| with_path(path, e))
}

fn flag_error(flag: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line: 0,
        key: format!("--{flag}"),
        message: message.into(),
    }
}

/// A length such as `1.5mm` or `-2 um`.
pub fn parse_length(flag: &str, text: &str) -> Result<f64> {
    config::parse_length(text).map_err(|m| flag_error(flag, m))
}

/// `START,STOP,STEP`, all unit-suffixed.
pub fn parse_range(flag: &str, text: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(flag_error(
            flag,
            format!("expected START,STOP,STEP, got `{text}`"),
        ));
    }
    let grid = GridSpec {
        start: parse_length(flag, parts[0])?,
        stop: parse_length(flag, parts[1])?,
        spacing: GridSpacing::Step(parse_length(flag, parts[2])?),
    };
    grid.validate()
        .map_err(|e| flag_error(flag, e.to_string()))?;
    Ok(grid)
}

/// Load the config (or laboratory defaults) and apply flag overrides.
pub fn resolve(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => parse_config(&fs::read_to_string(path).map_err(|e| with_path(path, e))?)?,
        None => RunConfig::laboratory(),
    };
    if let Some(m) = common.method {
        cfg.method = m;
    }
    if let Some(seed) = common.seed {
        cfg.counting.rng_seed = seed;
    }
    if let Some(grid) = &common.grid {
        cfg.grid = parse_range("grid", grid)?;
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn output_path(cfg: &RunConfig) -> Result<&Path> {
    cfg.output
        .as_deref()
        .ok_or_else(|| flag_error("out", "no output path (use --out or `out` in the config)"))
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// Sidecar: comment header plus the canonical config with `out` set.
fn write_meta(out: &Path, command: &str, cfg: &RunConfig, extra: &[(&str, String)]) -> Result<()> {
    let mut resolved = cfg.clone();
    resolved.output = Some(out.to_path_buf());
    let mut text = format!(
        "# edge-ghost {} {command}\n# rng_algorithm = {RNG_ALGORITHM}\n",
        env!("CARGO_PKG_VERSION")
    );
    for (k, v) in extra {
        let _ = writeln!(text, "# {k} = {v}");
    }
    text.push_str(&emit_config(&resolved));
    write_file(&meta_path(out), &text)
}

fn two_column(header: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut text = format!("{header}\n");
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(text, "{x:.8e},{y:.8e}");
    }
    text
}

pub fn cmd_pattern(cfg: &RunConfig, out: &Path) -> Result<()> {
    let grid = cfg.grid.positions()?;
    let pattern = edge_sweep(&cfg.geometry, &cfg.source, &grid, cfg.method)?;
    write_file(
        out,
        &two_column(PATTERN_HEADER, &grid, &pattern.normalized()),
    )?;
    write_meta(out, "pattern", cfg, &[])
}

pub fn cmd_singles(cfg: &RunConfig, out: &Path) -> Result<()> {
    let grid = cfg.grid.positions()?;
    let trace = TraceRange::around(&cfg.geometry, &cfg.source, &grid);
    let singles = traced_singles(&cfg.geometry, &cfg.source, &grid, &trace, cfg.method)?;
    write_file(
        out,
        &two_column(SINGLES_HEADER, &grid, &singles.s2_normalized()),
    )?;
    write_meta(out, "singles", cfg, &trace_meta(&trace))
}

fn trace_meta(trace: &TraceRange) -> Vec<(&'static str, String)> {
    vec![
        ("trace_start_m", format!("{:e}", trace.start)),
        ("trace_stop_m", format!("{:e}", trace.stop)),
        ("trace_points", trace.points.to_string()),
    ]
}

pub fn cmd_classical(cfg: &RunConfig, out: &Path) -> Result<()> {
    let grid = cfg.grid.positions()?;
    let eff = cfg.geometry.effective();
    let curve = classical_edge_pattern(eff.d_eff, eff.y_c, cfg.source.wavelength(), &grid)?;
    write_file(out, &two_column(CLASSICAL_HEADER, &grid, &curve))?;
    write_meta(
        out,
        "classical",
        cfg,
        &[
            ("d_eff_m", format!("{:e}", eff.d_eff)),
            ("y_c_m", format!("{:e}", eff.y_c)),
        ],
    )
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let grid = cfg.grid.positions()?;
    let pattern = edge_sweep(&cfg.geometry, &cfg.source, &grid, cfg.method)?;
    let trace = TraceRange::around(&cfg.geometry, &cfg.source, &grid);
    let singles = traced_singles(&cfg.geometry, &cfg.source, &grid, &trace, cfg.method)?;
    let records = simulate_counts(&pattern, &singles, &cfg.counting)?;
    let mut text = format!("{SIMULATE_HEADER}\n");
    for r in &records {
        let _ = writeln!(
            text,
            "{:.8e},{},{},{},{:.8e}",
            r.edge_position(),
            r.coincidences,
            r.singles1,
            r.singles2,
            r.integration_time()
        );
    }
    write_file(out, &text)?;
    write_meta(out, "simulate", cfg, &trace_meta(&trace))
}

/// Rows of a `simulate` CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    pub edge_positions: Vec<f64>,
    pub coincidences: Vec<u64>,
    pub singles1: Vec<u64>,
    pub singles2: Vec<u64>,
    pub integration_time: Vec<f64>,
}

pub fn read_counts_csv(text: &str) -> Result<CountsTable> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SIMULATE_HEADER => {}
        Some(h) => {
            return Err(Error::Schema(format!(
                "header `{h}`, expected `{SIMULATE_HEADER}`"
            )))
        }
        None => return Err(Error::Schema("empty counts file".into())),
    }
    let mut t = CountsTable {
        edge_positions: vec![],
        coincidences: vec![],
        singles1: vec![],
        singles2: vec![],
        integration_time: vec![],
    };
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Schema(format!(
                "row {row}: {} fields, expected 5",
                fields.len()
            )));
        }
        let real = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Schema(format!("row {row}: bad number `{s}`")))
        };
        let count = |s: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::Schema(format!("row {row}: bad count `{s}`")))
        };
        t.edge_positions.push(real(fields[0])?);
        t.coincidences.push(count(fields[1])?);
        t.singles1.push(count(fields[2])?);
        t.singles2.push(count(fields[3])?);
        t.integration_time.push(real(fields[4])?);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary {
    /// Sigma used for the final model, meters.
    pub sigma: f64,
    pub fit: FitResult,
    /// `(sigma, RSS)` per scanned value, when scanning.
    pub scan: Vec<(f64, f64)>,
}

/// Fit the coincidence column of `counts` with the model for `cfg`, after an
/// optional sigma scan. Writes the per-point CSV and a `<out>.summary` file.
pub fn cmd_fit(
    cfg: &RunConfig,
    counts: &Path,
    sigma_scan: Option<&[f64]>,
    out: &Path,
) -> Result<FitSummary> {
    let text = fs::read_to_string(counts).map_err(|e| with_path(counts, e))?;
    let table = read_counts_csv(&text)?;
    let observed: Vec<f64> = table.coincidences.iter().map(|&c| c as f64).collect();
    let (source, scan) = match sigma_scan {
        Some(grid) => {
            let rows: Vec<(f64, f64)> = table
                .edge_positions
                .iter()
                .copied()
                .zip(observed.iter().copied())
                .collect();
            let result = fit_sigma_scan(&cfg.geometry, &cfg.source, &rows, grid, cfg.method)?;
            let scan = grid
                .iter()
                .zip(&result.fits)
                .map(|(s, f)| (*s, f.residual_sum_squares))
                .collect();
            (cfg.source.with_sigma(result.best_sigma)?, scan)
        }
        None => (cfg.source, vec![]),
    };
    let pattern = edge_sweep(&cfg.geometry, &source, &table.edge_positions, cfg.method)?;
    let model = pattern.normalized();
    let fit = fit_scale_offset(&model, &observed)?;

    let mut csv = format!("{FIT_HEADER}\n");
    for (i, x) in table.edge_positions.iter().enumerate() {
        let predicted = fit.scale * model[i] + fit.background;
        let _ = writeln!(
            csv,
            "{x:.8e},{},{predicted:.8e},{:.8e}",
            table.coincidences[i], fit.per_point_residuals[i]
        );
    }
    write_file(out, &csv)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "sigma = {:e} m", source.sigma());
    let _ = writeln!(summary, "scale = {:e}", fit.scale);
    let _ = writeln!(summary, "scale_std_error = {:e}", fit.scale_std_error);
    let _ = writeln!(summary, "background = {:e}", fit.background);
    let _ = writeln!(
        summary,
        "background_std_error = {:e}",
        fit.background_std_error
    );
    let _ = writeln!(
        summary,
        "residual_sum_squares = {:e}",
        fit.residual_sum_squares
    );
    let _ = writeln!(summary, "degrees_of_freedom = {}", fit.degrees_of_freedom);
    for (s, rss) in &scan {
        let _ = writeln!(summary, "scan = {s:e} m, {rss:e}");
    }
    let mut name = out.as_os_str().to_owned();
    name.push(".summary");
    write_file(Path::new(&name), &summary)?;
    write_meta(out, "fit", cfg, &[("counts", counts.display().to_string())])?;
    Ok(FitSummary {
        sigma: source.sigma(),
        fit,
        scan,
    })
}

/// `<stem>_y2_<n>.<ext>` with `n` counting from 1.
pub fn sweep_output_path(out: &Path, index: usize) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_y2_{}.{}", index + 1, ext.to_string_lossy()),
        None => format!("{stem}_y2_{}", index + 1),
    };
    out.with_file_name(name)
}

pub fn cmd_sweep_detector(cfg: &RunConfig, y2_list: &[f64], out: &Path) -> Result<Vec<PathBuf>> {
    let grid = cfg.grid.positions()?;
    let mut written = Vec::with_capacity(y2_list.len());
    for (i, &y2) in y2_list.iter().enumerate() {
        let mut run = cfg.clone();
        run.geometry = cfg.geometry.with_y2(y2)?;
        let pattern = edge_sweep(&run.geometry, &run.source, &grid, run.method)?;
        let path = sweep_output_path(out, i);
        write_file(
            &path,
            &two_column(PATTERN_HEADER, &grid, &pattern.normalized()),
        )?;
        write_meta(&path, "sweep-detector", &run, &[])?;
        written.push(path);
    }
    Ok(written)
}

/// Run a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Pattern(c) => {
            let cfg = resolve(c)?;
            cmd_pattern(&cfg, output_path(&cfg)?)
        }
        Command::Singles(c) => {
            let cfg = resolve(c)?;
            cmd_singles(&cfg, output_path(&cfg)?)
        }
        Command::Classical(c) => {
            let cfg = resolve(c)?;
            cmd_classical(&cfg, output_path(&cfg)?)
        }
        Command::Simulate(c) => {
            let cfg = resolve(c)?;
            cmd_simulate(&cfg, output_path(&cfg)?)
        }
        Command::Fit {
            common,
            counts,
            sigma_scan,
        } => {
            let cfg = resolve(common)?;
            let grid = sigma_scan
                .as_deref()
                .map(|s| parse_range("sigma-scan", s)?.positions())
                .transpose()?;
            let summary = cmd_fit(&cfg, counts, grid.as_deref(), output_path(&cfg)?)?;
            println!(
                "sigma = {:e} m, scale = {:e} +- {:e}, background = {:e} +- {:e}",
                summary.sigma,
                summary.fit.scale,
                summary.fit.scale_std_error,
                summary.fit.background,
                summary.fit.background_std_error
            );
            Ok(())
        }
        Command::SweepDetector { common, y2 } => {
            let cfg = resolve(common)?;
            let list = y2
                .iter()
                .map(|s| parse_length("y2", s))
                .collect::<Result<Vec<_>>>()?;
            cmd_sweep_detector(&cfg, &list, output_path(&cfg)?).map(|_| ())
        }
    }
}
