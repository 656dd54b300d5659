//! Run configuration in a flat `key = value` text format.
//!
//! ```text
//! # laboratory setup
//! d1 = 50 cm
//! d2 = 28 cm
//! d3 = 22 cm
//! y1 = 0.15 mm
//! y2 = 1.52 mm
//! wavelength = 810 nm
//! sigma = 0.85 mm
//! ```
//!
//! Lengths need one of the suffixes `m`, `cm`, `mm`, `um`, `nm`; the
//! integration time needs `s`. Rates are plain numbers in counts per second.
//! A `#` at the start of a line or after whitespace starts a comment.
//!
//! Unit conversion shifts the decimal exponent of the literal before it is
//! rounded to binary, so `50 cm` and `0.5 m` give the same `f64`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::counts::CountingConfig;
use crate::diffraction::{linspace, Method};
use crate::error::{invalid, Error, Result};
use crate::geometry::{SetupGeometry, SourceModel};

/// Upper bound on grid size, to catch a step typed in the wrong unit.
pub const MAX_GRID_POINTS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpacing {
    Step(f64),
    Points(usize),
}

/// Edge positions from `start` to `stop`, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub spacing: GridSpacing,
}

impl GridSpec {
    /// -1 mm to 4 mm, 512 points.
    pub fn laboratory() -> Self {
        Self {
            start: -1e-3,
            stop: 4e-3,
            spacing: GridSpacing::Points(crate::diffraction::DEFAULT_GRID_POINTS),
        }
    }

    fn point_count(&self) -> Result<usize> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(invalid(
                "grid",
                format!("need start < stop, got [{:e}, {:e}]", self.start, self.stop),
            ));
        }
        let n = match self.spacing {
            GridSpacing::Points(n) => n,
            GridSpacing::Step(step) => {
                if !(step.is_finite() && step > 0.0) {
                    return Err(invalid("grid_step", format!("must be > 0, got {step:e}")));
                }
                let intervals = ((self.stop - self.start) / step * (1.0 + 1e-12)).floor();
                if intervals >= MAX_GRID_POINTS as f64 {
                    usize::MAX
                } else {
                    intervals as usize + 1
                }
            }
        };
        if !(2..=MAX_GRID_POINTS).contains(&n) {
            return Err(invalid(
                "grid",
                format!("need 2..={MAX_GRID_POINTS} points, got {n}"),
            ));
        }
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        self.point_count().map(|_| ())
    }

    /// Grid positions. A step that does not divide the range stops short of `stop`.
    pub fn positions(&self) -> Result<Vec<f64>> {
        let n = self.point_count()?;
        match self.spacing {
            GridSpacing::Points(_) => linspace(self.start, self.stop, n),
            GridSpacing::Step(step) => Ok((0..n).map(|i| self.start + i as f64 * step).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: SetupGeometry,
    pub source: SourceModel,
    pub grid: GridSpec,
    /// Includes the RNG seed.
    pub counting: CountingConfig,
    pub method: Method,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Laboratory values with D2 at 1.52 mm.
    pub fn laboratory() -> Self {
        Self {
            geometry: SetupGeometry::laboratory(1.52e-3),
            source: SourceModel::laboratory(),
            grid: GridSpec::laboratory(),
            counting: CountingConfig::default(),
            method: Method::ClosedForm,
            output: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Length,
    Time,
    Number,
    Count,
    Seed,
    Method,
    Path,
}

const KEYS: &[(&str, Kind, bool)] = &[
    ("d1", Kind::Length, true),
    ("d2", Kind::Length, true),
    ("d3", Kind::Length, true),
    ("y1", Kind::Length, true),
    ("y2", Kind::Length, true),
    ("wavelength", Kind::Length, true),
    ("sigma", Kind::Length, true),
    ("grid_start", Kind::Length, false),
    ("grid_stop", Kind::Length, false),
    ("grid_step", Kind::Length, false),
    ("grid_points", Kind::Count, false),
    ("method", Kind::Method, false),
    ("seed", Kind::Seed, false),
    ("pair_rate_scale", Kind::Number, false),
    ("integration_time", Kind::Time, false),
    ("accidental_rate", Kind::Number, false),
    ("singles_rate_1", Kind::Number, false),
    ("singles_rate_2_scale", Kind::Number, false),
    ("out", Kind::Path, false),
];

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Real(f64),
    Count(usize),
    Seed(u64),
    Method(Method),
    Path(PathBuf),
}

fn config_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

/// Power of ten that converts `unit` to SI, for the given kind.
fn unit_shift(kind: Kind, unit: &str) -> Option<i32> {
    match (kind, unit) {
        (Kind::Length, "m") | (Kind::Time, "s") => Some(0),
        (Kind::Length, "cm") => Some(-2),
        (Kind::Length, "mm") => Some(-3),
        (Kind::Length, "um") => Some(-6),
        (Kind::Length, "nm") => Some(-9),
        _ => None,
    }
}

/// Parse a decimal literal scaled by `10^shift`, rounding once.
fn parse_decimal(text: &str, shift: i32) -> std::result::Result<f64, String> {
    let bad = || format!("malformed number `{text}`");
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], &text[i + 1..]),
        None => (text, "0"),
    };
    let digits = mantissa.strip_prefix(['+', '-']).unwrap_or(mantissa);
    let mut parts = digits.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next().unwrap_or("");
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int.len() + frac.len() == 0 || !all_digits(int) || !all_digits(frac) {
        return Err(bad());
    }
    let exp_digits = exponent.strip_prefix(['+', '-']).unwrap_or(exponent);
    if exp_digits.is_empty() || !all_digits(exp_digits) {
        return Err(bad());
    }
    let exp: i32 = exponent.parse().map_err(|_| bad())?;
    let scaled = exp.checked_add(shift).ok_or_else(bad)?;
    let value: f64 = format!("{mantissa}e{scaled}").parse().map_err(|_| bad())?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{text}` overflows"))
    }
}

fn parse_value(kind: Kind, text: &str) -> std::result::Result<Value, String> {
    match kind {
        Kind::Length | Kind::Time => {
            let split = text
                .trim_end_matches(|c: char| c.is_ascii_alphabetic())
                .len();
            let (number, unit) = (text[..split].trim_end(), &text[split..]);
            if unit.is_empty() {
                let expected = if kind == Kind::Time {
                    "`s`"
                } else {
                    "m, cm, mm, um or nm"
                };
                return Err(format!("missing unit suffix (expected {expected})"));
            }
            let shift =
                unit_shift(kind, unit).ok_or_else(|| format!("bad unit suffix `{unit}`"))?;
            parse_decimal(number, shift).map(Value::Real)
        }
        Kind::Number => parse_decimal(text, 0).map(Value::Real),
        Kind::Count => text
            .parse()
            .map(Value::Count)
            .map_err(|_| format!("expected a non-negative integer, got `{text}`")),
        Kind::Seed => text
            .parse()
            .map(Value::Seed)
            .map_err(|_| format!("expected an unsigned 64-bit integer, got `{text}`")),
        Kind::Method => text
            .parse()
            .map(Value::Method)
            .map_err(|e: Error| e.to_string()),
        Kind::Path => {
            if text.is_empty() {
                Err("empty path".into())
            } else {
                Ok(Value::Path(PathBuf::from(text)))
            }
        }
    }
}

/// A unit-suffixed length such as `1.5mm`, in meters.
pub fn parse_length(text: &str) -> std::result::Result<f64, String> {
    match parse_value(Kind::Length, text.trim())? {
        Value::Real(v) => Ok(v),
        _ => unreachable!("lengths parse to reals"),
    }
}

fn strip_comment(line: &str) -> &str {
    if line.trim_start().starts_with('#') {
        return "";
    }
    let bytes = line.as_bytes();
    for i in 1..bytes.len() {
        if bytes[i] == b'#' && bytes[i - 1].is_ascii_whitespace() {
            return &line[..i];
        }
    }
    line
}

/// Parse and validate a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut seen: HashMap<&'static str, (usize, Value)> = HashMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_error(line, content, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let &(name, kind, _) = KEYS
            .iter()
            .find(|(k, _, _)| *k == key)
            .ok_or_else(|| config_error(line, key, "unknown key"))?;
        if let Some((first, _)) = seen.get(name) {
            return Err(config_error(
                line,
                key,
                format!("duplicate key (first set on line {first})"),
            ));
        }
        let parsed = parse_value(kind, value).map_err(|m| config_error(line, key, m))?;
        seen.insert(name, (line, parsed));
    }
    for (name, _, required) in KEYS {
        if *required && !seen.contains_key(name) {
            return Err(config_error(0, name, "missing required key"));
        }
    }

    let line_of = |name: &str| seen.get(name).map_or(0, |(l, _)| *l);
    let real = |name: &str, default: f64| match seen.get(name) {
        Some((_, Value::Real(v))) => *v,
        _ => default,
    };
    // attach constructor errors to the line of the offending key
    let locate = |e: Error| match e {
        Error::InvalidParameter { name, reason } => config_error(line_of(name), name, reason),
        other => other,
    };

    let geometry = SetupGeometry::new(
        real("d1", f64::NAN),
        real("d2", f64::NAN),
        real("d3", f64::NAN),
        real("y1", f64::NAN),
        real("y2", f64::NAN),
    )
    .map_err(locate)?;
    let source =
        SourceModel::new(real("wavelength", f64::NAN), real("sigma", f64::NAN)).map_err(locate)?;

    let lab_grid = GridSpec::laboratory();
    let spacing = match (seen.get("grid_step"), seen.get("grid_points")) {
        (Some(_), Some((line, _))) => {
            return Err(config_error(
                *line,
                "grid_points",
                "conflicts with grid_step",
            ));
        }
        (Some((_, Value::Real(step))), None) => GridSpacing::Step(*step),
        (None, Some((_, Value::Count(n)))) => GridSpacing::Points(*n),
        _ => lab_grid.spacing,
    };
    let grid = GridSpec {
        start: real("grid_start", lab_grid.start),
        stop: real("grid_stop", lab_grid.stop),
        spacing,
    };
    grid.validate().map_err(|e| {
        let key = ["grid_step", "grid_points", "grid_stop", "grid_start"]
            .into_iter()
            .find(|k| seen.contains_key(k))
            .unwrap_or("grid");
        config_error(line_of(key), key, e.to_string())
    })?;

    let defaults = CountingConfig::default();
    let counting = CountingConfig {
        pair_rate_scale: real("pair_rate_scale", defaults.pair_rate_scale),
        integration_time: real("integration_time", defaults.integration_time),
        accidental_rate: real("accidental_rate", defaults.accidental_rate),
        singles_rate_1: real("singles_rate_1", defaults.singles_rate_1),
        singles_rate_2_scale: real("singles_rate_2_scale", defaults.singles_rate_2_scale),
        rng_seed: match seen.get("seed") {
            Some((_, Value::Seed(s))) => *s,
            _ => defaults.rng_seed,
        },
    };
    counting.validate().map_err(locate)?;

    let method = match seen.get("method") {
        Some((_, Value::Method(m))) => *m,
        _ => Method::default(),
    };
    let output = match seen.get("out") {
        Some((_, Value::Path(p))) => Some(p.clone()),
        _ => None,
    };
    Ok(RunConfig {
        geometry,
        source,
        grid,
        counting,
        method,
        output,
    })
}

/// Canonical text form; `parse_config(&emit_config(c))` reproduces `c`.
/// Every value is written out, defaults included.
pub fn emit_config(cfg: &RunConfig) -> String {
    let g = &cfg.geometry;
    let c = &cfg.counting;
    let mut out = String::new();
    let mut put = |key: &str, value: String| {
        let _ = writeln!(out, "{key} = {value}");
    };
    put("d1", format!("{:e} m", g.d1()));
    put("d2", format!("{:e} m", g.d2()));
    put("d3", format!("{:e} m", g.d3()));
    put("y1", format!("{:e} m", g.y1()));
    put("y2", format!("{:e} m", g.y2()));
    put("wavelength", format!("{:e} m", cfg.source.wavelength()));
    put("sigma", format!("{:e} m", cfg.source.sigma()));
    put("grid_start", format!("{:e} m", cfg.grid.start));
    put("grid_stop", format!("{:e} m", cfg.grid.stop));
    match cfg.grid.spacing {
        GridSpacing::Step(step) => put("grid_step", format!("{step:e} m")),
        GridSpacing::Points(n) => put("grid_points", n.to_string()),
    }
    put("method", cfg.method.to_string());
    put("seed", c.rng_seed.to_string());
    put("pair_rate_scale", format!("{:e}", c.pair_rate_scale));
    put("integration_time", format!("{:e} s", c.integration_time));
    put("accidental_rate", format!("{:e}", c.accidental_rate));
    put("singles_rate_1", format!("{:e}", c.singles_rate_1));
    put(
        "singles_rate_2_scale",
        format!("{:e}", c.singles_rate_2_scale),
    );
    if let Some(path) = &cfg.output {
        put("out", path.display().to_string());
    }
    out
}
