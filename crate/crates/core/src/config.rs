//! Run configuration: TOML text in, validated [`RunConfig`] out.
//!
//! ```toml
//! [scenario]
//! alice = [5.0, 5.0, 3.0]
//! bob = [5.0, 4.5, 0.0]
//! eve = [4.93, 1.73, 0.0]   # or: gain_ratio = 30.0
//! sigma_b = 1.0             # default 1
//! sigma_e = 1.0             # default 1
//!
//! [scenario.pd]             # every key optional
//! m = 6.0
//! area = 1.0
//! ts = 1.0
//! g = 3.0
//! fov_deg = 75.0
//!
//! [constraints]
//! mode = "avg"              # or "peak"
//! xi = 0.2
//! p_db = 85.0               # or p = <linear>
//! # a_db / a for peak mode; a missing P or A defaults to the other
//!
//! [sweep]
//! variable = "p"            # p | a | xi | ratio | alpha
//! unit = "db"               # p and a only: db (default) or linear
//! start = 25.0
//! stop = 85.0
//! points = 61
//! spacing = "linear"        # or "log"; alternatively values = [...]
//!
//! [region]
//! x = [0.0, 10.0]
//! y = [0.0, 10.0]
//! nx = 200
//! ny = 200
//! z = 0.0                   # default: Bob's height
//!
//! [output]
//! path = "out.csv"
//! format = "csv"
//! shannon = false
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::FloorGrid;
use crate::scenario::{PdParams, Position};

/// Upper limit on the number of grid points a sweep may request.
pub const MAX_SWEEP_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    constraints: RawConstraints,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep: Option<RawSweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    region: Option<RawRegion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<RawOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    alice: [f64; 3],
    bob: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eve: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gain_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pd: Option<RawPd>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPd {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    area: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ts: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fov_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraints {
    mode: Mode,
    xi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: SweepVariable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unit: Option<Unit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spacing: Option<Spacing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    x: [f64; 2],
    y: [f64; 2],
    nx: usize,
    ny: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shannon: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Avg,
    Peak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    P,
    A,
    Xi,
    Ratio,
    Alpha,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::P => "p",
            Self::A => "a",
            Self::Xi => "xi",
            Self::Ratio => "ratio",
            Self::Alpha => "alpha",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Db,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
}

/// Where the eavesdropper is, or how weak its channel is relative to Bob's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EveSpec {
    Position(Position),
    /// `H_B / H_E`.
    GainRatio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub alice: Position,
    pub bob: Position,
    /// `None` is allowed only for region runs.
    pub eve: Option<EveSpec>,
    pub pd: PdParams,
    pub sigma_b: f64,
    pub sigma_e: f64,
}

/// Intensity constraint as configured. In peak mode a missing `P` or `A`
/// follows the other one, including along sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintSpec {
    Avg { xi: f64, p: f64 },
    Peak { xi: f64, p: Option<f64>, a: Option<f64> },
}

impl ConstraintSpec {
    pub fn mode(&self) -> Mode {
        match self {
            Self::Avg { .. } => Mode::Avg,
            Self::Peak { .. } => Mode::Peak,
        }
    }

    pub fn xi(&self) -> f64 {
        match *self {
            Self::Avg { xi, .. } | Self::Peak { xi, .. } => xi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    /// Unit of `values` for `p` and `a`; linear otherwise.
    pub unit: Unit,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// Grid value converted to linear units.
    pub fn linear(&self, v: f64) -> f64 {
        match self.unit {
            Unit::Db => db_to_linear(v),
            Unit::Linear => v,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Format,
    pub shannon: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub constraints: ConstraintSpec,
    pub sweep: Option<SweepSpec>,
    pub region: Option<FloorGrid>,
    pub output: OutputSpec,
}

/// `10^(dB / 10)`: intensities are referenced to unit noise variance.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

/// 1-based line of `key = ...` inside `[section]`, for error messages.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            if key.is_empty() && current == section {
                return Some(n + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(n + 1);
                }
            }
        }
    }
    None
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> Error {
        let field = if key.is_empty() {
            section.to_string()
        } else {
            format!("{section}.{key}")
        };
        let location = match locate(self.text, section, key) {
            Some(line) => format!("line {line} ({field})"),
            None => field,
        };
        Error::config(location, message)
    }
}

fn position(v: [f64; 3]) -> Position {
    Position::new(v[0], v[1], v[2])
}

fn positive(ctx: &Ctx, section: &str, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ctx.err(section, key, format!("must be positive and finite, got {v}")))
    }
}

fn pick_intensity(ctx: &Ctx, lin: Option<f64>, db: Option<f64>, name: &str) -> Result<Option<f64>> {
    let v = match (lin, db) {
        (Some(_), Some(_)) => {
            return Err(ctx.err(
                "constraints",
                name,
                format!("give either {name} or {name}_db, not both"),
            ))
        }
        (Some(v), None) => v,
        (None, Some(d)) => {
            if !d.is_finite() {
                return Err(ctx.err("constraints", &format!("{name}_db"), "must be finite"));
            }
            db_to_linear(d)
        }
        (None, None) => return Ok(None),
    };
    positive(ctx, "constraints", name, v).map(Some)
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let location = match e.span() {
            Some(span) => {
                let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                format!("line {line}")
            }
            None => "document".to_string(),
        };
        Error::config(location, e.message().to_string())
    })?;
    validate(&raw, &Ctx { text })
}

fn validate(raw: &RawConfig, ctx: &Ctx) -> Result<RunConfig> {
    let s = &raw.scenario;
    for (key, v) in [("alice", s.alice), ("bob", s.bob)]
        .into_iter()
        .chain(s.eve.map(|e| ("eve", e)))
    {
        if v.iter().any(|c| !c.is_finite()) {
            return Err(ctx.err("scenario", key, "coordinates must be finite"));
        }
    }
    if s.alice[2] <= s.bob[2] {
        return Err(ctx.err("scenario", "bob", "receiver must be below the transmitter"));
    }
    let eve = match (s.eve, s.gain_ratio) {
        (Some(_), Some(_)) => {
            return Err(ctx.err("scenario", "gain_ratio", "give either eve or gain_ratio, not both"))
        }
        (Some(e), None) => {
            if s.alice[2] <= e[2] {
                return Err(ctx.err("scenario", "eve", "receiver must be below the transmitter"));
            }
            Some(EveSpec::Position(position(e)))
        }
        (None, Some(r)) => Some(EveSpec::GainRatio(positive(ctx, "scenario", "gain_ratio", r)?)),
        (None, None) => None,
    };
    let sigma_b = positive(ctx, "scenario", "sigma_b", s.sigma_b.unwrap_or(1.0))?;
    let sigma_e = positive(ctx, "scenario", "sigma_e", s.sigma_e.unwrap_or(1.0))?;

    let rp = s.pd.clone().unwrap_or_default();
    let d = PdParams::table_i();
    let pd = PdParams {
        m: rp.m.unwrap_or(d.m),
        area: rp.area.unwrap_or(d.area),
        ts: rp.ts.unwrap_or(d.ts),
        g: rp.g.unwrap_or(d.g),
        fov: rp.fov_deg.map(f64::to_radians).unwrap_or(d.fov),
    };
    pd.validate().map_err(|e| ctx.err("scenario.pd", "", e.to_string()))?;

    let c = &raw.constraints;
    if !(c.xi > 0.0 && c.xi <= 1.0) {
        return Err(ctx.err("constraints", "xi", format!("dimming target must lie in (0, 1], got {}", c.xi)));
    }
    let p = pick_intensity(ctx, c.p, c.p_db, "p")?;
    let a = pick_intensity(ctx, c.a, c.a_db, "a")?;
    let constraints = match c.mode {
        Mode::Avg => {
            if a.is_some() {
                return Err(ctx.err("constraints", "a", "peak intensity is only used in peak mode"));
            }
            let p = p.ok_or_else(|| ctx.err("constraints", "p", "avg mode needs p or p_db"))?;
            ConstraintSpec::Avg { xi: c.xi, p }
        }
        Mode::Peak => {
            if p.is_none() && a.is_none() {
                return Err(ctx.err("constraints", "a", "peak mode needs at least one of p/p_db and a/a_db"));
            }
            if let (Some(p), Some(a)) = (p, a) {
                if p > a {
                    return Err(ctx.err("constraints", "p", format!("nominal intensity {p} exceeds peak {a}")));
                }
            }
            ConstraintSpec::Peak { xi: c.xi, p, a }
        }
    };

    let sweep = raw.sweep.as_ref().map(|sw| validate_sweep(sw, &constraints, eve, ctx)).transpose()?;
    if eve.is_none() && raw.region.is_none() && !matches!(sweep, Some(SweepSpec { variable: SweepVariable::Ratio, .. })) {
        return Err(ctx.err("scenario", "eve", "give eve or gain_ratio (only region runs may omit both)"));
    }

    let region = raw
        .region
        .as_ref()
        .map(|r| {
            let z = r.z.unwrap_or(s.bob[2]);
            if z >= s.alice[2] {
                return Err(ctx.err("region", "z", "receiver plane must be below the transmitter"));
            }
            FloorGrid::new((r.x[0], r.x[1]), (r.y[0], r.y[1]), r.nx, r.ny, z)
                .map_err(|e| ctx.err("region", "", e.to_string()))
        })
        .transpose()?;

    let o = raw.output.clone().unwrap_or_default();
    Ok(RunConfig {
        scenario: ScenarioSpec {
            alice: position(s.alice),
            bob: position(s.bob),
            eve,
            pd,
            sigma_b,
            sigma_e,
        },
        constraints,
        sweep,
        region,
        output: OutputSpec {
            path: o.path,
            format: o.format.unwrap_or_default(),
            shannon: o.shannon.unwrap_or(false),
        },
    })
}

fn validate_sweep(sw: &RawSweep, constraints: &ConstraintSpec, eve: Option<EveSpec>, ctx: &Ctx) -> Result<SweepSpec> {
    let var = sw.variable;
    let is_intensity = matches!(var, SweepVariable::P | SweepVariable::A);
    let unit = match (is_intensity, sw.unit) {
        (true, u) => u.unwrap_or(Unit::Db),
        (false, None | Some(Unit::Linear)) => Unit::Linear,
        (false, Some(Unit::Db)) => return Err(ctx.err("sweep", "unit", "dB units apply only to p and a")),
    };
    if matches!(var, SweepVariable::A | SweepVariable::Alpha) && constraints.mode() != Mode::Peak {
        return Err(ctx.err("sweep", "variable", format!("sweeping {} needs peak mode", var.name())));
    }
    if var == SweepVariable::Ratio && matches!(eve, Some(EveSpec::Position(_))) {
        return Err(ctx.err("sweep", "variable", "a ratio sweep sets the eavesdropper gain; drop scenario.eve"));
    }

    let values = match (&sw.values, sw.start, sw.stop, sw.points) {
        (Some(v), None, None, None) => {
            if sw.spacing.is_some() {
                return Err(ctx.err("sweep", "spacing", "spacing applies only to start/stop/points grids"));
            }
            v.clone()
        }
        (None, Some(start), Some(stop), Some(n)) => {
            if !(2..=MAX_SWEEP_POINTS).contains(&n) {
                return Err(ctx.err(
                    "sweep",
                    "points",
                    format!("need between 2 and {MAX_SWEEP_POINTS} points, got {n}"),
                ));
            }
            let spacing = sw.spacing.unwrap_or(Spacing::Linear);
            if spacing == Spacing::Log && !(start > 0.0 && stop > 0.0) {
                return Err(ctx.err("sweep", "spacing", "log spacing needs positive endpoints"));
            }
            (0..n)
                .map(|k| {
                    let t = k as f64 / (n - 1) as f64;
                    if k == n - 1 {
                        return stop;
                    }
                    match spacing {
                        Spacing::Linear => start + t * (stop - start),
                        Spacing::Log => (start.ln() + t * (stop.ln() - start.ln())).exp(),
                    }
                })
                .collect()
        }
        _ => {
            return Err(ctx.err(
                "sweep",
                "",
                "give either values = [...] or all of start, stop and points",
            ))
        }
    };
    if values.is_empty() {
        return Err(ctx.err("sweep", "values", "grid is empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ctx.err("sweep", "values", "grid values must be finite"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ctx.err("sweep", "values", "grid must be strictly increasing"));
    }
    let spec = SweepSpec { variable: var, unit, values };
    for &v in &spec.values {
        let lin = spec.linear(v);
        let bad = match var {
            SweepVariable::P | SweepVariable::A | SweepVariable::Ratio => !(lin > 0.0 && lin.is_finite()),
            SweepVariable::Xi => !(lin > 0.0 && lin <= 1.0),
            SweepVariable::Alpha => !(lin > 0.0 && lin <= 1.0),
        };
        if bad {
            return Err(ctx.err("sweep", "values", format!("grid value {v} is out of range for {}", var.name())));
        }
    }
    if let ConstraintSpec::Peak { p, a, .. } = *constraints {
        match var {
            SweepVariable::P => {
                if let Some(a) = a {
                    if spec.values.iter().any(|&v| spec.linear(v) > a) {
                        return Err(ctx.err("sweep", "values", "swept P exceeds the fixed peak A"));
                    }
                }
            }
            SweepVariable::A => {
                if let Some(p) = p {
                    if spec.values.iter().any(|&v| spec.linear(v) < p) {
                        return Err(ctx.err("sweep", "values", "swept A falls below the fixed P"));
                    }
                }
            }
            SweepVariable::Alpha => {
                let (pv, av) = (p.or(a).unwrap(), a.or(p).unwrap());
                let max_alpha = pv / av;
                if spec.values.iter().any(|&v| v > max_alpha) {
                    return Err(ctx.err(
                        "sweep",
                        "values",
                        format!("alpha above P/A = {max_alpha} would need xi > 1"),
                    ));
                }
            }
            _ => {}
        }
    }
    Ok(spec)
}

/// A degree value whose conversion back to radians is exactly `rad`,
/// when one lies within a few ulps of the plain conversion.
fn degrees_for(rad: f64) -> f64 {
    let d = rad.to_degrees();
    let (mut up, mut down) = (d, d);
    for _ in 0..8 {
        if up.to_radians() == rad {
            return up;
        }
        if down.to_radians() == rad {
            return down;
        }
        up = up.next_up();
        down = down.next_down();
    }
    d
}

impl RunConfig {
    /// TOML text that parses back to an identical configuration.
    pub fn to_toml(&self) -> String {
        let s = &self.scenario;
        let arr = |p: Position| [p.x, p.y, p.z];
        let (eve, gain_ratio) = match s.eve {
            Some(EveSpec::Position(p)) => (Some(arr(p)), None),
            Some(EveSpec::GainRatio(r)) => (None, Some(r)),
            None => (None, None),
        };
        let (mode, xi, p, a) = match self.constraints {
            ConstraintSpec::Avg { xi, p } => (Mode::Avg, xi, Some(p), None),
            ConstraintSpec::Peak { xi, p, a } => (Mode::Peak, xi, p, a),
        };
        let raw = RawConfig {
            scenario: RawScenario {
                alice: arr(s.alice),
                bob: arr(s.bob),
                eve,
                gain_ratio,
                sigma_b: Some(s.sigma_b),
                sigma_e: Some(s.sigma_e),
                pd: Some(RawPd {
                    m: Some(s.pd.m),
                    area: Some(s.pd.area),
                    ts: Some(s.pd.ts),
                    g: Some(s.pd.g),
                    fov_deg: Some(degrees_for(s.pd.fov)),
                }),
            },
            constraints: RawConstraints {
                mode,
                xi,
                p,
                p_db: None,
                a,
                a_db: None,
            },
            sweep: self.sweep.as_ref().map(|sw| RawSweep {
                variable: sw.variable,
                unit: Some(sw.unit),
                values: Some(sw.values.clone()),
                start: None,
                stop: None,
                points: None,
                spacing: None,
            }),
            region: self.region.map(|g| RawRegion {
                x: [g.x_range.0, g.x_range.1],
                y: [g.y_range.0, g.y_range.1],
                nx: g.nx,
                ny: g.ny,
                z: Some(g.z),
            }),
            output: Some(RawOutput {
                path: self.output.path.clone(),
                format: Some(self.output.format),
                shannon: Some(self.output.shannon),
            }),
        };
        toml::to_string(&raw).expect("configuration values are always representable in TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[scenario]
alice = [5.0, 5.0, 3.0]
bob = [5.0, 4.5, 0.0]
eve = [4.93, 1.73, 0.0]

[constraints]
mode = "avg"
xi = 0.2
p_db = 60.0
"#;

    #[test]
    fn defaults_applied() {
        let cfg = parse_config(BASE).unwrap();
        assert_eq!(cfg.scenario.pd, PdParams::table_i());
        assert_eq!(cfg.scenario.sigma_b, 1.0);
        assert_eq!(cfg.scenario.sigma_e, 1.0);
        assert_eq!(cfg.constraints, ConstraintSpec::Avg { xi: 0.2, p: 1e6 });
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn empty_pd_block_gives_reference_parameters() {
        let text = BASE.replace("[constraints]", "[scenario.pd]\n\n[constraints]");
        assert_eq!(parse_config(&text).unwrap().scenario.pd, PdParams::table_i());
    }

    #[test]
    fn rejects_conflicting_units() {
        let text = BASE.replace("p_db = 60.0", "p_db = 60.0\np = 1e6");
        let e = parse_config(&text).unwrap_err().to_string();
        assert!(e.contains("constraints.p") && e.contains("line"), "{e}");
    }

    #[test]
    fn rejects_xi_out_of_range_with_line() {
        let text = BASE.replace("xi = 0.2", "xi = 1.5");
        let e = parse_config(&text).unwrap_err().to_string();
        assert!(e.contains("line 9") && e.contains("constraints.xi"), "{e}");
    }

    #[test]
    fn rejects_unknown_keys_with_line() {
        let text = BASE.replace("xi = 0.2", "xi = 0.2\nbogus = 3");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        let msg = e.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 10"), "{msg}");
    }

    #[test]
    fn peak_defaults_follow_each_other() {
        let text = BASE.replace("mode = \"avg\"", "mode = \"peak\"").replace("p_db = 60.0", "a_db = 60.0");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.constraints, ConstraintSpec::Peak { xi: 0.2, p: None, a: Some(1e6) });
        let text = BASE.replace("mode = \"avg\"", "mode = \"peak\"").replace("p_db = 60.0", "p = 10.0\na = 5.0");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn sweep_grids() {
        let text = format!("{BASE}\n[sweep]\nvariable = \"p\"\nstart = 25.0\nstop = 85.0\npoints = 7\n");
        let cfg = parse_config(&text).unwrap();
        let sw = cfg.sweep.unwrap();
        assert_eq!(sw.unit, Unit::Db);
        assert_eq!(sw.values, vec![25.0, 35.0, 45.0, 55.0, 65.0, 75.0, 85.0]);
        let text = format!("{BASE}\n[sweep]\nvariable = \"xi\"\nvalues = [0.1, 0.3, 0.2]\n");
        assert!(parse_config(&text).unwrap_err().to_string().contains("strictly increasing"));
        let text = format!("{BASE}\n[sweep]\nvariable = \"a\"\nvalues = [1.0, 2.0]\n");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn round_trip_is_identity() {
        let text = format!(
            "{}\n[sweep]\nvariable = \"p\"\nstart = 25.0\nstop = 85.0\npoints = 13\n[region]\nx = [0.0, 10.0]\ny = [0.0, 10.0]\nnx = 20\nny = 30\n[output]\nshannon = true\n",
            BASE
        );
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn oversized_grids_are_rejected() {
        let sweep = format!("{BASE}\n[sweep]\nvariable = \"p\"\nstart = 0.0\nstop = 1.0\npoints = 5555555555520\n");
        assert!(parse_config(&sweep).unwrap_err().to_string().contains("points"));
        let region = format!("{BASE}\n[region]\nx = [0.0, 1.0]\ny = [0.0, 1.0]\nnx = 100000\nny = 100000\n");
        assert!(parse_config(&region).is_err());
    }

    #[test]
    fn field_of_view_round_trips_exactly() {
        for k in 1..900 {
            let deg = k as f64 / 10.0;
            let text = format!("{BASE}\n[scenario.pd]\nfov_deg = {deg}\n");
            let cfg = parse_config(&text).unwrap();
            assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg, "fov_deg = {deg}");
        }
    }

    #[test]
    fn db_and_linear_agree() {
        let lin = BASE.replace("p_db = 60.0", "p = 1000000.0");
        assert_eq!(parse_config(BASE).unwrap(), parse_config(&lin).unwrap());
    }

    #[test]
    fn malformed_toml_reports_line() {
        let e = parse_config("[scenario]\nalice = [1, 2\n").unwrap_err().to_string();
        assert!(e.contains("line"), "{e}");
    }
}
