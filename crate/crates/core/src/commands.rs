//! The work behind each CLI subcommand. Every function returns the text
//! it would print or write so that callers and tests can inspect it.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::avg_bounds::{evaluate_avg, shannon_limit, AvgConstraints, BoundParams, BoundReport};
use crate::config::{linear_to_db, ConstraintSpec, EveSpec, RunConfig, ScenarioSpec, SweepVariable};
use crate::error::{Error, Result};
use crate::oracle::{oracle_secrecy_rate, InputDistribution};
use crate::peak_bounds::{evaluate_peak, PeakConstraints, UNIFORM_TIE};
use crate::quadrature::QuadratureSpec;
use crate::region::{fmt_sig9, insecure_region, write_region_csv, RegionConstraints, RegionSetup};
use crate::scenario::{channel_gain, LinkGains, PdParams, Position};

/// Options that come from CLI flags rather than the config file.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CmdOptions {
    pub shannon: bool,
    pub quad: QuadratureSpec,
}

/// A fully resolved intensity constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operating {
    Avg(AvgConstraints),
    Peak(PeakConstraints),
}

impl Operating {
    fn mean(&self) -> f64 {
        match self {
            Self::Avg(c) => c.mean(),
            Self::Peak(c) => c.mean(),
        }
    }
}

/// Link gains implied by the scenario. A gain ratio fixes `H_E = H_B / ratio`.
pub fn resolve_gains(s: &ScenarioSpec) -> Result<LinkGains> {
    let h_b = channel_gain(s.alice, s.bob, &s.pd)?;
    let h_e = match s.eve {
        Some(EveSpec::Position(p)) => channel_gain(s.alice, p, &s.pd)?,
        Some(EveSpec::GainRatio(r)) => h_b / r,
        None => return Err(Error::invalid("scenario has no eavesdropper position or gain ratio")),
    };
    LinkGains::new(h_b, h_e)
}

pub fn operating_point(c: &ConstraintSpec) -> Result<Operating> {
    match *c {
        ConstraintSpec::Avg { xi, p } => Ok(Operating::Avg(AvgConstraints::new(xi, p)?)),
        ConstraintSpec::Peak { xi, p, a } => {
            let (p, a) = match (p, a) {
                (Some(p), Some(a)) => (p, a),
                (Some(v), None) | (None, Some(v)) => (v, v),
                (None, None) => return Err(Error::invalid("peak mode needs P or A")),
            };
            Ok(Operating::Peak(PeakConstraints::new(xi, p, a)?))
        }
    }
}

pub fn evaluate(g: &LinkGains, op: &Operating, sigma_b: f64, sigma_e: f64) -> Result<BoundReport> {
    match op {
        Operating::Avg(c) => evaluate_avg(g, c, sigma_b, sigma_e),
        Operating::Peak(c) => evaluate_peak(g, c, sigma_b, sigma_e),
    }
}

fn lower_labels(op: &Operating) -> (&'static str, &'static str, &'static str) {
    match op {
        Operating::Avg(_) => (
            "two-sided exponential auxiliary law",
            "entropy-power, exponential input",
            "two-branch dual bound",
        ),
        Operating::Peak(c) => {
            let alpha = c.alpha();
            let l1 = if alpha < 0.5 {
                "alpha < 0.5 branch, exponential auxiliary law"
            } else {
                "alpha >= 0.5 branch, uniform-window auxiliary law"
            };
            let l2 = if (alpha - 0.5).abs() < UNIFORM_TIE {
                "entropy-power, uniform input"
            } else {
                "entropy-power, truncated-exponential input"
            };
            (l1, l2, "dual bound")
        }
    }
}

/// Human-readable report for a single operating point.
pub fn cmd_bounds(cfg: &RunConfig, opts: &CmdOptions) -> Result<String> {
    let g = resolve_gains(&cfg.scenario)?;
    let op = operating_point(&cfg.constraints)?;
    let (sb, se) = (cfg.scenario.sigma_b, cfg.scenario.sigma_e);
    let r = evaluate(&g, &op, sb, se)?;
    let mut out = String::new();
    let w = &mut out;
    match op {
        Operating::Avg(c) => writeln!(
            w,
            "mode: average intensity only (xi = {}, P = {} = {} dB)",
            c.xi,
            fmt_sig9(c.p),
            fmt_sig9(linear_to_db(c.p))
        ),
        Operating::Peak(c) => writeln!(
            w,
            "mode: average and peak intensity (xi = {}, P = {} = {} dB, A = {} = {} dB, alpha = {})",
            c.xi,
            fmt_sig9(c.p),
            fmt_sig9(linear_to_db(c.p)),
            fmt_sig9(c.a),
            fmt_sig9(linear_to_db(c.a)),
            fmt_sig9(c.alpha())
        ),
    }
    .ok();
    writeln!(w, "gains: H_B = {}, H_E = {}", fmt_sig9(g.h_b), fmt_sig9(g.h_e)).ok();
    writeln!(w, "noise: sigma_B = {}, sigma_E = {}", fmt_sig9(sb), fmt_sig9(se)).ok();
    if r.degraded {
        writeln!(w, "degraded: yes").ok();
        writeln!(
            w,
            "note: H_E/sigma_E exceeds H_B/sigma_B, so the secrecy capacity is zero; all bounds are reported as 0"
        )
        .ok();
    } else {
        writeln!(w, "degraded: no").ok();
    }
    let (l1, l2, up) = lower_labels(&op);
    writeln!(w, "lower_1 [{l1}]: {} nats", fmt_sig9(r.lower_1)).ok();
    writeln!(w, "lower_2 [{l2}]: {} nats", fmt_sig9(r.lower_2)).ok();
    writeln!(w, "upper [{up}]: {} nats", fmt_sig9(r.upper)).ok();
    writeln!(w, "clamped lower: {} nats", fmt_sig9(r.clamped_lower)).ok();
    match r.asymptote {
        Some(a) if a.lower == a.upper => {
            writeln!(w, "high-SNR asymptote: {} nats (lower and upper coincide)", fmt_sig9(a.lower)).ok();
        }
        Some(a) => {
            writeln!(w, "high-SNR asymptote: lower {} nats, upper {} nats", fmt_sig9(a.lower), fmt_sig9(a.upper)).ok();
        }
        None if !r.degraded => {
            writeln!(w, "high-SNR asymptote: undefined (eavesdropper gain is zero)").ok();
        }
        None => {}
    }
    match r.params {
        BoundParams::Avg { beta, delta } => {
            writeln!(w, "parameters: beta = {}, delta = {}", fmt_sig9(beta), fmt_sig9(delta)).ok();
        }
        BoundParams::Peak { mu, delta, mu_tilde, c } => {
            let opt = |v: Option<f64>| v.map(fmt_sig9).unwrap_or_else(|| "-".into());
            writeln!(
                w,
                "parameters: mu = {}, delta = {}, mu_tilde = {}, c = {}",
                opt(mu),
                fmt_sig9(delta),
                opt(mu_tilde),
                opt(c)
            )
            .ok();
        }
        BoundParams::None => {}
    }
    if opts.shannon || cfg.output.shannon {
        writeln!(
            w,
            "shannon limit: {} nats (convention: 1/2 ln(1 + H_B^2 (xi P)^2 / sigma_B^2), not a secrecy bound)",
            fmt_sig9(shannon_limit(g.h_b, op.mean(), sb))
        )
        .ok();
    }
    Ok(out)
}

/// Single-row CSV with the same numbers as [`cmd_bounds`].
pub fn bounds_csv(cfg: &RunConfig, opts: &CmdOptions) -> Result<String> {
    let g = resolve_gains(&cfg.scenario)?;
    let op = operating_point(&cfg.constraints)?;
    let (sb, se) = (cfg.scenario.sigma_b, cfg.scenario.sigma_e);
    let r = evaluate(&g, &op, sb, se)?;
    let shannon = opts.shannon || cfg.output.shannon;
    let mut out = String::from("h_b,h_e,lower_1,lower_2,upper,clamped_lower,clamped_upper,degraded");
    if shannon {
        out.push_str(",shannon_limit");
    }
    out.push('\n');
    write!(
        out,
        "{},{},{}",
        fmt_sig9(g.h_b),
        fmt_sig9(g.h_e),
        report_cells(&r)
    )
    .ok();
    if shannon {
        write!(out, ",{}", fmt_sig9(shannon_limit(g.h_b, op.mean(), sb))).ok();
    }
    out.push('\n');
    Ok(out)
}

fn report_cells(r: &BoundReport) -> String {
    format!(
        "{},{},{},{},{},{}",
        fmt_sig9(r.lower_1),
        fmt_sig9(r.lower_2),
        fmt_sig9(r.upper),
        fmt_sig9(r.clamped_lower),
        fmt_sig9(r.clamped_upper()),
        u8::from(r.degraded)
    )
}

/// Gains and constraint at one sweep grid value.
fn sweep_point(cfg: &RunConfig, base: &LinkGains, var: SweepVariable, lin: f64) -> Result<(LinkGains, Operating)> {
    let mut g = *base;
    let c = cfg.constraints;
    let op = match (var, c) {
        (SweepVariable::P, ConstraintSpec::Avg { xi, .. }) => Operating::Avg(AvgConstraints::new(xi, lin)?),
        (SweepVariable::P, ConstraintSpec::Peak { xi, a, .. }) => {
            Operating::Peak(PeakConstraints::new(xi, lin, a.unwrap_or(lin))?)
        }
        (SweepVariable::A, ConstraintSpec::Peak { xi, p, .. }) => {
            Operating::Peak(PeakConstraints::new(xi, p.unwrap_or(lin), lin)?)
        }
        (SweepVariable::Xi, ConstraintSpec::Avg { p, .. }) => Operating::Avg(AvgConstraints::new(lin, p)?),
        (SweepVariable::Xi, ConstraintSpec::Peak { p, a, .. }) => {
            operating_point(&ConstraintSpec::Peak { xi: lin, p, a })?
        }
        (SweepVariable::Ratio, _) => {
            g.h_e = g.h_b / lin;
            operating_point(&c)?
        }
        (SweepVariable::Alpha, ConstraintSpec::Peak { p, a, .. }) => {
            let (p, a) = (p.or(a).unwrap_or(1.0), a.or(p).unwrap_or(1.0));
            Operating::Peak(PeakConstraints::new(lin * a / p, p, a)?)
        }
        (v, _) => {
            return Err(Error::invalid(format!(
                "sweep variable {} is not available in this mode",
                v.name()
            )))
        }
    };
    Ok((g, op))
}

/// CSV with one row per grid value, evaluated in parallel and emitted in
/// grid order.
pub fn cmd_sweep(cfg: &RunConfig, opts: &CmdOptions) -> Result<String> {
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::invalid("the sweep command needs a [sweep] section"))?;
    let base = match (sw.variable, cfg.scenario.eve) {
        (SweepVariable::Ratio, None) => LinkGains::new(channel_gain(cfg.scenario.alice, cfg.scenario.bob, &cfg.scenario.pd)?, 0.0)?,
        _ => resolve_gains(&cfg.scenario)?,
    };
    let (sb, se) = (cfg.scenario.sigma_b, cfg.scenario.sigma_e);
    let shannon = opts.shannon || cfg.output.shannon;

    let rows: Vec<String> = sw
        .values
        .par_iter()
        .map(|&v| {
            let lin = sw.linear(v);
            let (g, op) = sweep_point(cfg, &base, sw.variable, lin)?;
            let r = evaluate(&g, &op, sb, se)?;
            let lead = match sw.variable {
                SweepVariable::P | SweepVariable::A => format!("{},{}", fmt_sig9(linear_to_db(lin)), fmt_sig9(lin)),
                _ => fmt_sig9(lin),
            };
            let mut row = format!("{lead},{}", report_cells(&r));
            if shannon {
                write!(row, ",{}", fmt_sig9(shannon_limit(g.h_b, op.mean(), sb))).ok();
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let name = sw.variable.name();
    let mut out = match sw.variable {
        SweepVariable::P | SweepVariable::A => format!("{name}_db,{name}"),
        _ => name.to_string(),
    };
    out.push_str(",lower_1,lower_2,upper,clamped_lower,clamped_upper,degraded");
    if shannon {
        out.push_str(",shannon_limit");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}

/// Geometry for the high-SNR gap tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSetup {
    pub alice: Position,
    pub bob: Position,
    pub pd: PdParams,
    pub xi: f64,
    pub sigma: f64,
}

impl Default for TableSetup {
    fn default() -> Self {
        Self {
            alice: Position::new(5.0, 5.0, 3.0),
            bob: Position::new(5.0, 4.5, 0.0),
            pd: PdParams::table_i(),
            xi: 0.2,
            sigma: 1.0,
        }
    }
}

impl TableSetup {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            alice: cfg.scenario.alice,
            bob: cfg.scenario.bob,
            pd: cfg.scenario.pd,
            xi: cfg.constraints.xi(),
            sigma: cfg.scenario.sigma_b,
        }
    }
}

pub const TABLE_DB: [f64; 5] = [65.0, 70.0, 75.0, 80.0, 85.0];
pub const TABLE_RATIOS: [f64; 3] = [3000.0, 300.0, 30.0];

fn table_gains(setup: &TableSetup, ratio: f64) -> Result<LinkGains> {
    let h_b = channel_gain(setup.alice, setup.bob, &setup.pd)?;
    LinkGains::new(h_b, h_b / ratio)
}

/// `upper - lower_1` in the average-only case, rows by `P` in dB.
pub fn avg_gap_table(setup: &TableSetup) -> Result<[[f64; 3]; 5]> {
    let mut t = [[0.0; 3]; 5];
    for (i, db) in TABLE_DB.iter().enumerate() {
        for (j, ratio) in TABLE_RATIOS.iter().enumerate() {
            let g = table_gains(setup, *ratio)?;
            let c = AvgConstraints::new(setup.xi, crate::config::db_to_linear(*db))?;
            let r = evaluate_avg(&g, &c, setup.sigma, setup.sigma)?;
            t[i][j] = r.upper - r.lower_1;
        }
    }
    Ok(t)
}

/// `upper - lower_1` with the peak equal to the nominal intensity, rows by
/// `A` in dB.
pub fn peak_gap_table(setup: &TableSetup) -> Result<[[f64; 3]; 5]> {
    let mut t = [[0.0; 3]; 5];
    for (i, db) in TABLE_DB.iter().enumerate() {
        for (j, ratio) in TABLE_RATIOS.iter().enumerate() {
            let g = table_gains(setup, *ratio)?;
            let a = crate::config::db_to_linear(*db);
            let c = PeakConstraints::new(setup.xi, a, a)?;
            let r = evaluate_peak(&g, &c, setup.sigma, setup.sigma)?;
            t[i][j] = r.upper - r.lower_1;
        }
    }
    Ok(t)
}

fn table_csv(lead: &str, t: &[[f64; 3]; 5]) -> String {
    let mut out = format!("{lead},ratio_3000,ratio_300,ratio_30\n");
    for (db, row) in TABLE_DB.iter().zip(t) {
        writeln!(out, "{db},{},{},{}", fmt_sig9(row[0]), fmt_sig9(row[1]), fmt_sig9(row[2])).ok();
    }
    out
}

/// Both gap tables as CSV: `(average-only, average-and-peak)`.
pub fn cmd_tables(setup: &TableSetup) -> Result<(String, String)> {
    Ok((
        table_csv("p_db", &avg_gap_table(setup)?),
        table_csv("a_db", &peak_gap_table(setup)?),
    ))
}

pub fn cmd_region(cfg: &RunConfig) -> Result<String> {
    let grid = cfg
        .region
        .ok_or_else(|| Error::invalid("the region command needs a [region] section"))?;
    let s = &cfg.scenario;
    let setup = RegionSetup {
        alice: s.alice,
        bob: s.bob,
        pd: s.pd,
        sigma_b: s.sigma_b,
        sigma_e: s.sigma_e,
    };
    let constraints = match operating_point(&cfg.constraints)? {
        Operating::Avg(c) => RegionConstraints::Avg(c),
        Operating::Peak(c) => RegionConstraints::Peak(c),
    };
    let map = insecure_region(&setup, &grid, &constraints)?;
    let mut buf = Vec::new();
    write_region_csv(&map, &mut buf).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

/// Oracle comparison at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub text: String,
    pub rate: f64,
    pub sandwich_ok: bool,
}

/// Slack allowed between the closed-form lower bound and the oracle.
pub const SANDWICH_LOWER_SLACK: f64 = 1e-4;
/// Slack allowed between the oracle and the upper bound.
pub const SANDWICH_UPPER_SLACK: f64 = 1e-4;

/// Numerical secrecy rate of the input law that the entropy-power lower
/// bound assumes, with the closed-form bounds on either side.
pub fn cmd_oracle(cfg: &RunConfig, opts: &CmdOptions) -> Result<OracleOutcome> {
    let g = resolve_gains(&cfg.scenario)?;
    let op = operating_point(&cfg.constraints)?;
    let (sb, se) = (cfg.scenario.sigma_b, cfg.scenario.sigma_e);
    let r = evaluate(&g, &op, sb, se)?;
    let mut text = String::new();
    let w = &mut text;
    if r.degraded {
        writeln!(w, "degraded scenario: oracle rate 0 (no quadrature run)").ok();
        writeln!(w, "SANDWICH OK").ok();
        return Ok(OracleOutcome {
            text,
            rate: 0.0,
            sandwich_ok: true,
        });
    }
    let (input, label) = match op {
        Operating::Avg(c) => (InputDistribution::Exponential { mean: c.mean() }, "exponential"),
        Operating::Peak(c) => {
            let d = InputDistribution::max_entropy_peak(c.alpha(), c.a)?;
            let label = if matches!(d, InputDistribution::Uniform { .. }) {
                "uniform"
            } else {
                "truncated exponential"
            };
            (d, label)
        }
    };
    let rate = oracle_secrecy_rate(&input, &g, sb, se, &opts.quad)?;
    let half = QuadratureSpec {
        abs_tol: 0.5 * opts.quad.abs_tol,
        ..opts.quad
    };
    let rate_half = oracle_secrecy_rate(&input, &g, sb, se, &half)?;
    let lower = r.lower_2;
    let lower_ok = lower <= rate + SANDWICH_LOWER_SLACK;
    let upper_ok = rate <= r.upper + SANDWICH_UPPER_SLACK;

    writeln!(w, "input law: {label}").ok();
    writeln!(w, "lower (entropy-power, same input): {} nats", fmt_sig9(lower)).ok();
    writeln!(w, "oracle rate: {} nats", fmt_sig9(rate)).ok();
    writeln!(w, "upper: {} nats", fmt_sig9(r.upper)).ok();
    writeln!(w, "lower <= oracle: {}", if lower_ok { "yes" } else { "NO" }).ok();
    writeln!(w, "oracle <= upper: {}", if upper_ok { "yes" } else { "NO" }).ok();
    let drift = (rate - rate_half).abs();
    if drift < 1e-6 {
        writeln!(w, "stability: halving the quadrature tolerance moves the rate by {drift:.2e} nats").ok();
    } else {
        writeln!(w, "stability warning: halving the quadrature tolerance moves the rate by {drift:.2e} nats").ok();
    }
    let sandwich_ok = lower_ok && upper_ok;
    writeln!(w, "{}", if sandwich_ok { "SANDWICH OK" } else { "SANDWICH VIOLATED" }).ok();
    Ok(OracleOutcome {
        text,
        rate,
        sandwich_ok,
    })
}
