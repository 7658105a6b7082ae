//! Run configuration: the JSON schema, its defaults, dotted-path overrides,
//! and resolution into the core types (physical parameters, schedule, grid).
//!
//! # Schema
//!
//! ```json
//! {
//!   "Gamma": 15.0,            // required: reservoir coupling rate
//!   "gamma": 1.0,             // required: reservoir spectral half-width
//!   "T_B": 1.0,               // required: reservoir temperature
//!   "Omega": 1.0,             // reservoir center frequency (default 1.0)
//!   "omega1": 1.0,            // mode-1 frequency (default 1.0)
//!   "omega2": 1.0,            // mode-2 frequency (default 1.0)
//!   "g": 0.1,                 // direct mode-mode coupling (default 0.1)
//!   "n1_init": 1.0,           // initial occupation of mode 1 (default 1.0)
//!   "n2_init": 0.0,           // initial occupation of mode 2 (default 0.0)
//!   "engine": "closed",       // "closed" | "kernel" | "discrete-bath"
//!   "reduction": "shared-memory",   // or "static-cross" (closed engine only)
//!   "matching": "derivative-continuous",  // or "kernel-continuous"
//!   "grid": { "t_end": 20.0, "samples": 2001 },
//!   "window": [5.0, 20.0],    // summary-average window (default [t_end/4, t_end])
//!   "dt": 0.001,              // kernel-engine step (default 1e-3)
//!   "bath_modes": { "modes": 4001, "cutoff": 40.0, "dt": 0.002 },
//!   "schedule": {
//!     "kind": "free",         // "free" | "regular" | "irregular" | "explicit"
//!     "omega_D": 25.0,        // detuning amplitude during a pulse
//!     "tau": 0.27,            // pulse period
//!     "delta": 0.243,         // pulse width -- exactly one of delta / eta
//!     "eta": 0.9,             // duty cycle delta / tau
//!     "jitter_delta": 0.2,    // fractional jitter half-widths (irregular)
//!     "jitter_tau": 0.2,
//!     "jitter_omega_D": 0.2,
//!     "seed": 1,              // jitter RNG seed (irregular)
//!     "pulses": [ { "start": 0.0, "width": 0.5, "amplitude": 25.0 } ]
//!   },
//!   "outputs": { "timeseries": true, "suppression": false },
//!   "sweep": { "axes": [ { "path": "schedule.eta", "values": [0.5, 0.9] } ] }
//! }
//! ```
//!
//! Every scalar is overridable from the command line with
//! `--set dotted.path=value` (values parse as JSON, falling back to a bare
//! string). Unknown keys anywhere are rejected. The `kernel` and
//! `discrete-bath` engines carry the reservoir memory explicitly, so they
//! realize kernel-continuous switching and ignore `matching`; the
//! `static-cross` reduction exists only in the closed engine. A duty cycle
//! of zero (or width zero) means the control is never on and the schedule
//! degenerates to free evolution.

use duobath_core::model::Params;
use duobath_core::propagator::{MatchingMode, Reduction};
use duobath_core::schedule::{self, Pulse, Schedule};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

fn one() -> f64 {
    1.0
}

fn default_g() -> f64 {
    0.1
}

fn default_t_end() -> f64 {
    20.0
}

fn default_samples() -> usize {
    2001
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineChoice {
    Closed,
    Kernel,
    DiscreteBath,
}

impl Default for EngineChoice {
    fn default() -> Self {
        EngineChoice::Closed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchingChoice {
    DerivativeContinuous,
    KernelContinuous,
}

impl Default for MatchingChoice {
    fn default() -> Self {
        MatchingChoice::DerivativeContinuous
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionChoice {
    SharedMemory,
    StaticCross,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { t_end: default_t_end(), samples: default_samples() }
    }
}

fn default_bath_modes() -> usize {
    4001
}

fn default_bath_cutoff() -> f64 {
    40.0
}

fn default_bath_dt() -> f64 {
    2e-3
}

/// Discretization of the reservoir for the `discrete-bath` engine: `modes`
/// frequencies placed uniformly within `cutoff` half-widths of the center,
/// integrated with fixed step `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathModesConfig {
    #[serde(default = "default_bath_modes")]
    pub modes: usize,
    #[serde(default = "default_bath_cutoff")]
    pub cutoff: f64,
    #[serde(default = "default_bath_dt")]
    pub dt: f64,
}

impl Default for BathModesConfig {
    fn default() -> Self {
        BathModesConfig {
            modes: default_bath_modes(),
            cutoff: default_bath_cutoff(),
            dt: default_bath_dt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub start: f64,
    pub width: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "ScheduleConfig::default_kind")]
    pub kind: String,
    #[serde(rename = "omega_D", skip_serializing_if = "Option::is_none", default)]
    pub omega_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub jitter_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub jitter_tau: Option<f64>,
    #[serde(rename = "jitter_omega_D", skip_serializing_if = "Option::is_none", default)]
    pub jitter_omega_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pulses: Option<Vec<PulseConfig>>,
}

impl ScheduleConfig {
    fn default_kind() -> String {
        "free".to_string()
    }

    pub fn free() -> Self {
        ScheduleConfig {
            kind: "free".to_string(),
            omega_d: None,
            tau: None,
            delta: None,
            eta: None,
            jitter_delta: None,
            jitter_tau: None,
            jitter_omega_d: None,
            seed: None,
            pulses: None,
        }
    }
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig::free()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    /// Emit the main time-series CSV.
    #[serde(default = "default_true")]
    pub timeseries: bool,
    /// Also run the same configuration without control and emit the
    /// suppression score of the controlled run against it.
    #[serde(default)]
    pub suppression: bool,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig { timeseries: true, suppression: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted path of the field to vary, e.g. `"T_B"` or `"schedule.eta"`.
    pub path: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<SweepAxis>,
}

/// One fully specified scenario: physical parameters, control schedule,
/// engine and switching-rule choices, sampling grid, and optional sweep axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Reservoir coupling rate (the spectral density integrates to half it).
    #[serde(rename = "Gamma")]
    pub coupling_rate: f64,
    /// Reservoir spectral half-width.
    #[serde(rename = "gamma")]
    pub bath_width: f64,
    /// Reservoir temperature.
    #[serde(rename = "T_B")]
    pub bath_temp: f64,
    /// Reservoir center frequency.
    #[serde(rename = "Omega", default = "one")]
    pub bath_center: f64,
    #[serde(default = "one")]
    pub omega1: f64,
    #[serde(default = "one")]
    pub omega2: f64,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default = "one")]
    pub n1_init: f64,
    #[serde(default)]
    pub n2_init: f64,
    #[serde(default)]
    pub engine: EngineChoice,
    /// Which second-order reduction the closed engine propagates. Omitted
    /// means the faithful shared-memory route.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reduction: Option<ReductionChoice>,
    #[serde(default)]
    pub matching: MatchingChoice,
    #[serde(default)]
    pub grid: GridConfig,
    /// `[t_lo, t_hi]` window for the summary averages.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window: Option<[f64; 2]>,
    /// Kernel-engine integration step.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bath_modes: Option<BathModesConfig>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep: Option<SweepConfig>,
}

/// A `RunConfig` resolved into the core types, ready to propagate.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: Params,
    pub schedule: Schedule,
    pub grid: Vec<f64>,
    pub engine: EngineChoice,
    pub reduction: Reduction,
    pub matching: MatchingMode,
    pub window: (f64, f64),
    pub kernel_dt: f64,
    pub bath: BathModesConfig,
    pub outputs: OutputsConfig,
    /// Seed of the jittered schedule, if one was drawn.
    pub seed: Option<u64>,
}

/// Parse a JSON document into an untyped tree (overrides are applied on the
/// tree before typing it).
pub fn parse_json(text: &str) -> CliResult<Value> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    if !v.is_object() {
        return Err(CliError::Config("the configuration must be a JSON object".into()));
    }
    Ok(v)
}

/// Apply one `dotted.path=value` override to a JSON tree. The value is
/// parsed as JSON when possible (numbers, booleans, arrays, `null`),
/// otherwise taken as a bare string. Intermediate objects are created on
/// demand.
pub fn apply_override(tree: &mut Value, spec: &str) -> CliResult<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{spec}' is not of the form path=value")))?;
    if path.is_empty() {
        return Err(CliError::Config(format!("override '{spec}' has an empty path")));
    }
    let value: Value = match serde_json::from_str(raw) {
        Ok(v) => v,
        Err(_) => Value::String(raw.to_string()),
    };
    set_path(tree, path, value)
}

/// Set `tree[path] = value` where `path` is dot-separated.
pub fn set_path(tree: &mut Value, path: &str, value: Value) -> CliResult<()> {
    let mut cursor = tree;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Config(format!("path '{path}' has an empty component")));
        }
        let obj = cursor.as_object_mut().ok_or_else(|| {
            CliError::Config(format!(
                "path '{path}': '{}' is not an object",
                parts[..i].join(".")
            ))
        })?;
        if i == parts.len() - 1 {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cursor = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(serde_json::Map::new()));
    }
    unreachable!("path components are never empty");
}

/// Type an untyped configuration tree, rejecting unknown keys and reporting
/// missing required fields.
pub fn from_tree(tree: Value) -> CliResult<RunConfig> {
    serde_json::from_value(tree).map_err(|e| CliError::Config(e.to_string()))
}

/// Canonical byte serialization of a configuration (field order is fixed by
/// the schema), used for hashing and the sidecar echo.
pub fn canonical_json(cfg: &RunConfig) -> String {
    serde_json::to_string(cfg).expect("a configuration always serializes")
}

impl RunConfig {
    /// Resolve into core types, checking every cross-field constraint.
    pub fn resolve(&self) -> CliResult<Resolved> {
        let params = Params {
            omega1: self.omega1,
            omega2: self.omega2,
            bath_center: self.bath_center,
            bath_width: self.bath_width,
            coupling_rate: self.coupling_rate,
            g: self.g,
            bath_temp: self.bath_temp,
            n1_init: self.n1_init,
            n2_init: self.n2_init,
        };
        params.validate()?;

        let grid = build_grid(&self.grid)?;
        let t_end = self.grid.t_end;

        let window = match self.window {
            Some([lo, hi]) => {
                if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                    return Err(CliError::Config(format!(
                        "window: needs finite [t_lo, t_hi] with t_lo < t_hi, got [{lo}, {hi}]"
                    )));
                }
                (lo, hi)
            }
            None => (t_end / 4.0, t_end),
        };

        let reduction = match self.reduction {
            None | Some(ReductionChoice::SharedMemory) => Reduction::SharedMemory,
            Some(ReductionChoice::StaticCross) => {
                if self.engine != EngineChoice::Closed {
                    return Err(CliError::Config(
                        "reduction: the static-cross reduction exists only in the closed engine; \
                         the kernel and discrete-bath engines carry the reservoir memory explicitly"
                            .into(),
                    ));
                }
                Reduction::StaticCross
            }
        };

        let matching = match self.matching {
            MatchingChoice::DerivativeContinuous => MatchingMode::DerivativeContinuous,
            MatchingChoice::KernelContinuous => MatchingMode::KernelContinuous,
        };

        let kernel_dt = match self.dt {
            Some(dt) if !(dt > 0.0) || !dt.is_finite() => {
                return Err(CliError::Config(format!("dt: must be positive and finite, got {dt}")));
            }
            Some(dt) => dt,
            None => 1e-3,
        };

        let bath = self.bath_modes.unwrap_or_default();
        if self.engine == EngineChoice::DiscreteBath {
            if !(bath.cutoff > 0.0) || !bath.cutoff.is_finite() {
                return Err(CliError::Config(format!(
                    "bath_modes.cutoff: must be positive and finite, got {}",
                    bath.cutoff
                )));
            }
            if !(bath.dt > 0.0) || !bath.dt.is_finite() {
                return Err(CliError::Config(format!(
                    "bath_modes.dt: must be positive and finite, got {}",
                    bath.dt
                )));
            }
        }

        let (schedule, seed) = build_schedule(&self.schedule, t_end)?;

        Ok(Resolved {
            params,
            schedule,
            grid,
            engine: self.engine,
            reduction,
            matching,
            window,
            kernel_dt,
            bath,
            outputs: self.outputs,
            seed,
        })
    }
}

fn build_grid(grid: &GridConfig) -> CliResult<Vec<f64>> {
    if !(grid.t_end > 0.0) || !grid.t_end.is_finite() {
        return Err(CliError::Config(format!(
            "grid.t_end: must be positive and finite, got {}",
            grid.t_end
        )));
    }
    if grid.samples < 2 {
        return Err(CliError::Config(format!(
            "grid.samples: needs at least 2 samples, got {}",
            grid.samples
        )));
    }
    let n = grid.samples;
    Ok((0..n)
        .map(|k| grid.t_end * k as f64 / (n - 1) as f64)
        .collect())
}

fn require(field: Option<f64>, path: &str) -> CliResult<f64> {
    match field {
        Some(v) if v.is_finite() => Ok(v),
        Some(v) => Err(CliError::Config(format!("{path}: must be finite, got {v}"))),
        None => Err(CliError::Config(format!("{path}: required for this schedule kind"))),
    }
}

fn reject_pulse_fields(s: &ScheduleConfig, kind: &str) -> CliResult<()> {
    let mut stray = Vec::new();
    if s.omega_d.is_some() {
        stray.push("omega_D");
    }
    if s.tau.is_some() {
        stray.push("tau");
    }
    if s.delta.is_some() {
        stray.push("delta");
    }
    if s.eta.is_some() {
        stray.push("eta");
    }
    if s.jitter_delta.is_some() || s.jitter_tau.is_some() || s.jitter_omega_d.is_some() {
        stray.push("jitter_*");
    }
    if s.seed.is_some() {
        stray.push("seed");
    }
    if !stray.is_empty() {
        return Err(CliError::Config(format!(
            "schedule: kind '{kind}' does not take {}",
            stray.join(", ")
        )));
    }
    Ok(())
}

/// Pulse width and period from the `(delta, tau)` / `(eta, tau)` pair;
/// exactly one of the two forms must be present.
fn resolve_geometry(s: &ScheduleConfig) -> CliResult<(f64, f64)> {
    let tau = require(s.tau, "schedule.tau")?;
    if !(tau > 0.0) {
        return Err(CliError::Config(format!(
            "schedule.tau: the pulse period must be positive, got {tau}"
        )));
    }
    let delta = match (s.delta, s.eta) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "schedule: give exactly one of schedule.delta and schedule.eta, not both".into(),
            ));
        }
        (None, None) => {
            return Err(CliError::Config(
                "schedule: give exactly one of schedule.delta (pulse width) and schedule.eta \
                 (duty cycle)"
                    .into(),
            ));
        }
        (Some(d), None) => {
            if !d.is_finite() || d < 0.0 {
                return Err(CliError::Config(format!(
                    "schedule.delta: must be a non-negative finite width, got {d}"
                )));
            }
            d
        }
        (None, Some(eta)) => {
            if !eta.is_finite() || eta < 0.0 {
                return Err(CliError::Config(format!(
                    "schedule.eta: the duty cycle must be non-negative and finite, got {eta}"
                )));
            }
            eta * tau
        }
    };
    if delta > tau {
        return Err(CliError::Config(format!(
            "schedule.delta: the pulse width ({delta}) must not exceed the period ({tau}); \
             the control is on for at most the whole of each cycle (duty cycle at most 1)"
        )));
    }
    Ok((delta, tau))
}

/// Build the control schedule on `[0, t_end]`. Returns the jitter seed when
/// one was used. A zero pulse width degenerates to free evolution.
pub fn build_schedule(s: &ScheduleConfig, t_end: f64) -> CliResult<(Schedule, Option<u64>)> {
    match s.kind.as_str() {
        "free" => {
            reject_pulse_fields(s, "free")?;
            if s.pulses.is_some() {
                return Err(CliError::Config(
                    "schedule.pulses: only the 'explicit' kind takes a pulse list".into(),
                ));
            }
            Ok((schedule::free_schedule(t_end)?, None))
        }
        "regular" => {
            if s.pulses.is_some() {
                return Err(CliError::Config(
                    "schedule.pulses: only the 'explicit' kind takes a pulse list".into(),
                ));
            }
            if s.jitter_delta.is_some() || s.jitter_tau.is_some() || s.jitter_omega_d.is_some() {
                return Err(CliError::Config(
                    "schedule: jitter fields belong to the 'irregular' kind".into(),
                ));
            }
            if s.seed.is_some() {
                return Err(CliError::Config(
                    "schedule.seed: only the 'irregular' kind draws random numbers".into(),
                ));
            }
            let omega_d = require(s.omega_d, "schedule.omega_D")?;
            let (delta, tau) = resolve_geometry(s)?;
            if delta == 0.0 {
                return Ok((schedule::free_schedule(t_end)?, None));
            }
            Ok((
                schedule::regular_schedule(omega_d, delta, tau, t_end)
                    .map_err(|e| CliError::Config(format!("schedule: {e}")))?,
                None,
            ))
        }
        "irregular" => {
            if s.pulses.is_some() {
                return Err(CliError::Config(
                    "schedule.pulses: only the 'explicit' kind takes a pulse list".into(),
                ));
            }
            let omega_d = require(s.omega_d, "schedule.omega_D")?;
            let (delta, tau) = resolve_geometry(s)?;
            let frac = |v: Option<f64>, path: &str| -> CliResult<f64> {
                match v {
                    None => Ok(0.0),
                    Some(f) if f.is_finite() && f >= 0.0 => Ok(f),
                    Some(f) => Err(CliError::Config(format!(
                        "{path}: fractional jitter must be non-negative and finite, got {f}"
                    ))),
                }
            };
            let jd = frac(s.jitter_delta, "schedule.jitter_delta")?;
            let jt = frac(s.jitter_tau, "schedule.jitter_tau")?;
            let jw = frac(s.jitter_omega_d, "schedule.jitter_omega_D")?;
            let seed = s.seed.unwrap_or(1);
            if delta == 0.0 {
                return Ok((schedule::free_schedule(t_end)?, None));
            }
            let sched = schedule::irregular_schedule(
                omega_d,
                delta,
                tau,
                jd * delta,
                jt * tau,
                jw * omega_d.abs(),
                seed,
                t_end,
            )
            .map_err(|e| CliError::Config(format!("schedule: {e}")))?;
            Ok((sched, Some(seed)))
        }
        "explicit" => {
            reject_pulse_fields(s, "explicit")?;
            let pulses = s.pulses.as_ref().ok_or_else(|| {
                CliError::Config("schedule.pulses: required for the 'explicit' kind".into())
            })?;
            let core_pulses: Vec<Pulse> = pulses
                .iter()
                .map(|p| Pulse { start: p.start, width: p.width, amplitude: p.amplitude })
                .collect();
            Ok((
                schedule::explicit_schedule(core_pulses, t_end)
                    .map_err(|e| CliError::Config(format!("schedule.pulses: {e}")))?,
                None,
            ))
        }
        other => Err(CliError::Config(format!(
            "schedule.kind: unknown kind '{other}' (expected free, regular, irregular, or explicit)"
        ))),
    }
}
