//! Scenario execution: single runs, Cartesian parameter sweeps (parallel,
//! deterministic ordering), regular-vs-jittered control comparison, and
//! filter-function emission. Every entry point returns the structured record
//! it also writes to disk.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use duobath_core::observables::{
    self, suppression_onset, ObservableSeries, SuppressionSeries, SUPPRESSION_FLOOR,
};
use duobath_core::oracle;
use duobath_core::propagator::{self, Engine, MatchingMode, Reduction, Trajectory};
use duobath_core::schedule::{filter_function, to_segments};
use serde::Serialize;
use serde_json::Value;

use crate::config::{self, EngineChoice, Resolved, RunConfig, SweepAxis};
use crate::error::{CliError, CliResult};
use crate::output;
use crate::TOOL_VERSION;

/// Scalar digest of one run, embedded in sidecars and sweep tables.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    /// Averaging window `[t_lo, t_hi]` of the two means below.
    pub window: [f64; 2],
    pub window_avg_n1: f64,
    pub window_avg_n2: f64,
    pub monotonic_rise: bool,
    pub revival_count: usize,
    pub witness_max: f64,
    pub final_n1: f64,
    pub final_n2: f64,
    /// Worst violation of the conservation the engine is supposed to honor:
    /// excess of `|A1|^2 + |A2|^2` above 1 for the closed and kernel
    /// engines, drift of the total (modes + reservoir) norm from 1 for the
    /// discrete-bath engine.
    pub norm_drift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermal_transfer_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suppression: Option<SuppressionSummary>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuppressionSummary {
    pub s_max: f64,
    pub s_min: f64,
    pub s_final: f64,
    pub evaluated: usize,
    pub skipped_flat: usize,
}

/// How a trajectory was produced, in sidecar vocabulary.
#[derive(Debug, Clone, Serialize)]
pub struct ProvenanceOut {
    pub engine: &'static str,
    pub reduction: &'static str,
    pub matching: &'static str,
    /// Jitter seed; `null` for deterministic schedules.
    pub seed: Option<u64>,
    pub fallback_segments: usize,
    pub companion_segments: usize,
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Closed => "closed",
        Engine::KernelOde => "kernel",
        Engine::DiscreteBath => "discrete-bath",
    }
}

fn reduction_name(r: Reduction) -> &'static str {
    match r {
        Reduction::SharedMemory => "shared-memory",
        Reduction::StaticCross => "static-cross",
    }
}

fn matching_name(m: MatchingMode) -> &'static str {
    match m {
        MatchingMode::DerivativeContinuous => "derivative-continuous",
        MatchingMode::KernelContinuous => "kernel-continuous",
    }
}

/// Everything one scenario produced, before any of it lands on disk.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: RunConfig,
    pub resolved: Resolved,
    pub observables: ObservableSeries,
    pub provenance: ProvenanceOut,
    pub suppression: Option<SuppressionSeries>,
    pub summary: Summary,
}

/// JSON sidecar of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub tool_version: &'static str,
    pub config_hash: String,
    pub provenance: ProvenanceOut,
    pub files: Vec<String>,
    pub summary: Summary,
    pub config: RunConfig,
}

fn propagate_resolved(r: &Resolved) -> CliResult<(Trajectory, f64, Option<f64>)> {
    let segments = to_segments(&r.schedule);
    match r.engine {
        EngineChoice::Closed => {
            let traj =
                propagator::propagate(&r.params, &segments, &r.grid, r.reduction, r.matching)?;
            let drift = traj
                .states
                .iter()
                .map(|s| (s.norm_sq() - 1.0).max(0.0))
                .fold(0.0f64, f64::max);
            Ok((traj, drift, None))
        }
        EngineChoice::Kernel => {
            let traj = oracle::integrate_kernel(&r.params, &segments, &r.grid, r.kernel_dt)?;
            let drift = traj
                .states
                .iter()
                .map(|s| (s.norm_sq() - 1.0).max(0.0))
                .fold(0.0f64, f64::max);
            Ok((traj, drift, None))
        }
        EngineChoice::DiscreteBath => {
            let run = oracle::integrate_discrete_bath(
                &r.params,
                &segments,
                &r.grid,
                r.bath.modes,
                r.bath.cutoff,
                r.bath.dt,
            )?;
            let drift = run
                .norm
                .iter()
                .map(|n| (n - 1.0).abs())
                .fold(0.0f64, f64::max);
            let transfer = run.thermal_transfer.last().copied();
            Ok((run.trajectory, drift, transfer))
        }
    }
}

/// Run one scenario: propagate, reduce to observables, optionally score the
/// suppression against the free twin of the same configuration.
pub fn execute(cfg: &RunConfig) -> CliResult<RunArtifacts> {
    let resolved = cfg.resolve()?;
    let (traj, norm_drift, thermal_transfer_final) = propagate_resolved(&resolved)?;
    let obs = observables::observables(&resolved.params, &traj)?;

    let suppression = if resolved.outputs.suppression {
        let mut twin = cfg.clone();
        twin.schedule = config::ScheduleConfig::free();
        twin.outputs.suppression = false;
        twin.sweep = None;
        let twin_resolved = twin.resolve()?;
        let (twin_traj, _, _) = propagate_resolved(&twin_resolved)?;
        let twin_obs = observables::observables(&twin_resolved.params, &twin_traj)?;
        Some(observables::suppression(
            &obs.times,
            &obs.n1,
            &twin_obs.n1,
            suppression_onset(&resolved.params),
            SUPPRESSION_FLOOR,
        )?)
    } else {
        None
    };

    let trend = observables::trend_checks(&obs, None)?;
    let (lo, hi) = resolved.window;
    let window_avg_n1 = observables::window_average(&obs.times, &obs.n1, lo, hi)?;
    let window_avg_n2 = observables::window_average(&obs.times, &obs.n2, lo, hi)?;

    let suppression_summary = suppression.as_ref().map(|s| {
        let mut s_max = f64::NEG_INFINITY;
        let mut s_min = f64::INFINITY;
        let mut s_final = f64::NAN;
        for &v in &s.values {
            if v.is_finite() {
                s_max = s_max.max(v);
                s_min = s_min.min(v);
                s_final = v;
            }
        }
        SuppressionSummary {
            s_max,
            s_min,
            s_final,
            evaluated: s.evaluated,
            skipped_flat: s.skipped_flat,
        }
    });

    let summary = Summary {
        window: [lo, hi],
        window_avg_n1,
        window_avg_n2,
        monotonic_rise: trend.monotonic_rise,
        revival_count: trend.revival_count,
        witness_max: trend.witness_max,
        final_n1: *obs.n1.last().expect("grids have at least 2 points"),
        final_n2: *obs.n2.last().expect("grids have at least 2 points"),
        norm_drift,
        thermal_transfer_final,
        suppression: suppression_summary,
    };

    let provenance = ProvenanceOut {
        engine: engine_name(traj.provenance.engine),
        reduction: reduction_name(traj.provenance.reduction),
        matching: matching_name(traj.provenance.matching),
        seed: resolved.seed,
        fallback_segments: traj.provenance.fallback_segments,
        companion_segments: traj.provenance.companion_segments,
    };

    Ok(RunArtifacts {
        config: cfg.clone(),
        resolved,
        observables: obs,
        provenance,
        suppression,
        summary,
    })
}

/// Serialize a record as pretty JSON with a trailing newline.
pub fn record_json<T: Serialize>(record: &T) -> String {
    let mut text = serde_json::to_string_pretty(record).expect("records always serialize");
    text.push('\n');
    text
}

/// Run one scenario and write its artifacts under `out_dir` as
/// `<name>.csv`, optional `<name>_suppression.csv`, and `<name>.json`.
pub fn run_to_files(out_dir: &Path, name: &str, cfg: &RunConfig) -> CliResult<(RunRecord, Vec<PathBuf>)> {
    let art = execute(cfg)?;
    let mut files = Vec::new();
    let mut paths = Vec::new();

    if art.resolved.outputs.timeseries {
        let csv = output::timeseries_csv(&art.observables, &art.resolved.schedule)?;
        let path = out_dir.join(format!("{name}.csv"));
        output::write_atomic(&path, csv.as_bytes())?;
        files.push(format!("{name}.csv"));
        paths.push(path);
    }
    if let Some(s) = &art.suppression {
        let csv = output::suppression_csv(s);
        let path = out_dir.join(format!("{name}_suppression.csv"));
        output::write_atomic(&path, csv.as_bytes())?;
        files.push(format!("{name}_suppression.csv"));
        paths.push(path);
    }

    let record = RunRecord {
        tool_version: TOOL_VERSION,
        config_hash: output::sha256_hex(config::canonical_json(cfg).as_bytes()),
        provenance: art.provenance.clone(),
        files: files.clone(),
        summary: art.summary.clone(),
        config: art.config.clone(),
    };
    let path = out_dir.join(format!("{name}.json"));
    output::write_atomic(&path, record_json(&record).as_bytes())?;
    paths.push(path);
    Ok((record, paths))
}

/// Upper bound on the number of sweep combinations.
pub const SWEEP_CAP: usize = 10_000;

#[derive(Debug, Clone, Serialize)]
pub struct ComboRecord {
    /// Axis values of this combination, in axis order.
    pub values: Vec<Value>,
    /// Base name of the combination's own artifacts.
    pub name: String,
    pub summary: Summary,
}

/// JSON sidecar of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub tool_version: &'static str,
    pub config_hash: String,
    pub axes: Vec<SweepAxis>,
    pub combinations: Vec<ComboRecord>,
    pub files: Vec<String>,
}

fn worker_count(total: usize) -> usize {
    let from_env = std::env::var("DUOBATH_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1);
    let auto = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    from_env.unwrap_or(auto).min(total.max(1))
}

fn value_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) => output::format_sig(x),
            None => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Expand the sweep axes of `cfg` into their Cartesian product (first axis
/// slowest), run every combination (in parallel, bounded by
/// `DUOBATH_WORKERS` or the machine's parallelism), and write per-run
/// artifacts plus an aggregated `<name>_sweep.csv` / `<name>_sweep.json`
/// with exactly one row per combination, in combination order.
pub fn sweep_to_files(out_dir: &Path, name: &str, cfg: &RunConfig) -> CliResult<(SweepRecord, Vec<PathBuf>)> {
    let axes: Vec<SweepAxis> = cfg
        .sweep
        .as_ref()
        .map(|s| s.axes.clone())
        .unwrap_or_default();
    if axes.is_empty() {
        return Err(CliError::Config(
            "sweep: the configuration defines no sweep axes".into(),
        ));
    }
    if axes.len() > 3 {
        return Err(CliError::Config(format!(
            "sweep.axes: at most 3 axes are supported, got {}",
            axes.len()
        )));
    }
    for (i, axis) in axes.iter().enumerate() {
        if axis.values.is_empty() {
            return Err(CliError::Config(format!(
                "sweep.axes[{i}]: the value list for '{}' is empty",
                axis.path
            )));
        }
    }
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    if total > SWEEP_CAP {
        return Err(CliError::Config(format!(
            "sweep: {total} combinations exceed the cap of {SWEEP_CAP}"
        )));
    }

    // base tree with the axes stripped, so every combination is a valid
    // standalone configuration
    let mut base_cfg = cfg.clone();
    base_cfg.sweep = None;
    let base_tree: Value = serde_json::to_value(&base_cfg).expect("configs always serialize");

    let width = format!("{}", total.saturating_sub(1)).len();
    let combo_values = |i: usize| -> Vec<Value> {
        let mut out = Vec::with_capacity(axes.len());
        let mut rest = i;
        let mut strides: Vec<usize> = vec![1; axes.len()];
        for j in (0..axes.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * axes[j + 1].values.len();
        }
        for (j, axis) in axes.iter().enumerate() {
            let idx = rest / strides[j];
            rest %= strides[j];
            out.push(axis.values[idx].clone());
        }
        out
    };

    let run_combo = |i: usize| -> CliResult<(ComboRecord, Vec<PathBuf>)> {
        let values = combo_values(i);
        let mut tree = base_tree.clone();
        for (axis, value) in axes.iter().zip(&values) {
            config::set_path(&mut tree, &axis.path, value.clone())?;
        }
        let combo_cfg = config::from_tree(tree).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("sweep combination {i}: {m}")),
            other => other,
        })?;
        let combo_name = format!("{name}_{i:0width$}");
        let (record, paths) = run_to_files(out_dir, &combo_name, &combo_cfg)?;
        Ok((
            ComboRecord { values, name: combo_name, summary: record.summary },
            paths,
        ))
    };

    let results: Vec<Mutex<Option<CliResult<(ComboRecord, Vec<PathBuf>)>>>> =
        (0..total).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = worker_count(total);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= total {
                    break;
                }
                let res = run_combo(i);
                *results[i].lock().expect("result slot poisoned") = Some(res);
            });
        }
    });

    let mut combos = Vec::with_capacity(total);
    let mut all_paths = Vec::new();
    for slot in results {
        let res = slot
            .into_inner()
            .expect("result slot poisoned")
            .expect("every combination index was claimed");
        let (combo, paths) = res?;
        combos.push(combo);
        all_paths.extend(paths);
    }

    // aggregate table: one row per combination, axis columns then summary
    let with_suppression = cfg.outputs.suppression;
    let mut csv = String::new();
    for axis in &axes {
        csv.push_str(&axis.path.replace('.', "_"));
        csv.push(',');
    }
    csv.push_str("window_avg_n1,window_avg_n2,revival_count,monotonic_rise,witness_max,final_n1,final_n2,norm_drift");
    if with_suppression {
        csv.push_str(",s_max,s_min,s_final");
    }
    csv.push('\n');
    for combo in &combos {
        for v in &combo.values {
            csv.push_str(&value_cell(v));
            csv.push(',');
        }
        let s = &combo.summary;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}",
            output::format_sig(s.window_avg_n1),
            output::format_sig(s.window_avg_n2),
            s.revival_count,
            s.monotonic_rise,
            output::format_sig(s.witness_max),
            output::format_sig(s.final_n1),
            output::format_sig(s.final_n2),
            output::format_sig(s.norm_drift),
        ));
        if with_suppression {
            let sup = combo
                .summary
                .suppression
                .as_ref()
                .expect("suppression summaries exist when requested");
            csv.push_str(&format!(
                ",{},{},{}",
                output::format_sig(sup.s_max),
                output::format_sig(sup.s_min),
                output::format_sig(sup.s_final),
            ));
        }
        csv.push('\n');
    }
    let csv_path = out_dir.join(format!("{name}_sweep.csv"));
    output::write_atomic(&csv_path, csv.as_bytes())?;

    let mut files: Vec<String> = vec![format!("{name}_sweep.csv")];
    files.extend(combos.iter().map(|c| format!("{}.json", c.name)));
    let record = SweepRecord {
        tool_version: TOOL_VERSION,
        config_hash: output::sha256_hex(config::canonical_json(cfg).as_bytes()),
        axes,
        combinations: combos,
        files,
    };
    let json_path = out_dir.join(format!("{name}_sweep.json"));
    output::write_atomic(&json_path, record_json(&record).as_bytes())?;

    all_paths.push(csv_path);
    all_paths.push(json_path);
    Ok((record, all_paths))
}

/// JSON report of a regular-vs-jittered comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CompareRecord {
    pub tool_version: &'static str,
    pub config_hash_regular: String,
    pub config_hash_irregular: String,
    pub seeds: Vec<u64>,
    pub window: [f64; 2],
    pub regular_window_avg_n1: f64,
    pub irregular_window_avg_n1_per_seed: Vec<f64>,
    pub irregular_window_avg_n1_mean: f64,
    /// Seed-averaged jittered mean minus the clockwork mean; positive means
    /// jitter left more quanta in mode 1 over the window.
    pub gap_irregular_minus_regular: f64,
    /// True when the clockwork run and every jittered run produced exactly
    /// the same occupation series (as happens at zero detuning amplitude).
    pub trajectories_identical: bool,
    pub files: Vec<String>,
}

/// Clockwork counterpart of a jittered configuration: the same pulse train
/// with every jitter amplitude and the seed stripped.
pub fn derive_regular(irregular: &RunConfig) -> RunConfig {
    let mut cfg = irregular.clone();
    cfg.schedule.kind = "regular".to_string();
    cfg.schedule.jitter_delta = None;
    cfg.schedule.jitter_tau = None;
    cfg.schedule.jitter_omega_d = None;
    cfg.schedule.seed = None;
    cfg
}

/// Compare a clockwork pulse train against its jittered counterpart across
/// `seeds`. Both configurations must agree on everything except the
/// schedule's jitter; the free-evolution twin of the regular configuration
/// serves as the suppression reference for both.
pub fn compare_to_files(
    out_dir: &Path,
    name: &str,
    regular: &RunConfig,
    irregular: &RunConfig,
    seeds: &[u64],
) -> CliResult<(CompareRecord, Vec<PathBuf>)> {
    if seeds.is_empty() {
        return Err(CliError::Config("compare: the seed list is empty".into()));
    }
    match regular.schedule.kind.as_str() {
        "free" | "regular" => {}
        other => {
            return Err(CliError::Config(format!(
                "compare: the reference configuration must use a free or regular schedule, got '{other}'"
            )));
        }
    }
    if irregular.schedule.kind != "irregular" {
        return Err(CliError::Config(format!(
            "compare: the jittered configuration must use an irregular schedule, got '{}'",
            irregular.schedule.kind
        )));
    }

    let reg_res = regular.resolve()?;
    let irr_res = irregular.resolve()?;
    if reg_res.params != irr_res.params {
        return Err(CliError::Config(
            "compare: the two configurations disagree on the physical parameters".into(),
        ));
    }
    if reg_res.grid != irr_res.grid {
        return Err(CliError::Config(
            "compare: the two configurations disagree on the sampling grid".into(),
        ));
    }
    if reg_res.engine != irr_res.engine
        || reg_res.matching != irr_res.matching
        || reg_res.reduction != irr_res.reduction
    {
        return Err(CliError::Config(
            "compare: the two configurations disagree on engine, matching, or reduction".into(),
        ));
    }
    if reg_res.window != irr_res.window {
        return Err(CliError::Config(
            "compare: the two configurations disagree on the summary window".into(),
        ));
    }
    let duty = |cfg: &RunConfig| -> CliResult<f64> {
        match cfg.schedule.kind.as_str() {
            "free" => Ok(0.0),
            _ => {
                let tau = cfg.schedule.tau.unwrap_or(f64::NAN);
                let delta = match (cfg.schedule.delta, cfg.schedule.eta) {
                    (Some(d), None) => d,
                    (None, Some(e)) => e * tau,
                    _ => f64::NAN,
                };
                Ok(delta / tau)
            }
        }
    };
    let duty_reg = duty(regular)?;
    let duty_irr = duty(irregular)?;
    if (duty_reg - duty_irr).abs() > 1e-9 * (1.0 + duty_irr.abs()) {
        return Err(CliError::Config(format!(
            "compare: the nominal duty cycles differ ({duty_reg} vs {duty_irr})"
        )));
    }

    // free twin of the shared parameters: the suppression reference
    let mut free_cfg = regular.clone();
    free_cfg.schedule = config::ScheduleConfig::free();
    free_cfg.outputs.suppression = false;
    free_cfg.sweep = None;
    let free_art = execute(&free_cfg)?;

    let mut reg_cfg = regular.clone();
    reg_cfg.outputs.suppression = false;
    reg_cfg.sweep = None;
    let reg_art = execute(&reg_cfg)?;

    let (lo, hi) = reg_res.window;
    let onset = suppression_onset(&reg_res.params);
    let s_regular = observables::suppression(
        &reg_art.observables.times,
        &reg_art.observables.n1,
        &free_art.observables.n1,
        onset,
        SUPPRESSION_FLOOR,
    )?;

    let mut per_seed = Vec::with_capacity(seeds.len());
    let mut s_sum: Vec<f64> = vec![0.0; reg_art.observables.times.len()];
    let mut identical = true;
    for &seed in seeds {
        let mut cfg = irregular.clone();
        cfg.schedule.seed = Some(seed);
        cfg.outputs.suppression = false;
        cfg.sweep = None;
        let art = execute(&cfg)?;
        identical = identical && art.observables.n1 == reg_art.observables.n1;
        per_seed.push(observables::window_average(
            &art.observables.times,
            &art.observables.n1,
            lo,
            hi,
        )?);
        let s = observables::suppression(
            &art.observables.times,
            &art.observables.n1,
            &free_art.observables.n1,
            onset,
            SUPPRESSION_FLOOR,
        )?;
        for (acc, v) in s_sum.iter_mut().zip(&s.values) {
            *acc += v;
        }
    }
    let n_seeds = seeds.len() as f64;
    let s_mean: Vec<f64> = s_sum.iter().map(|v| v / n_seeds).collect();

    let regular_avg = observables::window_average(
        &reg_art.observables.times,
        &reg_art.observables.n1,
        lo,
        hi,
    )?;
    let irregular_mean = per_seed.iter().sum::<f64>() / n_seeds;

    let mut csv = String::from("t,S_regular,S_irregular_mean\n");
    for i in 0..s_regular.times.len() {
        csv.push_str(&format!(
            "{},{},{}\n",
            output::format_sig(s_regular.times[i]),
            output::format_sig(s_regular.values[i]),
            output::format_sig(s_mean[i]),
        ));
    }
    let csv_path = out_dir.join(format!("{name}_suppression.csv"));
    output::write_atomic(&csv_path, csv.as_bytes())?;

    let record = CompareRecord {
        tool_version: TOOL_VERSION,
        config_hash_regular: output::sha256_hex(config::canonical_json(regular).as_bytes()),
        config_hash_irregular: output::sha256_hex(config::canonical_json(irregular).as_bytes()),
        seeds: seeds.to_vec(),
        window: [lo, hi],
        regular_window_avg_n1: regular_avg,
        irregular_window_avg_n1_per_seed: per_seed,
        irregular_window_avg_n1_mean: irregular_mean,
        gap_irregular_minus_regular: irregular_mean - regular_avg,
        trajectories_identical: identical,
        files: vec![format!("{name}_suppression.csv")],
    };
    let json_path = out_dir.join(format!("{name}.json"));
    output::write_atomic(&json_path, record_json(&record).as_bytes())?;

    Ok((record, vec![csv_path, json_path]))
}

/// Evaluate the schedule's filter function on a frequency grid and write it
/// as `<name>_filter.csv`.
pub fn filter_to_files(
    out_dir: &Path,
    name: &str,
    cfg: &RunConfig,
    omega_min: f64,
    omega_max: f64,
    samples: usize,
) -> CliResult<PathBuf> {
    if !omega_min.is_finite() || !omega_max.is_finite() || !(omega_min < omega_max) {
        return Err(CliError::Config(format!(
            "filter: needs a finite frequency range with min < max, got [{omega_min}, {omega_max}]"
        )));
    }
    if samples < 2 {
        return Err(CliError::Config(format!(
            "filter: needs at least 2 frequency samples, got {samples}"
        )));
    }
    let resolved = cfg.resolve()?;
    let omegas: Vec<f64> = (0..samples)
        .map(|k| omega_min + (omega_max - omega_min) * k as f64 / (samples - 1) as f64)
        .collect();
    let values: Vec<f64> = omegas
        .iter()
        .map(|&w| filter_function(&resolved.schedule, w))
        .collect();
    let csv = output::filter_csv(&omegas, &values);
    let path = out_dir.join(format!("{name}_filter.csv"));
    output::write_atomic(&path, csv.as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_json, from_tree, set_path};

    fn tmp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("duobath-runner-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        dir
    }

    fn small_cfg() -> RunConfig {
        let mut tree = parse_json(r#"{"Gamma": 15.0, "gamma": 1.0, "T_B": 1.0}"#).unwrap();
        set_path(&mut tree, "grid", serde_json::json!({"t_end": 5.0, "samples": 101})).unwrap();
        from_tree(tree).unwrap()
    }

    #[test]
    fn a_free_run_produces_a_complete_record() {
        let dir = tmp_dir("run");
        let (record, paths) = run_to_files(&dir, "probe", &small_cfg()).unwrap();
        assert_eq!(record.files, vec!["probe.csv".to_string()]);
        assert_eq!(paths.len(), 2);
        let csv = std::fs::read_to_string(&paths[0]).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), output::TIMESERIES_HEADER);
        assert_eq!(lines.count(), 101);
        assert_eq!(record.provenance.engine, "closed");
        assert_eq!(record.provenance.reduction, "shared-memory");
        assert!(record.provenance.seed.is_none());
        assert!(record.summary.norm_drift <= 1e-12);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn an_uncontrolled_run_scores_zero_suppression_against_itself() {
        let mut cfg = small_cfg();
        cfg.outputs.suppression = true;
        let art = execute(&cfg).unwrap();
        let s = art.suppression.unwrap();
        assert!(s.evaluated > 0);
        for (&t, &v) in s.times.iter().zip(&s.values) {
            if v.is_finite() {
                assert_eq!(v, 0.0, "suppression of a run against itself at t={t}");
            }
        }
    }

    #[test]
    fn sweeps_expand_lexicographically_with_one_row_per_combination() {
        let dir = tmp_dir("sweep");
        let mut cfg = small_cfg();
        cfg.sweep = Some(crate::config::SweepConfig {
            axes: vec![
                SweepAxis {
                    path: "T_B".into(),
                    values: vec![serde_json::json!(0.5), serde_json::json!(1.0)],
                },
                SweepAxis {
                    path: "g".into(),
                    values: vec![serde_json::json!(0.0), serde_json::json!(0.1)],
                },
            ],
        });
        let (record, _) = sweep_to_files(&dir, "grid", &cfg).unwrap();
        assert_eq!(record.combinations.len(), 4);
        let got: Vec<(f64, f64)> = record
            .combinations
            .iter()
            .map(|c| (c.values[0].as_f64().unwrap(), c.values[1].as_f64().unwrap()))
            .collect();
        assert_eq!(got, vec![(0.5, 0.0), (0.5, 0.1), (1.0, 0.0), (1.0, 0.1)]);
        let table = std::fs::read_to_string(dir.join("grid_sweep.csv")).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("T_B,g,window_avg_n1"));
        // per-combination artifacts exist under zero-padded names
        assert!(dir.join("grid_0.csv").exists());
        assert!(dir.join("grid_3.json").exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn oversized_and_overdimensioned_sweeps_are_refused() {
        let mut cfg = small_cfg();
        let axis = |p: &str, n: usize| SweepAxis {
            path: p.into(),
            values: (0..n).map(|i| serde_json::json!(0.1 + i as f64 * 1e-4)).collect(),
        };
        cfg.sweep = Some(crate::config::SweepConfig {
            axes: vec![axis("T_B", 101), axis("g", 100)],
        });
        let err = sweep_to_files(&tmp_dir("cap"), "x", &cfg).unwrap_err();
        assert!(err.to_string().contains("10100 combinations"), "{err}");

        cfg.sweep = Some(crate::config::SweepConfig {
            axes: vec![axis("T_B", 2), axis("g", 2), axis("omega1", 2), axis("omega2", 2)],
        });
        let err = sweep_to_files(&tmp_dir("cap2"), "x", &cfg).unwrap_err();
        assert!(err.to_string().contains("at most 3 axes"), "{err}");
    }

    #[test]
    fn zero_amplitude_comparison_reports_an_exactly_zero_gap() {
        let dir = tmp_dir("cmp");
        let mut tree = parse_json(r#"{"Gamma": 15.0, "gamma": 1.0, "T_B": 1.0}"#).unwrap();
        set_path(&mut tree, "grid", serde_json::json!({"t_end": 5.0, "samples": 101})).unwrap();
        set_path(&mut tree, "schedule.kind", serde_json::json!("regular")).unwrap();
        set_path(&mut tree, "schedule.omega_D", serde_json::json!(0.0)).unwrap();
        set_path(&mut tree, "schedule.tau", serde_json::json!(0.27)).unwrap();
        set_path(&mut tree, "schedule.eta", serde_json::json!(0.5)).unwrap();
        let regular = from_tree(tree.clone()).unwrap();
        set_path(&mut tree, "schedule.kind", serde_json::json!("irregular")).unwrap();
        set_path(&mut tree, "schedule.jitter_delta", serde_json::json!(0.2)).unwrap();
        set_path(&mut tree, "schedule.jitter_tau", serde_json::json!(0.2)).unwrap();
        set_path(&mut tree, "schedule.jitter_omega_D", serde_json::json!(0.2)).unwrap();
        let irregular = from_tree(tree).unwrap();
        let (record, _) = compare_to_files(&dir, "null", &regular, &irregular, &[1, 2, 3]).unwrap();
        assert_eq!(record.gap_irregular_minus_regular, 0.0);
        assert!(record.trajectories_identical);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn mismatched_comparisons_are_rejected() {
        let mut tree = parse_json(r#"{"Gamma": 15.0, "gamma": 1.0, "T_B": 1.0}"#).unwrap();
        set_path(&mut tree, "schedule.kind", serde_json::json!("regular")).unwrap();
        set_path(&mut tree, "schedule.omega_D", serde_json::json!(25.0)).unwrap();
        set_path(&mut tree, "schedule.tau", serde_json::json!(0.27)).unwrap();
        set_path(&mut tree, "schedule.eta", serde_json::json!(0.5)).unwrap();
        let regular = from_tree(tree.clone()).unwrap();

        // different temperature
        set_path(&mut tree, "schedule.kind", serde_json::json!("irregular")).unwrap();
        set_path(&mut tree, "schedule.jitter_delta", serde_json::json!(0.2)).unwrap();
        set_path(&mut tree, "T_B", serde_json::json!(2.0)).unwrap();
        let hot = from_tree(tree.clone()).unwrap();
        let err = compare_to_files(&tmp_dir("mm"), "x", &regular, &hot, &[1]).unwrap_err();
        assert!(err.to_string().contains("physical parameters"), "{err}");
        assert_eq!(err.exit_code(), 2);

        // different duty cycle
        set_path(&mut tree, "T_B", serde_json::json!(1.0)).unwrap();
        set_path(&mut tree, "schedule.eta", serde_json::json!(0.9)).unwrap();
        let wider = from_tree(tree).unwrap();
        let err = compare_to_files(&tmp_dir("mm2"), "x", &regular, &wider, &[1]).unwrap_err();
        assert!(err.to_string().contains("duty"), "{err}");
    }

    #[test]
    fn filter_emission_covers_the_requested_grid() {
        let dir = tmp_dir("filter");
        let mut tree = parse_json(r#"{"Gamma": 15.0, "gamma": 1.0, "T_B": 1.0}"#).unwrap();
        set_path(&mut tree, "schedule.kind", serde_json::json!("regular")).unwrap();
        set_path(&mut tree, "schedule.omega_D", serde_json::json!(25.0)).unwrap();
        set_path(&mut tree, "schedule.tau", serde_json::json!(0.27)).unwrap();
        set_path(&mut tree, "schedule.eta", serde_json::json!(0.9)).unwrap();
        let cfg = from_tree(tree).unwrap();
        let path = filter_to_files(&dir, "train", &cfg, 0.0, 50.0, 51).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], output::FILTER_HEADER);
        assert_eq!(lines.len(), 52);
        assert!(lines[1].starts_with("0.00000000000e0,"));
        assert!(filter_to_files(&dir, "bad", &cfg, 5.0, 5.0, 51).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
