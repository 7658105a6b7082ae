//! Physical observables reconstructed from propagated amplitudes, the
//! control-performance suppression score, windowed averages, and qualitative
//! trend checks.
//!
//! With one initial excitation split between the two modes and a thermal
//! reservoir, every second moment at time `t` is a combination of the
//! transfer amplitudes and the reservoir occupation. The reservoir
//! contribution is closed with the conserved remainder
//! `leak = 1 - |A1|^2 - |A2|^2` weighted by the occupation at the reservoir
//! center — exact in the narrow-reservoir limit and the documented source of
//! error away from it.

use crate::error::{Error, Result};
use crate::model::Params;
use crate::propagator::Trajectory;
use crate::C64;
use alloc::format;
use alloc::vec::Vec;

/// Occupations, coherence, and derived quantities along a trajectory.
#[derive(Debug, Clone)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    /// Mean quanta in mode 1.
    pub n1: Vec<f64>,
    /// Mean quanta in mode 2.
    pub n2: Vec<f64>,
    /// Intermode coherence `<a1^dag a2>`.
    pub coherence: Vec<C64>,
    pub abs_a1_sq: Vec<f64>,
    pub abs_a2_sq: Vec<f64>,
    /// Share of the initial excitation lost to the reservoir.
    pub leak: Vec<f64>,
    /// `|<a1^dag a2>|^2 - n1 n2`; non-positive for any physical state.
    pub witness: Vec<f64>,
}

/// Tolerated overshoot of `|A1|^2 + |A2|^2` above 1 before a trajectory is
/// declared unphysical.
pub const PHYSICALITY_SLACK: f64 = 1e-6;

/// Reconstruct the observable series from a propagated trajectory.
///
/// Fails with [`Error::Physicality`] (naming the offending time) if the mode
/// amplitudes claim more than the whole initial excitation.
pub fn observables(p: &Params, traj: &Trajectory) -> Result<ObservableSeries> {
    p.validate()?;
    let nb = p.bath_occupation()?;
    let n = traj.times.len();
    if traj.states.len() != n {
        return Err(Error::Contract(format!(
            "trajectory has {} times but {} states",
            n,
            traj.states.len()
        )));
    }
    let mut out = ObservableSeries {
        times: traj.times.clone(),
        n1: Vec::with_capacity(n),
        n2: Vec::with_capacity(n),
        coherence: Vec::with_capacity(n),
        abs_a1_sq: Vec::with_capacity(n),
        abs_a2_sq: Vec::with_capacity(n),
        leak: Vec::with_capacity(n),
        witness: Vec::with_capacity(n),
    };
    for (i, st) in traj.states.iter().enumerate() {
        let x = st.a1.norm_sqr();
        let y = st.a2.norm_sqr();
        if x + y > 1.0 + PHYSICALITY_SLACK {
            return Err(Error::Physicality { time: traj.times[i], norm_sq: x + y });
        }
        let leak = 1.0 - x - y;
        let n1 = x * p.n1_init + y * p.n2_init + leak * nb;
        let n2 = y * p.n1_init + x * p.n2_init + leak * nb;
        let coh = st.a1.conj() * st.a2 * p.n1_init
            + st.a2.conj() * st.a1 * p.n2_init
            + C64::new(leak * nb, 0.0);
        out.n1.push(n1);
        out.n2.push(n2);
        out.coherence.push(coh);
        out.abs_a1_sq.push(x);
        out.abs_a2_sq.push(y);
        out.leak.push(leak);
        out.witness.push(coh.norm_sqr() - n1 * n2);
    }
    Ok(out)
}

/// Default earliest time the suppression score is evaluated at: two periods
/// of the reservoir-center inverse frequency.
pub fn suppression_onset(p: &Params) -> f64 {
    2.0 / p.bath_center
}

/// Default flat-baseline floor below which suppression is skipped.
pub const SUPPRESSION_FLOOR: f64 = 1e-9;

/// Suppression score over time; entries before `t_min` or with a flat free
/// baseline are `NaN`.
#[derive(Debug, Clone)]
pub struct SuppressionSeries {
    pub times: Vec<f64>,
    /// `1 - |n1_controlled - n1_free(0)| / |n1_free - n1_free(0)|`, capped
    /// at 1; `NaN` where not evaluated.
    pub values: Vec<f64>,
    /// Entries actually evaluated.
    pub evaluated: usize,
    /// Entries at or past `t_min` skipped because the free excursion was
    /// below `eps`.
    pub skipped_flat: usize,
}

/// How completely the control froze mode 1 at its initial occupation,
/// relative to the uncontrolled drift: 1 is perfect freezing, 0 is no effect,
/// negative values mean the control made things worse. Both series must share
/// the same time grid; the reference value is the first entry of the free
/// series.
pub fn suppression(
    times: &[f64],
    n1_controlled: &[f64],
    n1_free: &[f64],
    t_min: f64,
    eps: f64,
) -> Result<SuppressionSeries> {
    if times.len() != n1_controlled.len() || times.len() != n1_free.len() {
        return Err(Error::Contract(format!(
            "mismatched series lengths: {} times, {} controlled, {} free",
            times.len(),
            n1_controlled.len(),
            n1_free.len()
        )));
    }
    if times.is_empty() {
        return Err(Error::Contract("suppression needs a non-empty series".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("baseline floor must be positive, got {eps}")));
    }
    let base = n1_free[0];
    let mut values = Vec::with_capacity(times.len());
    let mut evaluated = 0usize;
    let mut skipped_flat = 0usize;
    for i in 0..times.len() {
        if times[i] < t_min {
            values.push(f64::NAN);
            continue;
        }
        let den = (n1_free[i] - base).abs();
        if den < eps {
            skipped_flat += 1;
            values.push(f64::NAN);
            continue;
        }
        let s = 1.0 - (n1_controlled[i] - base).abs() / den;
        values.push(s.min(1.0));
        evaluated += 1;
    }
    Ok(SuppressionSeries { times: times.to_vec(), values, evaluated, skipped_flat })
}

/// Trapezoid mean of `values` over the window `[t_lo, t_hi]`, ignoring
/// non-finite entries; the divisor is the span actually covered by the
/// surviving points. Fewer than two surviving points is a contract error.
pub fn window_average(times: &[f64], values: &[f64], t_lo: f64, t_hi: f64) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::Contract(format!(
            "mismatched series lengths: {} times, {} values",
            times.len(),
            values.len()
        )));
    }
    let mut t: Vec<f64> = Vec::new();
    let mut v: Vec<f64> = Vec::new();
    for i in 0..times.len() {
        if times[i] >= t_lo && times[i] <= t_hi && values[i].is_finite() {
            t.push(times[i]);
            v.push(values[i]);
        }
    }
    if t.len() < 2 {
        return Err(Error::Contract(format!(
            "window [{t_lo}, {t_hi}] holds {} finite samples; the average needs at least 2",
            t.len()
        )));
    }
    let mut integral = 0.0;
    for i in 1..t.len() {
        integral += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
    }
    Ok(integral / (t[t.len() - 1] - t[0]))
}

/// Slack before a dip disqualifies a series from "monotonic rise".
pub const MONOTONIC_SLACK: f64 = 1e-6;
/// Steps smaller than this are treated as flat by the revival counter.
pub const REVIVAL_HYSTERESIS: f64 = 1e-6;
/// Monotonicity is only judged after this initial transient.
pub const MONOTONIC_BURN_IN: f64 = 0.5;

/// Qualitative shape summary of an observable series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendReport {
    /// Mode-1 occupation never falls by more than the slack once past the
    /// burn-in.
    pub monotonic_rise: bool,
    /// Direction reversals of the mode-1 occupation (hysteresis filtered).
    pub revival_count: usize,
    /// Largest witness value seen (a physical series stays non-positive).
    pub witness_max: f64,
}

/// Compute the trend summary, optionally restricted to `t_range`.
pub fn trend_checks(series: &ObservableSeries, t_range: Option<(f64, f64)>) -> Result<TrendReport> {
    let keep: Vec<usize> = match t_range {
        Some((lo, hi)) => (0..series.times.len())
            .filter(|&i| series.times[i] >= lo && series.times[i] <= hi)
            .collect(),
        None => (0..series.times.len()).collect(),
    };
    if keep.is_empty() {
        return Err(Error::Contract("trend checks need at least one sample in range".into()));
    }
    let mut monotonic_rise = true;
    for w in keep.windows(2) {
        let (a, b) = (w[0], w[1]);
        if series.times[b] > MONOTONIC_BURN_IN && series.n1[b] < series.n1[a] - MONOTONIC_SLACK {
            monotonic_rise = false;
            break;
        }
    }
    let mut state = 0i8;
    let mut revival_count = 0usize;
    for w in keep.windows(2) {
        let step = series.n1[w[1]] - series.n1[w[0]];
        if step.abs() <= REVIVAL_HYSTERESIS {
            continue;
        }
        let sgn: i8 = if step > 0.0 { 1 } else { -1 };
        if state == 0 {
            state = sgn;
        } else if sgn != state {
            revival_count += 1;
            state = sgn;
        }
    }
    let witness_max = keep
        .iter()
        .map(|&i| series.witness[i])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(TrendReport { monotonic_rise, revival_count, witness_max })
}
