//! Detuning-pulse schedules: regular trains, jittered trains, the induced
//! piecewise-constant detuning profile, its phase integral, and the spectral
//! filter function of the controlled evolution window.

use crate::error::{Error, Result};
use crate::C64;
use alloc::format;
use alloc::vec::Vec;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// One detuning pulse: detuning `amplitude` applied on `[start, start + width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub start: f64,
    pub width: f64,
    pub amplitude: f64,
}

/// How a schedule was built (kept for provenance; the realized pulse list is
/// authoritative for all evaluation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    Free,
    Regular {
        omega_d: f64,
        delta: f64,
        tau: f64,
    },
    Irregular {
        omega_d: f64,
        delta: f64,
        tau: f64,
        jitter_delta: f64,
        jitter_tau: f64,
        jitter_omega: f64,
        seed: u64,
    },
    /// Pulse list supplied directly by the caller.
    Explicit,
}

/// A pulse train on `[0, horizon]`. Pulses are sorted, non-overlapping, and
/// truncated at the horizon; the detuning is `amplitude` inside a pulse and 0
/// between pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub horizon: f64,
    pub pulses: Vec<Pulse>,
}

/// A maximal interval of constant detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub detuning: f64,
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Parameter(format!(
            "horizon must be positive and finite, got {horizon}"
        )));
    }
    Ok(())
}

/// No control: constant zero detuning on `[0, horizon]`.
pub fn free_schedule(horizon: f64) -> Result<Schedule> {
    check_horizon(horizon)?;
    Ok(Schedule {
        kind: ScheduleKind::Free,
        horizon,
        pulses: Vec::new(),
    })
}

/// Pulses of width `delta` and amplitude `omega_d` starting at every multiple
/// of `tau`, truncated at the horizon. Requires `0 < delta <= tau`; at
/// `delta == tau` the detuning is constantly `omega_d`.
pub fn regular_schedule(omega_d: f64, delta: f64, tau: f64, horizon: f64) -> Result<Schedule> {
    check_horizon(horizon)?;
    for (name, v) in [("omega_d", omega_d), ("delta", delta), ("tau", tau)] {
        if !v.is_finite() {
            return Err(Error::Parameter(format!("{name} must be finite, got {v}")));
        }
    }
    if !(tau > 0.0) {
        return Err(Error::Parameter(format!("pulse period tau must be positive, got {tau}")));
    }
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("pulse width delta must be positive, got {delta}")));
    }
    if delta > tau {
        return Err(Error::Parameter(format!(
            "pulse width delta = {delta} must not exceed the period tau = {tau}"
        )));
    }
    let mut pulses = Vec::new();
    let mut k = 0u64;
    loop {
        let start = k as f64 * tau;
        if start >= horizon {
            break;
        }
        pulses.push(Pulse {
            start,
            width: delta.min(horizon - start),
            amplitude: omega_d,
        });
        k += 1;
    }
    Ok(Schedule {
        kind: ScheduleKind::Regular { omega_d, delta, tau },
        horizon,
        pulses,
    })
}

#[inline]
fn u01(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

#[inline]
fn jittered(rng: &mut ChaCha20Rng, center: f64, half: f64) -> f64 {
    center + half * (2.0 * u01(rng) - 1.0)
}

/// Pulse train with per-cycle independent jitter: cycle `k` draws its width,
/// period, and amplitude uniformly from `center +- jitter`, cycles tile
/// end-to-end (`start_{k+1} = start_k + tau_k`). A draw with
/// `delta_k >= tau_k` (or `delta_k <= 0`) is resampled up to 100 times, then
/// clamped to `delta_k = 0.99 tau_k`. The nominal width may exceed the
/// nominal period as long as the two jitter ranges overlap enough that valid
/// draws exist. Fully determined by `seed`.
#[allow(clippy::too_many_arguments)]
pub fn irregular_schedule(
    omega_d: f64,
    delta: f64,
    tau: f64,
    jitter_delta: f64,
    jitter_tau: f64,
    jitter_omega: f64,
    seed: u64,
    horizon: f64,
) -> Result<Schedule> {
    check_horizon(horizon)?;
    for (name, v) in [
        ("omega_d", omega_d),
        ("delta", delta),
        ("tau", tau),
        ("jitter_delta", jitter_delta),
        ("jitter_tau", jitter_tau),
        ("jitter_omega", jitter_omega),
    ] {
        if !v.is_finite() {
            return Err(Error::Parameter(format!("{name} must be finite, got {v}")));
        }
    }
    if !(tau > 0.0) || !(delta > 0.0) {
        return Err(Error::Parameter(format!(
            "nominal pulse geometry needs positive delta and tau, got delta = {delta}, tau = {tau}"
        )));
    }
    if jitter_delta < 0.0 || jitter_tau < 0.0 || jitter_omega < 0.0 {
        return Err(Error::Parameter("jitter half-widths must be non-negative".into()));
    }
    if tau - jitter_tau <= 0.0 {
        return Err(Error::Parameter(format!(
            "period jitter {jitter_tau} must leave the period positive (tau = {tau})"
        )));
    }
    if delta - jitter_delta >= tau + jitter_tau {
        return Err(Error::Parameter(format!(
            "unsatisfiable jitter ranges: every width draw (>= {}) would reach or exceed every period draw (<= {})",
            delta - jitter_delta,
            tau + jitter_tau
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut pulses = Vec::new();
    let mut t = 0.0f64;
    while t < horizon {
        let mut dk = 0.0;
        let mut tk = 0.0;
        let mut ok = false;
        for _ in 0..100 {
            dk = jittered(&mut rng, delta, jitter_delta);
            tk = jittered(&mut rng, tau, jitter_tau);
            if dk > 0.0 && dk < tk {
                ok = true;
                break;
            }
        }
        if !ok {
            dk = 0.99 * tk;
        }
        let wk = jittered(&mut rng, omega_d, jitter_omega);
        pulses.push(Pulse {
            start: t,
            width: dk.min(horizon - t),
            amplitude: wk,
        });
        t += tk;
    }
    Ok(Schedule {
        kind: ScheduleKind::Irregular {
            omega_d,
            delta,
            tau,
            jitter_delta,
            jitter_tau,
            jitter_omega,
            seed,
        },
        horizon,
        pulses,
    })
}

/// Schedule from a caller-supplied pulse list. Pulses must be sorted by
/// start, strictly positive in width, non-overlapping, and start inside
/// `[0, horizon)`; a pulse running past the horizon is truncated to it.
pub fn explicit_schedule(pulses: Vec<Pulse>, horizon: f64) -> Result<Schedule> {
    check_horizon(horizon)?;
    let mut clipped = Vec::with_capacity(pulses.len());
    for (i, p) in pulses.iter().enumerate() {
        if !p.start.is_finite() || !p.width.is_finite() || !p.amplitude.is_finite() {
            return Err(Error::Parameter(format!(
                "pulse {i} must have finite start, width, and amplitude, got ({}, {}, {})",
                p.start, p.width, p.amplitude
            )));
        }
        if p.start < 0.0 || p.start >= horizon {
            return Err(Error::Parameter(format!(
                "pulse {i} starts at {} outside [0, {horizon})",
                p.start
            )));
        }
        if !(p.width > 0.0) {
            return Err(Error::Parameter(format!(
                "pulse {i} must have positive width, got {}",
                p.width
            )));
        }
        if i > 0 {
            let prev = &pulses[i - 1];
            if p.start < prev.start + prev.width {
                return Err(Error::Parameter(format!(
                    "pulse {i} starting at {} overlaps the previous pulse ending at {}",
                    p.start,
                    prev.start + prev.width
                )));
            }
        }
        clipped.push(Pulse {
            start: p.start,
            width: p.width.min(horizon - p.start),
            amplitude: p.amplitude,
        });
    }
    Ok(Schedule {
        kind: ScheduleKind::Explicit,
        horizon,
        pulses: clipped,
    })
}

/// Detuning at time `t in [0, horizon]`. Pulses are half-open `[start,
/// start+width)`, so the instant a pulse ends already carries the gap value.
pub fn detuning_at(s: &Schedule, t: f64) -> Result<f64> {
    if !(t >= 0.0) || t > s.horizon || !t.is_finite() {
        return Err(Error::Domain(format!(
            "time {t} outside the schedule horizon [0, {}]",
            s.horizon
        )));
    }
    let idx = s.pulses.partition_point(|p| p.start <= t);
    if idx == 0 {
        return Ok(0.0);
    }
    let p = &s.pulses[idx - 1];
    if t < p.start + p.width {
        Ok(p.amplitude)
    } else {
        Ok(0.0)
    }
}

/// Exact phase `integral_0^t d(s) ds` of the piecewise-constant detuning.
pub fn phase_integral(s: &Schedule, t: f64) -> Result<f64> {
    if !(t >= 0.0) || t > s.horizon || !t.is_finite() {
        return Err(Error::Domain(format!(
            "time {t} outside the schedule horizon [0, {}]",
            s.horizon
        )));
    }
    let mut acc = 0.0;
    for p in &s.pulses {
        if p.start >= t {
            break;
        }
        let overlap = (t.min(p.start + p.width) - p.start).max(0.0);
        acc += p.amplitude * overlap;
    }
    Ok(acc)
}

/// Maximal constant-detuning intervals covering `[0, horizon]`, gaps included;
/// contiguous intervals with identical detuning are merged (so a `delta ==
/// tau` regular train collapses to a single segment).
pub fn to_segments(s: &Schedule) -> Vec<Segment> {
    let tol = 1e-12 * s.horizon.max(1.0);
    let mut raw: Vec<Segment> = Vec::new();
    let mut t = 0.0f64;
    for p in &s.pulses {
        if t >= s.horizon {
            break;
        }
        if p.start > t + tol {
            raw.push(Segment { t0: t, t1: p.start, detuning: 0.0 });
            t = p.start;
        }
        let end = (p.start + p.width).min(s.horizon);
        if end > t {
            raw.push(Segment { t0: t, t1: end, detuning: p.amplitude });
            t = end;
        }
    }
    if t < s.horizon {
        raw.push(Segment { t0: t, t1: s.horizon, detuning: 0.0 });
    }
    let mut out: Vec<Segment> = Vec::with_capacity(raw.len());
    for seg in raw {
        match out.last_mut() {
            Some(prev) if prev.detuning == seg.detuning && (seg.t0 - prev.t1).abs() <= tol => {
                prev.t1 = seg.t1;
            }
            _ => out.push(seg),
        }
    }
    out
}

/// Spectral filter function of the control window:
/// `F(omega) = |integral_0^horizon exp(i [omega t + phase(t)]) dt|^2`,
/// evaluated segment-by-segment in closed form. On a segment with detuning
/// `d`, `omega + d = 0` is a removable singularity whose limit is the segment
/// length.
pub fn filter_function(s: &Schedule, omega: f64) -> f64 {
    let mut total = C64::new(0.0, 0.0);
    let mut phase = 0.0f64; // accumulated detuning phase at segment start
    for seg in to_segments(s) {
        let len = seg.t1 - seg.t0;
        let theta = omega + seg.detuning;
        // inner = (exp(i theta len) - 1) / (i theta), written out in
        // real/imaginary parts
        let inner = if theta == 0.0 {
            C64::new(len, 0.0)
        } else {
            let x = theta * len;
            C64::new(libm::sin(x) / theta, (1.0 - libm::cos(x)) / theta)
        };
        let front_arg = phase + omega * seg.t0;
        let front = C64::new(libm::cos(front_arg), libm::sin(front_arg));
        total += front * inner;
        phase += seg.detuning * len;
    }
    total.norm_sqr()
}
