//! Independent numerical references for the closed-form propagator.
//!
//! Two routes, both plain fixed-step Runge-Kutta and free of any modal
//! decomposition:
//!
//! * [`integrate_kernel`] evolves `(A1, A2, M)` with the memory variable kept
//!   explicit. The memory variable is continuous by construction, so this is
//!   the reference for kernel-continuous matching.
//! * [`integrate_discrete_bath`] replaces the reservoir by a finite comb of
//!   modes sampled from the spectral density and evolves every amplitude.
//!   This checks the memory-kernel description itself, not just its solution.
//!
//! [`integrate_segment`] integrates a single segment's second-order pair and
//! backs the propagator's fallback path.

use crate::error::{Error, Result};
use crate::model::{self, Params};
use crate::propagator::{
    check_grid, check_segments, Engine, MatchingMode, Provenance, Reduction, SegmentOde, State,
    Trajectory,
};
use crate::schedule::Segment;
use crate::{C64, IM};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// One classic fourth-order Runge-Kutta pass over `duration` in `n` equal
/// steps, for small fixed-size states.
pub(crate) fn rk4_fixed<const N: usize, F: Fn(&[C64; N]) -> [C64; N]>(
    f: F,
    mut y: [C64; N],
    duration: f64,
    n: usize,
) -> [C64; N] {
    let h = duration / n as f64;
    let axpy = |y: &[C64; N], k: &[C64; N], h: f64| {
        let mut out = *y;
        for i in 0..N {
            out[i] += h * k[i];
        }
        out
    };
    for _ in 0..n {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, 0.5 * h));
        let k3 = f(&axpy(&y, &k2, 0.5 * h));
        let k4 = f(&axpy(&y, &k3, h));
        for i in 0..N {
            y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Runge-Kutta over a heap-allocated state (for the discretized reservoir,
/// whose dimension is chosen at run time). `f(y, out)` writes the derivative
/// into `out`.
fn rk4_fixed_vec<F: Fn(&[C64], &mut [C64])>(f: F, y: &mut [C64], duration: f64, n: usize) {
    let dim = y.len();
    let h = duration / n as f64;
    let mut k1 = vec![C64::new(0.0, 0.0); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for _ in 0..n {
        f(y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        f(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        f(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        f(&tmp, &mut k4);
        for i in 0..dim {
            y[i] += (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
}

/// Number of equal steps that covers `span` with step at most `dt` (a 1e-9
/// relative slack keeps an exact multiple from gaining a step to rounding).
fn step_count(span: f64, dt: f64) -> usize {
    libm::ceil(span / dt - 1e-9).max(1.0) as usize
}

/// Integrate one segment's second-order pair for `duration` with steps of at
/// most `dt`, by plain Runge-Kutta on the first-order form.
pub fn integrate_segment(ode: &SegmentOde, init: &State, duration: f64, dt: f64) -> Result<State> {
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::Parameter(format!(
            "integration span must be non-negative and finite, got {duration}"
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Parameter(format!("step size must be positive, got {dt}")));
    }
    if dt > 2.5 / ode.rate_bound() {
        return Err(Error::Numerical(format!(
            "step {dt} is unstable for a system with rate bound {}",
            ode.rate_bound()
        )));
    }
    if duration == 0.0 {
        return Ok(*init);
    }
    let n = step_count(duration, dt);
    let y = rk4_fixed(|y| ode.rhs(y), init.to_array(), duration, n);
    Ok(State::from_array(y))
}

fn common_guards(segments: &[Segment], grid: &[f64], dt: f64) -> Result<f64> {
    let tol = check_segments(segments)?;
    let horizon = segments[segments.len() - 1].t1;
    check_grid(grid, horizon, tol)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Parameter(format!("step size must be positive, got {dt}")));
    }
    let min_width = segments
        .iter()
        .map(|s| s.t1 - s.t0)
        .fold(f64::INFINITY, f64::min);
    if dt > min_width / 4.0 {
        return Err(Error::Parameter(format!(
            "step {dt} must not exceed a quarter of the shortest segment ({min_width})"
        )));
    }
    Ok(tol)
}

/// Walk the segments, stepping to every grid time and every segment edge so
/// no step straddles a detuning switch. `record(t, y, d)` is called at each
/// grid time with the current state and the detuning in force.
fn checkpointed_walk<Y, FStep, FRecord>(
    segments: &[Segment],
    grid: &[f64],
    tol: f64,
    dt: f64,
    y: &mut Y,
    mut step: FStep,
    mut record: FRecord,
) where
    FStep: FnMut(&mut Y, f64, usize, f64),
    FRecord: FnMut(f64, &Y, f64),
{
    let mut gi = 0usize;
    // time 0 is sampled from the initial state, under the first segment's
    // detuning
    while gi < grid.len() && grid[gi] <= 1e-9 {
        record(grid[gi], y, segments[0].detuning);
        gi += 1;
    }
    let mut cur = 0.0f64;
    for (si, seg) in segments.iter().enumerate() {
        let is_last = si + 1 == segments.len();
        let mut targets: Vec<(f64, bool)> = Vec::new();
        while gi < grid.len() && (is_last || grid[gi] <= seg.t1 + tol) {
            targets.push((grid[gi].min(seg.t1), true));
            gi += 1;
        }
        match targets.last() {
            Some(&(t, _)) if t >= seg.t1 - tol => {}
            _ => targets.push((seg.t1, false)),
        }
        for (tp, is_grid) in targets {
            let span = tp - cur;
            if span > 0.0 {
                let n = step_count(span, dt);
                step(y, span, n, seg.detuning);
            }
            cur = tp;
            if is_grid {
                record(tp, y, seg.detuning);
            }
        }
    }
}

/// Reference propagation with the memory variable explicit: evolves
/// `(A1, A2, M)` by Runge-Kutta across all segments. Continuity of the
/// memory variable across switches is automatic, so the result matches the
/// closed-form propagator under kernel-continuous matching.
pub fn integrate_kernel(
    p: &Params,
    segments: &[Segment],
    grid: &[f64],
    dt: f64,
) -> Result<Trajectory> {
    p.validate()?;
    let tol = common_guards(segments, grid, dt)?;
    let k = 0.5 * p.coupling_rate * p.bath_width;
    let mu = C64::new(p.bath_width, p.bath_center);
    let rate = segments
        .iter()
        .map(|s| {
            let r1 = (p.omega1 + s.detuning).abs() + p.g + 1.0;
            let r2 = (p.omega2 + s.detuning).abs() + p.g + 1.0;
            let r3 = p.coupling_rate * p.bath_width + mu.norm();
            r1.max(r2).max(r3)
        })
        .fold(1.0f64, f64::max);
    if dt > 2.5 / rate {
        return Err(Error::Numerical(format!(
            "step {dt} is unstable for a system with rate bound {rate}"
        )));
    }

    let rhs = |y: &[C64; 3], d: f64| -> [C64; 3] {
        [
            -IM * (p.omega1 + d) * y[0] - IM * p.g * y[1] - y[2],
            -IM * (p.omega2 + d) * y[1] - IM * p.g * y[0] - y[2],
            k * (y[0] + y[1]) - mu * y[2],
        ]
    };

    let mut y = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    checkpointed_walk(
        segments,
        grid,
        tol,
        dt,
        &mut y,
        |y, span, n, d| *y = rk4_fixed(|v| rhs(v, d), *y, span, n),
        |t, y, d| {
            let dy = rhs(y, d);
            times.push(t);
            states.push(State { a1: y[0], a2: y[1], da1: dy[0], da2: dy[1] });
        },
    );

    Ok(Trajectory {
        times,
        states,
        provenance: Provenance {
            engine: Engine::KernelOde,
            // the explicit memory variable realizes the shared-memory
            // dynamics and is continuous across switches
            reduction: Reduction::SharedMemory,
            matching: MatchingMode::KernelContinuous,
            fallback_segments: 0,
            companion_segments: 0,
        },
    })
}

/// Trajectory of the two modes against an explicitly discretized reservoir,
/// plus the conserved total and the thermally weighted reservoir transfer.
#[derive(Debug, Clone)]
pub struct DiscreteBathRun {
    pub trajectory: Trajectory,
    /// `|A1|^2 + |A2|^2 + sum_j |B_j|^2` at each grid time; the discrete
    /// dynamics conserve it exactly, so its drift measures integration error.
    pub norm: Vec<f64>,
    /// `sum_j |B_j(t)|^2 nbar(omega_j)` at each grid time, with the thermal
    /// occupation taken as 0 for any reservoir mode at non-positive
    /// frequency. For constant-coefficient (switch-free) evolution the
    /// one-excitation propagator is complex symmetric, so this equals the
    /// thermal quanta flowing from the reservoir into mode 1; a detuning
    /// schedule breaks that transpose symmetry and the field is then only the
    /// outbound transfer.
    pub thermal_transfer: Vec<f64>,
}

/// Integrate the two modes coupled to `n_modes` reservoir modes placed
/// uniformly on `[Omega - cutoff * gamma, Omega + cutoff * gamma]`, each with
/// coupling `sqrt(J(omega_j) * dw)`. Requires at least two modes and a mode
/// spacing fine enough that the revival time `2 pi / dw` exceeds the horizon.
pub fn integrate_discrete_bath(
    p: &Params,
    segments: &[Segment],
    grid: &[f64],
    n_modes: usize,
    cutoff: f64,
    dt: f64,
) -> Result<DiscreteBathRun> {
    p.validate()?;
    let tol = common_guards(segments, grid, dt)?;
    if n_modes < 2 {
        return Err(Error::Parameter(format!(
            "the discretized reservoir needs at least 2 modes, got {n_modes}"
        )));
    }
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(Error::Parameter(format!(
            "cutoff must be positive and finite, got {cutoff}"
        )));
    }
    let horizon = segments[segments.len() - 1].t1;
    let half = cutoff * p.bath_width;
    let dw = 2.0 * half / (n_modes - 1) as f64;
    let revival = 2.0 * core::f64::consts::PI / dw;
    if revival <= horizon {
        return Err(Error::Parameter(format!(
            "mode spacing {dw} gives a reservoir revival at {revival}, inside the horizon {horizon}; use more modes"
        )));
    }
    let omegas: Vec<f64> = (0..n_modes)
        .map(|j| p.bath_center - half + dw * j as f64)
        .collect();
    let kappas: Vec<f64> = omegas
        .iter()
        .map(|&w| libm::sqrt(model::spectral_density(w, p) * dw))
        .collect();
    let kappa_sum: f64 = kappas.iter().sum();

    let rate = {
        let seg_rate = segments
            .iter()
            .map(|s| {
                let r1 = (p.omega1 + s.detuning).abs() + p.g + kappa_sum;
                let r2 = (p.omega2 + s.detuning).abs() + p.g + kappa_sum;
                r1.max(r2)
            })
            .fold(1.0f64, f64::max);
        let bath_rate = omegas
            .iter()
            .zip(kappas.iter())
            .map(|(w, k)| w.abs() + 2.0 * k)
            .fold(1.0f64, f64::max);
        seg_rate.max(bath_rate)
    };
    if dt > 2.5 / rate {
        return Err(Error::Numerical(format!(
            "step {dt} is unstable for a system with rate bound {rate}"
        )));
    }

    // state layout: [A1, A2, B_0 .. B_{n-1}]
    let rhs = |y: &[C64], out: &mut [C64], d: f64| {
        let drive: C64 = y[2..]
            .iter()
            .zip(kappas.iter())
            .fold(C64::new(0.0, 0.0), |acc, (b, &k)| acc + k * b);
        out[0] = -IM * ((p.omega1 + d) * y[0] + p.g * y[1] + drive);
        out[1] = -IM * ((p.omega2 + d) * y[1] + p.g * y[0] + drive);
        let pump = y[0] + y[1];
        for j in 0..n_modes {
            out[2 + j] = -IM * (omegas[j] * y[2 + j] + kappas[j] * pump);
        }
    };

    let nbar: Vec<f64> = omegas
        .iter()
        .map(|&w| if w > 0.0 { model::thermal_occupation(w, p.bath_temp).unwrap_or(0.0) } else { 0.0 })
        .collect();

    let mut y = vec![C64::new(0.0, 0.0); n_modes + 2];
    y[0] = C64::new(1.0, 0.0);
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    let mut norm = Vec::with_capacity(grid.len());
    let mut thermal = Vec::with_capacity(grid.len());
    let mut dy = vec![C64::new(0.0, 0.0); n_modes + 2];
    checkpointed_walk(
        segments,
        grid,
        tol,
        dt,
        &mut y,
        |y, span, n, d| rk4_fixed_vec(|v, out| rhs(v, out, d), y, span, n),
        |t, y, d| {
            rhs(y, &mut dy, d);
            times.push(t);
            states.push(State { a1: y[0], a2: y[1], da1: dy[0], da2: dy[1] });
            norm.push(y.iter().map(|v| v.norm_sqr()).sum());
            thermal.push(
                y[2..]
                    .iter()
                    .zip(nbar.iter())
                    .map(|(b, &n)| b.norm_sqr() * n)
                    .sum(),
            );
        },
    );

    Ok(DiscreteBathRun {
        trajectory: Trajectory {
            times,
            states,
            provenance: Provenance {
                engine: Engine::DiscreteBath,
                reduction: Reduction::SharedMemory,
                matching: MatchingMode::KernelContinuous,
                fallback_segments: 0,
                companion_segments: 0,
            },
        },
        norm,
        thermal_transfer: thermal,
    })
}
