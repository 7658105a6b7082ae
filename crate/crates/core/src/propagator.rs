//! Segment-wise closed-form propagation of the two-mode amplitudes.
//!
//! On every interval of constant detuning the pair of second-order equations
//! has constant coefficients, so the evolution is a sum of four exponential
//! modes whose rates are the roots of one quartic. This module solves each
//! segment in that modal form, carries the state across detuning switches
//! under a selectable matching rule, and assembles the sampled trajectory.
//! Ill-conditioned segments fall back to direct numerical integration of the
//! same segment equations and are counted in the provenance record.

use crate::error::{Error, Result};
use crate::model::{self, Params};
use crate::quartic::{self};
use crate::schedule::Segment;
use crate::{C64, IM};
use alloc::format;
use alloc::vec::Vec;

/// Which exact reduction of the memory variable produced the segment
/// equations.
///
/// Both reductions share the diagonal polynomials; they differ in the cross
/// coupling. `SharedMemory` is the exact elimination of the common memory
/// variable and carries a derivative cross term; `StaticCross` keeps only the
/// derivative-free cross constant. The two are inequivalent dynamical systems
/// and are kept selectable side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    SharedMemory,
    StaticCross,
}

/// What stays continuous when the detuning jumps between segments.
///
/// `DerivativeContinuous` carries the amplitude derivatives across unchanged.
/// `KernelContinuous` keeps the memory variable continuous instead, which
/// shifts each derivative by `-i (d+ - d-) A` at the switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchingMode {
    DerivativeContinuous,
    KernelContinuous,
}

/// Which computational route produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Segment-wise modal (closed-form) propagation.
    Closed,
    /// Runge-Kutta integration of the memory-kernel formulation.
    KernelOde,
    /// Runge-Kutta integration against an explicitly discretized reservoir.
    DiscreteBath,
}

/// Amplitudes and their time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub a1: C64,
    pub a2: C64,
    pub da1: C64,
    pub da2: C64,
}

impl State {
    pub fn to_array(self) -> [C64; 4] {
        [self.a1, self.a2, self.da1, self.da2]
    }

    pub fn from_array(v: [C64; 4]) -> Self {
        State { a1: v[0], a2: v[1], da1: v[2], da2: v[3] }
    }

    /// `|A1|^2 + |A2|^2` — the share of the initial excitation still in the
    /// two modes.
    pub fn norm_sq(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }
}

/// The excitation starts entirely in mode 1 with the memory variable empty,
/// so the initial derivatives follow from the equations of motion at the
/// starting detuning `d0`.
pub fn initial_state(p: &Params, d0: f64) -> State {
    State {
        a1: C64::new(1.0, 0.0),
        a2: C64::new(0.0, 0.0),
        da1: -IM * (p.omega1 + d0),
        da2: -IM * p.g,
    }
}

/// Constant coefficients of the second-order pair on one segment:
/// `A1'' + alpha1 A1' + beta1 A1 + s A2' + c A2 = 0` and the same with the
/// mode labels exchanged. The cross polynomial `Q(l) = s l + c` depends on
/// the chosen reduction; the diagonal parts do not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentOde {
    pub alpha1: C64,
    pub beta1: C64,
    pub alpha2: C64,
    pub beta2: C64,
    /// Derivative cross coupling (`i g` for the shared-memory reduction, 0
    /// for the static reduction).
    pub s: C64,
    /// Constant cross coupling.
    pub c: C64,
}

impl SegmentOde {
    pub fn new(p: &Params, d: f64, route: Reduction) -> Self {
        let diag = model::second_order_coeffs(p, d);
        let (s, c) = match route {
            // exact elimination of the shared memory variable
            Reduction::SharedMemory => (
                IM * p.g,
                C64::new(0.5 * p.coupling_rate * p.bath_width, 0.0) + diag.cross,
            ),
            Reduction::StaticCross => (C64::new(0.0, 0.0), diag.cross),
        };
        SegmentOde {
            alpha1: diag.alpha1,
            beta1: diag.beta1,
            alpha2: diag.alpha2,
            beta2: diag.beta2,
            s,
            c,
        }
    }

    /// Diagonal polynomial of mode 1: `l^2 + alpha1 l + beta1`.
    pub fn p1(&self, l: C64) -> C64 {
        (l + self.alpha1) * l + self.beta1
    }

    /// Diagonal polynomial of mode 2.
    pub fn p2(&self, l: C64) -> C64 {
        (l + self.alpha2) * l + self.beta2
    }

    /// Cross polynomial `s l + c` (identical in both equations).
    pub fn q(&self, l: C64) -> C64 {
        self.s * l + self.c
    }

    /// Monic quartic whose roots are the modal rates:
    /// `det [[P1, Q], [Q, P2]] = 0` expanded in powers of `l`.
    pub fn quartic_coeffs(&self) -> [C64; 4] {
        [
            self.alpha1 + self.alpha2,
            self.alpha1 * self.alpha2 + self.beta1 + self.beta2 - self.s * self.s,
            self.alpha1 * self.beta2 + self.alpha2 * self.beta1 - 2.0 * self.s * self.c,
            self.beta1 * self.beta2 - self.c * self.c,
        ]
    }

    /// Amplitude ratio `A2/A1` of the mode with rate `l`, taken from
    /// whichever row of the pair has the larger denominator.
    pub fn mode_ratio(&self, l: C64) -> C64 {
        let q = self.q(l);
        let p2 = self.p2(l);
        if q.norm() >= p2.norm() {
            -self.p1(l) / q
        } else {
            -q / p2
        }
    }

    /// Right-hand side of the equivalent first-order system in the order
    /// `(A1, A2, A1', A2')`.
    pub fn rhs(&self, y: &[C64; 4]) -> [C64; 4] {
        [
            y[2],
            y[3],
            -self.alpha1 * y[2] - self.beta1 * y[0] - self.s * y[3] - self.c * y[1],
            -self.alpha2 * y[3] - self.beta2 * y[1] - self.s * y[2] - self.c * y[0],
        ]
    }

    /// Upper bound on the infinity norm of the first-order system matrix,
    /// used to pick stable integrator steps.
    pub fn rate_bound(&self) -> f64 {
        let row3 = self.beta1.norm() + self.alpha1.norm() + self.c.norm() + self.s.norm();
        let row4 = self.beta2.norm() + self.alpha2.norm() + self.c.norm() + self.s.norm();
        row3.max(row4).max(1.0)
    }
}

/// Closed-form (or fallback) solution of one segment, evaluable at any time
/// inside the segment.
#[derive(Debug, Clone)]
pub enum SegmentSolution {
    /// Four-mode exponential solution `A1 = sum C_k exp(l_k (t - t0))`,
    /// `A2 = sum r_k C_k exp(l_k (t - t0))`.
    Modal {
        t0: f64,
        t1: f64,
        lambdas: [C64; 4],
        ratios: [C64; 4],
        coeff: [C64; 4],
    },
    /// Cross coupling exactly zero: each mode is an independent two-root
    /// exponential.
    Decoupled {
        t0: f64,
        t1: f64,
        roots1: [C64; 2],
        coeff1: [C64; 2],
        roots2: [C64; 2],
        coeff2: [C64; 2],
    },
    /// Direct fixed-step integration of the segment equations (used when the
    /// modal basis is too ill-conditioned to invert).
    Numeric {
        t0: f64,
        t1: f64,
        init: State,
        ode: SegmentOde,
    },
}

impl SegmentSolution {
    pub fn span(&self) -> (f64, f64) {
        match self {
            SegmentSolution::Modal { t0, t1, .. }
            | SegmentSolution::Decoupled { t0, t1, .. }
            | SegmentSolution::Numeric { t0, t1, .. } => (*t0, *t1),
        }
    }

    /// State at time `t`, which must lie inside the segment (a slack of
    /// `1e-9` absorbs grid rounding).
    pub fn eval(&self, t: f64) -> Result<State> {
        let (t0, t1) = self.span();
        let slack = 1e-9 * (1.0 + t1.abs());
        if !(t >= t0 - slack) || t > t1 + slack {
            return Err(Error::Domain(format!(
                "time {t} outside the segment [{t0}, {t1}]"
            )));
        }
        let dt = (t - t0).max(0.0);
        match self {
            SegmentSolution::Modal { lambdas, ratios, coeff, .. } => {
                let mut st = State {
                    a1: C64::new(0.0, 0.0),
                    a2: C64::new(0.0, 0.0),
                    da1: C64::new(0.0, 0.0),
                    da2: C64::new(0.0, 0.0),
                };
                for k in 0..4 {
                    let e = (lambdas[k] * dt).exp() * coeff[k];
                    st.a1 += e;
                    st.a2 += ratios[k] * e;
                    st.da1 += lambdas[k] * e;
                    st.da2 += lambdas[k] * ratios[k] * e;
                }
                Ok(st)
            }
            SegmentSolution::Decoupled { roots1, coeff1, roots2, coeff2, .. } => {
                let mode = |roots: &[C64; 2], coeff: &[C64; 2]| {
                    let ea = (roots[0] * dt).exp() * coeff[0];
                    let eb = (roots[1] * dt).exp() * coeff[1];
                    (ea + eb, roots[0] * ea + roots[1] * eb)
                };
                let (a1, da1) = mode(roots1, coeff1);
                let (a2, da2) = mode(roots2, coeff2);
                Ok(State { a1, a2, da1, da2 })
            }
            SegmentSolution::Numeric { init, ode, t1, t0 } => {
                if dt == 0.0 {
                    return Ok(*init);
                }
                let span = *t1 - *t0;
                let step = (1.0 / ode.rate_bound()).min(span / 64.0);
                let n = (libm::ceil(dt / step) as usize).max(1);
                let y = crate::oracle::rk4_fixed(|y| ode.rhs(y), init.to_array(), dt, n);
                Ok(State::from_array(y))
            }
        }
    }
}

/// One solved segment plus the bookkeeping the propagation loop needs.
#[derive(Debug, Clone)]
pub struct SolvedSegment {
    pub solution: SegmentSolution,
    /// Modal rates in tracked order (absent on the decoupled path).
    pub lambdas: Option<[C64; 4]>,
    /// The quartic radicals failed their residual gate and the companion
    /// eigensolver supplied the rates.
    pub used_companion: bool,
    /// The modal basis was unusable and the segment integrates numerically.
    pub numeric_fallback: bool,
}

const COND_GATE: f64 = 1e12;
/// Two modal rates closer than this (relative) make the decoupled two-root
/// formula lose all accuracy, so such segments integrate numerically.
const DEGENERATE_GATE: f64 = 1e-8;

fn inf_norm(m: &[[C64; 4]; 4]) -> f64 {
    let mut best = 0.0f64;
    for row in m {
        let s: f64 = row.iter().map(|x| x.norm()).sum();
        best = best.max(s);
    }
    best
}

fn lu_factor(mut a: [[C64; 4]; 4]) -> Option<([[C64; 4]; 4], [usize; 4])> {
    let mut piv = [0usize; 4];
    for k in 0..4 {
        let mut pk = k;
        let mut best = a[k][k].norm();
        for (i, row) in a.iter().enumerate().skip(k + 1) {
            let v = row[k].norm();
            if v > best {
                best = v;
                pk = i;
            }
        }
        if best == 0.0 {
            return None;
        }
        piv[k] = pk;
        a.swap(k, pk);
        for i in k + 1..4 {
            let f = a[i][k] / a[k][k];
            a[i][k] = f;
            for j in k + 1..4 {
                let t = f * a[k][j];
                a[i][j] -= t;
            }
        }
    }
    Some((a, piv))
}

fn lu_solve(lu: &[[C64; 4]; 4], piv: &[usize; 4], mut b: [C64; 4]) -> [C64; 4] {
    // the factorization swapped whole rows, so apply every interchange to the
    // right-hand side before the triangular solves
    for k in 0..4 {
        b.swap(k, piv[k]);
    }
    for k in 0..4 {
        for i in k + 1..4 {
            let t = lu[i][k] * b[k];
            b[i] -= t;
        }
    }
    for k in (0..4).rev() {
        for j in k + 1..4 {
            let t = lu[k][j] * b[j];
            b[k] -= t;
        }
        b[k] /= lu[k][k];
    }
    b
}

/// Infinity-norm condition number of the modal basis matrix, via its explicit
/// inverse (the matrix is only 4 x 4).
fn condition(m: &[[C64; 4]; 4], lu: &[[C64; 4]; 4], piv: &[usize; 4]) -> f64 {
    let mut inv = [[C64::new(0.0, 0.0); 4]; 4];
    for j in 0..4 {
        let mut e = [C64::new(0.0, 0.0); 4];
        e[j] = C64::new(1.0, 0.0);
        let col = lu_solve(lu, piv, e);
        for i in 0..4 {
            inv[i][j] = col[i];
        }
    }
    inf_norm(m) * inf_norm(&inv)
}

/// Solve one constant-detuning segment `[t0, t1]` from the state `init` at
/// `t0`. `prev_roots`, when given, fixes the ordering of the four modal rates
/// by nearest-neighbour continuity with the previous segment; otherwise the
/// rates are sorted canonically.
pub fn solve_segment(
    ode: &SegmentOde,
    init: &State,
    t0: f64,
    t1: f64,
    prev_roots: Option<&[C64; 4]>,
) -> Result<SolvedSegment> {
    if !(t1 > t0) {
        return Err(Error::Contract(format!(
            "segment must have positive length, got [{t0}, {t1}]"
        )));
    }
    let zero = C64::new(0.0, 0.0);
    if ode.s == zero && ode.c == zero {
        // the two modes evolve independently
        let solve_mode = |alpha: C64, beta: C64, a: C64, da: C64| -> Option<([C64; 2], [C64; 2])> {
            let r = quartic::solve_quadratic(alpha, beta);
            let scale = 1.0 + r[0].norm() + r[1].norm();
            if (r[0] - r[1]).norm() <= DEGENERATE_GATE * scale {
                return None;
            }
            let cb = (da - r[0] * a) / (r[1] - r[0]);
            let ca = a - cb;
            Some((r, [ca, cb]))
        };
        let m1 = solve_mode(ode.alpha1, ode.beta1, init.a1, init.da1);
        let m2 = solve_mode(ode.alpha2, ode.beta2, init.a2, init.da2);
        if let (Some((roots1, coeff1)), Some((roots2, coeff2))) = (m1, m2) {
            return Ok(SolvedSegment {
                solution: SegmentSolution::Decoupled { t0, t1, roots1, coeff1, roots2, coeff2 },
                lambdas: None,
                used_companion: false,
                numeric_fallback: false,
            });
        }
        return Ok(SolvedSegment {
            solution: SegmentSolution::Numeric { t0, t1, init: *init, ode: *ode },
            lambdas: None,
            used_companion: false,
            numeric_fallback: true,
        });
    }

    let qr = quartic::solve_quartic(&ode.quartic_coeffs())?;
    let mut roots = qr.roots;
    match prev_roots {
        Some(prev) => roots = quartic::track_branches(prev, &roots),
        None => quartic::sort_roots(&mut roots),
    }
    let mut ratios = [zero; 4];
    for k in 0..4 {
        ratios[k] = ode.mode_ratio(roots[k]);
    }
    let mut m = [[zero; 4]; 4];
    for k in 0..4 {
        m[0][k] = C64::new(1.0, 0.0);
        m[1][k] = ratios[k];
        m[2][k] = roots[k];
        m[3][k] = roots[k] * ratios[k];
    }
    let rhs = init.to_array();
    let modal = lu_factor(m).and_then(|(lu, piv)| {
        if condition(&m, &lu, &piv) > COND_GATE {
            None
        } else {
            Some(lu_solve(&lu, &piv, rhs))
        }
    });
    match modal {
        Some(coeff) => Ok(SolvedSegment {
            solution: SegmentSolution::Modal { t0, t1, lambdas: roots, ratios, coeff },
            lambdas: Some(roots),
            used_companion: qr.used_companion,
            numeric_fallback: false,
        }),
        None => Ok(SolvedSegment {
            solution: SegmentSolution::Numeric { t0, t1, init: *init, ode: *ode },
            lambdas: Some(roots),
            used_companion: qr.used_companion,
            numeric_fallback: true,
        }),
    }
}

/// How a trajectory was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub engine: Engine,
    pub reduction: Reduction,
    pub matching: MatchingMode,
    /// Segments that had to integrate numerically instead of modally.
    pub fallback_segments: usize,
    /// Segments whose rates came from the companion eigensolver instead of
    /// radicals.
    pub companion_segments: usize,
}

/// A propagated trajectory sampled on a grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub provenance: Provenance,
}

pub(crate) fn check_segments(segments: &[Segment]) -> Result<f64> {
    if segments.is_empty() {
        return Err(Error::Contract("segment list must not be empty".into()));
    }
    let horizon = segments[segments.len() - 1].t1;
    let tol = 1e-12 * horizon.abs().max(1.0);
    if segments[0].t0.abs() > tol {
        return Err(Error::Contract(format!(
            "segments must start at 0, got {}",
            segments[0].t0
        )));
    }
    for (i, seg) in segments.iter().enumerate() {
        if !(seg.t1 > seg.t0) {
            return Err(Error::Contract(format!(
                "segment {i} must have positive length, got [{}, {}]",
                seg.t0, seg.t1
            )));
        }
        if i > 0 && (seg.t0 - segments[i - 1].t1).abs() > tol {
            return Err(Error::Contract(format!(
                "segments must be contiguous: segment {i} starts at {} but the previous one ends at {}",
                seg.t0,
                segments[i - 1].t1
            )));
        }
    }
    Ok(tol)
}

pub(crate) fn check_grid(grid: &[f64], horizon: f64, tol: f64) -> Result<()> {
    for (i, &t) in grid.iter().enumerate() {
        if !t.is_finite() || t < -tol || t > horizon + tol {
            return Err(Error::Domain(format!(
                "grid time {t} outside [0, {horizon}]"
            )));
        }
        if i > 0 && t < grid[i - 1] {
            return Err(Error::Contract("grid times must be non-decreasing".into()));
        }
    }
    Ok(())
}

/// Propagate from the standard initial state across `segments`, sampling the
/// state at every grid time. A grid time belongs to the segment whose
/// half-open interval `(t0, t1]` contains it (time 0 belongs to the first
/// segment).
pub fn propagate(
    p: &Params,
    segments: &[Segment],
    grid: &[f64],
    route: Reduction,
    matching: MatchingMode,
) -> Result<Trajectory> {
    p.validate()?;
    let tol = check_segments(segments)?;
    let horizon = segments[segments.len() - 1].t1;
    check_grid(grid, horizon, tol)?;

    let mut state = initial_state(p, segments[0].detuning);
    let mut prev_roots: Option<[C64; 4]> = None;
    let mut fallback_segments = 0usize;
    let mut companion_segments = 0usize;
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    let mut gi = 0usize;

    for (si, seg) in segments.iter().enumerate() {
        if si > 0 && matching == MatchingMode::KernelContinuous {
            let dd = seg.detuning - segments[si - 1].detuning;
            if dd != 0.0 {
                // keep the memory variable continuous across the switch
                state.da1 -= IM * dd * state.a1;
                state.da2 -= IM * dd * state.a2;
            }
        }
        let ode = SegmentOde::new(p, seg.detuning, route);
        let solved = solve_segment(&ode, &state, seg.t0, seg.t1, prev_roots.as_ref())?;
        if solved.numeric_fallback {
            fallback_segments += 1;
        }
        if solved.used_companion {
            companion_segments += 1;
        }
        if let Some(l) = solved.lambdas {
            prev_roots = Some(l);
        }
        let is_last = si + 1 == segments.len();
        while gi < grid.len() && (is_last || grid[gi] <= seg.t1 + tol) {
            times.push(grid[gi]);
            states.push(solved.solution.eval(grid[gi])?);
            gi += 1;
        }
        state = solved.solution.eval(seg.t1)?;
    }

    Ok(Trajectory {
        times,
        states,
        provenance: Provenance {
            engine: Engine::Closed,
            reduction: route,
            matching,
            fallback_segments,
            companion_segments,
        },
    })
}
