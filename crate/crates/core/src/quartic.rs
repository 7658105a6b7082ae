//! Complex quartic roots in radicals, with a companion-matrix fallback.
//!
//! The closed pipeline: depress the quartic, solve the resolvent cubic by
//! Cardano (branch-pinned so `u*v = -P/3` holds), pick the resolvent root
//! that maximizes `|2 z0 - p|`, split into two quadratics, and solve each
//! with the cancellation-safe quadratic formula. A normalized residual gate
//! decides whether the radical roots are accepted; otherwise the same quartic
//! goes through the companion-matrix QR eigensolver and the switch is flagged.

use crate::eig;
use crate::error::{Error, Result};
use crate::C64;
use alloc::format;
use alloc::vec::Vec;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Roots of the monic quadratic `y^2 + b y + c`, avoiding cancellation by
/// sign-matching the square root against `b` and recovering the second root
/// from the product `y1 y2 = c`.
pub fn solve_quadratic(b: C64, c: C64) -> [C64; 2] {
    let disc = b * b - 4.0 * c;
    let mut s = disc.sqrt();
    if (b.conj() * s).re > 0.0 {
        s = -s;
    }
    let y1 = (-b + s) / 2.0;
    let y2 = if y1 == ZERO { (-b - s) / 2.0 } else { c / y1 };
    [y1, y2]
}

/// One root of the depressed cubic `t^3 + P t + Q` by Cardano. The cube-root
/// branch with the larger `|u^3|` is taken and the partner fixed through
/// `v = -P/(3u)`, which keeps `u + v` accurate when the discriminant nearly
/// cancels.
fn cubic_root_one(p: C64, q: C64) -> C64 {
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = (half_q * half_q + third_p * third_p * third_p).sqrt();
    let u3a = -half_q + disc;
    let u3b = -half_q - disc;
    let u3 = if u3a.norm() >= u3b.norm() { u3a } else { u3b };
    if u3 == ZERO {
        // both branches vanish only when P = Q = 0
        return ZERO;
    }
    let u = u3.powf(1.0 / 3.0);
    let v = -p / (3.0 * u);
    u + v
}

/// All roots of the monic cubic `z^3 + a2 z^2 + a1 z + a0`: one root by
/// Cardano on the depressed form, the rest from the deflated quadratic.
pub fn solve_cubic(a2: C64, a1: C64, a0: C64) -> [C64; 3] {
    let p = a1 - a2 * a2 / 3.0;
    let q = a0 - a1 * a2 / 3.0 + 2.0 * a2 * a2 * a2 / 27.0;
    let z0 = cubic_root_one(p, q) - a2 / 3.0;
    // z^3 + a2 z^2 + a1 z + a0 = (z - z0)(z^2 + (a2 + z0) z + (a1 + z0 (a2 + z0)))
    let [z1, z2] = solve_quadratic(a2 + z0, a1 + z0 * (a2 + z0));
    [z0, z1, z2]
}

/// The Ferrari split of a depressed quartic
/// `y^4 + p y^2 + q y + r = (y^2 + a y + m)(y^2 - a y + n)`,
/// together with the resolvent-cubic root `z0` it came from.
///
/// Invariants (asserted by tests): `m n = r`, `m + n - a^2 = p`,
/// `a (n - m) = q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventSolution {
    pub p: C64,
    pub q: C64,
    pub r: C64,
    pub z0: C64,
    pub a: C64,
    pub m: C64,
    pub n: C64,
}

/// Roots of the depressed quartic `y^4 + p y^2 + q y + r` in radicals,
/// plus the factorization they came from.
pub fn solve_depressed_quartic(p: C64, q: C64, r: C64) -> (ResolventSolution, [C64; 4]) {
    let scale = libm::pow(q.norm(), 2.0 / 3.0)
        .max(p.norm())
        .max(libm::sqrt(r.norm()))
        .max(1e-300);
    if q.norm() <= 1e-14 * scale * libm::sqrt(scale) {
        return biquadratic(p, q, r);
    }
    // resolvent cubic z^3 - (p/2) z^2 - r z + (r p / 2 - q^2 / 8)
    let cands = solve_cubic(-p / 2.0, -r, r * p / 2.0 - q * q / 8.0);
    let mut z0 = cands[0];
    let mut best = (2.0 * z0 - p).norm();
    for &z in &cands[1..] {
        let v = (2.0 * z - p).norm();
        if v > best {
            best = v;
            z0 = z;
        }
    }
    let two_z_minus_p = 2.0 * z0 - p;
    if two_z_minus_p.norm() <= 1e-30 * p.norm().max(1.0) {
        return biquadratic(p, q, r);
    }
    let a = two_z_minus_p.sqrt();
    let b = -q / (2.0 * a);
    let m = z0 + b;
    let n = z0 - b;
    let [y1, y2] = solve_quadratic(a, m);
    let [y3, y4] = solve_quadratic(-a, n);
    (
        ResolventSolution { p, q, r, z0, a, m, n },
        [y1, y2, y3, y4],
    )
}

/// `y^4 + p y^2 + r` as `(y^2 - z1)(y^2 - z2)`; expressed in the Ferrari form
/// with `a = 0`, `m = -z1`, `n = -z2`.
fn biquadratic(p: C64, q: C64, r: C64) -> (ResolventSolution, [C64; 4]) {
    let [z1, z2] = solve_quadratic(p, r);
    let s1 = z1.sqrt();
    let s2 = z2.sqrt();
    let (m, n) = (-z1, -z2);
    (
        ResolventSolution {
            p,
            q,
            r,
            z0: (m + n) / 2.0,
            a: ZERO,
            m,
            n,
        },
        [s1, -s1, s2, -s2],
    )
}

/// Value of the monic quartic with coefficients `[A, B, C, D]` at `l`.
pub fn eval_quartic(coeffs: &[C64; 4], l: C64) -> C64 {
    ((((l + coeffs[0]) * l) + coeffs[1]) * l + coeffs[2]) * l + coeffs[3]
}

/// Residual `|P(root)|` normalized by `(1 + max|coeff|) (1 + |root|)^4`.
pub fn quartic_residual(coeffs: &[C64; 4], root: C64) -> f64 {
    let maxc = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let rn = 1.0 + root.norm();
    eval_quartic(coeffs, root).norm() / ((1.0 + maxc) * rn * rn * rn * rn)
}

fn worst_residual(coeffs: &[C64; 4], roots: &[C64; 4]) -> f64 {
    roots
        .iter()
        .map(|&r| quartic_residual(coeffs, r))
        .fold(0.0f64, f64::max)
}

/// Result of [`solve_quartic`]: the four roots, the Ferrari factorization the
/// radical pipeline produced, the worst normalized residual of the returned
/// roots, and whether the companion-matrix fallback had to replace the
/// radical roots.
#[derive(Debug, Clone, Copy)]
pub struct QuarticRoots {
    pub roots: [C64; 4],
    pub resolvent: ResolventSolution,
    pub residual: f64,
    pub used_companion: bool,
}

const RESIDUAL_GATE: f64 = 1e-9;

/// Roots of the monic quartic `y^4 + A y^3 + B y^2 + C y + D` (coefficients
/// `[A, B, C, D]`). Radicals first; if the normalized residual of any radical
/// root exceeds `1e-9`, the companion-matrix eigensolver supplies the roots
/// instead and `used_companion` is set. Errors only if both pipelines fail.
pub fn solve_quartic(coeffs: &[C64; 4]) -> Result<QuarticRoots> {
    let [a, b, c, d] = *coeffs;
    // depress: y = x - A/4
    let p = b - 0.375 * a * a;
    let q = c - 0.5 * a * b + 0.125 * a * a * a;
    let r = d - 0.25 * a * c + 0.0625 * a * a * (b - 0.1875 * a * a);
    let shift = -a / 4.0;
    let (resolvent, dep) = solve_depressed_quartic(p, q, r);
    let mut roots = [dep[0] + shift, dep[1] + shift, dep[2] + shift, dep[3] + shift];
    let mut residual = worst_residual(coeffs, &roots);
    let mut used_companion = false;
    if residual > RESIDUAL_GATE {
        let comp = companion_roots(&[a, b, c, d])?;
        roots = [comp[0], comp[1], comp[2], comp[3]];
        residual = worst_residual(coeffs, &roots);
        used_companion = true;
        if residual > RESIDUAL_GATE {
            return Err(Error::Numerical(format!(
                "quartic root residual {residual:.3e} exceeds {RESIDUAL_GATE:.0e} in both the radical and companion pipelines"
            )));
        }
    }
    Ok(QuarticRoots {
        roots,
        resolvent,
        residual,
        used_companion,
    })
}

/// Roots of the monic polynomial `y^n + coeffs[0] y^(n-1) + ... + coeffs[n-1]`
/// as eigenvalues of its companion matrix, sorted by (Re, Im).
pub fn companion_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let n = coeffs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = eig::Mat::zeros(n);
    for i in 1..n {
        m.set(i, i - 1, C64::new(1.0, 0.0));
    }
    for i in 0..n {
        m.set(i, n - 1, -coeffs[n - 1 - i]);
    }
    let mut eigs = eig::eigenvalues(m)?;
    sort_roots(&mut eigs);
    Ok(eigs)
}

/// Deterministic root ordering by (Re, Im).
pub fn sort_roots(roots: &mut [C64]) {
    roots.sort_by(|x, y| {
        (x.re, x.im)
            .partial_cmp(&(y.re, y.im))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
}

/// Relabels `next` so each entry continues the branch of the matching entry
/// of `prev`: the permutation minimizing the total displacement
/// `sum_k |next[perm(k)] - prev[k]|`. Ties break toward the lexicographically
/// first permutation, so the result is deterministic.
pub fn track_branches(prev: &[C64; 4], next: &[C64; 4]) -> [C64; 4] {
    let mut best_perm = [0usize, 1, 2, 3];
    let mut best_cost = f64::INFINITY;
    for p0 in 0..4 {
        for p1 in 0..4 {
            if p1 == p0 {
                continue;
            }
            for p2 in 0..4 {
                if p2 == p0 || p2 == p1 {
                    continue;
                }
                let p3 = 6 - p0 - p1 - p2;
                let cost = (next[p0] - prev[0]).norm()
                    + (next[p1] - prev[1]).norm()
                    + (next[p2] - prev[2]).norm()
                    + (next[p3] - prev[3]).norm();
                if cost < best_cost {
                    best_cost = cost;
                    best_perm = [p0, p1, p2, p3];
                }
            }
        }
    }
    [
        next[best_perm[0]],
        next[best_perm[1]],
        next[best_perm[2]],
        next[best_perm[3]],
    ]
}
