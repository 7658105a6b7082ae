//! Dense complex eigenvalues by Hessenberg reduction and shifted QR.
//!
//! Small-n workhorse behind the companion-matrix root finder: Householder
//! reduction to upper Hessenberg, then the single-shift QR iteration with
//! Wilkinson shifts, Givens rotations, and boundary deflation. No external
//! linear-algebra dependency; sized for the n <= 8 matrices this crate builds.

use crate::error::{Error, Result};
use crate::quartic::solve_quadratic;
use crate::C64;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Row-major dense complex matrix.
pub(crate) struct Mat {
    n: usize,
    a: Vec<C64>,
}

impl Mat {
    pub(crate) fn zeros(n: usize) -> Self {
        Mat {
            n,
            a: vec![ZERO; n * n],
        }
    }

    #[inline]
    pub(crate) fn at(&self, i: usize, j: usize) -> C64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: C64) {
        self.a[i * self.n + j] = v;
    }
}

/// Householder similarity reduction to upper Hessenberg form, in place.
fn hessenberg(m: &mut Mat) {
    let n = m.n;
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        // column k below the subdiagonal
        let mut norm_sq = 0.0;
        for i in k + 1..n {
            norm_sq += m.at(i, k).norm_sqr();
        }
        let mut tail_sq = 0.0;
        for i in k + 2..n {
            tail_sq += m.at(i, k).norm_sqr();
        }
        if tail_sq == 0.0 {
            continue;
        }
        let norm = libm::sqrt(norm_sq);
        let x0 = m.at(k + 1, k);
        let alpha = if x0 == ZERO {
            C64::new(norm, 0.0)
        } else {
            -x0 / x0.norm() * norm
        };
        // v = x - alpha e1, normalized
        let mut v = vec![ZERO; n - k - 1];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = m.at(k + 1 + i, k);
        }
        v[0] -= alpha;
        let vn = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if vn == 0.0 {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= vn;
        }
        // left: rows k+1.., cols k.. minus 2 v (v^H M)
        for j in k..n {
            let mut dot = ZERO;
            for (i, vi) in v.iter().enumerate() {
                dot += vi.conj() * m.at(k + 1 + i, j);
            }
            for (i, vi) in v.iter().enumerate() {
                let cur = m.at(k + 1 + i, j);
                m.set(k + 1 + i, j, cur - 2.0 * vi * dot);
            }
        }
        // right: all rows, cols k+1.. minus 2 (M v) v^H
        for i in 0..n {
            let mut dot = ZERO;
            for (j, vj) in v.iter().enumerate() {
                dot += m.at(i, k + 1 + j) * vj;
            }
            for (j, vj) in v.iter().enumerate() {
                let cur = m.at(i, k + 1 + j);
                m.set(i, k + 1 + j, cur - 2.0 * dot * vj.conj());
            }
        }
    }
}

/// Eigenvalues of a dense complex matrix. Order follows deflation (trailing
/// eigenvalues first); callers sort as needed.
pub(crate) fn eigenvalues(mut m: Mat) -> Result<Vec<C64>> {
    let n = m.n;
    if n == 0 {
        return Ok(Vec::new());
    }
    hessenberg(&mut m);
    let mut eigs = Vec::with_capacity(n);
    let mut ihi = n;
    let tol = 1e-14;
    let mut block_iters = 0usize;
    let mut total_iters = 0usize;
    while ihi > 0 {
        // trailing irreducible block [ilo, ihi): walk up while the subdiagonal
        // entry above is non-negligible
        let mut ilo = ihi - 1;
        while ilo > 0 {
            let sub = m.at(ilo, ilo - 1).norm();
            let diag = m.at(ilo - 1, ilo - 1).norm() + m.at(ilo, ilo).norm();
            if sub <= tol * diag {
                m.set(ilo, ilo - 1, ZERO);
                break;
            }
            ilo -= 1;
        }
        let size = ihi - ilo;
        if size == 1 {
            eigs.push(m.at(ilo, ilo));
            ihi = ilo;
            block_iters = 0;
            continue;
        }
        if size == 2 {
            let (a, b) = (m.at(ilo, ilo), m.at(ilo, ilo + 1));
            let (c, d) = (m.at(ilo + 1, ilo), m.at(ilo + 1, ilo + 1));
            let [l1, l2] = solve_quadratic(-(a + d), a * d - b * c);
            eigs.push(l1);
            eigs.push(l2);
            ihi = ilo;
            block_iters = 0;
            continue;
        }
        block_iters += 1;
        total_iters += 1;
        if block_iters > 200 || total_iters > 500 * n {
            return Err(Error::Numerical(
                "eigensolver failed to converge (QR iteration cap reached)".to_string(),
            ));
        }
        // Wilkinson shift: trailing 2x2 eigenvalue closest to the corner
        let (a, b) = (m.at(ihi - 2, ihi - 2), m.at(ihi - 2, ihi - 1));
        let (c, d) = (m.at(ihi - 1, ihi - 2), m.at(ihi - 1, ihi - 1));
        let [l1, l2] = solve_quadratic(-(a + d), a * d - b * c);
        let mut mu = if (l1 - d).norm() <= (l2 - d).norm() { l1 } else { l2 };
        if block_iters % 10 == 0 {
            // exceptional shift to break symmetry-stalled iterations
            mu += m.at(ihi - 1, ihi - 2).norm() * C64::new(0.7, 0.3);
        }
        for k in ilo..ihi {
            let cur = m.at(k, k);
            m.set(k, k, cur - mu);
        }
        // forward Givens sweep annihilating the subdiagonal
        let mut rots = Vec::with_capacity(ihi - ilo - 1);
        for k in ilo..ihi - 1 {
            let x = m.at(k, k);
            let y = m.at(k + 1, k);
            let r = libm::sqrt(x.norm_sqr() + y.norm_sqr());
            if r == 0.0 {
                rots.push((C64::new(1.0, 0.0), ZERO));
                continue;
            }
            let cth = x.conj() / r;
            let sth = y.conj() / r;
            rots.push((cth, sth));
            for col in k..ihi {
                let hk = m.at(k, col);
                let hk1 = m.at(k + 1, col);
                m.set(k, col, cth * hk + sth * hk1);
                m.set(k + 1, col, -sth.conj() * hk + cth.conj() * hk1);
            }
        }
        // similarity: multiply by the adjoint rotations on the right; the
        // (k, k+1) column pair has nonzeros only down to row k+1
        for k in ilo..ihi - 1 {
            let (cth, sth) = rots[k - ilo];
            let lim = (k + 2).min(ihi);
            for row in ilo..lim {
                let c0 = m.at(row, k);
                let c1 = m.at(row, k + 1);
                m.set(row, k, c0 * cth.conj() + c1 * sth.conj());
                m.set(row, k + 1, -c0 * sth + c1 * cth);
            }
        }
        for k in ilo..ihi {
            let cur = m.at(k, k);
            m.set(k, k, cur + mu);
        }
    }
    Ok(eigs)
}
