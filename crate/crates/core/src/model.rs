//! Physical parameters, bath spectrum, memory kernel, and the per-segment
//! second-order reduction coefficients.
//!
//! Within a constant-detuning segment the two mode amplitudes obey
//!
//! ```text
//! A1'' + alpha1 A1' + beta1 A1 + (cross terms in A2) = 0
//! A2'' + alpha2 A2' + beta2 A2 + (cross terms in A1) = 0
//! ```
//!
//! This module carries the diagonal coefficients together with the
//! *static* cross coupling `i g (gamma + i Omega)` — the reduction in which
//! the cross term has no derivative part. The exact elimination of the shared
//! memory variable produces an additional derivative cross term; that
//! generalized form lives in [`crate::propagator::SegmentOde`], which accepts
//! either reduction. Both are kept because they are *not* equivalent (the
//! oracles quantify the difference) and each is needed: the static form for
//! its own closed phenomenology, the shared form as the faithful reduction of
//! the first-order memory system.

use crate::error::{Error, Result};
use crate::{C64, IM};
use alloc::format;

/// Physical parameters of the pair of modes and their common reservoir.
///
/// The reservoir spectral density is a Lorentzian of half-width `bath_width`
/// centered at `bath_center`, with integrated weight `coupling_rate / 2`.
/// `n1_init` / `n2_init` are the initial thermal occupations of the two modes
/// (the amplitude equations always start from unit amplitude in mode 1; the
/// initial occupations enter only through the observables).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub omega1: f64,
    pub omega2: f64,
    /// Center frequency of the reservoir spectrum (and reference frequency
    /// entering the reduction coefficients). Must be positive.
    pub bath_center: f64,
    /// Lorentzian half-width at half-maximum. Must be positive.
    pub bath_width: f64,
    /// Overall system-reservoir coupling rate; the spectral density integrates
    /// to `coupling_rate / 2`. Non-negative.
    pub coupling_rate: f64,
    /// Direct mode-mode coupling.
    pub g: f64,
    /// Reservoir temperature (units with hbar = k_B = 1). Non-negative.
    pub bath_temp: f64,
    pub n1_init: f64,
    pub n2_init: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            omega1: 1.0,
            omega2: 1.0,
            bath_center: 1.0,
            bath_width: 1.0,
            coupling_rate: 15.0,
            g: 0.1,
            bath_temp: 1.0,
            n1_init: 1.0,
            n2_init: 0.0,
        }
    }
}

impl Params {
    /// Checks the parameter domain; every propagation entry point calls this.
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("bath_center", self.bath_center),
            ("bath_width", self.bath_width),
            ("coupling_rate", self.coupling_rate),
            ("g", self.g),
            ("bath_temp", self.bath_temp),
            ("n1_init", self.n1_init),
            ("n2_init", self.n2_init),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be finite, got {v}")));
            }
        }
        if self.bath_center <= 0.0 {
            return Err(Error::Parameter(format!(
                "bath_center must be positive, got {}",
                self.bath_center
            )));
        }
        if self.bath_width <= 0.0 {
            return Err(Error::Parameter(format!(
                "bath_width must be positive, got {}",
                self.bath_width
            )));
        }
        if self.coupling_rate < 0.0 {
            return Err(Error::Parameter(format!(
                "coupling_rate must be non-negative, got {}",
                self.coupling_rate
            )));
        }
        if self.bath_temp < 0.0 {
            return Err(Error::Parameter(format!(
                "bath_temp must be non-negative, got {}",
                self.bath_temp
            )));
        }
        if self.n1_init < 0.0 || self.n2_init < 0.0 {
            return Err(Error::Parameter(format!(
                "initial occupations must be non-negative, got ({}, {})",
                self.n1_init, self.n2_init
            )));
        }
        Ok(())
    }

    /// Bose-Einstein occupation of the reservoir at its center frequency.
    pub fn bath_occupation(&self) -> Result<f64> {
        thermal_occupation(self.bath_center, self.bath_temp)
    }
}

/// Bose-Einstein occupation `1 / (exp(omega/temp) - 1)`.
///
/// `temp = 0` returns exactly 0. Requires `omega > 0` (the occupation
/// diverges at zero frequency and is unphysical below it).
pub fn thermal_occupation(omega: f64, temp: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "thermal occupation needs a positive frequency, got {omega}"
        )));
    }
    if !(temp >= 0.0) || !temp.is_finite() {
        return Err(Error::Domain(format!(
            "thermal occupation needs a non-negative temperature, got {temp}"
        )));
    }
    if temp == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / libm::expm1(omega / temp))
}

/// Lorentzian reservoir spectral density
/// `J(omega) = (coupling_rate * bath_width / 2 pi) / ((omega - bath_center)^2 + bath_width^2)`.
///
/// Integrates to `coupling_rate / 2` over the whole real line; peaks at
/// `coupling_rate / (2 pi bath_width)`.
pub fn spectral_density(omega: f64, p: &Params) -> f64 {
    let d = omega - p.bath_center;
    p.coupling_rate * p.bath_width / (2.0 * core::f64::consts::PI)
        / (d * d + p.bath_width * p.bath_width)
}

/// Reservoir memory kernel
/// `G(dt) = (coupling_rate * bath_width / 2) * exp(-(bath_width + i bath_center) dt)`,
/// the correlation function entering the integro-differential amplitude
/// equations. Defined for `dt >= 0`; satisfies `G' = -(bath_width + i bath_center) G`.
pub fn memory_kernel(dt: f64, p: &Params) -> Result<C64> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!(
            "memory kernel is defined for non-negative delays, got {dt}"
        )));
    }
    let decay = C64::new(p.bath_width, p.bath_center);
    Ok(0.5 * p.coupling_rate * p.bath_width * (-decay * dt).exp())
}

/// Fourier transform of the spectral density,
/// `(coupling_rate / 2) * exp(-bath_width |dt| - i bath_center dt)`.
///
/// Note this differs from [`memory_kernel`] by a factor `bath_width`: the two
/// coincide only at `bath_width = 1`. Both objects are used in the model's
/// derivation and both are provided exactly; the factor is asserted by the
/// property tests rather than papered over.
pub fn spectral_density_transform(dt: f64, p: &Params) -> C64 {
    let mag = 0.5 * p.coupling_rate * libm::exp(-p.bath_width * libm::fabs(dt));
    let phase = -p.bath_center * dt;
    C64::new(mag * libm::cos(phase), mag * libm::sin(phase))
}

/// Diagonal and static-cross coefficients of the per-segment second-order
/// reduction at detuning `d`:
///
/// ```text
/// alpha_i = bath_width + i (bath_center + omega_i + d)
/// beta_i  = coupling_rate*bath_width/2 - (omega_i + d)*bath_center
///           + i bath_width (omega_i + d)
/// cross   = i g (bath_width + i bath_center)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderCoeffs {
    pub alpha1: C64,
    pub beta1: C64,
    pub alpha2: C64,
    pub beta2: C64,
    /// Constant (derivative-free) cross coupling; identical in both equations.
    pub cross: C64,
}

/// Coefficients of the static-cross second-order reduction at detuning `d`.
pub fn second_order_coeffs(p: &Params, d: f64) -> SecondOrderCoeffs {
    let w1 = p.omega1 + d;
    let w2 = p.omega2 + d;
    let gam = p.bath_width;
    let om = p.bath_center;
    let half_gg = 0.5 * p.coupling_rate * gam;
    SecondOrderCoeffs {
        alpha1: C64::new(gam, om + w1),
        beta1: C64::new(half_gg - w1 * om, gam * w1),
        alpha2: C64::new(gam, om + w2),
        beta2: C64::new(half_gg - w2 * om, gam * w2),
        cross: IM * p.g * C64::new(gam, om),
    }
}

/// Monic quartic characteristic coefficients `[A, B, C, D]` of the
/// static-cross pair, from `det [[P1(l), cross], [cross, P2(l)]] = 0` with
/// `P_i(l) = l^2 + alpha_i l + beta_i`:
///
/// `l^4 + A l^3 + B l^2 + C l + D` with `A = alpha1 + alpha2`,
/// `B = alpha1 alpha2 + beta1 + beta2`, `C = alpha1 beta2 + alpha2 beta1`,
/// `D = beta1 beta2 - cross^2`.
pub fn quartic_coeffs(c: &SecondOrderCoeffs) -> [C64; 4] {
    [
        c.alpha1 + c.alpha2,
        c.alpha1 * c.alpha2 + c.beta1 + c.beta2,
        c.alpha1 * c.beta2 + c.alpha2 * c.beta1,
        c.beta1 * c.beta2 - c.cross * c.cross,
    ]
}

/// Amplitude ratio `A2/A1` of each characteristic mode of the static-cross
/// pair: `r_k = -P1(l_k) / cross`.
///
/// Errors with [`Error::DecoupledCross`] when `cross == 0` exactly — the modes
/// then evolve independently and a mode ratio is meaningless; callers must
/// switch to the per-mode quadratic pathway.
pub fn mode_ratios(c: &SecondOrderCoeffs, lambdas: &[C64; 4]) -> Result<[C64; 4]> {
    if c.cross == C64::new(0.0, 0.0) {
        return Err(Error::DecoupledCross);
    }
    let mut out = [C64::new(0.0, 0.0); 4];
    for (r, &l) in out.iter_mut().zip(lambdas) {
        let p1 = (l + c.alpha1) * l + c.beta1;
        *r = -p1 / c.cross;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn u01(rng: &mut ChaCha20Rng) -> f64 {
        use rand_core::RngCore;
        (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    #[test]
    fn thermal_occupation_reference_values() {
        // 1/(e - 1) at omega = temp = 1
        let n = thermal_occupation(1.0, 1.0).unwrap();
        assert!((n - 1.0 / (core::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((n - 0.581977).abs() < 1e-6);
        let n2 = thermal_occupation(1.0, 2.0).unwrap();
        assert!((n2 - 1.541494).abs() < 1e-6);
    }

    #[test]
    fn thermal_occupation_edge_cases() {
        assert_eq!(thermal_occupation(1.0, 0.0).unwrap(), 0.0);
        assert!(matches!(thermal_occupation(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(thermal_occupation(-2.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(thermal_occupation(1.0, -0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn thermal_occupation_increases_with_temperature() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..200 {
            let om = 0.1 + 5.0 * u01(&mut rng);
            let t1 = 0.05 + 3.0 * u01(&mut rng);
            let t2 = t1 + 0.05 + 3.0 * u01(&mut rng);
            let n1 = thermal_occupation(om, t1).unwrap();
            let n2 = thermal_occupation(om, t2).unwrap();
            assert!(n2 > n1, "occupation must increase with temperature");
        }
    }

    #[test]
    fn spectral_density_peak_and_weight() {
        let p = Params {
            coupling_rate: 15.0,
            bath_width: 1.0,
            ..Params::default()
        };
        let peak = spectral_density(p.bath_center, &p);
        assert!((peak - p.coupling_rate / (2.0 * core::f64::consts::PI * p.bath_width)).abs() < 1e-12);

        // trapezoid quadrature over +-1000 widths approaches coupling_rate/2
        for (gam, rate) in [(1.0, 15.0), (15.0, 1.0), (0.5, 5.0)] {
            let p = Params {
                bath_width: gam,
                coupling_rate: rate,
                ..Params::default()
            };
            let k = 1000.0;
            let n = 400_000usize;
            let lo = p.bath_center - k * gam;
            let h = 2.0 * k * gam / n as f64;
            let mut sum = 0.5 * (spectral_density(lo, &p) + spectral_density(lo + n as f64 * h, &p));
            for i in 1..n {
                sum += spectral_density(lo + i as f64 * h, &p);
            }
            let integral = sum * h;
            assert!(
                (integral - rate / 2.0).abs() < 1e-3 * rate,
                "integral {integral} vs {}",
                rate / 2.0
            );
        }
    }

    #[test]
    fn memory_kernel_value_and_derivative() {
        let p = Params {
            coupling_rate: 15.0,
            bath_width: 1.0,
            ..Params::default()
        };
        let g0 = memory_kernel(0.0, &p).unwrap();
        assert!((g0 - C64::new(7.5, 0.0)).norm() < 1e-12);
        assert!(memory_kernel(-0.1, &p).is_err());

        // central difference reproduces G' = -(bath_width + i bath_center) G
        let decay = C64::new(p.bath_width, p.bath_center);
        for t in [0.1, 0.7, 2.3] {
            let h = 1e-5;
            let num = (memory_kernel(t + h, &p).unwrap() - memory_kernel(t - h, &p).unwrap())
                / (2.0 * h);
            let exact = -decay * memory_kernel(t, &p).unwrap();
            assert!(
                (num - exact).norm() / exact.norm() < 1e-6,
                "derivative mismatch at t={t}"
            );
        }
    }

    #[test]
    fn spectral_transform_matches_quadrature_and_kernel_at_unit_width() {
        // FT of the Lorentzian is (rate/2) exp(-width |dt| - i center dt);
        // the memory kernel carries an extra factor of the width.
        for (gam, rate, dt) in [(1.0, 15.0, 0.3), (2.0, 5.0, 0.45), (0.5, 8.0, 1.1)] {
            let p = Params {
                bath_width: gam,
                coupling_rate: rate,
                ..Params::default()
            };
            let k = 1500.0;
            let n = 600_000usize;
            let lo = p.bath_center - k * gam;
            let h = 2.0 * k * gam / n as f64;
            let f = |om: f64| {
                let j = spectral_density(om, &p);
                C64::new(j * (om * dt).cos(), -j * (om * dt).sin())
            };
            let mut sum = 0.5 * (f(lo) + f(lo + n as f64 * h));
            for i in 1..n {
                sum += f(lo + i as f64 * h);
            }
            let quad = sum * h;
            let ft = spectral_density_transform(dt, &p);
            assert!(
                (quad - ft).norm() / ft.norm() < 1e-3,
                "quadrature {quad} vs transform {ft} at gamma={gam}"
            );
            // kernel = width * transform for dt >= 0
            let g = memory_kernel(dt, &p).unwrap();
            assert!((g - gam * ft).norm() / g.norm() < 1e-14);
        }
        // at unit width the two coincide identically
        let p = Params {
            bath_width: 1.0,
            coupling_rate: 15.0,
            ..Params::default()
        };
        for dt in [0.0, 0.2, 1.7, 6.0] {
            let g = memory_kernel(dt, &p).unwrap();
            let ft = spectral_density_transform(dt, &p);
            assert!((g - ft).norm() <= 1e-14 * (1.0 + g.norm()));
        }
    }

    #[test]
    fn second_order_coeffs_reference_values() {
        let p = Params {
            coupling_rate: 15.0,
            bath_width: 1.0,
            g: 0.1,
            ..Params::default()
        };
        let c = second_order_coeffs(&p, 0.0);
        assert!((c.alpha1 - C64::new(1.0, 2.0)).norm() < 1e-12);
        assert!((c.beta1 - C64::new(6.5, 1.0)).norm() < 1e-12);
        assert!((c.cross - C64::new(-0.1, 0.1)).norm() < 1e-12);
        // symmetric frequencies: both diagonals coincide
        assert_eq!(c.alpha1, c.alpha2);
        assert_eq!(c.beta1, c.beta2);
    }

    #[test]
    fn quartic_matches_pair_determinant() {
        // the quartic must equal det [[P1, cross], [cross, P2]] at any point
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let mut cplx = |s: f64| {
            C64::new(s * (2.0 * u01(&mut rng) - 1.0), s * (2.0 * u01(&mut rng) - 1.0))
        };
        for _ in 0..20 {
            let c = SecondOrderCoeffs {
                alpha1: cplx(3.0),
                beta1: cplx(3.0),
                alpha2: cplx(3.0),
                beta2: cplx(3.0),
                cross: cplx(2.0),
            };
            let [qa, qb, qc, qd] = quartic_coeffs(&c);
            for _ in 0..5 {
                let l = cplx(2.0);
                let p1 = (l + c.alpha1) * l + c.beta1;
                let p2 = (l + c.alpha2) * l + c.beta2;
                let det = p1 * p2 - c.cross * c.cross;
                let poly = (((l + qa) * l + qb) * l + qc) * l + qd;
                let scale = det.norm().max(1.0);
                assert!(
                    (det - poly).norm() / scale < 1e-12,
                    "determinant {det} vs polynomial {poly}"
                );
            }
        }
    }

    #[test]
    fn quartic_coeffs_symmetric_and_decoupled_forms() {
        let p = Params::default();
        let c = second_order_coeffs(&p, 0.3);
        let [qa, _, _, qd] = quartic_coeffs(&c);
        assert!((qa - 2.0 * c.alpha1).norm() < 1e-12);
        assert!((qd - (c.beta1 * c.beta1 - c.cross * c.cross)).norm() < 1e-12);

        let dec = SecondOrderCoeffs {
            alpha1: C64::new(0.0, 0.0),
            beta1: C64::new(1.0, 0.0),
            alpha2: C64::new(0.0, 0.0),
            beta2: C64::new(1.0, 0.0),
            cross: C64::new(0.0, 0.0),
        };
        let q = quartic_coeffs(&dec);
        // (l^2 + 1)^2 = l^4 + 2 l^2 + 1
        assert_eq!(q[0], C64::new(0.0, 0.0));
        assert!((q[1] - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(q[2], C64::new(0.0, 0.0));
        assert!((q[3] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mode_ratios_error_on_zero_cross() {
        let p = Params {
            g: 0.0,
            ..Params::default()
        };
        let c = second_order_coeffs(&p, 0.0);
        let ls = [C64::new(0.0, 1.0); 4];
        assert_eq!(mode_ratios(&c, &ls), Err(Error::DecoupledCross));
        let p = Params::default();
        let c = second_order_coeffs(&p, 0.0);
        assert!(mode_ratios(&c, &ls).is_ok());
    }

    #[test]
    fn params_validation() {
        assert!(Params::default().validate().is_ok());
        let bad = Params {
            bath_width: 0.0,
            ..Params::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Parameter(_))));
        let bad = Params {
            bath_center: -1.0,
            ..Params::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Parameter(_))));
        let bad = Params {
            coupling_rate: f64::NAN,
            ..Params::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Parameter(_))));
    }
}
