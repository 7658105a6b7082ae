//! Built-in verification suite: spot-checks of the root solver and of the
//! agreement between the closed-form propagator and its independent
//! integrators, runnable without any configuration. The `full` level adds
//! the slower reservoir-discretization and reduction-contrast checks.

use duobath_core::model::{memory_kernel, spectral_density_transform, Params};
use duobath_core::observables::observables;
use duobath_core::oracle::{integrate_discrete_bath, integrate_kernel};
use duobath_core::propagator::{propagate, MatchingMode, Reduction};
use duobath_core::quartic::{companion_roots, quartic_residual, solve_quartic, track_branches};
use duobath_core::schedule::{free_schedule, regular_schedule, to_segments};
use duobath_core::C64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

/// Test hooks; the command line never sets these.
#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Perturb one solved root before measuring residuals, to prove the
    /// residual gate can fail.
    pub corrupt_root: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub description: &'static str,
    /// Bound on `measured`: an upper bound in `max` mode, a lower bound in
    /// `min` mode (for quantities that must stay visibly nonzero).
    pub tolerance: f64,
    pub measured: f64,
    pub mode: &'static str,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub level: Level,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn check_max(name: &'static str, description: &'static str, tolerance: f64, measured: f64) -> Check {
    Check {
        name,
        description,
        tolerance,
        measured,
        mode: "max",
        pass: measured.is_finite() && measured <= tolerance,
    }
}

fn check_min(name: &'static str, description: &'static str, tolerance: f64, measured: f64) -> Check {
    Check {
        name,
        description,
        tolerance,
        measured,
        mode: "min",
        pass: measured.is_finite() && measured >= tolerance,
    }
}

fn linspace(t_end: f64, samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|k| t_end * k as f64 / (samples - 1) as f64)
        .collect()
}

fn params(coupling_rate: f64, bath_width: f64) -> Params {
    Params {
        coupling_rate,
        bath_width,
        bath_temp: 1.0,
        ..Params::default()
    }
}

/// Deterministic batch of monic quartic coefficient vectors with real and
/// imaginary parts uniform on [-5, 5].
fn random_quartics(count: usize) -> Vec<[C64; 4]> {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_0f_d00b_a785);
    let mut u01 = move || (rng.next_u64() >> 11) as f64 * 2f64.powi(-53);
    (0..count)
        .map(|_| {
            let mut coeffs = [C64::new(0.0, 0.0); 4];
            for c in &mut coeffs {
                *c = C64::new(10.0 * u01() - 5.0, 10.0 * u01() - 5.0);
            }
            coeffs
        })
        .collect()
}

fn quartic_checks(opts: &ValidateOptions) -> Vec<Check> {
    let quartics = random_quartics(1000);
    let mut worst_residual = 0.0f64;
    let mut worst_vieta = 0.0f64;
    let mut worst_pairing = 0.0f64;
    for (idx, coeffs) in quartics.iter().enumerate() {
        let solved = solve_quartic(coeffs).expect("random quartics are solvable");
        let mut roots = solved.roots;
        if opts.corrupt_root && idx == 0 {
            roots[0] += C64::new(1e-3, 0.0);
        }
        for root in &roots {
            worst_residual = worst_residual.max(quartic_residual(coeffs, *root));
        }
        let sum: C64 = roots.iter().sum();
        let product: C64 = roots.iter().product();
        let [a, _, _, d] = *coeffs;
        worst_vieta = worst_vieta.max((sum + a).norm() / (1.0 + a.norm()));
        worst_vieta = worst_vieta.max((product - d).norm() / (1.0 + d.norm()));

        let companion: Vec<C64> =
            companion_roots(coeffs).expect("random quartics have a computable companion spectrum");
        let companion: [C64; 4] = companion.try_into().expect("quartics have four roots");
        let paired = track_branches(&roots, &companion);
        for (r, c) in roots.iter().zip(&paired) {
            worst_pairing = worst_pairing.max((r - c).norm());
        }
    }
    vec![
        check_max(
            "quartic-root-residual",
            "largest normalized polynomial residual over 1000 random quartics",
            1e-9,
            worst_residual,
        ),
        check_max(
            "quartic-vieta-identities",
            "largest relative violation of the root-sum and root-product identities",
            1e-8,
            worst_vieta,
        ),
        check_max(
            "quartic-companion-pairing",
            "largest distance between radical roots and matched companion-matrix roots",
            1e-8,
            worst_pairing,
        ),
    ]
}

fn cross_engine_check() -> Check {
    let grid = linspace(20.0, 2001);
    let mut worst = 0.0f64;
    for (coupling_rate, bath_width) in [(1.0, 15.0), (15.0, 1.0)] {
        let p = params(coupling_rate, bath_width);
        let segments = to_segments(&free_schedule(20.0).expect("positive horizon"));
        let closed = propagate(
            &p,
            &segments,
            &grid,
            Reduction::SharedMemory,
            MatchingMode::DerivativeContinuous,
        )
        .expect("free evolution propagates");
        let kernel = integrate_kernel(&p, &segments, &grid, 1e-3).expect("kernel integration");
        let obs_c = observables(&p, &closed).expect("observables");
        let obs_k = observables(&p, &kernel).expect("observables");
        for (a, b) in obs_c.n1.iter().zip(&obs_k.n1) {
            worst = worst.max((a - b).abs());
        }
    }
    check_max(
        "free-evolution-cross-engine",
        "largest occupation deviation between the closed form and the kernel integrator on free evolution",
        1e-5,
        worst,
    )
}

fn discrete_norm_check() -> Check {
    let p = params(15.0, 1.0);
    let grid = linspace(20.0, 201);
    let segments = to_segments(&free_schedule(20.0).expect("positive horizon"));
    let run = integrate_discrete_bath(&p, &segments, &grid, 1001, 40.0, 2e-3)
        .expect("discrete reservoir integrates");
    let worst = run
        .norm
        .iter()
        .map(|n| (n - 1.0).abs())
        .fold(0.0f64, f64::max);
    check_max(
        "reservoir-discretization-norm",
        "largest drift of the total norm across a 1001-mode reservoir discretization",
        1e-4,
        worst,
    )
}

fn matching_divergence_check() -> Check {
    let p = params(15.0, 1.0);
    let grid = linspace(10.0, 1001);
    let schedule = regular_schedule(25.0, 0.9 * 0.27, 0.27, 10.0).expect("valid pulse train");
    let segments = to_segments(&schedule);
    let run = |matching| {
        propagate(&p, &segments, &grid, Reduction::SharedMemory, matching)
            .expect("pulse train propagates")
    };
    let a = run(MatchingMode::DerivativeContinuous);
    let b = run(MatchingMode::KernelContinuous);
    let worst = a
        .states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| (x.a1.norm_sqr() - y.a1.norm_sqr()).abs())
        .fold(0.0f64, f64::max);
    check_min(
        "matching-rule-divergence",
        "largest amplitude gap between the two segment-matching rules on a fast pulse train; the rules must stay distinguishable",
        1e-3,
        worst,
    )
}

fn static_cross_gap_check() -> Check {
    let p = params(15.0, 1.0);
    let grid = linspace(20.0, 2001);
    let segments = to_segments(&free_schedule(20.0).expect("positive horizon"));
    let frozen = propagate(
        &p,
        &segments,
        &grid,
        Reduction::StaticCross,
        MatchingMode::DerivativeContinuous,
    )
    .expect("free evolution propagates");
    let exact = integrate_kernel(&p, &segments, &grid, 1e-3).expect("kernel integration");
    let worst = frozen
        .states
        .iter()
        .zip(&exact.states)
        .map(|(x, y)| (x.a1.norm_sqr() - y.a1.norm_sqr()).abs())
        .fold(0.0f64, f64::max);
    check_min(
        "static-cross-reduction-gap",
        "largest amplitude gap between the frozen-cross reduction and the exact kernel dynamics; the reduction must stay distinguishable",
        1e-3,
        worst,
    )
}

fn kernel_transform_check() -> Check {
    let p = Params {
        bath_width: 2.0,
        ..Params::default()
    };
    let mut worst = 0.0f64;
    for k in 0..=50 {
        let dt = 5.0 * k as f64 / 50.0;
        let g = memory_kernel(dt, &p).expect("finite lags have a kernel value");
        let f = spectral_density_transform(dt, &p);
        worst = worst.max((g - f * p.bath_width).norm() / (1.0 + g.norm()));
    }
    check_max(
        "kernel-equals-width-times-transform",
        "relative gap between the memory kernel and bath-width times the spectral-density transform",
        1e-12,
        worst,
    )
}

/// Run the verification suite at the given level. Pure computation; the
/// caller decides how to present the report.
pub fn run(level: Level, opts: &ValidateOptions) -> Report {
    let mut checks = quartic_checks(opts);
    checks.push(cross_engine_check());
    if level == Level::Full {
        checks.push(discrete_norm_check());
        checks.push(matching_divergence_check());
        checks.push(static_cross_gap_check());
        checks.push(kernel_transform_check());
    }
    let pass = checks.iter().all(|c| c.pass);
    Report { level, checks, pass }
}
