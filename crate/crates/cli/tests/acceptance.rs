//! Acceptance gate: every release-blocking property of the simulator,
//! checked end to end at fixed tolerances. Each test states the property it
//! guards; a failure message carries the measured numbers and, where the
//! property is known not to hold for this model at these settings, the
//! mechanism.

use duobath_cli::config::{self, RunConfig};
use duobath_cli::{presets, runner, validate};
use duobath_core::model::Params;
use duobath_core::observables::{observables, trend_checks};
use duobath_core::oracle::{integrate_discrete_bath, integrate_kernel};
use duobath_core::propagator::{propagate, MatchingMode, Reduction};
use duobath_core::schedule::{free_schedule, to_segments, Segment};
use serde_json::json;
use std::path::PathBuf;

fn linspace(t_end: f64, samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|k| t_end * k as f64 / (samples - 1) as f64)
        .collect()
}

fn preset_config(name: &str) -> RunConfig {
    presets::find(name)
        .unwrap_or_else(|| panic!("preset '{name}' exists"))
        .config
}

/// Apply dotted-path JSON overrides to a configuration.
fn tweak(cfg: &RunConfig, sets: &[(&str, serde_json::Value)]) -> RunConfig {
    let mut tree = serde_json::to_value(cfg).expect("configs serialize");
    for (path, value) in sets {
        config::set_path(&mut tree, path, value.clone()).expect("override path is valid");
    }
    config::from_tree(tree).expect("overridden config stays valid")
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "duobath-acceptance-{tag}-{}",
        std::process::id()
    ));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn free_params(coupling_rate: f64, bath_width: f64) -> Params {
    Params {
        coupling_rate,
        bath_width,
        bath_temp: 1.0,
        ..Params::default()
    }
}

#[test]
fn a01_quartic_roots_meet_residual_vieta_and_pairing_bounds() {
    let report = validate::run(validate::Level::Fast, &validate::ValidateOptions::default());
    let get = |name: &str| {
        report
            .checks
            .iter()
            .find(|c| c.name == name)
            .unwrap_or_else(|| panic!("check '{name}' exists"))
    };
    let residual = get("quartic-root-residual");
    assert_eq!(residual.tolerance, 1e-9);
    assert!(
        residual.pass,
        "worst normalized quartic residual {:.3e} exceeds 1e-9",
        residual.measured
    );
    let vieta = get("quartic-vieta-identities");
    assert_eq!(vieta.tolerance, 1e-8);
    assert!(
        vieta.pass,
        "worst relative root-sum/product violation {:.3e} exceeds 1e-8",
        vieta.measured
    );
    let pairing = get("quartic-companion-pairing");
    assert_eq!(pairing.tolerance, 1e-8);
    assert!(
        pairing.pass,
        "worst radical-vs-companion pairing distance {:.3e} exceeds 1e-8",
        pairing.measured
    );
}

#[test]
fn a02_closed_form_matches_the_kernel_integrator_on_free_evolution() {
    let grid = linspace(20.0, 2001);
    for (coupling_rate, bath_width) in [(1.0, 15.0), (15.0, 1.0)] {
        let p = free_params(coupling_rate, bath_width);
        let segments = to_segments(&free_schedule(20.0).unwrap());
        let closed = propagate(
            &p,
            &segments,
            &grid,
            Reduction::SharedMemory,
            MatchingMode::DerivativeContinuous,
        )
        .unwrap();
        let kernel = integrate_kernel(&p, &segments, &grid, 1e-3).unwrap();
        let n1_c = observables(&p, &closed).unwrap().n1;
        let n1_k = observables(&p, &kernel).unwrap().n1;
        let worst = n1_c
            .iter()
            .zip(&n1_k)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(
            worst <= 1e-5,
            "closed form vs kernel integrator: max occupation deviation {worst:.3e} exceeds \
             1e-5 at coupling rate {coupling_rate}, width {bath_width}"
        );
    }
}

#[test]
fn a03_discrete_reservoir_conserves_norm_and_tracks_the_closed_occupation() {
    let p = free_params(15.0, 1.0);
    let grid = linspace(20.0, 401);
    let segments = to_segments(&free_schedule(20.0).unwrap());
    let run = integrate_discrete_bath(&p, &segments, &grid, 4001, 40.0, 2e-3).unwrap();

    let worst_norm = run
        .norm
        .iter()
        .map(|n| (n - 1.0).abs())
        .fold(0.0f64, f64::max);
    assert!(
        worst_norm <= 1e-4,
        "discrete-reservoir norm drifted by {worst_norm:.3e}, bound 1e-4"
    );

    let closed = propagate(
        &p,
        &segments,
        &grid,
        Reduction::SharedMemory,
        MatchingMode::DerivativeContinuous,
    )
    .unwrap();
    let n1_closed = observables(&p, &closed).unwrap().n1;
    let worst_n1 = run
        .trajectory
        .states
        .iter()
        .zip(&run.thermal_transfer)
        .zip(&n1_closed)
        .map(|((s, transfer), n1c)| {
            let n1_d = s.a1.norm_sqr() * p.n1_init + s.a2.norm_sqr() * p.n2_init + transfer;
            (n1_d - n1c).abs()
        })
        .fold(0.0f64, f64::max);
    assert!(
        worst_n1 <= 2e-2,
        "discrete-reservoir occupation deviates from the closed form by {worst_n1:.3e}, bound \
         2e-2. Mechanism: the closed form folds the reservoir's thermal occupation in at the \
         line center only (every leaked quantum counts with the center-frequency Bose factor), \
         while the mode-resolved reservoir weights each frequency by its own Bose factor. At \
         unit temperature that factor varies strongly across the line, and at coupling rate 15 \
         the leaked weight is broad enough to sample that variation, so the two bookkeepings \
         disagree by a few times 1e-1 while the amplitudes themselves still agree. The norm \
         clause above passes; the closure, not the integrator, is what the gap measures."
    );
}

#[test]
fn a04_broad_and_narrow_reservoirs_sit_on_opposite_sides_of_the_revival_dichotomy() {
    let broad = runner::execute(&preset_config("fig3")).unwrap();
    let trend = trend_checks(&broad.observables, None).unwrap();
    assert!(
        trend.monotonic_rise,
        "broadband-reservoir occupation was not monotonically rising"
    );
    assert_eq!(
        trend.revival_count, 0,
        "broadband reservoir produced {} revivals, expected none",
        trend.revival_count
    );

    let narrow = runner::execute(&preset_config("fig4")).unwrap();
    let trend = trend_checks(&narrow.observables, Some((0.0, 10.0))).unwrap();
    assert!(
        trend.revival_count >= 2,
        "narrow reservoir produced only {} revivals in [0, 10], expected at least 2",
        trend.revival_count
    );
}

#[test]
fn a05_both_regimes_thermalize_to_the_reservoir_occupation() {
    let n_b = 1.0 / (std::f64::consts::E - 1.0);
    for name in ["fig3", "fig4"] {
        let cfg = tweak(
            &preset_config(name),
            &[
                ("T_B", json!(1.0)),
                ("grid", json!({"t_end": 30.0, "samples": 3001})),
            ],
        );
        let art = runner::execute(&cfg).unwrap();
        let n1 = *art.observables.n1.last().unwrap();
        let n2 = *art.observables.n2.last().unwrap();
        assert!(
            (n1 - n_b).abs() <= 5e-2 && (n2 - n_b).abs() <= 5e-2,
            "preset {name}: occupations ({n1:.4}, {n2:.4}) missed the reservoir occupation \
             {n_b:.4} by more than 5e-2 at t = 30"
        );
    }
}

#[test]
fn a06_revival_count_is_nonincreasing_in_reservoir_width() {
    let widths = [0.1, 0.5, 1.0, 5.0];
    let mut counts = Vec::new();
    let mut heights = Vec::new();
    for &w in &widths {
        let cfg = tweak(&preset_config("fig5"), &[("gamma", json!(w))]);
        let art = runner::execute(&cfg).unwrap();
        let trend = trend_checks(&art.observables, None).unwrap();
        counts.push(trend.revival_count);
        // largest rebound of the occupation above its running minimum: the
        // size of the strongest revival, as opposed to how many there are
        let mut running_min = f64::INFINITY;
        let mut height = 0.0f64;
        for &v in &art.observables.n1 {
            running_min = running_min.min(v);
            height = height.max(v - running_min);
        }
        heights.push(height);
    }
    let entries: Vec<String> = widths
        .iter()
        .zip(&counts)
        .zip(&heights)
        .map(|((w, c), h)| format!("width {w} -> {c} revivals (largest {h:.3})"))
        .collect();
    assert!(
        counts.windows(2).all(|p| p[0] >= p[1]),
        "revival counts are not nonincreasing in the reservoir width: {}. Mechanism: the \
         counter tallies local maxima of the occupation above a fixed prominence, i.e. it \
         counts oscillation cycles, not their size. The size column does fall monotonically \
         as the line broadens, but a narrow line makes few deep, slow revivals while an \
         intermediate line fits more, still-sizable, faster cycles into the horizon, so the \
         cycle count peaks in the middle of the sweep and the count-based trend breaks \
         even though the backflow itself weakens exactly as stated.",
        entries.join(", ")
    );
}

#[test]
fn a07_stronger_detuning_lowers_the_protected_occupation() {
    let amplitudes = [5.0, 15.0, 20.0, 25.0];
    let mut averages = Vec::new();
    for &w in &amplitudes {
        let cfg = tweak(&preset_config("fig7"), &[("schedule.omega_D", json!(w))]);
        averages.push(runner::execute(&cfg).unwrap().summary.window_avg_n1);
    }
    let pairs: Vec<String> = amplitudes
        .iter()
        .zip(&averages)
        .map(|(w, a)| format!("amplitude {w} -> {a:.4}"))
        .collect();
    assert!(
        averages.windows(2).all(|p| p[0] > p[1]),
        "window-averaged occupation is not strictly decreasing in the detuning amplitude: {}",
        pairs.join(", ")
    );
}

#[test]
fn a08_longer_duty_cycle_lowers_the_protected_occupation() {
    use duobath_core::observables::window_average;
    let duties = [0.0, 0.5, 0.75, 0.9, 0.95];
    let mut averages = Vec::new();
    let mut retained = Vec::new();
    for &eta in &duties {
        let cfg = tweak(&preset_config("fig9"), &[("schedule.eta", json!(eta))]);
        let art = runner::execute(&cfg).unwrap();
        averages.push(art.summary.window_avg_n1);
        let obs = &art.observables;
        let sigma: Vec<f64> = obs
            .abs_a1_sq
            .iter()
            .zip(&obs.abs_a2_sq)
            .map(|(a, b)| a + b)
            .collect();
        retained.push(window_average(&obs.times, &sigma, 5.0, 20.0).unwrap());
    }
    let entries: Vec<String> = duties
        .iter()
        .zip(&averages)
        .zip(&retained)
        .map(|((eta, a), r)| format!("duty {eta} -> occupation {a:.4} (retained amplitude {r:.3})"))
        .collect();
    assert!(
        averages.windows(2).all(|p| p[0] > p[1]),
        "window-averaged occupation is not strictly decreasing in the duty cycle: {}. \
         Mechanism: the shared reservoir never couples to the antisymmetric combination \
         of the two modes, so even free evolution keeps half the excitation in that dark \
         channel (retained amplitude 0.500) and settles near 0.25 + 0.582/2 = 0.541. Each \
         retained unit of amplitude contributes one half to this mode's occupation while \
         each leaked unit brings in 0.582 thermal quanta, so at unit temperature the \
         whole family can only span (0.582 - 0.5) times the retained-amplitude range, \
         about 0.02 — and inside that sliver the ordering is scrambled, because the \
         retained amplitude is itself non-monotonic in duty: the train's first sideband \
         (2*pi over the period, about 23.3) sits next to the on-window detuning of 25 and \
         re-couples the pair near duty 0.9 (see the dip in the retained column). With a \
         reservoir hotter than half a quantum per leaked unit the same retained-amplitude \
         family spreads an order of magnitude wider and the protection becomes visible; \
         at unit temperature the criterion asks the retained and thermal bookkeepings to \
         separate inside their cancellation.",
        entries.join(", ")
    );
}

#[test]
fn a09_jittered_control_is_no_better_sparse_and_equivalent_dense() {
    let seeds: Vec<u64> = (1..=40).collect();
    let dir = scratch_dir("compare");

    let sparse_irr = tweak(&preset_config("fig10"), &[("schedule.eta", json!(0.2))]);
    let sparse_reg = runner::derive_regular(&sparse_irr);
    let (sparse, _) =
        runner::compare_to_files(&dir, "sparse", &sparse_reg, &sparse_irr, &seeds).unwrap();
    assert!(
        sparse.gap_irregular_minus_regular >= 0.0,
        "at duty 0.2 the jittered train averaged below the clockwork train: gap {:.4e} \
         (regular {:.5}, jittered mean {:.5} over {} seeds); jitter should only degrade \
         sparse control",
        sparse.gap_irregular_minus_regular,
        sparse.regular_window_avg_n1,
        sparse.irregular_window_avg_n1_mean,
        seeds.len()
    );

    let dense_irr = tweak(&preset_config("fig10"), &[("schedule.eta", json!(0.98))]);
    let dense_reg = runner::derive_regular(&dense_irr);
    let (dense, _) =
        runner::compare_to_files(&dir, "dense", &dense_reg, &dense_irr, &seeds).unwrap();
    assert!(
        dense.gap_irregular_minus_regular.abs() <= 0.05,
        "at duty 0.98 the jittered and clockwork trains disagree by {:.4e}, bound 0.05 \
         (regular {:.5}, jittered mean {:.5})",
        dense.gap_irregular_minus_regular,
        dense.regular_window_avg_n1,
        dense.irregular_window_avg_n1_mean
    );

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn a10_suppression_scores_are_clipped_lobed_and_settle_to_zero() {
    let n_b = 1.0 / (std::f64::consts::E - 1.0);
    let cases: Vec<(String, RunConfig)> = [("fig11a", [0.3, 0.6, 0.9]), ("fig11b", [0.2, 0.5, 0.98])]
        .into_iter()
        .flat_map(|(name, etas)| {
            etas.into_iter().map(move |eta| {
                (
                    format!("{name} duty {eta}"),
                    tweak(&preset_config(name), &[("schedule.eta", json!(eta))]),
                )
            })
        })
        .collect();

    for (label, cfg) in &cases {
        let art = runner::execute(cfg).unwrap();
        let s = art.suppression.as_ref().expect("suppression was requested");

        for (&t, &v) in s.times.iter().zip(&s.values) {
            if v.is_finite() {
                assert!(v <= 1.0, "{label}: suppression {v} exceeds 1 at t = {t}");
            }
        }

        // settling clause: once both runs sit inside the thermal tube, the
        // score must have drifted to zero
        let mut free_cfg = cfg.clone();
        free_cfg.schedule = config::ScheduleConfig::free();
        free_cfg.outputs.suppression = false;
        free_cfg.sweep = None;
        let free_art = runner::execute(&free_cfg).unwrap();
        let n1_ctrl = &art.observables.n1;
        let n1_free = &free_art.observables.n1;
        let last_outside = n1_ctrl
            .iter()
            .zip(n1_free)
            .enumerate()
            .filter(|(_, (c, f))| (*c - n_b).abs() > 5e-2 || (*f - n_b).abs() > 5e-2)
            .map(|(i, _)| i)
            .last();
        let tail_start = last_outside.map_or(0, |i| i + 1);
        assert!(
            tail_start < s.values.len(),
            "{label}: the runs never both settled within 5e-2 of the reservoir occupation"
        );
        let tail_worst = s.values[tail_start..]
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(
            tail_worst <= 0.05,
            "{label}: after both runs settled within 5e-2 of the reservoir occupation \
             (from t = {:.2}), the suppression score still reached {tail_worst:.4}, bound 0.05",
            s.times[tail_start]
        );
    }

    // the regular train at duty 0.9 must show genuine early-time protection
    let lobed = runner::execute(&cases[2].1).unwrap();
    let max_s = lobed
        .suppression
        .as_ref()
        .unwrap()
        .values
        .iter()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, |acc, v| acc.max(*v));
    assert!(
        max_s > 0.0,
        "regular train at duty 0.9: the suppression score never went positive (max {max_s:.4})"
    );

    // an uncontrolled "control" run scores exactly zero against itself
    let null_cfg = tweak(
        &preset_config("fig11a"),
        &[("schedule", json!({"kind": "free"}))],
    );
    let null_art = runner::execute(&null_cfg).unwrap();
    let s = null_art.suppression.as_ref().unwrap();
    assert!(s.evaluated > 0);
    for (&t, &v) in s.times.iter().zip(&s.values) {
        if v.is_finite() {
            assert!(
                v == 0.0,
                "free-against-free suppression is {v:.3e} at t = {t}, expected exactly 0"
            );
        }
    }
}

#[test]
fn a11_splitting_a_constant_detuning_interval_does_not_change_the_trajectory() {
    let p = Params::default();
    let grid = linspace(20.0, 2001);
    for (detuning, matching) in [
        (0.0, MatchingMode::DerivativeContinuous),
        (0.0, MatchingMode::KernelContinuous),
        (25.0, MatchingMode::DerivativeContinuous),
        (25.0, MatchingMode::KernelContinuous),
    ] {
        let single = [Segment { t0: 0.0, t1: 20.0, detuning }];
        let split: Vec<Segment> = (0..10)
            .map(|k| Segment {
                t0: 2.0 * k as f64,
                t1: 2.0 * (k + 1) as f64,
                detuning,
            })
            .collect();
        let a = propagate(&p, &single, &grid, Reduction::SharedMemory, matching).unwrap();
        let b = propagate(&p, &split, &grid, Reduction::SharedMemory, matching).unwrap();
        let worst = a
            .states
            .iter()
            .zip(&b.states)
            .map(|(x, y)| ((x.a1 - y.a1).norm()).max((x.a2 - y.a2).norm()))
            .fold(0.0f64, f64::max);
        assert!(
            worst <= 1e-9,
            "splitting a constant-detuning ({detuning}) interval into 10 segments moved the \
             trajectory by {worst:.3e} under {matching:?}, bound 1e-9"
        );
    }
}

#[test]
fn a12_the_coherence_witness_stays_classical_in_both_width_regimes() {
    for name in ["fig6a", "fig6b"] {
        let art = runner::execute(&preset_config(name)).unwrap();
        let trend = trend_checks(&art.observables, None).unwrap();
        assert!(
            trend.witness_max <= 1e-9,
            "preset {name}: the correlation witness reached {:.3e}, bound 1e-9",
            trend.witness_max
        );
    }
}

#[test]
fn a13_the_kernel_integrator_converges_at_fourth_order() {
    let p = free_params(15.0, 1.0);
    let grid = linspace(20.0, 2001);
    let segments = to_segments(&free_schedule(20.0).unwrap());
    let closed = propagate(
        &p,
        &segments,
        &grid,
        Reduction::SharedMemory,
        MatchingMode::DerivativeContinuous,
    )
    .unwrap();
    let n1_ref = observables(&p, &closed).unwrap().n1;

    // each step divides the 0.01 grid spacing exactly, so the requested
    // halving is also the effective halving (the integrator rounds its step
    // down to land on every sample time)
    let mut errors = Vec::new();
    for &dt in &[5e-3, 2.5e-3, 1.25e-3, 6.25e-4] {
        let traj = integrate_kernel(&p, &segments, &grid, dt).unwrap();
        let n1 = observables(&p, &traj).unwrap().n1;
        let e = n1
            .iter()
            .zip(&n1_ref)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        errors.push(e);
    }
    let orders: Vec<f64> = errors
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .collect();
    let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(
        min_order >= 3.5,
        "observed convergence order fell to {min_order:.2} (errors {errors:?}, orders \
         {orders:?}); the integrator should be fourth-order against the closed form"
    );
}
