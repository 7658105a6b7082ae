//! Named scenario presets: ready-made configurations covering the regimes
//! the simulator is built to explore — broadband vs narrow reservoirs,
//! temperature and spectral-width sweeps, detuning-control amplitude and
//! duty-cycle sweeps, jittered pulse trains, and suppression scoring.
//!
//! Temperatures: presets whose point is heating phenomenology (a reservoir
//! feeding quanta into a mode that starts at one quantum) run at `T_B = 2.0`,
//! where the thermal occupation exceeds the initial one; the shipped
//! temperature sweep axis is `{0.5, 1.0, 2.0}`. The direct mode-mode
//! coupling `g` is stated explicitly in every preset because no single value
//! is canonical; the shipped trends hold across moderate `g`.
//!
//! Pulse-train presets pin `matching = kernel-continuous`: the reservoir
//! memory is continuous across detuning switches, and at strong driving the
//! alternative derivative-continuous rule pumps the mode norm above 1, which
//! the observables reject as unphysical.

use crate::config::{
    BathModesConfig, EngineChoice, GridConfig, MatchingChoice, OutputsConfig, ReductionChoice,
    RunConfig, ScheduleConfig, SweepAxis, SweepConfig,
};
use serde_json::json;

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub config: RunConfig,
}

fn base(coupling_rate: f64, bath_width: f64, bath_temp: f64) -> RunConfig {
    RunConfig {
        coupling_rate,
        bath_width,
        bath_temp,
        bath_center: 1.0,
        omega1: 1.0,
        omega2: 1.0,
        g: 0.1,
        n1_init: 1.0,
        n2_init: 0.0,
        engine: EngineChoice::Closed,
        reduction: None,
        matching: MatchingChoice::DerivativeContinuous,
        grid: GridConfig { t_end: 20.0, samples: 2001 },
        window: None,
        dt: None,
        bath_modes: None,
        schedule: ScheduleConfig::free(),
        outputs: OutputsConfig::default(),
        sweep: None,
    }
}

fn regular_train(omega_d: f64, eta: f64, tau: f64) -> ScheduleConfig {
    ScheduleConfig {
        kind: "regular".to_string(),
        omega_d: Some(omega_d),
        tau: Some(tau),
        delta: None,
        eta: Some(eta),
        jitter_delta: None,
        jitter_tau: None,
        jitter_omega_d: None,
        seed: None,
        pulses: None,
    }
}

fn jittered_train(omega_d: f64, eta: f64, tau: f64, jitter: f64, seed: u64) -> ScheduleConfig {
    ScheduleConfig {
        kind: "irregular".to_string(),
        omega_d: Some(omega_d),
        tau: Some(tau),
        delta: None,
        eta: Some(eta),
        jitter_delta: Some(jitter),
        jitter_tau: Some(jitter),
        jitter_omega_d: Some(jitter),
        seed: Some(seed),
        pulses: None,
    }
}

fn axis(path: &str, values: &[f64]) -> SweepConfig {
    SweepConfig {
        axes: vec![SweepAxis {
            path: path.to_string(),
            values: values.iter().map(|&v| json!(v)).collect(),
        }],
    }
}

/// All shipped presets, in presentation order.
pub fn all() -> Vec<Preset> {
    let mut list = Vec::new();

    let mut fig3 = base(1.0, 15.0, 2.0);
    fig3.reduction = Some(ReductionChoice::StaticCross);
    fig3.sweep = Some(axis("T_B", &[0.5, 1.0, 2.0]));
    list.push(Preset {
        name: "fig3",
        summary: "broadband reservoir (width 15, coupling 1): smooth monotonic heating, no revivals",
        config: fig3,
    });

    let mut fig4 = base(15.0, 1.0, 1.0);
    fig4.sweep = Some(axis("T_B", &[0.5, 1.0, 2.0]));
    list.push(Preset {
        name: "fig4",
        summary: "narrow reservoir (coupling 15, width 1): occupation revivals and energy backflow",
        config: fig4,
    });

    let mut fig5 = base(5.0, 1.0, 1.0);
    fig5.sweep = Some(axis("gamma", &[0.1, 0.5, 1.0, 5.0]));
    list.push(Preset {
        name: "fig5",
        summary: "reservoir-width sweep at coupling 5: oscillations fade as the spectrum broadens",
        config: fig5,
    });

    let mut fig6a = base(1.0, 0.01, 1.0);
    fig6a.grid = GridConfig { t_end: 50.0, samples: 5001 };
    list.push(Preset {
        name: "fig6a",
        summary: "very narrow reservoir: coherence revivals that stay inside the separability bound",
        config: fig6a,
    });

    let mut fig6b = base(1.0, 15.0, 1.0);
    fig6b.grid = GridConfig { t_end: 50.0, samples: 5001 };
    list.push(Preset {
        name: "fig6b",
        summary: "broad reservoir: coherence saturates smoothly below the separability bound",
        config: fig6b,
    });

    let mut fig7 = base(15.0, 1.0, 2.0);
    fig7.schedule = regular_train(25.0, 1.0, 0.27);
    fig7.matching = MatchingChoice::KernelContinuous;
    fig7.sweep = Some(axis("schedule.omega_D", &[5.0, 15.0, 20.0, 25.0]));
    list.push(Preset {
        name: "fig7",
        summary: "always-on detuning sweep: larger frequency shifts hold the pair off resonance",
        config: fig7,
    });

    let mut fig8 = base(15.0, 1.0, 2.0);
    fig8.schedule = regular_train(25.0, 0.9, 0.27);
    fig8.matching = MatchingChoice::KernelContinuous;
    fig8.sweep = Some(axis("schedule.eta", &[0.5, 0.75, 0.9, 0.95]));
    list.push(Preset {
        name: "fig8",
        summary: "duty-cycle sweep at detuning 25 with a heating reservoir",
        config: fig8,
    });

    let mut fig9 = base(15.0, 1.0, 1.0);
    fig9.schedule = regular_train(25.0, 0.9, 0.27);
    fig9.matching = MatchingChoice::KernelContinuous;
    fig9.sweep = Some(axis("schedule.eta", &[0.0, 0.5, 0.75, 0.9, 0.95]));
    list.push(Preset {
        name: "fig9",
        summary: "duty-cycle sweep at detuning 25, unit temperature; eta = 0 is free evolution",
        config: fig9,
    });

    let mut fig10 = base(15.0, 1.0, 1.0);
    fig10.schedule = jittered_train(30.0, 0.5, 0.27, 0.2, 1);
    fig10.matching = MatchingChoice::KernelContinuous;
    fig10.sweep = Some(axis("schedule.eta", &[0.2, 0.5, 0.98]));
    list.push(Preset {
        name: "fig10",
        summary: "jittered pulse train (20% width/period/amplitude) vs clockwork control",
        config: fig10,
    });

    let mut fig11a = base(15.0, 1.0, 1.0);
    fig11a.schedule = regular_train(25.0, 0.9, 0.27);
    fig11a.matching = MatchingChoice::KernelContinuous;
    fig11a.grid = GridConfig { t_end: 60.0, samples: 6001 };
    fig11a.outputs = OutputsConfig { timeseries: true, suppression: true };
    fig11a.sweep = Some(axis("schedule.eta", &[0.3, 0.6, 0.9]));
    list.push(Preset {
        name: "fig11a",
        summary: "suppression score of a regular train against free decay, long horizon",
        config: fig11a,
    });

    let mut fig11b = base(15.0, 1.0, 1.0);
    fig11b.schedule = jittered_train(30.0, 0.98, 0.27, 0.2, 1);
    fig11b.matching = MatchingChoice::KernelContinuous;
    fig11b.grid = GridConfig { t_end: 60.0, samples: 6001 };
    fig11b.outputs = OutputsConfig { timeseries: true, suppression: true };
    fig11b.sweep = Some(axis("schedule.eta", &[0.2, 0.5, 0.98]));
    list.push(Preset {
        name: "fig11b",
        summary: "suppression score of a jittered train against free decay, long horizon",
        config: fig11b,
    });

    list
}

/// Look a preset up by name.
pub fn find(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}

/// Discrete-reservoir defaults are part of the schema even though no preset
/// switches the engine; exposed here so `presets show` documents them.
pub fn discrete_bath_defaults() -> BathModesConfig {
    BathModesConfig::default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves() {
        for p in all() {
            let r = p.config.resolve().unwrap_or_else(|e| {
                panic!("preset {} failed to resolve: {e}", p.name);
            });
            assert!(!r.grid.is_empty(), "{}", p.name);
        }
    }

    #[test]
    fn every_preset_round_trips_through_json() {
        for p in all() {
            let text = crate::config::canonical_json(&p.config);
            let back = crate::config::from_tree(crate::config::parse_json(&text).unwrap())
                .unwrap_or_else(|e| panic!("preset {} does not round-trip: {e}", p.name));
            assert_eq!(p.config, back, "{}", p.name);
            // the direct coupling is always stated explicitly
            assert!(text.contains("\"g\""), "{}", p.name);
        }
    }

    #[test]
    fn preset_names_are_unique_and_findable() {
        let names: Vec<&str> = all().iter().map(|p| p.name).collect();
        for (i, n) in names.iter().enumerate() {
            assert!(!names[i + 1..].contains(n), "duplicate preset name {n}");
            assert!(find(n).is_some());
        }
        assert!(find("fig99").is_none());
    }

    #[test]
    fn sweep_values_match_their_axes() {
        let p = find("fig9").unwrap();
        let sweep = p.config.sweep.unwrap();
        assert_eq!(sweep.axes.len(), 1);
        assert_eq!(sweep.axes[0].path, "schedule.eta");
        assert_eq!(sweep.axes[0].values.len(), 5);
    }
}
