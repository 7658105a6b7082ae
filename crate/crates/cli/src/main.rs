//! Command-line front end: scenario runs, sweeps, control comparisons,
//! filter-function emission, the built-in verification suite, and the
//! bundled presets.

use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};

use duobath_cli::config::{self, RunConfig};
use duobath_cli::error::{CliError, CliResult};
use duobath_cli::output::format_sig;
use duobath_cli::{presets, runner, validate};

#[derive(Parser)]
#[command(
    name = "duobath",
    version,
    about = "Exact simulator for two detuning-controlled oscillators sharing a structured reservoir"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write its time series and summary
    Run(RunArgs),
    /// Expand the configuration's sweep axes and run every combination
    Sweep(RunArgs),
    /// Compare a clockwork pulse train against its jittered counterpart
    CompareDd(CompareArgs),
    /// Evaluate the schedule's filter function on a frequency grid
    Filter(FilterArgs),
    /// Run the built-in verification suite and print its report
    Validate(ValidateArgs),
    /// List or show the bundled presets
    Presets {
        #[command(subcommand)]
        cmd: PresetsCmd,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// Path to a JSON configuration file
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of a bundled preset (see `presets list`)
    #[arg(long)]
    preset: Option<String>,
    /// Override a configuration field, as dotted.path=value (repeatable)
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Directory the output files are written into
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Base name of the output files
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Jittered configuration, when --config holds the clockwork one
    #[arg(long)]
    irregular: Option<PathBuf>,
    /// Jitter seeds: comma-separated values and/or inclusive a-b ranges
    #[arg(long, default_value = "1-8")]
    seeds: String,
    /// Directory the output files are written into
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Base name of the output files
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Lower edge of the frequency grid
    #[arg(long, default_value_t = 0.0)]
    omega_min: f64,
    /// Upper edge of the frequency grid
    #[arg(long, default_value_t = 50.0)]
    omega_max: f64,
    /// Number of frequency samples
    #[arg(long, default_value_t = 2001)]
    omega_samples: usize,
    /// Directory the output file is written into
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Base name of the output file
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Also run the slower reservoir-discretization and reduction checks
    #[arg(long)]
    full: bool,
    /// Write the report JSON to this path as well
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PresetsCmd {
    /// List the bundled presets
    List,
    /// Print a preset's full configuration as JSON
    Show { name: String },
}

/// A loaded configuration plus the name its outputs default to.
struct Loaded {
    cfg: RunConfig,
    base_name: String,
}

fn load_source(source: &SourceArgs) -> CliResult<Loaded> {
    let (mut tree, base_name) = match (&source.config, &source.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".to_string());
            (config::parse_json(&text)?, stem)
        }
        (None, Some(name)) => {
            let preset = presets::find(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown preset '{name}'; run 'duobath presets list'"
                ))
            })?;
            let tree = serde_json::to_value(&preset.config)
                .expect("preset configurations always serialize");
            (tree, preset.name.to_string())
        }
        (None, None) => {
            return Err(CliError::Config(
                "pass exactly one of --config or --preset".into(),
            ));
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --config with --preset"),
    };
    for spec in &source.set {
        config::apply_override(&mut tree, spec)?;
    }
    Ok(Loaded {
        cfg: config::from_tree(tree)?,
        base_name,
    })
}

/// Parse "1,2,7" / "1-40" / mixtures of both into a seed list.
fn parse_seeds(spec: &str) -> CliResult<Vec<u64>> {
    const CAP: usize = 10_000;
    let mut seeds = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err(CliError::Config(format!(
                "seeds '{spec}': empty entry"
            )));
        }
        if let Some((a, b)) = token.split_once('-') {
            let lo: u64 = a.trim().parse().map_err(|_| {
                CliError::Config(format!("seeds '{spec}': '{token}' is not a number or a-b range"))
            })?;
            let hi: u64 = b.trim().parse().map_err(|_| {
                CliError::Config(format!("seeds '{spec}': '{token}' is not a number or a-b range"))
            })?;
            if hi < lo {
                return Err(CliError::Config(format!(
                    "seeds '{spec}': range '{token}' is reversed"
                )));
            }
            for s in lo..=hi {
                seeds.push(s);
                if seeds.len() > CAP {
                    return Err(CliError::Config(format!(
                        "seeds '{spec}': more than {CAP} seeds"
                    )));
                }
            }
        } else {
            let s: u64 = token.parse().map_err(|_| {
                CliError::Config(format!("seeds '{spec}': '{token}' is not a number or a-b range"))
            })?;
            seeds.push(s);
            if seeds.len() > CAP {
                return Err(CliError::Config(format!(
                    "seeds '{spec}': more than {CAP} seeds"
                )));
            }
        }
    }
    if seeds.is_empty() {
        return Err(CliError::Config("seeds: the list is empty".into()));
    }
    Ok(seeds)
}

fn cmd_run(args: &RunArgs) -> CliResult<i32> {
    let loaded = load_source(&args.source)?;
    let mut cfg = loaded.cfg;
    if cfg.sweep.is_some() {
        eprintln!(
            "note: the configuration defines sweep axes; running the base configuration \
             (use 'duobath sweep' to expand them)"
        );
        cfg.sweep = None;
    }
    let name = args.name.clone().unwrap_or(loaded.base_name);
    let (record, paths) = runner::run_to_files(&args.out_dir, &name, &cfg)?;
    for p in &paths {
        println!("wrote {}", p.display());
    }
    let s = &record.summary;
    println!(
        "window [{}, {}]: <n1> = {}, <n2> = {}, revivals = {}",
        s.window[0],
        s.window[1],
        format_sig(s.window_avg_n1),
        format_sig(s.window_avg_n2),
        s.revival_count
    );
    Ok(0)
}

fn cmd_sweep(args: &RunArgs) -> CliResult<i32> {
    let loaded = load_source(&args.source)?;
    let name = args.name.clone().unwrap_or(loaded.base_name);
    let (record, paths) = runner::sweep_to_files(&args.out_dir, &name, &loaded.cfg)?;
    println!(
        "ran {} combinations over {} axes",
        record.combinations.len(),
        record.axes.len()
    );
    for p in paths.iter().rev().take(2).rev() {
        println!("wrote {}", p.display());
    }
    Ok(0)
}

fn cmd_compare(args: &CompareArgs) -> CliResult<i32> {
    let seeds = parse_seeds(&args.seeds)?;
    let (regular, irregular, base_name) = match (&args.irregular, &args.source.preset) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "pass --irregular only together with --config".into(),
            ));
        }
        (Some(irr_path), None) => {
            let regular = load_source(&args.source)?;
            let irr_source = SourceArgs {
                config: Some(irr_path.clone()),
                preset: None,
                set: args.source.set.clone(),
            };
            let irregular = load_source(&irr_source)?;
            (regular.cfg, irregular.cfg, regular.base_name)
        }
        (None, _) => {
            let loaded = load_source(&args.source)?;
            if loaded.cfg.schedule.kind != "irregular" {
                return Err(CliError::Config(format!(
                    "compare: expected an irregular schedule to derive the clockwork \
                     counterpart from, got '{}'; pass --irregular to compare two explicit \
                     configurations",
                    loaded.cfg.schedule.kind
                )));
            }
            let regular = runner::derive_regular(&loaded.cfg);
            (regular, loaded.cfg, loaded.base_name)
        }
    };
    let name = args
        .name
        .clone()
        .unwrap_or_else(|| format!("{base_name}_compare"));
    let (record, paths) =
        runner::compare_to_files(&args.out_dir, &name, &regular, &irregular, &seeds)?;
    println!(
        "regular <n1> = {}",
        format_sig(record.regular_window_avg_n1)
    );
    println!(
        "irregular <n1> = {} (mean over {} seeds)",
        format_sig(record.irregular_window_avg_n1_mean),
        record.seeds.len()
    );
    println!(
        "gap (irregular - regular) = {}",
        format_sig(record.gap_irregular_minus_regular)
    );
    for p in &paths {
        println!("wrote {}", p.display());
    }
    Ok(0)
}

fn cmd_filter(args: &FilterArgs) -> CliResult<i32> {
    let loaded = load_source(&args.source)?;
    let name = args.name.clone().unwrap_or(loaded.base_name);
    let path = runner::filter_to_files(
        &args.out_dir,
        &name,
        &loaded.cfg,
        args.omega_min,
        args.omega_max,
        args.omega_samples,
    )?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_validate(args: &ValidateArgs) -> CliResult<i32> {
    let level = if args.full {
        validate::Level::Full
    } else {
        validate::Level::Fast
    };
    let report = validate::run(level, &validate::ValidateOptions::default());
    let json = runner::record_json(&report);
    print!("{json}");
    if let Some(path) = &args.out {
        duobath_cli::output::write_atomic(path, json.as_bytes())?;
    }
    Ok(if report.pass { 0 } else { 3 })
}

fn cmd_presets(cmd: &PresetsCmd) -> CliResult<i32> {
    match cmd {
        PresetsCmd::List => {
            for preset in presets::all() {
                println!("{:8} {}", preset.name, preset.summary);
            }
            Ok(0)
        }
        PresetsCmd::Show { name } => {
            let preset = presets::find(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown preset '{name}'; run 'duobath presets list'"
                ))
            })?;
            let mut text = serde_json::to_string_pretty(&preset.config)
                .expect("preset configurations always serialize");
            text.push('\n');
            print!("{text}");
            Ok(0)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<i32> {
    match &cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::CompareDd(args) => cmd_compare(args),
        Cmd::Filter(args) => cmd_filter(args),
        Cmd::Validate(args) => cmd_validate(args),
        Cmd::Presets { cmd } => cmd_presets(cmd),
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            process::exit(e.exit_code());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_specs_cover_singles_ranges_and_mixtures() {
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert_eq!(parse_seeds("1-4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_seeds("2, 9, 4-6").unwrap(), vec![2, 9, 4, 5, 6]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("3-1").is_err());
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("1,,2").is_err());
    }

    #[test]
    fn deriving_the_clockwork_counterpart_strips_all_jitter() {
        let preset = presets::find("fig10").unwrap();
        let regular = runner::derive_regular(&preset.config);
        assert_eq!(regular.schedule.kind, "regular");
        assert!(regular.schedule.jitter_delta.is_none());
        assert!(regular.schedule.jitter_tau.is_none());
        assert!(regular.schedule.jitter_omega_d.is_none());
        assert!(regular.schedule.seed.is_none());
        assert_eq!(regular.schedule.eta, preset.config.schedule.eta);
        assert_eq!(regular.schedule.tau, preset.config.schedule.tau);
        regular.resolve().unwrap();
    }

    #[test]
    fn command_line_shapes_parse() {
        let cli = Cli::try_parse_from([
            "duobath", "run", "--preset", "fig4", "--set", "T_B=2", "--name", "hot",
        ])
        .unwrap();
        match cli.cmd {
            Cmd::Run(args) => {
                assert_eq!(args.source.preset.as_deref(), Some("fig4"));
                assert_eq!(args.source.set, vec!["T_B=2".to_string()]);
                assert_eq!(args.name.as_deref(), Some("hot"));
                assert_eq!(args.out_dir, PathBuf::from("out"));
            }
            _ => panic!("parsed the wrong subcommand"),
        }
        assert!(Cli::try_parse_from(["duobath", "run", "--preset", "a", "--config", "b"]).is_err());
        let cli =
            Cli::try_parse_from(["duobath", "compare-dd", "--preset", "fig10", "--seeds", "1-3"])
                .unwrap();
        match cli.cmd {
            Cmd::CompareDd(args) => assert_eq!(args.seeds, "1-3"),
            _ => panic!("parsed the wrong subcommand"),
        }
    }
}
