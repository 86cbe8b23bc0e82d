use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cfisac::harness::{emit_csv, emit_plot_data, figure_preset, run_sweep, SweepSpec, SweepVariable};
use cfisac::{Mode, ScenarioConfig};

mod selftest;

#[derive(Parser)]
#[command(name = "cfisac", version, about = "Cell-free ISAC Monte-Carlo simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write the results as CSV.
    Run {
        /// Scenario file. With --figure it replaces the preset's base scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Figure preset, e.g. fig1a.
        #[arg(long)]
        figure: Option<String>,
        /// P_r/N0 points in dB when no figure is given.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Modes when no figure is given, e.g. SE-HD,SH-FD.
        #[arg(long, value_delimiter = ',')]
        modes: Option<Vec<String>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        fixed_geometry: bool,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-metric plot data into this directory.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
    },
    /// Check a scenario file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

#[allow(clippy::too_many_arguments)]
fn run(
    config: Option<PathBuf>,
    figure: Option<String>,
    values: Option<Vec<f64>>,
    modes: Option<Vec<String>>,
    trials: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    fixed_geometry: bool,
    out: PathBuf,
    plot_dir: Option<PathBuf>,
) -> cfisac::Result<()> {
    let loaded = config.as_deref().map(ScenarioConfig::load).transpose()?;
    let (mut cfg, mut spec) = match (figure, loaded) {
        (Some(name), loaded) => {
            let (preset, spec) = figure_preset(&name)?;
            (loaded.unwrap_or(preset), spec)
        }
        (None, Some(cfg)) => {
            let modes = match modes {
                Some(m) => m.iter().map(|s| Mode::parse(s)).collect::<cfisac::Result<Vec<_>>>()?,
                None => vec![cfg.mode()],
            };
            let values = values.unwrap_or_else(|| vec![cfg.pr_over_n0_db]);
            let spec = SweepSpec::new(SweepVariable::PrOverN0Db, values, cfg.n_mc, modes);
            (cfg, spec)
        }
        (None, None) => return Err(cfisac::Error::Config("run needs --config or --figure".into())),
    };
    if let Some(n) = trials {
        spec.trials_per_point = n;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(w) = workers {
        spec.workers = w;
    }
    cfg.fixed_geometry |= fixed_geometry;
    cfg.validate()?;
    let records = run_sweep(&cfg, &spec)?;
    emit_csv(&records, &out)?;
    if let Some(dir) = plot_dir {
        emit_plot_data(&records, &dir)?;
    }
    for r in &records {
        eprintln!(
            "{} {} {}={}: {} trials in {:.1}s",
            r.mode,
            r.series,
            r.variable.label(),
            r.value,
            r.trials,
            r.wall_time_s
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, figure, values, modes, trials, seed, workers, fixed_geometry, out, plot_dir } => {
            run(config, figure, values, modes, trials, seed, workers, fixed_geometry, out, plot_dir)
        }
        Command::Validate { config } => ScenarioConfig::load(&config).and_then(|c| c.validate()).map(|_| println!("ok")),
        Command::Selftest => {
            return if selftest::run() { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
