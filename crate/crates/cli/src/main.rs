use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use simlab_cli::{preset, run_experiment, run_sweep, ExperimentConfig, Figure, RunOptions, RunOutcome, Variant};

#[derive(Parser)]
#[command(name = "simlab", version, about = "Spatial SIR epidemics on a torus: particle, kinetic and ODE runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace results already present in the output directory.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config (or a previous manifest).
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run one leg of a built-in figure preset.
    Preset {
        figure: Figure,
        #[arg(long, default_value = "homog")]
        variant: Variant,
        /// Particle model override (fig3 shows both).
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
        model: Option<u32>,
        /// Agent count override.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Print the preset's config as JSON instead of running it.
        #[arg(long)]
        print_config: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run every (n, seed) pair of `n_list` × `seed_list` in parallel.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn report(outcome: &RunOutcome) {
    println!(
        "{}: {} files in {:.2} s",
        outcome.dir.display(),
        outcome.manifest.files.len() + 1,
        outcome.manifest.wall_time_seconds
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, output } => ExperimentConfig::load(&config).and_then(|cfg| {
            let opts = RunOptions { output_dir: output.out, seed, overwrite: output.overwrite };
            run_experiment(&cfg, &opts).map(|o| report(&o))
        }),
        Command::Preset { figure, variant, model, n, seed, print_config, output } => {
            let mut cfg = preset(figure, variant, model);
            if n.is_some() && cfg.n.is_some() {
                cfg.n = n;
            }
            if print_config {
                println!("{}", cfg.to_json());
                Ok(())
            } else {
                let opts = RunOptions { output_dir: output.out, seed, overwrite: output.overwrite };
                run_experiment(&cfg, &opts).map(|o| report(&o))
            }
        }
        Command::Sweep { config, output } => ExperimentConfig::load(&config).and_then(|cfg| {
            let opts = RunOptions { output_dir: output.out, seed: None, overwrite: output.overwrite };
            run_sweep(&cfg, &opts).map(|runs| runs.iter().for_each(report))
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("simlab: {err}");
            ExitCode::FAILURE
        }
    }
}
