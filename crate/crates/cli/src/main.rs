use clap::{Args, Parser, Subcommand};
use sglab_cli::commands;
use sglab_cli::config::{parse_config, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Desk-scale diffusion/flow sampling lab with self-guidance.
#[derive(Parser)]
#[command(name = "sglab", version, about)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; omitted means all defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Inline override, `key=value`; wins over file keys. Repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Additional `key=value` overrides.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> sglab_core::Result<ExperimentConfig> {
        let mut all = self.set.clone();
        all.extend(self.overrides.iter().cloned());
        parse_config(self.config.as_deref(), &all)
    }
}

#[derive(Subcommand)]
enum Verb {
    /// Train the score/velocity network and write a checkpoint.
    Train(RunArgs),
    /// Draw guided samples and write them with a call/time ledger.
    Sample(RunArgs),
    /// Sample and score the run against the analytic ground truth.
    Eval(RunArgs),
    /// Evaluate a (guidance scale, shift scale) grid into one CSV.
    Sweep(RunArgs),
    /// Evolve the density under the guided drift on a grid.
    Oracle(RunArgs),
    /// Regenerate the standard figure set.
    Figures(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&RunArgs, fn(&ExperimentConfig) -> sglab_core::Result<()>) =
        match &cli.verb {
            Verb::Train(a) => (a, commands::cmd_train),
            Verb::Sample(a) => (a, commands::cmd_sample),
            Verb::Eval(a) => (a, commands::cmd_eval),
            Verb::Sweep(a) => (a, commands::cmd_sweep),
            Verb::Oracle(a) => (a, commands::cmd_oracle),
            Verb::Figures(a) => (a, commands::cmd_figures),
        };
    let config = match args.load() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("sglab: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sglab: {e}");
            ExitCode::FAILURE
        }
    }
}
