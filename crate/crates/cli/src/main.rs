use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use railbreak_cli::{
    cmd_calibrate, cmd_fit, cmd_query, cmd_report, cmd_synth, cmd_validate, finish, FitArgs,
    QueryArgs, SynthArgs,
};
use railbreak_core::FitMode;

#[derive(Parser)]
#[command(
    name = "railbreak",
    version,
    about = "Rail-break risk model: synthesize, fit, query, validate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Factorized,
    #[value(alias = "full_joint")]
    FullJoint,
}

impl From<Mode> for FitMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Factorized => FitMode::Factorized,
            Mode::FullJoint => FitMode::FullJoint,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample an exposure CSV from a model
    Synth {
        #[arg(long, default_value_t = 200_000)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, action = ArgAction::SetTrue)]
        force: bool,
        /// Model file to sample from (default: the reference fixture)
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit a model from an exposure CSV
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "factorized")]
        mode: Mode,
        /// Laplace smoothing; overrides the config value
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, action = ArgAction::SetTrue)]
        force: bool,
    },
    /// Print p(break | evidence)
    Query {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        season: Option<String>,
        #[arg(long)]
        time: Option<String>,
        #[arg(long)]
        location: Option<String>,
        #[arg(long, action = ArgAction::SetTrue)]
        json: bool,
    },
    /// Print the full scenario grid, anchors and invariants
    Report {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, action = ArgAction::SetTrue)]
        json: bool,
    },
    /// Check anchors and invariants; exit 1 on any failure
    Validate {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Re-run the anchor calibration and write the reference model
    Calibrate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, action = ArgAction::SetTrue)]
        force: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    finish(match cli.command {
        Command::Synth {
            n,
            seed,
            out,
            force,
            model,
            config,
        } => cmd_synth(&SynthArgs {
            n,
            seed,
            out,
            force,
            model,
            config,
        }),
        Command::Fit {
            input,
            config,
            mode,
            alpha,
            out,
            force,
        } => cmd_fit(&FitArgs {
            input,
            config,
            mode: mode.into(),
            alpha,
            out,
            force,
        }),
        Command::Query {
            model,
            season,
            time,
            location,
            json,
        } => cmd_query(&QueryArgs {
            model,
            season,
            time,
            location,
            json,
        }),
        Command::Report { model, json } => cmd_report(model.as_deref(), json),
        Command::Validate { model } => cmd_validate(model.as_deref()),
        Command::Calibrate { out, force } => cmd_calibrate(&out, force),
    })
}
