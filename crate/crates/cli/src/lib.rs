//! Subcommand implementations behind the `railbreak` binary.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage, I/O or schema error.

pub mod config;
pub mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use railbreak_core::{
    build_counts, calibrate, fit_factorized, fit_full_joint, query_risk, read_exposures,
    reference_model, sample_exposures, Conditions, FitMode, Location, ModelFile, Provenance,
    RailBreakModel, Season, TimeOfDay,
};
use serde::Serialize;

pub use config::Config;
pub use report::{invariant_checks, sig4, ScenarioReport, TOOL_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] railbreak_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    /// Checks ran and at least one failed.
    #[error("validation failed: {}", .0.join(", "))]
    Validation(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Runs a subcommand and maps its outcome onto the exit-code contract.
pub fn finish(result: CliResult<()>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn create_output(path: &Path, force: bool) -> CliResult<BufWriter<File>> {
    if path.exists() && !force {
        return Err(CliError::Usage(format!(
            "{} already exists (pass --force to overwrite)",
            path.display()
        )));
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// The model at `path`, or the committed reference fixture.
pub fn load_model(path: Option<&Path>) -> CliResult<(RailBreakModel, Option<Provenance>)> {
    match path {
        None => Ok((reference_model(), None)),
        Some(p) => {
            let file = ModelFile::load(p)?;
            Ok((file.to_model()?, Some(file.provenance)))
        }
    }
}

pub struct SynthArgs {
    pub n: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub force: bool,
    pub model: Option<PathBuf>,
    pub config: Option<PathBuf>,
}

pub fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    let config = Config::load(args.config.as_deref())?;
    let (model, _) = load_model(args.model.as_deref())?;
    // `fit` takes exposures from the schedule and only breaks from the CSV.
    let scheduled = 3 * config.schedule.exposures_per_section();
    if scheduled.abs_diff(args.n as u64) > 3 {
        eprintln!(
            "warning: --n {} differs from the {scheduled} exposures the schedule carries; \
             risks fitted from this file will be scaled by about {:.3}",
            args.n,
            args.n as f64 / scheduled as f64
        );
    }
    let records = sample_exposures(&model, args.n, args.seed, &config.schedule, &config.buckets)?;
    let mut out = create_output(&args.out, args.force)?;
    railbreak_core::write_exposures(&records, &mut out)?;
    out.flush()?;
    let breaks = records.iter().filter(|r| r.broke).count();
    println!(
        "wrote {} exposures ({} breaks) to {}",
        records.len(),
        breaks,
        args.out.display()
    );
    Ok(())
}

pub struct FitArgs {
    pub input: PathBuf,
    pub config: Option<PathBuf>,
    pub mode: FitMode,
    pub alpha: Option<f64>,
    pub out: PathBuf,
    pub force: bool,
}

#[derive(Serialize)]
struct FitSummary {
    mode: FitMode,
    alpha: f64,
    records: usize,
    breaks: u64,
    exposures: u64,
    overall_risk: f64,
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let config = Config::load(args.config.as_deref())?;
    let alpha = args.alpha.unwrap_or(config.alpha);
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(CliError::Usage(format!("alpha must be >= 0, got {alpha}")));
    }
    let records = read_exposures(&args.input)?;
    if records.is_empty() {
        return Err(CliError::Usage(format!(
            "no exposures in {}",
            args.input.display()
        )));
    }
    let counts = build_counts(&records, &config.schedule, &config.buckets)?;
    let model = match args.mode {
        FitMode::Factorized => fit_factorized(&counts, alpha)?,
        FitMode::FullJoint => RailBreakModel::from_joint(&fit_full_joint(&counts, alpha)?)?,
    };
    let mut provenance = Provenance::new(args.input.display().to_string(), args.mode);
    provenance.alpha = Some(alpha);
    provenance.bucket_maps = Some(config.buckets.clone());
    provenance.schedule = Some(config.schedule.clone());
    let file = ModelFile::from_model(&model, provenance);
    let mut out = create_output(&args.out, args.force)?;
    out.write_all(file.to_json()?.as_bytes())?;
    out.flush()?;

    let summary = FitSummary {
        mode: args.mode,
        alpha,
        records: records.len(),
        breaks: counts.breaks(),
        exposures: counts.total(),
        overall_risk: query_risk(&model, &Conditions::none())?,
    };
    println!(
        "fitted {} model from {} records ({} breaks over {} exposures)",
        summary.mode, summary.records, summary.breaks, summary.exposures
    );
    println!("p(break) = {}", sig4(summary.overall_risk));
    println!("wrote {}", args.out.display());
    Ok(())
}

pub struct QueryArgs {
    pub model: Option<PathBuf>,
    pub season: Option<String>,
    pub time: Option<String>,
    pub location: Option<String>,
    pub json: bool,
}

#[derive(Serialize)]
struct QueryOutput<'a> {
    tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<&'a Provenance>,
    evidence: Conditions,
    risk: f64,
}

pub fn parse_conditions(
    season: Option<&str>,
    time: Option<&str>,
    location: Option<&str>,
) -> CliResult<Conditions> {
    let mut c = Conditions::none();
    if let Some(s) = season {
        c = c.season(s.parse::<Season>()?);
    }
    if let Some(t) = time {
        c = c.time(t.parse::<TimeOfDay>()?);
    }
    if let Some(l) = location {
        c = c.location(l.parse::<Location>()?);
    }
    Ok(c)
}

pub fn cmd_query(args: &QueryArgs) -> CliResult<()> {
    let conditions = parse_conditions(
        args.season.as_deref(),
        args.time.as_deref(),
        args.location.as_deref(),
    )?;
    let (model, provenance) = load_model(args.model.as_deref())?;
    let risk = query_risk(&model, &conditions)?;
    if args.json {
        let out = QueryOutput {
            tool_version: TOOL_VERSION,
            provenance: provenance.as_ref(),
            evidence: conditions,
            risk,
        };
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("evidence: {conditions}");
        println!("p(break | evidence) = {}", sig4(risk));
    }
    Ok(())
}

pub fn cmd_report(model: Option<&Path>, json: bool) -> CliResult<()> {
    let (model, provenance) = load_model(model)?;
    let report = ScenarioReport::build(&model, provenance)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.render_text());
    }
    Ok(())
}

pub fn cmd_validate(model: Option<&Path>) -> CliResult<()> {
    let (model, provenance) = load_model(model)?;
    let report = ScenarioReport::build(&model, provenance)?;
    print!("{}", report::render_anchors(&report.anchors));
    print!("{}", report::render_invariants(&report.invariants));
    let failures: Vec<String> = report
        .anchors
        .iter()
        .filter(|a| !a.passed)
        .map(|a| a.name.to_string())
        .chain(
            report
                .invariants
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.to_string()),
        )
        .collect();
    if failures.is_empty() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(CliError::Validation(failures))
    }
}

/// Re-runs the anchor calibration and writes the resulting model file.
pub fn cmd_calibrate(out: &Path, force: bool) -> CliResult<()> {
    let calibration = calibrate()?;
    let mut provenance = Provenance::new("calibrate", FitMode::Factorized);
    provenance.notes = Some(format!(
        "least-squares anchor calibration, {} iterations, objective {:.6e}",
        calibration.iterations, calibration.objective
    ));
    let file = ModelFile::from_model(&calibration.model, provenance);
    let mut w = create_output(out, force)?;
    w.write_all(file.to_json()?.as_bytes())?;
    w.flush()?;
    print!("{}", calibration.report());
    println!("wrote {}", out.display());
    let failures: Vec<String> = calibration
        .failures()
        .iter()
        .map(|a| a.name.to_string())
        .collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failures))
    }
}
