//! Command-line front end for cspkit: synthetic dataset generation, single
//! filter-bank fitting, full experiment runs, and report re-rendering.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cspkit::{
    build_bank, class_covariances, generate_synthetic, read_epo, render_report, run_experiment,
    write_epo, Error, ErrorCategory, ExperimentConfig, ExperimentReport, FilterBank, MethodName,
    RegParam, Result, SynthParams,
};

#[derive(Parser)]
#[command(name = "cspkit", version, about = "Spatial filtering toolkit for binary EEG decoding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic dataset and write it as an .epo1 file
    Gen(GenArgs),
    /// Run the experiment described by a JSON config and render its report
    Eval(EvalArgs),
    /// Fit one filter bank on a dataset and write it as bank.json
    Fit(FitArgs),
    /// Re-render an existing report.json as CSV files or normalized JSON
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Channel count C
    #[arg(long, default_value_t = 8)]
    channels: usize,
    /// Samples per epoch T
    #[arg(long, default_value_t = 500)]
    samples: usize,
    /// Epochs per class N
    #[arg(long, default_value_t = 100)]
    per_class: usize,
    /// Source amplitude on the discriminative channel of the active class
    #[arg(long, default_value_t = 3.0)]
    std_high: f64,
    /// Source amplitude everywhere else
    #[arg(long, default_value_t = 1.0)]
    std_low: f64,
    /// Additive white noise amplitude σ
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output .epo1 path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// JSON file mirroring the ExperimentConfig fields
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving report.json and the CSV files
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Input .epo1 dataset
    #[arg(long)]
    data: PathBuf,
    /// Filter method: csp, sm, rcsp, or rsm
    #[arg(long)]
    method: String,
    /// Number of spatial filters C' (even)
    #[arg(long, default_value_t = 6)]
    cprime: usize,
    /// Ridge weight λ (rcsp and rsm only)
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Output bank.json path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Existing report.json
    #[arg(long = "in")]
    input: PathBuf,
    /// Output format: csv (files next to the input or in --out) or json (stdout)
    #[arg(long, default_value = "csv")]
    format: String,
    /// Directory for the re-rendered files (defaults to the input's directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Data => 3,
                ErrorCategory::Numerical => 4,
            })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(args) => gen(args),
        Command::Eval(args) => eval(args),
        Command::Fit(args) => fit(args),
        Command::Report(args) => report(args),
    }
}

/// Prints one line to stdout, exiting quietly when the reader has gone away
/// (e.g. `cspkit report --format json | head`).
fn emit(text: impl std::fmt::Display) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout(), "{text}") {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(e.into()),
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let params = SynthParams {
        channels: args.channels,
        samples: args.samples,
        epochs_per_class: args.per_class,
        source_std_high: args.std_high,
        source_std_low: args.std_low,
        noise_std: args.noise,
        seed: args.seed,
        ..SynthParams::default()
    };
    let (dataset, _) = generate_synthetic(&params)?;
    write_epo(&dataset, &args.out)?;
    emit(format!(
        "wrote {} ({} epochs, {} channels, {} samples)",
        args.out.display(),
        dataset.len(),
        dataset.channel_count(),
        dataset.sample_count()
    ))?;
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)?;
    let config: ExperimentConfig = serde_json::from_str(&text).map_err(Error::from)?;
    let report = run_experiment(&config)?;
    render_report(&report, &args.out)?;
    emit(format!("wrote {}", args.out.join("report.json").display()))?;
    Ok(())
}

fn fit(args: FitArgs) -> Result<()> {
    let method: MethodName = args.method.parse()?;
    let lambda = RegParam::new(args.lambda)?;
    if lambda.value() > 0.0 && !method.is_regularized() {
        return Err(Error::BadConfig(format!(
            "--lambda applies only to rcsp and rsm, not {method}"
        )));
    }
    let dataset = read_epo(&args.data)?;
    let (s0, s1) = class_covariances(&dataset)?;
    let bank = build_bank(method, &s0, &s1, args.cprime, lambda)?;
    fs::write(&args.out, bank_json(method, &bank))?;
    emit(format!("wrote {}", args.out.display()))?;
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input)?;
    let report: ExperimentReport = serde_json::from_str(&text).map_err(Error::from)?;
    match args.format.as_str() {
        "csv" => {
            let dir = match args.out {
                Some(dir) => dir,
                None => args.input.parent().unwrap_or(".".as_ref()).to_path_buf(),
            };
            render_report(&report, &dir)?;
            emit(format!("wrote CSV files to {}", dir.display()))?;
            Ok(())
        }
        "json" => {
            emit(serde_json::to_string_pretty(&report).map_err(Error::from)?)?;
            Ok(())
        }
        other => Err(Error::BadConfig(format!(
            "unknown format {other:?}; expected csv or json"
        ))),
    }
}

/// Seventeen significant digits: enough to reproduce any f64 exactly on
/// re-parse.
fn sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.16e}")
}

/// Hand-assembled JSON so the filter entries keep full precision with a
/// stable layout: column-major entries, one per line.
fn bank_json(method: MethodName, bank: &FilterBank) -> String {
    let (c, c_prime) = (bank.channels(), bank.c_prime());
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"method\": \"{method}\",\n"));
    out.push_str(&format!("  \"channels\": {c},\n"));
    out.push_str(&format!("  \"c_prime\": {c_prime},\n"));
    out.push_str(&format!("  \"lambda\": {},\n", sig17(bank.lambda().value())));
    out.push_str("  \"filters\": [\n");
    let w = bank.filters();
    let total = c * c_prime;
    for j in 0..c_prime {
        for i in 0..c {
            let sep = if j * c + i + 1 == total { "" } else { "," };
            out.push_str(&format!("    {}{sep}\n", sig17(w[(i, j)])));
        }
    }
    out.push_str("  ]\n}\n");
    out
}
