use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use zb::error::Error;
use zb::pipeline::{report_json, run_pipeline, write_artifacts, RunOptions, Stage};
use zb::spec_file::parse_group_spec;

#[derive(Parser)]
#[command(
    name = "zb",
    version,
    about = "Ford domains, branch systems and transfer-operator determinants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline up to a stage and write the artifacts.
    Run(RunArgs),
    /// Parse and validate a group specification without running anything.
    Validate { spec: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    spec: PathBuf,
    #[arg(long, default_value = "scan")]
    stage: Stage,
    /// Evaluation point `RE[,IM]`; repeat for several.
    #[arg(long = "s", value_parser = parse_complex)]
    s: Vec<Complex64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    /// Output directory; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Checks whose failure does not affect the exit code.
    #[arg(long, value_delimiter = ',')]
    waive: Vec<String>,
}

fn parse_complex(text: &str) -> Result<Complex64, String> {
    let mut parts = text.split(',').map(|p| p.trim().parse::<f64>());
    let re = parts
        .next()
        .ok_or("empty value")?
        .map_err(|e| format!("`{text}`: {e}"))?;
    let im = match parts.next() {
        Some(v) => v.map_err(|e| format!("`{text}`: {e}"))?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(format!("`{text}`: expected RE or RE,IM"));
    }
    Ok(Complex64::new(re, im))
}

fn run(args: RunArgs) -> Result<bool, Error> {
    let (spec, group) = parse_group_spec(&args.spec)?;
    let opts = RunOptions {
        stage: args.stage,
        s_values: (!args.s.is_empty()).then_some(args.s),
        order: args.order,
        cutoff: args.cutoff,
        grid: args.grid,
        waive: args.waive,
    };
    let artifacts = run_pipeline(&spec, &group, &opts)?;
    let report = &artifacts.report;
    match &args.out {
        Some(dir) => {
            for p in write_artifacts(&artifacts, dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => print!("{}", report_json(report)),
    }
    for c in &report.checks {
        eprintln!(
            "{} {}: {}",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    if !report.pass {
        eprintln!("failing checks: {}", report.failures.join(", "));
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Validate { spec } => parse_group_spec(&spec)
            .map(|(spec, group)| {
                println!(
                    "{}: {} generators, word cutoff {}",
                    spec.name,
                    group.rank(),
                    group.word_cutoff
                );
                true
            })
            .map_err(Error::from),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
