use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use loopcover::experiment::{output_format, run, validate, ExperimentConfig};
use loopcover::Error;

#[derive(Parser)]
#[command(name = "loopcover", version, about = "Run loop-covering experiments from a TOML config")]
struct Cli {
    #[command(subcommand)]
    kind: Kind,
}

#[derive(Subcommand)]
enum Kind {
    /// Eigenvalues of the transition matrix for each size.
    Spectrum(Common),
    /// Loop mass by length.
    LoopLength(Common),
    /// Probability that a loop covers the graph.
    CoverProb(Common),
    /// Covering probability conditioned on the loop length.
    ConditionalCurve(Common),
    /// Covering-loop counts in Poisson loop soups.
    Soup(Common),
    /// Covering probability against its predicted limit over sizes and rates.
    PhaseSweep(Common),
    /// Atomic limit spectrum of regular tree balls.
    TreeLimit(Common),
    /// Covering functional of the torus.
    TorusLimit(Common),
    /// Complete-graph covering probability for c = n^-d.
    CompleteSweep(Common),
    /// Spectral change after deleting chords.
    Stability(Common),
}

impl Kind {
    fn split(self) -> (&'static str, Common) {
        match self {
            Kind::Spectrum(c) => ("spectrum", c),
            Kind::LoopLength(c) => ("loop-length", c),
            Kind::CoverProb(c) => ("cover-prob", c),
            Kind::ConditionalCurve(c) => ("conditional-curve", c),
            Kind::Soup(c) => ("soup", c),
            Kind::PhaseSweep(c) => ("phase-sweep", c),
            Kind::TreeLimit(c) => ("tree-limit", c),
            Kind::TorusLimit(c) => ("torus-limit", c),
            Kind::CompleteSweep(c) => ("complete-sweep", c),
            Kind::Stability(c) => ("stability", c),
        }
    }
}

#[derive(Args)]
struct Common {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

const VALIDATION: u8 = 2;
const INFEASIBLE: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidArgument(_) | Error::Parse { .. } => VALIDATION,
        Error::Infeasible(_) | Error::TruncationTail { .. } | Error::BridgeUnderflow { .. } => INFEASIBLE,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().kind.split();
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(kind: &str, args: Common) -> Result<(), Error> {
    let mut config = ExperimentConfig::from_path(&args.config)?;
    match config.kind.as_deref() {
        Some(k) if k != kind => {
            return Err(Error::Config {
                path: "kind".into(),
                message: format!("config is for `{k}` but the subcommand is `{kind}`"),
            })
        }
        _ => config.kind = Some(kind.into()),
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.output.path = Some(out);
    }
    if let Some(f) = args.format {
        config.output.format = match f {
            Format::Csv => "csv",
            Format::Json => "json",
        }
        .into();
    }
    let diagnostics = validate(&config);
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("invalid config: {d}");
        }
        let first = &diagnostics[0];
        return Err(Error::Config {
            path: first.path.clone(),
            message: format!("{} problem(s)", diagnostics.len()),
        });
    }
    let record = run(&config)?;
    let text = record.render(output_format(&config)?)?;
    match &config.output.path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    for note in &record.diagnostics {
        eprintln!("{note}");
    }
    Ok(())
}
