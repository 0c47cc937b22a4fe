//! `reread`: command-line driver for the first vs. repeated reading
//! pipeline.
//!
//! Exit codes: 0 success, 1 usage, 2 data or format, 3 the split solver found
//! the schedule infeasible or ran out of time.

mod commands;
mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;

#[derive(Parser)]
#[command(name = "reread", version, about = "Classify first vs. repeated readings from eye-tracking data")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML configuration; missing keys take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed. Each stage derives its own seed from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus as fixation and interest-area reports.
    SynthCorpus,
    /// Parse and validate fixation and interest-area reports.
    Ingest {
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
    },
    /// Simulate reference readers for every paragraph.
    Simulate {
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
    },
    /// Compute the per-trial feature vectors.
    Featurize {
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
    },
    /// Assign rereaders to articles and build the cross-validation folds.
    Split {
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
    },
    /// Cross-validated training; writes out-of-fold test predictions.
    Train {
        #[arg(long, value_name = "DIR")]
        features: PathBuf,
        #[arg(long, value_name = "DIR")]
        plan: PathBuf,
        /// Output of `simulate`; required by the gbt_ez model.
        #[arg(long, value_name = "DIR")]
        references: Option<PathBuf>,
        /// Restrict to these tasks (single, paired).
        #[arg(long, value_delimiter = ',')]
        task: Option<Vec<String>>,
        /// Restrict to these models (majority, reading_speed, gbt, gbt_ez).
        #[arg(long, value_delimiter = ',')]
        model: Option<Vec<String>>,
    },
    /// Bootstrap metrics for every trained task and model.
    Evaluate {
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
    },
    /// Compare human first and repeated readings with the simulated readers.
    CompareEz {
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        references: PathBuf,
    },
    /// Assemble the accuracy table and position curves.
    Report {
        #[arg(long, value_name = "DIR")]
        evaluation: PathBuf,
        #[arg(long, value_name = "DIR")]
        comparison: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SynthCorpus => "synth-corpus",
            Command::Ingest { .. } => "ingest",
            Command::Simulate { .. } => "simulate",
            Command::Featurize { .. } => "featurize",
            Command::Split { .. } => "split",
            Command::Train { .. } => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::CompareEz { .. } => "compare-ez",
            Command::Report { .. } => "report",
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Infeasible(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Infeasible(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Infeasible(m) => m,
        }
    }
}

impl From<reread_core::Error> for Failure {
    fn from(e: reread_core::Error) -> Self {
        match e {
            reread_core::Error::Infeasible(_) | reread_core::Error::Timeout(_) => Failure::Infeasible(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = Config::load(cli.global.config.as_deref())?;
    if let Some(seed) = cli.global.seed {
        config.seed = seed;
    }
    let seed = config.seed;
    if let Some(jobs) = cli.global.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot start {jobs} workers: {e}")))?;
    }
    let out = cli.global.out.ok_or_else(|| Failure::Usage("--out <DIR> is required".into()))?;
    let name = cli.command.name();
    let outputs = match &cli.command {
        Command::SynthCorpus => commands::synth_corpus(&config, seed)?,
        Command::Ingest { input } => commands::ingest(&config, input)?,
        Command::Simulate { input } => commands::simulate(&config, seed, input)?,
        Command::Featurize { input } => commands::featurize(&config, input)?,
        Command::Split { input } => commands::split(&config, seed, input)?,
        Command::Train {
            features,
            plan,
            references,
            task,
            model,
        } => commands::train(
            &config,
            seed,
            &commands::TrainArgs {
                features,
                plan,
                references: references.as_deref(),
                tasks: task.clone(),
                models: model.clone(),
            },
        )?,
        Command::Evaluate { input } => commands::evaluate(&config, seed, input)?,
        Command::CompareEz { input, references } => commands::compare_ez(&config, seed, input, references)?,
        Command::Report { evaluation, comparison } => commands::report(evaluation, comparison.as_deref())?,
    };
    manifest::finish(Path::new(&out), name, seed, &config, outputs)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
