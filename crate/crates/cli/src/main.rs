//! `ansgrade`: train, cross-validate, tune, predict and analyze short-answer
//! scoring pipelines.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ansgrade::corpus::Task;
use ansgrade::Error;

#[derive(Debug, Parser)]
#[command(name = "ansgrade", version, about = "Short-answer scoring pipelines")]
struct Cli {
    /// More log output (-v info, -vv debug); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "UPPER")]
pub enum TaskArg {
    A,
    B,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::A => Task::A,
            TaskArg::B => Task::B,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Hard,
    Soft,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV with header `id,text[,label]`.
    #[arg(long)]
    pub data: PathBuf,
    /// Directory with optional slang.tsv, lemma.tsv, stopwords.txt, vocab.txt.
    #[arg(long)]
    pub lexicon_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a pipeline on a training set and write a model file.
    Train {
        #[arg(long, value_enum, ignore_case = true)]
        task: TaskArg,
        #[command(flatten)]
        data: DataArgs,
        /// Preset name (taskA-best, taskB-best), config descriptor such as
        /// `TF-IDF+logreg`, or a JSON config file.
        #[arg(long)]
        config: String,
        /// Label corrections CSV with header `id,corrected_label`.
        #[arg(long)]
        overlay: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Stratified k-fold cross-validation of several configs.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        /// File listing one config per line (preset, descriptor or JSON file); `#` starts a comment.
        #[arg(long)]
        configs: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Per-fold CSV report (config,fold,precision,recall,f1).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, ignore_case = true, default_value = "A")]
        task: TaskArg,
    },
    /// Hyperparameter search over preprocessing, features and classifiers.
    Tune {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON-lines trial log; an existing log from the same search is resumed.
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Write the best config as JSON.
        #[arg(long)]
        out_config: Option<PathBuf>,
        /// Also cross-validate a voting ensemble of the per-family winners.
        #[arg(long, value_enum)]
        ensemble: Option<ModeArg>,
        #[arg(long, value_enum, ignore_case = true, default_value = "A")]
        task: TaskArg,
    },
    /// Write `id,label,probability` for every row of a dataset.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fail unless the model's training-data fingerprint equals this.
        #[arg(long)]
        expect_fingerprint: Option<String>,
    },
    /// t-SNE map, probability histogram and uncertainty-band summary.
    Analyze {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 30.0)]
        perplexity: f64,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        expect_fingerprint: Option<String>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Fold { source, .. } => exit_code(source),
        _ if e.is_numeric() => 3,
        Error::InvalidArgument(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Train {
            task,
            data,
            config,
            overlay,
            out,
            seed,
        } => commands::train(task.into(), &data, &config, overlay.as_deref(), &out, seed),
        Command::Cv {
            data,
            configs,
            k,
            seed,
            overlay,
            out,
            task,
        } => commands::cv(
            task.into(),
            &data,
            &configs,
            k,
            seed,
            overlay.as_deref(),
            out.as_deref(),
        ),
        Command::Tune {
            data,
            trials,
            seed,
            log,
            k,
            overlay,
            out_config,
            ensemble,
            task,
        } => commands::tune(commands::TuneArgs {
            task: task.into(),
            data: &data,
            trials,
            seed,
            log: &log,
            k,
            overlay: overlay.as_deref(),
            out_config: out_config.as_deref(),
            ensemble,
        }),
        Command::Predict {
            model,
            data,
            out,
            expect_fingerprint,
        } => commands::predict(&model, &data, &out, expect_fingerprint.as_deref()),
        Command::Analyze {
            model,
            data,
            out_dir,
            perplexity,
            iters,
            bins,
            seed,
            expect_fingerprint,
        } => commands::analyze(commands::AnalyzeArgs {
            model: &model,
            data: &data,
            out_dir: &out_dir,
            perplexity,
            iters,
            bins,
            seed,
            expect_fingerprint: expect_fingerprint.as_deref(),
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
