//! `politelex` — batch politeness analysis over microblog corpora.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod chart;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use politelex::corpus::Lang;

use commands::CmdError;
use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "politelex",
    version,
    about = "Lexicon-based politeness analysis for English and Mandarin microblog text",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(flatten)]
    globals: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// RNG seed recorded in every output header
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Restrict the corpus to one language (en|zh)
    #[arg(long, global = true)]
    lang: Option<Lang>,

    /// Output directory (created if absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Lexicon file (.json politeness, .dic LIWC-format, .tsv/.txt emotion);
    /// repeatable; defaults to the built-in politeness lexicon
    #[arg(long = "lexicon", global = true)]
    lexicons: Vec<PathBuf>,

    /// Family-wise significance level for correlations
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Comma-separated C grid for the SVM search
    #[arg(long = "c-grid", global = true, value_delimiter = ',')]
    c_grid: Option<Vec<f64>>,

    /// Cross-validation folds
    #[arg(long, global = true)]
    folds: Option<usize>,

    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract per-category proportion features from a corpus
    Extract {
        /// Corpus file (.jsonl with {id, lang, text} or .csv with header)
        #[arg(long)]
        input: PathBuf,
    },
    /// Inter-rater reliability of an annotation table
    Reliability {
        /// CSV with header post_id,annotator_id,score
        #[arg(long)]
        annotations: PathBuf,
    },
    /// Correlate features with standardized politeness scores
    Correlate {
        /// Feature matrix TSV produced by `extract`
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
    },
    /// Quartile-extreme labeling, grid search, and final SVM fit
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
    },
    /// Apply a trained model to a feature matrix
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
    },
    /// Score a model against quartile-extreme labels
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CmdError> {
    let g = cli.globals;
    let config = RunConfig::resolve(
        g.config.as_ref(),
        Overrides {
            seed: g.seed,
            lang: g.lang,
            out: g.out,
            lexicons: g.lexicons,
            alpha: g.alpha,
            c_grid: g.c_grid,
            folds: g.folds,
        },
    )
    .map_err(CmdError::Usage)?;

    match &cli.command {
        Command::Extract { input } => commands::cmd_extract(&config, input),
        Command::Reliability { annotations } => commands::cmd_reliability(&config, annotations),
        Command::Correlate {
            features,
            annotations,
        } => commands::cmd_correlate(&config, features, annotations),
        Command::Train {
            features,
            annotations,
        } => commands::cmd_train(&config, features, annotations),
        Command::Predict { model, features } => commands::cmd_predict(&config, model, features),
        Command::Evaluate {
            model,
            features,
            annotations,
        } => commands::cmd_evaluate(&config, model, features, annotations),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap exits 2 by default; remap parse failures to the usage code
            // while keeping --help/--version on 0
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CmdError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
