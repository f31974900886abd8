//! Command-line entry point for the tree-policy toolkit.
//!
//! Exit status: 0 on success, 1 when an input fails validation or cannot be
//! read, 2 on a usage error.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use treepolicy::explain::ExplanationStyle;
use treepolicy::tree::Domain;

#[derive(Debug, Parser)]
#[command(name = "treepolicy", version, about = "Lexical decision trees, differentiable tree policies and their explanations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a policy program into a tree file.
    Parse(ParseArgs),
    /// Check a tree file against its domain dictionary.
    Validate(ValidateArgs),
    /// Generate a synthetic description/tree corpus and its vocabulary.
    GenCorpus(GenCorpusArgs),
    /// Build a policy parameter file from a tree, or a random/MLP baseline.
    InitDdt(InitDdtArgs),
    /// Optimize a policy with PPO, one run per seed.
    Train(TrainArgs),
    /// Convert a trained tree policy back into an annotated tree file.
    Discretize(DiscretizeArgs),
    /// Render a tree file as text.
    Explain(ExplainArgs),
    /// Summarize training logs into a CSV table.
    Report(ReportArgs),
    /// Score a translator's predicted trees against corpus targets.
    EvalTranslate(EvalTranslateArgs),
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(long)]
    pub domain: Domain,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub tree: PathBuf,
    /// Require the tree to belong to this domain.
    #[arg(long)]
    pub domain: Option<Domain>,
}

#[derive(Debug, Args)]
pub struct GenCorpusArgs {
    #[arg(long)]
    pub domain: Domain,
    #[arg(long)]
    pub n_base: Option<usize>,
    /// Augmented descriptions per base tree.
    #[arg(long)]
    pub aug: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Train, validation and test fractions, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub split: Option<Vec<f64>>,
    #[arg(long)]
    pub synonym_rate: Option<f64>,
    #[arg(long)]
    pub min_depth: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
}

#[derive(Debug, Args)]
pub struct InitDdtArgs {
    /// Tree file to encode.
    #[arg(long, conflicts_with_all = ["random", "mlp"])]
    pub tree: Option<PathBuf>,
    /// Random balanced tree instead of a lexical one.
    #[arg(long, conflicts_with = "mlp")]
    pub random: bool,
    /// Fully connected baseline instead of a tree.
    #[arg(long)]
    pub mlp: bool,
    #[arg(long)]
    pub domain: Option<Domain>,
    #[arg(long, default_value_t = 8)]
    pub leaves: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub leaf_concentration: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_learnable: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub policy: PathBuf,
    /// Defaults to the domain matching the policy's dimensions.
    #[arg(long)]
    pub domain: Option<Domain>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Number of independent runs.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// First seed; runs use consecutive seeds from here.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub rollout_steps: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    /// Defaults to the policy file name.
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    #[arg(long)]
    pub policy: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the hardened parameters.
    #[arg(long)]
    pub params_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub tree: PathBuf,
    /// One of tree, program, text, modified.
    #[arg(long)]
    pub style: ExplanationStyle,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub logs: Vec<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub window: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalTranslateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
    /// Only score examples from this split (train, validation or test).
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Invalid(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
