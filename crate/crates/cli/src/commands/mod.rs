mod buckets;
mod compile;
mod diagnose;
mod eval;
mod report;
mod sig;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use polykit::xeval::{Alternative, Feature, ScoreMetric};
use polykit::{Regime, Split};

use crate::config::{Overrides, RunConfig};
use crate::error::CliError;

pub use eval::score_table_tsv;

#[derive(Debug, Parser)]
#[command(name = "polykit", version, about = "Multilingual prompt compilation and interpretable evaluation")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Template regime, e.g. unified-cross or diversified-v3-in.
    #[arg(long, global = true, value_parser = parse_regime)]
    pub regime: Option<Regime>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Dev,
    Test,
    All,
}

impl SplitArg {
    fn splits(self) -> Vec<Split> {
        match self {
            SplitArg::Train => vec![Split::Train],
            SplitArg::Dev => vec![Split::Dev],
            SplitArg::Test => vec![Split::Test],
            SplitArg::All => Split::ALL.to_vec(),
        }
    }
}

/// Paired units for the signed-rank test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pairing {
    /// Per-language average over all metric columns.
    Language,
    /// Per-dataset primary metric.
    Dataset,
    /// Primary metric per (dataset, language).
    Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OneSided {
    Greater,
    Less,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render dataset splits into prompted pairs.
    Compile {
        #[arg(long, value_enum, default_value_t = SplitArg::All)]
        split: SplitArg,
    },
    /// Score predictions on the test splits.
    Eval {
        #[arg(long)]
        predictions: PathBuf,
    },
    /// Per-bucket scores for each feature.
    Buckets {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        dataset: Option<String>,
        /// Repeatable; defaults to the configured or all applicable features.
        #[arg(long = "feature")]
        features: Vec<Feature>,
        #[arg(long)]
        metric: Option<ScoreMetric>,
    },
    /// Compare two models.
    Diagnose {
        #[arg(long)]
        m1: PathBuf,
        #[arg(long)]
        m2: PathBuf,
        /// Restrict to one dataset; default is the average over all.
        #[arg(long)]
        dataset: Option<String>,
    },
    /// Wilcoxon signed-rank test between two models or two value files.
    Sig {
        #[arg(long, requires = "y", conflicts_with_all = ["m1", "m2"])]
        x: Option<PathBuf>,
        #[arg(long, requires = "x")]
        y: Option<PathBuf>,
        #[arg(long, requires = "m2")]
        m1: Option<PathBuf>,
        #[arg(long, requires = "m1")]
        m2: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Pairing::Language)]
        pairing: Pairing,
        /// One-sided alternative; two-sided when absent.
        #[arg(long, value_enum)]
        one_sided: Option<OneSided>,
    },
    /// Print a JSON report as a table.
    Report { input: PathBuf },
}

fn overrides(cli: &Cli) -> Overrides {
    Overrides { seed: cli.seed, out: cli.out.clone(), regime: cli.regime }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::input("this command needs --config"))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.apply(&overrides(cli));
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Compile { split } => compile::run(&load_config(cli)?, &split.splits()),
        Command::Eval { predictions } => eval::run(&load_config(cli)?, predictions),
        Command::Buckets { predictions, dataset, features, metric } => {
            buckets::run(&load_config(cli)?, predictions, dataset.as_deref(), features, *metric)
        }
        Command::Diagnose { m1, m2, dataset } => diagnose::run(&load_config(cli)?, m1, m2, dataset.as_deref()),
        Command::Sig { x, y, m1, m2, pairing, one_sided } => {
            let alternative = match one_sided {
                None => Alternative::TwoSided,
                Some(OneSided::Greater) => Alternative::Greater,
                Some(OneSided::Less) => Alternative::Less,
            };
            match (x, y, m1, m2) {
                (Some(x), Some(y), _, _) => {
                    let mut cfg = match &cli.config {
                        Some(_) => load_config(cli)?,
                        None => RunConfig::empty(),
                    };
                    cfg.apply(&overrides(cli));
                    sig::run_values(&cfg, x, y, alternative)
                }
                (_, _, Some(m1), Some(m2)) => sig::run_models(&load_config(cli)?, m1, m2, *pairing, alternative),
                _ => Err(CliError::input("sig needs --x/--y or --m1/--m2")),
            }
        }
        Command::Report { input } => report::run(input),
    }
}
