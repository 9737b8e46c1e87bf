use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Speech-intelligibility metrics and listening-test evaluation.
#[derive(Debug, Parser)]
#[command(version, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Config file (TOML or JSON, by extension). Defaults to
    /// $INTELLIGIBILITY_CONFIG when set.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Seed for every random draw (dither, tie jitter, bootstrap).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one clean/degraded pair; prints one JSON line per metric.
    Compute(ComputeArgs),
    /// Evaluate metrics against listening-test manifests and write reports.
    Evaluate(EvaluateArgs),
    /// Time metrics on a seeded synthetic stimulus.
    Bench(BenchArgs),
    /// Check manifests and the files they reference.
    ValidateManifest(ValidateArgs),
    /// Write a synthetic demo dataset (WAVs plus two manifests).
    DemoDataset(DemoArgs),
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    pub clean: PathBuf,
    pub degraded: PathBuf,
    /// Comma-separated metric names, or `all`.
    #[arg(long, alias = "metrics")]
    pub metric: Option<String>,
    /// Align the degraded signal to the clean one first.
    #[arg(long)]
    pub align: bool,
    /// Human-readable output instead of JSON lines.
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Manifest files; may also come from the config file.
    pub manifests: Vec<PathBuf>,
    /// Comma-separated metric names, or `all`.
    #[arg(long, alias = "metric")]
    pub metrics: Option<String>,
    /// Output directory for report, summary and scatter files.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Align stimuli in every dataset, overriding the manifests.
    #[arg(long)]
    pub align: bool,
    /// Bootstrap replicates (at least 1000).
    #[arg(long, value_name = "B")]
    pub bootstrap: Option<usize>,
    /// Nominal coverage of the confidence intervals.
    #[arg(long)]
    pub coverage: Option<f64>,
    /// Keep each dataset's mapping fixed across bootstrap replicates.
    #[arg(long)]
    pub no_refit: bool,
    /// Externally computed scores, as METRIC=DIR where DIR holds one
    /// `<dataset name>.csv` (columns condition_id,d) per manifest.
    #[arg(long = "import", value_name = "METRIC=DIR")]
    pub imports: Vec<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated metric names, or `all`.
    #[arg(long, alias = "metric", default_value = "siib,siib-gauss")]
    pub metrics: String,
    /// Stimulus length in seconds.
    #[arg(long, default_value_t = 20.0)]
    pub seconds: f64,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Print JSON lines instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(required = true)]
    pub manifests: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    pub dir: PathBuf,
    /// Stimulus length in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub seconds: f64,
}
