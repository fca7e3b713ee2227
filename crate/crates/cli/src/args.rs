use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tigaug_core::metrics::ApProtocol;

#[derive(Debug, Parser)]
#[command(name = "tigaug", version, about = "Traffic-light image augmentation and metamorphic testing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a LISA, Bosch or canonical dataset into a canonical directory.
    Ingest(IngestArgs),
    /// Write augmented datasets under OUT/KIND+.
    Augment(AugmentArgs),
    /// Score a detections file against ground truth (mAP@[.50,.95]).
    Evaluate(EvaluateArgs),
    /// Compare detections on original and augmented images.
    CheckMr(CheckMrArgs),
    /// Write a synthetic canonical dataset of drawn street scenes.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceFormat {
    Lisa,
    Bosch,
    Canonical,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub format: SourceFormat,
    /// LISA root directory, Bosch YAML file, or canonical directory.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Drop byte-identical duplicate images.
    #[arg(long)]
    pub dedup: bool,
    /// Drop images whose three channels agree everywhere.
    #[arg(long)]
    pub drop_monochrome: bool,
    /// Assign a seeded 4:1:1 train/val/test split.
    #[arg(long)]
    pub split_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// A transform code (RN, SW, FG, LF, OE, UE, MB, CC, MP, AD, RT, SC) or `all`.
    #[arg(long)]
    pub transform: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON file overriding transform parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, env = "TIGAUG_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Coco101,
    Allpoint,
}

impl From<Protocol> for ApProtocol {
    fn from(p: Protocol) -> Self {
        match p {
            Protocol::Coco101 => ApProtocol::Coco101,
            Protocol::Allpoint => ApProtocol::AllPoint,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub ground_truth: PathBuf,
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long, value_enum, default_value_t = Protocol::Coco101)]
    pub protocol: Protocol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct CheckMrArgs {
    #[arg(long)]
    pub original: PathBuf,
    #[arg(long)]
    pub augmented: PathBuf,
    #[arg(long)]
    pub det_original: PathBuf,
    #[arg(long)]
    pub det_augmented: PathBuf,
    #[arg(long, value_enum, default_value_t = Protocol::Coco101)]
    pub protocol: Protocol,
    /// Also write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value_t = 320)]
    pub width: u32,
    #[arg(long, default_value_t = 180)]
    pub height: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
