//! `rss-sense`: simulate RSS traces, estimate heart rate, recognise gestures
//! and estimate walking speed.

mod config;
mod inputs;
mod manifest;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rss_sense::gesture::{ClassifierKind, GestureLabel};

#[derive(Debug, Parser)]
#[command(name = "rss-sense", version, about = "Device-free sensing from single-carrier RSS traces")]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// TOML file overriding module defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file or directory; CSV goes to stdout when omitted.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate simulated traces.
    Simulate {
        #[command(subcommand)]
        kind: SimulateKind,
    },
    /// Stream heart-rate estimates from vital-sign traces.
    Heartrate(HeartrateArgs),
    /// Train, apply and evaluate gesture classifiers.
    Gesture {
        #[command(subcommand)]
        action: GestureAction,
    },
    /// Calibrate and apply the crossing speed estimator.
    Speed {
        #[command(subcommand)]
        action: SpeedAction,
    },
    /// Print the tool version.
    Version,
}

#[derive(Debug, Subcommand)]
pub enum SimulateKind {
    /// Breathing and pulse micro-motion of a resting person.
    Vitals {
        /// Constant heart rate in bpm.
        #[arg(long, default_value_t = 72.0, conflicts_with = "hr_profile")]
        hr: f64,
        /// Piecewise-linear heart rate as `t:bpm` pairs, e.g. `0:60,300:66`.
        #[arg(long)]
        hr_profile: Option<String>,
        #[arg(long, default_value_t = 15.0)]
        breathing_rate: f64,
        /// Seconds.
        #[arg(long, default_value_t = 300.0)]
        duration: f64,
    },
    /// One person walking across the link.
    Crossing {
        /// Walking speed in m/s.
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
        /// Crossing point, metres from the transmitter; defaults to mid-link.
        #[arg(long)]
        position: Option<f64>,
        /// Path angle to the link line in degrees.
        #[arg(long, default_value_t = 90.0)]
        angle: f64,
        /// Distance walked before and after the crossing, metres.
        #[arg(long, default_value_t = 5.0)]
        start_offset: f64,
    },
    /// One gesture with quiet padding.
    Gesture {
        #[arg(long)]
        label: GestureLabel,
        /// Quiet seconds before the gesture.
        #[arg(long, default_value_t = 2.0)]
        pre: f64,
        /// Quiet seconds after the gesture.
        #[arg(long, default_value_t = 2.0)]
        post: f64,
    },
    /// Standard vitals, gesture and crossing corpora.
    Corpora,
}

#[derive(Debug, Args)]
pub struct HeartrateArgs {
    /// Trace files or vitals corpus directories.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Window in seconds; overrides the config.
    #[arg(long)]
    pub window: Option<f64>,
    /// Search the fundamental only instead of summing harmonics.
    #[arg(long)]
    pub single_harmonic: bool,
    /// Window lengths in seconds to compare, e.g. `10,20,40`; writes an RMSE
    /// table instead of estimates.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum GestureAction {
    /// Fit a classifier on a labelled gesture corpus; writes the model JSON.
    Train {
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = Classifier::RandomForest)]
        classifier: Classifier,
    },
    /// Label one trace.
    Classify {
        trace: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Confusion matrix of a model on a labelled corpus.
    Eval {
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Classifier {
    Knn,
    LinearSvm,
    RandomForest,
}

impl From<Classifier> for ClassifierKind {
    fn from(c: Classifier) -> Self {
        match c {
            Classifier::Knn => ClassifierKind::Knn,
            Classifier::LinearSvm => ClassifierKind::LinearSvm,
            Classifier::RandomForest => ClassifierKind::RandomForest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Select {
    All,
    Even,
    Odd,
}

#[derive(Debug, Args)]
pub struct LinkArgs {
    /// Link identifier naming the calibration file.
    #[arg(long, default_value = "link")]
    pub link: String,
    /// Directory holding `<link>.alpha` calibration files.
    #[arg(long, default_value = ".")]
    pub calibration_dir: PathBuf,
    /// Rows of a corpus manifest to use, by position.
    #[arg(long, value_enum, default_value_t = Select::All)]
    pub select: Select,
}

#[derive(Debug, Subcommand)]
pub enum SpeedAction {
    /// Fit alpha from traces with known speed.
    Calibrate {
        /// Trace files or crossing corpus directories.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        link: LinkArgs,
    },
    /// Estimate the crossing speed of each trace with a stored alpha.
    Estimate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        link: LinkArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
