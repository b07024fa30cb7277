use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rlf_core::config::RunConfig;
use rlf_core::metrics::oracle::Neutralization;
use rlf_core::par::Execution;

#[derive(Debug, Parser)]
#[command(name = "rlf", version, about = "Responsive layout failure detection and CSS repair localization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capture a page into a bundle directory through the capture bridge.
    Capture {
        /// URL or local HTML file.
        target: String,
        /// Bundle directory to write.
        #[arg(short, long)]
        out: PathBuf,
        /// Capture bridge executable; defaults to $RLF_CAPTURE_BRIDGE or `rlf-capture-bridge`.
        #[arg(long)]
        bridge: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Detect failures in a bundle and write failures.json.
    Detect {
        bundle: PathBuf,
        #[command(flatten)]
        out: OutArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Mark each failure observable or noi using the bundle's screenshot pairs.
    Noi {
        bundle: PathBuf,
        #[arg(long)]
        failures: PathBuf,
        #[command(flatten)]
        out: OutArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Localize and rank candidate (element, property) pairs; writes ranked.json.
    Localize {
        bundle: PathBuf,
        #[arg(long)]
        failures: PathBuf,
        #[command(flatten)]
        out: OutArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Detect, localize and rank in one go, writing both documents to a directory.
    Run {
        bundle: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score ranked lists against ground truth; writes metrics.json.
    Evaluate {
        /// ranked.json, one per page; paired with --truth in order.
        #[arg(long, required = true)]
        ranked: Vec<PathBuf>,
        #[arg(long, required = true)]
        truth: Vec<PathBuf>,
        #[command(flatten)]
        out: OutArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Plain-text report of a failures, ranked or metrics document.
    Report {
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Flags mirroring `RunConfig`. Unset flags keep the value from `--config`
/// or the default.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON RunConfig used as the base before flags apply.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub width_min: Option<u32>,
    #[arg(long)]
    pub width_max: Option<u32>,
    #[arg(long)]
    pub step: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub sr_max_span: Option<u32>,
    #[arg(long)]
    pub channel_threshold: Option<u8>,
    #[arg(long)]
    pub min_diff_pixels: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub hops: Option<usize>,
    /// Put numeric candidates ahead of categorical ones.
    #[arg(long)]
    pub numeric_first: bool,
    #[arg(long)]
    pub exclude_np: bool,
    #[arg(long)]
    pub exclude_we_np: bool,
    /// Neutralize with `initial` instead of deleting the declaration.
    #[arg(long)]
    pub neutralize_initial: bool,
    /// Disable the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

impl RunArgs {
    pub fn apply(&self, mut c: RunConfig) -> RunConfig {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        set!(width_min, width_max, step, height, eps, sr_max_span, k, hops);
        if let Some(v) = self.channel_threshold {
            c.noi.channel_threshold = v;
        }
        if let Some(v) = self.min_diff_pixels {
            c.noi.min_diff_pixels = v;
        }
        c.numeric_first |= self.numeric_first;
        c.exclusions.exclude_np |= self.exclude_np;
        c.exclusions.exclude_we_np |= self.exclude_we_np;
        if self.neutralize_initial {
            c.neutralization = Neutralization::Initial;
        }
        c
    }

    pub fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}
