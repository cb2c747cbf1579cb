mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use tubegraph::contrastive::{LossMode, ShuffleMode};
use tubegraph::transport::{CostMode, SimilarityMethod};

/// Motion-aware tube similarity, contrastive batches and scene-graph metrics.
#[derive(Parser)]
#[command(name = "tubegraph", version)]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand. Flags override the config file.
#[derive(Args, Default)]
struct Globals {
    /// JSON run configuration; defaults to $TUBEGRAPH_CONFIG when set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    n_iter: Option<usize>,
    /// Number of transported-mass grid points.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// per-mass or raw.
    #[arg(long, global = true)]
    mode: Option<CostMode>,
    /// reencode or rowpermute.
    #[arg(long, global = true)]
    shuffle_mode: Option<ShuffleMode>,
    #[arg(long, global = true)]
    n_shuffle: Option<usize>,
    #[arg(long, global = true)]
    n_triplet: Option<usize>,
    /// combined or separate.
    #[arg(long, global = true)]
    loss_mode: Option<LossMode>,
    /// Odd finite-difference window of the encoder.
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

impl Globals {
    fn resolve(&self) -> Result<RunConfig, String> {
        let mut c = RunConfig::load(self.config.as_deref())?;
        macro_rules! over {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag.clone() { c.$field = v; })*
            };
        }
        over!(tau => tau, alpha => alpha, gamma => gamma, n_iter => n_iter, mode => mode,
              shuffle_mode => shuffle_mode, n_shuffle => n_shuffle, n_triplet => n_triplet,
              loss_mode => loss_mode, window => window, seed => seed, threads => threads);
        if self.grid.is_some() {
            c.grid_size = self.grid;
        }
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Partial OT distance between two embeddings.
    Ot {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Include the transport plan in the output.
        #[arg(long)]
        plan: bool,
    },
    /// Similarity between two embeddings.
    Sim {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "ot")]
        method: SimilarityMethod,
    },
    /// Strong-motion scores of a video's tubes.
    Motion {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        flow: PathBuf,
        /// Video to score; may be omitted when the bank holds one video.
        #[arg(long)]
        video: Option<String>,
        /// Restrict to these tubes.
        #[arg(long)]
        tube: Vec<String>,
    },
    /// Builds contrastive batches and writes them with their embeddings.
    Sample {
        #[arg(long)]
        bank: PathBuf,
        /// Directory of `<video_id>.tmkf` flow files.
        #[arg(long)]
        flows: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Contrastive loss of written batches.
    Loss {
        #[arg(long)]
        batches: PathBuf,
        #[arg(long, default_value = "ot")]
        method: SimilarityMethod,
    },
    /// R@K / mR@K of predicted triplets against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long = "k", default_values_t = [20, 50, 100])]
        ks: Vec<usize>,
        #[arg(long = "viou", default_values_t = [0.5, 0.1])]
        thresholds: Vec<f64>,
    },
    /// Writes a synthetic corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        videos: usize,
        #[arg(long, default_value_t = 4)]
        frames: u32,
    },
    /// Compares similarity methods on a corpus.
    Ablate {
        /// Bank to use; a default synthetic corpus is generated when absent.
        #[arg(long, requires = "flows")]
        bank: Option<PathBuf>,
        #[arg(long)]
        flows: Option<PathBuf>,
        #[arg(long = "method")]
        methods: Vec<SimilarityMethod>,
        #[arg(long = "k", default_values_t = [1, 3, 5])]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        viou: f64,
    },
}

/// Failures mapped to exit codes.
pub enum Failure {
    Usage(String),
    Data(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(value) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("values serialize"));
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<serde_json::Value, Failure> {
    let cfg = cli.globals.resolve().map_err(Failure::Usage)?;
    if cfg.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    match cli.command {
        Command::Ot { a, b, plan } => commands::ot(&cfg, &a, &b, plan),
        Command::Sim { a, b, method } => commands::sim(&cfg, &a, &b, method),
        Command::Motion {
            bank,
            flow,
            video,
            tube,
        } => commands::motion(&cfg, &bank, &flow, video.as_deref(), &tube),
        Command::Sample { bank, flows, out } => commands::sample(&cfg, &bank, &flows, &out),
        Command::Loss { batches, method } => commands::loss(&cfg, &batches, method),
        Command::Eval {
            pred,
            gt,
            ks,
            thresholds,
        } => commands::eval(&pred, &gt, &ks, &thresholds),
        Command::Synth { out, videos, frames } => commands::synth(&cfg, &out, videos, frames),
        Command::Ablate {
            bank,
            flows,
            methods,
            ks,
            viou,
        } => commands::ablate(&cfg, bank.as_deref().zip(flows.as_deref()), &methods, &ks, viou),
    }
}
