use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lossgeom_experiments::specs::parse_pool_arg;
use lossgeom_experiments::{execute, ExperimentConfig, ExperimentKind, Outputs, Result};

#[derive(Debug, Parser)]
#[command(name = "lossgeom", version, about = "Geometry of proper losses and predictive complexity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Propriety, degree, mixability and fundamentality of a loss.
    Analyze(RunArgs),
    /// Power predictor on all-zero labels under a loss of degree k >= 2 and under log loss.
    Theorem2(RunArgs),
    /// Deficiency of a prediction algorithm against a pool on a data file.
    Deficiency(RunArgs),
    /// Equivalence factor of two truncated losses and a deficiency comparison.
    CompareTruncated(RunArgs),
    /// Quick end-to-end checks.
    Selftest(RunArgs),
}

#[derive(Debug, Default, Args)]
struct RunArgs {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Builtin name, loss DSL text, or @PATH.
    #[arg(long)]
    loss: Option<String>,
    /// Second loss for compare-truncated.
    #[arg(long)]
    loss2: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Directory for report.json and CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// const:P, laplace, power:K:EPS or table:PATH.
    #[arg(long)]
    algorithm: Option<String>,
    /// `;`-separated algorithm specs, each optionally suffixed with =WEIGHT.
    #[arg(long)]
    pool: Option<String>,
    /// Label file: one `label` or `object,label` per line.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Learning rate of the mixture; defaults to the mixability constant.
    #[arg(long)]
    eta: Option<f64>,
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::Analyze(a) => (ExperimentKind::Analyze, a),
            Command::Theorem2(a) => (ExperimentKind::Theorem2, a),
            Command::Deficiency(a) => (ExperimentKind::Deficiency, a),
            Command::CompareTruncated(a) => (ExperimentKind::CompareTruncated, a),
            Command::Selftest(a) => (ExperimentKind::Selftest, a),
        }
    }
}

fn merge(args: RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    // Command-line paths are relative to the working directory.
    if let Some(data) = args.data {
        cfg.data = Some(data);
    }
    if let Some(out) = args.out {
        cfg.output = Some(out);
    }
    if let Some(pool) = args.pool {
        cfg.pool = Some(parse_pool_arg(&pool)?);
    }
    cfg.loss = args.loss.or(cfg.loss);
    cfg.loss2 = args.loss2.or(cfg.loss2);
    cfg.epsilon = args.eps.or(cfg.epsilon);
    cfg.horizon = args.horizon.or(cfg.horizon);
    cfg.seed = args.seed.or(cfg.seed);
    cfg.algorithm = args.algorithm.or(cfg.algorithm);
    cfg.eta = args.eta.or(cfg.eta);
    Ok(cfg)
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<()> {
    let cfg = merge(args)?;
    let mut outputs = Outputs::default();
    let result = execute(kind, &cfg, &mut outputs);
    if let Some(text) = outputs.stdout() {
        print!("{text}");
    }
    if let Some(dir) = &cfg.output {
        outputs.write(dir)?;
    }
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (kind, args) = cli.command.split();
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lossgeom {}: {e}", kind.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
