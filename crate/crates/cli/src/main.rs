use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fairinf::diffusion::CoinMode;
use fairinf::experiment::{
    self, ExperimentConfig, Method, ThetaMode, DEFAULT_MIN_COMMUNITY_SIZE, DEFAULT_NUM_SIMS,
};
use fairinf::graph::ProbabilityModel;
use fairinf::rrset::PlanParams;
use fairinf::DEFAULT_Q;

/// Fairness-aware influence maximization experiments.
///
/// Selects seeds with the welfare-fair greedy and the baselines for every
/// (p, k, alpha) combination, evaluates them by Monte-Carlo simulation and
/// writes results.csv and report.json to the output directory.
#[derive(Debug, Parser)]
#[command(name = "fairinf", version)]
struct Cli {
    /// Edge list: "u v" or "u v p" per line, '#' comments allowed.
    #[arg(long)]
    graph: PathBuf,

    /// Community file: "node community" per line.
    #[arg(long)]
    communities: PathBuf,

    /// Edge probability model: uniform, uniform:P, wic or file.
    #[arg(long, default_value = "uniform")]
    model: ProbabilityModel,

    /// Inequality aversion values, comma separated.
    #[arg(long = "alpha", value_delimiter = ',', default_value = "0.5")]
    alphas: Vec<f64>,

    /// Seed budgets, comma separated.
    #[arg(long = "k", value_delimiter = ',', default_value = "50")]
    ks: Vec<usize>,

    /// Uniform edge probabilities to sweep, comma separated.
    #[arg(long = "p", value_delimiter = ',')]
    ps: Vec<f64>,

    /// Truncation order of the series.
    #[arg(long = "Q", default_value_t = DEFAULT_Q)]
    q: usize,

    /// Total RR sets, or "auto" for the worst-case bound.
    #[arg(long, default_value = "200000")]
    theta: ThetaMode,

    /// Accuracy for --theta auto.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,

    /// Confidence exponent for --theta auto.
    #[arg(long, default_value_t = 1.0)]
    ell: f64,

    /// Utility bound of the optimum for --theta auto (defaults to --b0).
    #[arg(long)]
    b: Option<f64>,

    /// Utility bound of any solution for --theta auto.
    #[arg(long, default_value_t = PlanParams::DEFAULT_UTILITY_BOUND)]
    b0: f64,

    /// Monte-Carlo simulations per seed set.
    #[arg(long, default_value_t = DEFAULT_NUM_SIMS)]
    sims: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Methods to run: fimm, imm, c-hd, c-imm.
    #[arg(long, value_delimiter = ',', default_value = "fimm,imm,c-hd,c-imm")]
    methods: Vec<Method>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Communities smaller than this are dropped.
    #[arg(long, default_value_t = DEFAULT_MIN_COMMUNITY_SIZE)]
    min_community_size: usize,

    /// Save the RR index here, or load it if the file exists.
    #[arg(long)]
    snapshot_rr: Option<PathBuf>,

    /// Read each edge line as two directed edges.
    #[arg(long)]
    undirected: bool,

    /// Monte-Carlo randomness: coupled (shared per edge) or independent.
    #[arg(long, default_value = "coupled", value_parser = parse_coins)]
    coins: CoinMode,

    /// Run the p settings in parallel.
    #[arg(long)]
    parallel_combinations: bool,

    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_coins(s: &str) -> Result<CoinMode, String> {
    match s {
        "coupled" => Ok(CoinMode::Coupled),
        "independent" => Ok(CoinMode::Independent),
        _ => Err(format!("expected coupled or independent, got {s:?}")),
    }
}

impl Cli {
    fn into_config(self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(self.graph, self.communities, self.out);
        cfg.directed = !self.undirected;
        cfg.model = self.model;
        cfg.alphas = self.alphas;
        cfg.ks = self.ks;
        // bare "uniform" without --p keeps the default p list
        if !(self.ps.is_empty() && matches!(self.model, ProbabilityModel::Uniform(p) if p.is_nan()))
        {
            cfg.ps = self.ps;
        }
        cfg.q = self.q;
        cfg.theta = self.theta;
        cfg.epsilon = self.epsilon;
        cfg.ell = self.ell;
        cfg.b = self.b.unwrap_or(self.b0);
        cfg.b0 = self.b0;
        cfg.num_sims = self.sims;
        cfg.seed = self.seed;
        cfg.methods = self.methods;
        cfg.min_community_size = self.min_community_size;
        cfg.snapshot_rr = self.snapshot_rr;
        cfg.coins = self.coins;
        cfg.parallel_combinations = self.parallel_combinations;
        cfg
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }

    let config = cli.into_config();
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match experiment::run(&config) {
        Ok(report) => {
            println!(
                "{} rows written to {}",
                report.rows.len(),
                config.out_dir.join("results.csv").display()
            );
            if report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &report.failures {
                    eprintln!("failed: {}", f.error);
                }
                eprintln!("{} combinations failed", report.failures.len());
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
