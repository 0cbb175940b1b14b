//! Sweeps over edge probability, budget and inequality aversion: every
//! method selects seeds, every seed set is evaluated by Monte-Carlo with one
//! shared evaluation seed, and the fair methods are compared to IMM.

mod report;

pub use report::{
    compute_eof, compute_pof, BudgetSummary, Failure, FairnessReport, GraphSummary, MethodRow,
    Timings,
};

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{plug_in_fair_influence, CoinMode, EvaluationReport, MonteCarlo};
use crate::error::{Error, Result};
use crate::graph::{
    assign_probabilities, prune, read_communities_file, read_edge_list_file, CommunityPartition,
    InfluenceGraph, NodeId, ProbabilityModel,
};
use crate::optimizer::{
    community_hd_select, community_im_select, fimm_select, max_coverage_select,
};
use crate::rng::derive_seed;
use crate::rrset::{
    compute_plan, equal_allocation, generate, generate_uniform, read_snapshot, write_snapshot,
    PlanParams, RRIndex,
};
use crate::welfare::{EstimatorConfig, DEFAULT_Q};

pub const DEFAULT_THETA: usize = 200_000;
pub const DEFAULT_NUM_SIMS: usize = 10_000;
pub const DEFAULT_MIN_COMMUNITY_SIZE: usize = 11;

const EVALUATION_SALT: u64 = 0xe7a1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "fimm")]
    Fimm,
    #[serde(rename = "imm")]
    Imm,
    #[serde(rename = "c-hd")]
    CommunityHd,
    #[serde(rename = "c-imm")]
    CommunityIm,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Fimm,
        Method::Imm,
        Method::CommunityHd,
        Method::CommunityIm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fimm => "fimm",
            Method::Imm => "imm",
            Method::CommunityHd => "c-hd",
            Method::CommunityIm => "c-imm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s || m.name().replace('-', "") == s)
            .ok_or_else(|| {
                Error::param(format!(
                    "unknown method {s:?} (expected fimm, imm, c-hd or c-imm)"
                ))
            })
    }
}

/// How many RR sets to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaMode {
    /// This many in total, split equally across communities.
    Fixed(usize),
    /// The worst-case bound from [`compute_plan`] at the largest `k`.
    Auto,
}

impl FromStr for ThetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(ThetaMode::Auto),
            t => match t.parse::<usize>() {
                Ok(v) if v > 0 => Ok(ThetaMode::Fixed(v)),
                _ => Err(Error::param(format!(
                    "theta must be a positive integer or \"auto\", got {t:?}"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    pub communities: PathBuf,
    /// Treat each edge line as one directed edge; otherwise as two.
    pub directed: bool,
    pub model: ProbabilityModel,
    pub alphas: Vec<f64>,
    pub ks: Vec<usize>,
    /// Uniform probabilities to sweep; overrides the value in `model`.
    pub ps: Vec<f64>,
    pub q: usize,
    pub theta: ThetaMode,
    pub epsilon: f64,
    pub ell: f64,
    pub b: f64,
    pub b0: f64,
    pub num_sims: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub out_dir: PathBuf,
    pub min_community_size: usize,
    /// Load the community-stratified RR index from here if it exists, else
    /// save it here.
    pub snapshot_rr: Option<PathBuf>,
    pub coins: CoinMode,
    /// Run probability settings concurrently.
    pub parallel_combinations: bool,
}

impl ExperimentConfig {
    pub fn new(
        graph: impl Into<PathBuf>,
        communities: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        ExperimentConfig {
            graph: graph.into(),
            communities: communities.into(),
            directed: true,
            model: ProbabilityModel::Uniform(f64::NAN),
            alphas: vec![0.5],
            ks: vec![50],
            ps: vec![0.01],
            q: DEFAULT_Q,
            theta: ThetaMode::Fixed(DEFAULT_THETA),
            epsilon: 0.5,
            ell: 1.0,
            b: PlanParams::DEFAULT_UTILITY_BOUND,
            b0: PlanParams::DEFAULT_UTILITY_BOUND,
            num_sims: DEFAULT_NUM_SIMS,
            seed: 0,
            methods: Method::ALL.to_vec(),
            out_dir: out_dir.into(),
            min_community_size: DEFAULT_MIN_COMMUNITY_SIZE,
            snapshot_rr: None,
            coins: CoinMode::Coupled,
            parallel_combinations: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.ks.is_empty() || self.methods.is_empty() {
            return Err(Error::param("alpha, k and method lists must be nonempty"));
        }
        if self.num_sims == 0 {
            return Err(Error::param("num_sims must be at least 1"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::param(format!("alpha must lie in (0, 1), got {a}")));
        }
        if self.ks.contains(&0) {
            return Err(Error::param("k must be at least 1"));
        }
        if self.q < 2 {
            return Err(Error::param("Q must be at least 2"));
        }
        if self.min_community_size == 0 {
            return Err(Error::param("min_community_size must be at least 1"));
        }
        self.probability_settings().map(|_| ())
    }

    /// `(p, model)` for every probability setting in the sweep.
    pub fn probability_settings(&self) -> Result<Vec<(Option<f64>, ProbabilityModel)>> {
        match self.model {
            ProbabilityModel::Uniform(p0) => {
                let ps = if self.ps.is_empty() {
                    vec![p0]
                } else {
                    self.ps.clone()
                };
                ps.into_iter()
                    .map(|p| {
                        if (0.0..=1.0).contains(&p) {
                            Ok((Some(p), ProbabilityModel::Uniform(p)))
                        } else {
                            Err(Error::param(format!(
                                "uniform model needs p in [0, 1], got {p}"
                            )))
                        }
                    })
                    .collect()
            }
            other => {
                if !self.ps.is_empty() {
                    log::warn!("p list ignored under the {other} model");
                }
                Ok(vec![(None, other)])
            }
        }
    }

    /// Seed of the Monte-Carlo evaluation shared by every method.
    pub fn evaluation_seed(&self) -> u64 {
        derive_seed(self.seed, EVALUATION_SALT)
    }

    fn snapshot_path(&self, setting: usize, settings: usize) -> Option<PathBuf> {
        let base = self.snapshot_rr.as_ref()?;
        if settings == 1 {
            return Some(base.clone());
        }
        let mut name = base
            .file_name()
            .map(|n| n.to_os_string())
            .unwrap_or_default();
        name.push(format!(".{setting}"));
        Some(base.with_file_name(name))
    }
}

/// Reads the edge list and community file named in `config` and prunes
/// small communities.
pub fn load_inputs(config: &ExperimentConfig) -> Result<(InfluenceGraph, CommunityPartition)> {
    let graph = read_edge_list_file(&config.graph, config.directed)
        .map_err(|e| Error::in_file(&config.graph, e))?;
    let communities = read_communities_file(&config.communities)
        .map_err(|e| Error::in_file(&config.communities, e))?;
    let (graph, partition) = prune(&graph, &communities, config.min_community_size)
        .map_err(|e| Error::in_file(&config.communities, e))?;
    log::info!(
        "loaded {} nodes, {} edges, {} communities",
        graph.node_count(),
        graph.edge_count(),
        partition.community_count()
    );
    Ok((graph, partition))
}

/// Loads the inputs, runs the sweep and writes `results.csv` and
/// `report.json` to `config.out_dir`.
pub fn run(config: &ExperimentConfig) -> Result<FairnessReport> {
    config.validate()?;
    let (graph, partition) = load_inputs(config)?;
    let report = run_on(&graph, &partition, config)?;
    report.write_to_dir(&config.out_dir)?;
    Ok(report)
}

/// Runs the sweep on an already loaded graph. Failures of individual
/// combinations are collected in the report.
pub fn run_on(
    graph: &InfluenceGraph,
    partition: &CommunityPartition,
    config: &ExperimentConfig,
) -> Result<FairnessReport> {
    config.validate()?;
    if partition.node_count() != graph.node_count() {
        return Err(Error::param("partition and graph disagree on node count"));
    }
    let settings = config.probability_settings()?;
    let count = settings.len();
    let run_one = |(i, &(p, model)): (usize, &(Option<f64>, ProbabilityModel))| {
        Setting {
            graph,
            partition,
            config,
            index: i,
            count,
            p,
        }
        .run(model)
    };
    let outcomes: Vec<Outcome> = if config.parallel_combinations {
        settings.par_iter().enumerate().map(run_one).collect()
    } else {
        settings.iter().enumerate().map(run_one).collect()
    };

    let mut report = FairnessReport {
        config: config.clone(),
        graph: GraphSummary {
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            communities: partition.community_count(),
            community_labels: partition.labels().to_vec(),
            community_sizes: partition.sizes(),
        },
        budgets: Vec::new(),
        rows: Vec::new(),
        failures: Vec::new(),
    };
    for o in outcomes {
        report.budgets.extend(o.budget);
        report.rows.extend(o.rows);
        report.failures.extend(o.failures);
    }
    Ok(report)
}

#[derive(Default)]
struct Outcome {
    budget: Option<BudgetSummary>,
    rows: Vec<MethodRow>,
    failures: Vec<Failure>,
}

impl Outcome {
    fn fail(
        &mut self,
        method: Option<Method>,
        alpha: Option<f64>,
        k: Option<usize>,
        p: Option<f64>,
        e: &Error,
    ) {
        log::warn!(
            "{} k={k:?} alpha={alpha:?} p={p:?}: {e}",
            method.map_or("all", Method::name)
        );
        self.failures.push(Failure {
            method,
            alpha,
            k,
            p,
            error: e.to_string(),
        });
    }
}

struct Setting<'a> {
    graph: &'a InfluenceGraph,
    partition: &'a CommunityPartition,
    config: &'a ExperimentConfig,
    index: usize,
    count: usize,
    p: Option<f64>,
}

struct Picked {
    method: Method,
    alpha: Option<f64>,
    seeds: Vec<NodeId>,
    trace: Vec<f64>,
    timings: Timings,
}

impl Setting<'_> {
    fn run(&self, model: ProbabilityModel) -> Outcome {
        let mut out = Outcome::default();
        let p = self.p;
        let graph = match assign_probabilities(self.graph, model) {
            Ok(g) => g,
            Err(e) => {
                out.fail(None, None, None, p, &e);
                return out;
            }
        };
        let cfg = self.config;
        let n = graph.node_count();
        let c = self.partition.community_count();
        let seed = derive_seed(cfg.seed, self.index as u64);

        let budget = match self.budget(n, c) {
            Ok(b) => b,
            Err(e) => {
                out.fail(None, None, None, p, &e);
                return out;
            }
        };
        let theta_c = equal_allocation(budget.theta_total, c);
        let theta_cimm = budget.theta_per_community;
        let theta_total = budget.theta_total;
        out.budget = Some(budget);

        let wants = |m: Method| cfg.methods.contains(&m);
        let (fimm_index, fimm_rr_time) = if wants(Method::Fimm) {
            let start = Instant::now();
            match self.fimm_index(&graph, &theta_c, derive_seed(seed, 0)) {
                Ok(idx) => (Some(idx), start.elapsed().as_secs_f64()),
                Err(e) => {
                    out.fail(Some(Method::Fimm), None, None, p, &e);
                    (None, 0.0)
                }
            }
        } else {
            (None, 0.0)
        };
        let (imm_index, imm_rr_time) = if wants(Method::Imm) {
            let start = Instant::now();
            match generate_uniform(&graph, theta_total, derive_seed(seed, 1)) {
                Ok(idx) => (Some(idx), start.elapsed().as_secs_f64()),
                Err(e) => {
                    out.fail(Some(Method::Imm), None, None, p, &e);
                    (None, 0.0)
                }
            }
        } else {
            (None, 0.0)
        };

        let mc = MonteCarlo::new(cfg.num_sims, cfg.evaluation_seed()).with_coins(cfg.coins);
        let mut evaluated: HashMap<Vec<NodeId>, (EvaluationReport, f64)> = HashMap::new();

        for &k in &cfg.ks {
            if k > n {
                out.fail(
                    None,
                    None,
                    Some(k),
                    p,
                    &Error::BudgetTooLarge { k, node_count: n },
                );
                continue;
            }
            let mut picks: Vec<Picked> = Vec::new();
            for &method in &cfg.methods {
                let start = Instant::now();
                let timed = |seeds: Vec<NodeId>, rr: f64| Picked {
                    method,
                    alpha: None,
                    seeds,
                    trace: Vec::new(),
                    timings: Timings {
                        rr_generation: rr,
                        selection: start.elapsed().as_secs_f64(),
                        evaluation: 0.0,
                    },
                };
                let picked = match method {
                    Method::Fimm => {
                        let Some(index) = &fimm_index else { continue };
                        for &alpha in &cfg.alphas {
                            let start = Instant::now();
                            let sel = EstimatorConfig::new(alpha, cfg.q)
                                .and_then(|ec| fimm_select(index, self.partition, k, &ec));
                            match sel {
                                Ok(sel) => picks.push(Picked {
                                    method,
                                    alpha: Some(alpha),
                                    seeds: sel.seeds,
                                    trace: sel.estimates,
                                    timings: Timings {
                                        rr_generation: fimm_rr_time,
                                        selection: start.elapsed().as_secs_f64(),
                                        evaluation: 0.0,
                                    },
                                }),
                                Err(e) => out.fail(Some(method), Some(alpha), Some(k), p, &e),
                            }
                        }
                        continue;
                    }
                    Method::Imm => {
                        let Some(index) = &imm_index else { continue };
                        max_coverage_select(index, k).map(|s| timed(s.seeds, imm_rr_time))
                    }
                    Method::CommunityHd => {
                        community_hd_select(&graph, self.partition, k).map(|s| timed(s, 0.0))
                    }
                    Method::CommunityIm => community_im_select(
                        &graph,
                        self.partition,
                        k,
                        theta_cimm,
                        derive_seed(seed, 2),
                    )
                    .map(|s| timed(s, 0.0)),
                };
                match picked {
                    Ok(pk) => picks.push(pk),
                    Err(e) => out.fail(Some(method), None, Some(k), p, &e),
                }
            }

            for pk in &mut picks {
                let cached = match evaluated.get(&pk.seeds) {
                    Some(hit) => Ok(hit.clone()),
                    None => {
                        let start = Instant::now();
                        mc.estimate(&graph, self.partition, &pk.seeds, cfg.alphas[0])
                            .map(|r| {
                                let entry = (r, start.elapsed().as_secs_f64());
                                evaluated.insert(pk.seeds.clone(), entry.clone());
                                entry
                            })
                    }
                };
                match cached {
                    Ok((_, secs)) => pk.timings.evaluation = secs,
                    Err(e) => out.fail(Some(pk.method), pk.alpha, Some(k), p, &e),
                }
            }

            for &alpha in &cfg.alphas {
                let mut rows: Vec<MethodRow> = Vec::new();
                for pk in picks
                    .iter()
                    .filter(|pk| pk.alpha.is_none_or(|a| a == alpha))
                {
                    let Some((eval, _)) = evaluated.get(&pk.seeds) else {
                        continue;
                    };
                    rows.push(MethodRow {
                        method: pk.method,
                        alpha,
                        k,
                        p,
                        seeds: pk.seeds.iter().map(|&v| graph.original_id(v)).collect(),
                        sigma_hat: eval.sigma_hat,
                        sigma_std_error: eval.sigma_std_error,
                        u_hat: eval.u_hat.clone(),
                        fair_influence: plug_in_fair_influence(
                            &eval.u_hat,
                            &eval.community_sizes,
                            alpha,
                        ),
                        pof: None,
                        eof: None,
                        estimate_trace: pk.trace.clone(),
                        timings: pk.timings,
                    });
                }
                if let Some((sigma_i, f_i)) = rows
                    .iter()
                    .find(|r| r.method == Method::Imm)
                    .map(|r| (r.sigma_hat, r.fair_influence))
                {
                    for r in rows.iter_mut().filter(|r| r.method != Method::Imm) {
                        r.pof = compute_pof(sigma_i, r.sigma_hat, k);
                        r.eof = compute_eof(r.fair_influence, f_i, k, alpha);
                    }
                }
                out.rows.extend(rows);
            }
        }
        out
    }

    fn budget(&self, n: usize, c: usize) -> Result<BudgetSummary> {
        let cfg = self.config;
        match cfg.theta {
            ThetaMode::Fixed(theta) => {
                let per = theta.div_ceil(c);
                if per < cfg.q {
                    return Err(Error::TooFewSamples {
                        community: 0,
                        theta: per,
                        q: cfg.q,
                    });
                }
                Ok(BudgetSummary {
                    p: self.p,
                    theta_total: theta,
                    theta_per_community: per,
                    plan: None,
                })
            }
            ThetaMode::Auto => {
                let k = cfg.ks.iter().copied().max().unwrap_or(1).min(n);
                let params = PlanParams {
                    epsilon: cfg.epsilon,
                    ell: cfg.ell,
                    k,
                    q: cfg.q,
                    alpha: cfg.alphas[0],
                    b: cfg.b,
                    b0: cfg.b0,
                };
                let plan = compute_plan(params, n, c)?;
                log::info!(
                    "theoretical theta = {} ({} per community)",
                    plan.theta,
                    plan.theta_per_community
                );
                Ok(BudgetSummary {
                    p: self.p,
                    theta_total: plan.theta,
                    theta_per_community: plan.theta_per_community,
                    plan: Some(plan),
                })
            }
        }
    }

    fn fimm_index(&self, graph: &InfluenceGraph, theta: &[usize], seed: u64) -> Result<RRIndex> {
        let path = self.config.snapshot_path(self.index, self.count);
        if let Some(path) = path.as_deref().filter(|p| p.exists()) {
            let index = read_snapshot(BufReader::new(File::open(path)?))
                .map_err(|e| Error::in_file(path, e))?;
            check_snapshot(&index, graph, theta).map_err(|e| Error::in_file(path, e))?;
            log::info!("loaded {} RR sets from {}", index.len(), path.display());
            return Ok(index);
        }
        let index = generate(graph, self.partition, theta, seed)?;
        if let Some(path) = path {
            save_snapshot(&path, &index)?;
        }
        Ok(index)
    }
}

fn check_snapshot(index: &RRIndex, graph: &InfluenceGraph, theta: &[usize]) -> Result<()> {
    if index.node_count() != graph.node_count() || index.theta() != theta {
        return Err(Error::Snapshot(format!(
            "snapshot has {} nodes and theta {:?}, run needs {} nodes and theta {:?}",
            index.node_count(),
            index.theta().first(),
            graph.node_count(),
            theta.first()
        )));
    }
    Ok(())
}

fn save_snapshot(path: &Path, index: &RRIndex) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_snapshot(BufWriter::new(File::create(path)?), index)
}
