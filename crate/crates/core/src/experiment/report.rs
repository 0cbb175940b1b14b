use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Method};
use crate::error::Result;
use crate::rrset::SamplingPlan;

/// Price of fairness `(σ_I − σ_F) / (σ_I − k)`; `None` when `σ_I ≤ k`.
pub fn compute_pof(sigma_imm: f64, sigma_fair: f64, k: usize) -> Option<f64> {
    let denom = sigma_imm - k as f64;
    if denom > 0.0 && sigma_fair.is_finite() {
        Some((sigma_imm - sigma_fair) / denom)
    } else {
        None
    }
}

/// Effect of fairness `((F_F − F_I) / (F_I − k))^α`; `None` when the fair
/// solution is worse or `F_I ≤ k`.
pub fn compute_eof(f_fair: f64, f_imm: f64, k: usize, alpha: f64) -> Option<f64> {
    let denom = f_imm - k as f64;
    let diff = f_fair - f_imm;
    if denom > 0.0 && diff >= 0.0 && diff.is_finite() {
        Some((diff / denom).powf(alpha))
    } else {
        None
    }
}

/// Wall-clock seconds spent on each stage of one method.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub rr_generation: f64,
    pub selection: f64,
    pub evaluation: f64,
}

/// One method at one `(α, k, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: Method,
    pub alpha: f64,
    pub k: usize,
    /// Uniform edge probability, or `None` for other models.
    pub p: Option<f64>,
    /// Seeds as ids of the input file, in selection order.
    pub seeds: Vec<u64>,
    pub sigma_hat: f64,
    pub sigma_std_error: f64,
    pub u_hat: Vec<f64>,
    pub fair_influence: f64,
    pub pof: Option<f64>,
    pub eof: Option<f64>,
    /// Objective estimate after each pick (FIMM only).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub estimate_trace: Vec<f64>,
    pub timings: Timings,
}

/// A combination that could not be completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub method: Option<Method>,
    pub alpha: Option<f64>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub communities: usize,
    pub community_labels: Vec<u64>,
    pub community_sizes: Vec<usize>,
}

/// RR budget used for one probability setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetSummary {
    pub p: Option<f64>,
    pub theta_total: usize,
    pub theta_per_community: usize,
    pub plan: Option<SamplingPlan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub config: ExperimentConfig,
    pub graph: GraphSummary,
    pub budgets: Vec<BudgetSummary>,
    pub rows: Vec<MethodRow>,
    pub failures: Vec<Failure>,
}

/// Flat row of the CSV output. Timings are left out so that reruns produce
/// identical files.
#[derive(Debug, Serialize)]
struct CsvRow {
    method: Method,
    alpha: f64,
    k: usize,
    p: Option<f64>,
    sigma_hat: f64,
    sigma_std_error: f64,
    fair_influence: f64,
    pof: Option<f64>,
    eof: Option<f64>,
    num_seeds: usize,
}

impl FairnessReport {
    pub fn row(&self, method: Method, alpha: f64, k: usize, p: Option<f64>) -> Option<&MethodRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.alpha == alpha && r.k == k && r.p == p)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(CsvRow {
                method: r.method,
                alpha: r.alpha,
                k: r.k,
                p: r.p,
                sigma_hat: r.sigma_hat,
                sigma_std_error: r.sigma_std_error,
                fair_influence: r.fair_influence,
                pof: r.pof,
                eof: r.eof,
                num_seeds: r.seeds.len(),
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// Writes `results.csv` and `report.json` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(BufWriter::new(File::create(dir.join("results.csv"))?))?;
        let mut json = BufWriter::new(File::create(dir.join("report.json"))?);
        self.write_json(&mut json)?;
        json.write_all(b"\n")?;
        json.flush()?;
        Ok(())
    }
}
