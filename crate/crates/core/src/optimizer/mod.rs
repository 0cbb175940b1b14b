//! Seed selection: the fairness-aware greedy and the comparison baselines.

mod coverage;
mod equality;
mod fimm;

pub use coverage::{imm_baseline_select, max_coverage_select};
pub use equality::{community_hd_select, community_im_select, proportional_quotas};
pub use fimm::{fimm_select, naive_greedy_select, CoverageState, FimmSelector};

use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

/// Seeds in selection order with the objective trace.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub seeds: Vec<NodeId>,
    /// Marginal gain of each seed when it was picked.
    pub gains: Vec<f64>,
    /// Objective estimate after each pick.
    pub estimates: Vec<f64>,
}
