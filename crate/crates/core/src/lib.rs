//! Welfare-fair influence maximization.
//!
//! The objective is `F_α(S) = Σ_c n_c · u_c(S)^α` where `u_c(S)` is the
//! expected fraction of community `c` activated by seeds `S` under the
//! independent cascade model and `α ∈ (0, 1)` controls inequality aversion.
//! Seeds are chosen greedily against an unbiased estimate of the truncated
//! Taylor expansion of `u^α`, computed from community-stratified
//! reverse-reachable sets.

pub mod diffusion;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod optimizer;
pub mod rng;
pub mod rrset;
pub mod synthetic;
pub mod welfare;

pub use diffusion::{CoinMode, EvaluationReport, MonteCarlo};
pub use error::{Error, Result};
pub use graph::{CommunityPartition, InfluenceGraph, NodeCommunities, NodeId, ProbabilityModel};
pub use optimizer::{fimm_select, Selection};
pub use rrset::{compute_plan, PlanParams, RRIndex, SamplingPlan};
pub use welfare::{EstimatorConfig, DEFAULT_Q};
