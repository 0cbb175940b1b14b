use std::f64::consts::E;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Inputs to the RR-set budget calculation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanParams {
    /// Accuracy `ε`.
    pub epsilon: f64,
    /// Confidence exponent `ℓ`: failure probability at most `1/n^ℓ`.
    pub ell: f64,
    pub k: usize,
    pub q: usize,
    pub alpha: f64,
    /// Assumed bound on the largest community utility of the optimum.
    pub b: f64,
    /// Assumed bound on the largest community utility of any solution.
    pub b0: f64,
}

impl PlanParams {
    /// Conservative default for the utility bounds when none is supplied.
    pub const DEFAULT_UTILITY_BOUND: f64 = 0.9;
}

/// Every quantity of the RR-set budget, kept for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub params: PlanParams,
    pub node_count: usize,
    pub communities: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// Total RR sets, `⌈C · max(θ₁, θ₂)⌉`.
    pub theta: usize,
    /// Per-community allocation `⌈θ / C⌉`.
    pub theta_per_community: usize,
}

/// `ln C(n, k)` through log-gamma.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Computes the RR-set budget that makes the greedy selection a
/// `(1 − 1/e − ε)`-approximation with probability at least `1 − 1/n^ℓ`.
///
/// The guarantee behind these formulas is only established for `α ≤ 1/2`;
/// for larger `α` the same formulas are applied unchanged.
pub fn compute_plan(
    params: PlanParams,
    node_count: usize,
    communities: usize,
) -> Result<SamplingPlan> {
    let PlanParams {
        epsilon,
        ell,
        k,
        q,
        alpha,
        b,
        b0,
    } = params;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if ell.is_nan() || ell <= 0.0 {
        return Err(Error::param(format!("ell must be positive, got {ell}")));
    }
    if q < 2 {
        return Err(Error::param("Q must be at least 2"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    for (name, v) in [("b", b), ("b0", b0)] {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::param(format!("{name} must lie in [0, 1), got {v}")));
        }
    }
    if node_count == 0 || communities == 0 {
        return Err(Error::param("empty graph or partition"));
    }
    if k == 0 || k > node_count {
        return Err(Error::BudgetTooLarge { k, node_count });
    }

    let n = node_count as f64;
    let c = communities as f64;
    let qf = q as f64;
    let ln_choose = ln_binomial(node_count, k);

    let delta = 1.0 / (2.0 * n.powf(ell));
    let tau1 = (c.ln() + ell * n.ln() + 2f64.ln()).sqrt();
    let tau2 = (tau1 * tau1 + ln_choose).sqrt();
    let scale = E / (E - 1.0);
    let (a1, a2) = (3f64.sqrt() * tau1, 2f64.sqrt() * tau2);
    let epsilon1 = epsilon * scale * a1 / (a1 + a2);
    let epsilon2 = scale * epsilon - epsilon1;
    if epsilon2 <= 0.0 {
        return Err(Error::param("epsilon2 is not positive"));
    }

    let theta1 = 12.0 * qf * qf * (c / delta).ln() / (epsilon1 * epsilon1 * (1.0 - b));
    let theta2 =
        8.0 * qf * qf * (c.ln() + ln_choose - delta.ln()) / (epsilon2 * epsilon2 * (1.0 - b0));
    let theta = (c * theta1.max(theta2)).ceil() as usize;
    let theta_per_community = theta.div_ceil(communities);

    Ok(SamplingPlan {
        params,
        node_count,
        communities,
        delta1: delta,
        delta2: delta,
        tau1,
        tau2,
        epsilon1,
        epsilon2,
        theta1,
        theta2,
        theta,
        theta_per_community,
    })
}
