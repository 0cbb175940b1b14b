use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::Selection;
use crate::error::{Error, Result};
use crate::graph::{CommunityPartition, NodeId};
use crate::rrset::{CoverageCounts, RRIndex};
use crate::welfare::{fair_influence_estimate, marginal_gain, CommunityCoverage, EstimatorConfig};

/// Mutable state of a greedy selection over an [`RRIndex`].
///
/// `covered[c]` counts `c`-rooted sets hit by the seeds; `kappa[v][c]` counts
/// `c`-rooted sets that contain `v` and are not yet hit (zero for selected
/// nodes).
#[derive(Debug, Clone)]
pub struct CoverageState {
    covered: Vec<usize>,
    kappa: CoverageCounts,
    covered_sets: Vec<bool>,
    selected: Vec<NodeId>,
    is_selected: Vec<bool>,
}

impl CoverageState {
    pub fn new(index: &RRIndex) -> Self {
        CoverageState {
            covered: vec![0; index.community_count()],
            kappa: index.kappa().clone(),
            covered_sets: vec![false; index.len()],
            selected: Vec::new(),
            is_selected: vec![false; index.node_count()],
        }
    }

    pub fn covered_counts(&self) -> &[usize] {
        &self.covered
    }

    pub fn residual_kappa(&self) -> &CoverageCounts {
        &self.kappa
    }

    pub fn is_set_covered(&self, r: usize) -> bool {
        self.covered_sets[r]
    }

    pub fn selected(&self) -> &[NodeId] {
        &self.selected
    }

    pub fn is_selected(&self, v: NodeId) -> bool {
        self.is_selected[v as usize]
    }

    /// Adds `v` to the seeds; returns the communities whose coverage changed.
    fn commit(&mut self, index: &RRIndex, v: NodeId) -> Vec<u32> {
        let changed: Vec<(u32, u32)> = self.kappa.nonzero(v).collect();
        for &(c, k) in &changed {
            self.covered[c as usize] += k as usize;
        }
        for &r in index.sets_containing(v) {
            let r = r as usize;
            if self.covered_sets[r] {
                continue;
            }
            self.covered_sets[r] = true;
            let c = index.root_community(r);
            for &u in index.set(r) {
                self.kappa.decrement(u, c);
            }
        }
        self.selected.push(v);
        self.is_selected[v as usize] = true;
        changed.into_iter().map(|(c, _)| c).collect()
    }

    fn coverages(&self, index: &RRIndex, sizes: &[usize]) -> Vec<CommunityCoverage> {
        index
            .theta()
            .iter()
            .zip(&self.covered)
            .zip(sizes)
            .map(|((&theta, &cov), &size)| CommunityCoverage {
                theta,
                uncovered: theta - cov,
                size,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    node: NodeId,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Larger gain first, then smaller node id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Lazy-greedy maximizer of the RR-set fair-influence estimate.
///
/// Cached gains are upper bounds (the estimate is submodular), so a popped
/// node whose gain was computed in the current round is the true argmax.
/// Stale pops are recomputed and pushed back, one at a time.
pub struct FimmSelector<'a> {
    index: &'a RRIndex,
    config: &'a EstimatorConfig,
    sizes: Vec<usize>,
    state: CoverageState,
    heap: BinaryHeap<Candidate>,
    fresh_in_round: Vec<usize>,
    round: usize,
    /// `residual(θ_c − φ_c, θ_c)` for the current `φ`.
    residual_now: Vec<f64>,
}

impl<'a> FimmSelector<'a> {
    pub fn new(
        index: &'a RRIndex,
        partition: &CommunityPartition,
        config: &'a EstimatorConfig,
    ) -> Result<Self> {
        check_inputs(index, partition, config)?;
        let sizes = partition.sizes();
        let residual_now = index
            .theta()
            .iter()
            .map(|&t| config.residual(t, t))
            .collect();
        let mut sel = FimmSelector {
            index,
            config,
            sizes,
            state: CoverageState::new(index),
            heap: BinaryHeap::with_capacity(index.node_count()),
            fresh_in_round: vec![0; index.node_count()],
            round: 0,
            residual_now,
        };
        let initial: Vec<Candidate> = (0..index.node_count() as NodeId)
            .map(|v| Candidate {
                gain: sel.gain(v),
                node: v,
            })
            .collect();
        sel.heap = BinaryHeap::from(initial);
        Ok(sel)
    }

    /// Marginal gain of `v` against the current state.
    pub fn gain(&self, v: NodeId) -> f64 {
        let mut gain = 0.0;
        for (c, k) in self.state.kappa.nonzero(v) {
            let c = c as usize;
            let theta = self.index.theta()[c];
            let after = self
                .config
                .residual(theta - self.state.covered[c] - k as usize, theta);
            gain += self
                .config
                .gain_term(self.sizes[c], self.residual_now[c], after);
        }
        gain
    }

    pub fn state(&self) -> &CoverageState {
        &self.state
    }

    /// Current value of the estimator for the selected seeds.
    pub fn estimate(&self) -> f64 {
        fair_influence_estimate(&self.state.coverages(self.index, &self.sizes), self.config)
            .expect("theta checked at construction")
    }

    /// Selects the next seed and returns it with its marginal gain.
    pub fn next_seed(&mut self) -> Option<(NodeId, f64)> {
        loop {
            let top = self.heap.pop()?;
            let v = top.node;
            if self.fresh_in_round[v as usize] == self.round {
                let changed = self.state.commit(self.index, v);
                for c in changed {
                    let c = c as usize;
                    let theta = self.index.theta()[c];
                    self.residual_now[c] =
                        self.config.residual(theta - self.state.covered[c], theta);
                }
                self.round += 1;
                return Some((v, top.gain));
            }
            self.fresh_in_round[v as usize] = self.round;
            self.heap.push(Candidate {
                gain: self.gain(v),
                node: v,
            });
        }
    }
}

fn check_inputs(
    index: &RRIndex,
    partition: &CommunityPartition,
    config: &EstimatorConfig,
) -> Result<()> {
    if partition.node_count() != index.node_count()
        || partition.community_count() != index.community_count()
    {
        return Err(Error::param(
            "RR index and partition describe different graphs",
        ));
    }
    for (c, &theta) in index.theta().iter().enumerate() {
        if theta < config.q() {
            return Err(Error::TooFewSamples {
                community: c,
                theta,
                q: config.q(),
            });
        }
    }
    Ok(())
}

/// Greedy seed selection maximizing the RR-set fair-influence estimate, with
/// lazy gain updates. Ties go to the smallest node id.
pub fn fimm_select(
    index: &RRIndex,
    partition: &CommunityPartition,
    k: usize,
    config: &EstimatorConfig,
) -> Result<Selection> {
    if k > index.node_count() {
        return Err(Error::BudgetTooLarge {
            k,
            node_count: index.node_count(),
        });
    }
    let mut selector = FimmSelector::new(index, partition, config)?;
    let mut out = Selection::default();
    for _ in 0..k {
        let (v, gain) = selector.next_seed().expect("k <= n");
        out.seeds.push(v);
        out.gains.push(gain);
        out.estimates.push(selector.estimate());
    }
    Ok(out)
}

/// Reference greedy: every round recomputes coverage and every gain from the
/// raw RR sets. Same contract and tie-breaking as [`fimm_select`].
pub fn naive_greedy_select(
    index: &RRIndex,
    partition: &CommunityPartition,
    k: usize,
    config: &EstimatorConfig,
) -> Result<Selection> {
    if k > index.node_count() {
        return Err(Error::BudgetTooLarge {
            k,
            node_count: index.node_count(),
        });
    }
    check_inputs(index, partition, config)?;
    let n = index.node_count();
    let c = index.community_count();
    let sizes = partition.sizes();
    let theta = index.theta().to_vec();
    let mut seeds: Vec<NodeId> = Vec::new();
    let mut in_seed = vec![false; n];
    let mut out = Selection::default();

    for _ in 0..k {
        let covered_sets: Vec<bool> = (0..index.len())
            .map(|r| index.set(r).iter().any(|&u| in_seed[u as usize]))
            .collect();
        let mut covered = vec![0usize; c];
        for r in (0..index.len()).filter(|&r| covered_sets[r]) {
            covered[index.root_community(r) as usize] += 1;
        }

        let mut best: Option<(f64, NodeId)> = None;
        let mut kappa = vec![0usize; c];
        for v in (0..n as NodeId).filter(|&v| !in_seed[v as usize]) {
            kappa.fill(0);
            for &r in index.sets_containing(v) {
                if !covered_sets[r as usize] {
                    kappa[index.root_community(r as usize) as usize] += 1;
                }
            }
            let gain = marginal_gain(&theta, &covered, &kappa, &sizes, config)?;
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, v));
            }
        }
        let (gain, v) = best.expect("k <= n leaves a candidate");
        seeds.push(v);
        in_seed[v as usize] = true;

        let uncovered = index.uncovered_by_scan(&seeds);
        let coverages: Vec<CommunityCoverage> = (0..c)
            .map(|i| CommunityCoverage {
                theta: theta[i],
                uncovered: uncovered[i],
                size: sizes[i],
            })
            .collect();
        out.seeds.push(v);
        out.gains.push(gain);
        out.estimates
            .push(fair_influence_estimate(&coverages, config)?);
    }
    Ok(out)
}
