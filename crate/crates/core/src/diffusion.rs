//! Forward Independent Cascade simulation and Monte-Carlo evaluation.
//!
//! The plug-in fair influence `Σ_c n_c û_c^α` reported here is a biased
//! (upward, by Jensen) estimate of `F_α`; it is what end-of-pipeline
//! evaluation reports, not what the optimizer maximizes.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CommunityPartition, InfluenceGraph, NodeId};
use crate::rng;

/// Source of live-edge coin flips. Each edge is asked about at most once per
/// simulation.
pub trait EdgeCoins {
    fn is_live(&mut self, edge: usize, probability: f64) -> bool;
}

/// Coins drawn sequentially from an RNG, in traversal order.
pub struct StreamCoins<R>(pub R);

impl<R: Rng> EdgeCoins for StreamCoins<R> {
    #[inline]
    fn is_live(&mut self, _edge: usize, probability: f64) -> bool {
        self.0.random::<f64>() < probability
    }
}

/// Coins fixed per `(seed, simulation, edge)`: two runs with the same key
/// see the same live-edge graph whatever their seed sets.
#[derive(Debug, Clone, Copy)]
pub struct KeyedCoins {
    pub seed: u64,
    pub simulation: u64,
}

impl EdgeCoins for KeyedCoins {
    #[inline]
    fn is_live(&mut self, edge: usize, probability: f64) -> bool {
        rng::keyed_uniform(self.seed, self.simulation, edge as u64) < probability
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoinMode {
    /// Per-simulation ChaCha substreams.
    Independent,
    /// Common random numbers keyed by (simulation, edge).
    #[default]
    Coupled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffusionOutcome {
    /// Activated nodes in activation order; seeds first.
    pub activated: Vec<NodeId>,
}

impl DiffusionOutcome {
    pub fn per_community(&self, partition: &CommunityPartition) -> Vec<usize> {
        let mut counts = vec![0; partition.community_count()];
        for &v in &self.activated {
            counts[partition.community_of(v) as usize] += 1;
        }
        counts
    }
}

/// Runs one cascade from `seeds`: every newly activated node tries each of
/// its out-edges once.
pub fn simulate_ic<C: EdgeCoins>(
    graph: &InfluenceGraph,
    seeds: &[NodeId],
    coins: &mut C,
) -> DiffusionOutcome {
    let mut active = vec![false; graph.node_count()];
    let mut activated = Vec::new();
    cascade(graph, seeds, coins, &mut active, &mut activated);
    DiffusionOutcome { activated }
}

/// Breadth-first cascade into `order`; `active` must be all false on entry
/// and is all false again on return.
fn cascade<C: EdgeCoins>(
    graph: &InfluenceGraph,
    seeds: &[NodeId],
    coins: &mut C,
    active: &mut [bool],
    order: &mut Vec<NodeId>,
) {
    order.clear();
    for &s in seeds {
        if !active[s as usize] {
            active[s as usize] = true;
            order.push(s);
        }
    }
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        let base = graph.out_edge_range(u).start;
        let (targets, probs) = graph.out_slices(u);
        for (i, (&v, &p)) in targets.iter().zip(probs).enumerate() {
            if !active[v as usize] && coins.is_live(base + i, p) {
                active[v as usize] = true;
                order.push(v);
            }
        }
    }
    for &v in order.iter() {
        active[v as usize] = false;
    }
}

/// Monte-Carlo estimate of spread and community utilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub sigma_hat: f64,
    /// Standard error of `sigma_hat`.
    pub sigma_std_error: f64,
    /// Mean activated fraction per community.
    pub u_hat: Vec<f64>,
    pub u_std_error: Vec<f64>,
    pub community_sizes: Vec<usize>,
    pub alpha: f64,
    /// `Σ_c n_c û_c^α`.
    pub fair_influence_plug_in: f64,
    pub num_sims: usize,
    pub seed: u64,
}

impl EvaluationReport {
    /// Plug-in fair influence at another `α`, from the same simulations.
    pub fn fair_influence_at(&self, alpha: f64) -> f64 {
        plug_in_fair_influence(&self.u_hat, &self.community_sizes, alpha)
    }
}

pub fn plug_in_fair_influence(utilities: &[f64], sizes: &[usize], alpha: f64) -> f64 {
    utilities
        .iter()
        .zip(sizes)
        .map(|(&u, &n)| n as f64 * u.powf(alpha))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub num_sims: usize,
    pub seed: u64,
    pub coins: CoinMode,
}

impl MonteCarlo {
    pub fn new(num_sims: usize, seed: u64) -> Self {
        MonteCarlo {
            num_sims,
            seed,
            coins: CoinMode::Coupled,
        }
    }

    pub fn with_coins(mut self, coins: CoinMode) -> Self {
        self.coins = coins;
        self
    }

    /// Activated count per community for simulation `index`.
    pub fn simulate_one(
        &self,
        graph: &InfluenceGraph,
        seeds: &[NodeId],
        index: u64,
    ) -> DiffusionOutcome {
        match self.coins {
            CoinMode::Coupled => simulate_ic(
                graph,
                seeds,
                &mut KeyedCoins {
                    seed: self.seed,
                    simulation: index,
                },
            ),
            CoinMode::Independent => simulate_ic(
                graph,
                seeds,
                &mut StreamCoins(rng::substream(self.seed, index)),
            ),
        }
    }

    pub fn estimate(
        &self,
        graph: &InfluenceGraph,
        partition: &CommunityPartition,
        seeds: &[NodeId],
        alpha: f64,
    ) -> Result<EvaluationReport> {
        if self.num_sims == 0 {
            return Err(Error::param("num_sims must be at least 1"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if partition.node_count() != graph.node_count() {
            return Err(Error::param("partition and graph disagree on node count"));
        }
        for &s in seeds {
            if s as usize >= graph.node_count() {
                return Err(Error::NodeOutOfRange {
                    node: s as usize,
                    node_count: graph.node_count(),
                });
            }
        }

        let c = partition.community_count();
        let n = graph.node_count();
        let membership = partition.membership();
        let (seed, mode) = (self.seed, self.coins);

        // Integer accumulators make the reduction independent of the split.
        let acc = (0..self.num_sims as u64)
            .into_par_iter()
            .fold(
                || Accumulator::new(c, n),
                |mut acc, sim| {
                    match mode {
                        CoinMode::Coupled => {
                            let mut coins = KeyedCoins {
                                seed,
                                simulation: sim,
                            };
                            cascade(graph, seeds, &mut coins, &mut acc.active, &mut acc.order);
                        }
                        CoinMode::Independent => {
                            let mut coins = StreamCoins(rng::substream(seed, sim));
                            cascade(graph, seeds, &mut coins, &mut acc.active, &mut acc.order);
                        }
                    }
                    acc.record(membership);
                    acc
                },
            )
            .reduce(|| Accumulator::new(c, 0), Accumulator::merge);

        let sims = self.num_sims as f64;
        let sizes = partition.sizes();
        let sigma_hat = acc.total as f64 / sims;
        let sigma_std_error = std_error(acc.total as f64, acc.total_sq as f64, sims);
        let u_hat: Vec<f64> = acc
            .counts
            .iter()
            .zip(&sizes)
            .map(|(&k, &nc)| k as f64 / (sims * nc as f64))
            .collect();
        let u_std_error = acc
            .counts
            .iter()
            .zip(&acc.counts_sq)
            .zip(&sizes)
            .map(|((&k, &k2), &nc)| std_error(k as f64, k2 as f64, sims) / nc as f64)
            .collect();
        let fair = plug_in_fair_influence(&u_hat, &sizes, alpha);
        Ok(EvaluationReport {
            sigma_hat,
            sigma_std_error,
            u_hat,
            u_std_error,
            community_sizes: sizes,
            alpha,
            fair_influence_plug_in: fair,
            num_sims: self.num_sims,
            seed: self.seed,
        })
    }
}

fn std_error(sum: f64, sum_sq: f64, n: f64) -> f64 {
    if n < 2.0 {
        return 0.0;
    }
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    (var / n).sqrt()
}

struct Accumulator {
    counts: Vec<u64>,
    counts_sq: Vec<u64>,
    total: u64,
    total_sq: u64,
    scratch: Vec<u64>,
    active: Vec<bool>,
    order: Vec<NodeId>,
}

impl Accumulator {
    fn new(c: usize, n: usize) -> Self {
        Accumulator {
            counts: vec![0; c],
            counts_sq: vec![0; c],
            total: 0,
            total_sq: 0,
            scratch: vec![0; c],
            active: vec![false; n],
            order: Vec::new(),
        }
    }

    fn record(&mut self, membership: &[u32]) {
        let k = self.order.len() as u64;
        self.total += k;
        self.total_sq += k * k;
        for &v in &self.order {
            self.scratch[membership[v as usize] as usize] += 1;
        }
        for (i, x) in self.scratch.iter_mut().enumerate() {
            if *x > 0 {
                self.counts[i] += *x;
                self.counts_sq[i] += *x * *x;
                *x = 0;
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for i in 0..self.counts.len() {
            self.counts[i] += other.counts[i];
            self.counts_sq[i] += other.counts_sq[i];
        }
        self.total += other.total;
        self.total_sq += other.total_sq;
        self
    }
}

pub const MAX_EXACT_EDGES: usize = 20;

/// Exact community utilities `u_c(S)` by enumerating all `2^|E|` live-edge
/// graphs.
pub fn exact_utilities_small(
    graph: &InfluenceGraph,
    partition: &CommunityPartition,
    seeds: &[NodeId],
) -> Result<Vec<f64>> {
    let edges: Vec<(NodeId, NodeId, f64)> = graph
        .edges()
        .map(|(u, v, p)| {
            p.map(|p| (u, v, p)).ok_or(Error::MissingProbability {
                source_id: graph.original_id(u),
                target_id: graph.original_id(v),
            })
        })
        .collect::<Result<_>>()?;
    let m = edges.len();
    if m > MAX_EXACT_EDGES {
        return Err(Error::TooManyEdges {
            edges: m,
            max: MAX_EXACT_EDGES,
        });
    }
    let n = graph.node_count();
    let c = partition.community_count();
    let mut expected = vec![0.0; c];
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut active = vec![false; n];
    let mut queue = Vec::with_capacity(n);

    for mask in 0u32..(1u32 << m) {
        let mut weight = 1.0;
        for list in adj.iter_mut() {
            list.clear();
        }
        for (i, &(u, v, p)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                weight *= p;
                adj[u as usize].push(v);
            } else {
                weight *= 1.0 - p;
            }
        }
        if weight == 0.0 {
            continue;
        }
        queue.clear();
        for &s in seeds {
            if !active[s as usize] {
                active[s as usize] = true;
                queue.push(s);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &v in &adj[u as usize] {
                if !active[v as usize] {
                    active[v as usize] = true;
                    queue.push(v);
                }
            }
        }
        for &v in &queue {
            expected[partition.community_of(v) as usize] += weight;
            active[v as usize] = false;
        }
    }
    Ok(expected
        .iter()
        .enumerate()
        .map(|(i, &e)| e / partition.size(i) as f64)
        .collect())
}

/// Exact `F_α(S) = Σ_c n_c u_c(S)^α` by live-edge enumeration.
pub fn exact_fair_influence_small(
    graph: &InfluenceGraph,
    partition: &CommunityPartition,
    seeds: &[NodeId],
    alpha: f64,
) -> Result<f64> {
    let u = exact_utilities_small(graph, partition, seeds)?;
    Ok(plug_in_fair_influence(&u, &partition.sizes(), alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(p: f64) -> InfluenceGraph {
        InfluenceGraph::from_edges(3, &[(0, 1, p), (1, 2, p)]).unwrap()
    }

    #[test]
    fn zero_probability_activates_only_seeds() {
        let g = path(0.0);
        let out = simulate_ic(&g, &[1], &mut StreamCoins(rng::substream(1, 0)));
        assert_eq!(out.activated, vec![1]);
    }

    #[test]
    fn unit_probability_reaches_everything_downstream() {
        let g = path(1.0);
        let out = simulate_ic(
            &g,
            &[0],
            &mut KeyedCoins {
                seed: 3,
                simulation: 0,
            },
        );
        assert_eq!(out.activated, vec![0, 1, 2]);
        let out = simulate_ic(
            &g,
            &[1],
            &mut KeyedCoins {
                seed: 3,
                simulation: 0,
            },
        );
        assert_eq!(out.activated, vec![1, 2]);
    }

    #[test]
    fn all_seeds_give_full_utilities() {
        let g = path(0.3);
        let part = CommunityPartition::new(vec![0, 0, 1]).unwrap();
        let r = MonteCarlo::new(50, 9)
            .estimate(&g, &part, &[0, 1, 2], 0.5)
            .unwrap();
        assert_eq!(r.sigma_hat, 3.0);
        assert_eq!(r.u_hat, vec![1.0, 1.0]);
        assert_eq!(r.fair_influence_plug_in, 3.0);
    }

    #[test]
    fn isolated_seed_utility() {
        let g = path(0.0);
        let part = CommunityPartition::new(vec![0, 0, 1]).unwrap();
        let r = MonteCarlo::new(10, 1)
            .estimate(&g, &part, &[0], 0.5)
            .unwrap();
        assert_eq!(r.u_hat, vec![0.5, 0.0]);
    }

    #[test]
    fn two_node_spread_converges() {
        let g = InfluenceGraph::from_edges(2, &[(0, 1, 0.5)]).unwrap();
        let part = CommunityPartition::single(2);
        for mode in [CoinMode::Coupled, CoinMode::Independent] {
            let r = MonteCarlo::new(10_000, 42)
                .with_coins(mode)
                .estimate(&g, &part, &[0], 0.5)
                .unwrap();
            assert!(
                (r.sigma_hat - 1.5).abs() < 0.05,
                "{mode:?}: {}",
                r.sigma_hat
            );
            let decomposed: f64 = r
                .u_hat
                .iter()
                .zip(&r.community_sizes)
                .map(|(u, &n)| u * n as f64)
                .sum();
            assert!((decomposed - r.sigma_hat).abs() < 1e-9);
        }
    }

    #[test]
    fn estimate_is_reproducible_across_thread_counts() {
        let g =
            InfluenceGraph::from_edges(4, &[(0, 1, 0.4), (1, 2, 0.4), (2, 3, 0.4), (0, 3, 0.2)])
                .unwrap();
        let part = CommunityPartition::new(vec![0, 0, 1, 1]).unwrap();
        for mode in [CoinMode::Coupled, CoinMode::Independent] {
            let mc = MonteCarlo::new(2000, 5).with_coins(mode);
            let one = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap();
            let four = rayon::ThreadPoolBuilder::new()
                .num_threads(4)
                .build()
                .unwrap();
            let a = one.install(|| mc.estimate(&g, &part, &[0], 0.5).unwrap());
            let b = four.install(|| mc.estimate(&g, &part, &[0], 0.5).unwrap());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn coupled_runs_are_monotone_per_simulation() {
        let g = InfluenceGraph::from_edges(
            6,
            &[
                (0, 1, 0.5),
                (1, 2, 0.5),
                (2, 3, 0.5),
                (3, 4, 0.5),
                (4, 5, 0.5),
                (5, 0, 0.5),
                (0, 3, 0.3),
            ],
        )
        .unwrap();
        let mc = MonteCarlo::new(1, 77);
        for sim in 0..500 {
            let small = mc.simulate_one(&g, &[0], sim).activated.len();
            let big = mc.simulate_one(&g, &[0, 4], sim).activated.len();
            assert!(big >= small);
        }
    }

    #[test]
    fn exact_single_edge() {
        let q = 0.3;
        let g = InfluenceGraph::from_edges(2, &[(0, 1, q)]).unwrap();
        let part = CommunityPartition::single(2);
        for &alpha in &[0.2, 0.5, 0.8] {
            let f = exact_fair_influence_small(&g, &part, &[0], alpha).unwrap();
            assert!((f - 2.0 * ((1.0 + q) / 2.0).powf(alpha)).abs() < 1e-12);
        }
        assert_eq!(
            exact_fair_influence_small(&g, &part, &[], 0.5).unwrap(),
            0.0
        );
    }

    #[test]
    fn exact_matches_single_simulation_when_deterministic() {
        let g = InfluenceGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (3, 2, 1.0)]).unwrap();
        let part = CommunityPartition::new(vec![0, 1, 1, 0]).unwrap();
        let exact = exact_fair_influence_small(&g, &part, &[0], 0.4).unwrap();
        let mc = MonteCarlo::new(1, 0)
            .estimate(&g, &part, &[0], 0.4)
            .unwrap();
        assert!((exact - mc.fair_influence_plug_in).abs() < 1e-12);
    }

    #[test]
    fn exact_rejects_large_graphs() {
        let edges: Vec<_> = (0..21u32).map(|i| (i, i + 1, 0.5)).collect();
        let g = InfluenceGraph::from_edges(22, &edges).unwrap();
        let part = CommunityPartition::single(22);
        assert!(matches!(
            exact_utilities_small(&g, &part, &[0]),
            Err(Error::TooManyEdges { .. })
        ));
    }
}
