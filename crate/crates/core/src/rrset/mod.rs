//! Community-stratified reverse-reachable (RR) set sampling.
//!
//! Each community `c` receives `θ_c` RR sets whose roots are drawn uniformly
//! with replacement from its members. Alongside the sets the index keeps
//! `κ[v][c]` (how many `c`-rooted sets contain `v`) and, per node, the ids of
//! the sets containing it.

mod kappa;
mod plan;
mod snapshot;

pub use kappa::CoverageCounts;
pub use plan::{compute_plan, ln_binomial, PlanParams, SamplingPlan};
pub use snapshot::{read_snapshot, write_snapshot};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{CommunityPartition, InfluenceGraph, NodeId};
use crate::rng;

/// Reverse breadth-first sample from `root`: each in-edge of a reached node
/// is tested once and followed with its probability. Returns reached nodes,
/// root first.
pub fn sample_rr_set<R: Rng>(graph: &InfluenceGraph, root: NodeId, rng: &mut R) -> Vec<NodeId> {
    let mut scratch = Scratch::new(graph.node_count());
    let mut out = Vec::new();
    scratch.sample(graph, root, rng, &mut out);
    out
}

struct Scratch {
    visited: Vec<bool>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            visited: vec![false; n],
        }
    }

    fn sample<R: Rng>(
        &mut self,
        graph: &InfluenceGraph,
        root: NodeId,
        rng: &mut R,
        out: &mut Vec<NodeId>,
    ) {
        out.clear();
        out.push(root);
        self.visited[root as usize] = true;
        let mut head = 0;
        while head < out.len() {
            let v = out[head];
            head += 1;
            let (sources, probs) = graph.in_slices(v);
            for (&u, &p) in sources.iter().zip(probs) {
                if !self.visited[u as usize] && rng.random::<f64>() < p {
                    self.visited[u as usize] = true;
                    out.push(u);
                }
            }
        }
        for &v in out.iter() {
            self.visited[v as usize] = false;
        }
    }
}

/// A corpus of RR sets with per-community coverage counters.
#[derive(Debug, Clone, PartialEq)]
pub struct RRIndex {
    node_count: usize,
    theta: Vec<usize>,
    offsets: Vec<usize>,
    members: Vec<NodeId>,
    roots: Vec<NodeId>,
    root_community: Vec<u32>,
    set_offsets: Vec<usize>,
    sets_of_node: Vec<u32>,
    kappa: CoverageCounts,
}

impl RRIndex {
    /// Assembles an index from sets grouped by community: `sets` lists
    /// `(root, sorted members)` with the first `theta[0]` rooted in community
    /// 0, the next `theta[1]` in community 1, and so on.
    pub(crate) fn from_sets(
        node_count: usize,
        theta: Vec<usize>,
        sets: Vec<(NodeId, Vec<NodeId>)>,
    ) -> Result<Self> {
        let total: usize = theta.iter().sum();
        if total != sets.len() {
            return Err(Error::param(format!(
                "{} RR sets but theta sums to {total}",
                sets.len()
            )));
        }
        if total > u32::MAX as usize {
            return Err(Error::param("more than 2^32 RR sets"));
        }
        let c = theta.len();
        let mut offsets = Vec::with_capacity(total + 1);
        offsets.push(0);
        let mut members = Vec::with_capacity(sets.iter().map(|s| s.1.len()).sum());
        let mut roots = Vec::with_capacity(total);
        let mut root_community = Vec::with_capacity(total);
        let mut kappa = CoverageCounts::new(node_count, c);
        let mut degree = vec![0usize; node_count + 1];

        let mut community = 0u32;
        let mut left = theta.first().copied().unwrap_or(0);
        for (root, set) in sets {
            while left == 0 {
                community += 1;
                left = theta[community as usize];
            }
            left -= 1;
            for &u in &set {
                if u as usize >= node_count {
                    return Err(Error::NodeOutOfRange {
                        node: u as usize,
                        node_count,
                    });
                }
                kappa.increment(u, community);
                degree[u as usize + 1] += 1;
            }
            members.extend_from_slice(&set);
            offsets.push(members.len());
            roots.push(root);
            root_community.push(community);
        }

        for i in 0..node_count {
            degree[i + 1] += degree[i];
        }
        let set_offsets = degree;
        let mut cursor = set_offsets.clone();
        let mut sets_of_node = vec![0u32; members.len()];
        for r in 0..roots.len() {
            for &u in &members[offsets[r]..offsets[r + 1]] {
                sets_of_node[cursor[u as usize]] = r as u32;
                cursor[u as usize] += 1;
            }
        }

        Ok(RRIndex {
            node_count,
            theta,
            offsets,
            members,
            roots,
            root_community,
            set_offsets,
            sets_of_node,
            kappa,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn community_count(&self) -> usize {
        self.theta.len()
    }

    /// Number of RR sets.
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn theta(&self) -> &[usize] {
        &self.theta
    }

    /// Members of set `r`, sorted ascending.
    pub fn set(&self, r: usize) -> &[NodeId] {
        &self.members[self.offsets[r]..self.offsets[r + 1]]
    }

    pub fn root(&self, r: usize) -> NodeId {
        self.roots[r]
    }

    pub fn root_community(&self, r: usize) -> u32 {
        self.root_community[r]
    }

    /// Ids of the RR sets containing `v`, ascending.
    pub fn sets_containing(&self, v: NodeId) -> &[u32] {
        &self.sets_of_node[self.set_offsets[v as usize]..self.set_offsets[v as usize + 1]]
    }

    /// Coverage counts as generated.
    pub fn kappa(&self) -> &CoverageCounts {
        &self.kappa
    }

    pub fn total_members(&self) -> usize {
        self.members.len()
    }

    /// Recounts `κ` from the stored sets, independently of generation.
    pub fn recount_kappa(&self) -> CoverageCounts {
        let mut k = CoverageCounts::new(self.node_count, self.community_count());
        for r in 0..self.len() {
            for &u in self.set(r) {
                k.increment(u, self.root_community[r]);
            }
        }
        k
    }

    /// Uncovered set counts `π_c` for a seed set, by scanning every set.
    pub fn uncovered_by_scan(&self, seeds: &[NodeId]) -> Vec<usize> {
        let mut in_seed = vec![false; self.node_count];
        for &s in seeds {
            in_seed[s as usize] = true;
        }
        let mut uncovered = self.theta.clone();
        for r in 0..self.len() {
            if self.set(r).iter().any(|&u| in_seed[u as usize]) {
                uncovered[self.root_community[r] as usize] -= 1;
            }
        }
        uncovered
    }

    /// Uncovered set counts `π_c` for a seed set, through the node→set links.
    pub fn uncovered_by_links(&self, seeds: &[NodeId]) -> Vec<usize> {
        let mut covered = vec![false; self.len()];
        let mut uncovered = self.theta.clone();
        for &s in seeds {
            for &r in self.sets_containing(s) {
                if !covered[r as usize] {
                    covered[r as usize] = true;
                    uncovered[self.root_community[r as usize] as usize] -= 1;
                }
            }
        }
        uncovered
    }
}

/// Generates `theta[c]` RR sets rooted uniformly (with replacement) in each
/// community `c`.
///
/// RR set `i` (global position) draws its root and coins from substream `i`
/// of `seed`, so the index is identical for any thread count.
pub fn generate(
    graph: &InfluenceGraph,
    partition: &CommunityPartition,
    theta: &[usize],
    seed: u64,
) -> Result<RRIndex> {
    if partition.node_count() != graph.node_count() {
        return Err(Error::param("partition and graph disagree on node count"));
    }
    if theta.len() != partition.community_count() {
        return Err(Error::param(format!(
            "{} theta values for {} communities",
            theta.len(),
            partition.community_count()
        )));
    }
    if let Some(c) = (0..theta.len()).find(|&c| partition.size(c) == 0) {
        return Err(Error::EmptyCommunity(c));
    }
    if !graph.has_all_probabilities() {
        return Err(Error::param("graph has edges without probabilities"));
    }

    let mut jobs = Vec::with_capacity(theta.iter().sum());
    for (c, &t) in theta.iter().enumerate() {
        jobs.extend(std::iter::repeat_n(c as u32, t));
    }

    let n = graph.node_count();
    let sets: Vec<(NodeId, Vec<NodeId>)> = jobs
        .par_iter()
        .enumerate()
        .map_init(
            || Scratch::new(n),
            |scratch, (i, &c)| {
                let mut rng = rng::substream(seed, i as u64);
                let members = partition.members(c as usize);
                let root = members[rng.random_range(0..members.len())];
                let mut set = Vec::new();
                scratch.sample(graph, root, &mut rng, &mut set);
                set.sort_unstable();
                (root, set)
            },
        )
        .collect();

    RRIndex::from_sets(n, theta.to_vec(), sets)
}

/// `theta` RR sets with roots uniform over all nodes (a single stratum).
pub fn generate_uniform(graph: &InfluenceGraph, theta: usize, seed: u64) -> Result<RRIndex> {
    if graph.node_count() == 0 {
        return Err(Error::EmptyCommunity(0));
    }
    generate(
        graph,
        &CommunityPartition::single(graph.node_count()),
        &[theta],
        seed,
    )
}

/// Equal allocation `θ_c = ⌈θ / C⌉`.
pub fn equal_allocation(theta: usize, communities: usize) -> Vec<usize> {
    vec![theta.div_ceil(communities.max(1)); communities]
}
