//! Random graphs with planted communities, for tests and benchmarks.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{CommunityPartition, InfluenceGraph, NodeId};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedSpec {
    pub nodes: usize,
    pub edges: usize,
    pub communities: usize,
    /// Smallest community size.
    pub min_size: usize,
    /// Fraction of edges whose endpoints share a community.
    pub intra_fraction: f64,
    /// Uniform probability put on every edge.
    pub probability: f64,
}

impl PlantedSpec {
    /// Same node, edge and community counts as the pruned email network.
    pub fn email_scale(probability: f64) -> Self {
        PlantedSpec {
            nodes: 1005,
            edges: 25_571,
            communities: 42,
            min_size: 11,
            intra_fraction: 0.7,
            probability,
        }
    }
}

/// Community sizes summing to `nodes`: `min_size` each plus a Zipf-like
/// share of the rest, so a few communities are large.
pub fn skewed_sizes(nodes: usize, communities: usize, min_size: usize) -> Result<Vec<usize>> {
    if communities == 0 || communities * min_size > nodes {
        return Err(Error::param("cannot fit the communities into the nodes"));
    }
    let spare = nodes - communities * min_size;
    let weights: Vec<f64> = (0..communities).map(|c| 1.0 / (c as f64 + 1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut sizes: Vec<usize> = weights
        .iter()
        .map(|w| min_size + (spare as f64 * w / total) as usize)
        .collect();
    let mut left = nodes - sizes.iter().sum::<usize>();
    let mut c = 0;
    while left > 0 {
        sizes[c % communities] += 1;
        left -= 1;
        c += 1;
    }
    Ok(sizes)
}

/// Directed graph with exactly `spec.edges` distinct non-loop edges.
/// Sources are drawn with heavy-tailed activity, targets from the source's
/// community with probability `intra_fraction` and uniformly otherwise.
pub fn planted_graph(
    spec: &PlantedSpec,
    seed: u64,
) -> Result<(InfluenceGraph, CommunityPartition)> {
    let n = spec.nodes;
    if spec.edges > n * (n - 1) / 2 {
        return Err(Error::param(
            "too many edges requested for a sparse generator",
        ));
    }
    let sizes = skewed_sizes(n, spec.communities, spec.min_size)?;
    let mut rng = substream(seed, 0);

    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.shuffle(&mut rng);
    let mut membership = vec![0u32; n];
    let mut start = 0;
    for (c, &size) in sizes.iter().enumerate() {
        for &v in &order[start..start + size] {
            membership[v as usize] = c as u32;
        }
        start += size;
    }
    let partition = CommunityPartition::new(membership)?;

    let activity: Vec<f64> = (0..n).map(|r| 1.0 / (r as f64 + 1.0).sqrt()).collect();
    order.shuffle(&mut rng);
    let pick_source = WeightedIndex::new(&activity).expect("positive weights");

    let mut seen: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(spec.edges);
    let mut edges = Vec::with_capacity(spec.edges);
    while edges.len() < spec.edges {
        let u = order[pick_source.sample(&mut rng)];
        let v = if rng.random::<f64>() < spec.intra_fraction {
            let members = partition.members(partition.community_of(u) as usize);
            members[rng.random_range(0..members.len())]
        } else {
            rng.random_range(0..n as NodeId)
        };
        if u != v && seen.insert((u, v)) {
            edges.push((u, v, spec.probability));
        }
    }
    Ok((InfluenceGraph::from_edges(n, &edges)?, partition))
}
