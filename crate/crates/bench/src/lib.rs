//! Fixtures shared by the benchmarks.

use fairinf::graph::{CommunityPartition, InfluenceGraph};
use fairinf::rrset::{equal_allocation, generate, RRIndex};
use fairinf::synthetic::{planted_graph, PlantedSpec};

pub const FIXTURE_SEED: u64 = 11;

/// Planted graph with the node, edge and community counts of the email network.
pub fn email_scale(p: f64) -> (InfluenceGraph, CommunityPartition) {
    planted_graph(&PlantedSpec::email_scale(p), FIXTURE_SEED).expect("valid planted spec")
}

/// Community-stratified RR index with `theta` sets in total.
pub fn stratified_index(
    graph: &InfluenceGraph,
    partition: &CommunityPartition,
    theta: usize,
) -> RRIndex {
    generate(
        graph,
        partition,
        &equal_allocation(theta, partition.community_count()),
        FIXTURE_SEED,
    )
    .expect("fixture graph is valid")
}
