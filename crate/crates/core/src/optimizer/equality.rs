//! Baselines that split the budget across communities in proportion to size.

use std::cmp::Reverse;

use super::coverage::imm_baseline_select;
use crate::error::{Error, Result};
use crate::graph::{CommunityPartition, InfluenceGraph, NodeId};
use crate::rng::derive_seed;

/// Largest-remainder apportionment of `k` seeds proportional to `sizes`,
/// never exceeding a community's size. Ties in the remainder go to the
/// smaller community index.
pub fn proportional_quotas(sizes: &[usize], k: usize) -> Result<Vec<usize>> {
    let total: usize = sizes.iter().sum();
    if k > total {
        return Err(Error::BudgetTooLarge {
            k,
            node_count: total,
        });
    }
    if total == 0 {
        return Ok(vec![0; sizes.len()]);
    }
    let mut quotas: Vec<usize> = sizes.iter().map(|&n| k * n / total).collect();
    let mut left = k - quotas.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&c| (Reverse(k * sizes[c] % total), c));
    while left > 0 {
        for &c in &order {
            if left == 0 {
                break;
            }
            if quotas[c] < sizes[c] {
                quotas[c] += 1;
                left -= 1;
            }
        }
    }
    Ok(quotas)
}

/// Highest out-degree nodes of each community, up to its quota. Ties go to
/// the smaller node id.
pub fn community_hd_select(
    graph: &InfluenceGraph,
    partition: &CommunityPartition,
    k: usize,
) -> Result<Vec<NodeId>> {
    check(graph, partition, k)?;
    let quotas = proportional_quotas(&partition.sizes(), k)?;
    let mut seeds = Vec::with_capacity(k);
    for (c, &quota) in quotas.iter().enumerate() {
        let mut members = partition.members(c).to_vec();
        members.sort_by_key(|&v| (Reverse(graph.out_degree(v)), v));
        seeds.extend_from_slice(&members[..quota]);
    }
    Ok(seeds)
}

/// Classical influence maximization run inside each community's induced
/// subgraph with that community's quota. Community `c` uses `theta` RR sets
/// drawn from a seed derived from `(seed, c)`.
pub fn community_im_select(
    graph: &InfluenceGraph,
    partition: &CommunityPartition,
    k: usize,
    theta: usize,
    seed: u64,
) -> Result<Vec<NodeId>> {
    check(graph, partition, k)?;
    let quotas = proportional_quotas(&partition.sizes(), k)?;
    let mut seeds = Vec::with_capacity(k);
    for (c, &quota) in quotas.iter().enumerate() {
        if quota == 0 {
            continue;
        }
        let members = partition.members(c);
        let (sub, _) = graph.induced_subgraph(members);
        let local = imm_baseline_select(&sub, theta, quota, derive_seed(seed, c as u64))?;
        seeds.extend(local.seeds.iter().map(|&u| members[u as usize]));
    }
    Ok(seeds)
}

fn check(graph: &InfluenceGraph, partition: &CommunityPartition, k: usize) -> Result<()> {
    if partition.node_count() != graph.node_count() {
        return Err(Error::param("partition and graph disagree on node count"));
    }
    if k > graph.node_count() {
        return Err(Error::BudgetTooLarge {
            k,
            node_count: graph.node_count(),
        });
    }
    Ok(())
}
