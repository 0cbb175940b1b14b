#![allow(dead_code)]

use fairinf::graph::{CommunityPartition, InfluenceGraph, NodeId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed graph without self-loops or duplicate edges.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    p_range: (f64, f64),
) -> InfluenceGraph {
    let mut pairs: Vec<(NodeId, NodeId)> = (0..n as NodeId)
        .flat_map(|u| {
            (0..n as NodeId)
                .filter(move |&v| v != u)
                .map(move |v| (u, v))
        })
        .collect();
    pairs.shuffle(rng);
    let edges: Vec<_> = pairs
        .into_iter()
        .take(m)
        .map(|(u, v)| (u, v, rng.random_range(p_range.0..=p_range.1)))
        .collect();
    InfluenceGraph::from_edges(n, &edges).unwrap()
}

/// Random partition of `n` nodes into `c` nonempty communities.
pub fn random_partition<R: Rng>(rng: &mut R, n: usize, c: usize) -> CommunityPartition {
    assert!(c <= n);
    let mut membership: Vec<u32> = (0..n)
        .map(|i| {
            if i < c {
                i as u32
            } else {
                rng.random_range(0..c as u32)
            }
        })
        .collect();
    membership.shuffle(rng);
    CommunityPartition::new(membership).unwrap()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<NodeId>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v as NodeId);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}
