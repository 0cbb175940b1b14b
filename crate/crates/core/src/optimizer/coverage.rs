use std::collections::BinaryHeap;

use super::Selection;
use crate::error::{Error, Result};
use crate::graph::{InfluenceGraph, NodeId};
use crate::rrset::{generate_uniform, RRIndex};

/// Lazy greedy maximum coverage over every set of `index`, ignoring
/// communities. `gains` holds covered-set increments and `estimates` the
/// spread estimate `n · covered / len` after each pick.
pub fn max_coverage_select(index: &RRIndex, k: usize) -> Result<Selection> {
    let n = index.node_count();
    if k > n {
        return Err(Error::BudgetTooLarge { k, node_count: n });
    }
    let mut count: Vec<usize> = (0..n as NodeId)
        .map(|v| index.sets_containing(v).len())
        .collect();
    // (count, reverse id): larger count first, then smaller id
    let mut heap: BinaryHeap<(usize, std::cmp::Reverse<NodeId>)> = (0..n as NodeId)
        .map(|v| (count[v as usize], std::cmp::Reverse(v)))
        .collect();
    let mut covered_sets = vec![false; index.len()];
    let mut selected = vec![false; n];
    let mut covered = 0usize;
    let mut out = Selection::default();

    while out.seeds.len() < k {
        let (cached, std::cmp::Reverse(v)) = heap.pop().expect("k <= n");
        if selected[v as usize] {
            continue;
        }
        if cached != count[v as usize] {
            heap.push((count[v as usize], std::cmp::Reverse(v)));
            continue;
        }
        selected[v as usize] = true;
        for &r in index.sets_containing(v) {
            if !covered_sets[r as usize] {
                covered_sets[r as usize] = true;
                for &u in index.set(r as usize) {
                    count[u as usize] -= 1;
                }
            }
        }
        covered += cached;
        out.seeds.push(v);
        out.gains.push(cached as f64);
        let spread = if index.is_empty() {
            0.0
        } else {
            n as f64 * covered as f64 / index.len() as f64
        };
        out.estimates.push(spread);
    }
    Ok(out)
}

/// Classical influence maximization: `theta` uniformly rooted RR sets, then
/// maximum coverage.
pub fn imm_baseline_select(
    graph: &InfluenceGraph,
    theta: usize,
    k: usize,
    seed: u64,
) -> Result<Selection> {
    if k > graph.node_count() {
        return Err(Error::BudgetTooLarge {
            k,
            node_count: graph.node_count(),
        });
    }
    let index = generate_uniform(graph, theta, seed)?;
    max_coverage_select(&index, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_coverage_order() {
        let sets = vec![
            (0, vec![0, 1]),
            (1, vec![1, 2]),
            (2, vec![2]),
            (3, vec![3]),
            (3, vec![3]),
        ];
        let idx = RRIndex::from_sets(4, vec![5], sets).unwrap();
        let sel = max_coverage_select(&idx, 3).unwrap();
        // 1, 2, 3 each touch two sets; smallest id first, then 3 (two fresh
        // sets) beats 2 (one fresh set)
        assert_eq!(sel.seeds, vec![1, 3, 2]);
        assert_eq!(sel.gains, vec![2.0, 2.0, 1.0]);
        assert!((sel.estimates[2] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn star_center_first() {
        let edges: Vec<_> = (1..6).map(|v| (0, v, 1.0)).collect();
        let g = InfluenceGraph::from_edges(6, &edges).unwrap();
        let sel = imm_baseline_select(&g, 500, 1, 9).unwrap();
        assert_eq!(sel.seeds, vec![0]);
        assert!((sel.estimates[0] - 6.0).abs() < 1e-9);
    }
}
