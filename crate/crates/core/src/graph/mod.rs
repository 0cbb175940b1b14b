//! Directed influence graphs, community partitions and the dataset loaders
//! that build them.
//!
//! Node ids are dense `u32` indices in `[0, n)`. The original ids from the
//! input file are kept alongside so reports can translate back.

mod community;
mod io;
mod probability;

pub use community::{prune, CommunityPartition, NodeCommunities};
pub use io::{
    load_communities, load_edge_list, load_edge_list_with_stats, read_communities_file,
    read_edge_list_file,
};
pub use probability::{assign_probabilities, ProbabilityModel};

use log::warn;

use crate::error::{Error, Result};

/// Dense node index.
pub type NodeId = u32;

/// A directed graph with per-edge activation probabilities, stored as forward
/// and reverse CSR arrays.
///
/// Edge ids are positions in the forward arrays. An unset probability is
/// stored as NaN and reported as `None` by [`InfluenceGraph::probability`].
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceGraph {
    original_ids: Vec<u64>,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    out_probs: Vec<f64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    in_probs: Vec<f64>,
    in_edge_ids: Vec<u32>,
}

/// Counts of input records that did not become edges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl InfluenceGraph {
    /// Builds a graph whose original ids equal the dense ids.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        for &(_, _, p) in edges {
            check_probability(p)?;
        }
        let raw = edges.iter().map(|&(u, v, p)| (u, v, Some(p))).collect();
        let (graph, _) = Self::build((0..node_count as u64).collect(), raw)?;
        Ok(graph)
    }

    /// Builds a graph from dense edges with optional probabilities.
    ///
    /// Self-loops are dropped. Parallel edges are merged keeping the largest
    /// set probability.
    pub(crate) fn build(
        original_ids: Vec<u64>,
        mut edges: Vec<(NodeId, NodeId, Option<f64>)>,
    ) -> Result<(Self, BuildStats)> {
        let n = original_ids.len();
        let mut stats = BuildStats::default();
        for &(u, v, _) in &edges {
            for node in [u, v] {
                if node as usize >= n {
                    return Err(Error::NodeOutOfRange {
                        node: node as usize,
                        node_count: n,
                    });
                }
            }
        }

        let before = edges.len();
        edges.retain(|&(u, v, _)| u != v);
        stats.self_loops = before - edges.len();

        edges.sort_by_key(|&(u, v, _)| (u, v));
        let mut merged: Vec<(NodeId, NodeId, Option<f64>)> = Vec::with_capacity(edges.len());
        for (u, v, p) in edges {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => {
                    stats.duplicates += 1;
                    last.2 = match (last.2, p) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        (a, b) => a.or(b),
                    };
                }
                _ => merged.push((u, v, p)),
            }
        }
        if stats.self_loops > 0 {
            warn!("discarded {} self-loop(s)", stats.self_loops);
        }
        if stats.duplicates > 0 {
            warn!(
                "merged {} parallel duplicate edge(s), keeping the maximum probability",
                stats.duplicates
            );
        }

        let m = merged.len();
        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for &(u, v, _) in &merged {
            out_offsets[u as usize + 1] += 1;
            in_offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }

        // `merged` is sorted by source, so forward arrays fill in order.
        let out_targets: Vec<NodeId> = merged.iter().map(|e| e.1).collect();
        let out_probs: Vec<f64> = merged.iter().map(|e| e.2.unwrap_or(f64::NAN)).collect();

        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![0; m];
        let mut in_probs = vec![0.0; m];
        let mut in_edge_ids = vec![0; m];
        for (eid, &(u, v, _)) in merged.iter().enumerate() {
            let slot = cursor[v as usize];
            cursor[v as usize] += 1;
            in_sources[slot] = u;
            in_probs[slot] = out_probs[eid];
            in_edge_ids[slot] = eid as u32;
        }

        let graph = InfluenceGraph {
            original_ids,
            out_offsets,
            out_targets,
            out_probs,
            in_offsets,
            in_sources,
            in_probs,
            in_edge_ids,
        };
        Ok((graph, stats))
    }

    pub fn node_count(&self) -> usize {
        self.original_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn original_id(&self, v: NodeId) -> u64 {
        self.original_ids[v as usize]
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.original_ids
    }

    /// Dense id for an original id, if present.
    pub fn dense_id(&self, original: u64) -> Option<NodeId> {
        // Loaders assign dense ids in ascending original-id order; fall back
        // to a scan for graphs built another way.
        match self.original_ids.binary_search(&original) {
            Ok(i) => Some(i as NodeId),
            Err(_) => self
                .original_ids
                .iter()
                .position(|&o| o == original)
                .map(|i| i as NodeId),
        }
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    /// Range of forward edge ids leaving `v`.
    pub fn out_edge_range(&self, v: NodeId) -> std::ops::Range<usize> {
        self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]
    }

    /// `(target, probability)` pairs of out-edges; probability is NaN if unset.
    pub fn out_edges(&self, v: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let r = self.out_edge_range(v);
        self.out_targets[r.clone()]
            .iter()
            .copied()
            .zip(self.out_probs[r].iter().copied())
    }

    /// `(source, probability)` pairs of in-edges.
    pub fn in_edges(&self, v: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let r = self.in_offsets[v as usize]..self.in_offsets[v as usize + 1];
        self.in_sources[r.clone()]
            .iter()
            .copied()
            .zip(self.in_probs[r].iter().copied())
    }

    pub(crate) fn in_slices(&self, v: NodeId) -> (&[NodeId], &[f64]) {
        let r = self.in_offsets[v as usize]..self.in_offsets[v as usize + 1];
        (&self.in_sources[r.clone()], &self.in_probs[r])
    }

    pub(crate) fn out_slices(&self, v: NodeId) -> (&[NodeId], &[f64]) {
        let r = self.out_edge_range(v);
        (&self.out_targets[r.clone()], &self.out_probs[r])
    }

    /// All edges as `(source, target, probability)` in edge-id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, Option<f64>)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |u| {
            self.out_edges(u)
                .map(move |(v, p)| (u, v, (!p.is_nan()).then_some(p)))
        })
    }

    pub fn probability(&self, edge: usize) -> Option<f64> {
        let p = self.out_probs[edge];
        (!p.is_nan()).then_some(p)
    }

    pub fn has_all_probabilities(&self) -> bool {
        !self.out_probs.iter().any(|p| p.is_nan())
    }

    /// Checks that the reverse adjacency is exactly the transpose of the
    /// forward adjacency.
    pub fn check_transpose(&self) -> bool {
        let m = self.edge_count();
        let mut seen = vec![false; m];
        for v in 0..self.node_count() as NodeId {
            let r = self.in_offsets[v as usize]..self.in_offsets[v as usize + 1];
            for slot in r {
                let eid = self.in_edge_ids[slot] as usize;
                if eid >= m || seen[eid] || self.out_targets[eid] != v {
                    return false;
                }
                let u = self.in_sources[slot];
                if !self.out_edge_range(u).contains(&eid) {
                    return false;
                }
                let (a, b) = (self.in_probs[slot], self.out_probs[eid]);
                if a.to_bits() != b.to_bits() {
                    return false;
                }
                seen[eid] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Replaces every edge probability, keeping topology.
    pub(crate) fn map_probabilities(&self, mut f: impl FnMut(NodeId, NodeId, f64) -> f64) -> Self {
        let mut g = self.clone();
        for u in 0..self.node_count() as NodeId {
            for eid in self.out_edge_range(u) {
                g.out_probs[eid] = f(u, self.out_targets[eid], self.out_probs[eid]);
            }
        }
        for (slot, &eid) in g.in_edge_ids.iter().enumerate() {
            g.in_probs[slot] = g.out_probs[eid as usize];
        }
        g
    }

    /// Subgraph induced on `keep` (dense ids, in the order given), re-indexed
    /// densely. Returns the graph and the old→new id map.
    pub fn induced_subgraph(&self, keep: &[NodeId]) -> (Self, Vec<Option<NodeId>>) {
        let mut remap = vec![None; self.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old as usize] = Some(new as NodeId);
        }
        let ids = keep
            .iter()
            .map(|&v| self.original_ids[v as usize])
            .collect();
        let mut edges = Vec::new();
        for &u in keep {
            let nu = remap[u as usize].unwrap();
            for (v, p) in self.out_edges(u) {
                if let Some(nv) = remap[v as usize] {
                    edges.push((nu, nv, (!p.is_nan()).then_some(p)));
                }
            }
        }
        let (g, _) = Self::build(ids, edges).expect("induced edges are in range");
        (g, remap)
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_matches_forward() {
        let g =
            InfluenceGraph::from_edges(4, &[(0, 1, 0.5), (0, 2, 0.1), (3, 1, 1.0), (2, 3, 0.0)])
                .unwrap();
        assert!(g.check_transpose());
        let ins: Vec<_> = g.in_edges(1).collect();
        assert_eq!(ins, vec![(0, 0.5), (3, 1.0)]);
        assert_eq!(g.out_degree(0), 2);
        assert_eq!(g.in_degree(3), 1);
    }

    #[test]
    fn self_loops_dropped_and_duplicates_keep_max() {
        let raw = vec![
            (0, 0, Some(0.3)),
            (0, 1, Some(0.2)),
            (0, 1, Some(0.7)),
            (1, 0, None),
        ];
        let (g, stats) = InfluenceGraph::build(vec![10, 11], raw).unwrap();
        assert_eq!(
            stats,
            BuildStats {
                self_loops: 1,
                duplicates: 1
            }
        );
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.out_edges(0).next().unwrap().1, 0.7);
        assert!(!g.has_all_probabilities());
        assert_eq!(g.dense_id(11), Some(1));
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(matches!(
            InfluenceGraph::from_edges(2, &[(0, 1, 1.5)]),
            Err(Error::ProbabilityOutOfRange(_))
        ));
    }

    #[test]
    fn induced_subgraph_reindexes() {
        let g =
            InfluenceGraph::from_edges(4, &[(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5), (3, 0, 0.5)])
                .unwrap();
        let (sub, remap) = g.induced_subgraph(&[1, 2, 3]);
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edge_count(), 2);
        assert_eq!(remap[0], None);
        assert_eq!(sub.original_ids(), &[1, 2, 3]);
        assert!(sub.check_transpose());
    }
}
