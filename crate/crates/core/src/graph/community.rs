use std::collections::{BTreeMap, HashSet};

use super::{InfluenceGraph, NodeId};
use crate::error::{Error, Result};

/// Community assignment as read from a file, keyed by original node ids.
///
/// Community labels are re-indexed densely in ascending label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeCommunities {
    /// `(original node id, dense community id)` in file order.
    entries: Vec<(u64, u32)>,
    labels: Vec<u64>,
}

impl NodeCommunities {
    pub fn from_pairs(pairs: Vec<(u64, u64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(pairs.len());
        for &(node, _) in &pairs {
            if !seen.insert(node) {
                return Err(Error::DuplicateAssignment { node });
            }
        }
        let labels: Vec<u64> = pairs
            .iter()
            .map(|&(_, c)| c)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let dense: BTreeMap<u64, u32> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as u32))
            .collect();
        let entries = pairs.into_iter().map(|(n, c)| (n, dense[&c])).collect();
        Ok(NodeCommunities { entries, labels })
    }

    pub fn community_count(&self) -> usize {
        self.labels.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.labels.len()];
        for &(_, c) in &self.entries {
            sizes[c as usize] += 1;
        }
        sizes
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.entries
            .iter()
            .map(|&(n, c)| (n, self.labels[c as usize]))
    }
}

/// A total, disjoint assignment of the graph's dense nodes to communities
/// `0..C`, every community non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityPartition {
    membership: Vec<u32>,
    offsets: Vec<usize>,
    members: Vec<NodeId>,
    labels: Vec<u64>,
}

impl CommunityPartition {
    pub fn new(membership: Vec<u32>) -> Result<Self> {
        let count = membership
            .iter()
            .map(|&c| c as usize + 1)
            .max()
            .unwrap_or(0);
        Self::with_labels(membership, (0..count as u64).collect())
    }

    /// Every node in one community.
    pub fn single(node_count: usize) -> Self {
        Self::new(vec![0; node_count]).expect("single community is valid when nonempty")
    }

    pub fn with_labels(membership: Vec<u32>, labels: Vec<u64>) -> Result<Self> {
        let c = labels.len();
        let mut offsets = vec![0usize; c + 1];
        for (v, &comm) in membership.iter().enumerate() {
            if comm as usize >= c {
                return Err(Error::param(format!(
                    "node {v} has community {comm} but only {c} labels"
                )));
            }
            offsets[comm as usize + 1] += 1;
        }
        if let Some(empty) = (0..c).find(|&i| offsets[i + 1] == 0) {
            return Err(Error::EmptyCommunity(empty));
        }
        for i in 0..c {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut members = vec![0; membership.len()];
        for (v, &comm) in membership.iter().enumerate() {
            members[cursor[comm as usize]] = v as NodeId;
            cursor[comm as usize] += 1;
        }
        Ok(CommunityPartition {
            membership,
            offsets,
            members,
            labels,
        })
    }

    pub fn node_count(&self) -> usize {
        self.membership.len()
    }

    pub fn community_count(&self) -> usize {
        self.labels.len()
    }

    pub fn community_of(&self, v: NodeId) -> u32 {
        self.membership[v as usize]
    }

    pub fn membership(&self) -> &[u32] {
        &self.membership
    }

    /// Members of community `c` in ascending node order.
    pub fn members(&self, c: usize) -> &[NodeId] {
        &self.members[self.offsets[c]..self.offsets[c + 1]]
    }

    pub fn size(&self, c: usize) -> usize {
        self.offsets[c + 1] - self.offsets[c]
    }

    pub fn sizes(&self) -> Vec<usize> {
        (0..self.community_count()).map(|c| self.size(c)).collect()
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// Converts back to a file-level assignment using the graph's original ids.
    pub fn to_node_communities(&self, graph: &InfluenceGraph) -> NodeCommunities {
        let pairs = self
            .membership
            .iter()
            .enumerate()
            .map(|(v, &c)| (graph.original_id(v as NodeId), self.labels[c as usize]))
            .collect();
        NodeCommunities::from_pairs(pairs).expect("partition is disjoint")
    }
}

/// Drops communities with fewer than `min_community_size` members and every
/// node without a retained community, then restricts the graph to the
/// induced subgraph on what remains.
///
/// With `min_community_size = 11`, communities of at most 10 nodes are removed.
pub fn prune(
    graph: &InfluenceGraph,
    communities: &NodeCommunities,
    min_community_size: usize,
) -> Result<(InfluenceGraph, CommunityPartition)> {
    if min_community_size == 0 {
        return Err(Error::param("min_community_size must be at least 1"));
    }
    let sizes = communities.sizes();
    let mut assigned: Vec<Option<u32>> = vec![None; graph.node_count()];
    for &(node, c) in &communities.entries {
        let v = graph.dense_id(node).ok_or(Error::UnknownNode { node })?;
        if sizes[c as usize] >= min_community_size {
            assigned[v as usize] = Some(c);
        }
    }

    let kept: Vec<usize> = (0..sizes.len())
        .filter(|&c| sizes[c] >= min_community_size)
        .collect();
    if kept.is_empty() {
        return Err(Error::EverythingPruned);
    }
    let mut new_comm = vec![u32::MAX; sizes.len()];
    for (i, &c) in kept.iter().enumerate() {
        new_comm[c] = i as u32;
    }

    let keep: Vec<NodeId> = (0..graph.node_count() as NodeId)
        .filter(|&v| assigned[v as usize].is_some())
        .collect();
    let (sub, _) = graph.induced_subgraph(&keep);
    let membership = keep
        .iter()
        .map(|&v| new_comm[assigned[v as usize].unwrap() as usize])
        .collect();
    let labels = kept.iter().map(|&c| communities.labels[c]).collect();
    let partition = CommunityPartition::with_labels(membership, labels)?;
    Ok((sub, partition))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> InfluenceGraph {
        let edges: Vec<_> = (0..n as NodeId)
            .map(|i| (i, (i + 1) % n as NodeId, 0.1))
            .collect();
        InfluenceGraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn drops_small_community() {
        let g = ring(17);
        let pairs = (0..17u64)
            .map(|v| (v, if v < 12 { 0 } else { 1 }))
            .collect();
        let comms = NodeCommunities::from_pairs(pairs).unwrap();
        let (pg, part) = prune(&g, &comms, 11).unwrap();
        assert_eq!(pg.node_count(), 12);
        assert_eq!(part.sizes(), vec![12]);
        // ring edges 11->12 .. 16->0 leave, 0..11 chain stays
        assert_eq!(pg.edge_count(), 11);
    }

    #[test]
    fn min_size_one_is_identity() {
        let g = ring(5);
        let comms = NodeCommunities::from_pairs((0..5).map(|v| (v, v % 2)).collect()).unwrap();
        let (pg, part) = prune(&g, &comms, 1).unwrap();
        assert_eq!(pg, g);
        assert_eq!(part.membership(), &[0, 1, 0, 1, 0]);
    }

    #[test]
    fn unassigned_nodes_removed() {
        let g = ring(4);
        let comms = NodeCommunities::from_pairs(vec![(0, 5), (1, 5), (2, 9)]).unwrap();
        let (pg, part) = prune(&g, &comms, 1).unwrap();
        assert_eq!(pg.node_count(), 3);
        assert_eq!(part.labels(), &[5, 9]);
        assert_eq!(part.sizes(), vec![2, 1]);
    }

    #[test]
    fn unknown_node_and_empty_result() {
        let g = ring(3);
        let comms = NodeCommunities::from_pairs(vec![(0, 0), (7, 0)]).unwrap();
        assert!(matches!(
            prune(&g, &comms, 1),
            Err(Error::UnknownNode { node: 7 })
        ));
        let comms = NodeCommunities::from_pairs(vec![(0, 0), (1, 1)]).unwrap();
        assert!(matches!(prune(&g, &comms, 2), Err(Error::EverythingPruned)));
    }

    #[test]
    fn prune_is_idempotent() {
        let g = ring(30);
        let comms =
            NodeCommunities::from_pairs((0..30u64).map(|v| (v, v % 4 + (v / 20) * 4)).collect())
                .unwrap();
        let (g1, p1) = prune(&g, &comms, 3).unwrap();
        let (g2, p2) = prune(&g1, &p1.to_node_communities(&g1), 3).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(p1, p2);
    }

    #[test]
    fn partition_rejects_empty_community() {
        assert!(matches!(
            CommunityPartition::with_labels(vec![0, 0], vec![1, 2]),
            Err(Error::EmptyCommunity(1))
        ));
        let p = CommunityPartition::new(vec![1, 0, 1]).unwrap();
        assert_eq!(p.members(1), &[0, 2]);
        assert_eq!(p.sizes().iter().sum::<usize>(), p.node_count());
    }
}
