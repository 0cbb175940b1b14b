use crate::graph::NodeId;

/// Dense storage is used while `n · C` stays under this many cells.
const DENSE_LIMIT: usize = 1 << 25;

/// Node × community counters `κ[v][c]`.
///
/// Dense when `n · C` is small, otherwise one sorted `(community, count)`
/// list per node. Both layouts compare equal when their counts agree.
#[derive(Debug, Clone)]
pub enum CoverageCounts {
    Dense {
        communities: usize,
        counts: Vec<u32>,
    },
    Sparse {
        communities: usize,
        rows: Vec<Vec<(u32, u32)>>,
    },
}

impl CoverageCounts {
    pub fn new(nodes: usize, communities: usize) -> Self {
        if nodes.saturating_mul(communities) <= DENSE_LIMIT {
            Self::dense(nodes, communities)
        } else {
            Self::sparse(nodes, communities)
        }
    }

    pub fn dense(nodes: usize, communities: usize) -> Self {
        CoverageCounts::Dense {
            communities,
            counts: vec![0; nodes * communities],
        }
    }

    pub fn sparse(nodes: usize, communities: usize) -> Self {
        CoverageCounts::Sparse {
            communities,
            rows: vec![Vec::new(); nodes],
        }
    }

    pub fn communities(&self) -> usize {
        match self {
            CoverageCounts::Dense { communities, .. }
            | CoverageCounts::Sparse { communities, .. } => *communities,
        }
    }

    pub fn nodes(&self) -> usize {
        match self {
            CoverageCounts::Dense {
                communities,
                counts,
            } => counts.len().checked_div(*communities).unwrap_or(0),
            CoverageCounts::Sparse { rows, .. } => rows.len(),
        }
    }

    pub fn get(&self, v: NodeId, c: u32) -> u32 {
        match self {
            CoverageCounts::Dense {
                communities,
                counts,
            } => counts[v as usize * communities + c as usize],
            CoverageCounts::Sparse { rows, .. } => {
                let row = &rows[v as usize];
                row.binary_search_by_key(&c, |e| e.0)
                    .map(|i| row[i].1)
                    .unwrap_or(0)
            }
        }
    }

    pub fn increment(&mut self, v: NodeId, c: u32) {
        match self {
            CoverageCounts::Dense {
                communities,
                counts,
            } => counts[v as usize * *communities + c as usize] += 1,
            CoverageCounts::Sparse { rows, .. } => {
                let row = &mut rows[v as usize];
                match row.binary_search_by_key(&c, |e| e.0) {
                    Ok(i) => row[i].1 += 1,
                    Err(i) => row.insert(i, (c, 1)),
                }
            }
        }
    }

    /// Panics if the counter is already zero.
    pub fn decrement(&mut self, v: NodeId, c: u32) {
        match self {
            CoverageCounts::Dense {
                communities,
                counts,
            } => {
                let cell = &mut counts[v as usize * *communities + c as usize];
                *cell = cell.checked_sub(1).expect("kappa underflow");
            }
            CoverageCounts::Sparse { rows, .. } => {
                let row = &mut rows[v as usize];
                let i = row
                    .binary_search_by_key(&c, |e| e.0)
                    .expect("kappa underflow");
                row[i].1 -= 1;
                if row[i].1 == 0 {
                    row.remove(i);
                }
            }
        }
    }

    /// `(community, count)` pairs with nonzero count, ascending by community.
    pub fn nonzero(&self, v: NodeId) -> Box<dyn Iterator<Item = (u32, u32)> + '_> {
        match self {
            CoverageCounts::Dense {
                communities,
                counts,
            } => {
                let row = &counts[v as usize * communities..(v as usize + 1) * communities];
                Box::new(
                    row.iter()
                        .enumerate()
                        .filter(|e| *e.1 > 0)
                        .map(|(c, &k)| (c as u32, k)),
                )
            }
            CoverageCounts::Sparse { rows, .. } => Box::new(rows[v as usize].iter().copied()),
        }
    }

    /// Fills `out` (length `C`) with the row of `v`.
    pub fn row_into(&self, v: NodeId, out: &mut [usize]) {
        out.fill(0);
        for (c, k) in self.nonzero(v) {
            out[c as usize] = k as usize;
        }
    }
}

impl PartialEq for CoverageCounts {
    fn eq(&self, other: &Self) -> bool {
        self.communities() == other.communities()
            && self.nodes() == other.nodes()
            && (0..self.nodes() as NodeId).all(|v| self.nonzero(v).eq(other.nonzero(v)))
    }
}
