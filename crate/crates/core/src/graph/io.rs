use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{check_probability, BuildStats, InfluenceGraph, NodeCommunities, NodeId};
use crate::error::{Error, Result};

/// Parses a whitespace-separated `u v [p]` edge list.
///
/// Blank lines and `#` comments are skipped; LF and CRLF endings both work.
/// Nodes are re-indexed densely in ascending original-id order. With
/// `directed == false` every line yields both directions.
pub fn load_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<InfluenceGraph> {
    load_edge_list_with_stats(reader, directed).map(|(g, _, _)| g)
}

/// Like [`load_edge_list`], also returning the number of parsed records and
/// how many were dropped as self-loops or merged as duplicates.
pub fn load_edge_list_with_stats<R: BufRead>(
    reader: R,
    directed: bool,
) -> Result<(InfluenceGraph, usize, BuildStats)> {
    let mut records: Vec<(u64, u64, Option<f64>)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut fields = body.split_whitespace();
        let u = parse_id(fields.next(), lineno)?;
        let v = parse_id(fields.next(), lineno)?;
        let p = match fields.next() {
            None => None,
            Some(tok) => {
                let p: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid probability {tok:?}"),
                })?;
                check_probability(p).map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("probability {p} is outside [0, 1]"),
                })?;
                Some(p)
            }
        };
        if let Some(extra) = fields.next() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("unexpected field {extra:?}"),
            });
        }
        records.push((u, v, p));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }

    let ids: Vec<u64> = records
        .iter()
        .flat_map(|&(u, v, _)| [u, v])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let dense: HashMap<u64, NodeId> = ids
        .iter()
        .enumerate()
        .map(|(i, &o)| (o, i as NodeId))
        .collect();

    let mut edges = Vec::with_capacity(if directed {
        records.len()
    } else {
        2 * records.len()
    });
    for &(u, v, p) in &records {
        let (du, dv) = (dense[&u], dense[&v]);
        edges.push((du, dv, p));
        if !directed {
            edges.push((dv, du, p));
        }
    }
    let (graph, stats) = InfluenceGraph::build(ids, edges)?;
    Ok((graph, records.len(), stats))
}

/// Parses `node community` lines into a disjoint assignment.
pub fn load_communities<R: BufRead>(reader: R) -> Result<NodeCommunities> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut fields = body.split_whitespace();
        let node = parse_id(fields.next(), lineno)?;
        let comm = parse_id(fields.next(), lineno)?;
        if let Some(extra) = fields.next() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("unexpected field {extra:?}"),
            });
        }
        pairs.push((node, comm));
    }
    NodeCommunities::from_pairs(pairs)
}

pub fn read_edge_list_file(path: impl AsRef<Path>, directed: bool) -> Result<InfluenceGraph> {
    load_edge_list(BufReader::new(File::open(path)?), directed)
}

pub fn read_communities_file(path: impl AsRef<Path>) -> Result<NodeCommunities> {
    load_communities(BufReader::new(File::open(path)?))
}

fn parse_id(tok: Option<&str>, line: usize) -> Result<u64> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        message: "expected two node ids".into(),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid integer {tok:?}"),
    })
}
