//! Binary snapshot of an [`RRIndex`].
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic   b"RRIX"
//! version u32 (= 1)
//! n_G     u64
//! C       u64
//! theta   C × u64
//! sets    Σθ records of: root u32, len u32, len × u32 node ids
//! ```
//!
//! Records are grouped by root community in community order. `κ` and the
//! node→set links are rebuilt on load.

use std::io::{Read, Write};

use super::RRIndex;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RRIX";
const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, index: &RRIndex) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(index.node_count() as u64).to_le_bytes())?;
    w.write_all(&(index.community_count() as u64).to_le_bytes())?;
    for &t in index.theta() {
        w.write_all(&(t as u64).to_le_bytes())?;
    }
    for r in 0..index.len() {
        let set = index.set(r);
        w.write_all(&index.root(r).to_le_bytes())?;
        w.write_all(&(set.len() as u32).to_le_bytes())?;
        for &u in set {
            w.write_all(&u.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<RRIndex> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let n = read_u64(&mut r)? as usize;
    let c = read_u64(&mut r)? as usize;
    let theta: Vec<usize> = (0..c)
        .map(|_| read_u64(&mut r).map(|t| t as usize))
        .collect::<Result<_>>()?;
    let total: usize = theta.iter().sum();
    let mut sets = Vec::with_capacity(total);
    for _ in 0..total {
        let root = read_u32(&mut r)?;
        let len = read_u32(&mut r)? as usize;
        if len == 0 || len > n {
            return Err(Error::Snapshot(format!(
                "RR set of length {len} in a graph of {n} nodes"
            )));
        }
        let mut buf = vec![0u8; 4 * len];
        r.read_exact(&mut buf)?;
        let set: Vec<u32> = buf
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if set.binary_search(&root).is_err() {
            return Err(Error::Snapshot(format!(
                "root {root} missing from its RR set"
            )));
        }
        sets.push((root, set));
    }
    RRIndex::from_sets(n, theta, sets)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
