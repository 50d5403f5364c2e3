//! Finite-length regular LDPC codes from the configuration model.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldpc::de::LdpcEnsemble;

/// A `(dv, dc)`-regular bipartite Tanner graph with no parallel edges.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdpcCode {
    pub n: usize,
    pub m: usize,
    pub dv: u32,
    pub dc: u32,
    pub seed: u64,
    edge_var: Vec<u32>,
    edge_chk: Vec<u32>,
    var_edges: Vec<Vec<u32>>,
    chk_edges: Vec<Vec<u32>>,
}

impl LdpcCode {
    pub fn edge_count(&self) -> usize {
        self.edge_var.len()
    }

    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        (self.edge_var[e] as usize, self.edge_chk[e] as usize)
    }

    pub fn var_edges(&self, v: usize) -> &[u32] {
        &self.var_edges[v]
    }

    pub fn chk_edges(&self, c: usize) -> &[u32] {
        &self.chk_edges[c]
    }

    pub fn rate(&self) -> f64 {
        1.0 - self.m as f64 / self.n as f64
    }

    /// Parity check: every check sees an even number of set bits.
    pub fn syndrome_ok(&self, bits: &[bool]) -> bool {
        self.chk_edges.iter().all(|edges| {
            edges
                .iter()
                .filter(|&&e| bits[self.edge_var[e as usize] as usize])
                .count()
                % 2
                == 0
        })
    }

    /// Edge list as text: a header line `n m dv dc seed`, then one `chk var`
    /// pair per line, sorted.
    pub fn to_coordinate_text(&self) -> String {
        let mut pairs: Vec<(u32, u32)> = self
            .edge_chk
            .iter()
            .zip(&self.edge_var)
            .map(|(&c, &v)| (c, v))
            .collect();
        pairs.sort_unstable();
        let mut out = format!("{} {} {} {} {}\n", self.n, self.m, self.dv, self.dc, self.seed);
        for (c, v) in pairs {
            out.push_str(&format!("{c} {v}\n"));
        }
        out
    }

    pub fn from_coordinate_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Io("empty code description".into()))?;
        let fields: Vec<u64> = header
            .split_whitespace()
            .map(|f| f.parse::<u64>().map_err(|e| Error::Io(format!("bad header field: {e}"))))
            .collect::<Result<_>>()?;
        if fields.len() != 5 {
            return Err(Error::Io("code header needs 5 fields: n m dv dc seed".into()));
        }
        let (n, m, dv, dc, seed) =
            (fields[0] as usize, fields[1] as usize, fields[2] as u32, fields[3] as u32, fields[4]);
        let mut edge_var = Vec::new();
        let mut edge_chk = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let c: u32 = it
                .next()
                .ok_or_else(|| Error::Io("short edge line".into()))?
                .parse()
                .map_err(|e| Error::Io(format!("bad check index: {e}")))?;
            let v: u32 = it
                .next()
                .ok_or_else(|| Error::Io("short edge line".into()))?
                .parse()
                .map_err(|e| Error::Io(format!("bad variable index: {e}")))?;
            if (c as usize) >= m || (v as usize) >= n {
                return Err(Error::Io(format!("edge ({c}, {v}) out of range")));
            }
            edge_chk.push(c);
            edge_var.push(v);
        }
        if edge_var.len() != n * dv as usize {
            return Err(Error::Io(format!(
                "expected {} edges, found {}",
                n * dv as usize,
                edge_var.len()
            )));
        }
        assemble(n, m, dv, dc, seed, edge_var, edge_chk)
    }
}

fn assemble(
    n: usize,
    m: usize,
    dv: u32,
    dc: u32,
    seed: u64,
    edge_var: Vec<u32>,
    edge_chk: Vec<u32>,
) -> Result<LdpcCode> {
    let mut var_edges = vec![Vec::with_capacity(dv as usize); n];
    let mut chk_edges = vec![Vec::with_capacity(dc as usize); m];
    for (e, (&v, &c)) in edge_var.iter().zip(&edge_chk).enumerate() {
        var_edges[v as usize].push(e as u32);
        chk_edges[c as usize].push(e as u32);
    }
    if var_edges.iter().any(|es| es.len() != dv as usize)
        || chk_edges.iter().any(|es| es.len() != dc as usize)
    {
        return Err(Error::Construction("degree sequence is not regular".into()));
    }
    Ok(LdpcCode { n, m, dv, dc, seed, edge_var, edge_chk, var_edges, chk_edges })
}

/// Sample a code from the configuration model: random stub matching followed
/// by endpoint swaps until no parallel edges remain. Deterministic in the
/// seed.
pub fn build_code(ens: LdpcEnsemble, n: usize, seed: u64) -> Result<LdpcCode> {
    let dv = ens.dv as usize;
    let dc = ens.dc as usize;
    if n < dc {
        return Err(Error::Argument(format!("block length {n} below check degree {dc}")));
    }
    let edges = n * dv;
    if edges % dc != 0 {
        return Err(Error::Argument(format!(
            "block length {n} incompatible with ({}, {}) regularity",
            ens.dv, ens.dc
        )));
    }
    let m = edges / dc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chk_stubs: Vec<u32> = (0..edges).map(|e| (e / dc) as u32).collect();
    // Fisher-Yates
    for i in (1..edges).rev() {
        let j = rng.gen_range(0..=i);
        chk_stubs.swap(i, j);
    }
    let edge_var: Vec<u32> = (0..edges).map(|e| (e / dv) as u32).collect();
    let mut edge_chk = chk_stubs;

    let mut counts: HashMap<(u32, u32), u32> = HashMap::with_capacity(edges);
    for (&v, &c) in edge_var.iter().zip(&edge_chk) {
        *counts.entry((v, c)).or_insert(0) += 1;
    }
    let mut attempts = 0usize;
    let max_attempts = 200 * edges;
    loop {
        let duplicates: Vec<usize> = (0..edges)
            .filter(|&e| counts[&(edge_var[e], edge_chk[e])] > 1)
            .collect();
        if duplicates.is_empty() {
            break;
        }
        for e in duplicates {
            if counts[&(edge_var[e], edge_chk[e])] <= 1 {
                continue;
            }
            loop {
                attempts += 1;
                if attempts > max_attempts {
                    return Err(Error::Construction(format!(
                        "could not remove parallel edges after {max_attempts} swaps"
                    )));
                }
                let f = rng.gen_range(0..edges);
                let (v1, c1) = (edge_var[e], edge_chk[e]);
                let (v2, c2) = (edge_var[f], edge_chk[f]);
                if v1 == v2 || c1 == c2 {
                    continue;
                }
                if counts.get(&(v1, c2)).copied().unwrap_or(0) > 0
                    || counts.get(&(v2, c1)).copied().unwrap_or(0) > 0
                {
                    continue;
                }
                *counts.get_mut(&(v1, c1)).unwrap() -= 1;
                *counts.get_mut(&(v2, c2)).unwrap() -= 1;
                *counts.entry((v1, c2)).or_insert(0) += 1;
                *counts.entry((v2, c1)).or_insert(0) += 1;
                edge_chk.swap(e, f);
                break;
            }
        }
    }
    assemble(n, m, ens.dv, ens.dc, seed, edge_var, edge_chk)
}

/// Shortest cycle length in the Tanner graph, searched up to `cap` edges.
/// Returns `None` when every cycle is longer than `cap`.
pub fn girth_up_to(code: &LdpcCode, cap: usize) -> Option<usize> {
    let n = code.n;
    let total = n + code.m;
    let mut best: Option<usize> = None;
    let half = cap / 2;
    let mut dist = vec![usize::MAX; total];
    let mut parent_edge = vec![u32::MAX; total];
    let mut touched: Vec<usize> = Vec::new();
    let mut queue: Vec<usize> = Vec::new();
    for start in 0..n {
        for &t in &touched {
            dist[t] = usize::MAX;
            parent_edge[t] = u32::MAX;
        }
        touched.clear();
        queue.clear();
        dist[start] = 0;
        touched.push(start);
        queue.push(start);
        let mut qi = 0;
        while qi < queue.len() {
            let u = queue[qi];
            qi += 1;
            if dist[u] >= half {
                continue;
            }
            let edges: &[u32] = if u < n {
                code.var_edges(u)
            } else {
                code.chk_edges(u - n)
            };
            for &e in edges {
                if e == parent_edge[u] {
                    continue;
                }
                let (v, c) = code.edge_endpoints(e as usize);
                let w = if u < n { c + n } else { v };
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent_edge[w] = e;
                    touched.push(w);
                    queue.push(w);
                } else {
                    let cycle = dist[u] + dist[w] + 1;
                    if cycle <= cap {
                        best = Some(best.map_or(cycle, |b| b.min(cycle)));
                    }
                }
            }
        }
    }
    best
}
