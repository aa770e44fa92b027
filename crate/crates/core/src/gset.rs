//! Gset MAX-CUT benchmark format: a header `n m` followed by `m` lines
//! `i j [w]` with 1-indexed endpoints and an optional weight (default 1).

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::SymmetricMatrix;
use crate::rng::{stream_rng, streams};

/// Weighted undirected graph, 0-indexed in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct GsetGraph {
    pub n: usize,
    /// Edges `(i, j, w)` with `i != j`, in file order.
    pub edges: Vec<(usize, usize, f64)>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_gset(text: &str) -> Result<GsetGraph> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "missing header `n m`"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 2 {
        return Err(perr(hline, "header must be `n m`"));
    }
    let int = |s: &str, line: usize| -> Result<usize> {
        s.parse().map_err(|_| perr(line, format!("expected a non-negative integer, found {s:?}")))
    };
    let n = int(h[0], hline)?;
    let m = int(h[1], hline)?;
    if n == 0 {
        return Err(perr(hline, "graph must have at least one node"));
    }
    let mut edges = Vec::with_capacity(m);
    let mut seen = HashSet::with_capacity(m);
    let mut last_line = hline;
    for (line, text) in lines {
        last_line = line;
        if edges.len() == m {
            return Err(perr(line, format!("more edge lines than the {m} announced in the header")));
        }
        let f: Vec<&str> = text.split_whitespace().collect();
        if f.len() != 2 && f.len() != 3 {
            return Err(perr(line, format!("expected `i j [w]`, found {} fields", f.len())));
        }
        let i = int(f[0], line)?;
        let j = int(f[1], line)?;
        for v in [i, j] {
            if v == 0 || v > n {
                return Err(perr(line, format!("node index {v} outside 1..={n}")));
            }
        }
        if i == j {
            return Err(perr(line, format!("self-loop on node {i}")));
        }
        let w = match f.get(2) {
            Some(s) => s.parse::<f64>().ok().filter(|w| w.is_finite()).ok_or_else(|| perr(line, format!("bad weight {s:?}")))?,
            None => 1.0,
        };
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(perr(line, format!("duplicate edge {{{i}, {j}}}")));
        }
        edges.push((i - 1, j - 1, w));
    }
    if edges.len() != m {
        return Err(perr(last_line, format!("header announces {m} edges, found {}", edges.len())));
    }
    Ok(GsetGraph { n, edges })
}

fn fmt_weight(w: f64) -> String {
    if w.fract() == 0.0 && w.abs() < 1e15 {
        format!("{}", w as i64)
    } else {
        format!("{w:?}")
    }
}

impl GsetGraph {
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Serializes to the Gset text format.
    pub fn render(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.m());
        for &(i, j, w) in &self.edges {
            writeln!(s, "{} {} {}", i + 1, j + 1, fmt_weight(w)).expect("writing to a String");
        }
        s
    }

    /// Symmetric weighted adjacency `A⁰` with zero diagonal.
    pub fn adjacency(&self) -> SymmetricMatrix {
        let mut w = vec![0.0; self.n * self.n];
        for &(i, j, x) in &self.edges {
            w[i * self.n + j] = x;
            w[j * self.n + i] = x;
        }
        SymmetricMatrix::from_upper(self.n, |i, j| w[i * self.n + j])
    }

    /// Subgraph induced by the first `k` nodes.
    pub fn subgraph(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n {
            return Err(invalid(format!("cannot take {k} of {} nodes", self.n)));
        }
        let edges = self.edges.iter().copied().filter(|&(i, j, _)| i < k && j < k).collect();
        Ok(Self { n: k, edges })
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.m() as f64 / self.n as f64
    }

    /// Random unit-weight graph with `n` nodes and the requested expected
    /// average degree, in Gset layout (edges listed by ascending `(i, j)`).
    pub fn random(n: usize, average_degree: f64, seed: u64) -> Result<Self> {
        if n < 2 || !(average_degree >= 0.0) || average_degree > (n - 1) as f64 {
            return Err(invalid(format!("cannot build a graph with n = {n} and degree {average_degree}")));
        }
        let prob = average_degree / (n - 1) as f64;
        let mut rng = stream_rng(seed, streams::EDGES);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < prob {
                    edges.push((i, j, 1.0));
                }
            }
        }
        Ok(Self { n, edges })
    }
}
