//! Directed communication graphs.
//!
//! An edge `i -> j` means agent `i` talks to agent `j`. Graphs are immutable
//! once built.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Below this edge density an adjacency list is used instead of a dense
/// matrix.
const SPARSE_DENSITY: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Storage {
    /// Row-major `n * n` matrix.
    Dense(Vec<bool>),
    /// Sorted out-neighbour lists.
    Sparse(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    storage: Storage,
}

impl DirectedGraph {
    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("graph needs at least one node".into()));
        }
        let mut adj = vec![true; n * n];
        for i in 0..n {
            adj[i * n + i] = false;
        }
        Ok(DirectedGraph {
            n,
            storage: Storage::Dense(adj),
        })
    }

    /// Builds a graph from directed edges. Self-loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("graph needs at least one node".into()));
        }
        let mut lists = vec![Vec::new(); n];
        for &(src, dst) in edges {
            for index in [src, dst] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            if src == dst {
                return Err(Error::SelfLoop(src));
            }
            lists[src].push(dst);
        }
        for list in &mut lists {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            if list.len() != before {
                return Err(Error::InvalidConfig("duplicate edge".into()));
            }
        }
        let possible = (n * (n - 1)) as f64;
        let storage = if possible > 0.0 && (edges.len() as f64) / possible < SPARSE_DENSITY {
            Storage::Sparse(lists)
        } else {
            let mut adj = vec![false; n * n];
            for (src, list) in lists.iter().enumerate() {
                for &dst in list {
                    adj[src * n + dst] = true;
                }
            }
            Storage::Dense(adj)
        };
        Ok(DirectedGraph { n, storage })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        if src >= self.n || dst >= self.n {
            return false;
        }
        match &self.storage {
            Storage::Dense(adj) => adj[src * self.n + dst],
            Storage::Sparse(lists) => lists[src].binary_search(&dst).is_ok(),
        }
    }

    /// Agents that hear `speaker`, in ascending order.
    pub fn receivers(&self, speaker: usize) -> Result<Vec<usize>> {
        if speaker >= self.n {
            return Err(Error::IndexOutOfRange {
                index: speaker,
                n: self.n,
            });
        }
        Ok(self.out_neighbors(speaker).collect())
    }

    /// Iterator form of [`receivers`](Self::receivers). Panics if `speaker`
    /// is out of range.
    pub fn out_neighbors(&self, speaker: usize) -> OutNeighbors<'_> {
        assert!(speaker < self.n, "speaker {speaker} out of range");
        match &self.storage {
            Storage::Dense(adj) => OutNeighbors::Dense {
                row: &adj[speaker * self.n..(speaker + 1) * self.n],
                next: 0,
            },
            Storage::Sparse(lists) => OutNeighbors::Sparse(lists[speaker].iter()),
        }
    }

    pub fn edge_count(&self) -> usize {
        match &self.storage {
            Storage::Dense(adj) => adj.iter().filter(|&&a| a).count(),
            Storage::Sparse(lists) => lists.iter().map(Vec::len).sum(),
        }
    }

    /// Parses the edge-list text format: a header line `n=<count>` followed
    /// by one `src dst` pair per line. Blank lines are ignored.
    pub fn load_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(Error::Empty("edge list"))?;
        let n = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected header `n=<count>`, got `{header}`"),
            })?;
        let mut edges = Vec::new();
        for (line, content) in lines {
            let parsed: Vec<_> = content.split_whitespace().map(str::parse::<usize>).collect();
            match parsed.as_slice() {
                [Ok(src), Ok(dst)] => edges.push((*src, *dst)),
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected `src dst`, got `{content}`"),
                    })
                }
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Canonical edge-list text: header, then edges sorted by source then
    /// destination.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for src in 0..self.n {
            for dst in self.out_neighbors(src) {
                let _ = writeln!(out, "{src} {dst}");
            }
        }
        out
    }
}

pub enum OutNeighbors<'a> {
    Dense { row: &'a [bool], next: usize },
    Sparse(std::slice::Iter<'a, usize>),
}

impl Iterator for OutNeighbors<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            OutNeighbors::Dense { row, next } => {
                while *next < row.len() {
                    let j = *next;
                    *next += 1;
                    if row[j] {
                        return Some(j);
                    }
                }
                None
            }
            OutNeighbors::Sparse(it) => it.next().copied(),
        }
    }
}
