//! Simple undirected communication graphs.
//!
//! Edge lists speak the 1-based node labels used in the edge-list text
//! format (`1..=n`). Everything that indexes a state vector (neighbor
//! lists, degrees, Laplacian rows) uses 0-based positions, so node label
//! `k` lives at position `k - 1`.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

/// Immutable simple undirected graph with sorted neighbor sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Sorted, deduplicated edges as 1-based label pairs with `i < j`.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph on `n` nodes from 1-based label pairs.
    ///
    /// Duplicate edges and both orientations of the same edge collapse to
    /// one edge. Self-loops and labels outside `1..=n` are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            for index in [a, b] {
                if index == 0 || index > n {
                    return Err(Error::NodeOutOfRange { index, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        normalized.dedup();

        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &normalized {
            adjacency[a - 1].push(b - 1);
            adjacency[b - 1].push(a - 1);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            edges: normalized,
            adjacency,
        })
    }

    /// Path `1 - 2 - ... - n`.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        Self::from_edges(n, &edges)
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                edges.push((i, j));
            }
        }
        Self::from_edges(n, &edges)
    }

    /// The six-node graph used for the reference simulation: two leaves on
    /// node 3, two leaves on node 4, and the bridge 3 - 4.
    pub fn fig6() -> Self {
        Self::from_edges(6, &[(1, 3), (2, 3), (3, 4), (4, 5), (4, 6)])
            .expect("fixed edge list is valid")
    }

    /// Hub-plus-clique graph: nodes `2..=n` form a complete graph and node 1
    /// is attached to nodes `2..=r+1`.
    pub fn worst_case(n: usize, r: usize) -> Result<Self> {
        if n < 3 || r == 0 || r > n - 1 {
            return Err(Error::InvalidWorstCase { n, r });
        }
        let mut edges: Vec<_> = (2..=r + 1).map(|j| (1, j)).collect();
        for i in 2..=n {
            for j in i + 1..=n {
                edges.push((i, j));
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Erdős–Rényi graph with edge probability `2 ln(n) / n` (capped at 1),
    /// redrawn until connected. Gives up after `max_attempts` draws.
    pub fn random_connected<R: Rng + ?Sized>(
        n: usize,
        rng: &mut R,
        max_attempts: usize,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let p = if n == 1 {
            1.0
        } else {
            (2.0 * (n as f64).ln() / n as f64).min(1.0)
        };
        for _ in 0..max_attempts {
            let mut edges = Vec::new();
            for i in 1..=n {
                for j in i + 1..=n {
                    if rng.gen_bool(p) {
                        edges.push((i, j));
                    }
                }
            }
            let g = Self::from_edges(n, &edges)?;
            if g.is_connected() {
                return Ok(g);
            }
        }
        Err(Error::GenerationFailed(max_attempts))
    }

    /// Parses the edge-list text format: first non-comment line is `n`,
    /// then one whitespace-separated `i j` pair per line. `#` starts a
    /// comment.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("expected a non-negative integer, found `{s}`"),
                })
            };
            match (n, fields.as_slice()) {
                (None, [count]) => n = Some(parse(count)?),
                (None, _) => {
                    return Err(Error::Parse {
                        line,
                        msg: "first line must hold the node count".into(),
                    })
                }
                (Some(_), [a, b]) => edges.push((parse(a)?, parse(b)?)),
                (Some(_), _) => {
                    return Err(Error::Parse {
                        line,
                        msg: "expected exactly two node labels".into(),
                    })
                }
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "missing node count".into(),
        })?;
        Self::from_edges(n, &edges)
    }

    pub fn read_edge_list(path: &Path) -> std::result::Result<Self, EdgeListError> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::parse_edge_list(&text)?)
    }

    /// Renders the graph in the edge-list text format.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Deduplicated edges as sorted 1-based label pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor positions of node position `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Breadth-first reachability from the first node.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.n
    }

    /// Integer Laplacian: degree on the diagonal, -1 per edge.
    pub fn laplacian(&self) -> Vec<Vec<i64>> {
        let mut l = vec![vec![0i64; self.n]; self.n];
        for (i, row) in l.iter_mut().enumerate() {
            row[i] = self.adjacency[i].len() as i64;
            for &j in &self.adjacency[i] {
                row[j] = -1;
            }
        }
        l
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges=[", self.n)?;
        for (k, (a, b)) in self.edges.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}-{b}")?;
        }
        write!(f, "])")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EdgeListError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Graph(#[from] Error),
}
