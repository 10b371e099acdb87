//! Multigraphs with parallel arcs and loops, tree/path decompositions,
//! the graph families used by the pipeline, and edge-list I/O.
//!
//! Nodes are dense 0-based indices. Arcs are unordered pairs stored with
//! the smaller endpoint first; the arc list is kept sorted so that equal
//! graphs compare equal and every emission is deterministic. Loop arcs are
//! allowed and count twice towards the degree of their node.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("arc index {index} out of range (graph has {count} arcs)")]
    UnknownArc { index: usize, count: usize },
    #[error("node index {node} out of range (graph has {count} nodes)")]
    InvalidNode { node: usize, count: usize },
}

/// Undirected multigraph: loops and parallel arcs permitted.
#[derive(Debug, Clone)]
pub struct Multigraph {
    node_count: usize,
    arcs: Vec<(usize, usize)>,
    labels: Option<Vec<String>>,
}

impl PartialEq for Multigraph {
    fn eq(&self, other: &Self) -> bool {
        self.node_count == other.node_count && self.arcs == other.arcs
    }
}
impl Eq for Multigraph {}

impl Multigraph {
    pub fn new(node_count: usize) -> Self {
        Multigraph {
            node_count,
            arcs: Vec::new(),
            labels: None,
        }
    }

    pub fn from_arcs(node_count: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Multigraph::new(node_count);
        for (u, v) in arcs {
            g.add_arc(u, v);
        }
        g
    }

    /// Adds an unordered arc; panics on an out-of-range endpoint.
    pub fn add_arc(&mut self, u: usize, v: usize) {
        assert!(
            u < self.node_count && v < self.node_count,
            "arc ({u},{v}) out of range for {} nodes",
            self.node_count
        );
        let arc = if u <= v { (u, v) } else { (v, u) };
        let pos = self.arcs.partition_point(|a| *a <= arc);
        self.arcs.insert(pos, arc);
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Arcs in sorted order, smaller endpoint first.
    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn set_labels(&mut self, labels: Vec<String>) {
        self.labels = Some(labels);
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Loop arcs count twice.
    pub fn degree(&self, v: usize) -> usize {
        let mut d = 0;
        for &(a, b) in &self.arcs {
            if a == v {
                d += 1;
            }
            if b == v {
                d += 1;
            }
        }
        d
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.node_count];
        for &(a, b) in &self.arcs {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Neighbour lists without loops or duplicate entries.
    pub fn simple_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(a, b) in &self.arcs {
            if a == b {
                continue;
            }
            if !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }

    /// Same node set, loops dropped and parallel arcs merged.
    pub fn simplified(&self) -> Multigraph {
        let mut arcs: Vec<(usize, usize)> =
            self.arcs.iter().copied().filter(|&(a, b)| a != b).collect();
        arcs.sort_unstable();
        arcs.dedup();
        Multigraph {
            node_count: self.node_count,
            arcs,
            labels: None,
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return true;
        }
        let adj = self.simple_adjacency();
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut found = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    found += 1;
                    queue.push_back(w);
                }
            }
        }
        found == self.node_count
    }

    /// Parses the edge-list format: optional header `p <node_count>`, one
    /// arc `<u> <v>` per line, `#` starts a comment, duplicate lines are
    /// parallel arcs. The node count is `1 + max index` unless the header
    /// names a larger value.
    pub fn parse(text: &str) -> Result<Multigraph, GraphError> {
        let mut header: Option<usize> = None;
        let mut arcs: Vec<(usize, usize)> = Vec::new();
        let mut max_node: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            if tokens[0] == "p" {
                if header.is_some() || !arcs.is_empty() {
                    return Err(GraphError::Parse {
                        line: line_no,
                        msg: "header must appear once, before any arc".into(),
                    });
                }
                if tokens.len() != 2 {
                    return Err(GraphError::Parse {
                        line: line_no,
                        msg: "expected `p <node_count>`".into(),
                    });
                }
                let n = tokens[1].parse::<usize>().map_err(|e| GraphError::Parse {
                    line: line_no,
                    msg: format!("bad node count `{}`: {e}", tokens[1]),
                })?;
                header = Some(n);
                continue;
            }
            if tokens.len() != 2 {
                return Err(GraphError::Parse {
                    line: line_no,
                    msg: format!("expected `<u> <v>`, got {} token(s)", tokens.len()),
                });
            }
            let mut ends = [0usize; 2];
            for (slot, tok) in ends.iter_mut().zip(&tokens) {
                *slot = tok.parse::<usize>().map_err(|e| GraphError::Parse {
                    line: line_no,
                    msg: format!("bad node index `{tok}`: {e}"),
                })?;
            }
            max_node = Some(max_node.unwrap_or(0).max(ends[0]).max(ends[1]));
            arcs.push((ends[0].min(ends[1]), ends[0].max(ends[1])));
        }
        let implied = max_node.map_or(0, |m| m + 1);
        let node_count = header.unwrap_or(implied).max(implied);
        arcs.sort_unstable();
        Ok(Multigraph {
            node_count,
            arcs,
            labels: None,
        })
    }

    /// Deterministic inverse of [`Multigraph::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "p {}", self.node_count).unwrap();
        for &(u, v) in &self.arcs {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    /// Replaces each planned arc by a path through fresh degree-2 nodes.
    /// `plan` maps an index into [`Multigraph::arcs`] to the number of new
    /// nodes inserted on that arc.
    pub fn subdivide_arcs(&self, plan: &BTreeMap<usize, usize>) -> Result<Multigraph, GraphError> {
        for &idx in plan.keys() {
            if idx >= self.arcs.len() {
                return Err(GraphError::UnknownArc {
                    index: idx,
                    count: self.arcs.len(),
                });
            }
        }
        let mut next = self.node_count;
        let mut g = Multigraph::new(self.node_count);
        for (idx, &(u, v)) in self.arcs.iter().enumerate() {
            let extra = plan.get(&idx).copied().unwrap_or(0);
            if extra == 0 {
                g.arcs.push((u, v));
                continue;
            }
            g.node_count = next + extra;
            let mut prev = u;
            for i in 0..extra {
                g.arcs.push(ordered(prev, next + i));
                prev = next + i;
            }
            g.arcs.push(ordered(prev, v));
            next += extra;
        }
        g.node_count = g.node_count.max(next);
        g.arcs.sort_unstable();
        Ok(g)
    }

    pub fn path(n: usize) -> Multigraph {
        Multigraph::from_arcs(n.max(1), (1..n).map(|i| (i - 1, i)))
    }

    pub fn cycle(n: usize) -> Multigraph {
        assert!(n >= 1);
        Multigraph::from_arcs(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> Multigraph {
        let mut g = Multigraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_arc(u, v);
            }
        }
        g
    }

    pub fn star(leaves: usize) -> Multigraph {
        Multigraph::from_arcs(leaves + 1, (1..=leaves).map(|i| (0, i)))
    }
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Complete binary tree of the given height; `2^(h+1) - 1` nodes, node `i`
/// has children `2i+1` and `2i+2`.
pub fn complete_binary_tree(height: u32) -> Multigraph {
    let n = (1usize << (height + 1)) - 1;
    let mut g = Multigraph::new(n);
    for v in 1..n {
        g.add_arc((v - 1) / 2, v);
    }
    g
}

/// The k-by-k grid; `k*k` nodes and `2k(k-1)` arcs, row-major indexing.
pub fn grid(k: usize) -> Multigraph {
    assert!(k >= 1, "grid side must be at least 1");
    let mut g = Multigraph::new(k * k);
    for r in 0..k {
        for c in 0..k {
            let v = r * k + c;
            if c + 1 < k {
                g.add_arc(v, v + 1);
            }
            if r + 1 < k {
                g.add_arc(v, v + k);
            }
        }
    }
    g
}

/// Tree decomposition: bags indexed by host-tree nodes plus host arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<usize>>,
    pub host_arcs: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn new(mut bags: Vec<Vec<usize>>, host_arcs: Vec<(usize, usize)>) -> Self {
        for b in &mut bags {
            b.sort_unstable();
            b.dedup();
        }
        TreeDecomposition { bags, host_arcs }
    }

    /// Width is max bag size minus one; an empty decomposition reports 0.
    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(|b| b.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }
}

/// Path decomposition: the host is the path over the bag sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDecomposition {
    pub bags: Vec<Vec<usize>>,
}

impl PathDecomposition {
    pub fn new(mut bags: Vec<Vec<usize>>) -> Self {
        for b in &mut bags {
            b.sort_unstable();
            b.dedup();
        }
        PathDecomposition { bags }
    }

    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(|b| b.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    pub fn to_tree(&self) -> TreeDecomposition {
        let host_arcs = (1..self.bags.len()).map(|i| (i - 1, i)).collect();
        TreeDecomposition {
            bags: self.bags.clone(),
            host_arcs,
        }
    }
}

/// Outcome of checking a decomposition against a graph. The three named
/// conditions are reported independently; `failures` carries one line per
/// violation found.
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub host_is_tree: bool,
    pub node_coverage: bool,
    pub arc_coverage: bool,
    pub connected_subtrees: bool,
    pub width: usize,
    pub failures: Vec<String>,
}

impl DecompositionReport {
    pub fn is_valid(&self) -> bool {
        self.host_is_tree && self.node_coverage && self.arc_coverage && self.connected_subtrees
    }
}

pub fn validate_tree_decomposition(g: &Multigraph, td: &TreeDecomposition) -> DecompositionReport {
    let mut failures = Vec::new();
    let bag_count = td.bags.len();

    // Host must be a single tree: connected with |arcs| = |bags| - 1 and no
    // out-of-range endpoints.
    let mut host_is_tree = true;
    let mut host_adj = vec![Vec::new(); bag_count];
    for &(a, b) in &td.host_arcs {
        if a >= bag_count || b >= bag_count {
            host_is_tree = false;
            failures.push(format!("host arc ({a},{b}) references a missing bag"));
        } else {
            host_adj[a].push(b);
            host_adj[b].push(a);
        }
    }
    if host_is_tree && bag_count > 0 {
        if td.host_arcs.len() + 1 != bag_count {
            host_is_tree = false;
            failures.push(format!(
                "host has {} arcs on {} bags, not a tree",
                td.host_arcs.len(),
                bag_count
            ));
        } else {
            let mut seen = vec![false; bag_count];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            let mut found = 1;
            while let Some(v) = queue.pop_front() {
                for &w in &host_adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        found += 1;
                        queue.push_back(w);
                    }
                }
            }
            if found != bag_count {
                host_is_tree = false;
                failures.push("host tree is disconnected".into());
            }
        }
    }

    let mut covered = vec![false; g.node_count()];
    for bag in &td.bags {
        for &v in bag {
            if v < g.node_count() {
                covered[v] = true;
            } else {
                failures.push(format!("bag contains node {v} outside the graph"));
            }
        }
    }
    let node_coverage = covered.iter().all(|&c| c);
    if !node_coverage {
        let missing: Vec<usize> = (0..g.node_count()).filter(|&v| !covered[v]).collect();
        failures.push(format!("nodes {missing:?} appear in no bag"));
    }

    let mut arc_coverage = true;
    for &(u, v) in g.arcs() {
        let ok = td
            .bags
            .iter()
            .any(|b| b.binary_search(&u).is_ok() && b.binary_search(&v).is_ok());
        if !ok {
            arc_coverage = false;
            failures.push(format!("arc ({u},{v}) is contained in no bag"));
        }
    }

    // Sub-tree property: the bags containing each node must induce a
    // connected subgraph of the host.
    let mut connected_subtrees = true;
    for v in 0..g.node_count() {
        let holders: Vec<usize> = (0..bag_count)
            .filter(|&i| td.bags[i].binary_search(&v).is_ok())
            .collect();
        if holders.len() <= 1 {
            continue;
        }
        let mut seen = vec![false; bag_count];
        let mut queue = VecDeque::from([holders[0]]);
        seen[holders[0]] = true;
        let mut found = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &host_adj[i] {
                if !seen[j] && td.bags[j].binary_search(&v).is_ok() {
                    seen[j] = true;
                    found += 1;
                    queue.push_back(j);
                }
            }
        }
        if found != holders.len() {
            connected_subtrees = false;
            failures.push(format!("bags holding node {v} do not form a sub-tree"));
        }
    }

    DecompositionReport {
        host_is_tree,
        node_coverage,
        arc_coverage,
        connected_subtrees,
        width: td.width(),
        failures,
    }
}
