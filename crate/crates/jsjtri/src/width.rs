//! Treewidth and pathwidth solvers.
//!
//! Exact values come from iterative-deepening decision searches over
//! elimination orders (treewidth) and placement orders / vertex separation
//! (pathwidth), both with dead-state memoization on subset bitmasks, so
//! graphs must fit in 64 nodes and callers pass an explicit node budget.
//! Upper bounds use deterministic greedy orders (min-fill, boundary-greedy)
//! and always ship a witness decomposition; the lower bound is the better
//! of degeneracy and contraction min-degree. Ties everywhere break towards
//! the lowest node index so repeated runs are identical.

use std::collections::HashSet;

use thiserror::Error;

use crate::graph::{Multigraph, PathDecomposition, TreeDecomposition};

#[derive(Debug, Error)]
pub enum WidthError {
    #[error(
        "graph has {nodes} nodes, over the exact-solver budget {budget}; \
         use treewidth_upper/pathwidth_upper and treewidth_lower instead"
    )]
    BudgetExceeded { nodes: usize, budget: usize },
}

/// Default node budget for the exact solvers.
pub const DEFAULT_EXACT_BUDGET: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    UpperBound,
    LowerBound,
}

#[derive(Debug, Clone)]
pub enum Witness {
    Tree(TreeDecomposition),
    Path(PathDecomposition),
}

#[derive(Debug, Clone)]
pub struct WidthResult {
    pub value: usize,
    pub exactness: Exactness,
    pub witness: Option<Witness>,
}

impl WidthResult {
    pub fn witness_tree(&self) -> Option<TreeDecomposition> {
        match &self.witness {
            Some(Witness::Tree(td)) => Some(td.clone()),
            Some(Witness::Path(pd)) => Some(pd.to_tree()),
            None => None,
        }
    }
}

/// Loop-free deduplicated adjacency, the form every solver works on.
struct Simple {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl Simple {
    fn from(g: &Multigraph) -> Simple {
        Simple {
            n: g.node_count(),
            adj: g.simple_adjacency(),
        }
    }

    fn arcless(&self) -> bool {
        self.adj.iter().all(|l| l.is_empty())
    }

    fn bitmasks(&self) -> Vec<u64> {
        let mut m = vec![0u64; self.n];
        for (v, l) in self.adj.iter().enumerate() {
            for &u in l {
                m[v] |= 1u64 << u;
            }
        }
        m
    }
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        !0u64
    } else {
        (1u64 << n) - 1
    }
}

// ---------------------------------------------------------------------------
// lower bounds

fn degeneracy(s: &Simple) -> usize {
    let mut deg: Vec<usize> = s.adj.iter().map(|l| l.len()).collect();
    let mut alive = vec![true; s.n];
    let mut best = 0;
    for _ in 0..s.n {
        let v = (0..s.n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (deg[v], v))
            .unwrap();
        best = best.max(deg[v]);
        alive[v] = false;
        for &u in &s.adj[v] {
            if alive[u] {
                deg[u] -= 1;
            }
        }
    }
    best
}

/// Contraction min-degree: repeatedly contract a minimum-degree node into
/// its lowest-index neighbour, tracking the largest minimum degree seen.
/// Every recorded value is the min degree of some minor, hence a treewidth
/// lower bound.
fn minor_min_degree(s: &Simple) -> usize {
    let mut nb: Vec<HashSet<usize>> = s.adj.iter().map(|l| l.iter().copied().collect()).collect();
    let mut alive: Vec<usize> = (0..s.n).collect();
    let mut best = 0;
    while alive.len() > 1 {
        let &v = alive.iter().min_by_key(|&&v| (nb[v].len(), v)).unwrap();
        best = best.max(nb[v].len());
        if nb[v].is_empty() {
            alive.retain(|&x| x != v);
            continue;
        }
        let &target = nb[v].iter().min().unwrap();
        let merged: Vec<usize> = nb[v].iter().copied().filter(|&u| u != target).collect();
        for u in merged {
            nb[u].remove(&v);
            nb[u].insert(target);
            nb[target].insert(u);
        }
        nb[target].remove(&v);
        nb[v].clear();
        alive.retain(|&x| x != v);
    }
    best
}

pub fn treewidth_lower(g: &Multigraph) -> WidthResult {
    let s = Simple::from(&g.simplified());
    let value = degeneracy(&s).max(minor_min_degree(&s));
    WidthResult {
        value,
        exactness: Exactness::LowerBound,
        witness: None,
    }
}

// ---------------------------------------------------------------------------
// upper bounds

/// Min-fill elimination order; ties fall back to degree, then index.
fn min_fill_order(s: &Simple) -> Vec<usize> {
    let mut nb: Vec<HashSet<usize>> = s.adj.iter().map(|l| l.iter().copied().collect()).collect();
    let mut alive = vec![true; s.n];
    let mut order = Vec::with_capacity(s.n);
    for _ in 0..s.n {
        let mut pick = None;
        for v in 0..s.n {
            if !alive[v] {
                continue;
            }
            let ns: Vec<usize> = nb[v].iter().copied().collect();
            let mut fill = 0usize;
            for i in 0..ns.len() {
                for j in i + 1..ns.len() {
                    if !nb[ns[i]].contains(&ns[j]) {
                        fill += 1;
                    }
                }
            }
            let key = (fill, ns.len(), v);
            if pick.is_none_or(|(best, _)| key < best) {
                pick = Some((key, v));
            }
        }
        let (_, v) = pick.unwrap();
        let ns: Vec<usize> = nb[v].iter().copied().collect();
        for i in 0..ns.len() {
            for j in i + 1..ns.len() {
                nb[ns[i]].insert(ns[j]);
                nb[ns[j]].insert(ns[i]);
            }
        }
        for &u in &ns {
            nb[u].remove(&v);
        }
        alive[v] = false;
        order.push(v);
    }
    order
}

/// Builds a tree decomposition from an elimination order by simulating the
/// fill-in; bag of `v` is `v` plus its neighbourhood at elimination time.
fn decomposition_from_order(s: &Simple, order: &[usize]) -> TreeDecomposition {
    let mut nb: Vec<HashSet<usize>> = s.adj.iter().map(|l| l.iter().copied().collect()).collect();
    let mut pos = vec![0usize; s.n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut bags: Vec<Vec<usize>> = Vec::with_capacity(s.n);
    for &v in order {
        let ns: Vec<usize> = nb[v].iter().copied().collect();
        let mut bag = ns.clone();
        bag.push(v);
        bag.sort_unstable();
        bags.push(bag);
        for i in 0..ns.len() {
            for j in i + 1..ns.len() {
                nb[ns[i]].insert(ns[j]);
                nb[ns[j]].insert(ns[i]);
            }
        }
        for &u in &ns {
            nb[u].remove(&v);
        }
        nb[v].clear();
    }
    let mut host = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        // parent bag: the bag of the earliest-eliminated later neighbour
        let later = bags[i]
            .iter()
            .copied()
            .filter(|&u| u != v)
            .min_by_key(|&u| pos[u]);
        match later {
            Some(u) => host.push((i, pos[u])),
            None => {
                if i + 1 < order.len() {
                    host.push((i, i + 1));
                }
            }
        }
    }
    TreeDecomposition::new(bags, host)
}

pub fn treewidth_upper(g: &Multigraph) -> WidthResult {
    let s = Simple::from(&g.simplified());
    if s.n == 0 {
        return WidthResult {
            value: 0,
            exactness: Exactness::UpperBound,
            witness: Some(Witness::Tree(TreeDecomposition::new(vec![vec![]], vec![]))),
        };
    }
    let order = min_fill_order(&s);
    let td = decomposition_from_order(&s, &order);
    WidthResult {
        value: td.width(),
        exactness: Exactness::UpperBound,
        witness: Some(Witness::Tree(td)),
    }
}

/// Greedy vertex-separation order: always place the node minimizing the
/// resulting boundary, lowest index first on ties.
fn greedy_vs_order(s: &Simple) -> Vec<usize> {
    let n = s.n;
    let mut placed = vec![false; n];
    let mut outside_deg: Vec<usize> = s.adj.iter().map(|l| l.len()).collect();
    let mut active = 0usize;
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut pick: Option<((usize, usize), usize)> = None;
        for v in 0..n {
            if placed[v] {
                continue;
            }
            // boundary after placing v, computed from out-degrees
            let mut a = active;
            let mut v_outside = 0usize;
            for &u in &s.adj[v] {
                if placed[u] {
                    if outside_deg[u] == 1 {
                        a -= 1; // u becomes inactive
                    }
                } else {
                    v_outside += 1;
                }
            }
            if v_outside > 0 {
                a += 1;
            }
            let key = (a, v);
            if pick.is_none_or(|(best, _)| key < best) {
                pick = Some((key, v));
            }
        }
        let (_, v) = pick.unwrap();
        // commit
        let mut v_outside = 0usize;
        for &u in &s.adj[v] {
            if placed[u] {
                outside_deg[u] -= 1;
                if outside_deg[u] == 0 {
                    active -= 1;
                }
            } else {
                v_outside += 1;
            }
        }
        outside_deg[v] = v_outside;
        if v_outside > 0 {
            active += 1;
        }
        placed[v] = true;
        order.push(v);
    }
    order
}

/// Path decomposition read off a placement order: bag `i` is the boundary
/// before step `i` plus the placed node.
fn path_decomposition_from_order(s: &Simple, order: &[usize]) -> PathDecomposition {
    let n = s.n;
    if n == 0 {
        return PathDecomposition::new(vec![vec![]]);
    }
    let mut placed = vec![false; n];
    let mut bags = Vec::with_capacity(n);
    for (i, &v) in order.iter().enumerate() {
        let mut bag = vec![v];
        for &u in order[..i].iter() {
            let boundary = s.adj[u].iter().any(|&w| !placed[w]);
            if boundary {
                bag.push(u);
            }
        }
        bag.sort_unstable();
        bags.push(bag);
        placed[v] = true;
    }
    PathDecomposition::new(bags)
}

pub fn pathwidth_upper(g: &Multigraph) -> WidthResult {
    let s = Simple::from(&g.simplified());
    if s.n == 0 {
        return WidthResult {
            value: 0,
            exactness: Exactness::UpperBound,
            witness: Some(Witness::Path(PathDecomposition::new(vec![vec![]]))),
        };
    }
    let order = greedy_vs_order(&s);
    let pd = path_decomposition_from_order(&s, &order);
    WidthResult {
        value: pd.width(),
        exactness: Exactness::UpperBound,
        witness: Some(Witness::Path(pd)),
    }
}

// ---------------------------------------------------------------------------
// exact treewidth

/// Eliminated-degree of `v` once the set `s` is gone: neighbours of `v`
/// reachable through eliminated vertices, counted outside `s ∪ {v}`.
fn elim_degree(masks: &[u64], s: u64, v: usize) -> u32 {
    let vbit = 1u64 << v;
    let mut reach = masks[v] & !s;
    let mut visited = vbit | (masks[v] & s);
    let mut todo = masks[v] & s;
    while todo != 0 {
        let u = todo.trailing_zeros() as usize;
        todo &= todo - 1;
        let nb = masks[u];
        reach |= nb & !s;
        let fresh = nb & s & !visited;
        visited |= fresh;
        todo |= fresh;
    }
    (reach & !vbit).count_ones()
}

/// Searches for an elimination order whose eliminated degrees never exceed
/// `limit`. Dead prefixes are memoized; a node of eliminated degree at most
/// one is always taken greedily, which is safe.
fn tw_decision(masks: &[u64], n: usize, limit: u32) -> Option<Vec<usize>> {
    let full = full_mask(n);
    let mut dead: HashSet<u64> = HashSet::new();
    let mut order = Vec::with_capacity(n);

    fn dfs(
        masks: &[u64],
        full: u64,
        limit: u32,
        s: u64,
        dead: &mut HashSet<u64>,
        order: &mut Vec<usize>,
    ) -> bool {
        if s == full {
            return true;
        }
        if dead.contains(&s) {
            return false;
        }
        let mut cands: Vec<(u32, usize)> = Vec::new();
        let mut rest = full & !s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let q = elim_degree(masks, s, v);
            if q <= 1 {
                order.push(v);
                if dfs(masks, full, limit, s | (1u64 << v), dead, order) {
                    return true;
                }
                order.pop();
                dead.insert(s);
                return false;
            }
            if q <= limit {
                cands.push((q, v));
            }
        }
        cands.sort_unstable();
        for (_, v) in cands {
            order.push(v);
            if dfs(masks, full, limit, s | (1u64 << v), dead, order) {
                return true;
            }
            order.pop();
        }
        dead.insert(s);
        false
    }

    if dfs(masks, full, limit, 0, &mut dead, &mut order) {
        Some(order)
    } else {
        None
    }
}

/// Exact treewidth with a witness tree decomposition. Parallel arcs and
/// loops are removed first; they never change the value.
pub fn treewidth_exact(g: &Multigraph, budget: usize) -> Result<WidthResult, WidthError> {
    let simple = g.simplified();
    let s = Simple::from(&simple);
    if s.n > budget || s.n > 64 {
        return Err(WidthError::BudgetExceeded {
            nodes: s.n,
            budget: budget.min(64),
        });
    }
    if s.n == 0 || s.arcless() {
        let bags = if s.n == 0 {
            vec![vec![]]
        } else {
            (0..s.n).map(|v| vec![v]).collect()
        };
        let host = (1..bags.len()).map(|i| (i - 1, i)).collect();
        return Ok(WidthResult {
            value: 0,
            exactness: Exactness::Exact,
            witness: Some(Witness::Tree(TreeDecomposition::new(bags, host))),
        });
    }
    let lb = degeneracy(&s).max(minor_min_degree(&s)) as u32;
    let ub_order = min_fill_order(&s);
    let ub_td = decomposition_from_order(&s, &ub_order);
    let ub = ub_td.width() as u32;
    let masks = s.bitmasks();
    let mut value = ub;
    let mut witness = ub_td;
    for limit in lb..ub {
        if let Some(order) = tw_decision(&masks, s.n, limit) {
            witness = decomposition_from_order(&s, &order);
            value = witness.width() as u32;
            debug_assert!(value <= limit);
            break;
        }
    }
    Ok(WidthResult {
        value: value as usize,
        exactness: Exactness::Exact,
        witness: Some(Witness::Tree(witness)),
    })
}

// ---------------------------------------------------------------------------
// exact pathwidth (vertex separation)

/// Boundary size of `s ∪ {v}`: placed nodes that still have a neighbour
/// outside.
fn boundary_after(masks: &[u64], full: u64, s: u64, v: usize) -> u32 {
    let t = s | (1u64 << v);
    let outside = full & !t;
    let mut count = 0;
    let mut rest = t;
    while rest != 0 {
        let u = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if masks[u] & outside != 0 {
            count += 1;
        }
    }
    count
}

/// Searches for a placement order keeping the boundary at or below `limit`.
/// A node whose whole neighbourhood is already placed can be taken
/// immediately: the boundary can only shrink, and moving such a node earlier
/// never hurts any later prefix.
fn vs_decision(masks: &[u64], n: usize, limit: u32) -> Option<Vec<usize>> {
    let full = full_mask(n);
    let mut dead: HashSet<u64> = HashSet::new();
    let mut order = Vec::with_capacity(n);

    fn dfs(
        masks: &[u64],
        full: u64,
        limit: u32,
        s: u64,
        dead: &mut HashSet<u64>,
        order: &mut Vec<usize>,
    ) -> bool {
        if s == full {
            return true;
        }
        if dead.contains(&s) {
            return false;
        }
        let mut rest = full & !s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if masks[v] & !s == 0 {
                order.push(v);
                if dfs(masks, full, limit, s | (1u64 << v), dead, order) {
                    return true;
                }
                order.pop();
                dead.insert(s);
                return false;
            }
        }
        let mut cands: Vec<(u32, usize)> = Vec::new();
        let mut rest = full & !s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let b = boundary_after(masks, full, s, v);
            if b <= limit {
                cands.push((b, v));
            }
        }
        cands.sort_unstable();
        for (_, v) in cands {
            order.push(v);
            if dfs(masks, full, limit, s | (1u64 << v), dead, order) {
                return true;
            }
            order.pop();
        }
        dead.insert(s);
        false
    }

    if dfs(masks, full, limit, 0, &mut dead, &mut order) {
        Some(order)
    } else {
        None
    }
}

/// Exact pathwidth via vertex separation number, with a witness path
/// decomposition.
pub fn pathwidth_exact(g: &Multigraph, budget: usize) -> Result<WidthResult, WidthError> {
    let simple = g.simplified();
    let s = Simple::from(&simple);
    if s.n > budget || s.n > 64 {
        return Err(WidthError::BudgetExceeded {
            nodes: s.n,
            budget: budget.min(64),
        });
    }
    if s.n == 0 || s.arcless() {
        let bags = if s.n == 0 {
            vec![vec![]]
        } else {
            (0..s.n).map(|v| vec![v]).collect()
        };
        return Ok(WidthResult {
            value: 0,
            exactness: Exactness::Exact,
            witness: Some(Witness::Path(PathDecomposition::new(bags))),
        });
    }
    let lb = degeneracy(&s).max(minor_min_degree(&s)) as u32;
    let masks = s.bitmasks();
    let mut k = lb.max(1);
    loop {
        if let Some(order) = vs_decision(&masks, s.n, k) {
            let pd = path_decomposition_from_order(&s, &order);
            debug_assert!(pd.width() <= k as usize);
            return Ok(WidthResult {
                value: k as usize,
                exactness: Exactness::Exact,
                witness: Some(Witness::Path(pd)),
            });
        }
        k += 1;
        assert!(k as usize <= s.n, "vertex separation search exceeded n");
    }
}

// ---------------------------------------------------------------------------

/// Convenience used by the assembler: exact within the budget, otherwise the
/// heuristic upper bound (a larger value only strengthens the distance
/// budget downstream).
pub fn treewidth_auto(g: &Multigraph, budget: usize) -> WidthResult {
    treewidth_exact(g, budget).unwrap_or_else(|_| treewidth_upper(g))
}

pub fn pathwidth_auto(g: &Multigraph, budget: usize) -> WidthResult {
    pathwidth_exact(g, budget).unwrap_or_else(|_| pathwidth_upper(g))
}
