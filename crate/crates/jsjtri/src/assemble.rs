//! The assembly pipeline: a connected multigraph in, a closed orientable
//! triangulated 3-manifold plus provenance metadata out.
//!
//! Every node of degree `k` contributes a block of `9k+6` tetrahedra with
//! `k` free boundary tori; every arc consumes one torus at each endpoint
//! and joins them through a layered chain whose gluing map has Farey
//! distance at least `K * delta`, where
//! `delta = max(18 (tw+1), 4 (3 pw + 1))` is computed from the graph's
//! widths. Tetrahedron ranges of blocks and chains partition the final
//! table, so the construction can be audited piece by piece.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use thiserror::Error;

use crate::block::{build_block, TorusFraming};
use crate::gluing::{
    gluing_distance, pick_high_distance_map, realize_as_layers, LayerState, Slope, TorusMap,
};
use crate::graph::Multigraph;
use crate::tri::Triangulation;
use crate::width::{
    pathwidth_exact, pathwidth_upper, treewidth_exact, treewidth_upper, WidthError, WidthResult,
    DEFAULT_EXACT_BUDGET,
};

#[derive(Debug, Error)]
pub enum AssembleError {
    #[error("the graph is empty; nothing to build")]
    EmptyGraph,
    #[error("the graph is disconnected; assemble components separately")]
    Disconnected,
    #[error("node {0} has degree 0: a block without boundary tori has no gluing site")]
    IsolatedNode(usize),
    #[error("distance factor K must be at least 1")]
    BadDistanceFactor,
    #[error("delta override must be at least 1")]
    BadDeltaOverride,
    #[error("width solver: {0}")]
    Width(#[from] WidthError),
    #[error("block construction: {0}")]
    Block(#[from] crate::block::BlockError),
    #[error("gluing construction: {0}")]
    Gluing(#[from] crate::gluing::GluingError),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("metadata parse error on line {line}: {msg}")]
    MetaParse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthMode {
    /// Exact when the graph fits the solver budget, heuristic otherwise.
    Auto,
    /// Fail if the exact solver refuses.
    ExactOnly,
    /// Always use the heuristic upper bounds.
    HeuristicOnly,
}

#[derive(Debug, Clone)]
pub struct AssemblyConfig {
    /// The distance multiplier K; chains realize distance >= K * delta.
    pub distance_factor: u64,
    pub delta_override: Option<u64>,
    pub width_mode: WidthMode,
    pub exact_budget: usize,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            distance_factor: 1,
            delta_override: None,
            width_mode: WidthMode::Auto,
            exact_budget: DEFAULT_EXACT_BUDGET,
        }
    }
}

/// A width value as used by the pipeline, with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WidthUsed {
    pub value: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeMeta {
    pub node: usize,
    pub degree: usize,
    pub tet_start: usize,
    pub tet_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcMeta {
    /// Index into the graph's sorted arc list.
    pub arc: usize,
    pub ends: (usize, usize),
    pub map: TorusMap,
    pub achieved_distance: u64,
    pub tet_start: usize,
    pub tet_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblyMetadata {
    pub delta: u64,
    pub distance_factor: u64,
    pub tw: WidthUsed,
    pub pw: WidthUsed,
    pub total_tetrahedra: usize,
    pub nodes: Vec<NodeMeta>,
    pub arcs: Vec<ArcMeta>,
}

impl AssemblyMetadata {
    pub fn required_distance(&self) -> u64 {
        self.distance_factor * self.delta
    }

    /// Provenance lookup: which block or chain owns a tetrahedron.
    pub fn owner_of(&self, tet: usize) -> Option<Owner> {
        for n in &self.nodes {
            if (n.tet_start..n.tet_start + n.tet_count).contains(&tet) {
                return Some(Owner::Block(n.node));
            }
        }
        for a in &self.arcs {
            if (a.tet_start..a.tet_start + a.tet_count).contains(&tet) {
                return Some(Owner::Chain(a.arc));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    Block(usize),
    Chain(usize),
}

fn width_pair(
    g: &Multigraph,
    config: &AssemblyConfig,
) -> Result<(WidthUsed, WidthUsed), AssembleError> {
    let to_used = |r: &WidthResult, exact: bool| WidthUsed {
        value: r.value,
        exact,
    };
    let (tw, pw) = match config.width_mode {
        WidthMode::ExactOnly => (
            to_used(&treewidth_exact(g, config.exact_budget)?, true),
            to_used(&pathwidth_exact(g, config.exact_budget)?, true),
        ),
        WidthMode::HeuristicOnly => (
            to_used(&treewidth_upper(g), false),
            to_used(&pathwidth_upper(g), false),
        ),
        WidthMode::Auto => {
            let tw = match treewidth_exact(g, config.exact_budget) {
                Ok(r) => to_used(&r, true),
                Err(WidthError::BudgetExceeded { .. }) => to_used(&treewidth_upper(g), false),
            };
            let pw = match pathwidth_exact(g, config.exact_budget) {
                Ok(r) => to_used(&r, true),
                Err(WidthError::BudgetExceeded { .. }) => to_used(&pathwidth_upper(g), false),
            };
            (tw, pw)
        }
    };
    Ok((tw, pw))
}

/// The distance budget `delta = max(18 (tw+1), 4 (3 pw + 1))`, along with
/// the width values used to compute it.
pub fn compute_delta(
    g: &Multigraph,
    config: &AssemblyConfig,
) -> Result<(u64, WidthUsed, WidthUsed), AssembleError> {
    let (tw, pw) = width_pair(g, config)?;
    let delta = match config.delta_override {
        Some(d) => {
            if d == 0 {
                return Err(AssembleError::BadDeltaOverride);
            }
            d
        }
        None => delta_formula(tw.value, pw.value),
    };
    Ok((delta, tw, pw))
}

pub fn delta_formula(tw: usize, pw: usize) -> u64 {
    let a = 18 * (tw as u64 + 1);
    let b = 4 * (3 * pw as u64 + 1);
    a.max(b)
}

/// Deterministic assignment of each arc endpoint to a boundary torus of
/// its node's block: endpoints sorted by (arc index, side) take tori in
/// order. Loops occupy two tori of the same block.
pub fn assign_boundary_tori(g: &Multigraph) -> Vec<BTreeMap<(usize, u8), usize>> {
    let mut per_node: Vec<BTreeMap<(usize, u8), usize>> = vec![BTreeMap::new(); g.node_count()];
    let mut used = vec![0usize; g.node_count()];
    for (e, &(u, v)) in g.arcs().iter().enumerate() {
        per_node[u].insert((e, 0), used[u]);
        used[u] += 1;
        per_node[v].insert((e, 1), used[v]);
        used[v] += 1;
    }
    per_node
}

/// Runs the whole pipeline. The output is a closed, orientable
/// triangulation; blocks come first in the table (one range per node, in
/// node order), then one chain range per arc in arc order.
pub fn build_manifold(
    g: &Multigraph,
    config: &AssemblyConfig,
) -> Result<(Triangulation, AssemblyMetadata), AssembleError> {
    if config.distance_factor == 0 {
        return Err(AssembleError::BadDistanceFactor);
    }
    if g.node_count() == 0 {
        return Err(AssembleError::EmptyGraph);
    }
    if !g.is_connected() {
        return Err(AssembleError::Disconnected);
    }
    let degrees = g.degrees();
    if let Some(v) = degrees.iter().position(|&d| d == 0) {
        return Err(AssembleError::IsolatedNode(v));
    }

    let (delta, tw, pw) = compute_delta(g, config)?;
    let required = config.distance_factor * delta;
    let fiber = Slope::new(0, 1);

    let mut tri = Triangulation::new(0);
    let mut nodes = Vec::with_capacity(g.node_count());
    let mut tori: Vec<Vec<TorusFraming>> = Vec::with_capacity(g.node_count());
    for (v, &degree) in degrees.iter().enumerate() {
        let block = build_block(degree)?;
        let offset = tri.append(&block.tri);
        nodes.push(NodeMeta {
            node: v,
            degree,
            tet_start: offset,
            tet_count: block.tri.tetrahedron_count(),
        });
        tori.push(block.tori.iter().map(|f| f.shifted(offset)).collect());
    }

    let assignment = assign_boundary_tori(g);
    let mut arcs = Vec::with_capacity(g.arc_count());
    for (e, &(u, v)) in g.arcs().iter().enumerate() {
        let map = pick_high_distance_map(required, &fiber, &fiber);
        let layers = realize_as_layers(&map)?;
        let src = tori[u][assignment[u][&(e, 0)]];
        let dst = tori[v][assignment[v][&(e, 1)]];
        let start = tri.tetrahedron_count();
        let mut state = LayerState::from_framing(&src);
        for &k in &layers.flips {
            state.flip(&mut tri, k);
        }
        let got = TorusMap::new(state.frame_matrix())
            .map_err(|e| AssembleError::Internal(e.to_string()))?;
        if got.canonical() != map.inverse().canonical() {
            return Err(AssembleError::Internal(format!(
                "chain frame for arc {e} does not match the picked map"
            )));
        }
        state.close_onto(&mut tri, &dst);
        arcs.push(ArcMeta {
            arc: e,
            ends: (u, v),
            map,
            achieved_distance: layers.achieved_distance,
            tet_start: start,
            tet_count: tri.tetrahedron_count() - start,
        });
        if layers.achieved_distance < required {
            return Err(AssembleError::Internal(format!(
                "arc {e}: achieved distance {} below budget {required}",
                layers.achieved_distance
            )));
        }
    }

    let meta = AssemblyMetadata {
        delta,
        distance_factor: config.distance_factor,
        tw,
        pw,
        total_tetrahedra: tri.tetrahedron_count(),
        nodes,
        arcs,
    };

    tri.validate()
        .map_err(|e| AssembleError::Internal(format!("gluing table invalid: {e}")))?;
    if !tri.is_closed() {
        return Err(AssembleError::Internal(
            "assembled triangulation is not closed".into(),
        ));
    }
    Ok((tri, meta))
}

// ---------------------------------------------------------------------------
// metadata document

impl AssemblyMetadata {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "jsj-assembly 1").unwrap();
        writeln!(out, "delta {}", self.delta).unwrap();
        writeln!(out, "K {}", self.distance_factor).unwrap();
        let tag = |w: &WidthUsed| if w.exact { "exact" } else { "upper" };
        writeln!(out, "tw {} {}", self.tw.value, tag(&self.tw)).unwrap();
        writeln!(out, "pw {} {}", self.pw.value, tag(&self.pw)).unwrap();
        writeln!(out, "total {}", self.total_tetrahedra).unwrap();
        writeln!(out, "nodes {}", self.nodes.len()).unwrap();
        for n in &self.nodes {
            writeln!(
                out,
                "node {} degree {} tets {} {}",
                n.node, n.degree, n.tet_start, n.tet_count
            )
            .unwrap();
        }
        writeln!(out, "arcs {}", self.arcs.len()).unwrap();
        for a in &self.arcs {
            let m = a.map.rows();
            writeln!(
                out,
                "arc {} ends {} {} map {} {} {} {} distance {} tets {} {}",
                a.arc,
                a.ends.0,
                a.ends.1,
                m[0][0],
                m[0][1],
                m[1][0],
                m[1][1],
                a.achieved_distance,
                a.tet_start,
                a.tet_count
            )
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<AssemblyMetadata, AssembleError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let mut next = |what: &str| -> Result<(usize, Vec<String>), AssembleError> {
            let (no, line) = lines.next().ok_or(AssembleError::MetaParse {
                line: 0,
                msg: format!("unexpected end of document, wanted {what}"),
            })?;
            Ok((no, line.split_whitespace().map(str::to_string).collect()))
        };
        let expect_kv = |(no, toks): (usize, Vec<String>),
                         key: &str,
                         n: usize|
         -> Result<Vec<String>, AssembleError> {
            if toks.len() != n + 1 || toks[0] != key {
                return Err(AssembleError::MetaParse {
                    line: no,
                    msg: format!("expected `{key}` with {n} value(s)"),
                });
            }
            Ok(toks[1..].to_vec())
        };
        let parse_num = |no: usize, s: &str| -> Result<i64, AssembleError> {
            s.parse::<i64>().map_err(|e| AssembleError::MetaParse {
                line: no,
                msg: format!("bad number `{s}`: {e}"),
            })
        };

        let head = next("header")?;
        expect_kv(head, "jsj-assembly", 1)?;
        let (no, toks) = next("delta")?;
        let delta = parse_num(no, &expect_kv((no, toks), "delta", 1)?[0])? as u64;
        let (no, toks) = next("K")?;
        let k = parse_num(no, &expect_kv((no, toks), "K", 1)?[0])? as u64;
        let parse_width =
            |(no, toks): (usize, Vec<String>), key: &str| -> Result<WidthUsed, AssembleError> {
                let vals = expect_kv((no, toks), key, 2)?;
                Ok(WidthUsed {
                    value: parse_num(no, &vals[0])? as usize,
                    exact: vals[1] == "exact",
                })
            };
        let tw = parse_width(next("tw")?, "tw")?;
        let pw = parse_width(next("pw")?, "pw")?;
        let (no, toks) = next("total")?;
        let total = parse_num(no, &expect_kv((no, toks), "total", 1)?[0])? as usize;
        let (no, toks) = next("nodes")?;
        let node_count = parse_num(no, &expect_kv((no, toks), "nodes", 1)?[0])? as usize;
        let mut nodes = Vec::with_capacity(node_count);
        for _ in 0..node_count {
            let (no, toks) = next("node line")?;
            if toks.len() != 7 || toks[0] != "node" || toks[2] != "degree" || toks[4] != "tets" {
                return Err(AssembleError::MetaParse {
                    line: no,
                    msg: "expected `node <i> degree <d> tets <start> <count>`".into(),
                });
            }
            nodes.push(NodeMeta {
                node: parse_num(no, &toks[1])? as usize,
                degree: parse_num(no, &toks[3])? as usize,
                tet_start: parse_num(no, &toks[5])? as usize,
                tet_count: parse_num(no, &toks[6])? as usize,
            });
        }
        let (no, toks) = next("arcs")?;
        let arc_count = parse_num(no, &expect_kv((no, toks), "arcs", 1)?[0])? as usize;
        let mut arcs = Vec::with_capacity(arc_count);
        for _ in 0..arc_count {
            let (no, toks) = next("arc line")?;
            if toks.len() != 15
                || toks[0] != "arc"
                || toks[2] != "ends"
                || toks[5] != "map"
                || toks[10] != "distance"
                || toks[12] != "tets"
            {
                return Err(AssembleError::MetaParse {
                    line: no,
                    msg: "expected `arc <i> ends <u> <v> map <a> <b> <c> <d> \
                          distance <d> tets <start> <count>`"
                        .into(),
                });
            }
            let parse_big = |s: &str| -> Result<BigInt, AssembleError> {
                BigInt::from_str(s).map_err(|e| AssembleError::MetaParse {
                    line: no,
                    msg: format!("bad matrix entry `{s}`: {e}"),
                })
            };
            let m = [
                [parse_big(&toks[6])?, parse_big(&toks[7])?],
                [parse_big(&toks[8])?, parse_big(&toks[9])?],
            ];
            let map = TorusMap::new(m).map_err(|e| AssembleError::MetaParse {
                line: no,
                msg: e.to_string(),
            })?;
            arcs.push(ArcMeta {
                arc: parse_num(no, &toks[1])? as usize,
                ends: (
                    parse_num(no, &toks[3])? as usize,
                    parse_num(no, &toks[4])? as usize,
                ),
                map,
                achieved_distance: parse_num(no, &toks[11])? as u64,
                tet_start: parse_num(no, &toks[13])? as usize,
                tet_count: parse_num(no, &toks[14])? as usize,
            });
        }
        Ok(AssemblyMetadata {
            delta,
            distance_factor: k,
            tw,
            pw,
            total_tetrahedra: total,
            nodes,
            arcs,
        })
    }
}

/// Re-derives each arc's gluing distance from its stored matrix with the
/// standard fiber slopes; used to audit metadata.
pub fn recheck_distances(meta: &AssemblyMetadata) -> Vec<(usize, u64)> {
    let fiber = Slope::new(0, 1);
    meta.arcs
        .iter()
        .map(|a| (a.arc, gluing_distance(&a.map, &fiber, &fiber)))
        .collect()
}
