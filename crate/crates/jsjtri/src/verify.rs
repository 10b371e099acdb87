//! Verification of assembled triangulations: structural recovery of the
//! input graph from provenance metadata, the checkable width
//! inequalities, subdivision bounds, and the named graph families.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::assemble::{build_manifold, AssemblyConfig, AssemblyMetadata, Owner};
use crate::graph::{complete_binary_tree, grid, Multigraph};
use crate::tri::Triangulation;
use crate::width::{pathwidth_exact, pathwidth_upper, treewidth_exact, treewidth_upper};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("metadata does not match the triangulation: {0}")]
    Mismatch(String),
}

/// One verified claim with its measured quantities. Failed checks carry a
/// concrete counter-witness description in `details`.
#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub details: String,
    pub numbers: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn push(&mut self, name: &str, pass: bool, details: String, numbers: Vec<(String, String)>) {
        self.checks.push(CheckRecord {
            name: name.to_string(),
            pass,
            details,
            numbers,
        });
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    /// One machine-readable line per check:
    /// `check <name> <pass|fail> [key=value ...]  [# details]`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            write!(
                out,
                "check {} {}",
                c.name,
                if c.pass { "pass" } else { "fail" }
            )
            .unwrap();
            for (k, v) in &c.numbers {
                write!(out, " {k}={v}").unwrap();
            }
            if !c.details.is_empty() {
                write!(out, "  # {}", c.details).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn num(x: impl ToString) -> String {
    x.to_string()
}

// ---------------------------------------------------------------------------
// structural recovery

/// Contracts each block's tetrahedron range to one node and each chain
/// range to one arc, and compares the quotient with the input graph, arc
/// multiplicities included. Also checks that every block range induces a
/// connected subgraph and every chain range a doubled path.
pub fn check_dual_structure(
    g: &Multigraph,
    tri: &Triangulation,
    meta: &AssemblyMetadata,
) -> Result<VerificationReport, VerifyError> {
    if meta.total_tetrahedra != tri.tetrahedron_count() {
        return Err(VerifyError::Mismatch(format!(
            "metadata claims {} tetrahedra, table has {}",
            meta.total_tetrahedra,
            tri.tetrahedron_count()
        )));
    }
    let mut owner: Vec<Option<Owner>> = vec![None; tri.tetrahedron_count()];
    for n in &meta.nodes {
        for t in n.tet_start..n.tet_start + n.tet_count {
            if t >= owner.len() || owner[t].is_some() {
                return Err(VerifyError::Mismatch(format!(
                    "block range of node {} collides at tetrahedron {t}",
                    n.node
                )));
            }
            owner[t] = Some(Owner::Block(n.node));
        }
    }
    for a in &meta.arcs {
        for t in a.tet_start..a.tet_start + a.tet_count {
            if t >= owner.len() || owner[t].is_some() {
                return Err(VerifyError::Mismatch(format!(
                    "chain range of arc {} collides at tetrahedron {t}",
                    a.arc
                )));
            }
            owner[t] = Some(Owner::Chain(a.arc));
        }
    }
    if owner.iter().any(|o| o.is_none()) {
        return Err(VerifyError::Mismatch(
            "metadata ranges do not cover the whole table".into(),
        ));
    }
    let owner: Vec<Owner> = owner.into_iter().map(Option::unwrap).collect();

    let dual = tri.dual_graph();
    let mut report = VerificationReport::default();

    // adjacency with multiplicity
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); dual.node_count()];
    for &(x, y) in dual.arcs() {
        adj[x].push(y);
        if x != y {
            adj[y].push(x);
        }
    }

    // blocks induce connected subgraphs
    let mut blocks_connected = true;
    let mut block_fail = String::new();
    for n in &meta.nodes {
        let range = n.tet_start..n.tet_start + n.tet_count;
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut queue = VecDeque::from([n.tet_start]);
        seen.insert(n.tet_start);
        while let Some(t) = queue.pop_front() {
            for &w in &adj[t] {
                if range.contains(&w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        if seen.len() != n.tet_count {
            blocks_connected = false;
            block_fail = format!(
                "block of node {} splits into {} reached of {} tetrahedra",
                n.node,
                seen.len(),
                n.tet_count
            );
            break;
        }
    }
    report.push(
        "block-ranges-connected",
        blocks_connected,
        block_fail,
        vec![("blocks".into(), num(meta.nodes.len()))],
    );

    // chains are daisy chains: consecutive tetrahedra joined by double
    // arcs, nothing else inside the range
    let mut chains_ok = true;
    let mut chain_fail = String::new();
    let mut quotient_arcs: Vec<(usize, usize)> = Vec::new();
    'chains: for a in &meta.arcs {
        let range = a.tet_start..a.tet_start + a.tet_count;
        let mut internal: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut external: Vec<(usize, usize)> = Vec::new(); // (chain tet, block node)
        for t in range.clone() {
            for &w in &adj[t] {
                if range.contains(&w) {
                    if t <= w {
                        *internal.entry((t, w)).or_insert(0) += 1;
                    }
                } else {
                    match owner[w] {
                        Owner::Block(b) => external.push((t, b)),
                        Owner::Chain(c) => {
                            chains_ok = false;
                            chain_fail = format!("chain {} touches chain {} directly", a.arc, c);
                            break 'chains;
                        }
                    }
                }
            }
        }
        // internal shape: (t, t+1) doubled for consecutive tetrahedra
        let mut want: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in range.clone().skip(1) {
            want.insert((t - 1, t), 2);
        }
        if internal != want {
            chains_ok = false;
            chain_fail = format!("chain {} is not a doubled path: {internal:?}", a.arc);
            break;
        }
        // ends: two gluings into each endpoint block
        let first = a.tet_start;
        let last = a.tet_start + a.tet_count - 1;
        let mut end_blocks: Vec<usize> = Vec::new();
        for (t, b) in &external {
            if *t != first && *t != last {
                chains_ok = false;
                chain_fail = format!(
                    "chain {} touches block {} from an interior tetrahedron {t}",
                    a.arc, b
                );
                break 'chains;
            }
            end_blocks.push(*b);
        }
        end_blocks.sort_unstable();
        let (u, v) = a.ends;
        let mut expect = vec![u, u, v, v];
        expect.sort_unstable();
        if end_blocks != expect {
            chains_ok = false;
            chain_fail = format!(
                "chain {} ends at blocks {end_blocks:?}, metadata says ({u},{v})",
                a.arc
            );
            break;
        }
        quotient_arcs.push((u.min(v), u.max(v)));
    }
    report.push(
        "chain-ranges-daisy",
        chains_ok,
        chain_fail,
        vec![("chains".into(), num(meta.arcs.len()))],
    );

    // the contracted graph equals the input, multiplicities included
    let quotient = Multigraph::from_arcs(g.node_count(), quotient_arcs);
    let equal = chains_ok && quotient == *g;
    report.push(
        "quotient-equals-input",
        equal,
        if equal {
            String::new()
        } else {
            format!(
                "contraction yields arcs {:?}, input has {:?}",
                quotient.arcs(),
                g.arcs()
            )
        },
        vec![
            ("nodes".into(), num(g.node_count())),
            ("arcs".into(), num(g.arc_count())),
        ],
    );
    Ok(report)
}

// ---------------------------------------------------------------------------
// width inequalities

/// Checkable direction of the width inheritance: the input graph's exact
/// widths against upper bounds for the dual graph of the assembled
/// triangulation; the converse ratios carry unknown constants and are
/// reported, not asserted.
pub fn check_width_inequalities(
    g: &Multigraph,
    tri: &Triangulation,
    _meta: &AssemblyMetadata,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    let dual = tri.dual_graph();

    let (tw_g, tw_exact) = match treewidth_exact(g, 25) {
        Ok(r) => (r.value, true),
        Err(_) => (treewidth_upper(g).value, false),
    };
    let (pw_g, pw_exact) = match pathwidth_exact(g, 25) {
        Ok(r) => (r.value, true),
        Err(_) => (pathwidth_upper(g).value, false),
    };
    let tw_dual = treewidth_upper(&dual).value;
    let pw_dual = pathwidth_upper(&dual).value;

    let tw_ok = tw_g <= 18 * (tw_dual + 1);
    report.push(
        "tw-inheritance",
        tw_ok,
        if tw_ok {
            String::new()
        } else {
            format!(
                "tw(G)={tw_g} exceeds 18*(tw_ub(dual)+1)={}",
                18 * (tw_dual + 1)
            )
        },
        vec![
            ("tw_g".into(), num(tw_g)),
            ("tw_g_exact".into(), num(tw_exact)),
            ("tw_dual_ub".into(), num(tw_dual)),
            ("bound".into(), num(18 * (tw_dual + 1))),
        ],
    );
    let pw_ok = pw_g <= 4 * (3 * pw_dual + 1);
    report.push(
        "pw-inheritance",
        pw_ok,
        if pw_ok {
            String::new()
        } else {
            format!(
                "pw(G)={pw_g} exceeds 4*(3*pw_ub(dual)+1)={}",
                4 * (3 * pw_dual + 1)
            )
        },
        vec![
            ("pw_g".into(), num(pw_g)),
            ("pw_g_exact".into(), num(pw_exact)),
            ("pw_dual_ub".into(), num(pw_dual)),
            ("bound".into(), num(4 * (3 * pw_dual + 1))),
        ],
    );

    // converse ratios: finite whenever the graph has an arc
    let max_deg = g.max_degree().max(1);
    let mut numbers = vec![("max_degree".into(), num(max_deg))];
    let mut finite = true;
    if tw_g > 0 {
        let r = tw_dual as f64 / (max_deg as f64 * tw_g as f64);
        numbers.push(("tw_ratio".into(), format!("{r:.4}")));
    } else {
        finite = false;
    }
    if pw_g > 0 {
        let r = pw_dual as f64 / (max_deg as f64 * pw_g as f64);
        numbers.push(("pw_ratio".into(), format!("{r:.4}")));
    } else {
        finite = false;
    }
    report.push(
        "width-ratios",
        true, // reported, never asserted
        if finite {
            String::new()
        } else {
            "input widths are zero; ratios omitted".into()
        },
        numbers,
    );
    report
}

// ---------------------------------------------------------------------------
// subdivision bounds

/// Random subdivision trials: `pw' <= pw + 2` and `tw' <= max(tw, 3)`
/// with exact widths on both sides. Hand-picked edge cases run first,
/// then random graphs. Subdivision plans are capped (at most four arcs,
/// at most three new nodes each) so the subdivided graph stays inside the
/// exact-solver budget.
pub fn subdivision_lemma_suite(seed: u64, trials: usize) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerificationReport::default();
    let mut violations = Vec::new();
    let mut ran = 0usize;

    fn run_trial(
        g: &Multigraph,
        plan: &BTreeMap<usize, usize>,
        label: String,
        violations: &mut Vec<String>,
        ran: &mut usize,
    ) {
        let h = g.subdivide_arcs(plan).expect("plan in range");
        let tw = treewidth_exact(g, 25).unwrap().value;
        let pw = pathwidth_exact(g, 25).unwrap().value;
        let tw2 = treewidth_exact(&h, 25).unwrap().value;
        let pw2 = pathwidth_exact(&h, 25).unwrap().value;
        if pw2 > pw + 2 || tw2 > tw.max(3) {
            violations.push(format!(
                "{label}: tw {tw}->{tw2}, pw {pw}->{pw2}, plan {plan:?}"
            ));
        }
        *ran += 1;
    }

    // edge cases: identity plan, a star, a clique, a tree
    run_trial(
        &Multigraph::cycle(3),
        &BTreeMap::new(),
        "c3-identity".into(),
        &mut violations,
        &mut ran,
    );
    run_trial(
        &Multigraph::cycle(3),
        &BTreeMap::from([(0usize, 1usize)]),
        "c3-to-c4".into(),
        &mut violations,
        &mut ran,
    );
    run_trial(
        &Multigraph::star(3),
        &BTreeMap::from([(0usize, 2usize), (2usize, 1usize)]),
        "star".into(),
        &mut violations,
        &mut ran,
    );
    run_trial(
        &Multigraph::complete(5),
        &BTreeMap::from([(0usize, 3usize), (5usize, 3usize)]),
        "k5".into(),
        &mut violations,
        &mut ran,
    );
    run_trial(
        &complete_binary_tree(2),
        &BTreeMap::from([(1usize, 3usize)]),
        "tree".into(),
        &mut violations,
        &mut ran,
    );

    while ran < trials {
        let n = rng.gen_range(2..=10usize);
        let mut g = Multigraph::new(n);
        for u in 0..n {
            for v in u..n {
                // loops with small probability, otherwise density 0.4
                let p = if u == v { 0.05 } else { 0.4 };
                if rng.gen_bool(p) {
                    g.add_arc(u, v);
                }
            }
        }
        if g.arc_count() == 0 {
            continue;
        }
        let mut plan = BTreeMap::new();
        let picks = rng.gen_range(0..=4usize.min(g.arc_count()));
        for _ in 0..picks {
            let arc = rng.gen_range(0..g.arc_count());
            let count = rng.gen_range(1..=3usize);
            plan.insert(arc, count);
        }
        let label = format!("random-{ran}");
        run_trial(&g, &plan, label, &mut violations, &mut ran);
    }

    let pass = violations.is_empty();
    report.push(
        "subdivision-bounds",
        pass,
        violations.join("; "),
        vec![
            ("trials".into(), num(ran)),
            ("violations".into(), num(violations.len())),
        ],
    );
    report
}

// ---------------------------------------------------------------------------
// named graph families

/// Width values of the named families (complete binary trees and grids),
/// plus full pipeline runs on the smallest members.
pub fn corollary_family_suite() -> VerificationReport {
    let mut report = VerificationReport::default();

    let mut tree_ok = true;
    let mut tree_detail = String::new();
    let mut tree_numbers = Vec::new();
    for h in 0..=5u32 {
        let g = complete_binary_tree(h);
        let pw = pathwidth_exact(&g, 64).unwrap().value;
        let want = h.div_ceil(2) as usize;
        tree_numbers.push((format!("pw_T{h}"), num(pw)));
        if pw != want {
            tree_ok = false;
            tree_detail = format!("pathwidth of the height-{h} tree is {pw}, expected {want}");
        }
    }
    report.push("binary-tree-pathwidth", tree_ok, tree_detail, tree_numbers);

    let mut grid_ok = true;
    let mut grid_detail = String::new();
    let mut grid_numbers = Vec::new();
    for k in 2..=4usize {
        let g = grid(k);
        let tw = treewidth_exact(&g, 25).unwrap().value;
        let pw = pathwidth_exact(&g, 25).unwrap().value;
        grid_numbers.push((format!("tw_grid{k}"), num(tw)));
        grid_numbers.push((format!("pw_grid{k}"), num(pw)));
        if tw != k || pw != k {
            grid_ok = false;
            grid_detail = format!("grid({k}) widths tw={tw} pw={pw}, expected {k}");
        }
    }
    // the one-node grid is degenerate: both widths vanish
    let g1 = grid(1);
    let tw1 = treewidth_exact(&g1, 25).unwrap().value;
    let pw1 = pathwidth_exact(&g1, 25).unwrap().value;
    grid_numbers.push(("tw_grid1".into(), num(tw1)));
    grid_numbers.push(("pw_grid1".into(), num(pw1)));
    if tw1 != 0 || pw1 != 0 {
        grid_ok = false;
        grid_detail = format!("grid(1) widths tw={tw1} pw={pw1}, expected 0");
    }
    report.push("grid-widths", grid_ok, grid_detail, grid_numbers);

    // full pipeline on the smallest members of both families
    for (label, g) in [
        ("tree-height-2".to_string(), complete_binary_tree(2)),
        ("grid-2".to_string(), grid(2)),
    ] {
        let cfg = AssemblyConfig::default();
        match build_manifold(&g, &cfg) {
            Ok((tri, meta)) => {
                let closed = tri.is_closed();
                let orient = tri.is_orientable();
                let chi = tri.skeleton_counts().euler_characteristic();
                let links = tri.vertex_link_check().all_links_ok();
                let valid = closed && orient && chi == 0 && links;
                report.push(
                    &format!("assembly-validity-{label}"),
                    valid,
                    if valid {
                        String::new()
                    } else {
                        format!("closed={closed} orientable={orient} chi={chi} links={links}")
                    },
                    vec![
                        ("tetrahedra".into(), num(tri.tetrahedron_count())),
                        ("delta".into(), num(meta.delta)),
                    ],
                );
                match check_dual_structure(&g, &tri, &meta) {
                    Ok(sub) => {
                        let pass = sub.all_passed();
                        report.push(
                            &format!("assembly-structure-{label}"),
                            pass,
                            if pass {
                                String::new()
                            } else {
                                "structure recovery failed".into()
                            },
                            vec![],
                        );
                        report.merge(sub);
                    }
                    Err(e) => {
                        report.push(
                            &format!("assembly-structure-{label}"),
                            false,
                            e.to_string(),
                            vec![],
                        );
                    }
                }
                report.merge(check_width_inequalities(&g, &tri, &meta));
            }
            Err(e) => {
                report.push(
                    &format!("assembly-validity-{label}"),
                    false,
                    e.to_string(),
                    vec![],
                );
            }
        }
    }
    report
}

/// Audit of one assembled instance: table validity, manifold conditions,
/// structure recovery, width inequalities, distance budget, and the size
/// bound. This is what the command-line `verify` runs.
pub fn full_verification(
    g: &Multigraph,
    tri: &Triangulation,
    meta: &AssemblyMetadata,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::default();

    let table_ok = tri.validate().is_ok();
    report.push(
        "gluing-involution",
        table_ok,
        String::new(),
        vec![("tetrahedra".into(), num(tri.tetrahedron_count()))],
    );

    let closed = tri.is_closed();
    let orient = tri.is_orientable();
    let chi = tri.skeleton_counts().euler_characteristic();
    let links = tri.vertex_link_check();
    let links_ok = links.all_links_ok();
    report.push(
        "closed",
        closed,
        String::new(),
        vec![("boundary_faces".into(), num(tri.boundary_face_count()))],
    );
    report.push("orientable", orient, String::new(), vec![]);
    report.push(
        "euler-characteristic-zero",
        chi == 0,
        if chi == 0 {
            String::new()
        } else {
            format!("chi = {chi}")
        },
        vec![("chi".into(), num(chi))],
    );
    report.push(
        "vertex-links-spheres",
        links_ok,
        if links_ok {
            String::new()
        } else {
            format!(
                "{} bad links, {} reversed edges",
                links
                    .vertex_links
                    .iter()
                    .filter(|l| !l.is_manifold_point())
                    .count(),
                links.reversed_edges.len()
            )
        },
        vec![("vertices".into(), num(links.vertex_links.len()))],
    );

    report.merge(check_dual_structure(g, tri, meta)?);
    report.merge(check_width_inequalities(g, tri, meta));

    // distance budget, re-derived from the stored matrices
    let required = meta.required_distance();
    let rechecked = crate::assemble::recheck_distances(meta);
    let dist_ok = meta
        .arcs
        .iter()
        .zip(rechecked.iter())
        .all(|(a, (_, d))| *d == a.achieved_distance && *d >= required);
    report.push(
        "gluing-distance-budget",
        dist_ok,
        if dist_ok {
            String::new()
        } else {
            "some arc misses the distance budget or misstates it".into()
        },
        vec![
            ("required".into(), num(required)),
            (
                "min_achieved".into(),
                num(meta
                    .arcs
                    .iter()
                    .map(|a| a.achieved_distance)
                    .min()
                    .unwrap_or(0)),
            ),
        ],
    );

    // size bound: blocks plus at most 2*K*delta per arc
    let block_total: usize = meta.nodes.iter().map(|n| 9 * n.degree + 6).sum();
    let bound = block_total as u64 + g.arc_count() as u64 * 2 * required;
    let size_ok =
        (meta.total_tetrahedra as u64) <= bound && meta.total_tetrahedra == tri.tetrahedron_count();
    report.push(
        "size-bound",
        size_ok,
        if size_ok {
            String::new()
        } else {
            format!("total {} exceeds bound {bound}", meta.total_tetrahedra)
        },
        vec![
            ("total".into(), num(meta.total_tetrahedra)),
            ("bound".into(), num(bound)),
        ],
    );

    Ok(report)
}
