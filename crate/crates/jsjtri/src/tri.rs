//! Generalized triangulations of 3-manifolds as gluing tables.
//!
//! A triangulation is a list of abstract tetrahedra with vertex labels
//! `0..4`. Face `f` of a tetrahedron is the face opposite vertex `f`. A
//! gluing identifies face `f` of one tetrahedron with a face of another
//! (or the same) tetrahedron through a bijection of all four vertex
//! labels; the image of label `f` is the partner's face index. Gluings are
//! stored on both slots and must be mutually inverse. A face is never
//! glued to itself.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::Multigraph;

#[derive(Debug, Error)]
pub enum TriError {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("structural error at tetrahedron {tet} face {face}: {msg}")]
    Structure { tet: usize, face: u8, msg: String },
}

/// Permutation of the four vertex labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Perm4([u8; 4]);

impl Perm4 {
    pub const IDENTITY: Perm4 = Perm4([0, 1, 2, 3]);

    pub fn new(images: [u8; 4]) -> Option<Perm4> {
        let mut seen = [false; 4];
        for &i in &images {
            if i > 3 || seen[i as usize] {
                return None;
            }
            seen[i as usize] = true;
        }
        Some(Perm4(images))
    }

    pub fn apply(&self, label: u8) -> u8 {
        self.0[label as usize]
    }

    pub fn inverse(&self) -> Perm4 {
        let mut inv = [0u8; 4];
        for (i, &img) in self.0.iter().enumerate() {
            inv[img as usize] = i as u8;
        }
        Perm4(inv)
    }

    pub fn is_even(&self) -> bool {
        let mut inversions = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if self.0[i] > self.0[j] {
                    inversions += 1;
                }
            }
        }
        inversions % 2 == 0
    }

    pub fn digits(&self) -> String {
        self.0.iter().map(|d| (b'0' + d) as char).collect()
    }

    pub fn from_digits(s: &str) -> Option<Perm4> {
        let bytes = s.as_bytes();
        if bytes.len() != 4 {
            return None;
        }
        let mut images = [0u8; 4];
        for (slot, &b) in images.iter_mut().zip(bytes) {
            if !(b'0'..=b'3').contains(&b) {
                return None;
            }
            *slot = b - b'0';
        }
        Perm4::new(images)
    }
}

/// One glued face slot: partner tetrahedron and the full label bijection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gluing {
    pub tet: usize,
    pub perm: Perm4,
}

impl Gluing {
    /// Face of the partner this slot is glued to.
    pub fn partner_face(&self, own_face: u8) -> u8 {
        self.perm.apply(own_face)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    slots: Vec<[Option<Gluing>; 4]>,
}

/// Identified-skeleton counts after all gluings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkeletonCounts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub tetrahedra: usize,
}

impl SkeletonCounts {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64 - self.tetrahedra as i64
    }
}

/// Link data for one identified vertex.
#[derive(Debug, Clone)]
pub struct VertexLink {
    /// Lowest corner (tet, label) in the class, for reporting.
    pub representative: (usize, u8),
    pub euler_characteristic: i64,
    pub closed: bool,
}

impl VertexLink {
    pub fn is_sphere(&self) -> bool {
        self.closed && self.euler_characteristic == 2
    }
    pub fn is_disk(&self) -> bool {
        !self.closed && self.euler_characteristic == 1
    }
    /// A manifold point: interior links are spheres, boundary links disks.
    pub fn is_manifold_point(&self) -> bool {
        self.is_sphere() || self.is_disk()
    }
}

#[derive(Debug, Clone)]
pub struct LinkReport {
    pub vertex_links: Vec<VertexLink>,
    /// Edges identified with themselves in reverse, each reported by one
    /// representative (tet, edge-index) pair.
    pub reversed_edges: Vec<(usize, u8)>,
}

impl LinkReport {
    pub fn all_links_ok(&self) -> bool {
        self.reversed_edges.is_empty() && self.vertex_links.iter().all(|l| l.is_manifold_point())
    }
}

/// One boundary component of the identified complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryComponent {
    pub triangles: usize,
    pub vertices: usize,
    pub edges: usize,
    pub euler_characteristic: i64,
}

impl BoundaryComponent {
    /// Genus of a closed orientable component, `g = 1 - euler/2`.
    pub fn genus(&self) -> i64 {
        1 - self.euler_characteristic / 2
    }
    pub fn is_torus(&self) -> bool {
        self.euler_characteristic == 0
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceSummary {
    pub components: Vec<BoundaryComponent>,
}

fn edge_index(a: u8, b: u8) -> u8 {
    let (x, y) = if a < b { (a, b) } else { (b, a) };
    match (x, y) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => unreachable!("bad edge ({a},{b})"),
    }
}

/// Vertex labels on face `f` (all labels except `f`), ascending.
pub fn face_vertices(f: u8) -> [u8; 3] {
    let mut out = [0u8; 3];
    let mut k = 0;
    for v in 0..4u8 {
        if v != f {
            out[k] = v;
            k += 1;
        }
    }
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
    fn classes(&mut self) -> usize {
        (0..self.parent.len())
            .filter(|&x| self.find(x) == x)
            .count()
    }
}

/// Union-find carrying a relative sign against the root; detects elements
/// identified with themselves under a reversing correspondence.
struct SignedUnionFind {
    parent: Vec<usize>,
    sign: Vec<i8>, // sign relative to parent
    conflicts: Vec<usize>,
}

impl SignedUnionFind {
    fn new(n: usize) -> Self {
        SignedUnionFind {
            parent: (0..n).collect(),
            sign: vec![1; n],
            conflicts: Vec::new(),
        }
    }
    fn find(&mut self, x: usize) -> (usize, i8) {
        if self.parent[x] == x {
            return (x, 1);
        }
        let (root, s) = self.find(self.parent[x]);
        self.parent[x] = root;
        self.sign[x] *= s;
        (root, self.sign[x])
    }
    /// Records `a ~ b` with relative sign `rel`.
    fn union(&mut self, a: usize, b: usize, rel: i8) {
        let (ra, sa) = self.find(a);
        let (rb, sb) = self.find(b);
        if ra == rb {
            if sa * sb != rel {
                self.conflicts.push(a);
            }
            return;
        }
        // attach rb under ra: sign(rb) chosen so sa = rel * sb * sign(rb)
        self.parent[rb] = ra;
        self.sign[rb] = rel * sa * sb;
    }
}

impl Triangulation {
    pub fn new(tetrahedra: usize) -> Self {
        Triangulation {
            slots: vec![[None; 4]; tetrahedra],
        }
    }

    pub fn tetrahedron_count(&self) -> usize {
        self.slots.len()
    }

    /// Appends an unglued tetrahedron, returning its index.
    pub fn add_tetrahedron(&mut self) -> usize {
        self.slots.push([None; 4]);
        self.slots.len() - 1
    }

    /// Appends a whole triangulation, shifting its internal gluings, and
    /// returns the offset its tetrahedra now start at.
    pub fn append(&mut self, other: &Triangulation) -> usize {
        let offset = self.slots.len();
        for slots in &other.slots {
            let mut shifted = [None; 4];
            for (f, g) in slots.iter().enumerate() {
                shifted[f] = g.map(|g| Gluing {
                    tet: g.tet + offset,
                    perm: g.perm,
                });
            }
            self.slots.push(shifted);
        }
        offset
    }

    pub fn slot(&self, tet: usize, face: u8) -> Option<&Gluing> {
        self.slots[tet][face as usize].as_ref()
    }

    pub fn is_boundary_face(&self, tet: usize, face: u8) -> bool {
        self.slots[tet][face as usize].is_none()
    }

    /// Glues face `face` of `tet` to the partner through `perm` (which maps
    /// this tetrahedron's labels to the partner's), writing both slots.
    /// Panics if either slot is occupied or the gluing would identify a
    /// face with itself.
    pub fn glue(&mut self, tet: usize, face: u8, partner: usize, perm: Perm4) {
        let pface = perm.apply(face);
        assert!(
            !(tet == partner && face == pface),
            "face ({tet},{face}) glued to itself"
        );
        assert!(
            self.slots[tet][face as usize].is_none(),
            "slot ({tet},{face}) already glued"
        );
        assert!(
            self.slots[partner][pface as usize].is_none(),
            "slot ({partner},{pface}) already glued"
        );
        self.slots[tet][face as usize] = Some(Gluing { tet: partner, perm });
        self.slots[partner][pface as usize] = Some(Gluing {
            tet,
            perm: perm.inverse(),
        });
    }

    /// Checks the involution invariant and face self-gluing prohibition.
    pub fn validate(&self) -> Result<(), TriError> {
        for (t, slots) in self.slots.iter().enumerate() {
            for f in 0..4u8 {
                let Some(g) = &slots[f as usize] else {
                    continue;
                };
                if g.tet >= self.slots.len() {
                    return Err(TriError::Structure {
                        tet: t,
                        face: f,
                        msg: format!("partner {} out of range", g.tet),
                    });
                }
                let pf = g.partner_face(f);
                if g.tet == t && pf == f {
                    return Err(TriError::Structure {
                        tet: t,
                        face: f,
                        msg: "face glued to itself".into(),
                    });
                }
                match &self.slots[g.tet][pf as usize] {
                    Some(back) if back.tet == t && back.perm == g.perm.inverse() => {}
                    _ => {
                        return Err(TriError::Structure {
                            tet: t,
                            face: f,
                            msg: format!(
                                "gluing to ({},{}) is not mirrored by its inverse",
                                g.tet, pf
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn boundary_face_count(&self) -> usize {
        self.slots
            .iter()
            .map(|s| s.iter().filter(|g| g.is_none()).count())
            .sum()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_face_count() == 0
    }

    /// Dual multigraph: a node per tetrahedron, an arc per face gluing.
    /// Self-gluings between distinct faces of one tetrahedron become loops.
    pub fn dual_graph(&self) -> Multigraph {
        let mut g = Multigraph::new(self.tetrahedron_count());
        for (t, slots) in self.slots.iter().enumerate() {
            for f in 0..4u8 {
                if let Some(gl) = &slots[f as usize] {
                    let pf = gl.partner_face(f);
                    // count each identified face pair once
                    if (gl.tet, pf) >= (t, f) {
                        g.add_arc(t, gl.tet);
                    }
                }
            }
        }
        g
    }

    fn vertex_classes(&self) -> UnionFind {
        let mut uf = UnionFind::new(4 * self.slots.len());
        for (t, slots) in self.slots.iter().enumerate() {
            for f in 0..4u8 {
                if let Some(g) = &slots[f as usize] {
                    for v in face_vertices(f) {
                        uf.union(4 * t + v as usize, 4 * g.tet + g.perm.apply(v) as usize);
                    }
                }
            }
        }
        uf
    }

    fn edge_classes(&self) -> SignedUnionFind {
        let mut uf = SignedUnionFind::new(6 * self.slots.len());
        for (t, slots) in self.slots.iter().enumerate() {
            for f in 0..4u8 {
                let Some(g) = &slots[f as usize] else {
                    continue;
                };
                let vs = face_vertices(f);
                for i in 0..3 {
                    for j in i + 1..3 {
                        let (a, b) = (vs[i], vs[j]); // a < b
                        let (ia, ib) = (g.perm.apply(a), g.perm.apply(b));
                        let rel = if ia < ib { 1 } else { -1 };
                        uf.union(
                            6 * t + edge_index(a, b) as usize,
                            6 * g.tet + edge_index(ia, ib) as usize,
                            rel,
                        );
                    }
                }
            }
        }
        uf
    }

    /// Class representative of each tetrahedron edge under all
    /// identifications, indexed by [`Triangulation::edge_slot`].
    pub fn edge_class_roots(&self) -> Vec<usize> {
        let mut uf = self.edge_classes();
        (0..6 * self.slots.len()).map(|x| uf.find(x).0).collect()
    }

    /// Index of the edge spanned by two vertex labels of a tetrahedron
    /// into [`Triangulation::edge_class_roots`].
    pub fn edge_slot(tet: usize, a: u8, b: u8) -> usize {
        6 * tet + edge_index(a, b) as usize
    }

    /// Identified vertex/edge/face/tetrahedron counts.
    pub fn skeleton_counts(&self) -> SkeletonCounts {
        let tets = self.slots.len();
        let glued: usize = self
            .slots
            .iter()
            .map(|s| s.iter().filter(|g| g.is_some()).count())
            .sum();
        let faces = 4 * tets - glued / 2;
        let vertices = self.vertex_classes().classes();
        let mut edge_uf = self.edge_classes();
        let edges = (0..6 * tets).filter(|&x| edge_uf.find(x).0 == x).count();
        SkeletonCounts {
            vertices,
            edges,
            faces,
            tetrahedra: tets,
        }
    }

    /// Orientability via a consistent choice of tetrahedron orientations:
    /// across every gluing the label bijection must flip the orientation,
    /// i.e. `sign(t) * sign(partner) * parity(perm) == -1`.
    pub fn is_orientable(&self) -> bool {
        let n = self.slots.len();
        let mut sign = vec![0i8; n];
        for start in 0..n {
            if sign[start] != 0 {
                continue;
            }
            sign[start] = 1;
            let mut stack = vec![start];
            while let Some(t) = stack.pop() {
                for f in 0..4u8 {
                    if let Some(g) = &self.slots[t][f as usize] {
                        let want = if g.perm.is_even() { -sign[t] } else { sign[t] };
                        if sign[g.tet] == 0 {
                            sign[g.tet] = want;
                            stack.push(g.tet);
                        } else if sign[g.tet] != want {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Builds the link surface of every identified vertex and checks the
    /// manifold conditions. Failures are reported, never thrown.
    pub fn vertex_link_check(&self) -> LinkReport {
        let tets = self.slots.len();
        let mut vert_uf = self.vertex_classes();
        let mut edge_uf = self.edge_classes();
        let reversed_edges: Vec<(usize, u8)> = {
            let mut seen = std::collections::BTreeSet::new();
            let mut out = Vec::new();
            for &c in &edge_uf.conflicts.clone() {
                let root = edge_uf.find(c).0;
                if seen.insert(root) {
                    out.push(((c / 6), (c % 6) as u8));
                }
            }
            out
        };

        // link triangle corners: (t, v, u) with u != v -> id
        let corner_id = |t: usize, v: u8, u: u8| -> usize {
            let off = if u < v { u } else { u - 1 };
            12 * t + 3 * v as usize + off as usize
        };
        // link triangle sides: (t, v, f) with f != v -> id
        let side_id = |t: usize, v: u8, f: u8| -> usize {
            let off = if f < v { f } else { f - 1 };
            12 * t + 3 * v as usize + off as usize
        };

        let mut lk_corner = UnionFind::new(12 * tets);
        let mut lk_side = UnionFind::new(12 * tets);
        for (t, slots) in self.slots.iter().enumerate() {
            for f in 0..4u8 {
                let Some(g) = &slots[f as usize] else {
                    continue;
                };
                for v in face_vertices(f) {
                    let iv = g.perm.apply(v);
                    lk_side.union(side_id(t, v, f), side_id(g.tet, iv, g.perm.apply(f)));
                    for u in face_vertices(f) {
                        if u != v {
                            lk_corner
                                .union(corner_id(t, v, u), corner_id(g.tet, iv, g.perm.apply(u)));
                        }
                    }
                }
            }
        }

        // aggregate per identified vertex:
        // (faces, sides, corners, closed, representative)
        type LinkTally = (usize, usize, usize, bool, (usize, u8));
        let mut per_vertex: BTreeMap<usize, LinkTally> = BTreeMap::new();
        for t in 0..tets {
            for v in 0..4u8 {
                let class = vert_uf.find(4 * t + v as usize);
                let entry = per_vertex
                    .entry(class)
                    .or_insert((0, 0, 0, true, (usize::MAX, 0)));
                entry.0 += 1; // one link triangle per corner
                if (t, v) < entry.4 {
                    entry.4 = (t, v);
                }
            }
        }
        // count link side classes and open sides by owning vertex class
        let mut side_roots: BTreeMap<usize, usize> = BTreeMap::new();
        for t in 0..tets {
            for v in 0..4u8 {
                for f in 0..4u8 {
                    if f == v {
                        continue;
                    }
                    let root = lk_side.find(side_id(t, v, f));
                    let class = vert_uf.find(4 * t + v as usize);
                    side_roots.entry(root).or_insert(class);
                    if self.slots[t][f as usize].is_none() {
                        // open side: the link has boundary here
                        per_vertex.get_mut(&class).unwrap().3 = false;
                    }
                }
            }
        }
        for (_, class) in side_roots {
            per_vertex.get_mut(&class).unwrap().1 += 1;
        }
        let mut corner_roots: BTreeMap<usize, usize> = BTreeMap::new();
        for t in 0..tets {
            for v in 0..4u8 {
                for u in 0..4u8 {
                    if u == v {
                        continue;
                    }
                    let root = lk_corner.find(corner_id(t, v, u));
                    let class = vert_uf.find(4 * t + v as usize);
                    corner_roots.entry(root).or_insert(class);
                }
            }
        }
        for (_, class) in corner_roots {
            per_vertex.get_mut(&class).unwrap().2 += 1;
        }

        let vertex_links = per_vertex
            .into_values()
            .map(|(faces, sides, corners, closed, rep)| VertexLink {
                representative: rep,
                euler_characteristic: corners as i64 - sides as i64 + faces as i64,
                closed,
            })
            .collect();
        LinkReport {
            vertex_links,
            reversed_edges,
        }
    }

    /// Enumerates boundary components with triangle/vertex counts and Euler
    /// characteristics. Fails if some boundary edge is not shared by
    /// exactly two boundary face sides (a non-manifold boundary).
    pub fn boundary_summary(&self) -> Result<SurfaceSummary, TriError> {
        let tets = self.slots.len();
        let mut edge_uf = self.edge_classes();

        // boundary faces in deterministic order
        let mut bfaces: Vec<(usize, u8)> = Vec::new();
        for t in 0..tets {
            for f in 0..4u8 {
                if self.slots[t][f as usize].is_none() {
                    bfaces.push((t, f));
                }
            }
        }
        if bfaces.is_empty() {
            return Ok(SurfaceSummary { components: vec![] });
        }
        // group the three sides of each boundary face by tetrahedron edge
        // class, remembering each side's sign relative to the class root
        let mut by_edge: BTreeMap<usize, Vec<(usize, u8, u8, i8)>> = BTreeMap::new();
        for (pos, &(t, f)) in bfaces.iter().enumerate() {
            let vs = face_vertices(f);
            for i in 0..3 {
                for j in i + 1..3 {
                    let (a, b) = (vs[i], vs[j]);
                    let (root, sgn) = edge_uf.find(6 * t + edge_index(a, b) as usize);
                    by_edge.entry(root).or_default().push((pos, a, b, sgn));
                }
            }
        }

        let mut comp_uf = UnionFind::new(bfaces.len());
        // corner of boundary face: 3 per face
        let corner_slot = |pos: usize, f: u8, v: u8| -> usize {
            let vs = face_vertices(f);
            let k = vs.iter().position(|&x| x == v).unwrap();
            3 * pos + k
        };
        let mut corner_uf = UnionFind::new(3 * bfaces.len());
        let mut edge_pair_count = 0usize;
        for (root, sides) in &by_edge {
            if sides.len() != 2 {
                let (t, e) = (root / 6, (root % 6) as u8);
                return Err(TriError::Structure {
                    tet: t,
                    face: e,
                    msg: format!(
                        "boundary edge class has {} incident boundary sides, expected 2",
                        sides.len()
                    ),
                });
            }
            edge_pair_count += 1;
            let (p1, a1, b1, s1) = sides[0];
            let (p2, a2, b2, s2) = sides[1];
            comp_uf.union(p1, p2);
            let (f1, f2) = (bfaces[p1].1, bfaces[p2].1);
            if s1 == s2 {
                corner_uf.union(corner_slot(p1, f1, a1), corner_slot(p2, f2, a2));
                corner_uf.union(corner_slot(p1, f1, b1), corner_slot(p2, f2, b2));
            } else {
                corner_uf.union(corner_slot(p1, f1, a1), corner_slot(p2, f2, b2));
                corner_uf.union(corner_slot(p1, f1, b1), corner_slot(p2, f2, a2));
            }
        }
        let _ = edge_pair_count;

        // tally components
        let mut comp_index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut comps: Vec<BoundaryComponent> = Vec::new();
        for pos in 0..bfaces.len() {
            let root = comp_uf.find(pos);
            let next = comps.len();
            let idx = *comp_index.entry(root).or_insert(next);
            if idx == comps.len() {
                comps.push(BoundaryComponent {
                    triangles: 0,
                    vertices: 0,
                    edges: 0,
                    euler_characteristic: 0,
                });
            }
            comps[idx].triangles += 1;
        }
        let mut edge_comp_seen: BTreeMap<usize, usize> = BTreeMap::new();
        for (root, sides) in &by_edge {
            let comp = comp_index[&comp_uf.find(sides[0].0)];
            edge_comp_seen.insert(*root, comp);
        }
        for (_, comp) in edge_comp_seen {
            comps[comp].edges += 1;
        }
        let mut corner_seen: BTreeMap<usize, usize> = BTreeMap::new();
        for (pos, &(_, f)) in bfaces.iter().enumerate() {
            for v in face_vertices(f) {
                let root = corner_uf.find(corner_slot(pos, f, v));
                let comp = comp_index[&comp_uf.find(pos)];
                corner_seen.entry(root).or_insert(comp);
            }
        }
        for (_, comp) in corner_seen {
            comps[comp].vertices += 1;
        }
        for c in &mut comps {
            c.euler_characteristic = c.vertices as i64 - c.edges as i64 + c.triangles as i64;
        }
        Ok(SurfaceSummary { components: comps })
    }

    /// Serializes as `tri <count>` followed by one line per tetrahedron with
    /// four slots, each `bdry` or `<partner>:<face>:<p0p1p2p3>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "tri {}", self.slots.len()).unwrap();
        for slots in &self.slots {
            let mut parts = Vec::with_capacity(4);
            for f in 0..4u8 {
                match &slots[f as usize] {
                    None => parts.push("bdry".to_string()),
                    Some(g) => parts.push(format!(
                        "{}:{}:{}",
                        g.tet,
                        g.partner_face(f),
                        g.perm.digits()
                    )),
                }
            }
            writeln!(out, "{}", parts.join(" ")).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Triangulation, TriError> {
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            if !line.trim().is_empty() {
                lines.push((idx + 1, line.trim().to_string()));
            }
        }
        let Some((first_no, first)) = lines.first() else {
            return Err(TriError::Parse {
                line: 1,
                msg: "empty document".into(),
            });
        };
        let head: Vec<&str> = first.split_whitespace().collect();
        if head.len() != 2 || head[0] != "tri" {
            return Err(TriError::Parse {
                line: *first_no,
                msg: "expected header `tri <tetrahedron_count>`".into(),
            });
        }
        let count: usize = head[1].parse().map_err(|e| TriError::Parse {
            line: *first_no,
            msg: format!("bad tetrahedron count: {e}"),
        })?;
        if lines.len() != count + 1 {
            return Err(TriError::Parse {
                line: *first_no,
                msg: format!(
                    "expected {count} tetrahedron lines, found {}",
                    lines.len() - 1
                ),
            });
        }
        let mut tri = Triangulation::new(count);
        for (t, (line_no, line)) in lines[1..].iter().enumerate() {
            let slots: Vec<&str> = line.split_whitespace().collect();
            if slots.len() != 4 {
                return Err(TriError::Parse {
                    line: *line_no,
                    msg: format!("expected 4 slots, found {}", slots.len()),
                });
            }
            for (f, slot) in slots.iter().enumerate() {
                if *slot == "bdry" {
                    continue;
                }
                let parts: Vec<&str> = slot.split(':').collect();
                if parts.len() != 3 {
                    return Err(TriError::Parse {
                        line: *line_no,
                        msg: format!("bad slot `{slot}`"),
                    });
                }
                let partner: usize = parts[0].parse().map_err(|e| TriError::Parse {
                    line: *line_no,
                    msg: format!("bad partner index `{}`: {e}", parts[0]),
                })?;
                let pface: u8 = parts[1].parse().map_err(|e| TriError::Parse {
                    line: *line_no,
                    msg: format!("bad partner face `{}`: {e}", parts[1]),
                })?;
                let perm = Perm4::from_digits(parts[2]).ok_or_else(|| TriError::Parse {
                    line: *line_no,
                    msg: format!("bad permutation `{}`", parts[2]),
                })?;
                if partner >= count {
                    return Err(TriError::Parse {
                        line: *line_no,
                        msg: format!("partner {partner} out of range (count {count})"),
                    });
                }
                if pface > 3 || perm.apply(f as u8) != pface {
                    return Err(TriError::Parse {
                        line: *line_no,
                        msg: format!(
                            "slot `{slot}`: permutation sends face {f} to {}, not {pface}",
                            perm.apply(f as u8)
                        ),
                    });
                }
                tri.slots[t][f] = Some(Gluing { tet: partner, perm });
            }
        }
        tri.validate()?;
        Ok(tri)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Figure-style two-tetrahedron triangulation with three face gluings,
    /// one of them `(123) <-> (103)`.
    fn two_tet_three_gluings() -> Triangulation {
        let mut t = Triangulation::new(2);
        // face 0 of tet 0 (vertices 123) -> face 2 of tet 1 (vertices 103):
        // 1->1, 2->0, 3->3, off-face 0->2
        t.glue(0, 0, 1, Perm4::new([2, 1, 0, 3]).unwrap());
        t.glue(0, 1, 1, Perm4::new([0, 1, 3, 2]).unwrap());
        t.glue(0, 2, 1, Perm4::new([1, 2, 0, 3]).unwrap());
        t.validate().unwrap();
        t
    }

    #[test]
    fn perm_basics() {
        let p = Perm4::new([2, 1, 0, 3]).unwrap();
        assert_eq!(p.apply(0), 2);
        assert_eq!(p.inverse().apply(2), 0);
        assert!(!p.is_even()); // a transposition
        assert!(Perm4::IDENTITY.is_even());
        assert_eq!(Perm4::from_digits("2103").unwrap(), p);
        assert!(Perm4::from_digits("2113").is_none());
    }

    #[test]
    fn dual_graph_of_two_tets() {
        let t = two_tet_three_gluings();
        let g = t.dual_graph();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.arcs(), &[(0, 1), (0, 1), (0, 1)]);
    }

    #[test]
    fn dual_graph_single_tet() {
        let t = Triangulation::new(1);
        let g = t.dual_graph();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.arc_count(), 0);
    }

    #[test]
    fn dual_graph_two_tets_fully_glued() {
        let mut t = Triangulation::new(2);
        for f in 0..4u8 {
            t.glue(0, f, 1, Perm4::IDENTITY);
        }
        t.validate().unwrap();
        let g = t.dual_graph();
        assert_eq!(g.arc_count(), 4);
        // internal face count check: (4*2 - 0)/2 = 4 identified faces
        assert_eq!(t.skeleton_counts().faces, 4);
    }

    #[test]
    fn skeleton_of_lone_tetrahedron() {
        let t = Triangulation::new(1);
        let c = t.skeleton_counts();
        assert_eq!((c.vertices, c.edges, c.faces, c.tetrahedra), (4, 6, 4, 1));
        assert!(!t.is_closed());
        assert!(t.is_orientable());
    }

    #[test]
    fn skeleton_faces_of_figure_triangulation() {
        let t = two_tet_three_gluings();
        // 8 face slots, 6 glued: 8 - 3 = 5 distinct triangles
        assert_eq!(t.skeleton_counts().faces, 5);
        assert_eq!(t.boundary_face_count(), 2);
    }

    #[test]
    fn lone_tet_links_are_disks() {
        let t = Triangulation::new(1);
        let rep = t.vertex_link_check();
        assert_eq!(rep.vertex_links.len(), 4);
        for l in &rep.vertex_links {
            assert!(l.is_disk(), "{l:?}");
        }
        assert!(rep.reversed_edges.is_empty());
        assert!(rep.all_links_ok());
    }

    #[test]
    fn reversed_edge_self_identification_is_detected() {
        // One tetrahedron, face 0 (vertices 123) glued to face 1
        // (vertices 023) sending 2 and 3 to each other: edge {2,3} is
        // identified with itself reversed.
        let mut t = Triangulation::new(1);
        let perm = Perm4::new([1, 0, 3, 2]).unwrap();
        t.glue(0, 0, 0, perm);
        t.validate().unwrap();
        let rep = t.vertex_link_check();
        assert!(!rep.reversed_edges.is_empty());
        assert!(!rep.all_links_ok());
    }

    #[test]
    fn boundary_of_lone_tet_is_a_sphere() {
        let t = Triangulation::new(1);
        let s = t.boundary_summary().unwrap();
        assert_eq!(s.components.len(), 1);
        assert_eq!(s.components[0].triangles, 4);
        assert_eq!(s.components[0].euler_characteristic, 2);
        assert_eq!(s.components[0].genus(), 0);
    }

    #[test]
    fn orientability_rejects_inconsistent_gluing() {
        // Two tets glued along two faces, one even and one odd permutation:
        // no consistent orientation assignment exists.
        let mut t = Triangulation::new(2);
        t.glue(0, 0, 1, Perm4::IDENTITY); // even
        t.glue(0, 1, 1, Perm4::new([0, 2, 1, 3]).unwrap()); // odd: 1 -> 2
        t.validate().unwrap();
        assert!(!t.is_orientable());
    }

    #[test]
    fn orientability_invariant_under_even_relabel() {
        let t = two_tet_three_gluings();
        let before = t.is_orientable();
        // relabel tet 1 by the even permutation (0 1)(2 3)
        let rho = Perm4::new([1, 0, 3, 2]).unwrap();
        let mut relabeled = Triangulation::new(2);
        for f in 0..4u8 {
            if let Some(g) = t.slot(0, f) {
                if relabeled.slot(0, f).is_none() {
                    // compose: labels of tet0 -> old labels of tet1 -> new
                    let mut imgs = [0u8; 4];
                    for l in 0..4u8 {
                        imgs[l as usize] = rho.apply(g.perm.apply(l));
                    }
                    relabeled.glue(0, f, 1, Perm4::new(imgs).unwrap());
                }
            }
        }
        relabeled.validate().unwrap();
        assert_eq!(relabeled.is_orientable(), before);
    }

    #[test]
    fn write_of_trivial_table() {
        let t = Triangulation::new(1);
        assert_eq!(t.to_text(), "tri 1\nbdry bdry bdry bdry\n");
    }

    #[test]
    fn roundtrip_figure_triangulation() {
        let t = two_tet_three_gluings();
        let text = t.to_text();
        let back = Triangulation::parse(&text).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn parse_rejects_dangling_partner() {
        let text = "tri 1\n5:0:0123 bdry bdry bdry\n";
        assert!(matches!(
            Triangulation::parse(text),
            Err(TriError::Parse { .. })
        ));
    }

    #[test]
    fn parse_rejects_one_sided_gluing() {
        let text = "tri 2\n1:0:0123 bdry bdry bdry\nbdry bdry bdry bdry\n";
        assert!(Triangulation::parse(text).is_err());
    }

    fn arbitrary_involution() -> impl Strategy<Value = Triangulation> {
        // Random pairings of face slots with random face-respecting perms.
        (2usize..6, proptest::collection::vec(any::<u32>(), 24)).prop_map(|(n, seeds)| {
            let mut tri = Triangulation::new(n);
            let mut free: Vec<(usize, u8)> =
                (0..n).flat_map(|t| (0..4u8).map(move |f| (t, f))).collect();
            let mut si = 0usize;
            let mut next_seed = || {
                let s = seeds[si % seeds.len()] as usize;
                si += 1;
                s
            };
            while free.len() >= 2 {
                if next_seed() % 3 == 0 {
                    free.remove(0); // leave a boundary face
                    continue;
                }
                let (t, f) = free.remove(0);
                let j = next_seed() % free.len();
                let (p, pf) = free.remove(j);
                if t == p && f == pf {
                    continue;
                }
                // build a perm sending face f onto face pf
                let from = face_vertices(f);
                let mut to = face_vertices(pf);
                let rot = next_seed() % 3;
                to.rotate_left(rot);
                if next_seed() % 2 == 0 {
                    to.swap(0, 1);
                }
                let mut imgs = [4u8; 4];
                imgs[f as usize] = pf;
                for (a, b) in from.iter().zip(to.iter()) {
                    imgs[*a as usize] = *b;
                }
                tri.glue(t, f, p, Perm4::new(imgs).unwrap());
            }
            tri
        })
    }

    fn arbitrary_closed() -> impl Strategy<Value = Triangulation> {
        (2usize..6, proptest::collection::vec(any::<u32>(), 24)).prop_map(|(n, seeds)| {
            let mut tri = Triangulation::new(n);
            let mut free: Vec<(usize, u8)> =
                (0..n).flat_map(|t| (0..4u8).map(move |f| (t, f))).collect();
            let mut si = 0usize;
            let mut next_seed = || {
                let s = seeds[si % seeds.len()] as usize;
                si += 1;
                s
            };
            while free.len() >= 2 {
                let (t, f) = free.remove(0);
                let j = next_seed() % free.len();
                let (p, pf) = free.remove(j);
                let from = face_vertices(f);
                let mut to = face_vertices(pf);
                let rot = next_seed() % 3;
                to.rotate_left(rot);
                if next_seed() % 2 == 0 {
                    to.swap(0, 1);
                }
                let mut imgs = [4u8; 4];
                imgs[f as usize] = pf;
                for (a, b) in from.iter().zip(to.iter()) {
                    imgs[*a as usize] = *b;
                }
                tri.glue(t, f, p, Perm4::new(imgs).unwrap());
            }
            tri
        })
    }

    proptest! {
        // Two independent routes agree on closed tables without reversed
        // self-identified edges: summing vertex-link Euler characteristics
        // (link union-finds) must give 2E - 2T (edge union-find), since
        // every edge end contributes one link-corner class and every
        // identified face three link sides.
        #[test]
        fn closed_link_euler_identity(t in arbitrary_closed()) {
            t.validate().unwrap();
            prop_assert!(t.is_closed());
            let rep = t.vertex_link_check();
            if rep.reversed_edges.is_empty() {
                let c = t.skeleton_counts();
                let total: i64 = rep
                    .vertex_links
                    .iter()
                    .map(|l| l.euler_characteristic)
                    .sum();
                prop_assert_eq!(total, 2 * c.edges as i64 - 2 * c.tetrahedra as i64);
            }
        }

        #[test]
        fn io_roundtrip_random_tables(t in arbitrary_involution()) {
            t.validate().unwrap();
            let back = Triangulation::parse(&t.to_text()).unwrap();
            prop_assert_eq!(t, back);
        }

        #[test]
        fn dual_arc_count_matches_internal_face_pairs(t in arbitrary_involution()) {
            let glued: usize = (0..t.tetrahedron_count())
                .map(|i| (0..4u8).filter(|&f| !t.is_boundary_face(i, f)).count())
                .sum();
            prop_assert_eq!(t.dual_graph().arc_count(), glued / 2);
        }
    }
}
