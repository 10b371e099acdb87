//! Torus slopes, Farey distance, and layered realizations of torus maps.
//!
//! A slope is a primitive integer pair up to sign. Two slopes are adjacent
//! in the Farey graph when their determinant is ±1; distance is graph
//! distance. The distance function reduces one slope to (1,0) by a
//! unimodular change of basis and then descends through Stern-Brocot
//! parents with memoization; an independent breadth-first oracle lives in
//! the test suites. Slope and map entries are arbitrary-precision: useful
//! gluing maps of distance d have entries growing like 2.4^d, which
//! leaves fixed-width integers around d = 45.
//!
//! A layered chain realizes a torus map between two one-vertex torus
//! boundaries. Each layer glues one tetrahedron across the current
//! boundary torus and flips one of its three edge classes; the running
//! state tracks the two free faces (with aligned vertex triples, positions
//! (0,1) spanning the meridian-like class, (1,2) the fiber-like class,
//! (0,2) the diagonal, always `s1 = s0 + s2`) and the class slopes in the
//! source basis. Flip sequences are planned along the Farey tessellation's
//! dual tree, so realizations are unique and short.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::block::{glue_sites, FaceSite, TorusFraming};
use crate::tri::Triangulation;

#[derive(Debug, Error)]
pub enum GluingError {
    #[error("matrix determinant must be +1 or -1, got {0}")]
    NotUnimodular(BigInt),
    #[error("map not realizable from the standard boundary framing: {0}")]
    NotRealizable(String),
}

type V2 = (BigInt, BigInt);

fn v2(p: i64, q: i64) -> V2 {
    (BigInt::from(p), BigInt::from(q))
}

fn add(a: &V2, b: &V2) -> V2 {
    (&a.0 + &b.0, &a.1 + &b.1)
}
fn sub(a: &V2, b: &V2) -> V2 {
    (&a.0 - &b.0, &a.1 - &b.1)
}
fn neg(a: &V2) -> V2 {
    (-&a.0, -&a.1)
}

/// extended gcd: (g, x, y) with a*x + b*y = g, g >= 0
fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if b.is_zero() {
        let s = if a.is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        return (a.abs(), s, BigInt::zero());
    }
    let (q, r) = a.div_rem(b);
    let (g, x, y) = ext_gcd(b, &r);
    let ny = x - &q * &y;
    (g, y, ny)
}

/// Primitive integer pair up to sign, normalized to `q > 0` or `(1, 0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope {
    p: BigInt,
    q: BigInt,
}

impl Slope {
    /// Reduces by the gcd and normalizes the sign. Panics on (0,0).
    pub fn new(p: i64, q: i64) -> Slope {
        Slope::from_big(BigInt::from(p), BigInt::from(q))
    }

    pub fn from_big(p: BigInt, q: BigInt) -> Slope {
        assert!(!p.is_zero() || !q.is_zero(), "slope (0,0) is not a curve");
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / &g, q / &g);
        if q.is_negative() || (q.is_zero() && p.is_negative()) {
            p = -p;
            q = -q;
        }
        Slope { p, q }
    }

    pub fn from_vector(v: &V2) -> Slope {
        Slope::from_big(v.0.clone(), v.1.clone())
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }
    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn determinant(a: &Slope, b: &Slope) -> BigInt {
        &a.p * &b.q - &a.q * &b.p
    }

    pub fn is_farey_neighbor(a: &Slope, b: &Slope) -> bool {
        Slope::determinant(a, b).abs().is_one()
    }
}

impl std::fmt::Display for Slope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Distance from the slope (1,0) to `p/q`, `q >= 1`, using the parent
/// recursion: an integer slope is adjacent, `p ≡ ±1 (mod q)` is at
/// distance two, and otherwise the two smaller-denominator neighbours
/// (Stern-Brocot parents) are one step closer.
fn distance_from_infinity(
    p: &BigInt,
    q: &BigInt,
    memo: &mut HashMap<(BigInt, BigInt), u64>,
) -> u64 {
    debug_assert!(q >= &BigInt::one());
    if q.is_one() {
        return 1;
    }
    let p = p.mod_floor(q);
    if p.is_one() || p == q - BigInt::one() {
        return 2;
    }
    if let Some(&d) = memo.get(&(p.clone(), q.clone())) {
        return d;
    }
    // modular inverse of p mod q
    let (_, x, _) = ext_gcd(&p, q);
    let s = x.mod_floor(q);
    let r = (&p * &s - BigInt::one()) / q;
    let d1 = distance_from_infinity(&r, &s, memo);
    let d2 = distance_from_infinity(&(&p - &r), &(q - &s), memo);
    let d = 1 + d1.min(d2);
    memo.insert((p, q.clone()), d);
    d
}

/// Graph distance in the Farey graph, where slopes `a`, `b` are adjacent
/// when `|det(a,b)| = 1`.
pub fn farey_distance(a: &Slope, b: &Slope) -> u64 {
    farey_distances_from(a, std::slice::from_ref(b))[0]
}

/// Distances from one slope to many targets; the change of basis and the
/// descent memo are shared across the whole batch.
pub fn farey_distances_from(a: &Slope, targets: &[Slope]) -> Vec<u64> {
    // basis change sending a to (1,0)
    let (g, x, y) = ext_gcd(&a.p, &a.q);
    debug_assert!(g.is_one());
    let mut memo = HashMap::new();
    targets
        .iter()
        .map(|b| {
            if a == b {
                return 0;
            }
            let bp = &x * &b.p + &y * &b.q;
            let bq = -&a.q * &b.p + &a.p * &b.q;
            let t = Slope::from_big(bp, bq);
            debug_assert!(t.q >= BigInt::one(), "image of a distinct slope is finite");
            distance_from_infinity(&t.p, &t.q, &mut memo)
        })
        .collect()
}

/// Integer 2x2 matrix of determinant ±1 acting on slopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusMap {
    m: [[BigInt; 2]; 2],
}

impl TorusMap {
    pub fn identity() -> TorusMap {
        TorusMap::from_i64([[1, 0], [0, 1]]).unwrap()
    }

    /// Swaps the two basis slopes.
    pub fn swap() -> TorusMap {
        TorusMap::from_i64([[0, 1], [1, 0]]).unwrap()
    }

    pub fn new(m: [[BigInt; 2]; 2]) -> Result<TorusMap, GluingError> {
        let d = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        if !d.abs().is_one() {
            return Err(GluingError::NotUnimodular(d));
        }
        Ok(TorusMap { m })
    }

    pub fn from_i64(m: [[i64; 2]; 2]) -> Result<TorusMap, GluingError> {
        TorusMap::new([
            [BigInt::from(m[0][0]), BigInt::from(m[0][1])],
            [BigInt::from(m[1][0]), BigInt::from(m[1][1])],
        ])
    }

    pub fn rows(&self) -> &[[BigInt; 2]; 2] {
        &self.m
    }

    pub fn det(&self) -> BigInt {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    pub fn apply_vector(&self, v: &V2) -> V2 {
        (
            &self.m[0][0] * &v.0 + &self.m[0][1] * &v.1,
            &self.m[1][0] * &v.0 + &self.m[1][1] * &v.1,
        )
    }

    pub fn apply(&self, s: &Slope) -> Slope {
        Slope::from_vector(&self.apply_vector(&(s.p.clone(), s.q.clone())))
    }

    pub fn inverse(&self) -> TorusMap {
        let d = self.det();
        TorusMap {
            m: [
                [&self.m[1][1] / &d, -&self.m[0][1] / &d],
                [-&self.m[1][0] / &d, &self.m[0][0] / &d],
            ],
        }
    }

    pub fn mul(&self, rhs: &TorusMap) -> TorusMap {
        TorusMap {
            m: mat_mul(&self.m, &rhs.m),
        }
    }

    /// Global sign normalization: the first nonzero entry in row-major
    /// order is positive. A map and its negation act identically on
    /// slopes.
    pub fn canonical(&self) -> TorusMap {
        for e in [&self.m[0][0], &self.m[0][1], &self.m[1][0], &self.m[1][1]] {
            if !e.is_zero() {
                if e.is_negative() {
                    return TorusMap {
                        m: [
                            [-&self.m[0][0], -&self.m[0][1]],
                            [-&self.m[1][0], -&self.m[1][1]],
                        ],
                    };
                }
                break;
            }
        }
        self.clone()
    }
}

fn mat_mul(a: &[[BigInt; 2]; 2], b: &[[BigInt; 2]; 2]) -> [[BigInt; 2]; 2] {
    [
        [
            &a[0][0] * &b[0][0] + &a[0][1] * &b[1][0],
            &a[0][0] * &b[0][1] + &a[0][1] * &b[1][1],
        ],
        [
            &a[1][0] * &b[0][0] + &a[1][1] * &b[1][0],
            &a[1][0] * &b[0][1] + &a[1][1] * &b[1][1],
        ],
    ]
}

fn neg_mat(m: &[[BigInt; 2]; 2]) -> [[BigInt; 2]; 2] {
    [[-&m[0][0], -&m[0][1]], [-&m[1][0], -&m[1][1]]]
}

/// Farey distance between the image of the source fiber and the target
/// fiber: zero exactly when the map aligns the fibers.
pub fn gluing_distance(map: &TorusMap, fiber_src: &Slope, fiber_dst: &Slope) -> u64 {
    farey_distance(&map.apply(fiber_src), fiber_dst)
}

// ---------------------------------------------------------------------------
// flip calculus

/// Elementary effect of flipping class `k` on the frame matrix `[s2 | s0]`
/// (right multiplication).
const FLIP_MATRICES: [[[i64; 2]; 2]; 3] = [
    [[-1, 2], [0, 1]],  // flip class 0
    [[1, -1], [0, 1]],  // flip class 1 (the diagonal)
    [[1, -1], [1, -2]], // flip class 2
];

/// Class slopes tracked through a flip sequence; `s[1] = s[0] + s[2]`
/// always holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Frame {
    s: [V2; 3],
}

impl Frame {
    fn initial() -> Frame {
        Frame {
            s: [v2(0, 1), v2(1, 1), v2(1, 0)],
        }
    }

    fn flip(&mut self, class: u8) {
        let [s0, s1, s2] = &self.s;
        self.s = match class {
            1 => [sub(s0, s2), s0.clone(), s2.clone()],
            // re-coordinate [-s0, s2, s1], then flip the diagonal
            2 => [sub(&neg(s0), s1), neg(s0), s1.clone()],
            // re-coordinate [s1, s0, -s2], then flip the diagonal
            0 => [add(s1, s2), s1.clone(), neg(s2)],
            _ => unreachable!("bad flip class"),
        };
        debug_assert_eq!(self.s[1], add(&self.s[0], &self.s[2]));
    }

    /// Frame matrix with columns `s2`, `s0`.
    fn matrix(&self) -> [[BigInt; 2]; 2] {
        [
            [self.s[2].0.clone(), self.s[0].0.clone()],
            [self.s[2].1.clone(), self.s[0].1.clone()],
        ]
    }

    fn slopes(&self) -> [Slope; 3] {
        let mut t = [
            Slope::from_vector(&self.s[0]),
            Slope::from_vector(&self.s[1]),
            Slope::from_vector(&self.s[2]),
        ];
        t.sort();
        t
    }
}

fn base_triangle() -> [Slope; 3] {
    let mut t = [Slope::new(0, 1), Slope::new(1, 1), Slope::new(1, 0)];
    t.sort();
    t
}

/// The two candidate replacements when the triangle's vertex is flipped
/// across the edge `{u, v}`.
fn flip_candidates(u: &Slope, v: &Slope) -> (Slope, Slope) {
    (
        Slope::from_big(&u.p + &v.p, &u.q + &v.q),
        Slope::from_big(&u.p - &v.p, &u.q - &v.q),
    )
}

/// One step of the descent towards the base triangle: flips the vertex
/// with the lexicographically largest (denominator, |numerator|).
fn descend(tri: &[Slope; 3]) -> [Slope; 3] {
    let key = |s: &Slope| (s.q.clone(), s.p.abs());
    let mut idx = 0;
    for i in 1..3 {
        if key(&tri[i]) > key(&tri[idx]) {
            idx = i;
        }
    }
    let w = &tri[idx];
    let (u, v) = match idx {
        0 => (&tri[1], &tri[2]),
        1 => (&tri[0], &tri[2]),
        _ => (&tri[0], &tri[1]),
    };
    let (c1, c2) = flip_candidates(u, v);
    let w2 = if &c1 == w { c2 } else { c1 };
    debug_assert_ne!(&w2, w);
    let mut out = [u.clone(), v.clone(), w2];
    out.sort();
    out
}

/// Unique path of Farey triangles from the base triangle to `target`.
fn triangle_path(target: [Slope; 3]) -> Vec<[Slope; 3]> {
    let base = base_triangle();
    let mut back = vec![target.clone()];
    let mut cur = target;
    let mut guard = 0usize;
    while cur != base {
        cur = descend(&cur);
        back.push(cur.clone());
        guard += 1;
        assert!(guard < 1_000_000, "farey descent failed to terminate");
    }
    back.reverse();
    back
}

/// Walks the tessellation tree along `path`, flipping the class that
/// leaves the current triangle at each step.
fn walk_path(path: &[[Slope; 3]]) -> (Frame, Vec<u8>) {
    let mut frame = Frame::initial();
    let mut flips = Vec::new();
    for next in path.iter().skip(1) {
        for pos in 0..3u8 {
            let s = Slope::from_vector(&frame.s[pos as usize]);
            if !next.contains(&s) {
                frame.flip(pos);
                flips.push(pos);
                break;
            }
        }
        debug_assert_eq!(&frame.slopes(), next);
    }
    (frame, flips)
}

/// Plans the flip sequence realizing `map`: walk the tessellation tree to
/// the triangle of `map^{-1}`, then fix the marking with a short
/// breadth-first search.
fn plan_flips(map: &TorusMap) -> Result<Vec<u8>, GluingError> {
    let inv = map.inverse();
    let c1 = inv.apply_vector(&v2(1, 0));
    let c2 = inv.apply_vector(&v2(0, 1));
    let sum = add(&c1, &c2);
    let mut target = [
        Slope::from_vector(&c1),
        Slope::from_vector(&c2),
        Slope::from_vector(&sum),
    ];
    target.sort();

    let path = triangle_path(target);
    let (frame, mut flips) = walk_path(&path);

    let want = inv.rows().clone();
    let want_neg = neg_mat(&want);
    if frame.matrix() == want || frame.matrix() == want_neg {
        return Ok(flips);
    }
    // marking fix: bounded BFS over flip words
    let mut queue = VecDeque::new();
    let mut seen: HashMap<Frame, ()> = HashMap::new();
    seen.insert(frame.clone(), ());
    queue.push_back((frame, Vec::new()));
    while let Some((f, word)) = queue.pop_front() {
        if word.len() > 12 {
            break;
        }
        for k in 0..3u8 {
            let mut nf = f.clone();
            nf.flip(k);
            let mut nw = word.clone();
            nw.push(k);
            if nf.matrix() == want || nf.matrix() == want_neg {
                flips.extend_from_slice(&nw);
                return Ok(flips);
            }
            if nw.len() <= 12 && !seen.contains_key(&nf) {
                seen.insert(nf.clone(), ());
                queue.push_back((nf, nw));
            }
        }
    }
    Err(GluingError::NotRealizable(
        "no flip word reaches the requested framing".into(),
    ))
}

/// A torus map realized as a chain of layered tetrahedra, one diagonal
/// flip per layer.
#[derive(Debug, Clone)]
pub struct LayeredGluing {
    pub map: TorusMap,
    /// Flipped class per layer.
    pub flips: Vec<u8>,
    pub achieved_distance: u64,
}

impl LayeredGluing {
    pub fn tetrahedron_count(&self) -> usize {
        self.flips.len()
    }

    /// Elementary matrix of each layer, in order.
    pub fn flip_matrices(&self) -> Vec<[[i64; 2]; 2]> {
        self.flips
            .iter()
            .map(|&k| FLIP_MATRICES[k as usize])
            .collect()
    }

    /// Product of the per-layer matrices, inverted and sign-normalized:
    /// reproduces the map exactly.
    pub fn composite_map(&self) -> TorusMap {
        let mut b = TorusMap::identity();
        for &k in &self.flips {
            let e = TorusMap::from_i64(FLIP_MATRICES[k as usize]).unwrap();
            b = b.mul(&e);
        }
        b.inverse().canonical()
    }

    /// The chain as its own triangulation: the first tetrahedron's two back
    /// faces and the last one's two front faces stay on the boundary.
    /// Returns the triangulation with the bottom and top framings.
    pub fn standalone_triangulation(&self) -> (Triangulation, TorusFraming, TorusFraming) {
        let mut tri = Triangulation::new(0);
        let mut state = LayerState::detached();
        for &k in &self.flips {
            state.flip(&mut tri, k);
        }
        let bottom = TorusFraming {
            f1: FaceSite {
                tet: 0,
                face: 3,
                triple: [0, 2, 1],
            },
            f2: FaceSite {
                tet: 0,
                face: 2,
                triple: [1, 3, 0],
            },
        };
        let top = TorusFraming {
            f1: state.f1.expect("chain has at least one layer"),
            f2: state.f2.expect("chain has at least one layer"),
        };
        (tri, bottom, top)
    }
}

/// Realizes a torus map as a layered chain between two standard
/// one-vertex torus framings; the final pasting is then label-identity on
/// the aligned triples.
pub fn realize_as_layers(map: &TorusMap) -> Result<LayeredGluing, GluingError> {
    TorusMap::new(map.rows().clone())?;
    let flips = plan_flips(map)?;
    // sanity: replay and compare the frame with map^{-1}
    let mut frame = Frame::initial();
    for &k in &flips {
        frame.flip(k);
    }
    let want = map.inverse().rows().clone();
    if frame.matrix() != want && frame.matrix() != neg_mat(&want) {
        return Err(GluingError::NotRealizable(
            "replayed flips disagree with the requested map".into(),
        ));
    }
    Ok(LayeredGluing {
        map: map.clone(),
        flips,
        achieved_distance: gluing_distance(map, &Slope::new(0, 1), &Slope::new(0, 1)),
    })
}

/// Deterministic map of gluing distance at least `d` between the given
/// fiber slopes. The standard-fiber family follows the Pell recursion
/// `t_{j+1} = 2 t_j + t_{j-1}`, whose member `t_d` sits at Farey distance
/// exactly `d` from the fiber; the walk to its triangle uses `2d - 1`
/// layers. Other fibers are handled by a unimodular change of basis on
/// each side.
pub fn pick_high_distance_map(d: u64, fiber_src: &Slope, fiber_dst: &Slope) -> TorusMap {
    assert!(d >= 1, "distance budget must be at least 1");
    let std_fiber = Slope::new(0, 1);
    // target triangle {t_{d-1}, t_d, t_d - t_{d-1}} of the Pell family
    let mut prev = v2(0, 1);
    let mut cur = v2(1, 2);
    for _ in 1..d {
        let next = (
            BigInt::from(2) * &cur.0 + &prev.0,
            BigInt::from(2) * &cur.1 + &prev.1,
        );
        prev = cur;
        cur = next;
    }
    let diff = sub(&cur, &prev);
    let mut target = [
        Slope::from_vector(&prev),
        Slope::from_vector(&cur),
        Slope::from_vector(&diff),
    ];
    target.sort();
    let path = triangle_path(target);
    let (frame, _) = walk_path(&path);
    let standard = TorusMap::new(frame.matrix())
        .expect("frame matrices are unimodular")
        .inverse()
        .canonical();
    if *fiber_src == std_fiber && *fiber_dst == std_fiber {
        return standard;
    }
    let u = complete_to_basis(fiber_src);
    let v = complete_to_basis(fiber_dst);
    v.mul(&standard).mul(&u.inverse()).canonical()
}

/// A unimodular matrix sending (0,1) to the given slope.
fn complete_to_basis(s: &Slope) -> TorusMap {
    let (_, x, y) = ext_gcd(&s.p, &s.q);
    // columns ((y, -x), (p, q)): det = y q + x p = 1
    TorusMap::new([[y, s.p.clone()], [-x, s.q.clone()]]).expect("basis completion is unimodular")
}

// ---------------------------------------------------------------------------
// layering against a real gluing table

/// Running boundary of a chain under construction. `None` faces mean the
/// chain is detached at the bottom (used for standalone serialization);
/// the assembler starts from a block's torus framing instead.
pub(crate) struct LayerState {
    pub(crate) f1: Option<FaceSite>,
    pub(crate) f2: Option<FaceSite>,
    frame: Frame,
}

impl LayerState {
    pub(crate) fn from_framing(fr: &TorusFraming) -> LayerState {
        LayerState {
            f1: Some(fr.f1),
            f2: Some(fr.f2),
            frame: Frame::initial(),
        }
    }

    pub(crate) fn detached() -> LayerState {
        LayerState {
            f1: None,
            f2: None,
            frame: Frame::initial(),
        }
    }

    /// Layers one tetrahedron across the current boundary, flipping the
    /// given class.
    pub(crate) fn flip(&mut self, tri: &mut Triangulation, class: u8) {
        // re-coordinate so the flipped class is the diagonal (positions 0,2)
        match class {
            1 => {}
            2 => {
                for f in [&mut self.f1, &mut self.f2].into_iter().flatten() {
                    f.triple.swap(1, 2);
                }
            }
            0 => {
                for f in [&mut self.f1, &mut self.f2].into_iter().flatten() {
                    f.triple.swap(0, 1);
                }
            }
            _ => unreachable!("bad flip class"),
        }
        let d = tri.add_tetrahedron();
        if let Some(f1) = &self.f1 {
            glue_sites(
                tri,
                &FaceSite {
                    tet: d,
                    face: 3,
                    triple: [0, 2, 1],
                },
                f1,
            );
        }
        if let Some(f2) = &self.f2 {
            glue_sites(
                tri,
                &FaceSite {
                    tet: d,
                    face: 2,
                    triple: [1, 3, 0],
                },
                f2,
            );
        }
        self.f1 = Some(FaceSite {
            tet: d,
            face: 1,
            triple: [0, 2, 3],
        });
        self.f2 = Some(FaceSite {
            tet: d,
            face: 0,
            triple: [1, 3, 2],
        });
        self.frame.flip(class);
    }

    pub(crate) fn frame_matrix(&self) -> [[BigInt; 2]; 2] {
        self.frame.matrix()
    }

    /// Pastes the chain's free faces onto the target torus, label-identity
    /// on the aligned triples.
    pub(crate) fn close_onto(&self, tri: &mut Triangulation, target: &TorusFraming) {
        let f1 = self.f1.expect("cannot close an empty chain");
        let f2 = self.f2.expect("cannot close an empty chain");
        glue_sites(tri, &f1, &target.f1);
        glue_sites(tri, &f2, &target.f2);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_gcd(a: i64, b: i64) -> i64 {
        let (mut a, mut b) = (a.abs(), b.abs());
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }

    /// Small breadth-first oracle over the Farey graph restricted to a box.
    fn bfs_distance(a: &Slope, b: &Slope, bound: i64) -> Option<u64> {
        if a == b {
            return Some(0);
        }
        let mut slopes = Vec::new();
        for q in 0..=bound {
            for p in -bound..=bound {
                if (p != 0 || q != 0) && small_gcd(p, q) == 1 {
                    slopes.push(Slope::new(p, q));
                }
            }
        }
        slopes.sort();
        slopes.dedup();
        let mut dist: HashMap<Slope, u64> = HashMap::from([(a.clone(), 0)]);
        let mut queue = VecDeque::from([a.clone()]);
        while let Some(s) = queue.pop_front() {
            let d = dist[&s];
            for t in &slopes {
                if !dist.contains_key(t) && Slope::is_farey_neighbor(&s, t) {
                    dist.insert(t.clone(), d + 1);
                    if t == b {
                        return Some(d + 1);
                    }
                    queue.push_back(t.clone());
                }
            }
        }
        dist.get(b).copied()
    }

    #[test]
    fn slope_normalization() {
        assert_eq!(Slope::new(2, -4), Slope::new(-1, 2));
        assert_eq!(Slope::new(-3, 0), Slope::new(1, 0));
        assert_eq!(Slope::new(0, -7), Slope::new(0, 1));
    }

    #[test]
    fn farey_distance_basics() {
        let o = Slope::new(0, 1);
        assert_eq!(farey_distance(&o, &o), 0);
        assert_eq!(farey_distance(&o, &Slope::new(1, 0)), 1);
        // 0/1 - 1/2 - 3/5
        assert_eq!(farey_distance(&o, &Slope::new(3, 5)), 2);
    }

    #[test]
    fn farey_distance_matches_bfs_small() {
        let mut slopes = Vec::new();
        for q in 0..=8i64 {
            for p in -8..=8i64 {
                if (p != 0 || q != 0) && small_gcd(p, q) == 1 {
                    slopes.push(Slope::new(p, q));
                }
            }
        }
        slopes.sort();
        slopes.dedup();
        for a in &slopes {
            for b in &slopes {
                if a <= b {
                    let cf = farey_distance(a, b);
                    let bfs = bfs_distance(a, b, 24).unwrap();
                    assert_eq!(cf, bfs, "a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn farey_distance_is_symmetric_and_triangular() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut pick = || loop {
                let p = rng.gen_range(-40i64..=40);
                let q = rng.gen_range(-40i64..=40);
                if p != 0 || q != 0 {
                    return Slope::new(p, q);
                }
            };
            let (a, b, c) = (pick(), pick(), pick());
            assert_eq!(farey_distance(&a, &b), farey_distance(&b, &a));
            assert!(farey_distance(&a, &c) <= farey_distance(&a, &b) + farey_distance(&b, &c));
            assert_eq!(farey_distance(&a, &b) == 0, a == b);
        }
    }

    #[test]
    fn gluing_distance_examples() {
        let fiber = Slope::new(0, 1);
        assert_eq!(gluing_distance(&TorusMap::identity(), &fiber, &fiber), 0);
        assert_eq!(gluing_distance(&TorusMap::swap(), &fiber, &fiber), 1);
        let shear = TorusMap::from_i64([[1, 0], [5, 1]]).unwrap();
        let d = gluing_distance(&shear, &Slope::new(1, 0), &fiber);
        assert_eq!(d, farey_distance(&Slope::new(1, 5), &fiber));
        assert_eq!(d, 1);
    }

    #[test]
    fn torus_map_validation() {
        assert!(TorusMap::from_i64([[2, 0], [0, 1]]).is_err());
        let m = TorusMap::from_i64([[2, 1], [1, 1]]).unwrap();
        assert_eq!(m.mul(&m.inverse()), TorusMap::identity());
    }

    #[test]
    fn flips_preserve_frame_invariant_and_unimodularity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut f = Frame::initial();
            for _ in 0..rng.gen_range(1..25) {
                f.flip(rng.gen_range(0..3u8));
                let m = f.matrix();
                let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
                assert!(det.abs().is_one());
            }
        }
    }

    #[test]
    fn one_and_two_flip_maps_realize_within_two_layers() {
        // every map induced by a flip word of length <= 2 realizes back in
        // at most two layers
        let mut words: Vec<Vec<u8>> = (0..3u8).map(|k| vec![k]).collect();
        for a in 0..3u8 {
            for b in 0..3u8 {
                words.push(vec![a, b]);
            }
        }
        for w in words {
            let mut f = Frame::initial();
            for &k in &w {
                f.flip(k);
            }
            let map = TorusMap::new(f.matrix()).unwrap().inverse().canonical();
            let lg = realize_as_layers(&map).unwrap();
            assert!(
                lg.tetrahedron_count() <= 2,
                "word {w:?} realized with {} layers",
                lg.tetrahedron_count()
            );
            assert_eq!(lg.composite_map(), map.canonical());
        }
    }

    #[test]
    fn pick_high_distance_maps_certify() {
        let fiber = Slope::new(0, 1);
        let mut last = 0;
        for d in 1..=20u64 {
            let map = pick_high_distance_map(d, &fiber, &fiber);
            let achieved = gluing_distance(&map, &fiber, &fiber);
            assert!(achieved >= d, "d={d} achieved={achieved}");
            assert!(achieved >= last, "monotonicity broke at {d}");
            last = achieved;
            let lg = realize_as_layers(&map).unwrap();
            assert!(
                lg.tetrahedron_count() as u64 <= 2 * d,
                "d={d}: {} layers",
                lg.tetrahedron_count()
            );
            assert_eq!(lg.composite_map(), map.canonical());
        }
    }

    #[test]
    fn pick_with_nonstandard_fibers() {
        let src = Slope::new(1, 0);
        let dst = Slope::new(1, 1);
        for d in 1..=6u64 {
            let map = pick_high_distance_map(d, &src, &dst);
            assert!(gluing_distance(&map, &src, &dst) >= d);
        }
    }

    #[test]
    fn realize_random_unimodular_maps() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            // random product of shears and swaps
            let mut m = TorusMap::identity();
            for _ in 0..rng.gen_range(1..8) {
                let k = rng.gen_range(-3i64..=3);
                let s = match rng.gen_range(0..3) {
                    0 => TorusMap::from_i64([[1, k], [0, 1]]).unwrap(),
                    1 => TorusMap::from_i64([[1, 0], [k, 1]]).unwrap(),
                    _ => TorusMap::swap(),
                };
                m = m.mul(&s);
            }
            let lg = realize_as_layers(&m).unwrap();
            assert_eq!(lg.composite_map(), m.canonical());
            // replay through the flip matrices as the acceptance suite does
            let mut b = TorusMap::identity();
            for fm in lg.flip_matrices() {
                b = b.mul(&TorusMap::from_i64(fm).unwrap());
            }
            let inv = m.inverse();
            assert!(b == inv || b.rows() == &neg_mat(inv.rows()));
        }
    }

    #[test]
    fn standalone_chain_is_a_daisy_chain() {
        let fiber = Slope::new(0, 1);
        let map = pick_high_distance_map(3, &fiber, &fiber);
        let lg = realize_as_layers(&map).unwrap();
        let (tri, bottom, top) = lg.standalone_triangulation();
        tri.validate().unwrap();
        assert_eq!(tri.tetrahedron_count(), lg.tetrahedron_count());
        assert!(tri.is_orientable());
        let g = tri.dual_graph();
        // consecutive layers share exactly two faces
        let mut expected = Vec::new();
        for i in 1..tri.tetrahedron_count() {
            expected.push((i - 1, i));
            expected.push((i - 1, i));
        }
        assert_eq!(g.arcs(), expected.as_slice());
        for fr in [&bottom, &top] {
            assert!(tri.is_boundary_face(fr.f1.tet, fr.f1.face));
            assert!(tri.is_boundary_face(fr.f2.tet, fr.f2.face));
        }
        let summary = tri.boundary_summary().unwrap();
        assert_eq!(summary.components.len(), 2);
        for c in &summary.components {
            assert_eq!(c.triangles, 2);
            assert!(c.is_torus());
            assert_eq!(c.vertices, 1);
        }
    }
}
