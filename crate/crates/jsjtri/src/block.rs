//! Blocks: triangulated products of a punctured torus with a circle.
//!
//! The 2-dimensional complex is built first: a one-vertex, two-triangle
//! torus into which holes are drilled one at a time. Drilling replaces a
//! triangle by four triangles arranged as a fan over the cut hexagon, so a
//! k-holed torus uses `3k+2` triangles, one fresh vertex per hole, and
//! leaves each hole bounded by a single loop side. Corner order is
//! maintained so that every side gluing matches increasing corners to
//! increasing corners; the prism lift below depends on this.
//!
//! The 3-dimensional block is the product with a circle: each triangle
//! becomes a prism cut into three tetrahedra along the staircase of its
//! corner order, neighbouring prisms agree on the shared square faces
//! because all gluings are order-preserving, and the top of every prism is
//! glued to its own bottom by the identity. The result has `9k+6`
//! tetrahedra and `k` boundary tori, each triangulated with two triangles
//! and one vertex.

use thiserror::Error;

use crate::tri::{Perm4, Triangulation};

#[derive(Debug, Error)]
pub enum BlockError {
    #[error("a block needs at least one boundary torus (k >= 1)")]
    NoBoundary,
    #[error("block construction produced an inconsistent complex: {0}")]
    Inconsistent(String),
}

/// Corner indices of side `s` (the side opposite corner `s`), ascending.
fn side_corners(s: u8) -> (u8, u8) {
    match s {
        0 => (1, 2),
        1 => (0, 2),
        2 => (0, 1),
        _ => unreachable!("bad side {s}"),
    }
}

/// Triangulated surface with ordered corners `0 < 1 < 2` per triangle and
/// order-preserving side gluings. Side `s` of a triangle is opposite
/// corner `s`; `None` marks a boundary side.
#[derive(Debug, Clone)]
pub struct Surface {
    sides: Vec<[Option<(usize, u8)>; 3]>,
}

impl Surface {
    /// One-vertex torus: two triangles glued along all three sides.
    pub fn torus() -> Surface {
        Surface {
            sides: vec![
                [Some((1, 2)), Some((1, 1)), Some((1, 0))],
                [Some((0, 2)), Some((0, 1)), Some((0, 0))],
            ],
        }
    }

    pub fn triangle_count(&self) -> usize {
        self.sides.len()
    }

    pub fn side(&self, t: usize, s: u8) -> Option<(usize, u8)> {
        self.sides[t][s as usize]
    }

    pub fn boundary_sides(&self) -> Vec<(usize, u8)> {
        let mut out = Vec::new();
        for (t, sides) in self.sides.iter().enumerate() {
            for s in 0..3u8 {
                if sides[s as usize].is_none() {
                    out.push((t, s));
                }
            }
        }
        out
    }

    /// Drills a hole through the interior of triangle `t`: the triangle is
    /// replaced (in place) by a fan of four triangles around a fresh
    /// vertex, whose loop side becomes a new boundary circle. Sides 0 and 1
    /// of `t` keep their slots, so only the partner of the old side 2 is
    /// rewired.
    pub fn drill(&mut self, t: usize) {
        let old2 = self.sides[t][2];
        let t2 = self.sides.len();
        let t3 = t2 + 1;
        let t4 = t2 + 2;
        self.sides[t][2] = Some((t2, 2));
        self.sides
            .push([Some((t3, 2)), Some((t4, 1)), Some((t, 2))]);
        self.sides.push([None, Some((t4, 0)), Some((t2, 0))]);
        self.sides.push([Some((t3, 1)), Some((t2, 1)), old2]);
        if let Some((p, ps)) = old2 {
            debug_assert!(!(p == t && ps == 2), "drilled side glued to itself");
            self.sides[p][ps as usize] = Some((t4, 2));
        }
    }

    fn corner_classes(&self) -> Vec<usize> {
        let n = 3 * self.sides.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (t, sides) in self.sides.iter().enumerate() {
            for s in 0..3u8 {
                if let Some((pt, ps)) = sides[s as usize] {
                    let (i, j) = side_corners(s);
                    let (pi, pj) = side_corners(ps);
                    for (a, b) in [(i, pi), (j, pj)] {
                        let (ra, rb) = (
                            find(&mut parent, 3 * t + a as usize),
                            find(&mut parent, 3 * pt + b as usize),
                        );
                        if ra != rb {
                            parent[ra.max(rb)] = ra.min(rb);
                        }
                    }
                }
            }
        }
        (0..n).map(|x| find(&mut parent, x)).collect()
    }

    pub fn vertex_count(&self) -> usize {
        let classes = self.corner_classes();
        let mut roots: Vec<usize> = classes.clone();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    pub fn edge_count(&self) -> usize {
        let total = 3 * self.sides.len();
        let boundary = self.boundary_sides().len();
        (total - boundary) / 2 + boundary
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.triangle_count() as i64
    }

    /// Two-colorability of triangles under the orientation constraints the
    /// ordered gluings impose.
    pub fn is_orientable(&self) -> bool {
        let asc = |s: u8| s != 1; // induced boundary direction of side s
        let n = self.sides.len();
        let mut sign = vec![0i8; n];
        for start in 0..n {
            if sign[start] != 0 {
                continue;
            }
            sign[start] = 1;
            let mut stack = vec![start];
            while let Some(t) = stack.pop() {
                for s in 0..3u8 {
                    if let Some((pt, ps)) = self.sides[t][s as usize] {
                        let want = if asc(s) == asc(ps) { -sign[t] } else { sign[t] };
                        if sign[pt] == 0 {
                            sign[pt] = want;
                            stack.push(pt);
                        } else if sign[pt] != want {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Triangulation of the torus with `k` open disks removed: `3k+2`
/// triangles, `k+1` vertices, Euler characteristic `-k`, each boundary
/// circle a one-vertex loop.
pub fn punctured_torus(k: usize) -> Result<Surface, BlockError> {
    if k == 0 {
        return Err(BlockError::NoBoundary);
    }
    let mut s = Surface::torus();
    for _ in 0..k {
        s.drill(0);
    }
    Ok(s)
}

/// A face of the triangulation together with an ordered triple of the
/// vertex labels on it. The label not in the triple is the face index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceSite {
    pub tet: usize,
    pub face: u8,
    pub triple: [u8; 3],
}

impl FaceSite {
    pub fn off_label(&self) -> u8 {
        6 - self.triple[0] - self.triple[1] - self.triple[2]
    }

    pub fn shifted(&self, offset: usize) -> FaceSite {
        FaceSite {
            tet: self.tet + offset,
            ..*self
        }
    }
}

/// One boundary torus with its two faces carrying aligned triples: the edge
/// spanned by triple positions (0,1) is the meridian (the hole's loop in
/// the surface, slope (1,0)), positions (1,2) span the fiber (the circle
/// direction, slope (0,1)), and positions (0,2) span the diagonal (slope
/// (1,1)).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusFraming {
    pub f1: FaceSite,
    pub f2: FaceSite,
}

impl TorusFraming {
    pub const MERIDIAN: (i64, i64) = (1, 0);
    pub const FIBER: (i64, i64) = (0, 1);

    pub fn shifted(&self, offset: usize) -> TorusFraming {
        TorusFraming {
            f1: self.f1.shifted(offset),
            f2: self.f2.shifted(offset),
        }
    }

    /// A corner representing the torus's single vertex.
    pub fn vertex_corner(&self) -> (usize, u8) {
        (self.f1.tet, self.f1.triple[0])
    }
}

/// The block: a `k`-holed torus crossed with a circle.
#[derive(Debug, Clone)]
pub struct Block {
    pub k: usize,
    pub tri: Triangulation,
    pub tori: Vec<TorusFraming>,
}

/// Face sites of the lower and upper square-face triangles over side
/// `(t, s)`. Positions of the lower triple mean `(b_i, b_j, t_j)`, of the
/// upper `(b_i, t_i, t_j)`, where `(i, j)` are the side's corners; tets of
/// prism `t` are `A=3t` `(b0,b1,b2,t2)`, `B=3t+1` `(b0,b1,t1,t2)`,
/// `C=3t+2` `(b0,t0,t1,t2)`.
fn lower_site(t: usize, s: u8) -> FaceSite {
    match s {
        0 => FaceSite {
            tet: 3 * t,
            face: 0,
            triple: [1, 2, 3],
        },
        1 => FaceSite {
            tet: 3 * t,
            face: 1,
            triple: [0, 2, 3],
        },
        2 => FaceSite {
            tet: 3 * t + 1,
            face: 3,
            triple: [0, 1, 2],
        },
        _ => unreachable!(),
    }
}

fn upper_site(t: usize, s: u8) -> FaceSite {
    match s {
        0 => FaceSite {
            tet: 3 * t + 1,
            face: 0,
            triple: [1, 2, 3],
        },
        1 => FaceSite {
            tet: 3 * t + 2,
            face: 2,
            triple: [0, 1, 3],
        },
        2 => FaceSite {
            tet: 3 * t + 2,
            face: 3,
            triple: [0, 1, 2],
        },
        _ => unreachable!(),
    }
}

/// Glues two face sites position-wise: triple to triple, off-label to
/// off-label.
pub(crate) fn glue_sites(tri: &mut Triangulation, a: &FaceSite, b: &FaceSite) {
    let mut imgs = [4u8; 4];
    for pos in 0..3 {
        imgs[a.triple[pos] as usize] = b.triple[pos];
    }
    imgs[a.off_label() as usize] = b.off_label();
    let perm = Perm4::new(imgs).expect("triples are label sets");
    debug_assert_eq!(perm.apply(a.face), b.face);
    tri.glue(a.tet, a.face, b.tet, perm);
}

/// Builds the triangulated block with `k` boundary tori and `9k+6`
/// tetrahedra.
pub fn build_block(k: usize) -> Result<Block, BlockError> {
    let surface = punctured_torus(k)?;
    let f = surface.triangle_count();
    let mut tri = Triangulation::new(3 * f);

    for t in 0..f {
        let (a, b, c) = (3 * t, 3 * t + 1, 3 * t + 2);
        // prism interior
        tri.glue(a, 2, b, Perm4::IDENTITY);
        tri.glue(b, 1, c, Perm4::IDENTITY);
        // top of the prism onto its own bottom, t_i -> b_i
        tri.glue(c, 0, a, Perm4::new([3, 0, 1, 2]).unwrap());
    }
    for t in 0..f {
        for s in 0..3u8 {
            let Some((pt, ps)) = surface.side(t, s) else {
                continue;
            };
            if (pt, ps) < (t, s) {
                continue;
            }
            glue_sites(&mut tri, &lower_site(t, s), &lower_site(pt, ps));
            glue_sites(&mut tri, &upper_site(t, s), &upper_site(pt, ps));
        }
    }

    let mut tori = Vec::new();
    for (t, s) in surface.boundary_sides() {
        let lo = lower_site(t, s);
        let up = upper_site(t, s);
        // aligned triples: f1 = (b_i, b_j, t_j), f2 = (t_j, t_i, b_i)
        tori.push(TorusFraming {
            f1: lo,
            f2: FaceSite {
                tet: up.tet,
                face: up.face,
                triple: [up.triple[2], up.triple[1], up.triple[0]],
            },
        });
    }

    let block = Block { k, tri, tori };
    block.check()?;
    Ok(block)
}

impl Block {
    /// Structural invariants; failures abort construction.
    fn check(&self) -> Result<(), BlockError> {
        let fail = |msg: String| Err(BlockError::Inconsistent(msg));
        if let Err(e) = self.tri.validate() {
            return fail(format!("gluing table invalid: {e}"));
        }
        if self.tri.tetrahedron_count() != 9 * self.k + 6 {
            return fail(format!(
                "expected {} tetrahedra, built {}",
                9 * self.k + 6,
                self.tri.tetrahedron_count()
            ));
        }
        if !self.tri.is_orientable() {
            return fail("block is not orientable".into());
        }
        let summary = self
            .tri
            .boundary_summary()
            .map_err(|e| BlockError::Inconsistent(format!("boundary summary: {e}")))?;
        if summary.components.len() != self.k {
            return fail(format!(
                "expected {} boundary tori, found {}",
                self.k,
                summary.components.len()
            ));
        }
        for c in &summary.components {
            if c.triangles != 2 || c.vertices != 1 || !c.is_torus() {
                return fail(format!(
                    "boundary component is not a 2-triangle torus: {c:?}"
                ));
            }
        }
        if self.tri.skeleton_counts().euler_characteristic() != 0 {
            return fail("Euler characteristic is not zero".into());
        }
        for fr in &self.tori {
            for site in [&fr.f1, &fr.f2] {
                if !self.tri.is_boundary_face(site.tet, site.face) {
                    return fail(format!(
                        "framing face ({}, {}) is not a boundary face",
                        site.tet, site.face
                    ));
                }
            }
        }
        Ok(())
    }
}
