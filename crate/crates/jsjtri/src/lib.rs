//! Builds explicit triangulations of closed orientable 3-manifolds whose
//! JSJ decomposition graph is a prescribed multigraph, and verifies every
//! computable property of the result.
//!
//! The pipeline: each graph node of degree `k` becomes a triangulated
//! block (a `k`-holed torus times a circle, `9k+6` tetrahedra), and each
//! arc becomes a layered chain of tetrahedra realizing a high
//! Farey-distance gluing between two boundary tori. Width solvers
//! (treewidth/pathwidth, exact and bounded) drive the distance budget and
//! the verification suites.

pub mod assemble;
pub mod block;
pub mod gluing;
pub mod graph;
pub mod tri;
pub mod verify;
pub mod width;
