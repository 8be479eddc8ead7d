//! Exact toric geometry and lattice theory for dual families of K3 surfaces
//! arising from pairs of 3-dimensional reflexive polytopes.

pub mod linalg;
pub mod polytope;
pub mod toric;
pub mod lattice;
pub mod duality;
