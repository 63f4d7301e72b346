//! Combinatorics of the tropical moduli spaces Delta_{g,n}: stable graphs,
//! their contraction structure, deck reconstruction of edge-labelled pairs,
//! the mu invariants and a brute-force automorphism solver.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod canon;
pub mod complex;
pub mod enumeration;
pub mod error;
pub mod families;
pub mod graph;
pub mod reconstruction;
pub mod symmetry;
#[cfg(test)]
mod testutil;

pub use canon::{aut_e, automorphisms, canonical, pair_canonical, CanonicalForm, Mode};
pub use complex::{ComplexStore, SimplexRef};
pub use enumeration::{count_edge_labelled, enumerate_all, enumerate_facets, Skeleton};
pub use error::{ComplexError, GraphError, ReconstructionError, Violation};
pub use graph::{HalfEdgeGraph, LabelledPair, StableGraph};
