//! Fixtures and brute-force oracles shared by the unit tests.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::canon::next_permutation;
use crate::graph::{LabelledPair, StableGraph};

/// Two vertices joined by three edges.
pub fn theta() -> StableGraph {
    StableGraph::new(2, vec![0, 0], &[(0, 1), (0, 1), (0, 1)], vec![])
}

/// Loop 0 at vertex 0, bridge 1, loop 2 at vertex 1.
pub fn dumbbell() -> StableGraph {
    StableGraph::new(2, vec![0, 0], &[(0, 0), (0, 1), (1, 1)], vec![])
}

/// A marked triangle of genus 1.
pub fn triangle() -> StableGraph {
    StableGraph::new(1, vec![0, 0, 0], &[(0, 1), (1, 2), (2, 0)], vec![0, 1, 2])
}

/// The loop graph of type (1, 1).
pub fn loop11() -> StableGraph {
    StableGraph::new(1, vec![0], &[(0, 0)], vec![0])
}

pub fn pair(graph: StableGraph, tau: &[usize]) -> LabelledPair {
    LabelledPair::new(graph, tau.to_vec()).unwrap()
}

pub fn perms(k: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..k).collect();
    let mut out = vec![p.clone()];
    while next_permutation(&mut p) {
        out.push(p.clone());
    }
    out
}

/// Aut_E by brute force: edge permutations phi admitting a vertex bijection pi
/// with ends(phi e) = pi(ends e), preserving weights and every marking.
pub fn aut_e_bruteforce(g: &StableGraph) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    let vperms = perms(g.num_vertices());
    for phi in perms(g.num_edges()) {
        let ok = vperms.iter().any(|pi| {
            (0..g.num_vertices()).all(|v| g.weights[pi[v]] == g.weights[v])
                && g.markings.iter().all(|&v| pi[v] == v)
                && (0..g.num_edges()).all(|e| {
                    let (a, b) = g.ends(e);
                    let (c, d) = g.ends(phi[e]);
                    (pi[a], pi[b]) == (c, d) || (pi[a], pi[b]) == (d, c)
                })
        });
        if ok {
            out.insert(phi);
        }
    }
    out
}
