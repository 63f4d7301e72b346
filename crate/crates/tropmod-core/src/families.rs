//! The named graph families R^k and B^{k,l}_A.
//!
//! Marking sets are zero-based here: marking `i + 1` of the text is index `i`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::ComplexError;
use crate::graph::StableGraph;

/// R^k_{g,n}: one vertex of weight g - k with k loops and every marking.
pub fn make_r(g: usize, n: usize, k: usize) -> Result<StableGraph, ComplexError> {
    if k > g {
        return Err(ComplexError::Inadmissible("k exceeds g"));
    }
    if 3 * g + n <= 3 {
        return Err(ComplexError::NotHyperbolic);
    }
    let ends = vec![(0, 0); k];
    Ok(StableGraph::new(g, vec![(g - k) as u32], &ends, vec![0; n]))
}

/// Whether B^{k,l}_A is stable for (g, n).
pub fn admissible(g: usize, n: usize, k: usize, l: usize, a: &[usize]) -> bool {
    if k + l > g || a.iter().any(|&x| x >= n) {
        return false;
    }
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != a.len() {
        return false;
    }
    let bridges = g - k - l + 1;
    2 * k + bridges + a.len() >= 3 && 2 * l + bridges + (n - a.len()) >= 3
}

/// B^{k,l}_A: k loops at v1, l loops at v2, g - k - l + 1 edges between them,
/// markings in A at v1 and the rest at v2. Edges are ordered loops at v1,
/// loops at v2, then the connecting edges.
pub fn make_b(g: usize, n: usize, k: usize, l: usize, a: &[usize]) -> Result<StableGraph, ComplexError> {
    if !admissible(g, n, k, l, a) {
        return Err(ComplexError::Inadmissible("B^{k,l}_A is not stable"));
    }
    let mut ends: Vec<(usize, usize)> = Vec::new();
    ends.extend(core::iter::repeat_n((0, 0), k));
    ends.extend(core::iter::repeat_n((1, 1), l));
    ends.extend(core::iter::repeat_n((0, 1), g - k - l + 1));
    let markings = (0..n).map(|i| if a.contains(&i) { 0 } else { 1 }).collect();
    Ok(StableGraph::new(g, vec![0, 0], &ends, markings))
}

/// B_A for genus 0: a single edge splitting the markings into A and its complement.
pub fn make_b0(n: usize, a: &[usize]) -> Result<StableGraph, ComplexError> {
    make_b(0, n, 0, 0, a)
}

/// All zero-based subsets of {0..n}, as sorted vectors, in mask order.
pub fn subsets(n: usize) -> Vec<Vec<usize>> {
    (0u64..1 << n)
        .map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_family() {
        let r = make_r(2, 3, 0).unwrap();
        assert_eq!((r.num_vertices(), r.num_edges(), r.weights[0]), (1, 0, 2));
        assert_eq!(r.markings, vec![0, 0, 0]);
        let r = make_r(2, 0, 2).unwrap();
        assert_eq!((r.num_edges(), r.weights[0]), (2, 0));
        assert!(make_r(1, 1, 2).is_err());
    }

    #[test]
    fn b_family() {
        let b = make_b(3, 2, 3, 0, &[]).unwrap();
        assert_eq!(b.num_edges(), 4);
        assert_eq!((0..3).filter(|&e| b.is_loop(e)).count(), 3);
        assert!(b.is_bridge(3));
        assert!(b.validate().is_ok());
        let b = make_b(2, 1, 0, 0, &[0]).unwrap();
        assert_eq!(b.num_edges(), 3);
    }

    #[test]
    fn genus_zero_admissibility() {
        for a in subsets(5) {
            assert_eq!(admissible(0, 5, 0, 0, &a), (2..=3).contains(&a.len()));
        }
        assert_eq!(subsets(3).len(), 8);
    }
}
