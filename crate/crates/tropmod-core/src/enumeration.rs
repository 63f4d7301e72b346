//! Exhaustive generation of stable graphs of type (g, n) up to isomorphism.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::canon::{aut_e, certificate_of, graph_from_certificate};
use crate::error::ComplexError;
use crate::graph::StableGraph;

/// One edge count's worth of isomorphism classes, in certificate order.
#[derive(Clone, Debug, Default)]
pub struct Level {
    certs: Vec<Box<[u8]>>,
    facet: Vec<bool>,
    /// `targets[i * k + e]`: class of `G_i / e` one level down
    targets: Vec<u32>,
}

/// The skeleton: one canonical representative per isomorphism class, by edge count.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub g: usize,
    pub n: usize,
    levels: Vec<Level>,
}

pub fn max_edges(g: usize, n: usize) -> Result<usize, ComplexError> {
    if 3 * g + n <= 3 {
        return Err(ComplexError::NotHyperbolic);
    }
    Ok(3 * g + n - 3)
}

impl Skeleton {
    /// Largest edge count, 3g - 3 + n.
    pub fn max_edges(&self) -> usize {
        self.levels.len() - 1
    }

    /// Number of classes with `k` edges.
    pub fn count(&self, k: usize) -> usize {
        self.levels.get(k).map_or(0, |l| l.certs.len())
    }

    pub fn total(&self) -> usize {
        self.levels.iter().map(|l| l.certs.len()).sum()
    }

    pub fn certificate(&self, k: usize, i: usize) -> &[u8] {
        &self.levels[k].certs[i]
    }

    /// The canonical representative of class `i` with `k` edges.
    pub fn graph(&self, k: usize, i: usize) -> StableGraph {
        graph_from_certificate(&self.levels[k].certs[i]).expect("skeleton certificate")
    }

    /// Representatives of dimension p (p + 1 edges).
    pub fn by_edges(&self, p: isize) -> Vec<StableGraph> {
        let k = (p + 1) as usize;
        (0..self.count(k)).map(|i| self.graph(k, i)).collect()
    }

    pub fn is_facet(&self, k: usize, i: usize) -> bool {
        self.levels[k].facet[i]
    }

    pub fn vertex_count(&self, k: usize, i: usize) -> usize {
        // certificates start with a tag byte and the vertex count
        self.levels[k].certs[i][1] as usize
    }

    /// Class of `G_i / e`, which has `k - 1` edges.
    pub fn target(&self, k: usize, i: usize, e: usize) -> usize {
        self.levels[k].targets[i * k + e] as usize
    }

    pub fn find_certificate(&self, k: usize, cert: &[u8]) -> Option<usize> {
        self.levels.get(k)?.certs.binary_search_by(|c| (**c).cmp(cert)).ok()
    }

    /// Locates a graph of type (g, n): (edge count, class index).
    pub fn find(&self, graph: &StableGraph) -> Option<(usize, usize)> {
        let k = graph.num_edges();
        self.find_certificate(k, &certificate_of(graph)).map(|i| (k, i))
    }

    /// Rebuilds a skeleton from per-edge-count certificate lists, recomputing
    /// contraction targets and facet flags. Fails unless every list is sorted
    /// and the whole set is closed under contraction.
    pub fn from_certificates(g: usize, n: usize, certs: Vec<Vec<Box<[u8]>>>) -> Result<Skeleton, ComplexError> {
        let top = max_edges(g, n)?;
        if certs.len() != top + 1 {
            return Err(ComplexError::Inadmissible("wrong number of edge counts"));
        }
        let mut levels: Vec<Level> = certs
            .into_iter()
            .map(|c| Level {
                certs: c,
                facet: Vec::new(),
                targets: Vec::new(),
            })
            .collect();
        for (k, level) in levels.iter().enumerate() {
            if level.certs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ComplexError::Inadmissible("certificates not strictly sorted"));
            }
            for c in &level.certs {
                let graph = graph_from_certificate(c).ok_or(ComplexError::Inadmissible("bad certificate"))?;
                if graph.num_edges() != k || graph.g != g || graph.n() != n || graph.validate().is_err() {
                    return Err(ComplexError::Inadmissible("certificate of the wrong type"));
                }
            }
        }
        for k in 1..=top {
            let (below, here) = levels.split_at_mut(k);
            let below = &below[k - 1];
            let mut targets = Vec::with_capacity(here[0].certs.len() * k);
            for c in &here[0].certs {
                let graph = graph_from_certificate(c).expect("checked above");
                for e in 0..k {
                    let cert = certificate_of(&graph.contract(e).0);
                    let t = below
                        .certs
                        .binary_search_by(|x| (**x).cmp(&cert[..]))
                        .map_err(|_| ComplexError::Inadmissible("not closed under contraction"))?;
                    targets.push(t as u32);
                }
            }
            here[0].targets = targets;
        }
        for k in 0..=top {
            let mut facet = vec![true; levels[k].certs.len()];
            if k < top {
                for &t in &levels[k + 1].targets {
                    facet[t as usize] = false;
                }
            }
            levels[k].facet = facet;
        }
        Ok(Skeleton { g, n, levels })
    }

    /// Certificates per edge count.
    pub fn certificates(&self) -> Vec<&[Box<[u8]>]> {
        self.levels.iter().map(|l| &l.certs[..]).collect()
    }

    /// Classes that contract onto (k, i), including itself.
    pub fn ancestors(&self, k: usize, i: usize) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        out.insert((k, i));
        let mut frontier = vec![i];
        for level in k + 1..=self.max_edges() {
            let below: BTreeSet<usize> = frontier.drain(..).collect();
            for c in 0..self.count(level) {
                if (0..level).any(|e| below.contains(&self.target(level, c, e))) {
                    out.insert((level, c));
                    frontier.push(c);
                }
            }
            if frontier.is_empty() {
                break;
            }
        }
        out
    }
}

/// All trivalent weight-zero classes: val(v) + |m^-1(v)| = 3 everywhere.
pub fn enumerate_facets(g: usize, n: usize) -> Result<Vec<StableGraph>, ComplexError> {
    Ok(facet_certificates(g, n)?
        .iter()
        .map(|c| graph_from_certificate(c).expect("facet certificate"))
        .collect())
}

fn facet_certificates(g: usize, n: usize) -> Result<Vec<Box<[u8]>>, ComplexError> {
    let ne = max_edges(g, n)?;
    let nv = 2 * g + n - 2;
    let mut found: BTreeSet<Box<[u8]>> = BTreeSet::new();
    for shape in shapes(nv, ne) {
        let mut slots = vec![3usize; nv];
        for &(a, b) in &shape {
            slots[a] -= 1;
            slots[b] -= 1;
        }
        let mut markings = vec![0; n];
        assign_markings(0, &mut slots, &mut markings, &mut |m| {
            let graph = StableGraph::new(g, vec![0; nv], &shape, m.to_vec());
            found.insert(certificate_of(&graph).into_boxed_slice());
        });
    }
    Ok(found.into_iter().collect())
}

fn assign_markings(i: usize, slots: &mut [usize], markings: &mut [usize], emit: &mut impl FnMut(&[usize])) {
    if i == markings.len() {
        emit(markings);
        return;
    }
    for v in 0..slots.len() {
        if slots[v] > 0 {
            slots[v] -= 1;
            markings[i] = v;
            assign_markings(i + 1, slots, markings, emit);
            slots[v] += 1;
        }
    }
}

/// Connected unmarked multigraphs on `nv` vertices with `ne` edges and every
/// degree at most 3, one per isomorphism class.
fn shapes(nv: usize, ne: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|a| (a..nv).map(move |b| (a, b))).collect();
    let mut found: BTreeMap<Vec<u8>, Vec<(usize, usize)>> = BTreeMap::new();
    let mut deg = vec![0usize; nv];
    let mut edges = Vec::with_capacity(ne);
    shape_rec(&pairs, 0, ne, &mut deg, &mut edges, &mut found);
    found.into_values().collect()
}

fn shape_rec(
    pairs: &[(usize, usize)],
    from: usize,
    ne: usize,
    deg: &mut [usize],
    edges: &mut Vec<(usize, usize)>,
    found: &mut BTreeMap<Vec<u8>, Vec<(usize, usize)>>,
) {
    if edges.len() == ne {
        let nv = deg.len();
        let graph = StableGraph::new(0, vec![0; nv], edges, Vec::new());
        if graph.graph.is_connected() {
            found.entry(certificate_of(&graph)).or_insert_with(|| edges.clone());
        }
        return;
    }
    // every vertex still needs at least one edge end
    let missing = deg.iter().filter(|&&d| d == 0).count();
    if missing > 2 * (ne - edges.len()) {
        return;
    }
    for (idx, &(a, b)) in pairs.iter().enumerate().skip(from) {
        let need = if a == b { 2 } else { 1 };
        if deg[a] + need > 3 || deg[b] + need > 3 {
            continue;
        }
        deg[a] += 1;
        deg[b] += 1;
        edges.push((a, b));
        shape_rec(pairs, idx, ne, deg, edges, found);
        edges.pop();
        deg[a] -= 1;
        deg[b] -= 1;
    }
}

/// The closure of the facets under single-edge contraction, including the edgeless class.
pub fn enumerate_all(g: usize, n: usize) -> Result<Skeleton, ComplexError> {
    let top = max_edges(g, n)?;
    let mut levels: Vec<Level> = vec![Level::default(); top + 1];
    levels[top].certs = facet_certificates(g, n)?;
    for k in (1..=top).rev() {
        let count = levels[k].certs.len();
        let mut index: BTreeMap<Box<[u8]>, u32> = BTreeMap::new();
        let mut targets = vec![0u32; count * k];
        for i in 0..count {
            let graph = graph_from_certificate(&levels[k].certs[i]).expect("certificate");
            for e in 0..k {
                let (h, _) = graph.contract(e);
                let cert = certificate_of(&h).into_boxed_slice();
                let fresh = index.len() as u32;
                targets[i * k + e] = *index.entry(cert).or_insert(fresh);
            }
        }
        let mut remap = vec![0u32; index.len()];
        let mut below = Vec::with_capacity(index.len());
        for (pos, (cert, provisional)) in index.into_iter().enumerate() {
            remap[provisional as usize] = pos as u32;
            below.push(cert);
        }
        for t in targets.iter_mut() {
            *t = remap[*t as usize];
        }
        levels[k].targets = targets;
        levels[k - 1].certs = below;
    }
    for k in 0..=top {
        let mut facet = vec![true; levels[k].certs.len()];
        if k < top {
            for &t in &levels[k + 1].targets {
                facet[t as usize] = false;
            }
        }
        levels[k].facet = facet;
    }
    Ok(Skeleton { g, n, levels })
}

/// Independent enumeration by repeated one-edge uncontraction, starting from
/// the single weight-g vertex. Returns sorted certificates per edge count.
pub fn enumerate_by_uncontraction(g: usize, n: usize) -> Result<Vec<Vec<Box<[u8]>>>, ComplexError> {
    let top = max_edges(g, n)?;
    let start = StableGraph::new(g, vec![g as u32], &[], vec![0; n]);
    let mut levels: Vec<Vec<Box<[u8]>>> = vec![vec![certificate_of(&start).into_boxed_slice()]];
    for _ in 0..top {
        let mut next: BTreeSet<Box<[u8]>> = BTreeSet::new();
        for cert in levels.last().unwrap() {
            let graph = graph_from_certificate(cert).expect("certificate");
            for_each_uncontraction(&graph, &mut |h| {
                next.insert(certificate_of(h).into_boxed_slice());
            });
        }
        levels.push(next.into_iter().collect());
    }
    Ok(levels)
}

/// Calls `emit` on every stable graph H with an edge e such that H / e = `graph`
/// (up to isomorphism; duplicates possible).
pub fn for_each_uncontraction(graph: &StableGraph, emit: &mut impl FnMut(&StableGraph)) {
    let nv = graph.num_vertices();
    let ends: Vec<(usize, usize)> = (0..graph.num_edges()).map(|e| graph.ends(e)).collect();
    for v in 0..nv {
        if graph.weights[v] > 0 {
            let mut weights = graph.weights.clone();
            weights[v] -= 1;
            let mut e2 = ends.clone();
            e2.push((v, v));
            emit(&StableGraph::new(graph.g, weights, &e2, graph.markings.clone()));
        }
        let nonloops: Vec<usize> = (0..ends.len()).filter(|&e| (ends[e].0 == v) != (ends[e].1 == v)).collect();
        let loops: Vec<usize> = (0..ends.len()).filter(|&e| ends[e] == (v, v)).collect();
        let marks: Vec<usize> = (0..graph.n()).filter(|&i| graph.markings[i] == v).collect();
        let w = graph.weights[v];
        let items = nonloops.len() + loops.len() + marks.len();
        // side[x] in {1, 2} for nonloops and markings, {0, 1, 2} for loops
        let mut side: Vec<u8> = (0..items)
            .map(|x| if x >= nonloops.len() && x < nonloops.len() + loops.len() { 0 } else { 1 })
            .collect();
        loop {
            for w1 in 0..=w {
                let w2 = w - w1;
                if mirrored_smaller(&side, w1, w2) {
                    continue;
                }
                let mut val = [0usize; 3];
                for (x, &s) in side.iter().enumerate() {
                    let is_loop = x >= nonloops.len() && x < nonloops.len() + loops.len();
                    if is_loop {
                        if s == 0 {
                            val[1] += 1;
                            val[2] += 1;
                        } else {
                            val[s as usize] += 2;
                        }
                    } else {
                        val[s as usize] += 1;
                    }
                }
                if 2 * w1 as usize + val[1] + 1 < 3 || 2 * w2 as usize + val[2] + 1 < 3 {
                    continue;
                }
                let mut e2 = ends.clone();
                for (x, &e) in nonloops.iter().enumerate() {
                    if side[x] == 2 {
                        let (a, b) = e2[e];
                        e2[e] = if a == v { (nv, b) } else { (a, nv) };
                    }
                }
                for (x, &e) in loops.iter().enumerate() {
                    match side[nonloops.len() + x] {
                        0 => e2[e] = (v, nv),
                        2 => e2[e] = (nv, nv),
                        _ => {}
                    }
                }
                e2.push((v, nv));
                let mut markings = graph.markings.clone();
                for (x, &i) in marks.iter().enumerate() {
                    if side[nonloops.len() + loops.len() + x] == 2 {
                        markings[i] = nv;
                    }
                }
                let mut weights = graph.weights.clone();
                weights[v] = w1;
                weights.push(w2);
                emit(&StableGraph::new(graph.g, weights, &e2, markings));
            }
            if !advance_sides(&mut side, nonloops.len(), loops.len()) {
                break;
            }
        }
    }
}

fn advance_sides(side: &mut [u8], nl: usize, ll: usize) -> bool {
    for x in 0..side.len() {
        let is_loop = x >= nl && x < nl + ll;
        let min = if is_loop { 0 } else { 1 };
        if side[x] < 2 {
            side[x] += 1;
            return true;
        }
        side[x] = min;
    }
    false
}

/// True when swapping the two new vertices gives a lexicographically smaller assignment.
fn mirrored_smaller(side: &[u8], w1: u32, w2: u32) -> bool {
    let flip = |s: u8| if s == 0 { 0 } else { 3 - s };
    let mine = core::iter::once(w1).chain(side.iter().map(|&s| s as u32));
    let theirs = core::iter::once(w2).chain(side.iter().map(|&s| flip(s) as u32));
    theirs.lt(mine)
}

/// |Delta_{g,n}[p]|: the sum of (p+1)!/|Aut_E(G)| over classes with p + 1 edges.
pub fn count_edge_labelled(skeleton: &Skeleton, p: isize) -> u64 {
    let k = (p + 1) as usize;
    let fact: u64 = (1..=k as u64).product();
    (0..skeleton.count(k))
        .map(|i| fact / aut_e(&skeleton.graph(k, i)).len() as u64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::isomorphic;
    use crate::testutil::{dumbbell, theta};

    fn counts(sk: &Skeleton) -> Vec<usize> {
        (0..=sk.max_edges()).map(|k| sk.count(k)).collect()
    }

    #[test]
    fn facets_of_small_types() {
        let f = enumerate_facets(2, 0).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.iter().any(|g| isomorphic(g, &theta())));
        assert!(f.iter().any(|g| isomorphic(g, &dumbbell())));
        assert_eq!(enumerate_facets(0, 4).unwrap().len(), 3);
        assert_eq!(enumerate_facets(1, 1).unwrap().len(), 1);
        assert_eq!(enumerate_facets(0, 3), Err(ComplexError::NotHyperbolic));
        assert_eq!(enumerate_facets(0, 2), Err(ComplexError::NotHyperbolic));
    }

    #[test]
    fn full_skeleta() {
        assert_eq!(enumerate_all(1, 1).unwrap().total(), 2);
        assert_eq!(enumerate_all(0, 4).unwrap().total(), 4);
        assert_eq!(counts(&enumerate_all(2, 0).unwrap()), [1, 2, 2, 2]);
        assert_eq!(counts(&enumerate_all(1, 3).unwrap()), [1, 5, 10, 7]);
        assert_eq!(counts(&enumerate_all(3, 0).unwrap()), [1, 2, 5, 9, 12, 8, 5]);
    }

    #[test]
    fn edge_labelled_counts() {
        assert_eq!(count_edge_labelled(&enumerate_all(2, 0).unwrap(), 2), 4);
        assert_eq!(count_edge_labelled(&enumerate_all(1, 1).unwrap(), 0), 1);
        assert_eq!(count_edge_labelled(&enumerate_all(0, 4).unwrap(), 0), 3);
    }

    #[test]
    fn closed_under_contraction() {
        for (g, n) in [(2, 0), (1, 3), (0, 6), (2, 1)] {
            let sk = enumerate_all(g, n).unwrap();
            for k in 1..=sk.max_edges() {
                for i in 0..sk.count(k) {
                    let graph = sk.graph(k, i);
                    assert!(graph.validate().is_ok());
                    for e in 0..k {
                        let (h, _) = graph.contract(e);
                        assert_eq!(sk.find(&h), Some((k - 1, sk.target(k, i, e))));
                    }
                }
            }
        }
    }

    #[test]
    fn facets_are_the_top_level() {
        let sk = enumerate_all(1, 3).unwrap();
        for k in 0..=sk.max_edges() {
            for i in 0..sk.count(k) {
                assert_eq!(sk.is_facet(k, i), k == sk.max_edges());
            }
        }
    }

    #[test]
    fn upward_closure_agrees() {
        for (g, n) in [(1, 1), (0, 5), (2, 0), (1, 3), (2, 1)] {
            let sk = enumerate_all(g, n).unwrap();
            let up = enumerate_by_uncontraction(g, n).unwrap();
            assert_eq!(up.iter().map(|l| &l[..]).collect::<Vec<_>>(), sk.certificates());
        }
    }

    #[test]
    fn rebuild_from_certificates() {
        let sk = enumerate_all(1, 2).unwrap();
        let certs: Vec<Vec<Box<[u8]>>> = sk.certificates().iter().map(|l| l.to_vec()).collect();
        let again = Skeleton::from_certificates(1, 2, certs.clone()).unwrap();
        assert_eq!(again.certificates(), sk.certificates());
        let mut missing = certs;
        missing[1].pop();
        assert!(Skeleton::from_certificates(1, 2, missing).is_err());
    }

    #[test]
    fn ancestors_reach_facets() {
        let sk = enumerate_all(0, 5).unwrap();
        let up = sk.ancestors(0, 0);
        assert_eq!(up.len(), sk.total());
    }
}
