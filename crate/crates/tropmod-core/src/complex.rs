//! Delta_{g,n} as a symmetric Delta-complex: simplices, faces, stabilizers and
//! the V^i filtration.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::canon::{aut_e, canonical, Mode};
use crate::enumeration::{enumerate_all, Skeleton};
use crate::error::ComplexError;
use crate::graph::{delta_collapse, LabelledPair, StableGraph};

/// A simplex [G, tau]: a class of the skeleton plus a labelling of its
/// representative's edges, normalized to the least labelling in its orbit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimplexRef {
    pub p: isize,
    pub class_index: usize,
    /// representative edge -> label
    pub labelling: Vec<usize>,
}

impl SimplexRef {
    pub fn edges(&self) -> usize {
        (self.p + 1) as usize
    }
}

/// The face d_i of a class's reference simplex.
#[derive(Clone, Debug)]
pub struct Face {
    pub target: usize,
    /// edge of the representative -> edge of the target's representative;
    /// `usize::MAX` at the contracted edge
    pub edge_map: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ClassData {
    pub graph: StableGraph,
    pub aut_e: Vec<Vec<usize>>,
    pub faces: Vec<Face>,
}

#[derive(Clone, Debug)]
pub struct ComplexStore {
    pub skeleton: Skeleton,
    classes: Vec<Vec<ClassData>>,
}

impl ComplexStore {
    pub fn build(g: usize, n: usize) -> Result<Self, ComplexError> {
        Ok(Self::from_skeleton(enumerate_all(g, n)?))
    }

    pub fn from_skeleton(skeleton: Skeleton) -> Self {
        let mut classes = Vec::with_capacity(skeleton.max_edges() + 1);
        for k in 0..=skeleton.max_edges() {
            let mut level = Vec::with_capacity(skeleton.count(k));
            for i in 0..skeleton.count(k) {
                let graph = skeleton.graph(k, i);
                let faces = (0..k)
                    .map(|e| {
                        let (h, map) = graph.contract(e);
                        let cf = canonical(&h, Mode::Iso);
                        let target = skeleton.target(k, i, e);
                        debug_assert_eq!(skeleton.certificate(k - 1, target), &cf.certificate[..]);
                        let edge_map = map
                            .edge_map
                            .iter()
                            .map(|x| x.map_or(usize::MAX, |f| cf.edge_map[f]))
                            .collect();
                        Face { target, edge_map }
                    })
                    .collect();
                level.push(ClassData {
                    aut_e: aut_e(&graph),
                    graph,
                    faces,
                });
            }
            classes.push(level);
        }
        ComplexStore { skeleton, classes }
    }

    pub fn g(&self) -> usize {
        self.skeleton.g
    }

    pub fn n(&self) -> usize {
        self.skeleton.n
    }

    pub fn class(&self, k: usize, i: usize) -> &ClassData {
        &self.classes[k][i]
    }

    /// Orbit count and |Delta[p]| for p = -1 ..= 3g - 4 + n.
    pub fn f_vector(&self) -> Vec<(isize, usize, u64)> {
        (0..=self.skeleton.max_edges())
            .map(|k| {
                let fact: u64 = (1..=k as u64).product();
                let total = self.classes[k].iter().map(|c| fact / c.aut_e.len() as u64).sum();
                (k as isize - 1, self.classes[k].len(), total)
            })
            .collect()
    }

    fn normalize(&self, k: usize, class: usize, lab: &[usize]) -> Vec<usize> {
        let mut best: Option<Vec<usize>> = None;
        for phi in &self.classes[k][class].aut_e {
            let cand: Vec<usize> = phi.iter().map(|&f| lab[f]).collect();
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
        best.unwrap_or_default()
    }

    /// The simplex [G_class, lab].
    pub fn simplex(&self, k: usize, class: usize, lab: &[usize]) -> SimplexRef {
        SimplexRef {
            p: k as isize - 1,
            class_index: class,
            labelling: self.normalize(k, class, lab),
        }
    }

    /// The reference simplex of a class: its representative labelled by edge ids.
    pub fn reference(&self, k: usize, class: usize) -> SimplexRef {
        let id: Vec<usize> = (0..k).collect();
        self.simplex(k, class, &id)
    }

    pub fn pair(&self, s: &SimplexRef) -> LabelledPair {
        let graph = self.classes[s.edges()][s.class_index].graph.clone();
        LabelledPair::new(graph, s.labelling.clone()).expect("simplex labelling")
    }

    pub fn simplex_of(&self, pair: &LabelledPair) -> Option<SimplexRef> {
        let cf = canonical(&pair.graph, Mode::Iso);
        let k = pair.graph.num_edges();
        let class = self.skeleton.find_certificate(k, &cf.certificate)?;
        let mut lab = vec![0; k];
        for e in 0..k {
            lab[cf.edge_map[e]] = pair.tau[e];
        }
        Some(self.simplex(k, class, &lab))
    }

    /// d_i: contract the edge labelled i and collapse the labels.
    pub fn face(&self, s: &SimplexRef, i: usize) -> Result<SimplexRef, ComplexError> {
        let k = s.edges();
        if i >= k {
            return Err(ComplexError::OutOfRange);
        }
        let e = s.labelling.iter().position(|&l| l == i).unwrap();
        let face = &self.classes[k][s.class_index].faces[e];
        let mut lab = vec![0; k - 1];
        for f in 0..k {
            if f != e {
                lab[face.edge_map[f]] = delta_collapse(i, s.labelling[f]);
            }
        }
        Ok(self.simplex(k - 1, face.target, &lab))
    }

    /// a . [G, tau] = [G, a . tau].
    pub fn act(&self, a: &[usize], s: &SimplexRef) -> SimplexRef {
        let lab: Vec<usize> = s.labelling.iter().map(|&l| a[l]).collect();
        self.simplex(s.edges(), s.class_index, &lab)
    }

    /// The stabilizer in the symmetric group on labels: tau Aut_E tau^-1, sorted.
    pub fn stabilizer(&self, s: &SimplexRef) -> Vec<Vec<usize>> {
        let k = s.edges();
        let lab = &s.labelling;
        let mut out: Vec<Vec<usize>> = self.classes[k][s.class_index]
            .aut_e
            .iter()
            .map(|phi| {
                let mut a = vec![0; k];
                for e in 0..k {
                    a[lab[e]] = lab[phi[e]];
                }
                a
            })
            .collect();
        out.sort();
        out
    }

    pub fn vertex_count(&self, s: &SimplexRef) -> usize {
        self.skeleton.vertex_count(s.edges(), s.class_index)
    }

    /// Membership predicate for V^i: at most i vertices.
    pub fn v_subcomplex(&self, i: usize) -> impl Fn(&SimplexRef) -> bool + '_ {
        move |s| self.vertex_count(s) <= i
    }

    /// Every simplex of dimension p, one per orbit element.
    pub fn simplices(&self, p: isize) -> Vec<SimplexRef> {
        let k = (p + 1) as usize;
        let mut out = Vec::new();
        for class in 0..self.skeleton.count(k) {
            out.extend(self.class_simplices(k, class));
        }
        out
    }

    /// Every simplex [G_class, tau], sorted by labelling.
    pub fn class_simplices(&self, k: usize, class: usize) -> Vec<SimplexRef> {
        let mut lab: Vec<usize> = (0..k).collect();
        let mut set = BTreeSet::new();
        loop {
            set.insert(self.simplex(k, class, &lab));
            if !crate::canon::next_permutation(&mut lab) {
                break;
            }
        }
        set.into_iter().collect()
    }
}

/// Purity of Delta_{g,n} and of each V^i, read off the contraction tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PurityReport {
    pub dimension: isize,
    pub pure: bool,
    /// a maximal class (edge count, index) of the wrong dimension
    pub witness: Option<(usize, usize)>,
    pub filtration: Vec<VLevelReport>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VLevelReport {
    pub i: usize,
    pub expected: isize,
    pub dimension: isize,
    pub pure: bool,
    pub witness: Option<(usize, usize)>,
}

pub fn purity_report(skeleton: &Skeleton) -> PurityReport {
    let top = skeleton.max_edges();
    let (g, n) = (skeleton.g, skeleton.n);
    // parent flags: a loop contraction keeps the vertex count, a nonloop one drops it
    let mut same_parent: Vec<Vec<bool>> = (0..=top).map(|k| vec![false; skeleton.count(k)]).collect();
    let mut up_parent = same_parent.clone();
    for k in 1..=top {
        for c in 0..skeleton.count(k) {
            let vc = skeleton.vertex_count(k, c);
            for e in 0..k {
                let t = skeleton.target(k, c, e);
                if skeleton.vertex_count(k - 1, t) == vc {
                    same_parent[k - 1][t] = true;
                } else {
                    up_parent[k - 1][t] = true;
                }
            }
        }
    }
    let mut witness = None;
    for k in 0..=top {
        for c in 0..skeleton.count(k) {
            if !same_parent[k][c] && !up_parent[k][c] && k != top && witness.is_none() {
                witness = Some((k, c));
            }
        }
    }
    let max_vertices = 2 * g + n - 2;
    let filtration = (1..=max_vertices)
        .map(|i| {
            let expected = (g + i) as isize - 2;
            let mut dimension = -2;
            let mut bad = None;
            for k in 0..=top {
                for c in 0..skeleton.count(k) {
                    let vc = skeleton.vertex_count(k, c);
                    if vc > i {
                        continue;
                    }
                    dimension = dimension.max(k as isize - 1);
                    let maximal = !same_parent[k][c] && (vc == i || !up_parent[k][c]);
                    if maximal && k as isize - 1 != expected && bad.is_none() {
                        bad = Some((k, c));
                    }
                }
            }
            VLevelReport {
                i,
                expected,
                dimension,
                pure: bad.is_none() && dimension == expected,
                witness: bad,
            }
        })
        .collect();
    PurityReport {
        dimension: top as isize - 1,
        pure: witness.is_none(),
        witness,
        filtration,
    }
}

/// G <-> H: some stable graph contracts onto both. None if either is not of type (g, n).
pub fn related(skeleton: &Skeleton, a: &StableGraph, b: &StableGraph) -> Option<bool> {
    let (ka, ia) = skeleton.find(a)?;
    let (kb, ib) = skeleton.find(b)?;
    let up_a = skeleton.ancestors(ka, ia);
    let up_b = skeleton.ancestors(kb, ib);
    Some(up_a.intersection(&up_b).next().is_some())
}
