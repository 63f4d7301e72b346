//! Half-edge multigraphs, stable weighted marked graphs and edge-labelled pairs.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{GraphError, Violation};

/// A multigraph stored as half-edges with a fixed-point-free pairing and a root map.
///
/// Edge ids are assigned in half-edge order: edge `e` is the pair whose smaller
/// half-edge is the `e`-th smallest among all pair minima.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HalfEdgeGraph {
    pairing: Vec<usize>,
    root: Vec<usize>,
    num_vertices: usize,
    edges: Vec<[usize; 2]>,
    edge_of: Vec<usize>,
}

impl HalfEdgeGraph {
    /// Builds a graph from raw half-edge data, checking that `pairing` is a
    /// fixed-point-free involution and that every root is a vertex.
    pub fn from_parts(
        num_vertices: usize,
        pairing: Vec<usize>,
        root: Vec<usize>,
    ) -> Result<Self, GraphError> {
        if pairing.len() != root.len() {
            return Err(GraphError::Malformed("pairing and root lengths differ"));
        }
        for (h, &s) in pairing.iter().enumerate() {
            if s >= pairing.len() || s == h || pairing[s] != h {
                return Err(GraphError::NotInvolution { half_edge: h });
            }
        }
        if let Some(h) = root.iter().position(|&v| v >= num_vertices) {
            return Err(GraphError::RootOutOfRange { half_edge: h });
        }
        Ok(Self::assemble(num_vertices, pairing, root))
    }

    /// Builds a graph whose edge `k` is the half-edge pair `(2k, 2k+1)` rooted at `ends[k]`.
    pub fn from_edges(num_vertices: usize, ends: &[(usize, usize)]) -> Self {
        let mut pairing = Vec::with_capacity(2 * ends.len());
        let mut root = Vec::with_capacity(2 * ends.len());
        for (k, &(u, v)) in ends.iter().enumerate() {
            assert!(u < num_vertices && v < num_vertices, "edge end out of range");
            pairing.push(2 * k + 1);
            pairing.push(2 * k);
            root.push(u);
            root.push(v);
        }
        Self::assemble(num_vertices, pairing, root)
    }

    fn assemble(num_vertices: usize, pairing: Vec<usize>, root: Vec<usize>) -> Self {
        let mut edges = Vec::with_capacity(pairing.len() / 2);
        let mut edge_of = vec![usize::MAX; pairing.len()];
        for h in 0..pairing.len() {
            let s = pairing[h];
            if h < s {
                edge_of[h] = edges.len();
                edge_of[s] = edges.len();
                edges.push([h, s]);
            }
        }
        HalfEdgeGraph {
            pairing,
            root,
            num_vertices,
            edges,
            edge_of,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_half_edges(&self) -> usize {
        self.pairing.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// The involution `s` on half-edges.
    pub fn pair(&self, h: usize) -> usize {
        self.pairing[h]
    }

    /// The root map `r` from half-edges to vertices.
    pub fn root(&self, h: usize) -> usize {
        self.root[h]
    }

    pub fn edge_of(&self, h: usize) -> usize {
        self.edge_of[h]
    }

    pub fn half_edges_of(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    /// Endpoints of edge `e`, in half-edge order.
    pub fn ends(&self, e: usize) -> (usize, usize) {
        let [a, b] = self.edges[e];
        (self.root[a], self.root[b])
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let (u, v) = self.ends(e);
        u == v
    }

    /// Number of half-edges rooted at `v` (a loop counts twice).
    pub fn valence(&self, v: usize) -> usize {
        self.root.iter().filter(|&&r| r == v).count()
    }

    pub fn is_connected(&self) -> bool {
        self.components_without(None) <= 1
    }

    fn components_without(&self, skip: Option<usize>) -> usize {
        if self.num_vertices == 0 {
            return 0;
        }
        let mut parent: Vec<usize> = (0..self.num_vertices).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut count = self.num_vertices;
        for e in 0..self.num_edges() {
            if Some(e) == skip {
                continue;
            }
            let (u, v) = self.ends(e);
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a] = b;
                count -= 1;
            }
        }
        count
    }

    /// True iff deleting `e` disconnects the graph.
    pub fn is_bridge(&self, e: usize) -> bool {
        !self.is_loop(e) && self.components_without(Some(e)) > self.components_without(None)
    }
}

/// A connected graph with vertex weights and markings `m: {1..n} -> V`.
///
/// Markings are stored zero-based: `markings[i]` is the vertex carrying marking `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StableGraph {
    pub graph: HalfEdgeGraph,
    pub weights: Vec<u32>,
    pub markings: Vec<usize>,
    pub g: usize,
}

/// Bookkeeping for a single-edge contraction: where old vertices and edges went.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionMap {
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<Option<usize>>,
    pub half_edge_map: Vec<Option<usize>>,
}

impl StableGraph {
    pub fn new(g: usize, weights: Vec<u32>, ends: &[(usize, usize)], markings: Vec<usize>) -> Self {
        StableGraph {
            graph: HalfEdgeGraph::from_edges(weights.len(), ends),
            weights,
            markings,
            g,
        }
    }

    pub fn n(&self) -> usize {
        self.markings.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    pub fn ends(&self, e: usize) -> (usize, usize) {
        self.graph.ends(e)
    }

    pub fn valence(&self, v: usize) -> usize {
        self.graph.valence(v)
    }

    pub fn marks_at(&self, v: usize) -> usize {
        self.markings.iter().filter(|&&m| m == v).count()
    }

    /// First Betti number |E| - |V| + 1.
    pub fn b1(&self) -> usize {
        self.num_edges() + 1 - self.num_vertices()
    }

    pub fn total_weight(&self) -> usize {
        self.weights.iter().map(|&w| w as usize).sum()
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.graph.is_loop(e)
    }

    pub fn is_bridge(&self, e: usize) -> bool {
        self.graph.is_bridge(e)
    }

    pub fn validate(&self) -> Result<(), Violation> {
        let nv = self.num_vertices();
        let n = self.n();
        if 3 * self.g + n <= 3 {
            return Err(Violation::NotHyperbolic { g: self.g, n });
        }
        if self.weights.len() != nv || nv == 0 {
            return Err(Violation::WeightCount);
        }
        if let Some(i) = self.markings.iter().position(|&v| v >= nv) {
            return Err(Violation::MarkingOutOfRange { marking: i + 1 });
        }
        if !self.graph.is_connected() {
            return Err(Violation::Disconnected);
        }
        let genus = self.b1() + self.total_weight();
        if genus != self.g {
            return Err(Violation::Genus { expected: self.g, found: genus });
        }
        for v in 0..nv {
            let lhs = 2 * self.weights[v] as isize - 2 + (self.valence(v) + self.marks_at(v)) as isize;
            if lhs <= 0 {
                return Err(Violation::Unstable { vertex: v });
            }
        }
        Ok(())
    }

    /// Contracts edge `e`. A loop raises the weight of its vertex; a nonloop edge
    /// merges its endpoints into the smaller-indexed one.
    pub fn contract(&self, e: usize) -> (StableGraph, ContractionMap) {
        assert!(e < self.num_edges(), "unknown edge id {e}");
        let (u, v) = self.ends(e);
        let nv = self.num_vertices();
        let (keep, gone) = (u.min(v), u.max(v));
        let mut vertex_map = Vec::with_capacity(nv);
        for x in 0..nv {
            if u == v {
                vertex_map.push(x);
                continue;
            }
            let y = if x == gone { keep } else { x };
            vertex_map.push(if y > gone { y - 1 } else { y });
        }
        let mut weights: Vec<u32> = Vec::with_capacity(nv);
        for x in 0..nv {
            if x != gone || u == v {
                weights.push(self.weights[x]);
            }
        }
        if u == v {
            weights[vertex_map[u]] += 1;
        } else {
            weights[vertex_map[keep]] += self.weights[gone];
        }
        let [h1, h2] = self.graph.half_edges_of(e);
        let nh = self.graph.num_half_edges();
        let mut half_edge_map = Vec::with_capacity(nh);
        let mut next = 0;
        for h in 0..nh {
            if h == h1 || h == h2 {
                half_edge_map.push(None);
            } else {
                half_edge_map.push(Some(next));
                next += 1;
            }
        }
        let mut pairing = Vec::with_capacity(nh - 2);
        let mut root = Vec::with_capacity(nh - 2);
        for h in 0..nh {
            if half_edge_map[h].is_some() {
                pairing.push(half_edge_map[self.graph.pair(h)].unwrap());
                root.push(vertex_map[self.graph.root(h)]);
            }
        }
        let new_nv = if u == v { nv } else { nv - 1 };
        let graph = HalfEdgeGraph::assemble(new_nv, pairing, root);
        let edge_map = (0..self.num_edges())
            .map(|f| match f.cmp(&e) {
                core::cmp::Ordering::Less => Some(f),
                core::cmp::Ordering::Equal => None,
                core::cmp::Ordering::Greater => Some(f - 1),
            })
            .collect();
        let markings = self.markings.iter().map(|&m| vertex_map[m]).collect();
        let out = StableGraph {
            graph,
            weights,
            markings,
            g: self.g,
        };
        (
            out,
            ContractionMap {
                vertex_map,
                edge_map,
                half_edge_map,
            },
        )
    }

    /// True iff contracting every edge but `e` and forgetting markings leaves one
    /// vertex of weight g and one of weight 0.
    pub fn is_g0_bridge(&self, e: usize) -> Result<bool, GraphError> {
        if self.is_loop(e) {
            return Err(GraphError::LoopNotAllowed { edge: e });
        }
        let mut h = self.clone();
        let mut target = e;
        while h.num_edges() > 1 {
            let f = if target == 0 { 1 } else { 0 };
            let (next, map) = h.contract(f);
            target = map.edge_map[target].unwrap();
            h = next;
        }
        if h.num_vertices() != 2 {
            return Ok(false);
        }
        let mut w = [h.weights[0] as usize, h.weights[1] as usize];
        w.sort_unstable();
        Ok(w == [0, self.g])
    }

    /// Edge sets of the k-cycles: loops for k = 1, parallel pairs for k = 2, and
    /// simple cycles through k distinct vertices otherwise. Sorted.
    pub fn k_cycles(&self, k: usize) -> Vec<Vec<usize>> {
        assert!(k >= 1);
        let m = self.num_edges();
        if k == 1 {
            return (0..m).filter(|&e| self.is_loop(e)).map(|e| vec![e]).collect();
        }
        let nv = self.num_vertices();
        let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
        for e in 0..m {
            let (u, v) = self.ends(e);
            if u != v {
                incident[u].push((e, v));
                incident[v].push((e, u));
            }
        }
        let mut found = BTreeSet::new();
        let mut path_edges = Vec::new();
        let mut on_path = vec![false; nv];
        for start in 0..nv {
            on_path[start] = true;
            cycle_dfs(&incident, start, start, k, &mut on_path, &mut path_edges, &mut found);
            on_path[start] = false;
        }
        found.into_iter().collect()
    }

    /// Relabels markings: the result carries marking `sigma(i)` where `self` carries `i`
    /// (`sigma` zero-based), i.e. the marking function m . sigma^-1.
    pub fn relabel_markings(&self, sigma: &[usize]) -> StableGraph {
        let mut markings = vec![0; self.n()];
        for (i, &v) in self.markings.iter().enumerate() {
            markings[sigma[i]] = v;
        }
        StableGraph {
            markings,
            ..self.clone()
        }
    }
}

fn cycle_dfs(
    incident: &[Vec<(usize, usize)>],
    start: usize,
    at: usize,
    k: usize,
    on_path: &mut [bool],
    path_edges: &mut Vec<usize>,
    found: &mut BTreeSet<Vec<usize>>,
) {
    for &(e, w) in &incident[at] {
        if path_edges.len() + 1 == k {
            if w == start && !path_edges.contains(&e) {
                let mut c = path_edges.clone();
                c.push(e);
                c.sort_unstable();
                found.insert(c);
            }
        } else if w > start && !on_path[w] {
            on_path[w] = true;
            path_edges.push(e);
            cycle_dfs(incident, start, w, k, on_path, path_edges, found);
            path_edges.pop();
            on_path[w] = false;
        }
    }
}

/// A stable graph with a bijective edge labelling `tau: E -> {0..p}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelledPair {
    pub graph: StableGraph,
    pub tau: Vec<usize>,
}

impl LabelledPair {
    pub fn new(graph: StableGraph, tau: Vec<usize>) -> Result<Self, GraphError> {
        let m = graph.num_edges();
        if tau.len() != m {
            return Err(GraphError::Malformed("labelling length differs from edge count"));
        }
        let mut seen = vec![false; m];
        for &t in &tau {
            if t >= m || seen[t] {
                return Err(GraphError::NotBijective);
            }
            seen[t] = true;
        }
        Ok(LabelledPair { graph, tau })
    }

    /// Labels edges by their ids.
    pub fn identity(graph: StableGraph) -> Self {
        let tau = (0..graph.num_edges()).collect();
        LabelledPair { graph, tau }
    }

    /// The dimension p = |E| - 1.
    pub fn p(&self) -> isize {
        self.tau.len() as isize - 1
    }

    pub fn num_labels(&self) -> usize {
        self.tau.len()
    }

    /// The edge e_j carrying label j.
    pub fn edge(&self, j: usize) -> usize {
        self.tau.iter().position(|&t| t == j).expect("label out of range")
    }

    pub fn is_loop_label(&self, j: usize) -> bool {
        self.graph.is_loop(self.edge(j))
    }

    /// Labels of nonloop edges, ascending.
    pub fn nonloop_labels(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.graph.num_edges())
            .filter(|&e| !self.graph.is_loop(e))
            .map(|e| self.tau[e])
            .collect();
        out.sort_unstable();
        out
    }

    /// The face d_i: contract e_i and collapse labels above i.
    pub fn face(&self, i: usize) -> LabelledPair {
        let e = self.edge(i);
        let (graph, map) = self.graph.contract(e);
        let mut tau = vec![0; graph.num_edges()];
        for (f, &t) in self.tau.iter().enumerate() {
            if let Some(nf) = map.edge_map[f] {
                tau[nf] = if t > i { t - 1 } else { t };
            }
        }
        LabelledPair { graph, tau }
    }

    /// The face d_S: contracts the edges labelled by `s` in ascending label order.
    pub fn contract_set(&self, s: &[usize]) -> LabelledPair {
        let mut labels: Vec<usize> = s.to_vec();
        labels.sort_unstable();
        labels.dedup();
        let mut out = self.clone();
        // after k contractions every remaining label of S has dropped by k
        for (k, &i) in labels.iter().enumerate() {
            out = out.face(i - k);
        }
        out
    }

    /// Labels (as sets) of k-cycles.
    pub fn label_cycles(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self
            .graph
            .k_cycles(k)
            .into_iter()
            .map(|c| {
                let mut l: Vec<usize> = c.into_iter().map(|e| self.tau[e]).collect();
                l.sort_unstable();
                l
            })
            .collect();
        out.sort();
        out
    }
}

/// delta_j: the order-preserving collapse of [p] minus {j} onto [p-1].
pub fn delta_collapse(j: usize, x: usize) -> usize {
    debug_assert!(x != j);
    if x > j {
        x - 1
    } else {
        x
    }
}

/// delta^j: the order-preserving injection [p-1] -> [p] missing j.
pub fn delta_insert(j: usize, x: usize) -> usize {
    if x >= j {
        x + 1
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::isomorphic;
    use crate::families::{make_b, make_r};
    use crate::testutil::{dumbbell, loop11, pair, theta, triangle};

    #[test]
    fn stability() {
        assert!(theta().validate().is_ok());
        assert!(loop11().validate().is_ok());
        let bar = StableGraph::new(0, vec![0, 0], &[(0, 1)], vec![]);
        assert!(bar.validate().is_err());
    }

    #[test]
    fn betti_number() {
        assert_eq!(theta().b1(), 2);
        assert_eq!(dumbbell().b1(), 2);
        assert_eq!(StableGraph::new(3, vec![3], &[], vec![]).b1(), 0);
    }

    #[test]
    fn contract_bridge_and_loop() {
        let (h, map) = dumbbell().contract(1);
        assert_eq!((h.num_vertices(), h.num_edges()), (1, 2));
        assert_eq!(h.weights, vec![0]);
        assert!(h.is_loop(0) && h.is_loop(1));
        assert_eq!(map.edge_map, vec![Some(0), None, Some(1)]);

        let (h, map) = loop11().contract(0);
        assert_eq!((h.num_vertices(), h.num_edges()), (1, 0));
        assert_eq!(h.weights, vec![1]);
        assert_eq!(h.markings, vec![0]);
        assert_eq!(map.vertex_map, vec![0]);
        assert!(h.validate().is_ok());

        let (h, _) = theta().contract(0);
        assert_eq!(h.num_vertices(), 1);
        assert!(h.is_loop(0) && h.is_loop(1));
    }

    #[test]
    fn contraction_preserves_genus_and_stability() {
        for g in [theta(), dumbbell(), triangle(), loop11()] {
            for e in 0..g.num_edges() {
                let (h, _) = g.contract(e);
                assert!(h.validate().is_ok());
                assert_eq!(h.b1() + h.total_weight(), g.b1() + g.total_weight());
            }
        }
    }

    #[test]
    fn contract_label_sets() {
        let p = LabelledPair::identity(theta());
        assert_eq!(p.contract_set(&[]), p);
        let q = p.contract_set(&[2]);
        assert_eq!(q.num_labels(), 2);
        assert!(q.is_loop_label(0) && q.is_loop_label(1));
        // contracting the bridge of a maximal genus-2 pair leaves R^2
        let r = LabelledPair::identity(dumbbell()).contract_set(&[1]);
        assert!(isomorphic(&r.graph, &make_r(2, 0, 2).unwrap()));
    }

    #[test]
    fn loops_and_bridges() {
        let d = dumbbell();
        assert!(d.is_bridge(1) && !d.is_loop(1));
        assert!(d.is_loop(0) && !d.is_bridge(0));
        assert!((0..3).all(|e| !theta().is_bridge(e)));
    }

    #[test]
    fn g0_bridges() {
        let b = make_b(2, 2, 2, 0, &[]).unwrap();
        let bridge = (0..b.num_edges()).find(|&e| !b.is_loop(e)).unwrap();
        assert_eq!(b.is_g0_bridge(bridge), Ok(true));
        assert_eq!(theta().is_g0_bridge(0), Ok(false));
        assert_eq!(dumbbell().is_g0_bridge(1), Ok(false));
        assert!(dumbbell().is_g0_bridge(0).is_err());
    }

    #[test]
    fn cycles() {
        let t = theta();
        assert!(t.k_cycles(1).is_empty());
        assert_eq!(t.k_cycles(2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert!(t.k_cycles(3).is_empty());
        assert_eq!(triangle().k_cycles(3), vec![vec![0, 1, 2]]);
        assert_eq!(dumbbell().k_cycles(1), vec![vec![0], vec![2]]);
        assert!(dumbbell().k_cycles(2).is_empty());
    }

    #[test]
    fn labelled_pairs() {
        assert!(LabelledPair::new(theta(), vec![0, 0, 1]).is_err());
        let p = pair(dumbbell(), &[2, 0, 1]);
        assert_eq!(p.edge(0), 1);
        assert_eq!(p.nonloop_labels(), vec![0]);
        assert_eq!(p.label_cycles(1), vec![vec![1], vec![2]]);
        let f = p.face(0);
        assert_eq!(f.num_labels(), 2);
        assert!(f.is_loop_label(0) && f.is_loop_label(1));
    }

    #[test]
    fn delta_maps_are_inverse() {
        for j in 0..5 {
            for x in 0..4 {
                assert_eq!(delta_collapse(j, delta_insert(j, x)), x);
                assert_ne!(delta_insert(j, x), j);
            }
        }
    }

    #[test]
    fn relabelling_markings() {
        let t = triangle().relabel_markings(&[1, 2, 0]);
        assert_eq!(t.markings, vec![2, 0, 1]);
    }
}
