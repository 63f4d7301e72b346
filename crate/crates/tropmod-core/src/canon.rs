//! Canonical forms, isomorphism and automorphisms of stable graphs and labelled pairs.
//!
//! Vertex orderings are searched by individualization and refinement; the
//! certificate is the lexicographically least encoding over all leaves.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{HalfEdgeGraph, LabelledPair, StableGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Weights and the marking function are respected exactly.
    Iso,
    /// Markings are erased; only the weighted (labelled) graph matters.
    Weak,
}

const TAG_ISO: u8 = 0;
const TAG_WEAK: u8 = 1;
const TAG_PAIR_ISO: u8 = 2;
const TAG_PAIR_WEAK: u8 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub certificate: Vec<u8>,
    /// canonical position -> input vertex
    pub vertex_order: Vec<usize>,
    /// input edge -> edge id in the canonical representative
    pub edge_map: Vec<usize>,
}

impl CanonicalForm {
    pub fn hex(&self) -> String {
        to_hex(&self.certificate)
    }
}

pub fn to_hex(bytes: &[u8]) -> String {
    const DIGITS: &[u8; 16] = b"0123456789abcdef";
    let mut s = String::with_capacity(2 * bytes.len());
    for &b in bytes {
        s.push(DIGITS[(b >> 4) as usize] as char);
        s.push(DIGITS[(b & 15) as usize] as char);
    }
    s
}

struct Coloured {
    nv: usize,
    keys: Vec<u64>,
    adj: Vec<u64>,
}

struct Search {
    best: Vec<u64>,
    orders: Vec<Vec<usize>>,
    collect: bool,
    scratch: Vec<u64>,
}

fn marking_mask(graph: &StableGraph, v: usize) -> u64 {
    let mut mask = 0u64;
    for (i, &m) in graph.markings.iter().enumerate() {
        if m == v {
            mask |= 1 << i;
        }
    }
    mask
}

fn vertex_keys(graph: &StableGraph, mode: Mode) -> Vec<u64> {
    assert!(graph.n() <= 47, "at most 47 markings supported");
    (0..graph.num_vertices())
        .map(|v| {
            let w = graph.weights[v] as u64;
            match mode {
                Mode::Iso => w | (marking_mask(graph, v) << 16),
                Mode::Weak => w,
            }
        })
        .collect()
}

fn unlabelled(graph: &StableGraph, mode: Mode) -> Coloured {
    let nv = graph.num_vertices();
    let mut adj = vec![0u64; nv * nv];
    for e in 0..graph.num_edges() {
        let (u, v) = graph.ends(e);
        adj[u * nv + v] += 1;
        if u != v {
            adj[v * nv + u] += 1;
        }
    }
    Coloured {
        nv,
        keys: vertex_keys(graph, mode),
        adj,
    }
}

fn labelled(pair: &LabelledPair, mode: Mode) -> Coloured {
    let graph = &pair.graph;
    assert!(pair.num_labels() <= 64, "at most 64 labels supported");
    let nv = graph.num_vertices();
    let mut adj = vec![0u64; nv * nv];
    for e in 0..graph.num_edges() {
        let (u, v) = graph.ends(e);
        let bit = 1u64 << pair.tau[e];
        adj[u * nv + v] |= bit;
        adj[v * nv + u] |= bit;
    }
    Coloured {
        nv,
        keys: vertex_keys(graph, mode),
        adj,
    }
}

fn refine(cg: &Coloured, col: &mut [u32]) {
    let nv = cg.nv;
    let mut ncol = {
        let mut seen: Vec<u32> = col.to_vec();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    };
    loop {
        if ncol == nv {
            return;
        }
        let mut sigs: Vec<(u32, Vec<(u32, u64)>, usize)> = (0..nv)
            .map(|v| {
                let mut s: Vec<(u32, u64)> = (0..nv)
                    .filter(|&u| u != v && cg.adj[v * nv + u] != 0)
                    .map(|u| (col[u], cg.adj[v * nv + u]))
                    .collect();
                s.sort_unstable();
                (col[v], s, v)
            })
            .collect();
        sigs.sort_unstable();
        let mut rank = 0u32;
        for i in 0..nv {
            if i > 0 && (sigs[i].0 != sigs[i - 1].0 || sigs[i].1 != sigs[i - 1].1) {
                rank += 1;
            }
            col[sigs[i].2] = rank;
        }
        let fresh = rank as usize + 1;
        if fresh == ncol {
            return;
        }
        ncol = fresh;
    }
}

fn initial_colours(cg: &Coloured) -> Vec<u32> {
    let nv = cg.nv;
    let mut keyed: Vec<(u64, u64, usize)> = (0..nv).map(|v| (cg.keys[v], cg.adj[v * nv + v], v)).collect();
    keyed.sort_unstable();
    let mut col = vec![0u32; nv];
    let mut rank = 0;
    for i in 0..nv {
        if i > 0 && (keyed[i].0, keyed[i].1) != (keyed[i - 1].0, keyed[i - 1].1) {
            rank += 1;
        }
        col[keyed[i].2] = rank;
    }
    refine(cg, &mut col);
    col
}

fn descend(cg: &Coloured, col: Vec<u32>, st: &mut Search) {
    let nv = cg.nv;
    let mut counts = vec![0usize; nv];
    for &c in &col {
        counts[c as usize] += 1;
    }
    match (0..nv).find(|&c| counts[c] > 1) {
        None => leaf(cg, &col, st),
        Some(tc) => {
            let tc = tc as u32;
            for v in 0..nv {
                if col[v] != tc {
                    continue;
                }
                let mut next: Vec<u32> = col
                    .iter()
                    .enumerate()
                    .map(|(u, &c)| if c > tc || (c == tc && u != v) { c + 1 } else { c })
                    .collect();
                refine(cg, &mut next);
                descend(cg, next, st);
            }
        }
    }
}

fn leaf(cg: &Coloured, col: &[u32], st: &mut Search) {
    let nv = cg.nv;
    let mut order = vec![0usize; nv];
    for v in 0..nv {
        order[col[v] as usize] = v;
    }
    let enc = &mut st.scratch;
    enc.clear();
    enc.extend(order.iter().map(|&v| cg.keys[v]));
    for i in 0..nv {
        for j in i..nv {
            enc.push(cg.adj[order[i] * nv + order[j]]);
        }
    }
    if st.best.is_empty() || *enc < st.best {
        st.best.clear();
        st.best.extend_from_slice(enc);
        st.orders.clear();
        st.orders.push(order);
    } else if *enc == st.best && st.collect {
        st.orders.push(order);
    }
}

fn run_search(cg: &Coloured, collect: bool) -> Search {
    let mut st = Search {
        best: Vec::new(),
        orders: Vec::new(),
        collect,
        scratch: Vec::new(),
    };
    let col = initial_colours(cg);
    descend(cg, col, &mut st);
    st
}

fn push_varint(out: &mut Vec<u8>, mut x: u64) {
    loop {
        let b = (x & 0x7f) as u8;
        x >>= 7;
        if x == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

fn read_varint(bytes: &[u8], pos: &mut usize) -> Option<u64> {
    let mut x = 0u64;
    let mut shift = 0;
    loop {
        let b = *bytes.get(*pos)?;
        *pos += 1;
        x |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Some(x);
        }
        shift += 7;
        if shift >= 64 {
            return None;
        }
    }
}

fn certificate(tag: u8, nv: usize, enc: &[u64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(enc.len() + 2);
    out.push(tag);
    push_varint(&mut out, nv as u64);
    for &x in enc {
        push_varint(&mut out, x);
    }
    out
}

/// Maps input edges to canonical edge ids: edges are grouped by canonical
/// endpoint positions (i <= j, row-major) and ordered within a group by `tie`.
fn canonical_edge_map(graph: &StableGraph, order: &[usize], tie: impl Fn(usize) -> usize) -> Vec<usize> {
    let nv = order.len();
    let mut pos = vec![0usize; nv];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut keyed: Vec<(usize, usize, usize, usize)> = (0..graph.num_edges())
        .map(|e| {
            let (u, v) = graph.ends(e);
            let (a, b) = (pos[u].min(pos[v]), pos[u].max(pos[v]));
            (a, b, tie(e), e)
        })
        .collect();
    keyed.sort_unstable();
    let mut map = vec![0; graph.num_edges()];
    for (k, t) in keyed.iter().enumerate() {
        map[t.3] = k;
    }
    map
}

/// Canonical form of a stable graph.
pub fn canonical(graph: &StableGraph, mode: Mode) -> CanonicalForm {
    let cg = unlabelled(graph, mode);
    let st = run_search(&cg, false);
    let order = st.orders.into_iter().next().unwrap_or_default();
    let tag = if mode == Mode::Iso { TAG_ISO } else { TAG_WEAK };
    CanonicalForm {
        certificate: certificate(tag, cg.nv, &st.best),
        edge_map: canonical_edge_map(graph, &order, |e| e),
        vertex_order: order,
    }
}

/// Certificate only; the hot path of enumeration.
pub fn certificate_of(graph: &StableGraph) -> Vec<u8> {
    let cg = unlabelled(graph, Mode::Iso);
    let st = run_search(&cg, false);
    certificate(TAG_ISO, cg.nv, &st.best)
}

/// Canonical form of an edge-labelled pair; isomorphisms must preserve labels.
pub fn pair_canonical(pair: &LabelledPair, mode: Mode) -> CanonicalForm {
    let cg = labelled(pair, mode);
    let st = run_search(&cg, false);
    let order = st.orders.into_iter().next().unwrap_or_default();
    let tag = if mode == Mode::Iso { TAG_PAIR_ISO } else { TAG_PAIR_WEAK };
    CanonicalForm {
        certificate: certificate(tag, cg.nv, &st.best),
        edge_map: canonical_edge_map(&pair.graph, &order, |e| pair.tau[e]),
        vertex_order: order,
    }
}

/// Rebuilds the canonical representative from an iso certificate of a graph.
pub fn graph_from_certificate(cert: &[u8]) -> Option<StableGraph> {
    let (nv, keys, adj) = decode(cert, TAG_ISO)?;
    let mut ends = Vec::new();
    for i in 0..nv {
        for j in i..nv {
            for _ in 0..adj[i][j] {
                ends.push((i, j));
            }
        }
    }
    Some(assemble(nv, &keys, &ends))
}

/// Rebuilds the canonical representative from an iso certificate of a pair.
pub fn pair_from_certificate(cert: &[u8]) -> Option<LabelledPair> {
    let (nv, keys, adj) = decode(cert, TAG_PAIR_ISO)?;
    let mut ends = Vec::new();
    let mut tau = Vec::new();
    for i in 0..nv {
        for j in i..nv {
            let mask = adj[i][j];
            for l in 0..64 {
                if mask >> l & 1 == 1 {
                    ends.push((i, j));
                    tau.push(l);
                }
            }
        }
    }
    LabelledPair::new(assemble(nv, &keys, &ends), tau).ok()
}

fn decode(cert: &[u8], tag: u8) -> Option<(usize, Vec<u64>, Vec<Vec<u64>>)> {
    if cert.first() != Some(&tag) {
        return None;
    }
    let mut pos = 1;
    let nv = read_varint(cert, &mut pos)? as usize;
    let keys: Vec<u64> = (0..nv).map(|_| read_varint(cert, &mut pos)).collect::<Option<_>>()?;
    let mut adj = vec![vec![0u64; nv]; nv];
    for i in 0..nv {
        for j in i..nv {
            adj[i][j] = read_varint(cert, &mut pos)?;
        }
    }
    (pos == cert.len()).then_some((nv, keys, adj))
}

fn assemble(nv: usize, keys: &[u64], ends: &[(usize, usize)]) -> StableGraph {
    let weights: Vec<u32> = keys.iter().map(|&k| (k & 0xffff) as u32).collect();
    let mut marks: Vec<(usize, usize)> = Vec::new();
    for (v, &k) in keys.iter().enumerate() {
        let mask = k >> 16;
        for i in 0..48 {
            if mask >> i & 1 == 1 {
                marks.push((i, v));
            }
        }
    }
    marks.sort_unstable();
    let markings = marks.into_iter().map(|(_, v)| v).collect();
    let graph = HalfEdgeGraph::from_edges(nv, ends);
    let b1 = ends.len() + 1 - nv;
    let g = b1 + weights.iter().map(|&w| w as usize).sum::<usize>();
    StableGraph {
        graph,
        weights,
        markings,
        g,
    }
}

/// All weight- and marking-preserving vertex permutations compatible with
/// edge multiplicities (the image of Aut(G) on vertices).
pub fn vertex_automorphisms(graph: &StableGraph) -> Vec<Vec<usize>> {
    let cg = unlabelled(graph, Mode::Iso);
    let st = run_search(&cg, true);
    let base = &st.orders[0];
    st.orders
        .iter()
        .map(|o| {
            let mut pi = vec![0; cg.nv];
            for i in 0..cg.nv {
                pi[base[i]] = o[i];
            }
            pi
        })
        .collect()
}

/// An automorphism as permutations of vertices and half-edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automorphism {
    pub vertex_perm: Vec<usize>,
    pub half_edge_perm: Vec<usize>,
}

/// Parallel classes: edges grouped by unordered endpoint pair, each group ascending.
fn parallel_groups(graph: &StableGraph) -> Vec<((usize, usize), Vec<usize>)> {
    let mut groups: Vec<((usize, usize), Vec<usize>)> = Vec::new();
    for e in 0..graph.num_edges() {
        let (u, v) = graph.ends(e);
        let key = (u.min(v), u.max(v));
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, list)) => list.push(e),
            None => groups.push((key, vec![e])),
        }
    }
    groups
}

/// Lifts a vertex automorphism to an edge permutation pairing the k-th edge of
/// each parallel class with the k-th edge of its image class.
fn lift_to_edges(graph: &StableGraph, groups: &[((usize, usize), Vec<usize>)], pi: &[usize]) -> Vec<usize> {
    let mut perm = vec![0; graph.num_edges()];
    for ((u, v), list) in groups {
        let key = (pi[*u].min(pi[*v]), pi[*u].max(pi[*v]));
        let image = &groups.iter().find(|(k, _)| *k == key).expect("not an automorphism").1;
        for (k, &e) in list.iter().enumerate() {
            perm[e] = image[k];
        }
    }
    perm
}

/// A generating set of Aut(G): vertex automorphisms lifted to half-edges,
/// transpositions of parallel edges, and loop flips.
pub fn automorphisms(graph: &StableGraph) -> Vec<Automorphism> {
    let groups = parallel_groups(graph);
    let nh = graph.graph.num_half_edges();
    let he_from_edges = |eperm: &[usize], pi: &[usize]| -> Vec<usize> {
        let mut hp = vec![0; nh];
        for e in 0..graph.num_edges() {
            let [a, b] = graph.graph.half_edges_of(e);
            let [c, d] = graph.graph.half_edges_of(eperm[e]);
            if pi[graph.graph.root(a)] == graph.graph.root(c) {
                hp[a] = c;
                hp[b] = d;
            } else {
                hp[a] = d;
                hp[b] = c;
            }
        }
        hp
    };
    let mut out = Vec::new();
    let id: Vec<usize> = (0..graph.num_vertices()).collect();
    for pi in vertex_automorphisms(graph) {
        if pi == id {
            continue;
        }
        let eperm = lift_to_edges(graph, &groups, &pi);
        out.push(Automorphism {
            half_edge_perm: he_from_edges(&eperm, &pi),
            vertex_perm: pi,
        });
    }
    for (_, list) in &groups {
        for w in list.windows(2) {
            let mut eperm: Vec<usize> = (0..graph.num_edges()).collect();
            eperm.swap(w[0], w[1]);
            out.push(Automorphism {
                half_edge_perm: he_from_edges(&eperm, &id),
                vertex_perm: id.clone(),
            });
        }
    }
    for e in 0..graph.num_edges() {
        if graph.is_loop(e) {
            let mut hp: Vec<usize> = (0..nh).collect();
            let [a, b] = graph.graph.half_edges_of(e);
            hp.swap(a, b);
            out.push(Automorphism {
                vertex_perm: id.clone(),
                half_edge_perm: hp,
            });
        }
    }
    out
}

/// Aut_E(G): every permutation of E induced by an automorphism, sorted, identity first.
pub fn aut_e(graph: &StableGraph) -> Vec<Vec<usize>> {
    let groups = parallel_groups(graph);
    let mut set = BTreeSet::new();
    for pi in vertex_automorphisms(graph) {
        let base = lift_to_edges(graph, &groups, &pi);
        let mut current = base.clone();
        permute_groups(&groups, 0, &base, &mut current, &mut set);
    }
    set.into_iter().collect()
}

fn permute_groups(
    groups: &[((usize, usize), Vec<usize>)],
    gi: usize,
    base: &[usize],
    current: &mut Vec<usize>,
    out: &mut BTreeSet<Vec<usize>>,
) {
    if gi == groups.len() {
        out.insert(current.clone());
        return;
    }
    let list = &groups[gi].1;
    let images: Vec<usize> = list.iter().map(|&e| base[e]).collect();
    let mut idx: Vec<usize> = (0..list.len()).collect();
    loop {
        for (k, &e) in list.iter().enumerate() {
            current[e] = images[idx[k]];
        }
        permute_groups(groups, gi + 1, base, current, out);
        if !next_permutation(&mut idx) {
            break;
        }
    }
}

/// Advances to the next permutation in lexicographic order; false after the last.
pub fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

pub fn isomorphic(a: &StableGraph, b: &StableGraph) -> bool {
    a.num_vertices() == b.num_vertices()
        && a.num_edges() == b.num_edges()
        && certificate_of(a) == certificate_of(b)
}

pub fn pairs_isomorphic(a: &LabelledPair, b: &LabelledPair, mode: Mode) -> bool {
    pair_canonical(a, mode).certificate == pair_canonical(b, mode).certificate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::enumerate_all;
    use crate::families::{make_b, make_b0};
    use crate::testutil::{aut_e_bruteforce, dumbbell, pair, perms, theta, triangle};
    use alloc::collections::BTreeSet;

    /// Same graph with vertices renamed by `pi` and edges listed in reverse.
    fn renamed(g: &StableGraph, pi: &[usize]) -> StableGraph {
        let mut weights = vec![0; g.num_vertices()];
        for v in 0..g.num_vertices() {
            weights[pi[v]] = g.weights[v];
        }
        let ends: Vec<(usize, usize)> = (0..g.num_edges())
            .rev()
            .map(|e| {
                let (a, b) = g.ends(e);
                (pi[b], pi[a])
            })
            .collect();
        StableGraph::new(g.g, weights, &ends, g.markings.iter().map(|&v| pi[v]).collect())
    }

    #[test]
    fn certificates_ignore_presentation() {
        for g in [theta(), dumbbell(), triangle()] {
            let c = canonical(&g, Mode::Iso);
            for pi in perms(g.num_vertices()) {
                assert_eq!(canonical(&renamed(&g, &pi), Mode::Iso).certificate, c.certificate);
            }
            assert_eq!(graph_from_certificate(&c.certificate).map(|h| certificate_of(&h)), Some(c.certificate));
        }
        assert_ne!(certificate_of(&theta()), certificate_of(&dumbbell()));
    }

    #[test]
    fn weak_isomorphism_forgets_marking_identities() {
        let a = StableGraph::new(1, vec![0, 0], &[(0, 1), (0, 1)], vec![0, 0, 1, 1]);
        let b = StableGraph::new(1, vec![0, 0], &[(0, 1), (0, 1)], vec![0, 1, 0, 1]);
        assert_eq!(canonical(&a, Mode::Weak).certificate, canonical(&b, Mode::Weak).certificate);
        assert_ne!(canonical(&a, Mode::Iso).certificate, canonical(&b, Mode::Iso).certificate);
        let (pa, pb) = (pair(a, &[0, 1]), pair(b, &[0, 1]));
        assert!(pairs_isomorphic(&pa, &pb, Mode::Weak));
        assert!(!pairs_isomorphic(&pa, &pb, Mode::Iso));
    }

    #[test]
    fn b0_complement_is_isomorphic() {
        let a = make_b0(5, &[0, 1]).unwrap();
        let b = make_b0(5, &[2, 3, 4]).unwrap();
        assert!(isomorphic(&a, &b));
        assert!(!isomorphic(&a, &make_b0(5, &[0, 2]).unwrap()));
    }

    #[test]
    fn pair_certificates() {
        let cert = |p: &LabelledPair| pair_canonical(p, Mode::Iso).certificate;
        assert_eq!(cert(&pair(theta(), &[0, 1, 2])), cert(&pair(theta(), &[1, 0, 2])));
        assert_ne!(cert(&pair(dumbbell(), &[0, 1, 2])), cert(&pair(dumbbell(), &[1, 0, 2])));
        // orbits of labellings = 3! / |Aut_E|
        for (g, orbits) in [(theta(), 1), (dumbbell(), 3)] {
            let classes: BTreeSet<Vec<u8>> = perms(3).iter().map(|t| cert(&pair(g.clone(), t))).collect();
            assert_eq!(classes.len(), orbits);
        }
        let p = pair(triangle(), &[2, 0, 1]);
        assert_eq!(pair_from_certificate(&cert(&p)).map(|q| cert(&q)), Some(cert(&p)));
    }

    #[test]
    fn edge_automorphisms_small() {
        assert_eq!(aut_e(&theta()).len(), 6);
        assert_eq!(aut_e(&dumbbell()).len(), 2);
        // B^{g,0} with every marking at the loop vertex: the g loops permute freely
        let b = make_b(3, 2, 3, 0, &[]).unwrap();
        assert_eq!(aut_e(&b).len(), 6);
    }

    #[test]
    fn edge_automorphisms_match_bruteforce() {
        for (g, n) in [(2, 0), (1, 2), (0, 5), (2, 1), (1, 3)] {
            let sk = enumerate_all(g, n).unwrap();
            for k in 0..=sk.max_edges() {
                for i in 0..sk.count(k) {
                    let graph = sk.graph(k, i);
                    let found: BTreeSet<Vec<usize>> = aut_e(&graph).into_iter().collect();
                    assert_eq!(found, aut_e_bruteforce(&graph), "({g},{n}) class ({k},{i})");
                }
            }
        }
    }

    #[test]
    fn automorphism_generators_preserve_structure() {
        for g in [theta(), dumbbell(), triangle()] {
            for a in automorphisms(&g) {
                for h in 0..g.graph.num_half_edges() {
                    let img = a.half_edge_perm[h];
                    assert_eq!(a.half_edge_perm[g.graph.pair(h)], g.graph.pair(img));
                    assert_eq!(a.vertex_perm[g.graph.root(h)], g.graph.root(img));
                }
            }
        }
    }

    #[test]
    fn permutations_in_lexicographic_order() {
        let all = perms(4);
        assert_eq!(all.len(), 24);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }
}
