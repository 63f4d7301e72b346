//! Nonloop contraction decks, cycle sets, intersection matrices and the
//! reconstruction of an edge-labelled pair from its deck.
//!
//! Matrix indices: labels `0..=p` first, then markings (`p + 1 + i` is marking `i + 1`).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::canon::{pair_canonical, Mode};
use crate::error::ReconstructionError;
use crate::graph::{delta_collapse, delta_insert, LabelledPair, StableGraph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeckEntry {
    pub index: usize,
    pub pair: LabelledPair,
}

/// The nonloop contraction deck of a pair with labels `0..=p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deck {
    pub p: usize,
    pub entries: Vec<DeckEntry>,
}

impl Deck {
    pub fn entry(&self, j: usize) -> Option<&LabelledPair> {
        self.entries.iter().find(|e| e.index == j).map(|e| &e.pair)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }

    /// Same index set and entrywise pair isomorphism.
    pub fn equivalent(&self, other: &Deck) -> bool {
        self.p == other.p
            && self.indices() == other.indices()
            && self.entries.iter().all(|e| {
                let o = other.entry(e.index).unwrap();
                pair_canonical(&e.pair, Mode::Iso).certificate == pair_canonical(o, Mode::Iso).certificate
            })
    }
}

pub fn deck(pair: &LabelledPair) -> Deck {
    assert!(pair.num_labels() > 0, "the edgeless pair has no deck");
    let entries = pair
        .nonloop_labels()
        .into_iter()
        .map(|j| DeckEntry {
            index: j,
            pair: pair.face(j),
        })
        .collect();
    Deck {
        p: pair.num_labels() - 1,
        entries,
    }
}

/// Label sets of k-cycles, by k.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleSet {
    pub by_k: BTreeMap<usize, BTreeSet<Vec<usize>>>,
}

impl CycleSet {
    pub fn get(&self, k: usize) -> impl Iterator<Item = &Vec<usize>> {
        self.by_k.get(&k).into_iter().flatten()
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        self.by_k.get(&set.len()).is_some_and(|s| s.contains(set))
    }

    pub fn is_empty_at(&self, k: usize) -> bool {
        self.by_k.get(&k).is_none_or(|s| s.is_empty())
    }
}

/// Cycles read directly off the graph.
pub fn direct_cycles(pair: &LabelledPair) -> CycleSet {
    let mut by_k = BTreeMap::new();
    for k in 1..=pair.num_labels().max(1) {
        let c: BTreeSet<Vec<usize>> = pair.label_cycles(k).into_iter().collect();
        if !c.is_empty() {
            by_k.insert(k, c);
        }
    }
    CycleSet { by_k }
}

/// Cycles computed from the deck alone: loops are the labels missing from the
/// deck; S is a k-cycle iff every element is nonloop and each delta_j(S - j)
/// is a (k-1)-cycle of entry j.
pub fn cycles_from_deck(deck: &Deck) -> Result<CycleSet, ReconstructionError> {
    let ne = deck.p + 1;
    let nonloop = deck.indices();
    for e in &deck.entries {
        if e.index >= ne || e.pair.num_labels() != deck.p {
            return Err(ReconstructionError::Inconsistent(format!(
                "entry {} does not carry {} labels",
                e.index, deck.p
            )));
        }
    }
    let mut by_k: BTreeMap<usize, BTreeSet<Vec<usize>>> = BTreeMap::new();
    let loops: BTreeSet<Vec<usize>> = (0..ne).filter(|x| !nonloop.contains(x)).map(|x| vec![x]).collect();
    if !loops.is_empty() {
        by_k.insert(1, loops);
    }
    let mut entry_cycles: BTreeMap<(usize, usize), BTreeSet<Vec<usize>>> = BTreeMap::new();
    let m = nonloop.len();
    for k in 2..=m {
        let mut found = BTreeSet::new();
        for mask in 0u64..1 << m {
            if mask.count_ones() as usize != k {
                continue;
            }
            let s: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| nonloop[i]).collect();
            let mut votes = 0;
            for &j in &s {
                let image: Vec<usize> = s.iter().filter(|&&x| x != j).map(|&x| delta_collapse(j, x)).collect();
                let cyc = entry_cycles
                    .entry((j, k - 1))
                    .or_insert_with(|| deck.entry(j).unwrap().label_cycles(k - 1).into_iter().collect());
                if cyc.contains(&image) {
                    votes += 1;
                }
            }
            // parallelism is symmetric, so a split vote on a pair cannot come from a graph
            if k == 2 && votes == 1 {
                return Err(ReconstructionError::Inconsistent(format!(
                    "entries disagree on whether {:?} is a 2-cycle",
                    s
                )));
            }
            if votes == k {
                found.insert(s);
            }
        }
        if !found.is_empty() {
            by_k.insert(k, found);
        }
    }
    Ok(CycleSet { by_k })
}

/// Symmetric matrix of shared-vertex counts over labels and markings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionMatrix {
    pub num_edges: usize,
    pub n: usize,
    entries: Vec<u8>,
}

impl IntersectionMatrix {
    pub fn zeros(num_edges: usize, n: usize) -> Self {
        let d = num_edges + n;
        IntersectionMatrix {
            num_edges,
            n,
            entries: vec![0; d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.num_edges + self.n
    }

    pub fn get(&self, a: usize, b: usize) -> u8 {
        self.entries[a * self.dim() + b]
    }

    pub fn set(&mut self, a: usize, b: usize, x: u8) {
        let d = self.dim();
        self.entries[a * d + b] = x;
        self.entries[b * d + a] = x;
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries.chunks(self.dim()).map(|r| r.to_vec()).collect()
    }

    pub fn headers(&self) -> Vec<String> {
        (0..self.num_edges)
            .map(|e| format!("e{e}"))
            .chain((1..=self.n).map(|i| format!("m{i}")))
            .collect()
    }
}

impl fmt::Display for IntersectionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let heads = self.headers();
        write!(f, "   ")?;
        for h in &heads {
            write!(f, " {h:>3}")?;
        }
        writeln!(f)?;
        for (a, h) in heads.iter().enumerate() {
            write!(f, "{h:>3}")?;
            for b in 0..self.dim() {
                write!(f, " {:>3}", self.get(a, b))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Endpoint set of a label or marking index.
fn support(pair: &LabelledPair, x: usize) -> (usize, usize) {
    let ne = pair.num_labels();
    if x < ne {
        pair.graph.ends(pair.edge(x))
    } else {
        let v = pair.graph.markings[x - ne];
        (v, v)
    }
}

/// The intersection matrix computed from the graph itself.
pub fn intersection_matrix(pair: &LabelledPair) -> IntersectionMatrix {
    let ne = pair.num_labels();
    let mut q = IntersectionMatrix::zeros(ne, pair.graph.n());
    let sup: Vec<(usize, usize)> = (0..q.dim()).map(|x| support(pair, x)).collect();
    for a in 0..q.dim() {
        for b in a..q.dim() {
            let sa = [sup[a].0, sup[a].1];
            let sb = [sup[b].0, sup[b].1];
            let mut shared = 0;
            for (i, &v) in sa.iter().enumerate() {
                if i == 1 && sa[0] == sa[1] {
                    break;
                }
                if sb.contains(&v) {
                    shared += 1;
                }
            }
            q.set(a, b, shared);
        }
    }
    q
}

/// Shapes of the full subgraph on three or four vertices where the generic
/// formula for Q can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FullSubgraph {
    /// complete graph on four vertices
    E0,
    /// four vertices, a 3-cycle and a 4-cycle, not E0
    E1,
    /// four vertices, a 4-cycle and no 3-cycle
    E2,
    /// four vertices, a 3-cycle and no 4-cycle
    E3,
    /// path on four vertices
    E4,
    /// triangle
    E5,
    /// path on three vertices
    E6,
    /// star on four vertices
    T4,
}

impl FullSubgraph {
    pub const ALL: [FullSubgraph; 8] = [
        FullSubgraph::E0,
        FullSubgraph::E1,
        FullSubgraph::E2,
        FullSubgraph::E3,
        FullSubgraph::E4,
        FullSubgraph::E5,
        FullSubgraph::E6,
        FullSubgraph::T4,
    ];
}

/// Deck-derived data shared by the Q computation.
struct View<'a> {
    deck: &'a Deck,
    cycles: &'a CycleSet,
    ne: usize,
    n: usize,
    nonloop: Vec<bool>,
    entry_q: BTreeMap<usize, IntersectionMatrix>,
    class_of: Vec<usize>,
}

fn shift(j: usize, x: usize) -> usize {
    delta_collapse(j, x)
}

impl<'a> View<'a> {
    fn new(deck: &'a Deck, cycles: &'a CycleSet, n: usize) -> Self {
        let ne = deck.p + 1;
        let mut nonloop = vec![false; ne];
        for j in deck.indices() {
            nonloop[j] = true;
        }
        let entry_q = deck.entries.iter().map(|e| (e.index, intersection_matrix(&e.pair))).collect();
        // parallel classes: union of 2-cycles, labelled by their least member
        let mut class_of: Vec<usize> = (0..ne).collect();
        for c in cycles.get(2) {
            let (a, b) = (c[0], c[1]);
            let (ra, rb) = (class_of[a], class_of[b]);
            let keep = ra.min(rb);
            for x in class_of.iter_mut() {
                if *x == ra || *x == rb {
                    *x = keep;
                }
            }
        }
        View {
            deck,
            cycles,
            ne,
            n,
            nonloop,
            entry_q,
            class_of,
        }
    }

    fn dim(&self) -> usize {
        self.ne + self.n
    }

    fn is_nonloop(&self, x: usize) -> bool {
        x < self.ne && self.nonloop[x]
    }

    fn nonloops(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ne).filter(|&x| self.nonloop[x])
    }

    /// Loops first, then markings.
    fn decorations(&self) -> Vec<usize> {
        (0..self.ne).filter(|&x| !self.nonloop[x]).chain(self.ne..self.dim()).collect()
    }

    /// <a, b> inside entry j, for a, b != j.
    fn in_entry(&self, j: usize, a: usize, b: usize) -> u8 {
        self.entry_q[&j].get(shift(j, a), shift(j, b))
    }

    /// The min over nonloop contractions avoiding a and b.
    fn formula(&self, a: usize, b: usize) -> Option<u8> {
        self.nonloops()
            .filter(|&j| j != a && j != b)
            .map(|j| self.in_entry(j, a, b))
            .min()
    }

    fn formula_or_err(&self, a: usize, b: usize) -> Result<u8, ReconstructionError> {
        self.formula(a, b)
            .ok_or_else(|| ReconstructionError::Inconsistent(format!("no contraction avoids {a} and {b}")))
    }

    fn parallel(&self, a: usize, b: usize) -> bool {
        a != b && self.is_nonloop(a) && self.is_nonloop(b) && self.class_of[a] == self.class_of[b]
    }

    fn common_triangle(&self, a: usize, b: usize) -> bool {
        self.cycles.get(3).any(|c| c.contains(&a) && c.contains(&b))
    }

    fn in_triangle(&self, a: usize) -> bool {
        self.cycles.get(3).any(|c| c.contains(&a))
    }

    /// val + |markings| at the vertex carrying the loop or marking x in entry j.
    fn entry_vm(&self, j: usize, x: usize) -> usize {
        let pair = self.deck.entry(j).unwrap();
        let y = shift(j, x);
        let v = support(pair, y).0;
        pair.graph.valence(v) + pair.graph.marks_at(v)
    }

    fn distinct_classes(&self, xs: impl Iterator<Item = usize>) -> Vec<usize> {
        let mut c: Vec<usize> = xs.map(|x| self.class_of[x]).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    fn family4(&self) -> FullSubgraph {
        let has3 = !self.cycles.is_empty_at(3);
        let has4 = !self.cycles.is_empty_at(4);
        if has4 && self.has_k4() {
            FullSubgraph::E0
        } else if has3 && has4 {
            FullSubgraph::E1
        } else if has4 {
            FullSubgraph::E2
        } else if has3 {
            FullSubgraph::E3
        } else {
            self.star_or_path()
        }
    }

    /// Four distinct 3-cycles whose union contains no 2-cycle.
    fn has_k4(&self) -> bool {
        let tri: Vec<&Vec<usize>> = self.cycles.get(3).collect();
        let t = tri.len();
        for a in 0..t {
            for b in a + 1..t {
                for c in b + 1..t {
                    for d in c + 1..t {
                        let mut union: Vec<usize> = [a, b, c, d].iter().flat_map(|&i| tri[i].iter().copied()).collect();
                        union.sort_unstable();
                        union.dedup();
                        let no_pair = union
                            .iter()
                            .all(|&x| union.iter().all(|&y| x == y || !self.parallel(x, y)));
                        if no_pair {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// Four vertices and no 3- or 4-cycle: the path or the star.
    fn star_or_path(&self) -> FullSubgraph {
        if let Some(&l) = self.decorations().first() {
            let touching = self.distinct_classes(self.nonloops().filter(|&j| self.formula(l, j) == Some(1)));
            match touching.len() {
                0 | 1 => {
                    let central = self.nonloops().any(|j| {
                        let pair = self.deck.entry(j).unwrap();
                        let v = support(pair, shift(j, l)).0;
                        (0..pair.graph.num_edges())
                            .filter(|&e| !pair.graph.is_loop(e))
                            .all(|e| {
                                let (a, b) = pair.graph.ends(e);
                                a == v || b == v
                            })
                    });
                    if central {
                        FullSubgraph::T4
                    } else {
                        FullSubgraph::E4
                    }
                }
                2 => FullSubgraph::E4,
                _ => FullSubgraph::T4,
            }
        } else {
            let path = self.nonloops().any(|j| {
                let g = &self.deck.entry(j).unwrap().graph;
                (0..g.num_edges()).filter(|&e| g.is_loop(e)).any(|l| {
                    let v = g.ends(l).0;
                    (0..g.num_edges()).filter(|&e| !g.is_loop(e)).any(|e| {
                        let (a, b) = g.ends(e);
                        a != v && b != v
                    })
                })
            });
            if path {
                FullSubgraph::E4
            } else {
                FullSubgraph::T4
            }
        }
    }

    fn family3(&self) -> FullSubgraph {
        if self.cycles.is_empty_at(3) {
            FullSubgraph::E6
        } else {
            FullSubgraph::E5
        }
    }

    /// Four vertices; a, b distinct nonloop labels, not parallel.
    fn dagger(&self, family: FullSubgraph, a: usize, b: usize) -> Result<u8, ReconstructionError> {
        match family {
            FullSubgraph::E0 => Ok(self.common_triangle(a, b) as u8),
            FullSubgraph::E2 => self.dagger_square(a, b),
            FullSubgraph::E3 => self.dagger_paw(a, b),
            FullSubgraph::T4 => self.formula_or_err(a, b),
            _ => self.relay(a, b),
        }
    }

    fn dagger_square(&self, a: usize, b: usize) -> Result<u8, ReconstructionError> {
        let Some(&gamma) = self.decorations().first() else {
            // every vertex of the square carries a parallel pair
            for (x, y) in [(a, b), (b, a)] {
                if let Some(j) = self.nonloops().find(|&j| j != y && self.parallel(x, j)) {
                    return Ok(self.in_entry(j, x, y));
                }
            }
            return Ok(0);
        };
        let corner = self.distinct_classes(self.nonloops().filter(|&j| self.formula(gamma, j) == Some(1)));
        if corner.len() != 2 {
            return Err(ReconstructionError::Inconsistent("square corner not found".into()));
        }
        let (j, k) = (corner[0], corner[1]);
        let touch = |j: usize, x: usize| -> u8 {
            if self.class_of[x] == self.class_of[j] {
                2
            } else {
                self.in_entry(j, x, gamma)
            }
        };
        // corner edges J, K at the decorated vertex; L1 meets J, L2 meets K
        let role = |x: usize| -> Option<u8> {
            match (touch(j, x), touch(k, x)) {
                (2, 1) => Some(0),
                (1, 2) => Some(1),
                (1, 0) => Some(2),
                (0, 1) => Some(3),
                _ => None,
            }
        };
        let (Some(ra), Some(rb)) = (role(a), role(b)) else {
            return Err(ReconstructionError::Inconsistent("edge outside the square".into()));
        };
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        Ok(match (lo, hi) {
            (0, 1) | (0, 2) | (1, 3) | (2, 3) => 1,
            _ => 0,
        })
    }

    fn dagger_paw(&self, a: usize, b: usize) -> Result<u8, ReconstructionError> {
        if self.common_triangle(a, b) {
            return Ok(1);
        }
        let (alpha, beta) = match (self.in_triangle(a), self.in_triangle(b)) {
            (true, false) => (a, b),
            (false, true) => (b, a),
            _ => return Err(ReconstructionError::Inconsistent("paw edges misplaced".into())),
        };
        let witness = self
            .nonloops()
            .find(|&j| self.parallel(beta, j))
            .or_else(|| self.decorations().into_iter().find(|&x| self.formula(x, beta) == Some(1)));
        match witness {
            Some(gamma) => Ok(self.in_entry(beta, alpha, gamma)),
            None => Err(ReconstructionError::Inconsistent("pendant edge has no witness".into())),
        }
    }

    /// Sound on any four-vertex graph: decides whether two non-parallel nonloop
    /// edges share a vertex using contractions that pin down a vertex.
    fn relay(&self, a: usize, b: usize) -> Result<u8, ReconstructionError> {
        if self.formula_or_err(a, b)? == 0 {
            return Ok(0);
        }
        if self.common_triangle(a, b) {
            return Ok(1);
        }
        // a parallel partner of one edge becomes a loop on its merged ends
        for (x, y) in [(a, b), (b, a)] {
            if let Some(j) = self.nonloops().find(|&j| j != y && self.parallel(x, j)) {
                return Ok(self.in_entry(j, x, y));
            }
        }
        // a loop or marking at an end of one edge marks the merged vertex
        let decorations = self.decorations();
        for (x, y) in [(a, b), (b, a)] {
            if let Some(&gamma) = decorations.iter().find(|&&d| self.formula(d, x) == Some(1)) {
                return Ok(self.in_entry(x, y, gamma));
            }
        }
        // all four ends undecorated and unpaired: the edges are disjoint exactly
        // when every parallel class elsewhere touches both of them
        for j in self.nonloops() {
            if self.class_of[j] == self.class_of[a] || self.class_of[j] == self.class_of[b] {
                continue;
            }
            if let Some(k) = self.nonloops().find(|&k| self.parallel(j, k)) {
                if self.in_entry(k, j, a) != self.in_entry(k, j, b) {
                    return Ok(1);
                }
            }
        }
        Ok(0)
    }

    /// Three vertices; a nonloop, b a loop or marking.
    fn star_pair(&self, family: FullSubgraph, a: usize, b: usize) -> Result<u8, ReconstructionError> {
        if family == FullSubgraph::E5 {
            let least = self.nonloops().map(|j| self.entry_vm(j, b)).min().unwrap();
            return Ok((self.entry_vm(a, b) > least) as u8);
        }
        if let Some(j) = self.nonloops().find(|&j| self.parallel(a, j)) {
            return Ok(self.in_entry(j, a, b));
        }
        if let Some(c) = self.cycles.get(2).next() {
            let (j, k) = (c[0], c[1]);
            if self.in_entry(k, j, b) == 0 {
                return Ok(1);
            }
        }
        let meets = self.decorations().into_iter().any(|gamma| {
            gamma != b && self.formula(b, gamma) == Some(0) && self.in_entry(a, b, gamma) == 1
        });
        Ok(meets as u8)
    }
}

fn vertex_count(deck: &Deck, g: usize) -> isize {
    deck.p as isize + 2 - g as isize
}

/// Which full subgraph a deck exhibits; only meaningful for 3 or 4 vertices.
pub fn detect_full_subgraph(
    deck: &Deck,
    cycles: &CycleSet,
    g: usize,
    which: FullSubgraph,
) -> Result<bool, ReconstructionError> {
    let n = deck.entries.first().map_or(0, |e| e.pair.graph.n());
    let view = View::new(deck, cycles, n);
    match vertex_count(deck, g) {
        4 => Ok(view.family4() == which),
        3 => Ok(view.family3() == which),
        _ => Err(ReconstructionError::Inapplicable),
    }
}

/// Q computed from the deck and its cycle set, assuming b1 = g and at least three vertices.
pub fn q_from_deck(deck: &Deck, cycles: &CycleSet, g: usize, n: usize) -> Result<IntersectionMatrix, ReconstructionError> {
    let nv = vertex_count(deck, g);
    if nv < 3 {
        return Err(ReconstructionError::TooFewVertices(nv));
    }
    q_steps(deck, cycles, n, Some(nv as usize))
}

/// Q from the diagonal, the 2-cycles and the min formula alone, with no
/// four-vertex special cases. Experimental outside the b1 = g, |V| >= 5 setting.
pub fn q_generic(deck: &Deck, cycles: &CycleSet, n: usize) -> Result<IntersectionMatrix, ReconstructionError> {
    q_steps(deck, cycles, n, None)
}

fn q_steps(
    deck: &Deck,
    cycles: &CycleSet,
    n: usize,
    nv: Option<usize>,
) -> Result<IntersectionMatrix, ReconstructionError> {
    let view = View::new(deck, cycles, n);
    let ne = view.ne;
    let dim = view.dim();
    let mut q = IntersectionMatrix::zeros(ne, n);
    let mut known = vec![false; dim * dim];
    let put = |q: &mut IntersectionMatrix, known: &mut [bool], a: usize, b: usize, x: u8| {
        q.set(a, b, x);
        known[a * dim + b] = true;
        known[b * dim + a] = true;
    };
    for a in 0..dim {
        put(&mut q, &mut known, a, a, if view.is_nonloop(a) { 2 } else { 1 });
    }
    for c in cycles.get(2) {
        put(&mut q, &mut known, c[0], c[1], 2);
    }
    let family = match nv {
        Some(4) => Some(view.family4()),
        Some(3) => Some(view.family3()),
        _ => None,
    };
    for a in 0..dim {
        for b in a + 1..dim {
            if known[a * dim + b] {
                continue;
            }
            let (na, nb) = (view.is_nonloop(a), view.is_nonloop(b));
            let x = match (family, na, nb) {
                (Some(f), true, true) if nv == Some(4) => view.dagger(f, a, b)?,
                (Some(_), true, true) => 1,
                (Some(f), true, false) if nv == Some(3) => view.star_pair(f, a, b)?,
                (Some(f), false, true) if nv == Some(3) => view.star_pair(f, b, a)?,
                _ => view.formula_or_err(a, b)?,
            };
            put(&mut q, &mut known, a, b, x);
        }
    }
    for a in 0..dim {
        let want = if view.is_nonloop(a) { 2 } else { 1 };
        if q.get(a, a) != want {
            return Err(ReconstructionError::Inconsistent(format!("diagonal entry {a} is wrong")));
        }
        for b in 0..dim {
            if q.get(a, b) != q.get(b, a) || q.get(a, b) > 2 {
                return Err(ReconstructionError::Inconsistent(format!("entry ({a}, {b}) is invalid")));
            }
        }
    }
    Ok(q)
}

/// A j-uncontraction of (H, pi) at a vertex: split it into v1 and v2 joined by
/// a new edge labelled j. Labels refer to H's labelling, markings are zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UncontractionSpec {
    pub base: LabelledPair,
    pub vertex: usize,
    pub j: usize,
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
    pub l0: Vec<usize>,
    pub l1: Vec<usize>,
    pub l2: Vec<usize>,
    pub i1: Vec<usize>,
    pub i2: Vec<usize>,
    /// weights of v1 and v2; they must add up to the weight of the split vertex
    pub weights: (u32, u32),
}

/// Labels of nonloop edges and loops at v, and markings at v.
fn incidences(base: &LabelledPair, v: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let g = &base.graph;
    let mut nonloops = Vec::new();
    let mut loops = Vec::new();
    for e in 0..g.num_edges() {
        let (a, b) = g.ends(e);
        if a == v && b == v {
            loops.push(base.tau[e]);
        } else if a == v || b == v {
            nonloops.push(base.tau[e]);
        }
    }
    nonloops.sort_unstable();
    loops.sort_unstable();
    let marks = (0..g.n()).filter(|&i| g.markings[i] == v).collect();
    (nonloops, loops, marks)
}

fn same_set(parts: &[&Vec<usize>], whole: &[usize]) -> bool {
    let mut all: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    all.sort_unstable();
    all == whole
}

impl UncontractionSpec {
    pub fn check(&self) -> Result<(), ReconstructionError> {
        let g = &self.base.graph;
        if self.vertex >= g.num_vertices() || self.j > self.base.num_labels() {
            return Err(ReconstructionError::BadSpec("vertex or label out of range"));
        }
        let (nonloops, loops, marks) = incidences(&self.base, self.vertex);
        if !same_set(&[&self.n1, &self.n2], &nonloops)
            || !same_set(&[&self.l0, &self.l1, &self.l2], &loops)
            || !same_set(&[&self.i1, &self.i2], &marks)
        {
            return Err(ReconstructionError::BadSpec("partition does not cover the vertex"));
        }
        if self.weights.0 + self.weights.1 != g.weights[self.vertex] {
            return Err(ReconstructionError::BadSpec("weights do not add up"));
        }
        let l0 = self.l0.len();
        let side = |n: &Vec<usize>, l: &Vec<usize>, i: &Vec<usize>, w: u32| {
            2 * w as usize + n.len() + 2 * l.len() + i.len() + l0 + 1 >= 3
        };
        if !side(&self.n1, &self.l1, &self.i1, self.weights.0) || !side(&self.n2, &self.l2, &self.i2, self.weights.1) {
            return Err(ReconstructionError::BadSpec("stability inequality fails"));
        }
        Ok(())
    }
}

pub fn uncontract(spec: &UncontractionSpec) -> Result<LabelledPair, ReconstructionError> {
    spec.check()?;
    let base = &spec.base;
    let g = &base.graph;
    let v = spec.vertex;
    let v2 = g.num_vertices();
    let mut ends = Vec::with_capacity(g.num_edges() + 1);
    let mut tau = Vec::with_capacity(g.num_edges() + 1);
    for e in 0..g.num_edges() {
        let label = base.tau[e];
        let (a, b) = g.ends(e);
        let moved = if spec.n2.contains(&label) {
            if a == v {
                (v2, b)
            } else {
                (a, v2)
            }
        } else if spec.l0.contains(&label) {
            (v, v2)
        } else if spec.l2.contains(&label) {
            (v2, v2)
        } else {
            (a, b)
        };
        ends.push(moved);
        tau.push(delta_insert(spec.j, label));
    }
    ends.push((v, v2));
    tau.push(spec.j);
    let mut weights = g.weights.clone();
    weights[v] = spec.weights.0;
    weights.push(spec.weights.1);
    let mut markings = g.markings.clone();
    for &i in &spec.i2 {
        markings[i] = v2;
    }
    let graph = StableGraph::new(g.g, weights, &ends, markings);
    Ok(LabelledPair::new(graph, tau).expect("uncontraction labelling"))
}

/// Every stable j-uncontraction of `base` at `v`; with `split_weight` the
/// weight of v may be shared between the new vertices.
pub fn uncontractions(base: &LabelledPair, v: usize, j: usize, split_weight: bool) -> Vec<UncontractionSpec> {
    let (nonloops, loops, marks) = incidences(base, v);
    let w = base.graph.weights[v];
    let items = nonloops.len() + loops.len() + marks.len();
    let mut out = Vec::new();
    let mut side: Vec<u8> = (0..items)
        .map(|x| if x >= nonloops.len() && x < nonloops.len() + loops.len() { 0 } else { 1 })
        .collect();
    loop {
        let splits: Vec<(u32, u32)> = if split_weight {
            (0..=w).map(|a| (a, w - a)).collect()
        } else {
            vec![(w, 0)]
        };
        for weights in splits {
            let pick = |range: core::ops::Range<usize>, labels: &[usize], s: u8| -> Vec<usize> {
                range.zip(labels).filter(|(x, _)| side[*x] == s).map(|(_, &l)| l).collect()
            };
            let nl = nonloops.len();
            let ll = loops.len();
            let spec = UncontractionSpec {
                base: base.clone(),
                vertex: v,
                j,
                n1: pick(0..nl, &nonloops, 1),
                n2: pick(0..nl, &nonloops, 2),
                l0: pick(nl..nl + ll, &loops, 0),
                l1: pick(nl..nl + ll, &loops, 1),
                l2: pick(nl..nl + ll, &loops, 2),
                i1: pick(nl + ll..items, &marks, 1),
                i2: pick(nl + ll..items, &marks, 2),
                weights,
            };
            if spec.check().is_ok() {
                out.push(spec);
            }
        }
        let mut advanced = false;
        for x in 0..items {
            let is_loop = x >= nonloops.len() && x < nonloops.len() + loops.len();
            if side[x] < 2 {
                side[x] += 1;
                advanced = true;
                break;
            }
            side[x] = if is_loop { 0 } else { 1 };
        }
        if !advanced {
            break;
        }
    }
    out
}

/// The entry and vertex of maximal val + |markings|, smallest index first.
fn pivot(deck: &Deck) -> Result<(usize, usize), ReconstructionError> {
    let mut best: Option<(usize, usize, usize)> = None;
    for e in &deck.entries {
        let g = &e.pair.graph;
        for v in 0..g.num_vertices() {
            let vm = g.valence(v) + g.marks_at(v);
            if best.is_none_or(|(b, _, _)| vm > b) {
                best = Some((vm, e.index, v));
            }
        }
    }
    let (vm, j, v) = best.ok_or_else(|| ReconstructionError::Inconsistent("empty deck".into()))?;
    let g = &deck.entry(j).unwrap().graph;
    let ties = (0..g.num_vertices()).filter(|&u| g.valence(u) + g.marks_at(u) == vm).count();
    if ties > 1 {
        return Err(ReconstructionError::Inconsistent(
            "two vertices of maximal valence in one entry".into(),
        ));
    }
    Ok((j, v))
}

/// Reconstructs the pair from its deck, assuming b1 = g and at least three vertices.
pub fn reconstruct(deck: &Deck, g: usize, n: usize) -> Result<LabelledPair, ReconstructionError> {
    if deck.entries.iter().any(|e| e.pair.graph.total_weight() > 0) {
        return Err(ReconstructionError::NotFullGenus);
    }
    let cycles = cycles_from_deck(deck)?;
    let q = q_from_deck(deck, &cycles, g, n)?;
    let (j, v) = pivot(deck)?;
    select(deck, &q, j, v, false)
}

/// Reconstruction from `q_generic` with weight splitting allowed;
/// makes no genus assumption and reports when the deck does not pin down a pair.
pub fn reconstruct_generic(deck: &Deck, n: usize) -> Result<LabelledPair, ReconstructionError> {
    let cycles = cycles_from_deck(deck)?;
    let q = q_generic(deck, &cycles, n)?;
    let (j, v) = pivot(deck)?;
    select(deck, &q, j, v, true)
}

fn select(deck: &Deck, q: &IntersectionMatrix, j: usize, v: usize, generic: bool) -> Result<LabelledPair, ReconstructionError> {
    let base = deck.entry(j).unwrap();
    let mut matches: BTreeMap<Vec<u8>, LabelledPair> = BTreeMap::new();
    for spec in uncontractions(base, v, j, generic) {
        let cand = uncontract(&spec)?;
        if intersection_matrix(&cand) != *q {
            continue;
        }
        if generic && !self::deck(&cand).equivalent(deck) {
            continue;
        }
        matches.entry(pair_canonical(&cand, Mode::Iso).certificate).or_insert(cand);
    }
    match matches.len() {
        0 => Err(ReconstructionError::NoCandidate),
        1 => {
            let out = matches.into_values().next().unwrap();
            if !self::deck(&out).equivalent(deck) {
                return Err(ReconstructionError::Inconsistent("reconstruction has a different deck".into()));
            }
            Ok(out)
        }
        k => Err(ReconstructionError::Ambiguous(k)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::pairs_isomorphic;
    use crate::families::make_r;
    use crate::testutil::{dumbbell, loop11, pair, perms, theta, triangle};

    /// Loop at v0, bridge v0-v1, two parallel edges v1-v2, the marking at v2.
    fn chain() -> StableGraph {
        StableGraph::new(2, vec![0, 0, 0], &[(0, 0), (0, 1), (1, 2), (1, 2)], vec![2])
    }

    fn square() -> StableGraph {
        StableGraph::new(1, vec![0; 4], &[(0, 1), (1, 2), (2, 3), (3, 0)], vec![0, 1, 2, 3])
    }

    fn k4() -> StableGraph {
        StableGraph::new(3, vec![0; 4], &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], vec![])
    }

    /// A path on five vertices with markings 2,1,1,1,2.
    fn caterpillar() -> StableGraph {
        StableGraph::new(0, vec![0; 5], &[(0, 1), (1, 2), (2, 3), (3, 4)], vec![0, 0, 1, 2, 3, 4, 4])
    }

    fn set(v: &[usize]) -> Vec<usize> {
        v.to_vec()
    }

    #[test]
    fn decks_of_small_graphs() {
        let d = deck(&LabelledPair::identity(dumbbell()));
        assert_eq!(d.indices(), vec![1]);
        let e = d.entry(1).unwrap();
        assert_eq!(e.graph.num_vertices(), 1);
        assert!(e.is_loop_label(0) && e.is_loop_label(1));

        assert!(deck(&LabelledPair::identity(make_r(2, 1, 2).unwrap())).entries.is_empty());

        let d = deck(&LabelledPair::identity(theta()));
        assert_eq!(d.indices(), vec![0, 1, 2]);
        for e in &d.entries {
            assert_eq!(e.pair.graph.num_vertices(), 1);
            assert_eq!(e.pair.nonloop_labels(), Vec::<usize>::new());
        }
    }

    #[test]
    fn cycles_of_small_graphs() {
        let c = cycles_from_deck(&deck(&LabelledPair::identity(theta()))).unwrap();
        let twos: Vec<&Vec<usize>> = c.get(2).collect();
        assert_eq!(twos, [&set(&[0, 1]), &set(&[0, 2]), &set(&[1, 2])]);
        assert!(c.is_empty_at(1) && c.is_empty_at(3));

        let c = cycles_from_deck(&deck(&LabelledPair::identity(dumbbell()))).unwrap();
        let ones: Vec<&Vec<usize>> = c.get(1).collect();
        assert_eq!(ones, [&set(&[0]), &set(&[2])]);
        assert!(c.is_empty_at(2));
    }

    #[test]
    fn cycles_agree_with_direct_computation() {
        for g in [chain(), square(), k4(), triangle(), caterpillar()] {
            for tau in perms(g.num_edges()) {
                let p = pair(g.clone(), &tau);
                assert_eq!(cycles_from_deck(&deck(&p)).unwrap(), direct_cycles(&p));
            }
        }
    }

    #[test]
    fn split_parallel_vote_is_inconsistent() {
        let mut d = deck(&LabelledPair::identity(theta()));
        // entry 0 where label 0 became a bridge instead of a loop
        let odd = StableGraph::new(2, vec![0, 1], &[(0, 1), (0, 0)], vec![]);
        d.entries[0].pair = pair(odd, &[0, 1]);
        assert!(matches!(cycles_from_deck(&d), Err(ReconstructionError::Inconsistent(_))));
    }

    #[test]
    fn intersection_matrices() {
        let q = intersection_matrix(&LabelledPair::identity(theta()));
        assert!(q.rows().iter().flatten().all(|&x| x == 2));

        let q = intersection_matrix(&LabelledPair::identity(dumbbell()));
        assert_eq!((q.get(0, 1), q.get(0, 2), q.get(1, 2)), (1, 0, 1));
        assert_eq!((q.get(0, 0), q.get(1, 1), q.get(2, 2)), (1, 2, 1));

        let q = intersection_matrix(&LabelledPair::identity(loop11()));
        assert_eq!(q.headers(), ["e0", "m1"]);
        assert_eq!(q.rows(), vec![vec![1, 1], vec![1, 1]]);
    }

    fn detect(g: StableGraph) -> Vec<FullSubgraph> {
        let p = LabelledPair::identity(g.clone());
        let d = deck(&p);
        let c = cycles_from_deck(&d).unwrap();
        FullSubgraph::ALL
            .iter()
            .copied()
            .filter(|&w| detect_full_subgraph(&d, &c, g.g, w).unwrap())
            .collect()
    }

    #[test]
    fn full_subgraphs() {
        assert!(detect(triangle()).contains(&FullSubgraph::E5));
        let sq = detect(square());
        assert!(sq.contains(&FullSubgraph::E2));
        for w in [FullSubgraph::E0, FullSubgraph::E1, FullSubgraph::E3] {
            assert!(!sq.contains(&w));
        }
        assert!(detect(k4()).contains(&FullSubgraph::E0));
    }

    #[test]
    fn q_from_decks() {
        for g in [chain(), square(), k4(), triangle(), caterpillar()] {
            let (genus, n) = (g.g, g.n());
            for tau in perms(g.num_edges()) {
                let p = pair(g.clone(), &tau);
                let d = deck(&p);
                let q = q_from_deck(&d, &cycles_from_deck(&d).unwrap(), genus, n).unwrap();
                assert_eq!(q, intersection_matrix(&p));
            }
        }
        // the end edges of the caterpillar never meet
        let p = LabelledPair::identity(caterpillar());
        let d = deck(&p);
        let q = q_from_deck(&d, &cycles_from_deck(&d).unwrap(), 0, 7).unwrap();
        assert_eq!(q.get(0, 3), 0);
    }

    #[test]
    fn two_vertex_decks_are_refused() {
        let d = deck(&LabelledPair::identity(theta()));
        assert!(matches!(reconstruct(&d, 2, 0), Err(ReconstructionError::TooFewVertices(2))));
        let weighted = StableGraph::new(2, vec![1, 0, 0], &[(0, 1), (1, 2), (1, 2)], vec![0, 2]);
        let d = deck(&LabelledPair::identity(weighted));
        assert_eq!(reconstruct(&d, 2, 2), Err(ReconstructionError::NotFullGenus));
    }

    fn swapped(s: &UncontractionSpec) -> UncontractionSpec {
        UncontractionSpec {
            n1: s.n2.clone(),
            n2: s.n1.clone(),
            l1: s.l2.clone(),
            l2: s.l1.clone(),
            i1: s.i2.clone(),
            i2: s.i1.clone(),
            weights: (s.weights.1, s.weights.0),
            ..s.clone()
        }
    }

    #[test]
    fn uncontraction_lemma() {
        for g in [chain(), square(), caterpillar()] {
            let p = LabelledPair::identity(g);
            for e in deck(&p).entries {
                for v in 0..e.pair.graph.num_vertices() {
                    let specs = uncontractions(&e.pair, v, e.index, false);
                    let made: Vec<LabelledPair> = specs.iter().map(|s| uncontract(s).unwrap()).collect();
                    for (s, m) in specs.iter().zip(&made) {
                        assert!(pairs_isomorphic(&m.face(e.index), &e.pair, Mode::Iso));
                        assert!(pairs_isomorphic(&uncontract(&swapped(s)).unwrap(), m, Mode::Iso));
                    }
                    for a in &made {
                        for b in &made {
                            let same_q = intersection_matrix(a) == intersection_matrix(b);
                            assert_eq!(same_q, pairs_isomorphic(a, b, Mode::Iso));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        let p = LabelledPair::identity(chain()).face(1);
        let mut spec = uncontractions(&p, 0, 1, false).remove(0);
        spec.weights = (1, 0);
        assert!(matches!(uncontract(&spec), Err(ReconstructionError::BadSpec(_))));
    }

    #[test]
    fn round_trips() {
        for g in [chain(), square(), k4(), triangle(), caterpillar()] {
            let (genus, n) = (g.g, g.n());
            for tau in perms(g.num_edges()) {
                let p = pair(g.clone(), &tau);
                let r = reconstruct(&deck(&p), genus, n).unwrap();
                assert!(pairs_isomorphic(&r, &p, Mode::Iso));
            }
        }
    }

    #[test]
    fn decks_are_isomorphism_invariant() {
        let a = pair(chain(), &[3, 1, 0, 2]);
        // the two parallel edges swapped, and the vertices listed in reverse
        let b = pair(
            StableGraph::new(2, vec![0, 0, 0], &[(2, 2), (1, 2), (0, 1), (0, 1)], vec![0]),
            &[3, 1, 2, 0],
        );
        assert!(pairs_isomorphic(&a, &b, Mode::Iso));
        assert!(deck(&a).equivalent(&deck(&b)));
        assert!(!deck(&a).equivalent(&deck(&pair(chain(), &[0, 1, 2, 3]))));
    }

    #[test]
    fn tampered_deck_fails() {
        let mut d = deck(&pair(chain(), &[0, 1, 2, 3]));
        let other = deck(&pair(chain(), &[1, 0, 2, 3]));
        d.entries[0] = other.entries[0].clone();
        assert!(matches!(reconstruct(&d, 2, 1), Err(ReconstructionError::Inconsistent(_))));
    }

    #[test]
    fn generic_reconstruction_on_a_long_path() {
        let p = pair(caterpillar(), &[2, 0, 3, 1]);
        let r = reconstruct_generic(&deck(&p), 7).unwrap();
        assert!(pairs_isomorphic(&r, &p, Mode::Iso));
    }
}
