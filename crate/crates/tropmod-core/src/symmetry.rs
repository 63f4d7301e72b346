//! The S_n-action on Delta_{g,n}, the mu invariants, and a backtracking
//! solver for the automorphism group of the symmetric Delta-complex.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::canon::{next_permutation, pair_canonical, Mode};
use crate::complex::{ComplexStore, SimplexRef};
use crate::enumeration::Skeleton;
use crate::error::ComplexError;
use crate::families::{admissible, make_b, make_r, subsets};
use crate::graph::{delta_collapse, LabelledPair, StableGraph};

/// sigma . [G, tau] = [sigma G, tau], with sigma a zero-based permutation of the markings.
pub fn apply_sigma(store: &ComplexStore, sigma: &[usize], s: &SimplexRef) -> SimplexRef {
    let pair = store.pair(s);
    let moved = LabelledPair {
        graph: pair.graph.relabel_markings(sigma),
        tau: pair.tau,
    };
    store.simplex_of(&moved).expect("relabelled graph has the same type")
}

/// (k, l, A) with A zero-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdmissibleTriple {
    pub k: usize,
    pub l: usize,
    pub a: Vec<usize>,
}

impl AdmissibleTriple {
    pub fn new(g: usize, n: usize, k: usize, l: usize, a: &[usize]) -> Result<Self, ComplexError> {
        if !admissible(g, n, k, l, a) {
            return Err(ComplexError::Inadmissible("B^{k,l}_A is not stable"));
        }
        let mut a = a.to_vec();
        a.sort_unstable();
        Ok(AdmissibleTriple { k, l, a })
    }

    /// Every admissible triple with k >= l, ordered by (k, l, A).
    pub fn all(g: usize, n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for k in 0..=g {
            for l in 0..=k.min(g - k) {
                for a in subsets(n) {
                    if admissible(g, n, k, l, &a) {
                        out.push(AdmissibleTriple { k, l, a });
                    }
                }
            }
        }
        out
    }
}

/// The quotient of B^{k,l}_A whose 3-vertex uncontractions mu counts.
pub fn mu_target(g: usize, n: usize, t: &AdmissibleTriple) -> Result<StableGraph, ComplexError> {
    let b = make_b(g, n, t.k, t.l, &t.a)?;
    // the loops at v2 are edges k..k+l; contracting the first one l times removes them all
    let mut h = b;
    for _ in 0..t.l {
        h = h.contract(t.k).0;
    }
    Ok(h)
}

/// Isomorphism classes of 3-vertex graphs without loops or 3-cycles that
/// contract onto the designated quotient of B^{k,l}_A.
pub fn mu_bruteforce(skeleton: &Skeleton, t: &AdmissibleTriple) -> Result<u64, ComplexError> {
    let (g, n) = (skeleton.g, skeleton.n);
    if t.l > t.k {
        return Err(ComplexError::Inadmissible("mu needs k >= l"));
    }
    let h = mu_target(g, n, t)?;
    let (kh, ih) = skeleton.find(&h).ok_or(ComplexError::OutOfRange)?;
    let k = kh + 1;
    if k > skeleton.max_edges() {
        return Ok(0);
    }
    let mut count = 0;
    for c in 0..skeleton.count(k) {
        if skeleton.vertex_count(k, c) != 3 || !(0..k).any(|e| skeleton.target(k, c, e) == ih) {
            continue;
        }
        let graph = skeleton.graph(k, c);
        if graph.k_cycles(1).is_empty() && graph.k_cycles(3).is_empty() {
            count += 1;
        }
    }
    Ok(count)
}

/// The closed forms, by case: (0,0) with g = 0, (0,0) with g >= 1, k = 1, k >= 2.
pub fn mu_formula(g: usize, n: usize, t: &AdmissibleTriple) -> i64 {
    let a = t.a.len() as u32;
    let pa = 1i64 << a;
    let pc = 1i64 << (n as u32 - a);
    let n = n as i64;
    match (g, t.k) {
        (0, _) => pa + pc - 2 * n - 4,
        (_, 0) => pa + pc - n - 2,
        (_, 1) => pa - 1,
        _ => pa,
    }
}

/// Lexicographic rank of a permutation.
pub fn perm_rank(p: &[usize]) -> usize {
    let k = p.len();
    let mut rank = 0;
    for i in 0..k {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count();
        rank = rank * (k - i) + smaller;
    }
    rank
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

fn all_perms(k: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..k).collect();
    let mut out = Vec::with_capacity(factorial(k));
    loop {
        out.push(p.clone());
        if !next_permutation(&mut p) {
            break;
        }
    }
    out
}

/// Every simplex of the complex with integer ids, plus face and coface tables.
pub struct SimplexTable {
    /// per edge count k: first simplex id of each class, and the total at the end
    offsets: Vec<Vec<u32>>,
    /// per k and class: labelling rank -> local simplex index
    orbit_of: Vec<Vec<Vec<u32>>>,
    /// per k: simplex id -> (class, normalized labelling)
    simplices: Vec<Vec<(u32, Vec<usize>)>>,
    /// per k: faces[id * k + i] = id of d_i
    faces: Vec<Vec<u32>>,
    perms: Vec<Vec<Vec<usize>>>,
}

impl SimplexTable {
    pub fn build(store: &ComplexStore) -> Self {
        let sk = &store.skeleton;
        let top = sk.max_edges();
        let perms: Vec<Vec<Vec<usize>>> = (0..=top).map(all_perms).collect();
        let mut offsets = Vec::new();
        let mut orbit_of = Vec::new();
        let mut simplices = Vec::new();
        for k in 0..=top {
            let mut offs = Vec::with_capacity(sk.count(k) + 1);
            let mut orbits = Vec::with_capacity(sk.count(k));
            let mut list = Vec::new();
            for c in 0..sk.count(k) {
                offs.push(list.len() as u32);
                let auts = &store.class(k, c).aut_e;
                let mut table = vec![u32::MAX; perms[k].len()];
                let mut local = 0u32;
                // lexicographic order makes the first member of each orbit its least labelling
                for (r, lab) in perms[k].iter().enumerate() {
                    if table[r] != u32::MAX {
                        continue;
                    }
                    for phi in auts {
                        let moved: Vec<usize> = phi.iter().map(|&f| lab[f]).collect();
                        table[perm_rank(&moved)] = local;
                    }
                    list.push((c as u32, lab.clone()));
                    local += 1;
                }
                orbits.push(table);
            }
            offs.push(list.len() as u32);
            offsets.push(offs);
            orbit_of.push(orbits);
            simplices.push(list);
        }
        let mut table = SimplexTable {
            offsets,
            orbit_of,
            simplices,
            faces: Vec::new(),
            perms,
        };
        let mut faces = vec![Vec::new()];
        for k in 1..=top {
            let mut f = Vec::with_capacity(table.count(k) * k);
            for id in 0..table.count(k) {
                let (c, lab) = &table.simplices[k][id];
                let data = store.class(k, *c as usize);
                for i in 0..k {
                    let e = lab.iter().position(|&l| l == i).unwrap();
                    let face = &data.faces[e];
                    let mut nl = vec![0; k - 1];
                    for (x, &l) in lab.iter().enumerate() {
                        if x != e {
                            nl[face.edge_map[x]] = delta_collapse(i, l);
                        }
                    }
                    f.push(table.id(k - 1, face.target, &nl));
                }
            }
            faces.push(f);
        }
        table.faces = faces;
        table
    }

    pub fn levels(&self) -> usize {
        self.simplices.len()
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices[k].len()
    }

    pub fn total(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    /// Id of [G_class, lab] for any labelling in the orbit.
    pub fn id(&self, k: usize, class: usize, lab: &[usize]) -> u32 {
        self.offsets[k][class] + self.orbit_of[k][class][perm_rank(lab)]
    }

    pub fn class_of(&self, k: usize, id: u32) -> usize {
        self.simplices[k][id as usize].0 as usize
    }

    pub fn labelling(&self, k: usize, id: u32) -> &[usize] {
        &self.simplices[k][id as usize].1
    }

    pub fn orbit_size(&self, k: usize, class: usize) -> usize {
        (self.offsets[k][class + 1] - self.offsets[k][class]) as usize
    }

    /// The reference simplex of a class (its identity labelling).
    pub fn reference(&self, k: usize, class: usize) -> u32 {
        self.offsets[k][class] + self.orbit_of[k][class][0]
    }

    pub fn face(&self, k: usize, id: u32, i: usize) -> u32 {
        self.faces[k][id as usize * k + i]
    }

    pub fn act(&self, k: usize, a: &[usize], id: u32) -> u32 {
        let (c, lab) = &self.simplices[k][id as usize];
        let moved: Vec<usize> = lab.iter().map(|&l| a[l]).collect();
        self.id(k, *c as usize, &moved)
    }

    pub fn simplex_ref(&self, k: usize, id: u32) -> SimplexRef {
        let (c, lab) = &self.simplices[k][id as usize];
        SimplexRef {
            p: k as isize - 1,
            class_index: *c as usize,
            labelling: lab.clone(),
        }
    }

    pub fn id_of(&self, s: &SimplexRef) -> u32 {
        self.id(s.edges(), s.class_index, &s.labelling)
    }
}

#[derive(Clone, Debug)]
pub struct AutOptions {
    /// restrict facet images to classes with equal vertex count and cycle label sets
    pub prune: bool,
    pub node_budget: u64,
    pub max_cells: usize,
}

impl Default for AutOptions {
    fn default() -> Self {
        AutOptions {
            prune: true,
            node_budget: 50_000_000,
            max_cells: 2_000_000,
        }
    }
}

/// One automorphism: the image of every simplex, level by level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComplexAutomorphism {
    pub maps: Vec<Vec<u32>>,
}

impl ComplexAutomorphism {
    pub fn identity(table: &SimplexTable) -> Self {
        ComplexAutomorphism {
            maps: (0..table.levels()).map(|k| (0..table.count(k) as u32).collect()).collect(),
        }
    }

    /// (self . other)(x) = self(other(x)).
    pub fn compose(&self, other: &Self) -> Self {
        ComplexAutomorphism {
            maps: self
                .maps
                .iter()
                .zip(&other.maps)
                .map(|(a, b)| b.iter().map(|&x| a[x as usize]).collect())
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.maps.iter().all(|m| m.iter().enumerate().all(|(i, &x)| i as u32 == x))
    }

    /// Class permutation at edge count k.
    pub fn class_perm(&self, table: &SimplexTable, k: usize) -> Vec<usize> {
        (0..table.offsets[k].len() - 1)
            .map(|c| table.class_of(k, self.maps[k][table.reference(k, c) as usize]))
            .collect()
    }

    /// Phi_G for a class: edge e of G maps to the returned edge of Phi G.
    pub fn edge_map(&self, table: &SimplexTable, k: usize, class: usize) -> Vec<usize> {
        let image = self.maps[k][table.reference(k, class) as usize];
        let lab = table.labelling(k, image);
        let mut out = vec![0; k];
        for (f, &l) in lab.iter().enumerate() {
            out[l] = f;
        }
        out
    }

    /// Images of the reference simplices, which determine the whole map.
    pub fn reference_images(&self, table: &SimplexTable) -> Vec<Vec<u32>> {
        (0..table.levels())
            .map(|k| {
                (0..table.offsets[k].len() - 1)
                    .map(|c| self.maps[k][table.reference(k, c) as usize])
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct AutGroup {
    pub elements: Vec<ComplexAutomorphism>,
    /// indices into `elements`
    pub generators: Vec<usize>,
    pub nodes: u64,
}

impl AutGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// The induced permutation of the 0-simplices (one-edge classes).
    pub fn vertex_perms(&self, table: &SimplexTable) -> Vec<Vec<usize>> {
        if table.levels() < 2 {
            return self.elements.iter().map(|_| Vec::new()).collect();
        }
        self.elements.iter().map(|a| a.class_perm(table, 1)).collect()
    }
}

struct Search<'a> {
    table: &'a SimplexTable,
    store: &'a ComplexStore,
    opts: &'a AutOptions,
    phi: Vec<Vec<u32>>,
    inv: Vec<Vec<u32>>,
    trail: Vec<(usize, u32)>,
    facets: Vec<(usize, usize)>,
    /// per level: (simplex at level k-1, face index) -> simplices at level k having it as that face
    cofaces: Vec<BTreeMap<(u32, usize), Vec<u32>>>,
    /// ids of the cycle and bridge label sets of facet simplices, when pruning
    signature: BTreeMap<(usize, u32), usize>,
    nodes: u64,
    found: Vec<ComplexAutomorphism>,
}

const UNSET: u32 = u32::MAX;

impl<'a> Search<'a> {
    fn new(store: &'a ComplexStore, table: &'a SimplexTable, opts: &'a AutOptions) -> Self {
        let sk = &store.skeleton;
        let levels = table.levels();
        let mut facets = Vec::new();
        for k in 0..levels {
            for c in 0..sk.count(k) {
                if sk.is_facet(k, c) {
                    facets.push((k, c));
                }
            }
        }
        let facet_levels: BTreeSet<usize> = facets.iter().map(|&(k, _)| k).collect();
        let mut cofaces = vec![BTreeMap::new(); levels];
        for &k in &facet_levels {
            for id in 0..table.count(k) as u32 {
                if !sk.is_facet(k, table.class_of(k, id)) {
                    continue;
                }
                for i in 0..k {
                    cofaces[k].entry((table.face(k, id, i), i)).or_insert_with(Vec::new).push(id);
                }
            }
        }
        Search {
            table,
            store,
            opts,
            phi: (0..levels).map(|k| vec![UNSET; table.count(k)]).collect(),
            inv: (0..levels).map(|k| vec![UNSET; table.count(k)]).collect(),
            trail: Vec::new(),
            facets,
            cofaces,
            signature: if opts.prune { facet_signatures(store, table, &facet_levels) } else { BTreeMap::new() },
            nodes: 0,
            found: Vec::new(),
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (k, x) = self.trail.pop().unwrap();
            let y = self.phi[k][x as usize];
            self.phi[k][x as usize] = UNSET;
            self.inv[k][y as usize] = UNSET;
        }
    }

    /// Phi(a x) = a y for all a, then the faces; false on conflict.
    fn assign(&mut self, k: usize, x: u32, y: u32) -> bool {
        let t = self.table;
        let cur = self.phi[k][x as usize];
        if cur != UNSET {
            return cur == y;
        }
        let (cx, cy) = (t.class_of(k, x), t.class_of(k, y));
        if t.orbit_size(k, cx) != t.orbit_size(k, cy) {
            return false;
        }
        if self.opts.prune && self.store.skeleton.vertex_count(k, cx) != self.store.skeleton.vertex_count(k, cy) {
            return false;
        }
        for a in &t.perms[k] {
            let (ax, ay) = (t.act(k, a, x), t.act(k, a, y));
            let prev = self.phi[k][ax as usize];
            if prev != UNSET {
                if prev != ay {
                    return false;
                }
                continue;
            }
            if self.inv[k][ay as usize] != UNSET {
                return false;
            }
            self.phi[k][ax as usize] = ay;
            self.inv[k][ay as usize] = ax;
            self.trail.push((k, ax));
        }
        for i in 0..k {
            if !self.assign(k - 1, t.face(k, x, i), t.face(k, y, i)) {
                return false;
            }
        }
        true
    }

    /// Whether x -> y agrees with the current partial map on every iterated face.
    fn compatible(&self, k: usize, x: u32, y: u32) -> bool {
        let t = self.table;
        let (cx, cy) = (t.class_of(k, x), t.class_of(k, y));
        if t.orbit_size(k, cx) != t.orbit_size(k, cy) {
            return false;
        }
        if self.opts.prune && self.store.skeleton.vertex_count(k, cx) != self.store.skeleton.vertex_count(k, cy) {
            return false;
        }
        (0..k).all(|i| {
            let (fx, fy) = (t.face(k, x, i), t.face(k, y, i));
            match self.phi[k - 1][fx as usize] {
                UNSET => self.inv[k - 1][fy as usize] == UNSET && self.compatible(k - 1, fx, fy),
                z => z == fy,
            }
        })
    }

    fn candidates(&self, k: usize, c: usize) -> Vec<u32> {
        let t = self.table;
        let x = t.reference(k, c);
        let mut best: Option<Vec<u32>> = None;
        for i in 0..k {
            let z = self.phi[k - 1][t.face(k, x, i) as usize];
            if z == UNSET {
                continue;
            }
            let list = self.cofaces[k].get(&(z, i)).cloned().unwrap_or_default();
            if best.as_ref().is_none_or(|b| list.len() < b.len()) {
                best = Some(list);
            }
        }
        let mut list = best.unwrap_or_else(|| {
            (0..t.count(k) as u32)
                .filter(|&y| self.store.skeleton.is_facet(k, t.class_of(k, y)))
                .collect()
        });
        list.retain(|&y| {
            self.inv[k][y as usize] == UNSET
                && (!self.opts.prune || self.signature[&(k, x)] == self.signature[&(k, y)])
                && self.compatible(k, x, y)
        });
        list
    }

    fn next_class(&self) -> Option<(usize, usize, Vec<u32>)> {
        let mut best: Option<(usize, usize, Vec<u32>)> = None;
        for idx in 0..self.facets.len() {
            let (k, c) = self.facets[idx];
            if self.phi[k][self.table.reference(k, c) as usize] != UNSET {
                continue;
            }
            let cand = self.candidates(k, c);
            let better = best.as_ref().is_none_or(|b| cand.len() < b.2.len());
            if better {
                let forced = cand.len() <= 1;
                best = Some((k, c, cand));
                if forced {
                    break;
                }
            }
        }
        best
    }

    fn complete(&self) -> bool {
        self.phi.iter().all(|m| m.iter().all(|&x| x != UNSET))
    }

    fn run(&mut self) -> Result<(), ComplexError> {
        self.nodes += 1;
        if self.nodes > self.opts.node_budget {
            return Err(ComplexError::Timeout(self.nodes));
        }
        let Some((k, c, cand)) = self.next_class() else {
            if self.complete() {
                self.found.push(ComplexAutomorphism { maps: self.phi.clone() });
            }
            return Ok(());
        };
        let x = self.table.reference(k, c);
        for y in cand {
            let mark = self.trail.len();
            if self.assign(k, x, y) {
                self.run()?;
            }
            self.undo(mark);
        }
        Ok(())
    }

    fn start(&mut self) -> bool {
        self.table.levels() > 0 && self.assign(0, 0, 0)
    }
}

/// Cycle and bridge label sets of each facet-level simplex, numbered by first appearance.
fn facet_signatures(store: &ComplexStore, table: &SimplexTable, levels: &BTreeSet<usize>) -> BTreeMap<(usize, u32), usize> {
    let mut ids: BTreeMap<Vec<Vec<Vec<usize>>>, usize> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for &k in levels {
        for id in 0..table.count(k) as u32 {
            let pair = store.pair(&table.simplex_ref(k, id));
            let mut sig: Vec<Vec<Vec<usize>>> = (1..=pair.graph.num_vertices().max(2)).map(|c| pair.label_cycles(c)).collect();
            let mut bridges: Vec<usize> = (0..k).filter(|&e| pair.graph.is_bridge(e)).map(|e| pair.tau[e]).collect();
            bridges.sort_unstable();
            sig.push(vec![bridges]);
            let next = ids.len();
            out.insert((k, id), *ids.entry(sig).or_insert(next));
        }
    }
    out
}

fn check_size(store: &ComplexStore, opts: &AutOptions) -> Result<SimplexTable, ComplexError> {
    let cells: u64 = store.f_vector().iter().map(|&(_, _, s)| s).sum();
    if cells > opts.max_cells as u64 {
        return Err(ComplexError::TooLarge {
            cells: cells as usize,
            limit: opts.max_cells,
        });
    }
    Ok(SimplexTable::build(store))
}

/// The top-level branches of the search: candidate images of the first facet class.
pub fn aut_branches(store: &ComplexStore, table: &SimplexTable, opts: &AutOptions) -> Vec<u32> {
    let mut s = Search::new(store, table, opts);
    if !s.start() {
        return Vec::new();
    }
    s.next_class().map(|(_, _, c)| c).unwrap_or_default()
}

/// Runs the search below one top-level branch (or the whole search for None).
pub fn aut_search_branch(
    store: &ComplexStore,
    table: &SimplexTable,
    opts: &AutOptions,
    branch: Option<u32>,
) -> Result<(Vec<ComplexAutomorphism>, u64), ComplexError> {
    let mut s = Search::new(store, table, opts);
    if !s.start() {
        return Ok((Vec::new(), 1));
    }
    match branch {
        None => s.run()?,
        Some(y) => {
            if let Some((k, c, _)) = s.next_class() {
                let x = table.reference(k, c);
                if s.assign(k, x, y) {
                    s.run()?;
                }
            } else if s.complete() {
                s.found.push(ComplexAutomorphism { maps: s.phi.clone() });
            }
        }
    }
    Ok((s.found, s.nodes))
}

/// Sorts the elements, puts the identity first and picks generators greedily.
pub fn assemble_group(mut elements: Vec<ComplexAutomorphism>, nodes: u64) -> AutGroup {
    elements.sort();
    elements.dedup();
    if let Some(i) = elements.iter().position(ComplexAutomorphism::is_identity) {
        let id = elements.remove(i);
        elements.insert(0, id);
    }
    let mut generators = Vec::new();
    let mut closure: BTreeSet<ComplexAutomorphism> = elements.first().cloned().into_iter().collect();
    for (i, a) in elements.iter().enumerate() {
        if closure.contains(a) {
            continue;
        }
        generators.push(i);
        let gens: Vec<&ComplexAutomorphism> = generators.iter().map(|&j| &elements[j]).collect();
        let mut frontier: Vec<ComplexAutomorphism> = closure.iter().cloned().collect();
        while let Some(x) = frontier.pop() {
            for g in &gens {
                let y = g.compose(&x);
                if closure.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
    }
    AutGroup {
        elements,
        generators,
        nodes,
    }
}

/// The full automorphism group, found by backtracking over facet images.
pub fn compute_aut(store: &ComplexStore, opts: &AutOptions) -> Result<(SimplexTable, AutGroup), ComplexError> {
    let table = check_size(store, opts)?;
    let (found, nodes) = aut_search_branch(store, &table, opts, None)?;
    Ok((table, assemble_group(found, nodes)))
}

/// Builds the table after the cell-budget check.
pub fn simplex_table(store: &ComplexStore, opts: &AutOptions) -> Result<SimplexTable, ComplexError> {
    check_size(store, opts)
}

/// f_sigma as a complex automorphism.
pub fn f_sigma(store: &ComplexStore, table: &SimplexTable, sigma: &[usize]) -> ComplexAutomorphism {
    let mut maps = Vec::with_capacity(table.levels());
    for k in 0..table.levels() {
        let mut m = vec![UNSET; table.count(k)];
        for c in 0..store.skeleton.count(k) {
            let x = table.reference(k, c);
            let y = table.id_of(&apply_sigma(store, sigma, &table.simplex_ref(k, x)));
            for a in &table.perms[k] {
                m[table.act(k, a, x) as usize] = table.act(k, a, y);
            }
        }
        maps.push(m);
    }
    ComplexAutomorphism { maps }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnReport {
    pub n: usize,
    /// for each sigma of S_n in lexicographic order: the matching group element
    pub images: Vec<Option<usize>>,
    pub homomorphism: bool,
    pub injective: bool,
    pub surjective: bool,
}

impl SnReport {
    pub fn isomorphism(&self) -> bool {
        self.images.iter().all(Option::is_some) && self.homomorphism && self.injective && self.surjective
    }
}

/// Matches every f_sigma against the computed group.
pub fn identify_sn(store: &ComplexStore, table: &SimplexTable, group: &AutGroup) -> SnReport {
    let n = store.n();
    let sigmas = all_perms(n);
    let index: BTreeMap<Vec<Vec<u32>>, usize> = group
        .elements
        .iter()
        .enumerate()
        .map(|(i, a)| (a.reference_images(table), i))
        .collect();
    let fs: Vec<ComplexAutomorphism> = sigmas.iter().map(|s| f_sigma(store, table, s)).collect();
    let images: Vec<Option<usize>> = fs.iter().map(|f| index.get(&f.reference_images(table)).copied()).collect();
    let rank: BTreeMap<&Vec<usize>, usize> = sigmas.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut homomorphism = true;
    for (i, s) in sigmas.iter().enumerate() {
        for (j, r) in sigmas.iter().enumerate() {
            let sr: Vec<usize> = r.iter().map(|&x| s[x]).collect();
            if fs[i].compose(&fs[j]) != fs[rank[&sr]] {
                homomorphism = false;
            }
        }
    }
    let hit: BTreeSet<usize> = images.iter().flatten().copied().collect();
    SnReport {
        n,
        injective: hit.len() == sigmas.len() && images.iter().all(Option::is_some),
        surjective: hit.len() == group.order(),
        images,
        homomorphism,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub witness: Option<alloc::string::String>,
}

/// Checks the structural propositions on every element of the group.
pub fn verify_structure_theorems(store: &ComplexStore, table: &SimplexTable, group: &AutGroup) -> Vec<CheckResult> {
    use alloc::format;
    let sk = &store.skeleton;
    let (g, n) = (store.g(), store.n());
    let mut out = Vec::new();

    let mut result = |name, checked, witness: Option<alloc::string::String>| {
        out.push(CheckResult {
            name,
            passed: witness.is_none(),
            checked,
            witness,
        })
    };

    let mut checked = 0;
    let mut bad = None;
    for (ai, a) in group.elements.iter().enumerate() {
        for k in 0..table.levels() {
            for (c, d) in a.class_perm(table, k).into_iter().enumerate() {
                checked += 1;
                if sk.vertex_count(k, c) != sk.vertex_count(k, d) && bad.is_none() {
                    bad = Some(format!("automorphism {ai} maps class ({k}, {c}) to ({k}, {d})"));
                }
            }
        }
    }
    result("vertices preserved", checked, bad);

    let mut checked = 0;
    let mut bad = None;
    if g >= 1 && table.levels() > 1 {
        let r1 = make_r(g, n, 1).expect("R^1 exists for g >= 1");
        let (k, c) = sk.find(&r1).expect("R^1 is a class");
        for (ai, a) in group.elements.iter().enumerate() {
            checked += 1;
            if a.class_perm(table, k)[c] != c && bad.is_none() {
                bad = Some(format!("automorphism {ai} moves R^1"));
            }
        }
    }
    result("R^1 fixed", checked, bad);

    let mut bridge_checked = 0;
    let mut bridge_bad = None;
    let mut cycle_checked = 0;
    let mut cycle_bad = None;
    for (ai, a) in group.elements.iter().enumerate() {
        for k in 1..table.levels() {
            for c in 0..sk.count(k) {
                let x = table.reference(k, c);
                let px = store.pair(&table.simplex_ref(k, x));
                let py = store.pair(&table.simplex_ref(k, a.maps[k][x as usize]));
                let bridges = |p: &LabelledPair| -> Vec<usize> {
                    let mut b: Vec<usize> = (0..k).filter(|&e| p.graph.is_bridge(e)).map(|e| p.tau[e]).collect();
                    b.sort_unstable();
                    b
                };
                bridge_checked += 1;
                if bridges(&px) != bridges(&py) && bridge_bad.is_none() {
                    bridge_bad = Some(format!("automorphism {ai}, class ({k}, {c})"));
                }
                for len in 1..=px.graph.num_vertices().max(py.graph.num_vertices()).max(2) {
                    cycle_checked += 1;
                    if px.label_cycles(len) != py.label_cycles(len) && cycle_bad.is_none() {
                        cycle_bad = Some(format!("automorphism {ai}, class ({k}, {c}), {len}-cycles"));
                    }
                }
            }
        }
    }
    result("bridges preserved", bridge_checked, bridge_bad);
    result("cycles preserved", cycle_checked, cycle_bad);

    // V^2[g]: simplices of dimension g with at most two vertices
    let mut checked = 0;
    let mut bad = None;
    let k = g + 1;
    if k < table.levels() {
        for (ai, a) in group.elements.iter().enumerate() {
            for c in 0..sk.count(k) {
                if sk.vertex_count(k, c) > 2 {
                    continue;
                }
                let x = table.reference(k, c);
                let px = store.pair(&table.simplex_ref(k, x));
                let py = store.pair(&table.simplex_ref(k, a.maps[k][x as usize]));
                checked += 1;
                if pair_canonical(&px, Mode::Weak).certificate != pair_canonical(&py, Mode::Weak).certificate
                    && bad.is_none()
                {
                    bad = Some(format!("automorphism {ai}, class ({k}, {c})"));
                }
            }
        }
    }
    result("weak classes preserved on V^2[g]", checked, bad);

    let mut checked = 0;
    let mut bad = None;
    if g + n >= 3 && !group.elements.iter().all(ComplexAutomorphism::is_identity) {
        let mut mu_cache: BTreeMap<AdmissibleTriple, u64> = BTreeMap::new();
        let mut mu = |t: &AdmissibleTriple| -> u64 {
            *mu_cache.entry(t.clone()).or_insert_with(|| mu_bruteforce(sk, t).unwrap_or(u64::MAX))
        };
        for t in AdmissibleTriple::all(g, n) {
            let b = LabelledPair::identity(make_b(g, n, t.k, t.l, &t.a).expect("admissible"));
            let kb = b.num_labels();
            if kb >= table.levels() {
                continue;
            }
            let x = table.id_of(&store.simplex_of(&b).expect("B is a class"));
            for (ai, a) in group.elements.iter().enumerate() {
                let image = store.pair(&table.simplex_ref(kb, a.maps[kb][x as usize]));
                checked += 1;
                match image_triple(&image, &t, n) {
                    Some(ti) if mu(&t) == mu(&ti) => {}
                    other => {
                        if bad.is_none() {
                            bad = Some(format!("automorphism {ai}, triple {t:?} -> {other:?}"));
                        }
                    }
                }
            }
        }
    }
    result("mu preserved", checked, bad);
    out
}

/// Reads (k, l, A') off the image of [B^{k,l}_A, id]: A' are the markings at
/// the vertex carrying the labels of the k loops at v1.
fn image_triple(image: &LabelledPair, t: &AdmissibleTriple, n: usize) -> Option<AdmissibleTriple> {
    let gr = &image.graph;
    if gr.num_vertices() != 2 {
        return None;
    }
    let v1 = if t.k > 0 {
        let e = image.edge(0);
        if !gr.is_loop(e) {
            return None;
        }
        gr.ends(e).0
    } else {
        0
    };
    let a: Vec<usize> = (0..n).filter(|&i| gr.markings[i] == v1).collect();
    let loops_at = |v: usize| (0..gr.num_edges()).filter(|&e| gr.ends(e) == (v, v)).count();
    if loops_at(v1) != t.k || loops_at(1 - v1) != t.l {
        return None;
    }
    Some(AdmissibleTriple { k: t.k, l: t.l, a })
}

/// Pairs of distinct elements agreeing on every simplex of V^2.
pub fn v2_injectivity_violations(store: &ComplexStore, table: &SimplexTable, group: &AutGroup) -> Vec<(usize, usize)> {
    let sk = &store.skeleton;
    let mut seen: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for (ai, a) in group.elements.iter().enumerate() {
        let mut restriction = Vec::new();
        for k in 0..table.levels() {
            for c in 0..sk.count(k) {
                if sk.vertex_count(k, c) <= 2 {
                    restriction.push(a.maps[k][table.reference(k, c) as usize]);
                }
            }
        }
        if let Some(&bi) = seen.get(&restriction) {
            out.push((bi, ai));
        } else {
            seen.insert(restriction, ai);
        }
    }
    out
}

/// Whether a map commutes with faces and the label action.
pub fn is_equivariant_map(table: &SimplexTable, a: &ComplexAutomorphism) -> bool {
    for k in 0..table.levels() {
        for x in 0..table.count(k) as u32 {
            let y = a.maps[k][x as usize];
            for i in 0..k {
                if a.maps[k - 1][table.face(k, x, i) as usize] != table.face(k, y, i) {
                    return false;
                }
            }
            for p in &table.perms[k] {
                if a.maps[k][table.act(k, p, x) as usize] != table.act(k, p, y) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::enumerate_all;
    use crate::families::make_b0;
    use crate::testutil::perms;

    fn group(g: usize, n: usize, prune: bool) -> (ComplexStore, SimplexTable, AutGroup) {
        let store = ComplexStore::build(g, n).unwrap();
        let opts = AutOptions { prune, ..AutOptions::default() };
        let (table, group) = compute_aut(&store, &opts).unwrap();
        (store, table, group)
    }

    #[test]
    fn relabelling_markings() {
        let s = ComplexStore::build(0, 4).unwrap();
        for x in s.simplices(0) {
            assert_eq!(apply_sigma(&s, &[0, 1, 2, 3], &x), x);
        }
        let split = |a: &[usize]| s.simplex_of(&LabelledPair::identity(make_b0(4, a).unwrap())).unwrap();
        assert_eq!(apply_sigma(&s, &[0, 2, 1, 3], &split(&[0, 1])), split(&[0, 2]));
        assert_eq!(apply_sigma(&s, &[1, 0, 2, 3], &split(&[0, 1])), split(&[0, 1]));
    }

    #[test]
    fn f_sigma_is_an_action() {
        let s = ComplexStore::build(1, 3).unwrap();
        let table = SimplexTable::build(&s);
        let sigmas = perms(3);
        for a in &sigmas {
            for b in &sigmas {
                let ab: Vec<usize> = b.iter().map(|&x| a[x]).collect();
                assert_eq!(f_sigma(&s, &table, a).compose(&f_sigma(&s, &table, b)), f_sigma(&s, &table, &ab));
                assert!(is_equivariant_map(&table, &f_sigma(&s, &table, a)));
            }
        }
    }

    #[test]
    fn simplex_table_round_trips() {
        let s = ComplexStore::build(2, 0).unwrap();
        let t = SimplexTable::build(&s);
        assert_eq!(t.total(), 1 + 2 + 3 + 4);
        for k in 0..t.levels() {
            for id in 0..t.count(k) as u32 {
                assert_eq!(t.id_of(&t.simplex_ref(k, id)), id);
            }
        }
        assert_eq!(perm_rank(&[0, 1, 2]), 0);
        assert_eq!(perm_rank(&[2, 1, 0]), 5);
    }

    #[test]
    fn mu_examples() {
        let sk = enumerate_all(1, 3).unwrap();
        let t = AdmissibleTriple::new(1, 3, 0, 0, &[0, 1]).unwrap();
        assert_eq!(mu_bruteforce(&sk, &t), Ok(1));

        let t = AdmissibleTriple::new(1, 5, 0, 0, &[0, 1]).unwrap();
        assert_eq!(mu_formula(1, 5, &t), 5);
        let t = AdmissibleTriple::new(2, 4, 1, 0, &[0, 1, 2]).unwrap();
        assert_eq!(mu_formula(2, 4, &t), 7);
        let t = AdmissibleTriple::new(0, 5, 0, 0, &[0, 1]).unwrap();
        assert_eq!(mu_formula(0, 5, &t), -2);
        assert_eq!(mu_bruteforce(&enumerate_all(0, 5).unwrap(), &t), Ok(3));
        assert!(AdmissibleTriple::new(0, 5, 0, 0, &[0]).is_err());
    }

    #[test]
    fn mu_for_many_loops() {
        for (g, n) in [(2, 2), (3, 1), (2, 3)] {
            let sk = enumerate_all(g, n).unwrap();
            for t in AdmissibleTriple::all(g, n) {
                let expected = match t.k {
                    0 => continue,
                    1 => (1 << t.a.len()) - 1,
                    _ => 1 << t.a.len(),
                };
                assert_eq!(mu_bruteforce(&sk, &t), Ok(expected), "({g},{n}) {t:?}");
            }
        }
    }

    #[test]
    fn mu_is_relabelling_invariant() {
        let sk = enumerate_all(1, 4).unwrap();
        for t in AdmissibleTriple::all(1, 4) {
            let base = mu_bruteforce(&sk, &t).unwrap();
            for sigma in perms(4) {
                let a: Vec<usize> = t.a.iter().map(|&i| sigma[i]).collect();
                let moved = AdmissibleTriple::new(1, 4, t.k, t.l, &a).unwrap();
                assert_eq!(mu_bruteforce(&sk, &moved).unwrap(), base);
            }
        }
    }

    #[test]
    fn small_groups() {
        for ((g, n), order) in [((0, 4), 6), ((1, 1), 1), ((1, 2), 1), ((2, 0), 1), ((1, 3), 6), ((2, 1), 1)] {
            let (store, table, grp) = group(g, n, true);
            assert_eq!(grp.order(), order, "({g},{n})");
            assert!(grp.elements[0].is_identity());
            for a in &grp.elements {
                assert!(is_equivariant_map(&table, a));
            }
            for c in verify_structure_theorems(&store, &table, &grp) {
                assert!(c.passed, "({g},{n}) {}", c.name);
            }
            assert!(v2_injectivity_violations(&store, &table, &grp).is_empty());
        }
    }

    #[test]
    fn group_of_delta_04_permutes_vertices_freely() {
        let (store, table, grp) = group(0, 4, true);
        let perms_of_vertices: BTreeSet<Vec<usize>> = grp.vertex_perms(&table).into_iter().collect();
        assert_eq!(perms_of_vertices.len(), 6);
        let sn = identify_sn(&store, &table, &grp);
        assert!(sn.homomorphism && sn.surjective && !sn.injective);
    }

    #[test]
    fn symmetric_group_on_five_points() {
        let (store, table, grp) = group(0, 5, true);
        assert_eq!(grp.order(), 120);
        assert!(identify_sn(&store, &table, &grp).isomorphism());
    }

    #[test]
    fn pruning_does_not_change_the_group() {
        for (g, n) in [(0, 4), (1, 2), (2, 0), (1, 3)] {
            let (_, _, pruned) = group(g, n, true);
            let (_, _, plain) = group(g, n, false);
            assert_eq!(pruned.elements, plain.elements);
        }
    }

    #[test]
    fn budgets() {
        let store = ComplexStore::build(0, 5).unwrap();
        let tiny = AutOptions { max_cells: 10, ..AutOptions::default() };
        assert!(matches!(compute_aut(&store, &tiny), Err(ComplexError::TooLarge { .. })));
        let short = AutOptions { node_budget: 3, ..AutOptions::default() };
        assert!(matches!(compute_aut(&store, &short), Err(ComplexError::Timeout(_))));
    }

    #[test]
    fn generators_generate() {
        let (_, table, grp) = group(1, 3, true);
        let mut closure: BTreeSet<ComplexAutomorphism> = BTreeSet::new();
        closure.insert(ComplexAutomorphism::identity(&table));
        loop {
            let before = closure.len();
            let current: Vec<ComplexAutomorphism> = closure.iter().cloned().collect();
            for x in &current {
                for &gi in &grp.generators {
                    closure.insert(grp.elements[gi].compose(x));
                }
            }
            if closure.len() == before {
                break;
            }
        }
        assert_eq!(closure.len(), grp.order());
    }
}
