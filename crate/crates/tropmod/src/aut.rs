//! Parallel driver and JSON rendering for the automorphism solver.

use rayon::prelude::*;
use serde::Serialize;
use tropmod_core::symmetry::{
    assemble_group, aut_branches, aut_search_branch, identify_sn, simplex_table, v2_injectivity_violations,
    verify_structure_theorems, AutGroup, AutOptions, CheckResult, ComplexAutomorphism, SimplexTable, SnReport,
};
use tropmod_core::{ComplexError, ComplexStore};

/// Splits the search over the candidate images of the first facet class.
/// The node budget applies per branch.
pub fn compute_aut_parallel(store: &ComplexStore, opts: &AutOptions) -> Result<(SimplexTable, AutGroup), ComplexError> {
    let table = simplex_table(store, opts)?;
    let branches = aut_branches(store, &table, opts);
    let results: Vec<Result<(Vec<ComplexAutomorphism>, u64), ComplexError>> = if branches.is_empty() {
        vec![aut_search_branch(store, &table, opts, None)]
    } else {
        branches
            .par_iter()
            .map(|&b| aut_search_branch(store, &table, opts, Some(b)))
            .collect()
    };
    let mut elements = Vec::new();
    let mut nodes = 1;
    for r in results {
        let (found, n) = r?;
        elements.extend(found);
        nodes += n;
    }
    let group = assemble_group(elements, nodes);
    Ok((table, group))
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelPerm {
    pub p: isize,
    pub perm: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeMap {
    pub p: isize,
    pub class: usize,
    pub map: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorReport {
    pub class_perm: Vec<LevelPerm>,
    /// Phi_G for every class whose edge map is not the identity
    pub edge_maps: Vec<EdgeMap>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SnSummary {
    pub n: usize,
    /// group element matched by each sigma, sigmas in lexicographic order of their one-line notation
    pub images: Vec<Option<usize>>,
    pub homomorphism: bool,
    pub injective: bool,
    pub surjective: bool,
    pub isomorphism: bool,
}

impl From<&SnReport> for SnSummary {
    fn from(r: &SnReport) -> Self {
        SnSummary {
            n: r.n,
            images: r.images.clone(),
            homomorphism: r.homomorphism,
            injective: r.injective,
            surjective: r.surjective,
            isomorphism: r.isomorphism(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

impl From<&CheckResult> for CheckSummary {
    fn from(c: &CheckResult) -> Self {
        CheckSummary {
            name: c.name.to_string(),
            passed: c.passed,
            checked: c.checked,
            witness: c.witness.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AutReport {
    pub g: usize,
    pub n: usize,
    pub order: usize,
    pub cells: usize,
    pub nodes: u64,
    pub generators: Vec<GeneratorReport>,
    /// permutation of the 0-simplex classes induced by each group element
    pub zero_simplex_perms: Vec<Vec<usize>>,
    pub sn: SnSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckSummary>>,
}

pub fn generator_report(table: &SimplexTable, store: &ComplexStore, a: &ComplexAutomorphism) -> GeneratorReport {
    let mut class_perm = Vec::new();
    let mut edge_maps = Vec::new();
    for k in 0..table.levels() {
        class_perm.push(LevelPerm {
            p: k as isize - 1,
            perm: a.class_perm(table, k),
        });
        for c in 0..store.skeleton.count(k) {
            let map = a.edge_map(table, k, c);
            if map.iter().enumerate().any(|(i, &x)| i != x) {
                edge_maps.push(EdgeMap {
                    p: k as isize - 1,
                    class: c,
                    map,
                });
            }
        }
    }
    GeneratorReport { class_perm, edge_maps }
}

pub fn aut_report(store: &ComplexStore, table: &SimplexTable, group: &AutGroup, verify: bool) -> AutReport {
    let sn = identify_sn(store, table, group);
    let checks = verify.then(|| {
        let mut checks: Vec<CheckSummary> = verify_structure_theorems(store, table, group).iter().map(Into::into).collect();
        let violations = v2_injectivity_violations(store, table, group);
        checks.push(CheckSummary {
            name: "V^2 restriction injective".into(),
            passed: violations.is_empty(),
            checked: group.order(),
            witness: violations.first().map(|(a, b)| format!("elements {a} and {b} agree on V^2")),
        });
        checks
    });
    AutReport {
        g: store.g(),
        n: store.n(),
        order: group.order(),
        cells: table.total(),
        nodes: group.nodes,
        generators: group
            .generators
            .iter()
            .map(|&i| generator_report(table, store, &group.elements[i]))
            .collect(),
        zero_simplex_perms: group.vertex_perms(table),
        sn: (&sn).into(),
        checks,
    }
}

/// Aut(Delta_{g,n}) as stated for the desk-scale range: S_3 for (0,4), trivial
/// for (1,1) and (1,2), S_n otherwise.
pub fn expected_order(g: usize, n: usize) -> usize {
    match (g, n) {
        (0, 4) => 6,
        (1, 1) | (1, 2) => 1,
        _ => (1..=n).product(),
    }
}
