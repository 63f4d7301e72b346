//! The `tropmod` command line. `run` parses argv, executes one command and
//! returns the exit code: 0 success, 1 domain failure, 2 usage or input error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tropmod_core::reconstruction::{
    cycles_from_deck, deck, q_from_deck, reconstruct, reconstruct_generic, CycleSet, IntersectionMatrix,
};
use tropmod_core::symmetry::{AdmissibleTriple, AutOptions};
use tropmod_core::ComplexStore;

use crate::aut::{aut_report, compute_aut_parallel};
use crate::cache::{load_or_build, SkeletonFile, TOOL_VERSION};
use crate::error::CliError;
use crate::format::{to_json, DeckFile, GraphRecord};
use crate::verify::{mu_row, mu_table, verify_all, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "tropmod", version = env!("CARGO_PKG_VERSION"), about = "Stable graphs and the tropical moduli complex")]
pub struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Machine-readable JSON output
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct TypeArgs {
    #[arg(long)]
    pub g: usize,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate the stable graph classes of type (g, n)
    Enumerate {
        #[command(flatten)]
        ty: TypeArgs,
        /// Group records by edge count
        #[arg(long)]
        by_edges: bool,
        /// Only maximal-edge classes
        #[arg(long)]
        facets_only: bool,
        /// Write the records to FILE instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Summarize the symmetric Delta-complex
    Complex {
        #[command(flatten)]
        ty: TypeArgs,
        #[arg(long)]
        fvector: bool,
        /// Per-class stabilizer orders and orbit sizes
        #[arg(long)]
        stabilizers: bool,
    },
    /// Build the contraction deck of a labelled pair
    Deck {
        #[arg(long = "in", value_name = "PAIR.json")]
        input: PathBuf,
        /// Write the deck file here
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Recover a labelled pair from its deck
    Reconstruct {
        #[arg(long, value_name = "DECK.json")]
        deck: PathBuf,
        #[command(flatten)]
        ty: TypeArgs,
        /// Drop the b1 = g hypothesis and use the generic intersection rules
        #[arg(long)]
        experimental_generic: bool,
    },
    /// Compute the automorphism group by exhaustive search
    Aut {
        #[command(flatten)]
        ty: TypeArgs,
        /// Check the structure propositions on every element
        #[arg(long)]
        verify: bool,
        /// Refuse complexes with more cells than this
        #[arg(long, value_name = "K")]
        max_cells: Option<usize>,
        /// Search nodes allowed per top-level branch
        #[arg(long)]
        node_budget: Option<u64>,
        /// Disable vertex-count and cycle-signature pruning
        #[arg(long)]
        no_prune: bool,
    },
    /// Count 3-vertex uncontractions of the two-vertex graphs B^{k,l}_A
    Mu {
        #[command(flatten)]
        ty: TypeArgs,
        /// Every admissible triple (the default)
        #[arg(long, conflicts_with_all = ["k", "l", "a"])]
        all: bool,
        #[arg(long, requires_all = ["l", "a"])]
        k: Option<usize>,
        #[arg(long, requires_all = ["k", "a"])]
        l: Option<usize>,
        /// 1-based markings on the first vertex, comma separated (may be empty)
        #[arg(long = "A", value_name = "1,2,...", requires_all = ["k", "l"])]
        a: Option<String>,
        /// Also evaluate the closed form
        #[arg(long)]
        compare_formula: bool,
    },
    /// Run every check for one (g, n) and print a summary table
    VerifyAll {
        #[command(flatten)]
        ty: TypeArgs,
        #[arg(long, value_name = "K")]
        max_cells: Option<usize>,
        #[arg(long)]
        node_budget: Option<u64>,
        /// Also run the unpruned automorphism search and compare
        #[arg(long)]
        cross_check_pruning: bool,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            let _ = writeln!(err, "error: --threads must be positive");
            return 2;
        }
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let (result, buffer) = pool.install(|| {
        let mut buffer = Vec::new();
        (execute(&cli, &mut buffer), buffer)
    });
    if let Err(e) = out.write_all(&buffer) {
        let _ = writeln!(err, "error: {e}");
        return 2;
    }
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn aut_options(max_cells: Option<usize>, node_budget: Option<u64>, no_prune: bool) -> AutOptions {
    let d = AutOptions::default();
    AutOptions {
        prune: !no_prune,
        node_budget: node_budget.unwrap_or(d.node_budget),
        max_cells: max_cells.unwrap_or(d.max_cells),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Enumerate {
            ty,
            by_edges,
            facets_only,
            out: file,
        } => enumerate(ty, *by_edges, *facets_only, file.as_deref(), out),
        Command::Complex { ty, fvector, stabilizers } => complex(ty, *fvector, *stabilizers, cli.json, out),
        Command::Deck { input, out: file } => deck_cmd(input, file.as_deref(), cli.json, out),
        Command::Reconstruct {
            deck,
            ty,
            experimental_generic,
        } => reconstruct_cmd(deck, ty, *experimental_generic, cli.json, out),
        Command::Aut {
            ty,
            verify,
            max_cells,
            node_budget,
            no_prune,
        } => {
            let store = ComplexStore::from_skeleton(load_or_build(ty.g, ty.n)?);
            let opts = aut_options(*max_cells, *node_budget, *no_prune);
            let (table, group) = compute_aut_parallel(&store, &opts)?;
            let report = aut_report(&store, &table, &group, *verify);
            let failed = report.checks.iter().flatten().any(|c| !c.passed);
            if cli.json {
                emit(out, &to_json(&report))?;
            } else {
                let mut s = format!(
                    "Aut(Delta_{{{},{}}}): order {}\ncells {}, search nodes {}, generators {}\n",
                    ty.g,
                    ty.n,
                    report.order,
                    report.cells,
                    report.nodes,
                    report.generators.len()
                );
                let sn = &report.sn;
                s += &format!(
                    "S_{} -> Aut: homomorphism {}, injective {}, surjective {}\n",
                    sn.n, sn.homomorphism, sn.injective, sn.surjective
                );
                for c in report.checks.iter().flatten() {
                    s += &format!(
                        "{:4}  {} ({} checked){}\n",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.checked,
                        c.witness.as_ref().map(|w| format!(": {w}")).unwrap_or_default()
                    );
                }
                emit(out, &s)?;
            }
            Ok(failed as i32)
        }
        Command::Mu {
            ty,
            all: _,
            k,
            l,
            a,
            compare_formula,
        } => mu_cmd(ty, *k, *l, a.as_deref(), *compare_formula, cli.json, out),
        Command::VerifyAll {
            ty,
            max_cells,
            node_budget,
            cross_check_pruning,
        } => {
            let opts = VerifyOptions {
                aut: aut_options(*max_cells, *node_budget, false),
                cross_check_pruning: *cross_check_pruning,
            };
            let report = verify_all(load_or_build(ty.g, ty.n)?, &opts)?;
            if cli.json {
                emit(out, &to_json(&report))?;
            } else {
                let mut s = format!("verify-all g={} n={}\n", ty.g, ty.n);
                for r in &report.rows {
                    s += &format!(
                        "{:4}  {:14} {} [{}]{}\n",
                        if r.passed { "PASS" } else { "FAIL" },
                        r.module,
                        r.check,
                        r.checked,
                        if r.detail.is_empty() { String::new() } else { format!(": {}", r.detail) }
                    );
                }
                s += if report.passed() { "all checks passed\n" } else { "SOME CHECKS FAILED\n" };
                emit(out, &s)?;
            }
            Ok(!report.passed() as i32)
        }
    }
}

#[derive(Serialize)]
struct EdgeGroup<'a> {
    edges: usize,
    records: Vec<&'a crate::cache::SkeletonRecord>,
}

fn enumerate(
    ty: &TypeArgs,
    by_edges: bool,
    facets_only: bool,
    file: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let sk = load_or_build(ty.g, ty.n)?;
    let records = SkeletonFile::from_skeleton(&sk, facets_only);
    let body = if by_edges {
        let groups: Vec<EdgeGroup> = (0..=sk.max_edges())
            .map(|k| EdgeGroup {
                edges: k,
                records: records.records.iter().filter(|r| r.p + 1 == k as isize).collect(),
            })
            .collect();
        to_json(&serde_json::json!({ "header": records.header, "by_edges": groups }))
    } else {
        to_json(&records)
    };
    match file {
        Some(path) => {
            fs::write(path, body + "\n")?;
            emit(out, &format!("wrote {} records to {}", records.records.len(), path.display()))?;
        }
        None => emit(out, &body)?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct FRow {
    p: isize,
    classes: usize,
    simplices: u64,
}

#[derive(Serialize)]
struct StabRow {
    p: isize,
    class: usize,
    vertices: usize,
    stabilizer: usize,
    orbit: u64,
    graph: GraphRecord,
}

#[derive(Serialize)]
struct ComplexReport {
    g: usize,
    n: usize,
    dimension: isize,
    #[serde(skip_serializing_if = "Option::is_none")]
    fvector: Option<Vec<FRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stabilizers: Option<Vec<StabRow>>,
}

fn complex(ty: &TypeArgs, fvector: bool, stabilizers: bool, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let store = ComplexStore::from_skeleton(load_or_build(ty.g, ty.n)?);
    let fv: Vec<FRow> = store
        .f_vector()
        .into_iter()
        .map(|(p, classes, simplices)| FRow { p, classes, simplices })
        .collect();
    let stabs = stabilizers.then(|| {
        let sk = &store.skeleton;
        let mut rows = Vec::new();
        for k in 0..=sk.max_edges() {
            for c in 0..sk.count(k) {
                let stab = store.stabilizer(&store.reference(k, c)).len();
                let graph = &store.class(k, c).graph;
                rows.push(StabRow {
                    p: k as isize - 1,
                    class: c,
                    vertices: graph.num_vertices(),
                    stabilizer: stab,
                    orbit: (1..=k as u64).product::<u64>() / stab as u64,
                    graph: GraphRecord::from_graph(graph).with_certificate(graph),
                });
            }
        }
        rows
    });
    let report = ComplexReport {
        g: ty.g,
        n: ty.n,
        dimension: store.skeleton.max_edges() as isize - 1,
        fvector: (fvector || !stabilizers).then_some(fv),
        stabilizers: stabs,
    };
    if json {
        return emit(out, &to_json(&report)).map(|_| 0);
    }
    let mut s = format!("Delta_{{{},{}}}: dimension {}\n", ty.g, ty.n, report.dimension);
    if let Some(fv) = &report.fvector {
        s += "   p  classes  simplices\n";
        for r in fv {
            s += &format!("{:>4} {:>8} {:>10}\n", r.p, r.classes, r.simplices);
        }
    }
    if let Some(rows) = &report.stabilizers {
        s += "   p  class  vertices  |stab|  orbit\n";
        for r in rows {
            s += &format!("{:>4} {:>6} {:>9} {:>7} {:>6}\n", r.p, r.class, r.vertices, r.stabilizer, r.orbit);
        }
    }
    emit(out, &s).map(|_| 0)
}

fn cycles_json(c: &CycleSet) -> BTreeMap<String, Vec<Vec<usize>>> {
    c.by_k.iter().map(|(k, s)| (k.to_string(), s.iter().cloned().collect())).collect()
}

#[derive(Serialize)]
struct MatrixJson {
    headers: Vec<String>,
    rows: Vec<Vec<u8>>,
}

impl From<&IntersectionMatrix> for MatrixJson {
    fn from(q: &IntersectionMatrix) -> Self {
        MatrixJson {
            headers: q.headers(),
            rows: q.rows(),
        }
    }
}

#[derive(Serialize)]
struct DeckReport {
    deck: DeckFile,
    cycles: Option<BTreeMap<String, Vec<Vec<usize>>>>,
    q: Option<MatrixJson>,
    /// why cycles or Q could not be derived from the deck
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn deck_cmd(input: &Path, file: Option<&Path>, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let record: GraphRecord = read_json(input)?;
    let pair = record.to_pair()?;
    let (g, n) = (pair.graph.g, pair.graph.n());
    let d = deck(&pair);
    let deck_file = DeckFile::from_deck(g, n, &d);
    if let Some(path) = file {
        fs::write(path, to_json(&deck_file) + "\n")?;
    }
    let mut note = None;
    let cycles = cycles_from_deck(&d).map_err(|e| note = Some(e.to_string())).ok();
    let q = if pair.graph.b1() != g || pair.graph.num_vertices() < 3 {
        note.get_or_insert_with(|| "Q is derived from the deck only when b1 = g and |V| >= 3".into());
        None
    } else {
        cycles
            .as_ref()
            .and_then(|c| q_from_deck(&d, c, g, n).map_err(|e| note = Some(e.to_string())).ok())
    };
    if json {
        let report = DeckReport {
            deck: deck_file,
            cycles: cycles.as_ref().map(cycles_json),
            q: q.as_ref().map(Into::into),
            note,
        };
        return emit(out, &to_json(&report)).map(|_| 0);
    }
    let mut s = format!("deck of a (g={g}, n={n}) pair with p={}: {} entries\n", d.p, d.entries.len());
    for e in &d.entries {
        s += &format!(
            "  contract label {}: {} vertices, {} edges\n",
            e.index,
            e.pair.graph.num_vertices(),
            e.pair.graph.num_edges()
        );
    }
    if let Some(c) = &cycles {
        for (k, sets) in &c.by_k {
            let list: Vec<String> = sets.iter().map(|s| format!("{s:?}")).collect();
            s += &format!("{k}-cycles: {}\n", list.join(" "));
        }
    }
    if let Some(q) = &q {
        s += &format!("Q:\n{q}");
    }
    if let Some(note) = &note {
        s += &format!("note: {note}\n");
    }
    if let Some(path) = file {
        s += &format!("wrote deck to {}\n", path.display());
    }
    emit(out, &s).map(|_| 0)
}

fn reconstruct_cmd(path: &Path, ty: &TypeArgs, generic: bool, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let file: DeckFile = read_json(path)?;
    if file.g != ty.g || file.n != ty.n {
        return Err(CliError::Input(format!(
            "deck header says (g, n) = ({}, {}), command line says ({}, {})",
            file.g, file.n, ty.g, ty.n
        )));
    }
    let d = file.to_deck()?;
    let pair = if generic {
        reconstruct_generic(&d, ty.n)?
    } else {
        reconstruct(&d, ty.g, ty.n)?
    };
    let record = GraphRecord::from_pair(&pair).with_certificate(&pair.graph);
    if json {
        return emit(out, &to_json(&record)).map(|_| 0);
    }
    let mut s = format!(
        "reconstructed pair: {} vertices, {} edges\n",
        pair.graph.num_vertices(),
        pair.graph.num_edges()
    );
    for e in &record.edges {
        s += &format!("  edge {} = {{{}, {}}} label {}\n", e.id, e.ends[0], e.ends[1], e.label.unwrap_or(0));
    }
    for (m, v) in &record.markings {
        s += &format!("  marking {m} at vertex {v}\n");
    }
    emit(out, &s).map(|_| 0)
}

fn parse_markings(text: &str, n: usize) -> Result<Vec<usize>, CliError> {
    let mut a = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: usize = part.parse().map_err(|_| CliError::Input(format!("bad marking '{part}'")))?;
        if m == 0 || m > n {
            return Err(CliError::Input(format!("marking {m} is outside 1..={n}")));
        }
        a.push(m - 1);
    }
    Ok(a)
}

fn mu_cmd(
    ty: &TypeArgs,
    k: Option<usize>,
    l: Option<usize>,
    a: Option<&str>,
    compare: bool,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let sk = load_or_build(ty.g, ty.n)?;
    let rows = match (k, l, a) {
        (Some(k), Some(l), Some(a)) => {
            let marks = parse_markings(a, ty.n)?;
            let t = AdmissibleTriple::new(ty.g, ty.n, k, l, &marks).map_err(|e| CliError::Input(e.to_string()))?;
            vec![mu_row(&sk, &t)?]
        }
        _ => mu_table(&sk)?,
    };
    let failed = compare && rows.iter().any(|r| r.asserted && !r.agrees());
    if json {
        let value: Vec<serde_json::Value> = rows
            .iter()
            .map(|r| {
                let mut v = serde_json::json!({ "k": r.k, "l": r.l, "A": r.a, "mu": r.brute });
                if compare {
                    v["formula"] = r.formula.into();
                    v["agrees"] = r.agrees().into();
                    v["asserted"] = r.asserted.into();
                }
                v
            })
            .collect();
        emit(out, &to_json(&value))?;
    } else {
        let mut s = String::from("  k  l  A            mu");
        s += if compare { "  formula\n" } else { "\n" };
        for r in &rows {
            let set = format!("{{{}}}", r.a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
            s += &format!("{:>3}{:>3}  {:<10}{:>6}", r.k, r.l, set, r.brute);
            if compare {
                let mark = match (r.agrees(), r.asserted) {
                    (true, _) => "",
                    (false, true) => "  MISMATCH",
                    (false, false) => "  differs (reported only)",
                };
                s += &format!("{:>9}{mark}", r.formula);
            }
            s.push('\n');
        }
        emit(out, &s)?;
    }
    Ok(failed as i32)
}

/// The build identifier embedded in cache headers.
pub fn version() -> &'static str {
    TOOL_VERSION
}
