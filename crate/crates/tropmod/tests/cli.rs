use std::fs;
use std::path::Path;

use serde_json::Value;
use tropmod::cache::{cache_path, load_or_build_in, SkeletonFile};
use tropmod::cli::run;
use tropmod::format::GraphRecord;
use tropmod::CliError;
use tropmod_core::canon::{pairs_isomorphic, Mode};
use tropmod_core::enumerate_all;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn tropmod(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["tropmod"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn json(r: &Run) -> Value {
    assert_eq!(r.code, 0, "stderr: {}", r.err);
    serde_json::from_str(&r.out).unwrap()
}

const PAIR_21: &str = r#"{"g":2,"n":1,
 "vertices":[{"id":0,"weight":0},{"id":1,"weight":0},{"id":2,"weight":0}],
 "edges":[{"id":0,"ends":[0,1],"label":2},{"id":1,"ends":[0,1],"label":0},
          {"id":2,"ends":[1,2],"label":3},{"id":3,"ends":[2,0],"label":1}],
 "markings":{"1":2}}"#;

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn version_flag() {
    let r = tropmod(&["--version"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.out.trim(), format!("tropmod {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn enumerate_genus_one_one_point() {
    let v = json(&tropmod(&["enumerate", "--g", "1", "--n", "1"]));
    assert_eq!(v["header"]["g"], 1);
    assert_eq!(v["records"].as_array().unwrap().len(), 2);
}

#[test]
fn enumerate_writes_the_same_file_it_prints() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sk.json");
    let r = tropmod(&["enumerate", "--g", "0", "--n", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.err);
    let file: SkeletonFile = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let sk = file.to_skeleton().unwrap();
    let fresh = enumerate_all(0, 5).unwrap();
    assert_eq!(sk.certificates(), fresh.certificates());
}

#[test]
fn aut_of_m04_has_order_six() {
    let v = json(&tropmod(&["aut", "--g", "0", "--n", "4", "--json"]));
    assert_eq!(v["order"], 6);
}

#[test]
fn deck_then_reconstruct_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write(dir.path(), "pair.json", PAIR_21);
    let deck = dir.path().join("deck.json");
    let r = tropmod(&["deck", "--in", &pair, "--out", deck.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.err);
    let v = json(&tropmod(&["--json", "reconstruct", "--deck", deck.to_str().unwrap(), "--g", "2", "--n", "1"]));
    let rebuilt: GraphRecord = serde_json::from_value(v).unwrap();
    let original: GraphRecord = serde_json::from_str(PAIR_21).unwrap();
    assert!(pairs_isomorphic(
        &rebuilt.to_pair().unwrap(),
        &original.to_pair().unwrap(),
        Mode::Iso
    ));
}

#[test]
fn reconstruct_rejects_a_mismatched_header() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write(dir.path(), "pair.json", PAIR_21);
    let deck = dir.path().join("deck.json");
    assert_eq!(tropmod(&["deck", "--in", &pair, "--out", deck.to_str().unwrap()]).code, 0);
    let r = tropmod(&["reconstruct", "--deck", deck.to_str().unwrap(), "--g", "1", "--n", "3"]);
    assert_eq!(r.code, 2);
    assert!(!r.err.is_empty());
}

#[test]
fn exit_codes() {
    assert_eq!(tropmod(&["complex", "--g", "0", "--n", "2"]).code, 2);
    assert_eq!(tropmod(&["no-such-command"]).code, 2);
    assert_eq!(tropmod(&["deck", "--in", "/nonexistent/pair.json"]).code, 2);
    assert_eq!(tropmod(&["mu", "--g", "1", "--n", "2", "--all"]).code, 0);
}

#[test]
fn malformed_pairs_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let unstable = r#"{"g":0,"n":1,"vertices":[{"id":0,"weight":0}],"edges":[],"markings":{"1":0}}"#;
    let unlabelled = r#"{"g":1,"n":1,"vertices":[{"id":0,"weight":0}],"edges":[{"id":0,"ends":[0,0]}],"markings":{"1":0}}"#;
    let bad_marking = r#"{"g":1,"n":1,"vertices":[{"id":0,"weight":0}],"edges":[{"id":0,"ends":[0,0],"label":0}],"markings":{"2":0}}"#;
    for (name, body) in [("a", unstable), ("b", unlabelled), ("c", bad_marking), ("d", "not json")] {
        let path = write(dir.path(), name, body);
        let r = tropmod(&["deck", "--in", &path]);
        assert_eq!(r.code, 2, "{name}: {}", r.out);
    }
    let rec: GraphRecord = serde_json::from_str(unlabelled).unwrap();
    assert!(matches!(rec.to_pair(), Err(CliError::Input(_))));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    for args in [
        ["complex", "--g", "1", "--n", "3", "--fvector"].as_slice(),
        ["aut", "--g", "1", "--n", "2", "--verify"].as_slice(),
        ["verify-all", "--g", "2", "--n", "0"].as_slice(),
    ] {
        let one = tropmod(&[&["--threads", "1"], args].concat());
        let four = tropmod(&[&["--threads", "4"], args].concat());
        assert_eq!(one.code, four.code);
        assert_eq!(one.out, four.out, "{args:?}");
    }
}

#[test]
fn verify_all_passes_on_small_types() {
    for (g, n) in [("1", "2"), ("2", "0"), ("0", "5")] {
        let r = tropmod(&["--json", "verify-all", "--g", g, "--n", n]);
        assert_eq!(r.code, 0, "({g},{n}): {}{}", r.out, r.err);
    }
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let built = load_or_build_in(dir.path(), 1, 3).unwrap();
    assert!(cache_path(dir.path(), 1, 3).exists());
    let loaded = load_or_build_in(dir.path(), 1, 3).unwrap();
    assert_eq!(built.certificates(), loaded.certificates());
    fs::write(cache_path(dir.path(), 1, 3), "{\"garbage\": true}").unwrap();
    let rebuilt = load_or_build_in(dir.path(), 1, 3).unwrap();
    assert_eq!(built.certificates(), rebuilt.certificates());
}
