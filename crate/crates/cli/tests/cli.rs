use std::path::Path;
use std::process::{Command, Output};

use gbispectrum::io::{read_json, read_signal};
use gbispectrum::{orbit_distance, GroupContext};

fn gbsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbsp")).args(args).output().expect("failed to spawn gbsp")
}

fn ok(args: &[&str]) -> String {
    let out = gbsp(args);
    assert!(out.status.success(), "gbsp {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn random_signal_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    ok(&["random-signal", "--group", "dihedral:5", "--seed", "3", "--out", p(&a)]);
    ok(&["random-signal", "--group", "dihedral:5", "--seed", "3", "--out", p(&b)]);
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("# group=dihedral:5\n"));
    assert_eq!(text.lines().count(), 11);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn compute_and_invert_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for group in ["cyclic:12", "commutative:3,4", "dihedral:6", "octahedral"] {
        let sig = dir.path().join("s.txt");
        let spectra = dir.path().join("b.json");
        let back = dir.path().join("r.txt");
        let report = dir.path().join("report.json");
        ok(&["random-signal", "--group", group, "--seed", "1", "--out", p(&sig)]);
        ok(&["compute", "--mode", "selective", "--signal", p(&sig), "--out", p(&spectra)]);
        ok(&["invert", "--spectra", p(&spectra), "--out", p(&back), "--report", p(&report)]);
        let (s, r) = (read_signal(&sig).unwrap(), read_signal(&back).unwrap());
        let ctx = GroupContext::get(s.kind()).unwrap();
        assert!(orbit_distance(ctx.group(), &r, &s).unwrap() < 1e-6 * s.norm(), "{group}");
        let rep = read_json(&report).unwrap();
        assert_eq!(rep["indeterminacy"], "resolved-to-real");
    }
}

#[test]
fn compute_modes() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("s.txt");
    let out = dir.path().join("o.json");
    ok(&["random-signal", "--group", "cyclic:6", "--out", p(&sig)]);
    for (mode, count) in [("tc", 36), ("full", 36), ("commutative", 36), ("selective", 6)] {
        ok(&["compute", "--mode", mode, "--signal", p(&sig), "--out", p(&out)]);
        let doc = read_json(&out).unwrap();
        assert_eq!(doc["scalar_count"], count, "{mode}");
        assert_eq!(doc["group"], "cyclic:6");
    }
    ok(&["random-signal", "--group", "dihedral:3", "--out", p(&sig)]);
    assert!(!gbsp(&["compute", "--mode", "commutative", "--signal", p(&sig), "--out", p(&out)]).status.success());
}

#[test]
fn kron_table_output() {
    let text = ok(&["kron-table", "--group", "octahedral"]);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0], "10000 01000 00100 00010 00001");
    for row in rows {
        assert_eq!(row.split(' ').count(), 5);
    }
    assert_eq!(ok(&["kron-table", "--group", "full_octahedral"]).lines().count(), 10);
}

#[test]
fn cg_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cg.json");
    let text = ok(&["cg", "--group", "dihedral:5", "--pair", "rho_1,rho_1", "--out", p(&out)]);
    assert!(text.starts_with("rho_1 (x) rho_1 = rho_0 + rho_01 + rho_2\n"));
    assert_eq!(read_json(&out).unwrap()["blocks"].as_array().unwrap().len(), 3);
    assert!(!gbsp(&["cg", "--group", "dihedral:5", "--pair", "rho_1"]).status.success());
    assert!(!gbsp(&["cg", "--group", "dihedral:5", "--pair", "rho_1,T1"]).status.success());
}

#[test]
fn plan_output() {
    let doc: serde_json::Value = serde_json::from_str(&ok(&["plan", "--group", "octahedral"])).unwrap();
    assert_eq!(doc["scalar_count"], 172);
    assert_eq!(doc["pairs"].as_array().unwrap().len(), 4);
    let doc: serde_json::Value = serde_json::from_str(&ok(&["plan", "--group", "full_octahedral"])).unwrap();
    assert_eq!(doc["scalar_count"], 334);
    let doc: serde_json::Value = serde_json::from_str(&ok(&["plan", "--group", "dihedral:7", "--seed", "rho_1"])).unwrap();
    assert_eq!(doc["pairs"].as_array().unwrap().len(), 4);
    assert!(!gbsp(&["plan", "--group", "full_octahedral", "--seed", "rho_1"]).status.success());
}

#[test]
fn recover_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rec.json");
    let text =
        ok(&["recover", "--group", "cyclic:6", "--targets", "2", "--restarts", "2", "--max-iters", "20000", "--out", p(&out)]);
    assert!(text.trim_end().ends_with("targets recovered"));
    let doc = read_json(&out).unwrap();
    assert_eq!(doc["targets"].as_array().unwrap().len(), 2);
    assert_eq!(doc["config"]["max_iters"], 20000);
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let text = ok(&[
        "bench",
        "--family",
        "cyclic",
        "--sizes",
        "8,16,32,64",
        "--modes",
        "selective,max",
        "--repeats",
        "3",
        "--out",
        p(&out),
    ]);
    assert!(text.contains("selective: slope"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("family,n,mode,mean_seconds,std_seconds,median_seconds,repeats,scalar_output_count\n"));
    assert_eq!(csv.lines().count(), 1 + 8);
    assert!(!gbsp(&["bench", "--family", "dihedral", "--sizes", "4", "--modes", "selective_fft", "--out", p(&out)])
        .status
        .success());
}

#[test]
fn bad_arguments_fail() {
    assert!(!gbsp(&["random-signal", "--group", "cyclic:0", "--out", "/dev/null"]).status.success());
    assert!(!gbsp(&["random-signal", "--group", "icosahedral", "--out", "/dev/null"]).status.success());
    assert!(!gbsp(&["compute", "--mode", "tc", "--signal", "/nonexistent", "--out", "/dev/null"]).status.success());
}
