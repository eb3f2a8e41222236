use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stabex(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabex"))
        .args(args)
        .env("STABEX_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn extent_named_gates() {
    let tmp = tempfile::tempdir().unwrap();
    let o = stabex(&["extent", "--gate", "ccz"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("extent       1.77778"), "{s}");
    assert!(s.contains("certificate  verified"), "{s}");

    let o = stabex(&["extent", "--gate", "cnp", "--n", "5", "--theta", "3.14159"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("read as pi"), "{s}");
    assert!(s.contains("real-diagonal"), "{s}");
    assert!(s.contains("extent       2.50694"), "{s}");

    let o = stabex(&["extent", "--gate", "t"], tmp.path());
    assert!(stdout(&o).contains("extent       1.17157"));
}

#[test]
fn extent_from_files() {
    let tmp = tempfile::tempdir().unwrap();
    let hg = tmp.path().join("cell.hg");
    fs::write(&hg, "# Union Jack cell\n5\n1,2,5\n2,3,5\n3,4,5\n4,1,5\n").unwrap();
    let o = stabex(&["extent", "--hypergraph", hg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("extent       1.77778"));

    let m = tmp.path().join("t.txt");
    fs::write(&m, "1 0\n0 0.7071067811865476+0.7071067811865476j\n").unwrap();
    let o = stabex(&["extent", "--matrix", m.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("extent       1.17157"));
}

#[test]
fn decomposition_output_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.json");
    let b = tmp.path().join("b.json");
    for out in [&a, &b] {
        let o = stabex(&["extent", "--gate", "ccz", "--out", out.to_str().unwrap()], tmp.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ja = fs::read(&a).unwrap();
    assert_eq!(ja, fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["n"], 3);
    assert!(!v["terms"].as_array().unwrap().is_empty());

    let m: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("a.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "extent");
    assert_eq!(m["options"]["gate"], "ccz");
    assert_eq!(m["dictionaries"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&stabex(&["extent", "--gate", "nope"], tmp.path())), 1);
    assert_eq!(code(&stabex(&["extent"], tmp.path())), 1);
    assert_eq!(code(&stabex(&["extent", "--gate", "cnp", "--n", "2"], tmp.path())), 1);
    assert_eq!(code(&stabex(&["frobnicate"], tmp.path())), 1);
    assert_eq!(code(&stabex(&["extent", "--gate", "t", "--tol", "-1"], tmp.path())), 1);
    // full dictionary is capped at two qubits
    assert_eq!(code(&stabex(&["extent", "--gate", "ccz", "--dict", "full"], tmp.path())), 2);
    assert_eq!(code(&stabex(&["orbits", "--n", "9"], tmp.path())), 2);
    // two interior-point iterations cannot certify anything
    assert_eq!(code(&stabex(&["extent", "--gate", "t", "--dict", "full", "--max-iter", "2"], tmp.path())), 3);
    assert_eq!(code(&stabex(&["--help"], tmp.path())), 0);
}

#[test]
fn counting_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let o = stabex(&["counts", "--n", "4", "--distinct-projections"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.starts_with("category,orbits,distinct_twirls\n0,35,"), "{s}");
    assert!(s.contains("total,996,923"), "{s}");

    let o = stabex(&["counts", "--n", "3", "--graph-reduced"], tmp.path());
    assert_eq!(stdout(&o), "category,count\n0,64\n1,64\n2,64\n3,64\ntotal,256\n");

    let csv = tmp.path().join("c.csv");
    let o = stabex(&["counts", "--n", "2", "--out", csv.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(&csv).unwrap(), "category,count\n0,16\n1,16\ntotal,32\n");
    assert!(tmp.path().join("c.csv.manifest.json").exists());

    let o = stabex(&["orbits", "--n", "4"], tmp.path());
    let s = stdout(&o);
    assert!(s.contains("= 996") && s.contains("= 90"), "{s}");
}

#[test]
fn sweep_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s.csv");
    let o = stabex(&["sweep", "--n", "1", "--points", "41", "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("theta_max 0.250000 pi"), "{}", stdout(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "theta,extent");
    assert_eq!(lines.len(), 42);
    assert!(lines[1].starts_with("0.0"));
    let m: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("s.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["dictionaries"][0]["kind"], "diagonal");
}

#[test]
fn qft_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let o = stabex(&["qft", "--qubits", "5"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("U_2    1.83566"), "{s}");
    assert!(s.contains("U_4    2.03480  given"), "{s}");
    assert!(s.contains("blocked product      11.70"), "{s}");
    assert!(s.contains("T-count ratio        6.4"), "{s}");
    assert_eq!(code(&stabex(&["qft", "--qubits", "6"], tmp.path())), 2);
}

#[test]
fn cache_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("dicts");
    let d = dir.to_str().unwrap();
    let o = stabex(&["cache", "build", "--kind", "real-diagonal", "--n", "3", "--cache-dir", d], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("64 columns"));
    let o = stabex(&["cache", "verify", "--cache-dir", d], tmp.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("real-diagonal-n3.sxd") && stdout(&o).contains("ok"));

    let f = dir.join("real-diagonal-n3.sxd");
    let mut bytes = fs::read(&f).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    fs::write(&f, bytes).unwrap();
    let o = stabex(&["cache", "verify", "--cache-dir", d], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("BAD"));
    assert_eq!(code(&stabex(&["cache", "build", "--kind", "bogus", "--n", "2"], tmp.path())), 1);
}

#[test]
fn property_checks_are_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let a = stabex(&["properties", "--seed", "7", "--trials", "3"], tmp.path());
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b = stabex(&["properties", "--seed", "7", "--trials", "3"], tmp.path());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("subadditive_sqrt"));
}
