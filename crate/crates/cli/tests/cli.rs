use std::path::PathBuf;
use std::process::{Command, Output};

use toricdual::duality::{builtin_pairs, find_pairs, DualityVerdict, PicardReport, TableRow};
use toricdual_cli::{DualReport, PairCertificates, ReportEnvelope};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toricdual"))
        .args(args)
        .env_remove("TORICDUAL_DATA")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn envelope(o: &Output) -> ReportEnvelope {
    serde_json::from_slice(&o.stdout).expect("stdout is an envelope")
}

fn scratch_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("toricdual-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn dual_of_cube_is_the_octahedron() {
    let o = run(&["dual", data("cube.json").to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0);
    let env = envelope(&o);
    let r: DualReport = serde_json::from_value(env.results).unwrap();
    assert!(r.reflexive);
    assert_eq!(r.l0, Some(0));
    let mut dual = r.dual_vertices.unwrap();
    dual.sort();
    let mut octahedron: Vec<[String; 3]> = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
        .iter()
        .map(|v: &[i64; 3]| v.map(|x| x.to_string()))
        .collect();
    octahedron.sort();
    assert_eq!(dual, octahedron);
}

#[test]
fn dual_of_no50_delta_prime() {
    for f in ["no50_delta_prime.json", "no50_delta_prime_rays.json"] {
        let o = run(&["dual", data(f).to_str().unwrap(), "--require-reflexive"]);
        assert_eq!(code(&o), 0, "{f}");
        let text = stdout(&o);
        assert!(text.contains("polar dual vertices (4)") && text.contains("reflexive: yes"), "{text}");
    }
}

#[test]
fn malformed_json_exits_2() {
    let o = run(&["dual", data("malformed.json").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
    let o = run(&["check-pair", data("malformed.json").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn non_reflexive_exit_3_only_when_required() {
    let f = scratch_file("stretched.json", r#"{"vertices": [[2,0,0],[-1,0,0],[0,1,0],[0,-1,0],[0,0,1],[0,0,-1]]}"#);
    let f = f.to_str().unwrap();
    assert_eq!(code(&run(&["dual", f])), 0);
    assert_eq!(code(&run(&["dual", f, "--require-reflexive"])), 3);
    assert_eq!(code(&run(&["analyze", f])), 3);
}

#[test]
fn analyze_nontrivial_l0_exits_4() {
    let o = run(&["analyze", data("square_bipyramid.json").to_str().unwrap()]);
    assert_eq!(code(&o), 4);
}

#[test]
fn analyze_builtin_sides() {
    let o = run(&["analyze", "--builtin", "35", "--side", "delta-prime"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("Pic = U (2,1)"), "{}", stdout(&o));

    let o = run(&["--json", "analyze", "--builtin", "48"]);
    assert_eq!(code(&o), 0);
    let r: PicardReport = serde_json::from_value(envelope(&o).results).unwrap();
    assert_eq!(r.rank_disc(), [19, 2]);
    assert!(r.split_u.is_some());
}

#[test]
fn check_pair_builtin_15_passes() {
    let o = run(&["check-pair", "--builtin", "15", "--json"]);
    assert_eq!(code(&o), 0);
    let v: Vec<DualityVerdict> = serde_json::from_value(envelope(&o).results).unwrap();
    assert_eq!(v.len(), 1);
    let v = &v[0];
    assert!(v.polytope_dual_ok && v.l0_trivial_ok && v.expected_match_ok && v.lattice_duality_ok);
    assert_eq!(v.certificate_ok, Some(true));
}

#[test]
fn check_pair_all_prints_the_summary_table() {
    let o = run(&["check-pair", "--all"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let n = builtin_pairs().len();
    assert!(text.contains(&format!("{n}/{n} pass")), "{text}");
    // Rows come out in dataset order despite the parallel run.
    let ids: Vec<&str> = text.lines().skip(1).take(n).map(|l| l.split_whitespace().next().unwrap()).collect();
    let expected: Vec<String> = builtin_pairs().into_iter().map(|p| p.id).collect();
    assert_eq!(ids, expected);
}

#[test]
fn negative_control_exits_1() {
    let o = run(&["check-pair", data("mismatched_pair.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn verify_cert_no11_case1() {
    let o = run(&["verify-cert", "--builtin", "11-14/c1", "--json"]);
    assert_eq!(code(&o), 0);
    let r: Vec<PairCertificates> = serde_json::from_value(envelope(&o).results).unwrap();
    assert!(r[0].results.iter().any(|c| c.holds && serde_json::to_string(&c.target).unwrap().contains("U+A1+E8")));
}

#[test]
fn tampered_certificate_fails() {
    let pairs = builtin_pairs();
    let mut pair = find_pairs(&pairs, "11-14/c1")[0].clone();
    let extra = pair.certificates[0].basis[1];
    let v = &mut pair.certificates[0].vectors[0];
    *v = format!("{v}+D{extra}");
    let f = scratch_file("tampered.json", &serde_json::to_string(&pair).unwrap());
    let o = run(&["verify-cert", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn pair_without_certificates_warns() {
    let o = run(&["verify-cert", data("pair_without_certificates.json").to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0);
    let env = envelope(&o);
    assert!(env.warnings.iter().any(|w| w.contains("no certificates")));
}

#[test]
fn table_recomputes_every_row() {
    let o = run(&["table", "--json"]);
    assert_eq!(code(&o), 0);
    let rows: Vec<TableRow> = serde_json::from_value(envelope(&o).results).unwrap();
    let row = rows.iter().find(|r| r.id == "38-40/c1").unwrap();
    assert_eq!((row.pic_delta.as_str(), row.rank_disc_delta), ("U⊕E7⊕E8", Some([17, 2])));
    assert_eq!(row.rank_disc_delta_prime, Some([3, 2]));
}

#[test]
fn json_is_key_sorted_and_round_trips() {
    let o = run(&["--json", "check-pair", "--builtin", "50"]);
    let text = stdout(&o);
    let env = envelope(&o);
    assert_eq!(env.to_json().trim_end(), text.trim_end());
    let keys: Vec<&str> = text.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim().split('"').nth(1).unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let v: Vec<DualityVerdict> = serde_json::from_value(env.results.clone()).unwrap();
    assert_eq!(serde_json::to_value(&v).unwrap(), env.results);
}

#[test]
fn data_env_overrides_the_builtin_dataset() {
    let pairs = builtin_pairs();
    let only = vec![find_pairs(&pairs, "50")[0].clone()];
    let f = scratch_file("dataset.json", &serde_json::to_string(&only).unwrap());
    let o = Command::new(env!("CARGO_BIN_EXE_toricdual"))
        .args(["table"])
        .env("TORICDUAL_DATA", &f)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("1/1 pass"));
}

#[test]
fn unknown_builtin_is_an_input_error() {
    assert_eq!(code(&run(&["check-pair", "--builtin", "999"])), 2);
}
