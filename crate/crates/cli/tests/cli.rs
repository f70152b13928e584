use std::path::Path;
use std::process::{Command, Output};

use gprand_core::genpoly::parse;
use gprand_core::measures::well_distribution;
use gprand_core::sequence::{generate, BinarySequence};

const THM: &str = "sqrt(5)*floor(sqrt(3)*floor(sqrt(2)*x^2))";

fn gprand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gprand"))
        .args(args)
        .env_remove("GPRAND_PRECISION")
        .output()
        .expect("spawn gprand")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn gen_then_welldist_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.seq");
    let p = path.to_str().unwrap();
    let out = gprand(&["gen", "--expr", THM, "--n", "1024", "--out", p]);
    assert!(out.status.success());

    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..6], b"GPSEQ1");
    assert_eq!(u64::from_le_bytes(bytes[6..14].try_into().unwrap()), 1024);
    assert_eq!(bytes.len(), 14 + 128);

    let expected = generate(&parse(THM).unwrap(), 1024, 256).unwrap();
    assert_eq!(BinarySequence::from_bytes(&bytes).unwrap(), expected);

    let rep = well_distribution(&expected, None);
    let v = json(&gprand(&["welldist", "--in", p]));
    assert_eq!(v["w"], rep.w);
    assert_eq!(v["a"], rep.witness.a);
    assert_eq!(v["b"], rep.witness.b);
    assert_eq!(v["m"], rep.witness.m);
    assert_eq!(v["exhaustive"], true);
}

#[test]
fn bounds_spot_values() {
    let v = json(&gprand(&["bounds", "--d", "2", "--t", "1"]));
    assert_eq!((v["prop1"]["aExp"].as_str(), v["prop1"]["nExp"].as_str()), (Some("2/5"), Some("1/7")));
    assert_eq!((v["prop2"]["aExp"].as_str(), v["prop2"]["nExp"].as_str()), (Some("4/11"), Some("1/15")));
    assert_eq!((v["prop3"]["aExp"].as_str(), v["prop3"]["nExp"].as_str()), (Some("3/11"), Some("4/357")));
    assert_eq!(v["threshold"], "1/1764");
    assert_eq!(v["prop1"]["precondAExp"], "1/2");

    let v = json(&gprand(&["bounds", "--d", "2", "--t", "1", "--a", "20", "--n", "100"]));
    assert_eq!(v["evaluated"]["prop1"]["preconditionOk"], false);
    assert!(v["evaluated"]["prop3"]["warning"].is_string());
}

#[test]
fn exit_codes() {
    assert_eq!(gprand(&["gen", "--expr", "x^^2", "--n", "3"]).status.code(), Some(2));
    assert_eq!(gprand(&["bounds", "--d", "1", "--t", "1"]).status.code(), Some(2));
    assert_eq!(gprand(&["nosuchcommand"]).status.code(), Some(2));
    assert_eq!(gprand(&["welldist"]).status.code(), Some(2));
    let exhausted = gprand(&["gen", "--expr", "sqrt(2)*sqrt(2)*x*1/4", "--n", "3", "--out", "/dev/null"]);
    assert_eq!(exhausted.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&exhausted.stderr).contains("n = 1"));
}

#[test]
fn precision_from_environment_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_gprand"))
        .args(["cf", "--x", "sqrt(2)"])
        .env("GPRAND_PRECISION", "16")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_gprand"))
        .args(["cf", "--x", "sqrt(2)", "--count", "4"])
        .env("GPRAND_PRECISION", "512")
        .output()
        .unwrap();
    assert!(ok.status.success());
    assert_eq!(json(&ok)["cf"], "[1; 2, 2, 2]");
}

#[test]
fn scan_csv_header_and_rows() {
    let out = gprand(&["scan", "--expr", THM, "--n-list", "128,256,512"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,W,slopeSoFar,D,prop2Bound,prop3Bound");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("128,"));
}

#[test]
fn thread_count_does_not_change_output() {
    let a = gprand(&["--threads", "1", "welldist", "--expr", THM, "--n", "3000"]);
    let b = gprand(&["--threads", "4", "welldist", "--expr", THM, "--n", "3000"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn disc_erdosturan_and_smooth() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.txt");
    std::fs::write(&pts, "0.1 0.4\n0.7, 0.9\n").unwrap();
    let p = pts.to_str().unwrap();
    let d = json(&gprand(&["disc", "--points", p]));
    let naive = json(&gprand(&["disc", "--points", p, "--naive"]));
    assert!((d["d"].as_f64().unwrap() - naive["d"].as_f64().unwrap()).abs() < 1e-12);
    let et = json(&gprand(&["erdosturan", "--points", p, "--H", "8"]));
    assert_eq!(et["holds"], true);

    let v = json(&gprand(&["smooth", "coeffs", "--tau", "0", "--delta", "0.1", "--K", "2"]));
    let abs: Vec<f64> = v.as_array().unwrap().iter().map(|c| c["abs"].as_f64().unwrap()).collect();
    assert_eq!(abs, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
    let csv = gprand(&["smooth", "eval", "--tau", "0.5", "--delta", "0.05", "--x", "0.1,0.6", "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("x,re,im"));
    assert_eq!(
        gprand(&["smooth", "pnorm", "--tau", "3", "--delta", "0.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn typeprobe_and_expsum() {
    let v = json(&gprand(&["typeprobe", "--gamma", "1/2+sqrt(5)*1/2", "--q", "2000"]));
    let t = v["tHat"].as_f64().unwrap();
    assert!((0.8..1.2).contains(&t), "{t}");
    let z = json(&gprand(&["expsum", "--expr", "x*1/2", "--n", "2", "--h", "1"]));
    assert!(z["abs"].as_f64().unwrap() < 1e-12);
}

#[test]
fn verify_quick_passes() {
    let out = gprand(&["verify", "--quick"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v.as_array().unwrap().iter().all(|r| r["violations"] == 0));
}

#[test]
fn out_flag_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    let out = gprand(&["bounds", "--d", "3", "--t", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert!(Path::new(&path).exists());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["prop1"]["aExp"], "1/3");
    assert_eq!(v["prop1"]["nExp"], "3/26");
}

#[test]
fn leading_minus_expression() {
    let out = gprand(&["welldist", "--expr", "-sqrt(3)*x^3", "--n", "64"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
