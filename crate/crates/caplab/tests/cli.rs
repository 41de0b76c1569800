use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn caplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caplab")).args(args).output().expect("spawn caplab")
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name).display().to_string()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

const SMALL_ANNULUS: &str = r#"
name = "small-annulus"
[geometry]
fixture = "annulus-log"
[grid]
n = 65
[analyses.oracle]
tolerance = 5e-3
[analyses.energy]
"#;

#[test]
fn run_writes_outputs_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a.toml", SMALL_ANNULUS);
    let out1 = tmp.path().join("one");
    let out2 = tmp.path().join("two");
    for out in [&out1, &out2] {
        let o = caplab(&["run", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("small-annulus: PASS"));
    }
    for file in ["field.csv", "report.json"] {
        let a = fs::read(out1.join(file)).unwrap();
        assert_eq!(a, fs::read(out2.join(file)).unwrap(), "{file} differs between runs");
    }
    let csv = fs::read_to_string(out1.join("field.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,kind,re,im"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out1.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["provenance"]["grid"]["n"], 65);
}

#[test]
fn failed_check_exits_one_and_bad_config_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let strict = SMALL_ANNULUS.replace("tolerance = 5e-3", "tolerance = 1e-12");
    let cfg = write_config(tmp.path(), "strict.toml", &strict);
    let o = caplab(&["run", &cfg, "--out", tmp.path().join("s").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL oracle"));

    let typo = SMALL_ANNULUS.replace("annulus-log", "anulus-log");
    let cfg = write_config(tmp.path(), "typo.toml", &typo);
    let o = caplab(&["run", &cfg, "--out", tmp.path().join("t").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    let unknown = format!("{SMALL_ANNULUS}\n[analyses.bogus]\n");
    let cfg = write_config(tmp.path(), "unknown.toml", &unknown);
    assert_eq!(caplab(&["run", &cfg]).status.code(), Some(2));
}

#[test]
fn parallel_jobs_match_sequential() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write_config(tmp.path(), "a.toml", SMALL_ANNULUS);
    let b = scenario("rkc-hexagon.toml");
    let seq = tmp.path().join("seq");
    let par = tmp.path().join("par");
    for (out, jobs) in [(&seq, "1"), (&par, "2")] {
        let o = caplab(&["run", &a, &b, "--grid", "65", "--jobs", jobs, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    }
    for name in ["small-annulus", "rkc-hexagon"] {
        for file in ["field.csv", "report.json", "critical.json"] {
            let p = Path::new(name).join(file);
            if !seq.join(&p).exists() {
                continue;
            }
            assert_eq!(fs::read(seq.join(&p)).unwrap(), fs::read(par.join(&p)).unwrap(), "{}", p.display());
        }
    }
    assert!(par.join("rkc-hexagon/report.json").exists());
}

#[test]
fn fixtures_listing_and_geometry_json() {
    let o = caplab(&["fixtures"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["annulus-log", "capacitor-example", "rkc-disk", "cassini", "pharmonic-annulus"] {
        assert!(text.contains(name), "{name} missing");
    }
    let o = caplab(&["fixtures", "--json", "cassini"]);
    assert!(o.status.success());
    let g: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(g["holes"].as_array().unwrap().len(), 2);
    assert_eq!(caplab(&["fixtures", "--json", "nope"]).status.code(), Some(2));
}

#[test]
fn dump_field_analytic_and_solved_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    let s = tmp.path().join("s.csv");
    assert!(caplab(&["dump-field", "annulus-log", "--grid", "33", "--analytic", "--out", a.to_str().unwrap()]).status.success());
    assert!(caplab(&["dump-field", "annulus-log", "--grid", "33", "--out", s.to_str().unwrap()]).status.success());
    let rows = |p: &Path| -> Vec<Vec<String>> {
        fs::read_to_string(p).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
    };
    let (ra, rs) = (rows(&a), rows(&s));
    assert_eq!(ra.len(), rs.len());
    let worst = ra
        .iter()
        .zip(&rs)
        .map(|(x, y)| (x[3].parse::<f64>().unwrap() - y[3].parse::<f64>().unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 2e-2, "{worst}");
}

#[test]
fn trace_saddle_and_cassini() {
    let o = caplab(&["trace", "saddle:m=3", "--grid", "65"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(c["graph"]["V"], 7);
    assert_eq!(c["graph"]["E"], 6);
    assert_eq!(c["nodes"][0]["degree"], 6);

    let o = caplab(&["trace", "cassini", "--analytic", "--grid", "129"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(c["graph"]["bounded_faces"].as_array().unwrap().len(), 2);
    assert!(c["checks"].as_object().unwrap().values().all(|v| v == "pass"), "{}", c["checks"]);
}
