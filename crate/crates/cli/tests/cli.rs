use std::path::Path;
use std::process::{Command, Output};

const CERTIFY: &str = r#"
command = "certify"
kind = "dirac"
n = 3
m = 1.0

[potential]
preset = "inverse-square"
coupling = 5e-6

[certify]
theorem = "2.3"
"#;

fn bsenclose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsenclose")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn certify_success_writes_report() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", CERTIFY);
    let out = d.path().join("r.json");
    let o = bsenclose(&["certify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["results"]["certificate"]["verdict"], "stable");
    assert_eq!(v["warnings"], serde_json::json!([]));
}

#[test]
fn validation_errors_exit_one_with_paths() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", &CERTIFY.replace("n = 3", "n = 2").replace("m = 1.0", "m = 1.0\nmas = 2"));
    let o = bsenclose(&["certify", "--config", &cfg]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("n: unsupported dimension"), "{err}");
    assert!(err.contains("mas: unknown key"), "{err}");
}

#[test]
fn subcommand_must_match_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", CERTIFY);
    assert_eq!(code(&bsenclose(&["norms", "--config", &cfg])), 1);
}

#[test]
fn inconclusive_exits_three() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", &CERTIFY.replace("5e-6", "1e-2"));
    let o = bsenclose(&["certify", "--config", &cfg]);
    assert_eq!(code(&o), 3);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"]["certificate"]["verdict"], "inconclusive");
}

#[test]
fn oversized_grid_is_a_validation_error() {
    let d = tempfile::tempdir().unwrap();
    let t = CERTIFY.replace("\"certify\"", "\"eig\"") + "\n[grid]\nsamples = 16\n";
    let cfg = write(d.path(), "c.toml", &t);
    let o = bsenclose(&["eig", "--config", &cfg]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_potential_file_is_reported() {
    let d = tempfile::tempdir().unwrap();
    let t = CERTIFY.replace("preset = \"inverse-square\"", "file = \"nope.txt\"");
    let cfg = write(d.path(), "c.toml", &t);
    let o = bsenclose(&["certify", "--config", &cfg]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.txt"));
}

#[test]
fn reruns_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let t = CERTIFY.replace("\"certify\"", "\"scan\"") + "\n[grid]\nsamples = 4\n[scan]\nn_re = 4\nn_im = 3\n";
    let cfg = write(d.path(), "c.toml", &t);
    let mut outputs = vec![];
    for run in ["a", "b"] {
        let out = d.path().join(run).join("scan.json");
        let o = bsenclose(&["scan", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "7"]);
        assert!(matches!(code(&o), 0 | 3), "{}", String::from_utf8_lossy(&o.stderr));
        let json = std::fs::read(&out).unwrap();
        let csv = std::fs::read(d.path().join(run).join("scan.scan.csv")).unwrap();
        outputs.push((json, csv));
    }
    assert_eq!(outputs[0], outputs[1]);
    let v: serde_json::Value = serde_json::from_slice(&outputs[0].0).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["files"], serde_json::json!(["scan.scan.csv"]));
}

#[test]
fn json_configs_are_accepted() {
    let d = tempfile::tempdir().unwrap();
    let t = r#"{"command": "disks", "kind": "dirac", "n": 3, "m": 1.0,
               "potential": {"preset": "bump", "coupling": 1e-6, "radius": 2.0},
               "disks": {"j": 1}}"#;
    let cfg = write(d.path(), "c.json", t);
    let o = bsenclose(&["disks", "--config", &cfg, "--threads", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["results"]["disks"]["r0"].as_f64().unwrap() > 0.0);
}
