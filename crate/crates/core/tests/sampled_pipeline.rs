use bsenclose::cli_report::{parse_config, run, ExitStatus, Format};
use bsenclose::linalg::CMat;
use bsenclose::potential::SampledPotential;
use num_complex::Complex64 as C64;

fn bump_file(dir: &std::path::Path, c: f64) -> String {
    let v = SampledPotential::from_fn(3, 4, 6, 3.0, |x| {
        let r2: f64 = x.iter().map(|t| t * t).sum();
        CMat::identity(4).scale(C64::new(c * (-r2).exp(), 0.0))
    })
    .unwrap();
    std::fs::write(dir.join("v.txt"), v.to_text()).unwrap();
    "v.txt".to_string()
}

fn config(cmd: &str, file: &str, extra: &str) -> String {
    format!(
        "command = \"{cmd}\"\nkind = \"dirac\"\nn = 3\nm = 1.0\n[potential]\nfile = \"{file}\"\n[grid]\nhalf_length = 3.0\nsamples = 6\n{extra}"
    )
}

#[test]
fn sampled_file_runs_through_every_command() {
    let d = tempfile::tempdir().unwrap();
    let f = bump_file(d.path(), 1e-6);
    for (cmd, extra) in [
        ("certify", "[certify]\ntheorem = \"2.5-j1\"\n"),
        ("disks", ""),
        ("norms", ""),
        ("scan", "[scan]\nn_re = 3\nn_im = 3\n"),
    ] {
        let cfg = parse_config(&config(cmd, &f, extra), Format::Toml, None).unwrap();
        let r = run(&cfg, Some(d.path()), None).unwrap_or_else(|e| panic!("{cmd}: {e}"));
        assert_eq!(r.status, ExitStatus::Success, "{cmd}: {:?}", r.warnings);
    }
}

#[test]
fn sampled_disks_shrink_with_the_coupling() {
    let d = tempfile::tempdir().unwrap();
    let mut radii = vec![];
    for c in [1e-7, 1e-6, 1e-5] {
        let f = bump_file(d.path(), c);
        let cfg = parse_config(&config("disks", &f, ""), Format::Toml, None).unwrap();
        let r = run(&cfg, Some(d.path()), None).unwrap();
        radii.push(r.results["disks"]["r0"].as_f64().unwrap());
    }
    assert!(radii.windows(2).all(|w| w[0] < w[1]), "{radii:?}");
}

#[test]
fn dimension_mismatch_is_a_validation_error() {
    let d = tempfile::tempdir().unwrap();
    let f = bump_file(d.path(), 1e-6);
    let cfg = parse_config(&config("norms", &f, "").replace("n = 3", "n = 4"), Format::Toml, None).unwrap();
    let e = run(&cfg, Some(d.path()), None).unwrap_err();
    assert_eq!(e.exit_code(), 1);
}
