use super::config::{Command, PotentialConfig, RunConfig};
use super::{CliError, CsvFile, ExitStatus, Report};
use crate::birman_schwinger::{bs_scan, BsError, ScanOptions, ScanRect};
use crate::clifford::build_clifford;
use crate::enclosure::{
    certify, c2, enclosure_disks, Certificate, CertifyParams, ConstantsReport, DiskPair, EnclosureError, NormEntry,
    TheoremId, Verdict,
};
use crate::estimate_bench::{horizontal_path, run_benches, uniformity_probe, BenchConfig, BenchError, BenchReport};
use crate::grid::{assemble_perturbed, GridError, GridSpec, OperatorKind, DEFAULT_DENSE_LIMIT};
use crate::linalg::{eigenvalues, EigenOptions, PowerOptions};
use crate::potential::{PotentialSpec, SampledPotential, WeightedPotential};
use crate::weights_norms::{
    dyadic_norm, DyadicOptions, Exponent, Factor, NormError, NormResult, RadialField, RadialProfile, WeightSpec,
};
use num_complex::Complex64 as C64;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;

/// Executes `cfg`. Relative potential files are resolved against `base`;
/// `out` only decides whether CSV siblings are produced.
pub fn run(cfg: &RunConfig, base: Option<&Path>, out: Option<&Path>) -> Result<Report, CliError> {
    let mut r = Report {
        command: cfg.command,
        config: cfg.echo(),
        results: Value::Null,
        timing: json!({}),
        warnings: vec![],
        csv: vec![],
        status: ExitStatus::Success,
    };
    match cfg.command {
        Command::Certify => run_certify(cfg, base, &mut r)?,
        Command::Disks => run_disks(cfg, base, &mut r)?,
        Command::Scan => run_scan(cfg, base, &mut r)?,
        Command::Eig => run_eig(cfg, base, &mut r)?,
        Command::Bench => run_bench_cmd(cfg, &mut r)?,
        Command::Norms => run_norms(cfg, base, &mut r)?,
    }
    if out.is_none() && !r.csv.is_empty() {
        let names: Vec<&str> = r.csv.iter().map(|c| c.suffix.as_str()).collect();
        r.warnings.push(format!("no output path: CSV data not written ({})", names.join(", ")));
        r.csv.clear();
    }
    Ok(r)
}

fn spin(kind: OperatorKind, n: usize) -> Result<usize, CliError> {
    match kind {
        OperatorKind::Dirac => Ok(build_clifford(n).map_err(|e| CliError::Validation(e.to_string()))?.size()),
        _ => Ok(1),
    }
}

fn build_potential(cfg: &RunConfig, base: Option<&Path>) -> Result<PotentialSpec, CliError> {
    let p: &PotentialConfig = cfg.potential.as_ref().ok_or_else(|| CliError::Validation("no potential".into()))?;
    let size = spin(cfg.kind, cfg.n)?;
    let bad = |e: String| CliError::Validation(format!("potential: {e}"));
    if let Some(shape) = p.preset {
        return PotentialSpec::preset(shape, cfg.n, size, C64::new(p.coupling, p.coupling_im), p.radius, p.sigma)
            .map_err(|e| bad(e.to_string()));
    }
    let file = p.file.as_deref().ok_or_else(|| bad("give a preset or a file".into()))?;
    let path = match base {
        Some(b) if Path::new(file).is_relative() => b.join(file),
        _ => Path::new(file).to_path_buf(),
    };
    let data = SampledPotential::read(&path).map_err(|e| bad(e.to_string()))?.with_outside_zero(p.outside_zero);
    if data.dim() != cfg.n {
        return Err(bad(format!("file is {}-dimensional but n = {}", data.dim(), cfg.n)));
    }
    if data.size() != size {
        return Err(bad(format!("file has {0}x{0} values but the {1} operator needs {2}x{2}", data.size(), cfg.kind, size)));
    }
    Ok(PotentialSpec::sampled(data))
}

fn dyadic(cfg: &RunConfig) -> DyadicOptions {
    DyadicOptions { j_min: cfg.j_min, j_max: cfg.j_max, ..Default::default() }
}

fn grid(cfg: &RunConfig) -> Result<GridSpec, CliError> {
    GridSpec::new(cfg.n, cfg.half_length, cfg.samples, spin(cfg.kind, cfg.n)?).map_err(|e| CliError::Validation(e.to_string()))
}

fn enclosure_err(e: EnclosureError) -> CliError {
    match e {
        EnclosureError::Norm(NormError::Divergent { .. }) => CliError::Computation(e.to_string()),
        _ => CliError::Validation(e.to_string()),
    }
}

fn grid_err(e: GridError) -> CliError {
    match e {
        GridError::TooLarge { .. } | GridError::SpinMismatch { .. } | GridError::Invalid(_) => {
            CliError::Validation(e.to_string())
        }
        _ => CliError::Computation(e.to_string()),
    }
}

fn bs_err(e: BsError) -> CliError {
    match e {
        BsError::Grid(g) => grid_err(g),
        BsError::InvalidScan(s) => CliError::Validation(s),
        e => CliError::Computation(e.to_string()),
    }
}

fn bench_err(e: BenchError) -> CliError {
    match e {
        BenchError::Grid(g) => grid_err(g),
        e => CliError::Validation(e.to_string()),
    }
}

fn complex(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, |v| json!(v))
}

fn norm_json(name: &str, r: &NormResult) -> Value {
    json!({
        "name": name,
        "value": r.value,
        "upper": opt(r.upper()),
        "tail_bound": opt(r.tail_bound),
        "p": r.p.label(),
        "q": r.q.label(),
        "j_min": r.j_min,
        "j_max": r.j_max,
        "per_annulus": r.per_annulus,
        "samples": r.total_samples(),
    })
}

fn tail_warnings(name: &str, r: &NormResult, w: &mut Vec<String>) {
    if r.tail_bound.is_none() {
        w.push(format!("{name}: no bound on the annuli outside [{}, {}]", r.j_min, r.j_max));
    }
}

fn constants_json(c: &ConstantsReport) -> Value {
    json!({
        "n": c.n,
        "m": c.m,
        "C1": c.c1,
        "C2": c.c2,
        "C3": opt(c.c3),
        "kato_yajima": c.kato_yajima,
        "rho_l2_linf": if c.rho_l2_linf.is_finite() { json!(c.rho_l2_linf) } else { Value::Null },
        "rho_sqrt_linf": opt(c.rho_sqrt_linf),
    })
}

fn disks_json(d: &DiskPair) -> Value {
    json!({
        "j": d.j,
        "m": d.m,
        "x0_plus": d.x0_plus,
        "x0_minus": d.x0_minus,
        "r0": d.r0,
        "V_j": if d.v_j.is_finite() { json!(d.v_j) } else { json!("inf") },
        "N_j": d.n_j,
        "C2": d.c2,
    })
}

fn certificate_json(c: &Certificate) -> Value {
    json!({
        "theorem": c.theorem.id(),
        "verdict": c.verdict.id(),
        "reason": c.reason,
        "n": c.n,
        "m": c.m,
        "norms": c.norms.iter().map(|e: &NormEntry| norm_json(&e.name, &e.result)).collect::<Vec<_>>(),
        "constants": c.constants.as_ref().map_or(Value::Null, constants_json),
        "lhs": opt(c.lhs),
        "threshold": opt(c.threshold),
        "disks": c.disks.as_ref().map_or(Value::Null, disks_json),
        "provenance": c.provenance,
    })
}

fn finish_certificate(c: &Certificate, r: &mut Report) {
    for e in &c.norms {
        tail_warnings(&e.name, &e.result, &mut r.warnings);
    }
    if c.verdict == Verdict::Inconclusive {
        r.status = ExitStatus::Inconclusive;
        r.warnings.push(format!("inconclusive: {}", c.reason));
    }
    let samples: usize = c.norms.iter().map(|e| e.result.total_samples()).sum();
    r.timing = json!({ "norm_samples": samples });
}

fn uses_rho(t: TheoremId) -> bool {
    matches!(t, TheoremId::Weighted | TheoremId::DisksWeighted)
}

fn run_certify(cfg: &RunConfig, base: Option<&Path>, r: &mut Report) -> Result<(), CliError> {
    let theorem = cfg.theorem.ok_or_else(|| CliError::Validation("certify needs a theorem".into()))?;
    let v = build_potential(cfg, base)?;
    let params = CertifyParams {
        m: cfg.m,
        epsilon: cfg.weight.epsilon,
        sigma: cfg.weight.sigma,
        rho: uses_rho(theorem).then(|| cfg.weight.spec()),
        dyadic: dyadic(cfg),
    };
    let c = certify(theorem, &v, &params).map_err(enclosure_err)?;
    if matches!(theorem, TheoremId::KleinGordon | TheoremId::DiracMassless | TheoremId::DiracMassive) {
        r.warnings.push(format!("theorem {theorem}: the smallness threshold is not explicit, only the norm is reported"));
    }
    finish_certificate(&c, r);
    r.results = json!({ "certificate": certificate_json(&c), "potential": v.label, "fingerprint": v.fingerprint() });
    Ok(())
}

fn disks_for(cfg: &RunConfig, v: &PotentialSpec) -> Result<Certificate, CliError> {
    let rho = (cfg.j == 2).then(|| cfg.weight.spec());
    enclosure_disks(v, cfg.m, cfg.j, rho, &dyadic(cfg)).map_err(enclosure_err)
}

fn run_disks(cfg: &RunConfig, base: Option<&Path>, r: &mut Report) -> Result<(), CliError> {
    let v = build_potential(cfg, base)?;
    let c = disks_for(cfg, &v)?;
    finish_certificate(&c, r);
    let lhs = c.lhs.unwrap_or(f64::NAN);
    r.results = json!({
        "certificate": certificate_json(&c),
        "disks": c.disks.as_ref().map_or(Value::Null, disks_json),
        "admissible": c.disks.is_some(),
        "two_C2_N": opt(c.lhs.filter(|_| lhs.is_finite())),
        "C2": c2(cfg.n),
    });
    Ok(())
}

/// Disks for the Dirac cross-checks, when the potential admits them.
fn optional_disks(cfg: &RunConfig, v: &PotentialSpec, w: &mut Vec<String>) -> Result<Option<DiskPair>, CliError> {
    if cfg.kind != OperatorKind::Dirac || cfg.m <= 0.0 {
        return Ok(None);
    }
    let c = disks_for(cfg, v)?;
    if c.disks.is_none() {
        w.push(format!("no enclosure disks for comparison: {}", c.reason));
    }
    Ok(c.disks)
}

fn run_scan(cfg: &RunConfig, base: Option<&Path>, r: &mut Report) -> Result<(), CliError> {
    let v = build_potential(cfg, base)?;
    let g = grid(cfg)?;
    let s = &cfg.scan;
    let rect = ScanRect { re_min: s.re_min, re_max: s.re_max, im_min: s.im_min, im_max: s.im_max, n_re: s.n_re, n_im: s.n_im };
    let opts = ScanOptions { power: PowerOptions { tol: s.tol, seed: cfg.seed, ..Default::default() }, cutoff: s.cutoff };
    let scan = bs_scan(cfg.kind, cfg.m, &v, &g, &rect, &opts).map_err(bs_err)?;
    let disks = optional_disks(cfg, &v, &mut r.warnings)?;
    if !scan.excluded.is_empty() {
        r.warnings.push(format!("{} points excluded as too close to the grid spectrum", scan.excluded.len()));
    }
    if !scan.unconverged.is_empty() {
        r.warnings.push(format!(
            "{} points did not reach tolerance {:e}; best estimates reported",
            scan.unconverged.len(),
            s.tol
        ));
    }
    let finite: Vec<f64> = scan.values.iter().copied().filter(|x| !x.is_nan()).collect();
    let region = scan.region();
    let outside = disks.as_ref().map(|d| scan.outside(d, 1e-9));
    if let Some(o) = &outside {
        r.warnings.push(format!("points with |Im z| <= {} are not compared with the disks", s.cutoff));
        if !o.is_empty() {
            r.status = ExitStatus::Inconclusive;
        }
    }
    r.results = json!({
        "points": scan.values.len(),
        "excluded": scan.excluded.iter().copied().map(complex).collect::<Vec<_>>(),
        "unconverged": scan.unconverged.len(),
        "max_norm": opt(finite.iter().copied().reduce(f64::max)),
        "min_norm": opt(finite.iter().copied().reduce(f64::min)),
        "region_points": region.len(),
        "region_bounding_box": scan.bounding_box().map_or(Value::Null, |(a, b, c, d)| {
            json!({ "re_min": a, "re_max": b, "im_min": c, "im_max": d })
        }),
        "disks": disks.as_ref().map_or(Value::Null, disks_json),
        "outside_disks": outside.map_or(Value::Null, |o| o.into_iter().map(complex).collect()),
        "potential_hash": scan.potential_hash,
        "grid": grid_json(&g),
    });
    r.timing = json!({ "power_iterations": scan.iterations });
    r.csv.push(CsvFile { suffix: "scan.csv".into(), contents: scan.to_csv() });
    Ok(())
}

fn grid_json(g: &GridSpec) -> Value {
    json!({ "n": g.n(), "half_length": g.half_length(), "samples": g.samples(), "spin": g.spin(), "dof": g.dof() })
}

fn run_eig(cfg: &RunConfig, base: Option<&Path>, r: &mut Report) -> Result<(), CliError> {
    let v = build_potential(cfg, base)?;
    let g = grid(cfg)?;
    let h = assemble_perturbed(cfg.kind, cfg.m, Some(&v), &g, DEFAULT_DENSE_LIMIT).map_err(grid_err)?;
    let e = eigenvalues(&h, &EigenOptions::default()).map_err(|e| CliError::Computation(e.to_string()))?;
    let disks = optional_disks(cfg, &v, &mut r.warnings)?;
    let cutoff = cfg.scan.cutoff;
    let nonreal: Vec<C64> = e.values.iter().copied().filter(|z| z.im.abs() > cutoff).collect();
    let outside: Option<Vec<C64>> =
        disks.as_ref().map(|d| nonreal.iter().copied().filter(|z| !d.contains(*z, 1e-9)).collect());
    if outside.as_ref().is_some_and(|o| !o.is_empty()) {
        r.status = ExitStatus::Inconclusive;
    }
    let mut csv = String::from("re,im\n");
    for z in &e.values {
        let _ = writeln!(csv, "{:.11e},{:.11e}", z.re, z.im);
    }
    let re = e.values.iter().map(|z| z.re);
    r.results = json!({
        "dimension": h.rows(),
        "count": e.values.len(),
        "re_min": opt(re.clone().reduce(f64::min)),
        "re_max": opt(re.reduce(f64::max)),
        "max_abs_im": e.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
        "max_residual": e.max_residual,
        "residuals_checked": e.checked,
        "nonreal_cutoff": cutoff,
        "nonreal": nonreal.iter().copied().map(complex).collect::<Vec<_>>(),
        "disks": disks.as_ref().map_or(Value::Null, disks_json),
        "outside_disks": outside.map_or(Value::Null, |o| o.into_iter().map(complex).collect()),
        "grid": grid_json(&g),
    });
    r.timing = json!({ "qr_iterations": e.qr_iterations });
    r.csv.push(CsvFile { suffix: "spectrum.csv".into(), contents: csv });
    Ok(())
}

fn bench_json(b: &BenchReport) -> Value {
    json!({
        "id": b.id.id(),
        "trials": b.trials,
        "discarded": b.discarded,
        "z_count": b.z.len(),
        "max_ratio": b.max_ratio,
        "worst_z": b.worst_z.map_or(Value::Null, complex),
        "paper_constant": opt(b.stated_constant),
        "slack": b.slack,
        "pass": b.pass,
        "grid": { "n": b.grid.0, "half_length": b.grid.1, "samples": b.grid.2, "spin": b.grid.3 },
        "epsilon_sweep": b.epsilon_sweep.iter().map(|(e, m)| json!({ "epsilon": e, "max_ratio": m })).collect::<Vec<_>>(),
    })
}

fn run_bench_cmd(cfg: &RunConfig, r: &mut Report) -> Result<(), CliError> {
    let b = &cfg.bench;
    let bc = BenchConfig {
        n: cfg.n,
        half_length: cfg.half_length,
        samples: cfg.samples,
        m: cfg.m,
        trials: b.trials,
        z_count: b.z_count,
        slack: b.slack,
        epsilon: b.epsilon,
        sigma: b.sigma,
        seed: cfg.seed,
        real_fields: b.real_fields,
        rho: cfg.weight.spec(),
    };
    let ids = b.estimate.ids();
    let reports = run_benches(&ids, &bc, None).map_err(bench_err)?;
    let mut applications = 0;
    let mut seen_apps = std::collections::BTreeSet::new();
    for rep in &reports {
        // Estimates of one family share their sweep and its counter.
        if seen_apps.insert((rep.id.kind().id(), rep.resolvent_applications)) {
            applications += rep.resolvent_applications;
        }
        if rep.pass == Some(false) {
            r.status = ExitStatus::Inconclusive;
            r.warnings.push(format!(
                "{}: max ratio {:.4e} exceeds {:.4e} x (1 + {})",
                rep.id,
                rep.max_ratio,
                rep.stated_constant.unwrap_or(f64::NAN),
                rep.slack
            ));
        }
        if rep.discarded > 0 {
            r.warnings.push(format!("{}: {} trial evaluations discarded", rep.id, rep.discarded));
        }
        r.csv.push(CsvFile { suffix: format!("{}.series.csv", rep.id), contents: rep.series_csv() });
    }
    let mut probes = vec![];
    if b.probe {
        let path = horizontal_path(0.1, 10.0, 0.05, b.z_count);
        for id in &ids {
            let p = uniformity_probe(*id, &bc, &path).map_err(bench_err)?;
            if p.flagged {
                r.warnings.push(format!("{id}: ratio grows by {:.3} along the probe path", p.growth));
            }
            probes.push(json!({ "id": id.id(), "growth": p.growth, "flagged": p.flagged }));
            r.csv.push(CsvFile { suffix: format!("{id}.probe.csv"), contents: p.series_csv() });
        }
    }
    r.results = json!({
        "estimates": reports.iter().map(bench_json).collect::<Vec<_>>(),
        "probes": probes,
        "all_pass": reports.iter().all(|x| x.pass != Some(false)),
    });
    r.timing = json!({ "resolvent_applications": applications });
    Ok(())
}

fn run_norms(cfg: &RunConfig, base: Option<&Path>, r: &mut Report) -> Result<(), CliError> {
    let v = build_potential(cfg, base)?;
    let opts = dyadic(cfg);
    let n = cfg.n;
    let inf = Exponent::Infinity;
    let radius = |e: f64| RadialProfile::constant(1.0).with(Factor::Radius, e);
    let w = &cfg.weight;
    let rho = match w.kind {
        super::WeightKind::Rho1 | super::WeightKind::Rho2 | super::WeightKind::Power => w.spec(),
        _ => crate::enclosure::default_rho(),
    };
    let xv = WeightedPotential::new(&v, radius(1.0));
    let tau = WeightedPotential::new(&v, WeightSpec::Tau { epsilon: w.epsilon }.profile().powf(2.0));
    let ws = WeightedPotential::new(&v, WeightSpec::WSigma { sigma: w.sigma }.profile());
    let xrho = WeightedPotential::new(&v, radius(1.0).mul(&rho.profile().powf(-2.0)));
    let rho_f = RadialField { n, profile: rho.profile() };
    let rho_s = RadialField { n, profile: rho.profile().with(Factor::Radius, 0.5) };
    let table: Vec<(&str, Result<NormResult, NormError>)> = vec![
        ("|| |x| V ||_(l1 Linf)", dyadic_norm(&xv, Exponent::One, inf, &opts)),
        ("|| |x| V ||_(l2 Linf)", dyadic_norm(&xv, Exponent::Two, inf, &opts)),
        ("||tau_eps^2 V||_inf", dyadic_norm(&tau, inf, inf, &opts)),
        ("||w_sigma V||_inf", dyadic_norm(&ws, inf, inf, &opts)),
        ("|| |x| rho^-2 V ||_inf", dyadic_norm(&xrho, inf, inf, &opts)),
        ("||rho||_(l2 Linf)", dyadic_norm(&rho_f, Exponent::Two, inf, &opts)),
        ("|| |x|^(1/2) rho ||_inf", dyadic_norm(&rho_s, inf, inf, &opts)),
    ];
    let mut rows = vec![];
    let mut samples = 0;
    for (name, res) in table {
        match res {
            Ok(nr) => {
                tail_warnings(name, &nr, &mut r.warnings);
                samples += nr.total_samples();
                rows.push(norm_json(name, &nr));
            }
            Err(e @ NormError::Divergent { .. }) => {
                r.warnings.push(format!("{name}: {e}"));
                rows.push(json!({ "name": name, "value": null, "upper": null, "divergent": true }));
            }
            Err(e) => return Err(CliError::Computation(format!("{name}: {e}"))),
        }
    }
    r.results = json!({
        "norms": rows,
        "rho": format!("{rho:?}"),
        "potential": v.label,
        "fingerprint": v.fingerprint(),
        "hermitian": v.is_hermitian(),
    });
    r.timing = json!({ "norm_samples": samples });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{parse_config, Format};
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        parse_config(text, Format::Toml, None).unwrap()
    }

    const CERT: &str = r#"
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

    #[test]
    fn certify_stable_for_a_small_potential() {
        let r = run(&cfg(CERT), None, None).unwrap();
        assert_eq!(r.status, ExitStatus::Success);
        assert_eq!(r.results["certificate"]["verdict"], "stable");
        let big = run(&cfg(&CERT.replace("5e-6", "1e-3")), None, None).unwrap();
        assert_eq!(big.status, ExitStatus::Inconclusive);
    }

    #[test]
    fn disks_have_all_fields() {
        let t = CERT.replace("\"certify\"", "\"disks\"").replace("5e-6", "1e-5");
        let r = run(&cfg(&t), None, None).unwrap();
        let d = &r.results["disks"];
        for k in ["x0_plus", "x0_minus", "r0", "V_j", "N_j", "C2"] {
            assert!(d.get(k).is_some_and(|v| !v.is_null()), "missing {k}");
        }
        assert_eq!(r.status, ExitStatus::Success);
    }

    #[test]
    fn reports_are_deterministic() {
        let t = CERT.replace("\"certify\"", "\"scan\"")
            + "[grid]\nsamples = 4\n[scan]\nn_re = 3\nn_im = 3\n";
        let c = cfg(&t);
        let out = Path::new("x/run.json");
        let a = run(&c, None, Some(out)).unwrap();
        let b = run(&c, None, Some(out)).unwrap();
        assert_eq!(a.to_json(Some(out)), b.to_json(Some(out)));
        assert_eq!(a.csv, b.csv);
        assert_eq!(a.csv[0].suffix, "scan.csv");
    }

    #[test]
    fn echoed_config_reruns_identically() {
        let c = cfg(CERT);
        let r = run(&c, None, None).unwrap();
        let text = serde_json::to_string(&r.config).unwrap();
        let c2 = parse_config(&text, Format::Json, None).unwrap();
        assert_eq!(c2, c);
        assert_eq!(run(&c2, None, None).unwrap().to_json(None), r.to_json(None));
    }

    #[test]
    fn norms_table_lists_every_norm() {
        let t = CERT.replace("\"certify\"", "\"norms\"");
        let r = run(&cfg(&t), None, None).unwrap();
        let rows = r.results["norms"].as_array().unwrap();
        assert_eq!(rows.len(), 7);
        let n1 = rows[0]["value"].as_f64().unwrap();
        // sum over j of 2^j / (1 + 2^{j-1})^2 times the coupling, up to the sup position
        assert!(n1 > 0.0 && n1 < 10.0 * 5e-6, "{n1}");
    }

    #[test]
    fn stdout_runs_drop_csv_with_a_warning() {
        let t = CERT.replace("\"certify\"", "\"eig\"") + "[grid]\nsamples = 4\n";
        let r = run(&cfg(&t), None, None).unwrap();
        assert!(r.csv.is_empty());
        assert!(r.warnings.iter().any(|w| w.contains("CSV")));
        assert_eq!(r.results["count"], 4 * 4 * 4 * 4);
    }
}
