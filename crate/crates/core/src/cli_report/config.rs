//! Run configuration: strict parsing of TOML or JSON documents.
//!
//! Every key is checked against the schema and all problems are collected
//! before failing, each tagged with its dotted path. Defaults that depend on
//! the command or theorem are resolved here, so the echo of a parsed config
//! parses back to the same value.

use crate::enclosure::TheoremId;
use crate::estimate_bench::EstimateId;
use crate::grid::OperatorKind;
use crate::potential::Shape;
use crate::weights_norms::WeightSpec;
use serde_json::{json, Map, Value};
use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Certify,
    Disks,
    Scan,
    Eig,
    Bench,
    Norms,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Certify, Command::Disks, Command::Scan, Command::Eig, Command::Bench, Command::Norms];

    pub fn id(self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Disks => "disks",
            Command::Scan => "scan",
            Command::Eig => "eig",
            Command::Bench => "bench",
            Command::Norms => "norms",
        }
    }

    fn needs_potential(self) -> bool {
        !matches!(self, Command::Bench)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| format!("unknown command '{s}', expected certify, disks, scan, eig, bench or norms"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", if self.path.is_empty() { "<root>" } else { &self.path }, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    /// JSON for `.json` paths, TOML otherwise.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialConfig {
    pub preset: Option<Shape>,
    pub file: Option<String>,
    pub coupling: f64,
    pub coupling_im: f64,
    pub radius: f64,
    pub sigma: f64,
    pub outside_zero: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    Tau,
    WSigma,
    Rho1,
    Rho2,
    Power,
}

impl WeightKind {
    const ALL: [WeightKind; 5] = [WeightKind::Tau, WeightKind::WSigma, WeightKind::Rho1, WeightKind::Rho2, WeightKind::Power];

    pub fn id(self) -> &'static str {
        match self {
            WeightKind::Tau => "tau",
            WeightKind::WSigma => "w_sigma",
            WeightKind::Rho1 => "rho1",
            WeightKind::Rho2 => "rho2",
            WeightKind::Power => "power",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightConfig {
    pub kind: WeightKind,
    pub epsilon: f64,
    pub delta: f64,
    pub sigma: f64,
    pub exponent: f64,
}

impl WeightConfig {
    pub fn spec(&self) -> WeightSpec {
        match self.kind {
            WeightKind::Tau => WeightSpec::Tau { epsilon: self.epsilon },
            WeightKind::WSigma => WeightSpec::WSigma { sigma: self.sigma },
            WeightKind::Rho1 => WeightSpec::Rho1 { sigma: self.sigma },
            WeightKind::Rho2 => WeightSpec::Rho2 { epsilon: self.epsilon, delta: self.delta },
            WeightKind::Power => WeightSpec::Power { exponent: self.exponent },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
    pub tol: f64,
    pub cutoff: f64,
}

/// Which estimates a bench run covers.
#[derive(Clone, Debug, PartialEq)]
pub enum EstimateSelection {
    Explicit,
    All,
    One(EstimateId),
}

impl EstimateSelection {
    pub fn ids(&self) -> Vec<EstimateId> {
        match self {
            EstimateSelection::Explicit => EstimateId::explicit_ids(),
            EstimateSelection::All => EstimateId::ALL.to_vec(),
            EstimateSelection::One(id) => vec![*id],
        }
    }

    fn id(&self) -> &'static str {
        match self {
            EstimateSelection::Explicit => "explicit",
            EstimateSelection::All => "all",
            EstimateSelection::One(id) => id.id(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSection {
    pub estimate: EstimateSelection,
    pub trials: usize,
    pub z_count: usize,
    pub slack: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub probe: bool,
    pub real_fields: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub kind: OperatorKind,
    pub n: usize,
    pub m: f64,
    pub seed: u64,
    pub output: Option<String>,
    pub potential: Option<PotentialConfig>,
    pub weight: WeightConfig,
    pub theorem: Option<TheoremId>,
    pub j: u8,
    pub half_length: f64,
    pub samples: usize,
    pub scan: ScanConfig,
    pub bench: BenchSection,
    pub j_min: i32,
    pub j_max: i32,
}

struct Ctx {
    errors: RefCell<Vec<ConfigError>>,
}

impl Ctx {
    fn err(&self, path: &str, msg: impl Into<String>) {
        self.errors.borrow_mut().push(ConfigError { path: path.to_string(), message: msg.into() });
    }
}

/// One table of the document with the keys read so far.
struct Table<'a> {
    ctx: &'a Ctx,
    prefix: String,
    map: Option<&'a Map<String, Value>>,
    allowed: &'static [&'static str],
    seen: RefCell<BTreeSet<String>>,
}

impl<'a> Table<'a> {
    fn new(ctx: &'a Ctx, prefix: &str, v: Option<&'a Value>, allowed: &'static [&'static str]) -> Self {
        let map = match v {
            None => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                ctx.err(prefix, "expected a table");
                None
            }
        };
        let t = Table { ctx, prefix: prefix.to_string(), map, allowed, seen: RefCell::new(BTreeSet::new()) };
        if let Some(m) = map {
            for k in m.keys() {
                if !allowed.contains(&k.as_str()) {
                    ctx.err(&t.path(k), format!("unknown key; allowed keys are {}", allowed.join(", ")));
                }
            }
        }
        t
    }

    fn path(&self, key: &str) -> String {
        if self.prefix.is_empty() { key.to_string() } else { format!("{}.{key}", self.prefix) }
    }

    fn present(&self) -> bool {
        self.map.is_some()
    }

    fn raw(&self, key: &str) -> Option<&'a Value> {
        debug_assert!(self.allowed.contains(&key), "schema is missing {key}");
        self.seen.borrow_mut().insert(key.to_string());
        self.map.and_then(|m| m.get(key))
    }

    fn has(&self, key: &str) -> bool {
        self.map.is_some_and(|m| m.contains_key(key))
    }

    fn f64(&self, key: &str) -> Option<f64> {
        match self.raw(key)? {
            Value::Number(n) => match n.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.ctx.err(&self.path(key), "must be a finite number");
                    None
                }
            },
            _ => {
                self.ctx.err(&self.path(key), "must be a number");
                None
            }
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> f64 {
        self.f64(key).unwrap_or(default)
    }

    fn u64(&self, key: &str) -> Option<u64> {
        match self.raw(key)? {
            Value::Number(n) if n.as_u64().is_some() => n.as_u64(),
            _ => {
                self.ctx.err(&self.path(key), "must be a non-negative integer");
                None
            }
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> usize {
        self.u64(key).map_or(default, |v| v as usize)
    }

    fn i64(&self, key: &str) -> Option<i64> {
        match self.raw(key)? {
            Value::Number(n) if n.as_i64().is_some() => n.as_i64(),
            _ => {
                self.ctx.err(&self.path(key), "must be an integer");
                None
            }
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> bool {
        match self.raw(key) {
            None => default,
            Some(Value::Bool(b)) => *b,
            Some(_) => {
                self.ctx.err(&self.path(key), "must be true or false");
                default
            }
        }
    }

    fn str(&self, key: &str) -> Option<&'a str> {
        match self.raw(key)? {
            Value::String(s) => Some(s),
            _ => {
                self.ctx.err(&self.path(key), "must be a string");
                None
            }
        }
    }

    fn parsed<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        let s = self.str(key)?;
        match parse(s) {
            Ok(v) => Some(v),
            Err(e) => {
                self.ctx.err(&self.path(key), e);
                None
            }
        }
    }

    fn require(&self, key: &str) {
        if !self.has(key) {
            self.ctx.err(&self.path(key), "missing required field");
        }
    }

    fn check(&self, key: &str, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.ctx.err(&self.path(key), msg);
        }
    }
}

/// Largest seed; TOML integers are signed 64-bit.
pub const MAX_SEED: u64 = i64::MAX as u64;

const TOP: &[&str] = &[
    "command", "kind", "n", "m", "seed", "output", "potential", "weight", "certify", "disks", "grid", "scan", "bench",
    "norms",
];

/// Parses a document into a [`RunConfig`]. `command` overrides (and must agree
/// with) the `command` key.
pub fn parse_config(text: &str, format: Format, command: Option<Command>) -> Result<RunConfig, ConfigErrors> {
    let doc: Value = match format {
        Format::Json => serde_json::from_str(text).map_err(|e| one("", format!("invalid JSON: {e}")))?,
        Format::Toml => {
            let t: toml::Table = toml::from_str(text).map_err(|e| one("", format!("invalid TOML: {e}")))?;
            serde_json::to_value(t).map_err(|e| one("", format!("unsupported TOML value: {e}")))?
        }
    };
    from_value(&doc, command)
}

fn one(path: &str, message: String) -> ConfigErrors {
    ConfigErrors(vec![ConfigError { path: path.into(), message }])
}

pub fn from_value(doc: &Value, command: Option<Command>) -> Result<RunConfig, ConfigErrors> {
    let ctx = Ctx { errors: RefCell::new(vec![]) };
    let top = Table::new(&ctx, "", Some(doc), TOP);
    let cfg = read(&ctx, &top, command);
    let errors = ctx.errors.into_inner();
    match cfg {
        Some(c) if errors.is_empty() => Ok(c),
        _ => Err(ConfigErrors(errors)),
    }
}

fn read(ctx: &Ctx, top: &Table, cli_command: Option<Command>) -> Option<RunConfig> {
    let file_command = top.parsed("command", |s| s.parse::<Command>());
    let command = match (cli_command, file_command) {
        (Some(a), Some(b)) if a != b => {
            ctx.err("command", format!("config says '{b}' but '{a}' was requested"));
            Some(a)
        }
        (Some(a), _) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => {
            if !top.has("command") {
                ctx.err("command", "missing required field");
            }
            None
        }
    };
    top.require("kind");
    let kind = top.parsed("kind", |s| s.parse::<OperatorKind>().map_err(|e| e.to_string()));
    top.require("n");
    let n = top.u64("n").map(|v| v as usize);
    if let Some(n) = n {
        top.check("n", n >= 3, format!("unsupported dimension n = {n}: the estimates need n >= 3"));
        top.check("n", n <= 12, format!("dimension n = {n} is too large for the grid operators (n <= 12)"));
    }
    let m = top.f64_or("m", 1.0);
    top.check("m", m >= 0.0, format!("mass must be >= 0, got {m}"));
    let seed = top.u64("seed").unwrap_or(0);
    top.check("seed", seed <= MAX_SEED, format!("seed must be <= {MAX_SEED} so that TOML can hold it"));
    let output = top.str("output").map(str::to_string);

    // certify
    let cert = Table::new(ctx, "certify", top.raw("certify"), &["theorem"]);
    let theorem = cert.parsed("theorem", |s| s.parse::<TheoremId>().map_err(|e| e.to_string()));
    if command == Some(Command::Certify) {
        cert.require("theorem");
    }
    if let (Some(t), Some(k)) = (theorem, kind) {
        let want = if t == TheoremId::KleinGordon { OperatorKind::KleinGordon } else { OperatorKind::Dirac };
        if command == Some(Command::Certify) && k != want {
            ctx.err("kind", format!("theorem {t} is about the {want} operator, got kind = {k}"));
        }
        let massless = matches!(t, TheoremId::DiracMassless | TheoremId::DyadicMassless);
        let massive = matches!(t, TheoremId::DiracMassive | TheoremId::DisksDyadic | TheoremId::DisksWeighted);
        if massless && m != 0.0 {
            ctx.err("m", format!("theorem {t} is stated for m = 0, got m = {m}"));
        }
        if massive && m <= 0.0 {
            ctx.err("m", format!("theorem {t} needs m > 0, got m = {m}"));
        }
    }

    // disks
    let dk = Table::new(ctx, "disks", top.raw("disks"), &["j"]);
    let j = dk.u64("j").unwrap_or(1);
    dk.check("j", j == 1 || j == 2, format!("j must be 1 or 2, got {j}"));
    if command == Some(Command::Disks) {
        if kind.is_some_and(|k| k != OperatorKind::Dirac) {
            ctx.err("kind", "disks are computed for the dirac operator");
        }
        if m <= 0.0 {
            ctx.err("m", format!("disks need m > 0, got m = {m}"));
        }
    }

    // potential
    let pt = Table::new(
        ctx,
        "potential",
        top.raw("potential"),
        &["preset", "file", "coupling", "coupling_im", "radius", "sigma", "outside_zero"],
    );
    let potential = if pt.present() {
        let preset = pt.parsed("preset", |s| s.parse::<Shape>().map_err(|e| e.to_string()));
        let file = pt.str("file").map(str::to_string);
        if pt.has("preset") == pt.has("file") {
            ctx.err("potential", "give exactly one of preset or file");
        }
        let p = PotentialConfig {
            preset,
            file,
            coupling: pt.f64_or("coupling", 0.0),
            coupling_im: pt.f64_or("coupling_im", 0.0),
            radius: pt.f64_or("radius", 1.0),
            sigma: pt.f64_or("sigma", 2.0),
            outside_zero: pt.bool_or("outside_zero", true),
        };
        pt.check("radius", p.radius > 0.0, format!("radius must be > 0, got {}", p.radius));
        pt.check("sigma", p.sigma > 0.0, format!("sigma must be > 0, got {}", p.sigma));
        if p.preset == Some(Shape::MatrixMix) && kind.is_some_and(|k| k != OperatorKind::Dirac) {
            ctx.err("potential.preset", "matrix-mix is spinor valued and needs kind = dirac");
        }
        Some(p)
    } else {
        if command.is_some_and(Command::needs_potential) {
            ctx.err("potential", "missing required table");
        }
        None
    };

    // weight
    let wt = Table::new(ctx, "weight", top.raw("weight"), &["kind", "epsilon", "delta", "sigma", "exponent"]);
    let default_kind = match theorem {
        Some(TheoremId::KleinGordon | TheoremId::DiracMassive) if command == Some(Command::Certify) => WeightKind::Tau,
        Some(TheoremId::DiracMassless) if command == Some(Command::Certify) => WeightKind::WSigma,
        _ => WeightKind::Rho2,
    };
    let wkind = wt
        .parsed("kind", |s| {
            WeightKind::ALL.into_iter().find(|k| k.id() == s).ok_or_else(|| {
                format!("unknown weight '{s}', expected tau, w_sigma, rho1, rho2 or power")
            })
        })
        .unwrap_or(default_kind);
    if command == Some(Command::Certify) && wkind != default_kind && default_kind != WeightKind::Rho2 {
        ctx.err("weight.kind", format!("theorem needs weight {}, got {}", default_kind.id(), wkind.id()));
    }
    let weight = WeightConfig {
        kind: wkind,
        epsilon: wt.f64_or("epsilon", if wkind == WeightKind::Rho2 { 0.5 } else { 0.1 }),
        delta: wt.f64_or("delta", 0.5),
        sigma: wt.f64_or("sigma", 2.0),
        exponent: wt.f64_or("exponent", 1.0),
    };
    if let Err(e) = weight.spec().validate() {
        ctx.err("weight", e.to_string());
    }

    // grid
    let gr = Table::new(ctx, "grid", top.raw("grid"), &["half_length", "samples"]);
    let bench_cmd = command == Some(Command::Bench);
    let half_length = gr.f64_or("half_length", if bench_cmd { 8.0 } else { 4.0 });
    let samples = gr.usize_or("samples", if bench_cmd { 32 } else { 8 });
    gr.check("half_length", half_length > 0.0, format!("half_length must be > 0, got {half_length}"));
    gr.check("samples", samples >= 2 && samples % 2 == 0, format!("samples must be even and >= 2, got {samples}"));

    // scan
    let sc = Table::new(
        ctx,
        "scan",
        top.raw("scan"),
        &["re_min", "re_max", "im_min", "im_max", "n_re", "n_im", "tol", "cutoff"],
    );
    let scan = ScanConfig {
        re_min: sc.f64_or("re_min", -3.0),
        re_max: sc.f64_or("re_max", 3.0),
        im_min: sc.f64_or("im_min", -2.0),
        im_max: sc.f64_or("im_max", 2.0),
        n_re: sc.usize_or("n_re", 20),
        n_im: sc.usize_or("n_im", 20),
        tol: sc.f64_or("tol", 1e-4),
        cutoff: sc.f64_or("cutoff", 0.1),
    };
    sc.check("re_min", scan.re_min <= scan.re_max, format!("re_min {} > re_max {}", scan.re_min, scan.re_max));
    sc.check("im_min", scan.im_min <= scan.im_max, format!("im_min {} > im_max {}", scan.im_min, scan.im_max));
    sc.check("n_re", scan.n_re >= 1, "n_re must be >= 1");
    sc.check("n_im", scan.n_im >= 1, "n_im must be >= 1");
    sc.check("tol", scan.tol > 0.0 && scan.tol < 1.0, format!("tol must be in (0, 1), got {}", scan.tol));
    sc.check("cutoff", scan.cutoff >= 0.0, format!("cutoff must be >= 0, got {}", scan.cutoff));

    // bench
    let bn = Table::new(
        ctx,
        "bench",
        top.raw("bench"),
        &["estimate", "trials", "z_count", "slack", "epsilon", "sigma", "probe", "real_fields"],
    );
    let estimate = bn
        .parsed("estimate", |s| match s {
            "explicit" => Ok(EstimateSelection::Explicit),
            "all" => Ok(EstimateSelection::All),
            id => id.parse::<EstimateId>().map(EstimateSelection::One).map_err(|e| e.to_string()),
        })
        .unwrap_or(EstimateSelection::Explicit);
    let bench = BenchSection {
        estimate,
        trials: bn.usize_or("trials", 100),
        z_count: bn.usize_or("z_count", 40),
        slack: bn.f64_or("slack", 0.1),
        epsilon: bn.f64_or("epsilon", 0.1),
        sigma: bn.f64_or("sigma", 2.0),
        probe: bn.bool_or("probe", false),
        real_fields: bn.bool_or("real_fields", false),
    };
    bn.check("trials", bench.trials >= 1, "trials must be >= 1");
    bn.check("z_count", bench.z_count >= 1, "z_count must be >= 1");
    bn.check("slack", bench.slack >= 0.0, format!("slack must be >= 0, got {}", bench.slack));
    bn.check("epsilon", bench.epsilon > 0.0, format!("epsilon must be > 0, got {}", bench.epsilon));
    bn.check("sigma", bench.sigma > 1.0, format!("sigma must be > 1, got {}", bench.sigma));

    // norms
    let nr = Table::new(ctx, "norms", top.raw("norms"), &["j_min", "j_max"]);
    let j_min = nr.i64("j_min").unwrap_or(-40);
    let j_max = nr.i64("j_max").unwrap_or(40);
    nr.check("j_min", j_min <= j_max, format!("j_min {j_min} > j_max {j_max}"));
    nr.check("j_min", j_min >= -1000 && j_max <= 1000, "annulus indices must lie in [-1000, 1000]");

    Some(RunConfig {
        command: command?,
        kind: kind?,
        n: n?,
        m,
        seed,
        output,
        potential,
        weight,
        theorem,
        j: j as u8,
        half_length,
        samples,
        scan,
        bench,
        j_min: j_min as i32,
        j_max: j_max as i32,
    })
}

impl RunConfig {
    /// Fully resolved document; parsing it gives back `self`.
    pub fn echo(&self) -> Value {
        let mut top = json!({
            "command": self.command.id(),
            "kind": self.kind.id(),
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "weight": {
                "kind": self.weight.kind.id(),
                "epsilon": self.weight.epsilon,
                "delta": self.weight.delta,
                "sigma": self.weight.sigma,
                "exponent": self.weight.exponent,
            },
            "disks": { "j": self.j },
            "grid": { "half_length": self.half_length, "samples": self.samples },
            "scan": {
                "re_min": self.scan.re_min,
                "re_max": self.scan.re_max,
                "im_min": self.scan.im_min,
                "im_max": self.scan.im_max,
                "n_re": self.scan.n_re,
                "n_im": self.scan.n_im,
                "tol": self.scan.tol,
                "cutoff": self.scan.cutoff,
            },
            "bench": {
                "estimate": self.bench.estimate.id(),
                "trials": self.bench.trials,
                "z_count": self.bench.z_count,
                "slack": self.bench.slack,
                "epsilon": self.bench.epsilon,
                "sigma": self.bench.sigma,
                "probe": self.bench.probe,
                "real_fields": self.bench.real_fields,
            },
            "norms": { "j_min": self.j_min, "j_max": self.j_max },
        });
        let obj = top.as_object_mut().expect("object");
        if let Some(o) = &self.output {
            obj.insert("output".into(), json!(o));
        }
        if let Some(t) = self.theorem {
            obj.insert("certify".into(), json!({ "theorem": t.id() }));
        }
        if let Some(p) = &self.potential {
            let mut pm = json!({
                "coupling": p.coupling,
                "coupling_im": p.coupling_im,
                "radius": p.radius,
                "sigma": p.sigma,
                "outside_zero": p.outside_zero,
            });
            let pmo = pm.as_object_mut().expect("object");
            if let Some(s) = p.preset {
                pmo.insert("preset".into(), json!(s.id()));
            }
            if let Some(f) = &p.file {
                pmo.insert("file".into(), json!(f));
            }
            obj.insert("potential".into(), pm);
        }
        top
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
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
    fn minimal_certify_config() {
        let c = parse_config(MINIMAL, Format::Toml, None).unwrap();
        assert_eq!(c.command, Command::Certify);
        assert_eq!(c.theorem, Some(TheoremId::Weighted));
        assert_eq!(c.weight.spec(), WeightSpec::Rho2 { epsilon: 0.5, delta: 0.5 });
        assert_eq!(c.potential.as_ref().unwrap().coupling, 5e-6);
    }

    #[test]
    fn dimension_two_is_rejected() {
        let e = parse_config(&MINIMAL.replace("n = 3", "n = 2"), Format::Toml, None).unwrap_err();
        assert!(e.0.iter().any(|e| e.path == "n" && e.message.contains("unsupported dimension")), "{e}");
    }

    #[test]
    fn reversed_scan_rectangle_is_rejected() {
        let t = MINIMAL.replace("certify\"", "scan\"") + "\n[scan]\nre_min = 2.0\nre_max = 1.0\n";
        let e = parse_config(&t, Format::Toml, None).unwrap_err();
        assert!(e.0.iter().any(|e| e.path == "scan.re_min"), "{e}");
    }

    #[test]
    fn all_errors_are_collected() {
        let t = r#"
command = "certify"
kind = "dirac"
n = 2
colour = "red"
[potential]
preset = "inverse-square"
radius = -1.0
[certify]
theorem = "9.9"
[scan]
n_re = 0
"#;
        let e = parse_config(t, Format::Toml, None).unwrap_err();
        let paths: Vec<&str> = e.0.iter().map(|e| e.path.as_str()).collect();
        for p in ["n", "colour", "potential.radius", "certify.theorem", "scan.n_re"] {
            assert!(paths.contains(&p), "missing {p} in {paths:?}");
        }
    }

    #[test]
    fn massless_theorem_with_mass_is_rejected() {
        let t = MINIMAL.replace("\"2.3\"", "\"2.4\"");
        let e = parse_config(&t, Format::Toml, None).unwrap_err();
        assert!(e.0.iter().any(|e| e.path == "m"));
        assert!(parse_config(&t.replace("m = 1.0", "m = 0.0"), Format::Toml, None).is_ok());
    }

    #[test]
    fn command_must_agree() {
        assert!(parse_config(MINIMAL, Format::Toml, Some(Command::Certify)).is_ok());
        assert!(parse_config(MINIMAL, Format::Toml, Some(Command::Scan)).is_err());
        let no_cmd = MINIMAL.replace("command = \"certify\"", "");
        assert!(parse_config(&no_cmd, Format::Toml, None).is_err());
        assert_eq!(parse_config(&no_cmd, Format::Toml, Some(Command::Certify)).unwrap().command, Command::Certify);
    }

    #[test]
    fn echo_round_trips() {
        let c = parse_config(MINIMAL, Format::Toml, None).unwrap();
        let text = serde_json::to_string(&c.echo()).unwrap();
        assert_eq!(parse_config(&text, Format::Json, None).unwrap(), c);
        let t = r#"{"command": "bench", "kind": "schrodinger", "n": 3, "seed": 9223372036854775807,
                    "bench": {"estimate": "KY", "trials": 3, "slack": 0.3}, "weight": {"kind": "power", "exponent": -0.25}}"#;
        let c = parse_config(t, Format::Json, None).unwrap();
        assert_eq!(c.half_length, 8.0);
        let text = serde_json::to_string(&c.echo()).unwrap();
        assert_eq!(parse_config(&text, Format::Json, None).unwrap(), c);
    }

    #[test]
    fn seeds_beyond_toml_range_are_rejected() {
        let e = parse_config(&MINIMAL.replace("n = 3", "n = 3\nseed = 9223372036854775808"), Format::Toml, None);
        assert!(e.is_err());
        let j = r#"{"command": "bench", "kind": "dirac", "n": 3, "seed": 9223372036854775808}"#;
        assert!(parse_config(j, Format::Json, None).unwrap_err().0.iter().any(|e| e.path == "seed"));
    }

    #[test]
    fn integer_for_float_is_accepted_but_not_the_reverse() {
        assert_eq!(parse_config(&MINIMAL.replace("m = 1.0", "m = 2"), Format::Toml, None).unwrap().m, 2.0);
        assert!(parse_config(&MINIMAL.replace("n = 3", "n = 3.0"), Format::Toml, None).is_err());
    }
}
