//! Empirical checks of the uniform resolvent estimates on a periodic grid.
//!
//! Each estimate is evaluated as a ratio `LHS / RHS'` where `RHS'` is the
//! right-hand side with its constant removed, so the worst ratio over random
//! test fields and spectral parameters is a lower bound for the best
//! constant and must stay below the stated one. The predual Morrey norm is
//! replaced by `sqrt 2 || |x|^{1/2} f ||_{l^1 L^2}`, which dominates it.

use crate::enclosure::{bracket, eval_constants};
use crate::grid::{fft_nd, FftDirection, FieldOnGrid, GridError, GridSpec, OperatorKind, ResolventMultiplier};
use crate::par;
use crate::weights_norms::{dyadic_norm, DyadicOptions, Exponent, Factor, NormError, RadialField, RadialPlan, WeightSpec};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimateId {
    KgWeighted,
    DiracMasslessWeighted,
    DiracMassiveWeighted,
    MorreyX,
    MorreyReY,
    MorreyImY,
    DyadicX,
    DyadicZ,
    DyadicGrad,
    WeightedX,
    WeightedZ,
    WeightedGrad,
    WeightedHom,
    DiracDyadic,
    DiracWeighted,
    DiracHom,
    KatoYajima,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    Laplace,
    Dirac,
    KgReport,
    D0Report,
    DmReport,
}

impl EstimateId {
    pub const ALL: [EstimateId; 17] = [
        EstimateId::KgWeighted,
        EstimateId::DiracMasslessWeighted,
        EstimateId::DiracMassiveWeighted,
        EstimateId::MorreyX,
        EstimateId::MorreyReY,
        EstimateId::MorreyImY,
        EstimateId::DyadicX,
        EstimateId::DyadicZ,
        EstimateId::DyadicGrad,
        EstimateId::WeightedX,
        EstimateId::WeightedZ,
        EstimateId::WeightedGrad,
        EstimateId::WeightedHom,
        EstimateId::DiracDyadic,
        EstimateId::DiracWeighted,
        EstimateId::DiracHom,
        EstimateId::KatoYajima,
    ];

    pub fn id(self) -> &'static str {
        use EstimateId::*;
        match self {
            KgWeighted => "L3.1-KG",
            DiracMasslessWeighted => "L3.2-D0",
            DiracMassiveWeighted => "L3.2-Dm",
            MorreyX => "L3.3-X",
            MorreyReY => "L3.3-ReY",
            MorreyImY => "L3.3-ImY",
            DyadicX => "C3.4-a",
            DyadicZ => "C3.4-b",
            DyadicGrad => "C3.4-c",
            WeightedX => "C3.5-a",
            WeightedZ => "C3.5-b",
            WeightedGrad => "C3.5-c",
            WeightedHom => "C3.5-d",
            DiracDyadic => "L3.6-dyadic",
            DiracWeighted => "L3.6-weighted",
            DiracHom => "L3.6-hom",
            KatoYajima => "KY",
        }
    }

    /// Estimates whose constant is stated explicitly.
    pub fn explicit(self) -> bool {
        !matches!(self.family(), Family::KgReport | Family::D0Report | Family::DmReport)
    }

    pub fn explicit_ids() -> Vec<EstimateId> {
        Self::ALL.into_iter().filter(|e| e.explicit()).collect()
    }

    fn family(self) -> Family {
        use EstimateId::*;
        match self {
            KgWeighted => Family::KgReport,
            DiracMasslessWeighted => Family::D0Report,
            DiracMassiveWeighted => Family::DmReport,
            DiracDyadic | DiracWeighted | DiracHom => Family::Dirac,
            _ => Family::Laplace,
        }
    }

    /// Operator whose resolvent the estimate is about.
    pub fn kind(self) -> OperatorKind {
        match self.family() {
            Family::Laplace => OperatorKind::Schrodinger,
            Family::KgReport => OperatorKind::KleinGordon,
            _ => OperatorKind::Dirac,
        }
    }

    fn sweeps_epsilon(self) -> bool {
        matches!(self.family(), Family::KgReport | Family::DmReport)
    }
}

impl std::fmt::Display for EstimateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for EstimateId {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, BenchError> {
        EstimateId::ALL.into_iter().find(|e| e.id() == s).ok_or_else(|| {
            let ids: Vec<&str> = EstimateId::ALL.iter().map(|e| e.id()).collect();
            BenchError::Invalid(format!("unknown estimate '{s}', expected one of {}", ids.join(", ")))
        })
    }
}

/// `eps` values swept for the estimates with a non-explicit `eps`.
pub const EPSILON_SWEEP: [f64; 3] = [0.05, 0.1, 0.2];

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub n: usize,
    pub half_length: f64,
    pub samples: usize,
    pub m: f64,
    pub trials: usize,
    pub z_count: usize,
    pub slack: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub seed: u64,
    /// Real-valued test fields.
    pub real_fields: bool,
    pub rho: WeightSpec,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n: 3,
            half_length: 8.0,
            samples: 32,
            m: 1.0,
            trials: 100,
            z_count: 40,
            slack: 0.1,
            epsilon: 0.1,
            sigma: 2.0,
            seed: 0,
            real_fields: false,
            rho: WeightSpec::Rho2 { epsilon: 0.5, delta: 0.5 },
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |s: String| Err(BenchError::Invalid(s));
        if self.n < 3 {
            return bad(format!("dimension n = {} is not supported: the estimates need n >= 3", self.n));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.z_count == 0 {
            return bad("z_count must be >= 1".into());
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return bad(format!("slack must be >= 0, got {}", self.slack));
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return bad(format!("mass must be >= 0, got {}", self.m));
        }
        WeightSpec::Tau { epsilon: self.epsilon }.validate()?;
        WeightSpec::WSigma { sigma: self.sigma }.validate()?;
        self.rho.validate()?;
        Ok(())
    }

    pub fn grid(&self, spin: usize) -> Result<GridSpec, BenchError> {
        Ok(GridSpec::new(self.n, self.half_length, self.samples, spin)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub id: EstimateId,
    pub trials: usize,
    /// Trials with a vanishing or non-finite side.
    pub discarded: usize,
    pub z: Vec<C64>,
    /// Worst ratio at each `z`.
    pub series: Vec<f64>,
    pub max_ratio: f64,
    pub worst_z: Option<C64>,
    pub stated_constant: Option<f64>,
    pub slack: f64,
    /// `max_ratio <= stated_constant (1 + slack)`; `None` for report-only estimates.
    pub pass: Option<bool>,
    /// `(n, L, M, N)`
    pub grid: (usize, f64, usize, usize),
    /// `(eps, max_ratio)` for the estimates with a free `eps`.
    pub epsilon_sweep: Vec<(f64, f64)>,
    /// Free resolvent applications performed.
    pub resolvent_applications: usize,
}

impl BenchReport {
    /// Columns `re_z,im_z,ratio`.
    pub fn series_csv(&self) -> String {
        series_csv(&self.z, &self.series)
    }
}

fn series_csv(z: &[C64], r: &[f64]) -> String {
    let mut s = String::from("re_z,im_z,ratio\n");
    for (z, r) in z.iter().zip(r) {
        let _ = writeln!(s, "{:.11e},{:.11e},{:.11e}", z.re, z.im, r);
    }
    s
}

/// `count` points on a log spiral with `|z|` in `[r_min, r_max]`, avoiding
/// sectors of half-width `sector` around the real half-axes that carry
/// spectrum of `kind`.
pub fn z_samples(kind: OperatorKind, count: usize, r_min: f64, r_max: f64, sector: f64) -> Vec<C64> {
    let intervals: Vec<(f64, f64)> = match kind {
        OperatorKind::Dirac => vec![(sector, PI - sector), (PI + sector, 2.0 * PI - sector)],
        _ => vec![(sector, 2.0 * PI - sector)],
    };
    let total: f64 = intervals.iter().map(|(a, b)| b - a).sum();
    (0..count)
        .map(|k| {
            let t = (k as f64 + 0.5) / count as f64;
            let r = r_min * (r_max / r_min).powf(t);
            let mut s = t * total;
            let mut theta = intervals[0].0;
            for &(a, b) in &intervals {
                if s <= b - a {
                    theta = a + s;
                    break;
                }
                s -= b - a;
            }
            C64::from_polar(r, theta)
        })
        .collect()
}

/// Default sample set: 40 points, `|z|` in `[0.1, 10]`, sectors `0.15`.
pub fn default_z_samples(kind: OperatorKind, count: usize) -> Vec<C64> {
    z_samples(kind, count, 0.1, 10.0, 0.15)
}

/// Random band-limited field times a smooth cutoff supported in `|x| < L/2`.
/// Fourier coefficients are standard normal for `|k| <= M/3` (signed bin
/// indices) and zero above.
pub fn test_field(grid: &GridSpec, seed: u64, real: bool) -> FieldOnGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spin = grid.spin();
    let kmax = grid.samples() as f64 / 3.0;
    let mut hat = vec![C64::new(0.0, 0.0); grid.dof()];
    for p in 0..grid.points() {
        let k2: f64 = grid.multi_index(p).into_iter().map(|i| (grid.freq_index(i) as f64).powi(2)).sum();
        if k2.sqrt() > kmax {
            continue;
        }
        for s in 0..spin {
            hat[p * spin + s] = C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        }
    }
    fft_nd(&mut hat, grid, FftDirection::Inverse);
    let l = grid.half_length();
    for p in 0..grid.points() {
        let c = crate::weights_norms::profile::bump(2.0 * grid.radius(p) / l, 1.0);
        for v in &mut hat[p * spin..(p + 1) * spin] {
            *v = if real { C64::new(v.re * c, 0.0) } else { *v * c };
        }
    }
    FieldOnGrid { grid: grid.clone(), values: hat }
}

fn pointwise_sq(values: &[C64], spin: usize) -> Vec<f64> {
    values.chunks(spin).map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect()
}

/// Norms and point weights shared by all trials.
struct Context {
    cfg: BenchConfig,
    plan: RadialPlan,
    spin: usize,
    rho_sq: f64,
    consts: Consts,
    sqrt_r: Vec<f64>,
    inv_sqrt_r: Vec<f64>,
    r: Vec<f64>,
    inv_r: Vec<f64>,
    /// `|x|^{-3/2} rho`, `|x|^{-1/2} rho`, `|x|^{1/2} rho^{-1}`
    rho_a: Vec<f64>,
    rho_b: Vec<f64>,
    rho_f: Vec<f64>,
    /// `(eps, tau^{-1}, tau)` per swept `eps`.
    tau: Vec<(f64, Vec<f64>, Vec<f64>)>,
    w_inv_half: Vec<f64>,
    w_half: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Consts {
    c1: f64,
    c2: f64,
    c3: f64,
    ky: f64,
}

fn rho_norms(n: usize, m: f64, rho: &WeightSpec) -> Result<(f64, Consts), BenchError> {
    let o = DyadicOptions::default();
    let inf = Exponent::Infinity;
    let l2 = dyadic_norm(&RadialField { n, profile: rho.profile() }, Exponent::Two, inf, &o)?;
    let s = dyadic_norm(&RadialField { n, profile: rho.profile().with(Factor::Radius, 0.5) }, inf, inf, &o)?;
    let up = |r: &crate::weights_norms::NormResult| r.upper().unwrap_or(f64::INFINITY);
    let k = eval_constants(n, m, up(&l2), Some(up(&s))).map_err(|e| BenchError::Invalid(e.to_string()))?;
    Ok((l2.value * l2.value, Consts { c1: k.c1, c2: k.c2, c3: k.c3.unwrap_or(f64::INFINITY), ky: k.kato_yajima }))
}

impl Context {
    fn new(cfg: &BenchConfig, spin: usize) -> Result<Context, BenchError> {
        let grid = cfg.grid(spin)?;
        let plan = RadialPlan::new(&grid);
        let (rho_sq, consts) = rho_norms(cfg.n, cfg.m, &cfg.rho)?;
        let w = |f: &dyn Fn(f64) -> f64| plan.weights(f);
        let mut eps: Vec<f64> = EPSILON_SWEEP.to_vec();
        if !eps.contains(&cfg.epsilon) {
            eps.push(cfg.epsilon);
        }
        let tau = eps
            .into_iter()
            .map(|e| {
                let t = WeightSpec::Tau { epsilon: e };
                (e, w(&|r| 1.0 / t.eval(r)), w(&|r| t.eval(r)))
            })
            .collect();
        let ws = WeightSpec::WSigma { sigma: cfg.sigma };
        let rho = &cfg.rho;
        Ok(Context {
            sqrt_r: w(&|r| r.sqrt()),
            inv_sqrt_r: w(&|r| r.powf(-0.5)),
            r: w(&|r| r),
            inv_r: w(&|r| 1.0 / r),
            rho_a: w(&|r| r.powf(-1.5) * rho.eval(r)),
            rho_b: w(&|r| r.powf(-0.5) * rho.eval(r)),
            rho_f: w(&|r| r.sqrt() / rho.eval(r)),
            tau,
            w_inv_half: w(&|r| ws.eval(r).powf(-0.5)),
            w_half: w(&|r| ws.eval(r).sqrt()),
            cfg: cfg.clone(),
            plan,
            spin,
            rho_sq,
            consts,
        })
    }

    fn constant(&self, id: EstimateId) -> Option<f64> {
        constant_for(id, self.cfg.n, &self.consts)
    }
}

fn constant_for(id: EstimateId, n: usize, k: &Consts) -> Option<f64> {
    use EstimateId::*;
    let nf = n as f64;
    let q = (64.0 * nf + 324.0).powf(0.25);
    Some(match id {
        MorreyX => 288.0 * nf,
        MorreyReY => 576.0 * 2f64.sqrt() * nf * nf,
        MorreyImY => 864.0 * 2f64.sqrt() * nf,
        DyadicX | DyadicGrad | WeightedX | WeightedGrad => 576.0 * nf,
        DyadicZ | WeightedZ => 576.0 * nf * q,
        WeightedHom => k.c3,
        DiracDyadic | DiracWeighted => k.c2,
        DiracHom => k.c1,
        KatoYajima => k.ky,
        KgWeighted | DiracMasslessWeighted | DiracMassiveWeighted => return None,
    })
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    let r = num / den;
    (den > 0.0 && r.is_finite()).then_some(r)
}

/// Ratios at one `(f, z)`: one entry per requested id, then one per swept
/// `eps` for each sweeping id (in `ctx.tau` order).
fn evaluate(ctx: &Context, ids: &[EstimateId], f: &FieldOnGrid, res: &ResolventMultiplier) -> Vec<Option<f64>> {
    use EstimateId::*;
    let z = res.z();
    let plan = &ctx.plan;
    let fsq = pointwise_sq(&f.values, ctx.spin);
    let need_grad = ids.iter().any(|i| matches!(i, MorreyX | DyadicGrad | WeightedGrad));
    let (u, grads) = if need_grad { res.apply_with_gradient(f) } else { (res.apply(f), vec![]) };
    let usq = pointwise_sq(&u.values, ctx.spin);
    let gsq: Vec<f64> = if need_grad {
        let mut g = vec![0.0; usq.len()];
        for d in &grads {
            for (a, b) in g.iter_mut().zip(pointwise_sq(&d.values, ctx.spin)) {
                *a += b;
            }
        }
        g
    } else {
        vec![]
    };
    let d = plan.dyadic_l2(&fsq, &ctx.sqrt_r, Exponent::One);
    let pf = plan.weighted_l2(&fsq, &ctx.rho_f);
    let morrey = |sq: &[f64]| plan.morrey(sq).ok();
    let mu = if ids.iter().any(|i| matches!(i, MorreyX | MorreyReY | MorreyImY | DyadicX)) { morrey(&usq) } else { None };
    let mg = if ids.contains(&MorreyX) { morrey(&gsq) } else { None };
    let s2 = 2f64.sqrt();
    let inv_sqrt_linf = |sq: &[f64]| plan.dyadic_l2(sq, &ctx.inv_sqrt_r, Exponent::Infinity);
    let br = bracket(z, ctx.cfg.m);
    let mut out: Vec<Option<f64>> = ids
        .iter()
        .map(|&id| match id {
            MorreyX => {
                let (a, b) = (mu?.x, mg?.y);
                ratio((a * a + b * b).sqrt(), s2 * d)
            }
            MorreyReY => ratio(z.re.abs().sqrt() * mu?.y, s2 * d),
            MorreyImY => ratio(z.im.abs().sqrt() * mu?.y, s2 * d),
            DyadicX => ratio(mu?.x, d),
            DyadicZ => ratio(z.norm().sqrt() * inv_sqrt_linf(&usq), d),
            DyadicGrad => ratio(inv_sqrt_linf(&gsq), d),
            WeightedX => ratio(plan.weighted_l2(&usq, &ctx.rho_a), ctx.rho_sq * pf),
            WeightedZ => ratio(z.norm().sqrt() * plan.weighted_l2(&usq, &ctx.rho_b), ctx.rho_sq * pf),
            WeightedGrad => ratio(plan.weighted_l2(&gsq, &ctx.rho_b), ctx.rho_sq * pf),
            WeightedHom => {
                let jb = (1.0 + z.norm_sqr()).sqrt().sqrt();
                ratio(jb * plan.weighted_l2(&usq, &ctx.rho_b), pf)
            }
            KatoYajima => ratio(plan.weighted_l2(&usq, &ctx.inv_r), plan.weighted_l2(&fsq, &ctx.r)),
            DiracDyadic => ratio(inv_sqrt_linf(&usq), br * d),
            DiracWeighted => ratio(plan.weighted_l2(&usq, &ctx.rho_b), ctx.rho_sq * br * pf),
            DiracHom => ratio(plan.weighted_l2(&usq, &ctx.rho_b), pf),
            DiracMasslessWeighted => {
                ratio(plan.weighted_l2(&usq, &ctx.w_inv_half), plan.weighted_l2(&fsq, &ctx.w_half))
            }
            KgWeighted | DiracMassiveWeighted => {
                let (_, ti, t) = ctx.tau.iter().find(|(e, _, _)| *e == ctx.cfg.epsilon).expect("configured eps");
                ratio(plan.weighted_l2(&usq, ti), plan.weighted_l2(&fsq, t))
            }
        })
        .collect();
    for id in ids {
        if id.sweeps_epsilon() {
            for (_, ti, t) in &ctx.tau {
                out.push(ratio(plan.weighted_l2(&usq, ti), plan.weighted_l2(&fsq, t)));
            }
        }
    }
    out
}

fn spin_of(kind: OperatorKind, n: usize) -> usize {
    match kind {
        OperatorKind::Dirac => 1 << n.div_ceil(2),
        _ => 1,
    }
}

fn mass_of(id: EstimateId, m: f64) -> f64 {
    match id.family() {
        Family::Laplace => 0.0,
        Family::D0Report => 0.0,
        _ => m,
    }
}

/// Per-id worst ratios over trials, per `z`.
struct Sweep {
    /// `[slot][z]`
    worst: Vec<Vec<f64>>,
    discarded: Vec<usize>,
    applications: usize,
}

fn sweep(ctx: &Context, ids: &[EstimateId], zs: &[C64], field_seed: u64) -> Result<Sweep, BenchError> {
    let kind = ids[0].kind();
    let m = mass_of(ids[0], ctx.cfg.m);
    let grid = ctx.plan.grid();
    let res: Vec<ResolventMultiplier> =
        zs.iter().map(|&z| ResolventMultiplier::new(kind, m, z, grid)).collect::<Result<_, _>>()?;
    let slots = ids.len() + ids.iter().filter(|i| i.sweeps_epsilon()).count() * ctx.tau.len();
    let per_trial: Vec<(Vec<Vec<f64>>, Vec<bool>)> = par::map_range(ctx.cfg.trials, |t| {
        let f = test_field(grid, field_seed.wrapping_add(t as u64), ctx.cfg.real_fields);
        let mut worst = vec![vec![0.0; zs.len()]; slots];
        let mut bad = vec![false; slots];
        for (k, r) in res.iter().enumerate() {
            for (s, v) in evaluate(ctx, ids, &f, r).into_iter().enumerate() {
                match v {
                    Some(v) => worst[s][k] = v,
                    None => bad[s] = true,
                }
            }
        }
        (worst, bad)
    });
    let mut out = Sweep { worst: vec![vec![0.0; zs.len()]; slots], discarded: vec![0; slots], applications: 0 };
    for (w, bad) in per_trial {
        for s in 0..slots {
            if bad[s] {
                out.discarded[s] += 1;
                continue;
            }
            for (o, v) in out.worst[s].iter_mut().zip(&w[s]) {
                *o = o.max(*v);
            }
        }
    }
    out.applications = ctx.cfg.trials * zs.len();
    Ok(out)
}

fn family_seed(seed: u64, kind: OperatorKind) -> u64 {
    let salt = match kind {
        OperatorKind::Schrodinger => 0,
        OperatorKind::KleinGordon => 1,
        OperatorKind::Dirac => 2,
    };
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt << 32)
}

/// Runs several estimates, sharing `R_0 f` between estimates on the same
/// resolvent. Reports come back in the order of `ids`.
pub fn run_benches(ids: &[EstimateId], cfg: &BenchConfig, zs: Option<&[C64]>) -> Result<Vec<BenchReport>, BenchError> {
    cfg.validate()?;
    let mut groups: Vec<(Family, Vec<EstimateId>)> = vec![];
    for &id in ids {
        match groups.iter_mut().find(|(f, _)| *f == id.family()) {
            Some((_, v)) => {
                if !v.contains(&id) {
                    v.push(id)
                }
            }
            None => groups.push((id.family(), vec![id])),
        }
    }
    let mut reports: Vec<BenchReport> = vec![];
    for (_, group) in groups {
        let kind = group[0].kind();
        let ctx = Context::new(cfg, spin_of(kind, cfg.n))?;
        let z: Vec<C64> = match zs {
            Some(z) => z.to_vec(),
            None => default_z_samples(kind, cfg.z_count),
        };
        let sw = sweep(&ctx, &group, &z, family_seed(cfg.seed, kind))?;
        let mut extra = group.len();
        for (i, &id) in group.iter().enumerate() {
            let series = sw.worst[i].clone();
            let (k, max_ratio) =
                series.iter().copied().enumerate().fold((0, 0.0), |(bk, bv), (k, v)| if v > bv { (k, v) } else { (bk, bv) });
            let stated_constant = ctx.constant(id);
            let mut epsilon_sweep = vec![];
            if id.sweeps_epsilon() {
                for (e, _, _) in &ctx.tau {
                    epsilon_sweep.push((*e, sw.worst[extra].iter().copied().fold(0.0, f64::max)));
                    extra += 1;
                }
                epsilon_sweep.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
            reports.push(BenchReport {
                id,
                trials: cfg.trials,
                discarded: sw.discarded[i],
                worst_z: (max_ratio > 0.0).then(|| z[k]),
                z: z.clone(),
                series,
                max_ratio,
                pass: stated_constant.map(|c| max_ratio <= c * (1.0 + cfg.slack)),
                stated_constant,
                slack: cfg.slack,
                grid: (cfg.n, cfg.half_length, cfg.samples, ctx.spin),
                epsilon_sweep,
                resolvent_applications: sw.applications,
            });
        }
    }
    reports.sort_by_key(|r| ids.iter().position(|i| *i == r.id));
    Ok(reports)
}

pub fn run_bench(id: EstimateId, cfg: &BenchConfig, zs: Option<&[C64]>) -> Result<BenchReport, BenchError> {
    Ok(run_benches(&[id], cfg, zs)?.remove(0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub id: EstimateId,
    pub z: Vec<C64>,
    pub ratios: Vec<f64>,
    /// Mean of the last quarter of the series over the mean of the first.
    pub growth: f64,
    /// `growth > 2`
    pub flagged: bool,
}

impl ProbeReport {
    pub fn series_csv(&self) -> String {
        series_csv(&self.z, &self.ratios)
    }
}

/// Worst ratio along a path of `z` values.
pub fn uniformity_probe(id: EstimateId, cfg: &BenchConfig, path: &[C64]) -> Result<ProbeReport, BenchError> {
    if path.is_empty() {
        return Err(BenchError::Invalid("empty z path".into()));
    }
    let r = run_bench(id, cfg, Some(path))?;
    let q = path.len().div_ceil(4);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (a, b) = (mean(&r.series[..q]), mean(&r.series[path.len() - q..]));
    let growth = if a > 0.0 { b / a } else { f64::INFINITY };
    Ok(ProbeReport { id, z: path.to_vec(), ratios: r.series, growth, flagged: growth > 2.0 })
}

/// `z = lambda + i im` for `count` values of `lambda` in `[a, b]`.
pub fn horizontal_path(a: f64, b: f64, im: f64, count: usize) -> Vec<C64> {
    (0..count)
        .map(|k| {
            let t = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
            C64::new(a + (b - a) * t, im)
        })
        .collect()
}

/// Stated constant of every explicit estimate for the configured `n`, `m`
/// and `rho`.
pub fn explicit_constants(cfg: &BenchConfig) -> Result<Vec<(EstimateId, f64)>, BenchError> {
    let k = rho_norms(cfg.n, cfg.m, &cfg.rho)?.1;
    Ok(EstimateId::explicit_ids().into_iter().filter_map(|id| Some((id, constant_for(id, cfg.n, &k)?))).collect())
}
