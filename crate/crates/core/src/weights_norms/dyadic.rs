//! Dyadic `l^p L^q` norms of scalar fields on `R^n`.

use super::profile::{annulus_volume, sphere_area, tail_from_envelope, Envelope, RadialProfile, Side};
use super::NormError;
use crate::par;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// Exponent in `{1, 2, inf}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    One,
    Two,
    Infinity,
}

impl Exponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::One => Some(1.0),
            Exponent::Two => Some(2.0),
            Exponent::Infinity => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Exponent::One => "1",
            Exponent::Two => "2",
            Exponent::Infinity => "inf",
        }
    }
}

/// A nonnegative scalar function on `R^n \ {0}`.
///
/// `eval` returns NaN outside its domain. Radial fields expose their profile
/// through `radial_eval`, which lets the norm engine sample one direction only.
pub trait Field: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    fn radial_eval(&self, _r: f64) -> Option<f64> {
        None
    }
    /// Analytic envelopes on `(0, r_in]` and `[r_out, inf)`.
    fn tails(&self, _r_in: f64, _r_out: f64) -> (Option<Envelope>, Option<Envelope>) {
        (None, None)
    }
}

/// `|profile(|x|)|` in dimension `n`.
#[derive(Clone, Debug)]
pub struct RadialField {
    pub n: usize,
    pub profile: RadialProfile,
}

impl Field for RadialField {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.profile.eval(norm(x)).abs()
    }
    fn radial_eval(&self, r: f64) -> Option<f64> {
        Some(self.profile.eval(r).abs())
    }
    fn tails(&self, r_in: f64, r_out: f64) -> (Option<Envelope>, Option<Envelope>) {
        (self.profile.envelope_inner(r_in), self.profile.envelope_outer(r_out))
    }
}

/// Wraps a closure; no envelope information.
pub struct FnField<F: Fn(&[f64]) -> f64 + Sync> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Field for FnField<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Wraps a radial closure `r -> f(r)`; no envelope information.
pub struct RadialFn<F: Fn(f64) -> f64 + Sync> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(f64) -> f64 + Sync> Field for RadialFn<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(norm(x))
    }
    fn radial_eval(&self, r: f64) -> Option<f64> {
        Some((self.f)(r))
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Clone, Debug)]
pub struct DyadicOptions {
    pub j_min: i32,
    pub j_max: i32,
    /// Geometric radii per annulus on the coarse lattice.
    pub radial_points: usize,
    pub refine_rounds: usize,
    /// Relative tolerance of the per-annulus `L^2` quadrature.
    pub quad_tol: f64,
}

impl Default for DyadicOptions {
    fn default() -> Self {
        DyadicOptions { j_min: -40, j_max: 40, radial_points: 33, refine_rounds: 3, quad_tol: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormResult {
    pub value: f64,
    pub p: Exponent,
    pub q: Exponent,
    /// Index range actually summed.
    pub j_min: i32,
    pub j_max: i32,
    /// Bound on the contribution of the omitted annuli, `None` when unknown.
    /// Not included in `value`.
    pub tail_bound: Option<f64>,
    /// `L^q` norm on each annulus of the range.
    pub per_annulus: Vec<f64>,
    /// Evaluation points used on each annulus.
    pub samples: Vec<usize>,
}

impl NormResult {
    /// `value + tail_bound`, the rigorous upper estimate when the tail is known.
    pub fn upper(&self) -> Option<f64> {
        self.tail_bound.map(|t| self.value + t)
    }

    pub fn total_samples(&self) -> usize {
        self.samples.iter().sum()
    }
}

/// Computes `||f||_{l^p L^q}` over annuli `2^{j-1} <= |x| < 2^j`, `j` in the
/// option range.
pub fn dyadic_norm<F: Field + ?Sized>(
    f: &F,
    p: Exponent,
    q: Exponent,
    opts: &DyadicOptions,
) -> Result<NormResult, NormError> {
    if opts.j_min > opts.j_max {
        return Err(NormError::InvalidRange { j_min: opts.j_min, j_max: opts.j_max });
    }
    if q == Exponent::One {
        return Err(NormError::InvalidParameter("q must be 2 or inf".into()));
    }
    let n = f.dim();
    let dirs = directions(n);
    let js: Vec<i32> = (opts.j_min..=opts.j_max).collect();
    let per: Vec<Result<(f64, usize), NormError>> = par::map_slice(&js, |&j| match q {
        Exponent::Infinity => annulus_sup(f, j, &dirs, opts),
        _ => annulus_l2(f, j, &dirs, opts),
    });
    let mut per_annulus = Vec::with_capacity(js.len());
    let mut samples = Vec::with_capacity(js.len());
    for r in per {
        let (v, s) = r?;
        per_annulus.push(v);
        samples.push(s);
    }

    let pf = p.finite();
    let agg = |vals: &[f64]| -> f64 {
        match pf {
            Some(pp) => vals.iter().map(|v| v.powf(pp)).sum::<f64>(),
            None => vals.iter().cloned().fold(0.0, f64::max),
        }
    };
    let s = agg(&per_annulus);
    let value = match pf {
        Some(pp) => s.powf(1.0 / pp),
        None => s,
    };

    let r_in = 2f64.powi(opts.j_min - 1);
    let r_out = 2f64.powi(opts.j_max);
    let (env_in, env_out) = f.tails(r_in, r_out);
    let q_two = q == Exponent::Two;
    let tail_in = env_in.and_then(|e| tail_from_envelope(&e, Side::Inner, opts.j_min, n, pf, q_two));
    let tail_out = env_out.and_then(|e| tail_from_envelope(&e, Side::Outer, opts.j_max, n, pf, q_two));

    for (side, tail) in [(Side::Inner, tail_in), (Side::Outer, tail_out)] {
        if tail.is_none() {
            if let Some(j) = looks_divergent(&per_annulus, side, pf.is_some(), s) {
                return Err(NormError::Divergent {
                    side: if side == Side::Inner { "inner" } else { "outer" },
                    j: opts.j_min + j as i32,
                    term: per_annulus[j],
                });
            }
        }
    }

    let tail_bound = match (tail_in, tail_out) {
        (Some(a), Some(b)) => Some(match pf {
            Some(pp) => ((s + a + b).powf(1.0 / pp) - value).max(0.0),
            None => (a.max(b) - value).max(0.0),
        }),
        _ => None,
    };
    Ok(NormResult { value, p, q, j_min: opts.j_min, j_max: opts.j_max, tail_bound, per_annulus, samples })
}

/// `||f||_{L^inf}` estimated as the dyadic `l^inf L^inf` norm.
pub fn weighted_sup_norm<F: Field + ?Sized>(f: &F, opts: &DyadicOptions) -> Result<NormResult, NormError> {
    dyadic_norm(f, Exponent::Infinity, Exponent::Infinity, opts)
}

/// Index of the boundary annulus if the sequence does not settle toward that
/// end of the range.
fn looks_divergent(terms: &[f64], side: Side, finite_p: bool, total: f64) -> Option<usize> {
    let len = terms.len();
    if len < 4 {
        return None;
    }
    let idx: Vec<usize> = match side {
        Side::Inner => (0..4).collect(),
        Side::Outer => (0..4).map(|i| len - 1 - i).collect(),
    };
    let t: Vec<f64> = idx.iter().map(|&i| terms[i]).collect();
    if t[0] == 0.0 {
        return None;
    }
    if finite_p {
        let negligible = t[0] <= 1e-12 * total.max(f64::MIN_POSITIVE);
        let nondecreasing = t[0] >= t[1] && t[1] >= t[2] && t[2] >= t[3];
        (!negligible && nondecreasing).then_some(idx[0])
    } else {
        let max = terms.iter().cloned().fold(0.0, f64::max);
        let increasing = t[0] > t[1] && t[1] > t[2] && t[2] > t[3];
        (t[0] >= max && increasing).then_some(idx[0])
    }
}

/// Direction set for the angular lattice.
fn directions(n: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..16).map(|k| {
            let t = 2.0 * PI * k as f64 / 16.0;
            vec![t.cos(), t.sin()]
        })
        .collect(),
        3 => fibonacci_sphere(32),
        _ => {
            let mut out = Vec::new();
            for i in 0..n {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; n];
                    v[i] = s;
                    out.push(v);
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0xd1ec7);
            for _ in 0..32 {
                let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let nv = norm(&v);
                out.push(v.into_iter().map(|x| x / nv).collect());
            }
            out
        }
    }
}

pub(crate) fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            vec![rho * t.cos(), rho * t.sin(), z]
        })
        .collect()
}

fn angular_step(n: usize, ndirs: usize) -> f64 {
    match n {
        1 => 0.0,
        2 => 2.0 * PI / ndirs as f64,
        _ => (sphere_area(n) / ndirs as f64).powf(1.0 / (n as f64 - 1.0)),
    }
}

/// Orthonormal basis of the tangent space at unit vector `d`.
fn tangents(d: &[f64]) -> Vec<Vec<f64>> {
    let n = d.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        let dd: f64 = v.iter().zip(d).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(d).for_each(|(a, b)| *a -= dd * b);
        for b in &basis {
            let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            basis.push(v.into_iter().map(|x| x / nv).collect());
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

fn checked(v: f64, x: &[f64]) -> Result<f64, NormError> {
    if v.is_nan() {
        Err(NormError::Domain { point: x.to_vec() })
    } else {
        Ok(v.abs())
    }
}

fn annulus_sup<F: Field + ?Sized>(
    f: &F,
    j: i32,
    dirs: &[Vec<f64>],
    opts: &DyadicOptions,
) -> Result<(f64, usize), NormError> {
    let n = f.dim();
    // Stay strictly inside [2^{j-1}, 2^j) so that indicator-like fields are
    // not evaluated on the neighbouring annulus.
    let lo = 2f64.powi(j - 1) * (1.0 + 1e-12);
    let hi = 2f64.powi(j) * (1.0 - 1e-12);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let nr = opts.radial_points.max(2);
    let dlog = (lhi - llo) / (nr - 1) as f64;
    let mut count = 0usize;

    let eval_at = |t: f64, d: &[f64], count: &mut usize| -> Result<f64, NormError> {
        *count += 1;
        let r = t.clamp(llo, lhi).exp().clamp(lo, hi);
        match f.radial_eval(r) {
            Some(v) => checked(v, &[r]),
            None => {
                let x: Vec<f64> = d.iter().map(|c| c * r).collect();
                checked(f.eval(&x), &x)
            }
        }
    };

    let radial = f.radial_eval(lo).is_some();
    let base_dirs: Vec<Vec<f64>> = if radial {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        vec![e]
    } else {
        dirs.to_vec()
    };
    // (value, log radius, direction)
    let mut pts: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    for i in 0..nr {
        let t = llo + dlog * i as f64;
        for d in &base_dirs {
            let v = eval_at(t, d, &mut count)?;
            pts.push((v, t, d.clone()));
        }
    }
    let keep = if radial { 3 } else { 4 };
    pts.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    pts.truncate(keep);

    // Compass search around each maximizer; the step shrinks by 4 per round.
    let mut step_r = dlog / 2.0;
    let mut step_a = angular_step(n, base_dirs.len()) / 2.0;
    for _ in 0..opts.refine_rounds {
        for pt in pts.iter_mut() {
            for _ in 0..32 {
                let (v0, t0, d0) = (pt.0, pt.1, pt.2.clone());
                let mut cands: Vec<(f64, Vec<f64>)> = vec![(t0 - step_r, d0.clone()), (t0 + step_r, d0.clone())];
                if !radial && n > 1 {
                    for tv in tangents(&d0) {
                        for s in [1.0, -1.0] {
                            let mut d: Vec<f64> = d0.iter().zip(&tv).map(|(a, b)| a + s * step_a * b).collect();
                            let nd = norm(&d);
                            d.iter_mut().for_each(|x| *x /= nd);
                            cands.push((t0, d));
                        }
                    }
                }
                let mut best: Option<(f64, f64, Vec<f64>)> = None;
                for (t, d) in cands {
                    let t = t.clamp(llo, lhi);
                    let v = eval_at(t, &d, &mut count)?;
                    if v > best.as_ref().map_or(v0, |b| b.0) {
                        best = Some((v, t, d));
                    }
                }
                match best {
                    Some(b) => *pt = b,
                    None => break,
                }
            }
        }
        step_r /= 4.0;
        step_a /= 4.0;
    }
    let top = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    Ok((top, count))
}

/// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

fn annulus_l2<F: Field + ?Sized>(
    f: &F,
    j: i32,
    dirs: &[Vec<f64>],
    opts: &DyadicOptions,
) -> Result<(f64, usize), NormError> {
    let n = f.dim();
    let nn = n as f64;
    let (llo, lhi) = ((j - 1) as f64 * std::f64::consts::LN_2, j as f64 * std::f64::consts::LN_2);
    let quad_dirs: Vec<Vec<f64>> = match n {
        3 => fibonacci_sphere(128),
        _ => dirs.to_vec(),
    };
    let area = sphere_area(n);
    let mut count = 0usize;
    // Angular mean of f^2 at radius r, times the sphere area.
    let shell = |r: f64, count: &mut usize| -> Result<f64, NormError> {
        if let Some(v) = f.radial_eval(r) {
            *count += 1;
            let v = checked(v, &[r])?;
            return Ok(area * v * v);
        }
        let mut acc = 0.0;
        for d in &quad_dirs {
            *count += 1;
            let x: Vec<f64> = d.iter().map(|c| c * r).collect();
            let v = checked(f.eval(&x), &x)?;
            acc += v * v;
        }
        Ok(area * acc / quad_dirs.len() as f64)
    };
    let integrate = |panels: usize, count: &mut usize| -> Result<f64, NormError> {
        let h = (lhi - llo) / panels as f64;
        let mut s = 0.0;
        for k in 0..panels {
            let mid = llo + h * (k as f64 + 0.5);
            for (x, w) in GL8 {
                let t = mid + 0.5 * h * x;
                s += 0.5 * h * w * (nn * t).exp() * shell(t.exp(), count)?;
            }
        }
        Ok(s)
    };
    let mut panels = 1;
    let mut prev = integrate(panels, &mut count)?;
    loop {
        panels *= 2;
        let cur = integrate(panels, &mut count)?;
        let done = (cur - prev).abs() <= opts.quad_tol * cur.abs().max(1e-300) || panels >= 512;
        prev = cur;
        if done {
            break;
        }
    }
    // Guard against quadrature noise pushing tiny negatives.
    let _ = annulus_volume;
    Ok((prev.max(0.0).sqrt(), count))
}
