//! The Birman-Schwinger operator `K_z = A (H_0 - z)^{-1} B^*` on a grid, its
//! norm, and scans of `||K_z||` over a rectangle in the complex plane.
//!
//! `A` and `B` come from the pointwise polar splitting `V = B^* A` and act as
//! block-diagonal multiplications; the resolvent is a Fourier multiplier.

use crate::enclosure::DiskPair;
use crate::grid::{FieldOnGrid, GridError, GridSpec, OperatorKind, ResolventMultiplier};
use crate::linalg::{largest_singular_value, power_norm, CMat, LinearOperator, PowerError, PowerOptions, PowerResult, ONE, ZERO};
use crate::par;
use crate::potential::{polar_factorize, PotentialSpec};
use crate::weights_norms::WeightSpec;
use num_complex::Complex64 as C64;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BsError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    NoConvergence(#[from] PowerError),
    #[error("invalid scan: {0}")]
    InvalidScan(String),
}

/// `K_z` as a matrix-free operator.
pub struct BsOperator {
    grid: GridSpec,
    res: ResolventMultiplier,
    res_adj: ResolventMultiplier,
    /// Per lattice point, row-major `N x N`; empty where `V` vanishes.
    a: Vec<Vec<C64>>,
    b: Vec<Vec<C64>>,
}

/// Pointwise `A(x_p)` and `B(x_p)` for every lattice point.
pub struct Factors {
    a: Vec<Vec<C64>>,
    b: Vec<Vec<C64>>,
}

impl Factors {
    pub fn new(v: &PotentialSpec, grid: &GridSpec) -> Result<Factors, GridError> {
        if v.size() != grid.spin() {
            return Err(GridError::SpinMismatch { expected: grid.spin(), got: v.size() });
        }
        if v.n() != grid.n() {
            return Err(GridError::Invalid(format!("potential is {}-dimensional, grid is {}", v.n(), grid.n())));
        }
        let fac = polar_factorize(v);
        let per: Vec<Result<(Vec<C64>, Vec<C64>), GridError>> = par::map_range(grid.points(), |p| {
            let x = grid.coord(p);
            if v.opnorm(&x)? == 0.0 {
                return Ok((vec![], vec![]));
            }
            let f = fac.at(&x)?;
            Ok((f.a.into_vec(), f.b.into_vec()))
        });
        let (mut a, mut b) = (Vec::with_capacity(per.len()), Vec::with_capacity(per.len()));
        for r in per {
            let (x, y) = r?;
            a.push(x);
            b.push(y);
        }
        Ok(Factors { a, b })
    }

    /// `sup_p ||A(x_p)|| w(|x_p|)`
    fn weighted_sup(&self, grid: &GridSpec, which: &[Vec<C64>], w: impl Fn(f64) -> f64) -> f64 {
        let s = grid.spin();
        let mut best: f64 = 0.0;
        for (p, m) in which.iter().enumerate() {
            if m.is_empty() {
                continue;
            }
            let norm = largest_singular_value(&CMat::from_vec(s, s, m.clone()));
            best = best.max(norm * w(grid.radius(p)));
        }
        best
    }
}

/// `y_p = M_p x_p` (`adjoint`: `M_p^* x_p`) for every point.
fn block_apply(blocks: &[Vec<C64>], spin: usize, adjoint: bool, x: &[C64], y: &mut [C64]) {
    for (p, m) in blocks.iter().enumerate() {
        let (xs, ys) = (&x[p * spin..(p + 1) * spin], &mut y[p * spin..(p + 1) * spin]);
        if m.is_empty() {
            ys.fill(ZERO);
            continue;
        }
        for i in 0..spin {
            let mut acc = ZERO;
            for j in 0..spin {
                let e = if adjoint { m[j * spin + i].conj() } else { m[i * spin + j] };
                acc += e * xs[j];
            }
            ys[i] = acc;
        }
    }
}

impl BsOperator {
    pub fn new(kind: OperatorKind, m: f64, z: C64, v: &PotentialSpec, grid: &GridSpec) -> Result<Self, GridError> {
        let f = Factors::new(v, grid)?;
        Self::from_factors(kind, m, z, &f, grid)
    }

    pub fn from_factors(kind: OperatorKind, m: f64, z: C64, f: &Factors, grid: &GridSpec) -> Result<Self, GridError> {
        let res = ResolventMultiplier::new(kind, m, z, grid)?;
        Ok(BsOperator { grid: grid.clone(), res_adj: res.adjoint(), res, a: f.a.clone(), b: f.b.clone() })
    }

    pub fn z(&self) -> C64 {
        self.res.z()
    }

    /// Dense matrix, column by column.
    pub fn to_dense(&self, limit: usize) -> Result<CMat, GridError> {
        let dim = self.dim();
        if dim > limit {
            return Err(GridError::TooLarge { dim, limit });
        }
        let cols = par::map_range(dim, |c| {
            let mut e = vec![ZERO; dim];
            e[c] = ONE;
            let mut y = vec![ZERO; dim];
            self.apply(&e, &mut y);
            y
        });
        let mut k = CMat::zeros(dim, dim);
        for (c, col) in cols.iter().enumerate() {
            k.set_column(c, col);
        }
        Ok(k)
    }
}

impl LinearOperator for BsOperator {
    fn dim(&self) -> usize {
        self.grid.dof()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let spin = self.grid.spin();
        let mut t = vec![ZERO; x.len()];
        block_apply(&self.b, spin, true, x, &mut t);
        self.res.apply_in_place(&mut t);
        block_apply(&self.a, spin, false, &t, y);
    }

    /// `K_z^* = B (H_0 - conj z)^{-1} A^*`
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        let spin = self.grid.spin();
        let mut t = vec![ZERO; x.len()];
        block_apply(&self.a, spin, true, x, &mut t);
        self.res_adj.apply_in_place(&mut t);
        block_apply(&self.b, spin, false, &t, y);
    }
}

/// `A R_0(z) B^* f`
pub fn bs_apply(
    kind: OperatorKind,
    m: f64,
    z: C64,
    v: &PotentialSpec,
    f: &FieldOnGrid,
) -> Result<FieldOnGrid, BsError> {
    let k = BsOperator::new(kind, m, z, v, &f.grid)?;
    let mut out = FieldOnGrid::zeros(&f.grid);
    k.apply(&f.values, &mut out.values);
    Ok(out)
}

pub fn bs_norm(
    kind: OperatorKind,
    m: f64,
    z: C64,
    v: &PotentialSpec,
    grid: &GridSpec,
    opts: &PowerOptions,
) -> Result<PowerResult, BsError> {
    let k = BsOperator::new(kind, m, z, v, grid)?;
    Ok(power_norm(&k, opts)?)
}

/// Dense `K_z`, refused above `limit` degrees of freedom.
pub fn bs_dense(
    kind: OperatorKind,
    m: f64,
    z: C64,
    v: &PotentialSpec,
    grid: &GridSpec,
    limit: usize,
) -> Result<CMat, BsError> {
    Ok(BsOperator::new(kind, m, z, v, grid)?.to_dense(limit)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl ScanRect {
    pub fn validate(&self) -> Result<(), BsError> {
        let bad = |s: String| Err(BsError::InvalidScan(s));
        for (k, v) in [("re_min", self.re_min), ("re_max", self.re_max), ("im_min", self.im_min), ("im_max", self.im_max)] {
            if !v.is_finite() {
                return bad(format!("{k} must be finite, got {v}"));
            }
        }
        if self.re_min > self.re_max {
            return bad(format!("re_min {} > re_max {}", self.re_min, self.re_max));
        }
        if self.im_min > self.im_max {
            return bad(format!("im_min {} > im_max {}", self.im_min, self.im_max));
        }
        if self.n_re == 0 || self.n_im == 0 {
            return bad("resolution must be at least 1 x 1".into());
        }
        Ok(())
    }

    /// Point `(i_re, i_im)`; endpoints included.
    pub fn point(&self, i_re: usize, i_im: usize) -> C64 {
        let lerp = |a: f64, b: f64, i: usize, n: usize| {
            if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 }
        };
        C64::new(lerp(self.re_min, self.re_max, i_re, self.n_re), lerp(self.im_min, self.im_max, i_im, self.n_im))
    }

    pub fn len(&self) -> usize {
        self.n_re * self.n_im
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    pub power: PowerOptions,
    /// `|Im z|` below which points are left out of containment checks.
    pub cutoff: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { power: PowerOptions::default(), cutoff: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BsScan {
    pub rect: ScanRect,
    /// Indexed `i_im * n_re + i_re`; `NaN` at excluded points.
    pub values: Vec<f64>,
    /// Points too close to the discrete spectrum.
    pub excluded: Vec<C64>,
    /// Points whose power iteration hit its budget; the value is the best
    /// estimate reached.
    pub unconverged: Vec<C64>,
    pub kind: OperatorKind,
    pub m: f64,
    pub potential_hash: String,
    pub grid: GridSpec,
    pub tol: f64,
    pub cutoff: f64,
    /// Total power iterations over all points.
    pub iterations: usize,
}

pub fn bs_scan(
    kind: OperatorKind,
    m: f64,
    v: &PotentialSpec,
    grid: &GridSpec,
    rect: &ScanRect,
    opts: &ScanOptions,
) -> Result<BsScan, BsError> {
    rect.validate()?;
    if !(opts.cutoff >= 0.0 && opts.cutoff.is_finite()) {
        return Err(BsError::InvalidScan(format!("cutoff must be >= 0, got {}", opts.cutoff)));
    }
    let factors = Factors::new(v, grid)?;
    enum Pt {
        Value(f64, usize),
        Unconverged(f64),
        Excluded,
    }
    let pts: Vec<Result<Pt, BsError>> = par::map_range(rect.len(), |i| {
        let z = rect.point(i % rect.n_re, i / rect.n_re);
        let k = match BsOperator::from_factors(kind, m, z, &factors, grid) {
            Ok(k) => k,
            Err(GridError::NearSingular { .. }) => return Ok(Pt::Excluded),
            Err(e) => return Err(e.into()),
        };
        Ok(match power_norm(&k, &opts.power) {
            Ok(r) => Pt::Value(r.norm, r.iterations),
            Err(e) => Pt::Unconverged(e.estimate()),
        })
    });
    let mut scan = BsScan {
        rect: *rect,
        values: Vec::with_capacity(rect.len()),
        excluded: vec![],
        unconverged: vec![],
        kind,
        m,
        potential_hash: v.fingerprint(),
        grid: grid.clone(),
        tol: opts.power.tol,
        cutoff: opts.cutoff,
        iterations: 0,
    };
    for (i, p) in pts.into_iter().enumerate() {
        let z = rect.point(i % rect.n_re, i / rect.n_re);
        match p? {
            Pt::Value(x, it) => {
                scan.values.push(x);
                scan.iterations += it;
            }
            Pt::Unconverged(x) => {
                scan.values.push(x);
                scan.iterations += opts.power.max_iter * opts.power.restarts.max(1);
                scan.unconverged.push(z);
            }
            Pt::Excluded => {
                scan.values.push(f64::NAN);
                scan.excluded.push(z);
            }
        }
    }
    Ok(scan)
}

impl BsScan {
    pub fn point(&self, i: usize) -> C64 {
        self.rect.point(i % self.rect.n_re, i / self.rect.n_re)
    }

    /// Sample points with `||K_z|| >= 1`.
    pub fn region(&self) -> Vec<C64> {
        (0..self.values.len()).filter(|&i| self.values[i] >= 1.0).map(|i| self.point(i)).collect()
    }

    /// `(re_min, re_max, im_min, im_max)` of the region, if non-empty.
    pub fn bounding_box(&self) -> Option<(f64, f64, f64, f64)> {
        let r = self.region();
        if r.is_empty() {
            return None;
        }
        let f = |g: fn(&C64) -> f64, init: f64, op: fn(f64, f64) -> f64| r.iter().map(g).fold(init, op);
        Some((
            f(|z| z.re, f64::INFINITY, f64::min),
            f(|z| z.re, f64::NEG_INFINITY, f64::max),
            f(|z| z.im, f64::INFINITY, f64::min),
            f(|z| z.im, f64::NEG_INFINITY, f64::max),
        ))
    }

    /// Region points with `|Im z| > cutoff` that lie outside `disks`.
    pub fn outside(&self, disks: &DiskPair, tol: f64) -> Vec<C64> {
        self.region().into_iter().filter(|z| z.im.abs() > self.cutoff && !disks.contains(*z, tol)).collect()
    }

    /// Columns `re,im,norm,excluded`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,norm,excluded\n");
        for (i, v) in self.values.iter().enumerate() {
            let z = self.point(i);
            let (val, ex) = if v.is_nan() { (String::new(), 1) } else { (format!("{v:.11e}"), 0) };
            let _ = writeln!(s, "{:.11e},{:.11e},{val},{ex}", z.re, z.im);
        }
        s
    }
}

/// `||K_{lambda + i eps}||` and `||K_{lambda - i eps}||` for a real `lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxyRow {
    pub epsilon: f64,
    /// `None` when the point is excluded.
    pub upper: Option<f64>,
    pub lower: Option<f64>,
}

pub const PROXY_EPSILONS: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Finite-`eps` values on both sides of the real axis; no limit is taken.
pub fn boundary_proxies(
    kind: OperatorKind,
    m: f64,
    lambda: f64,
    v: &PotentialSpec,
    grid: &GridSpec,
    opts: &PowerOptions,
) -> Result<Vec<ProxyRow>, BsError> {
    let factors = Factors::new(v, grid)?;
    let at = |z: C64| -> Result<Option<f64>, BsError> {
        match BsOperator::from_factors(kind, m, z, &factors, grid) {
            Ok(k) => Ok(Some(power_norm(&k, opts).unwrap_or_else(|e| PowerResult {
                norm: e.estimate(),
                iterations: 0,
                residual: f64::NAN,
            }).norm)),
            Err(GridError::NearSingular { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    PROXY_EPSILONS
        .iter()
        .map(|&e| {
            Ok(ProxyRow { epsilon: e, upper: at(C64::new(lambda, e))?, lower: at(C64::new(lambda, -e))? })
        })
        .collect()
}

/// Factors of `||K_z|| <= ||A tau|| ||tau^-1 R_0 tau^-1|| ||tau B||`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormChain {
    pub k_norm: f64,
    pub a_tau: f64,
    pub middle: f64,
    pub b_tau: f64,
}

impl NormChain {
    pub fn product(&self) -> f64 {
        self.a_tau * self.middle * self.b_tau
    }

    /// Up to the relative accuracy `tol` of the two power iterations.
    pub fn holds(&self, tol: f64) -> bool {
        self.k_norm <= self.product() * (1.0 + tol)
    }
}

struct Sandwiched {
    res: ResolventMultiplier,
    res_adj: ResolventMultiplier,
    inv_w: Vec<f64>,
    spin: usize,
}

impl Sandwiched {
    fn run(&self, res: &ResolventMultiplier, x: &[C64], y: &mut [C64]) {
        for (p, (o, i)) in y.chunks_mut(self.spin).zip(x.chunks(self.spin)).enumerate() {
            o.iter_mut().zip(i).for_each(|(o, i)| *o = i * self.inv_w[p]);
        }
        res.apply_in_place(y);
        for (p, o) in y.chunks_mut(self.spin).enumerate() {
            o.iter_mut().for_each(|o| *o *= self.inv_w[p]);
        }
    }
}

impl LinearOperator for Sandwiched {
    fn dim(&self) -> usize {
        self.inv_w.len() * self.spin
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.run(&self.res, x, y)
    }
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.run(&self.res_adj, x, y)
    }
}

/// Measures every factor of the `tau_eps` norm chain for Klein-Gordon.
pub fn kg_norm_chain(
    m: f64,
    z: C64,
    epsilon: f64,
    v: &PotentialSpec,
    grid: &GridSpec,
    opts: &PowerOptions,
) -> Result<NormChain, BsError> {
    let tau = WeightSpec::Tau { epsilon };
    tau.validate().map_err(|e| BsError::InvalidScan(e.to_string()))?;
    let kind = OperatorKind::KleinGordon;
    let factors = Factors::new(v, grid)?;
    let k = BsOperator::from_factors(kind, m, z, &factors, grid)?;
    let k_norm = power_norm(&k, opts)?.norm;
    let res = ResolventMultiplier::new(kind, m, z, grid)?;
    let mid = Sandwiched {
        res_adj: res.adjoint(),
        res,
        inv_w: grid.radii().into_iter().map(|r| 1.0 / tau.eval(r)).collect(),
        spin: grid.spin(),
    };
    let middle = power_norm(&mid, opts)?.norm;
    let w = |r: f64| tau.eval(r);
    Ok(NormChain {
        k_norm,
        a_tau: factors.weighted_sup(grid, &factors.a, w),
        middle,
        b_tau: factors.weighted_sup(grid, &factors.b, w),
    })
}
