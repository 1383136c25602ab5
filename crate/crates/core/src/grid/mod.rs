//! Periodic-box discretization: grids, spinor fields, Fourier multipliers for
//! the free operators and their resolvents, and the dense perturbed operator.
//!
//! The box is `[-L, L)^n` with `M` samples per axis at the half-offset points
//! `x_i = -L + (i + 1/2) h`, `h = 2L/M`, so the origin is never a sample.
//! Frequencies are `xi = (pi/L) k` with `k` in `{-M/2, ..., M/2 - 1}`. Fields
//! are stored point-major: entry `p * N + s` is spinor component `s` at
//! lattice point `p`, and lattice points are row-major with the last axis
//! fastest.

mod assemble;
mod fft;
mod resolvent;
mod snapshot;

pub use assemble::{assemble_perturbed, free_spectrum, DEFAULT_DENSE_LIMIT};
pub use fft::{fft_nd, FftDirection};
pub use resolvent::{apply_free_operator, apply_free_resolvent, gradient, ResolventMultiplier, SINGULAR_TOL};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC};

use crate::linalg::ZERO;
use crate::potential::PotentialError;
use num_complex::Complex64 as C64;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Invalid(String),
    #[error(
        "z = {z} is within {distance:.3e} of the symbol value {symbol} at xi = {xi:?}; \
         move z off the discrete spectrum"
    )]
    NearSingular { z: C64, xi: Vec<f64>, symbol: f64, distance: f64 },
    #[error(
        "dense operator of size {dim} exceeds the limit {limit}; use bs_scan (matrix-free) \
         or a coarser grid"
    )]
    TooLarge { dim: usize, limit: usize },
    #[error("spinor size mismatch: expected {expected}, got {got}")]
    SpinMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("snapshot: {0}")]
    Snapshot(String),
}

/// Free operator discretized as a Fourier multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `-Delta`, symbol `|xi|^2`
    Schrodinger,
    /// `sqrt(m^2 - Delta)`, symbol `sqrt(m^2 + |xi|^2)`
    KleinGordon,
    /// `-i alpha . grad + m alpha_0`, symbol `M(xi)`
    Dirac,
}

impl OperatorKind {
    pub fn id(self) -> &'static str {
        match self {
            OperatorKind::Schrodinger => "schrodinger",
            OperatorKind::KleinGordon => "klein_gordon",
            OperatorKind::Dirac => "dirac",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for OperatorKind {
    type Err = GridError;
    fn from_str(s: &str) -> Result<Self, GridError> {
        match s {
            "schrodinger" => Ok(OperatorKind::Schrodinger),
            "klein_gordon" | "klein-gordon" => Ok(OperatorKind::KleinGordon),
            "dirac" => Ok(OperatorKind::Dirac),
            _ => Err(GridError::Invalid(format!(
                "unknown operator kind '{s}', expected schrodinger, klein_gordon or dirac"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    n: usize,
    half_length: f64,
    samples: usize,
    spin: usize,
}

impl GridSpec {
    pub fn new(n: usize, half_length: f64, samples: usize, spin: usize) -> Result<Self, GridError> {
        let bad = |m: String| Err(GridError::Invalid(m));
        if n == 0 {
            return bad("dimension must be at least 1".into());
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return bad(format!("half length must be > 0, got {half_length}"));
        }
        if samples < 2 || samples % 2 != 0 {
            return bad(format!("samples per axis must be even and >= 2, got {samples}"));
        }
        if spin == 0 {
            return bad("spinor size must be at least 1".into());
        }
        match samples.checked_pow(n as u32).and_then(|p| p.checked_mul(spin)) {
            Some(d) if d <= 1 << 28 => {}
            _ => return bad(format!("{samples}^{n} x {spin} degrees of freedom is too many")),
        }
        Ok(GridSpec { n, half_length, samples, spin })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// `M`
    pub fn samples(&self) -> usize {
        self.samples
    }

    /// `N`
    pub fn spin(&self) -> usize {
        self.spin
    }

    pub fn with_spin(&self, spin: usize) -> Self {
        GridSpec { spin, ..self.clone() }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.samples as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    /// `M^n`
    pub fn points(&self) -> usize {
        self.samples.pow(self.n as u32)
    }

    /// `M^n N`
    pub fn dof(&self) -> usize {
        self.points() * self.spin
    }

    pub fn multi_index(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        for d in (0..self.n).rev() {
            idx[d] = p % self.samples;
            p /= self.samples;
        }
        idx
    }

    pub fn coord(&self, p: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(p).into_iter().map(|i| -self.half_length + (i as f64 + 0.5) * h).collect()
    }

    pub fn radius(&self, p: usize) -> f64 {
        self.coord(p).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// All `|x_p|`, in point order.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.points()).map(|p| self.radius(p)).collect()
    }

    /// Signed frequency index of FFT bin `i`.
    pub fn freq_index(&self, i: usize) -> i64 {
        if i < self.samples / 2 { i as i64 } else { i as i64 - self.samples as i64 }
    }

    /// `xi` of FFT bin `p`.
    pub fn xi(&self, p: usize) -> Vec<f64> {
        let s = std::f64::consts::PI / self.half_length;
        self.multi_index(p).into_iter().map(|i| s * self.freq_index(i) as f64).collect()
    }

    pub fn xi_sq(&self, p: usize) -> f64 {
        self.xi(p).iter().map(|x| x * x).sum()
    }
}

/// Spinor field sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldOnGrid {
    pub grid: GridSpec,
    pub values: Vec<C64>,
}

impl FieldOnGrid {
    pub fn zeros(grid: &GridSpec) -> Self {
        FieldOnGrid { values: vec![ZERO; grid.dof()], grid: grid.clone() }
    }

    pub fn from_values(grid: &GridSpec, values: Vec<C64>) -> Result<Self, GridError> {
        if values.len() != grid.dof() {
            return Err(GridError::Invalid(format!("expected {} values, got {}", grid.dof(), values.len())));
        }
        Ok(FieldOnGrid { grid: grid.clone(), values })
    }

    /// `values[p N + s] = f(x_p, s)`
    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(&[f64], usize) -> C64) -> Self {
        let mut values = Vec::with_capacity(grid.dof());
        for p in 0..grid.points() {
            let x = grid.coord(p);
            for s in 0..grid.spin() {
                values.push(f(&x, s));
            }
        }
        FieldOnGrid { grid: grid.clone(), values }
    }

    /// Plane wave `e^{i xi_k . x} v` for FFT bin `k`.
    pub fn plane_wave(grid: &GridSpec, k: usize, v: &[C64]) -> Self {
        let xi = grid.xi(k);
        Self::from_fn(grid, |x, s| {
            let ph: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
            C64::from_polar(1.0, ph) * v[s]
        })
    }

    pub fn spinor(&self, p: usize) -> &[C64] {
        let s = self.grid.spin;
        &self.values[p * s..(p + 1) * s]
    }

    /// `(sum |u|^2 h^n)^{1/2}`
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// `sum conj(u) v h^n`
    pub fn inner(&self, other: &FieldOnGrid) -> C64 {
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.cell_volume()
    }

    /// Pointwise spinor norms `|u(x_p)|^2`.
    pub fn pointwise_sq(&self) -> Vec<f64> {
        self.values.chunks(self.grid.spin).map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect()
    }

    pub fn scale(&mut self, c: C64) {
        self.values.iter_mut().for_each(|z| *z *= c);
    }

    /// `max |u - v|` over entries.
    pub fn max_diff(&self, other: &FieldOnGrid) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(3, 4.0, 7, 4).is_err());
        assert!(GridSpec::new(0, 4.0, 8, 4).is_err());
        assert!(GridSpec::new(3, -1.0, 8, 4).is_err());
        assert!(GridSpec::new(3, 4.0, 8, 0).is_err());
        let g = GridSpec::new(3, 4.0, 8, 4).unwrap();
        assert_eq!(g.dof(), 2048);
        assert_eq!(g.spacing(), 1.0);
    }

    #[test]
    fn no_sample_at_origin() {
        let g = GridSpec::new(3, 1.0, 4, 1).unwrap();
        assert!(g.radii().iter().all(|&r| r > 0.0));
        assert_eq!(g.coord(0), vec![-0.75, -0.75, -0.75]);
        assert_eq!(g.multi_index(1), vec![0, 0, 1]);
    }

    #[test]
    fn frequency_lattice() {
        let g = GridSpec::new(1, std::f64::consts::PI, 6, 1).unwrap();
        let ks: Vec<i64> = (0..6).map(|i| g.freq_index(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, -3, -2, -1]);
        assert_eq!(g.xi(3), vec![-3.0]);
    }

    #[test]
    fn field_norms() {
        let g = GridSpec::new(2, 1.0, 4, 2).unwrap();
        let f = FieldOnGrid::from_fn(&g, |_, s| C64::new(s as f64, 0.0));
        // |u|^2 = 1 everywhere, area 4.
        assert!((f.l2_norm() - 2.0).abs() < 1e-15);
        assert!((f.inner(&f).re - 4.0).abs() < 1e-15);
        assert!(f.pointwise_sq().iter().all(|&v| v == 1.0));
        assert!("dirac".parse::<OperatorKind>().is_ok());
        assert!("maxwell".parse::<OperatorKind>().is_err());
    }
}
