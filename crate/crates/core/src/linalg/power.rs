//! Largest singular value of a matrix-free operator by power iteration on
//! `K^* K`.

use super::{vec_norm, CMat, ZERO};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

/// A square linear map on `C^dim` together with its adjoint.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]);
}

impl LinearOperator for CMat {
    fn dim(&self) -> usize {
        assert!(self.is_square());
        self.rows()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matvec_into(x, y);
    }
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(&self.adjoint_matvec(x));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerOptions {
    /// Relative residual `||K^*K v - mu v|| <= tol * mu` that stops a run.
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions { tol: 1e-4, max_iter: 3000, restarts: 3, seed: 0x5eed }
    }
}

#[derive(Clone, Debug)]
pub struct PowerResult {
    pub norm: f64,
    pub iterations: usize,
    /// Residual of the accepted run, relative to `mu`.
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum PowerError {
    #[error(
        "power iteration did not reach residual {tol:e} within {max_iter} iterations \
         (restart {restart}); last Rayleigh quotients {history:?}"
    )]
    NoConvergence { tol: f64, max_iter: usize, restart: usize, history: Vec<f64>, estimate: f64 },
}

impl PowerError {
    /// Best norm estimate seen before giving up.
    pub fn estimate(&self) -> f64 {
        match self {
            PowerError::NoConvergence { estimate, .. } => *estimate,
        }
    }
}

pub fn power_norm<K: LinearOperator + ?Sized>(k: &K, opts: &PowerOptions) -> Result<PowerResult, PowerError> {
    let n = k.dim();
    let mut best: Option<PowerResult> = None;
    let mut total = 0;
    for r in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
        let mut v: Vec<C64> = (0..n)
            .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let nv = vec_norm(&v);
        if nv == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let mut w = vec![ZERO; n];
        let mut u = vec![ZERO; n];
        let mut history: Vec<f64> = Vec::new();
        let mut done = None;
        for it in 1..=opts.max_iter {
            k.apply(&v, &mut w);
            k.apply_adjoint(&w, &mut u);
            let mu = vec_norm(&w).powi(2);
            history.push(mu);
            if mu == 0.0 {
                done = Some(PowerResult { norm: 0.0, iterations: it, residual: 0.0 });
                break;
            }
            let res = u.iter().zip(&v).map(|(a, b)| (a - b * mu).norm_sqr()).sum::<f64>().sqrt();
            if res <= opts.tol * mu {
                done = Some(PowerResult { norm: mu.sqrt(), iterations: it, residual: res / mu });
                break;
            }
            let nu = vec_norm(&u);
            v.iter_mut().zip(&u).for_each(|(a, b)| *a = b / nu);
        }
        match done {
            Some(mut res) => {
                total += res.iterations;
                res.iterations = total;
                if best.as_ref().is_none_or(|b| res.norm > b.norm) {
                    best = Some(res);
                }
            }
            None => {
                let tail = history.len().saturating_sub(8);
                let estimate = history.last().copied().unwrap_or(0.0).sqrt();
                return Err(PowerError::NoConvergence {
                    tol: opts.tol,
                    max_iter: opts.max_iter,
                    restart: r,
                    history: history[tail..].iter().map(|x| x.sqrt()).collect(),
                    estimate: best.map_or(estimate, |b| b.norm.max(estimate)),
                });
            }
        }
    }
    Ok(best.unwrap_or(PowerResult { norm: 0.0, iterations: total, residual: 0.0 }))
}
