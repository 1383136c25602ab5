//! Anticommuting Hermitian matrices `alpha_0, ..., alpha_n` for the Dirac
//! operator in dimension `n`.
//!
//! Construction: `L_1 = [X, Y, Z]` (Pauli matrices) and
//! `L_k = [X (x) e for e in L_{k-1}] ++ [Y (x) I, Z (x) I]`, which gives
//! `2k + 1` mutually anticommuting involutions of size `2^k`. With
//! `k = ceil(n/2)` the kinetic matrices `alpha_1..alpha_n` are the first `n`
//! entries of `L_k` and the mass matrix `alpha_0` is always the last one,
//! `Z (x) I`. For `n = 3` this is the standard Dirac representation
//! `alpha_j = sigma_x (x) sigma_j`, `alpha_0 = sigma_z (x) I_2`.

use crate::linalg::{CMat, I, ONE, ZERO};
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CliffordError {
    #[error("spatial dimension must be at least 1, got {0}")]
    ZeroDimension(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliffordRep {
    n: usize,
    size: usize,
    alphas: Vec<CMat>,
}

fn pauli() -> [CMat; 3] {
    [
        CMat::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]),
        CMat::from_vec(2, 2, vec![ZERO, -I, I, ZERO]),
        CMat::from_vec(2, 2, vec![ONE, ZERO, ZERO, -ONE]),
    ]
}

fn generators(k: usize) -> Vec<CMat> {
    let [x, y, z] = pauli();
    let mut list = vec![x.clone(), y.clone(), z.clone()];
    for level in 2..=k {
        let id = CMat::identity(1 << (level - 1));
        let mut next: Vec<CMat> = list.iter().map(|e| x.kron(e)).collect();
        next.push(y.kron(&id));
        next.push(z.kron(&id));
        list = next;
    }
    list
}

pub fn build_clifford(n: usize) -> Result<CliffordRep, CliffordError> {
    if n == 0 {
        return Err(CliffordError::ZeroDimension(n));
    }
    let k = n.div_ceil(2);
    let mut list = generators(k);
    let mass = list.pop().expect("at least three generators");
    list.truncate(n);
    let mut alphas = Vec::with_capacity(n + 1);
    alphas.push(mass);
    alphas.extend(list);
    Ok(CliffordRep { n, size: 1 << k, alphas })
}

impl CliffordRep {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Matrix size `N = 2^ceil(n/2)`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// `alpha_k`, with `k = 0` the mass matrix.
    pub fn alpha(&self, k: usize) -> &CMat {
        &self.alphas[k]
    }

    pub fn alphas(&self) -> &[CMat] {
        &self.alphas
    }

    /// Builds a representation from explicit matrices, for validation of
    /// hand-made or modified sets.
    pub fn from_matrices(alphas: Vec<CMat>) -> Self {
        let size = alphas.first().map_or(0, |a| a.rows());
        CliffordRep { n: alphas.len().saturating_sub(1), size, alphas }
    }

    /// Dirac symbol `M(xi) = sum_k alpha_k xi_k + m alpha_0`.
    pub fn symbol(&self, xi: &[f64], m: f64) -> CMat {
        assert_eq!(xi.len(), self.n, "symbol: wrong number of frequency components");
        let mut out = self.alphas[0].scale(C64::new(m, 0.0));
        for (k, &x) in xi.iter().enumerate() {
            if x != 0.0 {
                out.add_assign(&self.alphas[k + 1].scale(C64::new(x, 0.0)));
            }
        }
        out
    }

    /// Writes `M(xi) v` into `out` without forming the matrix.
    pub fn symbol_apply(&self, xi: &[f64], m: f64, v: &[C64], out: &mut [C64]) {
        let nn = self.size;
        for (r, o) in out.iter_mut().enumerate().take(nn) {
            let mut acc = ZERO;
            let a0 = self.alphas[0].row(r);
            for c in 0..nn {
                let mut e = a0[c] * m;
                for (k, &x) in xi.iter().enumerate() {
                    e += self.alphas[k + 1][(r, c)] * x;
                }
                acc += e * v[c];
            }
            *o = acc;
        }
    }
}

/// Largest entry of `|alpha_j alpha_k + alpha_k alpha_j - 2 delta_jk I|` over
/// all pairs.
pub fn anticommutator_defect(rep: &CliffordRep) -> f64 {
    let a = rep.alphas();
    let id2 = CMat::identity(rep.size()).scale(C64::new(2.0, 0.0));
    let mut worst: f64 = 0.0;
    for j in 0..a.len() {
        for k in j..a.len() {
            let mut ac = a[j].matmul(&a[k]).add(&a[k].matmul(&a[j]));
            if j == k {
                ac = ac.sub(&id2);
            }
            worst = worst.max(ac.max_abs());
        }
    }
    worst
}
