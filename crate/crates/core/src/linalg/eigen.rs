//! Eigenvalues of dense non-Hermitian complex matrices.
//!
//! Householder reduction to upper Hessenberg form followed by the implicit
//! single-shift complex QR iteration (Wilkinson shifts, exceptional shifts on
//! stagnation). Only eigenvalues are accumulated; a handful of eigenpairs
//! are afterwards recovered by inverse iteration on the Hessenberg matrix to
//! check residuals against the original operator.

use super::{abs1, vec_norm, CMat, ONE, ZERO};
use crate::par;
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error(
        "QR iteration did not converge: {converged} of {n} eigenvalues found, \
         active window [{lo}, {hi}] after {iterations} iterations (last subdiagonal {last_subdiag:e})"
    )]
    NoConvergence {
        n: usize,
        converged: usize,
        lo: usize,
        hi: usize,
        iterations: usize,
        last_subdiag: f64,
    },
    #[error("residual check failed for eigenvalue {lambda}: |Hv - lv| = {residual:e} > {tolerance:e}")]
    Residual { lambda: C64, residual: f64, tolerance: f64 },
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Number of eigenpairs whose residual is verified (evenly spread over
    /// the sorted spectrum).
    pub residual_samples: usize,
    /// Residual tolerance relative to `max(1, ||H||_inf) * ||v||`.
    pub residual_tol: f64,
    /// Iteration budget per eigenvalue.
    pub iterations_per_eigenvalue: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { residual_samples: 10, residual_tol: 1e-8, iterations_per_eigenvalue: 30 }
    }
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Sorted by real part, then imaginary part.
    pub values: Vec<C64>,
    /// Worst relative residual among the checked pairs.
    pub max_residual: f64,
    pub checked: usize,
    pub qr_iterations: usize,
}

pub fn eigenvalues(h: &CMat, opts: &EigenOptions) -> Result<EigenResult, EigenError> {
    if !h.is_square() {
        return Err(EigenError::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    if !h.is_finite() {
        return Err(EigenError::NonFinite);
    }
    let n = h.rows();
    if n == 0 {
        return Ok(EigenResult { values: vec![], max_residual: 0.0, checked: 0, qr_iterations: 0 });
    }
    let mut work = h.clone();
    let reflectors = hessenberg(&mut work);
    let hess = work.clone();
    let (mut values, iters) = hqr(&mut work, opts.iterations_per_eigenvalue)?;
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let hnorm = h.norm_inf().max(1.0);
    let tol = opts.residual_tol * hnorm;
    let samples = opts.residual_samples.min(n);
    let mut max_residual: f64 = 0.0;
    for s in 0..samples {
        let idx = if samples == 1 { 0 } else { s * (n - 1) / (samples - 1) };
        let lambda = values[idx];
        let mut v = inverse_iteration(&hess, lambda, hnorm);
        apply_reflectors(&reflectors, &mut v);
        let hv = h.matvec(&v);
        let res = hv.iter().zip(&v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt()
            / vec_norm(&v);
        max_residual = max_residual.max(res / hnorm);
        if !(res <= tol) {
            return Err(EigenError::Residual { lambda, residual: res, tolerance: tol });
        }
    }
    Ok(EigenResult { values, max_residual, checked: samples, qr_iterations: iters })
}

/// Householder vector acting on indices `start..n`.
struct Reflector {
    start: usize,
    v: Vec<C64>,
}

/// Reduces `a` in place to upper Hessenberg form `Q^* a Q` and returns the
/// reflectors defining `Q = H_0 H_1 ...`.
fn hessenberg(a: &mut CMat) -> Vec<Reflector> {
    let n = a.rows();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    for k in 0..n - 2 {
        let start = k + 1;
        let x: Vec<C64> = (start..n).map(|i| a[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 || xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = vec_norm(&v);
        v.iter_mut().for_each(|z| *z /= vn);

        // Left: rows start.., columns k.. ; a <- (I - 2vv^*) a
        let cols = n - k;
        let w: Vec<C64> = {
            let blocks = cols.div_ceil(64);
            let parts = par::map_range(blocks, |b| {
                let c0 = k + b * 64;
                let c1 = (c0 + 64).min(n);
                let mut acc = vec![ZERO; c1 - c0];
                for (r, vr) in v.iter().enumerate() {
                    let vc = vr.conj();
                    let row = &a.row(start + r)[c0..c1];
                    for (s, x) in acc.iter_mut().zip(row) {
                        *s += vc * x;
                    }
                }
                acc
            });
            parts.concat()
        };
        {
            let data = &mut a.as_mut_slice()[start * n..];
            par::for_each_chunk_mut(data, n, |r, row| {
                let f = v[r] * 2.0;
                for (x, wc) in row[k..].iter_mut().zip(&w) {
                    *x -= f * wc;
                }
            });
        }
        // Right: all rows, columns start.. ; a <- a (I - 2vv^*)
        par::for_each_chunk_mut(a.as_mut_slice(), n, |_, row| {
            let seg = &mut row[start..];
            let t: C64 = seg.iter().zip(&v).map(|(x, y)| x * y).sum::<C64>() * 2.0;
            for (x, y) in seg.iter_mut().zip(&v) {
                *x -= t * y.conj();
            }
        });
        a[(start, k)] = alpha;
        for i in start + 1..n {
            a[(i, k)] = ZERO;
        }
        out.push(Reflector { start, v });
    }
    out
}

/// `v <- Q v`
fn apply_reflectors(refl: &[Reflector], v: &mut [C64]) {
    for r in refl.iter().rev() {
        let seg = &mut v[r.start..];
        let t: C64 = r.v.iter().zip(seg.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() * 2.0;
        for (x, y) in seg.iter_mut().zip(&r.v) {
            *x -= t * y;
        }
    }
}

/// Givens pair `(c, s)` with real `c` such that
/// `[c s; -conj(s) c] [x; y] = [r; 0]`.
#[inline]
fn givens(x: C64, y: C64) -> (f64, C64) {
    if y == ZERO {
        return (1.0, ZERO);
    }
    let ax = x.norm();
    if ax == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    let nrm = (ax * ax + y.norm_sqr()).sqrt();
    (ax / nrm, (x / ax) * y.conj() / nrm)
}

fn hqr(h: &mut CMat, per_eig: usize) -> Result<(Vec<C64>, usize), EigenError> {
    let n = h.rows();
    let ulp = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / ulp);
    let mut w = vec![ZERO; n];
    let mut total = 0usize;
    let mut hi = n as isize - 1;
    let itmax = per_eig.max(10) * n.max(10);
    let mut its_here = 0usize;

    while hi >= 0 {
        let hiu = hi as usize;
        // Look for a negligible subdiagonal.
        let mut lo = 0usize;
        let mut k = hiu;
        while k > 0 {
            let sub = abs1(h[(k, k - 1)]);
            if sub <= smlnum {
                lo = k;
                break;
            }
            let mut tst = abs1(h[(k - 1, k - 1)]) + abs1(h[(k, k)]);
            if tst == 0.0 {
                if k >= 2 {
                    tst += abs1(h[(k - 1, k - 2)]);
                }
                if k + 1 < n {
                    tst += abs1(h[(k + 1, k)]);
                }
            }
            if sub <= ulp * tst {
                let ab = sub.max(abs1(h[(k - 1, k)]));
                let ba = sub.min(abs1(h[(k - 1, k)]));
                let d = h[(k - 1, k - 1)] - h[(k, k)];
                let aa = abs1(h[(k, k)]).max(abs1(d));
                let bb = abs1(h[(k, k)]).min(abs1(d));
                let s = aa + ab;
                if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                    lo = k;
                    break;
                }
            }
            k -= 1;
        }
        if lo > 0 {
            h[(lo, lo - 1)] = ZERO;
        }
        if lo == hiu {
            w[hiu] = h[(hiu, hiu)];
            hi -= 1;
            its_here = 0;
            continue;
        }
        if its_here >= per_eig.max(10) * (hiu - lo + 1).max(2) || total >= itmax {
            return Err(EigenError::NoConvergence {
                n,
                converged: n - 1 - hiu,
                lo,
                hi: hiu,
                iterations: total,
                last_subdiag: h[(hiu, hiu - 1)].norm(),
            });
        }

        // Shift.
        let t = if its_here == 10 {
            h[(lo, lo)] + 0.75 * h[(lo + 1, lo)].norm()
        } else if its_here == 20 {
            h[(hiu, hiu)] + 0.75 * h[(hiu, hiu - 1)].norm()
        } else {
            let mut t = h[(hiu, hiu)];
            let u = h[(hiu - 1, hiu)].sqrt() * h[(hiu, hiu - 1)].sqrt();
            let s = abs1(u);
            if s != 0.0 {
                let x = (h[(hiu - 1, hiu - 1)] - t) * 0.5;
                let sx = abs1(x);
                let s = s.max(sx);
                let mut y = ((x / s) * (x / s) + (u / s) * (u / s)).sqrt() * s;
                if sx > 0.0 {
                    let xs = x / sx;
                    if xs.re * y.re + xs.im * y.im < 0.0 {
                        y = -y;
                    }
                }
                t -= u * (u / (x + y));
            }
            t
        };

        // One implicit single-shift QR sweep on the active window.
        let mut x = h[(lo, lo)] - t;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hiu {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let jstart = if k > lo { k - 1 } else { k };
            {
                let ncols = h.cols();
                let data = h.as_mut_slice();
                let (top, bottom) = data.split_at_mut((k + 1) * ncols);
                let rk = &mut top[k * ncols..];
                let rk1 = &mut bottom[..ncols];
                for j in jstart..=hiu {
                    let a = rk[j];
                    let b = rk1[j];
                    rk[j] = a * c + s * b;
                    rk1[j] = -s.conj() * a + b * c;
                }
            }
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
            let iend = (k + 2).min(hiu);
            for i in lo..=iend {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
        }
        its_here += 1;
        total += 1;
    }
    Ok((w, total))
}

/// Approximate eigenvector of the Hessenberg matrix for `lambda` via two
/// steps of inverse iteration with a slightly perturbed shift.
fn inverse_iteration(h: &CMat, lambda: C64, hnorm: f64) -> Vec<C64> {
    let n = h.rows();
    let shift = lambda + C64::new(hnorm * 1e-13, hnorm * 1e-13);
    // LU of the shifted Hessenberg matrix with partial pivoting between
    // adjacent rows (the only rows with a nonzero entry in each column).
    let mut u = h.clone();
    for i in 0..n {
        u[(i, i)] -= shift;
    }
    let mut swaps = vec![false; n];
    let mut mult = vec![ZERO; n];
    for k in 0..n.saturating_sub(1) {
        if u[(k + 1, k)].norm() > u[(k, k)].norm() {
            swaps[k] = true;
            for j in k..n {
                let t = u[(k, j)];
                u[(k, j)] = u[(k + 1, j)];
                u[(k + 1, j)] = t;
            }
        }
        let piv = u[(k, k)];
        let f = if piv == ZERO { ZERO } else { u[(k + 1, k)] / piv };
        mult[k] = f;
        if f != ZERO {
            for j in k..n {
                let t = u[(k, j)];
                u[(k + 1, j)] -= f * t;
            }
        }
    }
    let tiny = hnorm * f64::EPSILON;
    for i in 0..n {
        if u[(i, i)].norm() < tiny {
            u[(i, i)] = C64::new(tiny, 0.0);
        }
    }
    let solve = |b: &mut Vec<C64>| {
        for k in 0..n.saturating_sub(1) {
            if swaps[k] {
                b.swap(k, k + 1);
            }
            let t = b[k];
            b[k + 1] -= mult[k] * t;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n {
                s -= u[(i, j)] * b[j];
            }
            b[i] = s / u[(i, i)];
        }
    };
    // For strongly non-normal matrices the best vector is often the first
    // iterate (left and right singular vectors nearly orthogonal), so keep
    // whichever solve amplified its right-hand side the most.
    let mut b = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut best = b.clone();
    let mut best_gain = 0.0;
    for _ in 0..3 {
        let mut x = b.clone();
        solve(&mut x);
        let gain = vec_norm(&x);
        if !gain.is_finite() || gain == 0.0 {
            break;
        }
        x.iter_mut().for_each(|z| *z /= gain);
        if gain > best_gain {
            best_gain = gain;
            best = x.clone();
        }
        b = x;
    }
    best
}
