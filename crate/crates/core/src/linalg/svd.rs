//! One-sided (Hestenes) Jacobi SVD for small square complex matrices.
//!
//! Pointwise potentials are at most a few columns wide, so a rotation-based
//! method is both accurate to working precision and fast enough. The polar
//! factors used for the Birman-Schwinger splitting are derived from it.

use super::{dot, vec_norm, CMat, ONE, ZERO};
use num_complex::Complex64 as C64;

/// `a = p * diag(sigma) * q^*` with `p`, `q` unitary.
#[derive(Clone, Debug)]
pub struct Svd {
    pub p: CMat,
    pub sigma: Vec<f64>,
    pub q: CMat,
}

const MAX_SWEEPS: usize = 60;

pub fn svd(a: &CMat) -> Svd {
    assert!(a.is_square(), "svd: only square matrices are supported");
    let n = a.rows();
    // Work on columns: g = a * q, rotated until its columns are orthogonal.
    let mut g = a.transpose(); // row k of g is column k of a*q
    let mut qt = CMat::identity(n); // row k is column k of q
    let scale = a.frobenius();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = vec_norm(g.row(p)).powi(2);
                    let beta = vec_norm(g.row(q)).powi(2);
                    let gamma = dot(g.row(p), g.row(q));
                    let gabs = gamma.norm();
                    if gabs <= f64::EPSILON * (alpha * beta).sqrt() || gabs <= 1e-300 {
                        continue;
                    }
                    rotated = true;
                    let phase = gamma / gabs;
                    let zeta = (beta - alpha) / (2.0 * gabs);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate(&mut g, p, q, c, s, phase);
                    rotate(&mut qt, p, q, c, s, phase);
                }
            }
            if !rotated {
                break;
            }
        }
    }
    let sigma: Vec<f64> = (0..n).map(|k| vec_norm(g.row(k))).collect();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let tol = (n as f64) * f64::EPSILON * smax.max(scale);
    let q = qt.transpose();
    // Columns of p: normalized columns of g; kernel directions are completed
    // starting from the matching q column so that u = p q^* acts as the
    // identity on ker(a) whenever that is compatible with orthogonality.
    let mut pcols: Vec<Option<Vec<C64>>> = (0..n)
        .map(|k| {
            if sigma[k] > tol {
                let inv = 1.0 / sigma[k];
                Some(g.row(k).iter().map(|x| x * inv).collect())
            } else {
                None
            }
        })
        .collect();
    let mut basis: Vec<Vec<C64>> = pcols.iter().flatten().cloned().collect();
    for k in 0..n {
        if pcols[k].is_some() {
            continue;
        }
        let mut cands: Vec<Vec<C64>> = vec![q.column(k)];
        cands.extend((0..n).map(|e| {
            let mut v = vec![ZERO; n];
            v[e] = ONE;
            v
        }));
        for mut v in cands {
            for b in &basis {
                let c = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            // Second pass keeps orthogonality at working precision.
            for b in &basis {
                let c = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let nv = vec_norm(&v);
            if nv > 1e-6 {
                v.iter_mut().for_each(|x| *x /= nv);
                basis.push(v.clone());
                pcols[k] = Some(v);
                break;
            }
        }
    }
    let mut p = CMat::zeros(n, n);
    for (k, col) in pcols.into_iter().enumerate() {
        p.set_column(k, &col.expect("kernel completion always succeeds"));
    }
    let sigma = sigma.into_iter().map(|s| if s > tol { s } else { 0.0 }).collect();
    Svd { p, sigma, q }
}

/// Applies the column rotation to rows `p`, `q` of a row-stored column set.
fn rotate(m: &mut CMat, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let cols = m.cols();
    let ph = phase.conj();
    for k in 0..cols {
        let gp = m[(p, k)];
        let gq = m[(q, k)] * ph;
        m[(p, k)] = gp * c - gq * s;
        m[(q, k)] = gp * s + gq * c;
    }
}

pub fn largest_singular_value(a: &CMat) -> f64 {
    if a.rows() == 1 && a.cols() == 1 {
        return a[(0, 0)].norm();
    }
    svd(a).sigma.into_iter().fold(0.0, f64::max)
}

/// Polar data of `v = u w`: `w = sqrt(v^* v)`, `u` unitary (identity on the
/// kernel where possible), and the split `a = sqrt(w)`, `b = sqrt(w) u^*`
/// so that `b^* a = v`.
#[derive(Clone, Debug)]
pub struct PolarFactors {
    pub w: CMat,
    pub u: CMat,
    pub a: CMat,
    pub b: CMat,
}

pub fn polar(v: &CMat) -> PolarFactors {
    if v.rows() == 1 && v.cols() == 1 {
        let x = v[(0, 0)];
        let r = x.norm();
        let u = if r > 0.0 { x / r } else { ONE };
        let s = C64::new(r.sqrt(), 0.0);
        return PolarFactors {
            w: CMat::from_vec(1, 1, vec![C64::new(r, 0.0)]),
            u: CMat::from_vec(1, 1, vec![u]),
            a: CMat::from_vec(1, 1, vec![s]),
            b: CMat::from_vec(1, 1, vec![s * u.conj()]),
        };
    }
    let Svd { p, sigma, q } = svd(v);
    let n = v.rows();
    let qh = q.adjoint();
    let scaled = |f: &dyn Fn(f64) -> f64| {
        let mut m = q.clone();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] *= f(sigma[j]);
            }
        }
        m
    };
    let w = scaled(&|s| s).matmul(&qh);
    let sq = scaled(&|s| s.sqrt());
    let a = sq.matmul(&qh);
    let b = sq.matmul(&p.adjoint());
    let u = p.matmul(&qh);
    PolarFactors { w, u, a, b }
}

#[cfg(test)]
mod tests {
    use super::super::oracle;
    use super::*;
    use proptest::prelude::*;

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        a.sub(b).max_abs() <= tol
    }

    #[test]
    fn diagonal_singular_values() {
        let v = CMat::diag(&[C64::new(3.0, 0.0), C64::new(0.0, -4.0)]);
        assert!((largest_singular_value(&v) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_random_matrices() {
        for seed in 0..20 {
            let a = oracle::random_matrix(4, seed);
            let Svd { p, sigma, q } = svd(&a);
            let s = CMat::diag(&sigma.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
            let rec = p.matmul(&s).matmul(&q.adjoint());
            assert!(close(&rec, &a, 1e-12 * a.frobenius()));
            assert!(close(&p.adjoint().matmul(&p), &CMat::identity(4), 1e-12));
            assert!(close(&q.adjoint().matmul(&q), &CMat::identity(4), 1e-12));
        }
    }

    #[test]
    fn top_singular_value_matches_jacobi_oracle() {
        for seed in 100..110 {
            let a = oracle::random_matrix(4, seed);
            let got = largest_singular_value(&a);
            assert!((got - oracle::opnorm(&a)).abs() < 1e-10 * got);
        }
    }

    #[test]
    fn scalar_sign_and_phase() {
        let f = polar(&CMat::from_vec(1, 1, vec![C64::new(-1.0, 0.0)]));
        assert_eq!(f.a[(0, 0)], ONE);
        assert_eq!(f.b[(0, 0)], -ONE);
        let f = polar(&CMat::from_vec(1, 1, vec![C64::new(0.0, 1.0)]));
        assert_eq!(f.a[(0, 0)], ONE);
        assert!((f.b[(0, 0)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((f.b[(0, 0)].conj() * f.a[(0, 0)] - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn kernel_gets_identity_completion() {
        // v = diag(2, 0): u must be unitary and fix e_2.
        let v = CMat::diag(&[C64::new(2.0, 0.0), ZERO]);
        let f = polar(&v);
        assert!(close(&f.u.adjoint().matmul(&f.u), &CMat::identity(2), 1e-14));
        assert!((f.u[(1, 1)] - ONE).norm() < 1e-14);
        assert!(close(&f.b.adjoint().matmul(&f.a), &v, 1e-14));
    }

    #[test]
    fn zero_matrix_factors_to_zero() {
        let f = polar(&CMat::zeros(3, 3));
        assert_eq!(f.a.max_abs(), 0.0);
        assert_eq!(f.b.max_abs(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn polar_split_reconstructs(seed in any::<u64>(), n in 2usize..6) {
            let v = oracle::random_matrix(n, seed);
            let f = polar(&v);
            let rec = f.b.adjoint().matmul(&f.a);
            prop_assert!(close(&rec, &v, 1e-12 * v.frobenius()));
            let nv = largest_singular_value(&v);
            let na = largest_singular_value(&f.a);
            let nb = largest_singular_value(&f.b);
            prop_assert!((na * na - nv).abs() <= 1e-12 * nv);
            prop_assert!((nb * nb - nv).abs() <= 1e-12 * nv);
        }

        #[test]
        fn rank_deficient_still_reconstructs(seed in any::<u64>()) {
            // Rank one: outer product.
            let x = oracle::random_matrix(3, seed);
            let col = x.column(0);
            let row = x.column(1);
            let v = CMat::from_fn(3, 3, |i, j| col[i] * row[j].conj());
            let f = polar(&v);
            prop_assert!(close(&f.b.adjoint().matmul(&f.a), &v, 1e-12 * v.frobenius()));
            prop_assert!(close(&f.u.adjoint().matmul(&f.u), &CMat::identity(3), 1e-10));
        }
    }
}
