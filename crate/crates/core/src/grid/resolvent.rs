//! Free operators and resolvents as Fourier multipliers.
//!
//! The Dirac resolvent uses `(D_m - z)^{-1} = (D_m + z)(-Delta + m^2 - z^2)^{-1}`,
//! which needs one symbol application per frequency instead of an `N x N`
//! inverse.

use super::{fft_nd, FftDirection, FieldOnGrid, GridError, GridSpec, OperatorKind};
use crate::clifford::{build_clifford, CliffordRep};
use crate::linalg::ZERO;
use crate::par;
use num_complex::Complex64 as C64;

/// Distance from `z` to the discrete spectrum below which the resolvent is
/// refused.
pub const SINGULAR_TOL: f64 = 1e-8;

const POINTS_PER_TASK: usize = 256;

/// Precomputed `(H_0 - z)^{-1}` on a grid.
#[derive(Clone, Debug)]
pub struct ResolventMultiplier {
    grid: GridSpec,
    kind: OperatorKind,
    m: f64,
    z: C64,
    /// Scalar factor per frequency: `1/(sym - z)`, or `1/(|xi|^2 + m^2 - z^2)`
    /// for Dirac.
    scale: Vec<C64>,
    rep: Option<CliffordRep>,
}

fn check_mass(m: f64) -> Result<(), GridError> {
    if m >= 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(GridError::Invalid(format!("mass must be finite and >= 0, got {m}")))
    }
}

fn dirac_rep(grid: &GridSpec) -> Result<CliffordRep, GridError> {
    let rep = build_clifford(grid.n()).map_err(|e| GridError::Invalid(e.to_string()))?;
    if rep.size() != grid.spin() {
        return Err(GridError::SpinMismatch { expected: rep.size(), got: grid.spin() });
    }
    Ok(rep)
}

impl ResolventMultiplier {
    pub fn new(kind: OperatorKind, m: f64, z: C64, grid: &GridSpec) -> Result<Self, GridError> {
        check_mass(m)?;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(GridError::Invalid(format!("z must be finite, got {z}")));
        }
        let rep = match kind {
            OperatorKind::Dirac => Some(dirac_rep(grid)?),
            _ => None,
        };
        let mut scale = Vec::with_capacity(grid.points());
        for p in 0..grid.points() {
            let k2 = grid.xi_sq(p);
            let (den, dist, sym) = match kind {
                OperatorKind::Schrodinger => (C64::new(k2, 0.0) - z, (k2 - z).norm(), k2),
                OperatorKind::KleinGordon => {
                    let e = (m * m + k2).sqrt();
                    (C64::new(e, 0.0) - z, (e - z).norm(), e)
                }
                OperatorKind::Dirac => {
                    let e = (m * m + k2).sqrt();
                    let (dp, dm) = ((z - e).norm(), (z + e).norm());
                    (C64::new(e * e, 0.0) - z * z, dp.min(dm), if dp <= dm { e } else { -e })
                }
            };
            if dist < SINGULAR_TOL {
                return Err(GridError::NearSingular { z, xi: grid.xi(p), symbol: sym, distance: dist });
            }
            scale.push(den.inv());
        }
        Ok(ResolventMultiplier { grid: grid.clone(), kind, m, z, scale, rep })
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `(H_0 - z)^{-1 *} = (H_0 - conj z)^{-1}`.
    pub fn adjoint(&self) -> Self {
        ResolventMultiplier {
            z: self.z.conj(),
            scale: self.scale.iter().map(|s| s.conj()).collect(),
            ..self.clone()
        }
    }

    /// Multiplies Fourier coefficients in place.
    fn multiply_hat(&self, hat: &mut [C64]) {
        let spin = self.grid.spin();
        par::for_each_chunk_mut(hat, spin * POINTS_PER_TASK, |c, chunk| {
            let mut tmp = vec![ZERO; spin];
            for (i, v) in chunk.chunks_mut(spin).enumerate() {
                let p = c * POINTS_PER_TASK + i;
                let s = self.scale[p];
                match &self.rep {
                    Some(rep) => {
                        rep.symbol_apply(&self.grid.xi(p), self.m, v, &mut tmp);
                        for (o, t) in v.iter_mut().zip(&tmp) {
                            *o = (t + self.z * *o) * s;
                        }
                    }
                    None => v.iter_mut().for_each(|o| *o *= s),
                }
            }
        });
    }

    /// Applies the resolvent to a raw point-major array in place.
    pub fn apply_in_place(&self, values: &mut [C64]) {
        fft_nd(values, &self.grid, FftDirection::Forward);
        self.multiply_hat(values);
        fft_nd(values, &self.grid, FftDirection::Inverse);
    }

    pub fn apply(&self, f: &FieldOnGrid) -> FieldOnGrid {
        assert_eq!(f.grid, self.grid, "resolvent: field lives on a different grid");
        let mut out = f.clone();
        self.apply_in_place(&mut out.values);
        out
    }

    /// `R_0 f` and its gradient `(d_1 R_0 f, ..., d_n R_0 f)` from one
    /// forward transform.
    pub fn apply_with_gradient(&self, f: &FieldOnGrid) -> (FieldOnGrid, Vec<FieldOnGrid>) {
        let mut hat = f.values.clone();
        fft_nd(&mut hat, &self.grid, FftDirection::Forward);
        self.multiply_hat(&mut hat);
        let grads = derivatives_of_hat(&hat, &self.grid);
        fft_nd(&mut hat, &self.grid, FftDirection::Inverse);
        (FieldOnGrid { grid: self.grid.clone(), values: hat }, grads)
    }
}

fn derivatives_of_hat(hat: &[C64], grid: &GridSpec) -> Vec<FieldOnGrid> {
    let spin = grid.spin();
    (0..grid.n())
        .map(|d| {
            let mut v = hat.to_vec();
            par::for_each_chunk_mut(&mut v, spin * POINTS_PER_TASK, |c, chunk| {
                for (i, s) in chunk.chunks_mut(spin).enumerate() {
                    let p = c * POINTS_PER_TASK + i;
                    // The Nyquist bin has no partner of opposite sign, so its
                    // odd derivative is set to zero to keep real fields real.
                    let nyq = grid.multi_index(p)[d] == grid.samples() / 2;
                    let k = C64::new(0.0, if nyq { 0.0 } else { grid.xi(p)[d] });
                    s.iter_mut().for_each(|z| *z *= k);
                }
            });
            fft_nd(&mut v, grid, FftDirection::Inverse);
            FieldOnGrid { grid: grid.clone(), values: v }
        })
        .collect()
}

/// `(H_0 - z)^{-1} f`.
pub fn apply_free_resolvent(kind: OperatorKind, m: f64, z: C64, f: &FieldOnGrid) -> Result<FieldOnGrid, GridError> {
    Ok(ResolventMultiplier::new(kind, m, z, &f.grid)?.apply(f))
}

/// `H_0 f`.
pub fn apply_free_operator(kind: OperatorKind, m: f64, f: &FieldOnGrid) -> Result<FieldOnGrid, GridError> {
    check_mass(m)?;
    let grid = &f.grid;
    let rep = match kind {
        OperatorKind::Dirac => Some(dirac_rep(grid)?),
        _ => None,
    };
    let spin = grid.spin();
    let mut v = f.values.clone();
    fft_nd(&mut v, grid, FftDirection::Forward);
    par::for_each_chunk_mut(&mut v, spin * POINTS_PER_TASK, |c, chunk| {
        let mut tmp = vec![ZERO; spin];
        for (i, s) in chunk.chunks_mut(spin).enumerate() {
            let p = c * POINTS_PER_TASK + i;
            let k2 = grid.xi_sq(p);
            match (&rep, kind) {
                (Some(rep), _) => {
                    rep.symbol_apply(&grid.xi(p), m, s, &mut tmp);
                    s.copy_from_slice(&tmp);
                }
                (None, OperatorKind::Schrodinger) => s.iter_mut().for_each(|z| *z *= k2),
                (None, _) => {
                    let e = (m * m + k2).sqrt();
                    s.iter_mut().for_each(|z| *z *= e);
                }
            }
        }
    });
    fft_nd(&mut v, grid, FftDirection::Inverse);
    Ok(FieldOnGrid { grid: grid.clone(), values: v })
}

/// Spectral gradient `(d_1 f, ..., d_n f)`.
pub fn gradient(f: &FieldOnGrid) -> Vec<FieldOnGrid> {
    let mut hat = f.values.clone();
    fft_nd(&mut hat, &f.grid, FftDirection::Forward);
    derivatives_of_hat(&hat, &f.grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{svd, CMat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_field(g: &GridSpec, seed: u64) -> FieldOnGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..g.dof())
            .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        FieldOnGrid::from_values(g, v).unwrap()
    }

    fn rel(a: &FieldOnGrid, b: &FieldOnGrid) -> f64 {
        let mut d = a.clone();
        d.values.iter_mut().zip(&b.values).for_each(|(x, y)| *x -= y);
        d.l2_norm() / b.l2_norm()
    }

    #[test]
    fn schrodinger_on_a_mode() {
        let g = GridSpec::new(3, 2.0, 8, 1).unwrap();
        let k = 3 * 64 + 7 * 8 + 1;
        let z = C64::new(0.3, 0.7);
        let f = FieldOnGrid::plane_wave(&g, k, &[C64::new(1.0, 0.0)]);
        let u = apply_free_resolvent(OperatorKind::Schrodinger, 0.0, z, &f).unwrap();
        let want = C64::new(g.xi_sq(k), 0.0) - z;
        for (a, b) in u.values.iter().zip(&f.values) {
            assert!((a - b / want).norm() < 1e-12);
        }
    }

    #[test]
    fn dirac_on_a_positive_eigenmode() {
        let g = GridSpec::new(3, 2.0, 4, 4).unwrap();
        let rep = build_clifford(3).unwrap();
        let (k, m, z) = (1 * 16 + 2 * 4 + 3, 0.7, C64::new(0.2, 0.5));
        let sym = rep.symbol(&g.xi(k), m);
        // Top right-singular vector of M + E I is an eigenvector for +E.
        let e = (m * m + g.xi_sq(k)).sqrt();
        let shifted = sym.add(&CMat::identity(4).scale(C64::new(e, 0.0)));
        let v = svd(&shifted).q.column(0);
        let mv = sym.matvec(&v);
        assert!(mv.iter().zip(&v).all(|(a, b)| (a - b * e).norm() < 1e-12));
        let f = FieldOnGrid::plane_wave(&g, k, &v);
        let u = apply_free_resolvent(OperatorKind::Dirac, m, z, &f).unwrap();
        for (a, b) in u.values.iter().zip(&f.values) {
            assert!((a - b / (e - z)).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_all_kinds() {
        let cases = [
            (OperatorKind::Schrodinger, GridSpec::new(3, 3.0, 8, 1).unwrap()),
            (OperatorKind::KleinGordon, GridSpec::new(3, 3.0, 8, 1).unwrap()),
            (OperatorKind::Dirac, GridSpec::new(3, 3.0, 8, 4).unwrap()),
            (OperatorKind::Dirac, GridSpec::new(2, 3.0, 8, 2).unwrap()),
        ];
        for (kind, g) in cases {
            let f = random_field(&g, 5);
            for z in [C64::new(0.4, 0.3), C64::new(-2.0, -0.01), C64::new(5.0, 1e-3)] {
                let u = apply_free_resolvent(kind, 1.0, z, &f).unwrap();
                let mut back = apply_free_operator(kind, 1.0, &u).unwrap();
                back.values.iter_mut().zip(&u.values).for_each(|(b, u)| *b -= z * u);
                assert!(rel(&back, &f) < 1e-10, "{kind} z={z}: {}", rel(&back, &f));
            }
        }
    }

    #[test]
    fn adjoint_multiplier_is_the_adjoint() {
        let g = GridSpec::new(3, 3.0, 4, 4).unwrap();
        let r = ResolventMultiplier::new(OperatorKind::Dirac, 1.0, C64::new(0.3, 0.8), &g).unwrap();
        let (f, h) = (random_field(&g, 1), random_field(&g, 2));
        let lhs = h.inner(&r.apply(&f));
        let rhs = r.adjoint().apply(&h).inner(&f);
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm());
    }

    #[test]
    fn singular_z_is_refused_with_frequency() {
        let g = GridSpec::new(3, std::f64::consts::PI, 4, 4).unwrap();
        // |xi|^2 = 1 at k = (0,0,1); Dirac symbol value sqrt(2) with m = 1.
        match ResolventMultiplier::new(OperatorKind::Dirac, 1.0, C64::new(2f64.sqrt(), 0.0), &g) {
            Err(GridError::NearSingular { xi, .. }) => {
                assert!(((xi.iter().map(|x| x * x).sum::<f64>()) - 1.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        let g1 = g.with_spin(1);
        assert!(ResolventMultiplier::new(OperatorKind::Schrodinger, 0.0, C64::new(0.0, 0.0), &g1).is_err());
        assert!(ResolventMultiplier::new(OperatorKind::KleinGordon, 1.0, C64::new(1.0, 5e-9), &g1).is_err());
        assert!(ResolventMultiplier::new(OperatorKind::Dirac, 1.0, C64::new(0.0, 1.0), &g1).is_err());
    }

    #[test]
    fn gradient_of_a_mode() {
        let g = GridSpec::new(2, 2.0, 8, 1).unwrap();
        let k = 2 * 8 + 6;
        let f = FieldOnGrid::plane_wave(&g, k, &[C64::new(1.0, 0.0)]);
        let xi = g.xi(k);
        for (d, gd) in gradient(&f).iter().enumerate() {
            for (a, b) in gd.values.iter().zip(&f.values) {
                assert!((a - b * C64::new(0.0, xi[d])).norm() < 1e-12);
            }
        }
        let r = ResolventMultiplier::new(OperatorKind::Schrodinger, 0.0, C64::new(-1.0, 0.5), &g).unwrap();
        let (u, du) = r.apply_with_gradient(&f);
        let du2 = gradient(&u);
        for (a, b) in du.iter().zip(&du2) {
            assert!(a.max_diff(b) < 1e-12);
        }
    }
}
