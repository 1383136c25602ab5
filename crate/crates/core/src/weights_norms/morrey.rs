//! Morrey-Campanato norms of grid fields and the dyadic `L^2` norms that are
//! equivalent to them.
//!
//! Everything works on pointwise squared magnitudes `|u(x_p)|^2`, so vector
//! fields (gradients) are handled by summing their components first.

use super::dyadic::Exponent;
use super::NormError;
use crate::grid::{FieldOnGrid, GridSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MorreyNorms {
    /// `(sup_R R^-2 int_{|x|=R} |u|^2)^{1/2}`
    pub x: f64,
    /// `(sup_R R^-1 int_{|x|<R} |u|^2)^{1/2}`
    pub y: f64,
    /// `|| |x|^{1/2} u ||_{l^1 L^2}`, used in place of the predual norm.
    pub y_star_dyadic: f64,
}

/// Annulus index `j` with `2^{j-1} <= r < 2^j`.
fn annulus(r: f64) -> i32 {
    r.log2().floor() as i32 + 1
}

/// Radial bookkeeping of a grid, computed once and shared by every norm
/// evaluated on it.
#[derive(Clone, Debug)]
pub struct RadialPlan {
    grid: GridSpec,
    radii: Vec<f64>,
    /// Annulus of each point, offset by `j_lo`.
    slot: Vec<usize>,
    j_lo: i32,
    slots: usize,
    /// Point indices sorted by radius.
    order: Vec<usize>,
    /// Complete shell of each point, `usize::MAX` outside.
    shell: Vec<usize>,
    complete: usize,
    ball_radii: Vec<f64>,
}

impl RadialPlan {
    pub fn new(grid: &GridSpec) -> Self {
        let radii = grid.radii();
        let ann: Vec<i32> = radii.iter().map(|&r| annulus(r)).collect();
        let j_lo = ann.iter().copied().min().unwrap_or(0);
        let j_hi = ann.iter().copied().max().unwrap_or(0);
        let h = grid.spacing();
        let l = grid.half_length();
        let complete = (l / h).floor() as usize;
        let shell = radii
            .iter()
            .map(|&r| {
                let b = (r / h).floor() as usize;
                if b < complete { b } else { usize::MAX }
            })
            .collect();
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
        let mut ball_radii: Vec<f64> = (1..=complete).map(|b| b as f64 * h).collect();
        let mut j = (h.log2().floor() as i32) - 1;
        while 2f64.powi(j) <= l {
            ball_radii.push(2f64.powi(j));
            j += 1;
        }
        ball_radii.sort_by(f64::total_cmp);
        ball_radii.dedup();
        RadialPlan {
            grid: grid.clone(),
            slot: ann.iter().map(|&a| (a - j_lo) as usize).collect(),
            slots: (j_hi - j_lo + 1) as usize,
            j_lo,
            radii,
            order,
            shell,
            complete,
            ball_radii,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `w(|x_p|)` for every point.
    pub fn weights(&self, w: impl Fn(f64) -> f64) -> Vec<f64> {
        self.radii.iter().map(|&r| w(r)).collect()
    }

    /// `|| w u ||_{l^p L^2}` for pointwise squares `sq` and point weights `w`.
    pub fn dyadic_l2(&self, sq: &[f64], w: &[f64], p: Exponent) -> f64 {
        let dv = self.grid.cell_volume();
        let mut per = vec![0.0; self.slots];
        for ((&s, &wp), &k) in sq.iter().zip(w).zip(&self.slot) {
            if s != 0.0 {
                per[k] += wp * wp * s * dv;
            }
        }
        match p.finite() {
            Some(pp) => per.iter().map(|a| a.sqrt().powf(pp)).sum::<f64>().powf(1.0 / pp),
            None => per.iter().map(|a| a.sqrt()).fold(0.0, f64::max),
        }
    }

    /// `|| w u ||_{L^2}`
    pub fn weighted_l2(&self, sq: &[f64], w: &[f64]) -> f64 {
        let s: f64 = sq.iter().zip(w).map(|(s, w)| if *s == 0.0 { 0.0 } else { w * w * s }).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    /// Lowest annulus index present on the grid.
    pub fn first_annulus(&self) -> i32 {
        self.j_lo
    }

    /// Shells of width `h` binned by `floor(|x|/h)`; only shells that lie fully
    /// inside the box count. The sphere integral over `|x| = R_b` is the shell
    /// sum divided by `h`, with `R_b` the shell midradius. The ball radii for
    /// `Y` are the shell outer radii and the powers of two inside the box.
    pub fn morrey(&self, sq: &[f64]) -> Result<MorreyNorms, NormError> {
        let h = self.grid.spacing();
        let dv = self.grid.cell_volume();
        let mut shells = vec![0.0; self.complete];
        let mut counts = vec![0usize; self.complete];
        for (&s, &b) in sq.iter().zip(&self.shell) {
            if b != usize::MAX {
                shells[b] += s * dv;
                counts[b] += 1;
            }
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(NormError::InvalidParameter(format!(
                "grid too coarse: no complete radial shell of width {h} inside half length {}",
                self.grid.half_length()
            )));
        }
        let mut x2: f64 = 0.0;
        for (b, &s) in shells.iter().enumerate() {
            if counts[b] > 0 {
                let rb = (b as f64 + 0.5) * h;
                x2 = x2.max(s / h / (rb * rb));
            }
        }
        let mut y2: f64 = 0.0;
        let (mut acc, mut k) = (0.0, 0);
        for &r in &self.ball_radii {
            while k < self.order.len() && self.radii[self.order[k]] < r {
                acc += sq[self.order[k]] * dv;
                k += 1;
            }
            y2 = y2.max(acc / r);
        }
        let sqrt_w: Vec<f64> = self.radii.iter().map(|r| r.sqrt()).collect();
        let y_star_dyadic = self.dyadic_l2(sq, &sqrt_w, Exponent::One);
        Ok(MorreyNorms { x: x2.sqrt(), y: y2.sqrt(), y_star_dyadic })
    }
}

/// `|| w(|x|) u ||_{l^p L^2}` for pointwise squares `sq`.
pub fn grid_dyadic_l2(grid: &GridSpec, sq: &[f64], weight: impl Fn(f64) -> f64, p: Exponent) -> f64 {
    let plan = RadialPlan::new(grid);
    plan.dyadic_l2(sq, &plan.weights(weight), p)
}

/// `|| |x|^{-1/2} u ||_{l^inf L^2}`
pub fn inverse_sqrt_linf_l2(u: &FieldOnGrid) -> f64 {
    grid_dyadic_l2(&u.grid, &u.pointwise_sq(), |r| r.powf(-0.5), Exponent::Infinity)
}

/// `|| |x|^{1/2} u ||_{l^1 L^2}`
pub fn sqrt_weighted_l1_l2(u: &FieldOnGrid) -> f64 {
    grid_dyadic_l2(&u.grid, &u.pointwise_sq(), |r| r.sqrt(), Exponent::One)
}

pub fn morrey_norms(u: &FieldOnGrid) -> Result<MorreyNorms, NormError> {
    morrey_from_sq(&u.grid, &u.pointwise_sq())
}

pub fn morrey_from_sq(grid: &GridSpec, sq: &[f64]) -> Result<MorreyNorms, NormError> {
    RadialPlan::new(grid).morrey(sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    #[test]
    fn ball_indicator() {
        let g = GridSpec::new(3, 2.0, 64, 1).unwrap();
        let u = FieldOnGrid::from_fn(&g, |x, _| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            C64::new(if r <= 1.0 { 1.0 } else { 0.0 }, 0.0)
        });
        let m = morrey_norms(&u).unwrap();
        // Oracle: R^-1 vol(B_min(R,1)) peaks at R = 1.
        let want = 4.0 * PI / 3.0;
        assert!((m.y * m.y - want).abs() < 0.03 * want, "{} vs {want}", m.y * m.y);
    }

    #[test]
    fn zero_field() {
        let g = GridSpec::new(3, 2.0, 8, 1).unwrap();
        let m = morrey_norms(&FieldOnGrid::zeros(&g)).unwrap();
        assert_eq!((m.x, m.y, m.y_star_dyadic), (0.0, 0.0, 0.0));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        // h = L: the only complete shell is [0, h), but in five dimensions
        // the samples sit at |x| = h sqrt(5)/2 > h.
        let g = GridSpec::new(5, 1.0, 2, 1).unwrap();
        assert!(morrey_norms(&FieldOnGrid::zeros(&g)).is_err());
    }

    fn random_compact(g: &GridSpec, seed: u64) -> FieldOnGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = g.half_length();
        FieldOnGrid::from_fn(g, |x, _| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            C64::new(a, b) * if r < l / 2.0 { 1.0 } else { 0.0 }
        })
    }

    #[test]
    fn equivalence_chain_on_random_fields() {
        let g = GridSpec::new(3, 4.0, 16, 1).unwrap();
        for seed in 0..50 {
            let u = random_compact(&g, seed);
            let y = morrey_norms(&u).unwrap().y;
            let d = inverse_sqrt_linf_l2(&u);
            assert!(d / 2f64.sqrt() <= y * (1.0 + 1e-12), "seed {seed}");
            assert!(y <= 2.0 * d * (1.0 + 1e-12), "seed {seed}");
        }
    }

    #[test]
    fn duality_bound() {
        let g = GridSpec::new(3, 4.0, 16, 1).unwrap();
        for seed in 0..20 {
            let u = random_compact(&g, seed);
            let v = random_compact(&g, seed + 100);
            let lhs = u.inner(&v).norm();
            let rhs = 2f64.sqrt() * sqrt_weighted_l1_l2(&u) * morrey_norms(&v).unwrap().y;
            assert!(lhs <= rhs);
        }
    }

    #[test]
    fn shell_surface_estimate_of_constant() {
        // |u| = 1: sphere integral 4 pi R^2, so X^2 ~ 4 pi.
        let g = GridSpec::new(3, 4.0, 64, 1).unwrap();
        let u = FieldOnGrid::from_fn(&g, |_, _| C64::new(1.0, 0.0));
        let x2 = morrey_norms(&u).unwrap().x.powi(2);
        assert!(x2 >= 4.0 * PI * 0.95, "{x2}");
    }
}
