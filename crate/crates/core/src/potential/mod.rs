//! Matrix-valued potentials `V: R^n -> C^{N x N}`, their pointwise operator
//! norms and the polar splitting `V = B^* A`.

mod sampled;

pub use sampled::{SampledPotential, BINARY_MAGIC};

use crate::clifford::build_clifford;
use crate::linalg::{polar, CMat, PolarFactors, I};
use crate::weights_norms::{norm, Envelope, Factor, Field, RadialProfile};
use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("potential is not defined at {point:?}")]
    Domain { point: Vec<f64> },
    #[error("cannot read potential file: {0}")]
    Io(String),
    #[error("malformed potential file (line {line}): {msg}")]
    Format { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    /// `c (1+|x|)^-2 I`
    InverseSquare,
    /// Same formula, named separately for complex couplings.
    ComplexInverseSquare,
    /// `c exp(1 - 1/(1 - (|x|/R)^2)) I` on `|x| < R`
    Bump,
    /// `c |x|^-1 (1 + |log|x||)^-sigma I`
    DyadicDecay,
    /// `c (1+|x|)^-2 (alpha_1 + i I)`
    MatrixMix,
}

impl Shape {
    pub const ALL: [Shape; 5] =
        [Shape::InverseSquare, Shape::ComplexInverseSquare, Shape::Bump, Shape::DyadicDecay, Shape::MatrixMix];

    pub fn id(self) -> &'static str {
        match self {
            Shape::InverseSquare => "inverse-square",
            Shape::ComplexInverseSquare => "complex-inverse-square",
            Shape::Bump => "bump",
            Shape::DyadicDecay => "dyadic-decay",
            Shape::MatrixMix => "matrix-mix",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Shape {
    type Err = PotentialError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Shape::ALL.into_iter().find(|p| p.id() == s).ok_or_else(|| {
            let ids: Vec<&str> = Shape::ALL.iter().map(|p| p.id()).collect();
            PotentialError::InvalidParameter(format!("unknown preset '{s}', expected one of {}", ids.join(", ")))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub shape: Shape,
    pub coupling: C64,
    /// Support radius of `bump`.
    pub radius: f64,
    /// Log exponent of `dyadic-decay`.
    pub sigma: f64,
    /// Matrix part: identity, or `alpha_1 + i I` for `matrix-mix`.
    matrix: CMat,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Preset(Preset),
    Sampled(SampledPotential),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    n: usize,
    size: usize,
    source: Source,
    pub label: String,
}

impl PotentialSpec {
    /// Analytic preset in dimension `n` with `size x size` values.
    ///
    /// `matrix-mix` needs `size = 2^ceil(n/2)`; the other shapes are scalar
    /// multiples of the identity and accept any size.
    pub fn preset(
        shape: Shape,
        n: usize,
        size: usize,
        coupling: C64,
        radius: f64,
        sigma: f64,
    ) -> Result<Self, PotentialError> {
        let bad = |m: String| Err(PotentialError::InvalidParameter(m));
        if n == 0 {
            return bad("dimension must be at least 1".into());
        }
        if size == 0 {
            return bad("matrix size must be at least 1".into());
        }
        if !(coupling.re.is_finite() && coupling.im.is_finite()) {
            return bad("coupling must be finite".into());
        }
        if shape == Shape::Bump && !(radius > 0.0 && radius.is_finite()) {
            return bad(format!("bump radius must be > 0, got {radius}"));
        }
        if shape == Shape::DyadicDecay && !(sigma > 0.0 && sigma.is_finite()) {
            return bad(format!("dyadic-decay sigma must be > 0, got {sigma}"));
        }
        let matrix = if shape == Shape::MatrixMix {
            let rep = build_clifford(n).map_err(|e| PotentialError::InvalidParameter(e.to_string()))?;
            if rep.size() != size {
                return bad(format!("matrix-mix in dimension {n} needs size {}, got {size}", rep.size()));
            }
            rep.alpha(1).add(&CMat::identity(size).scale(I))
        } else {
            CMat::identity(size)
        };
        let label = format!("{shape}(c={}{:+}i)", coupling.re, coupling.im);
        Ok(PotentialSpec { n, size, source: Source::Preset(Preset { shape, coupling, radius, sigma, matrix }), label })
    }

    pub fn sampled(data: SampledPotential) -> Self {
        let label = format!("sampled(M={}, L={})", data.samples(), data.half_length());
        PotentialSpec { n: data.dim(), size: data.size(), source: Source::Sampled(data), label }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Matrix size `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// `c V`.
    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        match &mut out.source {
            Source::Preset(p) => p.coupling *= c,
            Source::Sampled(s) => s.scale(c),
        }
        out.label = format!("{c}*{}", self.label);
        out
    }

    pub fn eval(&self, x: &[f64]) -> Result<CMat, PotentialError> {
        assert_eq!(x.len(), self.n, "eval_potential: point has wrong dimension");
        match &self.source {
            Source::Preset(p) => {
                let r = norm(x);
                let s = match p.shape {
                    Shape::InverseSquare | Shape::ComplexInverseSquare | Shape::MatrixMix => (1.0 + r).powi(-2),
                    Shape::Bump => crate::weights_norms::profile::bump(r, p.radius),
                    Shape::DyadicDecay => {
                        if r == 0.0 {
                            return Err(PotentialError::Domain { point: x.to_vec() });
                        }
                        (1.0 + r.ln().abs()).powf(-p.sigma) / r
                    }
                };
                Ok(p.matrix.scale(p.coupling * s))
            }
            Source::Sampled(s) => s.eval(x),
        }
    }

    /// Largest singular value of `V(x)`.
    pub fn opnorm(&self, x: &[f64]) -> Result<f64, PotentialError> {
        match &self.source {
            Source::Preset(_) => {
                let r = norm(x);
                if r == 0.0 {
                    // Evaluate for the domain check, then use the closed form.
                    self.eval(x)?;
                }
                Ok(self.opnorm_profile().expect("presets are radial").eval(r).abs())
            }
            Source::Sampled(s) => s.opnorm(x),
        }
    }

    /// `|V(x)|` as an exact radial profile, for presets.
    pub fn opnorm_profile(&self) -> Option<RadialProfile> {
        let Source::Preset(p) = &self.source else { return None };
        let c = p.coupling.norm();
        Some(match p.shape {
            Shape::InverseSquare | Shape::ComplexInverseSquare => {
                RadialProfile::constant(c).with(Factor::OnePlusRadius, -2.0)
            }
            Shape::MatrixMix => RadialProfile::constant(2f64.sqrt() * c).with(Factor::OnePlusRadius, -2.0),
            Shape::Bump => RadialProfile::constant(c).with(Factor::Bump { radius: p.radius }, 1.0),
            Shape::DyadicDecay => {
                RadialProfile::constant(c).with(Factor::Radius, -1.0).with(Factor::LogBracket, -p.sigma)
            }
        })
    }

    /// Whether `V(x)` is Hermitian everywhere.
    pub fn is_hermitian(&self) -> bool {
        match &self.source {
            Source::Preset(p) => p.coupling.im == 0.0 && p.matrix.hermitian_defect() == 0.0,
            Source::Sampled(s) => s.is_hermitian(),
        }
    }

    /// SHA-256 over a canonical byte description of the potential.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        h.update((self.size as u64).to_le_bytes());
        match &self.source {
            Source::Preset(p) => {
                h.update(b"preset:");
                h.update(p.shape.id().as_bytes());
                for v in [p.coupling.re, p.coupling.im, p.radius, p.sigma] {
                    h.update(v.to_le_bytes());
                }
            }
            Source::Sampled(s) => {
                h.update(b"sampled:");
                h.update(s.to_binary());
                h.update([s.outside_zero() as u8]);
            }
        }
        hex::encode(h.finalize())
    }
}

/// `V(x)`.
pub fn eval_potential(v: &PotentialSpec, x: &[f64]) -> Result<CMat, PotentialError> {
    v.eval(x)
}

/// `|V(x)|`, the largest singular value.
pub fn pointwise_opnorm(v: &PotentialSpec, x: &[f64]) -> Result<f64, PotentialError> {
    v.opnorm(x)
}

/// Pointwise polar splitting of a potential: `A = W^{1/2}`, `B = W^{1/2} U^*`
/// with `V = U W`, so that `B^* A = V`.
#[derive(Clone, Debug)]
pub struct Factorization<'a> {
    v: &'a PotentialSpec,
}

impl Factorization<'_> {
    pub fn at(&self, x: &[f64]) -> Result<PolarFactors, PotentialError> {
        Ok(polar(&self.v.eval(x)?))
    }

    pub fn a(&self, x: &[f64]) -> Result<CMat, PotentialError> {
        Ok(self.at(x)?.a)
    }

    pub fn b(&self, x: &[f64]) -> Result<CMat, PotentialError> {
        Ok(self.at(x)?.b)
    }
}

pub fn polar_factorize(v: &PotentialSpec) -> Factorization<'_> {
    Factorization { v }
}

/// `weight(|x|) |V(x)|` as a scalar field for the norm engine.
pub struct WeightedPotential<'a> {
    v: &'a PotentialSpec,
    weight: RadialProfile,
    radial: Option<RadialProfile>,
}

impl<'a> WeightedPotential<'a> {
    pub fn new(v: &'a PotentialSpec, weight: RadialProfile) -> Self {
        let radial = v.opnorm_profile().map(|p| p.mul(&weight));
        WeightedPotential { v, weight, radial }
    }
}

impl Field for WeightedPotential<'_> {
    fn dim(&self) -> usize {
        self.v.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self.v.opnorm(x) {
            Ok(0.0) => 0.0,
            Ok(s) => self.weight.eval(norm(x)) * s,
            Err(_) => f64::NAN,
        }
    }

    fn radial_eval(&self, r: f64) -> Option<f64> {
        self.radial.as_ref().map(|p| {
            // 0 * inf from a vanishing bump against a growing weight is 0.
            let v = p.eval(r);
            if v.is_nan() { 0.0 } else { v.abs() }
        })
    }

    fn tails(&self, r_in: f64, r_out: f64) -> (Option<Envelope>, Option<Envelope>) {
        if let Some(p) = &self.radial {
            return (p.envelope_inner(r_in), p.envelope_outer(r_out));
        }
        let Source::Sampled(s) = &self.v.source else { return (None, None) };
        let vmax = Envelope::constant(s.max_opnorm());
        let inner = self.weight.envelope_inner(r_in).map(|w| w.product(vmax));
        let outer = if s.outside_zero() && r_out >= s.outer_radius() {
            Some(Envelope::Vanishing)
        } else {
            None
        };
        (inner, outer)
    }
}

/// Identity-valued potential helper used in tests and benches.
pub fn constant_scalar(n: usize, size: usize, c: C64) -> PotentialSpec {
    let data = SampledPotential::constant(n, size, 2, 1e6, c);
    let mut p = PotentialSpec::sampled(data);
    p.label = format!("constant({c})");
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{largest_singular_value, oracle, ONE};
    use crate::weights_norms::{dyadic_norm, DyadicOptions, Exponent};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn preset_values() {
        let v = PotentialSpec::preset(Shape::InverseSquare, 3, 4, c(1.0, 0.0), 1.0, 2.0).unwrap();
        let m = v.eval(&[1.0, 0.0, 0.0]).unwrap();
        assert!(m.sub(&CMat::identity(4).scale(c(0.25, 0.0))).max_abs() < 1e-15);
        let v = PotentialSpec::preset(Shape::ComplexInverseSquare, 3, 4, c(1.0, 1.0), 1.0, 2.0).unwrap();
        assert_eq!(v.eval(&[0.0; 3]).unwrap(), CMat::identity(4).scale(c(1.0, 1.0)));
        let v = PotentialSpec::preset(Shape::Bump, 3, 4, c(2.0, 0.0), 1.0, 2.0).unwrap();
        for x in [[1.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.8, 0.8, 0.0]] {
            assert_eq!(v.eval(&x).unwrap().max_abs(), 0.0);
        }
        assert!((v.eval(&[0.0; 3]).unwrap()[(0, 0)].re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dyadic_decay_origin_is_domain_error() {
        let v = PotentialSpec::preset(Shape::DyadicDecay, 3, 1, c(1.0, 0.0), 1.0, 2.0).unwrap();
        assert!(matches!(v.eval(&[0.0; 3]), Err(PotentialError::Domain { .. })));
        assert!(v.opnorm(&[0.0; 3]).is_err());
        assert!((v.opnorm(&[0.0, 0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_mix_size_is_checked() {
        assert!(PotentialSpec::preset(Shape::MatrixMix, 3, 1, ONE, 1.0, 2.0).is_err());
        assert!(PotentialSpec::preset(Shape::MatrixMix, 3, 4, ONE, 1.0, 2.0).is_ok());
        assert!("nope".parse::<Shape>().is_err());
        assert_eq!("bump".parse::<Shape>().unwrap(), Shape::Bump);
    }

    #[test]
    fn closed_form_opnorm_matches_svd() {
        for shape in Shape::ALL {
            let size = if shape == Shape::MatrixMix { 4 } else { 2 };
            let v = PotentialSpec::preset(shape, 3, size, c(0.7, -0.2), 2.0, 1.5).unwrap();
            for x in [[0.3, 0.1, -0.2], [1.0, 1.0, 1.0], [0.0, 4.0, 0.5]] {
                let want = largest_singular_value(&v.eval(&x).unwrap());
                assert!((v.opnorm(&x).unwrap() - want).abs() < 1e-12, "{shape}");
            }
        }
    }

    #[test]
    fn opnorm_of_diagonal_and_scalar() {
        let d = CMat::diag(&[c(3.0, 0.0), c(0.0, -4.0)]);
        assert!((largest_singular_value(&d) - 4.0).abs() < 1e-14);
        let v = constant_scalar(3, 2, c(0.0, -2.5));
        assert!((pointwise_opnorm(&v, &[0.1, 0.2, 0.3]).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn opnorm_matches_jacobi_oracle() {
        for seed in 0..10 {
            let m = oracle::random_matrix(4, seed);
            let want = oracle::opnorm(&m);
            assert!((largest_singular_value(&m) - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn scalar_factorizations() {
        for (v, b) in [(c(-1.0, 0.0), c(-1.0, 0.0)), (c(0.0, 1.0), c(0.0, -1.0))] {
            let pf = polar(&CMat::from_vec(1, 1, vec![v]));
            assert_eq!(pf.w[(0, 0)], ONE);
            assert_eq!(pf.a[(0, 0)], ONE);
            assert!((pf.b[(0, 0)] - b).norm() < 1e-15);
            assert!((pf.b[(0, 0)].conj() * pf.a[(0, 0)] - v).norm() < 1e-15);
        }
    }

    #[test]
    fn factorization_reconstructs_preset() {
        let v = PotentialSpec::preset(Shape::MatrixMix, 3, 4, c(0.3, 0.9), 1.0, 2.0).unwrap();
        let f = polar_factorize(&v);
        let x = [0.2, -0.4, 0.1];
        let pf = f.at(&x).unwrap();
        let vx = v.eval(&x).unwrap();
        assert!(pf.b.adjoint().matmul(&pf.a).sub(&vx).max_abs() < 1e-12);
        assert!((largest_singular_value(&f.a(&x).unwrap()).powi(2) - v.opnorm(&x).unwrap()).abs() < 1e-12);
        assert!((largest_singular_value(&f.b(&x).unwrap()).powi(2) - v.opnorm(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn fingerprint_distinguishes_couplings() {
        let a = PotentialSpec::preset(Shape::Bump, 3, 4, ONE, 1.0, 2.0).unwrap();
        let b = a.scaled(c(2.0, 0.0));
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn weighted_field_norms() {
        // ||(1+|x|)^2 V|| = |c| for the inverse-square preset.
        let v = PotentialSpec::preset(Shape::InverseSquare, 3, 4, c(3e-6, 4e-6), 1.0, 2.0).unwrap();
        let f = WeightedPotential::new(&v, RadialProfile::constant(1.0).with(Factor::OnePlusRadius, 2.0));
        let r = dyadic_norm(&f, Exponent::Infinity, Exponent::Infinity, &DyadicOptions::default()).unwrap();
        assert!((r.value - 5e-6).abs() < 1e-18);
        assert!(r.tail_bound.unwrap() < 1e-16);
        // |x| |V| for a bump is summable on both ends.
        let v = PotentialSpec::preset(Shape::Bump, 3, 4, ONE, 1.0, 2.0).unwrap();
        let f = WeightedPotential::new(&v, RadialProfile::constant(1.0).with(Factor::Radius, 1.0));
        let r = dyadic_norm(&f, Exponent::One, Exponent::Infinity, &DyadicOptions::default()).unwrap();
        assert!(r.value > 0.0 && r.tail_bound.unwrap() < 1e-9);
    }

    #[test]
    fn hermitian_flags() {
        assert!(PotentialSpec::preset(Shape::Bump, 3, 4, ONE, 1.0, 2.0).unwrap().is_hermitian());
        assert!(!PotentialSpec::preset(Shape::Bump, 3, 4, I, 1.0, 2.0).unwrap().is_hermitian());
        assert!(!PotentialSpec::preset(Shape::MatrixMix, 3, 4, ONE, 1.0, 2.0).unwrap().is_hermitian());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn random_factorizations(seed in 0u64..1_000_000, size in 1usize..=4) {
            let m = oracle::random_matrix(size, seed);
            let pf = polar(&m);
            let rec = pf.b.adjoint().matmul(&pf.a);
            let s = largest_singular_value(&m);
            prop_assert!(rec.sub(&m).max_abs() <= 1e-12 * s.max(1.0) * size as f64);
            prop_assert!((largest_singular_value(&pf.a).powi(2) - s).abs() <= 1e-12 * s.max(1.0));
            prop_assert!((largest_singular_value(&pf.b).powi(2) - s).abs() <= 1e-12 * s.max(1.0));
        }
    }
}
