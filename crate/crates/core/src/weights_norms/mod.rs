//! Radial weights and the norm functionals built on them: weighted sup norms,
//! dyadic `l^p L^q` norms and Morrey-Campanato norms of grid fields.

mod dyadic;
mod morrey;
pub mod profile;

pub use dyadic::{
    dyadic_norm, weighted_sup_norm, DyadicOptions, Exponent, Field, FnField, NormResult, RadialField, RadialFn,
};
pub(crate) use dyadic::norm;
pub use morrey::{
    grid_dyadic_l2, inverse_sqrt_linf_l2, morrey_from_sq, morrey_norms, sqrt_weighted_l1_l2, MorreyNorms,
    RadialPlan,
};
pub use profile::{Envelope, Factor, RadialProfile};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("field is not defined at {point:?}")]
    Domain { point: Vec<f64> },
    #[error("dyadic sum does not settle at the {side} end (annulus j={j}, term {term:e})")]
    Divergent { side: &'static str, j: i32, term: f64 },
    #[error("empty annulus range [{j_min}, {j_max}]")]
    InvalidRange { j_min: i32, j_max: i32 },
    #[error("{0}")]
    InvalidParameter(String),
}

/// A positive radial weight.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    /// `|x|^{1/2 - eps} + |x|`
    Tau { epsilon: f64 },
    /// `|x| (1 + |log|x||)^sigma`
    WSigma { sigma: f64 },
    /// `(1 + |log|x||)^{-sigma/2}`
    Rho1 { sigma: f64 },
    /// `(|x|^{-eps} + |x|^delta)^{-1}`
    Rho2 { epsilon: f64, delta: f64 },
    /// `|x|^exponent`
    Power { exponent: f64 },
    /// `prod w_i^{e_i}`
    Product(Vec<(WeightSpec, f64)>),
}

impl WeightSpec {
    pub fn validate(&self) -> Result<(), NormError> {
        let bad = |msg: String| Err(NormError::InvalidParameter(msg));
        match self {
            WeightSpec::Tau { epsilon } if !(*epsilon > 0.0 && epsilon.is_finite()) => {
                bad(format!("tau: epsilon must be > 0, got {epsilon}"))
            }
            WeightSpec::WSigma { sigma } | WeightSpec::Rho1 { sigma } if !(*sigma > 1.0 && sigma.is_finite()) => {
                bad(format!("{}: sigma must be > 1, got {sigma}", self.label()))
            }
            WeightSpec::Rho2 { epsilon, delta } => {
                if !(*epsilon > 0.0 && epsilon.is_finite()) {
                    bad(format!("rho2: epsilon must be > 0, got {epsilon}"))
                } else if !(*delta > 0.0 && delta.is_finite()) {
                    bad(format!("rho2: delta must be > 0, got {delta}"))
                } else {
                    Ok(())
                }
            }
            WeightSpec::Power { exponent } if !exponent.is_finite() => {
                bad(format!("power: exponent must be finite, got {exponent}"))
            }
            WeightSpec::Product(parts) => {
                if parts.is_empty() {
                    return bad("custom-product: needs at least one factor".into());
                }
                for (w, e) in parts {
                    if !e.is_finite() {
                        return bad(format!("custom-product: exponent must be finite, got {e}"));
                    }
                    w.validate()?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            WeightSpec::Tau { .. } => "tau",
            WeightSpec::WSigma { .. } => "w_sigma",
            WeightSpec::Rho1 { .. } => "rho1",
            WeightSpec::Rho2 { .. } => "rho2",
            WeightSpec::Power { .. } => "power",
            WeightSpec::Product(_) => "custom-product",
        }
    }

    pub fn profile(&self) -> RadialProfile {
        let one = RadialProfile::constant(1.0);
        match *self {
            WeightSpec::Tau { epsilon } => {
                one.with(Factor::Radius, 0.5).with(Factor::PowerSum { eps: epsilon, delta: 0.5 }, 1.0)
            }
            WeightSpec::WSigma { sigma } => one.with(Factor::Radius, 1.0).with(Factor::LogBracket, sigma),
            WeightSpec::Rho1 { sigma } => one.with(Factor::LogBracket, -sigma / 2.0),
            WeightSpec::Rho2 { epsilon, delta } => one.with(Factor::PowerSum { eps: epsilon, delta }, -1.0),
            WeightSpec::Power { exponent } => one.with(Factor::Radius, exponent),
            WeightSpec::Product(ref parts) => {
                parts.iter().fold(one, |acc, (w, e)| acc.mul(&w.profile().powf(*e)))
            }
        }
    }

    /// Value at radius `r > 0`.
    pub fn eval(&self, r: f64) -> f64 {
        self.profile().eval(r)
    }
}

/// `w(x)`; the origin is outside the domain of every weight.
pub fn weight_eval(w: &WeightSpec, x: &[f64]) -> Result<f64, NormError> {
    let r = norm(x);
    if r == 0.0 || !r.is_finite() {
        return Err(NormError::Domain { point: x.to_vec() });
    }
    Ok(w.eval(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        for eps in [0.01, 0.25, 0.49] {
            assert!((weight_eval(&WeightSpec::Tau { epsilon: eps }, &[0.0, 1.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        }
        assert_eq!(weight_eval(&WeightSpec::WSigma { sigma: 3.0 }, &[1.0, 0.0, 0.0]).unwrap(), 1.0);
        let r = weight_eval(&WeightSpec::Rho2 { epsilon: 0.5, delta: 0.5 }, &[0.0, 0.0, 4.0]).unwrap();
        assert!((r - 0.4).abs() < 1e-15);
    }

    #[test]
    fn origin_is_rejected() {
        assert!(matches!(
            weight_eval(&WeightSpec::Tau { epsilon: 0.1 }, &[0.0, 0.0, 0.0]),
            Err(NormError::Domain { .. })
        ));
    }

    #[test]
    fn invalid_parameters() {
        assert!(WeightSpec::Tau { epsilon: 0.0 }.validate().is_err());
        assert!(WeightSpec::WSigma { sigma: 1.0 }.validate().is_err());
        assert!(WeightSpec::Rho1 { sigma: 0.5 }.validate().is_err());
        assert!(WeightSpec::Rho2 { epsilon: 0.5, delta: -1.0 }.validate().is_err());
        assert!(WeightSpec::Product(vec![]).validate().is_err());
        assert!(WeightSpec::Rho2 { epsilon: 0.5, delta: 0.5 }.validate().is_ok());
    }

    #[test]
    fn weighted_sup_of_inverse_square_is_coupling() {
        // (1+r)^2 * c (1+r)^-2
        let c = 0.37;
        let f = RadialField {
            n: 3,
            profile: RadialProfile::constant(c).with(Factor::OnePlusRadius, -2.0).with(Factor::OnePlusRadius, 2.0),
        };
        let r = weighted_sup_norm(&f, &DyadicOptions::default()).unwrap();
        assert!((r.value - c).abs() < 1e-14);
        assert!(r.tail_bound.unwrap() < 1e-11);
    }

    #[test]
    fn sqrt_radius_times_rho2_is_at_most_one() {
        let w = WeightSpec::Product(vec![
            (WeightSpec::Power { exponent: 0.5 }, 1.0),
            (WeightSpec::Rho2 { epsilon: 0.5, delta: 0.5 }, 1.0),
        ]);
        let f = RadialField { n: 3, profile: w.profile() };
        let r = weighted_sup_norm(&f, &DyadicOptions::default()).unwrap();
        // r/(1+r) -> 1 as r -> inf
        assert!(r.value <= 1.0 && r.value > 0.99, "{}", r.value);
        assert!(r.upper().unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn bump_times_tau_squared_below_four_c() {
        let c = 3.0;
        let f = RadialField {
            n: 3,
            profile: RadialProfile::constant(c)
                .with(Factor::Bump { radius: 1.0 }, 1.0)
                .mul(&WeightSpec::Tau { epsilon: 0.25 }.profile().powf(2.0)),
        };
        let r = weighted_sup_norm(&f, &DyadicOptions::default()).unwrap();
        // Oracle: dense sampling of the support.
        let mut want: f64 = 0.0;
        for i in 1..200000 {
            let s = i as f64 / 200000.0;
            let tau = s.powf(0.25) + s;
            want = want.max(c * profile::bump(s, 1.0) * tau * tau);
        }
        assert!(r.value <= 4.0 * c);
        assert!((r.value - want).abs() < 1e-6 * want, "{} {want}", r.value);
    }

    proptest! {
        #[test]
        fn weights_are_positive(r in 1e-6f64..1e6, eps in 0.01f64..0.5, sigma in 1.01f64..4.0) {
            for w in [
                WeightSpec::Tau { epsilon: eps },
                WeightSpec::WSigma { sigma },
                WeightSpec::Rho1 { sigma },
                WeightSpec::Rho2 { epsilon: eps, delta: eps },
                WeightSpec::Power { exponent: -1.5 },
            ] {
                let v = w.eval(r);
                prop_assert!(v > 0.0 && v.is_finite());
            }
            let tau = WeightSpec::Tau { epsilon: eps }.eval(r);
            prop_assert!((tau - (r.powf(0.5 - eps) + r)).abs() <= 1e-12 * tau);
            let ws = WeightSpec::WSigma { sigma }.eval(r);
            prop_assert!((ws - r * (1.0 + r.ln().abs()).powf(sigma)).abs() <= 1e-12 * ws);
        }

        #[test]
        fn dyadic_norm_is_monotone(a in 0.1f64..2.0, b in 0.0f64..1.0) {
            let o = DyadicOptions { j_min: -10, j_max: 10, ..Default::default() };
            let shape = |c: f64| RadialProfile::constant(c).with(Factor::Radius, 1.0).with(Factor::OnePlusRadius, -3.0);
            let g = RadialField { n: 3, profile: shape(a + b) };
            let f = RadialField { n: 3, profile: shape(a) };
            for (p, q) in [(Exponent::One, Exponent::Infinity), (Exponent::Two, Exponent::Two)] {
                let vf = dyadic_norm(&f, p, q, &o).unwrap().value;
                let vg = dyadic_norm(&g, p, q, &o).unwrap().value;
                prop_assert!(vf <= vg * (1.0 + 1e-12));
            }
        }
    }
}
