//! Radial profiles: products of elementary radial factors, with analytic
//! envelopes on the regions `(0, r_in]` and `[r_out, inf)` used to bound the
//! contribution of dyadic annuli outside the summed range.

use std::f64::consts::LN_2;

#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    /// `r`
    Radius,
    /// `1 + r`
    OnePlusRadius,
    /// `r^-eps + r^delta`
    PowerSum { eps: f64, delta: f64 },
    /// `1 + |ln r|`
    LogBracket,
    /// `exp(1 - 1/(1 - (r/R)^2))` for `r < R`, else 0. Peak value 1 at `r = 0`.
    Bump { radius: f64 },
}

impl Factor {
    fn eval(&self, r: f64) -> f64 {
        match *self {
            Factor::Radius => r,
            Factor::OnePlusRadius => 1.0 + r,
            Factor::PowerSum { eps, delta } => r.powf(-eps) + r.powf(delta),
            Factor::LogBracket => 1.0 + r.ln().abs(),
            Factor::Bump { radius } => bump(r, radius),
        }
    }
}

pub fn bump(r: f64, radius: f64) -> f64 {
    if r >= radius {
        return 0.0;
    }
    let s = r / radius;
    (1.0 - 1.0 / (1.0 - s * s)).exp()
}

/// `|f(r)| <= k r^a (1 + |ln r|)^c` on the region, or identically zero there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    Vanishing,
    Power { k: f64, a: f64, c: f64 },
}

impl Envelope {
    pub fn product(self, other: Envelope) -> Envelope {
        match (self, other) {
            (Envelope::Vanishing, _) | (_, Envelope::Vanishing) => Envelope::Vanishing,
            (Envelope::Power { k: k1, a: a1, c: c1 }, Envelope::Power { k: k2, a: a2, c: c2 }) => {
                Envelope::Power { k: k1 * k2, a: a1 + a2, c: c1 + c2 }
            }
        }
    }

    pub fn constant(k: f64) -> Envelope {
        if k == 0.0 {
            Envelope::Vanishing
        } else {
            Envelope::Power { k, a: 0.0, c: 0.0 }
        }
    }

    pub fn bound(&self, r: f64) -> f64 {
        match *self {
            Envelope::Vanishing => 0.0,
            Envelope::Power { k, a, c } => k * r.powf(a) * (1.0 + r.ln().abs()).powf(c),
        }
    }
}

/// `coeff * prod factor_i(r)^exp_i`
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub coeff: f64,
    pub factors: Vec<(Factor, f64)>,
}

impl RadialProfile {
    pub fn constant(coeff: f64) -> Self {
        RadialProfile { coeff, factors: vec![] }
    }

    pub fn with(mut self, f: Factor, exp: f64) -> Self {
        if exp != 0.0 {
            self.factors.push((f, exp));
        }
        self
    }

    pub fn mul(&self, other: &RadialProfile) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        RadialProfile { coeff: self.coeff * other.coeff, factors }
    }

    /// `self^e`; requires a nonnegative coefficient.
    pub fn powf(&self, e: f64) -> Self {
        RadialProfile {
            coeff: self.coeff.abs().powf(e),
            factors: self.factors.iter().map(|(f, x)| (f.clone(), x * e)).collect(),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let mut v = self.coeff;
        for (f, e) in &self.factors {
            if let Factor::Bump { radius } = f {
                if r >= *radius {
                    return if *e > 0.0 { 0.0 } else { f64::INFINITY };
                }
            }
            v *= f.eval(r).powf(*e);
        }
        v
    }

    /// Envelope valid on `(0, r_in]`, if one can be derived.
    pub fn envelope_inner(&self, r_in: f64) -> Option<Envelope> {
        let mut env = Envelope::constant(self.coeff.abs());
        for (f, e) in &self.factors {
            let e = *e;
            let part = match *f {
                Factor::Radius => Envelope::Power { k: 1.0, a: e, c: 0.0 },
                Factor::OnePlusRadius => Envelope::Power { k: (1.0 + r_in).powf(e).max(1.0), a: 0.0, c: 0.0 },
                Factor::PowerSum { eps, delta } => Envelope::Power {
                    k: (1.0 + r_in.powf(eps + delta)).powf(e).max(1.0),
                    a: -eps * e,
                    c: 0.0,
                },
                Factor::LogBracket => Envelope::Power { k: 1.0, a: 0.0, c: e },
                Factor::Bump { .. } => {
                    if e < 0.0 {
                        return None;
                    }
                    Envelope::constant(1.0)
                }
            };
            env = env.product(part);
        }
        Some(env)
    }

    /// Envelope valid on `[r_out, inf)`, if one can be derived.
    pub fn envelope_outer(&self, r_out: f64) -> Option<Envelope> {
        let mut env = Envelope::constant(self.coeff.abs());
        for (f, e) in &self.factors {
            let e = *e;
            let part = match *f {
                Factor::Radius => Envelope::Power { k: 1.0, a: e, c: 0.0 },
                Factor::OnePlusRadius => {
                    Envelope::Power { k: (1.0 + 1.0 / r_out).powf(e).max(1.0), a: e, c: 0.0 }
                }
                Factor::PowerSum { eps, delta } => Envelope::Power {
                    k: (1.0 + r_out.powf(-eps - delta)).powf(e).max(1.0),
                    a: delta * e,
                    c: 0.0,
                },
                Factor::LogBracket => Envelope::Power { k: 1.0, a: 0.0, c: e },
                Factor::Bump { radius } => {
                    if e < 0.0 {
                        return None;
                    }
                    if r_out >= radius {
                        Envelope::Vanishing
                    } else {
                        Envelope::constant(1.0)
                    }
                }
            };
            env = env.product(part);
        }
        Some(env)
    }
}

/// Surface measure of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    // omega_n = 2 pi^{n/2} / Gamma(n/2), via the recursion omega_{n+2} = 2 pi omega_n / n.
    let (mut w, mut k) = if n % 2 == 0 { (2.0 * std::f64::consts::PI, 2) } else { (2.0, 1) };
    while k < n {
        w *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    w
}

/// Volume of the dyadic annulus `2^{j-1} <= |x| < 2^j` in `R^n`.
pub fn annulus_volume(n: usize, j: i32) -> f64 {
    let nn = n as f64;
    sphere_area(n) / nn * 2f64.powf(j as f64 * nn) * (1.0 - 2f64.powf(-nn))
}

/// Which side of the summed index range a tail lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inner,
    Outer,
}

/// Upper bound for annulus `j` of the per-annulus `L^q` norm implied by `env`.
fn annulus_bound(env: &Envelope, n: usize, j: i32, q_two: bool) -> f64 {
    match *env {
        Envelope::Vanishing => 0.0,
        Envelope::Power { k, a, c } => {
            let jf = j as f64;
            let pow = if a >= 0.0 { 2f64.powf(jf * a) } else { 2f64.powf((jf - 1.0) * a) };
            let lmin = (jf - 1.0).max(-jf).max(0.0) * LN_2;
            let lmax = jf.max(1.0 - jf) * LN_2;
            let log = if c >= 0.0 { (1.0 + lmax).powf(c) } else { (1.0 + lmin).powf(c) };
            let vol = if q_two { annulus_volume(n, j).sqrt() } else { 1.0 };
            k * pow * log * vol
        }
    }
}

/// Bound on the omitted annuli beyond `boundary` (exclusive) on `side`.
///
/// For finite `p` returns a bound on `sum_j t_j^p`; for `p = inf` a bound on
/// `sup_j t_j`. `None` means no finite bound follows from the envelope.
pub fn tail_from_envelope(
    env: &Envelope,
    side: Side,
    boundary: i32,
    n: usize,
    p: Option<f64>,
    q_two: bool,
) -> Option<f64> {
    let (a, c) = match *env {
        Envelope::Vanishing => return Some(0.0),
        Envelope::Power { a, c, .. } => (a, c),
    };
    let a_eff = a + if q_two { n as f64 / 2.0 } else { 0.0 };
    // Growth exponent per step away from the summed range.
    let slope = match side {
        Side::Inner => -a_eff,
        Side::Outer => a_eff,
    };
    const EXPLICIT: i32 = 200;
    let step = match side {
        Side::Inner => -1,
        Side::Outer => 1,
    };
    let mut acc = 0.0f64;
    let mut last = 0.0;
    let mut j = boundary;
    for _ in 0..EXPLICIT {
        j += step;
        let t = annulus_bound(env, n, j, q_two);
        if !t.is_finite() {
            return None;
        }
        match p {
            Some(p) => acc += t.powf(p),
            None => acc = acc.max(t),
        }
        last = t;
    }
    if !acc.is_finite() {
        return None;
    }
    // Remainder: ratio of consecutive bounds beyond the explicit block.
    let m = (j.unsigned_abs() as f64).max(1.0);
    let log_ratio = if c > 0.0 { (1.0 + LN_2 / (1.0 + (m - 1.0) * LN_2)).powf(c) } else { 1.0 };
    let ratio = 2f64.powf(slope) * log_ratio;
    match p {
        None => {
            if ratio <= 1.0 {
                Some(acc)
            } else {
                None
            }
        }
        Some(p) => {
            let rp = ratio.powf(p);
            if rp < 1.0 - 1e-12 {
                Some(acc + last.powf(p) * rp / (1.0 - rp))
            } else if slope == 0.0 && c * p < -1.0 {
                // Pure logarithmic decay: compare with an integral.
                let lmin = match side {
                    Side::Inner => m * LN_2,
                    Side::Outer => (m - 1.0) * LN_2,
                };
                let base = last / (1.0 + lmin).powf(c);
                let cp = c * p;
                let integral = (1.0 + lmin).powf(cp + 1.0) / (LN_2 * (-cp - 1.0));
                Some(acc + base.powf(p) * integral)
            } else {
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-13);
    }

    #[test]
    fn envelopes_dominate_profiles() {
        let profiles = vec![
            RadialProfile::constant(2.0).with(Factor::OnePlusRadius, -2.0),
            RadialProfile::constant(1.0).with(Factor::PowerSum { eps: 0.5, delta: 0.5 }, -1.0),
            RadialProfile::constant(1.0).with(Factor::Radius, 1.0).with(Factor::LogBracket, 1.5),
            RadialProfile::constant(3.0)
                .with(Factor::Radius, -1.0)
                .with(Factor::LogBracket, -2.0)
                .with(Factor::OnePlusRadius, 2.0),
            RadialProfile::constant(1.0).with(Factor::Bump { radius: 1.0 }, 1.0).with(Factor::Radius, 1.0),
        ];
        let (r_in, r_out) = (2f64.powi(-3), 8.0);
        for p in &profiles {
            let ei = p.envelope_inner(r_in).unwrap();
            let eo = p.envelope_outer(r_out).unwrap();
            for i in 0..200 {
                let r = r_in * 2f64.powf(-(i as f64) * 0.1);
                assert!(p.eval(r) <= ei.bound(r) * (1.0 + 1e-12), "{p:?} inner r={r}");
                let r = r_out * 2f64.powf(i as f64 * 0.1);
                assert!(p.eval(r) <= eo.bound(r) * (1.0 + 1e-12), "{p:?} outer r={r}");
            }
        }
    }

    #[test]
    fn geometric_tail_matches_direct_sum() {
        // f = r on the inner side, q = inf, p = 1: terms 2^j for j < -2.
        let env = Envelope::Power { k: 1.0, a: 1.0, c: 0.0 };
        let t = tail_from_envelope(&env, Side::Inner, -2, 3, Some(1.0), false).unwrap();
        assert!((t - 0.25).abs() < 1e-12);
    }

    #[test]
    fn divergent_envelope_gives_none() {
        let env = Envelope::Power { k: 1.0, a: -0.5, c: 0.0 };
        assert!(tail_from_envelope(&env, Side::Inner, -40, 3, Some(2.0), false).is_none());
        assert!(tail_from_envelope(&env, Side::Inner, -40, 3, None, false).is_none());
    }

    #[test]
    fn log_decay_tail_is_finite_only_when_summable() {
        let env = Envelope::Power { k: 1.0, a: 0.0, c: -1.0 };
        assert!(tail_from_envelope(&env, Side::Outer, 40, 3, Some(2.0), false).is_some());
        assert!(tail_from_envelope(&env, Side::Outer, 40, 3, Some(1.0), false).is_none());
    }
}
