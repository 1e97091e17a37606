//! Even radial data profiles given in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `<r> = 1 + |r|`.
#[inline]
pub fn jap(r: f64) -> f64 {
    1.0 + r.abs()
}

/// Building blocks for radial data. Each shape is evaluated at `|r|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `<r>^{-(kappa+1)}`.
    Algebraic { kappa: f64 },
    /// `(1 - (r/radius)^2)^power` on `|r| < radius`, zero outside.
    Bump { radius: f64, power: f64 },
    /// `exp(-(r/width)^2)`.
    Gaussian { width: f64 },
}

impl Shape {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape::Algebraic { kappa } => kappa > 0.0 && kappa.is_finite(),
            Shape::Bump { radius, power } => radius > 0.0 && power >= 1.0 && radius.is_finite(),
            Shape::Gaussian { width } => width > 0.0 && width.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid profile shape {self:?}")))
        }
    }

    /// Value at `s = |r|`.
    fn value(&self, s: f64) -> f64 {
        match *self {
            Shape::Algebraic { kappa } => (1.0 + s).powf(-(kappa + 1.0)),
            Shape::Bump { radius, power } => {
                if s >= radius {
                    0.0
                } else {
                    let x = s / radius;
                    (1.0 - x * x).powf(power)
                }
            }
            Shape::Gaussian { width } => (-(s / width).powi(2)).exp(),
        }
    }

    /// Derivative with respect to `s = |r|`, one-sided at `s = 0`.
    fn slope(&self, s: f64) -> f64 {
        match *self {
            Shape::Algebraic { kappa } => -(kappa + 1.0) * (1.0 + s).powf(-(kappa + 2.0)),
            Shape::Bump { radius, power } => {
                if s >= radius {
                    0.0
                } else {
                    let x = s / radius;
                    -2.0 * power * x / radius * (1.0 - x * x).powf(power - 1.0)
                }
            }
            Shape::Gaussian { width } => {
                let x = s / width;
                -2.0 * x / width * (-x * x).exp()
            }
        }
    }

    /// Points `s >= 0` where the shape is not smooth.
    fn kinks(&self) -> Vec<f64> {
        match *self {
            Shape::Algebraic { .. } => vec![0.0],
            Shape::Bump { radius, .. } => vec![radius],
            Shape::Gaussian { .. } => vec![],
        }
    }

    fn support(&self) -> Option<f64> {
        match *self {
            Shape::Bump { radius, .. } => Some(radius),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    #[serde(flatten)]
    pub shape: Shape,
}

/// An even radial function `g(r) = sum_k c_k shape_k(|r|)` with decay metadata.
///
/// `epsilon` is the smallest constant with `|g(r)| <= eps <r>^{-(kappa+1)}`
/// and `|g'(r)| <= eps <r>^{-(kappa+2)}`, estimated on a dense sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    terms: Vec<Term>,
    kappa: f64,
    epsilon: f64,
}

impl RadialProfile {
    pub fn new(terms: Vec<Term>, kappa: f64) -> Result<Self> {
        if !(kappa > 1.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!("profile decay rate must exceed 1, got {kappa}")));
        }
        for term in &terms {
            term.shape.validate()?;
            if !term.coef.is_finite() {
                return Err(Error::Domain("profile coefficient is not finite".into()));
            }
            if let Shape::Algebraic { kappa: k } = term.shape {
                if k < kappa && term.coef != 0.0 {
                    return Err(Error::Domain(format!(
                        "algebraic term decays like <r>^-{} which is slower than the declared rate kappa={kappa}",
                        k + 1.0
                    )));
                }
            }
        }
        let terms: Vec<Term> = terms.into_iter().filter(|t| t.coef != 0.0).collect();
        let mut profile = Self {
            terms,
            kappa,
            epsilon: 0.0,
        };
        profile.epsilon = profile.measure_epsilon();
        Ok(profile)
    }

    pub fn zero(kappa: f64) -> Result<Self> {
        Self::new(Vec::new(), kappa)
    }

    /// `amplitude <r>^{-(kappa+1)}`.
    pub fn algebraic(amplitude: f64, kappa: f64) -> Result<Self> {
        Self::new(
            vec![Term {
                coef: amplitude,
                shape: Shape::Algebraic { kappa },
            }],
            kappa,
        )
    }

    pub fn bump(amplitude: f64, radius: f64, power: f64, kappa: f64) -> Result<Self> {
        Self::new(
            vec![Term {
                coef: amplitude,
                shape: Shape::Bump { radius, power },
            }],
            kappa,
        )
    }

    pub fn gaussian(amplitude: f64, width: f64, kappa: f64) -> Result<Self> {
        Self::new(
            vec![Term {
                coef: amplitude,
                shape: Shape::Gaussian { width },
            }],
            kappa,
        )
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `g(r)`, even in `r`.
    pub fn g(&self, r: f64) -> f64 {
        let s = r.abs();
        self.terms.iter().map(|t| t.coef * t.shape.value(s)).sum()
    }

    /// `g'(r)`, odd in `r`; zero at the origin by symmetry.
    pub fn g_prime(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let s = r.abs();
        let d: f64 = self.terms.iter().map(|t| t.coef * t.shape.slope(s)).sum();
        d * r.signum()
    }

    /// `H_g(rho) = rho g(rho) / 2`, odd.
    pub fn h(&self, rho: f64) -> f64 {
        0.5 * rho * self.g(rho)
    }

    /// `H_g'(rho) = (g(rho) + rho g'(rho)) / 2`, even.
    pub fn h_prime(&self, rho: f64) -> f64 {
        0.5 * (self.g(rho) + rho * self.g_prime(rho))
    }

    /// Radius outside which `g` vanishes identically, if any.
    pub fn support_radius(&self) -> Option<f64> {
        self.terms
            .iter()
            .map(|t| t.shape.support())
            .try_fold(0.0f64, |acc, s| s.map(|s| acc.max(s)))
    }

    /// Radius beyond which `|g| <= tol * sup|g|`. Exact for compact support.
    pub fn effective_radius(&self, tol: f64) -> f64 {
        if let Some(r) = self.support_radius() {
            return r;
        }
        let peak = self
            .terms
            .iter()
            .map(|t| t.coef.abs())
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        let mut r: f64 = 1.0;
        while r < 1e12 {
            let tail: f64 = self.terms.iter().map(|t| t.coef.abs() * t.shape.value(r)).sum();
            if tail <= tol * peak {
                return r;
            }
            r *= 1.25;
        }
        f64::INFINITY
    }

    /// Non-smooth points of `g` on `r >= 0`.
    pub fn kinks(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.terms.iter().flat_map(|t| t.shape.kinks()).collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    /// `a f + b g`. The decay rate is the slower of the two.
    pub fn combine(a: f64, f: &RadialProfile, b: f64, g: &RadialProfile) -> Result<Self> {
        let mut terms = Vec::new();
        for t in &f.terms {
            push_term(&mut terms, a * t.coef, t.shape);
        }
        for t in &g.terms {
            push_term(&mut terms, b * t.coef, t.shape);
        }
        Self::new(terms, f.kappa.min(g.kappa))
    }

    pub fn scaled(&self, a: f64) -> Result<Self> {
        Self::combine(a, self, 0.0, self)
    }

    fn measure_epsilon(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        if let [Term {
            coef,
            shape: Shape::Algebraic { kappa },
        }] = self.terms.as_slice()
        {
            if *kappa == self.kappa {
                return coef.abs() * (kappa + 1.0);
            }
        }
        // log-spaced sample of [0, 1e6] plus the kinks from both sides
        let samples = 20_000;
        let top = (1e6f64).ln_1p();
        let mut points: Vec<f64> = (0..=samples)
            .map(|i| (top * i as f64 / samples as f64).exp_m1())
            .collect();
        for k in self.kinks() {
            points.push(k);
            points.push((k - 1e-9).max(0.0));
        }
        points.sort_by(f64::total_cmp);
        let weighted = |r: f64| {
            let k1 = self.kappa + 1.0;
            let w = jap(r);
            let d = if r == 0.0 { self.g_prime(1e-300) } else { self.g_prime(r) };
            (self.g(r).abs() * w.powf(k1)).max(d.abs() * w.powf(k1 + 1.0))
        };
        let values: Vec<f64> = points.iter().map(|&r| weighted(r)).collect();
        // refine around the largest local maxima of the sampled envelope
        let mut peaks: Vec<usize> = (0..values.len())
            .filter(|&i| {
                (i == 0 || values[i] >= values[i - 1]) && (i + 1 == values.len() || values[i] >= values[i + 1])
            })
            .collect();
        peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let mut best = values.iter().copied().fold(0.0, f64::max);
        for &i in peaks.iter().take(8) {
            let lo = points[i.saturating_sub(1)];
            let hi = points[(i + 1).min(points.len() - 1)];
            for j in 0..=2000 {
                best = best.max(weighted(lo + (hi - lo) * j as f64 / 2000.0));
            }
        }
        best
    }
}

fn push_term(terms: &mut Vec<Term>, coef: f64, shape: Shape) {
    if let Some(existing) = terms.iter_mut().find(|t| t.shape == shape) {
        existing.coef += coef;
    } else {
        terms.push(Term { coef, shape });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn h_values() {
        let g = RadialProfile::algebraic(1.0, 1.5).unwrap();
        assert_eq!(g.h(0.0), 0.0);
        assert_abs_diff_eq!(g.h(1.0), 2f64.powf(-2.5) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.h(1.0), 0.088_388_347_648_318_4, epsilon = 1e-12);
        let zero = RadialProfile::zero(1.5).unwrap();
        assert_eq!(zero.h(3.0), 0.0);
        assert_eq!(zero.epsilon(), 0.0);
    }

    #[test]
    fn epsilon_of_algebraic_is_exact() {
        let g = RadialProfile::algebraic(0.01, 1.5).unwrap();
        assert_abs_diff_eq!(g.epsilon(), 0.025, epsilon = 1e-15);
    }

    #[test]
    fn rejects_slow_decay() {
        let terms = vec![Term {
            coef: 1.0,
            shape: Shape::Algebraic { kappa: 1.2 },
        }];
        assert!(RadialProfile::new(terms, 1.5).is_err());
        assert!(RadialProfile::algebraic(1.0, 1.0).is_err());
    }

    #[test]
    fn support_and_kinks() {
        let b = RadialProfile::bump(1.0, 2.0, 3.0, 1.5).unwrap();
        assert_eq!(b.support_radius(), Some(2.0));
        assert_eq!(b.g(2.5), 0.0);
        let mix = RadialProfile::combine(1.0, &b, 1.0, &RadialProfile::gaussian(1.0, 1.0, 1.5).unwrap()).unwrap();
        assert_eq!(mix.support_radius(), None);
        assert!(mix.effective_radius(1e-16) < 10.0);
        assert_eq!(RadialProfile::zero(2.0).unwrap().support_radius(), Some(0.0));
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let g = RadialProfile::combine(
            0.7,
            &RadialProfile::bump(1.0, 3.0, 4.0, 1.5).unwrap(),
            -0.2,
            &RadialProfile::algebraic(1.0, 1.5).unwrap(),
        )
        .unwrap();
        for r in [0.3, 1.1, 2.9, -1.7, 5.0] {
            let h = 1e-6;
            let fd = (g.g(r + h) - g.g(r - h)) / (2.0 * h);
            assert_abs_diff_eq!(g.g_prime(r), fd, epsilon = 1e-8);
            let hd = (g.h(r + h) - g.h(r - h)) / (2.0 * h);
            assert_abs_diff_eq!(g.h_prime(r), hd, epsilon = 1e-8);
        }
    }

    proptest! {
        #[test]
        fn even_and_bounded(r in -1e4f64..1e4, amp in -5.0f64..5.0, kappa in 1.01f64..4.0) {
            let g = RadialProfile::combine(
                amp,
                &RadialProfile::algebraic(1.0, kappa).unwrap(),
                1.0,
                &RadialProfile::bump(0.5, 2.0, 3.0, kappa).unwrap(),
            ).unwrap();
            prop_assert!((g.g(r) - g.g(-r)).abs() <= 1e-14 * g.g(r).abs().max(1.0));
            prop_assert_eq!(g.h(-r), -g.h(r));
            let w = jap(r);
            let eps = g.epsilon() * (1.0 + 1e-9);
            prop_assert!(g.g(r).abs() <= eps * w.powf(-(kappa + 1.0)));
            prop_assert!(g.g_prime(r).abs() <= eps * w.powf(-(kappa + 2.0)));
            prop_assert!(g.h(r).abs() <= eps * w.powf(-kappa));
            prop_assert!(g.h_prime(r).abs() <= eps * w.powf(-kappa - 1.0));
        }
    }
}
