//! Adaptive Gauss–Kronrod quadrature and a few sample-based rules.
//!
//! The adaptive driver bisects the interval with the largest error estimate
//! until the global estimate drops below `max(abs_tol, rel_tol·|I|)` or the
//! subdivision cap is reached. Error estimates follow QUADPACK's G7/K15 pair.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and subdivision cap for the adaptive driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_max_intervals(mut self, cap: usize) -> Self {
        self.max_intervals = cap;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One application of the 15-point Kronrod rule; returns (value, error estimate).
pub fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();
    let f_center = f(center)?;

    let mut res_gauss = f_center * WG[3];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x)?;
        let f2 = f(center + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        res_kronrod += WGK[j] * sum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * sum;
        }
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_kronrod * half;
    if !value.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    let err = rescale_error(
        (res_kronrod - res_gauss) * half,
        res_abs * abs_half,
        res_asc * abs_half,
    );
    Ok((value, err))
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptive integration of a fallible integrand over the pieces delimited by
/// `points` (sorted, at least two entries). Breakpoints let the caller pin
/// known kinks so the driver does not have to hunt for them.
pub fn try_integrate_pieces<F>(mut f: F, points: &[f64], cfg: &QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if points.len() < 2 {
        return Err(Error::Domain("integration needs at least two points".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (value, error) = gk15(&mut f, a, b)?;
        evaluations += 15;
        heap.push(Segment { a, b, value, error });
    }

    let lower = points[0];
    let upper = points[points.len() - 1];

    loop {
        let value: f64 = frozen_value + heap.iter().map(|s| s.value).sum::<f64>();
        let error: f64 = frozen_error + heap.iter().map(|s| s.error).sum::<f64>();
        let tol = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        let intervals = heap.len();
        if error <= tol || heap.is_empty() {
            if error > tol {
                return Err(Error::Quadrature {
                    lower,
                    upper,
                    value,
                    abs_error: error,
                    intervals,
                });
            }
            return Ok(QuadResult {
                value,
                abs_error: error,
                intervals,
                evaluations,
            });
        }
        if intervals >= cfg.max_intervals {
            return Err(Error::Quadrature {
                lower,
                upper,
                value,
                abs_error: error,
                intervals,
            });
        }

        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        evaluations += 30;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
}

/// Adaptive integration of an infallible integrand over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_pieces(|x| Ok(f(x)), &[a, b], cfg)
}

/// Adaptive integration with interior breakpoints. Breakpoints outside
/// `(a, b)` are ignored.
pub fn integrate_with_breaks<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    let points = break_points(a, b, breaks);
    try_integrate_pieces(|x| Ok(f(x)), &points, cfg)
}

/// Sorted, deduplicated list `[a, interior breaks..., b]`.
pub fn break_points(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| *x > lo && *x < hi)
        .collect();
    points.push(lo);
    points.push(hi);
    points.sort_by(f64::total_cmp);
    points.dedup();
    if a > b {
        points.reverse();
    }
    points
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid_uniform(samples: &[f64], h: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (samples[0] + samples[n - 1]) + samples[1..n - 1].iter().sum::<f64>()),
    }
}

/// Composite Simpson rule on uniformly spaced samples. An odd number of
/// intervals is closed with Simpson's 3/8 rule on the last three.
pub fn simpson_uniform(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (samples[0] + samples[1]),
        _ => {
            let intervals = n - 1;
            let (even_part, tail) = if intervals.is_multiple_of(2) {
                (intervals, 0)
            } else if intervals >= 3 {
                (intervals - 3, 3)
            } else {
                (0, intervals)
            };
            let mut total = 0.0;
            let mut i = 0;
            while i < even_part {
                total += h / 3.0 * (samples[i] + 4.0 * samples[i + 1] + samples[i + 2]);
                i += 2;
            }
            if tail == 3 {
                let s = &samples[i..i + 4];
                total += 3.0 * h / 8.0 * (s[0] + 3.0 * s[1] + 3.0 * s[2] + s[3]);
            }
            total
        }
    }
}

/// Trapezoid rule on a non-uniform grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &QuadConfig::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert_abs_diff_eq!(r.value, exact, epsilon = 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn kinked_integrand_converges() {
        let cfg = QuadConfig::default();
        let r = integrate(|x: f64| x.abs().sqrt(), -1.0, 4.0, &cfg).unwrap();
        assert_abs_diff_eq!(r.value, 2.0 / 3.0 + 16.0 / 3.0, epsilon = 1e-9);
        let kink = |x: f64| (x - 0.3).abs();
        let plain = integrate(kink, -1.0, 4.0, &cfg).unwrap();
        let split = integrate_with_breaks(kink, -1.0, 4.0, &[0.3, 7.0], &cfg).unwrap();
        assert_abs_diff_eq!(split.value, plain.value, epsilon = 1e-9);
        assert_eq!(split.evaluations, 30);
        assert!(plain.evaluations > split.evaluations);
    }

    #[test]
    fn cap_reports_diagnostics() {
        let cfg = QuadConfig::default().with_abs_tol(1e-14).with_max_intervals(3);
        let err = integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &cfg).unwrap_err();
        match err {
            Error::Quadrature { intervals, .. } => assert_eq!(intervals, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let cfg = QuadConfig::default();
        let fwd = integrate(|x: f64| x.exp(), 0.0, 1.0, &cfg).unwrap().value;
        let back = integrate(|x: f64| x.exp(), 1.0, 0.0, &cfg).unwrap().value;
        assert_abs_diff_eq!(fwd, -back, epsilon = 1e-15);
    }

    #[test]
    fn sample_rules() {
        let h = 0.1;
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 * h).collect();
        let cubic: Vec<f64> = xs.iter().map(|x| x * x * x).collect();
        assert_abs_diff_eq!(simpson_uniform(&cubic, h), 0.25, epsilon = 1e-14);
        let odd: Vec<f64> = cubic[..10].to_vec();
        assert_abs_diff_eq!(simpson_uniform(&odd, h), 0.9f64.powi(4) / 4.0, epsilon = 1e-14);
        let lin: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        assert_abs_diff_eq!(trapezoid_uniform(&lin, h), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trapezoid(&xs, &lin), 2.0, epsilon = 1e-14);
    }
}
