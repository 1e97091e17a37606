//! Numerical checks of the integral bounds behind the nonlinear estimate:
//!
//! `I(ξ) = ∫_{-ξ}^{ξ} <η+ξ> <η-ξ>^{-(p-1)} <η>^{-p(κ-1)} dη ≲ <ξ>^{-(κ-p)}`,
//!
//! and the zone-wise bounds on `I_0`, `I_0'`, `I_{1,±}`, the majorants of
//! `|Lu|` and `|∂_r(rLu)|`.

use serde::{Deserialize, Serialize};

use super::kappa::{kappa_range, lemma_kappa_range};
use crate::error::{Error, Result};
use crate::quadrature::{break_points, try_integrate_pieces, QuadConfig};
use crate::radial_linear::jap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiSample {
    pub xi: f64,
    pub value: f64,
    /// `I(ξ) <ξ>^{κ-p}`.
    pub ratio: f64,
}

fn check_pair(p: f64, kappa: f64) -> Result<()> {
    let range = lemma_kappa_range(p)?;
    if !range.contains(kappa) {
        return Err(Error::Domain(format!(
            "(p, kappa) = ({p}, {kappa}) is outside the admissible range [{}, {}]",
            range.lower, range.upper
        )));
    }
    Ok(())
}

fn check_solver_pair(p: f64, kappa: f64) -> Result<()> {
    let range = kappa_range(p)?;
    if !range.contains(kappa) {
        return Err(Error::Domain(format!(
            "(p, kappa) = ({p}, {kappa}) is outside the solver range ({}, {}]",
            range.lower, range.upper
        )));
    }
    Ok(())
}

fn quad_cfg(rel: f64) -> QuadConfig {
    QuadConfig::default()
        .with_abs_tol(1e-300)
        .with_rel_tol(rel)
        .with_max_intervals(20_000)
}

/// `I(ξ)` by adaptive quadrature, split at the kinks `0, ±ξ/2` and on
/// geometric ladders around the peaks at `η = 0` and `η = ξ`. Without the
/// ladders a single Kronrod rule on a long piece can miss a unit-width peak
/// at its endpoint.
pub fn i_xi(p: f64, kappa: f64, xi: f64) -> Result<f64> {
    if !(xi >= 0.0) {
        return Err(Error::Domain(format!("I(xi) needs xi >= 0, got {xi}")));
    }
    if xi == 0.0 {
        return Ok(0.0);
    }
    let points = break_points(-xi, xi, &laddered(&[0.0, 0.5 * xi, -0.5 * xi, xi], 0.5 * xi));
    let res = try_integrate_pieces(
        |eta| Ok(jap(eta + xi) * jap(eta - xi).powf(-(p - 1.0)) * jap(eta).powf(-p * (kappa - 1.0))),
        &points,
        &quad_cfg(1e-10),
    )?;
    Ok(res.value)
}

pub fn verify_i(p: f64, kappa: f64, xi_grid: &[f64]) -> Result<Vec<XiSample>> {
    check_pair(p, kappa)?;
    xi_grid
        .iter()
        .map(|&xi| {
            let value = i_xi(p, kappa, xi)?;
            Ok(XiSample {
                xi,
                value,
                ratio: value * jap(xi).powf(kappa - p),
            })
        })
        .collect()
}

/// Zones of the `(t, r)` plane used by the bounds, tested in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Zone {
    /// `t >= 2r`.
    Interior,
    /// `r <= 1`, `t < 2r`.
    SmallRadius,
    /// `r > 1`, `r <= t < 2r`.
    NearCone,
    /// `r > 1`, `t < r`.
    Exterior,
}

impl Zone {
    pub fn of(t: f64, r: f64) -> Zone {
        if t >= 2.0 * r {
            Zone::Interior
        } else if r <= 1.0 {
            Zone::SmallRadius
        } else if r <= t {
            Zone::NearCone
        } else {
            Zone::Exterior
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// `I_0`, or `I_0'` in the exterior zone.
    I0,
    I1Minus,
    I1Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub t: f64,
    pub r: f64,
    pub zone: Zone,
    pub quantity: Quantity,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Ratio ceiling of one quantity in one zone. Samples sharing the shape
/// `t/r` form a ray; along each ray ordered by scale, a ceiling that keeps
/// rising must rise more slowly at every step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneCeiling {
    pub zone: Zone,
    pub quantity: Quantity,
    pub count: usize,
    pub rays: usize,
    pub max_ratio: f64,
    /// Largest `Δ_last / Δ_prev` over rays whose ratio still rises at the
    /// largest scale; zero when every ray has levelled off.
    pub worst_deceleration: f64,
    /// All ratios finite and `worst_deceleration <= CEILING_DECELERATION`.
    /// The small-radius zone is bounded, so only finiteness is asked there.
    pub single_ceiling: bool,
}

/// Largest admissible ratio of consecutive rises along a ray. A ratio that
/// grows like `log(t + r)` over geometrically spaced samples has equal rises
/// and fails.
pub const CEILING_DECELERATION: f64 = 0.9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: f64,
    pub kappa: f64,
    pub samples: Vec<BoundSample>,
    pub ceilings: Vec<ZoneCeiling>,
}

impl BoundReport {
    pub fn all_bounded(&self) -> bool {
        self.ceilings.iter().all(|c| c.single_ceiling)
    }
}

#[inline]
fn density(p: f64, kappa: f64, s: f64, rho: f64) -> f64 {
    let a = rho.abs();
    jap(s + a).powf(-p) * jap(s - a).powf(-p * (kappa - 1.0)) * jap(rho)
}

/// Each center together with `c ± 10^k` for `10^k < span`, so that no long
/// piece ends on a narrow peak.
fn laddered(centers: &[f64], span: f64) -> Vec<f64> {
    let mut out = centers.to_vec();
    for &c in centers {
        let mut d = 1.0;
        while d < span {
            out.extend([c - d, c + d]);
            d *= 10.0;
        }
    }
    out
}

fn s_breaks(t: f64, r: f64) -> Vec<f64> {
    laddered(&[t - r, 0.5 * (t - r), 0.5 * (t + r), r - t, 0.0], t)
}

/// `∫_0^t <s>^{-(p-1)} ∫_{a(s)}^{b(s)} density dρ ds`.
fn double_integral(p: f64, kappa: f64, t: f64, r: f64, limits: impl Fn(f64) -> (f64, f64)) -> Result<f64> {
    if t == 0.0 || r == 0.0 {
        return Ok(0.0);
    }
    let inner_cfg = quad_cfg(1e-10);
    let outer = |s: f64| -> Result<f64> {
        let (a, b) = limits(s);
        if b <= a {
            return Ok(0.0);
        }
        let points = break_points(a, b, &laddered(&[0.0, s, -s], b - a));
        let res = try_integrate_pieces(|rho| Ok(density(p, kappa, s, rho)), &points, &inner_cfg)?;
        Ok(jap(s).powf(-(p - 1.0)) * res.value)
    };
    let points = break_points(0.0, t, &s_breaks(t, r));
    Ok(try_integrate_pieces(outer, &points, &quad_cfg(1e-8))?.value)
}

pub fn i0(p: f64, kappa: f64, t: f64, r: f64) -> Result<f64> {
    double_integral(p, kappa, t, r, |s| (t - s - r, t - s + r))
}

pub fn i0_prime(p: f64, kappa: f64, t: f64, r: f64) -> Result<f64> {
    double_integral(p, kappa, t, r, |s| (r - (t - s), r + (t - s)))
}

/// `I_{1,+}` for `sign = 1`, `I_{1,-}` for `sign = -1`.
pub fn i1(p: f64, kappa: f64, t: f64, r: f64, sign: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let points = break_points(0.0, t, &s_breaks(t, r));
    let res = try_integrate_pieces(
        |s| {
            let x = t - s + sign * r;
            Ok(jap(s).powf(-(p - 1.0)) * density(p, kappa, s, x))
        },
        &points,
        &quad_cfg(1e-10),
    )?;
    Ok(res.value)
}

fn ratio(value: f64, bound: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        value / bound
    }
}

/// Evaluate `I_0` (or `I_0'`), `I_{1,-}` and `I_{1,+}` at every sample and
/// compare with the zone's bound. Samples need `t > 0` and `r >= 0`.
/// The pair must lie in the solver range [`kappa_range`], which the bounds
/// assume.
pub fn verify_i0_i1(p: f64, kappa: f64, samples: &[(f64, f64)]) -> Result<BoundReport> {
    check_solver_pair(p, kappa)?;
    use rayon::prelude::*;
    let per_sample: Vec<Result<Vec<BoundSample>>> = samples
        .par_iter()
        .map(|&(t, r)| {
            if !(t > 0.0) || !(r >= 0.0) {
                return Err(Error::Domain(format!("bound sample needs t > 0, r >= 0: ({t}, {r})")));
            }
            let zone = Zone::of(t, r);
            let (v0, b0) = match zone {
                Zone::Interior | Zone::SmallRadius => (i0(p, kappa, t, r)?, r * jap(t + r).powf(-kappa)),
                Zone::NearCone => (i0(p, kappa, t, r)?, jap(t - r).powf(-(kappa - 1.0))),
                Zone::Exterior => (i0_prime(p, kappa, t, r)?, jap(t - r).powf(-(kappa - 1.0))),
            };
            let vm = i1(p, kappa, t, r, -1.0)?;
            let bm = if t >= 2.0 * r {
                jap(t - r).powf(-kappa)
            } else {
                jap(t - r).powf(-(kappa - 1.0))
            };
            let vp = i1(p, kappa, t, r, 1.0)?;
            let bp = jap(t + r).powf(-kappa);
            Ok([(Quantity::I0, v0, b0), (Quantity::I1Minus, vm, bm), (Quantity::I1Plus, vp, bp)]
                .into_iter()
                .map(|(quantity, value, bound)| BoundSample {
                    t,
                    r,
                    zone,
                    quantity,
                    value,
                    bound,
                    ratio: ratio(value, bound),
                })
                .collect())
        })
        .collect();
    let mut all = Vec::with_capacity(3 * samples.len());
    for s in per_sample {
        all.extend(s?);
    }
    let ceilings = ceilings(&all);
    Ok(BoundReport {
        p,
        kappa,
        samples: all,
        ceilings,
    })
}

fn ray_deceleration(ray: &[&BoundSample]) -> f64 {
    let n = ray.len();
    if n < 3 {
        return 0.0;
    }
    let (a, b, c) = (ray[n - 3].ratio, ray[n - 2].ratio, ray[n - 1].ratio);
    let (prev, last) = (b - a, c - b);
    if last <= 1e-9 * c.abs() {
        0.0
    } else if prev <= 0.0 {
        f64::INFINITY
    } else {
        last / prev
    }
}

fn ceilings(samples: &[BoundSample]) -> Vec<ZoneCeiling> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(Zone, Quantity), Vec<&BoundSample>> = BTreeMap::new();
    for s in samples {
        groups.entry((s.zone, s.quantity)).or_default().push(s);
    }
    groups
        .into_iter()
        .map(|((zone, quantity), group)| {
            // rays keyed by t/r rounded to nine digits
            let mut rays: BTreeMap<i64, Vec<&BoundSample>> = BTreeMap::new();
            for s in &group {
                let shape = if s.r > 0.0 { s.t / s.r } else { f64::INFINITY };
                let key = if shape.is_finite() { (shape * 1e9).round() as i64 } else { i64::MAX };
                rays.entry(key).or_default().push(s);
            }
            let mut worst: f64 = 0.0;
            for ray in rays.values_mut() {
                ray.sort_by(|a, b| (a.t + a.r).total_cmp(&(b.t + b.r)));
                worst = worst.max(ray_deceleration(ray));
            }
            let max_ratio = group.iter().map(|s| s.ratio).fold(0.0, f64::max);
            let finite = group.iter().all(|s| s.ratio.is_finite());
            let stable = zone == Zone::SmallRadius || worst <= CEILING_DECELERATION;
            ZoneCeiling {
                zone,
                quantity,
                count: group.len(),
                rays: rays.len(),
                max_ratio,
                worst_deceleration: if zone == Zone::SmallRadius { 0.0 } else { worst },
                single_ceiling: finite && stable,
            }
        })
        .collect()
}

/// A fixed set of 100 samples, 25 per zone: five shapes `t/r` per zone, each
/// at five scales `r = 2·10^k`, `k = 1..=5` (outside the small-radius zone).
/// Near the lower end of the `κ` range the ratios level off only beyond
/// `r ≈ 10^4`, hence the large top scale.
pub fn standard_bound_samples() -> Vec<(f64, f64)> {
    let scales = [20.0, 200.0, 2000.0, 20_000.0, 200_000.0];
    let mut out = Vec::with_capacity(100);
    for q in [2.0, 3.0, 5.0, 10.0, 100.0] {
        out.extend(scales.iter().map(|r| (q * r, *r)));
    }
    for r in [0.05, 0.2, 0.4, 0.7, 1.0] {
        out.extend([0.1, 0.5, 1.0, 1.5, 1.95].iter().map(|q| (q * r, r)));
    }
    for q in [1.0, 1.2, 1.5, 1.8, 1.95] {
        out.extend(scales.iter().map(|r| (q * r, *r)));
    }
    for q in [0.01, 0.1, 0.5, 0.9, 0.99] {
        out.extend(scales.iter().map(|r| (q * r, *r)));
    }
    out
}
