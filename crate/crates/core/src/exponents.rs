//! Critical exponents for the semilinear wave equation with scale-invariant
//! damping, and a classifier mapping `(n, mu, m, p)` to the known regime.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance used to decide that `p` sits exactly on a threshold.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// A real number or `+inf`. The Strauss exponent in one dimension is infinite
/// and has to compare correctly against finite exponents.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInf => None,
        }
    }

    /// Lossy conversion mapping `PosInf` to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn max_f64(self, other: f64) -> ExtReal {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x.max(other)),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => f.write_str("+inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInf => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(ExtReal::Finite(x)),
            Repr::Text(s) if s == "+inf" || s == "inf" => Ok(ExtReal::PosInf),
            Repr::Text(s) => Err(serde::de::Error::custom(format!("not an extended real: {s}"))),
        }
    }
}

/// Strauss exponent: the positive root of `(d-1)p^2 - (d+1)p - 2 = 0`,
/// infinite for `d = 1`.
pub fn strauss_p0(d: f64) -> Result<ExtReal> {
    if !(d >= 1.0) {
        return Err(Error::Domain(format!("strauss exponent needs d >= 1, got {d}")));
    }
    if d == 1.0 {
        return Ok(ExtReal::PosInf);
    }
    let b = d + 1.0;
    let disc = b * b + 8.0 * (d - 1.0);
    // 2c / (-b - sqrt(disc)) form avoids cancellation as d -> 1
    Ok(ExtReal::Finite(4.0 / (disc.sqrt() - b)))
}

/// Fujita exponent `1 + 2/d`.
pub fn fujita_p_inf(d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("fujita exponent needs d > 0, got {d}")));
    }
    Ok(1.0 + 2.0 / d)
}

/// Critical exponent for `mu = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct P2 {
    pub value: f64,
    /// Blow-up below `value` is proven in every dimension; that it is also the
    /// global-existence threshold is only conjectured for `n >= 4`.
    pub conjectural: bool,
}

pub fn p2(n: u32) -> Result<P2> {
    match n {
        0 => Err(Error::Domain("dimension must be at least 1".into())),
        1 => Ok(P2 {
            value: 3.0,
            conjectural: false,
        }),
        2 | 3 => Ok(P2 {
            value: finite_p0(n as f64 + 2.0),
            conjectural: false,
        }),
        _ => {
            let n = n as f64;
            Ok(P2 {
                value: finite_p0(n + 2.0).max(fujita_p_inf(n)?),
                conjectural: true,
            })
        }
    }
}

fn finite_p0(d: f64) -> f64 {
    strauss_p0(d)
        .ok()
        .and_then(ExtReal::finite)
        .expect("d > 1 gives a finite Strauss exponent")
}

/// Blow-up threshold for the equation with mass `m = (mu - 2) mu`:
/// `max{p_inf(n - 1 + mu/2), p0(n + mu)}`.
pub fn p_mu_tilde(n: u32, mu: f64) -> Result<f64> {
    if n == 0 || !(mu > 0.0) {
        return Err(Error::Domain(format!("need n >= 1 and mu > 0, got n={n}, mu={mu}")));
    }
    let n = n as f64;
    let fujita = fujita_p_inf(n - 1.0 + mu / 2.0)?;
    Ok(finite_p0(n + mu).max(fujita))
}

/// Piecewise closed form of [`p_mu_tilde`], used to cross-check the max.
pub fn p_mu_tilde_closed_form(n: u32, mu: f64) -> Result<f64> {
    if n == 0 || !(mu > 0.0) {
        return Err(Error::Domain(format!("need n >= 1 and mu > 0, got n={n}, mu={mu}")));
    }
    match n {
        1 => fujita_p_inf(mu / 2.0),
        2 if mu >= 2.0 => fujita_p_inf(1.0 + mu / 2.0),
        _ => Ok(finite_p0(n as f64 + mu)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    BlowUp,
    GlobalExistence,
    Open,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::BlowUp => "blow-up",
            Regime::GlobalExistence => "global-existence",
            Regime::Open => "open",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub regime: Regime,
    /// The result that decides the verdict.
    pub source: String,
    /// Every known result covering the point, deciding one first.
    pub sources: Vec<String>,
    /// `p` coincides with one of the thresholds of the applicable results.
    pub boundary: bool,
    pub notes: Vec<String>,
}

/// A known result: `regime` holds for `p` in `(lower, upper]`, or `[lower, upper]`
/// when `lower_closed`.
struct Criterion {
    regime: Regime,
    lower: f64,
    upper: f64,
    lower_closed: bool,
    source: &'static str,
}

impl Criterion {
    fn below(upper: f64, source: &'static str) -> Self {
        Self {
            regime: Regime::BlowUp,
            lower: 1.0,
            upper,
            lower_closed: false,
            source,
        }
    }

    fn strictly_below(upper: f64, source: &'static str) -> Self {
        // p < upper; represented by nudging the closed end off the threshold
        Self {
            regime: Regime::BlowUp,
            lower: 1.0,
            upper: upper - 2.0 * BOUNDARY_TOL * upper.abs().max(1.0),
            lower_closed: false,
            source,
        }
    }

    fn above(lower: f64, source: &'static str) -> Self {
        Self {
            regime: Regime::GlobalExistence,
            lower,
            upper: f64::INFINITY,
            lower_closed: false,
            source,
        }
    }

    fn contains(&self, p: f64) -> bool {
        let lower_ok = if self.lower_closed {
            p >= self.lower - tol(self.lower)
        } else {
            p > self.lower + tol(self.lower)
        };
        lower_ok && p <= self.upper + tol(self.upper)
    }

    fn touches(&self, p: f64) -> bool {
        let near = |x: f64| x.is_finite() && (p - x).abs() <= tol(x);
        (self.lower > 1.0 && near(self.lower)) || near(self.upper)
    }
}

fn tol(x: f64) -> f64 {
    if x.is_finite() {
        BOUNDARY_TOL * x.abs().max(1.0)
    } else {
        0.0
    }
}

const SRC_WAVE_BLOWUP: &str =
    "undamped wave equation: finite-time blow-up for 1 < p <= p0(n) (Strauss conjecture, blow-up side)";
const SRC_WAVE_EXIST: &str =
    "undamped wave equation: small data global existence for p0(n) < p <= (n+3)/(n-1) (Strauss conjecture, existence side)";
const SRC_NONEX_SUPER1: &str =
    "scale-invariant damping, mu > 1: no global weak solutions for p <= 1 + 2/n (test function method)";
const SRC_NONEX_SUB1: &str =
    "scale-invariant damping, 0 < mu <= 1: no global weak solutions for p <= 1 + 2/(n - 1 + mu) (test function method)";
const SRC_EXIST_LARGE_MU: &str =
    "scale-invariant damping, effective range of mu: small data global energy solutions for p > 1 + 2/n (n=1 mu>=5/3, n=2 mu>=3, n>=3 mu>=n+2)";
const SRC_DYN_SUB1: &str =
    "scale-invariant damping, 0 < mu < 1: finite-time blow-up for p < 1 + 2/(n - 1 + mu) (polynomial-speed wave reduction)";
const SRC_DYN_EQ1: &str =
    "scale-invariant damping, mu = 1: finite-time blow-up for p <= 1 + 2/n (exponential-speed wave reduction)";
const SRC_DYN_SUPER1: &str =
    "scale-invariant damping, 1 < mu <= 2: finite-time blow-up for p < 1 + 2/n (shifted polynomial-speed wave reduction)";
const SRC_MU2_BLOWUP: &str =
    "mu = 2: finite-time blow-up for 1 < p <= p2(n) with nonnegative compactly supported data (Glassey functional argument)";
const SRC_MU2_EXIST_N2: &str =
    "mu = 2, n = 2: small data global existence for p > 2 (Klainerman vector fields)";
const SRC_MU2_EXIST_N3: &str =
    "mu = 2, n = 3: small data global radial solutions for p > p0(5) (pointwise estimates in weighted spaces)";
const SRC_MASS_BLOWUP: &str =
    "mass m = (mu - 2) mu: finite-time blow-up for 1 < p <= max{p_inf(n - 1 + mu/2), p0(n + mu)} (Glassey functional argument)";
const SRC_EVEN_CONJECTURE: &str =
    "mu = 2, n >= 4: existence above p0(n+2) is conjectured (shift p0(n) -> p0(n+2)) but unproven; odd n >= 5 only on a bounded range above p0(n+2)";
const SRC_UNKNOWN: &str = "no known result covers this parameter point";

/// Classify `(n, mu, m, p)` into the sharpest regime the known results support.
/// Points no result covers are `Open`; there is no extrapolation.
pub fn classify(n: u32, mu: f64, m: f64, p: f64) -> Result<RegimeVerdict> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(p > 1.0) || !mu.is_finite() || mu < 0.0 || !m.is_finite() {
        return Err(Error::Domain(format!(
            "classify needs p > 1, mu >= 0 and finite m, got mu={mu}, m={m}, p={p}"
        )));
    }
    let nf = n as f64;
    let mut criteria = Vec::new();
    let mut notes = Vec::new();

    if m == 0.0 {
        if mu == 0.0 {
            let p0 = strauss_p0(nf)?.to_f64();
            criteria.push(Criterion::below(p0, SRC_WAVE_BLOWUP));
            if n >= 2 {
                criteria.push(Criterion {
                    regime: Regime::GlobalExistence,
                    lower: p0,
                    upper: (nf + 3.0) / (nf - 1.0),
                    lower_closed: false,
                    source: SRC_WAVE_EXIST,
                });
            }
        } else {
            let fujita = fujita_p_inf(nf)?;
            if mu > 1.0 {
                criteria.push(Criterion::below(fujita, SRC_NONEX_SUPER1));
            } else {
                criteria.push(Criterion::below(fujita_p_inf(nf - 1.0 + mu)?, SRC_NONEX_SUB1));
            }
            if mu < 1.0 {
                criteria.push(Criterion::strictly_below(fujita_p_inf(nf - 1.0 + mu)?, SRC_DYN_SUB1));
            } else if mu == 1.0 {
                criteria.push(Criterion::below(fujita, SRC_DYN_EQ1));
            } else if mu <= 2.0 {
                criteria.push(Criterion::strictly_below(fujita, SRC_DYN_SUPER1));
            }
            let effective = match n {
                1 => mu >= 5.0 / 3.0,
                2 => mu >= 3.0,
                _ => mu >= nf + 2.0,
            };
            if effective {
                criteria.push(Criterion::above(fujita, SRC_EXIST_LARGE_MU));
            }
            if mu == 2.0 {
                let p2v = p2(n)?;
                criteria.push(Criterion::below(p2v.value, SRC_MU2_BLOWUP));
                match n {
                    2 => criteria.push(Criterion::above(2.0, SRC_MU2_EXIST_N2)),
                    3 => {
                        criteria.push(Criterion::above(p2v.value, SRC_MU2_EXIST_N3));
                        if p > p2v.value + tol(p2v.value) {
                            notes.push("global existence is established for radial data".into());
                        }
                    }
                    _ => {}
                }
                if n >= 4 && p > p2v.value + tol(p2v.value) {
                    notes.push(SRC_EVEN_CONJECTURE.into());
                }
            } else if mu > 2.0 && !effective {
                notes.push("blow-up dynamics for mu > 2 are unknown".into());
            }
        }
    } else if mu > 0.0 && (m - (mu - 2.0) * mu).abs() <= BOUNDARY_TOL * m.abs().max(1.0) {
        criteria.push(Criterion::below(p_mu_tilde(n, mu)?, SRC_MASS_BLOWUP));
        notes.push("global existence above the blow-up threshold is conjectured only".into());
    }

    let applicable: Vec<&Criterion> = criteria.iter().filter(|c| c.contains(p)).collect();
    let blowup = applicable.iter().any(|c| c.regime == Regime::BlowUp);
    let exist = applicable.iter().any(|c| c.regime == Regime::GlobalExistence);
    debug_assert!(!(blowup && exist), "contradictory criteria at n={n} mu={mu} m={m} p={p}");

    let regime = if blowup {
        Regime::BlowUp
    } else if exist {
        Regime::GlobalExistence
    } else {
        Regime::Open
    };
    let mut sources: Vec<String> = applicable
        .iter()
        .filter(|c| c.regime == regime)
        .map(|c| c.source.to_string())
        .collect();
    // the sharpest result is the one with the tightest threshold
    if regime == Regime::BlowUp {
        let best = applicable
            .iter()
            .filter(|c| c.regime == regime)
            .max_by(|a, b| a.upper.total_cmp(&b.upper))
            .map(|c| c.source.to_string());
        if let Some(best) = best {
            sources.retain(|s| *s != best);
            sources.insert(0, best);
        }
    }
    if regime == Regime::Open {
        if n >= 4 && mu == 2.0 && m == 0.0 {
            sources.push(SRC_EVEN_CONJECTURE.into());
        } else {
            sources.push(SRC_UNKNOWN.into());
        }
        notes.retain(|s| s != SRC_EVEN_CONJECTURE);
    }
    let boundary = criteria.iter().any(|c| c.touches(p));

    Ok(RegimeVerdict {
        regime,
        source: sources[0].clone(),
        sources,
        boundary,
        notes,
    })
}

/// One row of the exponent table printed by the command line front end.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentEntry {
    pub name: String,
    pub args: serde_json::Value,
    pub value: ExtReal,
    pub citation: String,
}

/// The exponents for dimensions `1..=max_n` (and `mu` grid for the mass model).
pub fn exponent_table(max_n: u32, mus: &[f64]) -> Result<Vec<ExponentEntry>> {
    let mut rows = Vec::new();
    for n in 1..=max_n {
        let nf = n as f64;
        rows.push(ExponentEntry {
            name: "p0".into(),
            args: serde_json::json!({ "d": nf }),
            value: strauss_p0(nf)?,
            citation: "positive root of (d-1)p^2 - (d+1)p - 2 = 0; +inf for d = 1".into(),
        });
        rows.push(ExponentEntry {
            name: "p_inf".into(),
            args: serde_json::json!({ "d": nf }),
            value: ExtReal::Finite(fujita_p_inf(nf)?),
            citation: "Fujita exponent 1 + 2/d".into(),
        });
        let p2v = p2(n)?;
        rows.push(ExponentEntry {
            name: "p2".into(),
            args: serde_json::json!({ "n": n, "conjectural": p2v.conjectural }),
            value: ExtReal::Finite(p2v.value),
            citation: "max{p0(n+2), p_inf(n)}: blow-up threshold for mu = 2".into(),
        });
        for &mu in mus {
            rows.push(ExponentEntry {
                name: "p_mu_tilde".into(),
                args: serde_json::json!({ "n": n, "mu": mu }),
                value: ExtReal::Finite(p_mu_tilde(n, mu)?),
                citation: "max{p_inf(n-1+mu/2), p0(n+mu)}: blow-up threshold for mass (mu-2)mu".into(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p0(d: f64) -> f64 {
        strauss_p0(d).unwrap().to_f64()
    }

    #[test]
    fn known_values() {
        assert_abs_diff_eq!(p0(4.0), 2.0, epsilon = 1e-12);
        assert_eq!(strauss_p0(1.0).unwrap(), ExtReal::PosInf);
        assert_abs_diff_eq!(p0(3.0), 1.0 + 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(p0(5.0), (3.0 + 17f64.sqrt()) / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fujita_p_inf(2.0).unwrap(), 2.0);
        assert_abs_diff_eq!(fujita_p_inf(3.0).unwrap(), 5.0 / 3.0);
        assert!(strauss_p0(0.5).is_err());
        assert!(fujita_p_inf(0.0).is_err());
    }

    #[test]
    fn p2_cases() {
        assert_eq!(p2(1).unwrap().value, 3.0);
        assert_abs_diff_eq!(p2(2).unwrap().value, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p2(3).unwrap().value, p0(5.0), epsilon = 1e-15);
        assert!(p2(4).unwrap().conjectural);
        assert!(!p2(3).unwrap().conjectural);
    }

    #[test]
    fn p_mu_tilde_examples() {
        assert_abs_diff_eq!(p_mu_tilde(1, 1.0).unwrap(), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p_mu_tilde(2, 4.0).unwrap(), 5.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p_mu_tilde(3, 2.0).unwrap(), p0(5.0), epsilon = 1e-12);
    }

    #[test]
    fn infinite_value_serializes_as_text() {
        let json = serde_json::to_string(&ExtReal::PosInf).unwrap();
        assert_eq!(json, "\"+inf\"");
        let back: ExtReal = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ExtReal::PosInf);
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInf);
    }

    #[test]
    fn classify_examples() {
        let v = classify(3, 2.0, 0.0, 1.5).unwrap();
        assert_eq!(v.regime, Regime::BlowUp);
        assert_eq!(v.source, SRC_MU2_BLOWUP);
        assert_eq!(classify(2, 2.0, 0.0, 2.5).unwrap().regime, Regime::GlobalExistence);
        assert_eq!(classify(3, 10.0, 0.0, 1.2).unwrap().regime, Regime::BlowUp);
        let open = classify(4, 2.0, 0.0, 3.0).unwrap();
        assert_eq!(open.regime, Regime::Open);
        assert_eq!(open.source, SRC_EVEN_CONJECTURE);
        let edge = classify(3, 2.0, 0.0, p0(5.0)).unwrap();
        assert!(edge.boundary);
        assert_eq!(edge.regime, Regime::BlowUp);
    }

    proptest! {
        #[test]
        fn quadratic_residual(d in 1.0001f64..200.0) {
            let p = p0(d);
            let res = (d - 1.0) * p * p - (d + 1.0) * p - 2.0;
            prop_assert!(res.abs() < 1e-12 * p * p * d);
        }

        #[test]
        fn exponents_decrease(d in 1.001f64..50.0, step in 0.001f64..5.0) {
            prop_assert!(p0(d + step) < p0(d));
            prop_assert!(fujita_p_inf(d + step).unwrap() < fujita_p_inf(d).unwrap());
        }

        #[test]
        fn closed_form_matches_max(n in 1u32..=5, mu in 0.001f64..=6.0) {
            let a = p_mu_tilde(n, mu).unwrap();
            let b = p_mu_tilde_closed_form(n, mu).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn classify_is_total(n in 1u32..=6, mu in 0.0f64..8.0, p in 1.001f64..6.0) {
            for m in [0.0, (mu - 2.0) * mu, -0.3] {
                let v = classify(n, mu, m, p).unwrap();
                prop_assert!(!v.sources.is_empty());
            }
        }
    }
}
