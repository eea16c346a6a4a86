//! Exact exponent arithmetic for the boundedness thresholds of the bilinear
//! Bochner-Riesz problem, and the region classification built on top of it.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Exact rational number used for every exponent computation.
pub type Rational = Ratio<i64>;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A Lebesgue exponent: a positive rational or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rational),
    Infinite,
}

impl Exponent {
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(domain("exponent denominator is zero"));
        }
        let r = Rational::new(numer, denom);
        if r <= Rational::from_integer(0) {
            return Err(domain(format!("exponent must be positive, got {r}")));
        }
        Ok(Exponent::Finite(r))
    }

    pub fn int(p: i64) -> Self {
        Exponent::new(p, 1).expect("positive integer exponent")
    }

    /// 1/p, with 1/∞ = 0.
    pub fn recip(self) -> Rational {
        match self {
            Exponent::Finite(r) => r.recip(),
            Exponent::Infinite => Rational::from_integer(0),
        }
    }

    /// Exponent with the given reciprocal (0 maps to ∞).
    pub fn from_recip(r: Rational) -> Result<Self> {
        let zero = Rational::from_integer(0);
        if r < zero {
            return Err(domain("negative reciprocal exponent"));
        }
        if r == zero {
            Ok(Exponent::Infinite)
        } else {
            Ok(Exponent::Finite(r.recip()))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Exponent::Finite(r) => to_f64(r),
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn recip_f64(self) -> f64 {
        to_f64(self.recip())
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        other.recip().cmp(&self.recip())
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinite => write!(f, "inf"),
            Exponent::Finite(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Exponent::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts `inf`, integers, fractions `a/b` and finite decimals `1.25`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "Inf" | "infinity" | "∞") {
            return Ok(Exponent::Infinite);
        }
        let bad = || Error::Domain(format!("cannot parse exponent '{s}'"));
        if let Some((a, b)) = s.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            return Exponent::new(a, b);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let scale = 10i64.pow(frac.len() as u32);
            let int: i64 = if int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            let frac: i64 = if frac.is_empty() {
                0
            } else {
                frac.parse().map_err(|_| bad())?
            };
            return Exponent::new(int * scale + frac, scale);
        }
        let p: i64 = s.parse().map_err(|_| bad())?;
        Exponent::new(p, 1)
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = serde_json::Value::deserialize(d)?;
        let text = match raw {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("bad exponent {other}"))),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Hölder triple (p1, p2, p) with 1/p = 1/p1 + 1/p2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub p1: Exponent,
    pub p2: Exponent,
    pub p: Exponent,
}

impl ExponentTriple {
    pub fn new(p1: Exponent, p2: Exponent) -> Result<Self> {
        let one = Exponent::int(1);
        if p1 < one || p2 < one {
            return Err(domain(format!(
                "input exponents must lie in [1, inf], got ({p1}, {p2})"
            )));
        }
        let p = Exponent::from_recip(p1.recip() + p2.recip())?;
        Ok(ExponentTriple { p1, p2, p })
    }
}

fn check_dim(n: u32, min: u32) -> Result<()> {
    if n < min {
        Err(domain(format!("dimension must be at least {min}, got {n}")))
    } else {
        Ok(())
    }
}

/// Exact value of max{n|1/p − 1/2| − 1/2, 0}.
pub fn alpha_p_exact(n: u32, p: Exponent) -> Result<Rational> {
    check_dim(n, 1)?;
    if p < Exponent::int(1) {
        return Err(domain(format!("alpha(p) needs p >= 1, got {p}")));
    }
    let d = p.recip() - q(1, 2);
    let v = Rational::from_integer(n as i64) * if d < q(0, 1) { -d } else { d } - q(1, 2);
    Ok(v.max(q(0, 1)))
}

/// The linear square-function exponent max{n|1/p − 1/2| − 1/2, 0}.
pub fn alpha_p(n: u32, p: Exponent) -> Result<f64> {
    alpha_p_exact(n, p).map(to_f64)
}

/// p₀(n) = 2 + 12/(4n − 6 − k) with n ≡ k (mod 3); infinite when the denominator vanishes.
pub fn p0(n: u32) -> Result<Exponent> {
    check_dim(n, 2)?;
    let k = (n % 3) as i64;
    let den = 4 * n as i64 - 6 - k;
    if den == 0 {
        return Ok(Exponent::Infinite);
    }
    Ok(Exponent::Finite(q(2, 1) + q(12, den)))
}

/// min{p₀(n), 2(n+2)/n}.
pub fn frak_p(n: u32) -> Result<Exponent> {
    let a = p0(n)?;
    let b = Exponent::new(2 * (n as i64 + 2), n as i64)?;
    Ok(a.min(b))
}

/// Exact value of the four-case threshold α*(p1, p2) for n ≥ 2 and p1, p2 ≥ 2.
pub fn alpha_star_exact(n: u32, p1: Exponent, p2: Exponent) -> Result<Rational> {
    check_dim(n, 2)?;
    let two = Exponent::int(2);
    if p1 < two || p2 < two {
        return Err(domain(format!(
            "alpha_star needs p1, p2 >= 2, got ({p1}, {p2})"
        )));
    }
    let fp = frak_p(n)?;
    let a_fp = alpha_p_exact(n, fp)?;
    let one = q(1, 1);
    // 1 − 2/p as an exact rational
    let gap = |p: Exponent| one - q(2, 1) * p.recip();
    let denom = gap(fp);
    let v = match (p1 >= fp, p2 >= fp) {
        (true, true) => alpha_p_exact(n, p1)? + alpha_p_exact(n, p2)?,
        (true, false) => alpha_p_exact(n, p1)? + gap(p2) / denom * a_fp,
        (false, true) => alpha_p_exact(n, p2)? + gap(p1) / denom * a_fp,
        (false, false) => (q(2, 1) - q(2, 1) * p1.recip() - q(2, 1) * p2.recip()) / denom * a_fp,
    };
    Ok(v)
}

pub fn alpha_star(n: u32, p1: Exponent, p2: Exponent) -> Result<f64> {
    alpha_star_exact(n, p1, p2).map(to_f64)
}

/// Exact one-dimensional threshold for 1 < p1, p2 < ∞.
pub fn threshold_dim1_exact(p1: Exponent, p2: Exponent) -> Result<Rational> {
    let one = Exponent::int(1);
    for p in [p1, p2] {
        if p <= one || p.is_infinite() {
            return Err(domain(format!("threshold_dim1 needs 1 < p < inf, got {p}")));
        }
    }
    let two = Exponent::int(2);
    let half = q(1, 2);
    let v = match (p1 >= two, p2 >= two) {
        (true, true) => q(0, 1),
        (false, true) => p1.recip() - half,
        (true, false) => p2.recip() - half,
        (false, false) => p1.recip() + p2.recip() - q(1, 1),
    };
    Ok(v)
}

pub fn threshold_dim1(p1: Exponent, p2: Exponent) -> Result<f64> {
    threshold_dim1_exact(p1, p2).map(to_f64)
}

/// n − 1/2: above this order the kernel is integrable.
pub fn critical_index(n: u32) -> f64 {
    n as f64 - 0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    CoveredMultiDim,
    CoveredOneDim,
    BelowCriticalUnknown,
    AboveCriticalTrivial,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::CoveredMultiDim => "covered-n>=2",
            Regime::CoveredOneDim => "covered-n=1",
            Regime::BelowCriticalUnknown => "below-critical-unknown",
            Regime::AboveCriticalTrivial => "above-critical-trivial",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [
            Regime::CoveredMultiDim,
            Regime::CoveredOneDim,
            Regime::BelowCriticalUnknown,
            Regime::AboveCriticalTrivial,
        ]
        .into_iter()
        .find(|r| r.label() == s)
    }
}

/// Which bound decided a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// Square-function threshold α*(p1, p2), n ≥ 2.
    AlphaStar,
    /// One-dimensional threshold.
    Dim1,
    /// Integrable kernel above n − 1/2.
    CriticalIndex,
}

impl Basis {
    pub fn label(self) -> &'static str {
        match self {
            Basis::AlphaStar => "alpha-star",
            Basis::Dim1 => "dim1-threshold",
            Basis::CriticalIndex => "critical-index",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub regime: Regime,
    pub threshold: f64,
    pub basis: Basis,
}

/// Classify (n, p1, p2, α) against the known boundedness results.
pub fn classify_region(n: u32, p1: Exponent, p2: Exponent, alpha: f64) -> Result<RegionVerdict> {
    check_dim(n, 1)?;
    ExponentTriple::new(p1, p2)?;
    let crit = critical_index(n);
    if alpha > crit {
        return Ok(RegionVerdict {
            regime: Regime::AboveCriticalTrivial,
            threshold: crit,
            basis: Basis::CriticalIndex,
        });
    }
    let unknown = RegionVerdict {
        regime: Regime::BelowCriticalUnknown,
        threshold: crit,
        basis: Basis::CriticalIndex,
    };
    if n >= 2 {
        let two = Exponent::int(2);
        if p1 < two || p2 < two {
            return Ok(unknown);
        }
        let thr = alpha_star(n, p1, p2)?;
        let regime = if alpha > thr {
            Regime::CoveredMultiDim
        } else {
            Regime::BelowCriticalUnknown
        };
        return Ok(RegionVerdict {
            regime,
            threshold: thr,
            basis: Basis::AlphaStar,
        });
    }
    match threshold_dim1(p1, p2) {
        Ok(thr) => {
            let regime = if alpha > thr && alpha > 0.0 {
                Regime::CoveredOneDim
            } else {
                Regime::BelowCriticalUnknown
            };
            Ok(RegionVerdict {
                regime,
                threshold: thr,
                basis: Basis::Dim1,
            })
        }
        Err(_) => Ok(unknown),
    }
}
