//! Distances: exact rationals, tolerance-compared reals, and infinity.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational used for distances, weights and measures.
pub type Rational = Ratio<i128>;

/// Absolute tolerance used whenever a floating-point distance takes part in a comparison.
pub const REAL_TOLERANCE: f64 = 1e-9;

/// A distance value.
///
/// `Approx` exists only for spaces whose distances are irrational (the
/// logarithmic line). Comparisons involving an `Approx` operand treat values
/// within [`REAL_TOLERANCE`] as equal.
#[derive(Debug, Clone, Copy)]
pub enum Dist {
    Exact(Rational),
    Approx(f64),
    Infinite,
}

impl Dist {
    pub const ZERO: Dist = Dist::Exact(Ratio::new_raw(0, 1));

    pub fn int(v: i64) -> Dist {
        Dist::Exact(Rational::from_integer(v as i128))
    }

    pub fn ratio(numer: i128, denom: i128) -> Result<Dist> {
        if denom == 0 {
            return Err(Error::Input("zero denominator".into()));
        }
        Ok(Dist::Exact(Rational::new(numer, denom)))
    }

    pub fn real(v: f64) -> Dist {
        if v.is_infinite() {
            Dist::Infinite
        } else {
            Dist::Approx(v)
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, Dist::Infinite)
    }

    pub fn is_zero(&self) -> bool {
        self.compare(&Dist::ZERO) == Ordering::Equal
    }

    pub fn is_positive(&self) -> bool {
        self.compare(&Dist::ZERO) == Ordering::Greater
    }

    pub fn exact(&self) -> Option<Rational> {
        match self {
            Dist::Exact(q) => Some(*q),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Dist::Exact(q) => q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN),
            Dist::Approx(v) => *v,
            Dist::Infinite => f64::INFINITY,
        }
    }

    /// Total comparison; reals are compared with tolerance.
    pub fn compare(&self, other: &Dist) -> Ordering {
        match (self, other) {
            (Dist::Infinite, Dist::Infinite) => Ordering::Equal,
            (Dist::Infinite, _) => Ordering::Greater,
            (_, Dist::Infinite) => Ordering::Less,
            (Dist::Exact(a), Dist::Exact(b)) => a.cmp(b),
            (a, b) => {
                let (x, y) = (a.to_f64(), b.to_f64());
                if (x - y).abs() <= REAL_TOLERANCE {
                    Ordering::Equal
                } else if x < y {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn max(self, other: Dist) -> Dist {
        if self.compare(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Dist) -> Dist {
        if self.compare(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn checked_add(&self, other: &Dist) -> Result<Dist> {
        Ok(match (self, other) {
            (Dist::Infinite, _) | (_, Dist::Infinite) => Dist::Infinite,
            (Dist::Exact(a), Dist::Exact(b)) => Dist::Exact(a.checked_add(b).ok_or(Error::Overflow)?),
            (a, b) => Dist::Approx(a.to_f64() + b.to_f64()),
        })
    }

    pub fn mul_int(&self, k: u64) -> Result<Dist> {
        Ok(match self {
            Dist::Infinite => Dist::Infinite,
            Dist::Exact(a) => {
                Dist::Exact(a.checked_mul(&Rational::from_integer(k as i128)).ok_or(Error::Overflow)?)
            }
            Dist::Approx(v) => Dist::Approx(v * k as f64),
        })
    }

    /// `⌈self⌉` for finite nonnegative values.
    pub fn ceil_u64(&self) -> Option<u64> {
        match self {
            Dist::Exact(q) if !q.is_negative_ratio() => q.ceil().to_integer().to_u64(),
            Dist::Approx(v) if *v >= -REAL_TOLERANCE => Some((v - REAL_TOLERANCE).ceil().max(0.0) as u64),
            _ => None,
        }
    }

    /// `⌊self⌋` for finite nonnegative values.
    pub fn floor_u64(&self) -> Option<u64> {
        match self {
            Dist::Exact(q) if !q.is_negative_ratio() => q.floor().to_integer().to_u64(),
            Dist::Approx(v) if *v >= -REAL_TOLERANCE => Some((v + REAL_TOLERANCE).floor().max(0.0) as u64),
            _ => None,
        }
    }

    /// `⌈self / other⌉` for finite nonnegative `self` and positive `other`.
    pub fn ceil_div(&self, other: &Dist) -> Option<u64> {
        match (self, other) {
            (Dist::Exact(a), Dist::Exact(b)) if !b.is_zero() => Dist::Exact(a / b).ceil_u64(),
            (a, b) if b.is_positive() && a.is_finite() => Dist::Approx(a.to_f64() / b.to_f64()).ceil_u64(),
            _ => None,
        }
    }
}

trait SignExt {
    fn is_negative_ratio(&self) -> bool;
}

impl SignExt for Rational {
    fn is_negative_ratio(&self) -> bool {
        *self.numer() < 0
    }
}

impl PartialEq for Dist {
    fn eq(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Equal
    }
}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.compare(other))
    }
}

impl From<i64> for Dist {
    fn from(v: i64) -> Self {
        Dist::int(v)
    }
}

impl From<Rational> for Dist {
    fn from(q: Rational) -> Self {
        Dist::Exact(q)
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rational(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Decimal rendering of a rational, for CSV companion columns.
pub fn rational_to_f64(q: &Rational) -> f64 {
    Dist::Exact(*q).to_f64()
}

/// Parses `p`, `p/q`, or a finite decimal such as `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Input(format!("not a rational number: `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| bad())?;
        let q: i128 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 30 {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part: i128 = if int.is_empty() || int == "-" || int == "+" {
            0
        } else {
            int.parse::<i128>().map_err(|_| bad())?.abs()
        };
        let scale = 10i128.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let frac_part: i128 = frac.parse().map_err(|_| bad())?;
        let numer = int_part
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac_part))
            .ok_or_else(bad)?;
        let q = Rational::new(numer, scale);
        return Ok(if negative { -q } else { q });
    }
    let v: i128 = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(v))
}

impl FromStr for Dist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Dist::Infinite);
        }
        match parse_rational(t) {
            Ok(q) => Ok(Dist::Exact(q)),
            Err(e) => t.parse::<f64>().map(Dist::real).map_err(|_| e),
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Exact(q) => f.write_str(&format_rational(q)),
            Dist::Approx(v) => write!(f, "{v}"),
            Dist::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Dist {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dist::Approx(v) => serializer.serialize_f64(*v),
            other => serializer.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Dist {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct DistVisitor;

        impl Visitor<'_> for DistVisitor {
            type Value = Dist;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a rational string like \"3/2\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Dist, E> {
                Ok(Dist::int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Dist, E> {
                Ok(Dist::Exact(Rational::from_integer(v as i128)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Dist, E> {
                Ok(Dist::real(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Dist, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(DistVisitor)
    }
}

/// Serde helper for rationals as `p/q` strings.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(de::Error::custom)
    }
}
