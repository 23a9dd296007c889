//! Extended reals.
//!
//! Generators may take the value `-inf` at zero (`log 0 = -inf`), and the
//! three-term divergence combination may then be `+inf` or even undefined.
//! Infinities are therefore carried as explicit variants; the `f64` payload of
//! [`ExtReal::Finite`] is always finite.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A value in `[-inf, +inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

/// Result of combining extended reals: either a value or `(+inf) + (-inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Combined {
    Defined(ExtReal),
    Indeterminate,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Converts a float, mapping IEEE infinities onto the explicit variants.
    /// Returns `None` for NaN.
    pub fn from_f64(v: f64) -> Option<ExtReal> {
        if v.is_nan() {
            None
        } else if v == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else if v == f64::NEG_INFINITY {
            Some(ExtReal::NegInf)
        } else {
            Some(ExtReal::Finite(v))
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Lossy conversion for display and ordering-only contexts.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Multiplies by a finite coefficient. `0 * inf` is indeterminate.
    pub fn scale(self, c: f64) -> Combined {
        debug_assert!(c.is_finite());
        match self {
            ExtReal::Finite(v) => Combined::Defined(ExtReal::Finite(v * c)),
            _ if c == 0.0 => Combined::Indeterminate,
            ExtReal::PosInf if c > 0.0 => Combined::Defined(ExtReal::PosInf),
            ExtReal::PosInf => Combined::Defined(ExtReal::NegInf),
            ExtReal::NegInf if c > 0.0 => Combined::Defined(ExtReal::NegInf),
            ExtReal::NegInf => Combined::Defined(ExtReal::PosInf),
        }
    }

    pub fn checked_add(self, other: ExtReal) -> Combined {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                Combined::Defined(ExtReal::from_f64(a + b).expect("finite sum is not NaN"))
            }
            (ExtReal::PosInf, ExtReal::NegInf) | (ExtReal::NegInf, ExtReal::PosInf) => {
                Combined::Indeterminate
            }
            (ExtReal::Finite(_), inf) | (inf, _) => Combined::Defined(inf),
        }
    }

    pub fn checked_sub(self, other: ExtReal) -> Combined {
        other.scale(-1.0).and_then(|neg| self.checked_add(neg))
    }
}

/// `sum_i coef_i * term_i` evaluated left to right. When every term is finite
/// the float arithmetic is exactly `((c0*t0) + (c1*t1)) + ...`.
pub fn linear_combination(parts: &[(f64, ExtReal)]) -> Combined {
    let mut acc = Combined::Defined(ExtReal::ZERO);
    for &(c, t) in parts {
        acc = acc.and_then(|a| t.scale(c).and_then(|s| a.checked_add(s)));
    }
    acc
}

impl Combined {
    pub fn and_then(self, f: impl FnOnce(ExtReal) -> Combined) -> Combined {
        match self {
            Combined::Defined(v) => f(v),
            Combined::Indeterminate => Combined::Indeterminate,
        }
    }

    pub fn value(self) -> Option<ExtReal> {
        match self {
            Combined::Defined(v) => Some(v),
            Combined::Indeterminate => None,
        }
    }

    pub fn finite(self) -> Option<f64> {
        self.value().and_then(ExtReal::finite)
    }

    pub fn is_indeterminate(self) -> bool {
        matches!(self, Combined::Indeterminate)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Some(Ordering::Equal),
            (NegInf, _) | (_, PosInf) => Some(Ordering::Less),
            (_, NegInf) | (PosInf, _) => Some(Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl From<f64> for ExtReal {
    /// Panics on NaN; use [`ExtReal::from_f64`] for untrusted input.
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v).expect("NaN is not an extended real")
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Display for Combined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Combined::Defined(v) => v.fmt(f),
            Combined::Indeterminate => f.write_str("indeterminate"),
        }
    }
}

// JSON has no infinities: finite values are numbers, the others are strings.

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_str("inf"),
            ExtReal::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl Serialize for Combined {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Combined::Defined(v) => v.serialize(s),
            Combined::Indeterminate => s.serialize_str("indeterminate"),
        }
    }
}

struct ExtVisitor;

impl Visitor<'_> for ExtVisitor {
    type Value = Combined;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a finite number, \"inf\", \"-inf\" or \"indeterminate\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Combined, E> {
        ExtReal::from_f64(v)
            .map(Combined::Defined)
            .ok_or_else(|| E::custom("NaN"))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Combined, E> {
        Ok(Combined::Defined(ExtReal::Finite(v as f64)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Combined, E> {
        Ok(Combined::Defined(ExtReal::Finite(v as f64)))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Combined, E> {
        match v {
            "inf" | "+inf" => Ok(Combined::Defined(ExtReal::PosInf)),
            "-inf" => Ok(Combined::Defined(ExtReal::NegInf)),
            "indeterminate" => Ok(Combined::Indeterminate),
            other => other
                .parse::<f64>()
                .ok()
                .and_then(ExtReal::from_f64)
                .map(Combined::Defined)
                .ok_or_else(|| E::custom(format!("not an extended real: {other}"))),
        }
    }
}

impl<'de> Deserialize<'de> for Combined {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(ExtVisitor)
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match d.deserialize_any(ExtVisitor)? {
            Combined::Defined(v) => Ok(v),
            Combined::Indeterminate => Err(de::Error::custom("indeterminate is not an extended real")),
        }
    }
}

impl std::str::FromStr for ExtReal {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(ExtReal::PosInf),
            "-inf" | "-infinity" => Ok(ExtReal::NegInf),
            t => t
                .parse::<f64>()
                .ok()
                .and_then(ExtReal::from_f64)
                .ok_or_else(|| crate::Error::Parse(format!("not an extended real: {s}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinities_cancel_to_indeterminate() {
        assert!(ExtReal::PosInf.checked_add(ExtReal::NegInf).is_indeterminate());
        assert_eq!(
            ExtReal::NegInf.scale(-2.0),
            Combined::Defined(ExtReal::PosInf)
        );
        assert!(ExtReal::PosInf.scale(0.0).is_indeterminate());
    }

    #[test]
    fn combination_matches_float_order() {
        let (a, b, c) = (0.1, 0.7, 0.3);
        let got = linear_combination(&[(1.0, a.into()), (-2.0, b.into()), (0.5, c.into())]);
        assert_eq!(got.finite().unwrap().to_bits(), (1.0 * a + -2.0 * b + 0.5 * c).to_bits());
    }

    #[test]
    fn ordering_places_infinities_at_ends() {
        assert!(ExtReal::NegInf < ExtReal::Finite(-1e300));
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInf);
    }

    #[test]
    fn json_round_trip() {
        for v in [
            Combined::Defined(ExtReal::Finite(1.5)),
            Combined::Defined(ExtReal::PosInf),
            Combined::Defined(ExtReal::NegInf),
            Combined::Indeterminate,
        ] {
            let s = serde_json::to_string(&v).unwrap();
            let back: Combined = serde_json::from_str(&s).unwrap();
            assert_eq!(back, v);
        }
    }
}
