//! Exact rational arithmetic helpers shared by every module.
//!
//! All concrete numbers flowing through the library are rationals: JSON
//! decimals parse exactly, and `f64` intermediates convert to dyadic
//! rationals without loss. Floating point only appears where a quantity is
//! genuinely transcendental (normal quantiles, fractional-order norms,
//! eigenvalues), and those comparisons go through [`Tolerance`].

use std::cmp::Ordering;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Arbitrary-precision rational number.
pub type Rational = num_rational::BigRational;

/// Shorthand for a small rational n/d.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for an integer rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Lossy conversion to `f64` (rounds to nearest).
pub fn rat_to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or_else(|| {
        // Out-of-range magnitudes saturate.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact conversion from a finite `f64` to its dyadic rational value.
pub fn rat_from_f64(x: f64) -> Result<Rational, Error> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(Rational::from_float(x).expect("finite float converts exactly"))
}

/// Parses a decimal literal (optionally signed, with fraction and exponent)
/// into the exact rational it denotes. Accepts `"1.25e-3"`, `"-7"`, `"0.1"`.
pub fn parse_decimal(s: &str) -> Result<Rational, Error> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::BadNumber(s.to_string()));
    }
    // Fraction form "p/q" is accepted for convenience in certificate files.
    if let Some((num, den)) = t.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| Error::BadNumber(s.to_string()))?;
        let d = BigInt::from_str(den.trim()).map_err(|_| Error::BadNumber(s.to_string()))?;
        if d.is_zero() {
            return Err(Error::BadNumber(s.to_string()));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e.parse().map_err(|_| Error::BadNumber(s.to_string()))?;
            (m, exp)
        }
        None => (t, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(Error::BadNumber(s.to_string()));
    }
    let numer = BigInt::from_str(&digits).map_err(|_| Error::BadNumber(s.to_string()))?;
    let scale = frac_part.len() as i64;
    let net_exp = exp - scale;
    let ten = BigInt::from(10);
    if net_exp >= 0 {
        Ok(Rational::from_integer(numer * ten.pow(net_exp as u32)))
    } else {
        Ok(Rational::new(numer, ten.pow((-net_exp) as u32)))
    }
}

/// Tolerance policy for floating-point comparisons. Exact (rational)
/// comparisons never consult it.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance(pub f64);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(1e-9)
    }
}

impl Tolerance {
    pub fn approx_eq(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.0
    }

    /// `a <= b` up to the tolerance.
    pub fn leq(&self, a: f64, b: f64) -> bool {
        a <= b + self.0
    }
}

/// Scalar type usable as a matrix entry in the arrangement solvers: `f64`
/// for the heuristic/riskbounds path and [`Rational`] for exact certificates.
pub trait Entry: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div_count(&self, n: usize) -> Self;
    /// Total order (f64 uses `total_cmp`; inputs are validated finite).
    fn order(&self, other: &Self) -> Ordering;
    fn to_f64(&self) -> f64;
    fn is_finite_entry(&self) -> bool;
    /// Equality test: exact for rationals, within `tol` for floats.
    fn matches(&self, other: &Self, tol: Tolerance) -> bool;
    fn neg(&self) -> Self;
    /// The exact rational value, when the entry carries one.
    fn to_exact(&self) -> Option<Rational>;
}

impl Entry for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div_count(&self, n: usize) -> Self {
        self / n as f64
    }
    fn order(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_finite_entry(&self) -> bool {
        self.is_finite()
    }
    fn matches(&self, other: &Self, tol: Tolerance) -> bool {
        tol.approx_eq(*self, *other)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn to_exact(&self) -> Option<Rational> {
        None
    }
}

impl Entry for Rational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div_count(&self, n: usize) -> Self {
        self / Rational::from_integer(BigInt::from(n))
    }
    fn order(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }
    fn is_finite_entry(&self) -> bool {
        true
    }
    fn matches(&self, other: &Self, _tol: Tolerance) -> bool {
        self == other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn to_exact(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

/// JSON form of a rational: `{"num": .., "den": ..}` with integer values
/// emitted as JSON numbers when they fit in `i64` and as decimal strings
/// otherwise. Deserialization additionally accepts bare integers, decimal
/// numbers, and `"p/q"` strings.
pub mod ratjson {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    fn bigint_to_json(i: &BigInt) -> serde_json::Value {
        match i.to_i64() {
            Some(v) => serde_json::Value::from(v),
            None => serde_json::Value::from(i.to_string()),
        }
    }

    pub fn to_value(r: &Rational) -> serde_json::Value {
        serde_json::json!({
            "num": bigint_to_json(r.numer()),
            "den": bigint_to_json(r.denom()),
        })
    }

    fn bigint_from_json(v: &serde_json::Value) -> Result<BigInt, Error> {
        match v {
            serde_json::Value::Number(n) => BigInt::from_str(&n.to_string())
                .map_err(|_| Error::BadNumber(n.to_string())),
            serde_json::Value::String(s) => {
                BigInt::from_str(s).map_err(|_| Error::BadNumber(s.clone()))
            }
            other => Err(Error::BadNumber(other.to_string())),
        }
    }

    pub fn from_value(v: &serde_json::Value) -> Result<Rational, Error> {
        match v {
            serde_json::Value::Number(n) => parse_decimal(&n.to_string()),
            serde_json::Value::String(s) => parse_decimal(s),
            serde_json::Value::Object(map) => {
                let num = map.get("num").ok_or_else(|| Error::BadNumber("missing num".into()))?;
                let den = map.get("den").ok_or_else(|| Error::BadNumber("missing den".into()))?;
                let d = bigint_from_json(den)?;
                if d.is_zero() {
                    return Err(Error::BadNumber("zero denominator".into()));
                }
                Ok(Rational::new(bigint_from_json(num)?, d))
            }
            other => Err(Error::BadNumber(other.to_string())),
        }
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        to_value(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        from_value(&v).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        pub fn serialize<S: Serializer>(rs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            rs.iter().map(to_value).collect::<Vec<_>>().serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let vs = Vec::<serde_json::Value>::deserialize(d)?;
            vs.iter().map(|v| from_value(v).map_err(D::Error::custom)).collect()
        }
    }

    pub mod opt {
        use super::*;
        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            r.as_ref().map(to_value).serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            let v = Option::<serde_json::Value>::deserialize(d)?;
            v.map(|v| from_value(&v).map_err(D::Error::custom)).transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_decimals() {
        assert_eq!(parse_decimal("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_decimal("-1.25e-3").unwrap(), rat(-125, 100_000));
        assert_eq!(parse_decimal("3").unwrap(), rat_int(3));
        assert_eq!(parse_decimal("2/6").unwrap(), rat(1, 3));
        assert_eq!(parse_decimal("1e3").unwrap(), rat_int(1000));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_decimal("").is_err());
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("1/0").is_err());
        assert!(rat_from_f64(f64::NAN).is_err());
    }

    #[test]
    fn dyadic_roundtrip() {
        let r = rat_from_f64(0.1).unwrap();
        assert_eq!(rat_to_f64(&r), 0.1);
        assert_ne!(r, rat(1, 10)); // 0.1 is not exactly 1/10 in binary
    }

    #[test]
    fn ratjson_roundtrip() {
        let r = rat(-22, 7);
        let v = ratjson::to_value(&r);
        assert_eq!(ratjson::from_value(&v).unwrap(), r);
        // alternative input forms
        assert_eq!(ratjson::from_value(&serde_json::json!(0.5)).unwrap(), rat(1, 2));
        assert_eq!(ratjson::from_value(&serde_json::json!("3/4")).unwrap(), rat(3, 4));
    }
}
