//! Exact rationals and their JSON form `{"num":…,"den":…,"decimal":…}`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

pub type Rational = num_rational::BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `base^exp` for a possibly negative exponent.
pub fn pow_int(base: u32, exp: i64) -> Rational {
    let b = BigInt::from(base).pow(exp.unsigned_abs() as u32);
    if exp >= 0 {
        Rational::from_integer(b)
    } else {
        Rational::new(BigInt::one(), b)
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // scale down huge operands before dividing
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

fn big_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

pub fn to_json(r: &Rational) -> Value {
    json!({"num": big_json(r.numer()), "den": big_json(r.denom()), "decimal": to_f64(r)})
}

fn big_from_json(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

pub fn from_json(v: &Value) -> Option<Rational> {
    let n = big_from_json(v.get("num")?)?;
    let d = big_from_json(v.get("den")?)?;
    (!d.is_zero()).then(|| Rational::new(n, d))
}

/// `#[serde(with = "crate::rational::serde_rational")]` support.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        to_json(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let v = Value::deserialize(d)?;
        from_json(&v).ok_or_else(|| D::Error::custom("expected {num, den}"))
    }
}

pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(r: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        Value::Array(r.iter().map(to_json).collect()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<Value>::deserialize(d)?;
        v.iter()
            .map(|x| from_json(x).ok_or_else(|| D::Error::custom("expected {num, den}")))
            .collect()
    }
}

pub mod serde_rational_opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        r.as_ref().map(to_json).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        match Option::<Value>::deserialize(d)? {
            None => Ok(None),
            Some(v) => from_json(&v).map(Some).ok_or_else(|| D::Error::custom("expected {num, den}")),
        }
    }
}

pub mod serde_bigint_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        Value::Array(v.iter().map(big_json).collect()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<Value>::deserialize(d)?;
        v.iter()
            .map(|x| big_from_json(x).ok_or_else(|| D::Error::custom("expected an integer")))
            .collect()
    }
}
