//! Exact number helpers: rational parsing, formatting and JSON encodings.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;
use std::fmt;

/// Parses `"p/q"`, `"n"` or a decimal like `"1.5"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Schema(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let num = int_part.abs() * &scale + f;
        let num = if neg { -num } else { num };
        return Ok(BigRational::new(num, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Renders a rational as `"n"` or `"p/q"`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn lcm_all<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x))
}

pub fn gcd_all<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    xs.into_iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Serde adapter: a `BigInt` is written as a JSON number when it fits in `i64`,
/// otherwise as a decimal string. Both forms are accepted on input.
pub mod bigint_json {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&x.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        d.deserialize_any(BigIntVisitor)
    }

    pub(crate) struct BigIntVisitor;

    impl<'de> Visitor<'de> for BigIntVisitor {
        type Value = BigInt;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an integer or decimal string")
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BigInt, E> {
            Ok(BigInt::from(v))
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BigInt, E> {
            Ok(BigInt::from(v))
        }
        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BigInt, E> {
            v.parse().map_err(|_| E::custom(format!("bad integer {v:?}")))
        }
    }
}

/// Same as [`bigint_json`] for a vector.
pub mod bigint_vec_json {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&Wrap(x.clone()))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigInt>, D::Error> {
        let v: Vec<Wrap> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|w| w.0).collect())
    }

    #[derive(serde::Serialize, serde::Deserialize)]
    struct Wrap(#[serde(with = "super::bigint_json")] BigInt);
}

/// Same as [`bigint_json`] for a list of vectors.
pub mod bigint_mat_json {
    use super::*;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(xs: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(|r| Row(r.clone())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<BigInt>>, D::Error> {
        let v: Vec<Row> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|r| r.0).collect())
    }

    #[derive(serde::Serialize, serde::Deserialize)]
    struct Row(#[serde(with = "super::bigint_vec_json")] Vec<BigInt>);
}

/// Serde adapter writing an optional `BigInt`; `None` becomes `null`.
pub mod opt_bigint_json {
    use super::*;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(x: &Option<BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => bigint_json::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<BigInt>, D::Error> {
        let v: Option<Wrap> = Option::deserialize(d)?;
        Ok(v.map(|w| w.0))
    }

    #[derive(serde::Deserialize)]
    struct Wrap(#[serde(with = "super::bigint_json")] BigInt);
}

/// Serde adapter for rationals as `"p/q"` strings; plain numbers are accepted on input.
pub mod rational_json {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        d.deserialize_any(RatVisitor)
    }

    struct RatVisitor;

    impl<'de> Visitor<'de> for RatVisitor {
        type Value = BigRational;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational string \"p/q\" or a number")
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BigRational, E> {
            Ok(rat(v))
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BigRational, E> {
            Ok(BigRational::from_integer(BigInt::from(v)))
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<BigRational, E> {
            parse_rational(&v.to_string()).map_err(E::custom)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BigRational, E> {
            parse_rational(v).map_err(E::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-4").unwrap(), rat(-4));
        assert_eq!(parse_rational("1.25").unwrap(), BigRational::new(5.into(), 4.into()));
        assert_eq!(parse_rational("-0.5").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn formats_round_trip() {
        for s in ["7", "-3/4", "0", "12/5"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 3), 56);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(5, 0), 1);
    }
}
