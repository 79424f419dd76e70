//! Exact rational helpers. Values are `num_rational::BigRational`, which is
//! always kept reduced with a positive denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p"` or `"p/q"`; the result is reduced.
pub fn parse(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| format!("{s:?} is not a rational number"))?;
    let q: BigInt = q.parse().map_err(|_| format!("{s:?} is not a rational number"))?;
    if q.is_zero() {
        return Err(format!("{s:?} has zero denominator"));
    }
    Ok(Rational::new(p, q))
}

/// `"p"` for integers, `"p/q"` otherwise.
pub fn format(r: &Rational) -> String {
    r.to_string()
}

/// Smallest positive multiple of `v` with integer, coprime entries. The zero
/// vector maps to zeros.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = v.iter().map(|r| (r * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &gcd).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_integral(r: &Rational) -> bool {
    r.is_integer()
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Serde adapter for a single rational stored as a string. Plain JSON
/// integers are accepted on input.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum Raw {
        Text(String),
        Int(i64),
    }

    impl Raw {
        pub(crate) fn into_rational(self) -> Result<Rational, String> {
            match self {
                Raw::Text(s) => parse(&s),
                Raw::Int(i) => Ok(int(i)),
            }
        }
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        Raw::deserialize(d)?.into_rational().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `BTreeMap<K, Rational>` with string keys.
pub mod serde_rational_map {
    use super::serde_rational::Raw;
    use super::*;
    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::collections::BTreeMap;
    use std::fmt::Display;
    use std::str::FromStr;

    pub fn serialize<K: Display, S: Serializer>(m: &BTreeMap<K, Rational>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(&k.to_string(), &v.to_string())?;
        }
        map.end()
    }

    pub fn deserialize<'de, K, D>(d: D) -> Result<BTreeMap<K, Rational>, D::Error>
    where
        K: FromStr + Ord,
        K::Err: Display,
        D: Deserializer<'de>,
    {
        let raw = BTreeMap::<String, Raw>::deserialize(d)?;
        let mut out = BTreeMap::new();
        for (k, v) in raw {
            let key = k.parse::<K>().map_err(serde::de::Error::custom)?;
            let val = v.into_rational().map_err(serde::de::Error::custom)?;
            out.insert(key, val);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse("4/6").unwrap(), frac(2, 3));
        assert_eq!(format(&parse("4/6").unwrap()), "2/3");
        assert_eq!(format(&parse("-10/5").unwrap()), "-2");
        assert_eq!(parse(" 7 ").unwrap(), int(7));
        assert_eq!(format(&frac(3, -9)), "-1/3");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
        assert!(parse("1.5").is_err());
    }

    #[test]
    fn primitive_scaling() {
        let v = vec![frac(1, 2), frac(-1, 3), int(0)];
        let got = primitive_integer_vector(&v);
        assert_eq!(got, vec![BigInt::from(3), BigInt::from(-2), BigInt::from(0)]);
        let v = vec![int(4), int(-6)];
        assert_eq!(primitive_integer_vector(&v), vec![BigInt::from(2), BigInt::from(-3)]);
        assert_eq!(primitive_integer_vector(&[int(0)]), vec![BigInt::from(0)]);
    }
}
