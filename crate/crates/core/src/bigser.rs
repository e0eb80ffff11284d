//! Serde adapters that write big numbers as decimal strings.
//!
//! The derived serde impls of `num-bigint` emit limb arrays, which are
//! unreadable in reports and caches.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::{de::Error, Deserialize, Deserializer, Serializer};
use std::str::FromStr;

pub mod nat {
    use super::*;
    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::from_str(&s).map_err(D::Error::custom)
    }
}

pub mod int {
    use super::*;
    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(&s).map_err(D::Error::custom)
    }
}

pub mod rational {
    use super::*;
    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}

pub mod opt_rational {
    use super::*;
    pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_rational(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}"))))
            .transpose()
    }
}

pub mod opt_nat {
    use super::*;
    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.serialize_some(&n.to_string()),
            None => s.serialize_none(),
        }
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| BigUint::from_str(&s).map_err(D::Error::custom)).transpose()
    }
}

/// Any collection of big naturals as a list of decimal strings.
pub mod nat_seq {
    use super::*;
    pub fn serialize<'a, C, S>(v: &'a C, s: S) -> Result<S::Ok, S::Error>
    where
        &'a C: IntoIterator<Item = &'a BigUint>,
        S: Serializer,
    {
        s.collect_seq(v.into_iter().map(|n| n.to_string()))
    }
    pub fn deserialize<'de, C, D>(d: D) -> Result<C, D::Error>
    where
        C: FromIterator<BigUint>,
        D: Deserializer<'de>,
    {
        Vec::<String>::deserialize(d)?
            .into_iter()
            .map(|s| BigUint::from_str(&s).map_err(D::Error::custom))
            .collect()
    }
}

/// Prime-exponent lists as `[["p", e], ...]`.
pub mod factor_list {
    use super::*;
    use serde::ser::SerializeSeq;
    pub fn serialize<S: Serializer>(v: &[(BigUint, u32)], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for (p, e) in v {
            seq.serialize_element(&(p.to_string(), *e))?;
        }
        seq.end()
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(BigUint, u32)>, D::Error> {
        let raw = Vec::<(String, u32)>::deserialize(d)?;
        raw.into_iter()
            .map(|(p, e)| Ok((BigUint::from_str(&p).map_err(D::Error::custom)?, e)))
            .collect()
    }
}

/// Maps keyed by big naturals as JSON objects with decimal keys.
pub mod nat_map {
    use super::*;
    use serde::ser::SerializeMap;
    use std::collections::BTreeMap;
    pub fn serialize<S: Serializer, V: serde::Serialize>(
        v: &BTreeMap<BigUint, V>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(v.len()))?;
        for (k, x) in v {
            m.serialize_entry(&k.to_string(), x)?;
        }
        m.end()
    }
    pub fn deserialize<'de, D: Deserializer<'de>, V: Deserialize<'de>>(
        d: D,
    ) -> Result<BTreeMap<BigUint, V>, D::Error> {
        let raw = BTreeMap::<String, V>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, x)| Ok((BigUint::from_str(&k).map_err(D::Error::custom)?, x)))
            .collect()
    }
}

/// Parses `a`, `-a`, `a/b` or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
        let mut n = BigInt::from_str(&digits).ok()?;
        if neg {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), fp.len());
        return Some(BigRational::new(n, d));
    }
    BigInt::from_str(s).ok().map(BigRational::from_integer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("129/100").unwrap().to_string(), "129/100");
        assert_eq!(parse_rational("0.25").unwrap().to_string(), "1/4");
        assert_eq!(parse_rational("-1.5").unwrap().to_string(), "-3/2");
        assert_eq!(parse_rational("7").unwrap().to_string(), "7");
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }
}
