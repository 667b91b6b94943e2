//! Serde adapters: rationals as `{"num": "...", "den": "..."}` and big
//! integers as decimal strings, so arbitrary precision survives JSON.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub num: String,
    pub den: String,
}

impl From<&BigRational> for RationalRepr {
    fn from(r: &BigRational) -> Self {
        Self {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

impl TryFrom<RationalRepr> for BigRational {
    type Error = String;

    fn try_from(r: RationalRepr) -> Result<Self, String> {
        let num: BigInt = r.num.parse().map_err(|e| format!("bad numerator {:?}: {e}", r.num))?;
        let den: BigInt = r.den.parse().map_err(|e| format!("bad denominator {:?}: {e}", r.den))?;
        if den == BigInt::from(0) {
            return Err("zero denominator".into());
        }
        Ok(BigRational::new(num, den))
    }
}

pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        RationalRepr::from(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        BigRational::try_from(RationalRepr::deserialize(d)?).map_err(D::Error::custom)
    }
}

pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(RationalRepr::from))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<RationalRepr>::deserialize(d)?
            .into_iter()
            .map(|r| BigRational::try_from(r).map_err(D::Error::custom))
            .collect()
    }
}

pub mod rational_opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        r.as_ref().map(RationalRepr::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        Option::<RationalRepr>::deserialize(d)?
            .map(|r| BigRational::try_from(r).map_err(D::Error::custom))
            .transpose()
    }
}

pub mod biguint_str {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}
