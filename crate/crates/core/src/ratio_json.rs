//! Exact rationals cross module and process boundaries as
//! `{"num": n, "den": d}` pairs, never as floating point.

use num_rational::Rational64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct Pair {
    num: i64,
    den: i64,
}

/// `#[serde(with = "crate::ratio_json")]` on `Rational64` fields.
pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    Pair {
        num: *r.numer(),
        den: *r.denom(),
    }
    .serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
    let p = Pair::deserialize(d)?;
    if p.den == 0 {
        return Err(serde::de::Error::custom("rational with zero denominator"));
    }
    Ok(Rational64::new(p.num, p.den))
}
