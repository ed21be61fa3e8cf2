//! Exact scalars (rationals and quadratic surds), intervals with tracked
//! ends, and outward-rounded dyadic balls.

mod ball;
mod exact;
mod interval;
mod parse;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use ball::{to_ball, Ball, Dyadic};
pub use exact::{ExactNumber, QuadraticSurd};
pub use interval::Interval;
pub use parse::parse_exact;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("incompatible radicands sqrt({left}) and sqrt({right})")]
    IncompatibleRadicands { left: String, right: String },
    #[error("radicand must be positive, got {0}")]
    BadRadicand(String),
    #[error("cannot parse scalar {input:?}: {detail}")]
    Parse { input: String, detail: String },
}

impl Serialize for ExactNumber {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_canonical())
    }
}

impl<'de> Deserialize<'de> for ExactNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_exact(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize)]
struct BallText {
    center: String,
    radius: String,
    approx: f64,
}

impl Serialize for Ball {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BallText {
            center: self.center().to_string(),
            radius: self.radius().to_string(),
            approx: self.to_f64(),
        }
        .serialize(s)
    }
}

/// Radicand shared by a collection of scalars.
///
/// Fails when two different quadratic fields are mixed.
pub fn common_radicand<'a, I>(values: I) -> Result<Option<num_bigint::BigInt>, NumericError>
where
    I: IntoIterator<Item = &'a ExactNumber>,
{
    let mut found: Option<&num_bigint::BigInt> = None;
    for v in values {
        if let Some(d) = v.radicand() {
            match found {
                Some(f) if f != d => {
                    return Err(NumericError::IncompatibleRadicands {
                        left: f.to_string(),
                        right: d.to_string(),
                    })
                }
                _ => found = Some(d),
            }
        }
    }
    Ok(found.cloned())
}
