//! Report types with a stable JSON shape.
//!
//! Real-valued fields serialize as JSON numbers, except that non-finite
//! values become the strings "infinite" / "nan"; the optional fields use the
//! tag strings "divergent" (argmax_T) and "none" (blowup_time_bound). All
//! shapes round-trip through these same definitions.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BlowupPredicted,
    Inconclusive,
}

/// Location of the criterion supremum: an interior maximizer, or the tag for
/// a maximum sitting on the scan-window edge with growing values (the sup is
/// then a limit, possibly infinite, rather than an attained maximum).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArgmaxT {
    At(f64),
    Divergent,
}

impl Serialize for ArgmaxT {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ArgmaxT::At(t) => ser_real(t, s),
            ArgmaxT::Divergent => s.serialize_str("divergent"),
        }
    }
}

impl<'de> Deserialize<'de> for ArgmaxT {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match NumOrTag::deserialize(d)? {
            NumOrTag::Num(t) => Ok(ArgmaxT::At(t)),
            NumOrTag::Tag(tag) => match tag.as_str() {
                "divergent" => Ok(ArgmaxT::Divergent),
                other => decode_real::<D>(other).map(ArgmaxT::At),
            },
        }
    }
}

/// Verdict of the semigroup blowup test for one initial profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    /// sup over T of T^{1/(p-1)} (e^{TΔ}u_0)(0).
    #[serde(with = "real_repr")]
    pub quantity: f64,
    #[serde(rename = "argmax_T")]
    pub argmax_t: ArgmaxT,
    /// (1/(p-1))^{1/(p-1)}.
    #[serde(with = "real_repr")]
    pub threshold: f64,
    pub verdict: Verdict,
    /// quantity − threshold.
    #[serde(with = "real_repr")]
    pub margin: f64,
    /// Least T at which the scaled semigroup quantity exceeds the threshold;
    /// the solution cannot be continued beyond that time. Absent when the
    /// verdict is inconclusive.
    #[serde(with = "opt_real_none")]
    pub blowup_time_bound: Option<f64>,
}

/// The closed-form threshold constants at one (d, p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    #[serde(rename = "N_exact", with = "real_repr")]
    pub n_exact: f64,
    #[serde(rename = "N_asymptotic", with = "real_repr")]
    pub n_asymptotic: f64,
    #[serde(rename = "M_bound", with = "real_repr")]
    pub m_bound: f64,
    #[serde(rename = "M_asymptotic", with = "real_repr")]
    pub m_asymptotic: f64,
    #[serde(rename = "morrey_norm_uC", with = "real_repr")]
    pub morrey_norm_uc: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrTag {
    Num(f64),
    Tag(String),
}

fn ser_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_nan() {
        s.serialize_str("nan")
    } else if v.is_infinite() {
        s.serialize_str("infinite")
    } else {
        s.serialize_f64(*v)
    }
}

fn decode_real<'de, D: Deserializer<'de>>(tag: &str) -> Result<f64, D::Error> {
    match tag {
        "nan" => Ok(f64::NAN),
        "infinite" => Ok(f64::INFINITY),
        other => Err(D::Error::custom(format!(
            "expected a number, \"nan\", or \"infinite\", got {other:?}"
        ))),
    }
}

/// A real field: JSON number, or "nan"/"infinite" for non-finite values.
pub mod real_repr {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        ser_real(v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match NumOrTag::deserialize(d)? {
            NumOrTag::Num(v) => Ok(v),
            NumOrTag::Tag(tag) => decode_real::<D>(&tag),
        }
    }
}

/// An optional real field whose absence is spelled "none".
pub mod opt_real_none {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => ser_real(x, s),
            None => s.serialize_str("none"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match NumOrTag::deserialize(d)? {
            NumOrTag::Num(v) => Ok(Some(v)),
            NumOrTag::Tag(tag) => match tag.as_str() {
                "none" => Ok(None),
                other => decode_real::<D>(other).map(Some),
            },
        }
    }
}
