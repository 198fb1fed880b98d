//! Mapping between scalar opinions, the 11-point integer scale and stance
//! phrases, plus parsers for model answers.
//!
//! Sign convention: positive values support side A of the topic (by default
//! the free market economy), negative values side B.

mod options;
mod parse;

pub use options::{options, OptionList, OptionTable};
pub use parse::{
    extract_stances, normalize, parse_polarity, parse_reaction, parse_strength, ParseMode, PolarityMode, StrengthMatch,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("opinion {0} is outside [-1, 1]")]
    OutOfRange(f64),
    #[error("scaled opinion {0} is outside [-5, 5]")]
    ScaleOutOfRange(i64),
    #[error("malformed option resource: {0}")]
    OptionResource(String),
}

/// Opinion on the integer scale `[-5, 5]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub struct ScaledOpinion(i8);

impl ScaledOpinion {
    pub const MIN: i8 = -5;
    pub const MAX: i8 = 5;

    pub fn new(value: i64) -> Result<Self, CodecError> {
        if (Self::MIN as i64..=Self::MAX as i64).contains(&value) {
            Ok(Self(value as i8))
        } else {
            Err(CodecError::ScaleOutOfRange(value))
        }
    }

    pub fn value(self) -> i8 {
        self.0
    }

    /// All eleven scale points in increasing order.
    pub fn all() -> impl Iterator<Item = Self> {
        (Self::MIN..=Self::MAX).map(Self)
    }

    /// Nearest scale point to a real value on the `[-5, 5]` scale, ties away
    /// from zero, clamped to the scale.
    pub fn round_from<T: Scalar>(v: T) -> Self {
        let r = v.round().as_f64().clamp(Self::MIN as f64, Self::MAX as f64);
        Self(r as i8)
    }
}

impl TryFrom<i8> for ScaledOpinion {
    type Error = CodecError;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        Self::new(v as i64)
    }
}

impl From<ScaledOpinion> for i8 {
    fn from(s: ScaledOpinion) -> i8 {
        s.0
    }
}

/// `round(5 x)` with ties away from zero.
pub fn to_scale<T: Scalar>(x: T) -> Result<ScaledOpinion, CodecError> {
    let one = T::one();
    if !(x >= -one && x <= one) {
        return Err(CodecError::OutOfRange(x.as_f64()));
    }
    Ok(ScaledOpinion::round_from(x * T::from_f64_lossy(5.0)))
}

/// Sign after rounding on the `[-5, 5]` scale: `|x| < 0.5` maps to 0 and
/// `±0.5` rounds away from zero, matching [`to_scale`].
pub fn round_for_polarity<T: Scalar>(x: T) -> i8 {
    let half = T::from_f64_lossy(0.5);
    if x.abs() < half {
        0
    } else if x > T::zero() {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    A,
    B,
    Neutral,
}

impl Side {
    pub fn sign(self) -> i8 {
        match self {
            Side::A => 1,
            Side::B => -1,
            Side::Neutral => 0,
        }
    }
}

/// The topic and its two opposing framings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopicFraming {
    pub side_a: String,
    pub side_b: String,
}

impl Default for TopicFraming {
    fn default() -> Self {
        Self {
            side_a: "free market economy".to_string(),
            side_b: "planned economy".to_string(),
        }
    }
}

impl TopicFraming {
    /// Framing text for a side; a neutral stance is phrased against side A.
    pub fn framing(&self, side: Side) -> &str {
        match side {
            Side::A | Side::Neutral => &self.side_a,
            Side::B => &self.side_b,
        }
    }
}

/// Strength word plus side, e.g. "moderately in favor of" + side B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StancePhrase {
    strength: u8,
    side: Side,
}

impl StancePhrase {
    pub fn strength(&self) -> u8 {
        self.strength
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn strength_word(&self) -> &'static str {
        options()
            .phrase(OptionList::Strength, self.strength as i8)
            .expect("strength in 0..=5")
    }

    pub fn signed_value(&self) -> i8 {
        self.side.sign() * self.strength as i8
    }

    pub fn is_neutral(&self) -> bool {
        self.side == Side::Neutral
    }

    /// "strength word + framing", e.g. "a bit in favor of planned economy".
    pub fn text(&self, framing: &TopicFraming) -> String {
        format!("{} {}", self.strength_word(), framing.framing(self.side))
    }
}

/// Sign picks the side, magnitude picks the strength word; 0 is "completely
/// neutral towards".
pub fn phrase_of(s: ScaledOpinion) -> StancePhrase {
    let v = s.value();
    let side = match v.signum() {
        1 => Side::A,
        -1 => Side::B,
        _ => Side::Neutral,
    };
    StancePhrase {
        strength: v.unsigned_abs(),
        side,
    }
}

/// Which branch produced a two-stage decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComposePath {
    /// Strength 0 forced the result to 0.
    Neutral,
    /// Polarity answer times strength magnitude.
    PolarityTimesStrength,
    /// The strength answer was itself an explicitly negative option.
    ExplicitNegative,
}

/// Combines a polarity answer with a strength answer into a signed value.
/// Returns `None` when a non-neutral strength comes with a neutral polarity.
pub fn compose_two_stage(polarity: i8, strength: StrengthMatch) -> Option<(ScaledOpinion, ComposePath)> {
    if strength.value == 0 {
        return Some((ScaledOpinion(0), ComposePath::Neutral));
    }
    if strength.explicit_negative {
        return Some((ScaledOpinion(strength.value), ComposePath::ExplicitNegative));
    }
    if polarity == 0 {
        return None;
    }
    Some((
        ScaledOpinion(polarity.signum() * strength.value.abs()),
        ComposePath::PolarityTimesStrength,
    ))
}
