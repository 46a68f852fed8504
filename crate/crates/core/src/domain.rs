//! Shared enumerations and the intensity algebra.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// The eight basic emotions, in canonical (alphabetical) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Anticipation,
    Disgust,
    Fear,
    Joy,
    Sadness,
    Surprise,
    Trust,
}

impl Emotion {
    pub const ALL: [Emotion; 8] = [
        Emotion::Anger,
        Emotion::Anticipation,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Joy,
        Emotion::Sadness,
        Emotion::Surprise,
        Emotion::Trust,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Anticipation => "anticipation",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
            Emotion::Trust => "trust",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown emotion `{s}`")))
    }
}

/// Four ordered intensity levels: `None < Weak < Moderate < Strong`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IntensityLevel {
    #[serde(rename = "no")]
    None,
    #[serde(rename = "weak")]
    Weak,
    #[serde(rename = "moderate")]
    Moderate,
    #[serde(rename = "strong")]
    Strong,
}

impl IntensityLevel {
    pub const ALL: [IntensityLevel; 4] = [
        IntensityLevel::None,
        IntensityLevel::Weak,
        IntensityLevel::Moderate,
        IntensityLevel::Strong,
    ];

    pub fn from_rank(rank: usize) -> Option<Self> {
        Self::ALL.get(rank).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IntensityLevel::None => "no",
            IntensityLevel::Weak => "weak",
            IntensityLevel::Moderate => "moderate",
            IntensityLevel::Strong => "strong",
        }
    }
}

impl fmt::Display for IntensityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IntensityLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IntensityLevel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown intensity token `{s}`")))
    }
}

pub fn intensity_rank(level: IntensityLevel) -> usize {
    level as usize
}

/// Collapse a four-level answer into the two-level scheme: no and weak are
/// not associated, moderate and strong are.
pub fn to_binary_bin(level: IntensityLevel) -> Bin {
    match level {
        IntensityLevel::None | IntensityLevel::Weak => Bin::NonAssociated,
        IntensityLevel::Moderate | IntensityLevel::Strong => Bin::Associated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bin {
    #[serde(rename = "0")]
    NonAssociated,
    #[serde(rename = "1")]
    Associated,
}

impl Bin {
    pub const ALL: [Bin; 2] = [Bin::NonAssociated, Bin::Associated];

    pub fn as_str(self) -> &'static str {
        match self {
            Bin::NonAssociated => "0",
            Bin::Associated => "1",
        }
    }
}

impl FromStr for Bin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(Bin::NonAssociated),
            "1" => Ok(Bin::Associated),
            _ => Err(Error::domain(format!("unknown bin token `{s}`"))),
        }
    }
}

/// Polarity axes, canonical order negative then positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarityAxis {
    Negative,
    Positive,
}

impl PolarityAxis {
    pub const ALL: [PolarityAxis; 2] = [PolarityAxis::Negative, PolarityAxis::Positive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PolarityAxis::Negative => "negative",
            PolarityAxis::Positive => "positive",
        }
    }
}

impl fmt::Display for PolarityAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One rated dimension of a HIT: an emotion or a polarity axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Facet {
    Emotion(Emotion),
    Polarity(PolarityAxis),
}

impl Facet {
    pub fn label(self) -> &'static str {
        match self {
            Facet::Emotion(e) => e.as_str(),
            Facet::Polarity(p) => p.as_str(),
        }
    }

    pub fn emotions() -> impl Iterator<Item = Facet> {
        Emotion::ALL.into_iter().map(Facet::Emotion)
    }

    pub fn polarities() -> impl Iterator<Item = Facet> {
        PolarityAxis::ALL.into_iter().map(Facet::Polarity)
    }
}

macro_rules! keyed_map {
    ($(#[$meta:meta])* $name:ident, $key:ty, $n:expr) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
        pub struct $name<T>(pub [T; $n]);

        impl<T> $name<T> {
            pub fn from_fn(mut f: impl FnMut($key) -> T) -> Self {
                let mut keys = <$key>::ALL.into_iter();
                $name(std::array::from_fn(|_| f(keys.next().expect("key count"))))
            }

            pub fn iter(&self) -> impl Iterator<Item = ($key, &T)> {
                <$key>::ALL.into_iter().zip(self.0.iter())
            }

            pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> $name<U> {
                $name(std::array::from_fn(|i| f(&self.0[i])))
            }
        }

        impl<T> Index<$key> for $name<T> {
            type Output = T;
            fn index(&self, k: $key) -> &T {
                &self.0[k.index()]
            }
        }

        impl<T> IndexMut<$key> for $name<T> {
            fn index_mut(&mut self, k: $key) -> &mut T {
                &mut self.0[k.index()]
            }
        }

        impl<T: Serialize> Serialize for $name<T> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some($n))?;
                for (k, v) in self.iter() {
                    map.serialize_entry(k.as_str(), v)?;
                }
                map.end()
            }
        }

        impl<'de, T: Deserialize<'de>> Deserialize<'de> for $name<T> {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let mut raw: BTreeMap<$key, T> = BTreeMap::deserialize(d)?;
                let mut out = Vec::with_capacity($n);
                for k in <$key>::ALL {
                    out.push(raw.remove(&k).ok_or_else(|| {
                        D::Error::custom(format!("missing key `{}`", k.as_str()))
                    })?);
                }
                let arr: [T; $n] = out
                    .try_into()
                    .map_err(|_| D::Error::custom("wrong key count"))?;
                Ok($name(arr))
            }
        }
    };
}

keyed_map!(
    /// A value per emotion, indexed in canonical order.
    EmotionMap,
    Emotion,
    8
);
keyed_map!(
    /// A value per polarity axis.
    AxisMap,
    PolarityAxis,
    2
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Unknown,
}

impl Pos {
    pub const ALL: [Pos; 5] = [Pos::Noun, Pos::Verb, Pos::Adjective, Pos::Adverb, Pos::Unknown];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adjective => "adjective",
            Pos::Adverb => "adverb",
            Pos::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pos::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown part of speech `{s}`")))
    }
}

/// Which target-term subset a term was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SourceTag {
    #[serde(rename = "EmoLex-Uni")]
    Unigram,
    #[serde(rename = "EmoLex-Bi")]
    Bigram,
    #[serde(rename = "EmoLex-GI")]
    GeneralInquirer,
    #[serde(rename = "EmoLex-WAL")]
    WordNetAffect,
}

impl SourceTag {
    pub const ALL: [SourceTag; 4] = [
        SourceTag::Unigram,
        SourceTag::Bigram,
        SourceTag::GeneralInquirer,
        SourceTag::WordNetAffect,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceTag::Unigram => "EmoLex-Uni",
            SourceTag::Bigram => "EmoLex-Bi",
            SourceTag::GeneralInquirer => "EmoLex-GI",
            SourceTag::WordNetAffect => "EmoLex-WAL",
        }
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SourceTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown source tag `{s}`")))
    }
}

/// Question wording: "associated with" or "evokes".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Framing {
    Associated,
    Evokes,
}

impl Framing {
    pub fn as_str(self) -> &'static str {
        match self {
            Framing::Associated => "associated",
            Framing::Evokes => "evokes",
        }
    }
}

impl fmt::Display for Framing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Framing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "associated" => Ok(Framing::Associated),
            "evokes" => Ok(Framing::Evokes),
            _ => Err(Error::domain(format!("unknown framing `{s}`"))),
        }
    }
}

/// A term-sense pair: the term plus the thesaurus category acting as its sense.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SenseKey {
    pub term: String,
    pub category_id: String,
}

impl SenseKey {
    pub fn new(term: impl Into<String>, category_id: impl Into<String>) -> Self {
        SenseKey {
            term: term.into(),
            category_id: category_id.into(),
        }
    }
}

impl fmt::Display for SenseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.term, self.category_id)
    }
}
