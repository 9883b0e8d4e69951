//! Domain types shared by every layer: label names and values, items,
//! sources and tiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::canonical::{canonicalize_url, UrlError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("label name is empty")]
    EmptyLabel,
    #[error("label name contains a tab or line break")]
    LabelControlChar,
    #[error("bad value literal {0:?} (expected \"1\" or \"-1\")")]
    BadValue(String),
    #[error("source id is empty")]
    EmptySource,
    #[error("source id contains a control character")]
    SourceControlChar,
    #[error(transparent)]
    Url(#[from] UrlError),
}

/// An uninterpreted label string such as `hascookiebanner`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelName(String);

impl LabelName {
    pub fn new(name: impl Into<String>) -> Result<Self, LabelError> {
        let name = name.into();
        if name.is_empty() {
            return Err(LabelError::EmptyLabel);
        }
        if name.bytes().any(|b| matches!(b, b'\t' | b'\n' | b'\r')) {
            return Err(LabelError::LabelControlChar);
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LabelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LabelName {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

/// Whether a label applies (+1) or does not apply (-1) to an item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelValue {
    Applies,
    DoesNotApply,
}

impl LabelValue {
    pub const fn as_i8(self) -> i8 {
        match self {
            LabelValue::Applies => 1,
            LabelValue::DoesNotApply => -1,
        }
    }

    pub const fn as_f64(self) -> f64 {
        match self {
            LabelValue::Applies => 1.0,
            LabelValue::DoesNotApply => -1.0,
        }
    }

    /// The file-format literal, `"1"` or `"-1"`.
    pub const fn literal(self) -> &'static str {
        match self {
            LabelValue::Applies => "1",
            LabelValue::DoesNotApply => "-1",
        }
    }

    /// Parses exactly `"1"` or `"-1"`; nothing else is a label value.
    pub fn from_literal(s: &str) -> Result<Self, LabelError> {
        match s {
            "1" => Ok(LabelValue::Applies),
            "-1" => Ok(LabelValue::DoesNotApply),
            other => Err(LabelError::BadValue(other.to_owned())),
        }
    }
}

impl TryFrom<i64> for LabelValue {
    type Error = LabelError;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(LabelValue::Applies),
            -1 => Ok(LabelValue::DoesNotApply),
            other => Err(LabelError::BadValue(other.to_string())),
        }
    }
}

impl Serialize for LabelValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for LabelValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        LabelValue::try_from(v).map_err(serde::de::Error::custom)
    }
}

/// A canonical absolute URL identifying a labeled resource.
///
/// Only obtainable through [`canonicalize_url`], so two `ItemId`s compare
/// equal exactly when their canonical strings do.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(String);

impl ItemId {
    pub fn parse(raw: &str) -> Result<Self, UrlError> {
        canonicalize_url(raw)
    }

    pub(crate) fn from_canonical(s: String) -> Self {
        Self(s)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ItemId {
    type Err = UrlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        canonicalize_url(s)
    }
}

/// Identity of a label source: a configured name or the source URL.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceId(String);

impl SourceId {
    pub fn new(id: impl Into<String>) -> Result<Self, LabelError> {
        let id = id.into();
        if id.is_empty() {
            return Err(LabelError::EmptySource);
        }
        if id.chars().any(char::is_control) {
            return Err(LabelError::SourceControlChar);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for SourceId {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

/// Rank of a source. 0 is the highest tier (the user); larger numbers are
/// more subordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tier(pub u32);

impl Tier {
    pub const TOP: Tier = Tier(0);

    pub const fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One assertion from a label file: `label` has `value` for `item`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelRecord {
    pub label: LabelName,
    pub value: LabelValue,
    pub item: ItemId,
}

impl LabelRecord {
    pub fn new(label: LabelName, value: LabelValue, item: ItemId) -> Self {
        Self { label, value, item }
    }
}

macro_rules! string_serde {
    ($ty:ty, $ctor:path) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                $ctor(&raw).map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(LabelName, LabelName::from_str);
string_serde!(ItemId, canonicalize_url);
string_serde!(SourceId, SourceId::from_str);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_names_reject_separators() {
        assert!(LabelName::new("haspopup").is_ok());
        assert_eq!(LabelName::new(""), Err(LabelError::EmptyLabel));
        for bad in ["a\tb", "a\nb", "a\rb"] {
            assert_eq!(LabelName::new(bad), Err(LabelError::LabelControlChar));
        }
    }

    #[test]
    fn value_literals_are_closed() {
        assert_eq!(LabelValue::from_literal("1"), Ok(LabelValue::Applies));
        assert_eq!(LabelValue::from_literal("-1"), Ok(LabelValue::DoesNotApply));
        for bad in ["+1", "2", "0", "1.0", " 1", "", "-"] {
            assert!(LabelValue::from_literal(bad).is_err(), "{bad:?}");
        }
        assert!(LabelValue::try_from(0).is_err());
    }

    #[test]
    fn serde_uses_wire_forms() {
        let v: LabelValue = serde_json::from_str("-1").unwrap();
        assert_eq!(v, LabelValue::DoesNotApply);
        assert!(serde_json::from_str::<LabelValue>("2").is_err());
        let item: ItemId = serde_json::from_str("\"HTTP://A.example/x#y\"").unwrap();
        assert_eq!(serde_json::to_string(&item).unwrap(), "\"http://a.example/x\"");
    }
}
