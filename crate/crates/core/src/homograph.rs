//! Confusable-character analysis: find strings that render like ASCII text
//! but are built from different codepoints.
//!
//! Skeletons map each codepoint independently through the bundled table. No
//! case folding or Unicode normalization is applied, since letter case
//! carries meaning for both checksummed addresses and function selectors.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUNDLED_TABLE: &str = include_str!("../data/confusables.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate entry for U+{codepoint:04X}")]
    Duplicate { line: usize, codepoint: u32 },
    #[error("reading confusable table: {0}")]
    Io(String),
}

/// Mapping from non-ASCII codepoints to the ASCII text they imitate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusableMap {
    entries: HashMap<char, String>,
    version_tag: String,
}

impl ConfusableMap {
    /// The table compiled into the binary, parsed once per process.
    pub fn bundled() -> &'static ConfusableMap {
        static MAP: OnceLock<ConfusableMap> = OnceLock::new();
        MAP.get_or_init(|| {
            ConfusableMap::parse(BUNDLED_TABLE).expect("bundled confusable table is well-formed")
        })
    }

    pub fn load(path: &Path) -> Result<Self, TableError> {
        let text = std::fs::read_to_string(path).map_err(|e| TableError::Io(e.to_string()))?;
        ConfusableMap::parse(&text)
    }

    /// Parses `U+XXXX<TAB>prototype<TAB>comment` records. Lines starting with
    /// `#` are comments, except `#version: <tag>` which names the revision.
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut entries = HashMap::new();
        let mut version_tag = String::from("unversioned");
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let malformed = |reason: &str| TableError::Malformed {
                line,
                reason: reason.to_string(),
            };
            if let Some(tag) = raw.strip_prefix("#version:") {
                version_tag = tag.trim().to_string();
                continue;
            }
            if raw.starts_with('#') || raw.trim().is_empty() {
                continue;
            }
            let mut fields = raw.split('\t');
            let (Some(cp_field), Some(proto)) = (fields.next(), fields.next()) else {
                return Err(malformed("expected `U+XXXX<TAB>prototype<TAB>comment`"));
            };
            let hex = cp_field
                .strip_prefix("U+")
                .ok_or_else(|| malformed("codepoint must start with U+"))?;
            let cp = u32::from_str_radix(hex, 16).map_err(|_| malformed("bad codepoint"))?;
            let ch = char::from_u32(cp).ok_or_else(|| malformed("not a scalar value"))?;
            if proto.is_empty() || !proto.is_ascii() {
                return Err(malformed("prototype must be non-empty ASCII"));
            }
            if ch.is_ascii() {
                if proto.len() == 1 && proto.starts_with(ch) {
                    continue;
                }
                return Err(malformed("ASCII codepoints map to themselves"));
            }
            if entries.insert(ch, proto.to_string()).is_some() {
                return Err(TableError::Duplicate {
                    line,
                    codepoint: cp,
                });
            }
        }
        for b in 0u8..0x80 {
            entries.insert(b as char, (b as char).to_string());
        }
        Ok(ConfusableMap {
            entries,
            version_tag,
        })
    }

    pub fn version_tag(&self) -> &str {
        &self.version_tag
    }

    /// Number of mapped non-ASCII codepoints.
    pub fn len(&self) -> usize {
        self.entries.len() - 0x80
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Prototype for `c`. ASCII is always its own prototype; unmapped
    /// non-ASCII returns `None`.
    pub fn prototype(&self, c: char) -> Option<&str> {
        self.entries.get(&c).map(String::as_str)
    }

    /// Mapped non-ASCII codepoints, sorted.
    pub fn codepoints(&self) -> Vec<char> {
        let mut v: Vec<char> = self.entries.keys().copied().filter(|c| !c.is_ascii()).collect();
        v.sort_unstable();
        v
    }
}

/// Non-ASCII codepoints that the map has no prototype for.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unmapped non-ASCII codepoints: {}", format_codepoints(.0))]
pub struct UnmappedError(pub Vec<char>);

pub fn format_codepoint(c: char) -> String {
    format!("U+{:04X}", c as u32)
}

fn format_codepoints(cs: &[char]) -> String {
    cs.iter().map(|&c| format_codepoint(c)).collect::<Vec<_>>().join(", ")
}

pub fn skeleton(s: &str, map: &ConfusableMap) -> Result<String, UnmappedError> {
    let mut out = String::with_capacity(s.len());
    let mut unmapped = Vec::new();
    for c in s.chars() {
        match map.prototype(c) {
            Some(p) => out.push_str(p),
            None => {
                if !unmapped.contains(&c) {
                    unmapped.push(c);
                }
            }
        }
    }
    if unmapped.is_empty() {
        Ok(out)
    } else {
        Err(UnmappedError(unmapped))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomographReport {
    pub has_non_ascii: bool,
    #[serde(serialize_with = "ser_codepoints")]
    #[serde(deserialize_with = "de_codepoints")]
    pub unmapped_non_ascii: Vec<char>,
    pub skeleton: Option<String>,
    pub confusable_with_ascii: bool,
    /// Character (not byte) indices of every non-ASCII codepoint.
    pub offending_positions: Vec<usize>,
}

fn ser_codepoints<S: serde::Serializer>(cs: &[char], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(cs.iter().map(|&c| format_codepoint(c)))
}

fn de_codepoints<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<char>, D::Error> {
    let texts = Vec::<String>::deserialize(d)?;
    texts
        .iter()
        .map(|t| {
            t.strip_prefix("U+")
                .and_then(|h| u32::from_str_radix(h, 16).ok())
                .and_then(char::from_u32)
                .ok_or_else(|| serde::de::Error::custom(format!("bad codepoint {t}")))
        })
        .collect()
}

pub fn analyze_string(s: &str, map: &ConfusableMap) -> HomographReport {
    let offending_positions: Vec<usize> = s
        .chars()
        .enumerate()
        .filter(|(_, c)| !c.is_ascii())
        .map(|(i, _)| i)
        .collect();
    let has_non_ascii = !offending_positions.is_empty();
    let (skeleton, unmapped_non_ascii) = match skeleton(s, map) {
        Ok(sk) => (Some(sk), Vec::new()),
        Err(UnmappedError(cs)) => (None, cs),
    };
    let confusable_with_ascii = matches!(&skeleton, Some(sk) if sk != s && sk.is_ascii());
    HomographReport {
        has_non_ascii,
        unmapped_non_ascii,
        skeleton,
        confusable_with_ascii,
        offending_positions,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaderRelation {
    Identical,
    HomographTwin,
    Distinct,
}

impl fmt::Display for HeaderRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeaderRelation::Identical => "identical",
            HeaderRelation::HomographTwin => "homograph_twin",
            HeaderRelation::Distinct => "distinct",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeaderComparison {
    pub relation: HeaderRelation,
    /// Set when either side had unmapped non-ASCII, which forces `Distinct`.
    pub unmapped_warning: bool,
}

pub fn compare_headers(h1: &str, h2: &str, map: &ConfusableMap) -> HeaderComparison {
    if h1 == h2 {
        return HeaderComparison {
            relation: HeaderRelation::Identical,
            unmapped_warning: false,
        };
    }
    match (skeleton(h1, map), skeleton(h2, map)) {
        (Ok(a), Ok(b)) => HeaderComparison {
            relation: if a == b {
                HeaderRelation::HomographTwin
            } else {
                HeaderRelation::Distinct
            },
            unmapped_warning: false,
        },
        _ => HeaderComparison {
            relation: HeaderRelation::Distinct,
            unmapped_warning: true,
        },
    }
}
