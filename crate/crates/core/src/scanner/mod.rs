//! Token-level detectors for the six social-engineering attack classes.
//!
//! | class | pattern |
//! |-------|---------|
//! | A1 | value transfer to a hard-coded address known to be a non-payable contract |
//! | A2 | value transfer to a hard-coded address that is an EOA or unknown today |
//! | A3 | checksum-sensitive handling of addresses (bad checksums, string compares, case divergence) |
//! | A4 | look-alike string in a branch condition |
//! | A5 | look-alike function header in an inter-contract call |
//! | A6 | A5 where a local function was mined to match the look-alike selector |
//!
//! Detectors look at local token patterns only. There is no parse tree, so
//! files that do not compile still scan.

mod call_headers;
mod checksum;
mod lexer;
mod patterns;
mod receivers;
mod strings;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address_kind::{AddressKind, AddressKindMap, KindSource};
use crate::eth_primitives::{Address, CaseClass, Selector};
use crate::homograph::ConfusableMap;

pub use call_headers::{declared_functions, detect_a5_a6, DeclaredFunction};
pub use checksum::detect_a3;
pub use lexer::{tokenize, Span, Token, TokenKind};
pub use receivers::detect_a1_a2;
pub use strings::detect_a4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttackClass {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
}

impl AttackClass {
    pub const ALL: [AttackClass; 6] = [
        AttackClass::A1,
        AttackClass::A2,
        AttackClass::A3,
        AttackClass::A4,
        AttackClass::A5,
        AttackClass::A6,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AttackClass::A1 => "A1",
            AttackClass::A2 => "A2",
            AttackClass::A3 => "A3",
            AttackClass::A4 => "A4",
            AttackClass::A5 => "A5",
            AttackClass::A6 => "A6",
        }
    }
}

impl fmt::Display for AttackClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttackClass::ALL
            .iter()
            .copied()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown attack class `{s}` (expected A1..A6)"))
    }
}

/// high: directly exploitable; medium: needs an external condition such as a
/// later deployment; info: hygiene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Medium,
    High,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Medium => "medium",
            Severity::High => "high",
        })
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "info" => Ok(Severity::Info),
            "medium" => Ok(Severity::Medium),
            "high" => Ok(Severity::High),
            other => Err(format!("unknown severity `{other}` (expected info, medium, high)")),
        }
    }
}

/// Structured evidence. Every variant carries `literal`, the exact source
/// text at the finding's span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Evidence {
    /// A1/A2: hard-coded receiver of a value transfer.
    Receiver {
        literal: String,
        address: Address,
        /// `None` when the address is unknown to every resolver.
        address_kind: Option<AddressKind>,
        kind_source: Option<KindSource>,
        call: String,
        call_site: Span,
    },
    /// A3.
    Checksum {
        literal: String,
        checksum_class: CaseClass,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        related_literal: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        related_checksum_class: Option<CaseClass>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        related_span: Option<Span>,
    },
    /// A4 and non-ASCII hygiene notes.
    Homograph {
        literal: String,
        value: String,
        context: TextContext,
        skeleton: Option<String>,
        unmapped: Vec<String>,
        offending_positions: Vec<usize>,
    },
    /// A5/A6: a function header string used to build call data.
    CallHeader {
        literal: String,
        header: String,
        skeleton: Option<String>,
        literal_selector: Selector,
        skeleton_selector: Option<Selector>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        matched_function: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        note: Option<String>,
    },
    /// A raw 4-byte selector in call data; its header cannot be checked.
    RawSelector {
        literal: String,
        selector: Selector,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        matched_function: Option<String>,
    },
}

impl Evidence {
    pub fn literal(&self) -> &str {
        match self {
            Evidence::Receiver { literal, .. }
            | Evidence::Checksum { literal, .. }
            | Evidence::Homograph { literal, .. }
            | Evidence::CallHeader { literal, .. }
            | Evidence::RawSelector { literal, .. } => literal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextContext {
    Branch,
    String,
    Comment,
    Identifier,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub attack_class: AttackClass,
    pub severity: Severity,
    pub span: Span,
    pub message: String,
    pub evidence: Evidence,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScanError {
    #[error("source is not valid UTF-8 (first bad byte at offset {0})")]
    InvalidUtf8(usize),
    #[error("at least one attack class must be enabled")]
    NoClassesEnabled,
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub confusable_map: Arc<ConfusableMap>,
    pub address_kinds: AddressKindMap,
    enabled_classes: BTreeSet<AttackClass>,
    pub severity_floor: Severity,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            confusable_map: Arc::new(ConfusableMap::bundled().clone()),
            address_kinds: AddressKindMap::default(),
            enabled_classes: AttackClass::ALL.into_iter().collect(),
            severity_floor: Severity::Info,
        }
    }
}

impl ScanConfig {
    pub fn new(
        confusable_map: Arc<ConfusableMap>,
        address_kinds: AddressKindMap,
        enabled_classes: impl IntoIterator<Item = AttackClass>,
        severity_floor: Severity,
    ) -> Result<Self, ScanError> {
        let enabled_classes: BTreeSet<AttackClass> = enabled_classes.into_iter().collect();
        if enabled_classes.is_empty() {
            return Err(ScanError::NoClassesEnabled);
        }
        Ok(ScanConfig {
            confusable_map,
            address_kinds,
            enabled_classes,
            severity_floor,
        })
    }

    pub fn enabled_classes(&self) -> &BTreeSet<AttackClass> {
        &self.enabled_classes
    }

    pub fn set_enabled_classes(
        &mut self,
        classes: impl IntoIterator<Item = AttackClass>,
    ) -> Result<(), ScanError> {
        let classes: BTreeSet<AttackClass> = classes.into_iter().collect();
        if classes.is_empty() {
            return Err(ScanError::NoClassesEnabled);
        }
        self.enabled_classes = classes;
        Ok(())
    }

    fn wants(&self, classes: &[AttackClass]) -> bool {
        classes.iter().any(|c| self.enabled_classes.contains(c))
    }
}

pub fn scan(source: &str, config: &ScanConfig) -> Vec<Finding> {
    let tokens = tokenize(source);
    let mut findings = Vec::new();
    if config.wants(&[AttackClass::A1, AttackClass::A2]) {
        findings.extend(detect_a1_a2(&tokens, config));
    }
    if config.wants(&[AttackClass::A3]) {
        findings.extend(detect_a3(&tokens, config));
    }
    if config.wants(&[AttackClass::A4]) {
        findings.extend(detect_a4(&tokens, config));
    }
    if config.wants(&[AttackClass::A5, AttackClass::A6]) {
        findings.extend(detect_a5_a6(&tokens, config));
    }
    findings.retain(|f| {
        config.enabled_classes.contains(&f.attack_class) && f.severity >= config.severity_floor
    });
    sort_findings(&mut findings);
    findings
}

/// Like [`scan`], for raw file contents.
pub fn scan_bytes(source: &[u8], config: &ScanConfig) -> Result<Vec<Finding>, ScanError> {
    let text = std::str::from_utf8(source).map_err(|e| ScanError::InvalidUtf8(e.valid_up_to()))?;
    Ok(scan(text, config))
}

/// Orders by span, then class, then the rest of the record, and drops
/// exact duplicates.
pub fn sort_findings(findings: &mut Vec<Finding>) {
    findings.sort_by(|a, b| {
        (a.span.offset, a.span.len, a.attack_class, a.severity)
            .cmp(&(b.span.offset, b.span.len, b.attack_class, b.severity))
            .then_with(|| a.message.cmp(&b.message))
            .then_with(|| {
                let ea = serde_json::to_string(&a.evidence).unwrap_or_default();
                let eb = serde_json::to_string(&b.evidence).unwrap_or_default();
                ea.cmp(&eb)
            })
    });
    findings.dedup();
}

/// Every distinct `0x`+40-hex literal in the source, for live resolution.
pub fn address_literals(tokens: &[Token]) -> Vec<Address> {
    let mut out: Vec<Address> = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::AddressLiteral)
        .filter_map(|t| Address::parse_hex(&t.text).ok())
        .collect();
    out.sort();
    out.dedup();
    out
}
