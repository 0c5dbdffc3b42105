use std::collections::{BTreeMap, HashSet};

use super::lexer::{Token, TokenKind};
use super::patterns::Code;
use super::{AttackClass, Evidence, Finding, ScanConfig, Severity};
use crate::eth_primitives::{eip55_classify, Address, CaseClass};

/// Classification of a string literal's value when it spells an address.
fn address_string(t: &Token) -> Option<CaseClass> {
    if t.kind != TokenKind::StringLiteral {
        return None;
    }
    let c = eip55_classify(t.decoded.as_deref()?.trim());
    (c.case_class != CaseClass::Malformed).then_some(c.case_class)
}

pub fn detect_a3(tokens: &[Token], _config: &ScanConfig) -> Vec<Finding> {
    let code = Code::new(tokens);
    let mut findings = Vec::new();

    // Literals with a broken checksum.
    for t in code.toks.iter().filter(|t| t.kind == TokenKind::AddressLiteral) {
        let class = eip55_classify(&t.text).case_class;
        if class == CaseClass::InvalidChecksum {
            findings.push(Finding {
                attack_class: AttackClass::A3,
                severity: Severity::High,
                span: t.span,
                message: format!(
                    "address literal {} has an invalid EIP-55 checksum; its case does not \
                     match the address it denotes",
                    t.text
                ),
                evidence: Evidence::Checksum {
                    literal: t.text.clone(),
                    checksum_class: class,
                    related_literal: None,
                    related_checksum_class: None,
                    related_span: None,
                },
            });
        }
    }

    // Addresses compared as strings: string equality is case-sensitive,
    // address equality is not.
    let mut reported = HashSet::new();
    for op in 0..code.len() {
        if !(code.punct_at(op, "==") || code.punct_at(op, "!=")) {
            continue;
        }
        let (left, right) = code.operand_ranges(op);
        for (mine, other) in [(left.clone(), right.clone()), (right, left)] {
            for i in mine {
                let t = code.toks[i];
                let Some(class) = address_string(t) else {
                    continue;
                };
                if !reported.insert(i) {
                    continue;
                }
                let related = other.clone().map(|j| code.toks[j]).find(|o| {
                    o.kind == TokenKind::AddressLiteral || address_string(o).is_some()
                });
                let related_class = related.map(|o| match o.kind {
                    TokenKind::AddressLiteral => eip55_classify(&o.text).case_class,
                    _ => address_string(o).unwrap_or(CaseClass::Malformed),
                });
                findings.push(Finding {
                    attack_class: AttackClass::A3,
                    severity: Severity::High,
                    span: t.span,
                    message: format!(
                        "address {} is compared as a string; a differently-cased spelling of \
                         the same address compares unequal",
                        t.text
                    ),
                    evidence: Evidence::Checksum {
                        literal: t.text.clone(),
                        checksum_class: class,
                        related_literal: related.map(|o| o.text.clone()),
                        related_checksum_class: related_class,
                        related_span: related.map(|o| o.span),
                    },
                });
            }
        }
    }

    // The same address spelled with different case in one file.
    let mut first_spelling: BTreeMap<Address, &Token> = BTreeMap::new();
    let mut seen_texts = HashSet::new();
    for t in code.toks.iter().filter(|t| t.kind == TokenKind::AddressLiteral) {
        let Ok(addr) = Address::parse_hex(&t.text) else {
            continue;
        };
        let first = *first_spelling.entry(addr).or_insert(t);
        if first.text == t.text || !seen_texts.insert(t.text.clone()) {
            continue;
        }
        findings.push(Finding {
            attack_class: AttackClass::A3,
            severity: Severity::Medium,
            span: t.span,
            message: format!(
                "address {} also appears as {} (line {}); the spellings differ only in case",
                t.text, first.text, first.span.line
            ),
            evidence: Evidence::Checksum {
                literal: t.text.clone(),
                checksum_class: eip55_classify(&t.text).case_class,
                related_literal: Some(first.text.clone()),
                related_checksum_class: Some(eip55_classify(&first.text).case_class),
                related_span: Some(first.span),
            },
        });
    }
    findings
}
