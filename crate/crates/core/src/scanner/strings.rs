use std::collections::HashSet;

use super::call_headers::header_literals;
use super::lexer::{Token, TokenKind};
use super::patterns::Code;
use super::{AttackClass, Evidence, Finding, ScanConfig, Severity, TextContext};
use crate::homograph::{analyze_string, format_codepoint, HomographReport};

const CONDITION_WORDS: &[&str] = &["if", "while", "require", "assert"];

/// Indices of string literals that sit in a branch condition: inside the
/// condition of `if`/`while`, the first argument of `require`/`assert`, or
/// an operand of `==`/`!=`.
fn branch_strings(code: &Code<'_>) -> HashSet<usize> {
    let mut out = HashSet::new();
    let mark = |range: std::ops::Range<usize>, out: &mut HashSet<usize>| {
        for i in range {
            if code.toks[i].kind == TokenKind::StringLiteral {
                out.insert(i);
            }
        }
    };
    for i in 0..code.len() {
        let t = code.toks[i];
        if CONDITION_WORDS.iter().any(|w| t.is_word(w)) && code.punct_at(i + 1, "(") {
            let Some(close) = code.matching_close(i + 1) else {
                continue;
            };
            let range = if t.is_word("require") || t.is_word("assert") {
                code.split_args(i + 2..close).into_iter().next().unwrap_or(i + 2..i + 2)
            } else {
                i + 2..close
            };
            mark(range, &mut out);
        }
        if code.punct_at(i, "==") || code.punct_at(i, "!=") {
            let (l, r) = code.operand_ranges(i);
            mark(l, &mut out);
            mark(r, &mut out);
        }
    }
    out
}

fn evidence(t: &Token, value: &str, context: TextContext, report: &HomographReport) -> Evidence {
    Evidence::Homograph {
        literal: t.text.clone(),
        value: value.to_string(),
        context,
        skeleton: report.skeleton.clone(),
        unmapped: report.unmapped_non_ascii.iter().map(|&c| format_codepoint(c)).collect(),
        offending_positions: report.offending_positions.clone(),
    }
}

pub fn detect_a4(tokens: &[Token], config: &ScanConfig) -> Vec<Finding> {
    let map = &*config.confusable_map;
    let code = Code::new(tokens);
    let branch = branch_strings(&code);
    let headers: HashSet<usize> = header_literals(&code).into_iter().collect();
    let mut findings = Vec::new();

    for (i, t) in code.toks.iter().enumerate() {
        if t.kind != TokenKind::StringLiteral || headers.contains(&i) {
            continue;
        }
        let value = t.decoded.as_deref().unwrap_or_default();
        let report = analyze_string(value, map);
        if !report.has_non_ascii {
            continue;
        }
        let (severity, context, message) = if !branch.contains(&i) {
            (
                Severity::Info,
                TextContext::String,
                format!("non-ASCII string literal {} outside any branch condition", t.text),
            )
        } else if report.confusable_with_ascii {
            (
                Severity::High,
                TextContext::Branch,
                format!(
                    "branch condition compares against {}, which renders as \"{}\" but uses \
                     different codepoints; the ASCII spelling never matches",
                    t.text,
                    report.skeleton.as_deref().unwrap_or_default()
                ),
            )
        } else {
            (
                Severity::Medium,
                TextContext::Branch,
                format!(
                    "branch condition compares against {}, which contains non-ASCII codepoints \
                     with no known look-alike ({})",
                    t.text,
                    report
                        .unmapped_non_ascii
                        .iter()
                        .map(|&c| format_codepoint(c))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            )
        };
        findings.push(Finding {
            attack_class: AttackClass::A4,
            severity,
            span: t.span,
            message,
            evidence: evidence(t, value, context, &report),
        });
    }

    // Comments and identifiers cannot carry a comparison value; at most a note.
    for t in tokens {
        let context = match t.kind {
            TokenKind::Comment => TextContext::Comment,
            TokenKind::Identifier => TextContext::Identifier,
            _ => continue,
        };
        let report = analyze_string(&t.text, map);
        if !report.has_non_ascii {
            continue;
        }
        let what = if report.confusable_with_ascii {
            format!("look-alike of \"{}\"", report.skeleton.as_deref().unwrap_or_default())
        } else {
            "non-ASCII text".to_string()
        };
        let place = if context == TextContext::Comment { "comment" } else { "identifier" };
        findings.push(Finding {
            attack_class: AttackClass::A4,
            severity: Severity::Info,
            span: t.span,
            message: format!("{place} contains {what}"),
            evidence: evidence(t, &t.text, context, &report),
        });
    }
    findings
}
