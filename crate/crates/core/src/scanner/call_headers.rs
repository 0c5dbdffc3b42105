//! Function-header strings used to build inter-contract call data, and the
//! functions declared in the same file.

use std::collections::HashSet;

use super::lexer::{Token, TokenKind};
use super::patterns::Code;
use super::{AttackClass, Evidence, Finding, ScanConfig, Severity};
use crate::eth_primitives::{canonical_type, FunctionHeader, Selector, MAX_ARGS};
use crate::homograph::{analyze_string, format_codepoint};

/// Word/punctuation sequence that must precede the header literal, written
/// innermost first. `*` matches any single `(`.
const HEADER_IDIOMS: &[&[&str]] = &[
    &["(", "encodeWithSignature", ".", "abi"],
    &["(", "keccak256", "(", "bytes4"],
    &["(", "bytes", "(", "keccak256", "(", "bytes4"],
    &["(", "encodePacked", ".", "abi", "(", "keccak256", "(", "bytes4"],
];

const SELECTOR_IDIOMS: &[&[&str]] = &[
    &["(", "encodeWithSelector", ".", "abi"],
    &["(", "bytes4"],
];

fn preceded_by(code: &Code<'_>, start: usize, idiom: &[&str]) -> bool {
    idiom.iter().enumerate().all(|(k, want)| {
        start
            .checked_sub(k + 1)
            .and_then(|i| code.get(i))
            .is_some_and(|t| t.text == *want && t.kind != TokenKind::StringLiteral)
    })
}

/// Indices of string literals in header position.
pub(crate) fn header_literals(code: &Code<'_>) -> Vec<usize> {
    (0..code.len())
        .filter(|&i| code.toks[i].kind == TokenKind::StringLiteral)
        .filter(|&i| {
            let start = code.string_expr_start(i);
            HEADER_IDIOMS.iter().any(|idiom| preceded_by(code, start, idiom))
        })
        .collect()
}

fn selector_literals(code: &Code<'_>) -> Vec<usize> {
    (0..code.len())
        .filter(|&i| {
            let t = code.toks[i];
            t.kind == TokenKind::Number
                && t.text.len() == 10
                && t.text.starts_with("0x")
                && SELECTOR_IDIOMS.iter().any(|idiom| preceded_by(code, i, idiom))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclaredFunction {
    pub header: FunctionHeader,
    pub selector: Selector,
    pub line: usize,
}

/// `function name(params)` declarations whose parameter types map onto the
/// flat ABI type set. Contract and interface names become `address`, enums
/// `uint8`; anything else (structs, mappings, function types) is skipped.
pub fn declared_functions(tokens: &[Token]) -> Vec<DeclaredFunction> {
    let code = Code::new(tokens);
    let mut address_like = HashSet::new();
    let mut enums = HashSet::new();
    for i in 0..code.len() {
        let Some(name) = code.get(i + 1).filter(|t| t.kind == TokenKind::Identifier) else {
            continue;
        };
        if ["contract", "interface", "library"].iter().any(|w| code.word_at(i, w)) {
            address_like.insert(name.text.as_str());
        } else if code.word_at(i, "enum") {
            enums.insert(name.text.as_str());
        }
    }

    let mut out = Vec::new();
    for i in 0..code.len() {
        if !code.word_at(i, "function") || !code.punct_at(i + 2, "(") {
            continue;
        }
        let name = code.toks[i + 1];
        if name.kind != TokenKind::Identifier {
            continue;
        }
        let Some(close) = code.matching_close(i + 2) else {
            continue;
        };
        let params = code.split_args(i + 3..close);
        if params.len() > MAX_ARGS {
            continue;
        }
        let mut types = Vec::with_capacity(params.len());
        for p in params {
            let Some(first) = code.get(p.start).filter(|_| !p.is_empty()) else {
                types.clear();
                types.push(None);
                break;
            };
            let base = if address_like.contains(first.text.as_str()) {
                "address".to_string()
            } else if enums.contains(first.text.as_str()) {
                "uint8".to_string()
            } else {
                first.text.clone()
            };
            let mut ty = base;
            let mut j = p.start + 1;
            while j < p.end && code.punct_at(j, "[") {
                let Some(end) = code.matching_close(j).filter(|&e| e < p.end) else {
                    break;
                };
                ty.push('[');
                for k in j + 1..end {
                    ty.push_str(&code.toks[k].text);
                }
                ty.push(']');
                j = end + 1;
            }
            types.push(canonical_type(&ty).ok());
        }
        let Some(types) = types.into_iter().collect::<Option<Vec<String>>>() else {
            continue;
        };
        if let Ok(header) = FunctionHeader::new(&name.text, &types) {
            out.push(DeclaredFunction {
                selector: header.selector(),
                header,
                line: name.span.line,
            });
        }
    }
    out
}

pub fn detect_a5_a6(tokens: &[Token], config: &ScanConfig) -> Vec<Finding> {
    let map = &*config.confusable_map;
    let code = Code::new(tokens);
    let functions = declared_functions(tokens);
    let mut findings = Vec::new();

    for i in header_literals(&code) {
        let t = code.toks[i];
        let header = t.decoded.clone().unwrap_or_default();
        let literal_selector = Selector::of_raw(&header);
        let report = analyze_string(&header, map);

        let mut finding = |class, severity, message: String, skeleton: Option<String>,
                           matched: Option<String>, note: Option<String>| {
            let skeleton_selector = skeleton.as_deref().map(Selector::of_raw);
            findings.push(Finding {
                attack_class: class,
                severity,
                span: t.span,
                message,
                evidence: Evidence::CallHeader {
                    literal: t.text.clone(),
                    header: header.clone(),
                    skeleton,
                    literal_selector,
                    skeleton_selector,
                    matched_function: matched,
                    note,
                },
            });
        };

        if report.confusable_with_ascii {
            let skeleton = report.skeleton.clone().unwrap_or_default();
            let skeleton_selector = Selector::of_raw(&skeleton);
            let mined = functions
                .iter()
                .find(|f| f.selector == literal_selector && f.header.canonical() != skeleton);
            match mined {
                Some(f) => finding(
                    AttackClass::A6,
                    Severity::High,
                    format!(
                        "call header {} looks like \"{skeleton}\" ({skeleton_selector}) but its \
                         selector {literal_selector} is that of the local function {} (line {}); \
                         the call silently lands on that function",
                        t.text,
                        f.header.canonical(),
                        f.line
                    ),
                    Some(skeleton),
                    Some(f.header.canonical()),
                    None,
                ),
                None => finding(
                    AttackClass::A5,
                    Severity::High,
                    format!(
                        "call header {} looks like \"{skeleton}\" but hashes to \
                         {literal_selector} instead of {skeleton_selector}; the call targets a \
                         function that does not exist",
                        t.text
                    ),
                    Some(skeleton),
                    None,
                    None,
                ),
            }
        } else if !report.unmapped_non_ascii.is_empty() {
            let cps: Vec<String> =
                report.unmapped_non_ascii.iter().map(|&c| format_codepoint(c)).collect();
            finding(
                AttackClass::A5,
                Severity::Medium,
                format!(
                    "call header {} contains non-ASCII codepoints with no known look-alike ({}); \
                     no Solidity function can have this selector ({literal_selector})",
                    t.text,
                    cps.join(", ")
                ),
                None,
                None,
                None,
            );
        } else {
            match FunctionHeader::parse(&header) {
                Err(e) => finding(
                    AttackClass::A5,
                    Severity::Info,
                    format!("call header {} is not a valid function header: {e}", t.text),
                    None,
                    None,
                    Some(e.to_string()),
                ),
                Ok(h) if h.canonical() != header => finding(
                    AttackClass::A5,
                    Severity::Info,
                    format!(
                        "call header {} is not canonical; the selector of the written text is \
                         {literal_selector}, the canonical \"{}\" has {}",
                        t.text,
                        h.canonical(),
                        h.selector()
                    ),
                    Some(h.canonical()),
                    None,
                    Some("non-canonical header".to_string()),
                ),
                Ok(_) => {}
            }
        }
    }

    for i in selector_literals(&code) {
        let t = code.toks[i];
        let Ok(selector) = Selector::parse_hex(&t.text) else {
            continue;
        };
        let matched = functions.iter().find(|f| f.selector == selector);
        findings.push(Finding {
            attack_class: AttackClass::A5,
            severity: Severity::Info,
            span: t.span,
            message: match matched {
                Some(f) => format!(
                    "raw selector {} in call data (matches local {}); the intended header \
                     cannot be checked",
                    t.text,
                    f.header.canonical()
                ),
                None => format!(
                    "raw selector {} in call data; the intended header cannot be checked",
                    t.text
                ),
            },
            evidence: Evidence::RawSelector {
                literal: t.text.clone(),
                selector,
                matched_function: matched.map(|f| f.header.canonical()),
            },
        });
    }
    findings
}
