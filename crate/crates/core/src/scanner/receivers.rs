use super::lexer::{Token, TokenKind};
use super::patterns::{address_bindings, resolve_address_expr, Code};
use super::{AttackClass, Evidence, Finding, ScanConfig, Severity};
use crate::address_kind::AddressKind;
use crate::eth_primitives::Address;

/// A value-transfer call site: `recv.transfer(v)`, `recv.send(v)`,
/// `recv.call{value: v}(..)` or legacy `recv.call.value(v)(..)`.
struct Transfer {
    receiver: std::ops::Range<usize>,
    call: &'static str,
    site: usize,
}

fn receiver_before(code: &Code<'_>, dot: usize) -> Option<std::ops::Range<usize>> {
    let last = dot.checked_sub(1)?;
    let t = code.get(last)?;
    match t.kind {
        TokenKind::Identifier | TokenKind::AddressLiteral => Some(last..dot),
        TokenKind::Punctuation if t.text == ")" => {
            let open = code.matching_open(last)?;
            let callee = open.checked_sub(1)?;
            Some(callee..dot)
        }
        _ => None,
    }
}

fn transfers(code: &Code<'_>) -> Vec<Transfer> {
    let mut out = Vec::new();
    for dot in 0..code.len() {
        if !code.punct_at(dot, ".") {
            continue;
        }
        let name = dot + 1;
        let call = if (code.word_at(name, "transfer") || code.word_at(name, "send"))
            && code.punct_at(name + 1, "(")
        {
            // Ether transfers take exactly one argument; two-argument
            // `transfer(to, amount)` is a token call.
            let Some(close) = code.matching_close(name + 1) else {
                continue;
            };
            if code.split_args(name + 2..close).len() != 1 {
                continue;
            }
            if code.word_at(name, "transfer") {
                "transfer"
            } else {
                "send"
            }
        } else if code.word_at(name, "call") && code.punct_at(name + 1, "{") {
            let Some(close) = code.matching_close(name + 1) else {
                continue;
            };
            let has_value =
                (name + 2..close).any(|i| code.word_at(i, "value") && code.punct_at(i + 1, ":"));
            if !has_value {
                continue;
            }
            "call{value}"
        } else if code.word_at(name, "call")
            && code.punct_at(name + 1, ".")
            && code.word_at(name + 2, "value")
            && code.punct_at(name + 3, "(")
        {
            "call.value"
        } else {
            continue;
        };
        if let Some(receiver) = receiver_before(code, dot) {
            out.push(Transfer {
                receiver,
                call,
                site: name,
            });
        }
    }
    out
}

pub fn detect_a1_a2(tokens: &[Token], config: &ScanConfig) -> Vec<Finding> {
    let code = Code::new(tokens);
    let bindings = address_bindings(&code);
    let mut findings = Vec::new();
    for t in transfers(&code) {
        let Some(lit_idx) = resolve_address_expr(&code, t.receiver.clone(), Some(&bindings)) else {
            continue;
        };
        let lit = code.toks[lit_idx];
        let Ok(address) = Address::parse_hex(&lit.text) else {
            continue;
        };
        let record = config.address_kinds.get(&address);
        let kind = record.map(|r| r.kind);
        let (class, severity, message) = match kind {
            Some(AddressKind::ContractNonpayable) => (
                AttackClass::A1,
                Severity::High,
                format!(
                    "value transfer ({}) to hard-coded {address}, a known non-payable contract: \
                     the transfer reverts and the surrounding transaction fails",
                    t.call
                ),
            ),
            Some(AddressKind::ContractUnknownPayability) => (
                AttackClass::A1,
                Severity::Medium,
                format!(
                    "value transfer ({}) to hard-coded {address}, a contract of unknown \
                     payability: if it cannot accept Ether the transaction reverts",
                    t.call
                ),
            ),
            Some(AddressKind::ContractPayable) => (
                AttackClass::A1,
                Severity::Info,
                format!(
                    "value transfer ({}) to hard-coded {address}, currently a payable contract",
                    t.call
                ),
            ),
            Some(AddressKind::Eoa) | None => (
                AttackClass::A2,
                Severity::Medium,
                format!(
                    "value transfer ({}) to hard-coded {address}, {}: CREATE addresses are \
                     computable in advance from deployer and nonce, so a non-payable contract \
                     can be deployed there later and every such transfer will then revert",
                    t.call,
                    if kind.is_some() {
                        "an EOA at snapshot time"
                    } else {
                        "of unknown kind"
                    }
                ),
            ),
        };
        findings.push(Finding {
            attack_class: class,
            severity,
            span: lit.span,
            message,
            evidence: Evidence::Receiver {
                literal: lit.text.clone(),
                address,
                address_kind: kind,
                kind_source: record.map(|r| r.source.clone()),
                call: t.call.to_string(),
                call_site: code.toks[t.site].span,
            },
        });
    }
    findings
}
