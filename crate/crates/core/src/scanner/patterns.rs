//! Shared token-pattern helpers. All of them work on the comment-free token
//! sequence.

use std::collections::HashMap;
use std::ops::Range;

use super::lexer::{Token, TokenKind};

pub(crate) struct Code<'a> {
    pub toks: Vec<&'a Token>,
}

impl<'a> Code<'a> {
    pub fn new(tokens: &'a [Token]) -> Self {
        Code {
            toks: tokens.iter().filter(|t| t.kind != TokenKind::Comment).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.toks.len()
    }

    pub fn get(&self, i: usize) -> Option<&'a Token> {
        self.toks.get(i).copied()
    }

    pub fn punct_at(&self, i: usize, p: &str) -> bool {
        self.get(i).is_some_and(|t| t.is_punct(p))
    }

    pub fn word_at(&self, i: usize, w: &str) -> bool {
        self.get(i).is_some_and(|t| t.is_word(w))
    }

    /// Index of the bracket closing the one at `open`.
    pub fn matching_close(&self, open: usize) -> Option<usize> {
        let mut depth = 0usize;
        for (i, t) in self.toks.iter().enumerate().skip(open) {
            if t.kind != TokenKind::Punctuation {
                continue;
            }
            match t.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => {
                    depth = depth.checked_sub(1)?;
                    if depth == 0 {
                        return Some(i);
                    }
                }
                _ => {}
            }
        }
        None
    }

    /// Index of the bracket opening the one at `close`.
    pub fn matching_open(&self, close: usize) -> Option<usize> {
        let mut depth = 0usize;
        for i in (0..=close).rev() {
            let t = self.toks[i];
            if t.kind != TokenKind::Punctuation {
                continue;
            }
            match t.text.as_str() {
                ")" | "]" | "}" => depth += 1,
                "(" | "[" | "{" => {
                    depth = depth.checked_sub(1)?;
                    if depth == 0 {
                        return Some(i);
                    }
                }
                _ => {}
            }
        }
        None
    }

    /// Splits `start..end` at top-level commas.
    pub fn split_args(&self, range: Range<usize>) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut depth = 0i32;
        let mut arg_start = range.start;
        for i in range.clone() {
            let t = self.toks[i];
            if t.kind != TokenKind::Punctuation {
                continue;
            }
            match t.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                "," if depth == 0 => {
                    out.push(arg_start..i);
                    arg_start = i + 1;
                }
                _ => {}
            }
        }
        if arg_start < range.end || !out.is_empty() {
            out.push(arg_start..range.end);
        }
        out
    }

    /// Tokens forming the operands of the binary operator at `op`, bounded
    /// by unbalanced brackets and by lower-precedence or statement tokens.
    pub fn operand_ranges(&self, op: usize) -> (Range<usize>, Range<usize>) {
        let stops = |t: &Token| {
            (t.kind == TokenKind::Punctuation
                && matches!(
                    t.text.as_str(),
                    ";" | "," | "&&" | "||" | "==" | "!=" | "?" | ":" | "=" | "=>"
                        | "+=" | "-=" | "*=" | "/=" | "|=" | "&=" | "^=" | "%="
                ))
                || t.is_word("return")
        };
        let mut depth = 0usize;
        let mut right_end = self.len();
        for i in op + 1..self.len() {
            let t = self.toks[i];
            if t.kind == TokenKind::Punctuation {
                match t.text.as_str() {
                    "(" | "[" => depth += 1,
                    "{" | "}" if depth == 0 => {
                        right_end = i;
                        break;
                    }
                    ")" | "]" => {
                        if depth == 0 {
                            right_end = i;
                            break;
                        }
                        depth -= 1;
                    }
                    _ => {}
                }
            }
            if depth == 0 && stops(t) {
                right_end = i;
                break;
            }
        }
        depth = 0;
        let mut left_start = 0;
        for i in (0..op).rev() {
            let t = self.toks[i];
            if t.kind == TokenKind::Punctuation {
                match t.text.as_str() {
                    ")" | "]" => depth += 1,
                    "{" | "}" if depth == 0 => {
                        left_start = i + 1;
                        break;
                    }
                    "(" | "[" => {
                        if depth == 0 {
                            left_start = i + 1;
                            break;
                        }
                        depth -= 1;
                    }
                    _ => {}
                }
            }
            if depth == 0 && stops(t) {
                left_start = i + 1;
                break;
            }
        }
        (left_start..op, op + 1..right_end)
    }

    /// Index of the string literal token at `i`, allowing a `unicode` or
    /// `hex` prefix word directly before it. Returns the index of the first
    /// token of the literal expression.
    pub fn string_expr_start(&self, i: usize) -> usize {
        if i > 0 {
            if let Some(prev) = self.get(i - 1) {
                let glued = prev.span.end() == self.toks[i].span.offset;
                if glued && (prev.is_word("unicode") || prev.is_word("hex")) {
                    return i - 1;
                }
            }
        }
        i
    }
}

/// Resolves an expression to the address literal it denotes, looking through
/// `payable(..)` / `address(..)` wrappers and simple name bindings.
pub(crate) fn resolve_address_expr(
    code: &Code<'_>,
    range: Range<usize>,
    bindings: Option<&HashMap<String, usize>>,
) -> Option<usize> {
    let len = range.end.checked_sub(range.start)?;
    if len == 1 {
        let t = code.toks[range.start];
        return match t.kind {
            TokenKind::AddressLiteral => Some(range.start),
            TokenKind::Identifier => bindings.and_then(|b| b.get(&t.text).copied()),
            _ => None,
        };
    }
    if len >= 4
        && (code.word_at(range.start, "payable") || code.word_at(range.start, "address"))
        && code.punct_at(range.start + 1, "(")
        && code.matching_close(range.start + 1) == Some(range.end - 1)
    {
        return resolve_address_expr(code, range.start + 2..range.end - 1, bindings);
    }
    None
}

/// Names assigned a hard-coded address anywhere in the file
/// (`name = 0x…;`, including through wrappers). First assignment wins.
pub(crate) fn address_bindings(code: &Code<'_>) -> HashMap<String, usize> {
    let mut out = HashMap::new();
    for i in 1..code.len() {
        if !code.punct_at(i, "=") {
            continue;
        }
        let lhs = code.toks[i - 1];
        if lhs.kind != TokenKind::Identifier {
            continue;
        }
        let mut end = i + 1;
        let mut depth = 0i32;
        while end < code.len() {
            let t = code.toks[end];
            if t.kind == TokenKind::Punctuation {
                match t.text.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        if depth == 0 {
                            break;
                        }
                        depth -= 1;
                    }
                    ";" | "," if depth == 0 => break,
                    _ => {}
                }
            }
            end += 1;
        }
        if let Some(lit) = resolve_address_expr(code, i + 1..end, None) {
            out.entry(lhs.text.clone()).or_insert(lit);
        }
    }
    out
}
