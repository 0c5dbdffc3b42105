//! A forgiving Solidity tokenizer. It never rejects input: anything it does
//! not recognize becomes an `Other` token. Token texts are raw slices of the
//! source, so every non-whitespace byte belongs to exactly one token.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Identifier,
    StringLiteral,
    /// Decimal or hex numeral that is not a 40-digit address.
    Number,
    /// `0x` followed by exactly 40 hex digits, outside string literals.
    AddressLiteral,
    Punctuation,
    Keyword,
    Comment,
    Other,
}

/// Source location. `line` and `column` are 1-based; `column` counts
/// characters. `offset` and `len` are in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
    pub line: usize,
    pub column: usize,
}

impl Span {
    pub fn end(&self) -> usize {
        self.offset + self.len
    }

    pub fn slice<'a>(&self, source: &'a str) -> Option<&'a str> {
        source.get(self.offset..self.end())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
    /// String literal contents with escapes resolved. `None` for other kinds.
    pub decoded: Option<String>,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.text == p
    }

    /// Identifier or keyword with the given text.
    pub fn is_word(&self, w: &str) -> bool {
        matches!(self.kind, TokenKind::Identifier | TokenKind::Keyword) && self.text == w
    }
}

const KEYWORDS: &[&str] = &[
    "abstract", "anonymous", "assembly", "break", "calldata", "catch", "constant",
    "constructor", "continue", "contract", "delete", "do", "else", "emit", "enum", "error",
    "event", "external", "fallback", "false", "for", "function", "if", "immutable", "import",
    "indexed", "interface", "internal", "is", "library", "mapping", "memory", "modifier", "new",
    "override", "payable", "pragma", "private", "public", "pure", "receive", "return",
    "returns", "revert", "storage", "struct", "true", "try", "type", "unchecked", "using",
    "view", "virtual", "while",
];

// Longest first within each leading character.
const PUNCT: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "**", "==", "!=", "<=", ">=", "&&", "||", "=>", "->", "+=", "-=",
    "*=", "/=", "%=", "|=", "&=", "^=", "++", "--", "<<", ">>", ":=", "(", ")", "{", "}", "[",
    "]", ";", ",", ".", "?", ":", "=", "+", "-", "*", "/", "%", "<", ">", "!", "&", "|", "^",
    "~", "@",
];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn bump_while(&mut self, f: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.bump();
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

pub fn tokenize(source: &str) -> Vec<Token> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_ascii_whitespace() {
            cur.bump();
            continue;
        }
        let (start, line, column) = (cur.pos, cur.line, cur.column);
        let mut decoded = None;
        let kind = if cur.rest().starts_with("//") {
            cur.bump_while(|c| c != '\n');
            TokenKind::Comment
        } else if cur.rest().starts_with("/*") {
            cur.bump();
            cur.bump();
            loop {
                if cur.rest().starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                if cur.bump().is_none() {
                    break;
                }
            }
            TokenKind::Comment
        } else if c == '"' || c == '\'' {
            match lex_string(&mut cur, c) {
                Some(value) => {
                    decoded = Some(value);
                    TokenKind::StringLiteral
                }
                None => TokenKind::Other,
            }
        } else if c.is_ascii_digit() {
            lex_number(&mut cur)
        } else if is_ident_start(c) {
            cur.bump_while(is_ident_continue);
            if KEYWORDS.contains(&&source[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if let Some(p) = PUNCT.iter().find(|p| cur.rest().starts_with(*p)) {
            for _ in 0..p.len() {
                cur.bump();
            }
            TokenKind::Punctuation
        } else {
            cur.bump();
            TokenKind::Other
        };
        tokens.push(Token {
            kind,
            text: source[start..cur.pos].to_string(),
            span: Span {
                offset: start,
                len: cur.pos - start,
                line,
                column,
            },
            decoded,
        });
    }
    tokens
}

fn lex_number(cur: &mut Cursor<'_>) -> TokenKind {
    let start = cur.pos;
    if cur.peek() == Some('0') && matches!(cur.peek_at(1), Some('x') | Some('X')) {
        cur.bump();
        cur.bump();
        cur.bump_while(|c| c.is_ascii_alphanumeric() || c == '_');
        let text = &cur.src[start..cur.pos];
        let digits = &text[2..];
        if text.starts_with("0x")
            && digits.len() == 40
            && digits.bytes().all(|b| b.is_ascii_hexdigit())
        {
            return TokenKind::AddressLiteral;
        }
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_hexdigit() || b == b'_') {
            return TokenKind::Number;
        }
        return TokenKind::Other;
    }
    cur.bump_while(|c| c.is_ascii_digit() || c == '_');
    if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
        cur.bump();
        cur.bump_while(|c| c.is_ascii_digit() || c == '_');
    }
    if matches!(cur.peek(), Some('e') | Some('E'))
        && (cur.peek_at(1).is_some_and(|c| c.is_ascii_digit())
            || (cur.peek_at(1) == Some('-') && cur.peek_at(2).is_some_and(|c| c.is_ascii_digit())))
    {
        cur.bump();
        if cur.peek() == Some('-') {
            cur.bump();
        }
        cur.bump_while(|c| c.is_ascii_digit());
    }
    if cur.peek().is_some_and(is_ident_continue) {
        // `12abc` is not a numeral; keep it as one opaque token.
        cur.bump_while(is_ident_continue);
        return TokenKind::Other;
    }
    TokenKind::Number
}

/// Consumes a quoted literal. Returns the decoded value, or `None` when the
/// literal is unterminated on its line (the partial text becomes `Other`).
fn lex_string(cur: &mut Cursor<'_>, quote: char) -> Option<String> {
    cur.bump();
    let mut value = String::new();
    loop {
        let c = cur.peek()?;
        match c {
            '\n' | '\r' => return None,
            c if c == quote => {
                cur.bump();
                return Some(value);
            }
            '\\' => {
                cur.bump();
                let esc = cur.peek()?;
                if esc == '\n' {
                    cur.bump();
                    continue;
                }
                cur.bump();
                match esc {
                    'n' => value.push('\n'),
                    't' => value.push('\t'),
                    'r' => value.push('\r'),
                    'x' => {
                        let hex: String = (0..2).filter_map(|_| take_hex(cur)).collect();
                        match u32::from_str_radix(&hex, 16).ok().filter(|_| hex.len() == 2) {
                            Some(v) => value.push(char::from_u32(v).unwrap_or('\u{FFFD}')),
                            None => {
                                value.push('\\');
                                value.push('x');
                                value.push_str(&hex);
                            }
                        }
                    }
                    'u' => {
                        let hex: String = (0..4).filter_map(|_| take_hex(cur)).collect();
                        match u32::from_str_radix(&hex, 16).ok().filter(|_| hex.len() == 4) {
                            Some(v) => value.push(char::from_u32(v).unwrap_or('\u{FFFD}')),
                            None => {
                                value.push('\\');
                                value.push('u');
                                value.push_str(&hex);
                            }
                        }
                    }
                    other => value.push(other),
                }
            }
            _ => {
                cur.bump();
                value.push(c);
            }
        }
    }
}

fn take_hex(cur: &mut Cursor<'_>) -> Option<char> {
    let c = cur.peek().filter(|c| c.is_ascii_hexdigit())?;
    cur.bump();
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src).into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn simple_call() {
        use TokenKind::*;
        let got = kinds("a.transfer(1);");
        let want = [
            (Identifier, "a"),
            (Punctuation, "."),
            (Identifier, "transfer"),
            (Punctuation, "("),
            (Number, "1"),
            (Punctuation, ")"),
            (Punctuation, ";"),
        ];
        assert_eq!(got.len(), want.len());
        for ((gk, gt), (wk, wt)) in got.iter().zip(want.iter()) {
            assert_eq!((gk, gt.as_str()), (wk, *wt));
        }
    }

    #[test]
    fn address_literal() {
        let toks = tokenize("address x = 0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed;");
        let addrs: Vec<_> = toks.iter().filter(|t| t.kind == TokenKind::AddressLiteral).collect();
        assert_eq!(addrs.len(), 1);
        assert_eq!(addrs[0].text, "0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed");
        // 39 and 41 digits are plain numbers.
        assert_eq!(
            tokenize("0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAe")[0].kind,
            TokenKind::Number
        );
        assert_eq!(
            tokenize("0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed0")[0].kind,
            TokenKind::Number
        );
    }

    #[test]
    fn string_keeps_raw_codepoints() {
        let toks = tokenize("s = \"t\u{043E}ken\";");
        let s = toks.iter().find(|t| t.kind == TokenKind::StringLiteral).unwrap();
        assert_eq!(s.text, "\"t\u{043E}ken\"");
        assert_eq!(s.decoded.as_deref(), Some("t\u{043E}ken"));
    }

    #[test]
    fn escapes_are_decoded_separately() {
        let toks = tokenize(r#"x = "a\"bа\x41\n";"#);
        let s = toks.iter().find(|t| t.kind == TokenKind::StringLiteral).unwrap();
        assert_eq!(s.text, r#""a\"bа\x41\n""#);
        assert_eq!(s.decoded.as_deref(), Some("a\"b\u{0430}A\n"));
    }

    #[test]
    fn comments_operators_and_junk() {
        use TokenKind::*;
        let got = kinds("a == b // note\n/* x\ny */ c != d # \u{00A0}");
        let k: Vec<_> = got.iter().map(|(k, _)| *k).collect();
        assert_eq!(
            k,
            [Identifier, Punctuation, Identifier, Comment, Comment, Identifier, Punctuation,
             Identifier, Other, Other]
        );
        assert_eq!(got[1].1, "==");
        assert_eq!(got[6].1, "!=");
    }

    #[test]
    fn unterminated_constructs_do_not_fail() {
        let toks = tokenize("x = \"open\ny /* never closed");
        assert_eq!(toks[2].kind, TokenKind::Other);
        assert_eq!(toks.last().unwrap().kind, TokenKind::Comment);
    }

    #[test]
    fn spans_track_lines_and_columns() {
        let src = "a\n  \u{0430}b = 1;";
        let toks = tokenize(src);
        assert_eq!((toks[1].span.line, toks[1].span.column), (2, 3));
        assert_eq!(toks[1].span.slice(src), Some("\u{0430}b"));
        assert_eq!(toks[2].span.column, 6);
    }
}
