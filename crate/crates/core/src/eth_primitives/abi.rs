//! Canonical function headers and their 4-byte selectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::keccak::keccak256;
use super::PrimitiveError;

pub const MAX_ARGS: usize = 16;

/// First four bytes of the Keccak-256 of a header string.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selector(pub [u8; 4]);

impl Selector {
    /// Selector of arbitrary header bytes, canonical or not. This is what the
    /// EVM dispatches on, so homograph headers are hashed exactly as written.
    pub fn of_raw(header: &str) -> Self {
        let d = keccak256(header.as_bytes());
        Selector([d[0], d[1], d[2], d[3]])
    }

    pub fn as_u32(&self) -> u32 {
        u32::from_be_bytes(self.0)
    }

    /// True when the leading `bits` bits of both selectors agree.
    pub fn matches_prefix(&self, other: &Selector, bits: u32) -> bool {
        debug_assert!((1..=32).contains(&bits));
        let mask = if bits >= 32 { u32::MAX } else { !(u32::MAX >> bits) };
        (self.as_u32() ^ other.as_u32()) & mask == 0
    }

    pub fn parse_hex(text: &str) -> Result<Self, PrimitiveError> {
        let digits = text.strip_prefix("0x").unwrap_or(text);
        if digits.len() != 8 || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(PrimitiveError::MalformedSelector(text.to_string()));
        }
        let v = u32::from_str_radix(digits, 16)
            .map_err(|_| PrimitiveError::MalformedSelector(text.to_string()))?;
        Ok(Selector(v.to_be_bytes()))
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:08x}", self.as_u32())
    }
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Selector({self})")
    }
}

impl FromStr for Selector {
    type Err = PrimitiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Selector::parse_hex(s)
    }
}

impl Serialize for Selector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Selector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Selector::parse_hex(&text).map_err(serde::de::Error::custom)
    }
}

/// A function name plus its flat list of canonical ABI argument types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunctionHeader {
    name: String,
    arg_types: Vec<String>,
}

impl FunctionHeader {
    pub fn new<S: AsRef<str>>(name: &str, arg_types: &[S]) -> Result<Self, PrimitiveError> {
        if !is_identifier(name) {
            return Err(PrimitiveError::InvalidIdentifier(name.to_string()));
        }
        if arg_types.len() > MAX_ARGS {
            return Err(PrimitiveError::TooManyArguments(arg_types.len()));
        }
        let arg_types = arg_types
            .iter()
            .map(|t| canonical_type(t.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FunctionHeader {
            name: name.to_string(),
            arg_types,
        })
    }

    /// Parses `name(type,...)`. Whitespace around names and types is
    /// tolerated and dropped from the canonical form.
    pub fn parse(text: &str) -> Result<Self, PrimitiveError> {
        let text = text.trim();
        let open = text
            .find('(')
            .ok_or_else(|| PrimitiveError::MalformedHeader(text.to_string()))?;
        let inner = text[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| PrimitiveError::MalformedHeader(text.to_string()))?;
        if inner.contains('(') || inner.contains(')') {
            return Err(PrimitiveError::TupleNotSupported(text.to_string()));
        }
        let name = text[..open].trim();
        let args: Vec<&str> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(str::trim).collect()
        };
        FunctionHeader::new(name, &args)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arg_types(&self) -> &[String] {
        &self.arg_types
    }

    /// `name(type1,type2,...)` with no whitespace.
    pub fn canonical(&self) -> String {
        format!("{}({})", self.name, self.arg_types.join(","))
    }

    pub fn selector(&self) -> Selector {
        compute_selector(self)
    }
}

impl fmt::Display for FunctionHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl FromStr for FunctionHeader {
    type Err = PrimitiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FunctionHeader::parse(s)
    }
}

pub fn compute_selector(header: &FunctionHeader) -> Selector {
    Selector::of_raw(&header.canonical())
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '$' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

/// Normalizes one ABI type: aliases are expanded and array suffixes kept.
pub fn canonical_type(ty: &str) -> Result<String, PrimitiveError> {
    let unknown = || PrimitiveError::UnknownType(ty.to_string());
    let ty = ty.trim();
    if ty.starts_with('(') {
        return Err(PrimitiveError::TupleNotSupported(ty.to_string()));
    }
    let base_end = ty.find('[').unwrap_or(ty.len());
    let (base, mut dims) = ty.split_at(base_end);

    let mut out = canonical_elementary(base).ok_or_else(unknown)?;
    while !dims.is_empty() {
        let close = dims.find(']').ok_or_else(unknown)?;
        let size = &dims[1..close];
        if !dims.starts_with('[') {
            return Err(unknown());
        }
        if !size.is_empty() {
            match size.parse::<u64>() {
                Ok(n) if n > 0 && !size.starts_with('0') => {}
                _ => return Err(unknown()),
            }
        }
        out.push('[');
        out.push_str(size);
        out.push(']');
        dims = &dims[close + 1..];
    }
    Ok(out)
}

fn canonical_elementary(base: &str) -> Option<String> {
    let simple = match base {
        "uint" => Some("uint256"),
        "int" => Some("int256"),
        "byte" => Some("bytes1"),
        "fixed" => Some("fixed128x18"),
        "ufixed" => Some("ufixed128x18"),
        "address" | "bool" | "string" | "bytes" | "function" => Some(base),
        _ => None,
    };
    if let Some(s) = simple {
        return Some(s.to_string());
    }
    let bits_ok = |digits: &str| -> bool {
        !digits.starts_with('0')
            && matches!(digits.parse::<u32>(), Ok(n) if n % 8 == 0 && (8..=256).contains(&n))
    };
    if let Some(bits) = base.strip_prefix("uint").or_else(|| base.strip_prefix("int")) {
        return bits_ok(bits).then(|| base.to_string());
    }
    if let Some(n) = base.strip_prefix("bytes") {
        let ok = !n.starts_with('0') && matches!(n.parse::<u32>(), Ok(k) if (1..=32).contains(&k));
        return ok.then(|| base.to_string());
    }
    if let Some(spec) = base.strip_prefix("ufixed").or_else(|| base.strip_prefix("fixed")) {
        let (m, n) = spec.split_once('x')?;
        let n_ok = (n == "0" || !n.starts_with('0'))
            && matches!(n.parse::<u32>(), Ok(k) if k <= 80);
        return (bits_ok(m) && n_ok).then(|| base.to_string());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn foo_uint256_worked_selector() {
        let h = FunctionHeader::parse("foo(uint256)").unwrap();
        assert_eq!(compute_selector(&h).to_string(), "0x2fbebd38");
    }

    #[test]
    fn aliases_are_normalized() {
        let h = FunctionHeader::parse("foo(uint)").unwrap();
        assert_eq!(h.canonical(), "foo(uint256)");
        assert_eq!(compute_selector(&h).to_string(), "0x2fbebd38");
        let h = FunctionHeader::parse(" bar ( int , byte[2][] ,address ) ").unwrap();
        assert_eq!(h.canonical(), "bar(int256,bytes1[2][],address)");
    }

    #[test]
    fn transfer_selector() {
        let h = FunctionHeader::parse("transfer(address,uint256)").unwrap();
        assert_eq!(h.selector().to_string(), "0xa9059cbb");
    }

    #[test]
    fn validation_errors_name_the_token() {
        match FunctionHeader::parse("foo(badtype)") {
            Err(PrimitiveError::UnknownType(t)) => assert_eq!(t, "badtype"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            FunctionHeader::parse("1foo(uint256)"),
            Err(PrimitiveError::InvalidIdentifier(_))
        ));
        assert!(matches!(
            FunctionHeader::parse("f((uint256,bool))"),
            Err(PrimitiveError::TupleNotSupported(_))
        ));
        assert!(matches!(
            FunctionHeader::parse("foo(uint7)"),
            Err(PrimitiveError::UnknownType(_))
        ));
        assert!(matches!(
            FunctionHeader::parse("foo(bytes33)"),
            Err(PrimitiveError::UnknownType(_))
        ));
        assert!(matches!(
            FunctionHeader::parse("foo(uint256[0])"),
            Err(PrimitiveError::UnknownType(_))
        ));
        assert!(matches!(
            FunctionHeader::parse("foo(uint256"),
            Err(PrimitiveError::MalformedHeader(_))
        ));
    }

    #[test]
    fn argument_limit() {
        let ok = vec!["uint8"; 16];
        assert!(FunctionHeader::new("f", &ok).is_ok());
        let too_many = vec!["uint8"; 17];
        assert!(matches!(
            FunctionHeader::new("f", &too_many),
            Err(PrimitiveError::TooManyArguments(17))
        ));
    }

    #[test]
    fn prefix_matching() {
        let a = Selector([0x2f, 0xbe, 0xbd, 0x38]);
        let b = Selector([0x2f, 0xbe, 0x00, 0x00]);
        assert!(a.matches_prefix(&b, 16));
        assert!(!a.matches_prefix(&b, 17));
        assert!(a.matches_prefix(&a, 32));
        assert!(a.matches_prefix(&Selector([0x00, 0, 0, 0]), 1));
        assert!(!a.matches_prefix(&Selector([0x80, 0, 0, 0]), 1));
    }

    #[test]
    fn selector_hex_parsing() {
        assert_eq!(Selector::parse_hex("2fbebd38").unwrap(), Selector([0x2f, 0xbe, 0xbd, 0x38]));
        assert_eq!(Selector::parse_hex("0x2FBEBD38").unwrap().to_string(), "0x2fbebd38");
        assert!(Selector::parse_hex("0x2fbebd3").is_err());
        assert!(Selector::parse_hex("+2fbebd3").is_err());
    }
}
