use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::keccak::keccak256;
use super::PrimitiveError;

/// A 20-byte Ethereum account identifier.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub const ZERO: Address = Address([0; 20]);

    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        bytes.try_into().ok().map(Address)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    /// Lowercase hex digits without the `0x` prefix.
    pub fn to_hex_lower(&self) -> String {
        let mut out = String::with_capacity(40);
        for b in self.0 {
            out.push(HEX_LOWER[(b >> 4) as usize] as char);
            out.push(HEX_LOWER[(b & 0xf) as usize] as char);
        }
        out
    }

    /// Parses `0x` followed by exactly 40 hex digits of any case. The
    /// checksum is not inspected; use [`eip55_classify`] for that.
    pub fn parse_hex(text: &str) -> Result<Self, PrimitiveError> {
        let digits = text
            .strip_prefix("0x")
            .or_else(|| text.strip_prefix("0X"))
            .ok_or_else(|| PrimitiveError::MalformedAddress(text.to_string()))?;
        if digits.len() != 40 {
            return Err(PrimitiveError::MalformedAddress(text.to_string()));
        }
        let mut bytes = [0u8; 20];
        for (i, pair) in digits.as_bytes().chunks_exact(2).enumerate() {
            let hi = hex_value(pair[0]);
            let lo = hex_value(pair[1]);
            match (hi, lo) {
                (Some(hi), Some(lo)) => bytes[i] = (hi << 4) | lo,
                _ => return Err(PrimitiveError::MalformedAddress(text.to_string())),
            }
        }
        Ok(Address(bytes))
    }
}

const HEX_LOWER: &[u8; 16] = b"0123456789abcdef";

fn hex_value(c: u8) -> Option<u8> {
    match c {
        b'0'..=b'9' => Some(c - b'0'),
        b'a'..=b'f' => Some(c - b'a' + 10),
        b'A'..=b'F' => Some(c - b'A' + 10),
        _ => None,
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex_lower())
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({self})")
    }
}

impl FromStr for Address {
    type Err = PrimitiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Address::parse_hex(s)
    }
}

impl Serialize for Address {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Address::parse_hex(&text).map_err(serde::de::Error::custom)
    }
}

/// How the letter case of an address text relates to its EIP-55 checksum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseClass {
    #[serde(rename = "valid-eip55")]
    ValidEip55,
    AllLower,
    AllUpper,
    InvalidChecksum,
    Malformed,
}

impl CaseClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseClass::ValidEip55 => "valid-eip55",
            CaseClass::AllLower => "all-lower",
            CaseClass::AllUpper => "all-upper",
            CaseClass::InvalidChecksum => "invalid-checksum",
            CaseClass::Malformed => "malformed",
        }
    }
}

impl fmt::Display for CaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An address as written in text, together with its checksum classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChecksummedAddressText {
    pub text: String,
    pub case_class: CaseClass,
    /// Absent only when `case_class` is [`CaseClass::Malformed`].
    pub address: Option<Address>,
}

/// Mixed-case EIP-55 text: the hex digit at position `i` is uppercased iff
/// nibble `i` of `keccak256(lowercase hex)` is at least 8.
pub fn eip55_encode(addr: &Address) -> ChecksummedAddressText {
    let lower = addr.to_hex_lower();
    let hash = keccak256(lower.as_bytes());
    let mut text = String::with_capacity(42);
    text.push_str("0x");
    for (i, c) in lower.chars().enumerate() {
        let nibble = (hash[i / 2] >> (if i % 2 == 0 { 4 } else { 0 })) & 0xf;
        if nibble >= 8 {
            text.push(c.to_ascii_uppercase());
        } else {
            text.push(c);
        }
    }
    ChecksummedAddressText {
        text,
        case_class: CaseClass::ValidEip55,
        address: Some(*addr),
    }
}

pub fn eip55_classify(text: &str) -> ChecksummedAddressText {
    let malformed = || ChecksummedAddressText {
        text: text.to_string(),
        case_class: CaseClass::Malformed,
        address: None,
    };
    // Only the lowercase prefix is accepted; `0X` is not an address literal.
    let Some(digits) = text.strip_prefix("0x") else {
        return malformed();
    };
    let Ok(address) = Address::parse_hex(text) else {
        return malformed();
    };

    let has_lower = digits.bytes().any(|b| b.is_ascii_lowercase());
    let has_upper = digits.bytes().any(|b| b.is_ascii_uppercase());
    let encoded = eip55_encode(&address);
    let case_class = if encoded.text == text {
        CaseClass::ValidEip55
    } else if !has_upper {
        CaseClass::AllLower
    } else if !has_lower {
        CaseClass::AllUpper
    } else {
        CaseClass::InvalidChecksum
    };
    ChecksummedAddressText {
        text: text.to_string(),
        case_class,
        address: Some(address),
    }
}
