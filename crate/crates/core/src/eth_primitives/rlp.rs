//! Just enough RLP to encode `[sender, nonce]` for CREATE derivation.

use super::address::Address;

/// Account nonce. RLP-encodes as its minimal big-endian bytes; zero is the
/// empty string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Nonce(pub u64);

impl Nonce {
    pub fn minimal_be_bytes(&self) -> Vec<u8> {
        let bytes = self.0.to_be_bytes();
        let skip = bytes.iter().take_while(|&&b| b == 0).count();
        bytes[skip..].to_vec()
    }
}

impl From<u64> for Nonce {
    fn from(value: u64) -> Self {
        Nonce(value)
    }
}

fn encode_string(out: &mut Vec<u8>, bytes: &[u8]) {
    match bytes {
        [b] if *b < 0x80 => out.push(*b),
        _ => {
            // Every string here is at most 20 bytes, so the short form applies.
            debug_assert!(bytes.len() <= 55);
            out.push(0x80 + bytes.len() as u8);
            out.extend_from_slice(bytes);
        }
    }
}

pub fn rlp_encode_address_nonce(sender: &Address, nonce: Nonce) -> Vec<u8> {
    let mut payload = Vec::with_capacity(30);
    encode_string(&mut payload, sender.as_bytes());
    encode_string(&mut payload, &nonce.minimal_be_bytes());

    let mut out = Vec::with_capacity(payload.len() + 1);
    out.push(0xc0 + payload.len() as u8);
    out.extend_from_slice(&payload);
    out
}
