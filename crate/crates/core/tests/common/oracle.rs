//! Reference implementations used only by tests. They share no code with
//! the crate: hashing comes from the `sha3` crate and RLP is a general
//! recursive encoder.

#![allow(dead_code)]

use sha3::{Digest, Keccak256};

pub fn keccak(data: &[u8]) -> [u8; 32] {
    Keccak256::digest(data).into()
}

pub enum Rlp {
    Bytes(Vec<u8>),
    List(Vec<Rlp>),
}

fn length_prefix(len: usize, short: u8, long: u8) -> Vec<u8> {
    if len < 56 {
        vec![short + len as u8]
    } else {
        let be: Vec<u8> = len.to_be_bytes().iter().copied().skip_while(|&b| b == 0).collect();
        let mut out = vec![long + be.len() as u8];
        out.extend(be);
        out
    }
}

pub fn rlp(item: &Rlp) -> Vec<u8> {
    match item {
        Rlp::Bytes(b) if b.len() == 1 && b[0] < 0x80 => b.clone(),
        Rlp::Bytes(b) => {
            let mut out = length_prefix(b.len(), 0x80, 0xb7);
            out.extend(b);
            out
        }
        Rlp::List(items) => {
            let payload: Vec<u8> = items.iter().flat_map(rlp).collect();
            let mut out = length_prefix(payload.len(), 0xc0, 0xf7);
            out.extend(payload);
            out
        }
    }
}

pub fn uint_bytes(mut v: u64) -> Vec<u8> {
    let mut out = Vec::new();
    while v > 0 {
        out.insert(0, (v & 0xff) as u8);
        v >>= 8;
    }
    out
}

pub fn create_address(sender: &[u8; 20], nonce: u64) -> [u8; 20] {
    let enc = rlp(&Rlp::List(vec![
        Rlp::Bytes(sender.to_vec()),
        Rlp::Bytes(uint_bytes(nonce)),
    ]));
    let h = keccak(&enc);
    h[12..].try_into().unwrap()
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn eip55(addr: &[u8; 20]) -> String {
    let lower = hex(addr);
    let h = hex(&keccak(lower.as_bytes()));
    let mut out = String::from("0x");
    for (c, hc) in lower.chars().zip(h.chars()) {
        if c.is_ascii_alphabetic() && hc.to_digit(16).unwrap() >= 8 {
            out.push(c.to_ascii_uppercase());
        } else {
            out.push(c);
        }
    }
    out
}

pub fn selector(header: &str) -> [u8; 4] {
    keccak(header.as_bytes())[..4].try_into().unwrap()
}
