use super::address::Address;
use super::keccak::keccak256;
use super::rlp::{rlp_encode_address_nonce, Nonce};

/// Address of the contract that `sender` creates with the given account
/// nonce: the low 20 bytes of `keccak256(rlp([sender, nonce]))`.
pub fn derive_create_address(sender: &Address, nonce: Nonce) -> Address {
    let digest = keccak256(rlp_encode_address_nonce(sender, nonce));
    let mut out = [0u8; 20];
    out.copy_from_slice(&digest[12..]);
    Address(out)
}
