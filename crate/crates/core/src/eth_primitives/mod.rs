//! Byte-exact Ethereum primitives: Keccak-256, the RLP needed for CREATE,
//! function selectors, EIP-55 checksums and CREATE address derivation.
//!
//! Everything here is a pure function over immutable inputs.

mod abi;
mod address;
mod create;
mod keccak;
mod rlp;

pub use abi::{canonical_type, compute_selector, is_identifier, FunctionHeader, Selector, MAX_ARGS};
pub use address::{eip55_classify, eip55_encode, Address, CaseClass, ChecksummedAddressText};
pub use create::derive_create_address;
pub use keccak::{keccak256, keccak_f1600, Keccak256};
pub(crate) use keccak::keccak256_prefix4_short;
pub use rlp::{rlp_encode_address_nonce, Nonce};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrimitiveError {
    #[error("malformed address `{0}`: expected 0x followed by 40 hex digits")]
    MalformedAddress(String),
    #[error("malformed selector `{0}`: expected 8 hex digits")]
    MalformedSelector(String),
    #[error("malformed function header `{0}`")]
    MalformedHeader(String),
    #[error("invalid function name `{0}`")]
    InvalidIdentifier(String),
    #[error("unknown ABI type `{0}`")]
    UnknownType(String),
    #[error("tuple types are not supported: `{0}`")]
    TupleNotSupported(String),
    #[error("{0} arguments given, at most 16 are allowed")]
    TooManyArguments(usize),
    #[error("nonce `{0}` is not an integer in 0..2^64")]
    InvalidNonce(String),
}
