//! Detection of social-engineering attack patterns in Solidity sources.
//!
//! The crate covers two address-manipulation families (non-payable or
//! future-contract receivers, checksum-insensitive comparisons) and three
//! homograph families (look-alike strings in branches, look-alike call
//! headers, and mined functions matching a look-alike header). The Ethereum
//! primitives those attacks depend on live in [`eth_primitives`].

pub mod address_kind;
pub mod cli;
pub mod eth_primitives;
pub mod homograph;
pub mod scanner;
pub mod selector_miner;
