//! Address kinds (EOA or contract) from snapshot files and live node queries.
//!
//! Answers come from an offline snapshot or a live `eth_getCode` query. A
//! live answer only holds at the moment it was taken; a hard-coded EOA can
//! become a non-payable contract one deployment later.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eth_primitives::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AddressKind {
    Eoa,
    ContractPayable,
    ContractNonpayable,
    ContractUnknownPayability,
}

impl AddressKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AddressKind::Eoa => "eoa",
            AddressKind::ContractPayable => "contract-payable",
            AddressKind::ContractNonpayable => "contract-nonpayable",
            AddressKind::ContractUnknownPayability => "contract-unknown-payability",
        }
    }
}

impl fmt::Display for AddressKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AddressKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eoa" => Ok(AddressKind::Eoa),
            "contract-payable" => Ok(AddressKind::ContractPayable),
            "contract-nonpayable" => Ok(AddressKind::ContractNonpayable),
            "contract-unknown-payability" => Ok(AddressKind::ContractUnknownPayability),
            other => Err(format!("unknown address kind `{other}`")),
        }
    }
}

/// Where a kind came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum KindSource {
    Snapshot,
    /// Live query; `checked_at` is Unix seconds when the node answered.
    Live { checked_at: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindRecord {
    pub kind: AddressKind,
    pub source: KindSource,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AddressKindMap {
    entries: BTreeMap<Address, KindRecord>,
    source_tag: String,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("reading snapshot {path}: {message}")]
    Io { path: String, message: String },
    #[error("snapshot line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("snapshot line {line}: duplicate address {address} (first seen on line {first_line})")]
    Duplicate {
        line: usize,
        first_line: usize,
        address: Address,
    },
}

impl AddressKindMap {
    pub fn new(source_tag: impl Into<String>) -> Self {
        AddressKindMap {
            entries: BTreeMap::new(),
            source_tag: source_tag.into(),
        }
    }

    pub fn source_tag(&self) -> &str {
        &self.source_tag
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, addr: &Address) -> Option<&KindRecord> {
        self.entries.get(addr)
    }

    pub fn kind(&self, addr: &Address) -> Option<AddressKind> {
        self.entries.get(addr).map(|r| r.kind)
    }

    pub fn contains(&self, addr: &Address) -> bool {
        self.entries.contains_key(addr)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Address, &KindRecord)> {
        self.entries.iter()
    }

    /// Inserts unless the address is already known. Snapshot entries are
    /// never overridden by live answers.
    pub fn insert_if_absent(&mut self, addr: Address, record: KindRecord) -> bool {
        if self.entries.contains_key(&addr) {
            return false;
        }
        self.entries.insert(addr, record);
        true
    }

    /// Parses `address,kind` lines. Addresses must be lowercase hex; `#`
    /// starts a comment; blank lines are skipped.
    pub fn parse_snapshot(text: &str, source_tag: &str) -> Result<Self, SnapshotError> {
        let mut map = AddressKindMap::new(source_tag);
        let mut first_seen: BTreeMap<Address, usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let malformed = |message: String| SnapshotError::Malformed { line, message };
            let (addr_text, kind_text) = content
                .split_once(',')
                .ok_or_else(|| malformed("expected `address,kind`".to_string()))?;
            let addr_text = addr_text.trim();
            let kind_text = kind_text.trim();
            let address = Address::parse_hex(addr_text).map_err(|e| malformed(e.to_string()))?;
            if addr_text != address.to_string() {
                return Err(malformed(format!("address `{addr_text}` must be lowercase hex")));
            }
            let kind: AddressKind = kind_text.parse().map_err(malformed)?;
            if let Some(&first_line) = first_seen.get(&address) {
                return Err(SnapshotError::Duplicate {
                    line,
                    first_line,
                    address,
                });
            }
            first_seen.insert(address, line);
            map.entries.insert(
                address,
                KindRecord {
                    kind,
                    source: KindSource::Snapshot,
                },
            );
        }
        Ok(map)
    }

    pub fn load_snapshot(path: &Path) -> Result<Self, SnapshotError> {
        let text = std::fs::read_to_string(path).map_err(|e| SnapshotError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        AddressKindMap::parse_snapshot(&text, &path.display().to_string())
    }
}

pub fn load_snapshot(path: &Path) -> Result<AddressKindMap, SnapshotError> {
    AddressKindMap::load_snapshot(path)
}

#[derive(Debug, Error)]
#[error("address resolver unavailable: {0}")]
pub struct ResolverUnavailable(pub String);

/// The exact `eth_getCode` request body sent to the node.
pub fn get_code_request_body(addr: &Address, id: u64) -> String {
    format!(
        r#"{{"jsonrpc":"2.0","method":"eth_getCode","params":["{addr}","latest"],"id":{id}}}"#
    )
}

#[derive(Deserialize)]
struct RpcResponse {
    result: Option<String>,
    error: Option<serde_json::Value>,
}

/// Classifies from a `result` code string: `0x` is an EOA, anything else is
/// a contract whose payability code emptiness cannot tell.
pub fn kind_from_code(code: &str) -> Result<AddressKind, ResolverUnavailable> {
    let digits = code
        .strip_prefix("0x")
        .ok_or_else(|| ResolverUnavailable(format!("code `{code}` is not 0x-prefixed hex")))?;
    if !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(ResolverUnavailable(format!("code `{code}` is not hex")));
    }
    Ok(if digits.is_empty() {
        AddressKind::Eoa
    } else {
        AddressKind::ContractUnknownPayability
    })
}

/// Blocking JSON-RPC client for `eth_getCode`.
#[derive(Debug, Clone)]
pub struct NodeClient {
    endpoint: String,
    agent: ureq::Agent,
}

impl NodeClient {
    pub fn new(endpoint: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        NodeClient {
            endpoint: endpoint.to_string(),
            agent,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn query(&self, addr: &Address, id: u64) -> Result<KindRecord, ResolverUnavailable> {
        let body = get_code_request_body(addr, id);
        let mut response = self
            .agent
            .post(&self.endpoint)
            .header("Content-Type", "application/json")
            .send(body.as_str())
            .map_err(|e| ResolverUnavailable(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(ResolverUnavailable(format!("HTTP status {status}")));
        }
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| ResolverUnavailable(e.to_string()))?;
        let parsed: RpcResponse =
            serde_json::from_str(&text).map_err(|e| ResolverUnavailable(e.to_string()))?;
        if let Some(err) = parsed.error {
            return Err(ResolverUnavailable(format!("node error: {err}")));
        }
        let code = parsed
            .result
            .ok_or_else(|| ResolverUnavailable("response has no `result`".to_string()))?;
        let kind = kind_from_code(&code)?;
        let checked_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(KindRecord {
            kind,
            source: KindSource::Live { checked_at },
        })
    }
}

pub fn query_node(
    client: &NodeClient,
    addr: &Address,
) -> Result<KindRecord, ResolverUnavailable> {
    client.query(addr, 1)
}

/// Queries every address the map does not already know, at most `max_in_flight`
/// at a time, and merges the answers. Failures are returned rather than
/// aborting; those addresses simply stay unknown.
pub fn resolve_live(
    map: &mut AddressKindMap,
    client: &NodeClient,
    addresses: &[Address],
    max_in_flight: usize,
) -> Vec<(Address, ResolverUnavailable)> {
    let pending: Vec<Address> = {
        let mut v: Vec<Address> = addresses.iter().copied().filter(|a| !map.contains(a)).collect();
        v.sort();
        v.dedup();
        v
    };
    let mut failures = Vec::new();
    for batch in pending.chunks(max_in_flight.max(1)) {
        let answers: Vec<(Address, Result<KindRecord, ResolverUnavailable>)> =
            std::thread::scope(|s| {
                let handles: Vec<_> = batch
                    .iter()
                    .enumerate()
                    .map(|(i, addr)| {
                        let addr = *addr;
                        s.spawn(move || (addr, client.query(&addr, i as u64 + 1)))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("query thread panicked"))
                    .collect()
            });
        for (addr, answer) in answers {
            match answer {
                Ok(record) => {
                    map.insert_if_absent(addr, record);
                }
                Err(e) => failures.push((addr, e)),
            }
        }
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;

    const EOA: &str = "0x1111111111111111111111111111111111111111";
    const NONPAYABLE: &str = "0x2222222222222222222222222222222222222222";

    #[test]
    fn loads_two_entries() {
        let text = format!("# fixture\n{EOA},eoa\n\n{NONPAYABLE}, contract-nonpayable # trailing\n");
        let map = AddressKindMap::parse_snapshot(&text, "t").unwrap();
        assert_eq!(map.len(), 2);
        assert_eq!(map.kind(&EOA.parse().unwrap()), Some(AddressKind::Eoa));
        assert_eq!(
            map.kind(&NONPAYABLE.parse().unwrap()),
            Some(AddressKind::ContractNonpayable)
        );
    }

    #[test]
    fn empty_file_is_empty_map() {
        assert!(AddressKindMap::parse_snapshot("", "t").unwrap().is_empty());
    }

    #[test]
    fn duplicate_is_reported_at_second_occurrence() {
        let text = format!("{EOA},eoa\n# c\n{EOA},contract-nonpayable\n");
        match AddressKindMap::parse_snapshot(&text, "t") {
            Err(SnapshotError::Duplicate { line, first_line, .. }) => {
                assert_eq!((line, first_line), (3, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines() {
        for (text, bad_line) in [
            (format!("{EOA},eoa\n{NONPAYABLE}\n"), 2),
            (format!("{EOA},wallet\n"), 1),
            ("0x11,eoa\n".to_string(), 1),
            ("0xABCDEF1111111111111111111111111111111111,eoa\n".to_string(), 1),
        ] {
            match AddressKindMap::parse_snapshot(&text, "t") {
                Err(SnapshotError::Malformed { line, .. }) => assert_eq!(line, bad_line, "{text}"),
                other => panic!("unexpected {other:?} for {text}"),
            }
        }
    }

    #[test]
    fn request_body_is_bit_exact() {
        let addr: Address = EOA.parse().unwrap();
        assert_eq!(
            get_code_request_body(&addr, 7),
            r#"{"jsonrpc":"2.0","method":"eth_getCode","params":["0x1111111111111111111111111111111111111111","latest"],"id":7}"#
        );
    }

    #[test]
    fn code_classification() {
        assert_eq!(kind_from_code("0x").unwrap(), AddressKind::Eoa);
        assert_eq!(
            kind_from_code("0x6080604052").unwrap(),
            AddressKind::ContractUnknownPayability
        );
        assert!(kind_from_code("6080").is_err());
        assert!(kind_from_code("0xzz").is_err());
    }

    #[test]
    fn live_answers_do_not_override_snapshot() {
        let addr: Address = EOA.parse().unwrap();
        let mut map = AddressKindMap::parse_snapshot(&format!("{EOA},contract-nonpayable\n"), "t")
            .unwrap();
        let inserted = map.insert_if_absent(
            addr,
            KindRecord {
                kind: AddressKind::Eoa,
                source: KindSource::Live { checked_at: 1 },
            },
        );
        assert!(!inserted);
        assert_eq!(map.kind(&addr), Some(AddressKind::ContractNonpayable));
    }
}
