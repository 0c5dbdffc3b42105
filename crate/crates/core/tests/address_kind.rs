mod common;

use std::io::Write;
use std::time::Duration;

use common::{dead_endpoint, fixture, mock_node};
use sescan::address_kind::{
    get_code_request_body, load_snapshot, query_node, resolve_live, AddressKind, AddressKindMap,
    KindRecord, KindSource, NodeClient, SnapshotError,
};
use sescan::eth_primitives::Address;

fn addr(s: &str) -> Address {
    Address::parse_hex(s).unwrap()
}

const A: &str = "0xa698d9912a146a5561d67aa26ca4c94b5fc1eac2";
const B: &str = "0xcd234a471b72ba2f1ccf0a70fcaba648a5eecd8d";

#[test]
fn loads_a_two_line_snapshot() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "# exported\n{A},contract-nonpayable\n{B},eoa").unwrap();
    let map = load_snapshot(f.path()).unwrap();
    assert_eq!(map.len(), 2);
    assert_eq!(map.kind(&addr(A)), Some(AddressKind::ContractNonpayable));
    assert_eq!(map.kind(&addr(B)), Some(AddressKind::Eoa));
    assert_eq!(map.get(&addr(B)).unwrap().source, KindSource::Snapshot);
}

#[test]
fn empty_snapshot_is_an_empty_map() {
    let f = tempfile::NamedTempFile::new().unwrap();
    assert!(load_snapshot(f.path()).unwrap().is_empty());
}

#[test]
fn duplicate_address_names_the_second_line() {
    let text = format!("{A},eoa\n\n{A},contract-payable\n");
    match AddressKindMap::parse_snapshot(&text, "t") {
        Err(SnapshotError::Duplicate { line, first_line, .. }) => {
            assert_eq!((line, first_line), (3, 1));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_and_unknown_kind_lines_are_rejected() {
    for (text, bad_line) in [
        (format!("{A},eoa\n{B}\n"), 2),
        (format!("{A},smart\n"), 1),
        ("0x1234,eoa\n".to_string(), 1),
    ] {
        match AddressKindMap::parse_snapshot(&text, "t") {
            Err(SnapshotError::Malformed { line, .. }) => assert_eq!(line, bad_line, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    assert!(load_snapshot(&fixture("no-such-file.csv")).is_err());
}

#[test]
fn bundled_snapshots_load() {
    assert_eq!(load_snapshot(&fixture("snapshot.csv")).unwrap().kind(&addr(A)), Some(AddressKind::ContractNonpayable));
    assert_eq!(load_snapshot(&fixture("snapshot_dormant.csv")).unwrap().kind(&addr(B)), Some(AddressKind::Eoa));
}

#[test]
fn request_body_is_bit_exact_on_the_wire() {
    let node = mock_node("0x");
    let client = NodeClient::new(&node.url, Duration::from_secs(5));
    let rec = query_node(&client, &addr(B)).unwrap();
    assert_eq!(rec.kind, AddressKind::Eoa);
    assert!(matches!(rec.source, KindSource::Live { .. }));
    let bodies = node.bodies.lock().unwrap();
    assert_eq!(
        bodies[0],
        format!(r#"{{"jsonrpc":"2.0","method":"eth_getCode","params":["{B}","latest"],"id":1}}"#)
    );
    assert_eq!(bodies[0], get_code_request_body(&addr(B), 1));
}

#[test]
fn non_empty_code_is_a_contract_of_unknown_payability() {
    let node = mock_node("0x6080604052");
    let client = NodeClient::new(&node.url, Duration::from_secs(5));
    assert_eq!(query_node(&client, &addr(A)).unwrap().kind, AddressKind::ContractUnknownPayability);
}

#[test]
fn unreachable_node_is_resolver_unavailable() {
    let client = NodeClient::new(&dead_endpoint(), Duration::from_secs(2));
    assert!(query_node(&client, &addr(A)).is_err());

    let mut map = AddressKindMap::new("t");
    let failures = resolve_live(&mut map, &client, &[addr(A), addr(B)], 4);
    assert_eq!(failures.len(), 2);
    assert!(map.is_empty());
}

#[test]
fn live_answers_never_override_the_snapshot() {
    let node = mock_node("0x");
    let client = NodeClient::new(&node.url, Duration::from_secs(5));
    let mut map = load_snapshot(&fixture("snapshot.csv")).unwrap();
    let failures = resolve_live(&mut map, &client, &[addr(A), addr(B), addr(B)], 2);
    assert!(failures.is_empty());
    assert_eq!(map.kind(&addr(A)), Some(AddressKind::ContractNonpayable));
    assert_eq!(map.kind(&addr(B)), Some(AddressKind::Eoa));
    assert_eq!(node.bodies.lock().unwrap().len(), 1);
    assert!(!map.insert_if_absent(addr(A), KindRecord { kind: AddressKind::Eoa, source: KindSource::Snapshot }));
}
