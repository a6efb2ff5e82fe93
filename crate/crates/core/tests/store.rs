use netrca_core::faultlab::{generate_scenario, ScenarioKind, ScenarioSpec};
use netrca_core::topology::{
    load_snapshot, load_truth, parse_snapshot, serialize_snapshot, truth_path_for, validate_store,
    write_entry, TopologyError,
};

fn populated_store() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for kind in ScenarioKind::ALL {
        let out = generate_scenario(&ScenarioSpec::default_for(kind, 5)).unwrap();
        write_entry(dir.path(), kind.slug(), &out.snapshot, Some(&out.truth)).unwrap();
    }
    dir
}

#[test]
fn store_lists_every_entry_and_rejects_corrupt_files() {
    let dir = populated_store();
    let corrupt = dir
        .path()
        .join("vista-hybrid-multicloud")
        .join("truncated.json");
    std::fs::write(&corrupt, b"{\"topology_id\": \"x\", \"layers\": [").unwrap();

    let listing = validate_store(dir.path()).unwrap();
    assert_eq!(listing.entries.len(), 8);
    assert!(listing.entries.iter().all(|e| e.has_truth));
    assert!(listing
        .entries
        .iter()
        .any(|e| e.id == "aiml-datacenter/switch-congestion"));
    assert_eq!(listing.rejected.len(), 1);
    assert_eq!(listing.rejected[0].path, corrupt);
    assert!(
        listing.rejected[0].reason.contains("line"),
        "{}",
        listing.rejected[0].reason
    );
}

#[test]
fn entries_round_trip_through_disk() {
    let dir = populated_store();
    for entry in validate_store(dir.path()).unwrap().entries {
        let snapshot = load_snapshot(&entry.path).unwrap();
        let truth = load_truth(&truth_path_for(&entry.path)).unwrap();
        assert_eq!(
            std::fs::read(&entry.path).unwrap(),
            serialize_snapshot(&snapshot)
        );
        assert!(snapshot.node(&truth.fault_node).is_some());
    }
}

#[test]
fn truth_that_does_not_match_its_snapshot_is_rejected() {
    let dir = populated_store();
    let path = dir
        .path()
        .join("aiml-datacenter")
        .join("switch-congestion.truth.json");
    let mut truth: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    truth["fault_node"] = "no-such-node".into();
    std::fs::write(&path, truth.to_string()).unwrap();

    let listing = validate_store(dir.path()).unwrap();
    let entry = listing
        .entries
        .iter()
        .find(|e| e.id.ends_with("switch-congestion"))
        .unwrap();
    assert!(!entry.has_truth);
    assert!(listing.rejected.iter().any(|r| r.path == path));
}

#[test]
fn missing_store_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = validate_store(&dir.path().join("absent")).unwrap_err();
    assert!(matches!(err, TopologyError::Io { .. }));
}

#[test]
fn invariant_violations_name_the_rule() {
    let out = generate_scenario(&ScenarioSpec::default_for(ScenarioKind::TgwBlackhole, 1)).unwrap();
    let mut doc: serde_json::Value =
        serde_json::from_slice(&serialize_snapshot(&out.snapshot)).unwrap();
    let first = doc["nodes"][0]["id"].clone();
    doc["nodes"][1]["id"] = first;
    let err = parse_snapshot(doc.to_string().as_bytes()).unwrap_err();
    assert!(err.rule().is_some(), "{err}");
}
