//! The JSON files under `fixtures/` are generated by the `make_fixtures`
//! example; these tests keep them in sync with the library constructors.

use std::path::PathBuf;

use eaves::fixtures;
use eaves::io::{self, GraphDoc, ProfileDoc, ProofDoc, ProtocolDoc};
use eaves::proofcheck::check_proof;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

#[test]
fn graph_file_matches_constructor() {
    let doc: GraphDoc = io::read_json(&fixture_path("fig3.graph.json")).unwrap();
    assert_eq!(doc.to_graph().unwrap(), fixtures::figure3_graph());
}

#[test]
fn protocol_file_matches_constructor() {
    let doc: ProtocolDoc = io::read_json(&fixture_path("p1.protocol.json")).unwrap();
    assert_eq!(doc.to_protocol().unwrap(), fixtures::p1_protocol(1));
}

#[test]
fn shipped_proof_files_check() {
    for name in [
        "example-1",
        "example-2",
        "example-3",
        "vee-lemma",
        "second-vee-lemma",
        "pre-xyz",
        "xyz",
    ] {
        let doc: ProofDoc = io::read_json(&fixture_path(&format!("{name}.proof.json"))).unwrap();
        let script = doc.to_script().unwrap();
        check_proof(&script).unwrap_or_else(|r| panic!("{name}: {r}"));
    }
}

#[test]
fn profile_and_flow_files_agree() {
    let doc: ProfileDoc = io::read_json(&fixture_path("bridge.profile.json")).unwrap();
    let profile = doc.to_profile().unwrap();
    let flow_doc: eaves::io::FlowDoc = io::read_json(&fixture_path("bridge.flow.json")).unwrap();
    let flow = flow_doc.to_flow(profile.graph()).unwrap();
    assert_eq!(flow, eaves::flow::build_flow(&profile).unwrap());
}
