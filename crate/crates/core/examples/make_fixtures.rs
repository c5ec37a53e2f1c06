//! Regenerates the JSON fixture files under `fixtures/` from the library's
//! built-in networks, protocols, and derivations.
//!
//! Usage: `cargo run -p eaves --example make_fixtures [dir]`

use std::collections::BTreeMap;
use std::path::PathBuf;

use eaves::fixtures;
use eaves::flow::{self, KnowledgeProfile};
use eaves::formula::parse;
use eaves::io::{self, FlowDoc, GraphDoc, ProfileDoc, ProofDoc, ProtocolDoc};
use eaves::multigraph::Multigraph;
use eaves::proofcheck;

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    let dir = PathBuf::from(dir);
    std::fs::create_dir_all(&dir).expect("create fixture directory");
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).expect("write fixture");
        println!("wrote {}", path.display());
    };

    write(
        "fig3.graph.json",
        io::to_json_pretty(&GraphDoc::from_graph(&fixtures::figure3_graph())),
    );

    let p1 = fixtures::p1_protocol(1);
    write(
        "p1.protocol.json",
        io::to_json_pretty(&ProtocolDoc::from_protocol(&p1)),
    );
    let run1: BTreeMap<&str, &str> = [("m", "1"), ("k", "0"), ("c", "1"), ("m'", "1")]
        .into_iter()
        .collect();
    write("p1-run1.run.json", io::to_json_pretty(&run1));

    // The shipped derivations on their home topologies.
    for (sig, wanted) in [
        (fixtures::line3_signature(), vec!["example-1"]),
        (fixtures::line5_signature(), vec!["example-2"]),
        (
            fixtures::figure3_signature(),
            vec![
                "example-3",
                "vee-lemma",
                "second-vee-lemma",
                "pre-xyz",
                "xyz",
            ],
        ),
    ] {
        for named in proofcheck::derive_lemma_fixtures(&sig).expect("fixtures derive") {
            if wanted.contains(&named.name) {
                proofcheck::check_proof(&named.script).expect("shipped script checks");
                write(
                    &format!("{}.proof.json", named.name),
                    io::to_json_pretty(&ProofDoc::from_script(&named.script)),
                );
            }
        }
    }

    // A knowing bridge with a sink on the far side, and its built flow.
    let graph = Multigraph::new(["x", "y", "z"], [("d", "x", "y"), ("e", "y", "z")]).unwrap();
    let mut profile = KnowledgeProfile::new(graph).unwrap();
    profile.set_sink("d", true).unwrap();
    profile.set_knows_delta("e", true).unwrap();
    let toward_y = profile.graph().end_at(&"e".into(), &"y".into()).unwrap();
    profile.set_knows_side(toward_y, true).unwrap();
    write(
        "bridge.profile.json",
        io::to_json_pretty(&ProfileDoc::from_profile(&profile)),
    );
    let built = flow::build_flow(&profile).unwrap();
    write(
        "bridge.flow.json",
        io::to_json_pretty(&FlowDoc::from_flow(&built)),
    );

    // Parse check: the sample formula of the README.
    let sig = fixtures::p1_signature(1);
    parse(&sig, "[m] mp_1").expect("sample formula parses");
}
