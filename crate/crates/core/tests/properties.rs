//! Property tests: printer/parser inversion, gateway decisions against a
//! brute-force path enumerator, bridge/component structure, run enumeration
//! against an independent filter, and clausal-form equivalence.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;

use eaves::fixtures;
use eaves::formula::{in_fragment, is_tautology, parse, to_edge_clausal, Formula, Signature};
use eaves::modelcheck::random_connected_graph;
use eaves::multigraph::{EdgeId, Multigraph, VertexId};
use eaves::protocol::{random_protocol, RandomBounds};

// ---------------------------------------------------------------------------
// Formula strategies over the fixed relay signature.

fn formula_strategy(sig: &Signature) -> impl Strategy<Value = Formula> {
    let props: Vec<String> = sig.propositions().map(|(p, _)| p.0.clone()).collect();
    let edges: Vec<String> = sig.graph().edge_ids().map(|e| e.0.clone()).collect();
    let leaf = prop_oneof![
        Just(Formula::Falsum),
        proptest::sample::select(props).prop_map(Formula::prop),
    ];
    leaf.prop_recursive(4, 24, 3, move |inner| {
        let edges = edges.clone();
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (proptest::sample::select(edges), inner.clone())
                .prop_map(|(e, a)| Formula::knows(e, a)),
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_identity(f in formula_strategy(&fixtures::figure3_signature())) {
        let sig = fixtures::figure3_signature();
        let printed = f.to_string();
        let reparsed = parse(&sig, &printed).unwrap();
        prop_assert_eq!(f, reparsed, "printed as {}", printed);
    }

    #[test]
    fn clausal_form_is_equivalent_and_edge_local(
        f in formula_strategy(&fixtures::figure3_signature())
    ) {
        let sig = fixtures::figure3_signature();
        match to_edge_clausal(&sig, &f) {
            Ok(form) => {
                for clause in &form.clauses {
                    for (edge, entry) in clause {
                        prop_assert!(in_fragment(&sig, entry, &BTreeSet::from([edge.clone()])));
                    }
                }
                let check = Formula::iff(f, form.to_formula());
                prop_assert!(is_tautology(&sig, &check).unwrap());
            }
            // Deep random formulas may exceed the atom cap; that is the
            // documented contract, not a failure.
            Err(eaves::formula::FormulaError::TooManyAtoms { .. }) => {}
            Err(other) => return Err(TestCaseError::fail(other.to_string())),
        }
    }
}

// ---------------------------------------------------------------------------
// Gateway decisions against brute-force path enumeration.

/// Every path of the graph: sequences of pairwise distinct edges with
/// pairwise distinct interior vertices, where consecutive edges share the
/// listed vertex. Single-edge sequences are paths.
fn all_paths(graph: &Multigraph) -> Vec<Vec<EdgeId>> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<EdgeId>, Vec<VertexId>, VertexId)> = Vec::new();
    for e in graph.edge_ids() {
        out.push(vec![e.clone()]);
        let (a, b) = graph.endpoints(e).unwrap();
        for open_end in [a.clone(), b.clone()] {
            stack.push((vec![e.clone()], Vec::new(), open_end));
        }
    }
    while let Some((edges, interior, open)) = stack.pop() {
        for f in graph.incident_edges(&open).unwrap() {
            if edges.contains(f) || interior.contains(&open) {
                continue;
            }
            let (a, b) = graph.endpoints(f).unwrap();
            let far = if a == open { b } else { a };
            let mut new_edges = edges.clone();
            new_edges.push(f.clone());
            let mut new_interior = interior.clone();
            new_interior.push(open.clone());
            out.push(new_edges.clone());
            if far != open {
                stack.push((new_edges, new_interior, far));
            }
        }
    }
    out
}

/// The gateway definition verbatim: every path from an A-edge to a B-edge
/// contains the gate. Paths read in either direction, so both orientations
/// of each enumerated sequence count.
fn gateway_by_enumeration(
    graph: &Multigraph,
    gate: &EdgeId,
    a: &BTreeSet<EdgeId>,
    b: &BTreeSet<EdgeId>,
) -> bool {
    for path in all_paths(graph) {
        let first = path.first().unwrap();
        let last = path.last().unwrap();
        let forward = a.contains(first) && b.contains(last);
        let backward = a.contains(last) && b.contains(first);
        if (forward || backward) && !path.contains(gate) {
            return false;
        }
    }
    true
}

fn subset_of(edges: &[EdgeId], mask: u32) -> BTreeSet<EdgeId> {
    edges
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, e)| e.clone())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gateway_decision_matches_path_enumeration(
        seed in 0u64..10_000,
        gate_pick in 0usize..64,
        a_mask in 0u32..64,
        b_mask in 0u32..64,
    ) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let graph = random_connected_graph(&mut rng, 4, 6, true);
        let edges: Vec<EdgeId> = graph.edge_ids().cloned().collect();
        let gate = &edges[gate_pick % edges.len()];
        let a = subset_of(&edges, a_mask);
        let b = subset_of(&edges, b_mask);
        let fast = graph.is_gateway(gate, &a, &b).unwrap();
        let slow = gateway_by_enumeration(&graph, gate, &a, &b);
        prop_assert_eq!(fast, slow, "graph {:?} gate {} A {:?} B {:?}", graph, gate, a, b);
    }

    #[test]
    fn bridge_deletion_splits_the_vertex_set(seed in 0u64..10_000) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let graph = random_connected_graph(&mut rng, 5, 7, true);
        let bridges = graph.bridges().unwrap();
        let all: BTreeSet<VertexId> = graph.vertices().cloned().collect();
        for e in graph.edge_ids() {
            let (u, w) = graph.endpoints(e).unwrap();
            if u == w {
                prop_assert!(!bridges.contains(e), "loop {} reported as bridge", e);
                continue;
            }
            let (cu, _) = graph.component_without(&u, e).unwrap();
            let (cw, _) = graph.component_without(&w, e).unwrap();
            if bridges.contains(e) {
                prop_assert!(cu.is_disjoint(&cw));
                let union: BTreeSet<VertexId> = cu.union(&cw).cloned().collect();
                prop_assert_eq!(union, all.clone());
            } else {
                prop_assert_eq!(cu, cw);
            }
        }
    }

    #[test]
    fn cycles_through_non_bridges_validate(seed in 0u64..10_000) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let graph = random_connected_graph(&mut rng, 5, 7, true);
        let bridges = graph.bridges().unwrap();
        for e in graph.edge_ids() {
            match graph.find_cycle_through(e) {
                Ok(cycle) => {
                    prop_assert!(!bridges.contains(e));
                    prop_assert!(cycle.circular);
                    cycle.validate(&graph).unwrap();
                    prop_assert_eq!(cycle.edges.first(), Some(e));
                    prop_assert_eq!(cycle.edges.last(), Some(e));
                }
                Err(_) => prop_assert!(bridges.contains(e)),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Run enumeration against an independent filter.

#[test]
fn enumeration_agrees_with_direct_filtering() {
    use eaves::protocol::ValueTuple;
    let sig = fixtures::figure3_signature();
    for seed in 0..6 {
        let protocol = random_protocol(
            &sig,
            seed,
            RandomBounds {
                max_domain: 2,
                density: 0.7,
            },
        )
        .unwrap();
        let runs = protocol.enumerate_runs().unwrap();
        // Independent check: rebuild the full product and test every local
        // relation directly.
        let edges: Vec<&EdgeId> = protocol.domains().keys().collect();
        let mut counters = vec![0usize; edges.len()];
        let mut expected = Vec::new();
        'outer: loop {
            let tuple: ValueTuple = edges
                .iter()
                .zip(&counters)
                .map(|(e, &i)| ((*e).clone(), protocol.domain(e)[i].clone()))
                .collect();
            let good =
                protocol
                    .signature()
                    .graph()
                    .vertices()
                    .all(|v| match protocol.locals().get(v) {
                        None => true,
                        Some(allowed) => {
                            let inc = protocol.signature().graph().incident_edges(v).unwrap();
                            let restriction: ValueTuple =
                                inc.iter().map(|e| (e.clone(), tuple[e].clone())).collect();
                            allowed.contains(&restriction)
                        }
                    });
            if good {
                expected.push(tuple);
            }
            for pos in (0..edges.len()).rev() {
                counters[pos] += 1;
                if counters[pos] < protocol.domain(edges[pos]).len() {
                    continue 'outer;
                }
                counters[pos] = 0;
            }
            break;
        }
        let got: Vec<ValueTuple> = runs.into_iter().map(|r| r.values).collect();
        assert_eq!(got, expected, "seed {seed}");
    }
}

// ---------------------------------------------------------------------------
// Rerouting against targets drawn from independently verified flows.

#[test]
fn rerouting_to_scaled_targets_is_exact_everywhere() {
    use eaves::flow::{
        build_flow, random_profile, reroute_to_match, scale_flow, verify_flow, FlowError,
        Rational,
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let factors = [
        Rational::new(1.into(), 2.into()),
        Rational::new(3.into(), 1.into()),
        Rational::new(7.into(), 5.into()),
    ];
    let mut checked = 0;
    for _ in 0..60 {
        let graph = random_connected_graph(&mut rng, 5, 6, false);
        let profile = random_profile(&graph, &mut rng).unwrap();
        let flow = match build_flow(&profile) {
            Ok(f) => f,
            Err(FlowError::InconsistentProfile { .. }) => continue,
            Err(other) => panic!("unexpected failure: {other}"),
        };
        let everything: BTreeSet<EdgeId> = graph.edge_ids().cloned().collect();
        for factor in &factors {
            // A scaled copy verifies, so its per-edge values are legitimate
            // targets; rerouting must reproduce them exactly and stay valid.
            let scaled = scale_flow(&flow, factor).unwrap();
            for h in graph.edge_ids() {
                let [n0, n1] = graph.ends(h).unwrap();
                let target = (scaled.get(&n0).clone(), scaled.get(&n1).clone());
                let out = reroute_to_match(&profile, &flow, h, target.clone())
                    .unwrap_or_else(|e| panic!("reroute {h} by {factor}: {e}"));
                assert_eq!(*out.get(&n0), target.0);
                assert_eq!(*out.get(&n1), target.1);
                let report = verify_flow(&profile, &out, &everything).unwrap();
                assert!(report.is_empty(), "edge {h} factor {factor}: {report:?}");
                checked += 1;
            }
        }
    }
    assert!(checked > 100, "only {checked} reroutes exercised");
}

// ---------------------------------------------------------------------------
// Agreement on a fragment's edges transfers truth, over random signatures,
// edge sets, and formulas.

#[test]
fn fragment_agreement_transfers_truth_on_random_signatures() {
    use eaves::modelcheck::{random_formula, random_signature, StateSpace};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(515);
    for _ in 0..25 {
        let sig = random_signature(&mut rng, 4, 4);
        let protocol = match random_protocol(
            &sig,
            rand::Rng::gen(&mut rng),
            RandomBounds { max_domain: 3, density: 0.8 },
        ) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let mut space = StateSpace::new(&protocol).unwrap();
        let edges: Vec<EdgeId> = sig.graph().edge_ids().cloned().collect();
        let f_set: BTreeSet<EdgeId> = edges
            .iter()
            .filter(|_| rand::Rng::gen_bool(&mut rng, 0.5))
            .cloned()
            .collect();
        let formula = random_formula(&sig, &mut rng, 3, Some(&f_set));
        assert!(in_fragment(&sig, &formula, &f_set));
        let runs = space.runs().to_vec();
        for a in &runs {
            for b in &runs {
                if f_set.iter().all(|e| a.values[e] == b.values[e]) {
                    assert_eq!(
                        space.satisfies(a, &formula).unwrap(),
                        space.satisfies(b, &formula).unwrap(),
                        "formula {formula} disagrees on agreeing runs"
                    );
                }
            }
        }
    }
}
