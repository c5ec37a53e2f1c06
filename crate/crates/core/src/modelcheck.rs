//! The satisfaction relation over runs of a finite protocol, validity
//! checking, and randomized soundness checking of the axiom schemas.
//!
//! `[e] phi` holds at a run when phi holds at every run with the same value
//! on `e`. Evaluation is bottom-up over subformulas with per-edge
//! equivalence-class memoization: the body of a box is decided once per
//! class, not once per run.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{in_fragment, Formula, PropositionId, Signature};
use crate::multigraph::{EdgeId, Multigraph};
use crate::protocol::{Protocol, ProtocolError, Run};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelCheckError {
    #[error("the given assignment is not a run of the protocol")]
    NotARun,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("unknown proposition `{0}`")]
    UnknownProposition(PropositionId),
    #[error("unknown edge `{0}`")]
    UnknownEdge(EdgeId),
    #[error("malformed schema instance: {0}")]
    MalformedInstance(String),
}

/// Outcome of a validity check over one protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// The first run in enumeration order where the formula fails.
    Counterexample(Run),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// The enumerated runs of one protocol with per-edge indistinguishability
/// classes and a cache of per-formula labels.
pub struct StateSpace {
    protocol: Protocol,
    runs: Vec<Run>,
    /// For each edge: run index -> class index, and class -> member runs.
    class_of: BTreeMap<EdgeId, Vec<usize>>,
    members: BTreeMap<EdgeId, Vec<Vec<usize>>>,
    labels: HashMap<Formula, Rc<Vec<bool>>>,
}

impl StateSpace {
    pub fn new(protocol: &Protocol) -> Result<StateSpace, ModelCheckError> {
        Self::with_cap(protocol, crate::protocol::DEFAULT_STATE_CAP)
    }

    pub fn with_cap(protocol: &Protocol, cap: u128) -> Result<StateSpace, ModelCheckError> {
        let runs = protocol.enumerate_runs_capped(cap)?;
        let mut class_of = BTreeMap::new();
        let mut members = BTreeMap::new();
        for e in protocol.signature().graph().edge_ids() {
            let mut by_value: BTreeMap<&crate::protocol::Value, usize> = BTreeMap::new();
            let mut of = Vec::with_capacity(runs.len());
            let mut mem: Vec<Vec<usize>> = Vec::new();
            for (i, r) in runs.iter().enumerate() {
                let v = &r.values[e];
                let class = *by_value.entry(v).or_insert_with(|| {
                    mem.push(Vec::new());
                    mem.len() - 1
                });
                of.push(class);
                mem[class].push(i);
            }
            class_of.insert(e.clone(), of);
            members.insert(e.clone(), mem);
        }
        Ok(StateSpace {
            protocol: protocol.clone(),
            runs,
            class_of,
            members,
            labels: HashMap::new(),
        })
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn run_index(&self, run: &Run) -> Option<usize> {
        self.runs.iter().position(|r| r == run)
    }

    /// Rejects formulas mentioning propositions or edges outside the
    /// protocol's signature.
    fn check_formula(&self, f: &Formula) -> Result<(), ModelCheckError> {
        match f {
            Formula::Falsum => Ok(()),
            Formula::Prop(p) => {
                if self.protocol.signature().home_of(p).is_none() {
                    Err(ModelCheckError::UnknownProposition(p.clone()))
                } else {
                    Ok(())
                }
            }
            Formula::Implies(a, b) => {
                self.check_formula(a)?;
                self.check_formula(b)
            }
            Formula::Knows(e, a) => {
                if !self.protocol.signature().graph().has_edge(e) {
                    return Err(ModelCheckError::UnknownEdge(e.clone()));
                }
                self.check_formula(a)
            }
        }
    }

    fn eval(&mut self, f: &Formula) -> Rc<Vec<bool>> {
        if let Some(hit) = self.labels.get(f) {
            return hit.clone();
        }
        let n = self.runs.len();
        let result: Vec<bool> = match f {
            Formula::Falsum => vec![false; n],
            Formula::Prop(p) => {
                let home = self
                    .protocol
                    .signature()
                    .home_of(p)
                    .expect("checked")
                    .clone();
                let truthy = self.protocol.valuation(p).cloned().unwrap_or_default();
                self.runs
                    .iter()
                    .map(|r| truthy.contains(&r.values[&home]))
                    .collect()
            }
            Formula::Implies(a, b) => {
                let la = self.eval(a);
                let lb = self.eval(b);
                (0..n).map(|i| !la[i] || lb[i]).collect()
            }
            Formula::Knows(e, body) => {
                let lb = self.eval(body);
                let class_holds: Vec<bool> = self.members[e]
                    .iter()
                    .map(|class| class.iter().all(|&i| lb[i]))
                    .collect();
                let of = &self.class_of[e];
                (0..n).map(|i| class_holds[of[i]]).collect()
            }
        };
        let rc = Rc::new(result);
        self.labels.insert(f.clone(), rc.clone());
        rc
    }

    /// Truth of a formula at one run.
    pub fn satisfies(&mut self, run: &Run, f: &Formula) -> Result<bool, ModelCheckError> {
        self.check_formula(f)?;
        let idx = self.run_index(run).ok_or(ModelCheckError::NotARun)?;
        Ok(self.eval(f)[idx])
    }

    /// Truth at every run; on failure, the first failing run in enumeration
    /// order.
    pub fn check_validity(&mut self, f: &Formula) -> Result<Validity, ModelCheckError> {
        self.check_formula(f)?;
        let labels = self.eval(f);
        match labels.iter().position(|&b| !b) {
            None => Ok(Validity::Valid),
            Some(i) => Ok(Validity::Counterexample(self.runs[i].clone())),
        }
    }
}

/// One-shot satisfaction check; builds the state space internally.
pub fn satisfies(protocol: &Protocol, run: &Run, f: &Formula) -> Result<bool, ModelCheckError> {
    StateSpace::new(protocol)?.satisfies(run, f)
}

/// One-shot validity check over one protocol.
pub fn is_valid(protocol: &Protocol, f: &Formula) -> Result<Validity, ModelCheckError> {
    StateSpace::new(protocol)?.check_validity(f)
}

/// An instantiation of one of the five axiom schemas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomInstance {
    /// `[e] phi -> phi`
    Truth { edge: EdgeId, body: Formula },
    /// `[e] phi -> [e] [e] phi`
    PositiveIntrospection { edge: EdgeId, body: Formula },
    /// `~[e] phi -> [e] ~[e] phi`
    NegativeIntrospection { edge: EdgeId, body: Formula },
    /// `[e](phi -> psi) -> ([e] phi -> [e] psi)`
    Distributivity {
        edge: EdgeId,
        antecedent: Formula,
        consequent: Formula,
    },
    /// `[e](phi -> psi) -> (phi -> [g] psi)` where `e` is in `left`,
    /// `phi` is in `Phi(Sigma,left)`, `psi` is in `Phi(Sigma,right)`, and
    /// `gate` is a gateway between `left` and `right`.
    Gateway {
        edge: EdgeId,
        gate: EdgeId,
        left: BTreeSet<EdgeId>,
        right: BTreeSet<EdgeId>,
        antecedent: Formula,
        consequent: Formula,
    },
}

impl AxiomInstance {
    pub fn name(&self) -> &'static str {
        match self {
            AxiomInstance::Truth { .. } => "truth",
            AxiomInstance::PositiveIntrospection { .. } => "positive-introspection",
            AxiomInstance::NegativeIntrospection { .. } => "negative-introspection",
            AxiomInstance::Distributivity { .. } => "distributivity",
            AxiomInstance::Gateway { .. } => "gateway",
        }
    }

    /// The instantiated formula.
    pub fn formula(&self) -> Formula {
        match self {
            AxiomInstance::Truth { edge, body } => {
                Formula::implies(Formula::knows(edge.clone(), body.clone()), body.clone())
            }
            AxiomInstance::PositiveIntrospection { edge, body } => Formula::implies(
                Formula::knows(edge.clone(), body.clone()),
                Formula::knows(edge.clone(), Formula::knows(edge.clone(), body.clone())),
            ),
            AxiomInstance::NegativeIntrospection { edge, body } => {
                let knows = Formula::knows(edge.clone(), body.clone());
                Formula::implies(
                    Formula::not(knows.clone()),
                    Formula::knows(edge.clone(), Formula::not(knows)),
                )
            }
            AxiomInstance::Distributivity {
                edge,
                antecedent,
                consequent,
            } => Formula::implies(
                Formula::knows(
                    edge.clone(),
                    Formula::implies(antecedent.clone(), consequent.clone()),
                ),
                Formula::implies(
                    Formula::knows(edge.clone(), antecedent.clone()),
                    Formula::knows(edge.clone(), consequent.clone()),
                ),
            ),
            AxiomInstance::Gateway {
                edge,
                gate,
                antecedent,
                consequent,
                ..
            } => Formula::implies(
                Formula::knows(
                    edge.clone(),
                    Formula::implies(antecedent.clone(), consequent.clone()),
                ),
                Formula::implies(
                    antecedent.clone(),
                    Formula::knows(gate.clone(), consequent.clone()),
                ),
            ),
        }
    }

    /// Checks the schema's side conditions against a signature.
    pub fn validate(&self, sig: &Signature) -> Result<(), ModelCheckError> {
        let need_edge = |e: &EdgeId| -> Result<(), ModelCheckError> {
            if sig.graph().has_edge(e) {
                Ok(())
            } else {
                Err(ModelCheckError::UnknownEdge(e.clone()))
            }
        };
        match self {
            AxiomInstance::Truth { edge, .. }
            | AxiomInstance::PositiveIntrospection { edge, .. }
            | AxiomInstance::NegativeIntrospection { edge, .. }
            | AxiomInstance::Distributivity { edge, .. } => need_edge(edge),
            AxiomInstance::Gateway {
                edge,
                gate,
                left,
                right,
                antecedent,
                consequent,
            } => {
                need_edge(edge)?;
                need_edge(gate)?;
                for e in left.iter().chain(right.iter()) {
                    need_edge(e)?;
                }
                if !left.contains(edge) {
                    return Err(ModelCheckError::MalformedInstance(format!(
                        "premise edge `{edge}` is not in the left set"
                    )));
                }
                if !in_fragment(sig, antecedent, left) {
                    return Err(ModelCheckError::MalformedInstance(
                        "antecedent is outside the left fragment".into(),
                    ));
                }
                if !in_fragment(sig, consequent, right) {
                    return Err(ModelCheckError::MalformedInstance(
                        "consequent is outside the right fragment".into(),
                    ));
                }
                let gateway = sig
                    .graph()
                    .is_gateway(gate, left, right)
                    .map_err(|e| ModelCheckError::MalformedInstance(e.to_string()))?;
                if !gateway {
                    return Err(ModelCheckError::MalformedInstance(format!(
                        "`{gate}` is not a gateway between the given sets"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Validates a schema instance and checks it over every run of the protocol.
/// A counterexample is a bug trap: the soundness lemmas say there are none.
pub fn check_axiom_soundness(
    protocol: &Protocol,
    instance: &AxiomInstance,
) -> Result<Validity, ModelCheckError> {
    instance.validate(protocol.signature())?;
    is_valid(protocol, &instance.formula())
}

// ---------------------------------------------------------------------------
// Randomized soundness suite.

/// A reproducible random connected multigraph: a spanning tree plus extra
/// edges, optionally with loops.
pub fn random_connected_graph(
    rng: &mut impl Rng,
    max_vertices: usize,
    max_edges: usize,
    allow_loops: bool,
) -> Multigraph {
    let n = rng.gen_range(2..=max_vertices.max(2));
    let vertices: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut edges: Vec<(String, String, String)> = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((
            format!("e{}", edges.len()),
            vertices[j].clone(),
            vertices[i].clone(),
        ));
    }
    let extra_cap = max_edges.saturating_sub(edges.len());
    let extra = if extra_cap == 0 {
        0
    } else {
        rng.gen_range(0..=extra_cap)
    };
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = loop {
            let b = rng.gen_range(0..n);
            if allow_loops || b != a {
                break b;
            }
        };
        edges.push((
            format!("e{}", edges.len()),
            vertices[a].clone(),
            vertices[b].clone(),
        ));
    }
    Multigraph::new(vertices, edges).expect("generated graph is well formed")
}

/// A random signature over a random connected graph, one proposition per
/// edge.
pub fn random_signature(rng: &mut impl Rng, max_vertices: usize, max_edges: usize) -> Signature {
    let graph = random_connected_graph(rng, max_vertices, max_edges, true);
    let props: Vec<(EdgeId, Vec<String>)> = graph
        .edge_ids()
        .map(|e| (e.clone(), vec![format!("p_{e}")]))
        .collect();
    Signature::new(graph, props).expect("generated signature is well formed")
}

/// A random formula. When `fragment` is given, the outermost modalities and
/// exposed propositions stay inside it, so the result is in
/// `Phi(Sigma, fragment)`.
pub fn random_formula(
    sig: &Signature,
    rng: &mut impl Rng,
    depth: usize,
    fragment: Option<&BTreeSet<EdgeId>>,
) -> Formula {
    let all_edges: Vec<EdgeId> = sig.graph().edge_ids().cloned().collect();
    let scope: Vec<EdgeId> = match fragment {
        Some(t) => t.iter().cloned().collect(),
        None => all_edges.clone(),
    };
    let props: Vec<&PropositionId> = sig
        .propositions()
        .filter(|(_, home)| fragment.is_none_or(|t| t.contains(*home)))
        .map(|(p, _)| p)
        .collect();
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        if !props.is_empty() && rng.gen_bool(0.6) {
            return Formula::Prop((*props.choose(rng).unwrap()).clone());
        }
        if !scope.is_empty() && rng.gen_bool(0.5) {
            // A box keeps the formula in the fragment; its body is free.
            let e = scope.choose(rng).unwrap().clone();
            return Formula::knows(e, Formula::Falsum);
        }
        return Formula::Falsum;
    }
    match rng.gen_range(0..4) {
        0 => Formula::implies(
            random_formula(sig, rng, depth - 1, fragment),
            random_formula(sig, rng, depth - 1, fragment),
        ),
        1 => Formula::not(random_formula(sig, rng, depth - 1, fragment)),
        2 if !scope.is_empty() => {
            let e = scope.choose(rng).unwrap().clone();
            Formula::knows(e, random_formula(sig, rng, depth - 1, None))
        }
        _ => Formula::or(
            random_formula(sig, rng, depth - 1, fragment),
            random_formula(sig, rng, depth - 1, fragment),
        ),
    }
}

/// A random `(gate, left, right)` triple satisfying the gateway condition:
/// subsets are drawn from the two sides of the gate (plus the gate itself),
/// falling back to the always-valid singleton pair.
pub fn random_gateway_triple(
    graph: &Multigraph,
    rng: &mut impl Rng,
) -> (EdgeId, BTreeSet<EdgeId>, BTreeSet<EdgeId>) {
    let edges: Vec<EdgeId> = graph.edge_ids().cloned().collect();
    let gate = edges.choose(rng).unwrap().clone();
    let (u0, u1) = graph.endpoints(&gate).unwrap();
    let (_, side0) = graph.component_without(&u0, &gate).unwrap();
    let (_, side1) = graph.component_without(&u1, &gate).unwrap();
    let pick = |side: &BTreeSet<EdgeId>, rng: &mut dyn rand::RngCore| -> BTreeSet<EdgeId> {
        let mut out: BTreeSet<EdgeId> = side
            .iter()
            .filter(|e| **e != gate && rng.gen_bool(0.5))
            .cloned()
            .collect();
        if rng.gen_bool(0.4) || out.is_empty() {
            out.insert(gate.clone());
        }
        out
    };
    let mut left = pick(&side0, rng);
    let mut right = pick(&side1, rng);
    // For a non-bridge gate the two sides coincide; shrink to a valid pair.
    if !graph.is_gateway(&gate, &left, &right).unwrap() {
        left = BTreeSet::from([gate.clone()]);
        right = BTreeSet::from([edges.choose(rng).unwrap().clone()]);
    }
    debug_assert!(graph.is_gateway(&gate, &left, &right).unwrap());
    (gate, left, right)
}

/// A random well-formed instance of the named schema.
pub fn random_axiom_instance(sig: &Signature, rng: &mut impl Rng, schema: &str) -> AxiomInstance {
    let edges: Vec<EdgeId> = sig.graph().edge_ids().cloned().collect();
    let edge = edges.choose(rng).unwrap().clone();
    match schema {
        "truth" => AxiomInstance::Truth {
            edge,
            body: random_formula(sig, rng, 2, None),
        },
        "positive-introspection" => AxiomInstance::PositiveIntrospection {
            edge,
            body: random_formula(sig, rng, 2, None),
        },
        "negative-introspection" => AxiomInstance::NegativeIntrospection {
            edge,
            body: random_formula(sig, rng, 2, None),
        },
        "distributivity" => AxiomInstance::Distributivity {
            edge,
            antecedent: random_formula(sig, rng, 2, None),
            consequent: random_formula(sig, rng, 2, None),
        },
        "gateway" => {
            let (gate, left, right) = random_gateway_triple(sig.graph(), rng);
            let premise: Vec<&EdgeId> = left.iter().collect();
            let edge = (*premise.choose(rng).unwrap()).clone();
            AxiomInstance::Gateway {
                edge,
                gate,
                antecedent: random_formula(sig, rng, 2, Some(&left)),
                consequent: random_formula(sig, rng, 2, Some(&right)),
                left,
                right,
            }
        }
        other => panic!("unknown schema `{other}`"),
    }
}

pub const SCHEMAS: [&str; 5] = [
    "truth",
    "positive-introspection",
    "negative-introspection",
    "distributivity",
    "gateway",
];

/// Report of a randomized soundness sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzReport {
    pub protocols: usize,
    pub instances: usize,
    /// Any counterexample found (protocol seed, schema, formula, run).
    pub counterexamples: Vec<(u64, String, Formula, Run)>,
}

/// Randomized soundness sweep: seeded random signatures and protocols, with
/// random schema instances checked over every run. Soundness says the
/// counterexample list must come back empty.
pub fn fuzz_soundness(
    seed: u64,
    protocols: usize,
    instances_per_schema: usize,
    max_vertices: usize,
    max_edges: usize,
    max_domain: usize,
) -> Result<FuzzReport, ModelCheckError> {
    let mut counterexamples = Vec::new();
    let mut instances = 0;
    for i in 0..protocols {
        let protocol_seed = seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(protocol_seed);
        let sig = random_signature(&mut rng, max_vertices, max_edges);
        let protocol = crate::protocol::random_protocol(
            &sig,
            rng.gen(),
            crate::protocol::RandomBounds {
                max_domain,
                density: 0.75,
            },
        )?;
        let mut space = StateSpace::new(&protocol)?;
        for schema in SCHEMAS {
            for _ in 0..instances_per_schema {
                let instance = random_axiom_instance(&sig, &mut rng, schema);
                instance.validate(&sig)?;
                instances += 1;
                let formula = instance.formula();
                if let Validity::Counterexample(run) = space.check_validity(&formula)? {
                    counterexamples.push((protocol_seed, schema.to_string(), formula, run));
                }
            }
        }
    }
    Ok(FuzzReport {
        protocols,
        instances,
        counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::parse;
    use crate::protocol::{random_protocol, RandomBounds};

    fn p1_space() -> StateSpace {
        StateSpace::new(&fixtures::p1_protocol(1)).unwrap()
    }

    fn p1_run(space: &StateSpace, m: &str, k: &str) -> Run {
        space
            .runs()
            .iter()
            .find(|r| r.values[&"m".into()] == m.into() && r.values[&"k".into()] == k.into())
            .unwrap()
            .clone()
    }

    #[test]
    fn eavesdropper_on_m_learns_the_output() {
        let mut space = p1_space();
        let r1 = p1_run(&space, "1", "0");
        let sig = space.protocol().signature().clone();
        // Both runs with m=1 deliver m'=1.
        assert!(space
            .satisfies(&r1, &parse(&sig, "[m] mp_1").unwrap())
            .unwrap());
        // The ciphertext alone reveals nothing about m'.
        assert!(!space
            .satisfies(&r1, &parse(&sig, "[c] mp_1").unwrap())
            .unwrap());
        assert!(!space
            .satisfies(&r1, &parse(&sig, "[k] mp_1").unwrap())
            .unwrap());
        // `[e] true` holds everywhere.
        assert!(space
            .satisfies(&r1, &parse(&sig, "[c] true").unwrap())
            .unwrap());
    }

    #[test]
    fn not_a_run_is_rejected() {
        let mut space = p1_space();
        let bad = Run {
            values: [("m", "1"), ("k", "0"), ("c", "0"), ("m'", "1")]
                .map(|(e, v)| (EdgeId::from(e), v.into()))
                .into_iter()
                .collect(),
        };
        assert!(matches!(
            space.satisfies(&bad, &Formula::top()),
            Err(ModelCheckError::NotARun)
        ));
    }

    #[test]
    fn falsum_yields_first_run_as_counterexample() {
        let mut space = p1_space();
        match space.check_validity(&Formula::Falsum).unwrap() {
            Validity::Counterexample(run) => assert_eq!(&run, &space.runs()[0]),
            Validity::Valid => panic!("falsum cannot be valid"),
        }
    }

    #[test]
    fn truth_axiom_is_valid_on_random_protocols() {
        let sig = fixtures::figure3_signature();
        for seed in 0..5 {
            let p = random_protocol(&sig, seed, RandomBounds::default()).unwrap();
            let f = parse(&sig, "[m'] pm' -> pm'").unwrap();
            assert!(is_valid(&p, &f).unwrap().is_valid());
        }
    }

    #[test]
    fn relay_transfer_property_is_valid() {
        // [m][m''] phi -> [m'][m''] phi over the relay topology.
        let sig = fixtures::figure3_signature();
        let f = parse(&sig, "[m] [m''] pm'' -> [m'] [m''] pm''").unwrap();
        for seed in 0..5 {
            let p = random_protocol(&sig, seed, RandomBounds::default()).unwrap();
            assert!(is_valid(&p, &f).unwrap().is_valid(), "seed {seed}");
        }
    }

    #[test]
    fn s5_laws_hold_at_every_run() {
        let sig = fixtures::figure3_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..8 {
            let p = random_protocol(&sig, seed, RandomBounds::default()).unwrap();
            let mut space = StateSpace::new(&p).unwrap();
            let body = random_formula(&sig, &mut rng, 2, None);
            for e in ["m", "k", "m''"] {
                let knows = Formula::knows(e, body.clone());
                let runs = space.runs().to_vec();
                for r in &runs {
                    let kb = space.satisfies(r, &knows).unwrap();
                    if kb {
                        assert!(space.satisfies(r, &body).unwrap());
                        let kk = Formula::knows(e, knows.clone());
                        assert!(space.satisfies(r, &kk).unwrap());
                    } else {
                        let nk = Formula::knows(e, Formula::not(knows.clone()));
                        assert!(space.satisfies(r, &nk).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn agreement_on_fragment_edges_transfers_truth() {
        // Runs agreeing on every edge of F satisfy the same Phi(Sigma,F)
        // formulas.
        let sig = fixtures::figure3_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for seed in 0..6 {
            let p = random_protocol(&sig, seed, RandomBounds::default()).unwrap();
            let mut space = StateSpace::new(&p).unwrap();
            let f_set: BTreeSet<EdgeId> = ["m", "c"].map(EdgeId::from).into_iter().collect();
            let formula = random_formula(&sig, &mut rng, 3, Some(&f_set));
            assert!(in_fragment(&sig, &formula, &f_set));
            let runs = space.runs().to_vec();
            for a in &runs {
                for b in &runs {
                    if f_set.iter().all(|e| a.values[e] == b.values[e]) {
                        assert_eq!(
                            space.satisfies(a, &formula).unwrap(),
                            space.satisfies(b, &formula).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn necessitation_preserves_validity() {
        let sig = fixtures::figure3_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..6 {
            let p = random_protocol(&sig, seed, RandomBounds::default()).unwrap();
            let mut space = StateSpace::new(&p).unwrap();
            for _ in 0..10 {
                let f = random_formula(&sig, &mut rng, 2, None);
                if space.check_validity(&f).unwrap().is_valid() {
                    for e in sig.graph().edge_ids() {
                        let boxed = Formula::knows(e.clone(), f.clone());
                        assert!(space.check_validity(&boxed).unwrap().is_valid());
                    }
                }
            }
        }
    }

    #[test]
    fn axiom_soundness_examples() {
        let sig = fixtures::line3_signature();
        let p = random_protocol(&sig, 2, RandomBounds::default()).unwrap();
        let body = parse(&sig, "pc").unwrap();
        let neg = AxiomInstance::NegativeIntrospection {
            edge: "b".into(),
            body,
        };
        assert!(check_axiom_soundness(&p, &neg).unwrap().is_valid());

        // b is a gateway between {a,b} and {c}.
        let gw = AxiomInstance::Gateway {
            edge: "a".into(),
            gate: "b".into(),
            left: ["a", "b"].map(EdgeId::from).into_iter().collect(),
            right: [EdgeId::from("c")].into_iter().collect(),
            antecedent: parse(&sig, "pa").unwrap(),
            consequent: parse(&sig, "[c] pc").unwrap(),
        };
        assert!(check_axiom_soundness(&p, &gw).unwrap().is_valid());

        // c is not a gateway between {a} and {b}: the path a,w2,b avoids it.
        let bad = AxiomInstance::Gateway {
            edge: "a".into(),
            gate: "c".into(),
            left: [EdgeId::from("a")].into_iter().collect(),
            right: [EdgeId::from("b")].into_iter().collect(),
            antecedent: parse(&sig, "pa").unwrap(),
            consequent: parse(&sig, "pb").unwrap(),
        };
        assert!(matches!(
            check_axiom_soundness(&p, &bad),
            Err(ModelCheckError::MalformedInstance(_))
        ));
    }

    #[test]
    fn small_fuzz_sweep_finds_no_counterexamples() {
        let report = fuzz_soundness(1234, 10, 3, 4, 5, 3).unwrap();
        assert_eq!(report.protocols, 10);
        assert!(report.counterexamples.is_empty());
    }
}
