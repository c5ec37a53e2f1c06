//! Finite protocols over a signature: a finite value domain per edge, an
//! explicit local-condition relation per vertex, and a valuation mapping each
//! proposition to the edge values that make it true. A run is a total
//! assignment of in-domain values satisfying every local condition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{PropositionId, Signature};
use crate::multigraph::{EdgeId, VertexId};

/// An opaque channel value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Value(pub String);

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl<T: Into<String>> From<T> for Value {
    fn from(s: T) -> Self {
        Value(s.into())
    }
}

/// A tuple of values over some edge set, keyed by edge id.
pub type ValueTuple = BTreeMap<EdgeId, Value>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("edge `{0}` has no declared domain")]
    MissingDomain(EdgeId),
    #[error("domain of edge `{0}` must be nonempty")]
    EmptyDomain(EdgeId),
    #[error("value `{value}` is outside the domain of edge `{edge}`")]
    DomainViolation { edge: EdgeId, value: Value },
    #[error("local tuple at vertex `{vertex}` must assign exactly the incident edges")]
    LocalTupleMismatch { vertex: VertexId },
    #[error("valuation of `{prop}` contains `{value}`, outside its home edge's domain")]
    ValuationOutOfDomain { prop: PropositionId, value: Value },
    #[error("assignment does not cover exactly the edge set")]
    IncompleteAssignment,
    #[error("state space of {size} tuples exceeds the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },
    #[error("no random protocol with at least one run found after {0} attempts")]
    NoRunFound(usize),
}

/// Default cap on enumerated state spaces.
pub const DEFAULT_STATE_CAP: u128 = 1 << 22;

/// A finite protocol. Local conditions are explicit finite relations: the
/// set of allowed value tuples over each vertex's incident edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protocol {
    sig: Signature,
    domains: BTreeMap<EdgeId, Vec<Value>>,
    locals: BTreeMap<VertexId, BTreeSet<ValueTuple>>,
    valuation: BTreeMap<PropositionId, BTreeSet<Value>>,
}

/// A run: a total in-domain assignment satisfying every local condition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Run {
    pub values: ValueTuple,
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .values
            .iter()
            .map(|(e, v)| format!("{e}={v}"))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

impl Protocol {
    /// Builds a protocol, checking that every edge has a nonempty domain,
    /// every local tuple assigns exactly the incident edges with in-domain
    /// values, and every proposition's valuation stays inside its home
    /// edge's domain. Vertices without an explicit local relation are
    /// unconstrained.
    pub fn new(
        sig: Signature,
        domains: BTreeMap<EdgeId, Vec<Value>>,
        locals: BTreeMap<VertexId, BTreeSet<ValueTuple>>,
        valuation: BTreeMap<PropositionId, BTreeSet<Value>>,
    ) -> Result<Protocol, ProtocolError> {
        for e in sig.graph().edge_ids() {
            let dom = domains
                .get(e)
                .ok_or_else(|| ProtocolError::MissingDomain(e.clone()))?;
            if dom.is_empty() {
                return Err(ProtocolError::EmptyDomain(e.clone()));
            }
        }
        for (v, tuples) in &locals {
            let inc = sig
                .graph()
                .incident_edges(v)
                .map_err(|_| ProtocolError::LocalTupleMismatch { vertex: v.clone() })?;
            for tuple in tuples {
                if tuple.len() != inc.len() || !tuple.keys().all(|e| inc.contains(e)) {
                    return Err(ProtocolError::LocalTupleMismatch { vertex: v.clone() });
                }
                for (e, val) in tuple {
                    if !domains[e].contains(val) {
                        return Err(ProtocolError::DomainViolation {
                            edge: e.clone(),
                            value: val.clone(),
                        });
                    }
                }
            }
        }
        for (p, values) in &valuation {
            let home = sig.home_of(p).expect("valuation key declared in signature");
            for val in values {
                if !domains[home].contains(val) {
                    return Err(ProtocolError::ValuationOutOfDomain {
                        prop: p.clone(),
                        value: val.clone(),
                    });
                }
            }
        }
        Ok(Protocol {
            sig,
            domains,
            locals,
            valuation,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn domain(&self, e: &EdgeId) -> &[Value] {
        &self.domains[e]
    }

    pub fn domains(&self) -> &BTreeMap<EdgeId, Vec<Value>> {
        &self.domains
    }

    pub fn locals(&self) -> &BTreeMap<VertexId, BTreeSet<ValueTuple>> {
        &self.locals
    }

    /// The set of values making a proposition true (empty if never true).
    pub fn valuation(&self, p: &PropositionId) -> Option<&BTreeSet<Value>> {
        self.valuation.get(p)
    }

    pub fn valuations(&self) -> &BTreeMap<PropositionId, BTreeSet<Value>> {
        &self.valuation
    }

    /// The number of total in-domain tuples.
    pub fn state_space_size(&self) -> u128 {
        self.domains.values().map(|d| d.len() as u128).product()
    }

    /// Whether a total in-domain assignment satisfies every vertex's local
    /// condition.
    pub fn is_run(&self, tuple: &ValueTuple) -> Result<bool, ProtocolError> {
        let edges: BTreeSet<_> = self.sig.graph().edge_ids().cloned().collect();
        if tuple.len() != edges.len() || !tuple.keys().all(|e| edges.contains(e)) {
            return Err(ProtocolError::IncompleteAssignment);
        }
        for (e, v) in tuple {
            if !self.domains[e].contains(v) {
                return Err(ProtocolError::DomainViolation {
                    edge: e.clone(),
                    value: v.clone(),
                });
            }
        }
        for v in self.sig.graph().vertices() {
            let Some(allowed) = self.locals.get(v) else {
                continue;
            };
            let restriction: ValueTuple = self
                .sig
                .graph()
                .incident_edges(v)
                .unwrap()
                .iter()
                .map(|e| (e.clone(), tuple[e].clone()))
                .collect();
            if !allowed.contains(&restriction) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// All runs, in lexicographic order over the edge-id-sorted value tuples
    /// (edges sorted by id, values in domain order).
    pub fn enumerate_runs(&self) -> Result<Vec<Run>, ProtocolError> {
        self.enumerate_runs_capped(DEFAULT_STATE_CAP)
    }

    pub fn enumerate_runs_capped(&self, cap: u128) -> Result<Vec<Run>, ProtocolError> {
        let size = self.state_space_size();
        if size > cap {
            return Err(ProtocolError::StateSpaceTooLarge { size, cap });
        }
        let edges: Vec<&EdgeId> = self.domains.keys().collect();
        let mut runs = Vec::new();
        let mut counters = vec![0usize; edges.len()];
        'outer: loop {
            let tuple: ValueTuple = edges
                .iter()
                .zip(&counters)
                .map(|(e, &i)| ((*e).clone(), self.domains[*e][i].clone()))
                .collect();
            if self.is_run(&tuple)? {
                runs.push(Run { values: tuple });
            }
            // Odometer step, last edge fastest.
            for pos in (0..edges.len()).rev() {
                counters[pos] += 1;
                if counters[pos] < self.domains[edges[pos]].len() {
                    continue 'outer;
                }
                counters[pos] = 0;
            }
            break;
        }
        Ok(runs)
    }
}

/// Whether two runs agree on edge `e` (the indistinguishability relation of
/// an eavesdropper on `e`).
pub fn runs_equal_on(r: &Run, r2: &Run, e: &EdgeId) -> bool {
    r.values.get(e) == r2.values.get(e)
}

/// Size and density bounds for random protocol generation.
#[derive(Debug, Clone, Copy)]
pub struct RandomBounds {
    /// Largest domain size per edge (at least 1).
    pub max_domain: usize,
    /// Fraction of each vertex's full product kept as its local relation.
    pub density: f64,
}

impl Default for RandomBounds {
    fn default() -> Self {
        RandomBounds {
            max_domain: 3,
            density: 0.75,
        }
    }
}

/// Reproducible pseudo-random protocol over a signature. Domains get up to
/// `max_domain` values, each vertex keeps a `density` fraction of its full
/// product as the local relation, and the valuation is a random subset of
/// each home domain. Resamples until at least one run exists, up to 100
/// attempts.
pub fn random_protocol(
    sig: &Signature,
    seed: u64,
    bounds: RandomBounds,
) -> Result<Protocol, ProtocolError> {
    const ATTEMPTS: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ATTEMPTS {
        let mut domains = BTreeMap::new();
        for e in sig.graph().edge_ids() {
            let size = rng.gen_range(1..=bounds.max_domain.max(1));
            let values: Vec<Value> = (0..size).map(|i| Value(format!("v{i}"))).collect();
            domains.insert(e.clone(), values);
        }
        let mut locals = BTreeMap::new();
        for v in sig.graph().vertices() {
            let inc: Vec<&EdgeId> = sig.graph().incident_edges(v).unwrap().iter().collect();
            let mut kept = BTreeSet::new();
            let mut counters = vec![0usize; inc.len()];
            'product: loop {
                if bounds.density >= 1.0 || rng.gen_bool(bounds.density.clamp(0.0, 1.0)) {
                    let tuple: ValueTuple = inc
                        .iter()
                        .zip(&counters)
                        .map(|(e, &i)| ((*e).clone(), domains[*e][i].clone()))
                        .collect();
                    kept.insert(tuple);
                }
                for pos in (0..inc.len()).rev() {
                    counters[pos] += 1;
                    if counters[pos] < domains[inc[pos]].len() {
                        continue 'product;
                    }
                    counters[pos] = 0;
                }
                break;
            }
            locals.insert(v.clone(), kept);
        }
        let mut valuation = BTreeMap::new();
        for (p, home) in sig.propositions() {
            let dom = &domains[home];
            let subset: BTreeSet<Value> =
                dom.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            valuation.insert(p.clone(), subset);
        }
        let protocol = Protocol::new(sig.clone(), domains, locals, valuation)?;
        if !protocol.enumerate_runs()?.is_empty() {
            return Ok(protocol);
        }
    }
    Err(ProtocolError::NoRunFound(ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn tuple(pairs: &[(&str, &str)]) -> ValueTuple {
        pairs
            .iter()
            .map(|(e, v)| (EdgeId::from(*e), Value::from(*v)))
            .collect()
    }

    #[test]
    fn one_bit_relay_runs() {
        let p = fixtures::p1_protocol(1);
        // c = m xor k at q and m' = c xor k at u.
        assert!(p
            .is_run(&tuple(&[("m", "1"), ("k", "0"), ("c", "1"), ("m'", "1")]))
            .unwrap());
        assert!(!p
            .is_run(&tuple(&[("m", "1"), ("k", "0"), ("c", "0"), ("m'", "1")]))
            .unwrap());
        let runs = p.enumerate_runs().unwrap();
        assert_eq!(runs.len(), 4);
        // Every element enumerated is a run; nothing outside the list is.
        let mut found = 0;
        for m in ["0", "1"] {
            for k in ["0", "1"] {
                for c in ["0", "1"] {
                    for mp in ["0", "1"] {
                        let t = tuple(&[("m", m), ("k", k), ("c", c), ("m'", mp)]);
                        let in_list = runs.iter().any(|r| r.values == t);
                        // Independent check of the two parity conditions.
                        let xor = |a: &str, b: &str| if a == b { "0" } else { "1" };
                        let expected = c == xor(m, k) && mp == xor(c, k);
                        assert_eq!(in_list, expected);
                        found += in_list as usize;
                    }
                }
            }
        }
        assert_eq!(found, 4);
    }

    #[test]
    fn permissive_locals_accept_everything() {
        let p = fixtures::p1_protocol(1);
        let free = Protocol::new(
            p.signature().clone(),
            p.domains().clone(),
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(free
            .is_run(&tuple(&[("m", "1"), ("k", "0"), ("c", "0"), ("m'", "1")]))
            .unwrap());
        assert_eq!(free.enumerate_runs().unwrap().len(), 16);
    }

    #[test]
    fn unsatisfiable_local_yields_no_runs() {
        let p = fixtures::p1_protocol(1);
        let mut locals = p.locals().clone();
        locals.insert("p".into(), BTreeSet::new());
        let dead = Protocol::new(
            p.signature().clone(),
            p.domains().clone(),
            locals,
            BTreeMap::new(),
        )
        .unwrap();
        assert!(dead.enumerate_runs().unwrap().is_empty());
    }

    #[test]
    fn single_edge_protocol() {
        let sig = crate::formula::Signature::bare(
            crate::multigraph::Multigraph::new(["a", "b"], [("e", "a", "b")]).unwrap(),
        )
        .unwrap();
        let domains = BTreeMap::from([("e".into(), vec![Value::from("0"), Value::from("1")])]);
        let p = Protocol::new(sig, domains, BTreeMap::new(), BTreeMap::new()).unwrap();
        assert_eq!(p.enumerate_runs().unwrap().len(), 2);
    }

    #[test]
    fn valuation_outside_domain_is_rejected() {
        let p = fixtures::p1_protocol(1);
        let mut valuation = p.valuations().clone();
        valuation.insert("mp_1".into(), BTreeSet::from([Value::from("7")]));
        assert!(matches!(
            Protocol::new(
                p.signature().clone(),
                p.domains().clone(),
                p.locals().clone(),
                valuation
            ),
            Err(ProtocolError::ValuationOutOfDomain { .. })
        ));
    }

    #[test]
    fn domain_violation_is_an_error() {
        let p = fixtures::p1_protocol(1);
        assert!(matches!(
            p.is_run(&tuple(&[("m", "2"), ("k", "0"), ("c", "0"), ("m'", "0")])),
            Err(ProtocolError::DomainViolation { .. })
        ));
    }

    #[test]
    fn enumeration_order_is_lexicographic() {
        let p = fixtures::p1_protocol(1);
        let runs = p.enumerate_runs().unwrap();
        let mut sorted = runs.clone();
        sorted.sort();
        assert_eq!(runs, sorted);
    }

    #[test]
    fn indistinguishability_is_an_equivalence() {
        let p = fixtures::p1_protocol(1);
        let runs = p.enumerate_runs().unwrap();
        let e = EdgeId::from("m");
        for r in &runs {
            assert!(runs_equal_on(r, r, &e));
            for r2 in &runs {
                assert_eq!(runs_equal_on(r, r2, &e), runs_equal_on(r2, r, &e));
                for r3 in &runs {
                    if runs_equal_on(r, r2, &e) && runs_equal_on(r2, r3, &e) {
                        assert!(runs_equal_on(r, r3, &e));
                    }
                }
            }
        }
        let a = &runs
            .iter()
            .find(|r| r.values[&"m".into()] == "1".into())
            .unwrap();
        let b = &runs
            .iter()
            .find(|r| r.values[&"m".into()] == "1".into() && r.values[&"k".into()] == "1".into())
            .unwrap();
        assert!(runs_equal_on(a, b, &"m".into()));
    }

    #[test]
    fn random_protocol_is_deterministic_and_has_runs() {
        let sig = fixtures::figure3_signature();
        let bounds = RandomBounds {
            max_domain: 3,
            density: 0.8,
        };
        let a = random_protocol(&sig, 7, bounds).unwrap();
        let b = random_protocol(&sig, 7, bounds).unwrap();
        assert_eq!(a, b);
        assert!(!a.enumerate_runs().unwrap().is_empty());
    }

    #[test]
    fn full_density_keeps_the_whole_product() {
        let sig = fixtures::figure3_signature();
        let p = random_protocol(
            &sig,
            3,
            RandomBounds {
                max_domain: 2,
                density: 1.0,
            },
        )
        .unwrap();
        let expected = p.state_space_size();
        assert_eq!(p.enumerate_runs().unwrap().len() as u128, expected);
    }

    #[test]
    fn state_space_cap() {
        let p = fixtures::p1_protocol(1);
        assert_eq!(p.state_space_size(), 16);
        assert!(matches!(
            p.enumerate_runs_capped(4),
            Err(ProtocolError::StateSpaceTooLarge { .. })
        ));
    }
}

#[cfg(test)]
mod error_tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn zero_density_never_finds_a_run() {
        let sig = fixtures::line3_signature();
        assert!(matches!(
            random_protocol(&sig, 1, RandomBounds { max_domain: 2, density: 0.0 }),
            Err(ProtocolError::NoRunFound(100))
        ));
    }
}
