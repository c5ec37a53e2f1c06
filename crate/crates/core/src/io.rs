//! JSON document schemas for graphs, signatures, protocols, runs, proof
//! scripts, knowledge profiles, and flow assignments, shared between the
//! library and the command-line tool.
//!
//! Formulas appear in documents as concrete syntax; flow values as exact
//! rationals in `numerator/denominator` form (a bare integer stands for
//! denominator 1). Line and hypothesis references in proof documents are
//! 1-based.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path as FsPath;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{FlowAssignment, FlowError, KnowledgeProfile, Rational};
use crate::formula::{parse, FormulaError, Signature, SignatureError};
use crate::multigraph::{EdgeEnd, EdgeId, GraphError, Multigraph, Side};
use crate::proofcheck::{Justification, Mode, ProofLine, ProofScript};
use crate::protocol::{Protocol, ProtocolError, Run, Value, ValueTuple};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("in formula `{text}`: {source}")]
    Formula {
        text: String,
        #[source]
        source: FormulaError,
    },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("{0}")]
    Format(String),
}

fn format_err(msg: impl Into<String>) -> IoError {
    IoError::Format(msg.into())
}

/// Reads and parses one JSON document.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &FsPath) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.display().to_string(),
        source,
    })
}

/// Serializes a document with stable formatting.
pub fn to_json_pretty<T: Serialize>(doc: &T) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("documents serialize");
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// Graph documents.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    pub ends: [String; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
}

impl GraphDoc {
    pub fn to_graph(&self) -> Result<Multigraph, IoError> {
        Ok(Multigraph::new(
            self.vertices.iter().cloned(),
            self.edges
                .iter()
                .map(|e| (e.id.clone(), e.ends[0].clone(), e.ends[1].clone())),
        )?)
    }

    pub fn from_graph(graph: &Multigraph) -> GraphDoc {
        GraphDoc {
            vertices: graph.vertices().map(|v| v.0.clone()).collect(),
            edges: graph
                .edge_ids()
                .map(|e| {
                    let (a, b) = graph.endpoints(e).unwrap();
                    EdgeDoc {
                        id: e.0.clone(),
                        ends: [a.0, b.0],
                    }
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Signature documents.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignatureDoc {
    pub graph: GraphDoc,
    /// Proposition names per edge id; edges may be omitted.
    #[serde(default)]
    pub props: BTreeMap<String, Vec<String>>,
}

impl SignatureDoc {
    pub fn to_signature(&self) -> Result<Signature, IoError> {
        let graph = self.graph.to_graph()?;
        Ok(Signature::new(
            graph,
            self.props.iter().map(|(e, ps)| (e.clone(), ps.clone())),
        )?)
    }

    pub fn from_signature(sig: &Signature) -> SignatureDoc {
        let mut props: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (p, home) in sig.propositions() {
            props.entry(home.0.clone()).or_default().push(p.0.clone());
        }
        SignatureDoc {
            graph: GraphDoc::from_graph(sig.graph()),
            props,
        }
    }
}

// ---------------------------------------------------------------------------
// Protocol and run documents.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolDoc {
    pub signature: SignatureDoc,
    /// Value domain per edge id, in domain order.
    pub domains: BTreeMap<String, Vec<String>>,
    /// Allowed tuples per vertex id; omitted vertices are unconstrained.
    #[serde(default)]
    pub locals: BTreeMap<String, Vec<BTreeMap<String, String>>>,
    /// Edge values making each proposition true.
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
}

impl ProtocolDoc {
    pub fn to_protocol(&self) -> Result<Protocol, IoError> {
        let sig = self.signature.to_signature()?;
        let domains = self
            .domains
            .iter()
            .map(|(e, vs)| (EdgeId(e.clone()), vs.iter().cloned().map(Value).collect()))
            .collect();
        let locals = self
            .locals
            .iter()
            .map(|(v, tuples)| {
                let set: BTreeSet<ValueTuple> = tuples
                    .iter()
                    .map(|t| {
                        t.iter()
                            .map(|(e, val)| (EdgeId(e.clone()), Value(val.clone())))
                            .collect()
                    })
                    .collect();
                (v.clone().into(), set)
            })
            .collect();
        let valuation = self
            .valuation
            .iter()
            .map(|(p, vs)| {
                (
                    p.clone().into(),
                    vs.iter().cloned().map(Value).collect::<BTreeSet<Value>>(),
                )
            })
            .collect();
        Ok(Protocol::new(sig, domains, locals, valuation)?)
    }

    pub fn from_protocol(protocol: &Protocol) -> ProtocolDoc {
        ProtocolDoc {
            signature: SignatureDoc::from_signature(protocol.signature()),
            domains: protocol
                .domains()
                .iter()
                .map(|(e, vs)| (e.0.clone(), vs.iter().map(|v| v.0.clone()).collect()))
                .collect(),
            locals: protocol
                .locals()
                .iter()
                .map(|(v, tuples)| {
                    (
                        v.0.clone(),
                        tuples
                            .iter()
                            .map(|t| {
                                t.iter()
                                    .map(|(e, val)| (e.0.clone(), val.0.clone()))
                                    .collect()
                            })
                            .collect(),
                    )
                })
                .collect(),
            valuation: protocol
                .valuations()
                .iter()
                .map(|(p, vs)| (p.0.clone(), vs.iter().map(|v| v.0.clone()).collect()))
                .collect(),
        }
    }
}

/// A run document is a flat edge-to-value map.
pub type RunDoc = BTreeMap<String, String>;

pub fn run_from_doc(doc: &RunDoc) -> Run {
    Run {
        values: doc
            .iter()
            .map(|(e, v)| (EdgeId(e.clone()), Value(v.clone())))
            .collect(),
    }
}

pub fn run_to_doc(run: &Run) -> RunDoc {
    run.values
        .iter()
        .map(|(e, v)| (e.0.clone(), v.0.clone()))
        .collect()
}

// ---------------------------------------------------------------------------
// Proof documents.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProofDoc {
    pub signature: SignatureDoc,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hypotheses: Vec<String>,
    pub lines: Vec<ProofLineDoc>,
}

/// One derivation line. `from` gives Modus Ponens references as
/// `[antecedent, implication]`, `premise` the Necessitation premise, and
/// `hypothesis` a hypothesis number; all 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProofLineDoc {
    pub formula: String,
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<usize>,
}

fn line_ref(n: usize, what: &str) -> Result<usize, IoError> {
    n.checked_sub(1)
        .ok_or_else(|| format_err(format!("{what} references are 1-based")))
}

impl ProofDoc {
    pub fn to_script(&self) -> Result<ProofScript, IoError> {
        let sig = self.signature.to_signature()?;
        let parse_formula = |text: &str| {
            parse(&sig, text).map_err(|source| IoError::Formula {
                text: text.to_string(),
                source,
            })
        };
        let hypotheses: Vec<_> = self
            .hypotheses
            .iter()
            .map(|h| parse_formula(h))
            .collect::<Result<_, _>>()?;
        let mut lines = Vec::with_capacity(self.lines.len());
        for (i, doc) in self.lines.iter().enumerate() {
            let formula = parse_formula(&doc.formula)?;
            let need_edge = || {
                doc.edge
                    .clone()
                    .map(EdgeId)
                    .ok_or_else(|| format_err(format!("line {}: rule needs an edge", i + 1)))
            };
            let justification = match doc.rule.as_str() {
                "tautology" => Justification::Tautology,
                "truth" => Justification::Truth(need_edge()?),
                "positive_introspection" => Justification::PosIntrospection(need_edge()?),
                "negative_introspection" => Justification::NegIntrospection(need_edge()?),
                "distributivity" => Justification::Distributivity(need_edge()?),
                "gateway" => {
                    let gate = doc.gate.clone().map(EdgeId).ok_or_else(|| {
                        format_err(format!("line {}: gateway needs a gate", i + 1))
                    })?;
                    let left = doc.left.clone().ok_or_else(|| {
                        format_err(format!("line {}: gateway needs `left`", i + 1))
                    })?;
                    let right = doc.right.clone().ok_or_else(|| {
                        format_err(format!("line {}: gateway needs `right`", i + 1))
                    })?;
                    Justification::Gateway {
                        edge: need_edge()?,
                        gate,
                        left: left.into_iter().map(EdgeId).collect(),
                        right: right.into_iter().map(EdgeId).collect(),
                    }
                }
                "modus_ponens" => {
                    let [a, b] = doc.from.ok_or_else(|| {
                        format_err(format!("line {}: modus_ponens needs `from`", i + 1))
                    })?;
                    Justification::ModusPonens {
                        antecedent: line_ref(a, "line")?,
                        implication: line_ref(b, "line")?,
                    }
                }
                "necessitation" => {
                    let premise = doc.premise.ok_or_else(|| {
                        format_err(format!("line {}: necessitation needs `premise`", i + 1))
                    })?;
                    Justification::Necessitation {
                        edge: need_edge()?,
                        premise: line_ref(premise, "line")?,
                    }
                }
                "hypothesis" => {
                    let n = doc.hypothesis.ok_or_else(|| {
                        format_err(format!("line {}: hypothesis needs its number", i + 1))
                    })?;
                    Justification::Hypothesis(line_ref(n, "hypothesis")?)
                }
                other => {
                    return Err(format_err(format!(
                        "line {}: unknown rule `{other}`",
                        i + 1
                    )))
                }
            };
            lines.push(ProofLine {
                formula,
                justification,
            });
        }
        Ok(ProofScript {
            sig,
            mode: self.mode,
            hypotheses,
            lines,
        })
    }

    pub fn from_script(script: &ProofScript) -> ProofDoc {
        let lines = script
            .lines
            .iter()
            .map(|line| {
                let mut doc = ProofLineDoc {
                    formula: line.formula.to_string(),
                    rule: String::new(),
                    edge: None,
                    gate: None,
                    left: None,
                    right: None,
                    from: None,
                    premise: None,
                    hypothesis: None,
                };
                match &line.justification {
                    Justification::Tautology => doc.rule = "tautology".into(),
                    Justification::Truth(e) => {
                        doc.rule = "truth".into();
                        doc.edge = Some(e.0.clone());
                    }
                    Justification::PosIntrospection(e) => {
                        doc.rule = "positive_introspection".into();
                        doc.edge = Some(e.0.clone());
                    }
                    Justification::NegIntrospection(e) => {
                        doc.rule = "negative_introspection".into();
                        doc.edge = Some(e.0.clone());
                    }
                    Justification::Distributivity(e) => {
                        doc.rule = "distributivity".into();
                        doc.edge = Some(e.0.clone());
                    }
                    Justification::Gateway {
                        edge,
                        gate,
                        left,
                        right,
                    } => {
                        doc.rule = "gateway".into();
                        doc.edge = Some(edge.0.clone());
                        doc.gate = Some(gate.0.clone());
                        doc.left = Some(left.iter().map(|e| e.0.clone()).collect());
                        doc.right = Some(right.iter().map(|e| e.0.clone()).collect());
                    }
                    Justification::ModusPonens {
                        antecedent,
                        implication,
                    } => {
                        doc.rule = "modus_ponens".into();
                        doc.from = Some([antecedent + 1, implication + 1]);
                    }
                    Justification::Necessitation { edge, premise } => {
                        doc.rule = "necessitation".into();
                        doc.edge = Some(edge.0.clone());
                        doc.premise = Some(premise + 1);
                    }
                    Justification::Hypothesis(k) => {
                        doc.rule = "hypothesis".into();
                        doc.hypothesis = Some(k + 1);
                    }
                }
                doc
            })
            .collect();
        ProofDoc {
            signature: SignatureDoc::from_signature(&script.sig),
            mode: script.mode,
            hypotheses: script.hypotheses.iter().map(|h| h.to_string()).collect(),
            lines,
        }
    }
}

// ---------------------------------------------------------------------------
// Profile and flow documents.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileDoc {
    pub graph: GraphDoc,
    #[serde(default)]
    pub sink: BTreeMap<String, bool>,
    #[serde(default)]
    pub knows_delta: BTreeMap<String, bool>,
    /// Per edge: side knowledge at the two ends, in stored endpoint order.
    #[serde(default)]
    pub knows_side: BTreeMap<String, [bool; 2]>,
}

impl ProfileDoc {
    pub fn to_profile(&self) -> Result<KnowledgeProfile, IoError> {
        let graph = self.graph.to_graph()?;
        let mut profile = KnowledgeProfile::new(graph)?;
        for (e, v) in &self.sink {
            profile.set_sink(e.clone(), *v)?;
        }
        for (e, v) in &self.knows_delta {
            profile.set_knows_delta(e.clone(), *v)?;
        }
        for (e, sides) in &self.knows_side {
            profile.set_knows_side(EdgeEnd::new(e.clone(), Side::Zero), sides[0])?;
            profile.set_knows_side(EdgeEnd::new(e.clone(), Side::One), sides[1])?;
        }
        Ok(profile)
    }

    pub fn from_profile(profile: &KnowledgeProfile) -> ProfileDoc {
        let graph = profile.graph();
        ProfileDoc {
            graph: GraphDoc::from_graph(graph),
            sink: graph
                .edge_ids()
                .map(|e| (e.0.clone(), profile.sink(e)))
                .collect(),
            knows_delta: graph
                .edge_ids()
                .map(|e| (e.0.clone(), profile.knows_delta(e)))
                .collect(),
            knows_side: graph
                .edge_ids()
                .map(|e| {
                    let [n0, n1] = graph.ends(e).unwrap();
                    (
                        e.0.clone(),
                        [profile.knows_side(&n0), profile.knows_side(&n1)],
                    )
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowDoc {
    /// Per edge: the exact rational values at the two ends, in stored
    /// endpoint order, written `numerator/denominator`.
    pub flow: BTreeMap<String, [String; 2]>,
}

pub fn parse_rational(text: &str) -> Result<Rational, IoError> {
    Rational::from_str(text.trim())
        .map_err(|e| format_err(format!("invalid rational `{text}`: {e}")))
}

impl FlowDoc {
    pub fn to_flow(&self, graph: &Multigraph) -> Result<FlowAssignment, IoError> {
        let mut map = BTreeMap::new();
        for (e, pair) in &self.flow {
            let edge = EdgeId(e.clone());
            if !graph.has_edge(&edge) {
                return Err(GraphError::UnknownEdge(edge).into());
            }
            map.insert(
                EdgeEnd::new(e.clone(), Side::Zero),
                parse_rational(&pair[0])?,
            );
            map.insert(
                EdgeEnd::new(e.clone(), Side::One),
                parse_rational(&pair[1])?,
            );
        }
        Ok(FlowAssignment::from_map(graph, map)?)
    }

    pub fn from_flow(flow: &FlowAssignment) -> FlowDoc {
        let mut doc: BTreeMap<String, [String; 2]> = BTreeMap::new();
        for (end, value) in flow.iter() {
            let entry = doc
                .entry(end.edge.0.clone())
                .or_insert_with(|| [String::new(), String::new()]);
            entry[end.side.index()] = value.to_string();
        }
        FlowDoc { flow: doc }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::flow::rational;
    use crate::proofcheck::{check_proof, example3_script};

    #[test]
    fn graph_documents_round_trip() {
        let g = fixtures::figure3_graph();
        let doc = GraphDoc::from_graph(&g);
        assert_eq!(doc.to_graph().unwrap(), g);
    }

    #[test]
    fn protocol_documents_round_trip() {
        let p = fixtures::p1_protocol(1);
        let doc = ProtocolDoc::from_protocol(&p);
        let text = to_json_pretty(&doc);
        let back: ProtocolDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_protocol().unwrap(), p);
    }

    #[test]
    fn proof_documents_round_trip() {
        let sig = fixtures::figure3_signature();
        let phi = parse(&sig, "pm").unwrap();
        let script = example3_script(&sig, &phi).unwrap();
        let doc = ProofDoc::from_script(&script);
        let text = to_json_pretty(&doc);
        let back: ProofDoc = serde_json::from_str(&text).unwrap();
        let script2 = back.to_script().unwrap();
        assert_eq!(script2, script);
        check_proof(&script2).unwrap();
    }

    #[test]
    fn flow_documents_round_trip_exactly() {
        let g = fixtures::figure3_graph();
        let end = EdgeEnd::new("m", Side::One);
        let mut map: BTreeMap<EdgeEnd, Rational> = FlowAssignment::zero(&g)
            .iter()
            .map(|(e, r)| (e.clone(), r.clone()))
            .collect();
        map.insert(end.clone(), rational(-7, 3));
        let source = FlowAssignment::from_map(&g, map).unwrap();
        let doc = FlowDoc::from_flow(&source);
        let restored = doc.to_flow(&g).unwrap();
        assert_eq!(restored, source);
        assert_eq!(*restored.get(&end), rational(-7, 3));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/2").unwrap(), rational(3, 2));
        assert_eq!(parse_rational("-4").unwrap(), rational(-4, 1));
        assert!(parse_rational("x").is_err());
    }
}
