//! Verifier for Hilbert-style derivations in the system S5 + Gateway: five
//! axiom schemas, Modus Ponens, and Necessitation. Hypothesis-mode scripts
//! derive from assumptions using only Modus Ponens (axiom and tautology
//! lines stay available; Necessitation does not).
//!
//! The checker performs no search: every line names its justification with
//! full parameters and is pattern-matched syntactically against the
//! desugared AST.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{in_fragment, is_tautology, Formula, FormulaError, Signature};
use crate::multigraph::{EdgeId, Multigraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Axioms, tautologies, Modus Ponens, and Necessitation.
    Theorem,
    /// Derivation from hypotheses using only Modus Ponens.
    Hypothesis,
}

/// The license a proof line claims. Line references are 0-based indices of
/// strictly earlier lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// Any propositional tautology over modal atoms.
    Tautology,
    /// `[e] phi -> phi`
    Truth(EdgeId),
    /// `[e] phi -> [e] [e] phi`
    PosIntrospection(EdgeId),
    /// `~[e] phi -> [e] ~[e] phi`
    NegIntrospection(EdgeId),
    /// `[e](phi -> psi) -> ([e] phi -> [e] psi)`
    Distributivity(EdgeId),
    /// `[e](phi -> psi) -> (phi -> [gate] psi)`, with the side conditions of
    /// the Gateway axiom on `(edge, gate, left, right)`.
    Gateway {
        edge: EdgeId,
        gate: EdgeId,
        left: BTreeSet<EdgeId>,
        right: BTreeSet<EdgeId>,
    },
    /// From `phi` (line `antecedent`) and `phi -> psi` (line `implication`),
    /// conclude `psi`.
    ModusPonens {
        antecedent: usize,
        implication: usize,
    },
    /// From `phi` (line `premise`), conclude `[e] phi`. Theorem mode only.
    Necessitation { edge: EdgeId, premise: usize },
    /// The k-th hypothesis, verbatim. Hypothesis mode only.
    Hypothesis(usize),
}

impl Justification {
    pub fn name(&self) -> &'static str {
        match self {
            Justification::Tautology => "tautology",
            Justification::Truth(_) => "truth",
            Justification::PosIntrospection(_) => "positive-introspection",
            Justification::NegIntrospection(_) => "negative-introspection",
            Justification::Distributivity(_) => "distributivity",
            Justification::Gateway { .. } => "gateway",
            Justification::ModusPonens { .. } => "modus-ponens",
            Justification::Necessitation { .. } => "necessitation",
            Justification::Hypothesis(_) => "hypothesis",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofLine {
    pub formula: Formula,
    pub justification: Justification,
}

/// A complete derivation over one signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofScript {
    pub sig: Signature,
    pub mode: Mode,
    pub hypotheses: Vec<Formula>,
    pub lines: Vec<ProofLine>,
}

impl ProofScript {
    /// The formula the script derives (its last line).
    pub fn conclusion(&self) -> Option<&Formula> {
        self.lines.last().map(|l| &l.formula)
    }
}

/// Machine-readable rejection reasons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonCode {
    BadPattern,
    NotTautology,
    NotGateway,
    FragmentViolation,
    RuleForbiddenInMode,
    BadReference,
}

impl fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ReasonCode::BadPattern => "BadPattern",
            ReasonCode::NotTautology => "NotTautology",
            ReasonCode::NotGateway => "NotGateway",
            ReasonCode::FragmentViolation => "FragmentViolation",
            ReasonCode::RuleForbiddenInMode => "RuleForbiddenInMode",
            ReasonCode::BadReference => "BadReference",
        };
        f.write_str(s)
    }
}

/// The first failing line (0-based index) and why.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {} rejected ({reason}): {detail}", line + 1)]
pub struct Rejection {
    pub line: usize,
    pub reason: ReasonCode,
    pub detail: String,
}

fn reject(line: usize, reason: ReasonCode, detail: impl Into<String>) -> Rejection {
    Rejection {
        line,
        reason,
        detail: detail.into(),
    }
}

/// Checks every line of a script. `Ok(())` means accepted.
pub fn check_proof(script: &ProofScript) -> Result<(), Rejection> {
    for (i, line) in script.lines.iter().enumerate() {
        check_line(script, i, line)?;
    }
    Ok(())
}

fn backward_ref(i: usize, r: usize, what: &str) -> Result<(), Rejection> {
    if r < i {
        Ok(())
    } else {
        Err(reject(
            i,
            ReasonCode::BadReference,
            format!("{what} must reference an earlier line"),
        ))
    }
}

fn check_line(script: &ProofScript, i: usize, line: &ProofLine) -> Result<(), Rejection> {
    let sig = &script.sig;
    let f = &line.formula;
    let bad = |detail: String| Err(reject(i, ReasonCode::BadPattern, detail));
    match &line.justification {
        Justification::Tautology => match is_tautology(sig, f) {
            Ok(true) => Ok(()),
            Ok(false) => Err(reject(
                i,
                ReasonCode::NotTautology,
                "not a propositional tautology",
            )),
            Err(FormulaError::TooManyAtoms { count }) => Err(reject(
                i,
                ReasonCode::NotTautology,
                format!("tautology check capped: {count} modal atoms"),
            )),
            Err(e) => Err(reject(i, ReasonCode::NotTautology, e.to_string())),
        },
        Justification::Truth(e) => {
            let Formula::Implies(a, b) = f else {
                return bad("expected an implication".into());
            };
            if **a == Formula::knows(e.clone(), (**b).clone()) {
                Ok(())
            } else {
                bad(format!("expected `[{e}] phi -> phi`"))
            }
        }
        Justification::PosIntrospection(e) => {
            let Formula::Implies(a, b) = f else {
                return bad("expected an implication".into());
            };
            let matches_shape = matches!(&**a, Formula::Knows(ae, _) if ae == e)
                && **b == Formula::knows(e.clone(), (**a).clone());
            if matches_shape {
                Ok(())
            } else {
                bad(format!("expected `[{e}] phi -> [{e}] [{e}] phi`"))
            }
        }
        Justification::NegIntrospection(e) => {
            let Formula::Implies(a, b) = f else {
                return bad("expected an implication".into());
            };
            let negated_box = matches!(
                &**a,
                Formula::Implies(x, falsum)
                    if matches!(&**x, Formula::Knows(ae, _) if ae == e)
                        && **falsum == Formula::Falsum
            );
            if negated_box && **b == Formula::knows(e.clone(), (**a).clone()) {
                Ok(())
            } else {
                bad(format!("expected `~[{e}] phi -> [{e}] ~[{e}] phi`"))
            }
        }
        Justification::Distributivity(e) => {
            let Formula::Implies(a, b) = f else {
                return bad("expected an implication".into());
            };
            let Formula::Knows(ae, body) = &**a else {
                return bad("expected a boxed implication on the left".into());
            };
            let Formula::Implies(phi, psi) = &**body else {
                return bad("expected a boxed implication on the left".into());
            };
            let want = Formula::implies(
                Formula::knows(e.clone(), (**phi).clone()),
                Formula::knows(e.clone(), (**psi).clone()),
            );
            if ae == e && **b == want {
                Ok(())
            } else {
                bad(format!(
                    "expected `[{e}](phi -> psi) -> ([{e}] phi -> [{e}] psi)`"
                ))
            }
        }
        Justification::Gateway {
            edge,
            gate,
            left,
            right,
        } => check_gateway_line(sig, i, f, edge, gate, left, right),
        Justification::ModusPonens {
            antecedent,
            implication,
        } => {
            backward_ref(i, *antecedent, "modus ponens antecedent")?;
            backward_ref(i, *implication, "modus ponens implication")?;
            let want = Formula::implies(script.lines[*antecedent].formula.clone(), f.clone());
            if script.lines[*implication].formula == want {
                Ok(())
            } else {
                bad(format!(
                    "line {} is not `line {} -> this line`",
                    implication + 1,
                    antecedent + 1
                ))
            }
        }
        Justification::Necessitation { edge, premise } => {
            if script.mode == Mode::Hypothesis {
                return Err(reject(
                    i,
                    ReasonCode::RuleForbiddenInMode,
                    "necessitation is not available when deriving from hypotheses",
                ));
            }
            backward_ref(i, *premise, "necessitation premise")?;
            let want = Formula::knows(edge.clone(), script.lines[*premise].formula.clone());
            if *f == want {
                Ok(())
            } else {
                bad(format!(
                    "expected `[{edge}]` applied to line {}",
                    premise + 1
                ))
            }
        }
        Justification::Hypothesis(k) => {
            if script.mode == Mode::Theorem {
                return Err(reject(
                    i,
                    ReasonCode::RuleForbiddenInMode,
                    "theorem mode has no hypotheses",
                ));
            }
            let Some(h) = script.hypotheses.get(*k) else {
                return Err(reject(
                    i,
                    ReasonCode::BadReference,
                    format!("no hypothesis {k}"),
                ));
            };
            if h == f {
                Ok(())
            } else {
                bad(format!("line does not equal hypothesis {k}"))
            }
        }
    }
}

fn check_gateway_line(
    sig: &Signature,
    i: usize,
    f: &Formula,
    edge: &EdgeId,
    gate: &EdgeId,
    left: &BTreeSet<EdgeId>,
    right: &BTreeSet<EdgeId>,
) -> Result<(), Rejection> {
    // Shape: [edge](phi -> psi) -> (phi -> [gate] psi).
    let shape = (|| {
        let Formula::Implies(a, b) = f else {
            return None;
        };
        let Formula::Knows(ae, body) = &**a else {
            return None;
        };
        let Formula::Implies(phi, psi) = &**body else {
            return None;
        };
        let Formula::Implies(phi2, boxed) = &**b else {
            return None;
        };
        let Formula::Knows(g, psi2) = &**boxed else {
            return None;
        };
        if ae == edge && g == gate && phi2 == phi && psi2 == psi {
            Some(((**phi).clone(), (**psi).clone()))
        } else {
            None
        }
    })();
    let Some((phi, psi)) = shape else {
        return Err(reject(
            i,
            ReasonCode::BadPattern,
            format!("expected `[{edge}](phi -> psi) -> (phi -> [{gate}] psi)`"),
        ));
    };
    if !left.contains(edge) {
        return Err(reject(
            i,
            ReasonCode::NotGateway,
            format!("premise edge `{edge}` is not in the left set"),
        ));
    }
    match sig.graph().is_gateway(gate, left, right) {
        Ok(true) => {}
        Ok(false) => {
            return Err(reject(
                i,
                ReasonCode::NotGateway,
                format!("`{gate}` is not a gateway between the given sets"),
            ));
        }
        Err(e) => return Err(reject(i, ReasonCode::NotGateway, e.to_string())),
    }
    if !in_fragment(sig, &phi, left) {
        return Err(reject(
            i,
            ReasonCode::FragmentViolation,
            "antecedent is outside the left fragment",
        ));
    }
    if !in_fragment(sig, &psi, right) {
        return Err(reject(
            i,
            ReasonCode::FragmentViolation,
            "consequent is outside the right fragment",
        ));
    }
    Ok(())
}

/// Whether a formula is a Gateway-axiom instance for the given parameters:
/// the syntactic shape and all four side conditions.
pub fn match_gateway(
    sig: &Signature,
    formula: &Formula,
    edge: &EdgeId,
    gate: &EdgeId,
    left: &BTreeSet<EdgeId>,
    right: &BTreeSet<EdgeId>,
) -> bool {
    check_gateway_line(sig, 0, formula, edge, gate, left, right).is_ok()
}

// ---------------------------------------------------------------------------
// Script construction.

/// Builds scripts line by line; axiom helpers construct the instantiated
/// formula from schema parameters, so the checker re-verifies everything.
pub struct ScriptBuilder {
    script: ProofScript,
}

impl ScriptBuilder {
    pub fn theorem(sig: Signature) -> ScriptBuilder {
        ScriptBuilder {
            script: ProofScript {
                sig,
                mode: Mode::Theorem,
                hypotheses: Vec::new(),
                lines: Vec::new(),
            },
        }
    }

    pub fn hypotheses(sig: Signature, hypotheses: Vec<Formula>) -> ScriptBuilder {
        ScriptBuilder {
            script: ProofScript {
                sig,
                mode: Mode::Hypothesis,
                hypotheses,
                lines: Vec::new(),
            },
        }
    }

    pub fn finish(self) -> ProofScript {
        self.script
    }

    fn push(&mut self, formula: Formula, justification: Justification) -> usize {
        self.script.lines.push(ProofLine {
            formula,
            justification,
        });
        self.script.lines.len() - 1
    }

    fn formula_at(&self, i: usize) -> &Formula {
        &self.script.lines[i].formula
    }

    pub fn tautology(&mut self, f: Formula) -> usize {
        self.push(f, Justification::Tautology)
    }

    pub fn truth(&mut self, e: impl Into<EdgeId>, body: Formula) -> usize {
        let e = e.into();
        let f = Formula::implies(Formula::knows(e.clone(), body.clone()), body);
        self.push(f, Justification::Truth(e))
    }

    pub fn pos_introspection(&mut self, e: impl Into<EdgeId>, body: Formula) -> usize {
        let e = e.into();
        let boxed = Formula::knows(e.clone(), body);
        let f = Formula::implies(boxed.clone(), Formula::knows(e.clone(), boxed));
        self.push(f, Justification::PosIntrospection(e))
    }

    pub fn neg_introspection(&mut self, e: impl Into<EdgeId>, body: Formula) -> usize {
        let e = e.into();
        let negated = Formula::not(Formula::knows(e.clone(), body));
        let f = Formula::implies(negated.clone(), Formula::knows(e.clone(), negated));
        self.push(f, Justification::NegIntrospection(e))
    }

    pub fn distributivity(
        &mut self,
        e: impl Into<EdgeId>,
        antecedent: Formula,
        consequent: Formula,
    ) -> usize {
        let e = e.into();
        let f = Formula::implies(
            Formula::knows(
                e.clone(),
                Formula::implies(antecedent.clone(), consequent.clone()),
            ),
            Formula::implies(
                Formula::knows(e.clone(), antecedent),
                Formula::knows(e.clone(), consequent),
            ),
        );
        self.push(f, Justification::Distributivity(e))
    }

    pub fn gateway(
        &mut self,
        edge: impl Into<EdgeId>,
        gate: impl Into<EdgeId>,
        left: BTreeSet<EdgeId>,
        right: BTreeSet<EdgeId>,
        antecedent: Formula,
        consequent: Formula,
    ) -> usize {
        let edge = edge.into();
        let gate = gate.into();
        let f = Formula::implies(
            Formula::knows(
                edge.clone(),
                Formula::implies(antecedent.clone(), consequent.clone()),
            ),
            Formula::implies(antecedent, Formula::knows(gate.clone(), consequent)),
        );
        self.push(
            f,
            Justification::Gateway {
                edge,
                gate,
                left,
                right,
            },
        )
    }

    pub fn modus_ponens(&mut self, antecedent: usize, implication: usize) -> usize {
        let Formula::Implies(a, b) = self.formula_at(implication) else {
            panic!("modus ponens on a non-implication");
        };
        assert_eq!(
            **a,
            *self.formula_at(antecedent),
            "modus ponens premises do not chain"
        );
        let conclusion = (**b).clone();
        self.push(
            conclusion,
            Justification::ModusPonens {
                antecedent,
                implication,
            },
        )
    }

    pub fn necessitation(&mut self, e: impl Into<EdgeId>, premise: usize) -> usize {
        let e = e.into();
        let f = Formula::knows(e.clone(), self.formula_at(premise).clone());
        self.push(f, Justification::Necessitation { edge: e, premise })
    }

    pub fn hypothesis(&mut self, k: usize) -> usize {
        let f = self.script.hypotheses[k].clone();
        self.push(f, Justification::Hypothesis(k))
    }

    /// From `A -> B` (line i) and `B -> C` (line j), derives `A -> C` via
    /// the chain tautology and two Modus Ponens steps.
    pub fn chain(&mut self, i: usize, j: usize) -> usize {
        let (a, b) = split_implication(self.formula_at(i));
        let (b2, c) = split_implication(self.formula_at(j));
        assert_eq!(b, b2, "chain premises do not compose");
        let taut = Formula::implies(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(Formula::implies(b, c.clone()), Formula::implies(a, c)),
        );
        let t = self.tautology(taut);
        let step = self.modus_ponens(i, t);
        self.modus_ponens(j, step)
    }

    /// From `X -> (P -> Q)` (line i) and `Q -> R` (line j), derives
    /// `X -> (P -> R)`.
    pub fn chain_inner(&mut self, i: usize, j: usize) -> usize {
        let (x, pq) = split_implication(self.formula_at(i));
        let (p, q) = split_implication(&pq);
        let (q2, r) = split_implication(self.formula_at(j));
        assert_eq!(q, q2, "inner chain premises do not compose");
        let taut = Formula::implies(
            Formula::implies(x.clone(), Formula::implies(p.clone(), q.clone())),
            Formula::implies(
                Formula::implies(q, r.clone()),
                Formula::implies(x, Formula::implies(p, r)),
            ),
        );
        let t = self.tautology(taut);
        let step = self.modus_ponens(i, t);
        self.modus_ponens(j, step)
    }
}

fn split_implication(f: &Formula) -> (Formula, Formula) {
    match f {
        Formula::Implies(a, b) => ((**a).clone(), (**b).clone()),
        other => panic!("expected an implication, got {other}"),
    }
}

// ---------------------------------------------------------------------------
// Shipped derivations.

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixtureError {
    #[error("signature does not match the required topology: {0}")]
    TopologyMismatch(String),
}

/// A named shipped derivation.
#[derive(Debug, Clone)]
pub struct NamedScript {
    pub name: &'static str,
    pub script: ProofScript,
}

fn mismatch(msg: impl Into<String>) -> FixtureError {
    FixtureError::TopologyMismatch(msg.into())
}

/// If the graph is a simple line, its edges in path order starting from the
/// lexicographically smaller endpoint.
pub fn line_roles(graph: &Multigraph) -> Option<Vec<EdgeId>> {
    let n = graph.edge_count();
    if n == 0 || graph.vertex_count() != n + 1 || !graph.is_connected() {
        return None;
    }
    let mut endpoints: Vec<&VertexId> = graph
        .vertices()
        .filter(|v| graph.incident_edges(v).unwrap().len() == 1)
        .collect();
    if endpoints.len() != 2 {
        return None;
    }
    endpoints.sort();
    let mut order = Vec::new();
    let mut at = endpoints[0].clone();
    let mut used: BTreeSet<EdgeId> = BTreeSet::new();
    while order.len() < n {
        let inc = graph.incident_edges(&at).unwrap();
        let next = inc.iter().find(|e| !used.contains(*e))?.clone();
        let (a, b) = graph.endpoints(&next).unwrap();
        if a == b {
            return None;
        }
        used.insert(next.clone());
        order.push(next);
        at = if a == at { b } else { a };
    }
    Some(order)
}

/// The edge roles of the two-stage relay shape: a bridge, a parallel pair, a
/// middle bridge, a second parallel pair, and a final bridge.
#[derive(Debug, Clone)]
pub struct RelayRoles {
    pub m: EdgeId,
    pub k: EdgeId,
    pub c: EdgeId,
    pub m1: EdgeId,
    pub k1: EdgeId,
    pub c1: EdgeId,
    pub m2: EdgeId,
}

pub fn relay_roles(graph: &Multigraph) -> Option<RelayRoles> {
    if graph.vertex_count() != 6 || graph.edge_count() != 7 || !graph.is_connected() {
        return None;
    }
    let mut leaves: Vec<&VertexId> = graph
        .vertices()
        .filter(|v| graph.incident_edges(v).unwrap().len() == 1)
        .collect();
    if leaves.len() != 2 {
        return None;
    }
    leaves.sort();
    let p = leaves[0].clone();
    let m = graph
        .incident_edges(&p)
        .unwrap()
        .iter()
        .next()
        .unwrap()
        .clone();
    let (a, b) = graph.endpoints(&m).unwrap();
    let q = if a == p { b } else { a };
    let pair_after = |from: &VertexId, skip: &EdgeId| -> Option<(EdgeId, EdgeId, VertexId)> {
        let inc: Vec<EdgeId> = graph
            .incident_edges(from)
            .ok()?
            .iter()
            .filter(|e| *e != skip)
            .cloned()
            .collect();
        if inc.len() != 2 {
            return None;
        }
        let (a0, b0) = graph.endpoints(&inc[0]).unwrap();
        let (a1, b1) = graph.endpoints(&inc[1]).unwrap();
        let far0 = if a0 == *from { b0 } else { a0 };
        let far1 = if a1 == *from { b1 } else { a1 };
        if far0 != far1 || far0 == *from {
            return None;
        }
        Some((inc[0].clone(), inc[1].clone(), far0))
    };
    let (k, c, u) = pair_after(&q, &m)?;
    let m1 = graph
        .incident_edges(&u)
        .unwrap()
        .iter()
        .find(|e| **e != k && **e != c)?
        .clone();
    let (a, b) = graph.endpoints(&m1).unwrap();
    let s = if a == u { b } else { a };
    let (k1, c1, t) = pair_after(&s, &m1)?;
    let m2 = graph
        .incident_edges(&t)
        .unwrap()
        .iter()
        .find(|e| **e != k1 && **e != c1)?
        .clone();
    let (a, b) = graph.endpoints(&m2).unwrap();
    let v = if a == t { b } else { a };
    if graph.incident_edges(&v).unwrap().len() != 1 {
        return None;
    }
    Some(RelayRoles {
        m,
        k,
        c,
        m1,
        k1,
        c1,
        m2,
    })
}

fn edge_set(edges: &[&EdgeId]) -> BTreeSet<EdgeId> {
    edges.iter().map(|e| (*e).clone()).collect()
}

/// On the three-channel line `a - b - c`:
/// `[a]([b] phi | [c] phi) -> [b] phi`.
pub fn example1_script(sig: &Signature, phi: &Formula) -> Result<ProofScript, FixtureError> {
    let order = line_roles(sig.graph())
        .filter(|o| o.len() == 3)
        .ok_or_else(|| mismatch("expected a three-channel line"))?;
    let (a, b, c) = (&order[0], &order[1], &order[2]);
    let kb = Formula::knows(b.clone(), phi.clone());
    let kc = Formula::knows(c.clone(), phi.clone());

    let mut sb = ScriptBuilder::theorem(sig.clone());
    let truth = sb.truth(c.clone(), phi.clone());
    let nec = sb.necessitation(b.clone(), truth);
    let dist = sb.distributivity(b.clone(), kc.clone(), phi.clone());
    let kbkc_to_kb = sb.modus_ponens(nec, dist);
    // b is a gateway between {a,b} and {c}; ~[b]phi is in Phi(Sigma,{a,b}).
    let gw = sb.gateway(
        a.clone(),
        b.clone(),
        edge_set(&[a, b]),
        edge_set(&[c]),
        Formula::not(kb.clone()),
        kc,
    );
    let weakened = sb.chain_inner(gw, kbkc_to_kb);
    let collapse = sb.tautology(Formula::implies(
        Formula::implies(Formula::not(kb.clone()), kb.clone()),
        kb,
    ));
    sb.chain(weakened, collapse);
    Ok(sb.finish())
}

/// On the five-channel line `a - b - e - d - c`:
/// `[a][e][c] phi -> [b][d] phi`.
pub fn example2_script(sig: &Signature, phi: &Formula) -> Result<ProofScript, FixtureError> {
    let order = line_roles(sig.graph())
        .filter(|o| o.len() == 5)
        .ok_or_else(|| mismatch("expected a five-channel line"))?;
    let (a, b, e, d, c) = (&order[0], &order[1], &order[2], &order[3], &order[4]);
    let top = Formula::top();
    let kc = Formula::knows(c.clone(), phi.clone());
    let kd = Formula::knows(d.clone(), phi.clone());
    let kekc = Formula::knows(e.clone(), kc.clone());

    let mut sb = ScriptBuilder::theorem(sig.clone());
    // [d][c]phi -> [d]phi
    let truth = sb.truth(c.clone(), phi.clone());
    let nec = sb.necessitation(d.clone(), truth);
    let dist = sb.distributivity(d.clone(), kc.clone(), phi.clone());
    let kdkc_to_kd = sb.modus_ponens(nec, dist);
    // [e][c]phi -> [e](true -> [c]phi)
    let t = sb.tautology(Formula::implies(
        kc.clone(),
        Formula::implies(top.clone(), kc.clone()),
    ));
    let nec = sb.necessitation(e.clone(), t);
    let dist = sb.distributivity(
        e.clone(),
        kc.clone(),
        Formula::implies(top.clone(), kc.clone()),
    );
    let intro_e = sb.modus_ponens(nec, dist);
    // [a][d]phi -> [a](true -> [d]phi)
    let t = sb.tautology(Formula::implies(
        kd.clone(),
        Formula::implies(top.clone(), kd.clone()),
    ));
    let nec = sb.necessitation(a.clone(), t);
    let dist = sb.distributivity(
        a.clone(),
        kd.clone(),
        Formula::implies(top.clone(), kd.clone()),
    );
    let intro_a = sb.modus_ponens(nec, dist);
    // d is a gateway between {e} and {c}.
    let gw_d = sb.gateway(
        e.clone(),
        d.clone(),
        edge_set(&[e]),
        edge_set(&[c]),
        top.clone(),
        kc.clone(),
    );
    // [e][c]phi -> (true -> [d][c]phi), then drop the vacuous antecedent.
    let step = sb.chain(intro_e, gw_d);
    let kdkc = Formula::knows(d.clone(), kc.clone());
    let drop_top = sb.tautology(Formula::implies(
        Formula::implies(top.clone(), kdkc.clone()),
        kdkc,
    ));
    let step = sb.chain(step, drop_top);
    let ekc_to_kd = sb.chain(step, kdkc_to_kd);
    // Box the implication with [a] and distribute.
    let nec = sb.necessitation(a.clone(), ekc_to_kd);
    let dist = sb.distributivity(a.clone(), kekc.clone(), kd.clone());
    let boxed = sb.modus_ponens(nec, dist); // [a][e][c]phi -> [a][d]phi
                                            // b is a gateway between {a} and {d}.
    let gw_b = sb.gateway(
        a.clone(),
        b.clone(),
        edge_set(&[a]),
        edge_set(&[d]),
        top.clone(),
        kd.clone(),
    );
    let step = sb.chain(boxed, intro_a);
    let step = sb.chain(step, gw_b);
    let kbkd = Formula::knows(b.clone(), kd.clone());
    let drop_top = sb.tautology(Formula::implies(
        Formula::implies(top.clone(), kbkd.clone()),
        kbkd,
    ));
    sb.chain(step, drop_top);
    Ok(sb.finish())
}

/// On the two-stage relay: `[m][m''] phi -> [m'][m''] phi`.
pub fn example3_script(sig: &Signature, phi: &Formula) -> Result<ProofScript, FixtureError> {
    let roles = relay_roles(sig.graph()).ok_or_else(|| mismatch("expected the two-stage relay"))?;
    let top = Formula::top();
    let km2 = Formula::knows(roles.m2.clone(), phi.clone());

    let mut sb = ScriptBuilder::theorem(sig.clone());
    let t = sb.tautology(Formula::implies(
        km2.clone(),
        Formula::implies(top.clone(), km2.clone()),
    ));
    let nec = sb.necessitation(roles.m.clone(), t);
    let dist = sb.distributivity(
        roles.m.clone(),
        km2.clone(),
        Formula::implies(top.clone(), km2.clone()),
    );
    let intro = sb.modus_ponens(nec, dist);
    // m' is a gateway between {m} and {m''}.
    let gw = sb.gateway(
        roles.m.clone(),
        roles.m1.clone(),
        edge_set(&[&roles.m]),
        edge_set(&[&roles.m2]),
        top.clone(),
        km2.clone(),
    );
    let step = sb.chain(intro, gw);
    let target = Formula::knows(roles.m1.clone(), km2);
    let drop_top = sb.tautology(Formula::implies(
        Formula::implies(top, target.clone()),
        target,
    ));
    sb.chain(step, drop_top);
    Ok(sb.finish())
}

/// `[m](phi | psi) -> (phi | [m'] psi)` on the relay, a single Gateway
/// instance with `m'` between `{m,k}` and `{k',c'}`. Requires `phi` in
/// `Phi(Sigma,{m,k})` and `psi` in `Phi(Sigma,{k',c'})`.
pub fn vee_lemma_script(
    sig: &Signature,
    phi: &Formula,
    psi: &Formula,
) -> Result<ProofScript, FixtureError> {
    let roles = relay_roles(sig.graph()).ok_or_else(|| mismatch("expected the two-stage relay"))?;
    let left = edge_set(&[&roles.m, &roles.k]);
    let right = edge_set(&[&roles.k1, &roles.c1]);
    if !in_fragment(sig, phi, &left) || !in_fragment(sig, psi, &right) {
        return Err(mismatch("fixture formulas must fit the gateway fragments"));
    }
    let mut sb = ScriptBuilder::theorem(sig.clone());
    sb.gateway(
        roles.m.clone(),
        roles.m1.clone(),
        left,
        right,
        Formula::not(phi.clone()),
        psi.clone(),
    );
    Ok(sb.finish())
}

/// `[m'](phi | psi | chi) -> (phi | [m'] psi | [m'] chi)` on the relay, with
/// `phi` in `Phi(Sigma,{m'})`, `psi` in `Phi(Sigma,{m,k})`, and `chi` in
/// `Phi(Sigma,{k',c'})`.
pub fn second_vee_lemma_script(
    sig: &Signature,
    phi: &Formula,
    psi: &Formula,
    chi: &Formula,
) -> Result<ProofScript, FixtureError> {
    let roles = relay_roles(sig.graph()).ok_or_else(|| mismatch("expected the two-stage relay"))?;
    let g = roles.m1.clone();
    let left = edge_set(&[&roles.m, &roles.k]);
    let right = edge_set(&[&roles.k1, &roles.c1]);
    let g_only = edge_set(&[&g]);
    if !in_fragment(sig, phi, &g_only)
        || !in_fragment(sig, psi, &left)
        || !in_fragment(sig, chi, &right)
    {
        return Err(mismatch("fixture formulas must fit the gateway fragments"));
    }
    let or2 = Formula::or(phi.clone(), psi.clone());
    let body = Formula::or(or2.clone(), chi.clone()); // phi | psi | chi
    let boxed_body = Formula::knows(g.clone(), body.clone());
    let kchi = Formula::knows(g.clone(), chi.clone());
    let kpsi = Formula::knows(g.clone(), psi.clone());

    let mut sb = ScriptBuilder::theorem(sig.clone());
    // Gateway over A + {g} and B: [g]((phi|psi)|chi) -> ((phi|psi) | [g]chi).
    let mut left_with_g = left.clone();
    left_with_g.insert(g.clone());
    let gw1 = sb.gateway(
        g.clone(),
        g.clone(),
        left_with_g,
        right,
        Formula::not(or2.clone()),
        chi.clone(),
    );
    // Rearrange to ((phi | [g]chi) | psi).
    let rearranged = Formula::or(Formula::or(phi.clone(), kchi.clone()), psi.clone());
    let t = sb.tautology(Formula::implies(
        Formula::or(or2.clone(), kchi.clone()),
        rearranged.clone(),
    ));
    let step = sb.chain(gw1, t); // [g]body -> ((phi | [g]chi) | psi)
                                 // Box both sides.
    let nec = sb.necessitation(g.clone(), step);
    let dist = sb.distributivity(g.clone(), boxed_body.clone(), rearranged.clone());
    let boxed_step = sb.modus_ponens(nec, dist); // [g][g]body -> [g](...)
    let pos = sb.pos_introspection(g.clone(), body.clone());
    let to_boxed = sb.chain(pos, boxed_step); // [g]body -> [g]((phi|[g]chi)|psi)
                                              // Gateway over {g} and A.
    let gw2 = sb.gateway(
        g.clone(),
        g.clone(),
        edge_set(&[&g]),
        left,
        Formula::not(Formula::or(phi.clone(), kchi.clone())),
        psi.clone(),
    );
    let step = sb.chain(to_boxed, gw2); // [g]body -> ((phi|[g]chi) | [g]psi)
                                        // Final rearrangement to ((phi | [g]psi) | [g]chi).
    let target = Formula::or(Formula::or(phi.clone(), kpsi.clone()), kchi.clone());
    let t = sb.tautology(Formula::implies(
        Formula::or(Formula::or(phi.clone(), kchi), kpsi),
        target,
    ));
    sb.chain(step, t);
    Ok(sb.finish())
}

/// `phi -> [e] phi` for `phi` in `Phi(Sigma,{e})`: every edge is a gateway
/// between itself and itself.
pub fn pre_xyz_script(
    sig: &Signature,
    e: &EdgeId,
    phi: &Formula,
) -> Result<ProofScript, FixtureError> {
    if !sig.graph().has_edge(e) {
        return Err(mismatch(format!("no edge `{e}` in the signature")));
    }
    if !in_fragment(sig, phi, &edge_set(&[e])) {
        return Err(mismatch("fixture formula must be local to the edge"));
    }
    let mut sb = ScriptBuilder::theorem(sig.clone());
    let t = sb.tautology(Formula::implies(phi.clone(), phi.clone()));
    let nec = sb.necessitation(e.clone(), t);
    let gw = sb.gateway(
        e.clone(),
        e.clone(),
        edge_set(&[e]),
        edge_set(&[e]),
        phi.clone(),
        phi.clone(),
    );
    let _ = gw;
    sb.modus_ponens(nec, gw);
    Ok(sb.finish())
}

/// A hypothesis-mode template for the derived boxing rule: from
/// `X = {~[e]theta, ~[e]theta -> ~[e]theta2}`, a subset of `Phi(Sigma,{e})`,
/// the script derives `phi = ~[e]theta2` by Modus Ponens and then `[e] phi`
/// without Necessitation, via Negative Introspection.
pub fn xyz_script(
    sig: &Signature,
    e: &EdgeId,
    theta: &Formula,
    theta2: &Formula,
) -> Result<ProofScript, FixtureError> {
    if !sig.graph().has_edge(e) {
        return Err(mismatch(format!("no edge `{e}` in the signature")));
    }
    let h0 = Formula::not(Formula::knows(e.clone(), theta.clone()));
    let h1 = Formula::implies(
        h0.clone(),
        Formula::not(Formula::knows(e.clone(), theta2.clone())),
    );
    let mut sb = ScriptBuilder::hypotheses(sig.clone(), vec![h0, h1]);
    let a = sb.hypothesis(0);
    let b = sb.hypothesis(1);
    let derived = sb.modus_ponens(a, b); // ~[e]theta2
    let intro = sb.neg_introspection(e.clone(), theta2.clone());
    sb.modus_ponens(derived, intro); // [e]~[e]theta2
    Ok(sb.finish())
}

/// Every shipped derivation whose topology requirements the signature meets,
/// instantiated with propositions drawn from the signature.
pub fn derive_lemma_fixtures(sig: &Signature) -> Result<Vec<NamedScript>, FixtureError> {
    let mut out = Vec::new();
    let first_prop_on = |e: &EdgeId| -> Option<Formula> {
        sig.props_of(e)
            .and_then(|ps| ps.iter().next())
            .map(|p| Formula::Prop(p.clone()))
    };
    let graph = sig.graph();
    if let Some(order) = line_roles(graph) {
        let phi = first_prop_on(&order[0]).unwrap_or_else(Formula::top);
        match order.len() {
            3 => out.push(NamedScript {
                name: "example-1",
                script: example1_script(sig, &phi)?,
            }),
            5 => out.push(NamedScript {
                name: "example-2",
                script: example2_script(sig, &phi)?,
            }),
            _ => {}
        }
    }
    if let Some(roles) = relay_roles(graph) {
        let phi = first_prop_on(&roles.m).unwrap_or_else(Formula::top);
        out.push(NamedScript {
            name: "example-3",
            script: example3_script(sig, &phi)?,
        });
        let phi_a = first_prop_on(&roles.m).unwrap_or_else(Formula::top);
        let psi_b = first_prop_on(&roles.k1)
            .unwrap_or_else(|| Formula::knows(roles.k1.clone(), Formula::Falsum));
        out.push(NamedScript {
            name: "vee-lemma",
            script: vee_lemma_script(sig, &phi_a, &psi_b)?,
        });
        let phi_g = first_prop_on(&roles.m1)
            .unwrap_or_else(|| Formula::knows(roles.m1.clone(), Formula::Falsum));
        let chi_b = first_prop_on(&roles.c1)
            .unwrap_or_else(|| Formula::knows(roles.c1.clone(), Formula::Falsum));
        out.push(NamedScript {
            name: "second-vee-lemma",
            script: second_vee_lemma_script(sig, &phi_g, &phi_a, &chi_b)?,
        });
    }
    // The two edge-local results fit any signature; use the first edge.
    if let Some(e) = graph.edge_ids().next().cloned() {
        let local = first_prop_on(&e).unwrap_or_else(|| Formula::knows(e.clone(), Formula::Falsum));
        let local2 = Formula::not(local.clone());
        out.push(NamedScript {
            name: "pre-xyz",
            script: pre_xyz_script(sig, &e, &local)?,
        });
        out.push(NamedScript {
            name: "xyz",
            script: xyz_script(sig, &e, &local, &local2)?,
        });
    }
    if out.is_empty() {
        return Err(mismatch("no shipped derivation fits this signature"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::parse;

    #[test]
    fn example1_is_accepted_and_concludes_correctly() {
        let sig = fixtures::line3_signature();
        let phi = parse(&sig, "pa").unwrap();
        let script = example1_script(&sig, &phi).unwrap();
        check_proof(&script).unwrap();
        let expected = parse(&sig, "[a](~[b] pa -> [c] pa) -> [b] pa").unwrap();
        assert_eq!(script.conclusion().unwrap(), &expected);
        // The same formula in disjunction sugar.
        let sugar = parse(&sig, "[a]([b] pa | [c] pa) -> [b] pa").unwrap();
        assert_eq!(script.conclusion().unwrap(), &sugar);
    }

    #[test]
    fn example2_is_accepted() {
        let sig = fixtures::line5_signature();
        let phi = parse(&sig, "pa").unwrap();
        let script = example2_script(&sig, &phi).unwrap();
        check_proof(&script).unwrap();
        let expected = parse(&sig, "[a] [e] [c] pa -> [b] [d] pa").unwrap();
        assert_eq!(script.conclusion().unwrap(), &expected);
    }

    #[test]
    fn example3_is_accepted() {
        let sig = fixtures::figure3_signature();
        let phi = parse(&sig, "pm").unwrap();
        let script = example3_script(&sig, &phi).unwrap();
        check_proof(&script).unwrap();
        let expected = parse(&sig, "[m] [m''] pm -> [m'] [m''] pm").unwrap();
        assert_eq!(script.conclusion().unwrap(), &expected);
    }

    #[test]
    fn lemma_fixtures_are_accepted() {
        for sig in [
            fixtures::line3_signature(),
            fixtures::line5_signature(),
            fixtures::figure3_signature(),
        ] {
            let scripts = derive_lemma_fixtures(&sig).unwrap();
            assert!(!scripts.is_empty());
            for named in &scripts {
                check_proof(&named.script)
                    .unwrap_or_else(|r| panic!("{} rejected: {r}", named.name));
            }
        }
    }

    #[test]
    fn all_seven_results_are_covered() {
        let mut names = BTreeSet::new();
        for sig in [
            fixtures::line3_signature(),
            fixtures::line5_signature(),
            fixtures::figure3_signature(),
        ] {
            for named in derive_lemma_fixtures(&sig).unwrap() {
                names.insert(named.name);
            }
        }
        for required in [
            "example-1",
            "example-2",
            "example-3",
            "vee-lemma",
            "second-vee-lemma",
            "pre-xyz",
            "xyz",
        ] {
            assert!(names.contains(required), "missing {required}");
        }
    }

    #[test]
    fn gateway_with_mutated_sets_is_rejected() {
        let sig = fixtures::figure3_signature();
        let phi = parse(&sig, "pm").unwrap();
        let mut script = example3_script(&sig, &phi).unwrap();
        // Break the gateway justification's sets: m' does not separate
        // {m} from {m} (the single-edge path m avoids it).
        for line in &mut script.lines {
            if let Justification::Gateway { left, right, .. } = &mut line.justification {
                *left = BTreeSet::from([EdgeId::from("m")]);
                *right = BTreeSet::from([EdgeId::from("m")]);
            }
        }
        match check_proof(&script) {
            Err(r) => assert_eq!(r.reason, ReasonCode::NotGateway),
            Ok(()) => panic!("mutated gateway accepted"),
        }
    }

    #[test]
    fn fragment_violation_is_reported() {
        let sig = fixtures::figure3_signature();
        // Consequent pm is homed at m, outside the right fragment {m''}.
        let phi = parse(&sig, "pm").unwrap();
        let mut sb = ScriptBuilder::theorem(sig.clone());
        sb.gateway(
            "m",
            "m'",
            BTreeSet::from([EdgeId::from("m")]),
            BTreeSet::from([EdgeId::from("m''")]),
            Formula::top(),
            phi,
        );
        match check_proof(&sb.finish()) {
            Err(r) => assert_eq!(r.reason, ReasonCode::FragmentViolation),
            Ok(()) => panic!("fragment violation accepted"),
        }
    }

    #[test]
    fn necessitation_is_forbidden_with_hypotheses() {
        let sig = fixtures::line3_signature();
        let phi = parse(&sig, "pa").unwrap();
        let mut sb = ScriptBuilder::hypotheses(sig, vec![phi.clone()]);
        let h = sb.hypothesis(0);
        sb.necessitation("a", h);
        let script = sb.finish();
        match check_proof(&script) {
            Err(r) => {
                assert_eq!(r.reason, ReasonCode::RuleForbiddenInMode);
                assert_eq!(r.line, 1);
            }
            Ok(()) => panic!("necessitation accepted in hypothesis mode"),
        }
    }

    #[test]
    fn xyz_template_boxes_a_derived_formula() {
        let sig = fixtures::figure3_signature();
        let theta = parse(&sig, "pm").unwrap();
        let theta2 = parse(&sig, "qm").unwrap();
        let script = xyz_script(&sig, &"m".into(), &theta, &theta2).unwrap();
        assert_eq!(script.mode, Mode::Hypothesis);
        check_proof(&script).unwrap();
        let conclusion = parse(&sig, "[m] ~[m] qm").unwrap();
        assert_eq!(script.conclusion().unwrap(), &conclusion);
    }

    #[test]
    fn gateway_matching_examples() {
        let sig = fixtures::figure3_signature();
        // The vee-lemma shape with e = g.
        let phi = parse(&sig, "pm'").unwrap();
        let psi = parse(&sig, "pk'").unwrap();
        let f = Formula::implies(
            Formula::knows(
                "m'",
                Formula::implies(Formula::not(phi.clone()), psi.clone()),
            ),
            Formula::implies(Formula::not(phi.clone()), Formula::knows("m'", psi.clone())),
        );
        let left: BTreeSet<EdgeId> = ["m'"].map(EdgeId::from).into_iter().collect();
        let right: BTreeSet<EdgeId> = ["k'", "c'"].map(EdgeId::from).into_iter().collect();
        assert!(match_gateway(
            &sig,
            &f,
            &"m'".into(),
            &"m'".into(),
            &left,
            &right
        ));

        // phi -> [e] phi shape: e is a gateway between {e} and {e}.
        let local = parse(&sig, "pk").unwrap();
        let f = Formula::implies(
            Formula::knows("k", Formula::implies(local.clone(), local.clone())),
            Formula::implies(local.clone(), Formula::knows("k", local.clone())),
        );
        let just_k: BTreeSet<EdgeId> = [EdgeId::from("k")].into_iter().collect();
        assert!(match_gateway(
            &sig,
            &f,
            &"k".into(),
            &"k".into(),
            &just_k,
            &just_k
        ));

        // No leading box: shape mismatch.
        let f = Formula::implies(local.clone(), local);
        assert!(!match_gateway(
            &sig,
            &f,
            &"k".into(),
            &"k".into(),
            &just_k,
            &just_k
        ));
    }

    #[test]
    fn modus_ponens_reference_discipline() {
        let sig = fixtures::line3_signature();
        let phi = parse(&sig, "pa").unwrap();
        let mut sb = ScriptBuilder::theorem(sig);
        let t = sb.tautology(Formula::implies(phi.clone(), phi.clone()));
        let mut script = sb.finish();
        script.lines.push(ProofLine {
            formula: phi,
            justification: Justification::ModusPonens {
                antecedent: 5,
                implication: t,
            },
        });
        match check_proof(&script) {
            Err(r) => assert_eq!(r.reason, ReasonCode::BadReference),
            Ok(()) => panic!("forward reference accepted"),
        }
    }

    #[test]
    fn single_line_mutations_are_rejected() {
        let sig = fixtures::figure3_signature();
        let phi = parse(&sig, "pm").unwrap();
        let script = example3_script(&sig, &phi).unwrap();
        check_proof(&script).unwrap();
        let first_edge = script.sig.graph().edge_ids().next().unwrap().clone();
        for (k, line) in script.lines.iter().enumerate() {
            // Wrap the line in a box: no justification licenses the result.
            let mut mutated = script.clone();
            mutated.lines[k].formula = Formula::knows(first_edge.clone(), line.formula.clone());
            let r = check_proof(&mutated).expect_err("boxed mutation accepted");
            assert!(r.line >= k, "rejection before the mutated line");
            // Replace the line by falsum: same story.
            let mut mutated = script.clone();
            mutated.lines[k].formula = Formula::Falsum;
            let r = check_proof(&mutated).expect_err("falsum mutation accepted");
            assert!(r.line >= k);
        }
    }
}

#[cfg(test)]
mod rejection_tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::parse;

    #[test]
    fn non_tautologies_are_rejected_with_their_code() {
        let sig = fixtures::line3_signature();
        let truth_shape = parse(&sig, "[a] pa -> pa").unwrap();
        let mut sb = ScriptBuilder::theorem(sig);
        sb.tautology(truth_shape); // a modal axiom, not a tautology
        match check_proof(&sb.finish()) {
            Err(r) => assert_eq!(r.reason, ReasonCode::NotTautology),
            Ok(()) => panic!("modal axiom accepted as a tautology"),
        }
    }

    #[test]
    fn hypothesis_lines_in_theorem_mode_are_rejected() {
        let sig = fixtures::line3_signature();
        let phi = parse(&sig, "pa").unwrap();
        let script = ProofScript {
            sig,
            mode: Mode::Theorem,
            hypotheses: Vec::new(),
            lines: vec![ProofLine { formula: phi, justification: Justification::Hypothesis(0) }],
        };
        match check_proof(&script) {
            Err(r) => assert_eq!(r.reason, ReasonCode::RuleForbiddenInMode),
            Ok(()) => panic!("hypothesis accepted in theorem mode"),
        }
    }

    #[test]
    fn out_of_range_hypothesis_is_a_bad_reference() {
        let sig = fixtures::line3_signature();
        let phi = parse(&sig, "pa").unwrap();
        let script = ProofScript {
            sig,
            mode: Mode::Hypothesis,
            hypotheses: vec![phi.clone()],
            lines: vec![ProofLine { formula: phi, justification: Justification::Hypothesis(3) }],
        };
        match check_proof(&script) {
            Err(r) => assert_eq!(r.reason, ReasonCode::BadReference),
            Ok(()) => panic!("missing hypothesis accepted"),
        }
    }
}
