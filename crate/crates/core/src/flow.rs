//! Network flows realizing finite knowledge profiles, with exact rational
//! arithmetic throughout.
//!
//! A knowledge profile abstracts, per edge `e`, three membership facts about
//! an edge-local theory: `sink(e)` ("the edge's own disjunct holds"),
//! `knows_delta(e)` ("the observer of `e` knows the global disjunction"),
//! and `knows_side(end)` ("the observer of `e` knows the disjunction over
//! the component on that end's side"). A flow assignment puts one rational
//! on each edge end; positive means water entering the pipe at that end.
//! Water may be pumped in at vertices and in the middle of pipes, and leaks
//! only through open sinks.
//!
//! The operations build a base flow from the sinks, augment it edge by edge
//! along certified paths until every edge's conditions are enforced, and
//! reroute a flow to match prescribed values on one edge while staying
//! valid everywhere.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::multigraph::{EdgeEnd, EdgeId, GraphError, Multigraph, Path, Side, VertexId};

/// Exact rational flow value.
pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("profile graph must be connected")]
    Disconnected,
    #[error("invalid profile: {0:?}")]
    InvalidProfile(Vec<ProfileViolation>),
    #[error("input flow does not satisfy its claimed conditions: {0}")]
    InvalidInput(String),
    #[error("no certified path from edge `{edge}` to an open sink")]
    NoGammaPath { edge: EdgeId },
    #[error("profile admits no flow: edge `{edge}` has no certified path to a sink")]
    InconsistentProfile { edge: EdgeId },
    #[error("target values are inconsistent with the profile on `{edge}`: {detail}")]
    CaseViolation { edge: EdgeId, detail: String },
    #[error("scale factor must be strictly positive")]
    NonPositiveScale,
    #[error("flow assignment is missing end {0}")]
    IncompleteFlow(EdgeEnd),
}

/// A violated profile invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileViolation {
    /// `knows_side` holds at an end of the edge but `knows_delta` does not.
    Monotonicity { edge: EdgeId },
    /// `knows_delta` holds on a non-sink edge but neither end has
    /// `knows_side`.
    Split { edge: EdgeId },
}

/// The finite boolean abstraction of one edge-local theory per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeProfile {
    graph: Multigraph,
    sink: BTreeMap<EdgeId, bool>,
    knows_delta: BTreeMap<EdgeId, bool>,
    knows_side: BTreeMap<EdgeEnd, bool>,
}

impl KnowledgeProfile {
    /// An all-false profile over a connected graph.
    pub fn new(graph: Multigraph) -> Result<KnowledgeProfile, FlowError> {
        if !graph.is_connected() {
            return Err(FlowError::Disconnected);
        }
        let sink = graph.edge_ids().map(|e| (e.clone(), false)).collect();
        let knows_delta = graph.edge_ids().map(|e| (e.clone(), false)).collect();
        let knows_side = graph
            .all_ends()
            .into_iter()
            .map(|end| (end, false))
            .collect();
        Ok(KnowledgeProfile {
            graph,
            sink,
            knows_delta,
            knows_side,
        })
    }

    pub fn graph(&self) -> &Multigraph {
        &self.graph
    }

    pub fn sink(&self, e: &EdgeId) -> bool {
        self.sink.get(e).copied().unwrap_or(false)
    }

    pub fn knows_delta(&self, e: &EdgeId) -> bool {
        self.knows_delta.get(e).copied().unwrap_or(false)
    }

    pub fn knows_side(&self, end: &EdgeEnd) -> bool {
        self.knows_side.get(end).copied().unwrap_or(false)
    }

    pub fn set_sink(&mut self, e: impl Into<EdgeId>, value: bool) -> Result<(), FlowError> {
        let e = e.into();
        if !self.graph.has_edge(&e) {
            return Err(GraphError::UnknownEdge(e).into());
        }
        self.sink.insert(e, value);
        Ok(())
    }

    pub fn set_knows_delta(&mut self, e: impl Into<EdgeId>, value: bool) -> Result<(), FlowError> {
        let e = e.into();
        if !self.graph.has_edge(&e) {
            return Err(GraphError::UnknownEdge(e).into());
        }
        self.knows_delta.insert(e, value);
        Ok(())
    }

    pub fn set_knows_side(&mut self, end: EdgeEnd, value: bool) -> Result<(), FlowError> {
        if !self.graph.has_edge(&end.edge) {
            return Err(GraphError::UnknownEdge(end.edge).into());
        }
        self.knows_side.insert(end, value);
        Ok(())
    }

    pub fn sinks(&self) -> impl Iterator<Item = &EdgeId> {
        self.sink.iter().filter(|(_, v)| **v).map(|(e, _)| e)
    }

    /// Checks the two profile invariants; an empty list means well formed.
    pub fn validate(&self) -> Vec<ProfileViolation> {
        let mut out = Vec::new();
        for e in self.graph.edge_ids() {
            let ends = self.graph.ends(e).unwrap();
            let side_any = ends.iter().any(|end| self.knows_side(end));
            if side_any && !self.knows_delta(e) {
                out.push(ProfileViolation::Monotonicity { edge: e.clone() });
            }
            if self.knows_delta(e) && !self.sink(e) && !side_any {
                out.push(ProfileViolation::Split { edge: e.clone() });
            }
        }
        out
    }
}

/// One exact rational per edge end, total over the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowAssignment {
    flow: BTreeMap<EdgeEnd, Rational>,
}

impl FlowAssignment {
    /// The all-zero flow over a graph.
    pub fn zero(graph: &Multigraph) -> FlowAssignment {
        FlowAssignment {
            flow: graph
                .all_ends()
                .into_iter()
                .map(|end| (end, Rational::zero()))
                .collect(),
        }
    }

    pub fn from_map(
        graph: &Multigraph,
        flow: BTreeMap<EdgeEnd, Rational>,
    ) -> Result<FlowAssignment, FlowError> {
        for end in graph.all_ends() {
            if !flow.contains_key(&end) {
                return Err(FlowError::IncompleteFlow(end));
            }
        }
        Ok(FlowAssignment { flow })
    }

    pub fn get(&self, end: &EdgeEnd) -> &Rational {
        &self.flow[end]
    }

    fn add(&mut self, end: &EdgeEnd, delta: &Rational) {
        let slot = self.flow.get_mut(end).expect("flow is total");
        *slot += delta;
    }

    fn set(&mut self, end: &EdgeEnd, value: Rational) {
        self.flow.insert(end.clone(), value);
    }

    /// Sum of the two end values of an edge.
    pub fn edge_sum(&self, e: &EdgeId) -> Rational {
        let zero = EdgeEnd {
            edge: e.clone(),
            side: Side::Zero,
        };
        let one = EdgeEnd {
            edge: e.clone(),
            side: Side::One,
        };
        self.flow[&zero].clone() + self.flow[&one].clone()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EdgeEnd, &Rational)> {
        self.flow.iter()
    }

    /// The largest absolute end value.
    pub fn max_abs(&self) -> Rational {
        self.flow
            .values()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// The per-edge and per-vertex flow conditions, identified as in the value
/// and local-condition definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConditionId {
    C1c,
    C2a,
    C2b,
    C2c,
    C3a,
    C3b,
    Local,
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConditionId::C1c => "1c",
            ConditionId::C2a => "2a",
            ConditionId::C2b => "2b",
            ConditionId::C2c => "2c",
            ConditionId::C3a => "3a",
            ConditionId::C3b => "3b",
            ConditionId::Local => "local",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowViolation {
    pub condition: ConditionId,
    /// The offending edge or vertex.
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for FlowViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.condition, self.subject, self.detail)
    }
}

fn violation(condition: ConditionId, subject: impl fmt::Display, detail: String) -> FlowViolation {
    FlowViolation {
        condition,
        subject: subject.to_string(),
        detail,
    }
}

/// Checks the per-edge conditions for one edge against a pair of end values.
/// `enforced` states whether the edge is in the enforcement set F.
fn edge_conditions(
    profile: &KnowledgeProfile,
    bridges: &BTreeSet<EdgeId>,
    e: &EdgeId,
    values: [&Rational; 2],
    enforced: bool,
) -> Vec<FlowViolation> {
    let mut out = Vec::new();
    let sum = values[0].clone() + values[1].clone();
    let sink = profile.sink(e);
    let knows_delta = profile.knows_delta(e);
    let ends = profile.graph().ends(e).unwrap();

    // 1(c): the edge leaks iff its sink is open.
    if (sum > Rational::zero()) != sink {
        out.push(violation(
            ConditionId::C1c,
            e,
            format!("edge sum {sum} must be > 0 iff the sink is open (sink = {sink})"),
        ));
    }
    if bridges.contains(e) {
        // 2(a): a closed bridge carries a pure through-flow.
        if !sink && !sum.is_zero() {
            out.push(violation(
                ConditionId::C2a,
                e,
                format!("closed bridge has edge sum {sum}"),
            ));
        }
        // 2(b): outflow at an end demands side knowledge at that end.
        for (i, end) in ends.iter().enumerate() {
            if values[i] < &Rational::zero() && !profile.knows_side(end) {
                out.push(violation(
                    ConditionId::C2b,
                    end,
                    format!("negative end value {} without side knowledge", values[i]),
                ));
            }
        }
        // 2(c): an enforced knowing bridge must have a flow direction.
        if enforced
            && knows_delta
            && !sink
            && values[0] >= &Rational::zero()
            && values[1] >= &Rational::zero()
        {
            out.push(violation(
                ConditionId::C2c,
                e,
                "enforced knowing bridge has no negative end".to_string(),
            ));
        }
    } else {
        // 3(a): a non-bridge may pump water in only if it knows.
        if sum < Rational::zero() && !knows_delta {
            out.push(violation(
                ConditionId::C3a,
                e,
                format!("edge sum {sum} < 0 without knowledge"),
            ));
        }
        // 3(b): an enforced knowing non-bridge must pump water in.
        if enforced && knows_delta && !sink && sum >= Rational::zero() {
            out.push(violation(
                ConditionId::C3b,
                e,
                format!("enforced knowing non-bridge has edge sum {sum} >= 0"),
            ));
        }
    }
    out
}

/// Checks a flow against the profile with enforcement set `enforced`:
/// conditions 1(c), 2(a)-2(c), 3(a)-3(b) per edge and the vertex condition
/// (no water leaks at a vertex unless an incident sink is open). An empty
/// report means the flow verifies.
pub fn verify_flow(
    profile: &KnowledgeProfile,
    flow: &FlowAssignment,
    enforced: &BTreeSet<EdgeId>,
) -> Result<Vec<FlowViolation>, FlowError> {
    let graph = profile.graph();
    for e in enforced {
        if !graph.has_edge(e) {
            return Err(GraphError::UnknownEdge(e.clone()).into());
        }
    }
    for end in graph.all_ends() {
        if !flow.flow.contains_key(&end) {
            return Err(FlowError::IncompleteFlow(end));
        }
    }
    let bridges = graph.bridges()?;
    let mut out = Vec::new();
    for e in graph.edge_ids() {
        let [n0, n1] = graph.ends(e).unwrap();
        out.extend(edge_conditions(
            profile,
            &bridges,
            e,
            [flow.get(&n0), flow.get(&n1)],
            enforced.contains(e),
        ));
    }
    for v in graph.vertices() {
        let incident = graph.incident_edges(v).unwrap();
        if incident.iter().any(|e| profile.sink(e)) {
            continue;
        }
        let sum: Rational = graph
            .ends_at(v)
            .unwrap()
            .iter()
            .map(|end| flow.get(end).clone())
            .sum();
        if sum < Rational::zero() {
            out.push(violation(
                ConditionId::Local,
                v,
                format!("vertex end sum {sum} < 0 with every incident sink closed"),
            ));
        }
    }
    Ok(out)
}

/// The base flow: 1 on both ends of every open sink, 0 elsewhere. Verifies
/// with an empty enforcement set.
pub fn build_base(profile: &KnowledgeProfile) -> Result<FlowAssignment, FlowError> {
    let problems = profile.validate();
    if !problems.is_empty() {
        return Err(FlowError::InvalidProfile(problems));
    }
    let mut flow = FlowAssignment::zero(profile.graph());
    for e in profile.sinks() {
        for end in profile.graph().ends(e).unwrap() {
            flow.set(&end, Rational::one());
        }
    }
    Ok(flow)
}

// ---------------------------------------------------------------------------
// Certified paths to a sink.

/// One traversal step of a certified path. `near` is the end toward the
/// path's origin, `far` the end the path continues through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaStep {
    pub edge: EdgeId,
    pub near: EdgeEnd,
    pub far: EdgeEnd,
    pub license: GammaLicense,
}

/// Which clause of the certified-path definition licenses a step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaLicense {
    /// First edge: side knowledge through the far end, sink closed.
    Start { knows_side: EdgeEnd },
    /// Interior edge: sink closed; a bridge additionally needs side
    /// knowledge through its far end.
    Interior { bridge_knows_side: Option<EdgeEnd> },
    /// Terminal edge: its sink is open.
    Sink,
}

/// A path from a knowing edge to an open sink, with per-step certificates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaPath {
    pub steps: Vec<GammaStep>,
}

impl GammaPath {
    /// The underlying alternating path `e0, v1, ..., vk, ek`.
    pub fn to_path(&self, graph: &Multigraph) -> Path {
        let edges = self.steps.iter().map(|s| s.edge.clone()).collect();
        let vertices = self.steps[1..]
            .iter()
            .map(|s| {
                graph
                    .end_vertex(&s.near)
                    .expect("step ends are in the graph")
            })
            .collect();
        Path {
            edges,
            vertices,
            circular: false,
        }
    }

    /// Re-checks every certificate against a profile.
    pub fn verify(&self, profile: &KnowledgeProfile) -> Result<(), String> {
        let graph = profile.graph();
        let bridges = graph.bridges().map_err(|e| e.to_string())?;
        if self.steps.len() < 2 {
            return Err("a certified path has at least two edges".into());
        }
        self.to_path(graph)
            .validate(graph)
            .map_err(|e| e.to_string())?;
        for (i, step) in self.steps.iter().enumerate() {
            let last = i + 1 == self.steps.len();
            match (&step.license, last) {
                (GammaLicense::Start { knows_side }, false) if i == 0 => {
                    if *knows_side != step.far {
                        return Err("start certificate must name the far end".into());
                    }
                    if !profile.knows_side(knows_side) {
                        return Err(format!("no side knowledge at {knows_side}"));
                    }
                    if profile.sink(&step.edge) {
                        return Err(format!("start edge `{}` is a sink", step.edge));
                    }
                }
                (GammaLicense::Interior { bridge_knows_side }, false) if i > 0 => {
                    if profile.sink(&step.edge) {
                        return Err(format!("interior edge `{}` is a sink", step.edge));
                    }
                    if bridges.contains(&step.edge) {
                        let Some(end) = bridge_knows_side else {
                            return Err(format!(
                                "interior bridge `{}` lacks a side certificate",
                                step.edge
                            ));
                        };
                        if *end != step.far || !profile.knows_side(end) {
                            return Err(format!("no side knowledge at {end}"));
                        }
                    }
                }
                (GammaLicense::Sink, true) => {
                    if !profile.sink(&step.edge) {
                        return Err(format!("terminal edge `{}` is not a sink", step.edge));
                    }
                }
                _ => return Err(format!("step {i} carries the wrong certificate kind")),
            }
        }
        Ok(())
    }
}

/// Breadth-first search for a certified path starting at `e`. When `toward`
/// names an end of `e`, the path leaves through that end; otherwise both
/// ends with side knowledge are seeded, side 0 first. Extension candidates
/// are visited in sorted edge order, so the result is deterministic.
pub fn find_gamma_path(
    profile: &KnowledgeProfile,
    e: &EdgeId,
    toward: Option<EdgeEnd>,
) -> Result<GammaPath, FlowError> {
    let graph = profile.graph();
    if !graph.has_edge(e) {
        return Err(GraphError::UnknownEdge(e.clone()).into());
    }
    let bridges = graph.bridges()?;
    let no_path = || FlowError::NoGammaPath { edge: e.clone() };
    if profile.sink(e) {
        return Err(no_path());
    }

    struct Partial {
        steps: Vec<GammaStep>,
        visited: BTreeSet<VertexId>,
        at: VertexId,
    }
    let mut queue: VecDeque<Partial> = VecDeque::new();
    for end in graph.ends(e)? {
        if let Some(t) = &toward {
            if *t != end {
                continue;
            }
        }
        if !profile.knows_side(&end) {
            continue;
        }
        let far_vertex = graph.end_vertex(&end)?;
        let step = GammaStep {
            edge: e.clone(),
            near: end.other(),
            far: end.clone(),
            license: GammaLicense::Start {
                knows_side: end.clone(),
            },
        };
        queue.push_back(Partial {
            steps: vec![step],
            visited: BTreeSet::from([far_vertex.clone()]),
            at: far_vertex,
        });
    }

    // Continuing past an edge needs its certificate: the start edge's is
    // established at seeding, interior ones at enqueue time.
    while let Some(partial) = queue.pop_front() {
        for f in graph.incident_edges(&partial.at)? {
            if partial.steps.iter().any(|s| s.edge == *f) {
                continue;
            }
            let near = graph.end_at(f, &partial.at)?;
            let far = near.other();
            if profile.sink(f) {
                let mut steps = partial.steps.clone();
                steps.push(GammaStep {
                    edge: f.clone(),
                    near,
                    far,
                    license: GammaLicense::Sink,
                });
                return Ok(GammaPath { steps });
            }
            let far_vertex = graph.end_vertex(&far)?;
            if far_vertex == partial.at || partial.visited.contains(&far_vertex) {
                continue;
            }
            let bridge_knows_side = if bridges.contains(f) {
                if !profile.knows_side(&far) {
                    continue;
                }
                Some(far.clone())
            } else {
                None
            };
            let mut steps = partial.steps.clone();
            steps.push(GammaStep {
                edge: f.clone(),
                near,
                far,
                license: GammaLicense::Interior { bridge_knows_side },
            });
            let mut visited = partial.visited.clone();
            visited.insert(far_vertex.clone());
            queue.push_back(Partial {
                steps,
                visited,
                at: far_vertex,
            });
        }
    }
    Err(no_path())
}

/// Record of one flow update along a path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathAugmentation {
    pub route: AugmentationRoute,
    /// Strictly exceeds every absolute flow value it is applied against.
    pub lambda: Rational,
    pub mu: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AugmentationRoute {
    Certified(GammaPath),
    Circular(Path),
}

/// The smallest integer strictly greater than `x`; keeps updates
/// deterministic and flow files stable.
fn smallest_integer_above(x: &Rational) -> Rational {
    x.floor() + Rational::one()
}

/// Enforces the flow conditions for one more edge `h` on a flow that
/// already verifies with `enforced_prior`. If the edge does not know the
/// global disjunction, or is itself an open sink, the flow is returned
/// unchanged; otherwise a certified path from `h` to an open sink carries an
/// update of magnitude `lambda` that puts `h` into its required state.
pub fn augment_for_edge(
    profile: &KnowledgeProfile,
    flow: &FlowAssignment,
    enforced_prior: &BTreeSet<EdgeId>,
    h: &EdgeId,
) -> Result<FlowAssignment, FlowError> {
    augment_for_edge_traced(profile, flow, enforced_prior, h).map(|(f, _)| f)
}

pub fn augment_for_edge_traced(
    profile: &KnowledgeProfile,
    flow: &FlowAssignment,
    enforced_prior: &BTreeSet<EdgeId>,
    h: &EdgeId,
) -> Result<(FlowAssignment, Option<PathAugmentation>), FlowError> {
    let graph = profile.graph();
    if !graph.has_edge(h) {
        return Err(GraphError::UnknownEdge(h.clone()).into());
    }
    if enforced_prior.contains(h) {
        return Err(FlowError::InvalidInput(format!(
            "edge `{h}` is already enforced"
        )));
    }
    let problems = verify_flow(profile, flow, enforced_prior)?;
    if let Some(first) = problems.first() {
        return Err(FlowError::InvalidInput(format!(
            "{} violations before augmenting, first: {first}",
            problems.len()
        )));
    }
    if !profile.knows_delta(h) || profile.sink(h) {
        return Ok((flow.clone(), None));
    }
    let lambda = smallest_integer_above(&flow.max_abs());
    let gamma = find_gamma_path(profile, h, None)?;
    let bridges = graph.bridges()?;
    let is_bridge = bridges.contains(h);
    let mut out = flow.clone();
    let last = gamma.steps.len() - 1;
    let neg_lambda = -lambda.clone();
    for (i, step) in gamma.steps.iter().enumerate() {
        // A bridge start pushes water through its outer end; a non-bridge
        // start pumps it in mid-pipe instead, leaving its outer end alone.
        if is_bridge || i > 0 {
            out.add(&step.near, &lambda);
        }
        if i < last {
            out.add(&step.far, &neg_lambda);
        }
    }
    debug_assert!({
        let mut now: BTreeSet<EdgeId> = enforced_prior.clone();
        now.insert(h.clone());
        verify_flow(profile, &out, &now).unwrap().is_empty()
    });
    let record = PathAugmentation {
        route: AugmentationRoute::Certified(gamma),
        lambda,
        mu: None,
    };
    Ok((out, Some(record)))
}

/// Builds a flow verifying on every edge: the base flow folded through
/// `augment_for_edge` over all edges in sorted order. A profile whose
/// knowledge cannot be routed to any open sink is rejected; in particular
/// any sink-free profile with `knows_delta` somewhere must fail.
pub fn build_flow(profile: &KnowledgeProfile) -> Result<FlowAssignment, FlowError> {
    let problems = profile.validate();
    if !problems.is_empty() {
        return Err(FlowError::InvalidProfile(problems));
    }
    let mut flow = build_base(profile)?;
    let mut enforced: BTreeSet<EdgeId> = BTreeSet::new();
    let edges: Vec<EdgeId> = profile.graph().edge_ids().cloned().collect();
    for h in edges {
        flow = augment_for_edge(profile, &flow, &enforced, &h).map_err(|e| match e {
            FlowError::NoGammaPath { edge } => FlowError::InconsistentProfile { edge },
            other => other,
        })?;
        enforced.insert(h);
    }
    Ok(flow)
}

/// Multiplies every end value by a strictly positive factor; verification
/// status is preserved for every profile and enforcement set.
pub fn scale_flow(flow: &FlowAssignment, factor: &Rational) -> Result<FlowAssignment, FlowError> {
    if *factor <= Rational::zero() {
        return Err(FlowError::NonPositiveScale);
    }
    Ok(FlowAssignment {
        flow: flow
            .flow
            .iter()
            .map(|(end, v)| (end.clone(), v * factor))
            .collect(),
    })
}

/// The traversal steps of a circular path through `h`, oriented so that the
/// first step leaves `h` through the end shared with the next edge.
fn orient_cycle(graph: &Multigraph, cycle: &Path, h: &EdgeId) -> Result<Vec<GammaStep>, FlowError> {
    let (a, b) = graph.endpoints(h)?;
    if a == b {
        // A loop is its own one-step cycle.
        let [n0, n1] = graph.ends(h)?;
        return Ok(vec![GammaStep {
            edge: h.clone(),
            near: n0,
            far: n1,
            license: GammaLicense::Interior {
                bridge_knows_side: None,
            },
        }]);
    }
    let v1 = cycle.vertices[0].clone();
    let v0 = if a == v1 { b } else { a };
    let step_count = cycle.edges.len() - 1;
    let mut steps = Vec::with_capacity(step_count);
    for i in 0..step_count {
        let edge = cycle.edges[i].clone();
        let near_vertex = if i == 0 {
            v0.clone()
        } else {
            cycle.vertices[i - 1].clone()
        };
        let far_vertex = cycle.vertices.get(i).cloned().unwrap_or_else(|| v0.clone());
        steps.push(GammaStep {
            near: graph.end_at(&edge, &near_vertex)?,
            far: graph.end_at(&edge, &far_vertex)?,
            edge,
            license: GammaLicense::Interior {
                bridge_knows_side: None,
            },
        });
    }
    Ok(steps)
}

/// Rebuilds a valid flow whose two end values on `target_edge` equal
/// `target` exactly, starting from a flow `base` that verifies everywhere.
/// The target pair must itself be consistent with the profile on that edge
/// (it comes from some flow that verifies there). The construction is
/// case-split on the edge's role:
///
/// * open sink: overwrite the edge, locals at its endpoints are vacuous;
/// * non-bridge, not knowing: shift a circulation around a cycle through
///   the edge;
/// * non-bridge, knowing: scale globally, then shift the cycle;
/// * closed bridge, both flows zero: nothing to do;
/// * closed bridge, same flow direction: one global scaling;
/// * closed bridge, opposite directions: reverse along a certified path
///   with a large detour value `lambda`, compressed by `mu`.
pub fn reroute_to_match(
    profile: &KnowledgeProfile,
    base: &FlowAssignment,
    target_edge: &EdgeId,
    target: (Rational, Rational),
) -> Result<FlowAssignment, FlowError> {
    let graph = profile.graph();
    let h = target_edge;
    if !graph.has_edge(h) {
        return Err(GraphError::UnknownEdge(h.clone()).into());
    }
    let everything: BTreeSet<EdgeId> = graph.edge_ids().cloned().collect();
    let problems = verify_flow(profile, base, &everything)?;
    if let Some(first) = problems.first() {
        return Err(FlowError::InvalidInput(format!(
            "{} violations in the base flow, first: {first}",
            problems.len()
        )));
    }
    let bridges = graph.bridges()?;
    let (t0, t1) = target;
    let bad = edge_conditions(profile, &bridges, h, [&t0, &t1], true);
    if let Some(first) = bad.first() {
        return Err(FlowError::CaseViolation {
            edge: h.clone(),
            detail: first.to_string(),
        });
    }
    let [n0, n1] = graph.ends(h)?;
    let value_at = |end: &EdgeEnd| -> Rational {
        if *end == n0 {
            t0.clone()
        } else {
            t1.clone()
        }
    };
    let l1 = base.get(&n1).clone();

    if profile.sink(h) {
        let mut out = base.clone();
        out.set(&n0, t0);
        out.set(&n1, t1);
        return Ok(out);
    }

    if !bridges.contains(h) {
        let cycle = graph.find_cycle_through(h)?;
        let steps = orient_cycle(graph, &cycle, h)?;
        let start = &steps[0];
        debug_assert_eq!(start.edge, *h);
        if !profile.knows_delta(h) {
            // Both edge sums are exactly zero here, so the two deltas are
            // opposite and the update is a circulation.
            let d_near = value_at(&start.near) - base.get(&start.near);
            let d_far = value_at(&start.far) - base.get(&start.far);
            debug_assert!((d_near.clone() + d_far.clone()).is_zero());
            let mut out = base.clone();
            for step in &steps {
                out.add(&step.near, &d_near);
                out.add(&step.far, &d_far);
            }
            return Ok(out);
        }
        // Both edge sums are strictly negative; scale them into agreement,
        // then shift the difference around the cycle.
        let target_sum = t0.clone() + t1.clone();
        let base_sum = base.edge_sum(h);
        debug_assert!(base_sum < Rational::zero() && target_sum < Rational::zero());
        let lambda = target_sum / base_sum;
        let t_v0 = value_at(&start.near);
        let l_v0 = base.get(&start.near).clone();
        let d_near = t_v0.clone() - lambda.clone() * l_v0.clone();
        let d_far = lambda.clone() * l_v0 - t_v0;
        let mut out = scale_flow(base, &lambda)?;
        for step in &steps {
            out.add(&step.near, &d_near);
            out.add(&step.far, &d_far);
        }
        return Ok(out);
    }

    // Closed bridge: both sums are exactly zero.
    let product = t1.clone() * l1.clone();
    if product.is_zero() {
        // Either flow is nonzero on a closed bridge only if the edge knows,
        // and then both must be; a zero/nonzero mix cannot verify.
        if t0.is_zero() && t1.is_zero() && base.get(&n0).is_zero() && base.get(&n1).is_zero() {
            return Ok(base.clone());
        }
        return Err(FlowError::CaseViolation {
            edge: h.clone(),
            detail: "one flow is zero on the bridge and the other is not".into(),
        });
    }
    if product > Rational::zero() {
        return scale_flow(base, &(t1 / l1));
    }
    // Opposite directions: route the reversal along a certified path out of
    // the target's negative end.
    let neg_end = if t1 < Rational::zero() {
        n1.clone()
    } else {
        n0.clone()
    };
    let pos_end = neg_end.other();
    let lambda = smallest_integer_above(&base.max_abs());
    let mu = value_at(&pos_end) / (base.get(&pos_end) + lambda.clone());
    debug_assert!(mu > Rational::zero());
    let gamma = find_gamma_path(profile, h, Some(neg_end))?;
    let mut out = scale_flow(base, &mu)?;
    let bump = mu * lambda;
    let neg_bump = -bump.clone();
    let last = gamma.steps.len() - 1;
    for (i, step) in gamma.steps.iter().enumerate() {
        out.add(&step.near, &bump);
        if i < last {
            out.add(&step.far, &neg_bump);
        }
    }
    Ok(out)
}

/// A reproducible random profile satisfying both profile invariants.
pub fn random_profile(
    graph: &Multigraph,
    rng: &mut impl rand::Rng,
) -> Result<KnowledgeProfile, FlowError> {
    let mut profile = KnowledgeProfile::new(graph.clone())?;
    let edges: Vec<EdgeId> = graph.edge_ids().cloned().collect();
    for e in &edges {
        let sink = rng.gen_bool(0.35);
        let knows_delta = rng.gen_bool(0.5);
        profile.set_sink(e.clone(), sink)?;
        profile.set_knows_delta(e.clone(), knows_delta)?;
        if knows_delta {
            let [end0, end1] = graph.ends(e)?;
            let (side0, side1) = if sink {
                (rng.gen_bool(0.4), rng.gen_bool(0.4))
            } else {
                // The split invariant needs side knowledge somewhere.
                match rng.gen_range(0..3) {
                    0 => (true, false),
                    1 => (false, true),
                    _ => (true, true),
                }
            };
            profile.set_knows_side(end0, side0)?;
            profile.set_knows_side(end1, side1)?;
        }
    }
    debug_assert!(profile.validate().is_empty());
    Ok(profile)
}



#[cfg(test)]
mod error_tests {
    use super::*;

    fn end(e: &str, side: u8) -> EdgeEnd {
        EdgeEnd::new(e, if side == 0 { Side::Zero } else { Side::One })
    }

    #[test]
    fn invalid_profiles_are_rejected_by_construction_ops() {
        let g = Multigraph::new(["x", "y"], [("d", "x", "y")]).unwrap();
        let mut p = KnowledgeProfile::new(g).unwrap();
        p.set_knows_side(end("d", 0), true).unwrap(); // monotonicity broken
        assert!(matches!(build_base(&p), Err(FlowError::InvalidProfile(_))));
        assert!(matches!(build_flow(&p), Err(FlowError::InvalidProfile(_))));
    }

    #[test]
    fn augmenting_from_an_unverified_flow_is_rejected() {
        let g = Multigraph::new(["x", "y"], [("d", "x", "y")]).unwrap();
        let mut p = KnowledgeProfile::new(g).unwrap();
        p.set_sink("d", true).unwrap();
        // All-zero flow violates 1(c) for the open sink.
        let zero = FlowAssignment::zero(p.graph());
        assert!(matches!(
            augment_for_edge(&p, &zero, &BTreeSet::new(), &"d".into()),
            Err(FlowError::InvalidInput(_))
        ));
    }

    #[test]
    fn partial_flows_are_rejected() {
        let g = Multigraph::new(["x", "y"], [("d", "x", "y"), ("e", "x", "y")]).unwrap();
        let p = KnowledgeProfile::new(g.clone()).unwrap();
        let partial: BTreeMap<EdgeEnd, Rational> =
            [(end("d", 0), Rational::zero()), (end("d", 1), Rational::zero())]
                .into_iter()
                .collect();
        assert!(matches!(
            FlowAssignment::from_map(&g, partial.clone()),
            Err(FlowError::IncompleteFlow(_))
        ));
        let half = FlowAssignment { flow: partial };
        assert!(matches!(
            verify_flow(&p, &half, &BTreeSet::new()),
            Err(FlowError::IncompleteFlow(_))
        ));
    }
}
