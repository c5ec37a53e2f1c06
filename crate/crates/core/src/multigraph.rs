//! Undirected multigraphs with loops, and the topology queries the logic is
//! built on: incidence, connected components after edge deletion, bridges,
//! gateway decisions, and path/cycle search.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of a vertex (an agent of the network).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub String);

/// Name of an edge (a communication channel).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub String);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl<T: Into<String>> From<T> for VertexId {
    fn from(s: T) -> Self {
        VertexId(s.into())
    }
}

impl<T: Into<String>> From<T> for EdgeId {
    fn from(s: T) -> Self {
        EdgeId(s.into())
    }
}

/// One of the two sides of an edge, in the stored endpoint order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Zero,
    One,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Zero => 0,
            Side::One => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Zero => Side::One,
            Side::One => Side::Zero,
        }
    }
}

/// One end of an edge. Every edge has exactly two ends, even a loop; the two
/// ends of a loop sit at the same vertex but remain distinct. Flow values and
/// side-knowledge facts are indexed by ends, so loops never collapse an index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeEnd {
    pub edge: EdgeId,
    pub side: Side,
}

impl EdgeEnd {
    pub fn new(edge: impl Into<EdgeId>, side: Side) -> Self {
        EdgeEnd {
            edge: edge.into(),
            side,
        }
    }

    pub fn other(&self) -> EdgeEnd {
        EdgeEnd {
            edge: self.edge.clone(),
            side: self.side.other(),
        }
    }
}

impl fmt::Display for EdgeEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.edge, self.side.index())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("unknown edge `{0}`")]
    UnknownEdge(EdgeId),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(EdgeId),
    #[error("graph is not connected")]
    Disconnected,
    #[error("edge `{0}` is a bridge; no cycle passes through it")]
    IsBridge(EdgeId),
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

/// An alternating sequence `e0, v1, e1, ..., vk, ek` of edges and the
/// vertices shared by consecutive edges. Edges are pairwise distinct and the
/// listed vertices are pairwise distinct; a circular path instead repeats its
/// first edge as its last (`e0 = ek`, `k >= 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub edges: Vec<EdgeId>,
    pub vertices: Vec<VertexId>,
    pub circular: bool,
}

impl Path {
    /// A single-edge path (`k = 0`).
    pub fn single(edge: EdgeId) -> Path {
        Path {
            edges: vec![edge],
            vertices: Vec::new(),
            circular: false,
        }
    }

    /// Checks the path invariants against a graph: consecutive edges share
    /// the listed vertex, edges are distinct (first = last when circular),
    /// and listed vertices are distinct.
    pub fn validate(&self, graph: &Multigraph) -> Result<(), GraphError> {
        let bad = |msg: String| Err(GraphError::InvalidPath(msg));
        if self.edges.is_empty() {
            return bad("a path has at least one edge".into());
        }
        if self.edges.len() != self.vertices.len() + 1 {
            return bad(format!(
                "{} edges require {} interior vertices, got {}",
                self.edges.len(),
                self.edges.len() - 1,
                self.vertices.len()
            ));
        }
        if self.circular {
            if self.vertices.is_empty() {
                return bad("circular path needs k >= 1".into());
            }
            if self.edges.first() != self.edges.last() {
                return bad("circular path must start and end with the same edge".into());
            }
        }
        let distinct_edges: BTreeSet<_> = self.edges
            [..self.edges.len() - if self.circular { 1 } else { 0 }]
            .iter()
            .collect();
        if distinct_edges.len() + if self.circular { 1 } else { 0 } != self.edges.len() {
            return bad("edges are not pairwise distinct".into());
        }
        let distinct_vertices: BTreeSet<_> = self.vertices.iter().collect();
        if distinct_vertices.len() != self.vertices.len() {
            return bad("vertices are not pairwise distinct".into());
        }
        for (i, v) in self.vertices.iter().enumerate() {
            for e in [&self.edges[i], &self.edges[i + 1]] {
                let (a, b) = graph.endpoints(e)?;
                if a != *v && b != *v {
                    return bad(format!("edge `{e}` is not incident to listed vertex `{v}`"));
                }
            }
        }
        Ok(())
    }
}

/// An undirected multigraph: loops and parallel edges are allowed. Immutable
/// after construction; every query is pure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, (VertexId, VertexId)>,
    incidence: BTreeMap<VertexId, BTreeSet<EdgeId>>,
}

impl Multigraph {
    pub fn new<V, VI, E, EI, W>(vertices: V, edges: E) -> Result<Multigraph, GraphError>
    where
        V: IntoIterator<Item = VI>,
        VI: Into<VertexId>,
        E: IntoIterator<Item = (EI, W, W)>,
        EI: Into<EdgeId>,
        W: Into<VertexId>,
    {
        let vertices: BTreeSet<VertexId> = vertices.into_iter().map(Into::into).collect();
        let mut edge_map = BTreeMap::new();
        let mut incidence: BTreeMap<VertexId, BTreeSet<EdgeId>> = vertices
            .iter()
            .map(|v| (v.clone(), BTreeSet::new()))
            .collect();
        for (id, a, b) in edges {
            let id: EdgeId = id.into();
            let a: VertexId = a.into();
            let b: VertexId = b.into();
            for v in [&a, &b] {
                if !vertices.contains(v) {
                    return Err(GraphError::UnknownVertex(v.clone()));
                }
            }
            if edge_map
                .insert(id.clone(), (a.clone(), b.clone()))
                .is_some()
            {
                return Err(GraphError::DuplicateEdge(id));
            }
            incidence.get_mut(&a).unwrap().insert(id.clone());
            incidence.get_mut(&b).unwrap().insert(id);
        }
        Ok(Multigraph {
            vertices,
            edges: edge_map,
            incidence,
        })
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.vertices.iter()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = &EdgeId> {
        self.edges.keys()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_vertex(&self, v: &VertexId) -> bool {
        self.vertices.contains(v)
    }

    pub fn has_edge(&self, e: &EdgeId) -> bool {
        self.edges.contains_key(e)
    }

    /// The two endpoints of an edge in stored order (`Inc(e)`); equal for a
    /// loop.
    pub fn endpoints(&self, e: &EdgeId) -> Result<(VertexId, VertexId), GraphError> {
        self.edges
            .get(e)
            .cloned()
            .ok_or_else(|| GraphError::UnknownEdge(e.clone()))
    }

    pub fn is_loop(&self, e: &EdgeId) -> Result<bool, GraphError> {
        let (a, b) = self.endpoints(e)?;
        Ok(a == b)
    }

    /// The vertex at a given end of an edge.
    pub fn end_vertex(&self, end: &EdgeEnd) -> Result<VertexId, GraphError> {
        let (a, b) = self.endpoints(&end.edge)?;
        Ok(match end.side {
            Side::Zero => a,
            Side::One => b,
        })
    }

    /// The end of edge `e` located at vertex `v`. For a loop this returns
    /// side 0; for a non-loop it is unique.
    pub fn end_at(&self, e: &EdgeId, v: &VertexId) -> Result<EdgeEnd, GraphError> {
        let (a, b) = self.endpoints(e)?;
        if a == *v {
            Ok(EdgeEnd {
                edge: e.clone(),
                side: Side::Zero,
            })
        } else if b == *v {
            Ok(EdgeEnd {
                edge: e.clone(),
                side: Side::One,
            })
        } else {
            Err(GraphError::UnknownVertex(v.clone()))
        }
    }

    /// Both ends of an edge.
    pub fn ends(&self, e: &EdgeId) -> Result<[EdgeEnd; 2], GraphError> {
        if !self.has_edge(e) {
            return Err(GraphError::UnknownEdge(e.clone()));
        }
        Ok([
            EdgeEnd {
                edge: e.clone(),
                side: Side::Zero,
            },
            EdgeEnd {
                edge: e.clone(),
                side: Side::One,
            },
        ])
    }

    /// All ends of all edges, sorted.
    pub fn all_ends(&self) -> Vec<EdgeEnd> {
        self.edges
            .keys()
            .flat_map(|e| {
                [
                    EdgeEnd {
                        edge: e.clone(),
                        side: Side::Zero,
                    },
                    EdgeEnd {
                        edge: e.clone(),
                        side: Side::One,
                    },
                ]
            })
            .collect()
    }

    /// `Inc(v)`: the set of edges incident to `v`, loops included once.
    pub fn incident_edges(&self, v: &VertexId) -> Result<&BTreeSet<EdgeId>, GraphError> {
        self.incidence
            .get(v)
            .ok_or_else(|| GraphError::UnknownVertex(v.clone()))
    }

    /// The ends located at `v`: one per incident non-loop edge, two per
    /// incident loop.
    pub fn ends_at(&self, v: &VertexId) -> Result<Vec<EdgeEnd>, GraphError> {
        let mut out = Vec::new();
        for e in self.incident_edges(v)? {
            let (a, b) = self.endpoints(e)?;
            if a == *v {
                out.push(EdgeEnd {
                    edge: e.clone(),
                    side: Side::Zero,
                });
            }
            if b == *v {
                out.push(EdgeEnd {
                    edge: e.clone(),
                    side: Side::One,
                });
            }
        }
        Ok(out)
    }

    /// `C^v_{-e}`: the connected component of `(V, E \ {e})` containing `v`,
    /// as its vertex set and edge set.
    pub fn component_without(
        &self,
        v: &VertexId,
        e: &EdgeId,
    ) -> Result<(BTreeSet<VertexId>, BTreeSet<EdgeId>), GraphError> {
        if !self.has_vertex(v) {
            return Err(GraphError::UnknownVertex(v.clone()));
        }
        if !self.has_edge(e) {
            return Err(GraphError::UnknownEdge(e.clone()));
        }
        let mut seen_v = BTreeSet::from([v.clone()]);
        let mut seen_e = BTreeSet::new();
        let mut queue = VecDeque::from([v.clone()]);
        while let Some(u) = queue.pop_front() {
            for f in &self.incidence[&u] {
                if f == e {
                    continue;
                }
                seen_e.insert(f.clone());
                let (a, b) = self.edges[f].clone();
                for w in [a, b] {
                    if seen_v.insert(w.clone()) {
                        queue.push_back(w);
                    }
                }
            }
        }
        Ok((seen_v, seen_e))
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.vertices.iter().next() else {
            return true;
        };
        let mut seen = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(u) = queue.pop_front() {
            for f in &self.incidence[&u] {
                let (a, b) = self.edges[f].clone();
                for w in [a, b] {
                    if seen.insert(w.clone()) {
                        queue.push_back(w);
                    }
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// The set of bridges: edges whose removal disconnects the graph. Loops
    /// and parallel duplicates are never bridges.
    pub fn bridges(&self) -> Result<BTreeSet<EdgeId>, GraphError> {
        if !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        // Iterative low-link DFS. Skipping only the tree edge (by id) makes
        // a parallel edge to the parent count as a back edge, so parallel
        // duplicates are never reported.
        let mut order: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut low: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut bridges = BTreeSet::new();
        let mut clock = 0usize;
        let Some(root) = self.vertices.iter().next().cloned() else {
            return Ok(bridges);
        };
        struct Frame {
            vertex: VertexId,
            via_edge: Option<EdgeId>,
            pending: Vec<(EdgeId, VertexId)>,
        }
        let neighbors = |v: &VertexId| -> Vec<(EdgeId, VertexId)> {
            self.incidence[v]
                .iter()
                .filter_map(|e| {
                    let (a, b) = self.edges[e].clone();
                    if a == b {
                        // A loop contributes nothing to connectivity.
                        return None;
                    }
                    let w = if a == *v { b } else { a };
                    Some((e.clone(), w))
                })
                .collect()
        };
        order.insert(root.clone(), clock);
        low.insert(root.clone(), clock);
        clock += 1;
        let mut stack = vec![Frame {
            vertex: root.clone(),
            via_edge: None,
            pending: neighbors(&root),
        }];
        while let Some(frame) = stack.last_mut() {
            match frame.pending.pop() {
                Some((e, w)) => {
                    if Some(&e) == frame.via_edge.as_ref() {
                        continue;
                    }
                    let v = frame.vertex.clone();
                    if let Some(&ord_w) = order.get(&w) {
                        let lv = low[&v].min(ord_w);
                        low.insert(v, lv);
                    } else {
                        order.insert(w.clone(), clock);
                        low.insert(w.clone(), clock);
                        clock += 1;
                        let pending = neighbors(&w);
                        stack.push(Frame {
                            vertex: w,
                            via_edge: Some(e),
                            pending,
                        });
                    }
                }
                None => {
                    let done = stack.pop().unwrap();
                    if let Some(parent) = stack.last() {
                        let lw = low[&done.vertex];
                        if lw > order[&parent.vertex] {
                            bridges.insert(done.via_edge.clone().unwrap());
                        }
                        let lp = low[&parent.vertex].min(lw);
                        low.insert(parent.vertex.clone(), lp);
                    }
                }
            }
        }
        Ok(bridges)
    }

    /// Whether `gate` is a gateway between edge sets `A` and `B`: every path
    /// starting with an edge of `A` and ending with an edge of `B` passes
    /// through `gate`. The gate may belong to either or both sets.
    ///
    /// Decided without path enumeration: single-edge paths force
    /// `A ∩ B ⊆ {gate}`, and beyond that no connected component of
    /// `(V, E \ {gate})` may contain both an edge of `A \ {gate}` and an
    /// edge of `B \ {gate}`.
    pub fn is_gateway(
        &self,
        gate: &EdgeId,
        a: &BTreeSet<EdgeId>,
        b: &BTreeSet<EdgeId>,
    ) -> Result<bool, GraphError> {
        if !self.has_edge(gate) {
            return Err(GraphError::UnknownEdge(gate.clone()));
        }
        for e in a.iter().chain(b.iter()) {
            if !self.has_edge(e) {
                return Err(GraphError::UnknownEdge(e.clone()));
            }
        }
        if a.intersection(b).any(|e| e != gate) {
            return Ok(false);
        }
        let mut remaining: BTreeSet<VertexId> = self.vertices.clone();
        while let Some(v) = remaining.iter().next().cloned() {
            let (comp_v, comp_e) = self.component_without(&v, gate)?;
            let hits_a = a.iter().any(|e| e != gate && comp_e.contains(e));
            let hits_b = b.iter().any(|e| e != gate && comp_e.contains(e));
            if hits_a && hits_b {
                return Ok(false);
            }
            for w in comp_v {
                remaining.remove(&w);
            }
        }
        Ok(true)
    }

    /// A circular path starting and ending at `e`. Its interior edges are
    /// necessarily non-bridges. A loop yields the one-edge cycle `e, v, e`.
    pub fn find_cycle_through(&self, e: &EdgeId) -> Result<Path, GraphError> {
        let (u0, u1) = self.endpoints(e)?;
        if u0 == u1 {
            return Ok(Path {
                edges: vec![e.clone(), e.clone()],
                vertices: vec![u0],
                circular: true,
            });
        }
        // BFS from u1 back to u0 avoiding e; exists iff e is not a bridge.
        let mut prev: BTreeMap<VertexId, (EdgeId, VertexId)> = BTreeMap::new();
        let mut queue = VecDeque::from([u1.clone()]);
        let mut seen = BTreeSet::from([u1.clone()]);
        'search: while let Some(v) = queue.pop_front() {
            for f in &self.incidence[&v] {
                if f == e {
                    continue;
                }
                let (a, b) = self.edges[f].clone();
                let w = if a == v { b } else { a };
                if seen.insert(w.clone()) {
                    prev.insert(w.clone(), (f.clone(), v.clone()));
                    if w == u0 {
                        break 'search;
                    }
                    queue.push_back(w);
                }
            }
        }
        if !prev.contains_key(&u0) {
            return Err(GraphError::IsBridge(e.clone()));
        }
        let mut rev_edges = Vec::new();
        let mut rev_vertices = vec![u0.clone()];
        let mut cur = u0.clone();
        while cur != u1 {
            let (f, p) = prev[&cur].clone();
            rev_edges.push(f);
            rev_vertices.push(p.clone());
            cur = p;
        }
        rev_edges.reverse();
        rev_vertices.reverse();
        // rev_vertices runs u1 .. u0; the interior vertex list of the cycle
        // e, u1, f1, ..., fj, u0, e is exactly that.
        let mut edges = vec![e.clone()];
        edges.extend(rev_edges);
        edges.push(e.clone());
        Ok(Path {
            edges,
            vertices: rev_vertices,
            circular: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn fig3() -> Multigraph {
        fixtures::figure3_graph()
    }

    #[test]
    fn incidence_on_relay_graph() {
        let g = fig3();
        let inc: Vec<_> = g
            .incident_edges(&"q".into())
            .unwrap()
            .iter()
            .cloned()
            .collect();
        assert_eq!(
            inc,
            vec![EdgeId::from("c"), EdgeId::from("k"), EdgeId::from("m")]
        );
        assert_eq!(g.endpoints(&"k".into()).unwrap(), ("q".into(), "u".into()));
    }

    #[test]
    fn incidence_of_isolated_vertex() {
        let g = Multigraph::new(["x", "y"], [("e", "x", "x")]).unwrap();
        assert!(g.incident_edges(&"y".into()).unwrap().is_empty());
        assert!(matches!(
            g.incident_edges(&"z".into()),
            Err(GraphError::UnknownVertex(_))
        ));
    }

    #[test]
    fn component_after_deleting_edge() {
        let g = fig3();
        let (vs, es) = g.component_without(&"u".into(), &"m'".into()).unwrap();
        assert_eq!(
            vs,
            ["p", "q", "u"].map(VertexId::from).into_iter().collect()
        );
        assert_eq!(es, ["m", "k", "c"].map(EdgeId::from).into_iter().collect());

        let (vs, es) = g.component_without(&"u".into(), &"k".into()).unwrap();
        assert_eq!(vs.len(), 6);
        assert_eq!(es.len(), 6);
        assert!(!es.contains(&"k".into()));
    }

    #[test]
    fn component_of_single_edge_graph() {
        let g = Multigraph::new(["v", "w"], [("e", "v", "w")]).unwrap();
        let (vs, es) = g.component_without(&"v".into(), &"e".into()).unwrap();
        assert_eq!(vs, BTreeSet::from([VertexId::from("v")]));
        assert!(es.is_empty());
    }

    #[test]
    fn bridges_of_relay_graph() {
        let g = fig3();
        let b = g.bridges().unwrap();
        assert_eq!(
            b,
            ["m", "m'", "m''"].map(EdgeId::from).into_iter().collect()
        );
    }

    #[test]
    fn triangle_has_no_bridges() {
        let g = Multigraph::new(
            ["a", "b", "c"],
            [("x", "a", "b"), ("y", "b", "c"), ("z", "c", "a")],
        )
        .unwrap();
        assert!(g.bridges().unwrap().is_empty());
    }

    #[test]
    fn both_edges_of_a_path_are_bridges() {
        let g = Multigraph::new(["a", "b", "c"], [("x", "a", "b"), ("y", "b", "c")]).unwrap();
        assert_eq!(g.bridges().unwrap().len(), 2);
    }

    #[test]
    fn loops_and_parallels_are_never_bridges() {
        let g = Multigraph::new(
            ["a", "b"],
            [("x", "a", "b"), ("y", "a", "b"), ("l", "a", "a")],
        )
        .unwrap();
        assert!(g.bridges().unwrap().is_empty());
        let g2 = Multigraph::new(["a", "b"], [("x", "a", "b"), ("l", "a", "a")]).unwrap();
        assert_eq!(g2.bridges().unwrap(), BTreeSet::from([EdgeId::from("x")]));
    }

    #[test]
    fn bridges_require_connectivity() {
        let g = Multigraph::new(["a", "b"], std::iter::empty::<(&str, &str, &str)>()).unwrap();
        assert!(matches!(g.bridges(), Err(GraphError::Disconnected)));
    }

    fn set(ids: &[&str]) -> BTreeSet<EdgeId> {
        ids.iter().map(|s| EdgeId::from(*s)).collect()
    }

    #[test]
    fn gateway_facts_on_relay_graph() {
        let g = fig3();
        assert!(g
            .is_gateway(&"m'".into(), &set(&["m", "k"]), &set(&["k'", "c'"]))
            .unwrap());
        assert!(g
            .is_gateway(&"k".into(), &set(&["k"]), &set(&["m", "m''"]))
            .unwrap());
        // Any edge is a gateway between itself and any other edge.
        for e in ["m", "k", "c", "m'", "k'", "c'", "m''"] {
            for f in ["m", "k", "c", "m'", "k'", "c'", "m''"] {
                assert!(g.is_gateway(&e.into(), &set(&[e]), &set(&[f])).unwrap());
            }
        }
        // The path m, q, c, u, m' avoids k.
        assert!(!g
            .is_gateway(&"k".into(), &set(&["m"]), &set(&["m'"]))
            .unwrap());
    }

    #[test]
    fn cycle_through_triangle_edge() {
        let g = Multigraph::new(
            ["a", "b", "c"],
            [("x", "a", "b"), ("y", "b", "c"), ("z", "c", "a")],
        )
        .unwrap();
        let p = g.find_cycle_through(&"x".into()).unwrap();
        p.validate(&g).unwrap();
        assert!(p.circular);
        assert_eq!(p.edges.len(), 4); // x . . x
    }

    #[test]
    fn cycle_through_parallel_edge() {
        let g = fig3();
        let p = g.find_cycle_through(&"k".into()).unwrap();
        p.validate(&g).unwrap();
        assert_eq!(p.edges, ["k", "c", "k"].map(EdgeId::from).to_vec());
    }

    #[test]
    fn cycle_through_loop() {
        let g = Multigraph::new(["a", "b"], [("x", "a", "b"), ("l", "b", "b")]).unwrap();
        let p = g.find_cycle_through(&"l".into()).unwrap();
        p.validate(&g).unwrap();
        assert_eq!(p.edges.len(), 2);
    }

    #[test]
    fn no_cycle_through_bridge() {
        let g = fig3();
        assert!(matches!(
            g.find_cycle_through(&"m".into()),
            Err(GraphError::IsBridge(_))
        ));
    }

    #[test]
    fn connectivity() {
        assert!(fig3().is_connected());
        let g = Multigraph::new(["a", "b"], std::iter::empty::<(&str, &str, &str)>()).unwrap();
        assert!(!g.is_connected());
        let g = Multigraph::new(["a"], std::iter::empty::<(&str, &str, &str)>()).unwrap();
        assert!(g.is_connected());
    }

    #[test]
    fn construction_rejects_undeclared_endpoint() {
        assert!(matches!(
            Multigraph::new(["a"], [("e", "a", "b")]),
            Err(GraphError::UnknownVertex(_))
        ));
        assert!(matches!(
            Multigraph::new(["a", "b"], [("e", "a", "b"), ("e", "b", "a")]),
            Err(GraphError::DuplicateEdge(_))
        ));
    }

    #[test]
    fn bridge_component_partition() {
        let g = fig3();
        let all_v: BTreeSet<_> = g.vertices().cloned().collect();
        for e in g.edge_ids() {
            let (u, w) = g.endpoints(e).unwrap();
            if u == w {
                continue;
            }
            let (cu, _) = g.component_without(&u, e).unwrap();
            let (cw, _) = g.component_without(&w, e).unwrap();
            if g.bridges().unwrap().contains(e) {
                assert!(cu.is_disjoint(&cw));
                assert_eq!(cu.union(&cw).cloned().collect::<BTreeSet<_>>(), all_v);
            } else {
                assert_eq!(cu, cw);
            }
        }
    }
}
