//! The sum-network data model.
//!
//! Edges are directed from `tail` (origin) to `head` (destination). Parallel
//! edges between the same pair of nodes are distinguished by `par`, so an edge
//! is identified by the triple `(tail, head, par)`. Each node keeps an explicit
//! in-edge order; decoding matrices are positional and index into it.

mod layered;

pub use layered::{MiddleEdge, Tap, TerminalView, ThreeLayerView};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};
use core::ops::Range;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Source,
    Intermediate,
    Terminal,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Source => "source",
            Role::Intermediate => "intermediate",
            Role::Terminal => "terminal",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "source" => Some(Role::Source),
            "intermediate" => Some(Role::Intermediate),
            "terminal" => Some(Role::Terminal),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub label: String,
    pub role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub tail: NodeId,
    pub head: NodeId,
    pub par: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid node label `{0}`")]
    InvalidLabel(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("duplicate edge {0}")]
    DuplicateEdge(String),
    #[error("in-edge order of `{node}` is not a permutation of its in-edges")]
    BadInOrder { node: String },
    #[error("cycle detected")]
    Cycle,
    #[error("unsupported network shape: {0}")]
    Unsupported(String),
}

/// A structural problem found by [`SumNetwork::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SourceHasInEdge(String),
    TerminalHasOutEdge(String),
    CycleDetected,
    SourceOrderMismatch,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SourceHasInEdge(s) => write!(f, "source has in-edge: {s}"),
            Violation::TerminalHasOutEdge(t) => write!(f, "terminal has out-edge: {t}"),
            Violation::CycleDetected => f.write_str("cycle detected"),
            Violation::SourceOrderMismatch => f.write_str("source order does not list every source exactly once"),
        }
    }
}

fn check_label(label: &str) -> Result<(), NetworkError> {
    let bad = label.is_empty()
        || label.contains("->")
        || label.chars().any(|c| c == '#' || c == '"' || c == '\\' || c.is_whitespace());
    if bad {
        Err(NetworkError::InvalidLabel(label.to_string()))
    } else {
        Ok(())
    }
}

/// Immutable sum-network. Build one with [`NetworkBuilder`] or [`SumNetwork::from_parts`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumNetwork {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    in_order: Vec<Vec<EdgeId>>,
    out_edges: Vec<Vec<EdgeId>>,
    source_order: Vec<NodeId>,
    labels: BTreeMap<String, NodeId>,
    edge_index: BTreeMap<(NodeId, NodeId, u32), EdgeId>,
    field_hint: Option<u32>,
}

impl SumNetwork {
    /// Assembles a network from raw parts, checking referential integrity.
    ///
    /// Semantic constraints (acyclicity, roles) are not enforced here; see
    /// [`validate`](Self::validate).
    pub fn from_parts(
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        in_order: Vec<Vec<EdgeId>>,
        source_order: Vec<NodeId>,
        field_hint: Option<u32>,
    ) -> Result<Self, NetworkError> {
        let mut labels = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            check_label(&n.label)?;
            if labels.insert(n.label.clone(), NodeId(i)).is_some() {
                return Err(NetworkError::DuplicateLabel(n.label.clone()));
            }
        }
        let mut edge_index = BTreeMap::new();
        let mut actual_in: Vec<Vec<EdgeId>> = vec![Vec::new(); nodes.len()];
        let mut out_edges: Vec<Vec<EdgeId>> = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            for n in [e.tail, e.head] {
                if n.0 >= nodes.len() {
                    return Err(NetworkError::NodeOutOfRange(n.0));
                }
            }
            if edge_index.insert((e.tail, e.head, e.par), EdgeId(i)).is_some() {
                return Err(NetworkError::DuplicateEdge(format!(
                    "{}->{}#{}",
                    nodes[e.tail.0].label, nodes[e.head.0].label, e.par
                )));
            }
            actual_in[e.head.0].push(EdgeId(i));
            out_edges[e.tail.0].push(EdgeId(i));
        }
        if in_order.len() != nodes.len() {
            return Err(NetworkError::NodeOutOfRange(in_order.len()));
        }
        for (i, order) in in_order.iter().enumerate() {
            if let Some(bad) = order.iter().find(|e| e.0 >= edges.len()) {
                return Err(NetworkError::EdgeOutOfRange(bad.0));
            }
            let mut sorted = order.clone();
            sorted.sort();
            if sorted != actual_in[i] {
                return Err(NetworkError::BadInOrder { node: nodes[i].label.clone() });
            }
        }
        if let Some(bad) = source_order.iter().find(|n| n.0 >= nodes.len()) {
            return Err(NetworkError::NodeOutOfRange(bad.0));
        }
        Ok(Self { nodes, edges, in_order, out_edges, source_order, labels, edge_index, field_hint })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id.0]
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.nodes[id.0].label
    }

    pub fn role(&self, id: NodeId) -> Role {
        self.nodes[id.0].role
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn field_hint(&self) -> Option<u32> {
        self.field_hint
    }

    pub fn with_field_hint(mut self, p: Option<u32>) -> Self {
        self.field_hint = p;
        self
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.labels.get(label).copied()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    /// Nodes of the given role, in node order.
    pub fn nodes_with_role(&self, role: Role) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(move |&n| self.role(n) == role)
    }

    pub fn terminals(&self) -> Vec<NodeId> {
        self.nodes_with_role(Role::Terminal).collect()
    }

    /// Sources in the declared order; the global source vector follows it.
    pub fn source_order(&self) -> &[NodeId] {
        &self.source_order
    }

    /// Declared in-edge order of `node`.
    pub fn in_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.in_order[node.0]
    }

    /// Out-edges of `node`, ascending by edge id.
    pub fn out_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.out_edges[node.0]
    }

    pub fn find_edge(&self, tail: NodeId, head: NodeId, par: u32) -> Option<EdgeId> {
        self.edge_index.get(&(tail, head, par)).copied()
    }

    /// Canonical edge label `tail->head#par`.
    pub fn edge_label(&self, id: EdgeId) -> String {
        let e = self.edges[id.0];
        format!("{}->{}#{}", self.label(e.tail), self.label(e.head), e.par)
    }

    pub fn edge_by_label(&self, label: &str) -> Option<EdgeId> {
        let (pair, par) = label.rsplit_once('#')?;
        let (tail, head) = pair.split_once("->")?;
        let par = par.parse().ok()?;
        self.find_edge(self.node_by_label(tail)?, self.node_by_label(head)?, par)
    }

    /// Position of `edge` in the in-edge order of its head.
    pub fn in_position(&self, edge: EdgeId) -> usize {
        let head = self.edges[edge.0].head;
        self.in_order[head.0].iter().position(|&e| e == edge).expect("every edge is listed in its head's in-edge order")
    }

    /// Checks the sum-network invariants and returns every violation found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for n in self.node_ids() {
            match self.role(n) {
                Role::Source if !self.in_order[n.0].is_empty() => {
                    out.push(Violation::SourceHasInEdge(self.label(n).to_string()));
                }
                Role::Terminal if !self.out_edges[n.0].is_empty() => {
                    out.push(Violation::TerminalHasOutEdge(self.label(n).to_string()));
                }
                _ => {}
            }
        }
        if self.topo_order().is_err() {
            out.push(Violation::CycleDetected);
        }
        let declared: BTreeSet<NodeId> = self.source_order.iter().copied().collect();
        let actual: BTreeSet<NodeId> = self.nodes_with_role(Role::Source).collect();
        if declared.len() != self.source_order.len() || declared != actual {
            out.push(Violation::SourceOrderMismatch);
        }
        out
    }

    /// Edges ordered so that every edge comes after all in-edges of its tail.
    /// Among ready edges the smallest id goes first.
    pub fn topo_order(&self) -> Result<Vec<EdgeId>, NetworkError> {
        let mut pending: Vec<usize> = self.in_order.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<EdgeId> = BTreeSet::new();
        for n in self.node_ids() {
            if pending[n.0] == 0 {
                ready.extend(self.out_edges[n.0].iter().copied());
            }
        }
        let mut order = Vec::with_capacity(self.edges.len());
        while let Some(e) = ready.pop_first() {
            order.push(e);
            let head = self.edges[e.0].head;
            pending[head.0] -= 1;
            if pending[head.0] == 0 {
                ready.extend(self.out_edges[head.0].iter().copied());
            }
        }
        if order.len() == self.edges.len() {
            Ok(order)
        } else {
            Err(NetworkError::Cycle)
        }
    }

    /// Column layout of the global source vector for block length `r`.
    pub fn source_layout(&self, r: usize) -> SourceLayout {
        let mut index = vec![None; self.nodes.len()];
        for (i, s) in self.source_order.iter().enumerate() {
            index[s.0] = Some(i);
        }
        SourceLayout { sources: self.source_order.clone(), r, index }
    }

    /// True for edges joining two intermediate nodes.
    pub fn is_middle_edge(&self, e: EdgeId) -> bool {
        let e = self.edges[e.0];
        self.role(e.tail) == Role::Intermediate && self.role(e.head) == Role::Intermediate
    }

    /// Graphviz rendering: sources as boxes, terminals as double circles,
    /// middle edges in bold red.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph {\n");
        for n in &self.nodes {
            let shape = match n.role {
                Role::Source => "box",
                Role::Intermediate => "circle",
                Role::Terminal => "doublecircle",
            };
            let _ = writeln!(s, "  \"{}\" [shape={}];", n.label, shape);
        }
        for id in self.edge_ids() {
            let e = self.edges[id.0];
            let _ = write!(s, "  \"{}\" -> \"{}\"", self.label(e.tail), self.label(e.head));
            if self.is_middle_edge(id) {
                s.push_str(" [color=red, penwidth=2]");
            }
            s.push_str(";\n");
        }
        s.push_str("}\n");
        s
    }
}

/// Where each source's `r`-block sits in the global source vector.
#[derive(Debug, Clone)]
pub struct SourceLayout {
    sources: Vec<NodeId>,
    r: usize,
    index: Vec<Option<usize>>,
}

impl SourceLayout {
    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    pub fn block_len(&self) -> usize {
        self.r
    }

    /// Total width `r * |S|`.
    pub fn width(&self) -> usize {
        self.r * self.sources.len()
    }

    /// Position of `node` in the source order.
    pub fn index_of(&self, node: NodeId) -> Option<usize> {
        self.index.get(node.0).copied().flatten()
    }

    pub fn columns(&self, source_index: usize) -> Range<usize> {
        source_index * self.r..(source_index + 1) * self.r
    }
}

/// Incremental construction of a [`SumNetwork`].
#[derive(Debug, Default, Clone)]
pub struct NetworkBuilder {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    labels: BTreeMap<String, NodeId>,
    par_count: BTreeMap<(NodeId, NodeId), u32>,
    in_order_override: BTreeMap<NodeId, Vec<EdgeId>>,
    source_order: Option<Vec<NodeId>>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, label: impl Into<String>, role: Role) -> Result<NodeId, NetworkError> {
        let label = label.into();
        check_label(&label)?;
        if self.labels.contains_key(&label) {
            return Err(NetworkError::DuplicateLabel(label));
        }
        let id = NodeId(self.nodes.len());
        self.labels.insert(label.clone(), id);
        self.nodes.push(Node { label, role });
        Ok(id)
    }

    pub fn node(&self, label: &str) -> Result<NodeId, NetworkError> {
        self.labels.get(label).copied().ok_or_else(|| NetworkError::UnknownNode(label.to_string()))
    }

    /// Adds an edge; its parallel index is the number of earlier `tail -> head` edges.
    pub fn add_edge(&mut self, tail: NodeId, head: NodeId) -> EdgeId {
        let par = self.par_count.entry((tail, head)).or_insert(0);
        let id = EdgeId(self.edges.len());
        self.edges.push(Edge { tail, head, par: *par });
        *par += 1;
        id
    }

    pub fn add_edge_by_label(&mut self, tail: &str, head: &str) -> Result<EdgeId, NetworkError> {
        let t = self.node(tail)?;
        let h = self.node(head)?;
        Ok(self.add_edge(t, h))
    }

    /// Replaces the default (insertion) in-edge order of `node`.
    pub fn set_in_order(&mut self, node: NodeId, order: Vec<EdgeId>) {
        self.in_order_override.insert(node, order);
    }

    /// Overrides the default source order (order of addition).
    pub fn set_source_order(&mut self, order: Vec<NodeId>) {
        self.source_order = Some(order);
    }

    /// Finishes the network. Unless overridden, sources are ordered as they were added.
    pub fn build(self) -> Result<SumNetwork, NetworkError> {
        let mut in_order: Vec<Vec<EdgeId>> = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            in_order[e.head.0].push(EdgeId(i));
        }
        for (node, order) in self.in_order_override {
            in_order[node.0] = order;
        }
        let source_order = self.source_order.unwrap_or_else(|| {
            self.nodes.iter().enumerate().filter(|(_, n)| n.role == Role::Source).map(|(i, _)| NodeId(i)).collect()
        });
        SumNetwork::from_parts(self.nodes, self.edges, in_order, source_order, None)
    }
}
