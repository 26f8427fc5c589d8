use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::{EdgeId, NetworkError, NodeId, Role, SumNetwork};

/// A bottleneck edge `u -> v` together with the sources that feed `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiddleEdge {
    pub edge: EdgeId,
    pub tail: NodeId,
    pub head: NodeId,
    /// Sources with a path to the tail, as ascending source indices.
    pub sources: Vec<usize>,
    /// The private `source -> tail` edge of each entry in `sources`.
    pub source_edges: Vec<EdgeId>,
}

impl MiddleEdge {
    /// Position of `source` within [`sources`](Self::sources).
    pub fn position_of(&self, source: usize) -> Option<usize> {
        self.sources.binary_search(&source).ok()
    }
}

/// One in-edge of a terminal, in the terminal's declared in-edge order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tap {
    /// Forwarded copy of a middle edge (edge `v -> t`).
    Middle { position: usize, edge: EdgeId, middle: usize },
    /// Direct `source -> t` edge.
    Direct { position: usize, edge: EdgeId, source: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalView {
    pub node: NodeId,
    pub taps: Vec<Tap>,
}

impl TerminalView {
    pub fn middle_taps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.taps.iter().filter_map(|t| match *t {
            Tap::Middle { position, middle, .. } => Some((position, middle)),
            Tap::Direct { .. } => None,
        })
    }

    /// Direct in-edges grouped by source index; parallel edges keep their order.
    pub fn direct_by_source(&self) -> BTreeMap<usize, Vec<(usize, EdgeId)>> {
        let mut out: BTreeMap<usize, Vec<(usize, EdgeId)>> = BTreeMap::new();
        for t in &self.taps {
            if let Tap::Direct { position, edge, source } = *t {
                out.entry(source).or_default().push((position, edge));
            }
        }
        out
    }
}

/// Structural view of a three-layer sum-network: sources feed `u` nodes, each
/// `u` has a single middle edge to a `v` node, `v` nodes fan out to
/// terminals, and sources may also reach terminals over direct edges.
///
/// N1, N2, their k-copy merges and the two-source bottleneck all have this
/// shape. Because every source reaches a middle edge through its own private
/// edge, the end-to-end map from sources to a middle edge can be chosen freely.
#[derive(Debug, Clone)]
pub struct ThreeLayerView {
    middle: Vec<MiddleEdge>,
    terminals: Vec<TerminalView>,
    middle_of_tail: BTreeMap<NodeId, usize>,
    num_sources: usize,
}

impl ThreeLayerView {
    pub fn new(net: &SumNetwork) -> Result<Self, NetworkError> {
        let unsupported = |msg: alloc::string::String| Err(NetworkError::Unsupported(msg));
        let layout = net.source_layout(1);
        let mut middle = Vec::new();
        let mut middle_of_tail = BTreeMap::new();
        let mut middle_of_head = BTreeMap::new();

        for u in net.nodes_with_role(Role::Intermediate) {
            let ins = net.in_edges(u);
            if ins.is_empty() || !ins.iter().all(|&e| net.role(net.edge(e).tail) == Role::Source) {
                continue;
            }
            let outs = net.out_edges(u);
            if outs.len() != 1 || net.role(net.edge(outs[0]).head) != Role::Intermediate {
                return unsupported(format!(
                    "`{}` must have exactly one out-edge to an intermediate node",
                    net.label(u)
                ));
            }
            let mut fed: Vec<(usize, EdgeId)> = Vec::with_capacity(ins.len());
            for &e in ins {
                let s = net.edge(e).tail;
                let Some(idx) = layout.index_of(s) else {
                    return unsupported(format!("source `{}` is not in the source order", net.label(s)));
                };
                fed.push((idx, e));
            }
            fed.sort();
            if fed.windows(2).any(|w| w[0].0 == w[1].0) {
                return unsupported(format!("parallel source edges into `{}`", net.label(u)));
            }
            let edge = outs[0];
            let v = net.edge(edge).head;
            if middle_of_head.insert(v, middle.len()).is_some() {
                return unsupported(format!("`{}` has more than one middle in-edge", net.label(v)));
            }
            middle_of_tail.insert(u, middle.len());
            middle.push(MiddleEdge {
                edge,
                tail: u,
                head: v,
                sources: fed.iter().map(|f| f.0).collect(),
                source_edges: fed.iter().map(|f| f.1).collect(),
            });
        }

        for n in net.nodes_with_role(Role::Intermediate) {
            if middle_of_tail.contains_key(&n) {
                continue;
            }
            if !middle_of_head.contains_key(&n) || net.in_edges(n).len() != 1 {
                return unsupported(format!("intermediate `{}` is neither a middle-edge tail nor head", net.label(n)));
            }
            if let Some(&e) = net.out_edges(n).iter().find(|&&e| net.role(net.edge(e).head) != Role::Terminal) {
                return unsupported(format!(
                    "`{}` forwards to non-terminal `{}`",
                    net.label(n),
                    net.label(net.edge(e).head)
                ));
            }
        }

        let mut terminals = Vec::new();
        for t in net.nodes_with_role(Role::Terminal) {
            let mut taps = Vec::with_capacity(net.in_edges(t).len());
            for (position, &edge) in net.in_edges(t).iter().enumerate() {
                let from = net.edge(edge).tail;
                if let Some(&mi) = middle_of_head.get(&from) {
                    taps.push(Tap::Middle { position, edge, middle: mi });
                } else if let Some(source) = layout.index_of(from) {
                    taps.push(Tap::Direct { position, edge, source });
                } else {
                    return unsupported(format!(
                        "terminal `{}` has an in-edge from `{}`",
                        net.label(t),
                        net.label(from)
                    ));
                }
            }
            terminals.push(TerminalView { node: t, taps });
        }

        Ok(Self { middle, terminals, middle_of_tail, num_sources: net.source_order().len() })
    }

    pub fn middle_edges(&self) -> &[MiddleEdge] {
        &self.middle
    }

    pub fn terminals(&self) -> &[TerminalView] {
        &self.terminals
    }

    pub fn num_sources(&self) -> usize {
        self.num_sources
    }

    /// Index of the middle edge leaving `tail`.
    pub fn middle_at_tail(&self, tail: NodeId) -> Option<usize> {
        self.middle_of_tail.get(&tail).copied()
    }

    pub fn terminal(&self, node: NodeId) -> Option<&TerminalView> {
        self.terminals.iter().find(|t| t.node == node)
    }
}
