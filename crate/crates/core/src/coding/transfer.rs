use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{CodeError, EdgeCoding, FracLinCode};
use crate::galois::PrimeField;
use crate::matrix::Mat;
use crate::network::{EdgeId, NodeId, Role, SumNetwork};

/// A `rows x (r * |S|)` matrix stored as its nonzero-capable `rows x r`
/// blocks, keyed by source index. Absent blocks are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMap {
    rows: usize,
    blocks: BTreeMap<usize, Mat>,
}

impl BlockMap {
    pub fn new(rows: usize) -> Self {
        Self { rows, blocks: BTreeMap::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn block(&self, source: usize) -> Option<&Mat> {
        self.blocks.get(&source)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, &Mat)> {
        self.blocks.iter().map(|(&s, m)| (s, m))
    }

    /// `self += a * other`.
    fn add_product(&mut self, a: &Mat, other: &BlockMap) -> Result<(), CodeError> {
        for (&s, b) in &other.blocks {
            let prod = a.matmul(b)?;
            match self.blocks.get_mut(&s) {
                Some(acc) => acc.add_assign(&prod)?,
                None => {
                    self.blocks.insert(s, prod);
                }
            }
        }
        Ok(())
    }

    /// Dense `rows x (r * num_sources)` form.
    pub fn to_dense(&self, field: PrimeField, r: usize, num_sources: usize) -> Mat {
        let mut out = Mat::zeros(field, self.rows, r * num_sources);
        for (&s, b) in &self.blocks {
            out.set_block(0, s * r, b);
        }
        out
    }
}

/// Every edge message and terminal output as a linear function of the global
/// source vector.
#[derive(Debug, Clone)]
pub struct TransferMap {
    field: PrimeField,
    r: usize,
    num_sources: usize,
    edges: Vec<BlockMap>,
    terminals: BTreeMap<NodeId, BlockMap>,
}

impl TransferMap {
    pub fn edge_blocks(&self, e: EdgeId) -> &BlockMap {
        &self.edges[e.0]
    }

    pub fn terminal_blocks(&self, t: NodeId) -> Option<&BlockMap> {
        self.terminals.get(&t)
    }

    /// `l x (r * |S|)` transfer matrix of an edge.
    pub fn edge_matrix(&self, e: EdgeId) -> Mat {
        self.edges[e.0].to_dense(self.field, self.r, self.num_sources)
    }

    /// `r x (r * |S|)` output map of a terminal.
    pub fn terminal_matrix(&self, t: NodeId) -> Option<Mat> {
        self.terminals.get(&t).map(|b| b.to_dense(self.field, self.r, self.num_sources))
    }
}

/// Composes local encodings in topological order.
pub fn transfer(net: &SumNetwork, code: &FracLinCode) -> Result<TransferMap, CodeError> {
    code.check_against(net)?;
    let layout = net.source_layout(code.r);
    let mut edges: Vec<Option<BlockMap>> = alloc::vec![None; net.num_edges()];
    for e in net.topo_order()? {
        let tail = net.edge(e).tail;
        let mut y = BlockMap::new(code.l);
        match &code.edges[e.0] {
            EdgeCoding::FromSource(a) => {
                let s = layout.index_of(tail).ok_or_else(|| {
                    CodeError::Shape(alloc::format!("source `{}` not in source order", net.label(tail)))
                })?;
                y.blocks.insert(s, a.clone());
            }
            EdgeCoding::FromInner(list) => {
                for (a, &inc) in list.iter().zip(net.in_edges(tail)) {
                    let prev = edges[inc.0].as_ref().expect("topological order");
                    y.add_product(a, prev)?;
                }
            }
        }
        edges[e.0] = Some(y);
    }
    let edges: Vec<BlockMap> = edges.into_iter().map(|b| b.expect("every edge visited")).collect();
    let mut terminals = BTreeMap::new();
    for t in net.nodes_with_role(Role::Terminal) {
        let mut z = BlockMap::new(code.r);
        for (d, &inc) in code.decoders[t.0].iter().zip(net.in_edges(t)) {
            z.add_product(d, &edges[inc.0])?;
        }
        terminals.insert(t, z);
    }
    Ok(TransferMap { field: code.field, r: code.r, num_sources: net.source_order().len(), edges, terminals })
}

/// Outcome of checking that every terminal outputs the sum of all sources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub pass: bool,
    /// Per terminal label, the nonzero blocks of `output - [I_r | ... | I_r]`
    /// keyed by source label. Terminals without residual are omitted.
    pub residuals: BTreeMap<String, BTreeMap<String, Mat>>,
    /// First failing terminal in node order.
    pub first_failure: Option<String>,
}

pub fn verify(net: &SumNetwork, code: &FracLinCode) -> Result<VerifyReport, CodeError> {
    let tm = transfer(net, code)?;
    let eye = Mat::identity(code.field, code.r);
    let mut residuals = BTreeMap::new();
    let mut first_failure = None;
    for (&t, z) in &tm.terminals {
        let mut res = BTreeMap::new();
        for (i, &s) in net.source_order().iter().enumerate() {
            let diff = match z.block(i) {
                Some(b) => b.sub(&eye)?,
                None => eye.scale(code.field.reduce(-1)),
            };
            if !diff.is_zero() {
                res.insert(net.label(s).to_string(), diff);
            }
        }
        if !res.is_empty() {
            if first_failure.is_none() {
                first_failure = Some(net.label(t).to_string());
            }
            residuals.insert(net.label(t).to_string(), res);
        }
    }
    Ok(VerifyReport { pass: residuals.is_empty(), residuals, first_failure })
}
