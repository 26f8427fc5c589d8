//! Fractional linear network codes: representation, transfer-matrix
//! verification, explicit schemes and the copy-unrolling transform.

mod schemes;
mod transfer;
mod unroll;

pub(crate) use schemes::{assemble, TapDecoders};
pub use schemes::{
    lift_to_copies, routing_code, scheme_for_instance, scheme_merged, scheme_n1, scheme_n1_on, scheme_n1_unchecked,
    scheme_n2, scheme_n2_on, scheme_n2_unchecked,
};
pub use transfer::{transfer, verify, BlockMap, TransferMap, VerifyReport};
pub use unroll::unroll_lemma1;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_rational::Ratio;
use thiserror::Error;

use crate::constructions::ConstructionError;
use crate::galois::{FieldError, PrimeField};
use crate::matrix::{Mat, MatError};
use crate::network::{NetworkError, Role, SumNetwork};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("code does not fit the network: {0}")]
    Shape(String),
    #[error("scheme refused: {0}")]
    Refused(String),
    #[error("no decoder exists at terminal `{0}`")]
    Infeasible(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

/// Local encoding of one edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeCoding {
    /// Edge leaving a source: an `l x r` matrix applied to the source block.
    FromSource(Mat),
    /// Edge leaving a non-source node: one `l x l` matrix per in-edge of the
    /// tail, aligned with the tail's in-edge order.
    FromInner(Vec<Mat>),
}

/// An `(r, l)` fractional linear code bound to a network by edge and node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FracLinCode {
    pub field: PrimeField,
    pub r: usize,
    pub l: usize,
    /// Indexed by edge id.
    pub edges: Vec<EdgeCoding>,
    /// Indexed by node id; for a terminal, one `r x l` matrix per in-edge in
    /// declared order, empty for every other node.
    pub decoders: Vec<Vec<Mat>>,
}

impl FracLinCode {
    /// Rate `r / l`.
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.r as u64, self.l as u64)
    }

    /// Checks that every edge and terminal carries matrices of the right shape.
    pub fn check_against(&self, net: &SumNetwork) -> Result<(), CodeError> {
        let shape = |what: String| Err(CodeError::Shape(what));
        if self.r == 0 || self.l == 0 {
            return shape(format!("r and l must be positive, got ({}, {})", self.r, self.l));
        }
        if self.edges.len() != net.num_edges() {
            return shape(format!("{} edge encodings for {} edges", self.edges.len(), net.num_edges()));
        }
        if self.decoders.len() != net.num_nodes() {
            return shape(format!("{} decoder lists for {} nodes", self.decoders.len(), net.num_nodes()));
        }
        let fits = |m: &Mat, rows: usize, cols: usize| m.field() == self.field && m.shape() == (rows, cols);
        for e in net.edge_ids() {
            let tail = net.edge(e).tail;
            let ok = match (&self.edges[e.0], net.role(tail)) {
                (EdgeCoding::FromSource(a), Role::Source) => fits(a, self.l, self.r),
                (EdgeCoding::FromInner(list), role) if role != Role::Source => {
                    list.len() == net.in_edges(tail).len() && list.iter().all(|a| fits(a, self.l, self.l))
                }
                _ => false,
            };
            if !ok {
                return shape(format!("edge {}", net.edge_label(e)));
            }
        }
        for n in net.node_ids() {
            let list = &self.decoders[n.0];
            let ok = if net.role(n) == Role::Terminal {
                list.len() == net.in_edges(n).len() && list.iter().all(|d| fits(d, self.r, self.l))
            } else {
                list.is_empty()
            };
            if !ok {
                return shape(format!("decoders of `{}`", net.label(n)));
            }
        }
        Ok(())
    }
}
