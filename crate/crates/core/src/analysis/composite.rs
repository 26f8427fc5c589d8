use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::AnalysisError;
use crate::coding::{assemble, transfer, FracLinCode, TapDecoders};
use crate::galois::PrimeField;
use crate::matrix::Mat;
use crate::network::{SumNetwork, TerminalView, ThreeLayerView};

/// End-to-end maps from reachable sources to each middle edge.
///
/// `maps[i]` is `l x (r * |S_e|)` for the i-th entry of
/// [`ThreeLayerView::middle_edges`], with column blocks in that edge's source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeEncoding {
    pub field: PrimeField,
    pub r: usize,
    pub l: usize,
    pub maps: Vec<Mat>,
}

impl CompositeEncoding {
    pub fn check_against(&self, view: &ThreeLayerView) -> Result<(), AnalysisError> {
        if self.maps.len() != view.middle_edges().len() {
            return Err(AnalysisError::Shape(format!(
                "{} maps for {} middle edges",
                self.maps.len(),
                view.middle_edges().len()
            )));
        }
        for (i, (m, me)) in self.maps.iter().zip(view.middle_edges()).enumerate() {
            if m.field() != self.field || m.shape() != (self.l, self.r * me.sources.len()) {
                return Err(AnalysisError::Shape(format!("map {i} has shape {:?}", m.shape())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(FracLinCode),
    /// No decoders exist; names the first terminal (in node order) that fails.
    Infeasible {
        terminal: String,
    },
}

/// Reads the middle-edge composites off an existing code.
pub fn composites_of(net: &SumNetwork, code: &FracLinCode) -> Result<CompositeEncoding, AnalysisError> {
    let view = ThreeLayerView::new(net)?;
    let tm = transfer(net, code)?;
    let (r, l) = (code.r, code.l);
    let maps = view
        .middle_edges()
        .iter()
        .map(|me| {
            let blocks = tm.edge_blocks(me.edge);
            let mut m = Mat::zeros(code.field, l, r * me.sources.len());
            for (k, &s) in me.sources.iter().enumerate() {
                if let Some(b) = blocks.block(s) {
                    m.set_block(0, k * r, b);
                }
            }
            m
        })
        .collect();
    Ok(CompositeEncoding { field: code.field, r, l, maps })
}

/// Middle-tap decoders for one terminal, or `None` if none exist.
///
/// Sources without a direct edge must come out with coefficient `I_r`;
/// directly connected sources are left to the direct-edge decoders.
pub(crate) fn solve_terminal<'a>(
    view: &ThreeLayerView,
    tv: &TerminalView,
    field: PrimeField,
    r: usize,
    l: usize,
    comp: impl Fn(usize) -> &'a Mat,
) -> Result<Option<Vec<Mat>>, AnalysisError> {
    let direct = tv.direct_by_source();
    if direct.values().any(|edges| edges.len() * l < r) {
        return Ok(None);
    }
    let taps: Vec<usize> = tv.middle_taps().map(|(_, mi)| mi).collect();
    let mut cols = BTreeSet::new();
    for &mi in &taps {
        cols.extend(view.middle_edges()[mi].sources.iter().copied().filter(|s| !direct.contains_key(s)));
    }
    if cols.len() + direct.len() < view.num_sources() {
        return Ok(None);
    }
    let width = taps.len() * l;
    if cols.is_empty() {
        return Ok(Some(taps.iter().map(|_| Mat::zeros(field, r, l)).collect()));
    }
    let col_index: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut m = Mat::zeros(field, width, r * cols.len());
    for (t, &mi) in taps.iter().enumerate() {
        let c = comp(mi);
        for (k, &s) in view.middle_edges()[mi].sources.iter().enumerate() {
            if let Some(&ci) = col_index.get(&s) {
                m.set_block(t * l, ci * r, &c.block(0, k * r, l, r));
            }
        }
    }
    let mut target = Mat::zeros(field, r, r * cols.len());
    let eye = Mat::identity(field, r);
    for ci in 0..cols.len() {
        target.set_block(0, ci * r, &eye);
    }
    Ok(Mat::solve_right(&m, &target)?.map(|d| (0..taps.len()).map(|t| d.block(0, t * l, r, l)).collect()))
}

/// Synthesizes decoders for fixed middle-edge composites and returns the
/// complete code when every terminal can recover the sum.
pub fn feasible_decoders(net: &SumNetwork, comp: &CompositeEncoding) -> Result<Feasibility, AnalysisError> {
    let view = ThreeLayerView::new(net)?;
    feasible_with_view(net, &view, comp)
}

pub(crate) fn feasible_with_view(
    net: &SumNetwork,
    view: &ThreeLayerView,
    comp: &CompositeEncoding,
) -> Result<Feasibility, AnalysisError> {
    comp.check_against(view)?;
    let mut taps: TapDecoders = Vec::with_capacity(view.terminals().len());
    for tv in view.terminals() {
        match solve_terminal(view, tv, comp.field, comp.r, comp.l, |mi| &comp.maps[mi])? {
            Some(d) => taps.push(d),
            None => return Ok(Feasibility::Infeasible { terminal: net.label(tv.node).to_string() }),
        }
    }
    let code = assemble(net, view, comp.field, comp.r, comp.l, &comp.maps, &taps)?;
    Ok(Feasibility::Feasible(code))
}
