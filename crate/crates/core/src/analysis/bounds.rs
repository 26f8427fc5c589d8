//! Rank certificates for the upper bounds on the rate of linear solutions.
//!
//! Each mode stacks linear maps that a verified code makes available (middle
//! edge messages, optionally plus some sources read in the clear) and checks
//! that together they determine every source. Counting rows then bounds the
//! rate: `l * M (+ r * m) >= r * |S|` for `M` middle edges.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;

use super::AnalysisError;
use crate::coding::{transfer, verify, FracLinCode, TransferMap};
use crate::constructions::{labels, n2_tail_sources, parse_label, Family, FamilyInstance, NetParams};
use crate::galois::PrimeField;
use crate::matrix::Mat;
use crate::network::{MiddleEdge, SumNetwork, ThreeLayerView};

/// Capacity `2k / (m + 1)` of the k-copy merge of either family.
pub fn capacity(m: usize, k: usize) -> Ratio<u64> {
    Ratio::new(2 * k as u64, m as u64 + 1)
}

/// Upper bound `2 / (m + 1 + 2/(q + 1))` on the single-copy rate when the
/// characteristic is on the wrong side of `q`.
pub fn wrong_char_bound(m: usize, q: u64) -> Ratio<u64> {
    let g = q + 1;
    Ratio::new(2 * g, (m as u64 + 1) * g + 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundMode {
    /// N1, any characteristic: middle edges plus the group sources `s_i`.
    N1Claim1,
    /// N1, characteristic not dividing `q`: middle edges alone.
    N1Claim2,
    /// N2, any characteristic: middle edges alone.
    N2Claim3,
    /// N2, characteristic dividing `q`: middle edges split into the copies
    /// `j <= q` and `j = q + 1`, which share `m` independent sums.
    N2Claim4,
}

impl BoundMode {
    pub const ALL: [BoundMode; 4] =
        [BoundMode::N1Claim1, BoundMode::N1Claim2, BoundMode::N2Claim3, BoundMode::N2Claim4];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundMode::N1Claim1 => "n1-claim1",
            BoundMode::N1Claim2 => "n1-claim2",
            BoundMode::N2Claim3 => "n2-claim3",
            BoundMode::N2Claim4 => "n2-claim4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn family(self) -> Family {
        match self {
            BoundMode::N1Claim1 | BoundMode::N1Claim2 => Family::N1,
            BoundMode::N2Claim3 | BoundMode::N2Claim4 => Family::N2,
        }
    }

    /// Whether the mode holds for every verified code over GF(p).
    pub fn holds_for(self, q: u64, p: u64) -> bool {
        match self {
            BoundMode::N1Claim1 | BoundMode::N2Claim3 => true,
            BoundMode::N1Claim2 => !q.is_multiple_of(p),
            BoundMode::N2Claim4 => q.is_multiple_of(p),
        }
    }
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The tightest mode that holds for the family over GF(p).
pub fn applicable_mode(family: Family, q: u64, p: u64) -> BoundMode {
    match (family, q.is_multiple_of(p)) {
        (Family::N1, true) => BoundMode::N1Claim1,
        (Family::N1, false) => BoundMode::N1Claim2,
        (Family::N2, false) => BoundMode::N2Claim3,
        (Family::N2, true) => BoundMode::N2Claim4,
    }
}

/// Which family instance a network is, for bound checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundContext {
    pub family: Family,
    pub params: NetParams,
    pub k: usize,
}

impl BoundContext {
    pub fn of(inst: &FamilyInstance) -> Self {
        Self { family: inst.family, params: inst.params, k: inst.k }
    }

    /// Context of the single-copy base network.
    pub fn base(self) -> Self {
        Self { k: 1, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    Certified,
    /// A verified code failed the certificate. Cannot happen for a correct
    /// implementation.
    TheoremConsistencyViolation,
}

impl BoundStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundStatus::Certified => "certified",
            BoundStatus::TheoremConsistencyViolation => "theorem-consistency-violation",
        }
    }
}

/// Ranks behind the split certificate of [`BoundMode::N2Claim4`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitDetail {
    /// Rank of the middle edges with copy index `j <= q`.
    pub rank_a: usize,
    /// Rank of the middle edges with `j = q + 1`.
    pub rank_b: usize,
    /// Rank of the `m` shared sums; must be `r * m`.
    pub rank_c: usize,
    pub c_in_a: bool,
    pub c_in_b: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub mode: BoundMode,
    pub stacked_rank: usize,
    /// `r * |S|`.
    pub required_rank: usize,
    pub middle_edges: usize,
    pub sources: usize,
    /// Rows contributed by sources read in the clear (`r * m` or 0).
    pub selector_rows: usize,
    /// Bound on `r / l` implied by counting rows of the stacked map.
    pub implied_bound: Ratio<u64>,
    /// The closed-form bound for the mode.
    pub closed_form: Ratio<u64>,
    pub rate: Ratio<u64>,
    pub rate_ok: bool,
    pub status: BoundStatus,
    pub split: Option<SplitDetail>,
}

fn stack(field: PrimeField, width: usize, r: usize, tm: &TransferMap, edges: &[&MiddleEdge], extra: &[Mat]) -> Mat {
    let rows: usize = edges.iter().map(|me| tm.edge_blocks(me.edge).rows()).sum::<usize>()
        + extra.iter().map(Mat::rows).sum::<usize>();
    let mut out = Mat::zeros(field, rows, width);
    let mut row = 0;
    for m in extra {
        out.set_block(row, 0, m);
        row += m.rows();
    }
    for me in edges {
        let blocks = tm.edge_blocks(me.edge);
        for (s, b) in blocks.blocks() {
            out.set_block(row, s * r, b);
        }
        row += blocks.rows();
    }
    out
}

/// `r` rows equal to the sum of `I_r` over the given source labels.
fn sum_rows(
    net: &SumNetwork,
    field: PrimeField,
    r: usize,
    labels: &[alloc::string::String],
) -> Result<Mat, AnalysisError> {
    let layout = net.source_layout(r);
    let mut out = Mat::zeros(field, r, layout.width());
    let eye = Mat::identity(field, r);
    for label in labels {
        let s = net
            .node_by_label(label)
            .and_then(|n| layout.index_of(n))
            .ok_or_else(|| AnalysisError::Shape(format!("source `{label}` missing")))?;
        out.set_block(0, s * r, &eye);
    }
    Ok(out)
}

/// Certifies that a verified code respects the rate bound of `mode`.
pub fn bound_check(
    net: &SumNetwork,
    code: &FracLinCode,
    ctx: BoundContext,
    mode: BoundMode,
) -> Result<BoundReport, AnalysisError> {
    if mode.family() != ctx.family {
        return Err(AnalysisError::ModeMismatch { mode: mode.as_str(), reason: format!("network is {}", ctx.family) });
    }
    let report = verify(net, code)?;
    if !report.pass {
        return Err(AnalysisError::NotVerified(report.first_failure.unwrap_or_default()));
    }
    let view = ThreeLayerView::new(net)?;
    let expected_middle = ctx.k * ctx.params.m * ctx.params.group_width();
    if view.middle_edges().len() != expected_middle {
        return Err(AnalysisError::ModeMismatch {
            mode: mode.as_str(),
            reason: format!("{} middle edges, expected {expected_middle}", view.middle_edges().len()),
        });
    }
    let tm = transfer(net, code)?;
    let (f, r, m) = (code.field, code.r, ctx.params.m);
    let n_src = net.source_order().len();
    let width = r * n_src;
    let all: Vec<&MiddleEdge> = view.middle_edges().iter().collect();

    let selectors: Vec<Mat> = if mode == BoundMode::N1Claim1 {
        (1..=m).map(|i| sum_rows(net, f, r, &[labels::s1(i)])).collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    let stacked_rank = stack(f, width, r, &tm, &all, &selectors).rank();

    let split = if mode == BoundMode::N2Claim4 {
        let last = ctx.params.group_width();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for me in &all {
            match parse_label(net.label(me.tail)) {
                Some(("u", idx, _)) if idx.len() == 2 => {
                    if idx[1] == last {
                        b.push(*me)
                    } else {
                        a.push(*me)
                    }
                }
                _ => {
                    return Err(AnalysisError::Shape(format!("unexpected middle tail `{}`", net.label(me.tail))));
                }
            }
        }
        let c: Vec<Mat> =
            (1..=m).map(|i| sum_rows(net, f, r, &n2_tail_sources(ctx.params, i, last))).collect::<Result<_, _>>()?;
        let c_mat = stack(f, width, r, &tm, &[], &c);
        let rank_a = stack(f, width, r, &tm, &a, &[]).rank();
        let rank_b = stack(f, width, r, &tm, &b, &[]).rank();
        Some(SplitDetail {
            rank_a,
            rank_b,
            rank_c: c_mat.rank(),
            c_in_a: stack(f, width, r, &tm, &a, &c).rank() == rank_a,
            c_in_b: stack(f, width, r, &tm, &b, &c).rank() == rank_b,
        })
    } else {
        None
    };

    let (big_m, s, m64, k) = (all.len() as u64, n_src as u64, m as u64, ctx.k as u64);
    let (implied_bound, closed_form) = match mode {
        BoundMode::N1Claim1 => (Ratio::new(big_m, s - m64), capacity(m, ctx.k)),
        BoundMode::N1Claim2 => (Ratio::new(big_m, s), wrong_char_bound(m, ctx.params.q) * k),
        BoundMode::N2Claim3 => (Ratio::new(big_m, s), capacity(m, ctx.k)),
        BoundMode::N2Claim4 => (Ratio::new(big_m, s + m64), wrong_char_bound(m, ctx.params.q) * k),
    };
    let split_ok = split.is_none_or(|d| d.c_in_a && d.c_in_b && d.rank_c == r * m);
    let status = if stacked_rank == width && split_ok {
        BoundStatus::Certified
    } else {
        BoundStatus::TheoremConsistencyViolation
    };
    let rate = code.rate();
    Ok(BoundReport {
        mode,
        stacked_rank,
        required_rank: width,
        middle_edges: all.len(),
        sources: n_src,
        selector_rows: selectors.len() * r,
        implied_bound,
        closed_form,
        rate,
        rate_ok: rate <= implied_bound,
        status,
        split,
    })
}
