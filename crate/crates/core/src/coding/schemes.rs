//! Explicit codes for the families: the two characteristic-dependent schemes,
//! their lift to k-copy merges, and a characteristic-free routing baseline.
//!
//! Scheme layout on a middle edge of group `i` (block length `l = m + 1`,
//! `r = 2`): rows 0 and 1 carry the sum of every reachable source block. The
//! remaining `m - 1` rows hold, for each pair index `x > i` in ascending
//! order, the first component of the pair sources shared with group `x`, and
//! then, for each `x < i` in ascending order, their second component.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{CodeError, EdgeCoding, FracLinCode};
use crate::constructions::{labels, parse_label, CopyMap, Family, FamilyInstance, NetParams};
use crate::galois::{Felt, PrimeField};
use crate::matrix::Mat;
use crate::network::{MiddleEdge, SumNetwork, ThreeLayerView};

/// Decoders for the middle taps of every terminal: outer index follows
/// [`ThreeLayerView::terminals`], inner index the terminal's middle taps in order.
pub(crate) type TapDecoders = Vec<Vec<Mat>>;

/// Builds a full code from middle-edge composites and middle-tap decoders.
///
/// Source edges into a middle tail carry their block of the composite, the
/// middle edge sums its inputs, and `v -> t` edges forward. The parallel
/// direct edges from a source to a terminal jointly carry `[I_r; 0]` split
/// into `l`-row chunks, and their decoders absorb whatever the middle taps
/// leave missing on that source.
pub(crate) fn assemble(
    net: &SumNetwork,
    view: &ThreeLayerView,
    field: PrimeField,
    r: usize,
    l: usize,
    composites: &[Mat],
    taps: &TapDecoders,
) -> Result<FracLinCode, CodeError> {
    let mut edges: Vec<Option<EdgeCoding>> = vec![None; net.num_edges()];
    let eye_l = Mat::identity(field, l);
    for (me, comp) in view.middle_edges().iter().zip(composites) {
        for (k, &se) in me.source_edges.iter().enumerate() {
            edges[se.0] = Some(EdgeCoding::FromSource(comp.block(0, k * r, l, r)));
        }
        edges[me.edge.0] = Some(EdgeCoding::FromInner(vec![eye_l.clone(); net.in_edges(me.tail).len()]));
        for &out in net.out_edges(me.head) {
            edges[out.0] = Some(EdgeCoding::FromInner(vec![eye_l.clone()]));
        }
    }

    let mut decoders = vec![Vec::new(); net.num_nodes()];
    for (tv, tap_decs) in view.terminals().iter().zip(taps) {
        let mut list: Vec<Option<Mat>> = vec![None; tv.taps.len()];
        for ((pos, _), d) in tv.middle_taps().zip(tap_decs) {
            list[pos] = Some(d.clone());
        }
        for (s, direct) in tv.direct_by_source() {
            let mut rs = Mat::identity(field, r);
            for ((_, mi), d) in tv.middle_taps().zip(tap_decs) {
                if let Some(k) = view.middle_edges()[mi].position_of(s) {
                    rs = rs.sub(&d.matmul(&composites[mi].block(0, k * r, l, r))?)?;
                }
            }
            if direct.len() * l < r {
                return Err(CodeError::Infeasible(net.label(tv.node).into()));
            }
            for (c, &(pos, e)) in direct.iter().enumerate() {
                let mut enc = Mat::zeros(field, l, r);
                let mut dec = Mat::zeros(field, r, l);
                for j in 0..l {
                    let g = c * l + j;
                    if g >= r {
                        break;
                    }
                    enc.set_raw(j, g, 1);
                    for row in 0..r {
                        dec.set_raw(row, j, rs.entry(row, g));
                    }
                }
                edges[e.0] = Some(EdgeCoding::FromSource(enc));
                list[pos] = Some(dec);
            }
        }
        decoders[tv.node.0] = list.into_iter().map(|d| d.expect("every tap is middle or direct")).collect();
    }

    let edges = edges
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            e.ok_or_else(|| {
                CodeError::Shape(format!(
                    "edge {} is outside the layered layout",
                    net.edge_label(crate::network::EdgeId(i))
                ))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FracLinCode { field, r, l, edges, decoders })
}

/// Group and copy index `(i, j)` of a base-network middle edge `u_i_j -> v_i_j`.
fn middle_indices(net: &SumNetwork, me: &MiddleEdge) -> Result<(usize, usize), CodeError> {
    match parse_label(net.label(me.tail)) {
        Some(("u", idx, None)) if idx.len() == 2 => Ok((idx[0], idx[1])),
        _ => Err(CodeError::Shape(format!("`{}` is not a base middle-edge tail", net.label(me.tail)))),
    }
}

/// Position of the source labelled `label` within the middle edge's source list.
fn position(net: &SumNetwork, me: &MiddleEdge, label: &str) -> Result<usize, CodeError> {
    let layout = net.source_layout(1);
    net.node_by_label(label)
        .and_then(|n| layout.index_of(n))
        .and_then(|s| me.position_of(s))
        .ok_or_else(|| CodeError::Shape(format!("`{label}` does not reach `{}`", net.label(me.tail))))
}

/// Slot of the first component of the pair sources shared by groups `i < x`,
/// on a middle edge of group `i`.
fn slot_low(i: usize, x: usize) -> usize {
    2 + (x - i - 1)
}

/// Slot of the second component of the pair sources shared by groups `x < i`,
/// on a middle edge of group `i`.
fn slot_high(m: usize, i: usize, x: usize) -> usize {
    2 + (m - i) + (x - 1)
}

/// Composites of both schemes. `pair_copies(i, x, j)` lists the copy indices
/// of the pair sources folded into the shared slots of edge `e_ij`.
fn scheme_composites(
    net: &SumNetwork,
    view: &ThreeLayerView,
    params: NetParams,
    field: PrimeField,
    pair_copies: impl Fn(usize) -> Vec<usize>,
) -> Result<Vec<Mat>, CodeError> {
    let (m, r, l) = (params.m, 2, params.m + 1);
    let eye = Mat::identity(field, r);
    view.middle_edges()
        .iter()
        .map(|me| {
            let (i, j) = middle_indices(net, me)?;
            let mut c = Mat::zeros(field, l, r * me.sources.len());
            for k in 0..me.sources.len() {
                c.set_block(0, k * r, &eye);
            }
            for y in pair_copies(j) {
                for x in i + 1..=m {
                    let k = position(net, me, &labels::s3(i, x, y))?;
                    c.set_raw(slot_low(i, x), k * r, 1);
                }
                for x in 1..i {
                    let k = position(net, me, &labels::s3(x, i, y))?;
                    c.set_raw(slot_high(m, i, x), k * r + 1, 1);
                }
            }
            Ok(c)
        })
        .collect()
}

/// Middle-tap decoders from a rule mapping (terminal label, tap group index)
/// to a decoder matrix.
fn tap_decoders(
    net: &SumNetwork,
    view: &ThreeLayerView,
    rule: impl Fn(&str, &[usize], usize) -> Option<Mat>,
) -> Result<TapDecoders, CodeError> {
    view.terminals()
        .iter()
        .map(|tv| {
            let label = net.label(tv.node);
            let (prefix, idx, _) =
                parse_label(label).ok_or_else(|| CodeError::Shape(format!("unexpected terminal `{label}`")))?;
            tv.middle_taps()
                .map(|(_, mi)| {
                    let (group, _) = middle_indices(net, &view.middle_edges()[mi])?;
                    rule(prefix, &idx, group).ok_or_else(|| CodeError::Shape(format!("unexpected terminal `{label}`")))
                })
                .collect()
        })
        .collect()
}

fn project(field: PrimeField, l: usize) -> Mat {
    Mat::identity(field, 2).hstack(&Mat::zeros(field, 2, l - 2)).expect("same row count")
}

/// Decoder that takes rows 0 and 1 and subtracts slot `slot` from output `row`.
fn minus_slot(field: PrimeField, l: usize, row: usize, slot: usize) -> Mat {
    project(field, l).sub(&Mat::unit(field, 2, l, row, slot)).expect("same shape")
}

fn check_base(net: &SumNetwork, view: &ThreeLayerView, params: NetParams) -> Result<(), CodeError> {
    let expected = params.m * params.group_width();
    if view.middle_edges().len() != expected {
        return Err(CodeError::Shape(format!(
            "{} middle edges, expected {expected} for m = {}, q = {}",
            view.middle_edges().len(),
            params.m,
            params.q
        )));
    }
    let _ = net;
    Ok(())
}

/// The rate `2/(m+1)` code for N1(m, q), valid when the characteristic divides `q`.
pub fn scheme_n1(params: NetParams, p: u64) -> Result<FracLinCode, CodeError> {
    let net = crate::constructions::build_n1(params)?;
    scheme_n1_on(&net, params, p)
}

/// [`scheme_n1`] for an already built (or loaded) N1(m, q).
pub fn scheme_n1_on(net: &SumNetwork, params: NetParams, p: u64) -> Result<FracLinCode, CodeError> {
    let field = PrimeField::new(p)?;
    if !field.divides(params.q) {
        return Err(CodeError::Refused(format!("characteristic must divide q (p = {p}, q = {})", params.q)));
    }
    n1_code(net, params, field)
}

/// Builds the N1 scheme regardless of the characteristic. Over a field whose
/// characteristic does not divide `q` the result fails verification.
pub fn scheme_n1_unchecked(params: NetParams, p: u64) -> Result<FracLinCode, CodeError> {
    let net = crate::constructions::build_n1(params)?;
    n1_code(&net, params, PrimeField::new(p)?)
}

fn n1_code(net: &SumNetwork, params: NetParams, field: PrimeField) -> Result<FracLinCode, CodeError> {
    let view = ThreeLayerView::new(net)?;
    check_base(net, &view, params)?;
    let (m, l) = (params.m, params.m + 1);
    let composites = scheme_composites(net, &view, params, field, |j| vec![j])?;
    let taps = tap_decoders(net, &view, |prefix, idx, group| match (prefix, idx) {
        ("t", [_]) | ("t", [_, _]) => Some(project(field, l)),
        ("t", &[i, y, _]) if group == i => Some(minus_slot(field, l, 0, slot_low(i, y))),
        ("t", &[i, y, _]) if group == y => Some(minus_slot(field, l, 1, slot_high(m, y, i))),
        _ => None,
    })?;
    assemble(net, &view, field, 2, l, &composites, &taps)
}

/// The rate `2/(m+1)` code for N2(m, q), valid when the characteristic does
/// not divide `q`.
pub fn scheme_n2(params: NetParams, p: u64) -> Result<FracLinCode, CodeError> {
    let net = crate::constructions::build_n2(params)?;
    scheme_n2_on(&net, params, p)
}

/// [`scheme_n2`] for an already built (or loaded) N2(m, q).
pub fn scheme_n2_on(net: &SumNetwork, params: NetParams, p: u64) -> Result<FracLinCode, CodeError> {
    let field = PrimeField::new(p)?;
    if field.divides(params.q) {
        return Err(CodeError::Refused(format!("characteristic must not divide q (p = {p}, q = {})", params.q)));
    }
    n2_code(net, params, field)
}

/// Builds the N2 scheme regardless of the characteristic. When `p` divides
/// `q` there is no inverse of `q`; the construction then uses zero in its
/// place and the result fails verification.
pub fn scheme_n2_unchecked(params: NetParams, p: u64) -> Result<FracLinCode, CodeError> {
    let net = crate::constructions::build_n2(params)?;
    n2_code(&net, params, PrimeField::new(p)?)
}

fn n2_code(net: &SumNetwork, params: NetParams, field: PrimeField) -> Result<FracLinCode, CodeError> {
    let view = ThreeLayerView::new(net)?;
    check_base(net, &view, params)?;
    let (m, l, g) = (params.m, params.m + 1, params.group_width());
    let q_inv: Felt = field.reduce(params.q as i64).inv().unwrap_or(field.zero());
    let composites = scheme_composites(net, &view, params, field, |j| (1..=g).filter(|&y| y != j).collect())?;
    let taps = tap_decoders(net, &view, |prefix, idx, group| match (prefix, idx) {
        ("t", [_]) => Some(project(field, l).scale(q_inv)),
        ("t", [_, _]) => Some(project(field, l)),
        ("t", &[i, x, _]) if group == i => Some(minus_slot(field, l, 0, slot_low(i, x))),
        ("t", &[i, x, _]) if group == x => Some(minus_slot(field, l, 1, slot_high(m, x, i))),
        ("tp", &[i, x]) if group == i => Some(minus_slot(field, l, 0, slot_low(i, x)).scale(q_inv)),
        ("tp", &[i, x]) if group == x => Some(minus_slot(field, l, 1, slot_high(m, x, i)).scale(q_inv)),
        _ => None,
    })?;
    assemble(net, &view, field, 2, l, &composites, &taps)
}

/// The family scheme on the instance's network: the base scheme when `k = 1`,
/// otherwise its lift to the k-copy merge at `(2k, m + 1)`.
pub fn scheme_for_instance(inst: &FamilyInstance, p: u64) -> Result<FracLinCode, CodeError> {
    let base = match inst.family {
        Family::N1 => scheme_n1_on(&inst.base, inst.params, p)?,
        Family::N2 => scheme_n2_on(&inst.base, inst.params, p)?,
    };
    if inst.k == 1 {
        return Ok(base);
    }
    lift_to_copies(&inst.base, &inst.network, &inst.map, &base)
}

/// Builds the family's k-copy merge and returns its scheme.
pub fn scheme_merged(family: Family, params: NetParams, p: u64, k: usize) -> Result<FracLinCode, CodeError> {
    scheme_for_instance(&FamilyInstance::new(family, params, k)?, p)
}

/// Runs `code` independently in every copy of a merge: copy `c` (0-based)
/// works on source components `c*r .. (c+1)*r` of a `(k*r, l)` code.
pub fn lift_to_copies(
    base: &SumNetwork,
    merged: &SumNetwork,
    map: &CopyMap,
    code: &FracLinCode,
) -> Result<FracLinCode, CodeError> {
    code.check_against(base)?;
    let (f, r, l, k) = (code.field, code.r, code.l, map.copies());
    let edges = merged
        .edge_ids()
        .map(|e| {
            let (be, c) = map.edge_origin(e);
            match &code.edges[be.0] {
                EdgeCoding::FromSource(a) => {
                    let mut wide = Mat::zeros(f, l, k * r);
                    wide.set_block(0, c * r, a);
                    EdgeCoding::FromSource(wide)
                }
                inner @ EdgeCoding::FromInner(_) => inner.clone(),
            }
        })
        .collect();
    let decoders = merged
        .node_ids()
        .map(|n| {
            let base_list = &code.decoders[map.node_origin(n).0];
            if base_list.is_empty() {
                return Vec::new();
            }
            merged
                .in_edges(n)
                .iter()
                .map(|&e| {
                    let (be, c) = map.edge_origin(e);
                    let mut tall = Mat::zeros(f, k * r, l);
                    tall.set_block(c * r, 0, &base_list[base.in_position(be)]);
                    tall
                })
                .collect()
        })
        .collect();
    Ok(FracLinCode { field: f, r: k * r, l, edges, decoders })
}

/// Characteristic-free `(1, max |S_e|)` code: every middle edge forwards each
/// reachable source verbatim and each terminal adds every source once.
pub fn routing_code(net: &SumNetwork, p: u64) -> Result<FracLinCode, CodeError> {
    let field = PrimeField::new(p)?;
    let view = ThreeLayerView::new(net)?;
    let l = view.middle_edges().iter().map(|me| me.sources.len()).max().unwrap_or(0).max(1);
    let composites: Vec<Mat> = view
        .middle_edges()
        .iter()
        .map(|me| {
            let mut c = Mat::zeros(field, l, me.sources.len());
            for k in 0..me.sources.len() {
                c.set_raw(k, k, 1);
            }
            c
        })
        .collect();
    let taps: TapDecoders = view
        .terminals()
        .iter()
        .map(|tv| {
            let mut covered = BTreeSet::new();
            tv.middle_taps()
                .map(|(_, mi)| {
                    let mut d = Mat::zeros(field, 1, l);
                    for (k, &s) in view.middle_edges()[mi].sources.iter().enumerate() {
                        if covered.insert(s) {
                            d.set_raw(0, k, 1);
                        }
                    }
                    d
                })
                .collect()
        })
        .collect();
    assemble(net, &view, field, 1, l, &composites, &taps)
}
