//! Builders for the parametric sum-networks N1(m, q) and N2(m, q), their
//! k-copy merges, the rate-targeted construction, and a tiny test network.
//!
//! Labels are fixed so that files are reproducible: sources `s_i`, `s_i_j`,
//! `s_i_x_j`; intermediates `u_i_j`, `v_i_j` (with `_c<t>` appended in copy
//! `t` of a merge); terminals `t_i`, `t_i_j`, `t_i_x_j` and, in N2, `tp_i_x`.
//! All indices are 1-based, `j` ranges over `1..=q+1` and `i < x`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::analysis::capacity;
use crate::galois::{is_prime, MAX_MODULUS};
use crate::network::{EdgeId, NetworkBuilder, NetworkError, NodeId, Role, SumNetwork};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("copy count must be at least 1")]
    ZeroCopies,
    #[error("product of primes overflows the field ceiling 2^31")]
    QOverflow,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} listed twice")]
    DuplicatePrime(u64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    N1,
    N2,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::N1 => "n1",
            Family::N2 => "n2",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "n1" => Some(Family::N1),
            "n2" => Some(Family::N2),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters shared by both families: `m` source groups and the integer `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetParams {
    pub m: usize,
    pub q: u64,
}

pub type N1Params = NetParams;
pub type N2Params = NetParams;

impl NetParams {
    pub fn new(m: usize, q: u64) -> Result<Self, ConstructionError> {
        if m < 1 {
            return Err(ConstructionError::InvalidParams("m must be at least 1".into()));
        }
        if q < 2 {
            return Err(ConstructionError::InvalidParams("q must be at least 2".into()));
        }
        if q >= MAX_MODULUS {
            return Err(ConstructionError::QOverflow);
        }
        Ok(Self { m, q })
    }

    /// Number of middle edges per group, `q + 1`.
    pub fn group_width(self) -> usize {
        self.q as usize + 1
    }

    fn pairs(self) -> impl Iterator<Item = (usize, usize)> {
        let m = self.m;
        (1..=m).flat_map(move |i| (i + 1..=m).map(move |x| (i, x)))
    }

    fn binom2(self) -> usize {
        self.m * (self.m - 1) / 2
    }

    /// Closed-form `(sources, terminals, intermediates, middle edges)` of N1.
    pub fn n1_counts(self) -> (usize, usize, usize, usize) {
        let g = self.group_width();
        let s = self.m + self.m * g + self.binom2() * g;
        (s, s, 2 * self.m * g, self.m * g)
    }

    /// Closed-form `(sources, terminals, intermediates, middle edges)` of N2.
    pub fn n2_counts(self) -> (usize, usize, usize, usize) {
        let g = self.group_width();
        let s = self.m * g + self.binom2() * g;
        let t = self.m + self.m * g + self.binom2() * g + self.binom2();
        (s, t, 2 * self.m * g, self.m * g)
    }
}

pub(crate) mod labels {
    use super::*;

    pub fn s1(i: usize) -> String {
        format!("s_{i}")
    }
    pub fn s2(i: usize, j: usize) -> String {
        format!("s_{i}_{j}")
    }
    pub fn s3(i: usize, x: usize, j: usize) -> String {
        format!("s_{i}_{x}_{j}")
    }
    pub fn u(i: usize, j: usize) -> String {
        format!("u_{i}_{j}")
    }
    pub fn v(i: usize, j: usize) -> String {
        format!("v_{i}_{j}")
    }
    pub fn t1(i: usize) -> String {
        format!("t_{i}")
    }
    pub fn t2(i: usize, j: usize) -> String {
        format!("t_{i}_{j}")
    }
    pub fn t3(i: usize, x: usize, j: usize) -> String {
        format!("t_{i}_{x}_{j}")
    }
    pub fn t4(i: usize, x: usize) -> String {
        format!("tp_{i}_{x}")
    }
    pub fn copy(label: &str, c: usize) -> String {
        format!("{label}_c{c}")
    }
}

/// Splits a label such as `u_3_2_c1` into its prefix, indices and copy number.
pub fn parse_label(label: &str) -> Option<(&str, Vec<usize>, Option<usize>)> {
    let mut parts = label.split('_');
    let prefix = parts.next()?;
    let mut idx = Vec::new();
    let mut copy = None;
    for part in parts {
        if copy.is_some() {
            return None;
        }
        if let Some(c) = part.strip_prefix('c') {
            copy = Some(c.parse().ok()?);
        } else {
            idx.push(part.parse().ok()?);
        }
    }
    Some((prefix, idx, copy))
}

/// Sources with a path to the tail of middle edge `e_ij` in N1:
/// `{s_i, s_ij} ∪ {s_xij : x < i} ∪ {s_ixj : x > i}`.
pub fn n1_tail_sources(params: NetParams, i: usize, j: usize) -> Vec<String> {
    let mut out = vec![labels::s1(i), labels::s2(i, j)];
    out.extend((1..i).map(|x| labels::s3(x, i, j)));
    out.extend((i + 1..=params.m).map(|x| labels::s3(i, x, j)));
    out
}

/// Sources with a path to the tail of middle edge `e_ij` in N2: own-group
/// sources `s_iy` and triple sources `s_xiy`, `s_ixy` with `y != j`.
pub fn n2_tail_sources(params: NetParams, i: usize, j: usize) -> Vec<String> {
    let g = params.group_width();
    let mut out: Vec<String> = (1..=g).filter(|&y| y != j).map(|y| labels::s2(i, y)).collect();
    for x in 1..i {
        out.extend((1..=g).filter(|&y| y != j).map(|y| labels::s3(x, i, y)));
    }
    for x in i + 1..=params.m {
        out.extend((1..=g).filter(|&y| y != j).map(|y| labels::s3(i, x, y)));
    }
    out
}

fn node_set(b: &NetworkBuilder, labels: &[String]) -> Result<BTreeSet<NodeId>, NetworkError> {
    labels.iter().map(|l| b.node(l)).collect()
}

/// Adds `s -> t` for every source `s` (in source order) outside `covered`.
fn add_direct(
    b: &mut NetworkBuilder,
    sources: &[NodeId],
    covered: &BTreeSet<NodeId>,
    t: &str,
) -> Result<(), NetworkError> {
    let t = b.node(t)?;
    for &s in sources {
        if !covered.contains(&s) {
            b.add_edge(s, t);
        }
    }
    Ok(())
}

fn add_nodes(
    b: &mut NetworkBuilder,
    labels: impl IntoIterator<Item = String>,
    role: Role,
) -> Result<Vec<NodeId>, NetworkError> {
    labels.into_iter().map(|l| b.add_node(l, role)).collect()
}

fn add_middle_layer(b: &mut NetworkBuilder, params: NetParams) -> Result<(), NetworkError> {
    let (m, g) = (params.m, params.group_width());
    add_nodes(b, (1..=m).flat_map(|i| (1..=g).map(move |j| labels::u(i, j))), Role::Intermediate)?;
    add_nodes(b, (1..=m).flat_map(|i| (1..=g).map(move |j| labels::v(i, j))), Role::Intermediate)?;
    Ok(())
}

/// Builds N1(m, q).
pub fn build_n1(params: NetParams) -> Result<SumNetwork, ConstructionError> {
    let params = NetParams::new(params.m, params.q)?;
    let (m, g) = (params.m, params.group_width());
    let mut b = NetworkBuilder::new();
    let mut sources = add_nodes(&mut b, (1..=m).map(labels::s1), Role::Source)?;
    sources.extend(add_nodes(&mut b, (1..=m).flat_map(|i| (1..=g).map(move |j| labels::s2(i, j))), Role::Source)?);
    sources.extend(add_nodes(
        &mut b,
        params.pairs().flat_map(|(i, x)| (1..=g).map(move |j| labels::s3(i, x, j))),
        Role::Source,
    )?);
    add_middle_layer(&mut b, params)?;
    add_nodes(&mut b, (1..=m).map(labels::t1), Role::Terminal)?;
    add_nodes(&mut b, (1..=m).flat_map(|i| (1..=g).map(move |j| labels::t2(i, j))), Role::Terminal)?;
    add_nodes(&mut b, params.pairs().flat_map(|(i, x)| (1..=g).map(move |j| labels::t3(i, x, j))), Role::Terminal)?;

    let ij = || (1..=m).flat_map(move |i| (1..=g).map(move |j| (i, j)));
    let pj = || params.pairs().flat_map(move |(i, x)| (1..=g).map(move |j| (i, x, j)));
    for (i, j) in ij() {
        b.add_edge_by_label(&labels::u(i, j), &labels::v(i, j))?;
    }
    for (i, j) in ij() {
        b.add_edge_by_label(&labels::s1(i), &labels::u(i, j))?;
    }
    for (i, j) in ij() {
        b.add_edge_by_label(&labels::s2(i, j), &labels::u(i, j))?;
    }
    for (i, x, j) in pj() {
        b.add_edge_by_label(&labels::s3(i, x, j), &labels::u(i, j))?;
        b.add_edge_by_label(&labels::s3(i, x, j), &labels::u(x, j))?;
    }
    for (i, j) in ij() {
        b.add_edge_by_label(&labels::v(i, j), &labels::t1(i))?;
    }
    for (i, j) in ij() {
        b.add_edge_by_label(&labels::v(i, j), &labels::t2(i, j))?;
    }
    for (i, x, j) in pj() {
        b.add_edge_by_label(&labels::v(i, j), &labels::t3(i, x, j))?;
        b.add_edge_by_label(&labels::v(x, j), &labels::t3(i, x, j))?;
    }

    let tail_set = |b: &NetworkBuilder, i, j| node_set(b, &n1_tail_sources(params, i, j));
    for i in 1..=m {
        let mut covered = BTreeSet::new();
        for j in 1..=g {
            covered.extend(tail_set(&b, i, j)?);
        }
        add_direct(&mut b, &sources, &covered, &labels::t1(i))?;
    }
    for (i, j) in ij() {
        let covered = tail_set(&b, i, j)?;
        add_direct(&mut b, &sources, &covered, &labels::t2(i, j))?;
    }
    for (i, x, j) in pj() {
        let mut covered = tail_set(&b, i, j)?;
        covered.extend(tail_set(&b, x, j)?);
        add_direct(&mut b, &sources, &covered, &labels::t3(i, x, j))?;
    }
    Ok(b.build()?)
}

/// Builds N2(m, q).
pub fn build_n2(params: NetParams) -> Result<SumNetwork, ConstructionError> {
    let params = NetParams::new(params.m, params.q)?;
    let (m, g) = (params.m, params.group_width());
    let mut b = NetworkBuilder::new();
    let mut sources = add_nodes(&mut b, (1..=m).flat_map(|i| (1..=g).map(move |j| labels::s2(i, j))), Role::Source)?;
    sources.extend(add_nodes(
        &mut b,
        params.pairs().flat_map(|(i, x)| (1..=g).map(move |j| labels::s3(i, x, j))),
        Role::Source,
    )?);
    add_middle_layer(&mut b, params)?;
    add_nodes(&mut b, (1..=m).map(labels::t1), Role::Terminal)?;
    add_nodes(&mut b, (1..=m).flat_map(|i| (1..=g).map(move |j| labels::t2(i, j))), Role::Terminal)?;
    add_nodes(&mut b, params.pairs().flat_map(|(i, x)| (1..=g).map(move |j| labels::t3(i, x, j))), Role::Terminal)?;
    add_nodes(&mut b, params.pairs().map(|(i, x)| labels::t4(i, x)), Role::Terminal)?;

    let ij = || (1..=m).flat_map(move |i| (1..=g).map(move |j| (i, j)));
    let pj = || params.pairs().flat_map(move |(i, x)| (1..=g).map(move |j| (i, x, j)));
    for (i, j) in ij() {
        b.add_edge_by_label(&labels::u(i, j), &labels::v(i, j))?;
    }
    for (i, j) in ij() {
        for x in (1..=g).filter(|&x| x != j) {
            b.add_edge_by_label(&labels::s2(i, j), &labels::u(i, x))?;
        }
    }
    for (i, x, j) in pj() {
        for y in (1..=g).filter(|&y| y != j) {
            b.add_edge_by_label(&labels::s3(i, x, j), &labels::u(i, y))?;
            b.add_edge_by_label(&labels::s3(i, x, j), &labels::u(x, y))?;
        }
    }
    for (i, j) in ij() {
        b.add_edge_by_label(&labels::v(i, j), &labels::t1(i))?;
    }
    for (i, j) in ij() {
        b.add_edge_by_label(&labels::v(i, j), &labels::t2(i, j))?;
    }
    for (i, x, j) in pj() {
        b.add_edge_by_label(&labels::v(i, j), &labels::t3(i, x, j))?;
        b.add_edge_by_label(&labels::v(x, j), &labels::t3(i, x, j))?;
    }
    for (i, j) in ij() {
        for x in 1..i {
            b.add_edge_by_label(&labels::v(i, j), &labels::t4(x, i))?;
        }
        for y in i + 1..=m {
            b.add_edge_by_label(&labels::v(i, j), &labels::t4(i, y))?;
        }
    }

    let tail_set = |b: &NetworkBuilder, i, j| node_set(b, &n2_tail_sources(params, i, j));
    let group_set = |b: &NetworkBuilder, i| -> Result<BTreeSet<NodeId>, NetworkError> {
        let mut covered = BTreeSet::new();
        for j in 1..=g {
            covered.extend(tail_set(b, i, j)?);
        }
        Ok(covered)
    };
    for i in 1..=m {
        let covered = group_set(&b, i)?;
        add_direct(&mut b, &sources, &covered, &labels::t1(i))?;
    }
    for (i, j) in ij() {
        let covered = tail_set(&b, i, j)?;
        add_direct(&mut b, &sources, &covered, &labels::t2(i, j))?;
    }
    for (i, x, j) in pj() {
        let mut covered = tail_set(&b, i, j)?;
        covered.extend(tail_set(&b, x, j)?);
        add_direct(&mut b, &sources, &covered, &labels::t3(i, x, j))?;
    }
    for (i, x) in params.pairs() {
        let mut covered = group_set(&b, i)?;
        covered.extend(group_set(&b, x)?);
        add_direct(&mut b, &sources, &covered, &labels::t4(i, x))?;
    }
    Ok(b.build()?)
}

/// Two sources share one middle edge that feeds two terminals; no direct edges.
pub fn build_bottleneck2() -> SumNetwork {
    let mut b = NetworkBuilder::new();
    let s1 = b.add_node("s_1", Role::Source).expect("fresh label");
    let s2 = b.add_node("s_2", Role::Source).expect("fresh label");
    let u = b.add_node("u", Role::Intermediate).expect("fresh label");
    let v = b.add_node("v", Role::Intermediate).expect("fresh label");
    let t1 = b.add_node("t_1", Role::Terminal).expect("fresh label");
    let t2 = b.add_node("t_2", Role::Terminal).expect("fresh label");
    b.add_edge(s1, u);
    b.add_edge(s2, u);
    b.add_edge(u, v);
    b.add_edge(v, t1);
    b.add_edge(v, t2);
    b.build().expect("well-formed by construction")
}

/// Correspondence between a base network and its k-copy merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyMap {
    k: usize,
    edge_images: Vec<Vec<EdgeId>>,
    edge_origin: Vec<(EdgeId, usize)>,
    node_images: Vec<Vec<NodeId>>,
    node_origin: Vec<NodeId>,
}

impl CopyMap {
    /// The trivial map of a network onto itself (`k = 1`).
    pub fn identity(net: &SumNetwork) -> Self {
        Self {
            k: 1,
            edge_images: net.edge_ids().map(|e| vec![e]).collect(),
            edge_origin: net.edge_ids().map(|e| (e, 0)).collect(),
            node_images: net.node_ids().map(|n| vec![n]).collect(),
            node_origin: net.node_ids().collect(),
        }
    }

    pub fn copies(&self) -> usize {
        self.k
    }

    /// Image of base edge `e` in copy `c` (0-based).
    pub fn edge_image(&self, e: EdgeId, c: usize) -> EdgeId {
        self.edge_images[e.0][c]
    }

    /// Base edge and copy of a merged edge.
    pub fn edge_origin(&self, e: EdgeId) -> (EdgeId, usize) {
        self.edge_origin[e.0]
    }

    pub fn node_image(&self, n: NodeId, c: usize) -> NodeId {
        self.node_images[n.0][c]
    }

    pub fn node_origin(&self, n: NodeId) -> NodeId {
        self.node_origin[n.0]
    }
}

/// k disjoint copies of `base` with same-labelled sources and terminals identified.
pub fn k_copy_merge(base: &SumNetwork, k: usize) -> Result<SumNetwork, ConstructionError> {
    k_copy_merge_with_map(base, k).map(|(net, _)| net)
}

/// [`k_copy_merge`] plus the base/copy correspondence.
///
/// Intermediate nodes of copy `t` (1-based) get the suffix `_c<t>`. Edges are
/// inserted copy-major in base edge order, and every in-edge order is
/// copy-major followed by the base order.
#[allow(clippy::needless_range_loop)]
pub fn k_copy_merge_with_map(base: &SumNetwork, k: usize) -> Result<(SumNetwork, CopyMap), ConstructionError> {
    if k < 1 {
        return Err(ConstructionError::ZeroCopies);
    }
    let mut b = NetworkBuilder::new();
    let mut node_images: Vec<Vec<NodeId>> = vec![Vec::new(); base.num_nodes()];
    let mut node_origin = Vec::new();
    let shared = |n: NodeId| base.role(n) != Role::Intermediate;

    for n in base.nodes_with_role(Role::Source) {
        let id = b.add_node(base.label(n), Role::Source)?;
        node_images[n.0] = vec![id; k];
        node_origin.push(n);
    }
    for c in 0..k {
        for n in base.nodes_with_role(Role::Intermediate) {
            let id = b.add_node(labels::copy(base.label(n), c + 1), Role::Intermediate)?;
            node_images[n.0].push(id);
            node_origin.push(n);
        }
    }
    for n in base.nodes_with_role(Role::Terminal) {
        let id = b.add_node(base.label(n), Role::Terminal)?;
        node_images[n.0] = vec![id; k];
        node_origin.push(n);
    }

    let mut edge_images: Vec<Vec<EdgeId>> = vec![Vec::with_capacity(k); base.num_edges()];
    let mut edge_origin = Vec::with_capacity(k * base.num_edges());
    for c in 0..k {
        for e in base.edge_ids() {
            let edge = base.edge(e);
            let id = b.add_edge(node_images[edge.tail.0][c], node_images[edge.head.0][c]);
            edge_images[e.0].push(id);
            edge_origin.push((e, c));
        }
    }

    for n in base.node_ids() {
        if shared(n) {
            let order: Vec<EdgeId> = (0..k)
                .flat_map(|c| base.in_edges(n).iter().map(|&e| edge_images[e.0][c]).collect::<Vec<_>>())
                .collect();
            b.set_in_order(node_images[n.0][0], order);
        } else {
            for c in 0..k {
                let order = base.in_edges(n).iter().map(|&e| edge_images[e.0][c]).collect();
                b.set_in_order(node_images[n.0][c], order);
            }
        }
    }
    b.set_source_order(base.source_order().iter().map(|&s| node_images[s.0][0]).collect());
    let net = b.build()?.with_field_hint(base.field_hint());
    Ok((net, CopyMap { k, edge_images, edge_origin, node_images, node_origin }))
}

/// A family network together with its (possibly trivial) k-copy merge.
#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub family: Family,
    pub params: NetParams,
    pub k: usize,
    /// The single-copy network N1(m, q) or N2(m, q).
    pub base: SumNetwork,
    /// `base` itself when `k = 1`, otherwise the k-copy merge.
    pub network: SumNetwork,
    pub map: CopyMap,
}

impl FamilyInstance {
    pub fn new(family: Family, params: NetParams, k: usize) -> Result<Self, ConstructionError> {
        if k < 1 {
            return Err(ConstructionError::ZeroCopies);
        }
        let base = match family {
            Family::N1 => build_n1(params)?,
            Family::N2 => build_n2(params)?,
        };
        let (network, map) =
            if k == 1 { (base.clone(), CopyMap::identity(&base)) } else { k_copy_merge_with_map(&base, k)? };
        Ok(Self { family, params, k, base, network, map })
    }

    /// Capacity `2k / (m + 1)`.
    pub fn capacity(&self) -> Ratio<u64> {
        capacity(self.params.m, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimeSetMode {
    /// Rate achievable exactly when the characteristic is in the set.
    InSet,
    /// Rate achievable exactly when the characteristic is outside the set.
    NotInSet,
}

impl PrimeSetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PrimeSetMode::InSet => "in-set",
            PrimeSetMode::NotInSet => "not-in-set",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "in-set" => Some(PrimeSetMode::InSet),
            "not-in-set" => Some(PrimeSetMode::NotInSet),
            _ => None,
        }
    }
}

/// Target rate `k/n` whose achievability should hinge on a prime set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateTarget {
    pub k: usize,
    pub n: usize,
    pub primes: Vec<u64>,
    pub mode: PrimeSetMode,
}

/// What a built network is: family, parameters and capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetManifest {
    /// `n1`, `n2` or `bottleneck2`.
    pub family: String,
    pub m: Option<usize>,
    pub q: Option<u64>,
    pub k: usize,
    pub capacity: Ratio<u64>,
    pub primes: Vec<u64>,
    pub mode: Option<PrimeSetMode>,
}

impl NetManifest {
    pub fn for_instance(inst: &FamilyInstance) -> Self {
        Self {
            family: inst.family.as_str().to_string(),
            m: Some(inst.params.m),
            q: Some(inst.params.q),
            k: inst.k,
            capacity: inst.capacity(),
            primes: Vec::new(),
            mode: None,
        }
    }

    pub fn bottleneck2() -> Self {
        Self {
            family: "bottleneck2".to_string(),
            m: None,
            q: None,
            k: 1,
            capacity: Ratio::from_integer(1),
            primes: Vec::new(),
            mode: None,
        }
    }

    pub fn family_kind(&self) -> Option<Family> {
        Family::parse(&self.family)
    }
}

/// Builds the network for a rate target: `q` is the product of the primes,
/// `m = 2n - 1`, the base is N1 (in-set) or N2 (not-in-set), merged `k` times.
pub fn build_for_rate(target: &RateTarget) -> Result<(FamilyInstance, NetManifest), ConstructionError> {
    if target.k < 1 || target.n < 1 {
        return Err(ConstructionError::InvalidParams("k and n must be positive".into()));
    }
    if target.primes.is_empty() {
        return Err(ConstructionError::InvalidParams("prime set must be nonempty".into()));
    }
    let mut seen = BTreeSet::new();
    let mut q: u64 = 1;
    for &p in &target.primes {
        if !is_prime(p) {
            return Err(ConstructionError::NotPrime(p));
        }
        if !seen.insert(p) {
            return Err(ConstructionError::DuplicatePrime(p));
        }
        q = q.checked_mul(p).filter(|&q| q < MAX_MODULUS).ok_or(ConstructionError::QOverflow)?;
    }
    let family = match target.mode {
        PrimeSetMode::InSet => Family::N1,
        PrimeSetMode::NotInSet => Family::N2,
    };
    let params = NetParams::new(2 * target.n - 1, q)?;
    let inst = FamilyInstance::new(family, params, target.k)?;
    let manifest =
        NetManifest { primes: seen.into_iter().collect(), mode: Some(target.mode), ..NetManifest::for_instance(&inst) };
    debug_assert_eq!(manifest.capacity, Ratio::new(target.k as u64, target.n as u64));
    Ok((inst, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ThreeLayerView;

    fn counts(net: &SumNetwork) -> (usize, usize, usize, usize) {
        let middle = net.edge_ids().filter(|&e| net.is_middle_edge(e)).count();
        (
            net.nodes_with_role(Role::Source).count(),
            net.nodes_with_role(Role::Terminal).count(),
            net.nodes_with_role(Role::Intermediate).count(),
            middle,
        )
    }

    fn p(m: usize, q: u64) -> NetParams {
        NetParams::new(m, q).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(NetParams::new(0, 2).is_err());
        assert!(NetParams::new(1, 1).is_err());
        assert!(NetParams::new(1, 2).is_ok());
    }

    #[test]
    fn n1_m2_q2_inventory() {
        let net = build_n1(p(2, 2)).unwrap();
        assert_eq!(counts(&net), (11, 11, 12, 6));
        assert!(net.validate().is_empty());
    }

    #[test]
    fn n1_m1_has_no_triple_terminals() {
        let net = build_n1(p(1, 2)).unwrap();
        assert_eq!(counts(&net).0, 4);
        assert!(net.nodes().iter().all(|n| parse_label(&n.label).unwrap().1.len() < 3));
    }

    #[test]
    fn n1_direct_edge_counts_follow_tail_sets() {
        let params = p(2, 2);
        let net = build_n1(params).unwrap();
        let total = 11;
        for i in 1..=2 {
            for j in 1..=3 {
                let t = net.node_by_label(&labels::t2(i, j)).unwrap();
                let s_ij = n1_tail_sources(params, i, j);
                let direct = net.in_edges(t).iter().filter(|&&e| net.role(net.edge(e).tail) == Role::Source).count();
                let middle = net.in_edges(t).len() - direct;
                assert_eq!(direct, total - s_ij.len());
                assert_eq!(middle, 1);
            }
        }
    }

    #[test]
    fn n2_m2_q2_inventory_and_edge_item_two() {
        let net = build_n2(p(2, 2)).unwrap();
        assert_eq!(counts(&net), (9, 12, 12, 6));
        assert!(net.validate().is_empty());
        let s11 = net.node_by_label("s_1_1").unwrap();
        let heads: Vec<&str> =
            net.out_edges(s11).iter().map(|&e| net.label(net.edge(e).head)).filter(|l| l.starts_with('u')).collect();
        assert_eq!(heads, vec!["u_1_2", "u_1_3"]);
    }

    #[test]
    fn n2_m3_q2_prime_terminal_taps() {
        let net = build_n2(p(3, 2)).unwrap();
        let t = net.node_by_label("tp_1_3").unwrap();
        let mut taps: Vec<&str> =
            net.in_edges(t).iter().map(|&e| net.label(net.edge(e).tail)).filter(|l| l.starts_with('v')).collect();
        taps.sort();
        assert_eq!(taps, vec!["v_1_1", "v_1_2", "v_1_3", "v_3_1", "v_3_2", "v_3_3"]);
    }

    #[test]
    fn closed_form_counts_over_grid() {
        for m in 1..=3 {
            for q in [2u64, 3, 6] {
                let params = p(m, q);
                assert_eq!(counts(&build_n1(params).unwrap()), params.n1_counts());
                assert_eq!(counts(&build_n2(params).unwrap()), params.n2_counts());
            }
        }
    }

    #[test]
    fn tail_sets_match_graph_and_sizes() {
        for m in 1..=3 {
            for q in [2u64, 3, 6] {
                let params = p(m, q);
                for (family, net) in [(Family::N1, build_n1(params).unwrap()), (Family::N2, build_n2(params).unwrap())]
                {
                    let view = ThreeLayerView::new(&net).unwrap();
                    for me in view.middle_edges() {
                        let (_, idx, _) = parse_label(net.label(me.tail)).unwrap();
                        let (i, j) = (idx[0], idx[1]);
                        let mut expected = match family {
                            Family::N1 => n1_tail_sources(params, i, j),
                            Family::N2 => n2_tail_sources(params, i, j),
                        };
                        expected.sort();
                        let mut got: Vec<String> =
                            me.sources.iter().map(|&s| net.label(net.source_order()[s]).to_string()).collect();
                        got.sort();
                        assert_eq!(got, expected);
                        match family {
                            Family::N1 => assert_eq!(got.len(), m + 1),
                            Family::N2 => assert_eq!(got.len(), q as usize * m),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn topo_order_respects_layers_on_n1() {
        let net = build_n1(p(2, 2)).unwrap();
        let order = net.topo_order().unwrap();
        assert_eq!(order.len(), net.num_edges());
        let pos = |e: EdgeId| order.iter().position(|&x| x == e).unwrap();
        for e in net.edge_ids() {
            let tail = net.edge(e).tail;
            for &f in net.in_edges(tail) {
                assert!(pos(f) < pos(e));
            }
        }
        assert_eq!(net.topo_order().unwrap(), order);
    }

    #[test]
    fn dot_highlights_middle_edges() {
        let dot = build_n1(p(2, 2)).unwrap().to_dot();
        assert_eq!(dot.matches("penwidth=2").count(), 6);
    }

    #[test]
    fn merge_counts_and_degrees() {
        let base = build_n1(p(2, 2)).unwrap();
        let merged = k_copy_merge(&base, 3).unwrap();
        assert_eq!(counts(&merged), (11, 11, 36, 18));
        assert!(merged.validate().is_empty());
        for t in base.terminals() {
            let mt = merged.node_by_label(base.label(t)).unwrap();
            assert_eq!(merged.in_edges(mt).len(), 3 * base.in_edges(t).len());
        }
        assert_eq!(k_copy_merge(&base, 0), Err(ConstructionError::ZeroCopies));
    }

    #[test]
    fn merge_with_one_copy_is_isomorphic() {
        let base = build_n2(p(2, 3)).unwrap();
        let (merged, map) = k_copy_merge_with_map(&base, 1).unwrap();
        assert_eq!(merged.num_nodes(), base.num_nodes());
        assert_eq!(merged.num_edges(), base.num_edges());
        for e in base.edge_ids() {
            let me = map.edge_image(e, 0);
            let (a, b) = (base.edge(e), merged.edge(me));
            assert_eq!(map.node_origin(b.tail), a.tail);
            assert_eq!(map.node_origin(b.head), a.head);
            assert_eq!(map.edge_origin(me), (e, 0));
        }
        for n in base.node_ids() {
            let img: Vec<EdgeId> = base.in_edges(n).iter().map(|&e| map.edge_image(e, 0)).collect();
            assert_eq!(merged.in_edges(map.node_image(n, 0)), img.as_slice());
        }
    }

    #[test]
    fn merge_in_order_is_copy_major() {
        let base = build_bottleneck2();
        let (merged, map) = k_copy_merge_with_map(&base, 2).unwrap();
        let t1 = merged.node_by_label("t_1").unwrap();
        let labels: Vec<String> = merged.in_edges(t1).iter().map(|&e| merged.edge_label(e)).collect();
        assert_eq!(labels, vec!["v_c1->t_1#0", "v_c2->t_1#0"]);
        assert_eq!(map.copies(), 2);
    }

    #[test]
    fn rate_builder_examples() {
        let (inst, man) =
            build_for_rate(&RateTarget { k: 3, n: 5, primes: vec![2], mode: PrimeSetMode::InSet }).unwrap();
        assert_eq!((inst.params.q, inst.params.m, inst.k, inst.family), (2, 9, 3, Family::N1));
        assert_eq!(man.capacity, Ratio::new(3, 5));

        let (inst, man) =
            build_for_rate(&RateTarget { k: 1, n: 2, primes: vec![2, 3], mode: PrimeSetMode::InSet }).unwrap();
        assert_eq!((inst.params.q, inst.params.m, inst.k), (6, 3, 1));
        assert_eq!(inst.network, inst.base);
        assert_eq!(man.capacity, Ratio::new(1, 2));

        let (inst, _) =
            build_for_rate(&RateTarget { k: 2, n: 3, primes: vec![5], mode: PrimeSetMode::NotInSet }).unwrap();
        assert_eq!((inst.params.q, inst.params.m, inst.k, inst.family), (5, 5, 2, Family::N2));
    }

    #[test]
    fn rate_builder_rejects_bad_targets() {
        let t = |primes: Vec<u64>| RateTarget { k: 1, n: 1, primes, mode: PrimeSetMode::InSet };
        assert_eq!(build_for_rate(&t(vec![4])).unwrap_err(), ConstructionError::NotPrime(4));
        assert_eq!(build_for_rate(&t(vec![3, 3])).unwrap_err(), ConstructionError::DuplicatePrime(3));
        assert_eq!(build_for_rate(&t(vec![65_521, 65_519])).unwrap_err(), ConstructionError::QOverflow);
        assert!(build_for_rate(&t(vec![])).is_err());
    }

    #[test]
    fn bottleneck2_shape() {
        let net = build_bottleneck2();
        assert_eq!((net.num_nodes(), net.num_edges()), (6, 5));
        assert!(net.validate().is_empty());
    }

    #[test]
    fn label_parsing() {
        assert_eq!(parse_label("u_3_2_c1"), Some(("u", vec![3, 2], Some(1))));
        assert_eq!(parse_label("tp_1_2"), Some(("tp", vec![1, 2], None)));
        assert_eq!(parse_label("u_c1_2"), None);
    }
}
