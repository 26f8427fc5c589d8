//! Canonical JSON files for networks, codes and network manifests.
//!
//! Output is compact JSON with object keys in sorted order, terminated by a
//! newline, so serializing a parsed file reproduces it byte for byte.
//!
//! Network file:
//!
//! ```text
//! {"edges":[{"head":"u","par":0,"tail":"s_1"},...],
//!  "field_hint":2,                      (optional)
//!  "in_order":{"t_1":[3],...},          (edge indices, every node listed)
//!  "nodes":[{"label":"s_1","role":"source"},...],
//!  "source_order":["s_1","s_2"],
//!  "version":1}
//! ```
//!
//! Edges point from `tail` (origin) to `head` (destination); `par`
//! distinguishes parallel edges. Edge labels elsewhere are `tail->head#par`.
//!
//! Code file: `{"edge_matrices", "l", "p", "r", "terminal_matrices",
//! "version"}`. Every matrix is a flat row-major array. An edge leaving a
//! source maps to one such array (`l x r`); any other edge maps to a list of
//! `l x l` arrays aligned with its tail's in-edge order. Terminals map to a
//! list of `r x l` arrays aligned with their own in-edge order.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde_json::{json, Map, Value};
use sumnet_core::coding::{EdgeCoding, FracLinCode};
use sumnet_core::constructions::{NetManifest, PrimeSetMode};
use sumnet_core::galois::PrimeField;
use sumnet_core::matrix::Mat;
use sumnet_core::network::{Edge, EdgeId, NetworkError, Node, Role, SumNetwork};
use thiserror::Error;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

fn bad(path: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Field { path: path.into(), message: message.into() }
}

/// Serializes a JSON value canonically.
pub fn to_canonical(value: &Value) -> String {
    // serde_json's default map is ordered by key.
    let mut s = value.to_string();
    s.push('\n');
    s
}

struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: String,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, path: &str) -> Result<Self, FormatError> {
        v.as_object().map(|map| Obj { map, path: path.to_string() }).ok_or_else(|| bad(path, "expected an object"))
    }

    fn sub(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn get(&self, key: &str) -> Result<&'a Value, FormatError> {
        self.map.get(key).ok_or_else(|| bad(self.sub(key), "missing field"))
    }

    fn opt(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn str(&self, key: &str) -> Result<&'a str, FormatError> {
        self.get(key)?.as_str().ok_or_else(|| bad(self.sub(key), "expected a string"))
    }

    fn u64(&self, key: &str) -> Result<u64, FormatError> {
        self.get(key)?.as_u64().ok_or_else(|| bad(self.sub(key), "expected a nonnegative integer"))
    }

    fn arr(&self, key: &str) -> Result<&'a Vec<Value>, FormatError> {
        self.get(key)?.as_array().ok_or_else(|| bad(self.sub(key), "expected an array"))
    }

    fn obj(&self, key: &str) -> Result<Obj<'a>, FormatError> {
        Obj::new(self.get(key)?, &self.sub(key))
    }

    fn check_version(&self) -> Result<(), FormatError> {
        match self.u64("version")? {
            FORMAT_VERSION => Ok(()),
            v => Err(bad(self.sub("version"), format!("unsupported version {v}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Networks

pub fn network_to_value(net: &SumNetwork) -> Value {
    let nodes: Vec<Value> = net.nodes().iter().map(|n| json!({"label": n.label, "role": n.role.as_str()})).collect();
    let edges: Vec<Value> = net
        .edges()
        .iter()
        .map(|e| json!({"tail": net.label(e.tail), "head": net.label(e.head), "par": e.par}))
        .collect();
    let in_order: Map<String, Value> = net
        .node_ids()
        .map(|n| (net.label(n).to_string(), json!(net.in_edges(n).iter().map(|e| e.0).collect::<Vec<_>>())))
        .collect();
    let source_order: Vec<&str> = net.source_order().iter().map(|&s| net.label(s)).collect();
    let mut v = json!({
        "version": FORMAT_VERSION,
        "nodes": nodes,
        "edges": edges,
        "in_order": in_order,
        "source_order": source_order,
    });
    if let Some(p) = net.field_hint() {
        v["field_hint"] = json!(p);
    }
    v
}

pub fn write_network(net: &SumNetwork) -> String {
    to_canonical(&network_to_value(net))
}

pub fn read_network(text: &str) -> Result<SumNetwork, FormatError> {
    let value: Value = serde_json::from_str(text)?;
    network_from_value(&value)
}

pub fn network_from_value(value: &Value) -> Result<SumNetwork, FormatError> {
    let root = Obj::new(value, "")?;
    root.check_version()?;

    let mut nodes = Vec::new();
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, v) in root.arr("nodes")?.iter().enumerate() {
        let o = Obj::new(v, &format!("nodes[{i}]"))?;
        let label = o.str("label")?;
        let role = o.str("role")?;
        let role = Role::parse(role).ok_or_else(|| bad(o.sub("role"), format!("unknown role `{role}`")))?;
        if index.insert(label, i).is_some() {
            return Err(bad(o.sub("label"), format!("duplicate label `{label}`")));
        }
        nodes.push(Node { label: label.to_string(), role });
    }
    let lookup = |path: String, label: &str| {
        index
            .get(label)
            .copied()
            .map(sumnet_core::network::NodeId)
            .ok_or_else(|| bad(path, format!("unknown node `{label}`")))
    };

    let mut edges = Vec::new();
    for (i, v) in root.arr("edges")?.iter().enumerate() {
        let o = Obj::new(v, &format!("edges[{i}]"))?;
        let tail = lookup(o.sub("tail"), o.str("tail")?)?;
        let head = lookup(o.sub("head"), o.str("head")?)?;
        let par = u32::try_from(o.u64("par")?).map_err(|_| bad(o.sub("par"), "too large"))?;
        edges.push(Edge { tail, head, par });
    }

    let in_obj = root.obj("in_order")?;
    let mut in_order = vec![Vec::new(); nodes.len()];
    for (label, v) in in_obj.map {
        let path = in_obj.sub(label);
        let node = lookup(path.clone(), label)?;
        let list = v.as_array().ok_or_else(|| bad(path.clone(), "expected an array"))?;
        in_order[node.0] = list
            .iter()
            .enumerate()
            .map(|(j, e)| {
                e.as_u64()
                    .map(|e| EdgeId(e as usize))
                    .ok_or_else(|| bad(format!("{path}[{j}]"), "expected an edge index"))
            })
            .collect::<Result<_, _>>()?;
    }

    let source_order = root
        .arr("source_order")?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let path = format!("source_order[{i}]");
            let label = v.as_str().ok_or_else(|| bad(path.clone(), "expected a string"))?;
            lookup(path, label)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let field_hint = match root.opt("field_hint") {
        None => None,
        Some(v) => {
            Some(v.as_u64().and_then(|p| u32::try_from(p).ok()).ok_or_else(|| bad("field_hint", "expected a prime"))?)
        }
    };
    Ok(SumNetwork::from_parts(nodes, edges, in_order, source_order, field_hint)?)
}

// ---------------------------------------------------------------------------
// Codes

fn mat_value(m: &Mat) -> Value {
    json!(m.entries())
}

pub fn code_to_value(net: &SumNetwork, code: &FracLinCode) -> Value {
    let edge_matrices: Map<String, Value> = net
        .edge_ids()
        .map(|e| {
            let v = match &code.edges[e.0] {
                EdgeCoding::FromSource(a) => mat_value(a),
                EdgeCoding::FromInner(list) => Value::Array(list.iter().map(mat_value).collect()),
            };
            (net.edge_label(e), v)
        })
        .collect();
    let terminal_matrices: Map<String, Value> = net
        .nodes_with_role(Role::Terminal)
        .map(|t| (net.label(t).to_string(), Value::Array(code.decoders[t.0].iter().map(mat_value).collect())))
        .collect();
    json!({
        "version": FORMAT_VERSION,
        "r": code.r,
        "l": code.l,
        "p": code.field.modulus(),
        "edge_matrices": edge_matrices,
        "terminal_matrices": terminal_matrices,
    })
}

pub fn write_code(net: &SumNetwork, code: &FracLinCode) -> String {
    to_canonical(&code_to_value(net, code))
}

pub fn read_code(net: &SumNetwork, text: &str) -> Result<FracLinCode, FormatError> {
    let value: Value = serde_json::from_str(text)?;
    code_from_value(net, &value)
}

fn parse_mat(field: PrimeField, rows: usize, cols: usize, v: &Value, path: &str) -> Result<Mat, FormatError> {
    let arr = v.as_array().ok_or_else(|| bad(path, "expected a flat array of entries"))?;
    if arr.len() != rows * cols {
        return Err(bad(
            path,
            format!("expected {} entries for a {rows}x{cols} matrix, found {}", rows * cols, arr.len()),
        ));
    }
    let data = arr
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_u64()
                .filter(|&x| x < field.modulus() as u64)
                .map(|x| x as u32)
                .ok_or_else(|| bad(format!("{path}[{i}]"), format!("expected a residue below {}", field.modulus())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Mat::from_canonical(field, rows, cols, data).map_err(|e| bad(path, e.to_string()))
}

fn parse_list(
    field: PrimeField,
    rows: usize,
    cols: usize,
    len: usize,
    v: &Value,
    path: &str,
) -> Result<Vec<Mat>, FormatError> {
    let arr = v.as_array().ok_or_else(|| bad(path, "expected a list of matrices"))?;
    if arr.len() != len {
        return Err(bad(path, format!("expected {len} matrices, found {}", arr.len())));
    }
    arr.iter().enumerate().map(|(i, m)| parse_mat(field, rows, cols, m, &format!("{path}[{i}]"))).collect()
}

pub fn code_from_value(net: &SumNetwork, value: &Value) -> Result<FracLinCode, FormatError> {
    let root = Obj::new(value, "")?;
    root.check_version()?;
    let positive = |key: &str| -> Result<usize, FormatError> {
        match root.u64(key)? {
            0 => Err(bad(key, "must be positive")),
            v => Ok(v as usize),
        }
    };
    let (r, l) = (positive("r")?, positive("l")?);
    let field = PrimeField::new(root.u64("p")?).map_err(|e| bad("p", e.to_string()))?;

    let em = root.obj("edge_matrices")?;
    let mut edges = Vec::with_capacity(net.num_edges());
    for e in net.edge_ids() {
        let label = net.edge_label(e);
        let path = em.sub(&label);
        let v = em.map.get(&label).ok_or_else(|| bad(path.clone(), "missing edge"))?;
        let tail = net.edge(e).tail;
        edges.push(if net.role(tail) == Role::Source {
            EdgeCoding::FromSource(parse_mat(field, l, r, v, &path)?)
        } else {
            EdgeCoding::FromInner(parse_list(field, l, l, net.in_edges(tail).len(), v, &path)?)
        });
    }
    if em.map.len() != net.num_edges() {
        let extra = em.map.keys().find(|k| net.edge_by_label(k).is_none()).cloned().unwrap_or_default();
        return Err(bad(em.sub(&extra), "edge not in the network"));
    }

    let tm = root.obj("terminal_matrices")?;
    let mut decoders = vec![Vec::new(); net.num_nodes()];
    let mut seen = 0;
    for t in net.nodes_with_role(Role::Terminal) {
        let label = net.label(t);
        let path = tm.sub(label);
        let v = tm.map.get(label).ok_or_else(|| bad(path.clone(), "missing terminal"))?;
        decoders[t.0] = parse_list(field, r, l, net.in_edges(t).len(), v, &path)?;
        seen += 1;
    }
    if tm.map.len() != seen {
        return Err(bad("terminal_matrices", "lists nodes that are not terminals"));
    }
    Ok(FracLinCode { field, r, l, edges, decoders })
}

// ---------------------------------------------------------------------------
// Network manifests

pub fn manifest_to_value(m: &NetManifest) -> Value {
    json!({
        "family": m.family,
        "m": m.m,
        "q": m.q,
        "k": m.k,
        "capacity_num": m.capacity.numer(),
        "capacity_den": m.capacity.denom(),
        "primes": m.primes,
        "mode": m.mode.map(PrimeSetMode::as_str),
    })
}

pub fn write_manifest(m: &NetManifest) -> String {
    to_canonical(&manifest_to_value(m))
}

pub fn read_manifest(text: &str) -> Result<NetManifest, FormatError> {
    let value: Value = serde_json::from_str(text)?;
    let root = Obj::new(&value, "")?;
    let opt_u64 = |key: &str| -> Result<Option<u64>, FormatError> {
        root.opt(key).map(|v| v.as_u64().ok_or_else(|| bad(key, "expected a nonnegative integer"))).transpose()
    };
    let den = root.u64("capacity_den")?;
    if den == 0 {
        return Err(bad("capacity_den", "must be positive"));
    }
    let primes = root
        .arr("primes")?
        .iter()
        .enumerate()
        .map(|(i, v)| v.as_u64().ok_or_else(|| bad(format!("primes[{i}]"), "expected an integer")))
        .collect::<Result<Vec<_>, _>>()?;
    let mode = match root.opt("mode") {
        None => None,
        Some(v) => {
            let s = v.as_str().ok_or_else(|| bad("mode", "expected a string"))?;
            Some(PrimeSetMode::parse(s).ok_or_else(|| bad("mode", format!("unknown mode `{s}`")))?)
        }
    };
    Ok(NetManifest {
        family: root.str("family")?.to_string(),
        m: opt_u64("m")?.map(|m| m as usize),
        q: opt_u64("q")?,
        k: root.u64("k")? as usize,
        capacity: Ratio::new(root.u64("capacity_num")?, den),
        primes,
        mode,
    })
}
