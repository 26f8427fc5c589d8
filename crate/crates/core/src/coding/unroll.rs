use alloc::format;
use alloc::vec::Vec;

use super::{verify, CodeError, EdgeCoding, FracLinCode};
use crate::constructions::CopyMap;
use crate::matrix::Mat;
use crate::network::SumNetwork;

/// Turns a verified `(r, l)` code on a k-copy merge into an `(r, k*l)` code on
/// the base network by running the k copies in k successive uses of each edge.
///
/// Base edge messages are the vertical stack of their k images, inner
/// encodings become block diagonal over copies, and decoders are concatenated
/// horizontally over copies.
pub fn unroll_lemma1(
    base: &SumNetwork,
    merged: &SumNetwork,
    map: &CopyMap,
    code: &FracLinCode,
) -> Result<FracLinCode, CodeError> {
    let report = verify(merged, code)?;
    if !report.pass {
        return Err(CodeError::Refused(format!(
            "input code does not verify (first failure at `{}`)",
            report.first_failure.unwrap_or_default()
        )));
    }
    let (f, r, l, k) = (code.field, code.r, code.l, map.copies());
    let images = |e| (0..k).map(move |c| map.edge_image(e, c));

    let mut edges = Vec::with_capacity(base.num_edges());
    for e in base.edge_ids() {
        let first = map.edge_image(e, 0);
        let coding = match &code.edges[first.0] {
            EdgeCoding::FromSource(_) => {
                let mut tall = Mat::zeros(f, k * l, r);
                for (c, img) in images(e).enumerate() {
                    let EdgeCoding::FromSource(a) = &code.edges[img.0] else {
                        return Err(CodeError::Shape(format!("copies of {} disagree", base.edge_label(e))));
                    };
                    tall.set_block(c * l, 0, a);
                }
                EdgeCoding::FromSource(tall)
            }
            EdgeCoding::FromInner(_) => {
                let degree = base.in_edges(base.edge(e).tail).len();
                let mut list = Vec::with_capacity(degree);
                for i in 0..degree {
                    let mut diag = Mat::zeros(f, k * l, k * l);
                    for (c, img) in images(e).enumerate() {
                        let EdgeCoding::FromInner(inner) = &code.edges[img.0] else {
                            return Err(CodeError::Shape(format!("copies of {} disagree", base.edge_label(e))));
                        };
                        diag.set_block(c * l, c * l, &inner[i]);
                    }
                    list.push(diag);
                }
                EdgeCoding::FromInner(list)
            }
        };
        edges.push(coding);
    }

    let mut decoders = Vec::with_capacity(base.num_nodes());
    for n in base.node_ids() {
        let merged_node = map.node_image(n, 0);
        let list = &code.decoders[merged_node.0];
        if list.is_empty() {
            decoders.push(Vec::new());
            continue;
        }
        let mut out = Vec::with_capacity(base.in_edges(n).len());
        for &e in base.in_edges(n) {
            let mut wide = Mat::zeros(f, r, k * l);
            for (c, img) in images(e).enumerate() {
                wide.set_block(0, c * l, &list[merged.in_position(img)]);
            }
            out.push(wide);
        }
        decoders.push(out);
    }
    Ok(FracLinCode { field: f, r, l: k * l, edges, decoders })
}
