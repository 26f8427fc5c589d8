//! Human-readable and JSON renderings of verification, bound and search
//! results.

use std::fmt::Write as _;

use num_rational::Ratio;
use serde_json::{json, Map, Value};
use sumnet_core::analysis::{BoundReport, Candidate, SearchOutcome};
use sumnet_core::coding::VerifyReport;
use sumnet_core::network::SumNetwork;

use crate::format::{code_to_value, to_canonical, FORMAT_VERSION};

pub fn ratio(r: Ratio<u64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn verify_text(rep: &VerifyReport) -> String {
    let mut s = String::new();
    match &rep.first_failure {
        None => s.push_str("PASS: every terminal recovers the sum of all sources\n"),
        Some(t) => {
            let _ = writeln!(s, "FAIL: terminal {t} does not recover the sum");
            for (term, blocks) in &rep.residuals {
                let sources: Vec<&str> = blocks.keys().map(String::as_str).collect();
                let _ = writeln!(s, "  {term}: wrong coefficient for {}", sources.join(", "));
            }
        }
    }
    s
}

pub fn verify_json(rep: &VerifyReport) -> Value {
    let residuals: Map<String, Value> = rep
        .residuals
        .iter()
        .map(|(t, blocks)| {
            let b: Map<String, Value> = blocks.iter().map(|(s, m)| (s.clone(), json!(m.entries()))).collect();
            (t.clone(), Value::Object(b))
        })
        .collect();
    json!({"pass": rep.pass, "first_failure": rep.first_failure, "residuals": residuals})
}

pub fn bound_text(rep: &BoundReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "certificate ({}): {}", rep.mode, rep.status.as_str());
    let _ = writeln!(
        s,
        "  stacked rank {} of required {} over {} middle edges, {} sources, {} selector rows",
        rep.stacked_rank, rep.required_rank, rep.middle_edges, rep.sources, rep.selector_rows
    );
    if let Some(d) = &rep.split {
        let _ = writeln!(
            s,
            "  split ranks a={} b={} c={} (c in a: {}, c in b: {})",
            d.rank_a, d.rank_b, d.rank_c, d.c_in_a, d.c_in_b
        );
    }
    let _ = writeln!(
        s,
        "  rate {} <= implied {} (closed form {}): {}",
        ratio(rep.rate),
        ratio(rep.implied_bound),
        ratio(rep.closed_form),
        if rep.rate_ok { "ok" } else { "violated" }
    );
    s
}

pub fn bound_json(rep: &BoundReport) -> Value {
    let split = rep.split.as_ref().map(
        |d| json!({"rank_a": d.rank_a, "rank_b": d.rank_b, "rank_c": d.rank_c, "c_in_a": d.c_in_a, "c_in_b": d.c_in_b}),
    );
    json!({
        "mode": rep.mode.as_str(),
        "status": rep.status.as_str(),
        "stacked_rank": rep.stacked_rank,
        "required_rank": rep.required_rank,
        "middle_edges": rep.middle_edges,
        "sources": rep.sources,
        "selector_rows": rep.selector_rows,
        "implied_bound": ratio(rep.implied_bound),
        "closed_form": ratio(rep.closed_form),
        "rate": ratio(rep.rate),
        "rate_ok": rep.rate_ok,
        "split": split,
    })
}

pub fn candidate_value(c: Candidate) -> Value {
    match c {
        Candidate::Seeded(i) => json!({"seeded": i}),
        Candidate::Index(i) => json!({"index": i}),
    }
}

/// Search results file: every solution with its full code.
pub fn search_file(net: &SumNetwork, out: &SearchOutcome) -> String {
    let solutions: Vec<Value> = out
        .solutions
        .iter()
        .map(|s| json!({"candidate": candidate_value(s.candidate), "code": code_to_value(net, &s.code)}))
        .collect();
    to_canonical(&json!({
        "version": FORMAT_VERSION,
        "examined": out.examined,
        "found": out.solutions.len(),
        "solutions": solutions,
    }))
}
