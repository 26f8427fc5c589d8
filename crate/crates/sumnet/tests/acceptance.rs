//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Everything checked here is recomputed from scratch with plain
//! integer or rational arithmetic where an independent check is possible.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use sumnet::format::{read_code, read_network, write_code, write_network};
use sumnet_core::analysis::{
    applicable_mode, bound_check, capacity, search, wrong_char_bound, BoundContext, BoundMode, BoundStatus, Strategy,
    DEFAULT_BUDGET,
};
use sumnet_core::coding::{
    routing_code, scheme_for_instance, scheme_merged, scheme_n1, scheme_n2, unroll_lemma1, verify, CodeError,
    FracLinCode,
};
use sumnet_core::constructions::{
    build_bottleneck2, build_for_rate, build_n1, build_n2, Family, FamilyInstance, NetParams, PrimeSetMode, RateTarget,
};
use sumnet_core::network::{Role, SumNetwork};

const MS: [usize; 3] = [1, 2, 3];
const QS: [u64; 3] = [2, 3, 6];
const PS: [u64; 3] = [2, 3, 5];
const SEARCH_SEED: u64 = 20_240_601;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn passes(net: &SumNetwork, code: &FracLinCode) -> bool {
    verify(net, code).map(|r| r.pass).unwrap_or(false)
}

// ---------------------------------------------------------------------------
// Characteristic grids

fn grid(family: Family) -> Outcome {
    let mut cells = 0;
    let mut wrong = Vec::new();
    for m in MS {
        for q in QS {
            let params = NetParams::new(m, q).unwrap();
            let net = match family {
                Family::N1 => build_n1(params),
                Family::N2 => build_n2(params),
            }
            .unwrap();
            for p in PS {
                cells += 1;
                let built = match family {
                    Family::N1 => scheme_n1(params, p),
                    Family::N2 => scheme_n2(params, p),
                };
                let got = match built {
                    Ok(code) => passes(&net, &code),
                    Err(CodeError::Refused(_)) => false,
                    Err(e) => {
                        wrong.push(format!("m={m} q={q} p={p}: {e}"));
                        continue;
                    }
                };
                let want = match family {
                    Family::N1 => q % p == 0,
                    Family::N2 => q % p != 0,
                };
                if got != want {
                    wrong.push(format!("m={m} q={q} p={p}: got {got}, want {want}"));
                }
            }
        }
    }
    outcome(
        cells == 27 && wrong.is_empty(),
        format!("{} of {cells} cells match {}", cells - wrong.len(), wrong.join("; ")),
    )
}

// ---------------------------------------------------------------------------
// Rate 3/5 over {2}, unrolling, and the codes produced on the way

struct RateRun {
    inst: FamilyInstance,
    merged: Option<FracLinCode>,
    unrolled: Option<FracLinCode>,
}

fn rate_three_fifths() -> (Outcome, RateRun) {
    let target = RateTarget { k: 3, n: 5, primes: vec![2], mode: PrimeSetMode::InSet };
    let (inst, man) = build_for_rate(&target).unwrap();
    let mut notes = Vec::new();
    let shape_ok = inst.family == Family::N1 && inst.params.m == 9 && inst.params.q == 2 && inst.k == 3;
    let cap_ok = man.capacity == Ratio::new(3, 5);
    notes.push(format!("{} m={} q={} k={}", inst.family, inst.params.m, inst.params.q, inst.k));

    let merged = scheme_merged(inst.family, inst.params, 2, inst.k).ok();
    let merged_ok = merged.as_ref().is_some_and(|c| (c.r, c.l) == (6, 10) && passes(&inst.network, c));
    notes.push(format!("GF(2) (6,10) verified: {merged_ok}"));

    let refused = matches!(scheme_merged(inst.family, inst.params, 3, inst.k), Err(CodeError::Refused(_)));
    notes.push(format!("GF(3) refused: {refused}"));

    let found = search(&inst.network, 6, 10, 3, Strategy::Random { samples: 1000, seed: SEARCH_SEED }, &[])
        .map(|o| (o.examined, o.solutions.len()));
    let search_ok = found == Ok((1000, 0));
    notes.push(format!("GF(3) random search (seed {SEARCH_SEED}): {found:?}"));

    let ok = shape_ok && cap_ok && merged_ok && refused && search_ok;
    (outcome(ok, notes.join(", ")), RateRun { inst, merged, unrolled: None })
}

fn lemma_unroll(run: &mut RateRun) -> Outcome {
    let Some(code) = &run.merged else {
        return outcome(false, "no merged code to unroll");
    };
    match unroll_lemma1(&run.inst.base, &run.inst.network, &run.inst.map, code) {
        Ok(u) => {
            let ok = (u.r, u.l) == (6, 30)
                && passes(&run.inst.base, &u)
                && run.inst.base == build_n1(NetParams::new(9, 2).unwrap()).unwrap();
            let detail = format!("({}, {}) code on N1(9,2), verified: {ok}", u.r, u.l);
            run.unrolled = Some(u);
            outcome(ok, detail)
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

// ---------------------------------------------------------------------------
// Bound certificates

/// `2k/(m+1)` and `2k/(m+1+2/(q+1))`, computed directly.
fn expected_closed_form(mode: BoundMode, m: usize, q: u64, k: usize) -> Ratio<u64> {
    let two_k = Ratio::from_integer(2 * k as u64);
    let denom = Ratio::from_integer(m as u64 + 1);
    match mode {
        BoundMode::N1Claim1 | BoundMode::N2Claim3 => two_k / denom,
        BoundMode::N1Claim2 | BoundMode::N2Claim4 => two_k / (denom + Ratio::new(2, q + 1)),
    }
}

fn certify(net: &SumNetwork, code: &FracLinCode, ctx: BoundContext, failures: &mut Vec<String>, tag: String) {
    let (m, q) = (ctx.params.m, ctx.params.q);
    let mode = applicable_mode(ctx.family, q, code.field.modulus() as u64);
    match bound_check(net, code, ctx, mode) {
        Ok(rep) => {
            let ok = rep.status == BoundStatus::Certified
                && rep.stacked_rank == code.r * rep.sources
                && code.rate() <= rep.implied_bound
                && rep.implied_bound == rep.closed_form
                && rep.closed_form == expected_closed_form(mode, m, q, ctx.k);
            if !ok {
                failures.push(format!("{tag} {mode}: {rep:?}"));
            }
        }
        Err(e) => failures.push(format!("{tag} {mode}: {e}")),
    }
}

fn bound_certificates(run: &RateRun) -> Outcome {
    let mut failures = Vec::new();
    let mut count = 0;
    for family in [Family::N1, Family::N2] {
        for m in MS {
            for q in QS {
                let params = NetParams::new(m, q).unwrap();
                for k in [1, 2] {
                    let inst = FamilyInstance::new(family, params, k).unwrap();
                    for p in PS {
                        let mut codes = Vec::new();
                        if k == 1 {
                            codes.push(("routing", routing_code(&inst.network, p).unwrap()));
                        }
                        if let Ok(code) = scheme_for_instance(&inst, p) {
                            codes.push(("scheme", code));
                        }
                        for (kind, code) in codes {
                            if passes(&inst.network, &code) {
                                count += 1;
                                certify(
                                    &inst.network,
                                    &code,
                                    BoundContext::of(&inst),
                                    &mut failures,
                                    format!("{family} m={m} q={q} k={k} p={p} {kind}"),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    let ctx = BoundContext::of(&run.inst);
    if let Some(code) = &run.merged {
        count += 1;
        certify(&run.inst.network, code, ctx, &mut failures, "rate 3/5 merged".into());
    }
    if let Some(code) = &run.unrolled {
        count += 1;
        certify(&run.inst.base, code, ctx.base(), &mut failures, "rate 3/5 unrolled".into());
    }
    let chain = wrong_char_bound(2, 2) == Ratio::new(6, 11) && capacity(2, 1) == Ratio::new(2, 3);
    if !chain {
        failures.push("wrong_char_bound(2,2) != 6/11".into());
    }
    outcome(
        failures.is_empty(),
        format!("{count} verified codes certified, 6/11 chain: {chain} {}", failures.join("; ")),
    )
}

// ---------------------------------------------------------------------------
// Bottleneck oracle

/// Distinct middle-edge composites `(c1*a, c2*b)` realized by some full
/// assignment of encoders `a, b, c1, c2, e1, e2` and decoders `d1, d2` under
/// which both terminals output `x1 + x2`.
fn brute_force_bottleneck(p: u64) -> usize {
    let mut seen = BTreeSet::new();
    for a in 0..p {
        for b in 0..p {
            for c1 in 0..p {
                for c2 in 0..p {
                    let (y1, y2) = (c1 * a % p, c2 * b % p);
                    for e1 in 0..p {
                        for e2 in 0..p {
                            for d1 in 0..p {
                                for d2 in 0..p {
                                    let t1 = (d1 * e1 * y1 % p, d1 * e1 * y2 % p) == (1, 1);
                                    let t2 = (d2 * e2 * y1 % p, d2 * e2 * y2 % p) == (1, 1);
                                    if t1 && t2 {
                                        seen.insert((y1, y2));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    seen.len()
}

fn oracle_equivalence() -> Outcome {
    let net = build_bottleneck2();
    let mut notes = Vec::new();
    let mut ok = true;
    for (p, want) in [(2, 1), (3, 2)] {
        let oracle = brute_force_bottleneck(p);
        let found = search(&net, 1, 1, p, Strategy::Exhaustive { budget: DEFAULT_BUDGET }, &[])
            .map(|o| o.solutions.iter().filter(|s| passes(&net, &s.code)).count());
        ok &= oracle == want && found == Ok(want);
        notes.push(format!("GF({p}): search {found:?}, oracle {oracle}"));
    }
    outcome(ok, notes.join(", "))
}

// ---------------------------------------------------------------------------
// Strictness

fn strictness() -> Outcome {
    let mut bad = Vec::new();
    for m in 1..=10usize {
        for q in 2..=30u64 {
            let direct = Ratio::from_integer(2u64) / (Ratio::from_integer(m as u64 + 1) + Ratio::new(2, q + 1));
            if wrong_char_bound(m, q) != direct || wrong_char_bound(m, q) >= capacity(m, 1) {
                bad.push(format!("m={m} q={q}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("290 pairs, {} violations {}", bad.len(), bad.join(" ")))
}

// ---------------------------------------------------------------------------
// Structure

type EdgeList = Vec<(String, String)>;

fn pairs(m: usize) -> Vec<(usize, usize)> {
    (1..=m).flat_map(|i| (i + 1..=m).map(move |x| (i, x))).collect()
}

fn add_direct(edges: &mut EdgeList, sources: &[String], term: String, blocked: &BTreeSet<String>) {
    for s in sources.iter().filter(|s| !blocked.contains(*s)) {
        edges.push((s.clone(), term.clone()));
    }
}

/// Edge list of N1 written out from its definition.
fn n1_edges(m: usize, q: u64) -> (Vec<String>, Vec<String>, EdgeList) {
    let g = q as usize + 1;
    let mut sources: Vec<String> = (1..=m).map(|i| format!("s_{i}")).collect();
    sources.extend((1..=m).flat_map(|i| (1..=g).map(move |j| format!("s_{i}_{j}"))));
    sources.extend(pairs(m).into_iter().flat_map(|(i, x)| (1..=g).map(move |j| format!("s_{i}_{x}_{j}"))));
    let tail_set = |i: usize, j: usize| -> BTreeSet<String> {
        let mut s = BTreeSet::from([format!("s_{i}"), format!("s_{i}_{j}")]);
        s.extend((1..i).map(|x| format!("s_{x}_{i}_{j}")));
        s.extend((i + 1..=m).map(|x| format!("s_{i}_{x}_{j}")));
        s
    };
    let mut terminals = Vec::new();
    let mut e = Vec::new();
    for i in 1..=m {
        for j in 1..=g {
            e.push((format!("u_{i}_{j}"), format!("v_{i}_{j}")));
            e.push((format!("s_{i}"), format!("u_{i}_{j}")));
            e.push((format!("s_{i}_{j}"), format!("u_{i}_{j}")));
            e.push((format!("v_{i}_{j}"), format!("t_{i}")));
            e.push((format!("v_{i}_{j}"), format!("t_{i}_{j}")));
        }
    }
    for (i, x) in pairs(m) {
        for j in 1..=g {
            e.push((format!("s_{i}_{x}_{j}"), format!("u_{i}_{j}")));
            e.push((format!("s_{i}_{x}_{j}"), format!("u_{x}_{j}")));
            e.push((format!("v_{i}_{j}"), format!("t_{i}_{x}_{j}")));
            e.push((format!("v_{x}_{j}"), format!("t_{i}_{x}_{j}")));
        }
    }
    for i in 1..=m {
        let all: BTreeSet<String> = (1..=g).flat_map(|j| tail_set(i, j)).collect();
        terminals.push(format!("t_{i}"));
        add_direct(&mut e, &sources, format!("t_{i}"), &all);
        for j in 1..=g {
            terminals.push(format!("t_{i}_{j}"));
            add_direct(&mut e, &sources, format!("t_{i}_{j}"), &tail_set(i, j));
        }
    }
    for (i, x) in pairs(m) {
        for j in 1..=g {
            let blocked: BTreeSet<String> = tail_set(i, j).union(&tail_set(x, j)).cloned().collect();
            terminals.push(format!("t_{i}_{x}_{j}"));
            add_direct(&mut e, &sources, format!("t_{i}_{x}_{j}"), &blocked);
        }
    }
    (sources, terminals, e)
}

/// Edge list of N2 written out from its definition.
fn n2_edges(m: usize, q: u64) -> (Vec<String>, Vec<String>, EdgeList) {
    let g = q as usize + 1;
    let mut sources: Vec<String> = (1..=m).flat_map(|i| (1..=g).map(move |j| format!("s_{i}_{j}"))).collect();
    sources.extend(pairs(m).into_iter().flat_map(|(i, x)| (1..=g).map(move |j| format!("s_{i}_{x}_{j}"))));
    let tail_set = |i: usize, j: usize| -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        for y in (1..=g).filter(|&y| y != j) {
            s.insert(format!("s_{i}_{y}"));
            s.extend((1..i).map(|x| format!("s_{x}_{i}_{y}")));
            s.extend((i + 1..=m).map(|x| format!("s_{i}_{x}_{y}")));
        }
        s
    };
    let row = |i: usize| -> BTreeSet<String> { (1..=g).flat_map(|j| tail_set(i, j)).collect() };
    let mut terminals = Vec::new();
    let mut e = Vec::new();
    for i in 1..=m {
        for j in 1..=g {
            e.push((format!("u_{i}_{j}"), format!("v_{i}_{j}")));
            for y in (1..=g).filter(|&y| y != j) {
                e.push((format!("s_{i}_{j}"), format!("u_{i}_{y}")));
            }
            e.push((format!("v_{i}_{j}"), format!("t_{i}")));
            e.push((format!("v_{i}_{j}"), format!("t_{i}_{j}")));
        }
    }
    for (i, x) in pairs(m) {
        for j in 1..=g {
            for y in (1..=g).filter(|&y| y != j) {
                e.push((format!("s_{i}_{x}_{j}"), format!("u_{i}_{y}")));
                e.push((format!("s_{i}_{x}_{j}"), format!("u_{x}_{y}")));
            }
            e.push((format!("v_{i}_{j}"), format!("t_{i}_{x}_{j}")));
            e.push((format!("v_{x}_{j}"), format!("t_{i}_{x}_{j}")));
            e.push((format!("v_{i}_{j}"), format!("tp_{i}_{x}")));
            e.push((format!("v_{x}_{j}"), format!("tp_{i}_{x}")));
        }
    }
    for i in 1..=m {
        terminals.push(format!("t_{i}"));
        add_direct(&mut e, &sources, format!("t_{i}"), &row(i));
        for j in 1..=g {
            terminals.push(format!("t_{i}_{j}"));
            add_direct(&mut e, &sources, format!("t_{i}_{j}"), &tail_set(i, j));
        }
    }
    for (i, x) in pairs(m) {
        for j in 1..=g {
            let blocked: BTreeSet<String> = tail_set(i, j).union(&tail_set(x, j)).cloned().collect();
            terminals.push(format!("t_{i}_{x}_{j}"));
            add_direct(&mut e, &sources, format!("t_{i}_{x}_{j}"), &blocked);
        }
        terminals.push(format!("tp_{i}_{x}"));
        let blocked: BTreeSet<String> = row(i).union(&row(x)).cloned().collect();
        add_direct(&mut e, &sources, format!("tp_{i}_{x}"), &blocked);
    }
    (sources, terminals, e)
}

fn role_labels(net: &SumNetwork, role: Role) -> BTreeSet<String> {
    net.nodes_with_role(role).map(|n| net.label(n).to_string()).collect()
}

fn structure() -> Outcome {
    let mut bad = Vec::new();
    let mut cells = 0;
    for m in MS {
        for q in QS {
            let params = NetParams::new(m, q).unwrap();
            let (g, b) = (q as usize + 1, m * (m - 1) / 2);
            for family in [Family::N1, Family::N2] {
                cells += 1;
                let tag = format!("{family} m={m} q={q}");
                let net = match family {
                    Family::N1 => build_n1(params),
                    Family::N2 => build_n2(params),
                }
                .unwrap();
                let (want_s, want_t) = match family {
                    Family::N1 => (m + m * g + b * g, m + m * g + b * g),
                    Family::N2 => (m * g + b * g, m + m * g + b * g + b),
                };
                let (sources, terminals, edges) = match family {
                    Family::N1 => n1_edges(m, q),
                    Family::N2 => n2_edges(m, q),
                };
                let middle = net.edge_ids().filter(|&e| net.is_middle_edge(e)).count();
                let counts_ok = role_labels(&net, Role::Source).len() == want_s
                    && role_labels(&net, Role::Terminal).len() == want_t
                    && role_labels(&net, Role::Intermediate).len() == 2 * m * g
                    && middle == m * g
                    && sources.len() == want_s
                    && terminals.len() == want_t;
                if !counts_ok {
                    bad.push(format!("{tag}: node counts"));
                }
                if role_labels(&net, Role::Source) != sources.into_iter().collect()
                    || role_labels(&net, Role::Terminal) != terminals.into_iter().collect()
                {
                    bad.push(format!("{tag}: node labels"));
                }
                let mut got: Vec<(String, String)> = net
                    .edges()
                    .iter()
                    .map(|e| (net.label(e.tail).to_string(), net.label(e.head).to_string()))
                    .collect();
                let mut want = edges;
                got.sort();
                want.sort();
                if got != want {
                    bad.push(format!("{tag}: edge list ({} built, {} expected)", got.len(), want.len()));
                }
                if !net.validate().is_empty() {
                    bad.push(format!("{tag}: validation"));
                }

                let text = write_network(&net);
                let back = read_network(&text);
                if back.as_ref().map(write_network).ok().as_deref() != Some(text.as_str()) {
                    bad.push(format!("{tag}: network round trip"));
                }
                for p in PS {
                    let code = routing_code(&net, p).unwrap();
                    let ct = write_code(&net, &code);
                    if read_code(&net, &ct).map(|c| write_code(&net, &c)).ok().as_deref() != Some(ct.as_str()) {
                        bad.push(format!("{tag} p={p}: code round trip"));
                    }
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{cells} networks, {} mismatches {}", bad.len(), bad.join("; ")))
}

// ---------------------------------------------------------------------------

fn report(name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed < l);
    let ok = out.ok && in_time;
    let limit_note = limit.map(|l| format!(" (limit {:.0} s)", l.as_secs_f64())).unwrap_or_default();
    println!(
        "{} {name}: {} [{:.2} s{limit_note}]",
        if ok { "PASS" } else { "FAIL" },
        out.detail.trim_end(),
        elapsed.as_secs_f64()
    );
    ok
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let mut all = true;
    all &= report("characteristic grid N1", secs(10), || grid(Family::N1));
    all &= report("characteristic grid N2", secs(10), || grid(Family::N2));

    let mut run = None;
    all &= report("rate 3/5 over {2}", secs(60), || {
        let (out, r) = rate_three_fifths();
        run = Some(r);
        out
    });
    let mut run = run.expect("rate run recorded");
    all &= report("unrolled merged code", None, || lemma_unroll(&mut run));
    all &= report("bound certificates", None, || bound_certificates(&run));
    all &= report("bottleneck oracle equivalence", Some(Duration::from_secs(1)), oracle_equivalence);
    all &= report("wrong-characteristic bound is strict", None, strictness);
    all &= report("structural counts and round trips", None, structure);

    if all {
        println!("all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("some criteria FAILED");
        ExitCode::FAILURE
    }
}
