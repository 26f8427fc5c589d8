//! Brute-force cross-checks of search and decoder synthesis on the two-source
//! bottleneck, written with plain integer arithmetic.

use std::collections::BTreeSet;

use proptest::prelude::*;
use sumnet_core::analysis::{feasible_decoders, search, CompositeEncoding, Feasibility, Strategy, DEFAULT_BUDGET};
use sumnet_core::coding::verify;
use sumnet_core::constructions::build_bottleneck2;
use sumnet_core::galois::PrimeField;
use sumnet_core::matrix::Mat;

/// Composites `(a*c1, b*c2)` for which some choice of every remaining scalar
/// (forwarding coefficients and decoders) makes both terminals output x1 + x2.
fn scalar_oracle(p: u64) -> BTreeSet<(u64, u64)> {
    let mut found = BTreeSet::new();
    let range = 0..p;
    for a in range.clone() {
        for b in range.clone() {
            for c1 in range.clone() {
                for c2 in range.clone() {
                    let (ya, yb) = (a * c1 % p, b * c2 % p);
                    // Each terminal picks its own forwarding scalar e and decoder d.
                    let terminal =
                        || range.clone().any(|e| range.clone().any(|d| (d * e * ya) % p == 1 && (d * e * yb) % p == 1));
                    let (t1, t2) = (terminal(), terminal());
                    if t1 && t2 {
                        found.insert((ya, yb));
                    }
                }
            }
        }
    }
    found
}

fn search_composites(p: u64) -> BTreeSet<(u64, u64)> {
    let net = build_bottleneck2();
    let out = search(&net, 1, 1, p, Strategy::Exhaustive { budget: DEFAULT_BUDGET }, &[]).unwrap();
    assert_eq!(out.examined, p * p);
    out.solutions
        .iter()
        .map(|s| {
            assert!(verify(&net, &s.code).unwrap().pass);
            let m = &s.composites.maps[0];
            (m.entry(0, 0) as u64, m.entry(0, 1) as u64)
        })
        .collect()
}

#[test]
fn exhaustive_search_matches_scalar_oracle_gf2() {
    let oracle = scalar_oracle(2);
    assert_eq!(oracle.len(), 1);
    assert_eq!(search_composites(2), oracle);
}

#[test]
fn exhaustive_search_matches_scalar_oracle_gf3() {
    let oracle = scalar_oracle(3);
    assert_eq!(oracle, BTreeSet::from([(1, 1), (2, 2)]));
    assert_eq!(search_composites(3), oracle);
}

/// For `(r, l) = (1, 2)`: a `2 x 2` composite admits a decoder iff some
/// `d in GF(p)^2` has `d * C = [1 1]`.
fn vector_oracle(p: u64, c: [u64; 4]) -> bool {
    (0..p).any(|d0| (0..p).any(|d1| (d0 * c[0] + d1 * c[2]) % p == 1 && (d0 * c[1] + d1 * c[3]) % p == 1))
}

#[test]
fn exhaustive_search_matches_vector_oracle() {
    let net = build_bottleneck2();
    for p in [2u64, 3] {
        let mut expected = 0;
        for idx in 0..p.pow(4) {
            let c = [idx % p, idx / p % p, idx / (p * p) % p, idx / (p * p * p)];
            expected += vector_oracle(p, c) as usize;
        }
        let out = search(&net, 1, 2, p, Strategy::Exhaustive { budget: DEFAULT_BUDGET }, &[]).unwrap();
        assert_eq!(out.solutions.len(), expected, "p = {p}");
    }
}

proptest! {
    #[test]
    fn synthesized_decoders_always_verify(entries in proptest::collection::vec(0u32..5, 4), p in prop::sample::select(vec![2u64, 3, 5])) {
        let f = PrimeField::new(p).unwrap();
        let data: Vec<u32> = entries.iter().map(|&v| v % p as u32).collect();
        let comp = CompositeEncoding { field: f, r: 1, l: 2, maps: vec![Mat::from_canonical(f, 2, 2, data.clone()).unwrap()] };
        let net = build_bottleneck2();
        let c = [data[0] as u64, data[1] as u64, data[2] as u64, data[3] as u64];
        match feasible_decoders(&net, &comp).unwrap() {
            Feasibility::Feasible(code) => {
                prop_assert!(vector_oracle(p, c));
                prop_assert!(verify(&net, &code).unwrap().pass);
            }
            Feasibility::Infeasible { terminal } => {
                prop_assert!(!vector_oracle(p, c));
                prop_assert_eq!(terminal, "t_1");
            }
        }
    }
}
