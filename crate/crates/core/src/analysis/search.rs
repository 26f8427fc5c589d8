use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::composite::{feasible_with_view, solve_terminal};
use super::{AnalysisError, CompositeEncoding, Feasibility};
use crate::coding::{assemble, FracLinCode};
use crate::galois::PrimeField;
use crate::matrix::Mat;
use crate::network::{SumNetwork, ThreeLayerView};

/// Largest exhaustive search space accepted by default.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Every composite encoding, provided there are at most `budget` of them.
    Exhaustive { budget: u64 },
    /// `samples` encodings with entries uniform over the field.
    Random { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Candidate {
    /// Index into the caller-supplied seed encodings.
    Seeded(usize),
    /// Mixed-radix index (exhaustive) or sample index (random).
    Index(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub candidate: Candidate,
    pub composites: CompositeEncoding,
    pub code: FracLinCode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub examined: u64,
    /// In candidate order.
    pub solutions: Vec<Solution>,
}

/// Looks for `(r, l)` solutions over GF(p) by enumerating or sampling
/// middle-edge composites and synthesizing decoders for each.
///
/// `seeds` are examined first. Random sample `i` draws from its own ChaCha
/// stream, with each middle edge at a fixed offset inside that stream, so the
/// result depends only on `(seed, i)` and not on evaluation order.
pub fn search(
    net: &SumNetwork,
    r: usize,
    l: usize,
    p: u64,
    strategy: Strategy,
    seeds: &[CompositeEncoding],
) -> Result<SearchOutcome, AnalysisError> {
    let field = PrimeField::new(p)?;
    let view = ThreeLayerView::new(net)?;
    let sizes: Vec<usize> = view.middle_edges().iter().map(|me| l * r * me.sources.len()).collect();
    let mut out = SearchOutcome { examined: 0, solutions: Vec::new() };

    for (i, seed) in seeds.iter().enumerate() {
        out.examined += 1;
        if let Feasibility::Feasible(code) = feasible_with_view(net, &view, seed)? {
            out.solutions.push(Solution { candidate: Candidate::Seeded(i), composites: seed.clone(), code });
        }
    }

    match strategy {
        Strategy::Exhaustive { budget } => {
            let total: usize = sizes.iter().sum();
            let space = u32::try_from(total)
                .ok()
                .and_then(|t| (p as u128).checked_pow(t))
                .filter(|&s| s <= budget as u128)
                .ok_or_else(|| AnalysisError::BudgetExceeded {
                    space: if total == 0 { "1".into() } else { alloc::format!("{p}^{total}") },
                    budget,
                })?;
            let mut digits = alloc::vec![0u32; total];
            for idx in 0..space as u64 {
                let mut rest = idx;
                for d in digits.iter_mut() {
                    *d = (rest % p) as u32;
                    rest /= p;
                }
                let mut offset = 0;
                let maps = view
                    .middle_edges()
                    .iter()
                    .zip(&sizes)
                    .map(|(me, &n)| {
                        let m =
                            Mat::from_canonical(field, l, r * me.sources.len(), digits[offset..offset + n].to_vec());
                        offset += n;
                        m
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let comp = CompositeEncoding { field, r, l, maps };
                out.examined += 1;
                if let Feasibility::Feasible(code) = feasible_with_view(net, &view, &comp)? {
                    out.solutions.push(Solution { candidate: Candidate::Index(idx), composites: comp, code });
                }
            }
        }
        Strategy::Random { samples, seed } => {
            for idx in 0..samples {
                out.examined += 1;
                let mut cache: Vec<Option<Mat>> = alloc::vec![None; sizes.len()];
                let draw = |mi: usize| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(idx);
                    rng.set_word_pos((mi as u128) << 32);
                    let me = &view.middle_edges()[mi];
                    let data = (0..sizes[mi]).map(|_| rng.random_range(0..field.modulus())).collect();
                    Mat::from_canonical(field, l, r * me.sources.len(), data).expect("canonical by construction")
                };
                let mut taps = Vec::with_capacity(view.terminals().len());
                let mut feasible = true;
                for tv in view.terminals() {
                    for (_, mi) in tv.middle_taps() {
                        if cache[mi].is_none() {
                            cache[mi] = Some(draw(mi));
                        }
                    }
                    match solve_terminal(&view, tv, field, r, l, |mi| cache[mi].as_ref().expect("drawn above"))? {
                        Some(d) => taps.push(d),
                        None => {
                            feasible = false;
                            break;
                        }
                    }
                }
                if !feasible {
                    continue;
                }
                let maps: Vec<Mat> =
                    cache.into_iter().enumerate().map(|(mi, m)| m.unwrap_or_else(|| draw(mi))).collect();
                let comp = CompositeEncoding { field, r, l, maps };
                let code = assemble(net, &view, field, r, l, &comp.maps, &taps)?;
                out.solutions.push(Solution { candidate: Candidate::Index(idx), composites: comp, code });
            }
        }
    }
    Ok(out)
}
