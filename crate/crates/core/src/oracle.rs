//! Exhaustive ground truth: extremal densities over all of `S_N` or over all
//! layered permutations of length `N`, the Erdős–Szekeres scan, and the
//! two-sided sandwich around a packing density.
//!
//! Enumeration is split into partitions by the first entry of the permutation
//! (or the first layer of the composition). Each partition is enumerated in
//! lexicographic order, so concatenating partition results in index order
//! keeps witnesses sorted.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::bounds::{extended_price_bound, price_bound, BoundConfig, BoundResult};
use crate::layered::{
    count_with_decompositions, enumerate_quasi_blocks, from_layer_sequence, is_layered, BlockSeq,
    LayerSeq, QuasiBlockSeq,
};
use crate::perm::{contains, count_occurrences, FormalCombination, Permutation};
use crate::util::{binomial_big, for_each_composition, rational_to_f64};
use crate::{Error, Executor, Rational, Result};

/// Largest `N` for the all-permutations search without `force`.
pub const BRUTE_FORCE_CAP: usize = 9;
/// Largest `N` for the all-permutations search with `force`.
pub const BRUTE_FORCE_HARD_CAP: usize = 10;
/// Largest `N` for the layered (composition) search.
pub const LAYERED_CAP: usize = 20;
/// Reports keep at most this many witnesses; the full count is kept separately.
pub const WITNESS_LIMIT: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremalMode {
    MaxAll,
    MaxLayered,
    MinAll,
    MinLayered,
}

impl ExtremalMode {
    pub fn new(extremum: Extremum, layered: bool) -> Self {
        match (extremum, layered) {
            (Extremum::Max, false) => ExtremalMode::MaxAll,
            (Extremum::Max, true) => ExtremalMode::MaxLayered,
            (Extremum::Min, false) => ExtremalMode::MinAll,
            (Extremum::Min, true) => ExtremalMode::MinLayered,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExtremalMode::MaxAll => "max_all",
            ExtremalMode::MaxLayered => "max_layered",
            ExtremalMode::MinAll => "min_all",
            ExtremalMode::MinLayered => "min_layered",
        }
    }

    pub fn extremum(self) -> Extremum {
        match self {
            ExtremalMode::MaxAll | ExtremalMode::MaxLayered => Extremum::Max,
            ExtremalMode::MinAll | ExtremalMode::MinLayered => Extremum::Min,
        }
    }
}

/// `p_N`, `p′_N` or `p″_N` of a combination with its (truncated) extremal set.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalReport {
    pub n: usize,
    pub mode: ExtremalMode,
    pub value: Rational,
    /// Lexicographically sorted, at most [`WITNESS_LIMIT`] entries.
    pub witnesses: Vec<Permutation>,
    /// Size of the full extremal set.
    pub witness_count: u64,
}

/// Scores `p(f, σ)` as an integer numerator over a common denominator.
struct Scorer {
    n: usize,
    terms: Vec<ScoredTerm>,
    denominator: BigInt,
}

struct ScoredTerm {
    pattern: Permutation,
    weight: BigInt,
    decompositions: Option<Vec<QuasiBlockSeq>>,
}

impl Scorer {
    fn new(f: &FormalCombination, n: usize, layered: bool) -> Result<Self> {
        // p(f,σ) = Σ c_τ Λ(τ,σ) / C(n,|τ|); patterns longer than n contribute 0
        let parts: Vec<(Permutation, Rational)> = f
            .terms()
            .filter(|(p, _)| p.len() <= n)
            .map(|(p, c)| (p.clone(), c / Rational::from_integer(binomial_big(n, p.len()))))
            .collect();
        let denominator = parts
            .iter()
            .fold(BigInt::one(), |acc, (_, r)| acc.lcm(r.denom()));
        let terms = parts
            .into_iter()
            .map(|(pattern, r)| {
                let weight = r.numer() * (&denominator / r.denom());
                let decompositions = if layered && is_layered(&pattern) {
                    Some(enumerate_quasi_blocks(&pattern)?)
                } else {
                    None
                };
                Ok(ScoredTerm {
                    pattern,
                    weight,
                    decompositions,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Scorer {
            n,
            terms,
            denominator,
        })
    }

    fn score(&self, sigma: &Permutation) -> BigInt {
        self.terms
            .iter()
            .map(|t| &t.weight * BigInt::from(count_occurrences(&t.pattern, sigma)))
            .sum()
    }

    /// Patterns that are not layered never occur in a layered permutation.
    fn score_layered(&self, blocks: &BlockSeq, sigma: &Permutation) -> BigInt {
        let mut total = BigInt::zero();
        for t in &self.terms {
            let Some(decomps) = &t.decompositions else {
                continue;
            };
            let count = count_with_decompositions(decomps, blocks);
            if cfg!(debug_assertions) && self.n <= 8 {
                assert_eq!(
                    count,
                    count_occurrences(&t.pattern, sigma) as u128,
                    "block-wise count disagrees for {:?} in {:?}",
                    t.pattern,
                    sigma
                );
            }
            total += &t.weight * BigInt::from(count);
        }
        total
    }

    fn value(&self, score: &BigInt) -> Rational {
        Rational::new(score.clone(), self.denominator.clone())
    }
}

#[derive(Clone, Debug, Default)]
struct Partial {
    best: Option<BigInt>,
    witnesses: Vec<Permutation>,
    count: u64,
}

impl Partial {
    fn offer(&mut self, score: BigInt, sigma: impl FnOnce() -> Permutation, extremum: Extremum) {
        let replace = match &self.best {
            None => true,
            Some(b) => match extremum {
                Extremum::Max => score > *b,
                Extremum::Min => score < *b,
            },
        };
        if replace {
            self.best = Some(score);
            self.witnesses.clear();
            self.witnesses.push(sigma());
            self.count = 1;
        } else if self.best.as_ref() == Some(&score) {
            self.count += 1;
            if self.witnesses.len() < WITNESS_LIMIT {
                self.witnesses.push(sigma());
            }
        }
    }
}

fn merge(parts: Vec<Partial>, extremum: Extremum) -> Option<(BigInt, Vec<Permutation>, u64)> {
    let best = parts
        .iter()
        .filter_map(|p| p.best.clone())
        .reduce(|a, b| match extremum {
            Extremum::Max => a.max(b),
            Extremum::Min => a.min(b),
        })?;
    let mut witnesses = Vec::new();
    let mut count = 0;
    for p in parts {
        if p.best.as_ref() == Some(&best) {
            count += p.count;
            for w in p.witnesses {
                if witnesses.len() < WITNESS_LIMIT {
                    witnesses.push(w);
                }
            }
        }
    }
    Some((best, witnesses, count))
}

/// In-place lexicographic successor; `false` once `word` is the last one.
fn next_permutation(word: &mut [u32]) -> bool {
    if word.len() < 2 {
        return false;
    }
    let mut i = word.len() - 1;
    while i > 0 && word[i - 1] >= word[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = word.len() - 1;
    while word[j] <= word[i - 1] {
        j -= 1;
    }
    word.swap(i - 1, j);
    word[i..].reverse();
    true
}

/// Calls `visit` with every permutation of length `n` whose first entry is
/// `first + 1`, in lexicographic order.
fn for_each_with_first(n: usize, first: usize, mut visit: impl FnMut(&[u32])) {
    if n == 0 {
        visit(&[]);
        return;
    }
    let mut word: Vec<u32> = Vec::with_capacity(n);
    word.push(first as u32 + 1);
    word.extend((1..=n as u32).filter(|&v| v != first as u32 + 1));
    loop {
        visit(&word);
        if !next_permutation(&mut word[1..]) {
            break;
        }
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded {
            what: "permutation length N",
            value: n as u128,
            cap: cap as u128,
        });
    }
    Ok(())
}

/// `p_N(f)` (max) or `p′_N(f)` (min) over all of `S_N`, with the extremal set.
/// `N ≤ 9`, or `N ≤ 10` with `force`.
pub fn brute_force_pn<E: Executor>(
    f: &FormalCombination,
    n: usize,
    extremum: Extremum,
    force: bool,
    exec: &E,
) -> Result<ExtremalReport> {
    check_cap(n, if force { BRUTE_FORCE_HARD_CAP } else { BRUTE_FORCE_CAP })?;
    let scorer = Scorer::new(f, n, false)?;
    let parts = exec.map_indexed(n.max(1), |first| {
        let mut part = Partial::default();
        for_each_with_first(n, first, |word| {
            let sigma = Permutation::from_word_unchecked(word.to_vec());
            let score = scorer.score(&sigma);
            part.offer(score, || sigma.clone(), extremum);
        });
        part
    });
    let (best, witnesses, witness_count) =
        merge(parts, extremum).expect("S_N is never empty");
    Ok(ExtremalReport {
        n,
        mode: ExtremalMode::new(extremum, false),
        value: scorer.value(&best),
        witnesses,
        witness_count,
    })
}

/// The same optimum restricted to layered permutations, found by enumerating
/// compositions of `N` and counting block-wise. `N ≤ 20`.
pub fn brute_force_pn_layered<E: Executor>(
    f: &FormalCombination,
    n: usize,
    extremum: Extremum,
    exec: &E,
) -> Result<ExtremalReport> {
    check_cap(n, LAYERED_CAP)?;
    let scorer = Scorer::new(f, n, true)?;
    let parts = exec.map_indexed(n.max(1), |first| {
        let mut part = Partial::default();
        let mut visit = |layers: &[usize]| {
            let seq = LayerSeq::new(layers.to_vec()).expect("compositions have positive parts");
            let sigma = from_layer_sequence(&seq);
            let score = scorer.score_layered(&BlockSeq::from_layers(&seq), &sigma);
            part.offer(score, || sigma, extremum);
        };
        if n == 0 {
            visit(&[]);
        } else {
            let mut prefix = alloc::vec![first + 1];
            for_each_composition(n - first - 1, &mut prefix, &mut visit);
        }
        part
    });
    let (best, witnesses, witness_count) =
        merge(parts, extremum).expect("there is a layered permutation of every length");
    Ok(ExtremalReport {
        n,
        mode: ExtremalMode::new(extremum, true),
        value: scorer.value(&best),
        witnesses,
        witness_count,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErdosSzekeresScan {
    pub n: usize,
    pub k: usize,
    /// Every permutation of length `n` has a monotone subsequence of length `k+1`.
    pub all_contain: bool,
    /// The lexicographically first permutation without one.
    pub counterexample: Option<Permutation>,
}

/// Looks for a permutation of length `n ≤ 9` avoiding both `Id_{k+1}` and
/// `Rev_{k+1}`.
pub fn erdos_szekeres_scan<E: Executor>(n: usize, k: usize, exec: &E) -> Result<ErdosSzekeresScan> {
    check_cap(n, BRUTE_FORCE_CAP)?;
    let inc = Permutation::identity(k + 1);
    let dec = Permutation::reverse(k + 1);
    let found = exec.map_indexed(n.max(1), |first| {
        let mut hit = None;
        for_each_with_first(n, first, |word| {
            if hit.is_some() {
                return;
            }
            let sigma = Permutation::from_word_unchecked(word.to_vec());
            if !contains(&inc, &sigma) && !contains(&dec, &sigma) {
                hit = Some(sigma);
            }
        });
        hit
    });
    let counterexample = found.into_iter().flatten().next();
    Ok(ErdosSzekeresScan {
        n,
        k,
        all_contain: counterexample.is_none(),
        counterexample,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpperMethod {
    AllPermutations,
    /// Layered enumeration, equal to `p_N` for conical layered combinations.
    Layered,
}

/// A certified interval `[lower, upper]` containing `p(f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sandwich {
    pub lower: f64,
    pub lower_exact: Option<Rational>,
    pub lower_plain: BoundResult,
    pub lower_extended: BoundResult,
    pub upper: ExtremalReport,
    pub upper_method: UpperMethod,
}

impl Sandwich {
    pub fn upper_f64(&self) -> f64 {
        rational_to_f64(&self.upper.value)
    }

    /// Whether `x` lies in the interval, allowing the lower end `slack`.
    pub fn contains(&self, x: &Rational, slack: f64) -> bool {
        rational_to_f64(x) >= self.lower - slack && *x <= self.upper.value
    }
}

/// Slack allowed between the float lower bound and the exact upper bound.
pub const SANDWICH_TOL: f64 = 1e-7;

/// Lower end: the better of `𝔏_{n,f}` and `𝔏_{n,∅,f}`. Upper end: `p_N(f)`,
/// by exhaustive search for `N ≤ 9` and by layered enumeration up to `N ≤ 20`.
pub fn sandwich_report<E: Executor>(
    f: &FormalCombination,
    n_bound: usize,
    n_brute: usize,
    cfg: &BoundConfig,
    exec: &E,
) -> Result<Sandwich> {
    if !f.is_conical() {
        return Err(Error::Hypothesis("the sandwich needs a conical combination".into()));
    }
    let plain = price_bound(f, n_bound, cfg, exec)?;
    let extended = extended_price_bound(f, n_bound, &[], cfg, exec)?;
    let (upper, upper_method) = if n_brute <= BRUTE_FORCE_CAP {
        (brute_force_pn(f, n_brute, Extremum::Max, false, exec)?, UpperMethod::AllPermutations)
    } else {
        (brute_force_pn_layered(f, n_brute, Extremum::Max, exec)?, UpperMethod::Layered)
    };
    let better = if extended.value > plain.value { &extended } else { &plain };
    let lower = better.value;
    let lower_exact = better.exact_value.clone();
    let sandwich = Sandwich {
        lower,
        lower_exact,
        lower_plain: plain,
        lower_extended: extended,
        upper,
        upper_method,
    };
    let upper_f = sandwich.upper_f64();
    if lower > upper_f + SANDWICH_TOL {
        return Err(Error::Inconsistency(format!(
            "lower bound {lower} exceeds upper bound {upper_f}"
        )));
    }
    Ok(sandwich)
}
