//! Permutations, induced subpermutations, occurrence counts and densities.
//!
//! A permutation of length `n` is stored as its word `σ(1)…σ(n)` with values in
//! `1..=n`. Index sets passed to [`Permutation::induced`] and friends are
//! 0-based positions, strictly increasing.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::util::{binomial_big, rational_to_f64};
use crate::{Error, Rational, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Permutation {
    word: Vec<u32>,
}

impl Permutation {
    /// Builds a permutation from its word, checking that it is a bijection of `[n]`.
    pub fn new(word: Vec<u32>) -> Result<Self> {
        let n = word.len();
        let mut seen = alloc::vec![false; n];
        for &v in &word {
            let v = v as usize;
            if v == 0 || v > n {
                return Err(Error::MalformedPermutation(format!(
                    "value {v} outside 1..={n}"
                )));
            }
            if seen[v - 1] {
                return Err(Error::MalformedPermutation(format!("duplicate value {v}")));
            }
            seen[v - 1] = true;
        }
        Ok(Permutation { word })
    }

    pub(crate) fn from_word_unchecked(word: Vec<u32>) -> Self {
        debug_assert!(Permutation::new(word.clone()).is_ok());
        Permutation { word }
    }

    /// `Id_n = (1 2 … n)`.
    pub fn identity(n: usize) -> Self {
        Permutation {
            word: (1..=n as u32).collect(),
        }
    }

    /// `Rev_n = (n … 2 1)`.
    pub fn reverse(n: usize) -> Self {
        Permutation {
            word: (1..=n as u32).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn word(&self) -> &[u32] {
        &self.word
    }

    /// The reverse-complement `i ↦ n+1-σ(n+1-i)`.
    pub fn reverse_complement(&self) -> Self {
        let n = self.word.len() as u32;
        Permutation {
            word: self.word.iter().rev().map(|&v| n + 1 - v).collect(),
        }
    }

    /// The subpermutation induced by the positions in `indices` (0-based,
    /// strictly increasing).
    pub fn induced(&self, indices: &[usize]) -> Result<Permutation> {
        check_index_set(indices, self.len())?;
        let values: Vec<u32> = indices.iter().map(|&i| self.word[i]).collect();
        Ok(Permutation {
            word: standardize(&values),
        })
    }

    /// Removes the entry at `position` and standardizes the rest.
    pub fn delete(&self, position: usize) -> Result<Permutation> {
        if position >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: position,
                len: self.len(),
            });
        }
        let removed = self.word[position];
        let word = self
            .word
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != position)
            .map(|(_, &v)| if v > removed { v - 1 } else { v })
            .collect();
        Ok(Permutation { word })
    }
}

pub(crate) fn check_index_set(indices: &[usize], len: usize) -> Result<()> {
    for w in indices.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidIndexSet(format!(
                "positions must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if let Some(&last) = indices.last() {
        if last >= len {
            return Err(Error::IndexOutOfRange { index: last, len });
        }
    }
    Ok(())
}

/// Replaces distinct values by their ranks `1..=len`.
fn standardize(values: &[u32]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by_key(|&i| values[i]);
    let mut out = alloc::vec![0u32; values.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = rank as u32 + 1;
    }
    out
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.len() <= 9 {
            for v in &self.word {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            for (i, v) in self.word.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

/// Accepts `68153427`, `(68153427)` or `10,2,3,…`. Contiguous digits are only
/// meaningful when every value is a single digit.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut s = text.trim();
        if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            s = inner.trim();
        }
        if s.is_empty() {
            return Ok(Permutation::default());
        }
        let word: Vec<u32> = if s.contains(',') {
            s.split(',')
                .map(|tok| {
                    let tok = tok.trim();
                    tok.parse::<u32>().map_err(|_| {
                        Error::MalformedPermutation(format!("bad entry {tok:?} in {text:?}"))
                    })
                })
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10).ok_or_else(|| {
                        Error::MalformedPermutation(format!("bad character {c:?} in {text:?}"))
                    })
                })
                .collect::<Result<_>>()?
        };
        Permutation::new(word)
    }
}

/// `Λ(τ, σ)`: the number of position sets `A` with `σ[A] = τ`.
///
/// Positions are chosen left to right and a prefix is abandoned as soon as its
/// relative order disagrees with the matching prefix of `τ`.
pub fn count_occurrences(pattern: &Permutation, host: &Permutation) -> u64 {
    let mut count = 0u64;
    search(pattern.word(), host.word(), &mut |_| {
        count += 1;
        true
    });
    count
}

/// Whether `pattern` occurs at least once in `host`.
pub fn contains(pattern: &Permutation, host: &Permutation) -> bool {
    let mut found = false;
    search(pattern.word(), host.word(), &mut |_| {
        found = true;
        false
    });
    found
}

/// Calls `visit` with every occurrence (as 0-based positions). `visit` returns
/// `false` to stop the search.
pub fn for_each_occurrence(
    pattern: &Permutation,
    host: &Permutation,
    mut visit: impl FnMut(&[usize]) -> bool,
) {
    search(pattern.word(), host.word(), &mut visit);
}

fn search(pattern: &[u32], host: &[u32], visit: &mut dyn FnMut(&[usize]) -> bool) {
    let m = pattern.len();
    let n = host.len();
    if m > n {
        return;
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    extend(pattern, host, &mut chosen, 0, visit);
}

fn extend(
    pattern: &[u32],
    host: &[u32],
    chosen: &mut Vec<usize>,
    from: usize,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    let j = chosen.len();
    if j == pattern.len() {
        return visit(chosen);
    }
    let needed = pattern.len() - j;
    for i in from..=host.len() - needed {
        let fits = chosen
            .iter()
            .zip(pattern)
            .all(|(&c, &t)| (host[c] < host[i]) == (t < pattern[j]));
        if fits {
            chosen.push(i);
            let go_on = extend(pattern, host, chosen, i + 1, visit);
            chosen.pop();
            if !go_on {
                return false;
            }
        }
    }
    true
}

/// An exact density with its floating-point approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityValue {
    pub exact: Rational,
    pub float: f64,
}

impl DensityValue {
    pub fn new(exact: Rational) -> Self {
        let float = rational_to_f64(&exact);
        DensityValue { exact, float }
    }

    /// `count / C(host_len, pattern_len)`, or zero when the pattern is longer.
    pub fn from_count(count: u64, pattern_len: usize, host_len: usize) -> Self {
        if pattern_len > host_len {
            return DensityValue::new(Rational::zero());
        }
        DensityValue::new(Rational::new(
            BigInt::from(count),
            binomial_big(host_len, pattern_len),
        ))
    }
}

/// `p(τ, σ)`.
pub fn density(pattern: &Permutation, host: &Permutation) -> DensityValue {
    DensityValue::from_count(count_occurrences(pattern, host), pattern.len(), host.len())
}

/// A finite formal linear combination `Σ c_τ τ` with rational coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FormalCombination {
    terms: BTreeMap<Permutation, Rational>,
}

impl FormalCombination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(pattern: Permutation) -> Self {
        let mut f = Self::new();
        f.add_term(Rational::from_integer(BigInt::from(1)), pattern);
        f
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, Permutation)>) -> Self {
        let mut f = Self::new();
        for (c, p) in terms {
            f.add_term(c, p);
        }
        f
    }

    /// Adds `coeff · pattern`, merging with an existing term.
    pub fn add_term(&mut self, coeff: Rational, pattern: Permutation) {
        let entry = self.terms.entry(pattern).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Permutation, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// All coefficients are non-negative.
    pub fn is_conical(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    pub fn max_pattern_len(&self) -> usize {
        self.terms.keys().map(Permutation::len).max().unwrap_or(0)
    }

    pub fn abs_coefficient_sum(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).sum()
    }
}

impl fmt::Display for FormalCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            write!(f, "{}*{}", c.abs(), p)?;
        }
        Ok(())
    }
}

/// Grammar: terms `coef*perm` joined by `+` or `-`; `coef` is an optional
/// rational `p/q` (so `132` alone means `1*132`). `−` (U+2212) is accepted
/// as a minus sign.
impl FromStr for FormalCombination {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let normalized: String = text.replace('\u{2212}', "-");
        let mut f = FormalCombination::new();
        let mut sign_negative = false;
        let mut current = String::new();
        let mut saw_term = false;
        let flush = |tok: &str, negative: bool, f: &mut FormalCombination| -> Result<()> {
            let tok = tok.trim();
            if tok.is_empty() {
                return Err(Error::Parse(format!("empty term in combination {text:?}")));
            }
            let (coeff, perm) = match tok.split_once('*') {
                Some((c, p)) => (parse_rational(c.trim())?, p.trim()),
                None => (Rational::from_integer(BigInt::from(1)), tok),
            };
            if perm.is_empty() {
                return Err(Error::Parse(format!("term {tok:?} has no permutation")));
            }
            let perm: Permutation = perm.parse()?;
            f.add_term(if negative { -coeff } else { coeff }, perm);
            Ok(())
        };
        for ch in normalized.chars() {
            match ch {
                '+' | '-' => {
                    if current.trim().is_empty() && !saw_term {
                        // leading sign
                        if ch == '-' {
                            sign_negative = !sign_negative;
                        }
                        continue;
                    }
                    flush(&current, sign_negative, &mut f)?;
                    saw_term = true;
                    current.clear();
                    sign_negative = ch == '-';
                }
                _ => current.push(ch),
            }
        }
        flush(&current, sign_negative, &mut f)?;
        Ok(f)
    }
}

/// Parses `p`, `p/q` or a plain decimal-free integer into a rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// `p(f, σ) = Σ c_τ p(τ, σ)`, exactly.
pub fn combination_density(f: &FormalCombination, host: &Permutation) -> DensityValue {
    let exact = f
        .terms()
        .map(|(p, c)| c * density(p, host).exact)
        .fold(Rational::zero(), |a, b| a + b);
    DensityValue::new(exact)
}

impl fmt::Display for DensityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.exact.to_string())
    }
}
