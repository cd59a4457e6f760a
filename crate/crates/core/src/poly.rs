//! Exact sparse multivariate polynomials and the Price polynomials of layered
//! patterns.
//!
//! The Price polynomial `q_{n,τ}` of a layered `τ` with layers `(ℓ₁,…,ℓ_k)` is
//! `m!/Πℓ_j! · Σ_{i₁<…<i_k} Π x_{i_j}^{ℓ_j}` over `n` variables. The extended
//! polynomial `g_{n,τ}` lives on `2n` slots alternating antilayer, layer,
//! antilayer, … and sums over every quasi-block decomposition of `τ`.
//! Variable indices are 0-based, so antilayer slots are the even indices.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::layered::{compatible, enumerate_quasi_blocks, layer_sequence, Block};
use crate::perm::{FormalCombination, Permutation};
use crate::util::{factorial, powu, rational_to_f64};
use crate::{Error, Rational, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational,
    pub exponents: Vec<u32>,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// A polynomial kept in canonical form: exponent vectors sorted ascending,
/// no duplicates, no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePolynomial {
    num_vars: usize,
    terms: Vec<Term>,
}

impl SparsePolynomial {
    pub fn zero(num_vars: usize) -> Self {
        SparsePolynomial {
            num_vars,
            terms: Vec::new(),
        }
    }

    /// Merges duplicate exponent vectors and drops zero coefficients.
    pub fn from_terms(
        num_vars: usize,
        terms: impl IntoIterator<Item = (Rational, Vec<u32>)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (c, e) in terms {
            if e.len() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    got: e.len(),
                });
            }
            *map.entry(e).or_insert_with(Rational::zero) += c;
        }
        Ok(Self::from_map(num_vars, map))
    }

    fn from_map(num_vars: usize, map: BTreeMap<Vec<u32>, Rational>) -> Self {
        SparsePolynomial {
            num_vars,
            terms: map
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(exponents, coeff)| Term { coeff, exponents })
                .collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Term::degree).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = self.degree();
        self.terms.iter().all(|t| t.degree() == d)
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.iter().all(|t| !t.coeff.is_negative())
    }

    /// Largest exponent of each variable across all terms.
    pub fn max_exponents(&self) -> Vec<u32> {
        let mut out = alloc::vec![0; self.num_vars];
        for t in &self.terms {
            for (o, &e) in out.iter_mut().zip(&t.exponents) {
                *o = (*o).max(e);
            }
        }
        out
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, factor: &Rational, other: &SparsePolynomial) -> Result<Self> {
        if self.num_vars != other.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: other.num_vars,
            });
        }
        let mut map: BTreeMap<Vec<u32>, Rational> = self
            .terms
            .iter()
            .map(|t| (t.exponents.clone(), t.coeff.clone()))
            .collect();
        for t in &other.terms {
            *map.entry(t.exponents.clone()).or_insert_with(Rational::zero) += factor * &t.coeff;
        }
        Ok(Self::from_map(self.num_vars, map))
    }

    /// Sets every variable outside `keep` to zero and renumbers the kept ones
    /// in the order given.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        for &k in keep {
            if k >= self.num_vars {
                return Err(Error::IndexOutOfRange {
                    index: k,
                    len: self.num_vars,
                });
            }
        }
        let mut kept = alloc::vec![false; self.num_vars];
        for &k in keep {
            kept[k] = true;
        }
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exponents.iter().zip(&kept).all(|(&e, &k)| k || e == 0))
            .map(|t| {
                (
                    t.coeff.clone(),
                    keep.iter().map(|&k| t.exponents[k]).collect(),
                )
            });
        Self::from_terms(keep.len(), terms)
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got,
            });
        }
        Ok(())
    }

    pub fn evaluate_exact(&self, x: &[Rational]) -> Result<Rational> {
        self.check_dim(x.len())?;
        let mut acc = Rational::zero();
        for t in &self.terms {
            let mut v = t.coeff.clone();
            for (xi, &e) in x.iter().zip(&t.exponents) {
                if e > 0 {
                    v *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self
            .terms
            .iter()
            .map(|t| {
                x.iter()
                    .zip(&t.exponents)
                    .fold(rational_to_f64(&t.coeff), |acc, (&xi, &e)| acc * powu(xi, e))
            })
            .sum())
    }

    /// `∂P/∂x_i` for every `i`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        let mut grad = alloc::vec![0.0; self.num_vars];
        for t in &self.terms {
            let c = rational_to_f64(&t.coeff);
            for (i, &ei) in t.exponents.iter().enumerate() {
                if ei == 0 {
                    continue;
                }
                let mut v = c * ei as f64;
                for (j, (&xj, &ej)) in x.iter().zip(&t.exponents).enumerate() {
                    v *= if j == i { powu(xj, ej - 1) } else { powu(xj, ej) };
                }
                grad[i] += v;
            }
        }
        Ok(grad)
    }

    pub fn gradient_exact(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        self.check_dim(x.len())?;
        let mut grad = alloc::vec![Rational::zero(); self.num_vars];
        for t in &self.terms {
            for (i, &ei) in t.exponents.iter().enumerate() {
                if ei == 0 {
                    continue;
                }
                let mut v = &t.coeff * Rational::from_integer(BigInt::from(ei));
                for (j, (xj, &ej)) in x.iter().zip(&t.exponents).enumerate() {
                    let e = if j == i { ej - 1 } else { ej };
                    if e > 0 {
                        v *= num_traits::pow(xj.clone(), e as usize);
                    }
                }
                grad[i] += v;
            }
        }
        Ok(grad)
    }
}

/// Which family of Price polynomial to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyKind {
    /// `q_{n,τ}` over `n` layer variables.
    Price,
    /// `g_{n,τ}` over `2n` alternating antilayer/layer slots.
    Extended,
}

fn multinomial(total: usize, parts: impl Iterator<Item = usize>) -> Rational {
    let den = parts.fold(BigInt::one(), |acc, l| acc * factorial(l));
    Rational::new(factorial(total), den)
}

/// `q_{n,τ}`; the zero polynomial when `τ` has more than `n` layers.
pub fn build_price_polynomial(pattern: &Permutation, n: usize) -> Result<SparsePolynomial> {
    let layers = layer_sequence(pattern)?;
    let lengths = layers.lengths();
    let coeff = multinomial(pattern.len(), lengths.iter().copied());
    let mut terms = Vec::new();
    crate::util::for_each_subset(n, lengths.len(), |slots| {
        let mut e = alloc::vec![0u32; n];
        for (&s, &l) in slots.iter().zip(lengths) {
            e[s] = l as u32;
        }
        terms.push((coeff.clone(), e));
    });
    SparsePolynomial::from_terms(n, terms)
}

/// Slot `s` (0-based) of the extended polynomial is an antilayer when `s` is
/// even.
pub fn slot_is_antilayer(slot: usize) -> bool {
    slot % 2 == 0
}

/// `g_{n,τ}` over `2n` variables.
pub fn build_extended_price_polynomial(
    pattern: &Permutation,
    n: usize,
) -> Result<SparsePolynomial> {
    let decompositions = enumerate_quasi_blocks(pattern)?;
    let slots = 2 * n;
    let slot_blocks: Vec<Block> = (0..slots)
        .map(|s| Block {
            len: 0,
            anti: slot_is_antilayer(s),
        })
        .collect();
    let mut terms = Vec::new();
    for d in &decompositions {
        let items = d.items();
        let coeff = multinomial(pattern.len(), items.iter().map(|q| q.len));
        let mut chosen = Vec::with_capacity(items.len());
        assign_slots(items, &slot_blocks, 0, &mut chosen, &mut |chosen| {
            let mut e = alloc::vec![0u32; slots];
            for (&s, q) in chosen.iter().zip(items) {
                e[s] = q.len as u32;
            }
            terms.push((coeff.clone(), e));
        });
    }
    SparsePolynomial::from_terms(slots, terms)
}

fn assign_slots(
    items: &[Block],
    slots: &[Block],
    from: usize,
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    let j = chosen.len();
    if j == items.len() {
        emit(chosen);
        return;
    }
    let remaining = items.len() - j;
    if slots.len() < from + remaining {
        return;
    }
    for s in from..=slots.len() - remaining {
        if compatible(&items[j], &slots[s]) {
            chosen.push(s);
            assign_slots(items, slots, s + 1, chosen, emit);
            chosen.pop();
        }
    }
}

pub fn build(kind: PolyKind, pattern: &Permutation, n: usize) -> Result<SparsePolynomial> {
    match kind {
        PolyKind::Price => build_price_polynomial(pattern, n),
        PolyKind::Extended => build_extended_price_polynomial(pattern, n),
    }
}

/// `Σ a_i P_{n,τ_i}` for `f = Σ a_i τ_i`.
pub fn combine(f: &FormalCombination, kind: PolyKind, n: usize) -> Result<SparsePolynomial> {
    let vars = match kind {
        PolyKind::Price => n,
        PolyKind::Extended => 2 * n,
    };
    let mut acc = SparsePolynomial::zero(vars);
    for (pattern, coeff) in f.terms() {
        acc = acc.add_scaled(coeff, &build(kind, pattern, n)?)?;
    }
    Ok(acc)
}
