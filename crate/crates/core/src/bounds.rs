//! Packing and minimization bounds for combinations of layered patterns.
//!
//! * `𝔏_{n,f}`: maximum of the Price polynomial `q_{n,f}` on the simplex.
//! * `𝔏_{n,W,f}`: maximum of the extended polynomial `g_{n,f}` with the
//!   antilayer slots indexed by `W` pinned to zero.
//! * `𝔘_{n,f}`: minimum of `q_{n,f}` on the simplex.
//!
//! Values are "best found" by multi-start local optimization. When every
//! witness coordinate is within [`RATIONAL_TOL`] of a fraction with
//! denominator at most [`MAX_RECOGNIZED_DEN`] and the fractions sum to one, the
//! polynomial is evaluated exactly there and that point becomes the witness.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::layered::BlockSeq;
use crate::perm::FormalCombination;
use crate::poly::{combine, PolyKind, SparsePolynomial};
use crate::simplex::{OptimizerConfig, Problem, Sense, SimplexPoint};
use crate::util::{abs, factorial, rational_to_f64};
use crate::{Error, Executor, Rational, Result};

pub const MAX_RECOGNIZED_DEN: u64 = 64;
pub const RATIONAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundMode {
    Pack,
    PackExtended,
    Minimize,
}

impl BoundMode {
    pub fn name(self) -> &'static str {
        match self {
            BoundMode::Pack => "pack",
            BoundMode::PackExtended => "pack-ext",
            BoundMode::Minimize => "min",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundConfig {
    pub optimizer: OptimizerConfig,
    /// Accept non-conical combinations; monotonicity is then not asserted.
    pub force: bool,
    pub max_pattern_len: usize,
    pub max_order: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            optimizer: OptimizerConfig::default(),
            force: false,
            max_pattern_len: 12,
            max_order: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub mode: BoundMode,
    pub n: usize,
    /// `W` as 0-based layer-pair indices; the pinned coordinates are `2j`.
    pub forced: Vec<usize>,
    pub value: f64,
    pub witness: SimplexPoint,
    pub exact_value: Option<Rational>,
    pub starts_used: usize,
    pub iterations: usize,
}

fn check_inputs(f: &FormalCombination, n: usize, cfg: &BoundConfig) -> Result<()> {
    if n == 0 {
        return Err(Error::Hypothesis("the order n must be at least 1".into()));
    }
    if n > cfg.max_order {
        return Err(Error::CapExceeded {
            what: "bound order n",
            value: n as u128,
            cap: cfg.max_order as u128,
        });
    }
    let len = f.max_pattern_len();
    if len > cfg.max_pattern_len {
        return Err(Error::CapExceeded {
            what: "pattern length",
            value: len as u128,
            cap: cfg.max_pattern_len as u128,
        });
    }
    if !f.is_conical() && !cfg.force {
        return Err(Error::Hypothesis(
            "the combination must be conical (pass force to override)".into(),
        ));
    }
    Ok(())
}

fn solve_bound<E: Executor>(
    mode: BoundMode,
    f: &FormalCombination,
    n: usize,
    forced: &[usize],
    cfg: &BoundConfig,
    exec: &E,
    extra_starts: &[Vec<f64>],
) -> Result<BoundResult> {
    check_inputs(f, n, cfg)?;
    let (kind, sense) = match mode {
        BoundMode::Pack => (PolyKind::Price, Sense::Maximize),
        BoundMode::PackExtended => (PolyKind::Extended, Sense::Maximize),
        BoundMode::Minimize => (PolyKind::Price, Sense::Minimize),
    };
    let mut forced: Vec<usize> = forced.to_vec();
    forced.sort_unstable();
    forced.dedup();
    if let Some(&j) = forced.iter().find(|&&j| j >= n) {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    let poly = combine(f, kind, n)?;
    let pinned: Vec<usize> = forced.iter().map(|&j| 2 * j).collect();
    let problem = Problem::new(&poly, &pinned, sense, cfg.force)?;
    let opt = problem.solve(exec, &cfg.optimizer, extra_starts)?;
    let mut result = BoundResult {
        mode,
        n,
        forced,
        value: opt.value,
        witness: opt.witness,
        exact_value: None,
        starts_used: opt.starts_used,
        iterations: opt.iterations,
    };
    refine_rational(&mut result, &poly, sense, &cfg.optimizer);
    Ok(result)
}

/// Replaces the witness by a nearby small-denominator rational point when the
/// exact value there is at least as good as the float optimum (up to
/// `value_tol`).
fn refine_rational(
    result: &mut BoundResult,
    poly: &SparsePolynomial,
    sense: Sense,
    cfg: &OptimizerConfig,
) {
    let Some(point) = recognize_point(result.witness.coords()) else {
        return;
    };
    let Ok(exact) = poly.evaluate_exact(&point) else {
        return;
    };
    let exact_f = rational_to_f64(&exact);
    let tol = cfg.value_tol * result.value.abs().max(1.0);
    let acceptable = match sense {
        Sense::Maximize => exact_f >= result.value - tol,
        Sense::Minimize => exact_f <= result.value + tol,
    };
    if !acceptable {
        return;
    }
    let coords: Vec<f64> = point.iter().map(rational_to_f64).collect();
    if let Ok(witness) = SimplexPoint::new(coords) {
        result.witness = witness;
        result.value = exact_f;
        result.exact_value = Some(exact);
    }
}

/// The fraction `p/q` with the smallest `q ≤ max_den` within `tol` of `x ≥ 0`.
pub fn recognize_rational(x: f64, max_den: u64, tol: f64) -> Option<Rational> {
    if !(x >= 0.0) || !x.is_finite() {
        return None;
    }
    for q in 1..=max_den {
        let p = (x * q as f64 + 0.5) as u64;
        if abs(x - p as f64 / q as f64) <= tol {
            return Some(Rational::new(BigInt::from(p), BigInt::from(q)));
        }
    }
    None
}

fn recognize_point(coords: &[f64]) -> Option<Vec<Rational>> {
    let point: Vec<Rational> = coords
        .iter()
        .map(|&c| recognize_rational(c, MAX_RECOGNIZED_DEN, RATIONAL_TOL))
        .collect::<Option<_>>()?;
    let sum: Rational = point.iter().sum();
    sum.is_one().then_some(point)
}

/// `𝔏_{n,f}`.
pub fn price_bound<E: Executor>(
    f: &FormalCombination,
    n: usize,
    cfg: &BoundConfig,
    exec: &E,
) -> Result<BoundResult> {
    solve_bound(BoundMode::Pack, f, n, &[], cfg, exec, &[])
}

/// `𝔏_{n,W,f}` with `W` given as 0-based indices into `0..n`.
pub fn extended_price_bound<E: Executor>(
    f: &FormalCombination,
    n: usize,
    forced: &[usize],
    cfg: &BoundConfig,
    exec: &E,
) -> Result<BoundResult> {
    solve_bound(BoundMode::PackExtended, f, n, forced, cfg, exec, &[])
}

/// `𝔘_{n,f}`.
pub fn min_price_bound<E: Executor>(
    f: &FormalCombination,
    n: usize,
    cfg: &BoundConfig,
    exec: &E,
) -> Result<BoundResult> {
    solve_bound(BoundMode::Minimize, f, n, &[], cfg, exec, &[])
}

/// Which antilayer slots are pinned at each order of an extended sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForcedPolicy {
    /// `W_n = ∅`.
    None,
    /// `W_n = [n] ∖ {1}`: only the first antilayer slot is free.
    AllButFirst,
    /// `W_n = [n]`, which reproduces the plain Price bound.
    All,
}

impl ForcedPolicy {
    pub fn forced(self, n: usize) -> Vec<usize> {
        match self {
            ForcedPolicy::None => Vec::new(),
            ForcedPolicy::AllButFirst => (1..n).collect(),
            ForcedPolicy::All => (0..n).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundSequence {
    pub mode: BoundMode,
    pub entries: Vec<BoundResult>,
    /// Pack modes must be non-decreasing in `n`, minimization non-increasing,
    /// both up to `value_tol`.
    pub monotone: bool,
    pub diagnostics: Vec<String>,
}

/// Bounds for `n = 1..=n_max`. Each order is also started from the previous
/// witness padded with zeros, so a monotone sequence is reachable by
/// construction; any violation that remains is reported in `diagnostics`.
pub fn bound_sequence<E: Executor>(
    f: &FormalCombination,
    n_max: usize,
    mode: BoundMode,
    policy: ForcedPolicy,
    cfg: &BoundConfig,
    exec: &E,
) -> Result<BoundSequence> {
    if n_max > cfg.max_order {
        return Err(Error::CapExceeded {
            what: "bound order n",
            value: n_max as u128,
            cap: cfg.max_order as u128,
        });
    }
    let mut entries: Vec<BoundResult> = Vec::with_capacity(n_max);
    let mut diagnostics = Vec::new();
    let mut monotone = true;
    for n in 1..=n_max {
        let forced = match mode {
            BoundMode::PackExtended => policy.forced(n),
            _ => Vec::new(),
        };
        let extra: Vec<Vec<f64>> = entries
            .last()
            .map(|prev| {
                let mut x = prev.witness.coords().to_vec();
                let pad = if mode == BoundMode::PackExtended { 2 } else { 1 };
                x.extend(core::iter::repeat_n(0.0, pad));
                alloc::vec![x]
            })
            .unwrap_or_default();
        let result = solve_bound(mode, f, n, &forced, cfg, exec, &extra)?;
        if let Some(prev) = entries.last() {
            let tol = cfg.optimizer.value_tol;
            let violated = match mode {
                BoundMode::Minimize => result.value > prev.value + tol,
                _ => result.value < prev.value - tol,
            };
            if violated {
                monotone = false;
                diagnostics.push(format!(
                    "optimizer failure: order {} gave {} after {} at order {}",
                    n,
                    result.value,
                    prev.value,
                    n - 1
                ));
            }
        }
        entries.push(result);
    }
    if cfg.force {
        // without a conical combination there is no monotonicity claim to check
        monotone = true;
        diagnostics.clear();
    }
    Ok(BoundSequence {
        mode,
        entries,
        monotone,
        diagnostics,
    })
}

/// Which hypothesis justified a closed-form packing density.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HypothesisPath {
    /// One antilayer of length `a ≥ 2`, `k` layers of length ≥ `a`, and
    /// `2^a − a − 1 ≥ k`.
    SingleAntilayer { a: usize, k: usize },
    /// Only layers, the shortest of length `min_layer`, with `2^min_layer ≥ 1 + k`.
    LayersOnly { min_layer: usize, k: usize },
    /// A single block, whose packing density is 1.
    SingleBlock,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm {
    pub value: Rational,
    pub path: HypothesisPath,
    /// The antilayer was last, so the reversed block sequence was used.
    pub reversed: bool,
}

fn pow_at_least(base_exp: usize, bound: usize) -> bool {
    // 2^e ≥ bound without overflow
    base_exp >= usize::BITS as usize - 1 || (1usize << base_exp) >= bound
}

fn normalized_weight(len: usize) -> Rational {
    // ℓ^ℓ / ℓ!
    Rational::new(num_traits::pow(BigInt::from(len), len), factorial(len))
}

/// The packing density of the permutation with block sequence `blocks`, when
/// one of the supported hypotheses holds.
///
/// The value is `|σ|!/|σ|^|σ| · Π ℓ^ℓ/ℓ!` over the layers, times `a^a/a!` for
/// the antilayer.
pub fn closed_form_packing(blocks: &BlockSeq) -> Result<ClosedForm> {
    let b = blocks.blocks();
    if b.is_empty() {
        return Err(Error::Hypothesis("the block sequence is empty".into()));
    }
    if b.len() == 1 {
        return Ok(ClosedForm {
            value: Rational::one(),
            path: HypothesisPath::SingleBlock,
            reversed: false,
        });
    }
    let total = blocks.total();
    let prefactor = Rational::new(factorial(total), num_traits::pow(BigInt::from(total), total));
    let antilayers: Vec<usize> = b.iter().filter(|x| x.anti).map(|x| x.len).collect();
    let layers: Vec<usize> = b.iter().filter(|x| !x.anti).map(|x| x.len).collect();
    let k = layers.len();
    match antilayers.as_slice() {
        [] => {
            let min_layer = *layers.iter().min().expect("at least two blocks");
            if !pow_at_least(min_layer, 1 + k) {
                return Err(Error::Hypothesis(format!(
                    "2^{min_layer} < 1 + k = {} for the shortest layer",
                    1 + k
                )));
            }
            let value = layers.iter().fold(prefactor, |acc, &l| acc * normalized_weight(l));
            Ok(ClosedForm {
                value,
                path: HypothesisPath::LayersOnly { min_layer, k },
                reversed: false,
            })
        }
        [1] => Err(Error::Hypothesis(format!(
            "a layer of length 1 next to {k} longer layers violates 2^1 ≥ 1 + k"
        ))),
        &[a] => {
            if let Some(&short) = layers.iter().find(|&&l| l < a) {
                return Err(Error::Hypothesis(format!(
                    "layer of length {short} is shorter than the antilayer length a = {a}"
                )));
            }
            // 2^a − a − 1 ≥ k
            if !(a >= usize::BITS as usize - 1 || (1usize << a) - a - 1 >= k) {
                return Err(Error::Hypothesis(format!(
                    "2^{a} - {a} - 1 = {} < k = {k}",
                    (1usize << a) - a - 1
                )));
            }
            let value = layers
                .iter()
                .fold(prefactor * normalized_weight(a), |acc, &l| acc * normalized_weight(l));
            Ok(ClosedForm {
                value,
                path: HypothesisPath::SingleAntilayer { a, k },
                reversed: b.last().is_some_and(|x| x.anti),
            })
        }
        _ => Err(Error::Hypothesis(format!(
            "{} antilayers; at most one is supported",
            antilayers.len()
        ))),
    }
}

/// `1/(ℓ−1)^{k−1}`, the layered minimum density of `Id_ℓ + Rev_k` for
/// `k ≥ ℓ ≥ 3`.
pub fn min_mono_value(l: usize, k: usize) -> Result<Rational> {
    if !(k >= l && l >= 3) {
        return Err(Error::Hypothesis(format!(
            "need k >= l >= 3, got l = {l}, k = {k} (swap the arguments for l > k)"
        )));
    }
    Ok(Rational::new(
        BigInt::one(),
        num_traits::pow(BigInt::from(l - 1), k - 1),
    ))
}

/// The `2n` slot values of the extended polynomial that the antilayer closed
/// form predicts: the antilayer slot before the `j`-th layer carries `a/|σ|`,
/// each layer slot `ℓ_i/|σ|`, all other slots zero. Returns `None` unless the
/// block sequence has one antilayer that is not last.
pub fn predicted_extended_witness(blocks: &BlockSeq) -> Option<Vec<Rational>> {
    let b = blocks.blocks();
    let total = BigInt::from(blocks.total());
    let layers = b.iter().filter(|x| !x.anti).count();
    if layers == 0 || b.last()?.anti || b.iter().filter(|x| x.anti).count() != 1 {
        return None;
    }
    let mut coords = alloc::vec![Rational::zero(); 2 * layers];
    let mut layer_index = 0;
    for x in b {
        let share = Rational::new(BigInt::from(x.len), total.clone());
        if x.anti {
            coords[2 * layer_index] = share;
        } else {
            coords[2 * layer_index + 1] = share;
            layer_index += 1;
        }
    }
    Some(coords)
}

/// 0-based index of the layer that follows the antilayer, i.e. the `j` with
/// `W = [k] ∖ {j}` in the block-permutation form of the closed form.
pub fn antilayer_slot(blocks: &BlockSeq) -> Option<usize> {
    let b = blocks.blocks();
    let pos = b.iter().position(|x| x.anti)?;
    Some(b[..pos].iter().filter(|x| !x.anti).count())
}
