//! Optimization of a polynomial over the probability simplex
//! `{x : x_i ≥ 0, Σ x_i = 1}`, optionally with some coordinates forced to zero.
//!
//! Forced coordinates are removed from the problem before solving. Polynomials
//! whose terms have different degrees are homogenized with powers of `Σ x_i`,
//! which leaves their values on the simplex unchanged.
//!
//! * Maximization of a polynomial with non-negative coefficients uses the
//!   multiplicative update `x_i ← x_i ∂_iP / Σ_j x_j ∂_jP`, which never decreases
//!   `P` for homogeneous polynomials with non-negative coefficients.
//! * Minimization (and maximization of mixed-sign polynomials, on request) uses
//!   projected gradient steps with Armijo backtracking.
//!
//! Each start is run independently; [`Problem::reduce`] picks the winner in a
//! way that does not depend on the order in which starts finished.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::SparsePolynomial;
use crate::util::{abs, powu, rational_to_f64};
use crate::{Error, Executor, Result, Sequential};

/// Coordinates below this are snapped to zero after every update.
pub const SNAP_THRESHOLD: f64 = 1e-15;

/// Tolerance on `Σ x_i = 1` for a [`SimplexPoint`].
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    /// Number of random starts, in addition to the structured seeds.
    pub starts: usize,
    pub max_iters: usize,
    /// A start stops once no coordinate moves by more than this.
    pub step_tol: f64,
    /// Values this close (relative to `max(1, |best|)`) count as ties.
    pub value_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            starts: 64,
            max_iters: 10_000,
            step_tol: 1e-12,
            value_tol: 1e-9,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 || self.max_iters == 0 {
            return Err(Error::Parse("starts and max_iters must be positive".into()));
        }
        if !(self.step_tol > 0.0 && self.value_tol > 0.0) {
            return Err(Error::Parse("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// A point of the probability simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Infeasible("a simplex point needs at least one coordinate".into()));
        }
        if coords.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(Error::Infeasible(format!("negative or non-finite coordinate in {coords:?}")));
        }
        let sum: f64 = coords.iter().sum();
        if abs(sum - 1.0) > SIMPLEX_SUM_TOL {
            return Err(Error::Infeasible(format!("coordinates sum to {sum}, not 1")));
        }
        Ok(SimplexPoint(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    MultiplicativeUpdate,
    ProjectedGradient,
}

#[derive(Clone, Debug)]
struct CompiledTerm {
    coeff: f64,
    factors: Vec<(usize, u32)>,
    /// Power of `Σ x_i` used to homogenize the term.
    pad: u32,
}

/// A floating-point copy of a polynomial, homogenized to its top degree.
#[derive(Clone, Debug)]
struct CompiledPoly {
    terms: Vec<CompiledTerm>,
}

impl CompiledPoly {
    fn new(p: &SparsePolynomial) -> Self {
        let degree = p.degree();
        let terms = p
            .terms()
            .iter()
            .map(|t| CompiledTerm {
                coeff: rational_to_f64(&t.coeff),
                factors: t
                    .exponents
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e))
                    .collect(),
                pad: degree - t.degree(),
            })
            .collect();
        CompiledPoly { terms }
    }

    fn value(&self, x: &[f64]) -> f64 {
        let s: f64 = x.iter().sum();
        self.terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .fold(t.coeff * powu(s, t.pad), |acc, &(i, e)| acc * powu(x[i], e))
            })
            .sum()
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let s: f64 = x.iter().sum();
        let mut total = 0.0;
        for t in &self.terms {
            let mono = t.factors.iter().fold(t.coeff, |acc, &(i, e)| acc * powu(x[i], e));
            let sp = powu(s, t.pad);
            total += mono * sp;
            if t.pad > 0 {
                let d = mono * t.pad as f64 * powu(s, t.pad - 1);
                grad.iter_mut().for_each(|g| *g += d);
            }
            for (k, &(i, e)) in t.factors.iter().enumerate() {
                let mut v = t.coeff * e as f64 * sp * powu(x[i], e - 1);
                for (l, &(j, f)) in t.factors.iter().enumerate() {
                    if l != k {
                        v *= powu(x[j], f);
                    }
                }
                grad[i] += v;
            }
        }
        total
    }
}

/// Result of one start, in the reduced (free) coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct StartOutcome {
    pub value: f64,
    pub point: Vec<f64>,
    pub iterations: usize,
}

/// The reduced winner of a multi-start run, in full coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub witness: SimplexPoint,
    pub starts_used: usize,
    pub iterations: usize,
}

/// A polynomial optimization problem over a face of the simplex.
#[derive(Clone, Debug)]
pub struct Problem {
    original: SparsePolynomial,
    reduced: SparsePolynomial,
    compiled: CompiledPoly,
    free: Vec<usize>,
    sense: Sense,
    method: Method,
}

impl Problem {
    /// `forced_zero` lists coordinates pinned to zero. Maximizing a polynomial
    /// with a negative coefficient is refused unless `allow_mixed_sign` is set,
    /// in which case projected gradient ascent replaces the multiplicative
    /// update.
    pub fn new(
        p: &SparsePolynomial,
        forced_zero: &[usize],
        sense: Sense,
        allow_mixed_sign: bool,
    ) -> Result<Self> {
        let n = p.num_vars();
        let mut forced = alloc::vec![false; n];
        for &z in forced_zero {
            if z >= n {
                return Err(Error::IndexOutOfRange { index: z, len: n });
            }
            forced[z] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&i| !forced[i]).collect();
        if free.is_empty() {
            return Err(Error::Infeasible("every coordinate is forced to zero".into()));
        }
        let reduced = p.restrict(&free)?;
        let method = match sense {
            Sense::Minimize => Method::ProjectedGradient,
            Sense::Maximize if reduced.has_nonnegative_coefficients() => Method::MultiplicativeUpdate,
            Sense::Maximize if allow_mixed_sign => Method::ProjectedGradient,
            Sense::Maximize => {
                return Err(Error::Hypothesis(
                    "maximization needs non-negative coefficients unless mixed signs are allowed"
                        .into(),
                ))
            }
        };
        Ok(Problem {
            original: p.clone(),
            compiled: CompiledPoly::new(&reduced),
            reduced,
            free,
            sense,
            method,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Number of free coordinates.
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn free_coordinates(&self) -> &[usize] {
        &self.free
    }

    /// Structured seeds in reduced coordinates: the point uniform on the first
    /// `m` free coordinates for each `m`, then the point proportional to the
    /// largest exponent of each variable.
    pub fn structured_seeds(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut seeds = Vec::with_capacity(d + 1);
        for m in 1..=d {
            let mut x = alloc::vec![0.0; d];
            x[..m].iter_mut().for_each(|v| *v = 1.0 / m as f64);
            seeds.push(x);
        }
        let exps = self.reduced.max_exponents();
        let total: u32 = exps.iter().sum();
        if total > 0 {
            seeds.push(exps.iter().map(|&e| e as f64 / total as f64).collect());
        }
        seeds
    }

    /// Every start, in reduced coordinates: structured seeds, then the
    /// caller's extra starts (full coordinates; dropped if they put all mass on
    /// forced coordinates), then `cfg.starts` uniform random points.
    pub fn starts(&self, cfg: &OptimizerConfig, extra: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut starts = self.structured_seeds();
        for full in extra {
            if full.len() != self.original.num_vars() {
                continue;
            }
            let x: Vec<f64> = self.free.iter().map(|&i| full[i].max(0.0)).collect();
            let s: f64 = x.iter().sum();
            if s > 0.0 {
                starts.push(x.iter().map(|v| v / s).collect());
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.starts {
            starts.push(uniform_simplex_point(&mut rng, self.dim()));
        }
        starts
    }

    /// Runs one start to convergence (or `cfg.max_iters`).
    pub fn run(&self, start: &[f64], cfg: &OptimizerConfig) -> StartOutcome {
        let mut x = start.to_vec();
        snap_and_normalize(&mut x);
        match self.method {
            Method::MultiplicativeUpdate => self.multiplicative(x, cfg),
            Method::ProjectedGradient => self.projected_gradient(x, cfg),
        }
    }

    fn multiplicative(&self, mut x: Vec<f64>, cfg: &OptimizerConfig) -> StartOutcome {
        let d = self.dim();
        let mut grad = alloc::vec![0.0; d];
        let mut next = alloc::vec![0.0; d];
        let mut value = self.compiled.value(&x);
        let mut iterations = 0;
        while iterations < cfg.max_iters {
            value = self.compiled.value_and_gradient(&x, &mut grad);
            let denom: f64 = x.iter().zip(&grad).map(|(a, g)| a * g).sum();
            if !(denom > 0.0) {
                break;
            }
            for i in 0..d {
                next[i] = x[i] * grad[i] / denom;
            }
            snap_and_normalize(&mut next);
            iterations += 1;
            let step = max_abs_diff(&x, &next);
            if cfg!(debug_assertions) {
                let new_value = self.compiled.value(&next);
                debug_assert!(
                    new_value >= value - 1e-12 * value.abs().max(1.0),
                    "multiplicative update decreased the objective: {value} -> {new_value}"
                );
            }
            core::mem::swap(&mut x, &mut next);
            if step < cfg.step_tol {
                value = self.compiled.value(&x);
                break;
            }
        }
        if iterations == cfg.max_iters {
            value = self.compiled.value(&x);
        }
        StartOutcome {
            value,
            point: x,
            iterations,
        }
    }

    fn projected_gradient(&self, mut x: Vec<f64>, cfg: &OptimizerConfig) -> StartOutcome {
        // minimize `sign · P`
        let sign = match self.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let d = self.dim();
        let mut grad = alloc::vec![0.0; d];
        let mut trial = alloc::vec![0.0; d];
        let mut t = 1.0f64;
        let mut iterations = 0;
        let mut fx = sign * self.compiled.value(&x);
        while iterations < cfg.max_iters {
            fx = sign * self.compiled.value_and_gradient(&x, &mut grad);
            grad.iter_mut().for_each(|g| *g *= sign);
            let mut accepted = false;
            while t > 1e-20 {
                for i in 0..d {
                    trial[i] = x[i] - t * grad[i];
                }
                project_onto_simplex(&mut trial);
                snap_and_normalize(&mut trial);
                let decrease: f64 = (0..d).map(|i| grad[i] * (x[i] - trial[i])).sum();
                let ft = sign * self.compiled.value(&trial);
                if ft <= fx - 1e-4 * decrease {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            iterations += 1;
            if !accepted {
                break;
            }
            let step = max_abs_diff(&x, &trial);
            core::mem::swap(&mut x, &mut trial);
            fx = sign * self.compiled.value(&x);
            t = (t * 2.0).min(1e6);
            if step < cfg.step_tol {
                break;
            }
        }
        StartOutcome {
            value: sign * fx,
            point: x,
            iterations,
        }
    }

    /// Picks the best outcome. Outcomes whose value is within
    /// `value_tol · max(1, |best|)` of the best are tied; among those the one
    /// whose coordinates sorted in descending order are lexicographically
    /// smallest wins, then the lowest start index.
    pub fn reduce(&self, outcomes: &[StartOutcome], cfg: &OptimizerConfig) -> Result<Optimum> {
        let better = |a: f64, b: f64| match self.sense {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        };
        let best = outcomes
            .iter()
            .map(|o| o.value)
            .filter(|v| v.is_finite())
            .fold(None, |acc: Option<f64>, v| match acc {
                Some(b) if !better(v, b) => Some(b),
                _ => Some(v),
            })
            .ok_or_else(|| Error::Inconsistency("no start produced a finite value".into()))?;
        let tol = cfg.value_tol * best.abs().max(1.0);
        let mut winner: Option<(Vec<f64>, usize)> = None;
        for (idx, o) in outcomes.iter().enumerate() {
            if !(abs(o.value - best) <= tol) {
                continue;
            }
            let key = sorted_desc(&o.point);
            let replace = match &winner {
                None => true,
                Some((k, _)) => lex_cmp(&key, k) == Ordering::Less,
            };
            if replace {
                winner = Some((key, idx));
            }
        }
        let (_, idx) = winner.expect("the best outcome is always tied with itself");
        let coords = self.expand(&outcomes[idx].point);
        let value = self.original.evaluate(&coords)?;
        Ok(Optimum {
            value,
            witness: SimplexPoint::new(coords)?,
            starts_used: outcomes.len(),
            iterations: outcomes.iter().map(|o| o.iterations).sum(),
        })
    }

    /// Reduced coordinates to full coordinates (forced ones set to zero).
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = alloc::vec![0.0; self.original.num_vars()];
        for (&i, &v) in self.free.iter().zip(reduced) {
            full[i] = v;
        }
        full
    }

    /// Runs every start through `exec` and reduces.
    pub fn solve<E: Executor>(
        &self,
        exec: &E,
        cfg: &OptimizerConfig,
        extra: &[Vec<f64>],
    ) -> Result<Optimum> {
        cfg.validate()?;
        let starts = self.starts(cfg, extra);
        let outcomes = exec.map_indexed(starts.len(), |i| self.run(&starts[i], cfg));
        self.reduce(&outcomes, cfg)
    }
}

/// Best value of `p` found on the simplex with `forced_zero` coordinates pinned
/// to zero. `p` must have non-negative coefficients.
pub fn maximize_on_simplex(
    p: &SparsePolynomial,
    forced_zero: &[usize],
    cfg: &OptimizerConfig,
) -> Result<Optimum> {
    Problem::new(p, forced_zero, Sense::Maximize, false)?.solve(&Sequential, cfg, &[])
}

pub fn minimize_on_simplex(p: &SparsePolynomial, cfg: &OptimizerConfig) -> Result<Optimum> {
    Problem::new(p, &[], Sense::Minimize, true)?.solve(&Sequential, cfg, &[])
}

/// The structured seeds of [`Problem::structured_seeds`] in full coordinates.
pub fn structured_seeds(p: &SparsePolynomial, forced_zero: &[usize]) -> Result<Vec<SimplexPoint>> {
    let problem = Problem::new(p, forced_zero, Sense::Minimize, true)?;
    problem
        .structured_seeds()
        .iter()
        .map(|x| SimplexPoint::new(problem.expand(x)))
        .collect()
}

/// A Dirichlet(1, …, 1) sample: the spacings of sorted uniforms.
fn uniform_simplex_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..dim - 1).map(|_| rng.random::<f64>()).collect();
    cuts.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut point = Vec::with_capacity(dim);
    let mut prev = 0.0;
    for c in cuts {
        point.push(c - prev);
        prev = c;
    }
    point.push(1.0 - prev);
    point
}

/// Euclidean projection onto the simplex.
pub(crate) fn project_onto_simplex(x: &mut [f64]) {
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.iter_mut().for_each(|v| *v = (*v - theta).max(0.0));
}

fn snap_and_normalize(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < SNAP_THRESHOLD {
            *v = 0.0;
        }
    }
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| abs(x - y)).fold(0.0, f64::max)
}

fn sorted_desc(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    v
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}
