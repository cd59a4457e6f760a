//! JSON/CSV/text report formats.
//!
//! Every report carries the resolved [`RunConfig`] it was produced with, and
//! every report type re-validates after a JSON round trip. Big integers are
//! written as JSON numbers when they fit in an `i64` and as decimal strings
//! otherwise.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use permpack_core::bounds::{BoundResult, BoundSequence, ClosedForm, HypothesisPath};
use permpack_core::layered::{Block, BlockSeq, QuasiBlockSeq};
use permpack_core::oracle::{ErdosSzekeresScan, ExtremalMode, ExtremalReport, Sandwich, UpperMethod};
use permpack_core::perm::{DensityValue, Permutation};
use permpack_core::poly::SparsePolynomial;
use permpack_core::simplex::{OptimizerConfig, SIMPLEX_SUM_TOL};
use permpack_core::Rational;

/// Relative agreement required between a float and its exact counterpart.
const FLOAT_AGREEMENT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntDto {
    Small(i64),
    Big(String),
}

impl IntDto {
    pub fn from_big(x: &BigInt) -> Self {
        match x.to_i64() {
            Some(v) => IntDto::Small(v),
            None => IntDto::Big(x.to_string()),
        }
    }

    pub fn to_big(&self) -> Result<BigInt, String> {
        match self {
            IntDto::Small(v) => Ok(BigInt::from(*v)),
            IntDto::Big(s) => s.parse().map_err(|_| format!("{s:?} is not an integer")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalDto {
    pub num: IntDto,
    pub den: IntDto,
}

impl RationalDto {
    pub fn new(x: &Rational) -> Self {
        RationalDto {
            num: IntDto::from_big(x.numer()),
            den: IntDto::from_big(x.denom()),
        }
    }

    /// The rational, provided the fraction is in lowest terms with a positive
    /// denominator.
    pub fn to_rational(&self) -> Result<Rational, String> {
        let num = self.num.to_big()?;
        let den = self.den.to_big()?;
        if !den.is_positive() {
            return Err(format!("denominator {den} is not positive"));
        }
        let r = Rational::new(num.clone(), den.clone());
        if *r.numer() != num || *r.denom() != den {
            return Err(format!("{num}/{den} is not in lowest terms"));
        }
        Ok(r)
    }
}

fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn check_float(label: &str, float: f64, exact: &Rational) -> Result<(), String> {
    let e = to_f64(exact);
    if !float.is_finite() || (float - e).abs() > FLOAT_AGREEMENT * e.abs().max(1.0) {
        return Err(format!("{label}: float {float} disagrees with exact {exact}"));
    }
    Ok(())
}

fn fmt_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// `{"num", "den", "float"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityDto {
    pub num: IntDto,
    pub den: IntDto,
    pub float: f64,
}

impl DensityDto {
    pub fn new(d: &DensityValue) -> Self {
        let r = RationalDto::new(&d.exact);
        DensityDto {
            num: r.num,
            den: r.den,
            float: d.float,
        }
    }

    pub fn exact(&self) -> Result<Rational, String> {
        RationalDto {
            num: self.num.clone(),
            den: self.den.clone(),
        }
        .to_rational()
    }

    pub fn validate(&self) -> Result<(), String> {
        let exact = self.exact()?;
        if exact.is_negative() {
            return Err("negative density".into());
        }
        check_float("density", self.float, &exact)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDto {
    pub len: usize,
    pub anti: bool,
}

impl BlockDto {
    pub fn new(b: &Block) -> Self {
        BlockDto {
            len: b.len,
            anti: b.anti,
        }
    }

    pub fn block(&self) -> Block {
        Block {
            len: self.len,
            anti: self.anti,
        }
    }
}

pub fn blocks_dto(blocks: &[Block]) -> Vec<BlockDto> {
    blocks.iter().map(BlockDto::new).collect()
}

/// Re-validates a block sequence through the core constructor.
pub fn block_seq_from_dto(blocks: &[BlockDto]) -> Result<BlockSeq, String> {
    BlockSeq::new(blocks.iter().map(BlockDto::block).collect()).map_err(|e| e.to_string())
}

pub fn quasi_blocks_from_dto(items: &[BlockDto]) -> Result<QuasiBlockSeq, String> {
    QuasiBlockSeq::new(items.iter().map(BlockDto::block).collect()).map_err(|e| e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDto {
    pub c: RationalDto,
    pub e: Vec<u32>,
}

/// `{"vars": n, "terms": [{"c": {"num", "den"}, "e": [...]}, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyDto {
    pub vars: usize,
    pub terms: Vec<TermDto>,
}

impl PolyDto {
    pub fn new(p: &SparsePolynomial) -> Self {
        PolyDto {
            vars: p.num_vars(),
            terms: p
                .terms()
                .iter()
                .map(|t| TermDto {
                    c: RationalDto::new(&t.coeff),
                    e: t.exponents.clone(),
                })
                .collect(),
        }
    }

    /// Rebuilds the polynomial; the dump must already be in canonical form.
    pub fn to_polynomial(&self) -> Result<SparsePolynomial, String> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok((t.c.to_rational()?, t.e.clone())))
            .collect::<Result<Vec<_>, String>>()?;
        let p = SparsePolynomial::from_terms(self.vars, terms).map_err(|e| e.to_string())?;
        if PolyDto::new(&p) != *self {
            return Err("polynomial terms are not canonical (sorted, merged, non-zero)".into());
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerDto {
    pub starts: usize,
    pub max_iters: usize,
    pub step_tol: f64,
    pub value_tol: f64,
    pub seed: u64,
}

impl OptimizerDto {
    pub fn new(c: &OptimizerConfig) -> Self {
        OptimizerDto {
            starts: c.starts,
            max_iters: c.max_iters,
            step_tol: c.step_tol,
            value_tol: c.value_tol,
            seed: c.seed,
        }
    }

    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            starts: self.starts,
            max_iters: self.max_iters,
            step_tol: self.step_tol,
            value_tol: self.value_tol,
            seed: self.seed,
        }
    }
}

/// The fully resolved invocation, echoed in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub format: String,
    pub threads: usize,
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerDto>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.command.is_empty() {
            return Err("empty command".into());
        }
        if !matches!(self.format.as_str(), "json" | "csv" | "text") {
            return Err(format!("unknown format {:?}", self.format));
        }
        if self.threads == 0 {
            return Err("zero threads".into());
        }
        if let Some(o) = &self.optimizer {
            o.config().validate().map_err(|e| e.to_string())?;
        }
        Ok(())
    }
}

/// `{"mode","n","W","value","exact","witness","starts_used","iterations"}`,
/// with `W` 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResultDto {
    pub mode: String,
    pub n: usize,
    #[serde(rename = "W")]
    pub w: Vec<usize>,
    pub value: f64,
    pub exact: Option<RationalDto>,
    pub witness: Vec<f64>,
    pub starts_used: usize,
    pub iterations: usize,
}

impl BoundResultDto {
    pub fn new(r: &BoundResult) -> Self {
        BoundResultDto {
            mode: r.mode.name().to_string(),
            n: r.n,
            w: r.forced.iter().map(|j| j + 1).collect(),
            value: r.value,
            exact: r.exact_value.as_ref().map(RationalDto::new),
            witness: r.witness.coords().to_vec(),
            starts_used: r.starts_used,
            iterations: r.iterations,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let dim = match self.mode.as_str() {
            "pack" | "min" => self.n,
            "pack-ext" => 2 * self.n,
            other => return Err(format!("unknown bound mode {other:?}")),
        };
        if self.n == 0 {
            return Err("order n must be positive".into());
        }
        if self.witness.len() != dim {
            return Err(format!("witness has {} coordinates, expected {dim}", self.witness.len()));
        }
        if self.mode != "pack-ext" && !self.w.is_empty() {
            return Err("W is only meaningful for pack-ext".into());
        }
        if !self.w.windows(2).all(|p| p[0] < p[1]) {
            return Err("W must be strictly increasing".into());
        }
        for &j in &self.w {
            if j == 0 || j > self.n {
                return Err(format!("W entry {j} outside 1..={}", self.n));
            }
            if self.witness[2 * (j - 1)] != 0.0 {
                return Err(format!("antilayer slot of W entry {j} is not zero"));
            }
        }
        if !self.witness.iter().all(|c| c.is_finite() && *c >= 0.0) {
            return Err("witness has a negative or non-finite coordinate".into());
        }
        let sum: f64 = self.witness.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(format!("witness sums to {sum}"));
        }
        if !self.value.is_finite() {
            return Err("value is not finite".into());
        }
        if let Some(e) = &self.exact {
            check_float("bound", self.value, &e.to_rational()?)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalDto {
    #[serde(rename = "N")]
    pub n: usize,
    pub mode: String,
    pub value: RationalDto,
    pub float: f64,
    pub witnesses: Vec<String>,
    pub witness_count: u64,
}

impl ExtremalDto {
    pub fn new(r: &ExtremalReport) -> Self {
        ExtremalDto {
            n: r.n,
            mode: r.mode.name().to_string(),
            value: RationalDto::new(&r.value),
            float: to_f64(&r.value),
            witnesses: r.witnesses.iter().map(|w| w.to_string()).collect(),
            witness_count: r.witness_count,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if ![
            ExtremalMode::MaxAll,
            ExtremalMode::MaxLayered,
            ExtremalMode::MinAll,
            ExtremalMode::MinLayered,
        ]
        .iter()
        .any(|m| m.name() == self.mode)
        {
            return Err(format!("unknown extremal mode {:?}", self.mode));
        }
        check_float("extremal value", self.float, &self.value.to_rational()?)?;
        let perms = self
            .witnesses
            .iter()
            .map(|w| w.parse::<Permutation>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        if perms.iter().any(|p| p.len() != self.n) {
            return Err(format!("a witness does not have length {}", self.n));
        }
        if !perms.windows(2).all(|w| w[0] < w[1]) {
            return Err("witnesses are not strictly increasing".into());
        }
        if (self.witness_count as usize) < perms.len() || (self.witness_count > 0) == perms.is_empty() {
            return Err("witness count disagrees with the witness list".into());
        }
        Ok(())
    }

    fn csv_row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            int_text(&self.value.num),
            int_text(&self.value.den),
            self.witness_count.to_string(),
        ]
    }
}

fn int_text(x: &IntDto) -> String {
    match x {
        IntDto::Small(v) => v.to_string(),
        IntDto::Big(s) => s.clone(),
    }
}

/// A complete, self-describing command output.
pub trait Report: Serialize + DeserializeOwned + PartialEq + Debug {
    fn config(&self) -> &RunConfig;

    /// Checks the report's own invariants.
    fn check(&self) -> Result<(), String>;

    fn text_body(&self) -> String;

    /// Column names and rows, for reports with a tabular form.
    fn csv_table(&self) -> Option<(Vec<&'static str>, Vec<Vec<String>>)> {
        None
    }

    fn validate(&self) -> Result<(), String> {
        self.config().validate()?;
        self.check()
    }
}

pub fn render_json<R: Report>(r: &R) -> String {
    serde_json::to_string_pretty(r).expect("reports always serialize")
}

/// CSV with the run configuration as a leading `#` comment line.
pub fn render_csv<R: Report>(r: &R) -> Option<String> {
    let (header, rows) = r.csv_table()?;
    let mut out = format!(
        "# config: {}\n",
        serde_json::to_string(r.config()).expect("configs always serialize")
    );
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Some(out)
}

pub fn render_text<R: Report>(r: &R) -> String {
    let c = r.config();
    let mut out = format!("command: {}\n", c.command);
    for (k, v) in &c.params {
        let _ = writeln!(out, "  {k} = {v}");
    }
    if let Some(o) = &c.optimizer {
        let _ = writeln!(
            out,
            "  optimizer = starts {} max_iters {} step_tol {:e} value_tol {:e} seed {}",
            o.starts, o.max_iters, o.step_tol, o.value_tol, o.seed
        );
    }
    let _ = writeln!(out, "  threads = {}", c.threads);
    out.push_str(&r.text_body());
    out
}

/// Serializes, re-parses and re-validates; used by the tests and by `--check`.
pub fn round_trip<R: Report>(r: &R) -> Result<R, String> {
    let text = serde_json::to_string(r).map_err(|e| e.to_string())?;
    let back: R = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    back.validate()?;
    if back != *r {
        return Err("report changed across a JSON round trip".into());
    }
    Ok(back)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub config: RunConfig,
    pub pattern: String,
    pub host: String,
    pub count: u64,
    pub p: String,
    pub density: DensityDto,
}

impl Report for DensityReport {
    fn config(&self) -> &RunConfig {
        &self.config
    }

    fn check(&self) -> Result<(), String> {
        self.density.validate()?;
        let pattern: Permutation = self.pattern.parse().map_err(|e: permpack_core::Error| e.to_string())?;
        let host: Permutation = self.host.parse().map_err(|e: permpack_core::Error| e.to_string())?;
        let exact = self.density.exact()?;
        if fmt_rational(&exact) != self.p {
            return Err(format!("p = {:?} disagrees with {exact}", self.p));
        }
        if pattern.len() <= host.len() {
            let total = permpack_core::perm::DensityValue::from_count(self.count, pattern.len(), host.len());
            if total.exact != exact {
                return Err("count and density disagree".into());
            }
        } else if self.count != 0 || !exact.is_zero() {
            return Err("a longer pattern cannot occur".into());
        }
        Ok(())
    }

    fn text_body(&self) -> String {
        format!(
            "count({}, {}) = {}\np = {} ≈ {}\n",
            self.pattern, self.host, self.count, self.p, self.density.float
        )
    }

    fn csv_table(&self) -> Option<(Vec<&'static str>, Vec<Vec<String>>)> {
        Some((
            vec!["pattern", "host", "count", "p_num", "p_den", "p_float"],
            vec![vec![
                self.pattern.clone(),
                self.host.clone(),
                self.count.to_string(),
                int_text(&self.density.num),
                int_text(&self.density.den),
                self.density.float.to_string(),
            ]],
        ))
    }
}

impl DensityReport {
    pub fn new(config: RunConfig, pattern: &Permutation, host: &Permutation, count: u64, d: &DensityValue) -> Self {
        DensityReport {
            config,
            pattern: pattern.to_string(),
            host: host.to_string(),
            count,
            p: fmt_rational(&d.exact),
            density: DensityDto::new(d),
        }
    }
}

fn bound_rows(entries: &[BoundResultDto]) -> Vec<Vec<String>> {
    entries
        .iter()
        .map(|e| {
            let (num, den) = e
                .exact
                .as_ref()
                .map(|x| (int_text(&x.num), int_text(&x.den)))
                .unwrap_or_default();
            vec![
                e.mode.clone(),
                e.n.to_string(),
                e.w.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(" "),
                e.value.to_string(),
                num,
                den,
                e.witness.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
            ]
        })
        .collect()
}

const BOUND_COLUMNS: [&str; 7] = ["mode", "n", "W", "value", "exact_num", "exact_den", "witness"];

fn bound_text(e: &BoundResultDto) -> String {
    let exact = e
        .exact
        .as_ref()
        .and_then(|x| x.to_rational().ok())
        .map(|x| format!(" = {}", fmt_rational(&x)))
        .unwrap_or_default();
    format!(
        "{} n={} W={:?}: {}{} at {:?} ({} starts, {} iterations)\n",
        e.mode, e.n, e.w, e.value, exact, e.witness, e.starts_used, e.iterations
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub config: RunConfig,
    pub result: BoundResultDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<PolyDto>,
}

impl Report for BoundReport {
    fn config(&self) -> &RunConfig {
        &self.config
    }

    fn check(&self) -> Result<(), String> {
        self.result.validate()?;
        if let Some(p) = &self.polynomial {
            let poly = p.to_polynomial()?;
            if poly.num_vars() != self.result.witness.len() {
                return Err("polynomial and witness dimensions differ".into());
            }
            let v = poly.evaluate(&self.result.witness).map_err(|e| e.to_string())?;
            if (v - self.result.value).abs() > 1e-10 {
                return Err(format!("polynomial at the witness is {v}, not {}", self.result.value));
            }
        }
        Ok(())
    }

    fn text_body(&self) -> String {
        bound_text(&self.result)
    }

    fn csv_table(&self) -> Option<(Vec<&'static str>, Vec<Vec<String>>)> {
        Some((BOUND_COLUMNS.to_vec(), bound_rows(std::slice::from_ref(&self.result))))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSeqReport {
    pub config: RunConfig,
    pub mode: String,
    pub entries: Vec<BoundResultDto>,
    pub monotone: bool,
    pub diagnostics: Vec<String>,
}

impl BoundSeqReport {
    pub fn new(config: RunConfig, s: &BoundSequence) -> Self {
        BoundSeqReport {
            config,
            mode: s.mode.name().to_string(),
            entries: s.entries.iter().map(BoundResultDto::new).collect(),
            monotone: s.monotone,
            diagnostics: s.diagnostics.clone(),
        }
    }
}

impl Report for BoundSeqReport {
    fn config(&self) -> &RunConfig {
        &self.config
    }

    fn check(&self) -> Result<(), String> {
        for (i, e) in self.entries.iter().enumerate() {
            e.validate()?;
            if e.mode != self.mode || e.n != i + 1 {
                return Err(format!("entry {i} has mode {} and order {}", e.mode, e.n));
            }
        }
        if self.monotone != self.diagnostics.is_empty() && self.monotone {
            return Err("a monotone sequence should carry no diagnostics".into());
        }
        Ok(())
    }

    fn text_body(&self) -> String {
        let mut out: String = self.entries.iter().map(bound_text).collect();
        let _ = writeln!(out, "monotone: {}", self.monotone);
        for d in &self.diagnostics {
            let _ = writeln!(out, "diagnostic: {d}");
        }
        out
    }

    fn csv_table(&self) -> Option<(Vec<&'static str>, Vec<Vec<String>>)> {
        Some((BOUND_COLUMNS.to_vec(), bound_rows(&self.entries)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormReport {
    pub config: RunConfig,
    pub blocks: Vec<BlockDto>,
    pub value: RationalDto,
    pub float: f64,
    pub path: String,
    pub reversed: bool,
}

impl ClosedFormReport {
    pub fn new(config: RunConfig, blocks: &BlockSeq, c: &ClosedForm) -> Self {
        let path = match c.path {
            HypothesisPath::SingleAntilayer { a, k } => format!("single-antilayer a={a} k={k}"),
            HypothesisPath::LayersOnly { min_layer, k } => format!("layers-only l1={min_layer} k={k}"),
            HypothesisPath::SingleBlock => "single-block".to_string(),
        };
        ClosedFormReport {
            config,
            blocks: blocks_dto(blocks.blocks()),
            value: RationalDto::new(&c.value),
            float: to_f64(&c.value),
            path,
            reversed: c.reversed,
        }
    }
}

impl Report for ClosedFormReport {
    fn config(&self) -> &RunConfig {
        &self.config
    }

    fn check(&self) -> Result<(), String> {
        let blocks = block_seq_from_dto(&self.blocks)?;
        let value = self.value.to_rational()?;
        check_float("closed form", self.float, &value)?;
        let again = permpack_core::bounds::closed_form_packing(&blocks).map_err(|e| e.to_string())?;
        if again.value != value || again.reversed != self.reversed {
            return Err("closed form does not match its block sequence".into());
        }
        Ok(())
    }

    fn text_body(&self) -> String {
        let value = self.value.to_rational().map(|v| fmt_rational(&v)).unwrap_or_default();
        format!(
            "p = {} ≈ {} ({}{})\n",
            value,
            self.float,
            self.path,
            if self.reversed { ", reversed" } else { "" }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMonoReport {
    pub config: RunConfig,
    pub l: usize,
    pub k: usize,
    pub value: RationalDto,
    pub float: f64,
}

impl Report for MinMonoReport {
    fn config(&self) -> &RunConfig {
        &self.config
    }

    fn check(&self) -> Result<(), String> {
        let value = self.value.to_rational()?;
        check_float("minimum", self.float, &value)?;
        let again = permpack_core::bounds::min_mono_value(self.l, self.k).map_err(|e| e.to_string())?;
        if again != value {
            return Err("value does not match (l, k)".into());
        }
        Ok(())
    }

    fn text_body(&self) -> String {
        let value = self.value.to_rational().map(|v| fmt_rational(&v)).unwrap_or_default();
        format!("p''(Id_{} + Rev_{}) = {} ≈ {}\n", self.l, self.k, value, self.float)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalCmdReport {
    pub config: RunConfig,
    pub report: ExtremalDto,
}

impl Report for ExtremalCmdReport {
    fn config(&self) -> &RunConfig {
        &self.config
    }

    fn check(&self) -> Result<(), String> {
        self.report.validate()
    }

    fn text_body(&self) -> String {
        extremal_text(&self.report)
    }

    fn csv_table(&self) -> Option<(Vec<&'static str>, Vec<Vec<String>>)> {
        Some((
            vec!["N", "value_num", "value_den", "witness_count"],
            vec![self.report.csv_row()],
        ))
    }
}

fn extremal_text(r: &ExtremalDto) -> String {
    let value = r.value.to_rational().map(|v| fmt_rational(&v)).unwrap_or_default();
    let shown = r.witnesses.len();
    format!(
        "{} N={}: {} ≈ {}\nwitnesses ({} of {}): {}\n",
        r.mode,
        r.n,
        value,
        r.float,
        shown,
        r.witness_count,
        r.witnesses.join(" ")
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QBlocksReport {
    pub config: RunConfig,
    pub sigma: String,
    pub blocks: Vec<BlockDto>,
    pub count: u64,
    pub decompositions: Vec<Vec<BlockDto>>,
}

impl QBlocksReport {
    pub fn new(config: RunConfig, sigma: &Permutation, blocks: &BlockSeq, decomps: &[QuasiBlockSeq]) -> Self {
        QBlocksReport {
            config,
            sigma: sigma.to_string(),
            blocks: blocks_dto(blocks.blocks()),
            count: decomps.len() as u64,
            decompositions: decomps.iter().map(|d| blocks_dto(d.items())).collect(),
        }
    }
}

impl Report for QBlocksReport {
    fn config(&self) -> &RunConfig {
        &self.config
    }

    fn check(&self) -> Result<(), String> {
        let sigma: Permutation = self.sigma.parse().map_err(|e: permpack_core::Error| e.to_string())?;
        let blocks = block_seq_from_dto(&self.blocks)?;
        if blocks.to_permutation() != sigma {
            return Err("block sequence does not realize sigma".into());
        }
        if self.count != self.decompositions.len() as u64 {
            return Err("count disagrees with the decomposition list".into());
        }
        for d in &self.decompositions {
            if quasi_blocks_from_dto(d)?.coarsen() != blocks {
                return Err("a decomposition does not coarsen to the block sequence".into());
            }
        }
        Ok(())
    }

    fn text_body(&self) -> String {
        let mut out = format!("{} decompositions of {}\n", self.count, self.sigma);
        for d in &self.decompositions {
            if let Ok(q) = quasi_blocks_from_dto(d) {
                let _ = writeln!(out, "  {q}");
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub config: RunConfig,
    pub lower: f64,
    pub lower_exact: Option<RationalDto>,
    pub lower_plain: BoundResultDto,
    pub lower_extended: BoundResultDto,
    pub upper: ExtremalDto,
    pub upper_method: String,
}

impl SandwichReport {
    pub fn new(config: RunConfig, s: &Sandwich) -> Self {
        SandwichReport {
            config,
            lower: s.lower,
            lower_exact: s.lower_exact.as_ref().map(RationalDto::new),
            lower_plain: BoundResultDto::new(&s.lower_plain),
            lower_extended: BoundResultDto::new(&s.lower_extended),
            upper: ExtremalDto::new(&s.upper),
            upper_method: match s.upper_method {
                UpperMethod::AllPermutations => "all-permutations",
                UpperMethod::Layered => "layered",
            }
            .to_string(),
        }
    }
}

impl Report for SandwichReport {
    fn config(&self) -> &RunConfig {
        &self.config
    }

    fn check(&self) -> Result<(), String> {
        self.lower_plain.validate()?;
        self.lower_extended.validate()?;
        self.upper.validate()?;
        if self.lower != self.lower_plain.value.max(self.lower_extended.value) {
            return Err("lower end is not the better of the two bounds".into());
        }
        if let Some(e) = &self.lower_exact {
            check_float("lower", self.lower, &e.to_rational()?)?;
        }
        if !matches!(self.upper_method.as_str(), "all-permutations" | "layered") {
            return Err(format!("unknown upper method {:?}", self.upper_method));
        }
        if self.lower > self.upper.float + permpack_core::oracle::SANDWICH_TOL {
            return Err("lower end exceeds upper end".into());
        }
        Ok(())
    }

    fn text_body(&self) -> String {
        let upper = self.upper.value.to_rational().map(|v| fmt_rational(&v)).unwrap_or_default();
        format!(
            "{} <= p(f) <= {} ≈ {} (upper from {}, N = {})\n",
            self.lower, upper, self.upper.float, self.upper_method, self.upper.n
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErdosSzekeresReport {
    pub config: RunConfig,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub all_contain: bool,
    pub counterexample: Option<String>,
}

impl ErdosSzekeresReport {
    pub fn new(config: RunConfig, s: &ErdosSzekeresScan) -> Self {
        ErdosSzekeresReport {
            config,
            n: s.n,
            k: s.k,
            all_contain: s.all_contain,
            counterexample: s.counterexample.as_ref().map(|p| p.to_string()),
        }
    }
}

impl Report for ErdosSzekeresReport {
    fn config(&self) -> &RunConfig {
        &self.config
    }

    fn check(&self) -> Result<(), String> {
        match (&self.counterexample, self.all_contain) {
            (None, true) => Ok(()),
            (Some(c), false) => {
                let p: Permutation = c.parse().map_err(|e: permpack_core::Error| e.to_string())?;
                let mono = |q: Permutation| permpack_core::perm::contains(&q, &p);
                if p.len() != self.n
                    || mono(Permutation::identity(self.k + 1))
                    || mono(Permutation::reverse(self.k + 1))
                {
                    return Err(format!("{c} is not a counterexample"));
                }
                Ok(())
            }
            _ => Err("all_contain and counterexample disagree".into()),
        }
    }

    fn text_body(&self) -> String {
        match &self.counterexample {
            None => format!(
                "every permutation of length {} has a monotone subsequence of length {}\n",
                self.n,
                self.k + 1
            ),
            Some(c) => format!(
                "{c} has no monotone subsequence of length {}\n",
                self.k + 1
            ),
        }
    }
}
