//! Command-line parsing and dispatch.

use std::collections::BTreeMap;
use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};

use permpack_core::bounds::{
    bound_sequence, closed_form_packing, extended_price_bound, min_mono_value, min_price_bound,
    price_bound, BoundConfig, BoundMode, ForcedPolicy,
};
use permpack_core::layered::{block_sequence, enumerate_quasi_blocks, BlockSeq};
use permpack_core::oracle::{
    brute_force_pn, brute_force_pn_layered, erdos_szekeres_scan, sandwich_report, Extremum,
};
use permpack_core::perm::{count_occurrences, density, FormalCombination, Permutation};
use permpack_core::poly::{combine, PolyKind};
use permpack_core::simplex::OptimizerConfig;

use crate::error::{CliError, EXIT_INTERNAL, EXIT_OK, EXIT_PARSE};
use crate::exec::Parallel;
use crate::report::{
    render_csv, render_json, render_text, BoundReport, BoundResultDto, BoundSeqReport,
    ClosedFormReport, DensityReport, ErdosSzekeresReport, ExtremalCmdReport, ExtremalDto,
    MinMonoReport, OptimizerDto, PolyDto, QBlocksReport, RationalDto, Report, RunConfig,
    SandwichReport,
};

#[derive(Debug, Parser)]
#[command(
    name = "permpack",
    version,
    about = "Pattern densities, Price bounds and exhaustive extremal searches for permutations"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OptArgs {
    /// Random starts in addition to the structured seeds.
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Values this close count as ties.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

impl OptArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            starts: self.starts,
            max_iters: self.max_iters,
            value_tol: self.tol,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundModeArg {
    Pack,
    PackExt,
    Min,
}

impl BoundModeArg {
    fn mode(self) -> BoundMode {
        match self {
            BoundModeArg::Pack => BoundMode::Pack,
            BoundModeArg::PackExt => BoundMode::PackExtended,
            BoundModeArg::Min => BoundMode::Minimize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// `W_n = ∅`.
    None,
    /// `W_n = [n] ∖ {1}`.
    AllButFirst,
    /// `W_n = [n]`.
    All,
}

impl PolicyArg {
    fn policy(self) -> ForcedPolicy {
        match self {
            PolicyArg::None => ForcedPolicy::None,
            PolicyArg::AllButFirst => ForcedPolicy::AllButFirst,
            PolicyArg::All => ForcedPolicy::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExtremalModeArg {
    #[value(alias = "max")]
    MaxAll,
    MaxLayered,
    #[value(alias = "min")]
    MinAll,
    MinLayered,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Occurrences and density of one permutation in another.
    Density { pattern: String, host: String },
    /// A Price bound of one order.
    Bound {
        /// Combination such as "1*123 + 1*321".
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(long, value_enum)]
        mode: BoundModeArg,
        #[arg(long)]
        n: usize,
        /// Pinned antilayer slots (1-based, comma separated); pack-ext only.
        #[arg(long = "W", value_delimiter = ',')]
        w: Vec<usize>,
        /// Include the optimized polynomial in the report.
        #[arg(long)]
        dump_poly: bool,
        /// Accept non-conical combinations.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Price bounds of orders 1..=n-max with a monotonicity check.
    BoundSeq {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(long, value_enum)]
        mode: BoundModeArg,
        #[arg(long)]
        n_max: usize,
        /// Pinned antilayer slots at each order (pack-ext only).
        #[arg(long, value_enum, default_value_t = PolicyArg::None)]
        policy: PolicyArg,
        /// Accept non-conical combinations; monotonicity is then not enforced.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Exact packing density from a block sequence such as "^2 2".
    ClosedForm {
        #[arg(allow_hyphen_values = true)]
        blocks: String,
    },
    /// Layered minimum density of Id_l + Rev_k.
    Minmono { l: usize, k: usize },
    /// Exhaustive maximum or minimum density over permutations of length n.
    Extremal {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        mode: ExtremalModeArg,
        /// Allow one more than the default length cap.
        #[arg(long)]
        force: bool,
    },
    /// Quasi-block decompositions of a layered permutation.
    Qblocks { sigma: String },
    /// Lower Price bound and exhaustive upper bound around the packing density.
    Sandwich {
        #[arg(allow_hyphen_values = true)]
        f: String,
        /// Order of the Price bounds.
        #[arg(long)]
        n: usize,
        /// Permutation length of the exhaustive search.
        #[arg(long)]
        brute_n: usize,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Looks for a permutation without a monotone subsequence of length k+1.
    ErdosSzekeres {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn failure(err: &CliError) -> Self {
        Outcome {
            stdout: String::new(),
            stderr: format!("error: {err}\n"),
            code: err.exit_code(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { stdout: String::new(), stderr: text, code }
            } else {
                Outcome { stdout: text, stderr: String::new(), code }
            };
        }
    };
    let exec = match Parallel::from_env() {
        Ok(exec) => exec,
        Err(e) => return Outcome::failure(&e),
    };
    match dispatch(&cli, &exec) {
        Ok(outcome) => outcome,
        Err(e) => Outcome::failure(&e),
    }
}

struct Ctx<'a> {
    format: Format,
    exec: &'a Parallel,
}

impl Ctx<'_> {
    fn config(&self, command: &str, params: &[(&str, String)], opt: Option<&OptimizerConfig>) -> RunConfig {
        RunConfig {
            command: command.to_string(),
            format: self.format.name().to_string(),
            threads: self.exec.threads(),
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect::<BTreeMap<_, _>>(),
            optimizer: opt.map(OptimizerDto::new),
        }
    }

    fn emit<R: Report>(&self, report: &R) -> Result<String, CliError> {
        report
            .validate()
            .map_err(|e| CliError::Internal(format!("report failed validation: {e}")))?;
        match self.format {
            Format::Json => Ok(render_json(report) + "\n"),
            Format::Text => Ok(render_text(report)),
            Format::Csv => render_csv(report).ok_or_else(|| {
                CliError::Usage(format!("csv output is not available for {}", report.config().command))
            }),
        }
    }
}

fn parse_perm(text: &str) -> Result<Permutation, CliError> {
    Ok(text.parse()?)
}

fn parse_combination(text: &str) -> Result<FormalCombination, CliError> {
    Ok(text.parse()?)
}

fn bound_config(opt: &OptArgs, force: bool) -> Result<BoundConfig, CliError> {
    let cfg = BoundConfig {
        optimizer: opt.config(),
        force,
        ..BoundConfig::default()
    };
    cfg.optimizer
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

/// 1-based `--W` values to sorted, deduplicated 0-based indices.
fn forced_indices(w: &[usize], n: usize) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::with_capacity(w.len());
    for &j in w {
        if j == 0 || j > n {
            return Err(CliError::Usage(format!("--W entry {j} is outside 1..={n}")));
        }
        out.push(j - 1);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn dispatch(cli: &Cli, exec: &Parallel) -> Result<Outcome, CliError> {
    let ctx = Ctx {
        format: cli.format,
        exec,
    };
    let ok = |stdout: String| Outcome {
        stdout,
        stderr: String::new(),
        code: EXIT_OK,
    };
    match &cli.command {
        Command::Density { pattern, host } => {
            let tau = parse_perm(pattern)?;
            let sigma = parse_perm(host)?;
            let config = ctx.config(
                "density",
                &[("pattern", tau.to_string()), ("host", sigma.to_string())],
                None,
            );
            let report = DensityReport::new(
                config,
                &tau,
                &sigma,
                count_occurrences(&tau, &sigma),
                &density(&tau, &sigma),
            );
            ctx.emit(&report).map(ok)
        }
        Command::Bound {
            f,
            mode,
            n,
            w,
            dump_poly,
            force,
            opt,
        } => {
            let comb = parse_combination(f)?;
            let cfg = bound_config(opt, *force)?;
            if *mode != BoundModeArg::PackExt && !w.is_empty() {
                return Err(CliError::Usage("--W requires --mode pack-ext".into()));
            }
            let forced = forced_indices(w, *n)?;
            let result = match mode.mode() {
                BoundMode::Pack => price_bound(&comb, *n, &cfg, exec)?,
                BoundMode::PackExtended => extended_price_bound(&comb, *n, &forced, &cfg, exec)?,
                BoundMode::Minimize => min_price_bound(&comb, *n, &cfg, exec)?,
            };
            let polynomial = if *dump_poly {
                let kind = match mode.mode() {
                    BoundMode::PackExtended => PolyKind::Extended,
                    _ => PolyKind::Price,
                };
                Some(PolyDto::new(&combine(&comb, kind, *n)?))
            } else {
                None
            };
            let config = ctx.config(
                "bound",
                &[
                    ("f", comb.to_string()),
                    ("mode", mode.mode().name().to_string()),
                    ("n", n.to_string()),
                    ("W", join(w)),
                    ("dump_poly", dump_poly.to_string()),
                    ("force", force.to_string()),
                ],
                Some(&cfg.optimizer),
            );
            let report = BoundReport {
                config,
                result: BoundResultDto::new(&result),
                polynomial,
            };
            ctx.emit(&report).map(ok)
        }
        Command::BoundSeq {
            f,
            mode,
            n_max,
            policy,
            force,
            opt,
        } => {
            let comb = parse_combination(f)?;
            let cfg = bound_config(opt, *force)?;
            let seq = bound_sequence(&comb, *n_max, mode.mode(), policy.policy(), &cfg, exec)?;
            let config = ctx.config(
                "bound-seq",
                &[
                    ("f", comb.to_string()),
                    ("mode", mode.mode().name().to_string()),
                    ("n_max", n_max.to_string()),
                    ("policy", format!("{policy:?}")),
                    ("force", force.to_string()),
                ],
                Some(&cfg.optimizer),
            );
            let report = BoundSeqReport::new(config, &seq);
            let stdout = ctx.emit(&report)?;
            if seq.monotone || *force {
                Ok(ok(stdout))
            } else {
                Ok(Outcome {
                    stdout,
                    stderr: format!(
                        "error: bound sequence is not monotone: {}\n",
                        seq.diagnostics.join("; ")
                    ),
                    code: EXIT_INTERNAL,
                })
            }
        }
        Command::ClosedForm { blocks } => {
            let seq: BlockSeq = blocks.parse()?;
            let form = closed_form_packing(&seq)?;
            let config = ctx.config("closed-form", &[("blocks", seq.to_string())], None);
            ctx.emit(&ClosedFormReport::new(config, &seq, &form)).map(ok)
        }
        Command::Minmono { l, k } => {
            let value = min_mono_value(*l, *k)?;
            let config = ctx.config("minmono", &[("l", l.to_string()), ("k", k.to_string())], None);
            let report = MinMonoReport {
                config,
                l: *l,
                k: *k,
                value: RationalDto::new(&value),
                float: num_traits::ToPrimitive::to_f64(&value).unwrap_or(f64::NAN),
            };
            ctx.emit(&report).map(ok)
        }
        Command::Extremal { f, n, mode, force } => {
            let comb = parse_combination(f)?;
            let report = match mode {
                ExtremalModeArg::MaxAll => brute_force_pn(&comb, *n, Extremum::Max, *force, exec)?,
                ExtremalModeArg::MinAll => brute_force_pn(&comb, *n, Extremum::Min, *force, exec)?,
                ExtremalModeArg::MaxLayered => brute_force_pn_layered(&comb, *n, Extremum::Max, exec)?,
                ExtremalModeArg::MinLayered => brute_force_pn_layered(&comb, *n, Extremum::Min, exec)?,
            };
            let config = ctx.config(
                "extremal",
                &[
                    ("f", comb.to_string()),
                    ("N", n.to_string()),
                    ("mode", report.mode.name().to_string()),
                    ("force", force.to_string()),
                ],
                None,
            );
            let report = ExtremalCmdReport {
                config,
                report: ExtremalDto::new(&report),
            };
            ctx.emit(&report).map(ok)
        }
        Command::Qblocks { sigma } => {
            let sigma = parse_perm(sigma)?;
            let blocks = block_sequence(&sigma)?;
            let decomps = enumerate_quasi_blocks(&sigma)?;
            let config = ctx.config("qblocks", &[("sigma", sigma.to_string())], None);
            ctx.emit(&QBlocksReport::new(config, &sigma, &blocks, &decomps)).map(ok)
        }
        Command::Sandwich { f, n, brute_n, opt } => {
            let comb = parse_combination(f)?;
            let cfg = bound_config(opt, false)?;
            let s = sandwich_report(&comb, *n, *brute_n, &cfg, exec)?;
            let config = ctx.config(
                "sandwich",
                &[
                    ("f", comb.to_string()),
                    ("n", n.to_string()),
                    ("brute_n", brute_n.to_string()),
                ],
                Some(&cfg.optimizer),
            );
            ctx.emit(&SandwichReport::new(config, &s)).map(ok)
        }
        Command::ErdosSzekeres { n, k } => {
            let scan = erdos_szekeres_scan(*n, *k, exec)?;
            let config = ctx.config(
                "erdos-szekeres",
                &[("N", n.to_string()), ("k", k.to_string())],
                None,
            );
            ctx.emit(&ErdosSzekeresReport::new(config, &scan)).map(ok)
        }
    }
}
