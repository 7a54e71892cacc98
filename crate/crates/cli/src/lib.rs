//! Command-line front end for the `polylearn` learners and verifiers.
//!
//! Every mode writes a line-oriented table (JSON objects or CSV with a fixed
//! header) and maps its outcome onto an [`ExitStatus`].

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use polylearn::learn::LOWER_BOUND_NOTE;
use polylearn::sim::state_dim;
use polylearn::verify::{
    trial_seeds, verify_counting, verify_kickback, verify_lemma_fs, CountMode, DEFAULT_COUNT_BUDGET,
    DEFAULT_POINT_BUDGET,
};
use polylearn::{
    classical_learn, classical_query_count, lower_bound_report, quantum_query_count, FieldCtx, HiddenOracle,
    MultilinearPoly, Oracle, QuantumLearner, DEFAULT_MEM_CAP,
};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Classical,
    Quantum,
    Both,
    VerifyFs,
    VerifyKickback,
    VerifyCount,
    BoundTable,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    Usage = 2,
    ResourceLimit = 3,
}

/// Exact query learning of multilinear polynomials over finite fields.
#[derive(Clone, Debug, Parser)]
#[command(name = "polylearn", version)]
pub struct Cli {
    /// Field as `p^r:c0,..,cr`, `p^r` or a bare order; repeatable in sweep mode.
    #[arg(long = "q", value_name = "FIELD")]
    pub q: Vec<String>,
    /// Number of variables; sweep mode also accepts lists and ranges like `3..8,12`.
    #[arg(long = "n", value_name = "N")]
    pub n: Option<String>,
    /// Degree bound; sweep mode also accepts lists and ranges like `1..3`.
    #[arg(long = "d", value_name = "D")]
    pub d: Option<String>,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: Mode,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Hidden polynomial in the JSON polynomial format, instead of seeded random ones.
    #[arg(long, value_name = "PATH")]
    pub poly_file: Option<PathBuf>,
    /// Largest number of simulated amplitudes per state.
    #[arg(long, value_name = "AMPLITUDES", default_value_t = DEFAULT_MEM_CAP)]
    pub mem_cap: usize,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(polylearn::Error),
    Io(io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<polylearn::Error> for CliError {
    fn from(e: polylearn::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Usage(_) => ExitStatus::Usage,
            CliError::Lib(e) if e.is_resource_limit() => ExitStatus::ResourceLimit,
            CliError::Lib(_) | CliError::Io(_) => ExitStatus::Failure,
        }
    }
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {msg}"))
}

/// A row type with a fixed CSV header.
trait TableRow: Serialize {
    const HEADER: &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct LearnRow {
    kind: &'static str,
    learner: &'static str,
    field: String,
    n: usize,
    d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    trial: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    queries_used: Option<u64>,
    expected: u128,
    exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_degree: Option<Vec<u64>>,
    count_match: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl TableRow for LearnRow {
    const HEADER: &'static [&'static str] = &[
        "kind",
        "learner",
        "field",
        "n",
        "d",
        "trial",
        "seed",
        "queries_used",
        "expected",
        "exact",
        "per_degree",
        "count_match",
        "error",
    ];

    fn record(&self) -> Vec<String> {
        vec![
            self.kind.to_string(),
            self.learner.to_string(),
            self.field.clone(),
            self.n.to_string(),
            self.d.to_string(),
            opt(&self.trial),
            opt(&self.seed),
            opt(&self.queries_used),
            self.expected.to_string(),
            self.exact.to_string(),
            self.per_degree
                .as_ref()
                .map(|v| v.iter().map(u64::to_string).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
            self.count_match.to_string(),
            opt(&self.error),
        ]
    }
}

#[derive(Debug, Serialize)]
struct SweepRow {
    field: String,
    q: u32,
    n: usize,
    d: usize,
    trials: usize,
    classical: u128,
    quantum: u128,
    ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counts_match: Option<bool>,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

impl TableRow for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "field",
        "q",
        "n",
        "d",
        "trials",
        "classical",
        "quantum",
        "ratio",
        "exact",
        "counts_match",
        "status",
        "reason",
    ];

    fn record(&self) -> Vec<String> {
        vec![
            self.field.clone(),
            self.q.to_string(),
            self.n.to_string(),
            self.d.to_string(),
            self.trials.to_string(),
            self.classical.to_string(),
            self.quantum.to_string(),
            self.ratio.to_string(),
            opt(&self.exact),
            opt(&self.counts_match),
            self.status.to_string(),
            opt(&self.reason),
        ]
    }
}

#[derive(Debug, Serialize)]
struct BoundRow {
    field: String,
    q: u32,
    n: usize,
    d: usize,
    r: u64,
    error_lower_bound: f64,
    min_queries_for_third: u64,
    note: &'static str,
}

impl TableRow for BoundRow {
    const HEADER: &'static [&'static str] = &[
        "field",
        "q",
        "n",
        "d",
        "r",
        "error_lower_bound",
        "min_queries_for_third",
        "note",
    ];

    fn record(&self) -> Vec<String> {
        vec![
            self.field.clone(),
            self.q.to_string(),
            self.n.to_string(),
            self.d.to_string(),
            self.r.to_string(),
            self.error_lower_bound.to_string(),
            self.min_queries_for_third.to_string(),
            self.note.to_string(),
        ]
    }
}

fn write_table<R: TableRow, W: Write>(rows: &[R], format: Format, out: &mut W) -> Result<(), CliError> {
    match format {
        Format::Json => {
            for row in rows {
                serde_json::to_writer(&mut *out, row).map_err(polylearn::Error::from)?;
                writeln!(out)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(R::HEADER).map_err(csv_io)?;
            for row in rows {
                w.write_record(row.record()).map_err(csv_io)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn csv_io(e: csv::Error) -> CliError {
    CliError::Io(io::Error::other(e))
}

/// Parses a comma-separated list of values `a` and inclusive ranges `a..b`.
pub fn parse_range(flag: &str, text: &str) -> Result<Vec<usize>, CliError> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| usage(flag, format!("cannot parse {s:?}")))
    };
    let mut values = Vec::new();
    for item in text.split(',') {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if a > b {
                    return Err(usage(flag, format!("empty range {item:?}")));
                }
                values.extend(a..=b);
            }
            None => values.push(num(item)?),
        }
    }
    Ok(values)
}

fn parse_field(text: &str) -> Result<Arc<FieldCtx>, CliError> {
    text.parse::<FieldCtx>().map(Arc::new).map_err(|e| usage("--q", e))
}

fn single(flag: &str, text: Option<&String>) -> Result<usize, CliError> {
    let text = text.ok_or_else(|| usage(flag, "required for this mode"))?;
    match parse_range(flag, text)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(usage(flag, "a single value is required outside sweep mode")),
    }
}

/// Field, `n` and `d` for a single-configuration mode, plus the hidden
/// polynomial when `--poly-file` supplies one.
struct Setup {
    ctx: Arc<FieldCtx>,
    n: usize,
    d: usize,
    fixed: Option<MultilinearPoly>,
}

fn setup(cli: &Cli) -> Result<Setup, CliError> {
    if cli.q.len() > 1 {
        return Err(usage("--q", "repeat only in sweep mode"));
    }
    let learn = matches!(cli.mode, Mode::Classical | Mode::Quantum | Mode::Both);
    if let Some(path) = &cli.poly_file {
        if !learn {
            return Err(usage("--poly-file", "only used by learn modes"));
        }
        let text = fs::read_to_string(path).map_err(|e| usage("--poly-file", e))?;
        let f = MultilinearPoly::from_json(&text).map_err(|e| usage("--poly-file", e))?;
        if let Some(q) = cli.q.first() {
            if *parse_field(q)? != **f.field() {
                return Err(usage("--q", "disagrees with the field in --poly-file"));
            }
        }
        if cli.n.is_some() && single("--n", cli.n.as_ref())? != f.num_vars() {
            return Err(usage("--n", "disagrees with n in --poly-file"));
        }
        let d = match &cli.d {
            // taken at face value: a degree below the file's breaks the learners' promise
            Some(_) => single("--d", cli.d.as_ref())?,
            None => f.degree_bound(),
        };
        return Ok(Setup {
            ctx: f.field().clone(),
            n: f.num_vars(),
            d: d.min(f.num_vars()),
            fixed: Some(f),
        });
    }
    let ctx = parse_field(cli.q.first().ok_or_else(|| usage("--q", "required for this mode"))?)?;
    let n = single("--n", cli.n.as_ref())?;
    if n > 64 {
        return Err(usage("--n", "at most 64 variables"));
    }
    let d = match cli.mode {
        Mode::VerifyKickback => 0,
        _ => single("--d", cli.d.as_ref())?,
    };
    if d > n {
        log::warn!("clamping d = {d} to n = {n}");
    }
    Ok(Setup {
        ctx,
        n,
        d: d.min(n),
        fixed: None,
    })
}

/// Runs the configured mode, writing its table to `out`.
pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<ExitStatus, CliError> {
    if cli.mode != Mode::BoundTable && cli.trials == 0 {
        return Err(usage("--trials", "must be positive"));
    }
    match cli.mode {
        Mode::Classical | Mode::Quantum | Mode::Both => run_learn(cli, out),
        Mode::VerifyFs | Mode::VerifyKickback | Mode::VerifyCount => run_verify(cli, out),
        Mode::BoundTable => run_bound_table(cli, out),
        Mode::Sweep => run_sweep(cli, out),
    }
}

/// Parses arguments, runs, and writes to `--out` or standard output.
pub fn main_with_args<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Usage
            } else {
                ExitStatus::Success
            };
        }
    };
    let result = match &cli.out {
        Some(path) => fs::File::create(path).map_err(|e| usage("--out", e)).and_then(|f| {
            let mut w = io::BufWriter::new(f);
            let status = run(&cli, &mut w)?;
            w.flush()?;
            Ok(status)
        }),
        None => {
            let stdout = io::stdout();
            let mut w = io::BufWriter::new(stdout.lock());
            run(&cli, &mut w).and_then(|status| {
                w.flush()?;
                Ok(status)
            })
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("polylearn: {e}");
        e.status()
    })
}

struct TrialResult {
    seed: u64,
    queries_used: u64,
    exact: bool,
    per_degree: Vec<u64>,
    error: Option<String>,
}

fn learn_trials(setup: &Setup, quantum: bool, seeds: &[u64], mem_cap: usize) -> Result<Vec<TrialResult>, CliError> {
    if quantum {
        state_dim(setup.ctx.order(), setup.n, mem_cap)?;
    }
    let learner = QuantumLearner::<f64>::with_mem_cap(mem_cap);
    seeds
        .par_iter()
        .map(|&seed| {
            let f = match &setup.fixed {
                Some(f) => f.clone(),
                None => MultilinearPoly::random(setup.ctx.clone(), setup.n, setup.d, seed)?,
            };
            let oracle = HiddenOracle::new(f.clone());
            let outcome = if quantum {
                learner.learn(&oracle, setup.n, setup.d)
            } else {
                classical_learn(&oracle, setup.n, setup.d)
            };
            match outcome {
                Ok(report) => Ok(TrialResult {
                    seed,
                    queries_used: oracle.queries(),
                    exact: report.learned.poly_equal(&f)?,
                    per_degree: report.per_degree_queries,
                    error: None,
                }),
                Err(e) if e.is_resource_limit() => Err(CliError::Lib(e)),
                Err(e) => Ok(TrialResult {
                    seed,
                    queries_used: oracle.queries(),
                    exact: false,
                    per_degree: Vec::new(),
                    error: Some(e.to_string()),
                }),
            }
        })
        .collect()
}

fn run_learn<W: Write>(cli: &Cli, out: &mut W) -> Result<ExitStatus, CliError> {
    let setup = setup(cli)?;
    let seeds = trial_seeds(cli.seed, cli.trials);
    let learners: &[(&'static str, bool)] = match cli.mode {
        Mode::Classical => &[("classical", false)],
        Mode::Quantum => &[("quantum", true)],
        _ => &[("quantum", true), ("classical", false)],
    };
    let field = setup.ctx.to_string();
    let mut rows = Vec::new();
    let mut ok = true;
    for &(name, quantum) in learners {
        let expected = if quantum {
            quantum_query_count(setup.n, setup.d)
        } else {
            classical_query_count(setup.n, setup.d)
        };
        let trials = learn_trials(&setup, quantum, &seeds, cli.mem_cap)?;
        let mut all_exact = true;
        let mut all_match = true;
        for (i, t) in trials.into_iter().enumerate() {
            let count_match = t.queries_used as u128 == expected;
            all_exact &= t.exact;
            all_match &= count_match;
            rows.push(LearnRow {
                kind: "trial",
                learner: name,
                field: field.clone(),
                n: setup.n,
                d: setup.d,
                trial: Some(i),
                seed: Some(t.seed),
                queries_used: Some(t.queries_used),
                expected,
                exact: t.exact,
                per_degree: Some(t.per_degree),
                count_match,
                error: t.error,
            });
        }
        rows.push(LearnRow {
            kind: "summary",
            learner: name,
            field: field.clone(),
            n: setup.n,
            d: setup.d,
            trial: None,
            seed: None,
            queries_used: None,
            expected,
            exact: all_exact,
            per_degree: None,
            count_match: all_match,
            error: None,
        });
        ok &= all_exact && all_match;
    }
    write_table(&rows, cli.format, out)?;
    Ok(if ok { ExitStatus::Success } else { ExitStatus::Failure })
}

fn run_verify<W: Write>(cli: &Cli, out: &mut W) -> Result<ExitStatus, CliError> {
    if cli.format != Format::Json {
        return Err(usage("--format", "verifier reports are JSON only"));
    }
    let setup = setup(cli)?;
    let (json, passed) = match cli.mode {
        Mode::VerifyFs => {
            let r = verify_lemma_fs(setup.ctx, setup.n, setup.d, cli.trials, cli.seed, DEFAULT_POINT_BUDGET)?;
            (serde_json::to_string(&r), r.passed())
        }
        Mode::VerifyKickback => {
            let r = verify_kickback(setup.ctx, setup.n, cli.trials, cli.seed, cli.mem_cap)?;
            (serde_json::to_string(&r), r.passed())
        }
        _ => {
            let r = verify_counting(setup.ctx, setup.n, setup.d, CountMode::Auto, DEFAULT_COUNT_BUDGET)?;
            (serde_json::to_string(&r), r.passed())
        }
    };
    writeln!(out, "{}", json.map_err(polylearn::Error::from)?)?;
    Ok(if passed {
        ExitStatus::Success
    } else {
        ExitStatus::Failure
    })
}

/// The bound for every `r` from 0 up to the first `r` that brings it to 1/3.
fn run_bound_table<W: Write>(cli: &Cli, out: &mut W) -> Result<ExitStatus, CliError> {
    let setup = setup(cli)?;
    let q = setup.ctx.order();
    let last = lower_bound_report(q, setup.n, setup.d, 0).min_queries_for_third;
    let rows: Vec<BoundRow> = (0..=last)
        .map(|r| {
            let report = lower_bound_report(q, setup.n, setup.d, r);
            BoundRow {
                field: setup.ctx.to_string(),
                q,
                n: setup.n,
                d: setup.d,
                r,
                error_lower_bound: report.error_lower_bound,
                min_queries_for_third: report.min_queries_for_third,
                note: LOWER_BOUND_NOTE,
            }
        })
        .collect();
    write_table(&rows, cli.format, out)?;
    Ok(ExitStatus::Success)
}

fn run_sweep<W: Write>(cli: &Cli, out: &mut W) -> Result<ExitStatus, CliError> {
    if cli.poly_file.is_some() {
        return Err(usage("--poly-file", "not used by sweep mode"));
    }
    if cli.q.is_empty() {
        return Err(usage("--q", "required for this mode"));
    }
    let fields = cli.q.iter().map(|q| parse_field(q)).collect::<Result<Vec<_>, _>>()?;
    let ns = parse_range(
        "--n",
        cli.n.as_deref().ok_or_else(|| usage("--n", "required for this mode"))?,
    )?;
    let ds = parse_range(
        "--d",
        cli.d.as_deref().ok_or_else(|| usage("--d", "required for this mode"))?,
    )?;
    if let Some(&n) = ns.iter().find(|&&n| n > 64) {
        return Err(usage("--n", format!("{n} exceeds 64 variables")));
    }
    let seeds = trial_seeds(cli.seed, cli.trials);
    let mut rows = Vec::new();
    let mut ok = true;
    for ctx in &fields {
        for &n in &ns {
            for &d in ds.iter().filter(|&&d| d <= n) {
                let classical = classical_query_count(n, d);
                let quantum = quantum_query_count(n, d);
                let mut row = SweepRow {
                    field: ctx.to_string(),
                    q: ctx.order(),
                    n,
                    d,
                    trials: cli.trials,
                    classical,
                    quantum,
                    ratio: classical as f64 / quantum as f64,
                    exact: None,
                    counts_match: None,
                    status: "ok",
                    reason: None,
                };
                if let Err(e) = state_dim(ctx.order(), n, cli.mem_cap) {
                    row.status = "skipped";
                    row.reason = Some(e.to_string());
                    rows.push(row);
                    continue;
                }
                let setup = Setup {
                    ctx: ctx.clone(),
                    n,
                    d,
                    fixed: None,
                };
                let q_trials = learn_trials(&setup, true, &seeds, cli.mem_cap)?;
                let c_trials = learn_trials(&setup, false, &seeds, cli.mem_cap)?;
                let exact = q_trials.iter().chain(&c_trials).all(|t| t.exact);
                let counts_match = q_trials.iter().all(|t| t.queries_used as u128 == quantum)
                    && c_trials.iter().all(|t| t.queries_used as u128 == classical);
                if !(exact && counts_match) {
                    row.status = "failed";
                    row.reason = q_trials.iter().chain(&c_trials).find_map(|t| t.error.clone());
                    ok = false;
                }
                row.exact = Some(exact);
                row.counts_match = Some(counts_match);
                rows.push(row);
            }
        }
    }
    write_table(&rows, cli.format, out)?;
    Ok(if ok { ExitStatus::Success } else { ExitStatus::Failure })
}
