//! Command-line front end: `exact`, `simulate`, `verify`, `renewal`, `sweep`
//! and `drift`.
//!
//! Every report is a list of rows with the columns
//! `lambda,dist,model,quantity,value,abs_error,method,replicas,stderr`,
//! printed as `key=value` lines, CSV, or a JSON array of flat objects.
//! Numbers carry 12 significant digits; infinite values print as `inf`.
//!
//! Exit codes: 0 on success, 2 on a usage or parse error, 3 when a
//! verification check fails, 1 on any other error.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::exact::{self, EvalResult, Extended, SumVerdict};
use crate::firework::{self, RadiusLaw};
use crate::laws::SurvivalLaw;
use crate::montecarlo::{self, Mechanism, ModelSpec, SimConfig, SimModel, Statistic};
use crate::verify::{self, Params, Suite};

pub const THREADS_ENV: &str = "CATASTRO_THREADS";

pub const CSV_HEADER: &str = "lambda,dist,model,quantity,value,abs_error,method,replicas,stderr";

#[derive(Debug, Parser)]
#[command(name = "catastro", version, about = "Immigration processes with binomial catastrophes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact values for one model at one immigration rate.
    Exact(ExactArgs),
    /// Monte Carlo estimates.
    Simulate(SimulateArgs),
    /// Run verification suites; exit 3 on any failure.
    Verify(VerifyArgs),
    /// Renewal sequence, inter-arrival law and Firework summaries.
    Renewal(RenewalArgs),
    /// Exact values over a grid of immigration rates.
    Sweep(SweepArgs),
    /// Foster drift of the catastrophe-random chain.
    Drift(DriftArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Classical,
    Cat,
    Ind,
    Gipc,
    Firework,
}

impl ModelKind {
    fn name(self) -> &'static str {
        match self {
            ModelKind::Classical => "classical",
            ModelKind::Cat => "cat",
            ModelKind::Ind => "ind",
            ModelKind::Gipc => "gipc",
            ModelKind::Firework => "firework",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Table,
    Csv,
    Json,
}

fn parse_law(s: &str) -> std::result::Result<SurvivalLaw, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_radius(s: &str) -> std::result::Result<RadiusLaw, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(format!("expected lo:hi:step, got '{s}'"));
    };
    let num = |x: &str| x.parse::<f64>().map_err(|_| format!("'{x}' is not a number"));
    let g = Grid { lo: num(lo)?, hi: num(hi)?, step: num(step)? };
    if !(g.lo.is_finite() && g.hi.is_finite() && g.step.is_finite()) || g.step <= 0.0 || g.hi < g.lo {
        return Err(format!("grid '{s}' needs finite bounds, lo <= hi and step > 0"));
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy)]
struct Grid {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Grid {
    fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as u64;
        (0..=n).map(|k| round_sig(self.lo + k as f64 * self.step)).collect()
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Survival law: degenerate:p=, beta:a=,b=, power:a=, uniform, truncexp:gamma=
    #[arg(long, value_parser = parse_law)]
    dist: Option<SurvivalLaw>,
    /// Lifetime or radius law: support:0=,1=,.., geomlife:p=, fromdist:<law>
    #[arg(long, value_parser = parse_radius)]
    lifetime: Option<RadiusLaw>,
    /// Fixed survival probability of the classical model.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Debug, Args)]
struct ExactArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    lambda: f64,
    /// Stopping tolerance of the truncated Kolmogorov oracle.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "table")]
    out: OutFormat,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Immigration rate; for the Firework model only used with --effective.
    #[arg(long)]
    lambda: Option<f64>,
    /// Firework model: use the effective radius at --lambda.
    #[arg(long)]
    effective: bool,
    #[arg(long, default_value_t = 10_000)]
    replicas: u64,
    #[arg(long, default_value_t = montecarlo::DEFAULT_SEED)]
    seed: u64,
    /// Also estimate P(M > horizon), stopping replicas there.
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, value_enum, default_value = "table")]
    out: OutFormat,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = |s: &str| s.parse::<Suite>().map_err(|e| e.to_string()))]
    suite: Suite,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_parser = parse_law)]
    dist: Option<SurvivalLaw>,
    #[arg(long, default_value_t = 100_000)]
    replicas: u64,
    #[arg(long, default_value_t = montecarlo::DEFAULT_SEED)]
    seed: u64,
    /// Override the tolerance of every exact (non-simulated) check.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "table")]
    out: OutFormat,
}

#[derive(Debug, Args)]
struct RenewalArgs {
    #[arg(long, value_parser = parse_radius)]
    lifetime: RadiusLaw,
    /// Use the effective radius law at --lambda.
    #[arg(long)]
    effective: bool,
    #[arg(long)]
    lambda: Option<f64>,
    /// Last index of the renewal sequence.
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, value_enum, default_value = "table")]
    out: OutFormat,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_parser = parse_grid)]
    grid: Grid,
    /// Add simulated means with this many replicas per grid point.
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long, default_value_t = montecarlo::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    out: OutFormat,
}

#[derive(Debug, Args)]
struct DriftArgs {
    #[arg(long, value_parser = parse_law)]
    dist: SurvivalLaw,
    #[arg(long)]
    lambda: f64,
    /// Largest population size reported.
    #[arg(long, default_value_t = 10)]
    imax: u64,
    #[arg(long, value_enum, default_value = "table")]
    out: OutFormat,
}

/// A value cell: a number, or a token such as a verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Extended> for Cell {
    fn from(v: Extended) -> Self {
        match v {
            Extended::Finite(x) => Cell::Num(x),
            Extended::Infinite => Cell::Num(f64::INFINITY),
            Extended::Undefined => Cell::Text("undefined".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub lambda: Option<f64>,
    pub dist: String,
    pub model: String,
    pub quantity: String,
    pub value: Cell,
    pub abs_error: Option<f64>,
    pub method: String,
    pub replicas: Option<u64>,
    pub stderr: Option<f64>,
}

impl Row {
    fn new(lambda: Option<f64>, dist: &str, model: &str, quantity: impl Into<String>, value: impl Into<Cell>) -> Row {
        Row {
            lambda,
            dist: dist.to_string(),
            model: model.to_string(),
            quantity: quantity.into(),
            value: value.into(),
            abs_error: None,
            method: String::new(),
            replicas: None,
            stderr: None,
        }
    }

    fn exact(lambda: Option<f64>, dist: &str, model: &str, quantity: &str, r: &EvalResult) -> Row {
        Row { abs_error: r.error_bound(), method: r.method.to_string(), ..Row::new(lambda, dist, model, quantity, r.value) }
    }

    fn method(mut self, m: &str) -> Row {
        self.method = m.to_string();
        self
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Formats with 12 significant digits; `inf`, `-inf` and `nan` for
/// non-finite values.
pub fn format_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(v);
    if r == 0.0 || (1e-5..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Parses a number printed by [`format_num`].
pub fn parse_num(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_num(*v),
        Cell::Text(t) => t.clone(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let opt = |v: Option<f64>| v.map(format_num).unwrap_or_default();
        let fields = [
            opt(r.lambda),
            csv_field(&r.dist),
            csv_field(&r.model),
            csv_field(&r.quantity),
            csv_field(&cell_text(&r.value)),
            opt(r.abs_error),
            csv_field(&r.method),
            r.replicas.map(|n| n.to_string()).unwrap_or_default(),
            opt(r.stderr),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn json_num(v: f64) -> Value {
    if v.is_finite() {
        serde_json::Number::from_f64(round_sig(v)).map(Value::Number).unwrap_or(Value::Null)
    } else {
        Value::String(format_num(v))
    }
}

pub fn render_json(rows: &[Row]) -> String {
    let opt = |v: Option<f64>| v.map(json_num).unwrap_or(Value::Null);
    let items: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            m.insert("lambda".into(), opt(r.lambda));
            m.insert("dist".into(), Value::String(r.dist.clone()));
            m.insert("model".into(), Value::String(r.model.clone()));
            m.insert("quantity".into(), Value::String(r.quantity.clone()));
            m.insert(
                "value".into(),
                match &r.value {
                    Cell::Num(v) => json_num(*v),
                    Cell::Text(t) => Value::String(t.clone()),
                },
            );
            m.insert("abs_error".into(), opt(r.abs_error));
            m.insert("method".into(), Value::String(r.method.clone()));
            m.insert("replicas".into(), r.replicas.map(Value::from).unwrap_or(Value::Null));
            m.insert("stderr".into(), opt(r.stderr));
            Value::Object(m)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(items)).expect("plain values serialize");
    s.push('\n');
    s
}

pub fn render_table(rows: &[Row]) -> String {
    let mut out = String::new();
    let mut context = None;
    for r in rows {
        let ctx = (r.lambda.map(format_num), r.dist.clone(), r.model.clone());
        if context.as_ref() != Some(&ctx) {
            let lambda = ctx.0.clone().unwrap_or_else(|| "-".into());
            out.push_str(&format!("# model={} dist={} lambda={}\n", ctx.2, if ctx.1.is_empty() { "-" } else { &ctx.1 }, lambda));
            context = Some(ctx);
        }
        let mut line = format!("{}={}", r.quantity, cell_text(&r.value));
        if let Some(e) = r.abs_error {
            line.push_str(&format!("  abs_error={}", format_num(e)));
        }
        if !r.method.is_empty() {
            line.push_str(&format!("  method={}", r.method));
        }
        if let Some(n) = r.replicas {
            line.push_str(&format!("  replicas={n}"));
        }
        if let Some(se) = r.stderr {
            line.push_str(&format!("  stderr={}", format_num(se)));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn render(rows: &[Row], fmt: OutFormat) -> String {
    match fmt {
        OutFormat::Table => render_table(rows),
        OutFormat::Csv => render_csv(rows),
        OutFormat::Json => render_json(rows),
    }
}

/// Worker count from `CATASTRO_THREADS`, if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|n: &usize| *n > 0)
}

enum Failure {
    Usage(String),
    Runtime(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidLaw(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Runs the command line `args` (program name first), writing the report to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let workers = workers_from_env();
    let result = match cli.command {
        Command::Exact(a) => cmd_exact(a).map(|(rows, f)| render(&rows, f)),
        Command::Simulate(a) => cmd_simulate(a, workers).map(|(rows, f)| render(&rows, f)),
        Command::Verify(a) => cmd_verify(a, workers, out),
        Command::Renewal(a) => cmd_renewal(a).map(|(rows, f)| render(&rows, f)),
        Command::Sweep(a) => cmd_sweep(a, workers).map(|(rows, f)| render(&rows, f)),
        Command::Drift(a) => cmd_drift(a).map(|(rows, f)| render(&rows, f)),
    };
    match result {
        Ok(text) => {
            if out.write_all(text.as_bytes()).is_err() {
                return 1;
            }
            0
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Verification) => 3,
    }
}

fn check_lambda(lambda: f64) -> std::result::Result<f64, Failure> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(lambda)
    } else {
        Err(usage(format!("--lambda must be finite and positive, got {lambda}")))
    }
}

/// Survival probability of the classical model: `--p`, or a degenerate `--dist`.
fn classical_p(m: &ModelArgs) -> std::result::Result<f64, Failure> {
    match (m.p, &m.dist) {
        (Some(p), None) if (0.0..=1.0).contains(&p) => Ok(p),
        (Some(p), None) => Err(usage(format!("--p must lie in [0, 1], got {p}"))),
        (None, Some(SurvivalLaw::Degenerate { p })) => Ok(*p),
        _ => Err(usage("the classical model needs --p (or --dist degenerate:p=..)")),
    }
}

fn need_dist(m: &ModelArgs) -> std::result::Result<&SurvivalLaw, Failure> {
    m.dist.as_ref().ok_or_else(|| usage(format!("--model {} needs --dist", m.model.name())))
}

fn need_lifetime(m: &ModelArgs) -> std::result::Result<&RadiusLaw, Failure> {
    m.lifetime.as_ref().ok_or_else(|| usage(format!("--model {} needs --lifetime", m.model.name())))
}

fn dist_label(m: &ModelArgs) -> String {
    match m.model {
        ModelKind::Classical => m.p.map(|p| format!("degenerate:p={p}")).or_else(|| m.dist.as_ref().map(|d| d.to_string())).unwrap_or_default(),
        ModelKind::Gipc | ModelKind::Firework => m.lifetime.as_ref().map(|l| l.to_string()).unwrap_or_default(),
        _ => m.dist.as_ref().map(|d| d.to_string()).unwrap_or_default(),
    }
}

fn exact_rows(m: &ModelArgs, lambda: f64, tol: Option<f64>) -> std::result::Result<Vec<Row>, Failure> {
    let label = dist_label(m);
    let model = m.model.name();
    let l = Some(lambda);
    let mut rows = Vec::new();
    match m.model {
        ModelKind::Classical => {
            let r = exact::classical_extinction_time(lambda, classical_p(m)?)?;
            rows.push(Row::exact(l, &label, model, "expected_catastrophes", &r));
            rows.push(Row::exact(l, &label, model, "expected_time", &r));
        }
        ModelKind::Cat => {
            let law = need_dist(m)?;
            let s = exact::s_nu(lambda, law)?;
            rows.push(Row::exact(l, &label, model, "s_nu", &s));
            let e = match tol {
                Some(tol) if s.finite().is_none() => {
                    let rep = crate::oracle::truncated_kolmogorov_tau(lambda, law, 1, tol)?;
                    EvalResult { terms: rep.n as u64, ..exact::cat_random_expected_oracle(lambda, law)? }
                        .with_value(rep.value)
                }
                _ => exact::cat_random_expected(lambda, law)?,
            };
            rows.push(Row::exact(l, &label, model, "expected_catastrophes", &e));
        }
        ModelKind::Ind => {
            let law = need_dist(m)?;
            rows.push(Row::exact(l, &label, model, "survival", &exact::ind_random_survival(lambda, law)?));
            rows.push(Row::exact(l, &label, model, "expected_catastrophes", &exact::ind_random_expected(lambda, law)?));
            let c = exact::survival_criterion(lambda, law)?;
            rows.push(Row::new(l, &label, model, "verdict", Cell::Text(format!("{:?}", c.verdict).to_lowercase())).method(&route_name(c.route)));
            if let Some(rate) = c.critical_rate {
                rows.push(Row::new(l, &label, model, "critical_rate", rate).method("closed_form"));
            }
            let sum = match exact::moment_sum_diverges(law).verdict {
                SumVerdict::Diverges => "diverges",
                SumVerdict::Converges => "converges",
                SumVerdict::Inconclusive => "inconclusive",
            };
            rows.push(Row::new(l, &label, model, "moment_sum", Cell::Text(sum.into())));
        }
        ModelKind::Gipc => {
            let alpha = need_lifetime(m)?.clone().effective(lambda)?;
            let pf = firework::firework_survival(&alpha)?;
            let survival = firework::bridge_survival(lambda, pf.to_f64())?;
            rows.push(Row { value: Cell::Num(survival), ..Row::exact(l, &label, model, "survival", &pf) });
            let ef = firework::firework_expected_range(&alpha)?;
            let e = firework::bridge_expected(lambda, ef.value)?;
            rows.push(Row { value: e.into(), abs_error: None, ..Row::exact(l, &label, model, "expected_catastrophes", &ef) });
        }
        ModelKind::Firework => {
            return Err(usage("use the renewal subcommand for Firework analytics"));
        }
    }
    Ok(rows)
}

impl EvalResult {
    fn with_value(mut self, v: f64) -> Self {
        self.value = Extended::Finite(v);
        self
    }
}

fn route_name(route: exact::CriterionRoute) -> String {
    match route {
        exact::CriterionRoute::MomentAsymptotics => "moment_asymptotics",
        exact::CriterionRoute::DensityLimit => "density_limit",
        exact::CriterionRoute::CriticalDifferentiable => "critical_differentiable",
        exact::CriterionRoute::ClosedFormFamily => "closed_form_family",
    }
    .to_string()
}

fn cmd_exact(a: ExactArgs) -> std::result::Result<(Vec<Row>, OutFormat), Failure> {
    let lambda = check_lambda(a.lambda)?;
    if let Some(t) = a.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(usage(format!("--tol must be positive, got {t}")));
        }
    }
    Ok((exact_rows(&a.model, lambda, a.tol)?, a.out))
}

fn sim_model(m: &ModelArgs, lambda: Option<f64>, effective: bool) -> std::result::Result<(SimModel, Option<f64>), Failure> {
    if m.model == ModelKind::Firework {
        let base = need_lifetime(m)?.clone();
        return Ok(if effective {
            let lambda = check_lambda(lambda.ok_or_else(|| usage("--effective needs --lambda"))?)?;
            (SimModel::Firework { alpha: base.effective(lambda)?, inversion: false }, Some(lambda))
        } else {
            (SimModel::Firework { alpha: base, inversion: false }, None)
        });
    }
    let lambda = check_lambda(lambda.ok_or_else(|| usage("--lambda is required"))?)?;
    let mechanism = match m.model {
        ModelKind::Classical => Mechanism::Classical { p: classical_p(m)? },
        ModelKind::Cat => {
            let law = need_dist(m)?;
            if law.is_point_mass_at_one() {
                return Err(usage("the catastrophe-random model excludes degenerate:p=1"));
            }
            Mechanism::CatastropheRandom(law.clone())
        }
        ModelKind::Ind => Mechanism::IndividualRandom(need_dist(m)?.clone()),
        ModelKind::Gipc => Mechanism::GeneralLifetime(need_lifetime(m)?.clone()),
        ModelKind::Firework => unreachable!(),
    };
    Ok((SimModel::Population(ModelSpec { lambda, mechanism }), Some(lambda)))
}

fn simulation_rows(
    m: &ModelArgs,
    config: &SimConfig,
    lambda: Option<f64>,
    workers: Option<usize>,
) -> std::result::Result<Vec<Row>, Failure> {
    let label = dist_label(m);
    let model = m.model.name();
    let outcomes = montecarlo::run(config, workers)?;
    let censored = outcomes.iter().filter(|o| matches!(o, montecarlo::ReplicaOutcome::Censored { .. })).count();
    let mut rows = Vec::new();
    let mut push = |quantity: String, stat: Statistic| -> std::result::Result<(), Failure> {
        // a mean over the extinct replicas alone would be biased downwards
        let biased = censored > 0 && !matches!(stat, Statistic::TailProbability(_));
        match montecarlo::summarize(stat, &outcomes) {
            Ok(_) if biased => {
                rows.push(Row::new(lambda, &label, model, quantity, Cell::Text("censored".into())).method("monte_carlo"));
                Ok(())
            }
            Ok(e) => {
                rows.push(Row {
                    replicas: Some(e.replicas_used),
                    stderr: Some(e.std_error),
                    ..Row::new(lambda, &label, model, quantity, e.point).method("monte_carlo")
                });
                Ok(())
            }
            Err(Error::NoEstimate(_)) => {
                rows.push(Row::new(lambda, &label, model, quantity, Cell::Text("censored".into())).method("monte_carlo"));
                Ok(())
            }
            Err(e) => Err(e.into()),
        }
    };
    if m.model == ModelKind::Firework {
        push("mean_range".into(), Statistic::MeanCatastrophes)?;
    } else {
        push("mean_catastrophes".into(), Statistic::MeanCatastrophes)?;
        push("mean_time".into(), Statistic::MeanTime)?;
    }
    if let Some(h) = config.horizon {
        push(format!("p_m_gt_{h}"), Statistic::TailProbability(h + 1))?;
    }
    rows.push(Row { replicas: Some(config.replicas), ..Row::new(lambda, &label, model, "censored", censored as f64).method("monte_carlo") });
    Ok(rows)
}

fn cmd_simulate(a: SimulateArgs, workers: Option<usize>) -> std::result::Result<(Vec<Row>, OutFormat), Failure> {
    if a.replicas == 0 {
        return Err(usage("--replicas must be at least 1"));
    }
    if a.horizon == Some(0) {
        return Err(usage("--horizon must be at least 1"));
    }
    let (model, lambda) = sim_model(&a.model, a.lambda, a.effective)?;
    let mut config = SimConfig::new(model, a.replicas, a.seed);
    config.horizon = a.horizon;
    if a.model.model == ModelKind::Firework && a.horizon.is_none() {
        config.horizon = Some(montecarlo::DEFAULT_MAX_CATASTROPHES);
    }
    Ok((simulation_rows(&a.model, &config, lambda, workers)?, a.out))
}

fn cmd_verify(a: VerifyArgs, workers: Option<usize>, out: &mut dyn Write) -> std::result::Result<String, Failure> {
    if let Some(l) = a.lambda {
        check_lambda(l)?;
    }
    if a.replicas < 100 {
        return Err(usage("--replicas must be at least 100"));
    }
    let params = Params { lambda: a.lambda, law: a.dist.clone(), replicas: a.replicas, seed: a.seed, workers };
    let mut checks = verify::run_suite(a.suite, &params)?;
    if let Some(tol) = a.tol {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(usage(format!("--tol must be non-negative, got {tol}")));
        }
        verify::override_tolerance(&mut checks, tol);
    }
    let dist = a.dist.as_ref().map(|d| d.to_string()).unwrap_or_default();
    let rows: Vec<Row> = checks
        .iter()
        .map(|c| Row {
            abs_error: Some((c.observed - c.target).abs()).filter(|e| e.is_finite()),
            method: if c.passed { "pass".into() } else { "fail".into() },
            replicas: c.replicas,
            stderr: c.stderr,
            ..Row::new(a.lambda, &dist, &format!("verify:{}", a.suite), c.name.clone(), c.observed)
        })
        .collect();
    let text = match a.out {
        OutFormat::Table => {
            let mut s = String::new();
            for c in &checks {
                s.push_str(&format!(
                    "{} {}  observed={}  target={}  allowed={}\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    format_num(c.observed),
                    format_num(c.target),
                    format_num(c.allowed)
                ));
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            s.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
            s
        }
        f => render(&rows, f),
    };
    if checks.iter().all(|c| c.passed) {
        Ok(text)
    } else {
        let _ = out.write_all(text.as_bytes());
        Err(Failure::Verification)
    }
}

fn cmd_renewal(a: RenewalArgs) -> std::result::Result<(Vec<Row>, OutFormat), Failure> {
    let alpha = if a.effective {
        let lambda = check_lambda(a.lambda.ok_or_else(|| usage("--effective needs --lambda"))?)?;
        a.lifetime.clone().effective(lambda)?
    } else {
        a.lifetime.clone()
    };
    let lambda = if a.effective { a.lambda } else { None };
    let label = a.lifetime.to_string();
    let model = "firework";
    let data = firework::renewal_sequence(&alpha, a.n)?;
    let mut rows = Vec::new();
    for (n, u) in data.u.iter().enumerate() {
        rows.push(Row::new(lambda, &label, model, format!("u_{n}"), *u).method("renewal"));
    }
    for (k, f) in data.f.iter().enumerate().skip(1) {
        rows.push(Row::new(lambda, &label, model, format!("f_{k}"), *f).method("renewal"));
    }
    rows.push(Row::new(lambda, &label, model, "f_infinity", data.f_infinity).method("product"));
    let pf = firework::firework_survival(&alpha)?;
    rows.push(Row::exact(lambda, &label, model, "survival", &pf));
    let ef = firework::firework_expected_range(&alpha)?;
    rows.push(Row::exact(lambda, &label, model, "expected_range", &ef));
    if let Some(l) = lambda {
        let gipc = "gipc";
        rows.push(Row::new(lambda, &label, gipc, "survival", firework::bridge_survival(l, pf.to_f64())?).method("bridge"));
        rows.push(Row::new(lambda, &label, gipc, "expected_catastrophes", firework::bridge_expected(l, ef.value)?).method("bridge"));
    }
    Ok((rows, a.out))
}

fn cmd_sweep(a: SweepArgs, workers: Option<usize>) -> std::result::Result<(Vec<Row>, OutFormat), Failure> {
    if a.model.model == ModelKind::Firework {
        return Err(usage("sweep covers the classical, cat, ind and gipc models"));
    }
    let points = a.grid.points();
    if points.first().is_some_and(|l| *l <= 0.0) {
        return Err(usage("grid rates must be positive"));
    }
    let mut rows = Vec::new();
    for lambda in points {
        rows.extend(exact_rows(&a.model, lambda, None)?.into_iter().filter(|r| {
            matches!(r.quantity.as_str(), "expected_catastrophes" | "survival")
        }));
        if let Some(n) = a.replicas {
            if n == 0 {
                return Err(usage("--replicas must be at least 1"));
            }
            let (model, _) = sim_model(&a.model, Some(lambda), false)?;
            let config = SimConfig::new(model, n, a.seed);
            rows.extend(
                simulation_rows(&a.model, &config, Some(lambda), workers)?
                    .into_iter()
                    .filter(|r| r.quantity == "mean_catastrophes"),
            );
        }
    }
    Ok((rows, a.out))
}

fn cmd_drift(a: DriftArgs) -> std::result::Result<(Vec<Row>, OutFormat), Failure> {
    let lambda = check_lambda(a.lambda)?;
    let label = a.dist.to_string();
    let rows = (0..=a.imax)
        .map(|i| Ok(Row::new(Some(lambda), &label, "cat", format!("drift_{i}"), exact::foster_drift(lambda, &a.dist, i)?).method("closed_form")))
        .collect::<Result<Vec<Row>>>()?;
    Ok((rows, a.out))
}

/// Parses a CSV report back into `(quantity, value)` pairs.
pub fn parse_csv_values(text: &str) -> Vec<(String, Option<f64>)> {
    let mut lines = text.lines();
    lines.next();
    lines
        .map(|line| {
            let fields = split_csv(line);
            (fields.get(3).cloned().unwrap_or_default(), fields.get(4).and_then(|v| parse_num(v)))
        })
        .collect()
}

fn split_csv(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => fields.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}
