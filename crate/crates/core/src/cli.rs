//! Command-line front end. User indices on the command line and in outputs are 1-based.

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fixtures;
use crate::model::{strength_from_physical, ChannelMatrix, GdofTuple, PhysicalNetwork};
use crate::optimize::{self, dgp::DgpConfig};
use crate::power::{self, AuctionConfig};
use crate::region;
use crate::schedule::{self, LinkGains, NumSolver, Priority, Scheme, SchedulerParams, Utility};
use crate::sim::{self, ExperimentConfig, PowerMode, Scenario, SchemeId, Setup};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

/// Exit code plus the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: EXIT_OK, stdout, stderr: String::new() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tin-gdof", about = "TIN GDoF regions, power control and link scheduling", disable_version_flag = true)]
struct Cli {
    /// Print the version and fixture checksums.
    #[arg(long, global = true)]
    version: bool,
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// Worker threads for data-parallel loops (1 = sequential).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the TINA polytope constraints of a subset.
    Region(RegionArgs),
    /// Minimum power exponents reaching a GDoF tuple.
    Power(PowerArgs),
    /// Decide membership of a GDoF tuple in the TINA region.
    Feasible(FeasibleArgs),
    /// Report the strength conditions per user.
    Check(NetworkArg),
    /// Maximize the weighted sum GDoF.
    Sumgdof(SumGdofArgs),
    /// Run a link scheduler.
    Schedule(ScheduleArgs),
    /// Drift-plus-penalty utility maximization over time slots.
    Num(NumArgs),
    /// Monte-Carlo experiment; prints one CSV row per drop, scheme and power mode.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct NetworkArg {
    /// Network JSON file (strength or physical form).
    #[arg(long)]
    network: std::path::PathBuf,
}

#[derive(Debug, Args)]
struct RegionArgs {
    #[command(flatten)]
    net: NetworkArg,
    /// Active users, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<usize>>,
    /// Constraint description: matching or cyclic.
    #[arg(long, default_value = "matching")]
    form: String,
}

#[derive(Debug, Args)]
struct PowerArgs {
    #[command(flatten)]
    net: NetworkArg,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gdof: Vec<f64>,
    /// hungarian or auction.
    #[arg(long, default_value = "hungarian")]
    solver: String,
    #[arg(long, default_value_t = power::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Replace auction prices by the exact minimum prices of its assignment.
    #[arg(long)]
    snap: bool,
    /// Include the label-update trace (hungarian only).
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct FeasibleArgs {
    #[command(flatten)]
    net: NetworkArg,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gdof: Vec<f64>,
}

#[derive(Debug, Args)]
struct SumGdofArgs {
    #[command(flatten)]
    net: NetworkArg,
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// lp, exact, gp or dgp.
    #[arg(long, default_value = "lp")]
    method: String,
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<usize>>,
    /// Reference SNR for strength-form networks (gp).
    #[arg(long)]
    snr_db: Option<f64>,
    /// Iterations of the decentralized solver.
    #[arg(long, default_value_t = 5000)]
    iters: usize,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    #[command(flatten)]
    net: NetworkArg,
    /// flashlinq, itlinq or itlinq+.
    #[arg(long, default_value = "itlinq+")]
    scheme: String,
    #[arg(long, default_value_t = 0.9)]
    eta: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// ITLinQ exponent.
    #[arg(long, default_value_t = 0.7)]
    itlinq_eta: f64,
    #[arg(long, default_value_t = 25.0, allow_hyphen_values = true)]
    m_db: f64,
    #[arg(long, default_value_t = 9.0, allow_hyphen_values = true)]
    sir_db: f64,
    /// `perm:3,1,2`, `rr[:slot]` or `weights:w1,w2,...`.
    #[arg(long, default_value = "rr")]
    priority: String,
    /// Reference SNR for strength-form networks.
    #[arg(long)]
    snr_db: Option<f64>,
}

#[derive(Debug, Args)]
struct NumArgs {
    #[command(flatten)]
    net: NetworkArg,
    /// linear, log or alpha:<a>.
    #[arg(long, default_value = "log")]
    utility: String,
    #[arg(long, default_value_t = 10.0)]
    v: f64,
    #[arg(long, default_value_t = 2.0)]
    a_max: f64,
    #[arg(long, default_value_t = 1000)]
    slots: usize,
    /// exact, lp or itlinq+.
    #[arg(long, default_value = "exact")]
    solver: String,
    /// Reference SNR for the itlinq+ solver on strength-form networks.
    #[arg(long)]
    snr_db: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Built-in geometry: 1 or 2.
    #[arg(long, default_value_t = 1)]
    scenario: u8,
    /// Scenario JSON overriding the built-in geometry.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Use the synthetic strength model at this SNR instead of a geometry.
    #[arg(long)]
    synthetic_snr_db: Option<f64>,
    #[arg(long, default_value_t = 64)]
    links: usize,
    #[arg(long, default_value_t = 100)]
    drops: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "none,flashlinq,itlinq,itlinq+")]
    schemes: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "full")]
    power_modes: Vec<String>,
    /// Print per-scheme aggregates as JSON instead of the per-drop CSV.
    #[arg(long)]
    summary: bool,
}

/// Strength-form network file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaNetworkFile {
    pub k: usize,
    pub alpha: Vec<Vec<f64>>,
}

/// Physical-form network file: gains in dB (row = Tx), powers in dBm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalNetworkFile {
    pub k: usize,
    pub gains_db: Vec<Vec<f64>>,
    pub tx_power_dbm: Vec<f64>,
    pub noise_dbm: f64,
    pub ref_snr_db: f64,
}

/// A network as read from disk: strengths always, the physical model when given.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInput {
    pub alpha: ChannelMatrix,
    pub physical: Option<PhysicalNetwork>,
}

impl NetworkInput {
    /// Physical model, realizing strength-form input at `snr_db` when needed.
    fn physical_or(&self, snr_db: Option<f64>) -> Result<PhysicalNetwork> {
        if let Some(p) = &self.physical {
            return Ok(p.clone());
        }
        let snr = snr_db.ok_or_else(|| Error::InvalidArgument("strength-form networks need --snr-db".into()))?;
        PhysicalNetwork::from_strengths(&self.alpha, 10f64.powf(snr / 10.0))
    }
}

fn square(k: usize, rows: &[Vec<f64>], what: &str) -> Result<Vec<f64>> {
    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
        return Err(Error::Input(format!("{what} must be a {k}x{k} matrix")));
    }
    Ok(rows.concat())
}

pub fn parse_network(text: &str) -> Result<NetworkInput> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Input(format!("network JSON: {e}")))?;
    if value.get("alpha").is_some() {
        let f: AlphaNetworkFile = serde_json::from_value(value).map_err(|e| Error::Input(format!("network JSON: {e}")))?;
        let alpha = ChannelMatrix::from_flat(f.k, square(f.k, &f.alpha, "alpha")?)?;
        return Ok(NetworkInput { alpha, physical: None });
    }
    let f: PhysicalNetworkFile = serde_json::from_value(value).map_err(|e| Error::Input(format!("network JSON: {e}")))?;
    let gains = square(f.k, &f.gains_db, "gains_db")?.iter().map(|db| 10f64.powf(db / 10.0)).collect();
    if f.tx_power_dbm.len() != f.k {
        return Err(Error::ShapeError { expected: f.k, got: f.tx_power_dbm.len() });
    }
    let caps = f.tx_power_dbm.iter().map(|dbm| 10f64.powf((dbm - 30.0) / 10.0)).collect();
    let noise = 10f64.powf((f.noise_dbm - 30.0) / 10.0);
    let net = PhysicalNetwork::new(f.k, gains, caps, noise, 10f64.powf(f.ref_snr_db / 10.0))?;
    Ok(NetworkInput { alpha: strength_from_physical(&net)?, physical: Some(net) })
}

pub fn alpha_network_json(alpha: &ChannelMatrix) -> String {
    let f = AlphaNetworkFile { k: alpha.k(), alpha: alpha.rows() };
    serde_json::to_string_pretty(&f).expect("serializable")
}

fn read_network(path: &std::path::Path) -> Result<NetworkInput> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_network(&text)
}

fn to_zero_based(k: usize, users: &[usize]) -> Result<Vec<usize>> {
    users
        .iter()
        .map(|&u| if u == 0 || u > k { Err(Error::IndexError { index: u, k }) } else { Ok(u - 1) })
        .collect()
}

fn one_based(users: &[usize]) -> Vec<usize> {
    users.iter().map(|u| u + 1).collect()
}

fn subset_or_all(alpha: &ChannelMatrix, subset: &Option<Vec<usize>>) -> Result<Vec<usize>> {
    match subset {
        Some(s) => to_zero_based(alpha.k(), s),
        None => Ok(alpha.all_users()),
    }
}

fn gdof_arg(alpha: &ChannelMatrix, values: &[f64]) -> Result<GdofTuple> {
    if values.len() != alpha.k() {
        return Err(Error::ShapeError { expected: alpha.k(), got: values.len() });
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("GDoF values must be finite".into()));
    }
    Ok(GdofTuple(values.to_vec()))
}

/// Rounds every float to 12 significant digits; non-finite values become null.
fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

fn finite_or_null(xs: &[f64]) -> Vec<Option<f64>> {
    xs.iter().map(|x| x.is_finite().then_some(*x)).collect()
}

fn render(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_floats(v)).expect("serializable");
    s.push('\n');
    s
}

fn version_text() -> String {
    format!(
        "tin-gdof {}\nfixture fix-a checksum {:016x}\nfixture fix-b checksum {:016x}\n",
        env!("CARGO_PKG_VERSION"),
        fixtures::checksum(&fixtures::fix_a()),
        fixtures::checksum(&fixtures::fix_b())
    )
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InfeasibleGdof | Error::ImmediatelyInfeasible { .. } | Error::InfeasibleOrEpsilonTooLarge { .. } | Error::EmptyRegion => {
            EXIT_INFEASIBLE
        }
        Error::InvalidArgument(_)
        | Error::IndexError { .. }
        | Error::InvalidSubset
        | Error::ShapeError { .. }
        | Error::SubsetTooLarge { .. }
        | Error::TooLargeForExact { .. }
        | Error::OracleLimitExceeded { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                Outcome::ok(text)
            };
        }
    };
    if cli.version {
        return Outcome::ok(version_text());
    }
    let Some(command) = cli.command else {
        return Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: "error: a subcommand is required (see --help)\n".into() };
    };
    if cli.jobs == Some(0) {
        return Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: "error: --jobs must be at least 1\n".into() };
    }
    let result = match cli.jobs {
        Some(j) => Exec::with_jobs(j, |exec| run(command, exec)),
        None => run(command, Exec::default()),
    };
    let (code, text) = match result {
        Ok(pair) => pair,
        Err(e) => {
            return Outcome { code: exit_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") };
        }
    };
    match cli.out {
        Some(path) => match std::fs::write(&path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => Outcome { code: EXIT_FAILURE, stdout: String::new(), stderr: format!("error: {}: {e}\n", path.display()) },
        },
        None => Outcome { code, stdout: text, stderr: String::new() },
    }
}

fn run(command: Command, exec: Exec) -> Result<(i32, String)> {
    match command {
        Command::Region(a) => cmd_region(a, exec),
        Command::Power(a) => cmd_power(a),
        Command::Feasible(a) => cmd_feasible(a),
        Command::Check(a) => cmd_check(a, exec),
        Command::Sumgdof(a) => cmd_sumgdof(a, exec),
        Command::Schedule(a) => cmd_schedule(a),
        Command::Num(a) => cmd_num(a),
        Command::Simulate(a) => cmd_simulate(a, exec),
    }
}

fn cmd_region(a: RegionArgs, exec: Exec) -> Result<(i32, String)> {
    let net = read_network(&a.net.network)?;
    let subset = subset_or_all(&net.alpha, &a.subset)?;
    let constraints = match a.form.as_str() {
        "matching" => region::tina_polytope_with(&net.alpha, &subset, region::DEFAULT_SUBSET_CAP, exec)?.constraints,
        "cyclic" => region::tina_polytope_cyclic(&net.alpha, &subset)?,
        other => return Err(Error::InvalidArgument(format!("unknown form {other:?}"))),
    };
    let out: Vec<Value> = constraints
        .iter()
        .map(|c| json!({"subset": one_based(&c.members), "bound": c.bound}))
        .collect();
    Ok((EXIT_OK, render(Value::Array(out))))
}

fn cmd_power(a: PowerArgs) -> Result<(i32, String)> {
    let net = read_network(&a.net.network)?;
    let d = gdof_arg(&net.alpha, &a.gdof)?;
    if d.iter().any(|x| *x < 0.0) {
        return Err(Error::InvalidArgument("GDoF values must be non-negative".into()));
    }
    let support = d.support(0.0);
    if support.is_empty() {
        let off = vec![None::<f64>; net.alpha.k()];
        return Ok((EXIT_OK, render(json!({"r": off, "y_u": [], "y_v": [], "rounds": 0, "active": []}))));
    }
    let mut trace = None;
    let sol = match a.solver.as_str() {
        "hungarian" => {
            let (sol, t) = power::solve_power_hungarian_traced(&net.alpha, &d, &support)?;
            if a.trace {
                trace = Some(t);
            }
            sol
        }
        "auction" => power::solve_power_auction(
            &net.alpha,
            &d,
            &support,
            AuctionConfig { epsilon: a.epsilon, snap: a.snap, max_bids: None },
        )?,
        other => return Err(Error::InvalidArgument(format!("unknown solver {other:?}"))),
    };
    let mut out = json!({
        "r": finite_or_null(&sol.r),
        "y_u": sol.labels.y_u,
        "y_v": sol.labels.y_v,
        "rounds": sol.rounds,
        "active": one_based(&sol.users),
    });
    if let Some(t) = trace {
        out["trace"] = serde_json::to_value(t).expect("serializable");
    }
    Ok((EXIT_OK, render(out)))
}

fn cmd_feasible(a: FeasibleArgs) -> Result<(i32, String)> {
    let net = read_network(&a.net.network)?;
    let d = gdof_arg(&net.alpha, &a.gdof)?;
    let (inside, support) = region::union_membership(&net.alpha, &d)?;
    let code = if inside { EXIT_OK } else { EXIT_INFEASIBLE };
    Ok((code, render(json!({"feasible": inside, "support": one_based(&support)}))))
}

fn cmd_check(a: NetworkArg, exec: Exec) -> Result<(i32, String)> {
    let net = read_network(&a.network)?;
    let rep = region::check_conditions_with(&net.alpha, exec);
    let wit = |w: &[(usize, usize, usize)]| -> Vec<[usize; 3]> { w.iter().map(|&(i, j, k)| [i + 1, j + 1, k + 1]).collect() };
    let c2 = match &rep.c2 {
        region::C2Status::Fails { subset } => json!({"status": "fails", "subset": one_based(subset)}),
        other => serde_json::to_value(other).expect("serializable"),
    };
    let out = json!({
        "gnaj": rep.gnaj,
        "c1": rep.c1,
        "c2": c2,
        "gnaj_witnesses": wit(&rep.gnaj_witnesses),
        "c1_witnesses": wit(&rep.c1_witnesses),
    });
    Ok((EXIT_OK, render(out)))
}

fn cmd_sumgdof(a: SumGdofArgs, exec: Exec) -> Result<(i32, String)> {
    let net = read_network(&a.net.network)?;
    let alpha = &net.alpha;
    let subset = subset_or_all(alpha, &a.subset)?;
    let out = match a.method.as_str() {
        "lp" => {
            let (d, obj) = optimize::max_weighted_gdof_lp(alpha, &subset, &a.weights)?;
            json!({"method": "lp", "d": d.0, "objective": obj})
        }
        "exact" => {
            if a.subset.is_some() {
                return Err(Error::InvalidArgument("--subset does not apply to the exact search".into()));
            }
            let (d, s, obj) = optimize::lp::max_weighted_gdof_exact_with(alpha, &a.weights, exec)?;
            json!({"method": "exact", "d": d.0, "objective": obj, "subset": one_based(&s)})
        }
        "gp" => {
            let phys = net.physical_or(a.snr_db)?;
            let sol = optimize::gp_power_control(&phys, &subset, &a.weights)?;
            let lp = phys.reference_power.log2();
            json!({
                "method": "gp",
                "powers": sol.powers,
                "sinr": sol.sinr,
                "t": finite_or_null(&sol.t),
                "objective": sol.objective,
                "log_sinr_objective": sol.log_sinr_objective,
                "product_t": sol.product_t,
                "normalized_objective": sol.objective / lp,
                "iterations": sol.iterations,
            })
        }
        "dgp" => {
            let cfg = DgpConfig { iters: a.iters, ..DgpConfig::default() };
            let res = optimize::dgp::decentralized_gp_with(alpha, &subset, &a.weights, cfg, exec)?;
            json!({
                "method": "dgp",
                "r": finite_or_null(&res.r),
                "d": res.d.0,
                "objective": res.objective,
                "residual": res.residual,
                "iterations": res.iterations,
            })
        }
        other => return Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
    };
    Ok((EXIT_OK, render(out)))
}

fn parse_priority(spec: &str, k: usize) -> Result<Priority> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let floats = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad number {t:?} in --priority"))))
            .collect()
    };
    match kind {
        "rr" => {
            let slot = if rest.is_empty() {
                0
            } else {
                rest.parse().map_err(|_| Error::InvalidArgument(format!("bad slot {rest:?}")))?
            };
            Ok(Priority::RoundRobin { slot })
        }
        "perm" => {
            let order: Result<Vec<usize>> = rest
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad link {t:?} in --priority"))))
                .collect();
            Ok(Priority::Order { order: to_zero_based(k, &order?)? })
        }
        "weights" => Ok(Priority::Weights { weights: floats(rest)? }),
        other => Err(Error::InvalidArgument(format!("unknown priority {other:?}"))),
    }
}

fn cmd_schedule(a: ScheduleArgs) -> Result<(i32, String)> {
    let net = read_network(&a.net.network)?;
    let scheme = Scheme::parse(&a.scheme).ok_or_else(|| Error::InvalidArgument(format!("unknown scheme {:?}", a.scheme)))?;
    let params = SchedulerParams { eta: a.eta, gamma: a.gamma, itlinq_eta: a.itlinq_eta, itlinq_m_db: a.m_db, flashlinq_sir_db: a.sir_db };
    let gains = LinkGains::from_network(&net.physical_or(a.snr_db)?);
    let order = parse_priority(&a.priority, gains.n)?.resolve(gains.n)?;
    let s = schedule::run_scheme(scheme, &gains, &order, &params)?;
    let out = json!({
        "scheme": scheme.name(),
        "active": one_based(&s.active_sorted()),
        "admitted": one_based(&s.admitted),
        "signalling": s.signalling,
        "min_incoming": s.min_incoming,
        "min_outgoing": s.min_outgoing,
    });
    Ok((EXIT_OK, render(out)))
}

fn parse_utility(s: &str) -> Result<Utility> {
    match s {
        "linear" => Ok(Utility::Linear),
        "log" => Ok(Utility::log()),
        other => match other.strip_prefix("alpha:").and_then(|x| x.parse::<f64>().ok()) {
            Some(a) if a > 0.0 => Ok(Utility::AlphaFair(a)),
            _ => Err(Error::InvalidArgument(format!("unknown utility {other:?}"))),
        },
    }
}

fn cmd_num(a: NumArgs) -> Result<(i32, String)> {
    let net = read_network(&a.net.network)?;
    let utility = parse_utility(&a.utility)?;
    let solver = match a.solver.as_str() {
        "exact" => NumSolver::Exact,
        "lp" => NumSolver::FullLp,
        "itlinq+" => {
            let reference_power = match (&net.physical, a.snr_db) {
                (Some(p), _) => p.reference_power,
                (None, Some(db)) => 10f64.powf(db / 10.0),
                (None, None) => return Err(Error::InvalidArgument("the itlinq+ solver needs --snr-db for strength-form networks".into())),
            };
            NumSolver::Scheduled { params: SchedulerParams::default(), reference_power }
        }
        other => return Err(Error::InvalidArgument(format!("unknown solver {other:?}"))),
    };
    let tr = schedule::num_run(&net.alpha, utility, a.v, a.a_max, a.slots, &solver)?;
    let out = json!({
        "average": tr.average.0,
        "sum": tr.average.sum(),
        "utility": tr.utility,
        "final_weights": tr.final_weights,
        "max_weight": tr.max_weight,
        "slots": a.slots,
    });
    Ok((EXIT_OK, render(out)))
}

fn cmd_simulate(a: SimulateArgs, exec: Exec) -> Result<(i32, String)> {
    let setup = match (a.synthetic_snr_db, &a.config) {
        (Some(_), Some(_)) => return Err(Error::InvalidArgument("--config and --synthetic-snr-db are exclusive".into())),
        (Some(snr), None) => Setup::Synthetic { n_links: a.links, snr_db: snr },
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            let scenario: Scenario = serde_json::from_str(&text).map_err(|e| Error::Input(format!("scenario JSON: {e}")))?;
            Setup::Geometric { scenario }
        }
        (None, None) => Setup::Geometric {
            scenario: match a.scenario {
                1 => Scenario::scenario1(a.links),
                2 => Scenario::scenario2(a.links),
                other => return Err(Error::InvalidArgument(format!("unknown scenario {other}"))),
            },
        },
    };
    let schemes = a
        .schemes
        .iter()
        .map(|s| SchemeId::parse(s).ok_or_else(|| Error::InvalidArgument(format!("unknown scheme {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let modes = a
        .power_modes
        .iter()
        .map(|s| PowerMode::parse(s).ok_or_else(|| Error::InvalidArgument(format!("unknown power mode {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let cfg = ExperimentConfig::new(setup, schemes, modes, a.drops, a.seed);
    let res = sim::run_experiment_with(&cfg, exec)?;
    if a.summary {
        let rows: Vec<Value> = res
            .aggregates
            .iter()
            .map(|g| {
                json!({
                    "scheme": g.scheme.name(),
                    "power_mode": g.power_mode.name(),
                    "drops": g.drops,
                    "excluded": g.excluded,
                    "tput_mean": g.tput_mean,
                    "tput_ci95": g.tput_ci95,
                    "energy_mean": g.energy_mean,
                    "energy_ci95": g.energy_ci95,
                    "valid": g.valid,
                })
            })
            .collect();
        return Ok((EXIT_OK, render(Value::Array(rows))));
    }
    Ok((EXIT_OK, sim::write_csv(&res.rows)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn network_forms() {
        let a = parse_network(r#"{"k":2,"alpha":[[1,0.5],[0.2,1]]}"#).unwrap();
        assert_eq!(a.alpha.get(0, 1), 0.5);
        assert!(a.physical.is_none());
        let p = parse_network(r#"{"k":1,"gains_db":[[-60]],"tx_power_dbm":[20],"noise_dbm":-100,"ref_snr_db":60}"#).unwrap();
        assert!((p.alpha.direct(0) - 1.0).abs() < 1e-12);
        assert!(matches!(parse_network(r#"{"k":1,"alpha":[[1]],"extra":1}"#), Err(Error::Input(_))));
        assert!(matches!(parse_network(r#"{"k":2,"alpha":[[1]]}"#), Err(Error::Input(_))));
    }

    #[test]
    fn round_trip_of_alpha_form() {
        let a = fixtures::fix_a();
        assert_eq!(parse_network(&alpha_network_json(&a)).unwrap().alpha, a);
    }

    #[test]
    fn float_rounding() {
        let v = round_floats(json!([0.1 + 0.2, 1.0 / 3.0, f64::NAN]));
        assert_eq!(v.to_string(), "[0.3,0.333333333333,null]");
    }

    #[test]
    fn priority_parsing() {
        assert_eq!(parse_priority("perm:2,1", 2).unwrap(), Priority::Order { order: vec![1, 0] });
        assert_eq!(parse_priority("rr:3", 2).unwrap(), Priority::RoundRobin { slot: 3 });
        assert!(parse_priority("perm:0", 2).is_err());
        assert!(parse_priority("bogus", 2).is_err());
    }

    #[test]
    fn usage_errors() {
        assert_eq!(dispatch(["tin-gdof"]).code, EXIT_USAGE);
        assert_eq!(dispatch(["tin-gdof", "region", "--bogus"]).code, EXIT_USAGE);
        let v = dispatch(["tin-gdof", "--version"]);
        assert_eq!(v.code, 0);
        assert!(v.stdout.contains(env!("CARGO_PKG_VERSION")) && v.stdout.contains("checksum"));
    }
}
