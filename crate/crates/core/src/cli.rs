//! The `shallowsep` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::ffi::OsString;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::cluster::{bell_prep_experiment, build_cluster};
use crate::lightcone::{backward_lightcone, BooleanDag};
use crate::magic_square::{
    check_relation, check_stst_condition, classical_game_value, classical_generalized_value, sample_msp_output, GameParams,
    MspInstance,
};
use crate::netlist::{classical_decode_circuit, Netlist};
use crate::pipeline::{locality_audit, run_sweep, FtSystem, SweepConfig};
use crate::surface_code::{memory_failures_seeded, threshold_failure_target};
use crate::{NoiseModel, SurfaceCodeLayout};

pub const CONFIG_ERROR: u8 = 2;
pub const ASSERT_FAILED: u8 = 3;
pub const RUN_ERROR: u8 = 1;

/// Experiments on shallow noisy Clifford circuits.
#[derive(Parser, Debug)]
#[command(name = "shallowsep", version)]
struct Cli {
    /// JSON file with the subcommand's parameters (replaces its flags).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; written atomically. Without it, results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed (default 0; ft-sweep defaults to the config's seed). Trial
    /// `i` uses the stream `(seed, i)`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Exit with status 3 when the subcommand's check fails.
    #[arg(long = "assert", global = true)]
    assert_check: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classical value of the magic square game.
    GameValue,
    /// Samples the noiseless circuit and checks the relation.
    MspCheck(MspCheckArgs),
    /// Memory failure rate of the surface-code decoder.
    ScThreshold(ScThresholdArgs),
    /// Logical failure of single-shot Bell preparation.
    BellPrep(BellPrepArgs),
    /// Full pipeline over a grid of distances and noise rates (needs --config).
    FtSweep,
    /// Emits the classical decode circuit as a JSON netlist.
    DecodeNetlist(SizeArgs),
    /// Backward lightcones of a JSON netlist given with --config.
    Lightcone(LightconeArgs),
    /// Largest gate diameter of the embedded pipeline circuit.
    AuditLocality(AuditArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MspCheckArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

impl Default for MspCheckArgs {
    fn default() -> Self {
        MspCheckArgs { n: vec![4, 8, 16], trials: 1000 }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScThresholdArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
    d: Vec<usize>,
    #[arg(long, default_value_t = 0.01)]
    q: f64,
    #[arg(long, default_value_t = 100000)]
    trials: usize,
}

impl Default for ScThresholdArgs {
    fn default() -> Self {
        ScThresholdArgs { d: vec![3, 5, 7], q: 0.01, trials: 100000 }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BellPrepArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    d: Vec<usize>,
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    #[arg(long, value_enum, default_value = "iid-depolarizing")]
    model: ModelArg,
    #[arg(long, default_value_t = 10000)]
    trials: usize,
}

impl Default for BellPrepArgs {
    fn default() -> Self {
        BellPrepArgs { d: vec![3, 4, 5], p: 0.01, model: ModelArg::IidDepolarizing, trials: 10000 }
    }
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModelArg {
    IidDepolarizing,
    IidXz,
}

impl From<ModelArg> for NoiseModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::IidDepolarizing => NoiseModel::IidDepolarizing,
            ModelArg::IidXz => NoiseModel::IidXz,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SizeArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
}

impl Default for SizeArgs {
    fn default() -> Self {
        SizeArgs { n: 2, d: 3 }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AuditArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Diameter checked by --assert; defaults to 2d.
    #[arg(long)]
    max_diameter: Option<f64>,
}

impl Default for AuditArgs {
    fn default() -> Self {
        AuditArgs { n: 3, d: 3, max_diameter: None }
    }
}

#[derive(Args, Debug, Clone)]
struct LightconeArgs {
    /// Only this output wire (default: every output).
    #[arg(long)]
    output: Option<String>,
}

enum Failure {
    Config(String),
    Run(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.into())
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// What a subcommand produced: file contents, a summary line and the check
/// outcome used by --assert.
struct Outcome {
    body: String,
    summary: String,
    check: bool,
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn args_or_config<T: serde::de::DeserializeOwned + Clone>(args: &T, config: &Option<PathBuf>) -> Result<T, Failure> {
    match config {
        Some(p) => load_config(p),
        None => Ok(args.clone()),
    }
}

fn csv_text<R: Serialize>(rows: &[R]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
}

/// Writes `text` next to `path` and renames it into place.
fn write_atomic(path: &Path, text: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path)?;
    Ok(())
}

/// Whether `a` exceeds `b` by more than three combined standard errors.
fn above_3sigma(a: (usize, usize), b: (usize, usize)) -> bool {
    let (ra, rb) = (a.0 as f64 / a.1 as f64, b.0 as f64 / b.1 as f64);
    let se = (ra * (1.0 - ra) / a.1 as f64 + rb * (1.0 - rb) / b.1 as f64).sqrt();
    ra - rb > 3.0 * se
}

#[derive(Serialize)]
struct GameValueRow {
    s: i8,
    t: i8,
    sp: i8,
    tp: i8,
    value: String,
}

fn game_value() -> Result<Outcome, Failure> {
    let rows: Vec<GameValueRow> = GameParams::all()
        .map(|p| GameValueRow { s: p.s, t: p.t, sp: p.sp, tp: p.tp, value: classical_generalized_value(p).to_string() })
        .collect();
    let v = classical_game_value();
    let all_plus = classical_generalized_value(GameParams::TRIVIAL);
    Ok(Outcome {
        body: csv_text(&rows)?,
        summary: format!("classical value {v}"),
        check: v == num_rational::Ratio::new(8, 9) && all_plus == v,
    })
}

#[derive(Serialize)]
struct MspCheckRow {
    n: usize,
    trials: usize,
    relation_fail: usize,
    window_fail: usize,
}

fn msp_check(args: &MspCheckArgs, seed: u64) -> Result<Outcome, Failure> {
    use rayon::prelude::*;
    if args.n.iter().any(|&n| n < 2) || args.trials == 0 {
        return Err(config_error("msp-check needs n >= 2 and trials >= 1"));
    }
    let mut rows = Vec::new();
    for &n in &args.n {
        let fails = (0..args.trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = crate::trial_rng(seed ^ n as u64, i as u64);
                let inst = MspInstance::random(n, &mut rng)?;
                let z = sample_msp_output(n, &inst.z_in(), &mut rng)?;
                Ok((!check_relation(&inst.z_in(), &z)?, !check_stst_condition(&inst, &z)?))
            })
            .collect::<crate::Result<Vec<(bool, bool)>>>()?;
        rows.push(MspCheckRow {
            n,
            trials: args.trials,
            relation_fail: fails.iter().filter(|f| f.0).count(),
            window_fail: fails.iter().filter(|f| f.1).count(),
        });
    }
    let bad: usize = rows.iter().map(|r| r.relation_fail + r.window_fail).sum();
    Ok(Outcome { body: csv_text(&rows)?, summary: format!("{} sizes, {bad} failures", rows.len()), check: bad == 0 })
}

#[derive(Serialize)]
struct ThresholdRow {
    d: usize,
    q: f64,
    trials: usize,
    failures: usize,
    rate: f64,
    bound: f64,
}

fn sc_threshold(args: &ScThresholdArgs, seed: u64) -> Result<Outcome, Failure> {
    if args.d.iter().any(|&d| d < 2) || args.trials == 0 || !(0.0..=1.0).contains(&args.q) {
        return Err(config_error("sc-threshold needs d >= 2, trials >= 1 and 0 <= q <= 1"));
    }
    let mut rows = Vec::new();
    for &d in &args.d {
        let layout = SurfaceCodeLayout::new(d)?;
        let failures = memory_failures_seeded(&layout, args.q, args.trials, seed)?;
        log::info!("d={d}: {failures} failures");
        rows.push(ThresholdRow {
            d,
            q: args.q,
            trials: args.trials,
            failures,
            rate: failures as f64 / args.trials as f64,
            bound: threshold_failure_target(d),
        });
    }
    let decreasing = rows.windows(2).all(|w| w[1].d > w[0].d && above_3sigma((w[0].failures, w[0].trials), (w[1].failures, w[1].trials)));
    let rates: Vec<String> = rows.iter().map(|r| format!("d={}: {:.2e}", r.d, r.rate)).collect();
    Ok(Outcome { body: csv_text(&rows)?, summary: rates.join(", "), check: decreasing })
}

#[derive(Serialize)]
struct BellPrepRow {
    d: usize,
    p: f64,
    model: String,
    trials: usize,
    logical_x_fail: usize,
    logical_z_fail: usize,
    mean_rep_weight: f64,
}

fn bell_prep(args: &BellPrepArgs, seed: u64) -> Result<Outcome, Failure> {
    if args.d.iter().any(|&d| d < 2) || args.trials == 0 || !(0.0..=1.0).contains(&args.p) {
        return Err(config_error("bell-prep needs d >= 2, trials >= 1 and 0 <= p <= 1"));
    }
    let mut rows = Vec::new();
    let mut any = Vec::new();
    for &d in &args.d {
        let lat = build_cluster(d)?;
        let s = bell_prep_experiment(&lat, args.p, args.model.into(), args.trials, seed)?;
        any.push((s.any_fail, s.trials));
        rows.push(BellPrepRow {
            d,
            p: s.p,
            model: s.model.to_string(),
            trials: s.trials,
            logical_x_fail: s.logical_x_fail,
            logical_z_fail: s.logical_z_fail,
            mean_rep_weight: s.mean_rep_weight,
        });
    }
    let decreasing = any.windows(2).all(|w| above_3sigma(w[0], w[1]));
    let summary: Vec<String> = rows.iter().zip(&any).map(|(r, a)| format!("d={}: {}/{} failed", r.d, a.0, a.1)).collect();
    Ok(Outcome { body: csv_text(&rows)?, summary: summary.join(", "), check: decreasing })
}

fn ft_sweep(config: &Option<PathBuf>, seed: Option<u64>) -> Result<Outcome, Failure> {
    let path = config.as_ref().ok_or_else(|| config_error("ft-sweep needs --config"))?;
    let mut cfg: SweepConfig = load_config(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(|e| config_error(e.to_string()))?;
    let rows = run_sweep(&cfg)?;
    let mut check = true;
    let mut summary = Vec::new();
    for &d in &cfg.ds {
        let mut by_p: Vec<(f64, usize)> = cfg
            .ps
            .iter()
            .map(|&p| (p, rows.iter().filter(|r| r.d == d && r.p == p && r.pass).count()))
            .collect();
        by_p.sort_by(|a, b| a.0.total_cmp(&b.0));
        check &= by_p.windows(2).all(|w| !above_3sigma((w[1].1, cfg.trials), (w[0].1, cfg.trials)));
        summary.extend(by_p.iter().map(|(p, k)| format!("d={d} p={p}: {:.3}", *k as f64 / cfg.trials as f64)));
    }
    Ok(Outcome { body: csv_text(&rows)?, summary: summary.join(", "), check })
}

fn decode_netlist(args: &SizeArgs) -> Result<Outcome, Failure> {
    if args.n < 2 || args.d < 2 {
        return Err(config_error("decode-netlist needs n >= 2 and d >= 2"));
    }
    let sys = FtSystem::new(args.n, args.d)?;
    let c = classical_decode_circuit(&sys)?;
    Ok(Outcome {
        body: decode_netlist_json(&c)?,
        summary: format!(
            "{} gates, depth {} (logical depth {}), max fan-in {} <= {}",
            c.netlist.gates.len(),
            c.depth,
            c.logical_depth,
            c.max_fan_in,
            c.fan_in_bound
        ),
        check: c.depth == c.logical_depth + 3 && c.max_fan_in <= c.fan_in_bound,
    })
}

/// The netlist schema plus an `audit` object with the measured quantities.
fn decode_netlist_json(c: &crate::netlist::DecodeCircuit) -> Result<String, Failure> {
    let mut v = serde_json::to_value(&c.netlist)?;
    v["audit"] = serde_json::json!({
        "n": c.n,
        "d": c.d,
        "logical_depth": c.logical_depth,
        "depth": c.depth,
        "max_fan_in": c.max_fan_in,
        "k_controls": c.k_controls,
        "k_qubits": c.k_qubits,
        "m": c.m,
        "m_anc": c.m_anc,
        "fan_in_bound": c.fan_in_bound,
    });
    Ok(serde_json::to_string_pretty(&v)?)
}

#[derive(Serialize)]
struct LightconeRow {
    output: String,
    size: usize,
    inputs: String,
}

fn lightcone(args: &LightconeArgs, config: &Option<PathBuf>) -> Result<Outcome, Failure> {
    let path = config.as_ref().ok_or_else(|| config_error("lightcone needs --config with a JSON netlist"))?;
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let dag: BooleanDag = Netlist::from_json(&text).map_err(|e| config_error(e.to_string()))?;
    let outputs = match &args.output {
        Some(o) => vec![o.clone()],
        None => dag.outputs.clone(),
    };
    let depth = dag.depth()?;
    let k = dag.max_fan_in();
    let bound = (k as f64).powi(depth as i32);
    let mut rows = Vec::new();
    for o in outputs {
        let cone = backward_lightcone(&dag, &o).map_err(|e| config_error(e.to_string()))?;
        rows.push(LightconeRow { output: o, size: cone.len(), inputs: cone.into_iter().collect::<Vec<_>>().join(" ") });
    }
    let largest = rows.iter().map(|r| r.size).max().unwrap_or(0);
    Ok(Outcome {
        body: csv_text(&rows)?,
        summary: format!("depth {depth}, fan-in {k}, largest cone {largest} (K^D = {bound})"),
        check: largest as f64 <= bound,
    })
}

fn audit_locality(args: &AuditArgs) -> Result<Outcome, Failure> {
    if args.n < 2 || args.d < 2 {
        return Err(config_error("audit-locality needs n >= 2 and d >= 2"));
    }
    let sys = FtSystem::new(args.n, args.d)?;
    let diameter = locality_audit(sys.full_circuit())?;
    let limit = args.max_diameter.unwrap_or(2.0 * args.d as f64);
    let body = serde_json::to_string_pretty(&serde_json::json!({
        "n": args.n,
        "d": args.d,
        "qubits": sys.full_circuit().n(),
        "depth": sys.full_circuit().depth(),
        "diameter": diameter,
    }))?;
    Ok(Outcome { body, summary: format!("max gate diameter {diameter:.3}"), check: diameter <= limit })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::GameValue => game_value(),
        Command::MspCheck(a) => msp_check(&args_or_config(a, &cli.config)?, seed),
        Command::ScThreshold(a) => sc_threshold(&args_or_config(a, &cli.config)?, seed),
        Command::BellPrep(a) => bell_prep(&args_or_config(a, &cli.config)?, seed),
        Command::FtSweep => ft_sweep(&cli.config, cli.seed),
        Command::DecodeNetlist(a) => decode_netlist(&args_or_config(a, &cli.config)?),
        Command::Lightcone(a) => lightcone(a, &cli.config),
        Command::AuditLocality(a) => audit_locality(&args_or_config(a, &cli.config)?),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit status.
pub fn run_from_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("SHALLOWSEP_LOG", "warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { CONFIG_ERROR } else { 0 };
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("config error: --jobs must be at least 1");
            return CONFIG_ERROR;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            log::warn!("thread pool already set up: {e}");
        }
    }
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            return CONFIG_ERROR;
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            return RUN_ERROR;
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, &outcome.body) {
                eprintln!("error: cannot write {}: {e:#}", path.display());
                return RUN_ERROR;
            }
            println!("{}", outcome.summary);
        }
        None => {
            print!("{}", outcome.body);
            if !outcome.body.ends_with('\n') {
                println!();
            }
            eprintln!("{}", outcome.summary);
        }
    }
    if cli.assert_check && !outcome.check {
        eprintln!("check failed");
        return ASSERT_FAILED;
    }
    0
}
