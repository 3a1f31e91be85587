//! `ecshor` command-line tool.

mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_integer::Integer;
use serde::Serialize;
use serde_json::{json, Value};

use ecshor::dlp_sim::{run_trial, success_probability, SimMode};
use ecshor::ec_group::{find_instance_with_order, find_toy_instance, DlpInstance, EcError};
use ecshor::euclid_machine::{
    average_cycles, cycle_count, perturbation_stats, quotient_distribution, run_inverse, run_inverse_traced,
    verify_bound, MachineConfig, TraceRow,
};
use ecshor::group_shift::{fidelity_audit, FidelityAudit};
use ecshor::reversible_core::{CostClass, CostLedger, Fault};
use ecshor::resource_model::{
    comparison_table, estimate, render_table_text, DEFAULT_EPSILON, TABLE_CSV_HEADER,
};
use ecshor::rng::stream;

use output::{Doc, Manifest};

#[derive(Parser, Debug)]
#[command(name = "ecshor", version, about = "Reversible Euclid machine, DLP simulation and resource estimates")]
struct Cli {
    /// Run seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(untagged)]
enum Cmd {
    /// x^-1 mod p on the Euclid machine.
    Inverse(InverseArgs),
    /// Checks t(p, x) <= 4.5 log2 p for all p up to --pmax.
    VerifyBound(BoundArgs),
    /// Monte Carlo statistics of Euclid runs.
    Stats(StatsArgs),
    /// Exact success probability of the post-processing.
    Success(SuccessArgs),
    /// Sampled end-to-end runs on a toy instance, as JSON lines.
    Simulate(SimulateArgs),
    /// Qubit and time estimates for an n-bit curve.
    Estimate(EstimateArgs),
    /// RSA vs ECC comparison table.
    Table(TableArgs),
    /// Exceptional-case fidelity loss over random walks.
    Audit(AuditArgs),
}

#[derive(Args, Debug, Serialize)]
struct InverseArgs {
    #[arg(long)]
    p: String,
    #[arg(long)]
    x: String,
    #[arg(long)]
    no_sharing: bool,
    /// Include the per-cycle register trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug, Serialize)]
struct BoundArgs {
    #[arg(long, default_value_t = 10_000)]
    pmax: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum StatsKind {
    Perturbation,
    Quotients,
    Cycles,
}

#[derive(Args, Debug, Serialize)]
struct StatsArgs {
    #[arg(long, value_enum)]
    kind: StatsKind,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
}

#[derive(Args, Debug, Serialize)]
struct SuccessArgs {
    /// Prime group order.
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 3)]
    window: u64,
    /// Discrete log; defaults to that of the instance derived from --seed.
    #[arg(long)]
    d: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    /// Bit size of the toy group order.
    #[arg(long)]
    qbits: u32,
    /// Register size; defaults to ceil(log2 q) + 2.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 3)]
    window: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Analytic)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1000)]
    runs: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Analytic,
    Semiclassical,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    sharing: bool,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Args, Debug, Serialize)]
struct TableArgs {
    /// Aligned text instead of CSV.
    #[arg(long)]
    text: bool,
}

#[derive(Args, Debug, Serialize)]
struct AuditArgs {
    /// Group order; defaults to a toy instance of --qbits bits.
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, default_value_t = 10)]
    qbits: u32,
    /// Shifts per register; defaults to the bit length of q.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 100_000)]
    walks: u64,
}

/// Exit 2 for usage and domain faults, 3 for invariant breaches.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Internal(String),
}

impl From<Fault> for CliError {
    fn from(f: Fault) -> Self {
        match f {
            Fault::Domain(_) | Fault::DivByZero => CliError::Usage(f.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<EcError> for CliError {
    fn from(e: EcError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ecshor::dlp_sim::SimError> for CliError {
    fn from(e: ecshor::dlp_sim::SimError) -> Self {
        CliError::Usage(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| {
        eprintln!("ecshor: internal error: {info}");
        std::process::exit(3);
    }));
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(doc) => {
            let bytes = doc.render();
            let written = match &cli.out {
                Some(path) => std::fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(bytes.as_bytes()).map_err(|e| e.to_string())
                }
            };
            if let Err(e) = written {
                eprintln!("ecshor: {e}");
                return ExitCode::from(2);
            }
            for line in &doc.notes {
                eprintln!("{line}");
            }
            eprintln!("wall_clock_seconds={:.3}", start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(m)) => {
            eprintln!("ecshor: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(m)) => {
            eprintln!("ecshor: invariant breach: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<Doc> {
    let (name, default_format) = match &cli.cmd {
        Cmd::Inverse(_) => ("inverse", Format::Json),
        Cmd::VerifyBound(_) => ("verify-bound", Format::Csv),
        Cmd::Stats(_) => ("stats", Format::Csv),
        Cmd::Success(_) => ("success", Format::Csv),
        Cmd::Simulate(_) => ("simulate", Format::Json),
        Cmd::Estimate(_) => ("estimate", Format::Csv),
        Cmd::Table(_) => ("table", Format::Csv),
        Cmd::Audit(_) => ("audit", Format::Csv),
    };
    let format = cli.format.unwrap_or(default_format);
    let manifest = Manifest::new(name, &cli.cmd, cli.seed, format);
    let seed = cli.seed;
    match &cli.cmd {
        Cmd::Inverse(a) => cmd_inverse(a, manifest),
        Cmd::VerifyBound(a) => cmd_verify_bound(a, manifest),
        Cmd::Stats(a) => cmd_stats(a, seed, manifest),
        Cmd::Success(a) => cmd_success(a, seed, manifest),
        Cmd::Simulate(a) => cmd_simulate(a, seed, manifest),
        Cmd::Estimate(a) => cmd_estimate(a, manifest),
        Cmd::Table(a) => cmd_table(a, manifest),
        Cmd::Audit(a) => cmd_audit(a, seed, manifest),
    }
}

fn parse_big(name: &str, s: &str) -> Result<BigUint> {
    s.parse().map_err(|_| CliError::Usage(format!("--{name} must be a non-negative decimal integer, got {s:?}")))
}

fn ledger_json(l: &CostLedger) -> Value {
    let mut m = serde_json::Map::new();
    for c in CostClass::ALL {
        m.insert(c.name().into(), json!({ "events": l.events(c).to_string(), "width_sum": l.width_sum(c).to_string() }));
    }
    m.insert("total_tenths".into(), json!(l.total_tenths().to_string()));
    Value::Object(m)
}

fn trace_json(r: &TraceRow) -> Value {
    json!({
        "step": r.step, "c": r.c, "f": r.f,
        "a": r.a.to_string(), "A": r.big_a.to_string(), "b": r.b.to_string(), "B": r.big_b.to_string(),
        "i": r.i, "q": r.q.to_string(), "h": r.h, "ledger_tenths": r.ledger_tenths.to_string(),
    })
}

fn cmd_inverse(a: &InverseArgs, m: Manifest) -> Result<Doc> {
    let p = parse_big("p", &a.p)?;
    let x = parse_big("x", &a.x)?;
    if p < BigUint::from(2u32) {
        return Err(CliError::Usage("--p must be at least 2".into()));
    }
    if x == BigUint::ZERO || x >= p || x.gcd(&p) != BigUint::from(1u32) {
        return Err(CliError::Usage(format!("x = {x} has no inverse mod {p}: need 0 < x < p and gcd(x, p) = 1")));
    }
    let cfg = if a.no_sharing { MachineConfig::no_sharing() } else { MachineConfig::default() };
    let (res, trace) = if a.trace {
        let (r, t) = run_inverse_traced(&x, &p, &cfg)?;
        (r, Some(t))
    } else {
        (run_inverse(&x, &p, &cfg)?, None)
    };
    let formula = cycle_count(&p, &x);
    if res.failure.is_none() && res.cycles_used != formula {
        return Err(CliError::Internal(format!("cycles_used {} differs from the cycle formula {formula}", res.cycles_used)));
    }
    match m.format {
        Format::Json => {
            let mut v = json!({
                "p": p.to_string(),
                "x": x.to_string(),
                "inverse": res.inverse.as_ref().map(|v| v.to_string()),
                "raw_output": res.raw_output.as_ref().map(|v| v.to_string()),
                "correction_flag": res.correction_flag,
                "cycles_used": res.cycles_used,
                "cycle_formula": formula,
                "halting_count": res.halting_count,
                "budget": res.budget,
                "failure": res.failure.map(|f| format!("{f:?}")),
                "quotients": res.quotients.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                "ledger": ledger_json(&res.ledger),
            });
            if let Some(t) = &trace {
                v["trace"] = Value::Array(t.iter().map(trace_json).collect());
            }
            Ok(Doc::json(m, v))
        }
        Format::Csv => {
            if let Some(t) = trace {
                let rows = t.iter().map(|r| r.csv()).collect();
                Ok(Doc::csv(m, TraceRow::HEADER, rows))
            } else {
                let q: Vec<String> = res.quotients.iter().map(|q| q.to_string()).collect();
                let row = format!(
                    "{},{},{},{},{},{},{},{}",
                    p,
                    x,
                    res.inverse.map(|v| v.to_string()).unwrap_or_default(),
                    res.cycles_used,
                    res.halting_count,
                    res.budget,
                    res.failure.map(|f| format!("{f:?}")).unwrap_or_default(),
                    q.join(" ")
                );
                Ok(Doc::csv(m, "p,x,inverse,cycles_used,halting_count,budget,failure,quotients", vec![row]))
            }
        }
    }
}

fn cmd_verify_bound(a: &BoundArgs, m: Manifest) -> Result<Doc> {
    if a.pmax < 3 {
        return Err(CliError::Usage("--pmax must be at least 3".into()));
    }
    let r = verify_bound(a.pmax);
    let note = format!(
        "{} violations, max ratio {} at ({},{})",
        r.violations.len(),
        r.max_ratio,
        r.argmax.0,
        r.argmax.1
    );
    let mut doc = match m.format {
        Format::Json => Doc::json(
            m,
            json!({
                "p_max": r.p_max,
                "pairs_checked": r.pairs_checked,
                "prime_pairs_checked": r.prime_pairs_checked,
                "violations": r.violations,
                "max_ratio": r.max_ratio,
                "argmax": [r.argmax.0, r.argmax.1],
                "argmax_cycles": r.argmax_cycles,
            }),
        ),
        Format::Csv => Doc::csv(
            m,
            "p_max,pairs_checked,prime_pairs_checked,violations,max_ratio,argmax_p,argmax_x,argmax_cycles",
            vec![format!(
                "{},{},{},{},{},{},{},{}",
                r.p_max,
                r.pairs_checked,
                r.prime_pairs_checked,
                r.violations.len(),
                r.max_ratio,
                r.argmax.0,
                r.argmax.1,
                r.argmax_cycles
            )],
        ),
    };
    doc.notes.push(note);
    Ok(doc)
}

fn cmd_stats(a: &StatsArgs, seed: u64, m: Manifest) -> Result<Doc> {
    if a.n < 3 || a.trials == 0 {
        return Err(CliError::Usage("need --n >= 3 and --trials >= 1".into()));
    }
    match a.kind {
        StatsKind::Perturbation => {
            let s = perturbation_stats(a.n, a.trials, seed);
            let row = format!("{},{},{},{},{},{},{},{}", s.n, s.trials, s.seed, s.mean, s.std_dev, s.max, s.margin, s.over_margin);
            Ok(table_doc(m, "n,trials,seed,mean,stddev,max,margin,over_margin", vec![row], || serde_json::to_value(&s)))
        }
        StatsKind::Cycles => {
            let s = average_cycles(a.n, a.trials, seed);
            let row = format!(
                "{},{},{},{},{},{},{},{}",
                s.n, s.trials, s.seed, s.mean, s.std_dev, s.max, s.estimate_3_5n, s.quotient_law_prediction
            );
            Ok(table_doc(m, "n,trials,seed,mean,stddev,max,estimate_3_5n,quotient_law_prediction", vec![row], || {
                serde_json::to_value(&s)
            }))
        }
        StatsKind::Quotients => {
            let s = quotient_distribution(a.n, a.trials, seed);
            let rows = s
                .tail
                .iter()
                .map(|t| {
                    format!(
                        "{},{},{},{},{},{},{},{},{}",
                        s.n, s.samples, s.seed, t.q0, t.empirical, t.predicted, s.cap_bits, s.over_cap_rate, s.predicted_rate
                    )
                })
                .collect();
            Ok(table_doc(
                m,
                "n,samples,seed,q0,empirical,predicted,cap_bits,over_cap_rate,predicted_over_cap_rate",
                rows,
                || serde_json::to_value(&s),
            ))
        }
    }
}

fn table_doc(
    m: Manifest,
    header: &str,
    rows: Vec<String>,
    json: impl FnOnce() -> serde_json::Result<Value>,
) -> Doc {
    match m.format {
        Format::Csv => Doc::csv(m, header, rows),
        Format::Json => Doc::json(m, json().expect("stats serialize")),
    }
}

fn cmd_success(a: &SuccessArgs, seed: u64, m: Manifest) -> Result<Doc> {
    let d = match a.d {
        Some(d) => d,
        None => find_instance_with_order(a.q, seed)?.d,
    };
    let s = success_probability(a.q, d, a.n, a.window)?;
    let row = format!("{},{},{},{},{},{},{}", s.q, s.d, s.n, s.window, s.probability, s.peak_window, s.truncation_bound);
    Ok(table_doc(m, "q,d,n,window,probability,peak_window,truncation_bound", vec![row], || serde_json::to_value(&s)))
}

/// Two-sided 99% normal quantile.
const Z99: f64 = 2.5758293035489;

fn default_register(q: u64) -> u32 {
    64 - (q - 1).leading_zeros() + 2
}

fn cmd_simulate(a: &SimulateArgs, seed: u64, m: Manifest) -> Result<Doc> {
    if !(2..=20).contains(&a.qbits) || a.runs == 0 {
        return Err(CliError::Usage("need 2 <= --qbits <= 20 and --runs >= 1".into()));
    }
    let inst: DlpInstance = find_toy_instance(a.qbits, seed)?;
    let n = a.n.unwrap_or_else(|| default_register(inst.q));
    let mode = match a.mode {
        ModeArg::Analytic => SimMode::Analytic,
        ModeArg::Semiclassical => SimMode::Semiclassical,
    };
    let mut records = Vec::with_capacity(a.runs as usize);
    for t in 0..a.runs {
        let mut rng = stream(seed, t);
        let rec = run_trial(&inst, n, a.window, mode, t, &mut rng)?;
        if let Some(d) = rec.recovered_d {
            if d != inst.d {
                return Err(CliError::Internal(format!("verified candidate {d} differs from d = {}", inst.d)));
            }
        }
        records.push(rec);
    }
    let successes = records.iter().filter(|r| r.recovered_d.is_some()).count() as u64;
    let rate = successes as f64 / a.runs as f64;
    let exact = success_probability(inst.q, inst.d, n, a.window).ok();
    let ci = exact.as_ref().map(|e| {
        let p = e.probability;
        let half = Z99 * (p * (1.0 - p) / a.runs as f64).sqrt();
        [p - half, p + e.truncation_bound + half]
    });
    let summary = json!({
        "runs": a.runs,
        "successes": successes,
        "rate": rate,
        "exact_probability": exact.as_ref().map(|e| e.probability),
        "ci99": ci,
        "within_ci99": ci.map(|c| c[0] <= rate && rate <= c[1]),
    });
    let note = format!("success rate {rate} over {} runs", a.runs);
    let mut doc = match m.format {
        Format::Json => {
            let mut lines = vec![json!({ "instance": inst.to_json(), "n": n })];
            lines.extend(records.iter().map(|r| serde_json::to_value(r).expect("record serializes")));
            lines.push(json!({ "summary": summary }));
            Doc::json_lines(m, lines)
        }
        Format::Csv => {
            let rows = records
                .iter()
                .map(|r| {
                    format!(
                        "{},{},{},{},{},{},{},{}",
                        r.seed,
                        r.x,
                        r.y,
                        r.k.map(|k| k.to_string()).unwrap_or_default(),
                        r.recovered_d.map(|k| k.to_string()).unwrap_or_default(),
                        r.window,
                        r.n,
                        r.q
                    )
                })
                .collect();
            Doc::csv(m, "trial,x',y',k,recovered_d,window,n,q", rows)
        }
    };
    doc.notes.push(note);
    doc.notes.push(format!("summary {summary}"));
    Ok(doc)
}

fn cmd_estimate(a: &EstimateArgs, m: Manifest) -> Result<Doc> {
    let e = estimate(a.n, a.sharing, a.epsilon)?;
    let row = format!(
        "{},{},{},{},{},{},{},{},{},{}",
        e.n,
        e.sharing,
        e.epsilon,
        e.qubits_no_sharing,
        e.qubits_sharing,
        e.nbit_additions,
        e.nbit_additions_rounded,
        e.one_qubit_additions,
        e.gates,
        e.toffoli_gates
    );
    Ok(table_doc(
        m,
        "n,sharing,epsilon,qubits_no_sharing,qubits_sharing,nbit_additions,nbit_additions_rounded,one_qubit_additions,gates,toffoli_gates",
        vec![row],
        || serde_json::to_value(&e),
    ))
}

fn cmd_table(a: &TableArgs, m: Manifest) -> Result<Doc> {
    let rows = comparison_table();
    if a.text {
        if m.format == Format::Json {
            return Err(CliError::Usage("--text cannot be combined with --format json".into()));
        }
        return Ok(Doc::text(m, render_table_text(&rows)));
    }
    let csv = rows.iter().map(|r| r.csv()).collect();
    Ok(table_doc(m, TABLE_CSV_HEADER, csv, || serde_json::to_value(&rows)))
}

fn cmd_audit(a: &AuditArgs, seed: u64, m: Manifest) -> Result<Doc> {
    if a.walks == 0 {
        return Err(CliError::Usage("--walks must be positive".into()));
    }
    let inst = match a.q {
        Some(q) => find_instance_with_order(q, seed)?,
        None => find_toy_instance(a.qbits, seed)?,
    };
    let n = a.n.unwrap_or(64 - inst.q.leading_zeros());
    let r: FidelityAudit = fidelity_audit(&inst, n, a.walks, seed);
    if r.infinity_violations != 0 {
        return Err(CliError::Internal(format!("{} walks reached O without an inverse addition", r.infinity_violations)));
    }
    Ok(table_doc(m, FidelityAudit::CSV_HEADER, vec![r.csv_row()], || serde_json::to_value(&r)))
}
