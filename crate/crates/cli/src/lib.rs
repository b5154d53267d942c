//! `oqsl` command-line driver.
//!
//! Exit codes: 0 success, 1 an evaluated bound is invalid (or a scenario or
//! audit failed), 2 bad input, 3 numerical failure.

pub mod audit;
pub mod engine;

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oqsl::bounds::{AuditMutation, BoundId, BoundOptions, BoundReport};
use oqsl::dynamics::{DynamicsKind, TimeGrid};
use oqsl::scenarios::{run_scenario, write_csv, Cell, ScenarioError, SCHEMA_VERSION};
use oqsl::sysdl::{parse_system, serialize, SystemSpec, DEPHASING_SYS, TIGHT_QUBIT_SYS};
use serde::Serialize;

use crate::audit::{run_audit, threads_from_env, AuditConfig};
use crate::engine::{evaluate, EngineError, Problem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "oqsl", version, about = "Quantum speed limits for observables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate speed limits for one observable.
    Bound(BoundArgs),
    /// Print the observable trajectory.
    Evolve(EvolveArgs),
    /// Run a built-in worked example against its closed form.
    Scenario(ScenarioArgs),
    /// Check bound validity on randomly sampled systems.
    Audit(AuditArgs),
    /// Validate a system file and print it in canonical form.
    Parse(ParseArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Path to a `.sys` file, or `builtin:dephasing` / `builtin:tight-qubit`.
    #[arg(long)]
    pub system: String,
    /// Observable name; defaults to the first one declared.
    #[arg(long)]
    pub observable: Option<String>,
    /// Override the file's ħ.
    #[arg(long)]
    pub hbar: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Final time T.
    #[arg(long)]
    pub tmax: f64,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Comma-separated bound ids, or ALL for every applicable one.
    #[arg(long, default_value = "ALL")]
    pub bounds: String,
    /// Second operator (commutator partner, battery charging Hamiltonian).
    #[arg(long)]
    pub partner: Option<String>,
    /// Validity tolerance on `T ≥ t_qsl`.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long)]
    pub tmax: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// tight-qubit, dephasing or battery-degenerate.
    pub name: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random qubit systems.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Random qutrit systems.
    #[arg(long, default_value_t = 50)]
    pub qutrit_trials: usize,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Corrupt one inequality on purpose (testing the auditor).
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(long)]
    pub system: String,
    /// Print a JSON summary instead of the canonical text.
    #[arg(long)]
    pub json: bool,
}

/// A failure with its exit code; the message goes to stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Self {
            code: if e.is_numeric() { EXIT_NUMERIC } else { EXIT_INPUT },
            message: e.to_string(),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Bound(a) => cmd_bound(&a, out),
        Command::Evolve(a) => cmd_evolve(&a, out),
        Command::Scenario(a) => cmd_scenario(&a, out),
        Command::Audit(a) => cmd_audit(&a, out),
        Command::Parse(a) => cmd_parse(&a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("write failed: {e}"),
    })
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Reads and parses a system file or built-in example.
pub fn load_system(source: &str) -> Result<SystemSpec, String> {
    let (label, text) = match source.strip_prefix("builtin:") {
        Some("dephasing") => (source.to_string(), DEPHASING_SYS.to_string()),
        Some("tight-qubit") => (source.to_string(), TIGHT_QUBIT_SYS.to_string()),
        Some(other) => return Err(format!("unknown built-in system `{other}`")),
        None => (
            source.to_string(),
            std::fs::read_to_string(source).map_err(|e| format!("cannot read {source}: {e}"))?,
        ),
    };
    parse_system(&text).map_err(|e| e.render(&label))
}

struct Loaded {
    spec: SystemSpec,
    name: String,
    observable: oqsl::ComplexMatrix,
}

fn load(args: &SystemArgs) -> Result<Loaded, Failure> {
    let mut spec = load_system(&args.system).map_err(Failure::input)?;
    if let Some(h) = args.hbar {
        if !(h.is_finite() && h > 0.0) {
            return Err(Failure::input(format!("--hbar must be positive, got {h}")));
        }
        spec = spec.with_hbar(h);
    }
    let name = match &args.observable {
        Some(n) => n.clone(),
        None => spec
            .observable_names()
            .next()
            .ok_or_else(|| Failure::input("system declares no observables"))?
            .to_string(),
    };
    let observable = spec
        .observable(&name)
        .ok_or_else(|| {
            let known: Vec<&str> = spec.observable_names().collect();
            Failure::input(format!("unknown observable `{name}` (declared: {})", known.join(", ")))
        })?
        .clone();
    Ok(Loaded { spec, name, observable })
}

fn grid(tmax: f64, steps: usize) -> Result<TimeGrid<f64>, Failure> {
    if !(tmax.is_finite() && tmax > 0.0) {
        return Err(Failure::input(format!("--tmax must be positive, got {tmax}")));
    }
    if steps < 2 {
        return Err(Failure::input(format!("--steps must be at least 2, got {steps}")));
    }
    TimeGrid::span(tmax, steps).map_err(|e| Failure::input(e.to_string()))
}

fn parse_bound_list(list: &str) -> Result<(Vec<BoundId>, bool), Failure> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok((BoundId::ALL.to_vec(), false));
    }
    let ids = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<BoundId>().map_err(|e| Failure::input(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if ids.is_empty() {
        return Err(Failure::input("--bounds is empty"));
    }
    Ok((ids, true))
}

#[derive(Serialize)]
struct Skipped {
    bound_id: BoundId,
    reason: String,
}

#[derive(Serialize)]
struct BoundOutput<'a> {
    schema_version: u32,
    system_digest: &'a str,
    observable: &'a str,
    dynamics: DynamicsKind,
    hbar: f64,
    reports: &'a [BoundReport],
    skipped: Vec<Skipped>,
}

fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> Outcome {
    if !(a.tol.is_finite() && a.tol >= 0.0) {
        return Err(Failure::input(format!("--tol must be non-negative, got {}", a.tol)));
    }
    let loaded = load(&a.system)?;
    let (ids, strict) = parse_bound_list(&a.bounds)?;
    let partner = match &a.partner {
        Some(n) => Some(
            loaded
                .spec
                .observable(n)
                .ok_or_else(|| Failure::input(format!("unknown partner observable `{n}`")))?
                .clone(),
        ),
        None => None,
    };
    let problem = Problem {
        generator: loaded.spec.generator(),
        observable: loaded.observable.clone(),
        partner,
        state: loaded.spec.initial_state.clone(),
        grid: grid(a.tmax, a.steps)?,
    };
    let opts = BoundOptions {
        valid_tol: a.tol,
        ..BoundOptions::default()
    };
    let eval = evaluate(&problem, &ids, strict, &opts)?;
    let reports: Vec<BoundReport> = eval
        .reports
        .into_iter()
        .map(|mut r| {
            r.inputs_digest = Some(loaded.spec.source_digest.clone());
            r
        })
        .collect();
    let text = match a.format {
        Format::Csv => {
            let columns: Vec<String> = ["bound_id", "T", "t_qsl", "valid", "slack"].map(String::from).to_vec();
            let rows: Vec<Vec<Cell>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.bound_id.as_str().into(),
                        r.t.into(),
                        r.t_qsl.into(),
                        if r.valid { "true" } else { "false" }.into(),
                        r.slack().into(),
                    ]
                })
                .collect();
            write_csv(&columns, &rows)
        }
        Format::Json => json(&BoundOutput {
            schema_version: SCHEMA_VERSION,
            system_digest: &loaded.spec.source_digest,
            observable: &loaded.name,
            dynamics: loaded.spec.dynamics,
            hbar: loaded.spec.hbar,
            reports: &reports,
            skipped: eval
                .skipped
                .into_iter()
                .map(|(bound_id, reason)| Skipped { bound_id, reason })
                .collect(),
        }),
    };
    emit(out, &text)?;
    Ok(if reports.iter().all(|r| r.valid) { EXIT_OK } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct EvolveOutput<'a> {
    schema_version: u32,
    system_digest: &'a str,
    observable: &'a str,
    dynamics: DynamicsKind,
    t: Vec<f64>,
    expect: &'a [f64],
    stddev: &'a [f64],
    speed_hs: &'a [f64],
    speed_op: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    kraus_speed_hs: Option<&'a [f64]>,
}

fn cmd_evolve(a: &EvolveArgs, out: &mut dyn Write) -> Outcome {
    let loaded = load(&a.system)?;
    let grid = grid(a.tmax, a.steps)?;
    let traj = oqsl::dynamics::evolve_heisenberg(
        &loaded.observable,
        &loaded.spec.generator(),
        &loaded.spec.initial_state,
        &grid,
        &Default::default(),
    )
    .map_err(|e| Failure::from(EngineError::from(e)))?;
    let times: Vec<f64> = grid.times().collect();
    let text = match a.format {
        Format::Csv => {
            let mut columns: Vec<String> = ["t", "expect", "stddev", "speed_hs", "speed_op"].map(String::from).to_vec();
            if traj.kraus_speed_hs.is_some() {
                columns.push("kraus_speed_hs".into());
            }
            let rows: Vec<Vec<Cell>> = (0..times.len())
                .map(|k| {
                    let mut row: Vec<Cell> = vec![
                        times[k].into(),
                        traj.expect[k].into(),
                        traj.stddev[k].into(),
                        traj.gen_speed_hs[k].into(),
                        traj.gen_speed_op[k].into(),
                    ];
                    if let Some(ks) = &traj.kraus_speed_hs {
                        row.push(ks[k].into());
                    }
                    row
                })
                .collect();
            write_csv(&columns, &rows)
        }
        Format::Json => json(&EvolveOutput {
            schema_version: SCHEMA_VERSION,
            system_digest: &loaded.spec.source_digest,
            observable: &loaded.name,
            dynamics: traj.kind,
            t: times,
            expect: &traj.expect,
            stddev: &traj.stddev,
            speed_hs: &traj.gen_speed_hs,
            speed_op: &traj.gen_speed_op,
            kraus_speed_hs: traj.kraus_speed_hs.as_deref(),
        }),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_scenario(a: &ScenarioArgs, out: &mut dyn Write) -> Outcome {
    let result = run_scenario(&a.name).map_err(|e| match e {
        ScenarioError::Unknown(_) | ScenarioError::Parameter(_) => Failure::input(e.to_string()),
        other => Failure {
            code: EXIT_NUMERIC,
            message: other.to_string(),
        },
    })?;
    let text = match a.format {
        Format::Csv => result.to_csv(),
        Format::Json => {
            let mut s = result.to_json();
            s.push('\n');
            s
        }
    };
    emit(out, &text)?;
    Ok(if result.pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_audit(a: &AuditArgs, out: &mut dyn Write) -> Outcome {
    let cfg = AuditConfig {
        seed: a.seed,
        trials: a.trials,
        qutrit_trials: a.qutrit_trials,
        steps: a.steps,
        tol: a.tol,
        threads: threads_from_env(),
        mutation: if a.inject_fault {
            AuditMutation::FlipRobertsonSign
        } else {
            AuditMutation::None
        },
    };
    if cfg.steps < 4 {
        return Err(Failure::input("--steps must be at least 4"));
    }
    let summary = run_audit(&cfg).map_err(|e| Failure {
        code: if e.source.is_numeric() { EXIT_NUMERIC } else { EXIT_INPUT },
        message: e.to_string(),
    })?;
    let text = match a.format {
        Format::Csv => {
            let columns: Vec<String> = ["check", "evaluated", "max_violation", "pass"].map(String::from).to_vec();
            let rows: Vec<Vec<Cell>> = summary
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.as_str().into(),
                        (c.evaluated as f64).into(),
                        c.max_violation.map_or(Cell::Text(String::new()), Cell::Num),
                        if c.pass { "true" } else { "false" }.into(),
                    ]
                })
                .collect();
            write_csv(&columns, &rows)
        }
        Format::Json => json(&summary),
    };
    emit(out, &text)?;
    Ok(if summary.pass { EXIT_OK } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct ParseSummary<'a> {
    schema_version: u32,
    digest: &'a str,
    dim: usize,
    hbar: f64,
    dynamics: DynamicsKind,
    observables: Vec<&'a str>,
    jumps: usize,
    purity: f64,
}

fn cmd_parse(a: &ParseArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let spec = match load_system(&a.system) {
        Ok(s) => s,
        Err(diagnostics) => {
            let _ = writeln!(err, "{diagnostics}");
            return Ok(EXIT_INPUT);
        }
    };
    let text = match a.json {
        false => serialize(&spec),
        true => json(&ParseSummary {
            schema_version: SCHEMA_VERSION,
            digest: &spec.source_digest,
            dim: spec.dim,
            hbar: spec.hbar,
            dynamics: spec.dynamics,
            observables: spec.observable_names().collect(),
            jumps: spec.jumps.len(),
            purity: spec.initial_state.purity(),
        }),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}
