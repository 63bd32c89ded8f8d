use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use cachecast_core::channel_sim::{run_full_simulation, SimulationConfig};
use cachecast_core::metrics::{comparison_table, to_csv, ComparisonRow};
use cachecast_core::{
    build_placement_matrix, build_schedule, generate_family, verify_all, verify_schedule, Demand, Schedule,
    SchemeParams,
};
use log::{debug, info};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::{
    parse_user_range, Command, CompareArgs, DemandSpec, Format, OutputArgs, SchemeArgs, SimulateArgs, SweepArgs,
    VerifyArgs,
};

pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, kind: "usage", message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, kind: "io", message: message.into() }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.kind, "message": self.message, "exit_code": self.code })
    }
}

impl From<cachecast_core::Error> for Failure {
    fn from(e: cachecast_core::Error) -> Self {
        Failure { code: EXIT_USAGE, kind: "parameters", message: e.to_string() }
    }
}

/// What a subcommand produced: the artifact text and whether its checks held.
pub struct Outcome {
    pub body: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, passed: true }
    }
}

pub fn run(cmd: &Command) -> Result<Outcome, Failure> {
    let (outcome, output) = match cmd {
        Command::Placement(a) => (placement(a)?, &a.output),
        Command::Dp(a) => (dp(a)?, &a.output),
        Command::Schedule(a) => (schedule(&a.scheme, &a.demand)?, &a.scheme.output),
        Command::Verify(a) => (verify(a)?, &a.output),
        Command::Simulate(a) => (simulate(a)?, &a.scheme.output),
        Command::Compare(a) => (compare(a)?, &a.output),
        Command::Sweep(a) => (sweep(a)?, &a.output),
    };
    emit(output, &outcome.body)?;
    Ok(outcome)
}

fn emit(output: &OutputArgs, body: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => write_atomic(path, body),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::io(format!("writing stdout: {e}")))
        }
    }
}

/// Writes to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, body: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Failure::io(format!("creating temp file in {}: {e}", dir.display())))?;
    tmp.write_all(body.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| Failure::io(format!("writing {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| Failure::io(format!("renaming into {}: {}", path.display(), e.error)))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn params_of(a: &SchemeArgs) -> Result<SchemeParams, Failure> {
    let p = SchemeParams::new(a.users, a.antennas, a.gain, a.library.unwrap_or(a.users))?;
    debug!("parameters {p}");
    Ok(p)
}

fn demand_of(params: &SchemeParams, spec: &str) -> Result<Demand, Failure> {
    match DemandSpec::parse(spec).map_err(Failure::usage)? {
        DemandSpec::Identity => Ok(Demand::identity(params)),
        DemandSpec::Explicit(files) => Ok(Demand::new(params, files)?),
    }
}

fn reject_format(format: Option<Format>, allowed: &[Format], what: &str) -> Result<Format, Failure> {
    let f = format.unwrap_or(allowed[0]);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::usage(format!("{what} does not support {f:?} output")))
    }
}

fn placement(a: &SchemeArgs) -> Result<Outcome, Failure> {
    let params = params_of(a)?;
    let v = build_placement_matrix(&params);
    let body = match reject_format(a.output.format, &[Format::Json, Format::Text], "placement")? {
        Format::Text => v.to_text_grid(),
        _ => to_json(&v)?,
    };
    Ok(Outcome::ok(body))
}

fn dp(a: &SchemeArgs) -> Result<Outcome, Failure> {
    let params = params_of(a)?;
    let family = generate_family(&params);
    let body = match reject_format(a.output.format, &[Format::Json, Format::Text], "dp")? {
        Format::Text => {
            let mut s = String::new();
            for pair in family.pairs() {
                writeln!(s, "round {}", pair.round).unwrap();
                for (r, c) in pair.parts.to_rows().iter().zip(pair.users.to_rows()) {
                    writeln!(s, "  R {:?}  C {:?}", r, c).unwrap();
                }
            }
            s
        }
        _ => to_json(&family.pairs())?,
    };
    Ok(Outcome::ok(body))
}

fn build(a: &SchemeArgs, demand: &str) -> Result<(cachecast_core::PlacementMatrix, Schedule), Failure> {
    let params = params_of(a)?;
    let demand = demand_of(&params, demand)?;
    let v = build_placement_matrix(&params);
    let family = generate_family(&params);
    let sched = build_schedule(&params, &v, &family, &demand)?;
    Ok((v, sched))
}

fn schedule_text(sched: &Schedule) -> String {
    let mut s = String::new();
    for vector in &sched.vectors {
        let terms: Vec<String> = vector
            .terms
            .iter()
            .map(|t| {
                let set: Vec<String> = t.zf_set.iter().map(usize::to_string).collect();
                format!("W{}_{}^{} v{{{}}}", t.file, t.part, t.subpart, set.join(","))
            })
            .collect();
        writeln!(s, "x({}) round {} row {}: {}", vector.s, vector.round, vector.row, terms.join(" + ")).unwrap();
    }
    s
}

fn schedule(a: &SchemeArgs, demand: &str) -> Result<Outcome, Failure> {
    let (_, sched) = build(a, demand)?;
    info!("{} intervals, {} terms", sched.vectors.len(), sched.term_count());
    let body = match reject_format(a.output.format, &[Format::Json, Format::Text], "schedule")? {
        Format::Text => schedule_text(&sched),
        _ => to_json(&sched)?,
    };
    Ok(Outcome::ok(body))
}

fn verify(a: &VerifyArgs) -> Result<Outcome, Failure> {
    let report = match &a.schedule {
        Some(path) => {
            let raw = fs::read_to_string(path).map_err(|e| Failure::io(format!("reading {}: {e}", path.display())))?;
            let sched: Schedule = serde_json::from_str(&raw)
                .map_err(|e| Failure::usage(format!("parsing {}: {e}", path.display())))?;
            verify_schedule(&sched, &build_placement_matrix(&sched.params))
        }
        None => {
            // clap guarantees these when no schedule file is given
            let (k, l, t) = (a.users.unwrap(), a.antennas.unwrap(), a.gain.unwrap());
            let params = SchemeParams::new(k, l, t, a.library.unwrap_or(k))?;
            let demand = demand_of(&params, &a.demand)?;
            verify_all(&params, &demand)?
        }
    };
    let body = match reject_format(a.output.format, &[Format::Json, Format::Text], "verify")? {
        Format::Text => report.summary(),
        _ => to_json(&report)?,
    };
    Ok(Outcome { body, passed: report.passed() })
}

fn simulate(a: &SimulateArgs) -> Result<Outcome, Failure> {
    let params = params_of(&a.scheme)?;
    let demand = demand_of(&params, &a.demand)?;
    let config = SimulationConfig {
        seed: a.seed,
        noise_power: a.noise_power,
        residual_tolerance: a.tolerance,
    };
    config.validate()?;
    let summary = run_full_simulation(&params, &demand, &config)?;
    info!("max residual {:e}", summary.max_residual);
    let noiseless = a.noise_power == 0.0;
    let body = match reject_format(a.scheme.output.format, &[Format::Json, Format::Text], "simulate")? {
        Format::Text => {
            let ok = summary.interval_success.iter().filter(|&&b| b).count();
            format!(
                "{params} seed={} noise_power={}\nintervals decoded: {ok}/{}\nmax residual: {:e}\nmax zf leakage: {:e}\n",
                summary.seed, summary.noise_power, summary.intervals, summary.max_residual, summary.max_zf_leakage
            )
        }
        _ => to_json(&summary)?,
    };
    // with noise there is no pass/fail contract, only the measured residuals
    Ok(Outcome { body, passed: !noiseless || summary.passed() })
}

/// Exact integer as a JSON number when it fits in u64, else as a decimal string.
fn number_or_string(n: &impl ToString) -> Value {
    let s = n.to_string();
    s.parse::<u64>().map_or_else(|_| json!(s), |v| json!(v))
}

fn comparison_json(rows: &[ComparisonRow]) -> Value {
    let series: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "K": r.users,
                "t": r.gain,
                "L": r.antennas,
                "subpack_new": number_or_string(&r.subpack_new),
                "subpack_ms": number_or_string(&r.subpack_ms),
                "ratio": r.ratio_decimal(),
                "ratio_f64": r.ratio_f64(),
            })
        })
        .collect();
    json!({ "series": series })
}

fn compare(a: &CompareArgs) -> Result<Outcome, Failure> {
    let users = parse_user_range(&a.users).map_err(Failure::usage)?;
    let rows = comparison_table(a.gain, a.antennas, users)?;
    let body = match reject_format(a.output.format, &[Format::Csv, Format::Json, Format::Text], "compare")? {
        Format::Json => to_json(&comparison_json(&rows))?,
        Format::Text => {
            let mut s = format!("{:>6} {:>24} {:>24} {:>12}\n", "K", "new", "multi-server", "ratio");
            for r in &rows {
                writeln!(s, "{:>6} {:>24} {:>24} {:>12}", r.users, r.subpack_new, r.subpack_ms, r.ratio_decimal())
                    .unwrap();
            }
            s
        }
        Format::Csv => to_csv(&rows),
    };
    Ok(Outcome::ok(body))
}

#[derive(Serialize)]
struct SweepEntry {
    #[serde(rename = "K")]
    users: usize,
    #[serde(rename = "L")]
    antennas: usize,
    t: usize,
    passed: bool,
    failed_checks: Vec<String>,
}

fn sweep(a: &SweepArgs) -> Result<Outcome, Failure> {
    let mut entries = Vec::new();
    for params in SchemeParams::enumerate(a.max_users) {
        let report = verify_all(&params, &Demand::identity(&params))?;
        debug!("{params}: {}", if report.passed() { "pass" } else { "fail" });
        entries.push(SweepEntry {
            users: params.users(),
            antennas: params.antennas(),
            t: params.gain(),
            passed: report.passed(),
            failed_checks: report.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect(),
        });
    }
    let passed = entries.iter().all(|e| e.passed);
    info!("swept {} parameter sets", entries.len());
    let body = match reject_format(a.output.format, &[Format::Text, Format::Json, Format::Csv], "sweep")? {
        Format::Json => to_json(&json!({ "instances": entries.len(), "passed": passed, "results": entries }))?,
        Format::Csv => {
            let mut s = String::from("K,L,t,passed\n");
            for e in &entries {
                writeln!(s, "{},{},{},{}", e.users, e.antennas, e.t, e.passed).unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for e in entries.iter().filter(|e| !e.passed) {
                writeln!(s, "FAIL K={} L={} t={}: {}", e.users, e.antennas, e.t, e.failed_checks.join(", ")).unwrap();
            }
            let ok = entries.iter().filter(|e| e.passed).count();
            writeln!(s, "{ok}/{} parameter sets passed (K <= {})", entries.len(), a.max_users).unwrap();
            s
        }
    };
    Ok(Outcome { body, passed })
}
