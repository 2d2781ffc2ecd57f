//! `cecode`: build, verify, encode, decode and noise-sweep the constant-excitation
//! code family from the command line. Every subcommand prints one JSON document
//! on stdout; diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 a verification claim failed, 2 usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use cecode::code::{build_ce_code, canonical_code_8_1_3, StabilizerCode, MAX_FAMILY_R};
use cecode::decode::{build_lookup, classify_error, ChannelOrdering, ResidualClass};
use cecode::experiment::{monte_carlo_sweep, round_sig, DeltaTPolicy, SweepConfig};
use cecode::state::{codeword_oracle_r2, encode_8_1_3, fidelity, resolve_encoder_gate_order};
use cecode::verify::{claimed_weight3_logical, outer_code_undetectable, verify_code};
use cecode::PauliOperator;
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "cecode", version, about = "Constant-excitation stabilizer code toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct the code for family parameter r and optionally write the code file.
    Build {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check commutation, independence, distance and constant excitation.
    Verify {
        #[arg(long, required_unless_present = "code")]
        r: Option<usize>,
        /// Largest weight searched for logical operators.
        #[arg(long, default_value_t = 3)]
        wmax: usize,
        /// Verify a code file instead of a freshly built code.
        #[arg(long, conflicts_with = "r")]
        code: Option<PathBuf>,
    },
    /// Run the [[8,1,3]] encoder on alpha|0> + beta|1>.
    Encode {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        alpha_re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha_im: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        beta_re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        beta_im: f64,
        /// Collective rotation angle applied after encoding.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta: f64,
    },
    /// Decode one Pauli error with the weight-1 lookup table.
    Decode {
        /// Code file; defaults to the [[8,1,3]] code.
        #[arg(long)]
        code: Option<PathBuf>,
        /// Error as a Pauli string, e.g. IIIXIIII.
        #[arg(long)]
        error: String,
    },
    /// Monte Carlo fidelity sweep under depolarizing plus collective noise.
    Sweep {
        #[arg(long, default_value_t = 2)]
        r: usize,
        /// Comma-separated physical error rates.
        #[arg(long, value_delimiter = ',', default_value = "0.001,0.005,0.01")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Overridden by the CE_SEED environment variable.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// `random` for a fresh uniform draw per shot, or a fixed value.
        #[arg(long, default_value = "random")]
        dt: String,
        #[arg(long, value_enum, default_value_t = Order::CcAfterPauli)]
        order: Order,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Also write the per-point records as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Order {
    CcAfterPauli,
    PauliAfterCc,
}

impl From<Order> for ChannelOrdering {
    fn from(o: Order) -> Self {
        match o {
            Order::CcAfterPauli => ChannelOrdering::CcAfterPauli,
            Order::PauliAfterCc => ChannelOrdering::PauliAfterCc,
        }
    }
}

enum Failure {
    Usage(anyhow::Error),
    Claim(anyhow::Error),
    Runtime(anyhow::Error),
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

type Outcome = Result<Value, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build { r, out } => cmd_build(r, out.as_deref()),
        Command::Verify { r, wmax, code } => cmd_verify(r, wmax, code.as_deref()),
        Command::Encode {
            alpha_re,
            alpha_im,
            beta_re,
            beta_im,
            theta,
        } => cmd_encode(
            Complex64::new(alpha_re, alpha_im),
            Complex64::new(beta_re, beta_im),
            theta,
        ),
        Command::Decode { code, error } => cmd_decode(code.as_deref(), &error),
        Command::Sweep {
            r,
            p,
            trials,
            seed,
            dt,
            order,
            jobs,
            csv,
        } => cmd_sweep(r, p, trials, seed, &dt, order, jobs, csv.as_deref()),
    };
    match result {
        Ok(v) => {
            println!("{}", rounded(v));
            ExitCode::SUCCESS
        }
        Err(Failure::Claim(e)) => {
            eprintln!("verification failed: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Rounds every float in the tree to 12 significant digits.
fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            json!(round_sig(n.as_f64().unwrap_or_default()))
        }
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

/// Writes next to the target and renames, so a failed run leaves no partial file.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| anyhow!("{} is not a file path", path.display()))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        anyhow!(e).context(format!("renaming onto {}", path.display()))
    })
}

fn family_code(r: usize) -> Result<StabilizerCode, Failure> {
    build_ce_code(r).map_err(usage)
}

fn read_code(path: &Path) -> anyhow::Result<StabilizerCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    StabilizerCode::from_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_build(r: usize, out: Option<&Path>) -> Outcome {
    let code = family_code(r)?;
    if let Some(path) = out {
        write_atomic(path, &code.to_text()).map_err(runtime)?;
    }
    Ok(json!({
        "n": code.n(),
        "k": code.k(),
        "generators": code.generators().len(),
    }))
}

fn cmd_verify(r: Option<usize>, wmax: usize, path: Option<&Path>) -> Outcome {
    let code = match (r, path) {
        (_, Some(path)) => read_code(path).map_err(Failure::Claim)?,
        (Some(r), None) => family_code(r)?,
        (None, None) => return Err(usage(anyhow!("either --r or --code is required"))),
    };
    let report = verify_code(&code, wmax).map_err(usage)?;
    let mut problems = Vec::new();
    if !report.commutation_ok {
        problems.push("generators do not commute".to_string());
    }
    if !report.independence_ok {
        problems.push("generators are dependent".to_string());
    }

    let mut out = serde_json::to_value(&report).map_err(runtime)?;
    match code.r().filter(|r| (2..=MAX_FAMILY_R).contains(r)) {
        Some(r) => {
            let expected = build_ce_code(r).map_err(runtime)?;
            let matches = expected.generators() == code.generators();
            if !matches {
                problems.push(format!("generators differ from the r = {r} construction"));
            }
            if let Err(e) = code.check_logicals() {
                problems.push(format!("logical operators: {e}"));
            }
            if report.distance.distance() != Some(code.claimed_distance()) {
                problems.push(format!("distance {} is not {}", json!(report.distance), code.claimed_distance()));
            }
            if !matches!(report.excitation, cecode::verify::Excitation::Constant(_)) {
                problems.push("codewords do not share one excitation number".into());
            }
            out["matches_construction"] = json!(matches);
            out["weight3_logical"] = match claimed_weight3_logical(r) {
                Ok(op) => json!(op.to_string()),
                Err(e) => {
                    problems.push(e.to_string());
                    Value::Null
                }
            };
            out["outer_undetectable"] = match outer_code_undetectable(r) {
                Ok(op) => json!(op.to_string()),
                Err(e) => {
                    problems.push(e.to_string());
                    Value::Null
                }
            };
        }
        None => problems.push("code file has no valid family parameter".into()),
    }
    out["passed"] = json!(problems.is_empty());
    if !problems.is_empty() {
        println!("{}", rounded(out));
        return Err(Failure::Claim(anyhow!(problems.join("; "))));
    }
    Ok(out)
}

fn cmd_encode(alpha: Complex64, beta: Complex64, theta: f64) -> Outcome {
    let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(usage(anyhow!("alpha and beta must not both be zero")));
    }
    let (alpha, beta) = (alpha / norm, beta / norm);
    let code = canonical_code_8_1_3();
    let order = resolve_encoder_gate_order().map_err(runtime)?;
    let mut state = encode_8_1_3(alpha, beta).map_err(runtime)?;
    let oracle = codeword_oracle_r2(alpha, beta).map_err(runtime)?;
    let oracle_fidelity = fidelity(&state, &oracle).map_err(runtime)?;
    let (codespace_probability, _) = state.codespace_projection(&code).map_err(runtime)?;

    let syndrome_expectations = code
        .generators()
        .iter()
        .map(|g| state.expectation(g))
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?;
    let lx = code.logical_x()[0];
    let lz = code.logical_z()[0];
    // Y = i X Z
    let ly = (lx * lz).with_phase(((lx * lz).phase_exp() + 1) % 4);
    let logical = json!({
        "X": state.expectation(&lx).map_err(runtime)?,
        "Y": state.expectation(&ly).map_err(runtime)?,
        "Z": state.expectation(&lz).map_err(runtime)?,
    });
    let spectrum: serde_json::Map<String, Value> = state
        .excitation_spectrum()
        .into_iter()
        .filter(|(_, p)| *p > 1e-15)
        .map(|(w, p)| (w.to_string(), json!(p)))
        .collect();

    let before = state.clone();
    state.apply_collective_z(theta);
    let rotated_fidelity = fidelity(&before, &state).map_err(runtime)?;

    Ok(json!({
        "gate_order": order,
        "alpha": [alpha.re, alpha.im],
        "beta": [beta.re, beta.im],
        "codespace_probability": codespace_probability,
        "oracle_fidelity": oracle_fidelity,
        "syndrome_expectations": syndrome_expectations,
        "logical_expectations": logical,
        "excitation_spectrum": spectrum,
        "theta": theta,
        "collective_z_fidelity": rotated_fidelity,
    }))
}

fn cmd_decode(path: Option<&Path>, error: &str) -> Outcome {
    let code = match path {
        Some(p) => read_code(p).map_err(usage)?,
        None => canonical_code_8_1_3(),
    };
    let e: PauliOperator = error.parse().map_err(usage)?;
    if e.num_qubits() != code.n() {
        return Err(usage(anyhow!(
            "error acts on {} qubits, code has {}",
            e.num_qubits(),
            code.n()
        )));
    }
    let table = build_lookup(&code).map_err(|e| Failure::Claim(e.into()))?;
    let (syndrome, correction, class) =
        classify_error(&e, &code, &table, &code.stabilizer_basis()).map_err(runtime)?;
    Ok(json!({
        "code": code.id(),
        "error": e.to_string(),
        "syndrome": syndrome.to_string(),
        "correction": correction.map(|c| c.to_string()),
        "residual": class,
        "corrected": class == ResidualClass::Stabilizer,
    }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    r: usize,
    p: Vec<f64>,
    trials: u64,
    seed: u64,
    dt: &str,
    order: Order,
    jobs: usize,
    csv: Option<&Path>,
) -> Outcome {
    let seed = match std::env::var("CE_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|e| usage(anyhow!("CE_SEED={s:?}: {e}")))?,
        Err(_) => seed,
    };
    let delta_t = if dt == "random" {
        DeltaTPolicy::UniformRandom
    } else {
        let v: f64 = dt
            .parse()
            .map_err(|_| usage(anyhow!("--dt must be `random` or a number, got {dt:?}")))?;
        DeltaTPolicy::Fixed(v)
    };
    let mut config = SweepConfig::new(r, p, trials, seed);
    config.delta_t = delta_t;
    config.ordering = order.into();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(runtime)?;
    let report = pool.install(|| monte_carlo_sweep(&config)).map_err(usage)?;
    eprintln!(
        "{}: {} points x {} trials in {:.2}s",
        report.metadata.code,
        report.points.len(),
        trials,
        report.metadata.elapsed_secs
    );
    if let Some(path) = csv {
        write_atomic(path, &report.to_csv()).map_err(runtime)?;
    }
    serde_json::to_value(&report).map_err(runtime)
}
