//! `lowo` — command-line driver for the exact Littlewood-Offord toolkit.
//!
//! Subcommands map one-to-one onto library operations:
//!
//! * `concentration` — exact concentration probability of a lazy signed walk;
//! * `inverse0` / `inverse1` / `inverse2` — structure-extraction algorithms
//!   emitting machine-checkable certificates (verified before exit);
//! * `verify` — re-verify a previously emitted certificate or discretization;
//! * `discretize` — small + sparse splitting of a symmetric integer GAP;
//! * `mc-sing` / `mc-tail` — Monte Carlo singularity and smallest-singular-
//!   value tail estimates for random `{-1,0,1}` matrices;
//! * `sweep` — cross-product parameter sweeps emitting plot-ready CSV.
//!
//! Exit codes: `0` success, `1` usage error, `2` verification failure,
//! `3` resource limit exceeded.
//!
//! Determinism contract: identical flags and seed produce byte-identical
//! artifacts. The `runtime_ms` field is therefore always written as `0`;
//! wall-clock timing goes to stderr. Output files are written atomically
//! (write to a temporary sibling, then rename), so no artifact is ever left
//! partially written.

use clap::{Parser, Subcommand, ValueEnum};
use lowo_core::exact_linalg::{rat_from_str, rat_to_string};
use lowo_core::gap::Gap;
use lowo_core::inverse::{
    first_inverse, second_inverse, verify_certificate, zeroth_inverse, Certificate, FailureReport,
    Outcome,
};
use lowo_core::randmat::{brute_force_singularity, mc_sigma_tail, mc_singularity, McEstimate};
use lowo_core::report::VerifyReport;
use lowo_core::walk::{concentration, Multiset, WalkParams};
use lowo_core::{discretize, Error, Int, Rat, Result};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

/// CSV header shared by `sweep` and the single-row `mc-sing` / `mc-tail`
/// outputs.
const CSV_HEADER: &str = "n,mu,trials,seed,quantity,estimate,ci_low,ci_high,comparator_value,runtime_ms";

/// Default trial count for Monte Carlo subcommands.
const DEFAULT_TRIALS: u64 = 10_000;

#[derive(Parser)]
#[command(
    name = "lowo",
    version,
    about = "Exact Littlewood-Offord walks, inverse certificates, GAP discretization, and random sign-matrix experiments",
    disable_help_subcommand = true
)]
struct Cli {
    /// Output file; stdout when omitted. Files are written atomically.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// 64-bit seed for randomized subcommands. Falls back to the LOWO_SEED
    /// environment variable, then to 0.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    /// Exact concentration of the walk on v = {1..n}.
    Concentration,
    /// Monte Carlo singularity probability.
    McSing,
    /// Monte Carlo P(sigma_min <= n^-B).
    McTail,
}

impl Quantity {
    fn name(self) -> &'static str {
        match self {
            Quantity::Concentration => "concentration",
            Quantity::McSing => "mc-sing",
            Quantity::McTail => "mc-tail",
        }
    }

    fn parse(name: &str) -> Result<Quantity> {
        match name {
            "concentration" => Ok(Quantity::Concentration),
            "mc-sing" => Ok(Quantity::McSing),
            "mc-tail" => Ok(Quantity::McTail),
            other => Err(Error::domain(format!(
                "unknown sweep quantity {other:?}; expected concentration, mc-sing, or mc-tail"
            ))),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact concentration probability max_a P(Y = a) of the lazy signed walk.
    Concentration {
        /// Laziness parameter mu as a rational in (0, 1], e.g. `1` or `1/2`.
        #[arg(long)]
        mu: String,
        /// Multiset file: one `value[xmultiplicity]` token per line.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },

    /// Zeroth inverse: greedy 1-dissociated cube certificate.
    Inverse0 {
        /// Multiset file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },

    /// First inverse: dilate-cover certificate (k-dissociated skeleton).
    Inverse1 {
        /// Dissociativity strength k >= 1.
        #[arg(long)]
        k: u64,
        /// Rank budget d >= 1 (certificate rank stays <= d-1).
        #[arg(long)]
        d: u64,
        /// Multiset file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },

    /// Second inverse: GAP certificate via torsion refinement.
    Inverse2 {
        /// Dissociativity strength k (must satisfy k >= k0).
        #[arg(long)]
        k: u64,
        /// Rank budget d >= 1.
        #[arg(long)]
        d: u64,
        /// Torsion floor K with 2 <= K <= k.
        #[arg(long, default_value_t = 8)]
        torsion_floor: u64,
        /// Epsilon slack used by the verifier's exponent bounds.
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Minimum admissible k (the configurable constant k0).
        #[arg(long, default_value_t = 8)]
        k0: u64,
        /// Multiset file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },

    /// Re-verify a certificate or discretization artifact from disk.
    Verify {
        /// JSON artifact: a certificate, a discretization, or any artifact
        /// emitted by inverse0/1/2 or discretize.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },

    /// Split a symmetric integer GAP into small + sparse parts at a verified
    /// scale.
    Discretize {
        /// Gap JSON file: {"offset", "generators", "lower", "upper"}.
        #[arg(long)]
        input: PathBuf,
        /// Base sparseness target R0 (positive integer).
        #[arg(long)]
        r0: String,
        /// Separation factor S >= 2.
        #[arg(long)]
        s: u64,
        /// Kernel coefficient base b >= 2.
        #[arg(long, default_value_t = 2)]
        b: u64,
        /// Half-width of the scale ladder searched around R0.
        #[arg(long, default_value_t = 4)]
        ladder_span: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },

    /// Monte Carlo singularity probability of n x n lazy sign matrices.
    McSing {
        /// Matrix dimension n >= 1.
        #[arg(long)]
        n: usize,
        /// Laziness parameter mu as a rational in (0, 1].
        #[arg(long)]
        mu: String,
        /// Number of Monte Carlo trials.
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        /// Fixed row appended last in every trial, e.g. `1,1,1` (repeatable).
        #[arg(long = "fixed-row")]
        fixed_rows: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },

    /// Monte Carlo estimate of P(sigma_min <= n^-B).
    McTail {
        /// Matrix dimension n >= 1.
        #[arg(long)]
        n: usize,
        /// Laziness parameter mu as a rational in (0, 1].
        #[arg(long)]
        mu: String,
        /// Tail exponent B; the threshold is n^-B.
        #[arg(long)]
        b_exponent: f64,
        /// Number of Monte Carlo trials.
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        /// Fixed row appended last in every trial (repeatable).
        #[arg(long = "fixed-row")]
        fixed_rows: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },

    /// Cross-product sweep over n and mu; one CSV row per combination.
    Sweep {
        /// Quantity to sweep (required unless --config is given).
        #[arg(long, value_enum)]
        quantity: Option<Quantity>,
        /// Comma-separated matrix dimensions / walk lengths, e.g. `16,32,64`.
        #[arg(long, value_delimiter = ',')]
        ns: Vec<u64>,
        /// Comma-separated mu rationals, e.g. `1,1/2`. Defaults to `1`.
        #[arg(long, value_delimiter = ',')]
        mus: Vec<String>,
        /// Trials per Monte Carlo row.
        #[arg(long)]
        trials: Option<u64>,
        /// Tail exponent B for mc-tail sweeps.
        #[arg(long)]
        b_exponent: Option<f64>,
        /// JSON experiment config with fields {quantity, ns, mus, trials,
        /// b_exponent, seed}; replaces the flags above.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Remap clap's usage exit (2) to this tool's contract (1); keep
            // --help/--version as successes.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let started = Instant::now();
    let result = run(cli);
    eprintln!("runtime: {} ms", started.elapsed().as_millis());
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Domain(_) => 1,
                Error::NoConvergence(_) => 2,
                Error::Resource(_) => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let output = cli.output.as_deref();
    let seed = resolve_seed(cli.seed)?;
    match cli.command {
        Cmd::Concentration { mu, input, format } => {
            require_json("concentration", format)?;
            cmd_concentration(&mu, &input, output)
        }
        Cmd::Inverse0 { input, format } => {
            require_json("inverse0", format)?;
            cmd_inverse0(&input, output)
        }
        Cmd::Inverse1 {
            k,
            d,
            input,
            format,
        } => {
            require_json("inverse1", format)?;
            cmd_inverse1(k, d, &input, output)
        }
        Cmd::Inverse2 {
            k,
            d,
            torsion_floor,
            eps,
            k0,
            input,
            format,
        } => {
            require_json("inverse2", format)?;
            cmd_inverse2(k, d, torsion_floor, eps, k0, &input, output)
        }
        Cmd::Verify { input, format } => {
            require_json("verify", format)?;
            cmd_verify(&input, output)
        }
        Cmd::Discretize {
            input,
            r0,
            s,
            b,
            ladder_span,
            format,
        } => {
            require_json("discretize", format)?;
            cmd_discretize(&input, &r0, s, b, ladder_span, output)
        }
        Cmd::McSing {
            n,
            mu,
            trials,
            fixed_rows,
            format,
        } => cmd_mc_sing(n, &mu, trials, seed, &fixed_rows, format, output),
        Cmd::McTail {
            n,
            mu,
            b_exponent,
            trials,
            fixed_rows,
            format,
        } => cmd_mc_tail(n, &mu, b_exponent, trials, seed, &fixed_rows, format, output),
        Cmd::Sweep {
            quantity,
            ns,
            mus,
            trials,
            b_exponent,
            config,
            format,
        } => cmd_sweep(
            quantity, ns, mus, trials, b_exponent, config, cli.seed, format, output,
        ),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

/// Seed precedence: explicit flag, then LOWO_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("LOWO_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            Error::domain(format!(
                "LOWO_SEED must be a 64-bit unsigned integer, got {text:?}"
            ))
        }),
        Err(_) => Ok(0),
    }
}

fn require_json(command: &str, format: Format) -> Result<()> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(Error::domain(format!(
            "{command} emits a structured JSON artifact; --format csv is only \
             available for mc-sing, mc-tail, and sweep"
        ))),
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::domain(format!("cannot read {}: {e}", path.display())))
}

fn read_multiset(path: &Path) -> Result<Multiset> {
    Multiset::parse_text(&read_file(path)?)
}

fn read_gap(path: &Path) -> Result<Gap> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| Error::domain(format!("invalid Gap JSON in {}: {e}", path.display())))
}

fn parse_walk_params(text: &str) -> Result<WalkParams> {
    WalkParams::new(rat_from_str(text)?)
}

/// Parse mu for the random-matrix subcommands (validated by the sampler).
fn parse_mu_rat(text: &str) -> Result<Rat> {
    rat_from_str(text)
}

fn parse_fixed_rows(n: usize, rows: &[String]) -> Result<Vec<Vec<i8>>> {
    rows.iter()
        .map(|row| {
            let entries = row
                .split(',')
                .map(|tok| {
                    let tok = tok.trim();
                    tok.parse::<i8>().map_err(|_| {
                        Error::domain(format!("fixed-row entry {tok:?} is not an integer"))
                    })
                })
                .collect::<Result<Vec<i8>>>()?;
            if entries.iter().any(|e| !(-1..=1).contains(e)) {
                return Err(Error::domain(format!(
                    "fixed-row entries must lie in {{-1,0,1}}, got {row:?}"
                )));
            }
            if entries.len() != n {
                return Err(Error::domain(format!(
                    "fixed row {row:?} has {} entries, expected n = {n}",
                    entries.len()
                )));
            }
            Ok(entries)
        })
        .collect()
}

/// Echo a multiset into an artifact as (value, multiplicity) pairs.
fn multiset_echo(v: &Multiset) -> Vec<(String, u64)> {
    v.iter().map(|(x, m)| (x.to_string(), m)).collect()
}

fn rat_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Shortest round-trip float text that still marks integral values as floats
/// (Debug formatting: `0.5`, `1.0`).
fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

fn to_json_text<T: Serialize>(artifact: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(artifact)
        .map_err(|e| Error::domain(format!("artifact serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Write the artifact to stdout or atomically (write-then-rename) to a file.
fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::domain(format!("cannot write to stdout: {e}")))
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let name = path
                .file_name()
                .ok_or_else(|| Error::domain("output path has no file name"))?
                .to_string_lossy()
                .into_owned();
            let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
            std::fs::write(&tmp, text)
                .map_err(|e| Error::domain(format!("cannot write {}: {e}", tmp.display())))?;
            std::fs::rename(&tmp, path).map_err(|e| {
                let _ = std::fs::remove_file(&tmp);
                Error::domain(format!("cannot rename into {}: {e}", path.display()))
            })
        }
    }
}

// ---------------------------------------------------------------------------
// concentration
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ConcentrationArtifact {
    command: &'static str,
    mu: String,
    input: Vec<(String, u64)>,
    n: u64,
    #[serde(with = "lowo_core::exact_linalg::serde_int")]
    a: Int,
    p: String,
    p_float: f64,
    support_size: usize,
    runtime_ms: u64,
}

fn cmd_concentration(mu: &str, input: &Path, output: Option<&Path>) -> Result<u8> {
    let params = parse_walk_params(mu)?;
    let v = read_multiset(input)?;
    let dist = lowo_core::walk::exact_distribution(&v, &params)?;
    let (a, p) = dist.max_atom();
    let artifact = ConcentrationArtifact {
        command: "concentration",
        mu: rat_to_string(params.mu()),
        input: multiset_echo(&v),
        n: v.len(),
        a,
        p: rat_to_string(&p),
        p_float: rat_f64(&p),
        support_size: dist.support_size(),
        runtime_ms: 0,
    };
    emit(output, &to_json_text(&artifact)?)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// inverse0 / inverse1 / inverse2
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CertificateArtifact {
    command: &'static str,
    params: Value,
    input: Vec<(String, u64)>,
    certificate: Certificate,
    report: VerifyReport,
    runtime_ms: u64,
}

#[derive(Serialize)]
struct FailureArtifact {
    command: &'static str,
    params: Value,
    input: Vec<(String, u64)>,
    failure: FailureReport,
    runtime_ms: u64,
}

/// Wrap a certificate with its fresh verification report and emit; exit 2 if
/// any clause fails (defensive: the algorithms only emit valid certificates).
fn emit_certificate(
    command: &'static str,
    params: Value,
    v: &Multiset,
    certificate: Certificate,
    output: Option<&Path>,
) -> Result<u8> {
    let report = verify_certificate(&certificate)?;
    let ok = report.ok;
    let artifact = CertificateArtifact {
        command,
        params,
        input: multiset_echo(v),
        certificate,
        report,
        runtime_ms: 0,
    };
    emit(output, &to_json_text(&artifact)?)?;
    Ok(if ok { 0 } else { 2 })
}

fn emit_failure(
    command: &'static str,
    params: Value,
    v: &Multiset,
    failure: FailureReport,
    output: Option<&Path>,
) -> Result<u8> {
    let artifact = FailureArtifact {
        command,
        params,
        input: multiset_echo(v),
        failure,
        runtime_ms: 0,
    };
    emit(output, &to_json_text(&artifact)?)?;
    Ok(0)
}

fn cmd_inverse0(input: &Path, output: Option<&Path>) -> Result<u8> {
    let v = read_multiset(input)?;
    let cert = zeroth_inverse(&v)?;
    emit_certificate(
        "inverse0",
        json!({}),
        &v,
        Certificate::Zeroth(cert),
        output,
    )
}

fn cmd_inverse1(k: u64, d: u64, input: &Path, output: Option<&Path>) -> Result<u8> {
    let v = read_multiset(input)?;
    let params = json!({ "k": k, "d": d });
    match first_inverse(&v, k, d)? {
        Outcome::Certificate { certificate } => {
            emit_certificate("inverse1", params, &v, Certificate::First(certificate), output)
        }
        Outcome::Failure { failure } => emit_failure("inverse1", params, &v, failure, output),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_inverse2(
    k: u64,
    d: u64,
    torsion_floor: u64,
    eps: f64,
    k0: u64,
    input: &Path,
    output: Option<&Path>,
) -> Result<u8> {
    if k < k0 {
        return Err(Error::domain(format!(
            "second inverse requires k >= k0, got k = {k}, k0 = {k0} \
             (lower k0 explicitly with --k0 if intended)"
        )));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::domain("eps must be a finite non-negative number"));
    }
    let v = read_multiset(input)?;
    let params = json!({
        "k": k,
        "d": d,
        "torsion_floor": torsion_floor,
        "eps": eps,
        "k0": k0,
    });
    match second_inverse(&v, k, d, torsion_floor, eps)? {
        Outcome::Certificate { certificate } => {
            emit_certificate("inverse2", params, &v, Certificate::Second(certificate), output)
        }
        Outcome::Failure { failure } => emit_failure("inverse2", params, &v, failure, output),
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifyArtifact {
    command: &'static str,
    artifact_kind: &'static str,
    report: VerifyReport,
    runtime_ms: u64,
}

fn cmd_verify(input: &Path, output: Option<&Path>) -> Result<u8> {
    let raw: Value = serde_json::from_str(&read_file(input)?)
        .map_err(|e| Error::domain(format!("invalid JSON in {}: {e}", input.display())))?;
    let (kind, report) = verify_value(&raw)?;
    let ok = report.ok;
    let artifact = VerifyArtifact {
        command: "verify",
        artifact_kind: kind,
        report,
        runtime_ms: 0,
    };
    emit(output, &to_json_text(&artifact)?)?;
    Ok(if ok { 0 } else { 2 })
}

/// Accept either a bare certificate / discretization or a full artifact
/// wrapper (the `certificate` / `result` field of inverse* / discretize
/// output) and re-verify it from scratch.
fn verify_value(raw: &Value) -> Result<(&'static str, VerifyReport)> {
    if let Some(cert) = raw.get("certificate") {
        return Ok(("certificate", verify_certificate(&decode_certificate(cert)?)?));
    }
    if let Some(result) = raw.get("result") {
        return Ok((
            "discretization",
            discretize::verify_discretization(&decode_discretization(result)?)?,
        ));
    }
    // A bare certificate carries the `algorithm` tag; a verification report
    // also carries `algorithm` but additionally `clauses`, which is not
    // re-verifiable.
    if raw.get("algorithm").is_some() && raw.get("clauses").is_none() {
        return Ok(("certificate", verify_certificate(&decode_certificate(raw)?)?));
    }
    if raw.get("decomposition").is_some() {
        return Ok((
            "discretization",
            discretize::verify_discretization(&decode_discretization(raw)?)?,
        ));
    }
    Err(Error::domain(
        "unrecognized artifact: expected a certificate (field `algorithm`) or a \
         discretization (field `decomposition`), possibly wrapped in a CLI artifact",
    ))
}

fn decode_certificate(value: &Value) -> Result<Certificate> {
    serde_json::from_value(value.clone())
        .map_err(|e| Error::domain(format!("not a valid certificate: {e}")))
}

fn decode_discretization(value: &Value) -> Result<discretize::DiscretizationResult> {
    serde_json::from_value(value.clone())
        .map_err(|e| Error::domain(format!("not a valid discretization result: {e}")))
}

// ---------------------------------------------------------------------------
// discretize
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct DiscretizeArtifact {
    command: &'static str,
    params: Value,
    gap: Gap,
    result: discretize::DiscretizationResult,
    report: VerifyReport,
    runtime_ms: u64,
}

fn cmd_discretize(
    input: &Path,
    r0: &str,
    s: u64,
    b: u64,
    ladder_span: u32,
    output: Option<&Path>,
) -> Result<u8> {
    let r0 = Int::from_str(r0.trim())
        .map_err(|_| Error::domain(format!("--r0 must be a decimal integer, got {r0:?}")))?;
    let gap = read_gap(input)?;
    let (result, report) = discretize::discretize(&gap, s, b, &r0, ladder_span)?;
    let ok = report.ok;
    let artifact = DiscretizeArtifact {
        command: "discretize",
        params: json!({
            "r0": r0.to_string(),
            "s": s,
            "b": b,
            "ladder_span": ladder_span,
        }),
        gap,
        result,
        report,
        runtime_ms: 0,
    };
    emit(output, &to_json_text(&artifact)?)?;
    Ok(if ok { 0 } else { 2 })
}

// ---------------------------------------------------------------------------
// mc-sing / mc-tail
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Comparators {
    /// Exact singularity probability (n <= 3, no fixed rows).
    #[serde(skip_serializing_if = "Option::is_none")]
    brute_force: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    brute_force_float: Option<f64>,
    /// (1/2)^n, the classical singularity lower-bound scale.
    #[serde(skip_serializing_if = "Option::is_none")]
    half_power: Option<f64>,
    /// (1 - 0.001)^n, the conjectured upper-bound scale.
    #[serde(skip_serializing_if = "Option::is_none")]
    one_minus_eps_power: Option<f64>,
    /// The sigma_min threshold n^-B for tail estimates.
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
}

#[derive(Serialize)]
struct McArtifact {
    command: &'static str,
    n: usize,
    mu: String,
    trials: u64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    b_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    fixed_rows: Vec<Vec<i8>>,
    estimate: McEstimate,
    /// delta(mu) = max(1 - mu, mu/2), the per-entry atom maximum.
    delta_mu: f64,
    comparators: Comparators,
    runtime_ms: u64,
}

#[derive(Serialize)]
struct SweepRow {
    n: u64,
    mu: String,
    trials: u64,
    seed: u64,
    quantity: &'static str,
    estimate: f64,
    ci_low: f64,
    ci_high: f64,
    comparator_value: f64,
    runtime_ms: u64,
}

fn csv_line(row: &SweepRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        row.n,
        row.mu,
        row.trials,
        row.seed,
        row.quantity,
        fmt_float(row.estimate),
        fmt_float(row.ci_low),
        fmt_float(row.ci_high),
        fmt_float(row.comparator_value),
        row.runtime_ms,
    )
}

fn emit_rows(rows: &[SweepRow], format: Format, output: Option<&Path>) -> Result<()> {
    match format {
        Format::Csv => {
            let mut text = String::from(CSV_HEADER);
            text.push('\n');
            for row in rows {
                text.push_str(&csv_line(row));
                text.push('\n');
            }
            emit(output, &text)
        }
        Format::Json => {
            let doc = json!({ "command": "sweep", "rows": rows });
            emit(output, &to_json_text(&doc)?)
        }
    }
}

fn delta_mu(mu: &Rat) -> f64 {
    let one_minus = Rat::from(Int::from(1)) - mu;
    let half = mu / Rat::from(Int::from(2));
    rat_f64(&one_minus.max(half))
}

/// Singularity comparator: exact brute force at n <= 3 (unconditioned),
/// otherwise the (1/2)^n scale.
fn mc_sing_comparator(n: usize, mu: &Rat, fixed: &[Vec<i8>]) -> Result<f64> {
    if n <= 3 && fixed.is_empty() {
        Ok(rat_f64(&brute_force_singularity(n, mu)?))
    } else {
        Ok(0.5f64.powi(n as i32))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc_sing(
    n: usize,
    mu_text: &str,
    trials: u64,
    seed: u64,
    fixed_rows: &[String],
    format: Format,
    output: Option<&Path>,
) -> Result<u8> {
    let mu = parse_mu_rat(mu_text)?;
    let fixed = parse_fixed_rows(n, fixed_rows)?;
    let estimate = mc_singularity(n, &mu, trials, seed, &fixed)?;
    match format {
        Format::Csv => {
            let row = SweepRow {
                n: n as u64,
                mu: rat_to_string(&mu),
                trials,
                seed,
                quantity: "mc-sing",
                estimate: estimate.p_hat,
                ci_low: estimate.wilson_low,
                ci_high: estimate.wilson_high,
                comparator_value: mc_sing_comparator(n, &mu, &fixed)?,
                runtime_ms: 0,
            };
            emit_rows(std::slice::from_ref(&row), Format::Csv, output)?;
        }
        Format::Json => {
            let brute = if n <= 3 && fixed.is_empty() {
                Some(brute_force_singularity(n, &mu)?)
            } else {
                None
            };
            let artifact = McArtifact {
                command: "mc-sing",
                n,
                mu: rat_to_string(&mu),
                trials,
                seed,
                b_exponent: None,
                fixed_rows: fixed,
                estimate,
                delta_mu: delta_mu(&mu),
                comparators: Comparators {
                    brute_force: brute.as_ref().map(rat_to_string),
                    brute_force_float: brute.as_ref().map(rat_f64),
                    half_power: Some(0.5f64.powi(n as i32)),
                    one_minus_eps_power: Some(0.999f64.powi(n as i32)),
                    threshold: None,
                },
                runtime_ms: 0,
            };
            emit(output, &to_json_text(&artifact)?)?;
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc_tail(
    n: usize,
    mu_text: &str,
    b_exponent: f64,
    trials: u64,
    seed: u64,
    fixed_rows: &[String],
    format: Format,
    output: Option<&Path>,
) -> Result<u8> {
    if !b_exponent.is_finite() {
        return Err(Error::domain("--b-exponent must be finite"));
    }
    let mu = parse_mu_rat(mu_text)?;
    let fixed = parse_fixed_rows(n, fixed_rows)?;
    let bound = (n as f64).powf(-b_exponent);
    let estimate = mc_sigma_tail(n, &mu, trials, seed, bound, &fixed)?;
    match format {
        Format::Csv => {
            let row = SweepRow {
                n: n as u64,
                mu: rat_to_string(&mu),
                trials,
                seed,
                quantity: "mc-tail",
                estimate: estimate.p_hat,
                ci_low: estimate.wilson_low,
                ci_high: estimate.wilson_high,
                comparator_value: bound,
                runtime_ms: 0,
            };
            emit_rows(std::slice::from_ref(&row), Format::Csv, output)?;
        }
        Format::Json => {
            let artifact = McArtifact {
                command: "mc-tail",
                n,
                mu: rat_to_string(&mu),
                trials,
                seed,
                b_exponent: Some(b_exponent),
                fixed_rows: fixed,
                estimate,
                delta_mu: delta_mu(&mu),
                comparators: Comparators {
                    brute_force: None,
                    brute_force_float: None,
                    half_power: None,
                    one_minus_eps_power: None,
                    threshold: Some(bound),
                },
                runtime_ms: 0,
            };
            emit(output, &to_json_text(&artifact)?)?;
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

/// Experiment config accepted as a JSON file via `sweep --config`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    quantity: String,
    ns: Vec<u64>,
    #[serde(default)]
    mus: Vec<String>,
    #[serde(default)]
    trials: Option<u64>,
    #[serde(default)]
    b_exponent: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    quantity: Option<Quantity>,
    ns: Vec<u64>,
    mus: Vec<String>,
    trials: Option<u64>,
    b_exponent: Option<f64>,
    config: Option<PathBuf>,
    seed_flag: Option<u64>,
    format: Format,
    output: Option<&Path>,
) -> Result<u8> {
    let (quantity, ns, mus, trials, b_exponent, config_seed) = match config {
        Some(path) => {
            let cfg: SweepConfig = serde_json::from_str(&read_file(&path)?).map_err(|e| {
                Error::domain(format!("invalid sweep config {}: {e}", path.display()))
            })?;
            (
                Quantity::parse(&cfg.quantity)?,
                cfg.ns,
                cfg.mus,
                cfg.trials,
                cfg.b_exponent,
                cfg.seed,
            )
        }
        None => {
            let quantity = quantity
                .ok_or_else(|| Error::domain("sweep requires --quantity (or --config)"))?;
            (quantity, ns, mus, trials, b_exponent, None)
        }
    };
    // Seed precedence: --seed, then config seed, then LOWO_SEED, then 0.
    let seed = match seed_flag.or(config_seed) {
        Some(s) => s,
        None => resolve_seed(None)?,
    };
    let mus = if mus.is_empty() {
        vec!["1".to_string()]
    } else {
        mus
    };
    if ns.is_empty() {
        return Err(Error::domain("sweep range is empty: provide --ns n1,n2,..."));
    }
    let trials = trials.unwrap_or(DEFAULT_TRIALS);

    let mut rows = Vec::with_capacity(ns.len() * mus.len());
    for &n in &ns {
        for mu_text in &mus {
            rows.push(sweep_row(quantity, n, mu_text, trials, seed, b_exponent)?);
        }
    }
    emit_rows(&rows, format, output)?;
    Ok(0)
}

fn sweep_row(
    quantity: Quantity,
    n: u64,
    mu_text: &str,
    trials: u64,
    seed: u64,
    b_exponent: Option<f64>,
) -> Result<SweepRow> {
    if n == 0 {
        return Err(Error::domain("sweep requires n >= 1"));
    }
    match quantity {
        Quantity::Concentration => {
            let params = parse_walk_params(mu_text)?;
            let v = Multiset::from_pairs((1..=n as i64).map(|x| (Int::from(x), 1)))?;
            let (_, p) = concentration(&v, &params)?;
            let ones = Multiset::from_pairs([(Int::from(1), n)])?;
            let (_, extremal) = concentration(&ones, &params)?;
            let estimate = rat_f64(&p);
            Ok(SweepRow {
                n,
                mu: rat_to_string(params.mu()),
                trials: 0,
                seed,
                quantity: quantity.name(),
                estimate,
                ci_low: estimate,
                ci_high: estimate,
                comparator_value: rat_f64(&extremal),
                runtime_ms: 0,
            })
        }
        Quantity::McSing => {
            let mu = parse_mu_rat(mu_text)?;
            let estimate = mc_singularity(n as usize, &mu, trials, seed, &[])?;
            Ok(SweepRow {
                n,
                mu: rat_to_string(&mu),
                trials,
                seed,
                quantity: quantity.name(),
                estimate: estimate.p_hat,
                ci_low: estimate.wilson_low,
                ci_high: estimate.wilson_high,
                comparator_value: mc_sing_comparator(n as usize, &mu, &[])?,
                runtime_ms: 0,
            })
        }
        Quantity::McTail => {
            let b = b_exponent
                .ok_or_else(|| Error::domain("mc-tail sweep requires --b-exponent"))?;
            if !b.is_finite() {
                return Err(Error::domain("--b-exponent must be finite"));
            }
            let mu = parse_mu_rat(mu_text)?;
            let bound = (n as f64).powf(-b);
            let estimate = mc_sigma_tail(n as usize, &mu, trials, seed, bound, &[])?;
            Ok(SweepRow {
                n,
                mu: rat_to_string(&mu),
                trials,
                seed,
                quantity: quantity.name(),
                estimate: estimate.p_hat,
                ci_low: estimate.wilson_low,
                ci_high: estimate.wilson_high,
                comparator_value: bound,
                runtime_ms: 0,
            })
        }
    }
}
