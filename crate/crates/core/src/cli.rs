//! Command-line front end. Every command prints one JSON report; CSV tables
//! go to the path given with `--csv`.
//!
//! Exit codes: 0 success, 2 parse error, 3 precondition violation,
//! 4 mathematical obstruction (an obstructed linearization or a
//! non-commuting family).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::brjuno::{certify_coefficients, counting_check, BrjunoReport, MajorantData};
use crate::error::{Error, Result};
use crate::format::{format_complex, germ_spec, matrix_literals, parse_matrix_file, parse_omega_values, Mode, ProblemFile, Problem};
use crate::jordan;
use crate::linalg::Matrix;
use crate::linearize::{
    commutation, formal_linearize, resonances_of, sigma_normalize_family, simul_linearize_direct, simul_linearize_sequential,
    verify_conjugacy, LinearizationResult, Status,
};
use crate::resonance::{OmegaSequence, OmegaVariant, ResonanceTable};
use crate::scalars::{Arith, Scalar};
use crate::series::Germ;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_OBSTRUCTION: i32 = 4;

#[derive(Parser, Debug, Clone)]
#[command(name = "simlin", version, about = "Formal and simultaneous linearization of germs, resonances and Brjuno diagnostics")]
pub struct Cli {
    /// Working precision in bits (overrides the file).
    #[arg(long, global = true)]
    pub precision_bits: Option<u32>,
    /// Zero tolerance (overrides the file).
    #[arg(long, global = true)]
    pub zero_tol: Option<f64>,
    /// Seed recorded in the report.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearizeMode {
    Single,
    Sequential,
    Direct,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Per-tuple and simultaneous resonance sets.
    Resonances {
        file: PathBuf,
        #[arg(long)]
        mmax: Option<u32>,
    },
    /// Formal linearization of one germ or a commuting family.
    Linearize {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = LinearizeMode::Direct)]
        mode: LinearizeMode,
        /// Also report the conjugacy residual of every germ.
        #[arg(long)]
        verify: bool,
    },
    /// Omega tables, Brjuno-type partial sums and the comparison checks.
    Brjuno {
        file: PathBuf,
        #[arg(long)]
        mmax: Option<u32>,
        #[arg(long)]
        nu_max: Option<u32>,
        /// Comma-separated: omega, omega_bar, omega_tilde,
        /// russmann_constrained, russmann.
        #[arg(long, value_delimiter = ',')]
        variants: Vec<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON array of ω(1), ω(2), … used instead of the file's spectrum.
        #[arg(long)]
        omega_override: Option<PathBuf>,
    },
    /// Commutation, Jordan-form and simultaneous diagonalization checks on
    /// the matrices section.
    Jordan {
        file: PathBuf,
        /// Matrix file with a candidate conjugator `A`.
        #[arg(long)]
        conjugator: Option<PathBuf>,
    },
    /// Majorant sequences, coefficient bounds and the counting lemmas.
    Majorant {
        file: PathBuf,
        #[arg(long)]
        mmax: Option<u32>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

impl Command {
    fn file(&self) -> &Path {
        match self {
            Command::Resonances { file, .. }
            | Command::Linearize { file, .. }
            | Command::Brjuno { file, .. }
            | Command::Jordan { file, .. }
            | Command::Majorant { file, .. } => file,
        }
    }

    fn echo(&self) -> Value {
        match self {
            Command::Resonances { file, mmax } => json!({"name": "resonances", "file": file, "mmax": mmax}),
            Command::Linearize { file, mode, verify } => {
                json!({"name": "linearize", "file": file, "mode": mode, "verify": verify})
            }
            Command::Brjuno { file, mmax, nu_max, variants, csv, omega_override } => json!({
                "name": "brjuno", "file": file, "mmax": mmax, "nu_max": nu_max, "variants": variants,
                "csv": csv, "omega_override": omega_override,
            }),
            Command::Jordan { file, conjugator } => json!({"name": "jordan", "file": file, "conjugator": conjugator}),
            Command::Majorant { file, mmax, csv } => json!({"name": "majorant", "file": file, "mmax": mmax, "csv": csv}),
        }
    }
}

#[derive(Serialize)]
struct ScalarEcho {
    mode: Mode,
    precision_bits: u32,
    zero_tol: Option<f64>,
}

#[derive(Serialize)]
struct ErrorOut {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct Report {
    tool: &'static str,
    version: &'static str,
    command: Value,
    seed: u64,
    scalar: Option<ScalarEcho>,
    status: &'static str,
    input: Option<ProblemFile>,
    payload: Value,
    error: Option<ErrorOut>,
}

/// What a command produced, before anything is written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
    pub csv: Option<(PathBuf, String)>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => EXIT_PARSE,
        Error::NotCommuting { .. } => EXIT_OBSTRUCTION,
        _ => EXIT_PRECONDITION,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::DivisionByZero => "division_by_zero",
        Error::PolicyMismatch => "policy_mismatch",
        Error::InvalidInput(_) => "invalid_input",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::TruncationMismatch(..) => "truncation_mismatch",
        Error::SingularMatrix => "singular_matrix",
        Error::SimultaneouslyResonant(_) => "simultaneously_resonant",
        Error::NoAdmissibleIndex(_) => "no_admissible_index",
        Error::NotJordanForm(_) => "not_jordan_form",
        Error::NotCommuting { .. } => "not_commuting",
        Error::NotDiagonalizable(_) => "not_diagonalizable",
        Error::ThetaOutOfRange(_) => "theta_out_of_range",
        Error::NotNormalized { .. } => "not_normalized",
        Error::NonMonotoneOmega(_) => "non_monotone_omega",
        Error::Parse { .. } => "parse",
        Error::Unsupported(_) => "unsupported",
    }
}

struct Done {
    status: &'static str,
    code: i32,
    payload: Value,
    csv: Option<(PathBuf, String)>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

/// Runs a parsed command line without touching stdout or the file system
/// beyond reading inputs.
pub fn execute(cli: &Cli) -> Outcome {
    let mut scalar = None;
    let mut input = None;
    let result = (|| -> Result<Done> {
        let text = read(cli.command.file())?;
        let file = ProblemFile::parse(&text)?;
        let prec = file.precision(cli.precision_bits);
        let out = match file.scalar.mode {
            Mode::Exact => {
                let ar = file.exact_arith(cli.precision_bits, cli.zero_tol)?;
                scalar = Some(ScalarEcho { mode: Mode::Exact, precision_bits: prec, zero_tol: ar.policy().tol() });
                let prob = file.build(&ar)?;
                input = Some(echo_input(&file, &prob));
                dispatch(&ar, &prob, &cli.command)?
            }
            Mode::Bigfloat => {
                let ar = file.float_arith(cli.precision_bits, cli.zero_tol)?;
                scalar = Some(ScalarEcho { mode: Mode::Bigfloat, precision_bits: prec, zero_tol: ar.policy().tol() });
                let prob = file.build(&ar)?;
                input = Some(echo_input(&file, &prob));
                dispatch(&ar, &prob, &cli.command)?
            }
        };
        Ok(out)
    })();
    let (status, code, payload, csv, error) = match result {
        Ok(d) => (d.status, d.code, d.payload, d.csv, None),
        Err(e) => ("error", exit_code(&e), Value::Null, None, Some(ErrorOut { kind: error_kind(&e), message: e.to_string() })),
    };
    let report = Report {
        tool: "simlin",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.echo(),
        seed: cli.seed,
        scalar,
        status,
        input,
        payload,
        error,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    Outcome { code, report: text, csv }
}

fn echo_input<S: Scalar>(file: &ProblemFile, prob: &Problem<S>) -> ProblemFile {
    ProblemFile {
        germs: prob.germs.iter().map(germ_spec).collect(),
        matrices: file.matrices.as_ref().map(|_| prob.matrices.iter().map(matrix_literals).collect()),
        ..file.clone()
    }
}

/// Parses arguments, runs, writes outputs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    let out = execute(&cli);
    let mut code = out.code;
    if let Some((path, body)) = &out.csv {
        if let Err(e) = std::fs::write(path, body) {
            eprintln!("cannot write {}: {e}", path.display());
            code = code.max(EXIT_PRECONDITION);
        }
    }
    match &cli.output {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &out.report) {
                eprintln!("cannot write {}: {e}", p.display());
                return EXIT_PRECONDITION;
            }
        }
        None => print!("{}", out.report),
    }
    if code != EXIT_OK {
        if let Some(msg) = serde_json::from_str::<Value>(&out.report).ok().and_then(|v| v["error"]["message"].as_str().map(String::from)) {
            eprintln!("error: {msg}");
        }
    }
    code
}

fn done(payload: Value) -> Done {
    Done { status: "ok", code: EXIT_OK, payload, csv: None }
}

fn dispatch<S: Scalar>(ar: &Arith<S>, prob: &Problem<S>, cmd: &Command) -> Result<Done> {
    match cmd {
        Command::Resonances { mmax, .. } => cmd_resonances(ar, prob, mmax.unwrap_or(prob.trunc)),
        Command::Linearize { mode, verify, .. } => cmd_linearize(ar, prob, *mode, *verify),
        Command::Brjuno { mmax, nu_max, variants, csv, omega_override, .. } => {
            cmd_brjuno(ar, prob, mmax.unwrap_or(64), *nu_max, variants, csv.clone(), omega_override.as_deref())
        }
        Command::Jordan { conjugator, .. } => cmd_jordan(ar, prob, conjugator.as_deref()),
        Command::Majorant { mmax, csv, .. } => cmd_majorant(ar, prob, *mmax, csv.clone()),
    }
}

fn need_germs<S>(prob: &Problem<S>) -> Result<&[Germ<S>]> {
    if prob.germs.is_empty() {
        return Err(Error::InvalidInput("the problem file has no germs".into()));
    }
    Ok(&prob.germs)
}

fn is_lower_triangular<S: Scalar>(ar: &Arith<S>, m: &Matrix<S>) -> bool {
    (0..m.rows()).all(|i| (i + 1..m.cols()).all(|j| ar.is_zero(m.get(i, j))))
}

/// Eigenvalue tuples of the linear parts. Triangular parts give their
/// diagonal, so coordinates pair up across germs; a single general matrix
/// is diagonalized numerically.
fn spectra<S: Scalar>(ar: &Arith<S>, germs: &[Germ<S>]) -> Result<Vec<Vec<S>>> {
    let mut out = Vec::new();
    for g in germs {
        let m = g.linear();
        if is_lower_triangular(ar, m) || germs.len() == 1 {
            if is_lower_triangular(ar, m) {
                out.push(m.diag());
            } else {
                let ev = jordan::eigenvalues(ar, m)?;
                out.push(ev.into_iter().flat_map(|(v, k)| std::iter::repeat_n(v, k)).collect());
            }
        } else {
            return Err(Error::NotJordanForm(
                "several germs need lower-triangular linear parts so that eigenvalues pair up".into(),
            ));
        }
    }
    Ok(out)
}

fn q_list<'a>(set: impl IntoIterator<Item = &'a crate::series::MultiIndex>) -> Vec<Vec<u32>> {
    set.into_iter().map(|q| q.to_vec()).collect()
}

fn cmd_resonances<S: Scalar>(ar: &Arith<S>, prob: &Problem<S>, m_max: u32) -> Result<Done> {
    let germs = need_germs(prob)?;
    let tuples = spectra(ar, germs)?;
    let table = ResonanceTable::build(ar, &tuples, m_max.max(2))?;
    let n = prob.n;
    let per_tuple: Vec<Value> = (0..tuples.len())
        .map(|k| {
            json!({
                "germ": k + 1,
                "eigenvalues": tuples[k].iter().map(format_complex).collect::<Vec<_>>(),
                "res": (0..n).map(|j| json!({"j": j + 1, "q": q_list(table.per_tuple(k, j))})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let simultaneous: Vec<Value> = (0..n).map(|j| json!({"j": j + 1, "q": q_list(table.simultaneous(j))})).collect();
    let near: Vec<Value> = table
        .near()
        .iter()
        .map(|r| json!({"germ": r.k + 1, "j": r.j + 1, "q": r.q.to_vec(), "modulus": r.modulus}))
        .collect();
    Ok(done(json!({
        "m_max": table.m_max(),
        "per_tuple": per_tuple,
        "simultaneous": simultaneous,
        "simultaneous_empty": (0..n).all(|j| table.simultaneous(j).is_empty()),
        "near_resonances": near,
    })))
}

fn result_json<S: Scalar>(ar: &Arith<S>, r: &LinearizationResult<S>) -> Value {
    let obstructions: Vec<Value> = r
        .obstructions
        .iter()
        .map(|o| {
            json!({
                "q": o.q.to_vec(), "j": o.j + 1, "germ": o.germ + 1,
                "residual": format_complex(&o.residual), "residual_abs": ar.abs_f64(&o.residual),
            })
        })
        .collect();
    json!({
        "status": r.status,
        "degree_reached": r.degree_reached,
        "phi": germ_spec(&r.phi),
        "obstructions": obstructions,
    })
}

fn cmd_linearize<S: Scalar>(ar: &Arith<S>, prob: &Problem<S>, mode: LinearizeMode, verify: bool) -> Result<Done> {
    let germs = need_germs(prob)?;
    let used: &[Germ<S>] = if mode == LinearizeMode::Single { &germs[..1] } else { germs };
    let table = resonances_of(ar, used)?;
    let near_commute = if used.len() > 1 { commutation(ar, used)?.near } else { Vec::new() };
    let result = match mode {
        LinearizeMode::Single => formal_linearize(ar, &used[0], &table)?,
        LinearizeMode::Sequential => simul_linearize_sequential(ar, used, &table)?,
        LinearizeMode::Direct => simul_linearize_direct(ar, used, &table)?,
    };
    let mut payload = result_json(ar, &result);
    payload["germs_used"] = json!(used.len());
    payload["commutation_near_misses"] = serde_json::to_value(&near_commute).expect("serializable");
    payload["near_resonances"] = json!(table.near().len());
    if verify {
        payload["residuals"] = json!(verify_conjugacy(ar, used, &result.phi)?);
    }
    let (status, code) = match result.status {
        Status::Linearized => ("ok", EXIT_OK),
        Status::Obstructed => ("obstructed", EXIT_OBSTRUCTION),
    };
    Ok(Done { status, code, payload, csv: None })
}

fn parse_variants(names: &[String]) -> Result<Vec<OmegaVariant>> {
    let all = OmegaVariant::all();
    names
        .iter()
        .map(|n| {
            all.iter().copied().find(|v| v.name() == n.trim()).ok_or_else(|| {
                let known: Vec<&str> = all.iter().map(|v| v.name()).collect();
                Error::parse("--variants", format!("unknown variant {n:?}; expected one of {}", known.join(", ")))
            })
        })
        .collect()
}

fn cmd_brjuno<S: Scalar>(
    ar: &Arith<S>,
    prob: &Problem<S>,
    m_max: u32,
    nu_max: Option<u32>,
    variants: &[String],
    csv: Option<PathBuf>,
    omega_override: Option<&Path>,
) -> Result<Done> {
    let report = match omega_override {
        Some(path) => {
            let values = parse_omega_values(&read(path)?)?;
            BrjunoReport::from_omega(&OmegaSequence::from_values(&values)?, nu_max)?
        }
        None => {
            let germs = need_germs(prob)?;
            let tuples = spectra(ar, germs)?;
            BrjunoReport::from_tuples(ar, &tuples, m_max.max(2), nu_max, &parse_variants(variants)?)?
        }
    };
    let all_pass = report.variants.iter().filter_map(|v| v.comparison.as_ref()).all(|a| a.passed());
    let mut payload = serde_json::to_value(&report).expect("serializable");
    payload["comparison_all_pass"] = json!(all_pass);
    let csv = csv.map(|p| (p, report.csv()));
    Ok(Done { status: "ok", code: EXIT_OK, payload, csv })
}

fn cmd_jordan<S: Scalar>(ar: &Arith<S>, prob: &Problem<S>, conjugator: Option<&Path>) -> Result<Done> {
    if prob.matrices.is_empty() {
        return Err(Error::InvalidInput("the jordan command needs a matrices section".into()));
    }
    let mats = &prob.matrices;
    jordan::check_family(ar, mats)?;
    for m in mats {
        if ar.is_zero(&m.det(ar)?) {
            return Err(Error::SingularMatrix);
        }
    }
    let commute = jordan::commute_check(ar, mats)?;
    let form = jordan::check_form(ar, mats)?;
    let diag = match jordan::simultaneous_diagonalize(ar, mats) {
        Ok(a) => {
            let check = jordan::verify_conjugation(ar, mats, &a)?;
            json!({"status": "ok", "conjugator": matrix_literals(&a), "conjugated_form": check})
        }
        Err(e @ (Error::NotDiagonalizable(_) | Error::NotCommuting { .. } | Error::Unsupported(_))) => {
            json!({"status": error_kind(&e), "message": e.to_string()})
        }
        Err(e) => return Err(e),
    };
    let mut payload = json!({
        "commute": commute.commute,
        "non_commuting_pair": commute.pair.map(|(p, q)| [p + 1, q + 1]),
        "commute_near_misses": commute.near.iter().map(|&(p, q, v)| json!([p + 1, q + 1, v])).collect::<Vec<_>>(),
        "form": form,
        "diagonalization": diag,
    });
    if let Some(path) = conjugator {
        let a = parse_matrix_file(ar, &read(path)?, prob.n)?;
        payload["conjugator_check"] = serde_json::to_value(jordan::verify_conjugation(ar, mats, &a)?).expect("serializable");
    }
    Ok(done(payload))
}

const COUNTING_SCHEDULE: [u32; 9] = [2, 3, 4, 6, 8, 12, 16, 24, 32];

fn cmd_majorant<S: Scalar>(ar: &Arith<S>, prob: &Problem<S>, m_max: Option<u32>, csv: Option<PathBuf>) -> Result<Done> {
    let germs = need_germs(prob)?;
    for (k, g) in germs.iter().enumerate() {
        if !g.linear().is_diagonal(ar) {
            return Err(Error::NotJordanForm(format!("the majorant needs diagonal linear parts; germ {} is not diagonal", k + 1)));
        }
    }
    let m_max = m_max.unwrap_or(prob.trunc).min(prob.trunc).max(2);
    let tuples: Vec<Vec<S>> = germs.iter().map(|g| g.linear().diag()).collect();
    let maj = MajorantData::build(ar, &tuples, m_max)?;
    let theta = maj.delta.theta()?;
    let (normalized, sigma) = sigma_normalize_family(ar, germs)?;
    let table = resonances_of(ar, &normalized)?;
    let result = if normalized.len() == 1 {
        formal_linearize(ar, &normalized[0], &table)?
    } else {
        simul_linearize_direct(ar, &normalized, &table)?
    };
    let cert = certify_coefficients(ar, &result, &normalized, &maj)?;
    let mut counting = Vec::new();
    let mut counting_pass = true;
    for &m in COUNTING_SCHEDULE.iter().filter(|&&m| m <= m_max) {
        for j in 0..prob.n {
            let r = counting_check(&maj.delta, m, j)?;
            counting_pass &= r.passed();
            counting.push(json!({
                "m": m, "j": j + 1, "passed": r.passed(), "max_count": r.max_count,
                "threshold": r.threshold, "violations": r.violations,
            }));
        }
    }
    let delta: Vec<Value> = maj
        .delta
        .entries
        .iter()
        .map(|(q, e)| {
            json!({
                "q": q.to_vec(), "delta": e.value.to_f64(), "eps": e.eps.value.to_f64(),
                "eps_germ": e.eps.k + 1, "eps_j": e.eps.i + 1,
                "parts": e.parts.iter().map(|p| p.to_vec()).collect::<Vec<_>>(),
                "decomposition": e.decomposition.iter().map(|p| p.to_vec()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let payload = json!({
        "m_max": m_max,
        "sigma": sigma.to_f64(),
        "theta": theta.to_f64(),
        "alpha": maj.alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "delta": delta,
        "skipped": maj.delta.skipped.iter().map(|q| q.to_vec()).collect::<Vec<_>>(),
        "linearization": { "status": result.status, "degree_reached": result.degree_reached },
        "bounds": cert,
        "counting": counting,
        "all_pass": cert.all_pass && counting_pass,
    });
    let csv = csv.map(|p| {
        let mut s = String::from("q,norm,bound\n");
        for r in &cert.rows {
            let q: Vec<String> = r.q.as_slice().iter().map(u32::to_string).collect();
            let _ = writeln!(s, "{},{:e},{:e}", q.join(" "), r.norm, r.bound);
        }
        (p, s)
    });
    let (status, code) = match result.status {
        Status::Linearized => ("ok", EXIT_OK),
        Status::Obstructed => ("obstructed", EXIT_OBSTRUCTION),
    };
    Ok(Done { status, code, payload, csv })
}
