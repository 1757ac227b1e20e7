//! The JSON problem file, complex literals and matrix files.
//!
//! A problem file looks like
//!
//! ```json
//! {
//!   "n": 1,
//!   "truncation_degree": 6,
//!   "scalar": { "mode": "exact" },
//!   "germs": [ { "linear": [["2"]], "terms": [ { "j": 1, "q": [2], "c": "1/2+i" } ] } ]
//! }
//! ```
//!
//! Coordinates `j` are 1-based in files and 0-based everywhere else.
//! Complex literals are `re`, `im i` or `re±im i`, where each numeral is
//! `p` or `p/q` in exact mode and a decimal in bigfloat mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalars::{Arith, BigComplex, GaussRational, Scalar, ZeroPolicy, DEFAULT_PRECISION, MAX_PRECISION, MIN_PRECISION};
use crate::series::{Germ, MultiIndex};

pub const MAX_DIM: usize = 8;
pub const MAX_TRUNCATION: u32 = 40;
/// Longest accepted literal, in bytes.
pub const MAX_LITERAL_LEN: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Bigfloat,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub j: usize,
    pub q: Vec<u32>,
    pub c: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermSpec {
    pub linear: Vec<Vec<String>>,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub truncation_degree: u32,
    #[serde(default)]
    pub scalar: ScalarConfig,
    #[serde(default)]
    pub germs: Vec<GermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Vec<Vec<String>>>>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
}

fn check_matrix(path: &str, rows: &[Vec<String>], n: usize) -> Result<()> {
    if rows.len() != n {
        return Err(Error::parse(path, format!("expected {n} rows, got {}", rows.len())));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::parse(format!("{path}[{r}]"), format!("expected {n} entries, got {}", row.len())));
        }
    }
    Ok(())
}

impl ProblemFile {
    /// Parses and checks the structure; literals are read by
    /// [`ProblemFile::build`].
    pub fn parse(text: &str) -> Result<Self> {
        let p: ProblemFile = serde_json::from_str(text).map_err(json_error)?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || n > MAX_DIM {
            return Err(Error::parse("n", format!("must lie in 1..={MAX_DIM}, got {n}")));
        }
        if self.truncation_degree == 0 || self.truncation_degree > MAX_TRUNCATION {
            return Err(Error::parse(
                "truncation_degree",
                format!("must lie in 1..={MAX_TRUNCATION}, got {}", self.truncation_degree),
            ));
        }
        if let Some(p) = self.scalar.precision_bits {
            if !(MIN_PRECISION..=MAX_PRECISION).contains(&p) {
                return Err(Error::parse("scalar.precision_bits", format!("must lie in {MIN_PRECISION}..={MAX_PRECISION}, got {p}")));
            }
        }
        if let Some(t) = self.scalar.zero_tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::parse("scalar.zero_tol", format!("must be positive, got {t}")));
            }
        }
        for (g, germ) in self.germs.iter().enumerate() {
            check_matrix(&format!("germs[{g}].linear"), &germ.linear, n)?;
            for (t, term) in germ.terms.iter().enumerate() {
                let path = format!("germs[{g}].terms[{t}]");
                if term.j == 0 || term.j > n {
                    return Err(Error::parse(format!("{path}.j"), format!("coordinate must lie in 1..={n}, got {}", term.j)));
                }
                if term.q.len() != n {
                    return Err(Error::parse(format!("{path}.q"), format!("expected {n} exponents, got {}", term.q.len())));
                }
                let d: u64 = term.q.iter().map(|&x| u64::from(x)).sum();
                if d < 2 || d > u64::from(self.truncation_degree) {
                    return Err(Error::parse(
                        format!("{path}.q"),
                        format!("degree {d} outside 2..={}", self.truncation_degree),
                    ));
                }
            }
        }
        if let Some(ms) = &self.matrices {
            for (i, m) in ms.iter().enumerate() {
                check_matrix(&format!("matrices[{i}]"), m, n)?;
            }
        }
        Ok(())
    }

    /// Working precision after applying an optional override.
    pub fn precision(&self, override_bits: Option<u32>) -> u32 {
        override_bits.or(self.scalar.precision_bits).unwrap_or(DEFAULT_PRECISION)
    }

    pub fn exact_arith(&self, prec: Option<u32>, tol: Option<f64>) -> Result<Arith<GaussRational>> {
        let policy = match tol.or(self.scalar.zero_tol) {
            Some(t) => ZeroPolicy::tolerance(t)?,
            None => ZeroPolicy::Exact,
        };
        Arith::new((), policy, self.precision(prec))
    }

    pub fn float_arith(&self, prec: Option<u32>, tol: Option<f64>) -> Result<Arith<BigComplex>> {
        let p = self.precision(prec);
        let policy = match tol.or(self.scalar.zero_tol) {
            Some(t) => ZeroPolicy::tolerance(t)?,
            None => ZeroPolicy::default_for_precision(p),
        };
        Arith::new(p, policy, p)
    }

    pub fn build<S: Scalar>(&self, ar: &Arith<S>) -> Result<Problem<S>> {
        self.validate()?;
        let mut germs = Vec::with_capacity(self.germs.len());
        for (g, spec) in self.germs.iter().enumerate() {
            let linear = parse_rows(ar, &format!("germs[{g}].linear"), &spec.linear)?;
            let mut terms = Vec::with_capacity(spec.terms.len());
            for (t, term) in spec.terms.iter().enumerate() {
                let c = parse_complex(ar, &term.c).map_err(|m| Error::parse(format!("germs[{g}].terms[{t}].c"), m))?;
                terms.push((term.j - 1, MultiIndex::new(term.q.clone()), c));
            }
            let germ = Germ::new(ar, self.truncation_degree, linear, terms).map_err(|e| match e {
                Error::SingularMatrix => Error::parse(format!("germs[{g}].linear"), "linear part is singular"),
                other => other,
            })?;
            germs.push(germ);
        }
        let mut matrices = Vec::new();
        for (i, m) in self.matrices.iter().flatten().enumerate() {
            matrices.push(parse_rows(ar, &format!("matrices[{i}]"), m)?);
        }
        Ok(Problem { n: self.n, trunc: self.truncation_degree, germs, matrices })
    }
}

/// A problem file with its literals read into one backend.
#[derive(Clone, Debug)]
pub struct Problem<S> {
    pub n: usize,
    pub trunc: u32,
    pub germs: Vec<Germ<S>>,
    pub matrices: Vec<Matrix<S>>,
}

fn parse_rows<S: Scalar>(ar: &Arith<S>, path: &str, rows: &[Vec<String>]) -> Result<Matrix<S>> {
    let mut out = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let mut v = Vec::with_capacity(row.len());
        for (c, lit) in row.iter().enumerate() {
            v.push(parse_complex(ar, lit).map_err(|m| Error::parse(format!("{path}[{r}][{c}]"), m))?);
        }
        out.push(v);
    }
    Matrix::from_rows(out).map_err(|e| Error::parse(path, e.to_string()))
}

/// Splits `re±im i` into its two numerals. A sign preceded by `e`/`E` belongs
/// to an exponent.
pub fn split_complex(s: &str) -> std::result::Result<(String, String), String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty complex literal".into());
    }
    if t.len() > MAX_LITERAL_LEN {
        return Err(format!("literal longer than {MAX_LITERAL_LEN} bytes"));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok((t.to_string(), "0".to_string()));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    if re.trim() != re || im.trim() != im || re.is_empty() {
        return Err(format!("malformed complex literal {s:?}"));
    }
    Ok((re.to_string(), im.to_string()))
}

pub fn parse_complex<S: Scalar>(ar: &Arith<S>, s: &str) -> std::result::Result<S, String> {
    let (re, im) = split_complex(s)?;
    ar.parse_complex(&re, &im)
}

/// Inverse of [`parse_complex`]: `re`, `im i` or `re±im i`.
pub fn format_complex<S: Scalar>(x: &S) -> String {
    let (re, im) = x.to_literal();
    match (re.as_str(), im.as_str()) {
        (_, "0") => re,
        ("0", _) => format!("{im}i"),
        _ if im.starts_with('-') => format!("{re}{im}i"),
        _ => format!("{re}+{im}i"),
    }
}

pub fn matrix_literals<S: Scalar>(m: &Matrix<S>) -> Vec<Vec<String>> {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| format_complex(m.get(r, c))).collect()).collect()
}

/// A germ as it would appear in a problem file.
pub fn germ_spec<S: Scalar>(g: &Germ<S>) -> GermSpec {
    GermSpec {
        linear: matrix_literals(g.linear()),
        terms: g.terms().into_iter().map(|(q, j, c)| TermSpec { j: j + 1, q: q.to_vec(), c: format_complex(&c) }).collect(),
    }
}

/// A square matrix file: a JSON array of rows of complex literals, or an
/// object `{"matrix": [...]}`.
pub fn parse_matrix_file<S: Scalar>(ar: &Arith<S>, text: &str, n: usize) -> Result<Matrix<S>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum File {
        Rows(Vec<Vec<String>>),
        Wrapped { matrix: Vec<Vec<String>> },
    }
    let rows = match serde_json::from_str::<File>(text).map_err(json_error)? {
        File::Rows(r) | File::Wrapped { matrix: r } => r,
    };
    check_matrix("matrix", &rows, n)?;
    parse_rows(ar, "matrix", &rows)
}

/// `ω(1), ω(2), …` from a JSON array of numbers or decimal strings.
pub fn parse_omega_values(text: &str) -> Result<Vec<f64>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum V {
        Num(f64),
        Str(String),
    }
    let raw: Vec<V> = serde_json::from_str(text).map_err(json_error)?;
    raw.into_iter()
        .enumerate()
        .map(|(i, v)| match v {
            V::Num(x) => Ok(x),
            V::Str(s) => s.trim().parse::<f64>().map_err(|e| Error::parse(format!("[{i}]"), e.to_string())),
        })
        .collect()
}
