use std::fmt::Write as _;

use serde::Serialize;

use super::series::{series_comparison, b_partials, r_gamma_partials, SeriesComparison};
use crate::error::{Error, Result};
use crate::resonance::{check_tuples, OmegaSequence, OmegaTable, OmegaVariant};
use crate::scalars::{Arith, Scalar};

const COMPARISON_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmegaPoint {
    pub m: u64,
    pub omega: f64,
    pub log_inv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BPartial {
    pub nu: u32,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RGammaPartial {
    pub k: u64,
    pub r: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CremerPoint {
    pub m: u64,
    pub value: f64,
}

/// Tables and partial sums for one `ω` function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantReport {
    pub variant: String,
    pub defined_from: u64,
    /// `ω` at the first degree of each constant run and at `m_max`.
    pub omega: Vec<OmegaPoint>,
    pub b_partials: Vec<BPartial>,
    pub r_gamma_partials: Vec<RGammaPartial>,
    /// Running maximum of `(1/m) log(1/ω(m))`, recorded where it changes.
    /// An indicator only: a finite prefix decides nothing about the limit.
    pub cremer_indicator: Vec<CremerPoint>,
    pub comparison: Option<SeriesComparison>,
}

impl VariantReport {
    fn new(name: &str, omega: &OmegaSequence, nu_max: Option<u32>) -> Result<Self> {
        let len = omega.len();
        let mut points: Vec<OmegaPoint> = omega
            .runs()
            .iter()
            .map(|r| OmegaPoint { m: r.from, omega: r.omega.to_f64(), log_inv: r.log_inv })
            .collect();
        if points.last().is_none_or(|p| p.m != len) {
            points.push(OmegaPoint { m: len, omega: omega.value(len).to_f64(), log_inv: omega.log_inv(len) });
        }
        let (b, rg, comparison) = match nu_max {
            Some(nu) => {
                let b = b_partials(omega, nu)?.into_iter().map(|(nu, b)| BPartial { nu, b }).collect();
                let k = (1u64 << (nu + 1)) - 1;
                let rg = r_gamma_partials(omega, k)?.into_iter().map(|(k, r, gamma)| RGammaPartial { k, r, gamma }).collect();
                let app = if nu >= 1 { Some(series_comparison(omega, nu, COMPARISON_SLACK)?) } else { None };
                (b, rg, app)
            }
            None => (Vec::new(), Vec::new(), None),
        };
        Ok(VariantReport {
            variant: name.to_string(),
            defined_from: omega.defined_from(),
            omega: points,
            b_partials: b,
            r_gamma_partials: rg,
            cremer_indicator: omega
                .cremer_trajectory(omega.defined_from())
                .into_iter()
                .map(|(m, value)| CremerPoint { m, value })
                .collect(),
            comparison,
        })
    }
}

/// Small-divisor diagnostics of an eigenvalue family, or of a given `ω`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrjunoReport {
    pub m_max: u64,
    /// `B` is summed over `ν <= nu_max`; `R` and `Γ` up to `2^{nu_max+1} - 1`.
    pub nu_max: Option<u32>,
    /// `θ = min |λ| / 4`; absent for a supplied `ω`.
    pub theta: Option<f64>,
    pub near_resonances: usize,
    pub variants: Vec<VariantReport>,
    /// Per tuple, `B` at `nu_max` for the reduced `ω` of that tuple alone.
    pub reduced_b: Vec<Option<f64>>,
}

fn default_nu(len: u64) -> Option<u32> {
    (0..62u32).rev().find(|&nu| (1u64 << (nu + 1)) <= len)
}

fn pick_nu(len: u64, nu_max: Option<u32>) -> Result<Option<u32>> {
    match nu_max {
        None => Ok(default_nu(len)),
        Some(nu) if nu < 62 && (1u64 << (nu + 1)) <= len => Ok(Some(nu)),
        Some(nu) => Err(Error::InvalidInput(format!("nu_max {nu} needs omega up to 2^{}, but m_max is {len}", nu + 1))),
    }
}

impl BrjunoReport {
    pub fn from_tuples<S: Scalar>(
        ar: &Arith<S>,
        tuples: &[Vec<S>],
        m_max: u32,
        nu_max: Option<u32>,
        variants: &[OmegaVariant],
    ) -> Result<Self> {
        check_tuples(ar, tuples)?;
        let variants = if variants.is_empty() { vec![OmegaVariant::simultaneous()] } else { variants.to_vec() };
        let len = u64::from(m_max);
        let nu = pick_nu(len, nu_max)?;
        let table = OmegaTable::build(ar, tuples, m_max)?;
        let mut reports = Vec::new();
        for v in &variants {
            reports.push(VariantReport::new(v.name(), table.sequence(*v), nu)?);
        }
        let reduced_b = table
            .reduced
            .iter()
            .map(|r| match (r, nu) {
                (Some(s), Some(nu)) => b_partials(s, nu).ok().and_then(|p| p.last().map(|x| x.1)),
                _ => None,
            })
            .collect();
        let prec = ar.real_prec();
        let min = tuples
            .iter()
            .flatten()
            .map(|l| l.modulus(prec).value)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .expect("nonempty");
        Ok(BrjunoReport {
            m_max: len,
            nu_max: nu,
            theta: Some(min.to_f64() / 4.0),
            near_resonances: table.near,
            variants: reports,
            reduced_b,
        })
    }

    /// Diagnostics for a supplied `ω` (values for `m = 1, 2, …`).
    pub fn from_omega(omega: &OmegaSequence, nu_max: Option<u32>) -> Result<Self> {
        let nu = pick_nu(omega.len(), nu_max)?;
        Ok(BrjunoReport {
            m_max: omega.len(),
            nu_max: nu,
            theta: None,
            near_resonances: 0,
            variants: vec![VariantReport::new("override", omega, nu)?],
            reduced_b: Vec::new(),
        })
    }

    /// Three blocks for the first variant, separated by blank lines:
    /// `m,omega`, then `nu,B_partial`, then `k,R_partial,Gamma_partial`.
    pub fn csv(&self) -> String {
        let mut s = String::new();
        let Some(v) = self.variants.first() else { return s };
        s.push_str("m,omega\n");
        for p in &v.omega {
            let _ = writeln!(s, "{},{:e}", p.m, p.omega);
        }
        s.push_str("\nnu,B_partial\n");
        for p in &v.b_partials {
            let _ = writeln!(s, "{},{:e}", p.nu, p.b);
        }
        s.push_str("\nk,R_partial,Gamma_partial\n");
        for p in &v.r_gamma_partials {
            let _ = writeln!(s, "{},{:e},{:e}", p.k, p.r, p.gamma);
        }
        s
    }
}
