//! Partial sums of the series `B`, `R` and `Γ` over a non-increasing `ω`,
//! and the comparison inequalities between them.
//!
//! All sums walk the constant runs of an [`OmegaSequence`], so truncations
//! at `K = 2^31` cost time proportional to the number of runs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::resonance::OmegaSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Series {
    /// `Σ_{ν≥0} 2^{-ν} log(1/ω(2^{ν+1}))`, truncated at `ν_max`.
    B,
    /// `Σ_{k≥1} k^{-2} log(1/ω(k))`, truncated at `K`.
    R,
    /// `Σ_{k≥1} (k(k+1))^{-1} log(1/ω(k))`, truncated at `K`.
    Gamma,
}

/// Compensated (Neumaier) summation.
#[derive(Default, Clone, Copy)]
pub(crate) struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }
    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// `ψ'(x)` for `x >= 1`.
pub(crate) fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let t = 1.0 / (x * x);
    let tail = 1.0 / x
        + t / 2.0
        + t / x * (1.0 / 6.0 - t * (1.0 / 30.0 - t * (1.0 / 42.0 - t * (1.0 / 30.0 - t * 5.0 / 66.0))));
    acc + tail
}

/// `Σ_{k=a}^{b} 1/k²`.
fn inv_square_sum(a: u64, b: u64) -> f64 {
    if b - a < 64 {
        let mut s = Sum::default();
        for k in (a..=b).rev() {
            let k = k as f64;
            s.add(1.0 / (k * k));
        }
        s.value()
    } else {
        trigamma(a as f64) - trigamma(b as f64 + 1.0)
    }
}

/// `Σ_{k=a}^{b} 1/(k(k+1)) = (b+1-a) / (a(b+1))`.
fn telescoping_sum(a: u64, b: u64) -> f64 {
    (b + 1 - a) as f64 / (a as f64 * (b as f64 + 1.0))
}

fn need(omega: &OmegaSequence, upto: u64) -> Result<()> {
    if omega.len() < upto {
        return Err(Error::InvalidInput(format!("omega is defined up to {} but {upto} is needed", omega.len())));
    }
    Ok(())
}

fn run_sum(omega: &OmegaSequence, k_max: u64, weight: fn(u64, u64) -> f64) -> f64 {
    let mut s = Sum::default();
    for r in omega.runs() {
        if r.from > k_max {
            break;
        }
        let b = r.to.min(k_max);
        if r.log_inv != 0.0 {
            s.add(r.log_inv * weight(r.from, b));
        }
    }
    s.value()
}

/// Partial sum of one series. `truncation` is `ν_max` for [`Series::B`] and
/// `K` for the others.
pub fn series_partial_sum(omega: &OmegaSequence, series: Series, truncation: u64) -> Result<f64> {
    match series {
        Series::B => {
            if truncation > 62 {
                return Err(Error::InvalidInput(format!("nu_max {truncation} is too large")));
            }
            need(omega, 1 << (truncation + 1))?;
            let mut s = Sum::default();
            for nu in 0..=truncation {
                s.add(omega.log_inv(1 << (nu + 1)) / (1u64 << nu) as f64);
            }
            Ok(s.value())
        }
        Series::R => {
            need(omega, truncation)?;
            Ok(run_sum(omega, truncation, inv_square_sum))
        }
        Series::Gamma => {
            need(omega, truncation)?;
            Ok(run_sum(omega, truncation, telescoping_sum))
        }
    }
}

/// `Σ_ν (1/p_ν) log(1/ω(p_{ν+1}))` for a strictly increasing schedule with
/// `p_0 = 1`; the last entry only enters through `ω`.
pub fn schedule_partial_sum(omega: &OmegaSequence, schedule: &[u64]) -> Result<f64> {
    if schedule.first() != Some(&1) || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("schedule must start at 1 and strictly increase".into()));
    }
    need(omega, *schedule.last().unwrap())?;
    let mut s = Sum::default();
    for w in schedule.windows(2) {
        s.add(omega.log_inv(w[1]) / w[0] as f64);
    }
    Ok(s.value())
}

/// `(ν, B_ν)` for `ν = 0..=nu_max`.
pub fn b_partials(omega: &OmegaSequence, nu_max: u32) -> Result<Vec<(u32, f64)>> {
    if nu_max > 62 {
        return Err(Error::InvalidInput(format!("nu_max {nu_max} is too large")));
    }
    need(omega, 1 << (nu_max + 1))?;
    let mut s = Sum::default();
    Ok((0..=nu_max)
        .map(|nu| {
            s.add(omega.log_inv(1 << (nu + 1)) / (1u64 << nu) as f64);
            (nu, s.value())
        })
        .collect())
}

/// `(k, R_k, Γ_k)` at `k = 2^i - 1` up to `k_max`, plus `k_max` itself.
pub fn r_gamma_partials(omega: &OmegaSequence, k_max: u64) -> Result<Vec<(u64, f64, f64)>> {
    need(omega, k_max)?;
    let mut ks: Vec<u64> = (1..64).map(|i| (1u64 << i) - 1).take_while(|&k| k < k_max).collect();
    ks.push(k_max);
    Ok(ks
        .into_iter()
        .map(|k| (k, run_sum(omega, k, inv_square_sum), run_sum(omega, k, telescoping_sum)))
        .collect())
}

/// Both comparison chains at one truncation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesComparison {
    pub nu_max: u32,
    /// `2^{ν_max+1} - 1`.
    pub k: u64,
    pub b: f64,
    /// `B` truncated one block earlier, at `ν_max - 1`.
    pub b_prev: f64,
    pub r: f64,
    pub gamma: f64,
    pub log_inv_1: f64,
    pub slack: f64,
    pub gamma_le_r: bool,
    pub r_le_two_gamma: bool,
    pub gamma_le_half_b: bool,
    /// `B_{ν_max-1}/2 <= 2Γ_K - log(1/ω(1))`: each block of `B` is matched
    /// by the block of `Γ` it is bounded by.
    pub half_b_le_bound: bool,
    /// The same comparison with `B` at `ν_max`. Its last block has no
    /// partner inside `k <= K`, so this can fail (it does for constant `ω`).
    pub half_b_le_bound_same_nu: bool,
}

impl SeriesComparison {
    pub fn passed(&self) -> bool {
        self.gamma_le_r && self.r_le_two_gamma && self.gamma_le_half_b && self.half_b_le_bound
    }
}

/// Evaluates `Γ <= R <= 2Γ` and `Γ <= B/2 <= 2Γ - log(1/ω(1))` with
/// absolute slack `slack`. Needs `ω` on `1..=2^{ν_max+1}`.
pub fn series_comparison(omega: &OmegaSequence, nu_max: u32, slack: f64) -> Result<SeriesComparison> {
    if nu_max == 0 || nu_max > 40 {
        return Err(Error::InvalidInput(format!("nu_max must lie in 1..=40, got {nu_max}")));
    }
    let k = (1u64 << (nu_max + 1)) - 1;
    let b = series_partial_sum(omega, Series::B, u64::from(nu_max))?;
    let b_prev = series_partial_sum(omega, Series::B, u64::from(nu_max - 1))?;
    let r = series_partial_sum(omega, Series::R, k)?;
    let gamma = series_partial_sum(omega, Series::Gamma, k)?;
    let l1 = omega.log_inv(1);
    let bound = 2.0 * gamma - l1;
    Ok(SeriesComparison {
        nu_max,
        k,
        b,
        b_prev,
        r,
        gamma,
        log_inv_1: l1,
        slack,
        gamma_le_r: gamma <= r + slack,
        r_le_two_gamma: r <= 2.0 * gamma + slack,
        gamma_le_half_b: gamma <= b / 2.0 + slack,
        half_b_le_bound: b_prev / 2.0 <= bound + slack,
        half_b_le_bound_same_nu: b / 2.0 <= bound + slack,
    })
}

/// Both sides of the dyadic comparison for a non-decreasing `Ω >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RussmannCheck {
    pub q: u32,
    pub nu_max: u32,
    /// `Σ_{ν<=ν_max} 2^{-(q+ν)} log Ω(2^{q+ν+1})`.
    pub lhs: f64,
    /// `Σ_{2^{q+1} <= k < 2^{q+ν_max+2}} k^{-2} log Ω(k)`.
    pub rhs: f64,
    pub holds: bool,
    /// `lhs <= 4 rhs`, which follows blockwise from
    /// `Σ_{s<=k<2s} k^{-2} >= 1/(2s)`.
    pub holds_with_factor_four: bool,
}

/// `log_omega[k-1] = log Ω(k)`, required non-decreasing and nonnegative on
/// `1..2^{q+ν_max+2}`.
pub fn russmann_check(log_omega: &[f64], q: u32, nu_max: u32, slack: f64) -> Result<RussmannCheck> {
    if q + nu_max + 2 > 40 {
        return Err(Error::InvalidInput("q + nu_max too large".into()));
    }
    let end = (1u64 << (q + nu_max + 2)) - 1;
    if (log_omega.len() as u64) < end {
        return Err(Error::InvalidInput(format!("log Omega needs {end} values, got {}", log_omega.len())));
    }
    for (i, &v) in log_omega.iter().enumerate() {
        if !(v.is_finite() && v >= 0.0) || (i > 0 && v < log_omega[i - 1]) {
            return Err(Error::NonMonotoneOmega(i + 1));
        }
    }
    let at = |k: u64| log_omega[(k - 1) as usize];
    let mut lhs = Sum::default();
    for nu in 0..=nu_max {
        let s = 1u64 << (q + nu);
        lhs.add(at(2 * s) / s as f64);
    }
    let mut rhs = Sum::default();
    for k in (1u64 << (q + 1))..=end {
        let kf = k as f64;
        rhs.add(at(k) / (kf * kf));
    }
    let (lhs, rhs) = (lhs.value(), rhs.value());
    Ok(RussmannCheck { q, nu_max, lhs, rhs, holds: lhs <= rhs + slack, holds_with_factor_four: lhs <= 4.0 * rhs + slack })
}
