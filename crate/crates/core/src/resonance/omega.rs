//! Non-increasing sequences `m -> ω(m)` stored as constant runs.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ω(m) = omega` for `from <= m <= to`.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaRun {
    pub from: u64,
    pub to: u64,
    pub omega: Float,
    /// `log(1/ω)`, `+inf` when `ω = 0`.
    pub log_inv: f64,
}

/// A non-increasing, nonnegative function on `1..=len`, piecewise constant.
///
/// Sequences derived from eigenvalue tuples start at `m = 2`; their value at
/// `m = 1` (and at any degree below the first admissible multi-index) repeats
/// the first defined value. `defined_from` records where genuine data starts.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaSequence {
    runs: Vec<OmegaRun>,
    defined_from: u64,
}

fn log_inv(x: &Float) -> f64 {
    if x.is_zero() {
        f64::INFINITY
    } else {
        -Float::with_val(x.prec().max(64), x.ln_ref()).to_f64()
    }
}

impl OmegaSequence {
    /// `ω(1..=values.len())`; values must be positive, finite and
    /// non-increasing.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let floats: Vec<Float> = values.iter().map(|&v| Float::with_val(64, v)).collect();
        for (i, v) in values.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::NonMonotoneOmega(i + 1));
            }
        }
        Self::from_floats(floats)
    }

    /// As [`OmegaSequence::from_values`] for arbitrary-precision values.
    pub fn from_floats(values: Vec<Float>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty omega sequence".into()));
        }
        let mut b = RunBuilder::default();
        for (i, v) in values.into_iter().enumerate() {
            if v.is_nan() || v.is_sign_negative() && !v.is_zero() {
                return Err(Error::NonMonotoneOmega(i + 1));
            }
            if let Some(last) = b.runs.last() {
                if v > last.omega {
                    return Err(Error::NonMonotoneOmega(i + 1));
                }
            }
            b.push(i as u64 + 1, v);
        }
        Ok(b.finish(1))
    }

    /// `ω ≡ c` on `1..=len`.
    pub fn constant(c: f64, len: u64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) || len == 0 {
            return Err(Error::NonMonotoneOmega(1));
        }
        let omega = Float::with_val(64, c);
        Ok(OmegaSequence { runs: vec![OmegaRun { from: 1, to: len, log_inv: log_inv(&omega), omega }], defined_from: 1 })
    }

    /// Last `m` at which the sequence is defined.
    pub fn len(&self) -> u64 {
        self.runs.last().map_or(0, |r| r.to)
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn defined_from(&self) -> u64 {
        self.defined_from
    }

    pub fn runs(&self) -> &[OmegaRun] {
        &self.runs
    }

    fn run_at(&self, m: u64) -> &OmegaRun {
        let m = m.max(1);
        let i = self.runs.partition_point(|r| r.to < m);
        &self.runs[i.min(self.runs.len() - 1)]
    }

    /// `ω(m)`, clamped to the defined range.
    pub fn value(&self, m: u64) -> &Float {
        &self.run_at(m).omega
    }

    pub fn log_inv(&self, m: u64) -> f64 {
        self.run_at(m).log_inv
    }

    /// Pointwise maximum of sequences sharing the same range.
    pub fn pointwise_max(seqs: &[OmegaSequence]) -> OmegaSequence {
        let len = seqs.iter().map(OmegaSequence::len).min().unwrap_or(0);
        let mut cuts: Vec<u64> = seqs.iter().flat_map(|s| s.runs.iter().map(|r| r.from)).filter(|&f| f <= len).collect();
        cuts.sort_unstable();
        cuts.dedup();
        let mut b = RunBuilder::default();
        for &c in &cuts {
            let v = seqs.iter().map(|s| s.value(c)).max_by(|a, b| a.partial_cmp(b).unwrap()).unwrap().clone();
            b.push(c, v);
        }
        let mut out = b.finish(1);
        if let Some(r) = out.runs.last_mut() {
            r.to = len;
        }
        out.defined_from = seqs.iter().map(|s| s.defined_from).max().unwrap_or(1);
        out
    }

    /// Running maximum of `(1/m) log(1/ω(m))` over `from..=to`, as `(m, value)`
    /// pairs at the points where the maximum changes.
    pub fn cremer_trajectory(&self, from: u64) -> Vec<(u64, f64)> {
        let mut out: Vec<(u64, f64)> = Vec::new();
        let mut best = f64::NEG_INFINITY;
        for r in &self.runs {
            if r.to < from {
                continue;
            }
            // Within a run the quotient is largest at its first point when
            // log(1/ω) > 0, and at its last point otherwise.
            let candidates = [r.from.max(from), r.to];
            for m in candidates {
                let v = r.log_inv / m as f64;
                if v > best {
                    best = v;
                    out.push((m, v));
                }
            }
        }
        out
    }
}

/// Builds runs from `(m, value)` pushes with non-decreasing `m`.
#[derive(Default)]
pub(crate) struct RunBuilder {
    runs: Vec<OmegaRun>,
    first: Option<u64>,
}

impl RunBuilder {
    pub fn push(&mut self, m: u64, v: Float) {
        if self.first.is_none() {
            self.first = Some(m);
        }
        match self.runs.last_mut() {
            Some(r) if r.omega == v => r.to = m,
            Some(r) => {
                r.to = m - 1;
                self.runs.push(OmegaRun { from: m, to: m, log_inv: log_inv(&v), omega: v });
            }
            None => self.runs.push(OmegaRun { from: m, to: m, log_inv: log_inv(&v), omega: v }),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Close at the last pushed `m`, extending the first run back to `start`.
    pub fn finish(mut self, start: u64) -> OmegaSequence {
        let defined_from = self.first.unwrap_or(start);
        if let Some(r) = self.runs.first_mut() {
            r.from = start;
        }
        OmegaSequence { runs: self.runs, defined_from }
    }

    /// Close at `len`, extending the last run forward.
    pub fn finish_at(mut self, start: u64, len: u64) -> OmegaSequence {
        if let Some(r) = self.runs.last_mut() {
            r.to = len;
        }
        self.finish(start)
    }
}

/// Running minimum fed one degree at a time.
#[derive(Default)]
pub(crate) struct RunningMin {
    cur: Option<Float>,
    runs: RunBuilder,
}

impl RunningMin {
    pub fn offer(&mut self, v: &Float) {
        if self.cur.as_ref().is_none_or(|c| v < c) {
            self.cur = Some(v.clone());
        }
    }

    /// Record the current minimum as `ω(m)`.
    pub fn close(&mut self, m: u64) {
        if let Some(c) = &self.cur {
            self.runs.push(m, c.clone());
        }
    }

    pub fn finish(self, len: u64) -> Option<OmegaSequence> {
        if self.runs.is_empty() {
            None
        } else {
            Some(self.runs.finish_at(1, len))
        }
    }
}

/// Which aggregation of the divisors `|Λ_k^Q - λ_{k,j}|` defines `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaKind {
    /// `min_Q min_j max_k`.
    SimultaneousMinMax,
    /// `min_Q max_k min_j`.
    BarMinMaxMin,
    /// `max_k min_Q min_j`.
    TildeMaxMinMin,
    /// `max_k min_Q min_j`, optionally over every `Q`.
    RussmannMaxMin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonanceConstraint {
    /// Only `Q` with `ε_Q > 0`.
    ExcludeSimultaneous,
    /// Every `Q` with `2 <= |Q| <= m`.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OmegaVariant {
    pub kind: OmegaKind,
    pub constraint: ResonanceConstraint,
}

impl OmegaVariant {
    pub fn new(kind: OmegaKind, constraint: ResonanceConstraint) -> Result<Self> {
        if constraint == ResonanceConstraint::None && kind != OmegaKind::RussmannMaxMin {
            return Err(Error::InvalidInput(format!("{kind:?} requires the simultaneous-resonance constraint")));
        }
        Ok(OmegaVariant { kind, constraint })
    }

    pub fn simultaneous() -> Self {
        OmegaVariant { kind: OmegaKind::SimultaneousMinMax, constraint: ResonanceConstraint::ExcludeSimultaneous }
    }
    pub fn bar() -> Self {
        OmegaVariant { kind: OmegaKind::BarMinMaxMin, constraint: ResonanceConstraint::ExcludeSimultaneous }
    }
    pub fn tilde() -> Self {
        OmegaVariant { kind: OmegaKind::TildeMaxMinMin, constraint: ResonanceConstraint::ExcludeSimultaneous }
    }
    pub fn russmann(constraint: ResonanceConstraint) -> Self {
        OmegaVariant { kind: OmegaKind::RussmannMaxMin, constraint }
    }

    pub fn name(&self) -> &'static str {
        match (self.kind, self.constraint) {
            (OmegaKind::SimultaneousMinMax, _) => "omega",
            (OmegaKind::BarMinMaxMin, _) => "omega_bar",
            (OmegaKind::TildeMaxMinMin, _) => "omega_tilde",
            (OmegaKind::RussmannMaxMin, ResonanceConstraint::ExcludeSimultaneous) => "russmann_constrained",
            (OmegaKind::RussmannMaxMin, ResonanceConstraint::None) => "russmann",
        }
    }

    pub fn all() -> Vec<OmegaVariant> {
        vec![
            Self::simultaneous(),
            Self::bar(),
            Self::tilde(),
            Self::russmann(ResonanceConstraint::ExcludeSimultaneous),
            Self::russmann(ResonanceConstraint::None),
        ]
    }
}
