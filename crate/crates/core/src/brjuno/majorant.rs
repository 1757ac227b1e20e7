//! The majorant sequences `α_m` and `δ_Q`, the counting lemmas on
//! `δ`-decompositions, and the coefficient bound `‖φ_Q‖ <= α_{|Q|} δ_Q`.

use std::collections::{BTreeMap, HashMap};

use rug::{Float, Integer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linearize::{LinearizationResult, Status};
use crate::resonance::{check_tuples, DivisorStream, Eps, OmegaSequence, RunningMin};
use crate::scalars::{Arith, Scalar};
use crate::series::{Germ, MultiIndex};

/// `α_1..=α_{m_max}`: `α_1 = 1` and `α_m` is the sum over ordered
/// compositions `m = m_1 + … + m_ν`, `ν >= 2`, of `α_{m_1}⋯α_{m_ν}`.
pub fn alpha_seq(m_max: u32) -> Vec<Integer> {
    let m_max = m_max.max(1) as usize;
    // all[m] sums over compositions with any number ν >= 1 of parts.
    let mut alpha = vec![Integer::new(); m_max + 1];
    let mut all = vec![Integer::new(); m_max + 1];
    alpha[1] = Integer::from(1);
    all[1] = Integer::from(1);
    for m in 2..=m_max {
        let mut s = Integer::new();
        for first in 1..m {
            s += Integer::from(&alpha[first] * &all[m - first]);
        }
        all[m] = Integer::from(&s + &s);
        alpha[m] = s;
    }
    alpha.remove(0);
    alpha
}

/// `max_{m <= m_max} (1/m) log α_m`.
pub fn alpha_growth(alpha: &[Integer]) -> f64 {
    alpha
        .iter()
        .enumerate()
        .map(|(i, a)| Float::with_val(64, a).ln().to_f64() / (i + 1) as f64)
        .fold(0.0, f64::max)
}

/// `δ_Q` with the data needed by the counting lemmas.
#[derive(Clone, Debug)]
pub struct DeltaEntry {
    pub value: Float,
    pub eps: Eps,
    /// The maximizing split `Q = Q_1 + … + Q_ν`, parts by decreasing degree.
    pub parts: Vec<MultiIndex>,
    /// `L_0 = Q, L_1, …, L_p` with `δ_Q = Π ε_{L_a}^{-1}`, by decreasing
    /// degree after `L_0`.
    pub decomposition: Vec<MultiIndex>,
}

#[derive(Clone, Debug)]
pub struct DeltaMap {
    pub n: usize,
    pub m_max: u32,
    pub entries: BTreeMap<MultiIndex, DeltaEntry>,
    /// Simultaneously resonant indices, which carry no `δ`.
    pub skipped: Vec<MultiIndex>,
    /// `min_{k,p} |λ_{k,p}|`.
    pub min_abs_lambda: Float,
    /// `ω(m) = min_{2<=|Q|<=m} ε_Q`; `None` if no admissible index exists.
    pub omega: Option<OmegaSequence>,
    prec: u32,
    /// Precision of the input eigenvalues, before widening.
    input_prec: u32,
}

impl DeltaMap {
    pub fn get(&self, q: &MultiIndex) -> Option<&DeltaEntry> {
        self.entries.get(q)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// `θ` with `4θ = min |λ|`; refused when `min |λ| > 1` beyond rounding.
    pub fn theta(&self) -> Result<Float> {
        let slack = Float::with_val(self.prec, Float::i_exp(1, 8 - self.input_prec as i32));
        if self.min_abs_lambda > Float::with_val(self.prec, 1 + slack) {
            return Err(Error::ThetaOutOfRange(self.min_abs_lambda.to_f64()));
        }
        Ok(Float::with_val(self.prec, &self.min_abs_lambda / 4u32))
    }

    /// `Π ε_{L}^{-1}` over a stored decomposition.
    pub fn remultiply(&self, q: &MultiIndex) -> Option<Float> {
        let e = self.entries.get(q)?;
        let mut p = Float::with_val(self.prec, 1);
        for l in &e.decomposition {
            p /= &self.entries[l].eps.value;
        }
        Some(p)
    }
}

/// Multi-indices `P` with `0 < P < Q` componentwise, graded-lex ascending.
fn proper_parts(q: &MultiIndex) -> Vec<MultiIndex> {
    let qs = q.as_slice();
    let mut out = Vec::new();
    let mut cur = vec![0u32; qs.len()];
    loop {
        let mut i = 0;
        while i < qs.len() && cur[i] == qs[i] {
            cur[i] = 0;
            i += 1;
        }
        if i == qs.len() {
            break;
        }
        cur[i] += 1;
        if cur.as_slice() != qs {
            out.push(MultiIndex::new(cur.clone()));
        }
    }
    out.sort();
    out
}

/// `δ_Q` for every `Q` with `2 <= |Q| <= m_max`, via the auxiliary table
/// `best(P) = max over compositions of P with ν >= 1 parts`.
pub fn delta_map<S: Scalar>(ar: &Arith<S>, tuples: &[Vec<S>], m_max: u32) -> Result<DeltaMap> {
    let n = check_tuples(ar, tuples)?;
    if m_max < 2 {
        return Err(Error::InvalidInput("delta needs m_max >= 2".into()));
    }
    let wide = ar.widened(2);
    let prec = wide.real_prec();
    let mut min_abs_lambda: Option<Float> = None;
    for t in tuples {
        for l in t {
            let v = l.modulus(prec).value;
            if min_abs_lambda.as_ref().is_none_or(|m| v < *m) {
                min_abs_lambda = Some(v);
            }
        }
    }

    let mut index: HashMap<MultiIndex, usize> = HashMap::new();
    let mut keys: Vec<MultiIndex> = Vec::new();
    let mut delta: Vec<Option<Float>> = Vec::new();
    let mut eps: Vec<Option<Eps>> = Vec::new();
    let mut best: Vec<Float> = Vec::new();
    // Backtracking: (first part, rest) of the maximizing split; `None` in
    // `best_split` means the composition is P itself.
    let mut delta_split: Vec<Option<(usize, usize)>> = Vec::new();
    let mut best_split: Vec<Option<(usize, usize)>> = Vec::new();
    for i in 0..n {
        index.insert(MultiIndex::unit(n, i), keys.len());
        keys.push(MultiIndex::unit(n, i));
        delta.push(Some(Float::with_val(prec, 1)));
        eps.push(None);
        best.push(Float::with_val(prec, 1));
        delta_split.push(None);
        best_split.push(None);
    }

    let mut stream = DivisorStream::new(&wide, tuples);
    let mut omega = RunningMin::default();
    let mut skipped = Vec::new();
    while stream.degree() < m_max {
        for d in stream.next_degree() {
            let q = d.q.clone();
            let mut split: Option<(usize, usize, Float)> = None;
            for p in proper_parts(&q) {
                let a = index[&p];
                let Some(dp) = &delta[a] else { continue };
                let r = index[&q.checked_sub(&p).expect("proper part")];
                let v = Float::with_val(prec, dp * &best[r]);
                if split.as_ref().is_none_or(|s| v > s.2) {
                    split = Some((a, r, v));
                }
            }
            let (a, r, prod) = split.expect("a split into units always exists");
            let id = keys.len();
            if d.admissible() {
                let e = d.eps();
                omega.offer(&e.value);
                let dq = Float::with_val(prec, &prod / &e.value);
                if dq > prod {
                    best.push(dq.clone());
                    best_split.push(None);
                } else {
                    best.push(prod);
                    best_split.push(Some((a, r)));
                }
                delta.push(Some(dq));
                eps.push(Some(e));
                delta_split.push(Some((a, r)));
            } else {
                skipped.push(q.clone());
                best.push(prod);
                best_split.push(Some((a, r)));
                delta.push(None);
                eps.push(None);
                delta_split.push(None);
            }
            index.insert(q.clone(), id);
            keys.push(q);
        }
        omega.close(u64::from(stream.degree()));
    }

    fn expand(i: usize, best_split: &[Option<(usize, usize)>], out: &mut Vec<usize>) {
        match best_split[i] {
            None => out.push(i),
            Some((a, r)) => {
                out.push(a);
                expand(r, best_split, out);
            }
        }
    }
    let mut parts_of: Vec<Vec<usize>> = vec![Vec::new(); keys.len()];
    let mut decomp_of: Vec<Vec<usize>> = vec![Vec::new(); keys.len()];
    let mut entries = BTreeMap::new();
    for id in 0..keys.len() {
        let Some((a, r)) = delta_split[id] else { continue };
        let mut parts = vec![a];
        expand(r, &best_split, &mut parts);
        parts.sort_by(|x, y| keys[*y].degree().cmp(&keys[*x].degree()));
        let mut factors = Vec::new();
        for &p in &parts {
            factors.extend_from_slice(&decomp_of[p]);
        }
        factors.sort_by(|x, y| keys[*y].degree().cmp(&keys[*x].degree()));
        factors.insert(0, id);
        entries.insert(
            keys[id].clone(),
            DeltaEntry {
                value: delta[id].clone().expect("admissible"),
                eps: eps[id].clone().expect("admissible"),
                parts: parts.iter().map(|&p| keys[p].clone()).collect(),
                decomposition: factors.iter().map(|&f| keys[f].clone()).collect(),
            },
        );
        parts_of[id] = parts;
        decomp_of[id] = factors;
    }
    Ok(DeltaMap {
        n,
        m_max,
        entries,
        skipped,
        min_abs_lambda: min_abs_lambda.expect("nonempty tuples"),
        omega: omega.finish(u64::from(m_max)),
        prec,
        input_prec: ar.real_prec(),
    })
}

/// `α` and `δ` together.
#[derive(Clone, Debug)]
pub struct MajorantData {
    pub alpha: Vec<Integer>,
    pub delta: DeltaMap,
}

impl MajorantData {
    pub fn build<S: Scalar>(ar: &Arith<S>, tuples: &[Vec<S>], m_max: u32) -> Result<Self> {
        Ok(MajorantData { alpha: alpha_seq(m_max), delta: delta_map(ar, tuples, m_max)? })
    }

    pub fn alpha(&self, m: u32) -> &Integer {
        &self.alpha[m as usize - 1]
    }

    /// `α_{|Q|} δ_Q`.
    pub fn bound(&self, q: &MultiIndex) -> Option<Float> {
        let e = self.delta.get(q)?;
        Some(Float::with_val(self.delta.prec, &e.value * self.alpha(q.degree())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountingViolation {
    /// `N^j_m(Q)` exceeds its bound.
    Count { q: MultiIndex, count: usize, bound: f64 },
    /// Two counted factors `L < L'` of one decomposition with `|L' - L| < m`.
    Siegel { q: MultiIndex, larger: MultiIndex, smaller: MultiIndex },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountingReport {
    pub m: u32,
    /// 0-based coordinate.
    pub j: usize,
    pub theta: f64,
    /// `θ ω(m)`.
    pub threshold: f64,
    pub decompositions: usize,
    /// Largest `N^j_m(Q)` seen.
    pub max_count: usize,
    pub violations: Vec<CountingViolation>,
}

impl CountingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Counts, in every stored decomposition, the factors `ε_L^{-1}` with
/// `ε_L < θ ω(m)` and witness coordinate `j`, and checks the count bound and
/// the pairwise distance bound.
pub fn counting_check(delta: &DeltaMap, m: u32, j: usize) -> Result<CountingReport> {
    if m < 2 || m > delta.m_max {
        return Err(Error::InvalidInput(format!("m must lie in 2..={}, got {m}", delta.m_max)));
    }
    if j >= delta.n {
        return Err(Error::InvalidInput(format!("coordinate {} out of range", j + 1)));
    }
    let theta = delta.theta()?;
    let omega = delta.omega.as_ref().ok_or(Error::NoAdmissibleIndex(delta.m_max))?;
    let threshold = Float::with_val(delta.prec, &theta * omega.value(u64::from(m)));
    let mut violations = Vec::new();
    let mut max_count = 0;
    for (q, e) in &delta.entries {
        let counted: Vec<&MultiIndex> = e
            .decomposition
            .iter()
            .filter(|l| {
                let el = &delta.entries[*l].eps;
                el.i == j && el.value < threshold
            })
            .collect();
        let count = counted.len();
        max_count = max_count.max(count);
        let deg = q.degree();
        let bound = if deg <= m { 0.0 } else { 2.0 * f64::from(deg) / f64::from(m) - 1.0 };
        if count as f64 > bound {
            violations.push(CountingViolation::Count { q: q.clone(), count, bound });
        }
        for a in &counted {
            for b in &counted {
                if let Some(diff) = a.checked_sub(b) {
                    if diff.degree() > 0 && diff.degree() < m {
                        violations.push(CountingViolation::Siegel {
                            q: q.clone(),
                            larger: (*a).clone(),
                            smaller: (*b).clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(CountingReport {
        m,
        j,
        theta: theta.to_f64(),
        threshold: threshold.to_f64(),
        decompositions: delta.entries.len(),
        max_count,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub q: MultiIndex,
    pub norm: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    /// Highest degree whose coefficients were compared.
    pub degree: u32,
    pub rows: Vec<BoundRow>,
    /// Simultaneously resonant indices in range, which carry no bound.
    pub skipped: Vec<MultiIndex>,
    pub all_pass: bool,
}

/// Compares `‖φ_Q‖` with `α_{|Q|} δ_Q` for every admissible `Q` up to the
/// last fully solved degree. The germs must satisfy `‖f_L‖ <= 1`.
pub fn certify_coefficients<S: Scalar>(
    ar: &Arith<S>,
    result: &LinearizationResult<S>,
    germs: &[Germ<S>],
    majorant: &MajorantData,
) -> Result<CertificateReport> {
    let prec = majorant.delta.prec;
    let slack = if S::EXACT { Float::with_val(prec, 1) } else { Float::with_val(prec, 1) + Float::with_val(prec, Float::i_exp(1, 8 - ar.real_prec() as i32)) };
    for (k, g) in germs.iter().enumerate() {
        for q in g.support() {
            let norm = g.coeff_norm(&q, prec);
            if norm > slack {
                return Err(Error::NotNormalized { germ: k, index: q.to_vec(), norm: norm.to_f64() });
            }
        }
    }
    let degree = match result.status {
        Status::Linearized => result.degree_reached,
        Status::Obstructed => result.obstructions.iter().map(|o| o.q.degree()).min().unwrap_or(1) - 1,
    }
    .min(majorant.delta.m_max);
    let rel = Float::with_val(prec, 1) + Float::with_val(prec, Float::i_exp(1, 16 - ar.real_prec() as i32));
    let mut rows = Vec::new();
    for (q, _) in majorant.delta.entries.range(..) {
        if q.degree() > degree {
            break;
        }
        let norm = result.phi.coeff_norm(q, prec);
        let bound = majorant.bound(q).expect("entry exists");
        let pass = norm <= Float::with_val(prec, &bound * &rel);
        rows.push(BoundRow { q: q.clone(), norm: norm.to_f64(), bound: bound.to_f64(), pass });
    }
    let skipped = majorant.delta.skipped.iter().filter(|q| q.degree() <= degree).cloned().collect();
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(CertificateReport { degree, rows, skipped, all_pass })
}
