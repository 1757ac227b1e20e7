//! Degree-by-degree formal linearization of a germ and of commuting
//! families.
//!
//! For each degree `d`, the conjugacy equation `f_k ∘ φ = φ ∘ Λ_k` at the
//! coefficient of `z^Q` in coordinate `j` reads
//!
//! ```text
//! (Λ_k^Q - λ_{k,j}) φ_{Q,j} = ε_{k,j-1} φ_{Q,j-1} + [f̂_k(φ)]_{Q,j} - Σ_{P≠Q} φ_{P,j} [(Λ_k z)^P]_Q
//! ```
//!
//! where the right side only involves coefficients of degree `< d` or
//! earlier `(Q, j)` in graded-lex order (for lower-bidiagonal `Λ_k`).

mod engine;

use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jordan;
use crate::linalg::Matrix;
use crate::resonance::ResonanceTable;
use crate::scalars::{Arith, Scalar};
use crate::series::jet::Jet;
use crate::series::{compose_jets, Germ, MonomialBasis, MultiIndex};

use engine::{Engine, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Linearized,
    Obstructed,
}

/// A coefficient that had to vanish but whose equation has a nonzero right
/// side.
#[derive(Clone, Debug, PartialEq)]
pub struct Obstruction<S> {
    pub q: MultiIndex,
    /// 0-based coordinate.
    pub j: usize,
    /// 0-based germ whose equation failed.
    pub germ: usize,
    pub residual: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationResult<S> {
    /// Tangent to the identity; coefficients above `degree_reached` are zero.
    pub phi: Germ<S>,
    pub status: Status,
    pub obstructions: Vec<Obstruction<S>>,
    pub degree_reached: u32,
}

/// A commutator coefficient whose verdict sits within a factor 10 of the
/// zero tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearMiss {
    pub p: usize,
    pub q: usize,
    pub degree: u32,
    pub modulus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutationReport {
    /// First non-commuting pair `(p, q)` and the lowest degree where
    /// `f_p ∘ f_q - f_q ∘ f_p` is nonzero.
    pub failure: Option<(usize, usize, u32)>,
    pub near: Vec<NearMiss>,
}

fn check_shapes<S: Scalar>(germs: &[Germ<S>]) -> Result<(usize, u32)> {
    let g0 = germs.first().ok_or_else(|| Error::InvalidInput("no germs".into()))?;
    for g in germs {
        if g.dim() != g0.dim() {
            return Err(Error::DimensionMismatch { expected: g0.dim(), found: g.dim() });
        }
        if g.trunc() != g0.trunc() {
            return Err(Error::TruncationMismatch(g0.trunc(), g.trunc()));
        }
    }
    Ok((g0.dim(), g0.trunc()))
}

/// Pairwise commutation of germs up to their truncation degree.
pub fn commutation<S: Scalar>(ar: &Arith<S>, germs: &[Germ<S>]) -> Result<CommutationReport> {
    let (n, trunc) = check_shapes(germs)?;
    let basis = MonomialBasis::new(n, trunc)?;
    let zero = ar.zero();
    let jets: Vec<_> = germs.iter().map(|g| g.to_jet(&basis, &zero)).collect();
    let mut failure = None;
    let mut near = Vec::new();
    for p in 0..germs.len() {
        for q in p + 1..germs.len() {
            let a = compose_jets(&basis, &germs[p], jets[q].clone(), &zero);
            let b = compose_jets(&basis, &germs[q], jets[p].clone(), &zero);
            let mut first: Option<u32> = None;
            for d in 1..=trunc {
                for i in basis.slice(d) {
                    for j in 0..n {
                        let diff = a.comps[j][i].sub(&b.comps[j][i]);
                        if ar.is_near_threshold(&diff) {
                            near.push(NearMiss { p, q, degree: d, modulus: ar.abs_f64(&diff) });
                        }
                        if first.is_none() && !ar.is_zero(&diff) {
                            first = Some(d);
                        }
                    }
                }
            }
            if let (Some(d), None) = (first, failure) {
                failure = Some((p, q, d));
            }
        }
    }
    Ok(CommutationReport { failure, near })
}

fn require_commuting<S: Scalar>(ar: &Arith<S>, germs: &[Germ<S>]) -> Result<()> {
    match commutation(ar, germs)?.failure {
        Some((p, q, degree)) => Err(Error::NotCommuting { p, q, degree }),
        None => Ok(()),
    }
}

fn require_jordan<S: Scalar>(ar: &Arith<S>, germs: &[Germ<S>]) -> Result<()> {
    let lin: Vec<Matrix<S>> = germs.iter().map(|g| g.linear().clone()).collect();
    let form = jordan::check_form(ar, &lin)?;
    if form.is_almost_sim_jordan {
        Ok(())
    } else {
        Err(Error::NotJordanForm(form.violations.join("; ")))
    }
}

fn require_table<S: Scalar>(germs: &[Germ<S>], table: &ResonanceTable) -> Result<()> {
    let (n, trunc) = check_shapes(germs)?;
    if table.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: table.dim() });
    }
    if table.tuples() != germs.len() {
        return Err(Error::InvalidInput(format!(
            "resonance table has {} tuples for {} germs",
            table.tuples(),
            germs.len()
        )));
    }
    if table.m_max() < trunc {
        return Err(Error::InvalidInput(format!("resonance table stops at degree {} < {trunc}", table.m_max())));
    }
    Ok(())
}

/// Resonance table of the diagonals of the germs' linear parts up to their
/// truncation degree.
pub fn resonances_of<S: Scalar>(ar: &Arith<S>, germs: &[Germ<S>]) -> Result<ResonanceTable> {
    let (_, trunc) = check_shapes(germs)?;
    let tuples: Vec<Vec<S>> = germs.iter().map(|g| g.linear().diag()).collect();
    ResonanceTable::build(ar, &tuples, trunc.max(2))
}

/// Non-resonant formal linearization of a single germ whose linear part is
/// in Jordan form.
pub fn formal_linearize<S: Scalar>(ar: &Arith<S>, f: &Germ<S>, table: &ResonanceTable) -> Result<LinearizationResult<S>> {
    let germs = std::slice::from_ref(f);
    require_jordan(ar, germs)?;
    require_table(germs, table)?;
    let rule = |q: &MultiIndex, j: usize, _: &[Float]| if table.is_resonant(0, q, j) { Rule::Zero } else { Rule::Solve(0) };
    Ok(Engine::new(ar, germs)?.run(&rule, &[0]))
}

/// Single pass: each non-simultaneously-resonant `(Q, j)` is solved with the
/// germ realizing `max_k |Λ_k^Q - λ_{k,j}|` (smallest `k` on ties); every
/// germ's equation is then checked at that coefficient.
pub fn simul_linearize_direct<S: Scalar>(
    ar: &Arith<S>,
    germs: &[Germ<S>],
    table: &ResonanceTable,
) -> Result<LinearizationResult<S>> {
    require_jordan(ar, germs)?;
    require_table(germs, table)?;
    require_commuting(ar, germs)?;
    let rule = |q: &MultiIndex, j: usize, div: &[Float]| {
        if table.is_sim_resonant(q, j) {
            return Rule::Zero;
        }
        let mut best = 0;
        for k in 1..div.len() {
            if div[k] > div[best] {
                best = k;
            }
        }
        Rule::Solve(best)
    };
    let all: Vec<usize> = (0..germs.len()).collect();
    Ok(Engine::new(ar, germs)?.run(&rule, &all))
}

/// Stage `k` linearizes the `k`-th germ, conjugated by the earlier stages,
/// using only monomials resonant for every earlier tuple and not for tuple
/// `k`. The result is `φ_1 ∘ ... ∘ φ_h`.
pub fn simul_linearize_sequential<S: Scalar>(
    ar: &Arith<S>,
    germs: &[Germ<S>],
    table: &ResonanceTable,
) -> Result<LinearizationResult<S>> {
    require_jordan(ar, germs)?;
    require_table(germs, table)?;
    require_commuting(ar, germs)?;
    let (n, trunc) = check_shapes(germs)?;
    let mut phi = Germ::identity(ar, n, trunc);
    for k in 0..germs.len() {
        let solvable = |q: &MultiIndex, j: usize| (0..k).all(|i| table.is_resonant(i, q, j)) && !table.is_resonant(k, q, j);
        if k > 0 && !MultiIndex::enumerate(n, 2, trunc).iter().any(|q| (0..n).any(|j| solvable(q, j))) {
            // φ_k would be the identity; the final check covers this germ.
            continue;
        }
        let g = if k == 0 { germs[0].clone() } else { germs[k].conjugate(&phi, ar)? };
        let rule = |q: &MultiIndex, j: usize, _: &[Float]| if solvable(q, j) { Rule::Solve(0) } else { Rule::Zero };
        let stage = Engine::new(ar, std::slice::from_ref(&g))?.run(&rule, &[0]);
        if stage.status == Status::Obstructed {
            let phi_partial = if k == 0 { stage.phi } else { phi.compose(&stage.phi, ar)? };
            let obstructions = stage.obstructions.into_iter().map(|o| Obstruction { germ: k, ..o }).collect();
            return Ok(LinearizationResult {
                phi: truncate_above(&phi_partial, stage.degree_reached),
                status: Status::Obstructed,
                obstructions,
                degree_reached: stage.degree_reached,
            });
        }
        phi = if k == 0 { stage.phi } else { phi.compose(&stage.phi, ar)? };
    }
    // Every stage succeeded; check f_k ∘ φ = φ ∘ Λ_k for the whole family.
    let basis = MonomialBasis::new(n, trunc)?;
    let mut obstructions = Vec::new();
    let mut first: Option<u32> = None;
    for (k, f) in germs.iter().enumerate() {
        let defect = conjugacy_defect(ar, &basis, f, &phi);
        'deg: for d in 2..=first.unwrap_or(trunc) {
            for i in basis.slice(d) {
                for (j, comp) in defect.comps.iter().enumerate() {
                    if !ar.is_zero(&comp[i]) {
                        if first.is_none_or(|f| d < f) {
                            obstructions.clear();
                            first = Some(d);
                        }
                        obstructions.push(Obstruction { q: basis.monomial(i).clone(), j, germ: k, residual: comp[i].clone() });
                    }
                }
            }
            if first == Some(d) {
                break 'deg;
            }
        }
    }
    if let Some(d) = first {
        return Ok(LinearizationResult {
            phi: truncate_above(&phi, d),
            status: Status::Obstructed,
            obstructions,
            degree_reached: d,
        });
    }
    Ok(LinearizationResult { phi, status: Status::Linearized, obstructions, degree_reached: trunc })
}

/// Dense `f ∘ φ - φ ∘ Λ` where `Λ` is the linear part of `f`.
fn conjugacy_defect<S: Scalar>(ar: &Arith<S>, basis: &MonomialBasis, f: &Germ<S>, phi: &Germ<S>) -> Jet<S> {
    let zero = ar.zero();
    let mut left = compose_jets(basis, f, phi.to_jet(basis, &zero), &zero);
    let lam = f.linear();
    let right = if lam.is_diagonal(ar) {
        let d = lam.diag();
        let mut jet = phi.to_jet(basis, &zero);
        for comp in &mut jet.comps {
            for (i, c) in comp.iter_mut().enumerate() {
                if c.is_structural_zero() {
                    continue;
                }
                let mut p = c.clone();
                for (x, &e) in d.iter().zip(basis.monomial(i).as_slice()) {
                    if e > 0 {
                        p = p.mul(&x.pow(e));
                    }
                }
                *c = p;
            }
        }
        jet
    } else {
        compose_jets(basis, phi, Germ::linear_map(lam.clone(), phi.trunc()).to_jet(basis, &zero), &zero)
    };
    for (l, r) in left.comps.iter_mut().zip(&right.comps) {
        for (a, b) in l.iter_mut().zip(r) {
            *a = a.sub(b);
        }
    }
    left
}

fn truncate_above<S: Scalar>(g: &Germ<S>, d: u32) -> Germ<S> {
    g.drop_above(d)
}

/// Per germ, the largest coefficient modulus of `φ^{-1} ∘ f_k ∘ φ - Λ_k z`.
pub fn verify_conjugacy<S: Scalar>(ar: &Arith<S>, germs: &[Germ<S>], phi: &Germ<S>) -> Result<Vec<f64>> {
    let (n, trunc) = check_shapes(germs)?;
    if phi.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: phi.dim() });
    }
    if phi.trunc() != trunc {
        return Err(Error::TruncationMismatch(trunc, phi.trunc()));
    }
    let basis = MonomialBasis::new(n, trunc)?;
    let zero = ar.zero();
    let inv = phi.inverse(ar)?;
    let phi_jet = phi.to_jet(&basis, &zero);
    germs
        .iter()
        .map(|f| {
            let inner = compose_jets(&basis, f, phi_jet.clone(), &zero);
            let outer = compose_jets(&basis, &inv, inner, &zero);
            let lin = Germ::linear_map(f.linear().clone(), trunc).to_jet(&basis, &zero);
            let mut worst = 0.0f64;
            for j in 0..n {
                for i in basis.slice(1).start..basis.len() {
                    worst = worst.max(ar.abs_f64(&outer.comps[j][i].sub(&lin.comps[j][i])));
                }
            }
            Ok(worst)
        })
        .collect()
}

/// `ρ = max_L ‖f_L‖^{1/|L|}` and `σ = max(1, ρ²)` over a family.
///
/// Exact backends round `σ` up to a multiple of `2^-20` so that the
/// rescaled coefficients stay Gaussian rationals.
fn sigma_of<S: Scalar>(ar: &Arith<S>, germs: &[Germ<S>]) -> Float {
    let prec = ar.real_prec();
    let mut sigma = Float::with_val(prec, 1);
    for g in germs {
        for q in g.support() {
            let norm = g.coeff_norm(&q, prec);
            let e = Float::with_val(prec, 2) / Float::with_val(prec, q.degree());
            let s = norm.pow(&e);
            if s > sigma {
                sigma = s;
            }
        }
    }
    if S::EXACT && sigma != 1 {
        let scaled: Float = Float::with_val(prec, &sigma * Float::with_val(prec, 1u64 << 20)) - 1e-6;
        sigma = Float::with_val(prec, scaled.ceil()) / Float::with_val(prec, 1u64 << 20);
    }
    sigma
}

/// `σ f(z/σ)` with `σ = max(1, ρ²)`, so every `‖f_L‖ <= 1`.
pub fn sigma_normalize<S: Scalar>(ar: &Arith<S>, f: &Germ<S>) -> Result<(Germ<S>, Float)> {
    let (mut gs, s) = sigma_normalize_family(ar, std::slice::from_ref(f))?;
    Ok((gs.remove(0), s))
}

/// One common `σ` for a family.
pub fn sigma_normalize_family<S: Scalar>(ar: &Arith<S>, germs: &[Germ<S>]) -> Result<(Vec<Germ<S>>, Float)> {
    check_shapes(germs)?;
    let sigma = sigma_of(ar, germs);
    if sigma == 1 {
        return Ok((germs.to_vec(), sigma));
    }
    let sigma_s = ar
        .from_floats(&sigma, &Float::new(sigma.prec()))
        .ok_or_else(|| Error::Unsupported("sigma is not representable in the exact backend".into()))?;
    let inv_s = ar.inv(&sigma_s)?;
    Ok((germs.iter().map(|g| g.rescale(&inv_s, ar)).collect(), sigma))
}
