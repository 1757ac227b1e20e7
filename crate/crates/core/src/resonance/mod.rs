//! Resonances `Λ^Q = λ_j`, small divisors `ε_Q` and the omega functions.
//!
//! Divisors are evaluated at twice the working precision (exact backends are
//! unaffected) and classified with the active zero policy. Pairs whose
//! verdict lies within a factor 10 of the tolerance are reported as
//! near-resonances.

mod divisors;
mod omega;

use std::collections::BTreeSet;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jordan;
use crate::linalg::Matrix;
use crate::scalars::{Arith, Scalar};
use crate::series::{Germ, MultiIndex};

pub use divisors::{divisors_of, DivisorStream, Eps, QDivisors};
pub use omega::{OmegaKind, OmegaRun, OmegaSequence, OmegaVariant, ResonanceConstraint};
pub(crate) use omega::RunningMin;

/// Check that `tuples` is a nonempty list of equal-length tuples of nonzero
/// values, and return `n`.
pub fn check_tuples<S: Scalar>(ar: &Arith<S>, tuples: &[Vec<S>]) -> Result<usize> {
    let n = tuples.first().map(Vec::len).ok_or_else(|| Error::InvalidInput("no eigenvalue tuples".into()))?;
    if n == 0 {
        return Err(Error::InvalidInput("empty eigenvalue tuple".into()));
    }
    for t in tuples {
        if t.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: t.len() });
        }
        if t.iter().any(|x| ar.is_zero(x)) {
            return Err(Error::InvalidInput("eigenvalues must be nonzero".into()));
        }
    }
    Ok(n)
}

fn stream<S: Scalar>(ar: &Arith<S>, tuples: &[Vec<S>], m_max: u32, mut visit: impl FnMut(u32, &[QDivisors])) -> Result<()> {
    check_tuples(ar, tuples)?;
    let wide = ar.widened(2);
    let mut s = DivisorStream::new(&wide, tuples);
    while s.degree() < m_max {
        let level = s.next_degree();
        visit(s.degree(), &level);
    }
    Ok(())
}

/// `Res_j(Λ) ∩ {2 <= |Q| <= m_max}`, with `j` 0-based.
pub fn res_set<S: Scalar>(ar: &Arith<S>, lambda: &[S], j: usize, m_max: u32) -> Result<BTreeSet<MultiIndex>> {
    sim_res_set(ar, std::slice::from_ref(&lambda.to_vec()), j, m_max)
}

/// `∩_k Res_j(Λ_k) ∩ {2 <= |Q| <= m_max}`.
pub fn sim_res_set<S: Scalar>(ar: &Arith<S>, tuples: &[Vec<S>], j: usize, m_max: u32) -> Result<BTreeSet<MultiIndex>> {
    let n = check_tuples(ar, tuples)?;
    if j >= n {
        return Err(Error::DimensionMismatch { expected: n, found: j + 1 });
    }
    let mut out = BTreeSet::new();
    stream(ar, tuples, m_max, |_, level| {
        for d in level {
            if d.resonant.iter().all(|r| r[j]) {
                out.insert(d.q.clone());
            }
        }
    })?;
    Ok(out)
}

/// A pair `(Q, j)` whose divisor for tuple `k` is within a factor 10 of
/// the zero tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearResonance {
    pub k: usize,
    pub j: usize,
    pub q: MultiIndex,
    pub modulus: f64,
}

/// Resonance sets of a family of eigenvalue tuples up to a degree bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceTable {
    m_max: u32,
    n: usize,
    /// `per_tuple[k][j] = Res_j(Λ_k)`.
    per_tuple: Vec<Vec<BTreeSet<MultiIndex>>>,
    /// `simultaneous[j] = ∩_k Res_j(Λ_k)`.
    simultaneous: Vec<BTreeSet<MultiIndex>>,
    near: Vec<NearResonance>,
}

impl ResonanceTable {
    pub fn build<S: Scalar>(ar: &Arith<S>, tuples: &[Vec<S>], m_max: u32) -> Result<Self> {
        let n = check_tuples(ar, tuples)?;
        let h = tuples.len();
        let mut per_tuple = vec![vec![BTreeSet::new(); n]; h];
        let mut simultaneous = vec![BTreeSet::new(); n];
        let mut near = Vec::new();
        stream(ar, tuples, m_max, |_, level| {
            for d in level {
                for j in 0..n {
                    for k in 0..h {
                        if d.resonant[k][j] {
                            per_tuple[k][j].insert(d.q.clone());
                        }
                    }
                    if (0..h).all(|k| d.resonant[k][j]) {
                        simultaneous[j].insert(d.q.clone());
                    }
                }
                near.extend(d.near.iter().map(|&(k, j, modulus)| NearResonance { k, j, q: d.q.clone(), modulus }));
            }
        })?;
        let t = ResonanceTable { m_max, n, per_tuple, simultaneous, near };
        debug_assert!(t.intersection_consistent());
        Ok(t)
    }

    fn intersection_consistent(&self) -> bool {
        (0..self.n).all(|j| {
            let mut it = self.per_tuple.iter().map(|s| &s[j]);
            let first = it.next().cloned().unwrap_or_default();
            let inter = it.fold(first, |acc, s| acc.intersection(s).cloned().collect());
            inter == self.simultaneous[j]
        })
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }
    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn tuples(&self) -> usize {
        self.per_tuple.len()
    }
    pub fn per_tuple(&self, k: usize, j: usize) -> &BTreeSet<MultiIndex> {
        &self.per_tuple[k][j]
    }
    pub fn simultaneous(&self, j: usize) -> &BTreeSet<MultiIndex> {
        &self.simultaneous[j]
    }
    pub fn near(&self) -> &[NearResonance] {
        &self.near
    }

    pub fn is_resonant(&self, k: usize, q: &MultiIndex, j: usize) -> bool {
        self.per_tuple[k][j].contains(q)
    }

    pub fn is_sim_resonant(&self, q: &MultiIndex, j: usize) -> bool {
        self.simultaneous[j].contains(q)
    }

    /// `ε_Q > 0`.
    pub fn is_admissible(&self, q: &MultiIndex) -> bool {
        (0..self.n).all(|j| !self.is_sim_resonant(q, j))
    }

    /// True when no tuple has a resonance up to the bound.
    pub fn is_empty(&self) -> bool {
        self.per_tuple.iter().flatten().all(BTreeSet::is_empty)
    }
}

/// `ε_Q` with its witness `(k_Q, i_Q)`.
pub fn eps_q<S: Scalar>(ar: &Arith<S>, tuples: &[Vec<S>], q: &MultiIndex) -> Result<Eps> {
    let n = check_tuples(ar, tuples)?;
    if q.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: q.dim() });
    }
    let d = divisors_of(&ar.widened(2), tuples, q);
    if !d.admissible() {
        return Err(Error::SimultaneouslyResonant(q.to_vec()));
    }
    Ok(d.eps())
}

/// Every omega function of a family on `1..=m_max`.
#[derive(Clone, Debug)]
pub struct OmegaTable {
    pub m_max: u32,
    /// `min_Q ε_Q`.
    pub simultaneous: OmegaSequence,
    /// `min_Q max_k min_j`.
    pub bar: OmegaSequence,
    /// `max_k min_Q min_j`, admissible `Q` only.
    pub tilde: OmegaSequence,
    /// `max_k min_Q min_j` over every `Q`; zero once a resonance appears.
    pub russmann_all: OmegaSequence,
    /// Per tuple, the minimum over non-resonant `(Q, j)`; `None` when every
    /// pair up to `m_max` is resonant for that tuple.
    pub reduced: Vec<Option<OmegaSequence>>,
    pub near: usize,
}

impl OmegaTable {
    pub fn build<S: Scalar>(ar: &Arith<S>, tuples: &[Vec<S>], m_max: u32) -> Result<Self> {
        if m_max < 2 {
            return Err(Error::InvalidInput("omega needs m >= 2".into()));
        }
        let h = tuples.len();
        let mut sim = RunningMin::default();
        let mut bar = RunningMin::default();
        let mut tilde: Vec<RunningMin> = (0..h).map(|_| RunningMin::default()).collect();
        let mut russ: Vec<RunningMin> = (0..h).map(|_| RunningMin::default()).collect();
        let mut reduced: Vec<RunningMin> = (0..h).map(|_| RunningMin::default()).collect();
        let mut near = 0;
        stream(ar, tuples, m_max, |m, level| {
            for d in level {
                near += d.near.len();
                let admissible = d.admissible();
                if admissible {
                    sim.offer(&d.eps().value);
                    bar.offer(&d.bar());
                }
                for k in 0..h {
                    let mk = d.min_j(k);
                    if admissible {
                        tilde[k].offer(&mk);
                    }
                    russ[k].offer(&mk);
                    if let Some(v) = d.min_j_nonresonant(k) {
                        reduced[k].offer(&v);
                    }
                }
            }
            let m = u64::from(m);
            for r in [&mut sim, &mut bar].into_iter().chain(tilde.iter_mut()).chain(russ.iter_mut()).chain(reduced.iter_mut()) {
                r.close(m);
            }
        })?;
        let len = u64::from(m_max);
        let simultaneous = sim.finish(len).ok_or(Error::NoAdmissibleIndex(m_max))?;
        let bar = bar.finish(len).expect("admissible index exists");
        let tilde: Vec<OmegaSequence> = tilde.into_iter().map(|r| r.finish(len).expect("admissible index exists")).collect();
        let russ: Vec<OmegaSequence> = russ.into_iter().map(|r| r.finish(len).expect("m_max >= 2")).collect();
        Ok(OmegaTable {
            m_max,
            simultaneous,
            bar,
            tilde: OmegaSequence::pointwise_max(&tilde),
            russmann_all: OmegaSequence::pointwise_max(&russ),
            reduced: reduced.into_iter().map(|r| r.finish(len)).collect(),
            near,
        })
    }

    pub fn sequence(&self, variant: OmegaVariant) -> &OmegaSequence {
        match (variant.kind, variant.constraint) {
            (OmegaKind::SimultaneousMinMax, _) => &self.simultaneous,
            (OmegaKind::BarMinMaxMin, _) => &self.bar,
            (OmegaKind::TildeMaxMinMin, _) | (OmegaKind::RussmannMaxMin, ResonanceConstraint::ExcludeSimultaneous) => {
                &self.tilde
            }
            (OmegaKind::RussmannMaxMin, ResonanceConstraint::None) => &self.russmann_all,
        }
    }
}

/// `ω(m)` for one variant.
pub fn omega<S: Scalar>(ar: &Arith<S>, tuples: &[Vec<S>], m: u32, variant: OmegaVariant) -> Result<Float> {
    let t = OmegaTable::build(ar, tuples, m)?;
    let s = t.sequence(variant);
    if s.defined_from() > u64::from(m) {
        return Err(Error::NoAdmissibleIndex(m));
    }
    Ok(s.value(u64::from(m)).clone())
}

/// Outcome of checking that a germ commuting with its Jordan linear part
/// only has resonant monomials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportReport {
    /// `(Q, j)` with `f_{Q,j} != 0` and `Q` not in `Res_j(Λ)`; `j` 0-based.
    pub violations: Vec<(MultiIndex, usize)>,
}

/// Check that every monomial of `f` is resonant for the eigenvalues of its
/// linear part `Λ`, which must be in Jordan form and commute with `f`.
pub fn resonant_support_check<S: Scalar>(ar: &Arith<S>, f: &Germ<S>) -> Result<SupportReport> {
    let lam = f.linear();
    let form = jordan::check_form(ar, std::slice::from_ref(lam))?;
    if !form.is_almost_sim_jordan {
        return Err(Error::NotJordanForm(form.violations.join("; ")));
    }
    let lin = Germ::linear_map(lam.clone(), f.trunc());
    let c = crate::linearize::commutation(ar, &[f.clone(), lin])?;
    if let Some((_, _, degree)) = c.failure {
        return Err(Error::NotCommuting { p: 0, q: 1, degree });
    }
    let eig = lam.diag();
    let table = ResonanceTable::build(ar, &[eig], f.trunc().max(2))?;
    let violations = f
        .terms()
        .into_iter()
        .filter(|(q, j, _)| !table.is_resonant(0, q, *j))
        .map(|(q, j, _)| (q, j))
        .collect();
    Ok(SupportReport { violations })
}

/// Diagonal eigenvalues of each matrix, for families already in Jordan form.
pub fn tuples_of<S: Scalar>(mats: &[Matrix<S>]) -> Vec<Vec<S>> {
    mats.iter().map(Matrix::diag).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{BigComplex, GaussRational};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q() -> Arith<GaussRational> {
        Arith::exact()
    }
    fn ints(a: &Arith<GaussRational>, v: &[i64]) -> Vec<GaussRational> {
        v.iter().map(|&x| a.int(x)).collect()
    }
    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    /// Direct re-evaluation of `Λ^Q - λ_j`, independent of the stream.
    fn brute_res(a: &Arith<GaussRational>, l: &[GaussRational], j: usize, m: u32) -> BTreeSet<MultiIndex> {
        MultiIndex::enumerate(l.len(), 2, m)
            .into_iter()
            .filter(|q| {
                let mut p = a.one();
                for (x, &e) in l.iter().zip(q.as_slice()) {
                    for _ in 0..e {
                        p = p.mul(x);
                    }
                }
                a.is_zero(&p.sub(&l[j]))
            })
            .collect()
    }

    #[test]
    fn res_set_examples() {
        let a = q();
        assert!(res_set(&a, &ints(&a, &[2, 4]), 1, 3).unwrap().contains(&mi(&[2, 0])));
        for j in 0..2 {
            assert!(res_set(&a, &ints(&a, &[2, 2]), j, 6).unwrap().is_empty());
            assert!(res_set(&a, &ints(&a, &[2, 3]), j, 5).unwrap().is_empty());
        }
        let l = ints(&a, &[2, 4, 8]);
        for j in 0..3 {
            assert_eq!(res_set(&a, &l, j, 5).unwrap(), brute_res(&a, &l, j, 5));
        }
    }

    #[test]
    fn sim_res_set_examples() {
        let a = q();
        let t = vec![ints(&a, &[2, 4]), ints(&a, &[3, 9])];
        assert!(sim_res_set(&a, &t, 1, 3).unwrap().contains(&mi(&[2, 0])));
        let t = vec![ints(&a, &[2, 4]), ints(&a, &[2, 3])];
        assert!(sim_res_set(&a, &t, 1, 4).unwrap().is_empty());
        let one = vec![ints(&a, &[2, 4])];
        assert_eq!(sim_res_set(&a, &one, 1, 4).unwrap(), res_set(&a, &one[0], 1, 4).unwrap());
        assert!(sim_res_set(&a, &[ints(&a, &[2, 4]), ints(&a, &[2])], 0, 4).is_err());
    }

    #[test]
    fn table_matches_sets() {
        let a = q();
        let t = vec![ints(&a, &[2, 4]), ints(&a, &[3, 9])];
        let tab = ResonanceTable::build(&a, &t, 5).unwrap();
        assert!(tab.intersection_consistent());
        assert!(tab.is_sim_resonant(&mi(&[2, 0]), 1));
        assert!(!tab.is_admissible(&mi(&[2, 0])));
        assert!(tab.is_admissible(&mi(&[1, 1])));
    }

    #[test]
    fn eps_examples() {
        let a = q();
        let t = vec![ints(&a, &[2, 3]), ints(&a, &[3, 2])];
        let e = eps_q(&a, &t, &mi(&[2, 0])).unwrap();
        assert_eq!(e.value, 6);
        assert_eq!((e.k, e.i), (1, 0));
        let i = vec![vec![a.ratio((0, 1), (1, 1))]];
        let e = eps_q(&a, &i, &mi(&[2])).unwrap();
        assert!((e.value.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        let t = vec![ints(&a, &[2, 4]), ints(&a, &[3, 9])];
        assert_eq!(eps_q(&a, &t, &mi(&[2, 0])), Err(Error::SimultaneouslyResonant(vec![2, 0])));
    }

    #[test]
    fn omega_of_i() {
        let a = q();
        let i = vec![vec![a.ratio((0, 1), (1, 1))]];
        let w = omega(&a, &i, 4, OmegaVariant::simultaneous()).unwrap();
        assert!((w.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        // i^5 = i: still √2 because q = 5 is excluded.
        let w = omega(&a, &i, 5, OmegaVariant::simultaneous()).unwrap();
        assert!((w.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(omega(&a, &i, 5, OmegaVariant::russmann(ResonanceConstraint::None)).unwrap(), 0);
    }

    #[test]
    fn no_admissible_index() {
        let a = q();
        let one = vec![vec![a.one()]];
        assert_eq!(omega(&a, &one, 4, OmegaVariant::simultaneous()), Err(Error::NoAdmissibleIndex(4)));
    }

    #[test]
    fn float_near_resonances_flagged() {
        let a = Arith::<BigComplex>::new(
            128,
            crate::scalars::ZeroPolicy::tolerance(1e-12).unwrap(),
            128,
        )
        .unwrap();
        let lam = vec![vec![a.parse_complex("2", "0").unwrap(), a.parse_complex("4.000000000001", "0").unwrap()]];
        let t = ResonanceTable::build(&a, &lam, 2).unwrap();
        assert!(t.per_tuple(0, 1).is_empty());
        assert!(t.near().iter().any(|r| r.q == mi(&[2, 0]) && r.j == 1));
    }

    fn random_tuples(rng: &mut ChaCha8Rng, h: usize, n: usize) -> Vec<Vec<GaussRational>> {
        let a = q();
        (0..h)
            .map(|_| {
                (0..n)
                    .map(|_| loop {
                        let x = a.ratio((rng.gen_range(-5..=5), rng.gen_range(1..=4)), (rng.gen_range(-5..=5), rng.gen_range(1..=4)));
                        if !a.is_zero(&x) {
                            break x;
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn variant_chain_and_monotone() {
        let a = q();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let h = rng.gen_range(1..=3);
            let n = rng.gen_range(1..=2);
            let t = random_tuples(&mut rng, h, n);
            let Ok(tab) = OmegaTable::build(&a, &t, 6) else { continue };
            for m in 2..=6u64 {
                assert!(tab.tilde.value(m) <= tab.bar.value(m));
                assert!(tab.bar.value(m) <= tab.simultaneous.value(m));
                if m > 2 {
                    assert!(tab.simultaneous.value(m) <= tab.simultaneous.value(m - 1));
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sum_vs_max(seed in any::<u64>(), h in 1usize..=3, n in 1usize..=3, deg in 2u32..=6) {
            let a = q();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_tuples(&mut rng, h, n);
            let qs = MultiIndex::enumerate(n, deg, deg);
            let qq = &qs[rng.gen_range(0..qs.len())];
            let d = divisors_of(&a.widened(2), &t, qq);
            let sum_min = (0..n)
                .map(|j| (0..h).map(|k| d.modulus[k][j].to_f64()).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let max_min = (0..n)
                .map(|j| (0..h).map(|k| d.modulus[k][j].to_f64()).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(sum_min <= h as f64 * max_min * (1.0 + 1e-12));
        }
    }
}
