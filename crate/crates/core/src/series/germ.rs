use std::collections::BTreeMap;

use rug::Float;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalars::{Arith, Scalar};

use super::index::{MonomialBasis, MultiIndex};
use super::jet::{Jet, PowerTable};

/// Truncated germ `f(z) = Mz + sum_{2 <= |Q| <= N} f_Q z^Q` fixing the origin.
///
/// `higher[j]` holds the nonlinear part of component `j`; entries that are
/// zero under the zero policy used at construction are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Germ<S> {
    n: usize,
    trunc: u32,
    linear: Matrix<S>,
    higher: Vec<BTreeMap<MultiIndex, S>>,
}

impl<S: Scalar> Germ<S> {
    /// Validates shapes, degrees and invertibility of the linear part, and
    /// sums repeated terms.
    pub fn new(
        ar: &Arith<S>,
        trunc: u32,
        linear: Matrix<S>,
        terms: impl IntoIterator<Item = (usize, MultiIndex, S)>,
    ) -> Result<Self> {
        let g = Self::new_unchecked(ar, trunc, linear, terms)?;
        if ar.is_zero(&g.linear.det(ar)?) {
            return Err(Error::SingularMatrix);
        }
        Ok(g)
    }

    /// As [`Germ::new`] but without the determinant test.
    pub(crate) fn new_unchecked(
        ar: &Arith<S>,
        trunc: u32,
        linear: Matrix<S>,
        terms: impl IntoIterator<Item = (usize, MultiIndex, S)>,
    ) -> Result<Self> {
        let n = linear.rows();
        if !linear.is_square() {
            return Err(Error::DimensionMismatch { expected: n, found: linear.cols() });
        }
        if trunc < 1 {
            return Err(Error::InvalidInput("truncation degree must be at least 1".into()));
        }
        let mut higher: Vec<BTreeMap<MultiIndex, S>> = vec![BTreeMap::new(); n];
        for (j, q, c) in terms {
            if j >= n {
                return Err(Error::InvalidInput(format!("coordinate {} out of range 1..={n}", j + 1)));
            }
            if q.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: q.dim() });
            }
            let d = q.degree();
            if d < 2 || d > trunc {
                return Err(Error::InvalidInput(format!("term {q:?} has degree {d} outside 2..={trunc}")));
            }
            let e = higher[j].entry(q).or_insert_with(|| ar.zero());
            e.add_assign(&c);
        }
        for comp in &mut higher {
            comp.retain(|_, c| !ar.is_zero(c));
        }
        Ok(Germ { n, trunc, linear, higher })
    }

    pub fn identity(ar: &Arith<S>, n: usize, trunc: u32) -> Self {
        Self::linear_map(Matrix::identity(ar, n), trunc)
    }

    pub fn linear_map(m: Matrix<S>, trunc: u32) -> Self {
        let n = m.rows();
        Germ { n, trunc, linear: m, higher: vec![BTreeMap::new(); n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn trunc(&self) -> u32 {
        self.trunc
    }
    pub fn linear(&self) -> &Matrix<S> {
        &self.linear
    }
    pub fn higher(&self) -> &[BTreeMap<MultiIndex, S>] {
        &self.higher
    }

    pub fn coeff(&self, q: &MultiIndex, j: usize) -> Option<&S> {
        self.higher.get(j)?.get(q)
    }

    pub fn is_linear(&self) -> bool {
        self.higher.iter().all(BTreeMap::is_empty)
    }

    /// Nonlinear terms as `(Q, j, c)` in graded-lex order of `Q`, then `j`.
    pub fn terms(&self) -> Vec<(MultiIndex, usize, S)> {
        let mut out: Vec<(MultiIndex, usize, S)> = self
            .higher
            .iter()
            .enumerate()
            .flat_map(|(j, m)| m.iter().map(move |(q, c)| (q.clone(), j, c.clone())))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    /// Distinct multi-indices carrying a nonlinear coefficient.
    pub fn support(&self) -> Vec<MultiIndex> {
        let mut s: Vec<MultiIndex> = self.higher.iter().flat_map(|m| m.keys().cloned()).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Sup-norm over coordinates of the vector coefficient `f_Q`; zero for
    /// absent indices.
    pub fn coeff_norm(&self, q: &MultiIndex, prec: u32) -> Float {
        let mut best = Float::new(prec);
        for m in &self.higher {
            if let Some(c) = m.get(q) {
                let v = c.modulus(prec).value;
                if v > best {
                    best = v;
                }
            }
        }
        best
    }

    pub fn with_trunc(&self, trunc: u32) -> Self {
        let higher = self
            .higher
            .iter()
            .map(|m| m.iter().filter(|(q, _)| q.degree() <= trunc).map(|(q, c)| (q.clone(), c.clone())).collect())
            .collect();
        Germ { n: self.n, trunc, linear: self.linear.clone(), higher }
    }

    /// Same truncation degree, terms of degree above `d` removed.
    pub fn drop_above(&self, d: u32) -> Self {
        let higher = self
            .higher
            .iter()
            .map(|m| m.iter().filter(|(q, _)| q.degree() <= d).map(|(q, c)| (q.clone(), c.clone())).collect())
            .collect();
        Germ { n: self.n, trunc: self.trunc, linear: self.linear.clone(), higher }
    }

    pub(crate) fn to_jet(&self, basis: &MonomialBasis, zero: &S) -> Jet<S> {
        let mut jet = Jet::zeros(basis, zero);
        for j in 0..self.n {
            for m in 0..self.n {
                jet.comps[j][basis.unit(m)] = self.linear.get(j, m).clone();
            }
            for (q, c) in &self.higher[j] {
                if let Some(i) = basis.index_of(q) {
                    jet.comps[j][i] = c.clone();
                }
            }
        }
        jet
    }

    pub(crate) fn from_jet(ar: &Arith<S>, basis: &MonomialBasis, jet: &Jet<S>) -> Self {
        let n = basis.dim();
        let trunc = basis.max_degree();
        let mut lin = Matrix::zeros(ar, n, n);
        let mut higher = vec![BTreeMap::new(); n];
        for j in 0..n {
            for m in 0..n {
                lin.set(j, m, jet.comps[j][basis.unit(m)].clone());
            }
            for i in basis.slice(2).start..basis.len() {
                let c = &jet.comps[j][i];
                if !ar.is_zero(c) {
                    higher[j].insert(basis.monomial(i).clone(), c.clone());
                }
            }
        }
        Germ { n, trunc, linear: lin, higher }
    }

    fn check_pair(&self, g: &Self) -> Result<()> {
        if self.n != g.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: g.n });
        }
        if self.trunc != g.trunc {
            return Err(Error::TruncationMismatch(self.trunc, g.trunc));
        }
        Ok(())
    }

    /// `self ∘ g` truncated at `N`.
    pub fn compose(&self, g: &Self, ar: &Arith<S>) -> Result<Self> {
        self.check_pair(g)?;
        let basis = MonomialBasis::new(self.n, self.trunc)?;
        let jet = compose_jets(&basis, self, g.to_jet(&basis, &ar.zero()), &ar.zero());
        Ok(Self::from_jet(ar, &basis, &jet))
    }

    /// Compositional inverse up to degree `N`.
    pub fn inverse(&self, ar: &Arith<S>) -> Result<Self> {
        let a_inv = self.linear.inverse(ar)?;
        let basis = MonomialBasis::new(self.n, self.trunc)?;
        let zero = ar.zero();
        let mut g = Jet::zeros(&basis, &zero);
        for j in 0..self.n {
            for m in 0..self.n {
                g.comps[j][basis.unit(m)] = a_inv.get(j, m).clone();
            }
        }
        let wanted: Vec<usize> = self.support().iter().filter_map(|q| basis.index_of(q)).collect();
        let mut table = PowerTable::new(&basis, g, wanted.iter().copied(), &zero);
        // A g_d = -[f_hat(g)]_d
        for d in 2..=self.trunc {
            table.advance(&basis, d);
            let slice = basis.slice(d);
            let mut rhs = vec![vec![zero.clone(); slice.len()]; self.n];
            for (j, m) in self.higher.iter().enumerate() {
                for (q, c) in m {
                    let p = table.power(&basis, basis.index_of(q).unwrap());
                    for (t, i) in slice.clone().enumerate() {
                        if !p[i].is_structural_zero() {
                            rhs[j][t].mul_add_assign(c, &p[i]);
                        }
                    }
                }
            }
            for (t, i) in slice.clone().enumerate() {
                for j in 0..self.n {
                    let mut acc = zero.clone();
                    for (m, r) in rhs.iter().enumerate() {
                        if !r[t].is_structural_zero() {
                            acc.mul_add_assign(a_inv.get(j, m), &r[t]);
                        }
                    }
                    table.g.comps[j][i] = acc.neg();
                }
            }
        }
        Ok(Self::from_jet(ar, &basis, &table.g))
    }

    /// `phi^{-1} ∘ self ∘ phi`.
    pub fn conjugate(&self, phi: &Self, ar: &Arith<S>) -> Result<Self> {
        self.check_pair(phi)?;
        let inv = phi.inverse(ar)?;
        inv.compose(&self.compose(phi, ar)?, ar)
    }

    /// `A^{-1} ∘ self ∘ A`.
    pub fn linear_change(&self, a: &Matrix<S>, ar: &Arith<S>) -> Result<Self> {
        let a_inv = a.inverse(ar)?;
        let lin = Self::linear_map(a.clone(), self.trunc);
        let inner = self.compose(&lin, ar)?;
        Self::linear_map(a_inv, self.trunc).compose(&inner, ar)
    }

    /// Largest coefficient modulus of `self - other` (linear part included).
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_pair(other)?;
        let mut worst: f64 = 0.0;
        for j in 0..self.n {
            for m in 0..self.n {
                worst = worst.max(self.linear.get(j, m).sub(other.linear.get(j, m)).modulus(64).value.to_f64());
            }
            for (q, c) in &self.higher[j] {
                let d = match other.higher[j].get(q) {
                    Some(o) => c.sub(o),
                    None => c.clone(),
                };
                worst = worst.max(d.modulus(64).value.to_f64());
            }
            for (q, c) in &other.higher[j] {
                if !self.higher[j].contains_key(q) {
                    worst = worst.max(c.modulus(64).value.to_f64());
                }
            }
        }
        Ok(worst)
    }

    /// Largest nonlinear coefficient modulus.
    pub fn max_higher_abs(&self) -> f64 {
        self.higher.iter().flat_map(|m| m.values()).map(|c| c.modulus(64).value.to_f64()).fold(0.0, f64::max)
    }

    /// Replace the linear part.
    pub fn with_linear(&self, m: Matrix<S>) -> Result<Self> {
        if m.rows() != self.n || !m.is_square() {
            return Err(Error::DimensionMismatch { expected: self.n, found: m.rows() });
        }
        Ok(Germ { linear: m, ..self.clone() })
    }

    /// `sigma * self(z / sigma)`: coefficient `f_L` becomes
    /// `f_L * sigma^{1-|L|}` for a real scale given as `inv_sigma = 1/sigma`.
    pub fn rescale(&self, inv_sigma: &S, ar: &Arith<S>) -> Self {
        let mut pows = vec![ar.one()];
        for d in 1..self.trunc as usize {
            let p = pows[d - 1].mul(inv_sigma);
            pows.push(p);
        }
        let higher = self
            .higher
            .iter()
            .map(|m| {
                m.iter()
                    .map(|(q, c)| (q.clone(), c.mul(&pows[q.degree() as usize - 1])))
                    .filter(|(_, c)| !ar.is_zero(c))
                    .collect()
            })
            .collect();
        Germ { n: self.n, trunc: self.trunc, linear: self.linear.clone(), higher }
    }
}

/// Dense `f ∘ g` given `g` as a jet without constant term.
pub(crate) fn compose_jets<S: Scalar>(basis: &MonomialBasis, f: &Germ<S>, g: Jet<S>, zero: &S) -> Jet<S> {
    let n = basis.dim();
    let wanted: Vec<usize> = f.support().iter().filter_map(|q| basis.index_of(q)).collect();
    let mut table = PowerTable::new(basis, g, wanted.iter().copied(), zero);
    table.complete(basis);
    let mut out = Jet::zeros(basis, zero);
    let start = basis.slice(1).start;
    for j in 0..n {
        let acc = &mut out.comps[j];
        for m in 0..n {
            let c = f.linear.get(j, m);
            if c.is_structural_zero() {
                continue;
            }
            let gm = &table.g.comps[m];
            for i in start..basis.len() {
                if !gm[i].is_structural_zero() {
                    acc[i].mul_add_assign(c, &gm[i]);
                }
            }
        }
        for (q, c) in &f.higher[j] {
            let l = basis.index_of(q).expect("support within truncation");
            let p = table.power(basis, l);
            for i in basis.slice(q.degree()).start..basis.len() {
                if !p[i].is_structural_zero() {
                    acc[i].mul_add_assign(c, &p[i]);
                }
            }
        }
    }
    out
}
