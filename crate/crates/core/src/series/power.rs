use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalars::{Arith, Scalar};

use super::index::MultiIndex;

/// Sparse truncated power series in `n` variables. Stored coefficients are
/// never policy-zero and never exceed the truncation degree.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<S> {
    n: usize,
    trunc: u32,
    coeffs: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> PowerSeries<S> {
    pub fn new(
        ar: &Arith<S>,
        n: usize,
        trunc: u32,
        terms: impl IntoIterator<Item = (MultiIndex, S)>,
    ) -> Result<Self> {
        let mut coeffs: BTreeMap<MultiIndex, S> = BTreeMap::new();
        for (q, c) in terms {
            if q.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: q.dim() });
            }
            if q.degree() > trunc {
                continue;
            }
            coeffs.entry(q).or_insert_with(|| ar.zero()).add_assign(&c);
        }
        coeffs.retain(|_, c| !ar.is_zero(c));
        Ok(PowerSeries { n, trunc, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn trunc(&self) -> u32 {
        self.trunc
    }
    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, S> {
        &self.coeffs
    }
    pub fn coeff(&self, q: &MultiIndex) -> Option<&S> {
        self.coeffs.get(q)
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check(&self, o: &Self) -> Result<u32> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: o.n });
        }
        Ok(self.trunc.min(o.trunc))
    }
}

/// Coefficientwise sum, truncated at the smaller truncation degree.
pub fn ps_add<S: Scalar>(ar: &Arith<S>, a: &PowerSeries<S>, b: &PowerSeries<S>) -> Result<PowerSeries<S>> {
    let t = a.check(b)?;
    let terms = a.coeffs.iter().chain(b.coeffs.iter()).map(|(q, c)| (q.clone(), c.clone()));
    PowerSeries::new(ar, a.n, t, terms)
}

/// Cauchy product, discarding degrees above the smaller truncation degree.
pub fn ps_mul<S: Scalar>(ar: &Arith<S>, a: &PowerSeries<S>, b: &PowerSeries<S>) -> Result<PowerSeries<S>> {
    let t = a.check(b)?;
    let mut acc: BTreeMap<MultiIndex, S> = BTreeMap::new();
    for (qa, ca) in &a.coeffs {
        for (qb, cb) in &b.coeffs {
            if qa.degree() + qb.degree() > t {
                continue;
            }
            acc.entry(qa.add(qb)).or_insert_with(|| ar.zero()).mul_add_assign(ca, cb);
        }
    }
    PowerSeries::new(ar, a.n, t, acc)
}
