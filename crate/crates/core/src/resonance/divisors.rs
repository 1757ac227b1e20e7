//! Degree-by-degree enumeration of the quantities `Λ_k^Q - λ_{k,j}`.

use std::collections::HashMap;

use rug::Float;

use crate::scalars::{Arith, Scalar};
use crate::series::MultiIndex;

/// Divisor data of one multi-index for every tuple `k` and coordinate `j`.
#[derive(Clone, Debug)]
pub struct QDivisors {
    pub q: MultiIndex,
    /// `|Λ_k^Q - λ_{k,j}|`, or exactly zero when the pair is resonant.
    pub modulus: Vec<Vec<Float>>,
    pub resonant: Vec<Vec<bool>>,
    /// Pairs whose zero/nonzero verdict sits within a factor 10 of the
    /// tolerance.
    pub near: Vec<(usize, usize, f64)>,
}

/// Small divisor `ε_Q` with its witness.
#[derive(Clone, Debug, PartialEq)]
pub struct Eps {
    pub value: Float,
    /// Tuple index achieving the inner maximum.
    pub k: usize,
    /// Coordinate achieving the outer minimum.
    pub i: usize,
}

impl QDivisors {
    fn h(&self) -> usize {
        self.modulus.len()
    }
    fn n(&self) -> usize {
        self.modulus.first().map_or(0, Vec::len)
    }

    /// `ε_Q > 0`: no coordinate is resonant for every tuple.
    pub fn admissible(&self) -> bool {
        (0..self.n()).all(|j| (0..self.h()).any(|k| !self.resonant[k][j]))
    }

    /// `min_j max_k`, ties broken by smallest `j`, then smallest `k`.
    pub fn eps(&self) -> Eps {
        let mut best: Option<Eps> = None;
        for j in 0..self.n() {
            let mut kmax = 0;
            for k in 1..self.h() {
                if self.modulus[k][j] > self.modulus[kmax][j] {
                    kmax = k;
                }
            }
            let v = &self.modulus[kmax][j];
            if best.as_ref().is_none_or(|b| *v < b.value) {
                best = Some(Eps { value: v.clone(), k: kmax, i: j });
            }
        }
        best.expect("n >= 1")
    }

    /// `max_k min_j`.
    pub fn bar(&self) -> Float {
        (0..self.h()).map(|k| self.min_j(k)).max_by(|a, b| a.partial_cmp(b).unwrap()).expect("h >= 1")
    }

    /// `min_j` for one tuple.
    pub fn min_j(&self, k: usize) -> Float {
        self.modulus[k].iter().min_by(|a, b| a.partial_cmp(b).unwrap()).expect("n >= 1").clone()
    }

    /// `min_j` over the coordinates not resonant for tuple `k`.
    pub fn min_j_nonresonant(&self, k: usize) -> Option<Float> {
        (0..self.n())
            .filter(|&j| !self.resonant[k][j])
            .map(|j| &self.modulus[k][j])
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .cloned()
    }
}

/// Streams the divisor data degree by degree, keeping only the powers
/// `Λ_k^Q` of the previous degree.
pub struct DivisorStream<S: Scalar> {
    ar: Arith<S>,
    lambdas: Vec<Vec<S>>,
    n: usize,
    degree: u32,
    prev: HashMap<MultiIndex, Vec<S>>,
}

impl<S: Scalar> DivisorStream<S> {
    /// `ar` should already carry the precision divisors are computed at.
    pub fn new(ar: &Arith<S>, tuples: &[Vec<S>]) -> Self {
        let lambdas: Vec<Vec<S>> = tuples.iter().map(|t| t.iter().map(|x| x.in_ctx(ar.ctx())).collect()).collect();
        let n = lambdas[0].len();
        let prev = (0..n)
            .map(|i| (MultiIndex::unit(n, i), lambdas.iter().map(|t| t[i].clone()).collect()))
            .collect();
        DivisorStream { ar: ar.clone(), lambdas, n, degree: 1, prev }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Data for every `Q` of the next degree, in graded-lex order.
    pub fn next_degree(&mut self) -> Vec<QDivisors> {
        self.degree += 1;
        let d = self.degree;
        let prec = self.ar.real_prec();
        let mut next = HashMap::new();
        let mut out = Vec::new();
        for q in MultiIndex::enumerate(self.n, d, d) {
            let c = q.as_slice().iter().position(|&x| x > 0).expect("degree >= 2");
            let mut p = q.to_vec();
            p[c] -= 1;
            let base = &self.prev[&MultiIndex::new(p)];
            let pows: Vec<S> = base.iter().zip(&self.lambdas).map(|(b, t)| b.mul(&t[c])).collect();
            out.push(describe(&self.ar, &q, &pows, &self.lambdas, prec));
            next.insert(q, pows);
        }
        self.prev = next;
        out
    }
}

pub(crate) fn describe<S: Scalar>(ar: &Arith<S>, q: &MultiIndex, pows: &[S], lambdas: &[Vec<S>], prec: u32) -> QDivisors {
    let h = lambdas.len();
    let n = q.dim();
    let mut modulus = vec![Vec::with_capacity(n); h];
    let mut resonant = vec![Vec::with_capacity(n); h];
    let mut near = Vec::new();
    for k in 0..h {
        for j in 0..n {
            let diff = pows[k].sub(&lambdas[k][j]);
            let m = if diff.is_structural_zero() { Float::new(prec) } else { diff.modulus(prec).value };
            let zero = match ar.policy().tol() {
                None => diff.is_structural_zero(),
                Some(tol) => m <= tol,
            };
            if let Some(tol) = ar.policy().tol() {
                let v = m.to_f64();
                if !diff.is_structural_zero() && v > tol / 10.0 && v <= tol * 10.0 {
                    near.push((k, j, v));
                }
            }
            modulus[k].push(if zero { Float::new(prec) } else { m });
            resonant[k].push(zero);
        }
    }
    QDivisors { q: q.clone(), modulus, resonant, near }
}

/// Divisor data of a single multi-index, computed directly.
pub fn divisors_of<S: Scalar>(ar: &Arith<S>, tuples: &[Vec<S>], q: &MultiIndex) -> QDivisors {
    let lambdas: Vec<Vec<S>> = tuples.iter().map(|t| t.iter().map(|x| x.in_ctx(ar.ctx())).collect()).collect();
    let pows: Vec<S> = lambdas
        .iter()
        .map(|t| {
            let mut acc = ar.one();
            for (l, &e) in t.iter().zip(q.as_slice()) {
                if e > 0 {
                    acc = acc.mul(&l.pow(e));
                }
            }
            acc
        })
        .collect();
    describe(ar, q, &pows, &lambdas, ar.real_prec())
}
