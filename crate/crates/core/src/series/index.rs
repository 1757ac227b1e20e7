use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector `Q = (q_1, ..., q_n)`.
///
/// Ordered graded-lexicographically: by degree first, then lexicographically
/// on the exponents, so `(0,2) < (1,1) < (2,0) < (0,3)`; comparisons
/// agree with the degree-by-degree inductions used throughout.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(q: Vec<u32>) -> Self {
        MultiIndex(q)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut q = vec![0; n];
        q[i] = 1;
        MultiIndex(q)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.0.clone()
    }

    pub fn add(&self, o: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// `self - o` when every entry stays nonnegative.
    pub fn checked_sub(&self, o: &Self) -> Option<Self> {
        self.0.iter().zip(&o.0).map(|(a, b)| a.checked_sub(*b)).collect::<Option<Vec<_>>>().map(MultiIndex)
    }

    /// All indices with `lo <= |Q| <= hi` in graded-lex order.
    pub fn enumerate(n: usize, lo: u32, hi: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for d in lo..=hi {
            let mut cur = vec![0u32; n];
            push_degree(&mut out, &mut cur, 0, d);
        }
        out
    }
}

fn push_degree(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, rest: u32) {
    let n = cur.len();
    if pos + 1 == n {
        cur[pos] = rest;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for v in 0..=rest {
        cur[pos] = v;
        push_degree(out, cur, pos + 1, rest - v);
    }
    cur[pos] = 0;
}

impl Ord for MultiIndex {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// Upper bound on the number of monomials a dense basis may hold.
pub const MAX_BASIS_SIZE: usize = 4_000_000;

enum Lookup {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

/// Every monomial of degree `0..=N` in `n` variables, in graded-lex order,
/// with constant-time index arithmetic.
///
/// Exponents are encoded in radix `N + 1`; a sum of two monomials whose
/// total degree stays within `N` never carries, so codes add.
pub struct MonomialBasis {
    n: usize,
    max_deg: u32,
    monos: Vec<MultiIndex>,
    codes: Vec<u64>,
    deg_start: Vec<usize>,
    lookup: Lookup,
}

impl MonomialBasis {
    pub fn new(n: usize, max_deg: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        let size = binomial(max_deg as u64 + n as u64, n as u64);
        if size.is_none_or(|s| s > MAX_BASIS_SIZE as u64) {
            return Err(Error::Unsupported(format!(
                "{n} variables up to degree {max_deg} exceed {MAX_BASIS_SIZE} monomials"
            )));
        }
        let monos = MultiIndex::enumerate(n, 0, max_deg);
        let radix = max_deg as u64 + 1;
        let codes: Vec<u64> = monos
            .iter()
            .map(|m| m.as_slice().iter().rev().fold(0u64, |acc, &q| acc * radix + q as u64))
            .collect();
        let mut deg_start = vec![0usize; max_deg as usize + 2];
        for m in &monos {
            deg_start[m.degree() as usize + 1] += 1;
        }
        for d in 1..deg_start.len() {
            deg_start[d] += deg_start[d - 1];
        }
        let space = (radix as u128).checked_pow(n as u32);
        let lookup = match space {
            Some(s) if s <= 1 << 22 => {
                let mut t = vec![u32::MAX; s as usize];
                for (i, &c) in codes.iter().enumerate() {
                    t[c as usize] = i as u32;
                }
                Lookup::Dense(t)
            }
            _ => Lookup::Sparse(codes.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect()),
        };
        Ok(MonomialBasis { n, max_deg, monos, codes, deg_start, lookup })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn max_degree(&self) -> u32 {
        self.max_deg
    }
    pub fn len(&self) -> usize {
        self.monos.len()
    }
    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }
    pub fn monomial(&self, i: usize) -> &MultiIndex {
        &self.monos[i]
    }
    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monos
    }
    pub fn degree_of(&self, i: usize) -> u32 {
        self.monos[i].degree()
    }

    /// Basis positions of the monomials of degree `d`.
    pub fn slice(&self, d: u32) -> Range<usize> {
        if d > self.max_deg {
            return self.len()..self.len();
        }
        self.deg_start[d as usize]..self.deg_start[d as usize + 1]
    }

    fn find_code(&self, c: u64) -> Option<usize> {
        match &self.lookup {
            Lookup::Dense(t) => t.get(c as usize).copied().filter(|&i| i != u32::MAX).map(|i| i as usize),
            Lookup::Sparse(m) => m.get(&c).map(|&i| i as usize),
        }
    }

    pub fn index_of(&self, q: &MultiIndex) -> Option<usize> {
        if q.dim() != self.n || q.degree() > self.max_deg {
            return None;
        }
        let radix = self.max_deg as u64 + 1;
        let c = q.as_slice().iter().rev().fold(0u64, |acc, &x| acc * radix + x as u64);
        self.find_code(c)
    }

    /// Position of the product monomial, if its degree is within range.
    #[inline]
    pub fn product(&self, a: usize, b: usize) -> Option<usize> {
        if self.degree_of(a) + self.degree_of(b) > self.max_deg {
            return None;
        }
        self.find_code(self.codes[a] + self.codes[b])
    }

    /// Position of `z_i`.
    pub fn unit(&self, i: usize) -> usize {
        self.index_of(&MultiIndex::unit(self.n, i)).expect("basis contains degree one")
    }
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}
