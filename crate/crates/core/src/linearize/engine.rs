use std::collections::HashMap;

use rug::Float;

use crate::error::Result;
use crate::scalars::{Arith, Scalar};
use crate::series::jet::{Jet, PowerTable};
use crate::series::{Germ, MonomialBasis, MultiIndex};

use super::{LinearizationResult, Obstruction, Status};

/// What to do with the coefficient `φ_{Q,j}`.
pub(super) enum Rule {
    /// Solve the equation of germ `k`.
    Solve(usize),
    /// Force the coefficient to zero.
    Zero,
}

pub(super) struct Engine<'a, S: Scalar> {
    ar: &'a Arith<S>,
    germs: &'a [Germ<S>],
    basis: MonomialBasis,
    /// Diagonal of each linear part.
    lam: Vec<Vec<S>>,
    /// `sub[k][j] = Λ_k[j][j-1]` (zero for `j = 0`).
    sub: Vec<Vec<S>>,
    diagonal: Vec<bool>,
}

impl<'a, S: Scalar> Engine<'a, S> {
    pub fn new(ar: &'a Arith<S>, germs: &'a [Germ<S>]) -> Result<Self> {
        let n = germs[0].dim();
        let basis = MonomialBasis::new(n, germs[0].trunc())?;
        let lam = germs.iter().map(|g| g.linear().diag()).collect();
        let sub = germs
            .iter()
            .map(|g| (0..n).map(|j| if j == 0 { ar.zero() } else { g.linear().get(j, j - 1).clone() }).collect())
            .collect();
        let diagonal = germs.iter().map(|g| g.linear().is_diagonal(ar)).collect();
        Ok(Engine { ar, germs, basis, lam, sub, diagonal })
    }

    /// Coefficients of `(Λ_k z)^P` for every `P` of degree `d`, grouped by
    /// target: `out[t_Q]` lists `(t_P, c)` with `P != Q`, slice-relative.
    fn linear_powers(&self, k: usize, d: u32) -> Vec<Vec<(usize, S)>> {
        let b = &self.basis;
        let n = b.dim();
        let m = self.germs[k].linear();
        let start = b.slice(d).start;
        let mut out = vec![Vec::new(); b.slice(d).len()];
        for (tp, ip) in b.slice(d).enumerate() {
            let mut poly: HashMap<usize, S> = HashMap::from([(0usize, self.ar.one())]);
            for (i, &e) in b.monomial(ip).as_slice().iter().enumerate() {
                for _ in 0..e {
                    let mut next: HashMap<usize, S> = HashMap::new();
                    for (&mono, c) in &poly {
                        for col in 0..n {
                            let a = m.get(i, col);
                            if a.is_structural_zero() {
                                continue;
                            }
                            let idx = b.product(mono, b.unit(col)).expect("within degree");
                            next.entry(idx).or_insert_with(|| self.ar.zero()).mul_add_assign(c, a);
                        }
                    }
                    poly = next;
                }
            }
            for (iq, c) in poly {
                if iq != ip && !c.is_structural_zero() {
                    out[iq - start].push((tp, c));
                }
            }
        }
        for v in &mut out {
            v.sort_by_key(|(t, _)| *t);
        }
        out
    }

    /// Solve degree by degree. `check` lists germs whose equation must hold
    /// at every coefficient; forced zeros are checked against the same set.
    pub fn run(&self, rule: &dyn Fn(&MultiIndex, usize, &[Float]) -> Rule, check: &[usize]) -> LinearizationResult<S> {
        let ar = self.ar;
        let b = &self.basis;
        let n = b.dim();
        let h = self.germs.len();
        let trunc = b.max_degree();
        let prec = ar.real_prec();
        let zero = ar.zero();

        let mut phi = Jet::zeros(b, &zero);
        for j in 0..n {
            phi.comps[j][b.unit(j)] = ar.one();
        }
        let terms: Vec<Vec<Vec<(usize, S)>>> = self
            .germs
            .iter()
            .map(|g| {
                g.higher()
                    .iter()
                    .map(|m| m.iter().map(|(q, c)| (b.index_of(q).expect("within truncation"), c.clone())).collect())
                    .collect()
            })
            .collect();
        let wanted: Vec<usize> = terms.iter().flatten().flatten().map(|(i, _)| *i).collect();
        let mut table = PowerTable::new(b, phi, wanted, &zero);

        let mut obstructions = Vec::new();
        let mut reached = trunc;
        for d in 2..=trunc {
            table.advance(b, d);
            let slice = b.slice(d);
            let start = slice.start;
            let len = slice.len();
            // r[k][j][t] = [f̂_k(φ)]_{Q_t, j}
            let mut r = vec![vec![vec![zero.clone(); len]; n]; h];
            for k in 0..h {
                for j in 0..n {
                    for (l, c) in &terms[k][j] {
                        let p = table.power(b, *l);
                        for t in 0..len {
                            let x = &p[start + t];
                            if !x.is_structural_zero() {
                                r[k][j][t].mul_add_assign(c, x);
                            }
                        }
                    }
                }
            }
            let lin: Vec<Option<Vec<Vec<(usize, S)>>>> =
                (0..h).map(|k| (!self.diagonal[k]).then(|| self.linear_powers(k, d))).collect();

            for t in 0..len {
                let i = start + t;
                let q = b.monomial(i).clone();
                let pows: Vec<S> = self
                    .lam
                    .iter()
                    .map(|l| {
                        let mut acc = ar.one();
                        for (x, &e) in l.iter().zip(q.as_slice()) {
                            if e > 0 {
                                acc = acc.mul(&x.pow(e));
                            }
                        }
                        acc
                    })
                    .collect();
                for j in 0..n {
                    let div: Vec<S> = (0..h).map(|k| pows[k].sub(&self.lam[k][j])).collect();
                    let moduli: Vec<Float> = div.iter().map(|x| x.modulus(prec).value).collect();
                    let e0: Vec<S> = (0..h)
                        .map(|k| {
                            let mut e = r[k][j][t].clone();
                            if j > 0 && !self.sub[k][j].is_structural_zero() {
                                e.mul_add_assign(&self.sub[k][j], &table.g.comps[j - 1][i]);
                            }
                            if let Some(lp) = &lin[k] {
                                for (tp, c) in &lp[t] {
                                    e = e.sub(&table.g.comps[j][start + tp].mul(c));
                                }
                            }
                            e
                        })
                        .collect();
                    let (value, solver) = match rule(&q, j, &moduli) {
                        Rule::Solve(k) => match ar.div(&e0[k], &div[k]) {
                            Ok(v) => (v, Some(k)),
                            Err(_) => {
                                obstructions.push(Obstruction { q: q.clone(), j, germ: k, residual: e0[k].clone() });
                                (zero.clone(), Some(k))
                            }
                        },
                        Rule::Zero => (zero.clone(), None),
                    };
                    for &c in check {
                        if Some(c) == solver {
                            continue;
                        }
                        let res = e0[c].sub(&div[c].mul(&value));
                        if !ar.is_zero(&res) {
                            obstructions.push(Obstruction { q: q.clone(), j, germ: c, residual: res });
                        }
                    }
                    table.g.comps[j][i] = value;
                }
            }
            if !obstructions.is_empty() {
                reached = d;
                break;
            }
        }
        let status = if obstructions.is_empty() { Status::Linearized } else { Status::Obstructed };
        LinearizationResult { phi: Germ::from_jet(ar, b, &table.g), status, obstructions, degree_reached: reached }
    }
}
