//! Dense truncated maps and the incremental table of their powers.

use crate::scalars::Scalar;

use super::index::MonomialBasis;

/// A truncated map `C^n -> C^n` stored densely over a [`MonomialBasis`]:
/// `comps[j][i]` is the coefficient of monomial `i` in component `j`.
#[derive(Clone, Debug)]
pub(crate) struct Jet<S> {
    pub comps: Vec<Vec<S>>,
}

impl<S: Scalar> Jet<S> {
    pub fn zeros(basis: &MonomialBasis, zero: &S) -> Self {
        Jet { comps: vec![vec![zero.clone(); basis.len()]; basis.dim()] }
    }
}

/// `target += c * a * b` restricted to degree `d` of the product, where `a`
/// ranges over degrees `lo..d` and `b` supplies the complementary degree.
#[inline]
fn accumulate_slice<S: Scalar>(
    basis: &MonomialBasis,
    target: &mut [S],
    a: &[S],
    b: &[S],
    d: u32,
    a_lo: u32,
    b_lo: u32,
) {
    if d < a_lo + b_lo {
        return;
    }
    for da in a_lo..=d - b_lo {
        let db = d - da;
        for ia in basis.slice(da) {
            let x = &a[ia];
            if x.is_structural_zero() {
                continue;
            }
            for ib in basis.slice(db) {
                let y = &b[ib];
                if y.is_structural_zero() {
                    continue;
                }
                let k = basis.product(ia, ib).expect("degree within basis");
                target[k].mul_add_assign(x, y);
            }
        }
    }
}

/// Powers `g^L = g_1^{l_1} ... g_n^{l_n}` of a map `g` without constant term,
/// built one degree at a time.
///
/// Slice `d` of every power with `|L| >= 2` only involves slices `< d` of
/// `g`, so the table can run alongside a computation that determines `g`
/// degree by degree (inversion, linearization). Only the requested exponents
/// and the chain of factors needed to reach them are stored.
pub(crate) struct PowerTable<S> {
    /// Components of `g`; callers fill slice `d` before advancing past it.
    pub g: Jet<S>,
    powers: Vec<Option<Vec<S>>>,
    /// For each stored `L`: basis position of `L - e_i`, and `i`.
    parent: Vec<(usize, usize)>,
    order: Vec<usize>,
    done: u32,
}

impl<S: Scalar> PowerTable<S> {
    /// `wanted` lists basis positions of the exponents `L` (with `|L| >= 2`)
    /// whose powers are needed.
    pub fn new(basis: &MonomialBasis, g: Jet<S>, wanted: impl IntoIterator<Item = usize>, zero: &S) -> Self {
        let len = basis.len();
        let mut need = vec![false; len];
        for w in wanted {
            if basis.degree_of(w) >= 2 {
                need[w] = true;
            }
        }
        let mut parent = vec![(usize::MAX, usize::MAX); len];
        for i in (0..len).rev() {
            if !need[i] {
                continue;
            }
            let m = basis.monomial(i);
            let c = m.as_slice().iter().position(|&q| q > 0).expect("nonconstant");
            let mut p = m.to_vec();
            p[c] -= 1;
            let pi = basis.index_of(&p.into()).expect("parent in basis");
            parent[i] = (pi, c);
            if basis.degree_of(pi) >= 2 {
                need[pi] = true;
            }
        }
        let order: Vec<usize> = (0..len).filter(|&i| need[i]).collect();
        let powers = (0..len).map(|i| need[i].then(|| vec![zero.clone(); len])).collect();
        PowerTable { g, powers, parent, order, done: 1 }
    }

    /// Compute slice `d` of every stored power. Requires slices `1..d` of
    /// `g` and all earlier calls for `2..d`.
    pub fn advance(&mut self, basis: &MonomialBasis, d: u32) {
        debug_assert_eq!(self.done + 1, d);
        for &l in &self.order {
            let deg = basis.degree_of(l);
            if deg > d {
                break;
            }
            let (p, c) = self.parent[l];
            let mut target = self.powers[l].take().expect("stored power");
            {
                let gc = &self.g.comps[c];
                let a: &[S] = if basis.degree_of(p) == 1 {
                    &self.g.comps[basis.monomial(p).as_slice().iter().position(|&q| q == 1).unwrap()]
                } else {
                    self.powers[p].as_deref().expect("parent stored")
                };
                accumulate_slice(basis, &mut target, a, gc, d, deg - 1, 1);
            }
            self.powers[l] = Some(target);
        }
        self.done = d;
    }

    /// Fill all slices up to the basis degree (for a fully known `g`).
    pub fn complete(&mut self, basis: &MonomialBasis) {
        for d in self.done + 1..=basis.max_degree() {
            self.advance(basis, d);
        }
    }

    /// The power `g^L` for a stored `L` or a unit vector.
    pub fn power(&self, basis: &MonomialBasis, l: usize) -> &[S] {
        if basis.degree_of(l) == 1 {
            let c = basis.monomial(l).as_slice().iter().position(|&q| q == 1).unwrap();
            return &self.g.comps[c];
        }
        self.powers[l].as_deref().expect("power was requested at construction")
    }
}
