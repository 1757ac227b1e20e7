//! Truncated multivariate power series and germs of biholomorphisms.
//!
//! Public values ([`PowerSeries`], [`Germ`]) are sparse and ordered by
//! [`MultiIndex`]. Composition, inversion and conjugation run on a dense
//! [`MonomialBasis`] and an incremental power table, then convert back.

mod germ;
mod index;
pub(crate) mod jet;
mod power;

pub use germ::Germ;
pub use index::{MonomialBasis, MultiIndex, MAX_BASIS_SIZE};
pub use power::{ps_add, ps_mul, PowerSeries};

pub(crate) use germ::compose_jets;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::scalars::{Arith, BigComplex, GaussRational, Scalar};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = GaussRational;

    fn ar() -> Arith<Q> {
        Arith::exact()
    }

    fn germ1(lin: i64, terms: &[(u32, i64)], trunc: u32) -> Germ<Q> {
        let a = ar();
        let m = Matrix::from_rows(vec![vec![a.int(lin)]]).unwrap();
        Germ::new(&a, trunc, m, terms.iter().map(|&(q, c)| (0, MultiIndex::new(vec![q]), a.int(c)))).unwrap()
    }

    #[test]
    fn composition_examples() {
        let a = ar();
        let f = germ1(1, &[(2, 1)], 4);
        assert_eq!(f.compose(&Germ::identity(&a, 1, 4), &a).unwrap(), f);
        assert_eq!(germ1(2, &[], 3).compose(&germ1(3, &[], 3), &a).unwrap(), germ1(6, &[], 3));
        assert_eq!(f.compose(&f, &a).unwrap(), germ1(1, &[(2, 2), (3, 2), (4, 1)], 4));
    }

    #[test]
    fn inverse_examples() {
        let a = ar();
        let id = Germ::identity(&a, 2, 5);
        assert_eq!(id.inverse(&a).unwrap(), id);
        let half = {
            let m = Matrix::from_rows(vec![vec![a.ratio((1, 2), (0, 1))]]).unwrap();
            Germ::linear_map(m, 3)
        };
        assert_eq!(germ1(2, &[], 3).inverse(&a).unwrap(), half);
        assert_eq!(germ1(1, &[(2, 1)], 3).inverse(&a).unwrap(), germ1(1, &[(2, -1), (3, 2)], 3));
        let sing = Germ::linear_map(Matrix::zeros(&a, 1, 1), 3);
        assert!(sing.inverse(&a).is_err());
    }

    #[test]
    fn conjugation_examples() {
        let a = ar();
        let f = germ1(1, &[(2, 1), (3, 5)], 4);
        assert_eq!(f.conjugate(&Germ::identity(&a, 1, 4), &a).unwrap(), f);
        let lam = Germ::linear_map(Matrix::diagonal(&a, &[a.int(2), a.int(3)]), 3);
        let phi = Germ::linear_map(Matrix::diagonal(&a, &[a.int(5), a.int(-1)]), 3);
        assert_eq!(lam.conjugate(&phi, &a).unwrap(), lam);
        let got = germ1(2, &[], 2).conjugate(&germ1(1, &[(2, 1)], 2), &a).unwrap();
        assert_eq!(got, germ1(2, &[(2, -2)], 2));
    }

    #[test]
    fn linear_change_examples() {
        let a = ar();
        let f = Germ::new(&a, 3, Matrix::identity(&a, 2), [(0, MultiIndex::new(vec![0, 2]), a.one())]).unwrap();
        assert_eq!(f.linear_change(&Matrix::identity(&a, 2), &a).unwrap(), f);
        let d = Matrix::diagonal(&a, &[a.int(2), a.one()]);
        let want = Germ::new(&a, 3, Matrix::identity(&a, 2), [(0, MultiIndex::new(vec![0, 2]), a.ratio((1, 2), (0, 1)))]).unwrap();
        assert_eq!(f.linear_change(&d, &a).unwrap(), want);
        let lam = Germ::linear_map(Matrix::diagonal(&a, &[a.int(2), a.int(3)]), 2);
        let swap = Matrix::from_rows(vec![vec![a.zero(), a.one()], vec![a.one(), a.zero()]]).unwrap();
        assert_eq!(
            lam.linear_change(&swap, &a).unwrap(),
            Germ::linear_map(Matrix::diagonal(&a, &[a.int(3), a.int(2)]), 2)
        );
    }

    #[test]
    fn coeff_norm_is_sup_over_coordinates() {
        let a = ar();
        let q = MultiIndex::new(vec![1, 1]);
        let f = Germ::new(&a, 2, Matrix::identity(&a, 2), [(0, q.clone(), a.ratio((3, 1), (4, 1)))]).unwrap();
        assert_eq!(f.coeff_norm(&q, 64), 5);
        assert_eq!(f.coeff_norm(&MultiIndex::new(vec![2, 0]), 64), 0);
        let g = Germ::new(&a, 2, Matrix::identity(&a, 2), [(0, q.clone(), a.int(1)), (1, q.clone(), a.int(-2))]).unwrap();
        assert_eq!(g.coeff_norm(&q, 64), 2);
    }

    #[test]
    fn rejects_malformed_terms() {
        let a = ar();
        let id = Matrix::identity(&a, 2);
        assert!(Germ::new(&a, 3, id.clone(), [(2, MultiIndex::new(vec![1, 1]), a.one())]).is_err());
        assert!(Germ::new(&a, 3, id.clone(), [(0, MultiIndex::new(vec![1, 0]), a.one())]).is_err());
        assert!(Germ::new(&a, 3, id.clone(), [(0, MultiIndex::new(vec![4, 0]), a.one())]).is_err());
        assert!(Germ::new(&a, 3, id, [(0, MultiIndex::new(vec![1, 1, 0]), a.one())]).is_err());
    }

    pub(crate) fn random_germ<S: Scalar>(ar: &Arith<S>, rng: &mut ChaCha8Rng, n: usize, trunc: u32, deg: u32) -> Germ<S> {
        loop {
            let rows = (0..n)
                .map(|_| (0..n).map(|_| ar.ratio((rng.gen_range(-4..=4), rng.gen_range(1..=3)), (rng.gen_range(-2..=2), 1))).collect())
                .collect();
            let lin = Matrix::from_rows(rows).unwrap();
            let mut terms = Vec::new();
            for q in MultiIndex::enumerate(n, 2, deg.min(trunc)) {
                for j in 0..n {
                    if rng.gen_bool(0.5) {
                        let c = ar.ratio((rng.gen_range(-3..=3), rng.gen_range(1..=4)), (rng.gen_range(-3..=3), 2));
                        terms.push((j, q.clone(), c));
                    }
                }
            }
            if let Ok(g) = Germ::new(ar, trunc, lin, terms) {
                return g;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn inverse_is_two_sided_exact(seed in any::<u64>(), n in 1usize..=3, trunc in 2u32..=5) {
            let a = ar();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_germ(&a, &mut rng, n, trunc, 3);
            let g = f.inverse(&a).unwrap();
            let id = Germ::identity(&a, n, trunc);
            prop_assert_eq!(g.compose(&f, &a).unwrap(), id.clone());
            prop_assert_eq!(f.compose(&g, &a).unwrap(), id);
        }

        #[test]
        fn composition_is_associative(seed in any::<u64>(), n in 1usize..=2, trunc in 2u32..=5) {
            let a = ar();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_germ(&a, &mut rng, n, trunc, 3);
            let g = random_germ(&a, &mut rng, n, trunc, 3);
            let h = random_germ(&a, &mut rng, n, trunc, 3);
            let left = f.compose(&g, &a).unwrap().compose(&h, &a).unwrap();
            let right = f.compose(&g.compose(&h, &a).unwrap(), &a).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn linear_change_roundtrip(seed in any::<u64>(), n in 1usize..=3) {
            let a = ar();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_germ(&a, &mut rng, n, 4, 4);
            let m = random_germ(&a, &mut rng, n, 1, 1).linear().clone();
            let there = f.linear_change(&m, &a).unwrap();
            let back = there.linear_change(&m.inverse(&a).unwrap(), &a).unwrap();
            prop_assert_eq!(back, f);
        }
    }

    #[test]
    fn float_inverse_residual_small() {
        let a = Arith::<BigComplex>::float(256).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3 {
            let f = random_germ(&a, &mut rng, n, 10, 4);
            let g = f.inverse(&a).unwrap();
            let r = g.compose(&f, &a).unwrap().distance(&Germ::identity(&a, n, 10)).unwrap();
            assert!(r <= 1e-20, "n={n} residual {r}");
        }
    }
}
