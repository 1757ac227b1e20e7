//! Commutation, (almost) simultaneous Jordan form and simultaneous
//! diagonalization of matrix families.

mod eigen;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalars::{Arith, Scalar};

pub use eigen::{char_poly, eigenvalues, MAX_EIGEN_DIM};

/// Check that a family is nonempty, square, of one size and invertible.
pub fn check_family<S: Scalar>(ar: &Arith<S>, mats: &[Matrix<S>]) -> Result<usize> {
    let n = mats.first().ok_or_else(|| Error::InvalidInput("empty matrix family".into()))?.rows();
    for m in mats {
        if !m.is_square() || m.rows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.rows().max(m.cols()) });
        }
        if ar.is_zero(&m.det(ar)?) {
            return Err(Error::SingularMatrix);
        }
    }
    Ok(n)
}

/// Whether `x` is zero relative to a magnitude `scale`.
fn negligible<S: Scalar>(ar: &Arith<S>, x: &S, scale: f64) -> bool {
    match ar.policy().tol() {
        None => x.is_structural_zero(),
        Some(tol) => x.is_structural_zero() || x.modulus(64).value.to_f64() <= tol * scale.max(1.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommuteReport {
    pub commute: bool,
    /// First non-commuting pair `(p, q)`, `p < q`, 0-based.
    pub pair: Option<(usize, usize)>,
    /// Pairs whose largest commutator entry lies within a factor 10 of the
    /// (scaled) tolerance.
    pub near: Vec<(usize, usize, f64)>,
}

/// `M_p M_q = M_q M_p` for every pair, under the zero policy scaled by
/// `max|M_p| * max|M_q|`.
pub fn commute_check<S: Scalar>(ar: &Arith<S>, mats: &[Matrix<S>]) -> Result<CommuteReport> {
    let mut pair = None;
    let mut near = Vec::new();
    for p in 0..mats.len() {
        for q in p + 1..mats.len() {
            let c = mats[p].mul(&mats[q])?.sub(&mats[q].mul(&mats[p])?)?;
            let scale = mats[p].max_abs() * mats[q].max_abs();
            let ok = c.to_rows().iter().flatten().all(|x| negligible(ar, x, scale));
            if let Some(tol) = ar.policy().tol() {
                let worst = c.max_abs();
                let t = tol * scale.max(1.0);
                if worst > 0.0 && worst > t / 10.0 && worst <= t * 10.0 {
                    near.push((p, q, worst));
                }
            }
            if !ok && pair.is_none() {
                pair = Some((p, q));
            }
        }
    }
    Ok(CommuteReport { commute: pair.is_none(), pair, near })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JordanFormReport {
    pub is_almost_sim_jordan: bool,
    pub is_sim_jordan: bool,
    pub violations: Vec<String>,
}

/// Check the lower-bidiagonal shape, that nonzero subdiagonal entries only
/// join equal eigenvalues, and whether all nonzero subdiagonal entries of
/// the family share one value.
pub fn check_form<S: Scalar>(ar: &Arith<S>, mats: &[Matrix<S>]) -> Result<JordanFormReport> {
    let n = mats.first().ok_or_else(|| Error::InvalidInput("empty matrix family".into()))?.rows();
    let mut violations = Vec::new();
    let mut common: Option<S> = None;
    let mut shared = true;
    for (k, m) in mats.iter().enumerate() {
        if !m.is_square() || m.rows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.rows() });
        }
        let scale = m.max_abs();
        for i in 0..n {
            for j in 0..n {
                let x = m.get(i, j);
                if i == j || negligible(ar, x, scale) {
                    continue;
                }
                if j > i {
                    violations.push(format!("matrix {}: nonzero entry above the diagonal at ({}, {})", k + 1, i + 1, j + 1));
                } else if i > j + 1 {
                    violations.push(format!("matrix {}: nonzero entry below the subdiagonal at ({}, {})", k + 1, i + 1, j + 1));
                } else {
                    if !negligible(ar, &m.get(j, j).sub(m.get(i, i)), scale) {
                        violations.push(format!(
                            "matrix {}: subdiagonal entry at ({}, {}) joins distinct eigenvalues",
                            k + 1,
                            i + 1,
                            j + 1
                        ));
                    }
                    match &common {
                        None => common = Some(x.clone()),
                        Some(e) => {
                            if !negligible(ar, &e.sub(x), scale) {
                                shared = false;
                            }
                        }
                    }
                }
            }
        }
    }
    let almost = violations.is_empty();
    Ok(JordanFormReport { is_almost_sim_jordan: almost, is_sim_jordan: almost && shared, violations })
}

/// `check_form` of `{A^{-1} M_k A}`.
pub fn verify_conjugation<S: Scalar>(ar: &Arith<S>, mats: &[Matrix<S>], a: &Matrix<S>) -> Result<JordanFormReport> {
    let inv = a.inverse(ar)?;
    let conj: Vec<Matrix<S>> = mats.iter().map(|m| inv.mul(m)?.mul(a)).collect::<Result<_>>()?;
    check_form(ar, &conj)
}

fn conj_transpose<S: Scalar>(m: &Matrix<S>) -> Matrix<S> {
    let cols: Vec<Vec<S>> = m.to_rows().into_iter().map(|r| r.iter().map(Scalar::conj).collect()).collect();
    Matrix::from_columns(&cols).expect("nonempty")
}

/// Matrix of `M` restricted to the invariant subspace spanned by the
/// columns of `b`.
fn restrict<S: Scalar>(ar: &Arith<S>, m: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    let bh = conj_transpose(b);
    let gram = bh.mul(b)?;
    gram.inverse(ar)?.mul(&bh)?.mul(&m.mul(b)?)
}

/// A matrix `A` with every `A^{-1} M_k A` diagonal, built by splitting into
/// eigenspaces of `M_1`, then of `M_2` restricted to each, and so on.
pub fn simultaneous_diagonalize<S: Scalar>(ar: &Arith<S>, mats: &[Matrix<S>]) -> Result<Matrix<S>> {
    let n = check_family(ar, mats)?;
    let c = commute_check(ar, mats)?;
    if let Some((p, q)) = c.pair {
        return Err(Error::NotCommuting { p, q, degree: 1 });
    }
    if mats.iter().all(|m| m.is_diagonal(ar)) {
        return Ok(Matrix::identity(ar, n));
    }
    let mut blocks = vec![Matrix::identity(ar, n)];
    for (k, m) in mats.iter().enumerate() {
        let mut next = Vec::new();
        for b in blocks {
            let r = restrict(ar, m, &b)?;
            let dim = r.rows();
            let scale = r.max_abs().max(1.0);
            let tol = ar.policy().tol().unwrap_or(0.0) * scale;
            let mut found = 0;
            for (mu, _) in eigenvalues(ar, &r)? {
                let shifted = r.sub(&Matrix::identity(ar, dim).scale_by(&mu))?;
                let vs = shifted.nullspace(ar, tol);
                if vs.is_empty() {
                    continue;
                }
                found += vs.len();
                next.push(b.mul(&Matrix::from_columns(&vs)?)?);
            }
            if found != dim {
                return Err(Error::NotDiagonalizable(k));
            }
        }
        blocks = next;
    }
    let cols: Vec<Vec<S>> = blocks.iter().flat_map(|b| (0..b.cols()).map(|j| b.column(j))).collect();
    let a = Matrix::from_columns(&cols)?;
    a.inverse(ar).map_err(|_| Error::NotDiagonalizable(mats.len() - 1))?;
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{BigComplex, GaussRational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = GaussRational;

    fn ex() -> Arith<Q> {
        Arith::exact()
    }
    fn mat(a: &Arith<Q>, rows: &[&[i64]]) -> Matrix<Q> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| a.int(x)).collect()).collect()).unwrap()
    }

    /// The commuting pair that admits no almost simultaneous Jordan form.
    fn first_pair(a: &Arith<Q>) -> Vec<Matrix<Q>> {
        let (l, e, mu, d, b) = (2, 1, 3, 1, 1);
        vec![mat(a, &[&[l, 0, 0], &[e, l, 0], &[0, 0, l]]), mat(a, &[&[mu, 0, 0], &[d, mu, 0], &[b, 0, mu]])]
    }

    /// The non-commuting pair already almost in simultaneous Jordan form.
    fn second_pair(a: &Arith<Q>) -> Vec<Matrix<Q>> {
        let (l, e, mu, d, eta) = (2, 1, 3, 1, 5);
        vec![mat(a, &[&[l, 0, 0], &[e, l, 0], &[0, e, l]]), mat(a, &[&[mu, 0, 0], &[d, mu, 0], &[0, 0, eta]])]
    }

    #[test]
    fn counterexample_pairs() {
        let a = ex();
        let p = first_pair(&a);
        assert!(commute_check(&a, &p).unwrap().commute);
        assert!(matches!(simultaneous_diagonalize(&a, &p), Err(Error::NotDiagonalizable(_))));
        let f = check_form(&a, &p).unwrap();
        assert!(!f.is_almost_sim_jordan);

        let p = second_pair(&a);
        let f = check_form(&a, &p).unwrap();
        assert!(f.is_almost_sim_jordan && f.is_sim_jordan);
        let c = commute_check(&a, &p).unwrap();
        assert!(!c.commute);
        assert_eq!(c.pair, Some((0, 1)));
    }

    #[test]
    fn diagonal_family() {
        let a = ex();
        let fam = vec![Matrix::diagonal(&a, &[a.int(2), a.int(3)]), Matrix::diagonal(&a, &[a.int(5), a.int(5)])];
        assert!(commute_check(&a, &fam).unwrap().commute);
        let f = check_form(&a, &fam).unwrap();
        assert!(f.is_almost_sim_jordan && f.is_sim_jordan);
        assert_eq!(simultaneous_diagonalize(&a, &fam).unwrap(), Matrix::identity(&a, 2));
        assert!(verify_conjugation(&a, &fam, &Matrix::identity(&a, 2)).unwrap().is_sim_jordan);
    }

    #[test]
    fn shape_violations() {
        let a = ex();
        let upper = mat(&a, &[&[1, 1], &[0, 1]]);
        let f = check_form(&a, &[upper]).unwrap();
        assert!(!f.is_almost_sim_jordan);
        assert!(f.violations[0].contains("above"));
        let joins = mat(&a, &[&[1, 0], &[1, 2]]);
        assert!(!check_form(&a, &[joins]).unwrap().is_almost_sim_jordan);
        let two_eps = vec![mat(&a, &[&[1, 0], &[1, 1]]), mat(&a, &[&[2, 0], &[3, 2]])];
        let f = check_form(&a, &two_eps).unwrap();
        assert!(f.is_almost_sim_jordan && !f.is_sim_jordan);
    }

    fn roundtrip<S: Scalar>(ar: &Arith<S>, rng: &mut ChaCha8Rng, n: usize) -> (Vec<Matrix<S>>, Matrix<S>) {
        let p = loop {
            let rows = (0..n).map(|_| (0..n).map(|_| ar.int(rng.gen_range(-3..=3))).collect()).collect();
            let p = Matrix::from_rows(rows).unwrap();
            if p.inverse(ar).is_ok() {
                break p;
            }
        };
        let pinv = p.inverse(ar).unwrap();
        let mut d1: Vec<S> = (0..n).map(|i| ar.int(i as i64 + 2)).collect();
        d1[0] = d1[n - 1].clone();
        let d2: Vec<S> = (0..n).map(|i| ar.ratio((1, 1), (i as i64 + 1, 1))).collect();
        let fam = [d1, d2].iter().map(|d| p.mul(&Matrix::diagonal(ar, d)).unwrap().mul(&pinv).unwrap()).collect();
        (fam, p)
    }

    #[test]
    fn diagonalizes_conjugated_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = ex();
        for n in 2..=3 {
            let (fam, p) = roundtrip(&a, &mut rng, n);
            let got = simultaneous_diagonalize(&a, &fam).unwrap();
            assert!(verify_conjugation(&a, &fam, &got).unwrap().is_sim_jordan);
            assert!(verify_conjugation(&a, &fam, &p).unwrap().is_sim_jordan);
        }
        let f = Arith::<BigComplex>::float(256).unwrap();
        for n in 2..=4 {
            let (fam, _) = roundtrip(&f, &mut rng, n);
            let got = simultaneous_diagonalize(&f, &fam).unwrap();
            let inv = got.inverse(&f).unwrap();
            for m in &fam {
                let d = inv.mul(m).unwrap().mul(&got).unwrap();
                let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j)
                    .map(|(i, j)| d.get(i, j).modulus(64).value.to_f64()).fold(0.0, f64::max);
                assert!(off < f.policy().tol().unwrap(), "n={n} off-diagonal {off}");
            }
        }
    }

    #[test]
    fn generic_conjugator_fails_form() {
        let a = ex();
        let fam = vec![Matrix::diagonal(&a, &[a.int(2), a.int(3)])];
        let g = mat(&a, &[&[1, 2], &[3, 5]]);
        assert!(!verify_conjugation(&a, &fam, &g).unwrap().is_almost_sim_jordan);
    }
}
