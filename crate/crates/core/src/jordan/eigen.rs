//! Eigenvalues of small matrices from the characteristic polynomial.

use rug::Float;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalars::{Arith, BigComplex, Scalar};

/// Largest dimension handled through the characteristic polynomial.
pub const MAX_EIGEN_DIM: usize = 4;

/// Coefficients `c_0, ..., c_n` (with `c_n = 1`) of `det(xI - M)`, by the
/// Faddeev-LeVerrier recursion.
pub fn char_poly<S: Scalar>(ar: &Arith<S>, m: &Matrix<S>) -> Vec<S> {
    let n = m.rows();
    let mut c = vec![ar.zero(); n + 1];
    c[n] = ar.one();
    let mut mk = Matrix::zeros(ar, n, n);
    for k in 1..=n {
        let mut next = m.mul(&mk).expect("square");
        for i in 0..n {
            let v = next.get(i, i).add(&c[n + 1 - k]);
            next.set(i, i, v);
        }
        let am = m.mul(&next).expect("square");
        let mut tr = ar.zero();
        for i in 0..n {
            tr.add_assign(am.get(i, i));
        }
        c[n - k] = tr.scale(-1, k as i64);
        mk = next;
    }
    c
}

fn horner(c: &[BigComplex], z: &BigComplex) -> (BigComplex, BigComplex) {
    let n = c.len() - 1;
    let mut p = c[n].clone();
    let mut dp = BigComplex::zero(&z.prec());
    for i in (0..n).rev() {
        dp = dp.mul(z).add(&p);
        p = p.mul(z).add(&c[i]);
    }
    (p, dp)
}

/// All roots of a monic polynomial by Aberth-Ehrlich iteration.
fn aberth(c: &[BigComplex], prec: u32) -> Vec<BigComplex> {
    let n = c.len() - 1;
    let bound = 1.0 + c[..n].iter().map(|x| x.modulus(64).value.to_f64()).fold(0.0, f64::max);
    let mut z: Vec<BigComplex> = (0..n)
        .map(|k| {
            let a = 0.4 + std::f64::consts::TAU * k as f64 / n as f64;
            let r = bound * 0.5;
            BigComplex::new(Float::with_val(prec, r * a.cos()), Float::with_val(prec, r * a.sin()))
        })
        .collect();
    let stop = Float::with_val(64, Float::i_exp(1, 8 - prec as i32)).to_f64().max(f64::MIN_POSITIVE);
    for _ in 0..4000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(c, &z[i]);
            if p.is_structural_zero() {
                continue;
            }
            let w = if dp.is_structural_zero() {
                BigComplex::new(Float::with_val(prec, Float::i_exp(1, -20)), Float::new(prec))
            } else {
                let ratio = p.mul(&dp.inv_unchecked());
                let mut s = BigComplex::zero(&prec);
                for j in 0..n {
                    if j != i {
                        let d = z[i].sub(&z[j]);
                        if !d.is_structural_zero() {
                            s = s.add(&d.inv_unchecked());
                        }
                    }
                }
                let den = BigComplex::one(&prec).sub(&ratio.mul(&s));
                if den.is_structural_zero() { ratio } else { ratio.mul(&den.inv_unchecked()) }
            };
            let size = 1.0 + z[i].modulus(64).value.to_f64();
            moved = moved.max(w.modulus(64).value.to_f64() / size);
            z[i] = z[i].sub(&w);
        }
        if moved <= stop {
            break;
        }
    }
    z
}

/// Distinct eigenvalues with algebraic multiplicities.
///
/// Triangular matrices read them off the diagonal. Otherwise the
/// characteristic polynomial is solved numerically (dimension at most
/// [`MAX_EIGEN_DIM`]), nearby roots are merged, and exact backends must
/// recover every eigenvalue as a Gaussian rational that passes an exact check.
pub fn eigenvalues<S: Scalar>(ar: &Arith<S>, m: &Matrix<S>) -> Result<Vec<(S, usize)>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
    }
    let n = m.rows();
    let tri = |lower: bool| (0..n).all(|i| (0..n).all(|j| (if lower { j <= i } else { i <= j }) || ar.is_zero(m.get(i, j))));
    if tri(true) || tri(false) {
        return Ok(group(ar, m.diag()));
    }
    if n > MAX_EIGEN_DIM {
        return Err(Error::Unsupported(format!("eigenvalues of a non-triangular {n}x{n} matrix")));
    }
    let c = char_poly(ar, m);
    let prec = ar.real_prec() + 64;
    let cf: Vec<BigComplex> = c
        .iter()
        .map(|x| {
            let (re, im) = x.to_floats(prec);
            BigComplex::new(re, im)
        })
        .collect();
    let roots = aberth(&cf, prec);
    let scale = 1.0 + roots.iter().map(|r| r.modulus(64).value.to_f64()).fold(0.0, f64::max);
    let spread = 2f64.powf(4.0 - f64::from(prec) / n as f64);
    let thr = spread.max(16.0 * ar.policy().tol().unwrap_or(0.0)) * scale;
    let mut clusters: Vec<Vec<BigComplex>> = Vec::new();
    for r in roots {
        match clusters.iter_mut().find(|cl| cl[0].sub(&r).modulus(64).value.to_f64() <= thr) {
            Some(cl) => cl.push(r),
            None => clusters.push(vec![r]),
        }
    }
    let mut out = Vec::new();
    for cl in clusters {
        let mut sum = BigComplex::zero(&prec);
        for r in &cl {
            sum = sum.add(r);
        }
        let mean = sum.scale(1, cl.len() as i64);
        let v = if S::EXACT {
            let half = prec / 2;
            let re = Float::with_val(half, &mean.re);
            let im = Float::with_val(half, &mean.im);
            ar.from_floats(&re, &im)
        } else {
            ar.from_floats(&mean.re, &mean.im)
        };
        let v = v.ok_or_else(|| Error::Unsupported("eigenvalue is not a Gaussian rational; supply eigenvalues explicitly".into()))?;
        out.push((v, cl.len()));
    }
    if S::EXACT && !expands_to(ar, &out, &c) {
        return Err(Error::Unsupported("eigenvalues are not Gaussian rationals; supply them explicitly".into()));
    }
    Ok(out)
}

fn group<S: Scalar>(ar: &Arith<S>, d: Vec<S>) -> Vec<(S, usize)> {
    let mut out: Vec<(S, usize)> = Vec::new();
    for v in d {
        match out.iter_mut().find(|(u, _)| ar.is_zero(&u.sub(&v))) {
            Some(e) => e.1 += 1,
            None => out.push((v, 1)),
        }
    }
    out
}

/// Whether `prod (x - r)^mult` equals the monic polynomial `c` exactly.
fn expands_to<S: Scalar>(ar: &Arith<S>, roots: &[(S, usize)], c: &[S]) -> bool {
    let mut p = vec![ar.one()];
    for (r, mult) in roots {
        for _ in 0..*mult {
            let mut q = vec![ar.zero(); p.len() + 1];
            for (i, a) in p.iter().enumerate() {
                q[i + 1].add_assign(a);
                q[i] = q[i].sub(&a.mul(r));
            }
            p = q;
        }
    }
    p.len() == c.len() && p.iter().zip(c).all(|(a, b)| a.sub(b).is_structural_zero())
}
