//! Small dense matrices over a [`Scalar`].

use crate::error::{Error, Result};
use crate::scalars::{Arith, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(ar: &Arith<S>, rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![ar.zero(); rows * cols] }
    }

    pub fn identity(ar: &Arith<S>, n: usize) -> Self {
        let mut m = Self::zeros(ar, n, n);
        for i in 0..n {
            m.data[i * n + i] = ar.one();
        }
        m
    }

    pub fn diagonal(ar: &Arith<S>, d: &[S]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(ar, n, n);
        for (i, v) in d.iter().enumerate() {
            m.data[i * n + i] = v.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch { expected: c, found: row.len() });
            }
            data.extend(row);
        }
        Ok(Matrix { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(cols: &[Vec<S>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        if c == 0 || r == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            for col in cols {
                if col.len() != r {
                    return Err(Error::DimensionMismatch { expected: r, found: col.len() });
                }
                data.push(col[i].clone());
            }
        }
        Ok(Matrix { rows: r, cols: c, data })
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: o.rows });
        }
        let zero = self.data[0].one_like().sub(&self.data[0].one_like());
        let mut out = vec![zero; self.rows * o.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_structural_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    out[i * o.cols + j].mul_add_assign(a, o.get(k, j));
                }
            }
        }
        Ok(Matrix { rows: self.rows, cols: o.cols, data: out })
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        (0..self.rows)
            .map(|i| {
                let mut acc = v[0].one_like().sub(&v[0].one_like());
                for (a, x) in self.row(i).iter().zip(v) {
                    acc.mul_add_assign(a, x);
                }
                acc
            })
            .collect()
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, found: o.rows * o.cols });
        }
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale_by(&self, s: &S) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.mul(s)).collect() }
    }

    pub fn is_zero(&self, ar: &Arith<S>) -> bool {
        self.data.iter().all(|a| ar.is_zero(a))
    }

    pub fn is_diagonal(&self, ar: &Arith<S>) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || ar.is_zero(self.get(i, j))))
    }

    pub fn diag(&self) -> Vec<S> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).collect()
    }

    /// Largest entry modulus, as a double.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.modulus(64).value.to_f64()).fold(0.0, f64::max)
    }

    /// Pivot row for column `col` at or below `from`: first nonzero entry for
    /// exact scalars, largest modulus above `tol * tol_scale` otherwise.
    fn pivot_in(&self, ar: &Arith<S>, col: usize, from: usize, tol_scale: f64) -> Option<usize> {
        if S::EXACT {
            (from..self.rows).find(|&r| !ar.is_zero(self.get(r, col)))
        } else {
            let mut best: Option<(usize, f64)> = None;
            for r in from..self.rows {
                let m = self.get(r, col).modulus(64).value.to_f64();
                if best.is_none_or(|(_, b)| m > b) {
                    best = Some((r, m));
                }
            }
            let tol = ar.policy().tol().unwrap_or(0.0) * tol_scale;
            best.filter(|&(_, m)| m > tol).map(|(r, _)| r)
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self, ar: &Arith<S>) -> Result<S> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = ar.one();
        for c in 0..n {
            let Some(p) = m.pivot_in(ar, c, c, 1.0) else {
                return Ok(ar.zero());
            };
            if p != c {
                m.swap_rows(p, c);
                det = det.neg();
            }
            let piv = m.get(c, c).clone();
            det = det.mul(&piv);
            let inv = piv.inv_unchecked();
            for r in c + 1..n {
                let f = m.get(r, c).mul(&inv);
                if f.is_structural_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m.get(r, j).sub(&f.mul(m.get(c, j)));
                    m.set(r, j, v);
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss-Jordan elimination. Fails with
    /// [`Error::SingularMatrix`] when no admissible pivot exists.
    pub fn inverse(&self, ar: &Arith<S>) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = Self::identity(ar, n);
        let scale = self.max_abs().max(1.0);
        for c in 0..n {
            let p = m.pivot_in(ar, c, c, scale).ok_or(Error::SingularMatrix)?;
            m.swap_rows(p, c);
            inv.swap_rows(p, c);
            let pinv = m.get(c, c).inv_unchecked();
            for j in 0..n {
                let v = m.get(c, j).mul(&pinv);
                m.set(c, j, v);
                let w = inv.get(c, j).mul(&pinv);
                inv.set(c, j, w);
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let f = m.get(r, c).clone();
                if f.is_structural_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = m.get(r, j).sub(&f.mul(m.get(c, j)));
                    m.set(r, j, v);
                    let w = inv.get(r, j).sub(&f.mul(inv.get(c, j)));
                    inv.set(r, j, w);
                }
            }
        }
        Ok(inv)
    }

    /// Basis of the right null space, computed from the reduced row-echelon
    /// form with pivot threshold `tol` (absolute). Each basis vector has a 1
    /// in its free column and 0 in the other free columns.
    pub fn nullspace(&self, ar: &Arith<S>, tol: f64) -> Vec<Vec<S>> {
        let (r, pivots) = self.rref(ar, tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![ar.zero(); self.cols];
                v[f] = ar.one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = r.get(row, f).neg();
                }
                v
            })
            .collect()
    }

    /// Reduced row-echelon form; pivots with modulus `<= tol` are treated as
    /// zero (ignored for the exact backend).
    pub fn rref(&self, ar: &Arith<S>, tol: f64) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for c in 0..self.cols {
            if row == self.rows {
                break;
            }
            let p = if S::EXACT {
                (row..self.rows).find(|&r| !m.get(r, c).is_structural_zero())
            } else {
                let mut best: Option<(usize, f64)> = None;
                for r in row..self.rows {
                    let v = m.get(r, c).modulus(64).value.to_f64();
                    if best.is_none_or(|(_, b)| v > b) {
                        best = Some((r, v));
                    }
                }
                best.filter(|&(_, v)| v > tol).map(|(r, _)| r)
            };
            let Some(p) = p else {
                if !S::EXACT {
                    for r in row..self.rows {
                        m.set(r, c, ar.zero());
                    }
                }
                continue;
            };
            m.swap_rows(p, row);
            let pinv = m.get(row, c).inv_unchecked();
            for j in 0..self.cols {
                let v = m.get(row, j).mul(&pinv);
                m.set(row, j, v);
            }
            m.set(row, c, ar.one());
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let f = m.get(r, c).clone();
                if f.is_structural_zero() {
                    continue;
                }
                for j in 0..self.cols {
                    let v = m.get(r, j).sub(&f.mul(m.get(row, j)));
                    m.set(r, j, v);
                }
                m.set(r, c, ar.zero());
            }
            pivots.push(c);
            row += 1;
        }
        (m, pivots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{BigComplex, GaussRational};

    fn q(v: i64) -> GaussRational {
        Arith::<GaussRational>::exact().int(v)
    }

    #[test]
    fn inverse_roundtrip_exact() {
        let ar = Arith::<GaussRational>::exact();
        let m = Matrix::from_rows(vec![vec![q(2), q(1), q(0)], vec![q(1), q(3), q(1)], vec![q(0), q(1), q(4)]]).unwrap();
        let inv = m.inverse(&ar).unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(&ar, 3));
        assert_eq!(m.det(&ar).unwrap(), q(18));
    }

    #[test]
    fn singular_detected() {
        let ar = Arith::<GaussRational>::exact();
        let m = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]).unwrap();
        assert_eq!(m.inverse(&ar), Err(Error::SingularMatrix));
        assert_eq!(m.det(&ar).unwrap(), q(0));
        let ns = m.nullspace(&ar, 0.0);
        assert_eq!(ns, vec![vec![q(-2), q(1)]]);
    }

    #[test]
    fn float_inverse() {
        let ar = Arith::<BigComplex>::float(128).unwrap();
        let m = Matrix::from_rows(vec![
            vec![ar.ratio((1, 3), (0, 1)), ar.ratio((0, 1), (1, 1))],
            vec![ar.int(5), ar.ratio((2, 7), (1, 9))],
        ])
        .unwrap();
        let p = m.mul(&m.inverse(&ar).unwrap()).unwrap();
        assert!(p.sub(&Matrix::identity(&ar, 2)).unwrap().is_zero(&ar));
    }
}
