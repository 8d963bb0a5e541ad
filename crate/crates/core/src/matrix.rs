//! Small dense square integer matrices.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("matrix must be non-empty".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(IntMatrix { n, data })
    }

    pub fn diagonal(diag: &[i64]) -> Self {
        let n = diag.len();
        let mut m = Self::identity(n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Permutation matrix with `P e_j = e_{sigma(j)}`.
    pub fn permutation(sigma: &[usize]) -> Result<Self> {
        let n = sigma.len();
        let mut seen = vec![false; n];
        let mut m = IntMatrix { n, data: vec![0; n * n] };
        for (j, &i) in sigma.iter().enumerate() {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!("{sigma:?} is not a permutation")));
            }
            m.data[i * n + j] = 1;
        }
        Ok(m)
    }

    /// Identity with rows `i` and `j` exchanged.
    pub fn swap(n: usize, i: usize, j: usize) -> Self {
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.swap(i, j);
        Self::permutation(&sigma).expect("valid transposition")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == i64::from(i == j)))
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
        let n = self.n;
        let mut data = vec![0i64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        IntMatrix { n, data }
    }

    #[inline]
    pub fn mul_vec_into(&self, x: &[i64], out: &mut [i64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_vec(&self, x: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.n];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn transpose(&self) -> IntMatrix {
        let n = self.n;
        let mut data = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        IntMatrix { n, data }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i128 {
        let n = self.n;
        let mut a: Vec<i128> = self.data.iter().map(|&v| v as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k * n + k] == 0 {
                match (k + 1..n).find(|&r| a[r * n + k] != 0) {
                    Some(r) => {
                        for c in 0..n {
                            a.swap(k * n + c, r * n + c);
                        }
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
                }
            }
            prev = a[k * n + k];
        }
        sign * a[n * n - 1]
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> IntMatrix {
        let n = self.n;
        let mut data = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != skip_row) {
            for j in (0..n).filter(|&j| j != skip_col) {
                data.push(self.data[i * n + j]);
            }
        }
        IntMatrix { n: n - 1, data }
    }

    /// Exact inverse of a unimodular matrix (determinant +1 or -1).
    pub fn inverse(&self) -> Result<IntMatrix> {
        let det = self.det();
        if det != 1 && det != -1 {
            return Err(Error::NotUnimodular(det));
        }
        let n = self.n;
        if n == 1 {
            return Ok(self.clone());
        }
        if self.is_orthogonal() {
            return Ok(self.transpose());
        }
        let mut data = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let cof = self.minor(i, j).det() * if (i + j) % 2 == 0 { 1 } else { -1 };
                let v = i64::try_from(cof * det).map_err(|_| Error::Overflow("inverse entry".into()))?;
                // adjugate is the transposed cofactor matrix
                data[j * n + i] = v;
            }
        }
        Ok(IntMatrix { n, data })
    }

    /// `A^T A = I`.
    pub fn is_orthogonal(&self) -> bool {
        self.transpose().mul(self).is_identity()
    }

    pub fn is_signed_diagonal(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let v = self.get(i, j);
                if i == j {
                    v == 1 || v == -1
                } else {
                    v == 0
                }
            })
        })
    }

    pub fn is_permutation(&self) -> bool {
        self.is_orthogonal() && self.data.iter().all(|&v| v >= 0)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_inverse() {
        let a = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        assert_eq!(a.det(), 1);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        let b = IntMatrix::from_rows(&[vec![1, 2, 0], vec![0, 1, 3], vec![0, 0, -1]]).unwrap();
        assert_eq!(b.det(), -1);
        assert!(b.mul(&b.inverse().unwrap()).is_identity());
        let singular = IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]]).unwrap();
        assert!(matches!(singular.inverse(), Err(Error::NotUnimodular(2))));
    }

    #[test]
    fn permutation_convention() {
        let p = IntMatrix::permutation(&[1, 0]).unwrap();
        assert_eq!(p.mul_vec(&[1, 0]), vec![0, 1]);
        assert!(p.is_permutation());
        assert!(IntMatrix::permutation(&[0, 0]).is_err());
        assert_eq!(IntMatrix::swap(3, 1, 2).mul_vec(&[1, 2, 3]), vec![1, 3, 2]);
    }

    #[test]
    fn zero_pivot_determinant() {
        let a = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(a.det(), -1);
        let z = IntMatrix::from_rows(&[vec![0, 0], vec![1, 0]]).unwrap();
        assert_eq!(z.det(), 0);
    }
}
