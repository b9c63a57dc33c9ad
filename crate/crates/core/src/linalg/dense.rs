use crate::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<T>]) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        Some(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues in ascending order with matching unit eigenvectors
/// (column `k` of `vectors` belongs to `values[k]`).
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: DenseMatrix<T>,
}

/// Cyclic Jacobi eigen decomposition of a symmetric matrix.
///
/// Only the upper triangle is read. Sweeps continue until the off-diagonal
/// mass is negligible relative to the Frobenius norm.
pub fn symmetric_eigen<T: Scalar>(a: &DenseMatrix<T>) -> SymmetricEigen<T> {
    assert!(a.is_square(), "symmetric_eigen needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
    let mut v = DenseMatrix::identity(n);
    let frob: T = m.data.iter().map(|&x| x * x).sum::<T>().sqrt();
    let threshold = T::eps() * T::lit(0.5) * frob;

    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= threshold || frob == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new)] = v[(k, old)];
        }
    }
    SymmetricEigen { values, vectors }
}

/// LU factorization with partial pivoting. Returns the packed factors,
/// the row permutation, and the permutation sign; `None` if singular.
fn lu<T: Scalar>(a: &DenseMatrix<T>) -> Option<(DenseMatrix<T>, Vec<usize>, T)> {
    assert!(a.is_square());
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = T::one();
    let scale = a.max_abs();
    if scale == T::zero() {
        return None;
    }
    let tiny = scale * T::eps() * T::from_count(n.max(1)) * T::lit(16.0);
    for k in 0..n {
        let (piv, max) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if max <= tiny {
            return None;
        }
        if piv != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        for i in (k + 1)..n {
            let f = lu[(i, k)] / lu[(k, k)];
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
        }
    }
    Some((lu, perm, sign))
}

/// Determinant; zero when the matrix is numerically singular.
pub fn determinant<T: Scalar>(a: &DenseMatrix<T>) -> T {
    match lu(a) {
        None => T::zero(),
        Some((f, _, sign)) => (0..a.rows()).fold(sign, |d, i| d * f[(i, i)]),
    }
}

/// Inverse of a square matrix, or `None` when numerically singular.
pub fn invert<T: Scalar>(a: &DenseMatrix<T>) -> Option<DenseMatrix<T>> {
    let (f, perm, _) = lu(a)?;
    let n = a.rows();
    let mut inv = DenseMatrix::zeros(n, n);
    for col in 0..n {
        let mut x: Vec<T> = (0..n)
            .map(|i| if perm[i] == col { T::one() } else { T::zero() })
            .collect();
        for i in 0..n {
            for k in 0..i {
                let l = f[(i, k)];
                x[i] = x[i] - l * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let u = f[(i, k)];
                x[i] = x[i] - u * x[k];
            }
            x[i] = x[i] / f[(i, i)];
        }
        for i in 0..n {
            inv[(i, col)] = x[i];
        }
    }
    Some(inv)
}
