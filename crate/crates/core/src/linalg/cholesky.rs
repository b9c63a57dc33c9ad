use std::collections::VecDeque;

use super::CsrMatrix;
use crate::error::{Error, Result};
use crate::Scalar;

/// Reverse Cuthill–McKee ordering of the symmetric sparsity pattern.
///
/// Returns `perm` with `perm[new] = old`. Each connected component is
/// started from a pseudo-peripheral vertex.
pub fn reverse_cuthill_mckee<T: Scalar>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.n_rows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, visited: &[bool]| -> (usize, usize) {
        // returns (eccentricity, a min-degree vertex in the last level)
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::from([start]);
        dist[start] = 0;
        let mut last = start;
        while let Some(v) = queue.pop_front() {
            let (cols, _) = a.row(v);
            for &w in cols {
                if !visited[w] && dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
            let better = dist[v] > dist[last] || (dist[v] == dist[last] && degree[v] < degree[last]);
            if better {
                last = v;
            }
        }
        (dist[last], last)
    };

    loop {
        let Some(seed) = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]) else {
            break;
        };
        let mut start = seed;
        let (mut ecc, mut far) = bfs_levels(start, &visited);
        for _ in 0..8 {
            let (e2, f2) = bfs_levels(far, &visited);
            if e2 <= ecc {
                break;
            }
            start = far;
            ecc = e2;
            far = f2;
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let (cols, _) = a.row(v);
            let mut next: Vec<usize> = cols.iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor of a symmetric positive definite sparse matrix stored in
/// envelope (skyline) form after a bandwidth-reducing permutation.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    row_start: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> EnvelopeCholesky<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.n_rows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            for &c in a.row(old).0 {
                let j = inv[c];
                if j < first[i] {
                    first[i] = j;
                }
            }
        }
        let mut row_start = vec![0usize; n + 1];
        for i in 0..n {
            row_start[i + 1] = row_start[i] + (i - first[i] + 1);
        }
        let mut data = vec![T::zero(); row_start[n]];
        for old in 0..n {
            let i = inv[old];
            let (cols, vals) = a.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j <= i {
                    data[row_start[i] + (j - first[i])] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[row_start[i] + (j - fi)];
                for k in k0..j {
                    s -= data[row_start[i] + (k - fi)] * data[row_start[j] + (k - fj)];
                }
                if j < i {
                    let ljj = data[row_start[j] + (j - fj)];
                    data[row_start[i] + (j - fi)] = s / ljj;
                } else {
                    if !(s > T::zero()) {
                        return Err(Error::InternalInconsistency(format!(
                            "matrix is not positive definite (pivot {} at row {i})",
                            s.as_f64()
                        )));
                    }
                    data[row_start[i] + (i - fi)] = s.sqrt();
                }
            }
        }
        Ok(Self {
            perm,
            first,
            row_start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    fn l(&self, i: usize, j: usize) -> T {
        self.data[self.row_start[i] + (j - self.first[i])]
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.l(i, k) * y[k];
            }
            y[i] = s / self.l(i, i);
        }
        for i in (0..n).rev() {
            y[i] /= self.l(i, i);
            let yi = y[i];
            for k in self.first[i]..i {
                let lik = self.l(i, k);
                y[k] -= lik * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = y[new];
        }
    }
}
