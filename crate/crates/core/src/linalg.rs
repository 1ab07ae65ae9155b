//! Dense square matrices and a cyclic Jacobi eigensolver for the symmetric case.
//!
//! The matrices handled here are small (one row per defender), so the solver
//! favours robustness over speed: plane rotations are applied until the
//! off-diagonal Frobenius norm drops below `1e-12 · ‖A‖_F`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LinalgError;

/// Absolute tolerance on `|a_ij - a_ji|` for a matrix to count as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

const JACOBI_RELATIVE_TOLERANCE: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Square row-major matrix of `f64`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds a matrix from rows; every row must have as many entries as there are rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LinalgError::NotSquare {
                    row: i,
                    len: row.len(),
                    expected: n,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// First `(i, j)` with `|a_ij - a_ji| > tol`, scanning the upper triangle row by row.
    pub fn first_asymmetry(&self, tol: f64) -> Option<(usize, usize)> {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.first_asymmetry(tol).is_none()
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scaled(&self, k: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// Eigen-decomposition `A = Q Λ Qᵀ` with eigenvalues ascending and `Q`'s columns matching.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Matrix,
}

impl SymmetricEigen {
    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let s = (0..n)
                    .map(|k| self.vectors.get(i, k) * self.values[k] * self.vectors.get(j, k))
                    .sum();
                out.set(i, j, s);
            }
        }
        out
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.values.len())
            .map(|i| self.vectors.get(i, k))
            .collect()
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>, LinalgError> {
    symmetric_eigen(a).map(|e| e.values)
}

/// Full eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen, LinalgError> {
    if let Some((i, j)) = a.first_asymmetry(SYMMETRY_TOLERANCE) {
        return Err(LinalgError::NotSymmetric {
            i,
            j,
            upper: a.get(i, j),
            lower: a.get(j, i),
        });
    }
    let n = a.dim();
    let mut work = a.clone();
    // symmetrize exactly so rotations act on a truly symmetric matrix
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (work.get(i, j) + work.get(j, i));
            work.set(i, j, v);
            work.set(j, i, v);
        }
    }
    let mut q = Matrix::identity(n);
    let threshold = JACOBI_RELATIVE_TOLERANCE * a.frobenius_norm();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&work) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                rotate(&mut work, &mut q, p, r);
            }
        }
    }
    if !converged && off_diagonal_norm(&work) > threshold {
        return Err(LinalgError::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| work.get(x, x).total_cmp(&work.get(y, y)));
    let values = order.iter().map(|&k| work.get(k, k)).collect();
    let mut vectors = Matrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, col, q.get(i, k));
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j) * a.get(i, j);
            }
        }
    }
    s.sqrt()
}

/// Annihilates `a[p][r]` with a plane rotation `J`, updating `a ← Jᵀ a J` and `q ← q J`.
fn rotate(a: &mut Matrix, q: &mut Matrix, p: usize, r: usize) {
    let apr = a.get(p, r);
    if apr == 0.0 {
        return;
    }
    let theta = (a.get(r, r) - a.get(p, p)) / (2.0 * apr);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.dim();

    for k in 0..n {
        let akp = a.get(k, p);
        let akr = a.get(k, r);
        a.set(k, p, c * akp - s * akr);
        a.set(k, r, s * akp + c * akr);
    }
    for k in 0..n {
        let apk = a.get(p, k);
        let ark = a.get(r, k);
        a.set(p, k, c * apk - s * ark);
        a.set(r, k, s * apk + c * ark);
    }
    a.set(p, r, 0.0);
    a.set(r, p, 0.0);

    for k in 0..n {
        let qkp = q.get(k, p);
        let qkr = q.get(k, r);
        q.set(k, p, c * qkp - s * qkr);
        q.set(k, r, s * qkp + c * qkr);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_k4() -> Matrix {
        let mut m = Matrix::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                m.set(i, j, if i == j { 3.0 } else { -1.0 });
            }
        }
        m
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn identity_spectrum() {
        let vals = symmetric_eigenvalues(&Matrix::identity(3)).unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn complete_graph_laplacian_spectrum() {
        // characteristic polynomial of L(K4) is λ(λ-4)³
        let vals = symmetric_eigenvalues(&laplacian_k4()).unwrap();
        assert_close(&vals, &[0.0, 4.0, 4.0, 4.0], 1e-12);
    }

    #[test]
    fn diagonal_sensing_matrix() {
        let vals = symmetric_eigenvalues(&Matrix::diagonal(&[1.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(vals, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[2,1],[1,2]] -> {1,3}
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eigen(&m).unwrap();
        assert_close(&e.values, &[1.0, 3.0], 1e-14);
        let v0 = e.vector(0);
        assert!((v0[0] + v0[1]).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        match symmetric_eigen(&m) {
            Err(LinalgError::NotSymmetric { i: 0, j: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0]]).is_err());
    }

    #[test]
    fn empty_and_zero_matrices() {
        assert!(symmetric_eigenvalues(&Matrix::zeros(0)).unwrap().is_empty());
        assert_eq!(
            symmetric_eigenvalues(&Matrix::zeros(2)).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn reconstruction_residual_is_small() {
        let m = Matrix::from_rows(&[
            vec![4.0, -1.0, 0.5, 0.0],
            vec![-1.0, 3.0, -2.0, 0.25],
            vec![0.5, -2.0, 5.0, -1.0],
            vec![0.0, 0.25, -1.0, 1.0],
        ])
        .unwrap();
        let e = symmetric_eigen(&m).unwrap();
        let diff = e.reconstruct().add(&m.scaled(-1.0));
        assert!(diff.frobenius_norm() <= 1e-9 * m.frobenius_norm());
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
