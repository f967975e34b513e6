//! Fixed-capacity dense matrices (up to 6×6) with LU determinant, Gauss-Jordan
//! inversion and a rank-revealing solver.
//!
//! Everything here is sized for the reduced field equations: the 6×6 system
//! matrix, its 5×5 minors and the 3×3 frame blocks. Storage is an inline
//! array, so matrices are `Copy` and never allocate.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use thiserror::Error;

/// Largest supported dimension.
pub const MAX_DIM: usize = 6;

/// Default relative pivot threshold; multiplied by the largest row norm.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix dimension {rows}x{cols} exceeds the supported {MAX_DIM}x{MAX_DIM}")]
    TooLarge { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular: pivot {pivot:e} at column {column} below threshold {threshold:e}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("inconsistent system: residual {violation:e} exceeds {threshold:e}")]
    Inconsistent { violation: f64, threshold: f64 },
}

/// Dense row-major matrix with at most [`MAX_DIM`] rows and columns.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: [[f64; MAX_DIM]; MAX_DIM],
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self, LinalgError> {
        if rows > MAX_DIM || cols > MAX_DIM {
            return Err(LinalgError::TooLarge { rows, cols });
        }
        Ok(Self {
            rows,
            cols,
            data: [[0.0; MAX_DIM]; MAX_DIM],
        })
    }

    pub fn identity(n: usize) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i][i] = 1.0;
        }
        Ok(m)
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(diag.len(), diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            m.data[i][i] = d;
        }
        Ok(m)
    }

    /// Builds a matrix from row slices. All rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            m.data[i][..cols].copy_from_slice(row);
        }
        Ok(m)
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i][..self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i][j]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self {
            rows: self.cols,
            cols: self.rows,
            data: [[0.0; MAX_DIM]; MAX_DIM],
        };
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j][i] = self.data[i][j];
            }
        }
        t
    }

    /// Copy with the listed columns removed, keeping the remaining order.
    pub fn without_columns(&self, drop: &[usize]) -> Self {
        let keep: Vec<usize> = (0..self.cols).filter(|j| !drop.contains(j)).collect();
        self.select(&(0..self.rows).collect::<Vec<_>>(), &keep)
    }

    /// Submatrix picking the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self {
            rows: rows.len(),
            cols: cols.len(),
            data: [[0.0; MAX_DIM]; MAX_DIM],
        };
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                m.data[i][j] = self.data[r][c];
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols)?;
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                out.data[i][j] = (0..self.cols).map(|k| self.data[i][k] * rhs.data[k][j]).sum();
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.rows)
            .flat_map(|i| self.row(i).iter().copied())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest Euclidean row norm; the scale for pivot thresholds.
    pub fn max_row_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        (0..self.rows).all(|i| self.row(i).iter().all(|v| v.is_finite()))
    }

    /// Determinant by LU factorisation with partial pivoting.
    pub fn det(&self) -> Result<f64, LinalgError> {
        self.require_square()?;
        let n = self.rows;
        let mut a = self.data;
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap_or(k);
            if a[p][k] == 0.0 {
                return Ok(0.0);
            }
            if p != k {
                a.swap(p, k);
                det = -det;
            }
            det *= a[k][k];
            for i in (k + 1)..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        Ok(det)
    }

    /// Inverse with the default pivot threshold.
    pub fn invert(&self) -> Result<Matrix, LinalgError> {
        self.invert_with_tol(DEFAULT_RANK_TOL)
    }

    /// Gauss-Jordan inverse. A pivot below `tol * max_row_norm` is reported as
    /// [`LinalgError::SingularMatrix`].
    pub fn invert_with_tol(&self, tol: f64) -> Result<Matrix, LinalgError> {
        self.require_square()?;
        let n = self.rows;
        let threshold = tol * self.max_row_norm().max(f64::MIN_POSITIVE);
        let mut a = self.data;
        let mut inv = Matrix::identity(n)?.data;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap_or(k);
            let pivot = a[p][k];
            if !(pivot.abs() > threshold) {
                return Err(LinalgError::SingularMatrix {
                    column: k,
                    pivot: pivot.abs(),
                    threshold,
                });
            }
            a.swap(p, k);
            inv.swap(p, k);
            let scale = 1.0 / a[k][k];
            for j in 0..n {
                a[k][j] *= scale;
                inv[k][j] *= scale;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[i][k];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[i][j] -= f * a[k][j];
                    inv[i][j] -= f * inv[k][j];
                }
            }
        }
        Ok(Matrix {
            rows: n,
            cols: n,
            data: inv,
        })
    }

    /// Rank-revealing solve of `A x = b`.
    ///
    /// Columns are eliminated left to right with row pivoting; a column whose
    /// best remaining pivot falls below `tol * max_row_norm` becomes a free
    /// variable. The particular solution has every free variable set to zero
    /// and the nullspace basis has one vector per free column.
    pub fn solve_ranked(&self, b: &[f64], tol: f64) -> Result<RankedSolution, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "right-hand side of length {} against {} rows",
                b.len(),
                self.rows
            )));
        }
        let (m, n) = (self.rows, self.cols);
        let row_scale = self.max_row_norm();
        let threshold = tol * row_scale.max(f64::MIN_POSITIVE);
        let mut a = self.data;
        let mut rhs = [0.0; MAX_DIM];
        rhs[..m].copy_from_slice(b);

        let mut pivot_columns = Vec::new();
        let mut free_columns = Vec::new();
        let mut r = 0;
        for c in 0..n {
            if r == m {
                free_columns.push(c);
                continue;
            }
            let p = (r..m)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap_or(r);
            if !(a[p][c].abs() > threshold) {
                free_columns.push(c);
                continue;
            }
            a.swap(p, r);
            rhs.swap(p, r);
            let s = 1.0 / a[r][c];
            for j in 0..n {
                a[r][j] *= s;
            }
            rhs[r] *= s;
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = a[i][c];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[i][j] -= f * a[r][j];
                }
                rhs[i] -= f * rhs[r];
            }
            pivot_columns.push(c);
            r += 1;
        }

        let mut particular = vec![0.0; n];
        for (row, &c) in pivot_columns.iter().enumerate() {
            particular[c] = rhs[row];
        }
        let nullspace_basis = free_columns
            .iter()
            .map(|&f| {
                let mut v = vec![0.0; n];
                v[f] = 1.0;
                for (row, &c) in pivot_columns.iter().enumerate() {
                    v[c] = -a[row][f];
                }
                v
            })
            .collect();

        let residual = norm(&sub(&self.mul_vec(&particular)?, b));
        let consistency = tol * (1.0 + norm(b) + row_scale * norm(&particular));
        if !(residual <= consistency) {
            return Err(LinalgError::Inconsistent {
                violation: residual,
                threshold: consistency,
            });
        }

        Ok(RankedSolution {
            rank: pivot_columns.len(),
            particular,
            nullspace_basis,
            pivot_columns,
        })
    }

    /// Rank with the given relative pivot threshold.
    pub fn rank(&self, tol: f64) -> usize {
        let zero = vec![0.0; self.rows];
        self.solve_ranked(&zero, tol).map_or(0, |s| s.rank)
    }

    fn require_square(&self) -> Result<(), LinalgError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i][j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i][j]
    }
}

impl Mul for Matrix {
    type Output = Matrix;

    /// Panics on mismatched dimensions; use [`Matrix::matmul`] to get an error.
    fn mul(self, rhs: Matrix) -> Matrix {
        self.matmul(&rhs).expect("matrix dimensions must agree")
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Output of [`Matrix::solve_ranked`].
#[derive(Debug, Clone, PartialEq)]
pub struct RankedSolution {
    pub rank: usize,
    pub particular: Vec<f64>,
    pub nullspace_basis: Vec<Vec<f64>>,
    pub pivot_columns: Vec<usize>,
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn det_examples() {
        assert_eq!(Matrix::identity(3).unwrap().det().unwrap(), 1.0);
        assert!(close(Matrix::diagonal(&[1.0, 1.0, 2.0]).unwrap().det().unwrap(), 2.0, 1e-15));
        let m = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(m.det().unwrap(), -1.0);
    }

    #[test]
    fn invert_examples() {
        let i3 = Matrix::identity(3).unwrap();
        assert_eq!(i3.invert().unwrap(), i3);
        let d = Matrix::diagonal(&[2.0, 4.0]).unwrap().invert().unwrap();
        assert_eq!(d, Matrix::diagonal(&[0.5, 0.25]).unwrap());
    }

    #[test]
    fn invert_rejects_singular() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(m.invert(), Err(LinalgError::SingularMatrix { .. })));
    }

    #[test]
    fn solve_ranked_examples() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let s = a.solve_ranked(&[1.0, 0.0], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(s.rank, 1);
        assert_eq!(s.particular, vec![1.0, 0.0]);
        assert_eq!(s.nullspace_basis, vec![vec![0.0, 1.0]]);
        assert_eq!(s.pivot_columns, vec![0]);

        let s = Matrix::identity(3)
            .unwrap()
            .solve_ranked(&[1.0, 2.0, 3.0], DEFAULT_RANK_TOL)
            .unwrap();
        assert_eq!(s.rank, 3);
        assert_eq!(s.particular, vec![1.0, 2.0, 3.0]);
        assert!(s.nullspace_basis.is_empty());
    }

    #[test]
    fn solve_ranked_reports_inconsistency() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        match a.solve_ranked(&[1.0, 1e-3], DEFAULT_RANK_TOL) {
            Err(LinalgError::Inconsistent { violation, .. }) => assert!(close(violation, 1e-3, 1e-15)),
            other => panic!("expected Inconsistent, got {other:?}"),
        }
    }

    #[test]
    fn rectangular_nullspace() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        let s = a.solve_ranked(&[6.0], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(s.rank, 1);
        assert_eq!(s.nullspace_basis.len(), 2);
        for v in &s.nullspace_basis {
            assert!(a.mul_vec(v).unwrap()[0].abs() < 1e-15);
        }
    }

    #[test]
    fn too_large_is_rejected() {
        assert!(matches!(Matrix::zeros(7, 2), Err(LinalgError::TooLarge { .. })));
    }

    #[test]
    fn select_and_drop_columns() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let d = m.without_columns(&[1]);
        assert_eq!(d, Matrix::from_rows(&[[1.0, 3.0], [4.0, 6.0]]).unwrap());
        let s = m.select(&[1], &[2, 0]);
        assert_eq!(s, Matrix::from_rows(&[[6.0, 4.0]]).unwrap());
    }
}
