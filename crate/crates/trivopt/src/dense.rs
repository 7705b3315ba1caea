//! Dense double-precision linear algebra at desk scale (n ≤ ~512).
//!
//! [`Matrix`] is the universal numeric carrier for the whole crate: a
//! row-major rectangular array of finite `f64` values. The factorisations
//! shipped here are deliberately simple and unconditionally convergent:
//! Householder QR with a non-negative R diagonal, cyclic Jacobi for the
//! symmetric eigenproblem, one-sided Jacobi for the SVD, and partial-pivot
//! LU for linear solves.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Errors for data-dependent failures of the dense kernel.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DenseError {
    /// `solve` hit a pivot below the singularity threshold.
    #[error("matrix is singular to working precision at pivot {pivot_index} (|pivot| = {pivot_magnitude:.3e})")]
    Singular {
        pivot_index: usize,
        pivot_magnitude: f64,
    },
    /// `sym_eig` was handed a matrix that is not symmetric within tolerance.
    #[error("matrix is not symmetric: asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },
}

/// Dense row-major matrix of finite `f64` entries.
///
/// Values are immutable once constructed and safe to share across threads.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:+.6e}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    /// Builds a matrix from row-major data.
    ///
    /// # Panics
    /// Panics if `data.len() != rows * cols`, if a dimension is zero, or if
    /// any entry is NaN or infinite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(
            data.len(),
            rows * cols,
            "entry count {} does not match {}x{}",
            data.len(),
            rows,
            cols
        );
        assert!(
            data.iter().all(|x| x.is_finite()),
            "matrix entries must be finite"
        );
        Matrix { rows, cols, data }
    }

    /// Zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix entrywise from a closure.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix::new(rows, cols, data)
    }

    /// Builds a matrix from slices of rows; handy for literals in tests.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        assert!(!rows.is_empty(), "need at least one row");
        let cols = rows[0].len();
        assert!(
            rows.iter().all(|r| r.len() == cols),
            "all rows must have equal length"
        );
        Matrix::new(
            rows.len(),
            cols,
            rows.iter().flat_map(|r| r.iter().copied()).collect(),
        )
    }

    /// Square diagonal matrix from its diagonal entries.
    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = entries[i];
        }
        m
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

    /// Row-major entry slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Transpose.
    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn frob(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius inner product `tr(selfᵀ other)`.
    pub fn dot(&self, other: &Matrix) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "dot requires equal shapes"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Entrywise scaling.
    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::new(
            self.rows,
            self.cols,
            self.data.iter().map(|x| x * s).collect(),
        )
    }

    /// Entrywise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix::new(self.rows, self.cols, self.data.iter().map(|&x| f(x)).collect())
    }

    /// Standard matrix product.
    ///
    /// # Panics
    /// Panics with a shape error if `self.cols != rhs.rows`.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "shape error: cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let a_row = &self.data[i * k..(i + 1) * k];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (p, &a_ip) in a_row.iter().enumerate() {
                if a_ip == 0.0 {
                    continue;
                }
                let b_row = &rhs.data[p * n..(p + 1) * n];
                for (o, &b_pj) in out_row.iter_mut().zip(b_row) {
                    *o += a_ip * b_pj;
                }
            }
        }
        Matrix {
            rows: m,
            cols: n,
            data: out,
        }
    }

    /// Thin Householder QR with a non-negative R diagonal.
    ///
    /// Returns `(Q, R)` with `QᵀQ = I`, `R` upper triangular, `QR = self`.
    /// Rank-deficient input is permitted; `R` may then carry zero diagonal
    /// entries.
    ///
    /// # Panics
    /// Panics if `rows < cols`.
    pub fn qr(&self) -> (Matrix, Matrix) {
        assert!(
            self.rows >= self.cols,
            "qr requires rows >= cols, got {}x{}",
            self.rows,
            self.cols
        );
        let (m, n) = (self.rows, self.cols);
        let mut r = self.clone();
        // Householder vectors, one per column, stored dense.
        let mut vs: Vec<Vec<f64>> = Vec::with_capacity(n);
        for j in 0..n {
            // Build the reflector for column j acting on rows j..m.
            let mut v = vec![0.0; m - j];
            let mut norm2 = 0.0;
            for i in j..m {
                let x = r.data[i * n + j];
                v[i - j] = x;
                norm2 += x * x;
            }
            let norm = norm2.sqrt();
            if norm > 0.0 {
                let alpha = if v[0] >= 0.0 { -norm } else { norm };
                v[0] -= alpha;
                let vnorm2: f64 = v.iter().map(|x| x * x).sum();
                if vnorm2 > 0.0 {
                    // Apply I - 2vvᵀ/‖v‖² to the trailing block of R.
                    for col in j..n {
                        let mut dotv = 0.0;
                        for i in j..m {
                            dotv += v[i - j] * r.data[i * n + col];
                        }
                        let coef = 2.0 * dotv / vnorm2;
                        for i in j..m {
                            r.data[i * n + col] -= coef * v[i - j];
                        }
                    }
                }
            }
            vs.push(v);
        }
        // Accumulate thin Q by applying the reflectors to I_{m×n} in reverse.
        let mut q = Matrix::zeros(m, n);
        for j in 0..n {
            q.data[j * n + j] = 1.0;
        }
        for j in (0..n).rev() {
            let v = &vs[j];
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            for col in 0..n {
                let mut dotv = 0.0;
                for i in j..m {
                    dotv += v[i - j] * q.data[i * n + col];
                }
                let coef = 2.0 * dotv / vnorm2;
                for i in j..m {
                    q.data[i * n + col] -= coef * v[i - j];
                }
            }
        }
        // Zero the strict lower triangle of R and fix diagonal signs.
        for i in 1..n.min(m) {
            for jj in 0..i.min(n) {
                r.data[i * n + jj] = 0.0;
            }
        }
        let mut r_thin = Matrix::zeros(n, n);
        for i in 0..n {
            for jj in i..n {
                r_thin.data[i * n + jj] = r.data[i * n + jj];
            }
        }
        for j in 0..n {
            if r_thin.data[j * n + j] < 0.0 {
                for col in j..n {
                    r_thin.data[j * n + col] = -r_thin.data[j * n + col];
                }
                for i in 0..m {
                    q.data[i * n + j] = -q.data[i * n + j];
                }
            }
        }
        (q, r_thin)
    }

    /// Symmetric eigendecomposition by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues in ascending order and an orthogonal `V` with
    /// `self = V diag(λ) Vᵀ`. Sweeps run until the off-diagonal Frobenius
    /// mass drops below `1e-14 · ‖self‖_F`.
    ///
    /// # Errors
    /// [`DenseError::NotSymmetric`] if the input deviates from symmetry by
    /// more than `1e-10` relative.
    ///
    /// # Panics
    /// Panics if the input is not square.
    pub fn sym_eig(&self) -> Result<(Vec<f64>, Matrix), DenseError> {
        assert!(self.is_square(), "sym_eig requires a square matrix");
        let n = self.rows;
        let norm = self.frob();
        let asym = (self - &self.transpose()).frob();
        let tol = 1e-10 * norm.max(1.0);
        if asym > tol {
            return Err(DenseError::NotSymmetric {
                asymmetry: asym,
                tolerance: tol,
            });
        }
        let mut a = self.clone();
        // Symmetrise exactly so rotations preserve symmetry bit-for-bit.
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (a.data[i * n + j] + a.data[j * n + i]);
                a.data[i * n + j] = avg;
                a.data[j * n + i] = avg;
            }
        }
        let mut v = Matrix::identity(n);
        let target = 1e-14 * norm;
        for _sweep in 0..200 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += 2.0 * a.data[i * n + j] * a.data[i * n + j];
                }
            }
            if off.sqrt() <= target {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.data[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a.data[p * n + p];
                    let aqq = a.data[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    // Rows/columns p and q of A.
                    for k in 0..n {
                        let akp = a.data[k * n + p];
                        let akq = a.data[k * n + q];
                        a.data[k * n + p] = c * akp - s * akq;
                        a.data[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a.data[p * n + k];
                        let aqk = a.data[q * n + k];
                        a.data[p * n + k] = c * apk - s * aqk;
                        a.data[q * n + k] = s * apk + c * aqk;
                    }
                    a.data[p * n + q] = 0.0;
                    a.data[q * n + p] = 0.0;
                    for k in 0..n {
                        let vkp = v.data[k * n + p];
                        let vkq = v.data[k * n + q];
                        v.data[k * n + p] = c * vkp - s * vkq;
                        v.data[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a.data[i * n + i].partial_cmp(&a.data[j * n + j]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| a.data[i * n + i]).collect();
        let mut vs = Matrix::zeros(n, n);
        for (newj, &oldj) in order.iter().enumerate() {
            for i in 0..n {
                vs.data[i * n + newj] = v.data[i * n + oldj];
            }
        }
        Ok((eigenvalues, vs))
    }

    /// Thin singular value decomposition by one-sided Jacobi.
    ///
    /// Returns `(U, σ, V)` with `self = U diag(σ) Vᵀ`, singular values
    /// non-negative in descending order, and orthonormal columns in `U`, `V`.
    pub fn svd(&self) -> (Matrix, Vec<f64>, Matrix) {
        if self.rows < self.cols {
            let (u, s, v) = self.transpose().svd();
            return (v, s, u);
        }
        let (m, n) = (self.rows, self.cols);
        let mut w = self.clone();
        let mut v = Matrix::identity(n);
        let col_dot = |w: &Matrix, a: usize, b: usize| -> f64 {
            let mut s = 0.0;
            for i in 0..m {
                s += w.data[i * n + a] * w.data[i * n + b];
            }
            s
        };
        for _sweep in 0..200 {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let app = col_dot(&w, p, p);
                    let aqq = col_dot(&w, q, q);
                    let apq = col_dot(&w, p, q);
                    if apq.abs() <= 1e-15 * (app * aqq).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for i in 0..m {
                        let wip = w.data[i * n + p];
                        let wiq = w.data[i * n + q];
                        w.data[i * n + p] = c * wip - s * wiq;
                        w.data[i * n + q] = s * wip + c * wiq;
                    }
                    for i in 0..n {
                        let vip = v.data[i * n + p];
                        let viq = v.data[i * n + q];
                        v.data[i * n + p] = c * vip - s * viq;
                        v.data[i * n + q] = s * vip + c * viq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sigma: Vec<f64> = (0..n).map(|j| col_dot(&w, j, j).sqrt()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap());
        let scale = self.frob();
        let mut u = Matrix::zeros(m, n);
        let mut v_sorted = Matrix::zeros(n, n);
        let mut sigma_sorted = vec![0.0; n];
        for (newj, &oldj) in order.iter().enumerate() {
            sigma_sorted[newj] = sigma[oldj];
            for i in 0..n {
                v_sorted.data[i * n + newj] = v.data[i * n + oldj];
            }
        }
        sigma = sigma_sorted;
        // Normalised columns become U; numerically-zero columns are replaced
        // by an orthonormal completion so U always has orthonormal columns.
        for (newj, &oldj) in order.iter().enumerate() {
            let s = sigma[newj];
            if s > 1e-14 * scale.max(1.0) {
                for i in 0..m {
                    u.data[i * n + newj] = w.data[i * n + oldj] / s;
                }
            }
        }
        for j in 0..n {
            let norm2: f64 = (0..m).map(|i| u.data[i * n + j].powi(2)).sum();
            if norm2 > 0.5 {
                continue;
            }
            // Gram-Schmidt a coordinate vector against the existing columns.
            'candidates: for cand in 0..m {
                let mut col = vec![0.0; m];
                col[cand] = 1.0;
                for jj in 0..n {
                    if jj == j {
                        continue;
                    }
                    let d: f64 = (0..m).map(|i| u.data[i * n + jj] * col[i]).sum();
                    for i in 0..m {
                        col[i] -= d * u.data[i * n + jj];
                    }
                }
                let nrm: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
                if nrm > 1e-3 {
                    for i in 0..m {
                        u.data[i * n + j] = col[i] / nrm;
                    }
                    break 'candidates;
                }
            }
        }
        (u, sigma, v_sorted)
    }

    /// Solves `self · X = B` by partial-pivot LU.
    ///
    /// # Errors
    /// [`DenseError::Singular`] carrying the pivot index when a pivot falls
    /// below `1e-13 · ‖self‖_F`.
    ///
    /// # Panics
    /// Panics if `self` is not square or `B` has mismatched rows.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix, DenseError> {
        assert!(self.is_square(), "solve requires a square matrix");
        assert_eq!(
            self.rows, b.rows,
            "shape error: solve left side is {}x{} but right side has {} rows",
            self.rows, self.cols, b.rows
        );
        let n = self.rows;
        let nb = b.cols;
        let threshold = 1e-13 * self.frob();
        let mut lu = self.clone();
        let mut x = b.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut piv = k;
            let mut pmax = lu.data[perm[k] * n + k].abs();
            for i in (k + 1)..n {
                let v = lu.data[perm[i] * n + k].abs();
                if v > pmax {
                    pmax = v;
                    piv = i;
                }
            }
            if pmax <= threshold {
                return Err(DenseError::Singular {
                    pivot_index: k,
                    pivot_magnitude: pmax,
                });
            }
            perm.swap(k, piv);
            let pk = perm[k];
            let pivot = lu.data[pk * n + k];
            for i in (k + 1)..n {
                let pi = perm[i];
                let factor = lu.data[pi * n + k] / pivot;
                lu.data[pi * n + k] = factor;
                for j in (k + 1)..n {
                    lu.data[pi * n + j] -= factor * lu.data[pk * n + j];
                }
                for j in 0..nb {
                    x.data[pi * nb + j] -= factor * x.data[pk * nb + j];
                }
            }
        }
        // Back substitution in permuted order.
        let mut out = Matrix::zeros(n, nb);
        for j in 0..nb {
            for i in (0..n).rev() {
                let pi = perm[i];
                let mut acc = x.data[pi * nb + j];
                for kk in (i + 1)..n {
                    acc -= lu.data[pi * n + kk] * out.data[kk * nb + j];
                }
                out.data[i * nb + j] = acc / lu.data[pi * n + i];
            }
        }
        Ok(out)
    }

    /// Determinant via partial-pivot LU; returns 0 for singular input.
    pub fn det(&self) -> f64 {
        assert!(self.is_square(), "det requires a square matrix");
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut piv = k;
            let mut pmax = lu.data[perm[k] * n + k].abs();
            for i in (k + 1)..n {
                let v = lu.data[perm[i] * n + k].abs();
                if v > pmax {
                    pmax = v;
                    piv = i;
                }
            }
            if pmax == 0.0 {
                return 0.0;
            }
            if piv != k {
                perm.swap(k, piv);
                sign = -sign;
            }
            let pk = perm[k];
            let pivot = lu.data[pk * n + k];
            for i in (k + 1)..n {
                let pi = perm[i];
                let factor = lu.data[pi * n + k] / pivot;
                for j in (k + 1)..n {
                    lu.data[pi * n + j] -= factor * lu.data[pk * n + j];
                }
            }
        }
        let mut det = sign;
        for k in 0..n {
            det *= lu.data[perm[k] * n + k];
        }
        det
    }

    /// Extracts the contiguous block with top-left corner `(row, col)`.
    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Matrix {
        assert!(
            row + rows <= self.rows && col + cols <= self.cols,
            "block out of range"
        );
        Matrix::from_fn(rows, cols, |i, j| self.data[(row + i) * self.cols + (col + j)])
    }

    /// Writes `block` into a copy of `self` at `(row, col)`.
    pub fn with_block(&self, row: usize, col: usize, block: &Matrix) -> Matrix {
        assert!(
            row + block.rows <= self.rows && col + block.cols <= self.cols,
            "block out of range"
        );
        let mut out = self.clone();
        for i in 0..block.rows {
            for j in 0..block.cols {
                out.data[(row + i) * self.cols + (col + j)] = block.data[i * block.cols + j];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape error: cannot add {}x{} and {}x{}",
            self.rows,
            self.cols,
            rhs.rows,
            rhs.cols
        );
        Matrix::new(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape error: cannot subtract {}x{} and {}x{}",
            self.rows,
            self.cols,
            rhs.rows,
            rhs.cols
        );
        Matrix::new(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}
