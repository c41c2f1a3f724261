//! Dense numeric kernel: data tables, symmetric matrices, Jacobi
//! eigendecomposition, SPD inversion and log-determinants.
//!
//! Everything here is small-dimensional (a handful of variables), so the
//! routines favour accuracy and determinism over asymptotic speed.

use crate::error::{Error, Result};

/// Tolerance on |a_ij - a_ji| accepted when building a symmetric matrix.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as positive definite.
pub const PD_TOL: f64 = 1e-10;

const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// An observation table: `n_rows` observations by `n_cols` named variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
    column_names: Vec<String>,
}

impl DataMatrix {
    /// Builds a table from row-major values. All entries must be finite.
    pub fn new(n_rows: usize, column_names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n_cols = column_names.len();
        if n_rows * n_cols != values.len() {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite entry at row {}, column {}",
                pos / n_cols.max(1),
                column_names[pos % n_cols.max(1)]
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
            column_names,
        })
    }

    pub fn from_rows(column_names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = column_names.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                got: bad.len(),
            });
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), column_names, values)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, col)).collect()
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let values = rows
            .iter()
            .flat_map(|&r| self.row(r).iter().copied())
            .collect();
        Self {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            values,
            column_names: self.column_names.clone(),
        }
    }

    /// Applies `ln(1 + x)` elementwise. Entries must be > -1.
    pub fn log1p(&self) -> Result<Self> {
        let values = self.values.iter().map(|v| v.ln_1p()).collect();
        Self::new(self.n_rows, self.column_names.clone(), values)
    }
}

/// Mean and sample (n-1) standard deviation of one column.
fn column_moments(data: &DataMatrix, col: usize) -> (f64, f64) {
    let n = data.n_rows as f64;
    let mean = (0..data.n_rows).map(|r| data.get(r, col)).sum::<f64>() / n;
    let ss: f64 = (0..data.n_rows)
        .map(|r| {
            let d = data.get(r, col) - mean;
            d * d
        })
        .sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Centres every column and scales it to unit sample standard deviation.
pub fn standardize(data: &DataMatrix) -> Result<DataMatrix> {
    if data.n_rows < 2 {
        return Err(Error::validation(format!(
            "standardize needs at least 2 rows, got {}",
            data.n_rows
        )));
    }
    let moments: Vec<(f64, f64)> = (0..data.n_cols).map(|c| column_moments(data, c)).collect();
    for (c, &(mean, sd)) in moments.iter().enumerate() {
        if sd <= 1e-12 * (1.0 + mean.abs()) {
            return Err(Error::ZeroVariance(data.column_names[c].clone()));
        }
    }
    let mut values = data.values.clone();
    for row in values.chunks_mut(data.n_cols) {
        for (v, &(mean, sd)) in row.iter_mut().zip(&moments) {
            *v = (*v - mean) / sd;
        }
    }
    DataMatrix::new(data.n_rows, data.column_names.clone(), values)
}

/// A general dense row-major matrix, used for loadings and rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entrywise difference. Shapes must agree.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// A real symmetric matrix stored as its packed upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    upper: Vec<f64>,
}

impl SymMatrix {
    #[inline]
    fn offset(dim: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * dim - i * (i + 1) / 2 + j
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Builds from a function evaluated on the upper triangle (`i <= j`).
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                upper.push(f(i, j));
            }
        }
        Self { dim, upper }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Builds from a full square matrix, rejecting asymmetry beyond
    /// [`SYMMETRY_TOL`]. Mirrored entries are averaged.
    pub fn from_square(m: &Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let n = m.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if worst > SYMMETRY_TOL || worst.is_nan() {
            return Err(Error::NotSymmetric(worst));
        }
        Ok(Self::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)])))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_square(&Matrix::from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[Self::offset(self.dim, i, j)]
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.to_matrix().to_rows()
    }

    /// Simultaneous row/column permutation: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(perm[i], perm[j]))
    }

    fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.get(i, j);
                s += v * v;
            }
        }
        s.sqrt()
    }
}

/// Pearson correlation matrix of the columns, with sample normalisation.
pub fn correlation_matrix(data: &DataMatrix) -> Result<SymMatrix> {
    if data.n_rows < 3 {
        return Err(Error::validation(format!(
            "correlation needs at least 3 rows, got {}",
            data.n_rows
        )));
    }
    let z = standardize(data)?;
    let denom = (z.n_rows - 1) as f64;
    Ok(SymMatrix::from_fn(z.n_cols, |i, j| {
        if i == j {
            return 1.0;
        }
        let s: f64 = (0..z.n_rows).map(|r| z.get(r, i) * z.get(r, j)).sum();
        (s / denom).clamp(-1.0, 1.0)
    }))
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        Matrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)])
                .sum()
        })
    }
}

/// Flips `v` so that its largest-magnitude entry is positive; the first
/// index wins on ties.
pub(crate) fn canonical_sign(v: &[f64]) -> f64 {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).copied().unwrap_or(0.0) < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn eigen_sym(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a = m.to_matrix();
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let mut v = Matrix::identity(n);
    let threshold = JACOBI_REL_TOL * m.frobenius();

    let off_norm = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off_norm(&a) > threshold {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = v.column(src);
        let sign = canonical_sign(&col);
        for (i, x) in col.iter().enumerate() {
            vectors[(i, dst)] = sign * x;
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

fn smallest_eigenvalue(m: &SymMatrix) -> f64 {
    eigen_sym(m)
        .ok()
        .and_then(|e| e.values.last().copied())
        .unwrap_or(f64::NAN)
}

/// Lower Cholesky factor, or `None` if a pivot is not positive.
fn cholesky(m: &SymMatrix) -> Option<Matrix> {
    let n = m.dim();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Inverse of a symmetric positive definite matrix.
pub fn invert_spd(m: &SymMatrix) -> Result<SymMatrix> {
    let min_eig = smallest_eigenvalue(m);
    if !(min_eig > PD_TOL) {
        return Err(Error::NotPositiveDefinite(min_eig));
    }
    let l = cholesky(m).ok_or(Error::NotPositiveDefinite(min_eig))?;
    let n = m.dim();
    // Solve L Lᵀ X = I column by column.
    let mut inv = Matrix::zeros(n, n);
    let mut y = vec![0.0; n];
    for col in 0..n {
        for i in 0..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[(k, i)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    Ok(SymMatrix::from_fn(n, |i, j| {
        0.5 * (inv[(i, j)] + inv[(j, i)])
    }))
}

/// Natural log of the determinant of a positive definite matrix.
pub fn log_determinant(m: &SymMatrix) -> Result<f64> {
    match cholesky(m) {
        Some(l) => Ok((0..m.dim()).map(|i| 2.0 * l[(i, i)].ln()).sum()),
        None => Err(Error::NotPositiveDefinite(smallest_eigenvalue(m))),
    }
}
