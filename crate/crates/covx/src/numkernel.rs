//! Dense complex linear algebra with tolerance-aware rank decisions.
//!
//! Everything downstream (representation decompositions, extremality tests,
//! the optimizer) is built on the types and operations here. All rank-like
//! decisions flow through a single relative threshold against the largest
//! singular or eigenvalue, so verdicts stay consistent across modules.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default relative threshold for rank decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MatError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (residual {residual:.3e} exceeds {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },
    #[error("invalid matrix data: {0}")]
    InvalidData(String),
}

/// Dense complex matrix, row-major semantics. Immutable value type: every
/// operation returns a fresh matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn from_dmatrix(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }

    /// Builds from a row-major slice of entries; `entries.len()` must equal
    /// `rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Result<Self, MatError> {
        if entries.len() != rows * cols {
            return Err(MatError::InvalidData(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, entries),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    /// Real-valued convenience constructor, row-major.
    pub fn from_real_row_slice(rows: usize, cols: usize, entries: &[f64]) -> Self {
        Self {
            inner: DMatrix::from_row_slice(
                rows,
                cols,
                &entries.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
            ),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    /// Diagonal matrix from complex entries.
    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { C64::ZERO })
    }

    /// Column vector as an `n x 1` matrix.
    pub fn col_vector(entries: &[C64]) -> Self {
        Self {
            inner: DMatrix::from_column_slice(entries.len(), 1, entries),
        }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            inner: self.inner.map(|z| z.conj()),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            inner: &self.inner + &other.inner,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            inner: &self.inner - &other.inner,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            inner: self.inner.map(|z| z * s),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self {
            inner: &self.inner * &other.inner,
        }
    }

    /// Kronecker product, left factor major.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.kronecker(&other.inner),
        }
    }

    pub fn trace(&self) -> C64 {
        self.inner.diagonal().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value).
    pub fn opnorm(&self) -> f64 {
        if self.rows() == 0 || self.cols() == 0 {
            return 0.0;
        }
        self.inner
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Hilbert-Schmidt inner product `Tr[self^dag other]`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let residual = self.sub(&self.dagger()).frobenius_norm();
        residual <= tol * self.frobenius_norm().max(1.0)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol.max(1e-12) * 1e3) {
            return false;
        }
        let eigs = hermitian_eigenvalues(self);
        let scale = eigs.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
        eigs.iter().all(|&l| l >= -tol * scale)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows();
        let residual = self
            .dagger()
            .matmul(self)
            .sub(&Self::identity(n))
            .frobenius_norm();
        residual <= tol * (n as f64)
    }

    /// Symmetrized copy `(M + M^dag)/2`.
    pub fn hermitian_part(&self) -> Self {
        self.add(&self.dagger()).scale_re(0.5)
    }
}

/// Ordered factorization of a tensor-product space; the product of the
/// factor dimensions must equal the matrix dimension it is used with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorShape {
    factor_dims: Vec<usize>,
}

impl TensorShape {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self, MatError> {
        if factor_dims.is_empty() || factor_dims.iter().any(|&d| d == 0) {
            return Err(MatError::InvalidData(
                "tensor shape factors must be positive".into(),
            ));
        }
        Ok(Self { factor_dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }
}

/// Partial trace over the factor indices in `traced`; the result acts on the
/// kept factors in their original order. `Tr[result] = Tr[m]`.
pub fn partial_trace(
    m: &ComplexMatrix,
    shape: &TensorShape,
    traced: &[usize],
) -> Result<ComplexMatrix, MatError> {
    if !m.is_square() {
        return Err(MatError::DimensionMismatch(
            "partial trace requires a square matrix".into(),
        ));
    }
    if m.rows() != shape.total_dim() {
        return Err(MatError::DimensionMismatch(format!(
            "matrix dimension {} does not match tensor shape product {}",
            m.rows(),
            shape.total_dim()
        )));
    }
    if traced.iter().any(|&f| f >= shape.num_factors()) {
        return Err(MatError::DimensionMismatch(
            "traced factor index out of range".into(),
        ));
    }
    let dims = shape.dims();
    let nf = dims.len();
    let kept: Vec<usize> = (0..nf).filter(|f| !traced.contains(f)).collect();
    let kept_dim: usize = kept.iter().map(|&f| dims[f]).product();
    let traced_dim: usize = traced.iter().map(|&f| dims[f]).product();

    // strides for the row-major multi-index
    let mut strides = vec![1usize; nf];
    for f in (0..nf.saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    let unpack = |mut lin: usize, factors: &[usize]| -> usize {
        // maps a linear index over `factors` (in order) to the full-space offset
        let mut off = 0;
        for &f in factors.iter().rev() {
            off += (lin % dims[f]) * strides[f];
            lin /= dims[f];
        }
        off
    };

    let mut out = DMatrix::<C64>::zeros(kept_dim, kept_dim);
    for r in 0..kept_dim {
        let r_off = unpack(r, &kept);
        for c in 0..kept_dim {
            let c_off = unpack(c, &kept);
            let mut acc = C64::ZERO;
            for t in 0..traced_dim {
                let t_off = unpack(t, traced);
                acc += m.get(r_off + t_off, c_off + t_off);
            }
            out[(r, c)] = acc;
        }
    }
    Ok(ComplexMatrix::from_dmatrix(out))
}

/// Row-major vectorization `|X> = (X (x) I)|I>`: `vec[a*cols + b] = X[a,b]`.
pub fn op_to_vec(x: &ComplexMatrix) -> ComplexMatrix {
    let (r, c) = (x.rows(), x.cols());
    ComplexMatrix::from_fn(r * c, 1, |i, _| x.get(i / c, i % c))
}

/// Inverse of [`op_to_vec`].
pub fn vec_to_op(v: &ComplexMatrix, rows: usize, cols: usize) -> Result<ComplexMatrix, MatError> {
    if v.cols() != 1 || v.rows() != rows * cols {
        return Err(MatError::DimensionMismatch(format!(
            "expected a {}x1 vector, got {}x{}",
            rows * cols,
            v.rows(),
            v.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |a, b| {
        v.get(a * cols + b, 0)
    }))
}

/// The unnormalized maximally entangled vector `|I> = sum_l |l>|l>` on
/// `C^n (x) C^n`, as an `n^2 x 1` matrix.
pub fn max_entangled_vec(n: usize) -> ComplexMatrix {
    op_to_vec(&ComplexMatrix::identity(n))
}

/// Singular values (descending) of the matrix whose columns are the
/// vectorized inputs.
pub fn span_singular_values(ops: &[ComplexMatrix]) -> Vec<f64> {
    if ops.is_empty() {
        return Vec::new();
    }
    let n = ops[0].rows() * ops[0].cols();
    let mut stacked = DMatrix::<C64>::zeros(n, ops.len());
    for (j, op) in ops.iter().enumerate() {
        let v = op_to_vec(op);
        for i in 0..n {
            stacked[(i, j)] = v.get(i, 0);
        }
    }
    let mut svals: Vec<f64> = stacked.singular_values().iter().cloned().collect();
    svals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    svals
}

/// Dimension of the linear span of the inputs: singular values counted above
/// `tol * sigma_max`. Invariant under invertible recombination of the list.
pub fn span_dimension(ops: &[ComplexMatrix], tol: f64) -> usize {
    let svals = span_singular_values(ops);
    let smax = svals.first().cloned().unwrap_or(0.0);
    svals.iter().filter(|&&s| s > tol * smax).count()
}

fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    m.hermitian_part()
        .inner
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect()
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending with the
/// matching unitary of column eigenvectors.
pub fn hermitian_eig(
    m: &ComplexMatrix,
    tol: f64,
) -> Result<(Vec<f64>, ComplexMatrix), MatError> {
    if !m.is_square() {
        return Err(MatError::DimensionMismatch(
            "eigendecomposition requires a square matrix".into(),
        ));
    }
    let residual = m.sub(&m.dagger()).frobenius_norm();
    let scale = m.frobenius_norm().max(1.0);
    if residual > tol * scale {
        return Err(MatError::NotHermitian {
            residual: residual / scale,
            tol,
        });
    }
    let eig = m.hermitian_part().inner.symmetric_eigen();
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Singular value decomposition `M = U diag(sigma) V^dag`; singular values
/// descending.
pub fn svd(m: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let svd = m.inner.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let vt = svd.v_t.expect("svd requested v_t");
    (
        ComplexMatrix::from_dmatrix(u),
        svd.singular_values.iter().cloned().collect(),
        ComplexMatrix::from_dmatrix(vt.adjoint()),
    )
}

/// Canonical PSD factorization `M = X^dag X` with `rows(X)` equal to the
/// numerical rank of `M` and the row space of `X` spanning `Supp(M)`.
/// Eigenvalues at or below `tol * lambda_max` are dropped; eigenvalues below
/// `-tol * lambda_max` are a contract violation.
pub fn psd_factor(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, MatError> {
    let (values, vectors) = hermitian_eig(m, tol.max(1e-12) * 1e3)?;
    let scale = values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if let Some(&min) = values
        .iter()
        .filter(|&&l| l < -tol * scale.max(1.0))
        .next()
    {
        return Err(MatError::NotPsd { min_eig: min });
    }
    let n = m.rows();
    let kept: Vec<usize> = (0..n).filter(|&i| values[i] > tol * scale).collect();
    let mut x = DMatrix::<C64>::zeros(kept.len(), n);
    for (row, &i) in kept.iter().enumerate() {
        let s = values[i].sqrt();
        for col in 0..n {
            x[(row, col)] = vectors.get(col, i).conj() * C64::new(s, 0.0);
        }
    }
    Ok(ComplexMatrix::from_dmatrix(x))
}

/// Numerical rank of a Hermitian PSD matrix under the relative threshold.
pub fn psd_rank(m: &ComplexMatrix, tol: f64) -> Result<usize, MatError> {
    Ok(psd_factor(m, tol)?.rows())
}

// ---------------------------------------------------------------------------
// JSON wire format: {"rows": n, "cols": m, "data": [[re, im], ...]} row-major.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    data: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut data = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.get(i, j);
                data.push(vec![z.re, z.im]);
            }
        }
        MatrixWire {
            rows: self.rows(),
            cols: self.cols(),
            data,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(deserializer)?;
        if wire.data.len() != wire.rows * wire.cols {
            return Err(D::Error::custom(format!(
                "ragged matrix data: expected {} entries, got {}",
                wire.rows * wire.cols,
                wire.data.len()
            )));
        }
        let mut entries = Vec::with_capacity(wire.data.len());
        for (idx, pair) in wire.data.iter().enumerate() {
            if pair.len() != 2 {
                return Err(D::Error::custom(format!(
                    "ragged matrix data: entry {idx} has {} components, expected [re, im]",
                    pair.len()
                )));
            }
            entries.push(C64::new(pair[0], pair[1]));
        }
        ComplexMatrix::from_row_slice(wire.rows, wire.cols, &entries)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}
