//! Dense complex matrices, Hermitian structure, realification and numerical rank.
//!
//! Everything downstream (Lie closures, propagators, density matrices) is carried
//! by [`ComplexMatrix`]. Operators that must be Hermitian are wrapped in
//! [`HermitianOperator`], which rejects inputs that fail the Hermiticity check
//! instead of symmetrizing them.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative Frobenius tolerance for Hermitian / skew-Hermitian checks.
pub const TOL_HERM: f64 = 1e-10;
/// Default relative threshold for [`numerical_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Bound on `‖U†U − I‖_F` for computed propagators.
pub const TOL_UNITARY: f64 = 1e-9;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Dense square complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::EmptyInput("matrix of dimension 0"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self(m))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Real diagonal matrix.
    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self(DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(d[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Builds from row-major real and imaginary parts.
    pub fn from_re_im(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: im.len(),
            });
        }
        for row in re.iter().chain(im) {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |r, c| C64::new(re[r][c], im[r][c])))
    }

    /// Builds from a row-major slice of complex entries.
    pub fn from_row_slice(n: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    /// Row-major real parts.
    pub fn re_rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|r| r.iter().map(|z| z.re).collect())
            .collect()
    }

    /// Row-major imaginary parts.
    pub fn im_rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|r| r.iter().map(|z| z.im).collect())
            .collect()
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.0 * v
    }

    /// `‖A − A†‖_F / ‖A‖_F`, zero for the zero matrix.
    pub fn hermitian_residual(&self) -> f64 {
        relative(&(&self.0 - self.0.adjoint()), &self.0)
    }

    /// `‖A + A†‖_F / ‖A‖_F`, zero for the zero matrix.
    pub fn skew_hermitian_residual(&self) -> f64 {
        relative(&(&self.0 + self.0.adjoint()), &self.0)
    }

    pub fn is_skew_hermitian(&self, tol: f64) -> bool {
        self.skew_hermitian_residual() <= tol
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        frob(&(self.0.adjoint() * &self.0 - DMatrix::<C64>::identity(n, n)))
    }

    pub fn distance(&self, other: &Self) -> f64 {
        frob(&(&self.0 - &other.0))
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut k: u64) -> Self {
        let n = self.dim();
        let mut base = self.0.clone();
        let mut acc = DMatrix::<C64>::identity(n, n);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Self(acc)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

fn frob(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn relative(residual: &DMatrix<C64>, base: &DMatrix<C64>) -> f64 {
    let scale = frob(base);
    if scale == 0.0 {
        0.0
    } else {
        frob(residual) / scale
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Hermitian operator, validated at construction to [`TOL_HERM`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let residual = mat.hermitian_residual();
        if residual > TOL_HERM {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self(mat))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        Self(ComplexMatrix::from_real_diagonal(d))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// The skew-Hermitian generator `−i·H`.
    pub fn skew(&self) -> ComplexMatrix {
        self.0.scale(-I)
    }

    /// Real trace (the imaginary part of a Hermitian trace is round-off).
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `self + s·other`, which stays Hermitian for real `s`.
    pub fn add_scaled(&self, other: &HermitianOperator, s: f64) -> HermitianOperator {
        HermitianOperator(&self.0 + &other.0.scale_real(s))
    }

    pub fn scale(&self, s: f64) -> HermitianOperator {
        HermitianOperator(self.0.scale_real(s))
    }
}

/// A list of real vectors of a common length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RealVectorSet {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl RealVectorSet {
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput("vector length 0"));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("vector"));
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn from_matrices(ms: &[ComplexMatrix]) -> Result<Self> {
        let n = ms.first().map_or(1, ComplexMatrix::dim);
        Self::new(2 * n * n, ms.iter().map(realify).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Singular values of the matrix whose columns are the vectors, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.vectors.is_empty() {
            return Vec::new();
        }
        let m = DMatrix::from_fn(self.dim, self.vectors.len(), |r, c| self.vectors[c][r]);
        let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// `ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_same(b)?;
    Ok(ComplexMatrix(&a.0 * &b.0 - &b.0 * &a.0))
}

/// Real Frobenius inner product `Re tr(a†b)`.
pub fn frobenius_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    a.check_same(b)?;
    Ok(a.0.iter().zip(b.0.iter()).map(|(x, y)| (x.conj() * y).re).sum())
}

/// Row-major real parts followed by row-major imaginary parts.
pub fn realify(x: &ComplexMatrix) -> Vec<f64> {
    let n = x.dim();
    let mut out = vec![0.0; 2 * n * n];
    for r in 0..n {
        for c in 0..n {
            let z = x.0[(r, c)];
            out[r * n + c] = z.re;
            out[n * n + r * n + c] = z.im;
        }
    }
    out
}

/// Inverse of [`realify`] for a vector of length `2n²`.
pub fn unrealify(v: &[f64], n: usize) -> Result<ComplexMatrix> {
    if v.len() != 2 * n * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n * n,
            found: v.len(),
        });
    }
    ComplexMatrix::new(DMatrix::from_fn(n, n, |r, c| {
        C64::new(v[r * n + c], v[n * n + r * n + c])
    }))
}

/// Number of singular values above `tol × σ_max`; 0 for an empty or all-zero set.
pub fn numerical_rank(vs: &RealVectorSet, tol: f64) -> usize {
    let s = vs.singular_values();
    let Some(&max) = s.first() else { return 0 };
    if max == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * max).count()
}

/// `a − (tr a / n)·I`.
pub fn traceless_part(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let shift = a.trace() / n as f64;
    let mut m = a.0.clone();
    for k in 0..n {
        m[(k, k)] -= shift;
    }
    ComplexMatrix(m)
}

/// `exp(−i·t·h)` through the eigendecomposition of `h`.
pub fn expm_hermitian_factor(h: &HermitianOperator, t: f64) -> Result<ComplexMatrix> {
    let eig = h.matrix().as_matrix().clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalues".into()));
    }
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -l * t)),
    );
    let mut scaled = v.clone();
    for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *p;
    }
    ComplexMatrix::new(scaled * v.adjoint())
}

/// `exp(t·x)` for skew-Hermitian `x`.
pub fn expm_skew(x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    // x = −i·h with h = i·x Hermitian.
    let h = HermitianOperator::new(x.scale(I)).map_err(|e| match e {
        Error::NotHermitian { residual } => Error::NotSkewHermitian { residual },
        other => other,
    })?;
    expm_hermitian_factor(&h, t)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m
        .as_matrix()
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}
