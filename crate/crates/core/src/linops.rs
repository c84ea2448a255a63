//! Dense Hermitian linear algebra: eigendecomposition, kernels, supports and
//! subspace containment.
//!
//! Every routine here is a pure function over immutable values. The rank and
//! kernel threshold is relative to the largest eigenvalue, which makes the
//! verdicts insensitive to the overall normalization of the operator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest entrywise asymmetry absorbed by symmetrization.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default relative eigenvalue threshold for kernels and ranks.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Eigenvalues below this floor make an operator "not PSD".
pub const PSD_ERROR_FLOOR: f64 = -1e-8;

/// Complex dense matrix alias used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest entrywise deviation `|m - m^dagger|`.
pub fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise modulus of `a - b`. Panics on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Split real/imaginary row-major arrays, the layout used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        MatrixJson {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Validates and symmetrizes `m`.
    ///
    /// Drift up to [`HERMITIAN_TOL`] is absorbed by replacing `m` with
    /// `(m + m^dagger) / 2`; anything larger is rejected.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let asym = max_asymmetry(&m);
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                max_asymmetry: asym,
            });
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        HermitianMatrix((m + adj).scale(0.5))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(CMatrix::identity(dim, dim))
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        HermitianMatrix(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    /// `|v><v|` for a column vector `v`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        HermitianMatrix(CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        HermitianMatrix(self.0.scale(factor))
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(HermitianMatrix(self.0.scale(a) + other.0.scale(b)))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(self).values.first().copied().unwrap_or(0.0)
    }
}

impl std::ops::Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

/// Spectral decomposition `H = V diag(values) V^dagger`.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            for i in 0..n {
                scaled[(i, k)] *= lambda;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn eigh(h: &HermitianMatrix) -> Eigh {
    let n = h.dim();
    if n == 0 {
        return Eigh {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let se = h.0.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| se.eigenvectors[(i, order[k])]);
    Eigh { values, vectors }
}

/// Orthonormal columns spanning a subspace of `C^ambient_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    vectors: CMatrix,
    tol: f64,
}

impl SubspaceBasis {
    /// Orthonormalizes the given columns (modified Gram-Schmidt with one
    /// reorthogonalization pass), dropping columns whose residual norm is
    /// below `1e-12`.
    pub fn from_columns(ambient_dim: usize, columns: &[Vec<Complex64>]) -> Result<Self> {
        let mut kept: Vec<Vec<Complex64>> = Vec::new();
        for col in columns {
            if col.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: col.len(),
                });
            }
            let mut v = col.clone();
            for _ in 0..2 {
                for q in &kept {
                    let overlap: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= overlap * qi;
                    }
                }
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-12 {
                kept.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
        let vectors = CMatrix::from_fn(ambient_dim, kept.len(), |i, k| kept[k][i]);
        Ok(SubspaceBasis {
            ambient_dim,
            vectors,
            tol: 0.0,
        })
    }

    /// Span of computational basis vectors `|k>` for the given indices.
    pub fn computational(ambient_dim: usize, indices: &[usize]) -> Self {
        let vectors = CMatrix::from_fn(ambient_dim, indices.len(), |i, k| {
            if i == indices[k] {
                ONE
            } else {
                ZERO
            }
        });
        SubspaceBasis {
            ambient_dim,
            vectors,
            tol: 0.0,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k).iter().copied().collect()
    }

    /// Threshold used when the basis was extracted from a spectrum.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn projector(&self) -> CMatrix {
        &self.vectors * self.vectors.adjoint()
    }

    /// Max-abs deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.vectors.adjoint() * &self.vectors;
        max_abs_diff(&gram, &CMatrix::identity(self.dim(), self.dim()))
    }
}

fn checked_spectrum(h: &HermitianMatrix) -> Result<Eigh> {
    let eig = eigh(h);
    if let Some(&lowest) = eig.values.first() {
        if lowest < PSD_ERROR_FLOOR {
            return Err(Error::NotPsd { eigenvalue: lowest });
        }
    }
    Ok(eig)
}

fn threshold(eig: &Eigh, rel_tol: f64) -> f64 {
    let lambda_max = eig.values.last().copied().unwrap_or(0.0);
    rel_tol * lambda_max.max(1e-300)
}

fn split(h: &HermitianMatrix, rel_tol: f64, want_kernel: bool) -> Result<SubspaceBasis> {
    let eig = checked_spectrum(h)?;
    let cut = threshold(&eig, rel_tol);
    let picked: Vec<usize> = (0..eig.values.len())
        .filter(|&k| (eig.values[k] <= cut) == want_kernel)
        .collect();
    let n = h.dim();
    let vectors = CMatrix::from_fn(n, picked.len(), |i, k| eig.vectors[(i, picked[k])]);
    Ok(SubspaceBasis {
        ambient_dim: n,
        vectors,
        tol: rel_tol,
    })
}

/// Eigenvectors of a PSD operator with eigenvalue at most
/// `rel_tol * max(lambda_max, 1e-300)`.
pub fn kernel_basis(h: &HermitianMatrix, rel_tol: f64) -> Result<SubspaceBasis> {
    split(h, rel_tol, true)
}

/// Orthogonal complement of [`kernel_basis`] under the same threshold.
pub fn support_basis(h: &HermitianMatrix, rel_tol: f64) -> Result<SubspaceBasis> {
    split(h, rel_tol, false)
}

pub fn rank_of(h: &HermitianMatrix, rel_tol: f64) -> Result<usize> {
    Ok(h.dim() - kernel_basis(h, rel_tol)?.dim())
}

/// Outcome of [`subspace_contained`].
#[derive(Debug, Clone, PartialEq)]
pub struct Containment {
    pub contained: bool,
    /// Largest `||(I - P_B) a||` over the columns `a` of the inner basis.
    pub max_leak: f64,
    /// Column of the inner basis attaining `max_leak`.
    pub worst_column: Option<usize>,
}

/// Checks `span(inner) ⊆ span(outer)` column by column.
pub fn subspace_contained(
    inner: &SubspaceBasis,
    outer: &SubspaceBasis,
    tol: f64,
) -> Result<Containment> {
    if inner.ambient_dim != outer.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: outer.ambient_dim,
            found: inner.ambient_dim,
        });
    }
    let coeffs = outer.vectors.adjoint() * &inner.vectors;
    let residual = &inner.vectors - &outer.vectors * coeffs;
    let mut max_leak = 0.0;
    let mut worst_column = None;
    for k in 0..residual.ncols() {
        let leak = residual.column(k).norm();
        if worst_column.is_none() || leak > max_leak {
            max_leak = leak;
            worst_column = Some(k);
        }
    }
    Ok(Containment {
        contained: max_leak <= tol,
        max_leak,
        worst_column,
    })
}

/// Renders a vector in the computational basis, e.g. `0.70711|00> - 0.70711|10>`.
pub fn format_ket(v: &[Complex64], qubits: usize) -> String {
    let mut terms = Vec::new();
    for (idx, amp) in v.iter().enumerate() {
        if amp.norm() < 1e-9 {
            continue;
        }
        let bits: String = (0..qubits)
            .rev()
            .map(|b| if (idx >> b) & 1 == 1 { '1' } else { '0' })
            .collect();
        let coeff = if amp.im.abs() < 1e-12 {
            format!("{:.5}", amp.re)
        } else {
            format!("({:.5}{:+.5}i)", amp.re, amp.im)
        };
        terms.push(format!("{coeff}|{bits}>"));
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ").replace("+ -", "- ")
    }
}
