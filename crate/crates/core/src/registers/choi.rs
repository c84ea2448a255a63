use crate::error::{Error, Result};
use crate::linops::{eigh, CMatrix, HermitianMatrix};

use super::density::PSD_FLOOR;
use super::register::QubitRegister;

/// Default tolerance for `Tr_out(J) = c I`.
pub const TP_TOL: f64 = 1e-9;

/// Choi operator of a map `input -> copy ⊗ extension`.
///
/// The matrix lives on `input ⊗ copy ⊗ extension`, with entries
/// `J[(i, o), (j, o')] = N(|i><j|)[o, o']`, so the induced map is
/// `N(X) = Tr_input[(X^T ⊗ I) J]`. When the map is applied to a register, the
/// copy factor takes over the input label and the extension labels are
/// inserted right after it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiOperator {
    input_label: String,
    copy_label: String,
    input_dim: usize,
    extension: QubitRegister,
    matrix: HermitianMatrix,
    cp_flag: bool,
    scale: f64,
}

impl ChoiOperator {
    /// Validates with the default trace-preservation tolerance.
    pub fn new<S: AsRef<str>>(
        input_label: &str,
        input_dim: usize,
        extension_labels: &[S],
        extension_dims: &[usize],
        matrix: HermitianMatrix,
        cp_flag: bool,
    ) -> Result<Self> {
        Self::with_tolerance(
            input_label,
            input_dim,
            extension_labels,
            extension_dims,
            matrix,
            cp_flag,
            TP_TOL,
        )
    }

    /// As [`ChoiOperator::new`] with an explicit tolerance on
    /// `Tr_out(J) = c I`; used for operators recovered by the solver.
    pub fn with_tolerance<S: AsRef<str>>(
        input_label: &str,
        input_dim: usize,
        extension_labels: &[S],
        extension_dims: &[usize],
        matrix: HermitianMatrix,
        cp_flag: bool,
        tp_tol: f64,
    ) -> Result<Self> {
        let extension = QubitRegister::new(extension_labels, extension_dims)?;
        let copy_label = format!("{input_label}'");
        if extension.contains(input_label) || extension.contains(&copy_label) {
            return Err(Error::DuplicateLabel(input_label.to_string()));
        }
        let expected = input_dim * input_dim * extension.total_dim();
        if matrix.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: matrix.dim(),
            });
        }
        if cp_flag {
            let lowest = eigh(&matrix).values.first().copied().unwrap_or(0.0);
            if lowest < PSD_FLOOR {
                return Err(Error::NotPsd { eigenvalue: lowest });
            }
        }
        let mut choi = ChoiOperator {
            input_label: input_label.to_string(),
            copy_label,
            input_dim,
            extension,
            matrix,
            cp_flag,
            scale: 0.0,
        };
        let marginal = choi.output_trace();
        choi.scale = (0..input_dim).map(|i| marginal[(i, i)].re).sum::<f64>() / input_dim as f64;
        let deviation = (0..input_dim)
            .flat_map(|i| (0..input_dim).map(move |j| (i, j)))
            .map(|(i, j)| {
                let target = if i == j { choi.scale } else { 0.0 };
                (marginal[(i, j)] - target).norm()
            })
            .fold(0.0, f64::max);
        if deviation > tp_tol {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(choi)
    }

    /// `J = sum_k sum_ij |i><j| ⊗ K_k |i><j| K_k^dagger` for Kraus operators
    /// of shape `(d_in * prod(ext_dims)) x d_in`.
    pub fn from_kraus<S: AsRef<str>>(
        input_label: &str,
        extension_labels: &[S],
        extension_dims: &[usize],
        kraus: &[CMatrix],
    ) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidRegister("empty Kraus list".into()))?;
        let d_in = first.ncols();
        let d_out = first.nrows();
        if d_out != d_in * extension_dims.iter().product::<usize>() {
            return Err(Error::DimensionMismatch {
                expected: d_in * extension_dims.iter().product::<usize>(),
                found: d_out,
            });
        }
        let n = d_in * d_out;
        let mut j = CMatrix::zeros(n, n);
        for k in kraus {
            if k.shape() != (d_out, d_in) {
                return Err(Error::DimensionMismatch {
                    expected: d_out,
                    found: k.nrows(),
                });
            }
            // column vector sum_i |i> ⊗ K|i>
            let omega: Vec<_> = (0..n).map(|r| k[(r % d_out, r / d_out)]).collect();
            for r in 0..n {
                for c in 0..n {
                    j[(r, c)] += omega[r] * omega[c].conj();
                }
            }
        }
        Self::new(
            input_label,
            d_in,
            extension_labels,
            extension_dims,
            HermitianMatrix::new(j)?,
            true,
        )
    }

    /// Choi operator of the identity channel (no extension).
    pub fn identity(input_label: &str, dim: usize) -> Result<Self> {
        let k = CMatrix::identity(dim, dim);
        Self::from_kraus::<&str>(input_label, &[], &[], &[k])
    }

    pub fn input_label(&self) -> &str {
        &self.input_label
    }

    pub fn copy_label(&self) -> &str {
        &self.copy_label
    }

    pub fn extension(&self) -> &QubitRegister {
        &self.extension
    }

    pub fn extension_labels(&self) -> &[String] {
        self.extension.labels()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Dimension of `copy ⊗ extension`.
    pub fn output_dim(&self) -> usize {
        self.input_dim * self.extension.total_dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn is_cp(&self) -> bool {
        self.cp_flag
    }

    /// The `c` in `Tr_out(J) = c I`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_trace_preserving(&self) -> bool {
        (self.scale - 1.0).abs() <= TP_TOL
    }

    /// Labels of the factors the matrix lives on.
    pub fn register(&self) -> QubitRegister {
        let mut labels = vec![self.input_label.clone(), self.copy_label.clone()];
        labels.extend(self.extension.labels().iter().cloned());
        let mut dims = vec![self.input_dim, self.input_dim];
        dims.extend(self.extension.dims());
        QubitRegister::new(&labels, &dims).expect("labels are distinct")
    }

    /// `Tr_{copy, extension}(J)`.
    pub fn output_trace(&self) -> CMatrix {
        let d_in = self.input_dim;
        let d_out = self.output_dim();
        let m = self.matrix.as_matrix();
        CMatrix::from_fn(d_in, d_in, |i, j| {
            (0..d_out).map(|o| m[(i * d_out + o, j * d_out + o)]).sum()
        })
    }

    /// The map applied to `|i><j|` of the input, as a `d_out x d_out` matrix.
    pub fn image_of_unit(&self, i: usize, j: usize) -> CMatrix {
        let d_out = self.output_dim();
        let m = self.matrix.as_matrix();
        CMatrix::from_fn(d_out, d_out, |o, p| m[(i * d_out + o, j * d_out + p)])
    }
}
