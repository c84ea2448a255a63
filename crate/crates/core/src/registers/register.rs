use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{CMatrix, ZERO};

/// Ordered, labeled tensor factors. Basis ordering is big-endian over the
/// label list: for `A,B,C,D` the index of `|abcd>` is `8a + 4b + 2c + d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitRegister {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl QubitRegister {
    pub fn new<S: AsRef<str>>(labels: &[S], dims: &[usize]) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(Error::InvalidRegister(format!(
                "{} labels but {} dimensions",
                labels.len(),
                dims.len()
            )));
        }
        let labels: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::InvalidRegister("empty label".into()));
            }
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        if dims.contains(&0) {
            return Err(Error::InvalidRegister("zero-dimensional subsystem".into()));
        }
        Ok(QubitRegister {
            labels,
            dims: dims.to_vec(),
        })
    }

    /// All-qubit register.
    pub fn qubits<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Self::new(labels, &vec![2; labels.len()])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    /// Positions of the given labels, in the order given.
    pub(crate) fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l.as_ref())?;
            if out.contains(&p) {
                return Err(Error::DuplicateLabel(l.as_ref().to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Register restricted to `positions`, keeping the original order.
    pub(crate) fn select(&self, positions: &[usize]) -> QubitRegister {
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        QubitRegister {
            labels: sorted.iter().map(|&p| self.labels[p].clone()).collect(),
            dims: sorted.iter().map(|&p| self.dims[p]).collect(),
        }
    }

    pub(crate) fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|p| !positions.contains(p)).collect()
    }

    /// Global index offsets of every multi-index over `positions` (sorted
    /// ascending), enumerated big-endian.
    pub(crate) fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        let mut out = vec![0usize];
        for &p in &sorted {
            let mut next = Vec::with_capacity(out.len() * self.dims[p]);
            for &base in &out {
                for digit in 0..self.dims[p] {
                    next.push(base + digit * strides[p]);
                }
            }
            out = next;
        }
        out
    }

    /// Register with `inserted` placed right after `after`.
    pub(crate) fn insert_after(&self, after: usize, inserted: &QubitRegister) -> Result<Self> {
        for l in &inserted.labels {
            if self.contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let mut labels = self.labels.clone();
        let mut dims = self.dims.clone();
        for (k, (l, d)) in inserted.labels.iter().zip(&inserted.dims).enumerate() {
            labels.insert(after + 1 + k, l.clone());
            dims.insert(after + 1 + k, *d);
        }
        Ok(QubitRegister { labels, dims })
    }

    /// Concatenation; labels must be disjoint.
    pub fn concat(&self, other: &QubitRegister) -> Result<Self> {
        if self.is_empty() {
            return Ok(other.clone());
        }
        self.insert_after(self.len() - 1, other)
    }
}

/// `Tr_{drop}` of an arbitrary (not necessarily Hermitian) operator.
pub(crate) fn partial_trace_raw(
    register: &QubitRegister,
    m: &CMatrix,
    drop: &[usize],
) -> (QubitRegister, CMatrix) {
    let keep = register.complement(drop);
    let keep_off = register.offsets(&keep);
    let drop_off = register.offsets(drop);
    let n = keep_off.len();
    let out = CMatrix::from_fn(n, n, |r, c| {
        drop_off
            .iter()
            .map(|&d| m[(keep_off[r] + d, keep_off[c] + d)])
            .sum()
    });
    (register.select(&keep), out)
}

/// Transpose of the tensor factor at `pos`.
pub(crate) fn partial_transpose_raw(register: &QubitRegister, m: &CMatrix, pos: usize) -> CMatrix {
    let stride = register.strides()[pos];
    let d = register.dims()[pos];
    let n = m.nrows();
    let digit = |idx: usize| (idx / stride) % d;
    CMatrix::from_fn(n, n, |r, c| {
        let (dr, dc) = (digit(r), digit(c));
        let src_r = r - dr * stride + dc * stride;
        let src_c = c - dc * stride + dr * stride;
        m[(src_r, src_c)]
    })
}

/// `(I ⊗ |j><j| ⊗ I) m (I ⊗ |j><j| ⊗ I)` on the factor at `pos`.
pub(crate) fn project_raw(register: &QubitRegister, m: &CMatrix, pos: usize, j: usize) -> CMatrix {
    let stride = register.strides()[pos];
    let d = register.dims()[pos];
    let digit = |idx: usize| (idx / stride) % d;
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        if digit(r) == j && digit(c) == j {
            m[(r, c)]
        } else {
            ZERO
        }
    })
}

/// Operator-valued block `<i| m |j>` on the factors at `on`, acting on the
/// remaining factors (original order). `i` and `j` are multi-indices over
/// `on`, enumerated big-endian.
pub(crate) fn block_raw(
    register: &QubitRegister,
    m: &CMatrix,
    on: &[usize],
    i: usize,
    j: usize,
) -> (QubitRegister, CMatrix) {
    let rest = register.complement(on);
    let on_off = register.offsets(on);
    let rest_off = register.offsets(&rest);
    let n = rest_off.len();
    let block = CMatrix::from_fn(n, n, |r, c| m[(on_off[i] + rest_off[r], on_off[j] + rest_off[c])]);
    (register.select(&rest), block)
}
