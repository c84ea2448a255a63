//! Real vectorization of Hermitian matrices.
//!
//! A `d x d` Hermitian matrix maps to `d^2` reals: the diagonal, then
//! `sqrt(2) Re H_kl` and `sqrt(2) Im H_kl` for each `k < l` in row-major
//! order. The map is an isometry, `<svec A, svec B> = Tr(A B)`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::linops::{eigh, CMatrix, HermitianMatrix, ZERO};

pub fn svec_len(dim: usize) -> usize {
    dim * dim
}

/// Writes `svec(m)` into `out`, reading only the upper triangle of `m`.
pub fn svec_into(m: &CMatrix, out: &mut [f64]) {
    let d = m.nrows();
    debug_assert_eq!(out.len(), d * d);
    for i in 0..d {
        out[i] = m[(i, i)].re;
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = m[(i, j)];
            out[k] = SQRT_2 * z.re;
            out[k + 1] = SQRT_2 * z.im;
            k += 2;
        }
    }
}

pub fn svec(m: &CMatrix) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows() * m.nrows()];
    svec_into(m, &mut out);
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], dim: usize) -> CMatrix {
    debug_assert_eq!(v.len(), dim * dim);
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(v[i], 0.0);
    }
    let mut k = dim;
    for i in 0..dim {
        for j in i + 1..dim {
            let z = Complex64::new(v[k], v[k + 1]) / SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// The `s`-th element of the orthonormal basis that [`svec`] maps to the
/// unit vector `e_s`.
pub fn basis_element(dim: usize, s: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    if s < dim {
        m[(s, s)] = Complex64::new(1.0, 0.0);
        return m;
    }
    let (i, j, imaginary) = pair_of(dim, s);
    let h = 1.0 / SQRT_2;
    let z = if imaginary {
        Complex64::new(0.0, h)
    } else {
        Complex64::new(h, 0.0)
    };
    m[(i, j)] = z;
    m[(j, i)] = z.conj();
    m
}

fn pair_of(dim: usize, s: usize) -> (usize, usize, bool) {
    let mut k = dim;
    for i in 0..dim {
        for j in i + 1..dim {
            if s == k {
                return (i, j, false);
            }
            if s == k + 1 {
                return (i, j, true);
            }
            k += 2;
        }
    }
    panic!("svec index {s} out of range for dimension {dim}");
}

/// Projects `svec(H)` onto the PSD cone in place; returns the smallest
/// eigenvalue before clipping.
pub fn project_psd(v: &mut [f64], dim: usize) -> f64 {
    let m = smat(v, dim);
    let eig = eigh(&HermitianMatrix::new(m).expect("smat output is Hermitian"));
    let lowest = eig.values.first().copied().unwrap_or(0.0);
    if lowest >= 0.0 {
        return lowest;
    }
    let mut out = CMatrix::zeros(dim, dim);
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let col = eig.vectors.column(k);
        for i in 0..dim {
            let a = col[i] * lam;
            for j in i..dim {
                out[(i, j)] += a * col[j].conj();
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            out[(i, j)] = ZERO;
        }
    }
    svec_into(&out, v);
    lowest
}
