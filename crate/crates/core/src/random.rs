//! Seeded generators for property tests and examples.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linops::{CMatrix, HermitianMatrix};
use crate::registers::{ChoiOperator, DensityOperator, QubitRegister};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng>(r: &mut R) -> Complex64 {
    Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng>(r: &mut R, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(r))
}

pub fn random_hermitian<R: Rng>(r: &mut R, dim: usize) -> HermitianMatrix {
    let g = ginibre(r, dim, dim);
    HermitianMatrix::new((&g + g.adjoint()).scale(0.5)).expect("symmetrized")
}

/// Sum of `rank` random rank-one PSD terms, generic position.
pub fn random_psd_with_rank<R: Rng>(r: &mut R, dim: usize, rank: usize) -> HermitianMatrix {
    let g = ginibre(r, dim, rank);
    HermitianMatrix::new(&g * g.adjoint()).expect("Gram matrix is Hermitian")
}

/// Full-rank (almost surely) density matrix on the given register.
pub fn random_density<R: Rng>(r: &mut R, register: &QubitRegister) -> DensityOperator {
    let dim = register.total_dim();
    let h = random_psd_with_rank(r, dim, dim);
    let t = h.trace();
    DensityOperator::new(register.clone(), h.scale(1.0 / t), true).expect("valid density")
}

/// Random density matrix of the given rank.
pub fn random_density_with_rank<R: Rng>(
    r: &mut R,
    register: &QubitRegister,
    rank: usize,
) -> DensityOperator {
    let h = random_psd_with_rank(r, register.total_dim(), rank);
    let t = h.trace();
    DensityOperator::new(register.clone(), h.scale(1.0 / t), true).expect("valid density")
}

/// Columns of a random isometry `C^cols -> C^rows` (`rows >= cols`).
pub fn random_isometry<R: Rng>(r: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols);
    let q = ginibre(r, rows, cols).qr().q();
    q.columns(0, cols).into_owned()
}

/// Choi operator of a random channel `input -> input ⊗ extension` built from a
/// Stinespring isometry with an environment of dimension `env_dim`.
pub fn random_channel_choi<R: Rng>(
    r: &mut R,
    input_label: &str,
    extension_label: &str,
    env_dim: usize,
) -> ChoiOperator {
    let d_in = 2;
    let d_out = 4;
    let v = random_isometry(r, d_out * env_dim, d_in);
    let kraus: Vec<CMatrix> = (0..env_dim)
        .map(|m| DMatrix::from_fn(d_out, d_in, |o, i| v[(o * env_dim + m, i)]))
        .collect();
    ChoiOperator::from_kraus(input_label, &[extension_label], &[2], &kraus)
        .expect("isometry yields a channel")
}
