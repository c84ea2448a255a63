use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{max_abs_diff, CMatrix, MatrixJson};
use crate::registers::{block_raw, partial_trace_raw, DensityOperator};

/// Tolerance for equal/unequal block comparisons.
pub const BLOCK_TOL: f64 = 1e-10;

/// Operator-valued block `<row| rho |col>` on the conditioning factor.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub row: usize,
    pub col: usize,
    pub on_labels: Vec<String>,
    pub matrix: CMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockJson {
    pub row: usize,
    pub col: usize,
    pub on_labels: Vec<String>,
    pub matrix: MatrixJson,
}

impl From<&BlockOperator> for BlockJson {
    fn from(b: &BlockOperator) -> Self {
        BlockJson {
            row: b.row,
            col: b.col,
            on_labels: b.on_labels.clone(),
            matrix: MatrixJson::from(&b.matrix),
        }
    }
}

/// All blocks `[Θ]_ij = <i|_X rho |j>_X` for `X = condition_on`, row-major.
pub fn theta_blocks(rho: &DensityOperator, condition_on: &str) -> Result<Vec<BlockOperator>> {
    let register = rho.register();
    let pos = register.position(condition_on)?;
    let d = register.dims()[pos];
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let (rest, m) = block_raw(register, rho.matrix().as_matrix(), &[pos], i, j);
            out.push(BlockOperator {
                row: i,
                col: j,
                on_labels: rest.labels().to_vec(),
                matrix: m,
            });
        }
    }
    Ok(out)
}

/// Two index pairs whose blocks agree after tracing down to `keep` but
/// differ before, so no linear map on `keep` reproduces both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyWitness {
    pub first: (usize, usize),
    pub second: (usize, usize),
    /// Max-abs gap between the traced blocks (at most the tolerance).
    pub traced_gap: f64,
    /// Max-abs gap between the full blocks (above the tolerance).
    pub full_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockConsistencyReport {
    pub consistent: bool,
    pub tol: f64,
    pub index_labels: Vec<String>,
    pub keep: String,
    pub extend_to: Vec<String>,
    pub witnesses: Vec<ConsistencyWitness>,
    /// Blocks after tracing out `extend_to`, row-major over index pairs.
    pub traced_blocks: Vec<BlockJson>,
}

/// Pairwise linearity check for recovering `keep ∪ extend_to` from `keep`.
///
/// Blocks are indexed by the labels outside `keep ∪ extend_to`. A witness is
/// a pair of blocks whose traces onto `keep` agree within [`BLOCK_TOL`] while
/// the blocks themselves differ by more than [`BLOCK_TOL`].
pub fn marginal_block_consistency<S: AsRef<str>>(
    rho: &DensityOperator,
    keep: &str,
    extend_to: &[S],
) -> Result<BlockConsistencyReport> {
    let register = rho.register();
    let keep_pos = register.position(keep)?;
    let ext_pos = register.positions(extend_to)?;
    if ext_pos.contains(&keep_pos) {
        return Err(Error::InvalidRegister(format!(
            "`{keep}` is both kept and extended to"
        )));
    }
    let mut used = ext_pos.clone();
    used.push(keep_pos);
    let index_pos = register.complement(&used);
    let n_idx: usize = index_pos.iter().map(|&p| register.dims()[p]).product();

    let mut full = Vec::with_capacity(n_idx * n_idx);
    let mut traced = Vec::with_capacity(n_idx * n_idx);
    for i in 0..n_idx {
        for j in 0..n_idx {
            let (rest, m) = block_raw(register, rho.matrix().as_matrix(), &index_pos, i, j);
            let drop = rest.positions(extend_to)?;
            let (kept, t) = partial_trace_raw(&rest, &m, &drop);
            traced.push(BlockOperator {
                row: i,
                col: j,
                on_labels: kept.labels().to_vec(),
                matrix: t,
            });
            full.push(m);
        }
    }

    let mut witnesses = Vec::new();
    for a in 0..full.len() {
        for b in a + 1..full.len() {
            let traced_gap = max_abs_diff(&traced[a].matrix, &traced[b].matrix);
            if traced_gap > BLOCK_TOL {
                continue;
            }
            let full_gap = max_abs_diff(&full[a], &full[b]);
            if full_gap > BLOCK_TOL {
                witnesses.push(ConsistencyWitness {
                    first: (a / n_idx, a % n_idx),
                    second: (b / n_idx, b % n_idx),
                    traced_gap,
                    full_gap,
                });
            }
        }
    }

    Ok(BlockConsistencyReport {
        consistent: witnesses.is_empty(),
        tol: BLOCK_TOL,
        index_labels: index_pos.iter().map(|&p| register.labels()[p].clone()).collect(),
        keep: keep.to_string(),
        extend_to: extend_to.iter().map(|s| s.as_ref().to_string()).collect(),
        witnesses,
        traced_blocks: traced.iter().map(BlockJson::from).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::HermitianMatrix;
    use crate::random::{random_density, rng};
    use crate::registers::factory::{ghz3, ghz4, w4};
    use crate::registers::QubitRegister;

    #[test]
    fn ghz_theta_blocks() {
        let rho = ghz4().partial_trace(&["D"]).unwrap();
        let blocks = theta_blocks(&rho, "A").unwrap();
        assert_eq!(blocks.len(), 4);
        let m00 = HermitianMatrix::from_diagonal(&[0.5, 0.0, 0.0, 0.0]);
        let m11 = HermitianMatrix::from_diagonal(&[0.0, 0.0, 0.0, 0.5]);
        assert_eq!(blocks[0].on_labels, vec!["B", "C"]);
        assert!(max_abs_diff(&blocks[0].matrix, m00.as_matrix()) < 1e-15);
        assert!(max_abs_diff(&blocks[3].matrix, m11.as_matrix()) < 1e-15);
        assert!(blocks[1].matrix.iter().all(|z| z.norm() == 0.0));
        // The pure three-qubit GHZ keeps its coherence off the diagonal.
        let pure = theta_blocks(&ghz3(), "A").unwrap();
        assert!((pure[1].matrix[(0, 3)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn product_theta_has_single_block() {
        let mut r = rng(3);
        let sigma = random_density(&mut r, &QubitRegister::qubits(&["B", "C"]).unwrap());
        let zero = DensityOperator::new(
            QubitRegister::qubits(&["A"]).unwrap(),
            HermitianMatrix::from_diagonal(&[1.0, 0.0]),
            true,
        )
        .unwrap();
        let rho = zero.tensor(&sigma).unwrap();
        let blocks = theta_blocks(&rho, "A").unwrap();
        assert!(max_abs_diff(&blocks[0].matrix, sigma.matrix().as_matrix()) < 1e-15);
        for b in &blocks[1..] {
            assert!(b.matrix.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn theta_blocks_are_adjoint_pairs() {
        let mut r = rng(4);
        let reg = QubitRegister::qubits(&["A", "B", "C"]).unwrap();
        for _ in 0..50 {
            let rho = random_density(&mut r, &reg);
            let blocks = theta_blocks(&rho, "A").unwrap();
            assert!(max_abs_diff(&blocks[1].matrix, &blocks[2].matrix.adjoint()) <= 1e-12);
            let tr: f64 = [0, 3].iter().map(|&k| blocks[k].matrix.trace().re).sum();
            assert!((tr - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn w4_traced_blocks() {
        let report = marginal_block_consistency(&w4(), "B", &["C", "D"]).unwrap();
        assert_eq!(report.index_labels, vec!["A"]);
        let t = |k: usize| &report.traced_blocks[k].matrix;
        assert_eq!(t(0).re, vec![vec![0.5, 0.0], vec![0.0, 0.25]]);
        assert_eq!(t(1).re, vec![vec![0.0, 0.0], vec![0.25, 0.0]]);
        assert_eq!(t(2).re, vec![vec![0.0, 0.25], vec![0.0, 0.0]]);
        assert_eq!(t(3).re, vec![vec![0.25, 0.0], vec![0.0, 0.0]]);
        // The four traced blocks are linearly independent, so no pairwise
        // contradiction exists.
        assert!(report.consistent);
    }

    #[test]
    fn product_and_append_are_consistent() {
        let mut r = rng(8);
        let a = random_density(&mut r, &QubitRegister::qubits(&["A"]).unwrap());
        let s = random_density(&mut r, &QubitRegister::qubits(&["B", "C", "D"]).unwrap());
        let rho = a.tensor(&s).unwrap();
        assert!(marginal_block_consistency(&rho, "B", &["C", "D"]).unwrap().consistent);

        let zero = DensityOperator::new(
            QubitRegister::qubits(&["D"]).unwrap(),
            HermitianMatrix::from_diagonal(&[1.0, 0.0]),
            true,
        )
        .unwrap();
        let appended = ghz3().tensor(&zero).unwrap();
        let report = marginal_block_consistency(&appended, "C", &["D"]).unwrap();
        assert_eq!(report.index_labels, vec!["A", "B"]);
        assert!(report.consistent);
    }

    #[test]
    fn detects_pairwise_contradiction() {
        let reg = QubitRegister::qubits(&["A", "B", "C"]).unwrap();
        // rho = 1/2 |0><0|_A ⊗ |00><00| + 1/2 |1><1|_A ⊗ |01><01|
        let rho = DensityOperator::new(
            reg,
            HermitianMatrix::from_diagonal(&[0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0]),
            true,
        )
        .unwrap();
        let report = marginal_block_consistency(&rho, "B", &["C"]).unwrap();
        assert!(!report.consistent);
        let w = &report.witnesses[0];
        assert_eq!((w.first, w.second), ((0, 0), (1, 1)));
        assert!(w.traced_gap <= BLOCK_TOL);
        assert!((w.full_gap - 0.5).abs() < 1e-15);

        assert!(marginal_block_consistency(&ghz4(), "C", &["C"]).is_err());
    }
}
