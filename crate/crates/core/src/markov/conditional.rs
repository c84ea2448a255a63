use crate::error::{Error, Result};
use crate::linops::HermitianMatrix;
use crate::registers::{partial_trace_raw, project_raw, DensityOperator};

/// Unnormalized operator left after projecting one factor onto `|outcome>`
/// and tracing out a set of others. The projected factor stays in place as
/// `|outcome><outcome|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalBlock {
    pub outcome: usize,
    pub operator: DensityOperator,
    /// Trace of the block, i.e. the outcome probability times the parent trace.
    pub weight: f64,
}

impl ConditionalBlock {
    pub fn kept_labels(&self) -> &[String] {
        self.operator.labels()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        self.operator.matrix()
    }
}

/// `Tr_{trace_out}[(I ⊗ <j|) rho (I ⊗ |j>)]` with `|j><j|` kept on `measure`.
pub fn conditional_block<S: AsRef<str>>(
    rho: &DensityOperator,
    measure: &str,
    outcome: usize,
    trace_out: &[S],
) -> Result<ConditionalBlock> {
    let register = rho.register();
    let pos = register.position(measure)?;
    let dim = register.dims()[pos];
    if outcome >= dim {
        return Err(Error::OutcomeOutOfRange { outcome, dim });
    }
    let drop = register.positions(trace_out)?;
    if drop.contains(&pos) {
        return Err(Error::InvalidRegister(format!(
            "`{measure}` is both measured and traced out"
        )));
    }
    let projected = project_raw(register, rho.matrix().as_matrix(), pos, outcome);
    let (kept, m) = partial_trace_raw(register, &projected, &drop);
    let operator = DensityOperator::new(kept, HermitianMatrix::new(m)?, false)?;
    let weight = operator.trace();
    Ok(ConditionalBlock {
        outcome,
        operator,
        weight,
    })
}

/// Conditional blocks for every outcome of `measure`.
pub fn conditional_decomposition<S: AsRef<str>>(
    rho: &DensityOperator,
    measure: &str,
    trace_out: &[S],
) -> Result<Vec<ConditionalBlock>> {
    let dim = rho.register().dim_of(measure)?;
    (0..dim)
        .map(|j| conditional_block(rho, measure, j, trace_out))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{max_abs_diff, CMatrix};
    use crate::random::{random_density, rng};
    use crate::registers::factory::w4;
    use crate::registers::QubitRegister;

    #[test]
    fn w4_blocks_on_ac_and_bc() {
        let marginal = w4().partial_trace(&["D"]).unwrap();

        // Outcome 0, trace B: 1/4 (2|00><00| + |10><10|) on (A, C).
        let ac0 = conditional_block(&marginal, "C", 0, &["B"]).unwrap();
        assert_eq!(ac0.kept_labels(), &["A", "C"]);
        let expected = HermitianMatrix::from_diagonal(&[0.5, 0.0, 0.25, 0.0]);
        assert!(ac0.matrix().max_abs_diff(&expected) < 1e-15);
        assert!((ac0.weight - 0.75).abs() < 1e-15);

        // Outcome 1, trace A: 1/4 |01><01| on (B, C).
        let bc1 = conditional_block(&marginal, "C", 1, &["A"]).unwrap();
        assert_eq!(bc1.kept_labels(), &["B", "C"]);
        let expected = HermitianMatrix::from_diagonal(&[0.0, 0.25, 0.0, 0.0]);
        assert!(bc1.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn product_state_factorizes() {
        let mut r = rng(17);
        let one = |l: &str| QubitRegister::qubits(&[l]).unwrap();
        let a = random_density(&mut r, &one("A"));
        let b = random_density(&mut r, &one("B"));
        let c = random_density(&mut r, &one("C"));
        let rho = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let mut total = 0.0;
        for j in 0..2 {
            let blk = conditional_block(&rho, "C", j, &["B"]).unwrap();
            let pj = c.matrix()[(j, j)].re;
            let mut proj = CMatrix::zeros(2, 2);
            proj[(j, j)] = num_complex::Complex64::new(pj, 0.0);
            let expected = a.matrix().as_matrix().kronecker(&proj);
            assert!(max_abs_diff(blk.matrix().as_matrix(), &expected) < 1e-14);
            total += blk.weight;
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_are_conserved() {
        let mut r = rng(1);
        let reg = QubitRegister::qubits(&["A", "B", "C"]).unwrap();
        for _ in 0..100 {
            let rho = random_density(&mut r, &reg);
            for trace_out in [["A"], ["B"]] {
                let blocks = conditional_decomposition(&rho, "C", &trace_out).unwrap();
                let sum: f64 = blocks.iter().map(|b| b.weight).sum();
                assert!((sum - rho.trace()).abs() <= 1e-10);
                for b in &blocks {
                    assert!(b.matrix().min_eigenvalue() >= -1e-10);
                }
            }
        }
    }

    #[test]
    fn argument_errors() {
        let marginal = w4().partial_trace(&["D"]).unwrap();
        assert!(matches!(
            conditional_block(&marginal, "C", 2, &["B"]),
            Err(Error::OutcomeOutOfRange { outcome: 2, dim: 2 })
        ));
        assert!(conditional_block(&marginal, "C", 0, &["C"]).is_err());
        assert!(matches!(
            conditional_block(&marginal, "D", 0, &["B"]),
            Err(Error::UnknownLabel(_))
        ));
    }
}
