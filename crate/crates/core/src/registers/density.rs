use crate::error::{Error, Result};
use crate::linops::{eigh, HermitianMatrix};

use super::register::{partial_trace_raw, partial_transpose_raw, QubitRegister};

/// Trace tolerance for normalized states.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor accepted as positive semidefinite.
pub const PSD_FLOOR: f64 = -1e-10;

/// Hermitian operator on a labeled register.
///
/// `normalized` records whether the operator is meant to have unit trace;
/// conditional blocks and other sub-normalized pieces carry `false`.
/// Positivity is not enforced at construction because partial transposes
/// share this type; [`DensityOperator::check_state`] asserts it.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    register: QubitRegister,
    matrix: HermitianMatrix,
    normalized: bool,
}

impl DensityOperator {
    pub fn new(register: QubitRegister, matrix: HermitianMatrix, normalized: bool) -> Result<Self> {
        if matrix.dim() != register.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: register.total_dim(),
                found: matrix.dim(),
            });
        }
        if normalized {
            let trace = matrix.trace();
            if (trace - 1.0).abs() > TRACE_TOL {
                return Err(Error::NotNormalized { trace });
            }
        }
        Ok(DensityOperator {
            register,
            matrix,
            normalized,
        })
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn labels(&self) -> &[String] {
        self.register.labels()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Asserts positivity (floor `-1e-10`) and, when flagged, unit trace.
    pub fn check_state(&self) -> Result<()> {
        let lowest = eigh(&self.matrix).values.first().copied().unwrap_or(0.0);
        if lowest < PSD_FLOOR {
            return Err(Error::NotPsd { eigenvalue: lowest });
        }
        if self.normalized && (self.trace() - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized {
                trace: self.trace(),
            });
        }
        Ok(())
    }

    /// Kronecker product with concatenated labels.
    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let register = self.register.concat(&other.register)?;
        let m = self.matrix.as_matrix().kronecker(other.matrix.as_matrix());
        Ok(DensityOperator {
            register,
            matrix: HermitianMatrix::new(m)?,
            normalized: self.normalized && other.normalized,
        })
    }

    /// Traces out `drop`; remaining labels keep their original order.
    pub fn partial_trace<S: AsRef<str>>(&self, drop: &[S]) -> Result<DensityOperator> {
        let positions = self.register.positions(drop)?;
        let (register, m) = partial_trace_raw(&self.register, self.matrix.as_matrix(), &positions);
        Ok(DensityOperator {
            register,
            matrix: HermitianMatrix::new(m)?,
            normalized: self.normalized,
        })
    }

    /// Keeps only `keep`, tracing out everything else.
    pub fn marginal<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let positions = self.register.positions(keep)?;
        let drop: Vec<String> = self
            .register
            .complement(&positions)
            .into_iter()
            .map(|p| self.register.labels()[p].clone())
            .collect();
        self.partial_trace(&drop)
    }

    /// Partial transpose on one factor. Involutive; positivity not asserted.
    pub fn partial_transpose(&self, on: &str) -> Result<DensityOperator> {
        let pos = self.register.position(on)?;
        let m = partial_transpose_raw(&self.register, self.matrix.as_matrix(), pos);
        Ok(DensityOperator {
            register: self.register.clone(),
            matrix: HermitianMatrix::new(m)?,
            normalized: self.normalized,
        })
    }

    /// `p * a + (1 - p) * b` on identical registers.
    pub fn mix(p: f64, a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ParameterOutOfRange(p));
        }
        if a.register != b.register {
            return Err(Error::InvalidRegister(format!(
                "cannot mix states on {:?} and {:?}",
                a.labels(),
                b.labels()
            )));
        }
        let matrix = a.matrix.combine(p, &b.matrix, 1.0 - p)?;
        DensityOperator::new(a.register.clone(), matrix, a.normalized && b.normalized)
    }

    /// Max-abs entrywise distance; registers must agree.
    pub fn max_abs_diff(&self, other: &DensityOperator) -> Result<f64> {
        if self.register != other.register {
            return Err(Error::InvalidRegister(format!(
                "cannot compare states on {:?} and {:?}",
                self.labels(),
                other.labels()
            )));
        }
        Ok(self.matrix.max_abs_diff(&other.matrix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{max_abs_diff, CMatrix};
    use crate::random::{random_density, rng};
    use num_complex::Complex64;

    fn plus_state(label: &str) -> DensityOperator {
        let m = HermitianMatrix::new(CMatrix::from_element(2, 2, Complex64::new(0.5, 0.0))).unwrap();
        DensityOperator::new(QubitRegister::qubits(&[label]).unwrap(), m, true).unwrap()
    }

    fn zero_state(label: &str) -> DensityOperator {
        DensityOperator::new(
            QubitRegister::qubits(&[label]).unwrap(),
            HermitianMatrix::from_diagonal(&[1.0, 0.0]),
            true,
        )
        .unwrap()
    }

    #[test]
    fn tensor_with_zero_ancilla() {
        let out = plus_state("C").tensor(&zero_state("D")).unwrap();
        assert_eq!(out.labels(), &["C", "D"]);
        let m = out.matrix();
        for (r, c) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
            assert_eq!(m[(r, c)].re, 0.5);
        }
        let nonzero = m.as_matrix().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 4);
        assert!(matches!(
            plus_state("C").tensor(&zero_state("C")),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn tensor_then_trace_round_trip() {
        let mut r = rng(21);
        let reg = QubitRegister::qubits(&["A", "B"]).unwrap();
        let mixed = DensityOperator::new(
            QubitRegister::qubits(&["X"]).unwrap(),
            HermitianMatrix::identity(2).scale(0.5),
            true,
        )
        .unwrap();
        for _ in 0..50 {
            let rho = random_density(&mut r, &reg);
            let back = rho.tensor(&mixed).unwrap().partial_trace(&["X"]).unwrap();
            assert!(back.max_abs_diff(&rho).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_composes() {
        let mut r = rng(2);
        let reg = QubitRegister::qubits(&["A", "B", "C", "D"]).unwrap();
        let rho = random_density(&mut r, &reg);
        let stepwise = rho.partial_trace(&["D"]).unwrap().partial_trace(&["C"]).unwrap();
        let joint = rho.partial_trace(&["C", "D"]).unwrap();
        assert_eq!(stepwise.labels(), joint.labels());
        assert!(stepwise.max_abs_diff(&joint).unwrap() <= 1e-15);
        let reversed = rho.partial_trace(&["D", "C"]).unwrap();
        assert_eq!(reversed, joint);
        assert!(matches!(rho.partial_trace(&["Q"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn partial_transpose_of_product_and_bell_state() {
        let mut r = rng(4);
        let a = random_density(&mut r, &QubitRegister::qubits(&["A"]).unwrap());
        let c = random_density(&mut r, &QubitRegister::qubits(&["C"]).unwrap());
        let pt = a.tensor(&c).unwrap().partial_transpose("C").unwrap();
        let expected = a.matrix().as_matrix().kronecker(&c.matrix().as_matrix().transpose());
        assert!(max_abs_diff(pt.matrix().as_matrix(), &expected) <= 1e-15);

        let s = 0.5f64.sqrt();
        let v = [s, 0.0, 0.0, s].map(|x| Complex64::new(x, 0.0));
        let bell = DensityOperator::new(
            QubitRegister::qubits(&["A", "B"]).unwrap(),
            HermitianMatrix::outer(&v),
            true,
        )
        .unwrap();
        let values = eigh(bell.partial_transpose("B").unwrap().matrix()).values;
        for (got, want) in values.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(bell.partial_transpose("B").unwrap().check_state().is_err());
    }

    #[test]
    fn partial_transpose_is_involutive() {
        let mut r = rng(9);
        let reg = QubitRegister::qubits(&["A", "B", "C"]).unwrap();
        for _ in 0..20 {
            let rho = random_density(&mut r, &reg);
            for label in ["A", "B", "C"] {
                let twice = rho
                    .partial_transpose(label)
                    .unwrap()
                    .partial_transpose(label)
                    .unwrap();
                assert_eq!(twice, rho);
            }
        }
    }

    #[test]
    fn normalization_is_checked() {
        let reg = QubitRegister::qubits(&["A"]).unwrap();
        assert!(matches!(
            DensityOperator::new(reg.clone(), HermitianMatrix::identity(2), true),
            Err(Error::NotNormalized { .. })
        ));
        assert!(DensityOperator::new(reg, HermitianMatrix::identity(2), false).is_ok());
    }
}
