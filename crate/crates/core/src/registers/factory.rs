//! Named states and channels.
//!
//! Pure states are assembled from their ket amplitudes and then turned into
//! projectors; no matrix literals appear here.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{CMatrix, HermitianMatrix, ONE, ZERO};

use super::choi::ChoiOperator;
use super::density::DensityOperator;
use super::register::QubitRegister;

/// Built-in states. Four-qubit states live on `A,B,C,D`; `Ghz3` on `A,B,C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BuiltinState {
    /// `(|0000> + |1111>) / sqrt(2)`
    Ghz4,
    /// `(|0001> + |0010> + |0100> + |1000>) / 2`
    W4,
    /// `p W4 + (1 - p) GHZ4`
    Mix { p: f64 },
    /// `(|0000><0000| + |1111><1111|) / 2`
    Rho2,
    /// `(|000> + |111>) / sqrt(2)`
    Ghz3,
    /// `lambda W4 + (1 - lambda) Rho2`
    ConvexMix { lambda: f64 },
}

impl fmt::Display for BuiltinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinState::Ghz4 => write!(f, "GHZ4"),
            BuiltinState::W4 => write!(f, "W4"),
            BuiltinState::Mix { p } => write!(f, "MIX(p={p})"),
            BuiltinState::Rho2 => write!(f, "RHO2"),
            BuiltinState::Ghz3 => write!(f, "GHZ3"),
            BuiltinState::ConvexMix { lambda } => write!(f, "CONVEX_MIX(lambda={lambda})"),
        }
    }
}

/// A pure state as a list of `(bitstring, amplitude)` terms.
fn ket(terms: &[(&str, f64)]) -> Vec<Complex64> {
    let n = terms[0].0.len();
    let mut v = vec![ZERO; 1 << n];
    for (bits, amp) in terms {
        let idx = usize::from_str_radix(bits, 2).expect("binary label");
        v[idx] += Complex64::new(*amp, 0.0);
    }
    v
}

fn pure(labels: &[&str], terms: &[(&str, f64)]) -> DensityOperator {
    let register = QubitRegister::qubits(labels).expect("static labels");
    DensityOperator::new(register, HermitianMatrix::outer(&ket(terms)), true)
        .expect("unit-norm ket")
}

const ABCD: [&str; 4] = ["A", "B", "C", "D"];

pub fn w4() -> DensityOperator {
    pure(
        &ABCD,
        &[("0001", 0.5), ("0010", 0.5), ("0100", 0.5), ("1000", 0.5)],
    )
}

pub fn ghz4() -> DensityOperator {
    let s = 0.5f64.sqrt();
    pure(&ABCD, &[("0000", s), ("1111", s)])
}

pub fn ghz3() -> DensityOperator {
    let s = 0.5f64.sqrt();
    pure(&["A", "B", "C"], &[("000", s), ("111", s)])
}

pub fn rho2() -> DensityOperator {
    let a = pure(&ABCD, &[("0000", 1.0)]);
    let b = pure(&ABCD, &[("1111", 1.0)]);
    DensityOperator::mix(0.5, &a, &b).expect("same register")
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(x))
    }
}

pub fn make_state(name: BuiltinState) -> Result<DensityOperator> {
    match name {
        BuiltinState::Ghz4 => Ok(ghz4()),
        BuiltinState::W4 => Ok(w4()),
        BuiltinState::Ghz3 => Ok(ghz3()),
        BuiltinState::Rho2 => Ok(rho2()),
        BuiltinState::Mix { p } => {
            check_unit(p)?;
            DensityOperator::mix(p, &w4(), &ghz4())
        }
        BuiltinState::ConvexMix { lambda } => {
            check_unit(lambda)?;
            DensityOperator::mix(lambda, &w4(), &rho2())
        }
    }
}

/// Built-in channels `C -> C ⊗ D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BuiltinChannel {
    /// `rho -> rho ⊗ |0><0|`
    AppendZero,
    /// Isometry `|0> -> |00>, |1> -> |11>`.
    GhzIsometry,
    /// Measure-and-prepare `|0> -> (|00> + |01>)/sqrt(2)`, `|1> -> |10>`.
    WRecovery,
    /// Measure in the computational basis and append a copy of the outcome.
    MeasureAndAppend,
}

impl fmt::Display for BuiltinChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BuiltinChannel::AppendZero => "APPEND_ZERO",
            BuiltinChannel::GhzIsometry => "GHZ_ISOMETRY",
            BuiltinChannel::WRecovery => "W_RECOVERY",
            BuiltinChannel::MeasureAndAppend => "MEASURE_AND_APPEND",
        };
        f.write_str(s)
    }
}

/// `|k><m|` as a `rows x cols` matrix, scaled by the amplitudes of `out`.
fn ket_bra(out: &[Complex64], input: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(out.len(), cols, |r, c| if c == input { out[r] } else { ZERO })
}

pub fn make_channel_choi(name: BuiltinChannel) -> ChoiOperator {
    let s = 0.5f64.sqrt();
    let kraus: Vec<CMatrix> = match name {
        BuiltinChannel::AppendZero => {
            // V|i> = |i>|0>
            let v = DMatrix::from_fn(4, 2, |r, c| if r == 2 * c { ONE } else { ZERO });
            vec![v]
        }
        BuiltinChannel::GhzIsometry => {
            // V|i> = |i>|i>
            let v = DMatrix::from_fn(4, 2, |r, c| if r == 3 * c { ONE } else { ZERO });
            vec![v]
        }
        BuiltinChannel::WRecovery => vec![
            ket_bra(&ket(&[("00", s), ("01", s)]), 0, 2),
            ket_bra(&ket(&[("10", 1.0)]), 1, 2),
        ],
        BuiltinChannel::MeasureAndAppend => vec![
            ket_bra(&ket(&[("00", 1.0)]), 0, 2),
            ket_bra(&ket(&[("11", 1.0)]), 1, 2),
        ],
    };
    ChoiOperator::from_kraus("C", &["D"], &[2], &kraus).expect("static channel is CPTP")
}
