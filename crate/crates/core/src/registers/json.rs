//! JSON state files:
//!
//! ```json
//! {"labels":["A","B","C","D"], "dims":[2,2,2,2],
//!  "re":[[...]], "im":[[...]], "normalized":true}
//! ```
//!
//! `re` and `im` are row-major nested arrays. Floats are written in their
//! shortest round-trip form, so save/load is lossless.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{CMatrix, HermitianMatrix};

use super::density::DensityOperator;
use super::register::QubitRegister;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub normalized: bool,
}

impl From<&DensityOperator> for StateFile {
    fn from(rho: &DensityOperator) -> Self {
        let m = rho.matrix().as_matrix();
        let n = m.nrows();
        let part = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        StateFile {
            labels: rho.labels().to_vec(),
            dims: rho.register().dims().to_vec(),
            re: part(|z| z.re),
            im: part(|z| z.im),
            normalized: rho.is_normalized(),
        }
    }
}

impl TryFrom<StateFile> for DensityOperator {
    type Error = Error;

    fn try_from(file: StateFile) -> Result<Self> {
        let register = QubitRegister::new(&file.labels, &file.dims)?;
        let n = register.total_dim();
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !rows_ok(&file.re) || !rows_ok(&file.im) {
            return Err(Error::Format(format!(
                "`re` and `im` must both be {n}x{n} arrays"
            )));
        }
        let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(file.re[i][j], file.im[i][j]));
        DensityOperator::new(register, HermitianMatrix::new(m)?, file.normalized)
    }
}

impl DensityOperator {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&StateFile::from(self)).expect("plain data serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&StateFile::from(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        DensityOperator::try_from(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, rng};
    use crate::registers::factory::w4;
    use proptest::prelude::*;

    #[test]
    fn w4_file_layout() {
        let text = w4().to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["labels"], serde_json::json!(["A", "B", "C", "D"]));
        assert_eq!(v["dims"], serde_json::json!([2, 2, 2, 2]));
        assert_eq!(v["normalized"], serde_json::json!(true));
        assert_eq!(v["re"][1][8], serde_json::json!(0.25));
        assert_eq!(v["im"].as_array().unwrap().len(), 16);
    }

    #[test]
    fn rejects_ragged_arrays() {
        let mut file = StateFile::from(&w4());
        file.re[3].pop();
        assert!(matches!(DensityOperator::try_from(file), Err(Error::Format(_))));
        assert!(DensityOperator::from_json("{\"labels\":[]}").is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_lossless(seed in any::<u64>(), n in 1usize..4) {
            let labels: Vec<String> = (0..n).map(|k| format!("Q{k}")).collect();
            let reg = QubitRegister::qubits(&labels).unwrap();
            let rho = random_density(&mut rng(seed), &reg);
            let back = DensityOperator::from_json(&rho.to_json()).unwrap();
            prop_assert_eq!(back, rho);
        }
    }
}
