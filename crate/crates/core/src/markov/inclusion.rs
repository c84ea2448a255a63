use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{format_ket, kernel_basis, subspace_contained, DEFAULT_REL_TOL};
use crate::registers::DensityOperator;

use super::conditional::conditional_block;

/// Leak norms at or below this count as contained.
pub const DEFAULT_INCLUSION_TOL: f64 = 1e-8;

/// Kernel comparison for a single measurement outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeInclusion {
    #[serde(rename = "j")]
    pub outcome: usize,
    pub ker_dim_ac: usize,
    pub ker_dim_bc: usize,
    pub contained: bool,
    pub max_leak: f64,
    /// Kernel vector of the AC block with the largest component outside the
    /// BC kernel, when containment fails.
    pub leaking_vector: Option<String>,
}

/// Per-outcome kernel-inclusion verdicts for a three-party state.
///
/// A passing verdict does not certify that a recovery map exists. A failing
/// one is not a proof of impossibility either: when `B` is pinned to a
/// product factor the BC blocks can be supported on different `C` slots than
/// the AC blocks while an append map still rebuilds the state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub verdict: bool,
    pub tol: f64,
    pub rel_tol: f64,
    pub labels: Vec<String>,
    pub outcomes: Vec<OutcomeInclusion>,
    pub semantics: String,
}

/// Checks `Ker(rho_AC|j) ⊆ Ker(rho_BC|j)` for every outcome `j` of the third
/// label, with conditional blocks from [`conditional_block`].
pub fn kernel_inclusion_check(rho: &DensityOperator, tol: f64) -> Result<InclusionReport> {
    kernel_inclusion_check_with(rho, tol, DEFAULT_REL_TOL)
}

pub fn kernel_inclusion_check_with(
    rho: &DensityOperator,
    tol: f64,
    rel_tol: f64,
) -> Result<InclusionReport> {
    let labels = rho.labels();
    if labels.len() != 3 {
        return Err(Error::WrongLabelCount {
            expected: 3,
            found: labels.len(),
        });
    }
    let (a, b, c) = (&labels[0], &labels[1], &labels[2]);
    if rho.register().dim_of(a)? != rho.register().dim_of(b)? {
        return Err(Error::InvalidRegister(format!(
            "`{a}` and `{b}` must have equal dimension to compare kernels"
        )));
    }
    let mut outcomes = Vec::new();
    for j in 0..rho.register().dim_of(c)? {
        let ac = conditional_block(rho, c, j, &[b])?;
        let bc = conditional_block(rho, c, j, &[a])?;
        let ker_ac = kernel_basis(ac.matrix(), rel_tol)?;
        let ker_bc = kernel_basis(bc.matrix(), rel_tol)?;
        let check = subspace_contained(&ker_ac, &ker_bc, tol)?;
        let leaking_vector = match (check.contained, check.worst_column) {
            (false, Some(k)) => Some(format_ket(&ker_ac.column(k), 2)),
            _ => None,
        };
        outcomes.push(OutcomeInclusion {
            outcome: j,
            ker_dim_ac: ker_ac.dim(),
            ker_dim_bc: ker_bc.dim(),
            contained: check.contained,
            max_leak: check.max_leak,
            leaking_vector,
        });
    }
    Ok(InclusionReport {
        verdict: outcomes.iter().all(|o| o.contained),
        tol,
        rel_tol,
        labels: labels.to_vec(),
        outcomes,
        semantics: "necessary condition only; a pass does not certify recoverability".into(),
    })
}
