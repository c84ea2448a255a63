//! Recovery-map problems: CPTP feasibility and the quasiprobability
//! sampling overhead `nu = log2 min (c1 + c2)`.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linops::{eigh, CMatrix, HermitianMatrix, ZERO};
use crate::markov::{apply_choi_raw, verify_recovery};
use crate::registers::{ChoiOperator, DensityOperator, QubitRegister};

use super::problem::{BlockId, ConicProblem, MapTerm, ScalarId};
use super::solver::{recheck, solve, ConicSolution, SolutionSummary, SolveStatus, SolverConfig, Soundness};

/// Tolerance on `Tr_ext(target) = marginal`.
pub const MARGINAL_TOL: f64 = 1e-10;
/// Trace-preservation tolerance applied to solver-produced Choi operators.
pub const SOLVER_TP_TOL: f64 = 1e-6;

/// A recovery problem for a channel `act_on -> act_on ⊗ extension`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryProblem {
    pub problem: ConicProblem,
    pub choi_blocks: Vec<BlockId>,
    pub scalars: Vec<ScalarId>,
    pub act_on: String,
    pub extension: QubitRegister,
    pub input_dim: usize,
}

struct Geometry {
    pos: usize,
    input_dim: usize,
    extension: QubitRegister,
}

fn geometry(marginal: &DensityOperator, target: &DensityOperator, act_on: &str) -> Result<Geometry> {
    let mreg = marginal.register();
    let pos = mreg.position(act_on)?;
    let treg = target.register();
    let ext_labels: Vec<String> = treg
        .labels()
        .iter()
        .filter(|l| !mreg.contains(l))
        .cloned()
        .collect();
    if ext_labels.is_empty() {
        return Err(Error::InvalidRegister("target has no labels beyond the marginal".into()));
    }
    let ext_dims: Vec<usize> = ext_labels
        .iter()
        .map(|l| treg.dim_of(l))
        .collect::<Result<_>>()?;
    let extension = QubitRegister::new(&ext_labels, &ext_dims)?;
    let expected = mreg.insert_after(pos, &extension)?;
    if &expected != treg {
        return Err(Error::InvalidRegister(format!(
            "target labels {:?} must equal the marginal labels with {:?} inserted after `{act_on}`",
            treg.labels(),
            ext_labels
        )));
    }
    let deviation = target.partial_trace(&ext_labels)?.max_abs_diff(marginal)?;
    if deviation > MARGINAL_TOL {
        return Err(Error::MarginalMismatch { deviation });
    }
    Ok(Geometry {
        pos,
        input_dim: mreg.dims()[pos],
        extension,
    })
}

fn output_trace(j: &CMatrix, d_in: usize) -> CMatrix {
    let d_out = j.nrows() / d_in;
    CMatrix::from_fn(d_in, d_in, |i, k| {
        (0..d_out).map(|o| j[(i * d_out + o, k * d_out + o)]).sum()
    })
}

/// CPTP feasibility for recovering `target` from `marginal` with a channel
/// on `C`. See [`build_cptp_feasibility_on`].
pub fn build_cptp_feasibility(marginal: &DensityOperator, target: &DensityOperator) -> Result<RecoveryProblem> {
    build_cptp_feasibility_on(marginal, target, "C")
}

/// One PSD Choi variable `J` with `Tr_out J = I` and
/// `(id ⊗ R_J)(marginal) = target`; zero objective.
///
/// The target register must be the marginal register with the extra labels
/// inserted right after `act_on`, and `Tr_extra(target)` must equal
/// `marginal` within [`MARGINAL_TOL`].
pub fn build_cptp_feasibility_on(
    marginal: &DensityOperator,
    target: &DensityOperator,
    act_on: &str,
) -> Result<RecoveryProblem> {
    let g = geometry(marginal, target, act_on)?;
    let d_in = g.input_dim;
    let dim = d_in * d_in * g.extension.total_dim();
    let mut problem = ConicProblem::new();
    let j = problem.add_psd_block("J", dim);

    let tr: &dyn Fn(&CMatrix) -> CMatrix = &|m| output_trace(m, d_in);
    problem.add_matrix_equality(
        &[MapTerm { block: j, map: tr }],
        &[],
        &HermitianMatrix::identity(d_in),
        "trace_preserving",
    )?;
    let reconstruct = |m: &CMatrix| -> CMatrix {
        apply_choi_raw(marginal.register(), marginal.matrix().as_matrix(), m, &g.extension, g.pos)
            .expect("dimensions checked")
            .1
    };
    problem.add_matrix_equality(
        &[MapTerm { block: j, map: &reconstruct }],
        &[],
        target.matrix(),
        "reconstruction",
    )?;
    Ok(RecoveryProblem {
        problem,
        choi_blocks: vec![j],
        scalars: vec![],
        act_on: act_on.to_string(),
        extension: g.extension,
        input_dim: d_in,
    })
}

/// Two PSD variables `J1, J2` and free scalars `c1, c2` with
/// `Tr_out J_k = c_k I`, `(id ⊗ R_{J1 - J2})(marginal) = target`, minimizing
/// `c1 + c2`.
pub fn build_overhead_problem_on(
    marginal: &DensityOperator,
    target: &DensityOperator,
    act_on: &str,
) -> Result<RecoveryProblem> {
    let g = geometry(marginal, target, act_on)?;
    let d_in = g.input_dim;
    let dim = d_in * d_in * g.extension.total_dim();
    let mut problem = ConicProblem::new();
    let j1 = problem.add_psd_block("J1", dim);
    let j2 = problem.add_psd_block("J2", dim);
    let c1 = problem.add_scalar("c1");
    let c2 = problem.add_scalar("c2");
    let minus_id = HermitianMatrix::identity(d_in).scale(-1.0);
    let zero = HermitianMatrix::zeros(d_in);

    let tr: &dyn Fn(&CMatrix) -> CMatrix = &|m| output_trace(m, d_in);
    for (block, c, tag) in [(j1, c1, "normalization_1"), (j2, c2, "normalization_2")] {
        problem.add_matrix_equality(&[MapTerm { block, map: tr }], &[(c, &minus_id)], &zero, tag)?;
    }
    let plus = |m: &CMatrix| -> CMatrix {
        apply_choi_raw(marginal.register(), marginal.matrix().as_matrix(), m, &g.extension, g.pos)
            .expect("dimensions checked")
            .1
    };
    let minus = |m: &CMatrix| -> CMatrix { -plus(m) };
    problem.add_matrix_equality(
        &[MapTerm { block: j1, map: &plus }, MapTerm { block: j2, map: &minus }],
        &[],
        target.matrix(),
        "reconstruction",
    )?;
    problem.set_objective(&[], &[(c1, 1.0), (c2, 1.0)])?;
    Ok(RecoveryProblem {
        problem,
        choi_blocks: vec![j1, j2],
        scalars: vec![c1, c2],
        act_on: act_on.to_string(),
        extension: g.extension,
        input_dim: d_in,
    })
}

impl RecoveryProblem {
    fn choi(&self, matrix: HermitianMatrix, cp: bool) -> Result<ChoiOperator> {
        ChoiOperator::with_tolerance(
            &self.act_on,
            self.input_dim,
            self.extension.labels(),
            self.extension.dims(),
            matrix,
            cp,
            SOLVER_TP_TOL,
        )
    }
}

/// Clips negative eigenvalues (within solver tolerance) to zero.
fn clip_psd(h: &HermitianMatrix) -> HermitianMatrix {
    let eig = eigh(h);
    let n = h.dim();
    let mut m = CMatrix::from_element(n, n, ZERO);
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam > 0.0 {
            let col = eig.vectors.column(k);
            m += col * col.adjoint() * num_complex::Complex64::new(lam, 0.0);
        }
    }
    HermitianMatrix::new(m).expect("sum of projectors is Hermitian")
}

/// Outcome of the CPTP feasibility problem, independently re-verified.
#[derive(Debug, Clone, PartialEq)]
pub struct CptpCertificate {
    pub status: SolveStatus,
    pub solution: ConicSolution,
    /// Present for feasible answers.
    pub soundness: Option<Soundness>,
    /// The recovered channel, with eigenvalues clipped to be exactly PSD.
    pub choi: Option<ChoiOperator>,
    /// `verify_recovery` residual of `choi`.
    pub certificate_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptpSummary {
    pub status: SolveStatus,
    pub solution: SolutionSummary,
    pub soundness: Option<Soundness>,
    pub certificate_residual: Option<f64>,
}

impl CptpCertificate {
    pub fn summary(&self, with_values: bool) -> CptpSummary {
        CptpSummary {
            status: self.status,
            solution: self.solution.summary(with_values),
            soundness: self.soundness.clone(),
            certificate_residual: self.certificate_residual,
        }
    }
}

/// Solves [`build_cptp_feasibility_on`] and re-verifies a feasible answer
/// with [`verify_recovery`].
pub fn certify_cptp_on(
    marginal: &DensityOperator,
    target: &DensityOperator,
    act_on: &str,
    config: &SolverConfig,
) -> Result<CptpCertificate> {
    let rp = build_cptp_feasibility_on(marginal, target, act_on)?;
    let solution = solve(&rp.problem, config)?;
    let soundness = solution
        .status
        .is_feasible()
        .then(|| recheck(&rp.problem, &solution, config, 10.0));
    let (choi, certificate_residual) = if solution.status.is_feasible() {
        let j = rp.choi(clip_psd(&solution.blocks[0]), true)?;
        let r = verify_recovery(target, marginal, &j)?;
        (Some(j), Some(r))
    } else {
        (None, None)
    };
    Ok(CptpCertificate {
        status: solution.status,
        solution,
        soundness,
        choi,
        certificate_residual,
    })
}

pub fn certify_cptp(
    marginal: &DensityOperator,
    target: &DensityOperator,
    config: &SolverConfig,
) -> Result<CptpCertificate> {
    certify_cptp_on(marginal, target, "C", config)
}

/// Sampling overhead exponent; `Infinite` serializes as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nu {
    Finite(f64),
    Infinite,
}

impl Nu {
    pub fn is_infinite(self) -> bool {
        matches!(self, Nu::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Nu::Finite(v) => Some(v),
            Nu::Infinite => None,
        }
    }
}

impl fmt::Display for Nu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nu::Finite(v) => write!(f, "{v}"),
            Nu::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Nu {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Nu::Finite(v) => s.serialize_f64(*v),
            Nu::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Nu {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct NuVisitor;
        impl Visitor<'_> for NuVisitor {
            type Value = Nu;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Nu, E> {
                Ok(Nu::Finite(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Nu, E> {
                Ok(Nu::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Nu, E> {
                Ok(Nu::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Nu, E> {
                if v == "inf" {
                    Ok(Nu::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(NuVisitor)
    }
}

/// Result of [`sampling_overhead`]. `nu` is `None` when the solver could not
/// classify the problem within its budget.
#[derive(Debug, Clone, PartialEq)]
pub struct OverheadResult {
    pub status: SolveStatus,
    pub nu: Option<Nu>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// `J1 - J2`, not completely positive in general.
    pub choi_difference: Option<ChoiOperator>,
    pub certificate_residual: Option<f64>,
    /// Present for feasible answers.
    pub soundness: Option<Soundness>,
    pub solution: ConicSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadSummary {
    pub status: SolveStatus,
    pub nu: Option<Nu>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c_sum: Option<f64>,
    pub certificate_residual: Option<f64>,
    pub soundness: Option<Soundness>,
    pub solution: SolutionSummary,
}

impl OverheadResult {
    pub fn c_sum(&self) -> Option<f64> {
        Some(self.c1? + self.c2?)
    }

    pub fn summary(&self, with_values: bool) -> OverheadSummary {
        OverheadSummary {
            status: self.status,
            nu: self.nu,
            c1: self.c1,
            c2: self.c2,
            c_sum: self.c_sum(),
            certificate_residual: self.certificate_residual,
            soundness: self.soundness.clone(),
            solution: self.solution.summary(with_values),
        }
    }
}

/// Minimal `c1 + c2` over Hermitian-preserving recoveries `c1 N1 - c2 N2`
/// with `N1, N2` CPTP on `act_on`, and `nu = log2(c1 + c2)`.
pub fn sampling_overhead_on(
    marginal: &DensityOperator,
    target: &DensityOperator,
    act_on: &str,
    config: &SolverConfig,
) -> Result<OverheadResult> {
    let rp = build_overhead_problem_on(marginal, target, act_on)?;
    let solution = solve(&rp.problem, config)?;
    let soundness = solution
        .status
        .is_feasible()
        .then(|| recheck(&rp.problem, &solution, config, 10.0));
    let mut out = OverheadResult {
        status: solution.status,
        nu: None,
        c1: None,
        c2: None,
        choi_difference: None,
        certificate_residual: None,
        soundness,
        solution,
    };
    match out.status {
        SolveStatus::Infeasible => out.nu = Some(Nu::Infinite),
        SolveStatus::MaxIter => {}
        SolveStatus::Optimal | SolveStatus::Feasible => {
            let sol = &out.solution;
            let (c1, c2) = (sol.scalars[0], sol.scalars[1]);
            let diff = sol.blocks[0].combine(1.0, &sol.blocks[1], -1.0)?;
            let j = rp.choi(diff, false)?;
            out.certificate_residual = Some(verify_recovery(target, marginal, &j)?);
            out.choi_difference = Some(j);
            out.c1 = Some(c1);
            out.c2 = Some(c2);
            out.nu = Some(Nu::Finite((c1 + c2).log2()));
        }
    }
    Ok(out)
}

pub fn sampling_overhead(
    marginal: &DensityOperator,
    target: &DensityOperator,
    config: &SolverConfig,
) -> Result<OverheadResult> {
    sampling_overhead_on(marginal, target, "C", config)
}
