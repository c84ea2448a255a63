//! Two-phase ADMM for small dense SDPs.
//!
//! Phase 1 minimizes `1/2 ||A z - b||^2` over the cone and classifies the
//! problem; phase 2 minimizes the objective over the affine set intersected
//! with the cone, starting from the phase-1 point. Both phases are fully
//! deterministic.

use nalgebra::{linalg::Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{HermitianMatrix, MatrixJson};

use super::problem::ConicProblem;
use super::svec::{project_psd, smat, svec_len};

/// Fixed-point tolerance for declaring an ADMM phase stationary.
const STATIONARY_TOL: f64 = 1e-10;
/// Relative pivot cutoff for the numerical rank of the constraint matrix.
const RANK_TOL: f64 = 1e-10;
const CHECK_EVERY: usize = 10;
const MAX_HISTORY: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Constraint residual (max-abs) accepted as feasible.
    pub eps_feas: f64,
    /// Most negative eigenvalue accepted on PSD blocks.
    pub eps_psd: f64,
    /// Phase-1 residual (Euclidean) above which a stationary problem is
    /// declared infeasible.
    pub eps_infeasible: f64,
    /// Iteration budget shared by both phases.
    pub max_iterations: usize,
    /// Initial ADMM penalty.
    pub rho: f64,
    /// Over-relaxation factor in `(0, 2)`.
    pub relaxation: f64,
    /// Rebalance `rho` from the primal/dual residual ratio.
    pub adaptive_rho: bool,
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps_feas: 1e-7,
            eps_psd: 1e-9,
            eps_infeasible: 1e-5,
            max_iterations: 50_000,
            rho: 1.0,
            relaxation: 1.6,
            adaptive_rho: true,
            record_history: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps_feas", self.eps_feas),
            ("eps_psd", self.eps_psd),
            ("eps_infeasible", self.eps_infeasible),
            ("rho", self.rho),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.eps_feas >= self.eps_infeasible {
            return Err(Error::InvalidConfig(format!(
                "eps_feas ({}) must be below eps_infeasible ({})",
                self.eps_feas, self.eps_infeasible
            )));
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(Error::InvalidConfig(format!(
                "relaxation must lie in (0, 2), got {}",
                self.relaxation
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    /// Budget exhausted, or phase 1 stalled between the feasible and
    /// infeasible thresholds.
    MaxIter,
}

impl SolveStatus {
    pub fn is_feasible(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "OPTIMAL",
            SolveStatus::Feasible => "FEASIBLE",
            SolveStatus::Infeasible => "INFEASIBLE",
            SolveStatus::MaxIter => "MAX_ITER",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub iteration: usize,
    pub phase: u8,
    /// Phase 1: `||A z - b||`; phase 2: objective at the cone iterate.
    pub value: f64,
    pub primal_gap: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub objective_value: f64,
    pub blocks: Vec<HermitianMatrix>,
    pub scalars: Vec<f64>,
    /// Max-abs equality residual, recomputed from the returned values.
    pub primal_residual: f64,
    /// Euclidean equality residual at the end of phase 1.
    pub phase1_residual: f64,
    /// Smallest eigenvalue over all PSD blocks.
    pub min_eigenvalue: f64,
    /// Whether `b` lies in the range of the constraint matrix.
    pub affine_consistent: bool,
    pub phase1_iterations: usize,
    pub phase2_iterations: usize,
    pub history: Vec<HistoryPoint>,
}

impl ConicSolution {
    pub fn iterations(&self) -> usize {
        self.phase1_iterations + self.phase2_iterations
    }

    pub fn summary(&self, with_values: bool) -> SolutionSummary {
        SolutionSummary {
            status: self.status,
            objective_value: self.objective_value,
            primal_residual: self.primal_residual,
            phase1_residual: self.phase1_residual,
            min_eigenvalue: self.min_eigenvalue,
            affine_consistent: self.affine_consistent,
            iterations: self.iterations(),
            phase1_iterations: self.phase1_iterations,
            phase2_iterations: self.phase2_iterations,
            scalars: self.scalars.clone(),
            blocks: with_values.then(|| self.blocks.iter().map(|b| MatrixJson::from(b.as_matrix())).collect()),
            history: with_values.then(|| self.history.clone()),
        }
    }
}

/// JSON view of a [`ConicSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub status: SolveStatus,
    pub objective_value: f64,
    pub primal_residual: f64,
    pub phase1_residual: f64,
    pub min_eigenvalue: f64,
    pub affine_consistent: bool,
    pub iterations: usize,
    pub phase1_iterations: usize,
    pub phase2_iterations: usize,
    pub scalars: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub blocks: Option<Vec<MatrixJson>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub history: Option<Vec<HistoryPoint>>,
}

/// Independent re-check of a solution against the problem data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Soundness {
    pub max_residual: f64,
    pub min_eigenvalue: f64,
    pub sound: bool,
}

/// Re-evaluates the equalities and block spectra directly on the returned
/// matrices and checks them against `slack` times the configured tolerances.
pub fn recheck(problem: &ConicProblem, solution: &ConicSolution, config: &SolverConfig, slack: f64) -> Soundness {
    let max_residual = problem
        .residuals_at(&solution.blocks, &solution.scalars)
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    let min_eigenvalue = solution
        .blocks
        .iter()
        .map(HermitianMatrix::min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let min_eigenvalue = if min_eigenvalue.is_finite() { min_eigenvalue } else { 0.0 };
    Soundness {
        max_residual,
        min_eigenvalue,
        sound: max_residual <= slack * config.eps_feas && min_eigenvalue >= -slack * config.eps_psd,
    }
}

struct Cone {
    /// `(offset, dim)` of each PSD block; the tail is free.
    blocks: Vec<(usize, usize)>,
}

impl Cone {
    fn project(&self, v: &mut DVector<f64>) {
        for &(off, d) in &self.blocks {
            project_psd(&mut v.as_mut_slice()[off..off + svec_len(d)], d);
        }
    }

    fn min_eigenvalue(&self, v: &DVector<f64>) -> f64 {
        self.blocks
            .iter()
            .map(|&(off, d)| {
                HermitianMatrix::new(smat(&v.as_slice()[off..off + svec_len(d)], d))
                    .expect("smat output is Hermitian")
                    .min_eigenvalue()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

struct Affine {
    /// Orthonormal basis of the row space of `A`, as columns.
    v_r: DMatrix<f64>,
    /// Minimum-norm least-squares solution `A^+ b`.
    x0: DVector<f64>,
    /// `||A x0 - b||`.
    range_residual: f64,
}

impl Affine {
    fn new(a: &DMatrix<f64>, b: &DVector<f64>) -> Self {
        let n = a.ncols();
        if a.nrows() == 0 {
            return Affine {
                v_r: DMatrix::zeros(n, 0),
                x0: DVector::zeros(n),
                range_residual: 0.0,
            };
        }
        // Householder QR with column pivoting on A^T: the leading columns of
        // Q span the row space. nalgebra's SVD is not used here because it
        // returns inaccurate factors for some of these matrices.
        let qr = a.transpose().col_piv_qr();
        let r = qr.r();
        let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|k| r[(k, k)].abs()).collect();
        let top = diag.first().copied().unwrap_or(0.0);
        let rank = diag.iter().take_while(|&&x| x > RANK_TOL * top.max(1e-300)).count();
        let v_r = qr.q().columns(0, rank).into_owned();
        // Minimum-norm least squares: x0 = V_r z with z = argmin ||A V_r z - b||.
        let x0 = if rank == 0 {
            DVector::zeros(n)
        } else {
            let reduced = (a * &v_r).qr();
            let rhs = reduced.q().tr_mul(b);
            let z = reduced
                .r()
                .solve_upper_triangular(&rhs)
                .expect("reduced system has full column rank");
            &v_r * z
        };
        let range_residual = (a * &x0 - b).norm();
        Affine { v_r, x0, range_residual }
    }

    fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        let coeffs = self.v_r.tr_mul(v);
        v - &self.v_r * coeffs + &self.x0
    }
}

struct Setup {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    cone: Cone,
    affine: Affine,
}

impl Setup {
    fn new(problem: &ConicProblem) -> Self {
        let (rows, rhs) = problem.dense_constraints();
        let n = problem.num_variables();
        let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        let b = DVector::from_vec(rhs);
        let c = DVector::from_vec(problem.dense_objective());
        let (offsets, _) = problem.layout();
        let cone = Cone {
            blocks: offsets
                .iter()
                .zip(problem.blocks())
                .map(|(&o, blk)| (o, blk.dim))
                .collect(),
        };
        let affine = Affine::new(&a, &b);
        Setup { a, b, c, cone, affine }
    }

    fn residual_norm(&self, z: &DVector<f64>) -> f64 {
        (&self.a * z - &self.b).norm()
    }

    fn residual_max(&self, z: &DVector<f64>) -> f64 {
        (&self.a * z - &self.b).amax()
    }

    /// Projects `z` onto the affine set and keeps it if it stays in the cone.
    fn polish(&self, z: &DVector<f64>, config: &SolverConfig) -> Option<DVector<f64>> {
        let x = self.affine.project(z);
        (self.cone.min_eigenvalue(&x) >= -config.eps_psd && self.residual_max(&x) <= config.eps_feas).then_some(x)
    }
}

fn rebalance(rho: &mut f64, u: &mut DVector<f64>, primal: f64, dual: f64) -> bool {
    let factor = if primal > 10.0 * dual {
        2.0
    } else if dual > 10.0 * primal {
        0.5
    } else {
        return false;
    };
    let next = (*rho * factor).clamp(1e-6, 1e6);
    if next == *rho {
        return false;
    }
    *u *= *rho / next;
    *rho = next;
    true
}

enum Phase1 {
    Feasible(DVector<f64>),
    Infeasible(DVector<f64>),
    Undetermined(DVector<f64>),
}

fn phase1(
    s: &Setup,
    config: &SolverConfig,
    history: &mut Vec<HistoryPoint>,
    iterations: &mut usize,
) -> (Phase1, f64) {
    let n = s.a.ncols();
    let ata = s.a.tr_mul(&s.a);
    let atb = s.a.tr_mul(&s.b);
    let factor = |rho: f64| -> Cholesky<f64, Dyn> {
        Cholesky::new(&ata + DMatrix::identity(n, n) * rho).expect("A^T A + rho I is positive definite")
    };
    let mut rho = config.rho;
    let mut chol = factor(rho);
    let mut z = s.affine.x0.clone();
    s.cone.project(&mut z);
    let mut u = DVector::zeros(n);
    let alpha = config.relaxation;

    let mut k = 0;
    loop {
        if let Some(x) = s.polish(&z, config) {
            let r = s.residual_norm(&x);
            return (Phase1::Feasible(x), r);
        }
        if k >= config.max_iterations {
            let r = s.residual_norm(&z);
            return (Phase1::Undetermined(z), r);
        }
        let mut x = DVector::zeros(n);
        let mut z_old = z.clone();
        for _ in 0..CHECK_EVERY.min(config.max_iterations - k) {
            x = chol.solve(&(&atb + (&z - &u) * rho));
            let xh = &x * alpha + &z * (1.0 - alpha);
            z_old = z.clone();
            z = &xh + &u;
            s.cone.project(&mut z);
            u += &xh - &z;
            k += 1;
        }
        *iterations = k;
        let res = s.residual_norm(&z);
        let scale = 1.0f64.max(z.norm());
        let primal = (&x - &z).norm();
        let dual = rho * (&z - &z_old).norm();
        if config.record_history {
            history.push(HistoryPoint {
                iteration: k,
                phase: 1,
                value: res,
                primal_gap: primal,
                rho,
            });
        }
        if res <= config.eps_feas && s.residual_max(&z) <= config.eps_feas {
            return (Phase1::Feasible(z), res);
        }
        let stationary = primal <= STATIONARY_TOL * scale && dual <= STATIONARY_TOL * scale;
        if stationary && res > config.eps_infeasible {
            return (Phase1::Infeasible(z), res);
        }
        if config.adaptive_rho && k % (5 * CHECK_EVERY) == 0 && rebalance(&mut rho, &mut u, primal, dual) {
            chol = factor(rho);
        }
    }
}

fn phase2(
    s: &Setup,
    start: DVector<f64>,
    config: &SolverConfig,
    history: &mut Vec<HistoryPoint>,
    budget: usize,
) -> (DVector<f64>, bool, usize) {
    let n = start.len();
    let mut rho = config.rho;
    let alpha = config.relaxation;
    let mut z = start.clone();
    let mut u = DVector::zeros(n);
    let mut best = start;
    let mut k = 0;
    while k < budget {
        let mut x = DVector::zeros(n);
        let mut z_old = z.clone();
        for _ in 0..CHECK_EVERY.min(budget - k) {
            x = s.affine.project(&(&z - &u - &s.c / rho));
            let xh = &x * alpha + &z * (1.0 - alpha);
            z_old = z.clone();
            z = &xh + &u;
            s.cone.project(&mut z);
            u += &xh - &z;
            k += 1;
        }
        let scale = 1.0f64.max(z.norm());
        let primal = (&x - &z).norm();
        let dual = rho * (&z - &z_old).norm();
        if config.record_history {
            history.push(HistoryPoint {
                iteration: k,
                phase: 2,
                value: s.c.dot(&z),
                primal_gap: primal,
                rho,
            });
        }
        if let Some(p) = s.polish(&z, config) {
            best = p;
            if primal <= STATIONARY_TOL * scale && dual <= STATIONARY_TOL * scale {
                return (best, true, k);
            }
        }
        if config.adaptive_rho && k % (5 * CHECK_EVERY) == 0 {
            rebalance(&mut rho, &mut u, primal, dual);
        }
    }
    (best, false, k)
}

fn downsample(history: Vec<HistoryPoint>) -> Vec<HistoryPoint> {
    if history.len() <= MAX_HISTORY {
        return history;
    }
    let step = history.len().div_ceil(MAX_HISTORY - 1);
    let last = history.last().cloned();
    let mut out: Vec<_> = history.into_iter().step_by(step).collect();
    if let Some(l) = last {
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
    out
}

/// Solves `problem` with the two-phase scheme described in the module docs.
///
/// A problem whose right-hand side lies outside the range of the constraint
/// matrix by more than `eps_infeasible` is infeasible regardless of the cone
/// and is reported as such without iterating.
pub fn solve(problem: &ConicProblem, config: &SolverConfig) -> Result<ConicSolution> {
    config.validate()?;
    problem.validate()?;
    let setup = Setup::new(problem);
    let mut history = Vec::new();
    let mut p1_iters = 0;
    let mut p2_iters = 0;
    let affine_consistent = setup.affine.range_residual <= config.eps_infeasible;

    let (status, z, phase1_residual) = if !affine_consistent {
        let mut z = setup.affine.x0.clone();
        setup.cone.project(&mut z);
        (SolveStatus::Infeasible, z, setup.affine.range_residual)
    } else {
        match phase1(&setup, config, &mut history, &mut p1_iters) {
            (Phase1::Infeasible(z), r) => (SolveStatus::Infeasible, z, r),
            (Phase1::Undetermined(z), r) => (SolveStatus::MaxIter, z, r),
            (Phase1::Feasible(z), r) => {
                if problem.has_objective() {
                    let budget = config.max_iterations.saturating_sub(p1_iters);
                    let (x, converged, k) = phase2(&setup, z, config, &mut history, budget);
                    p2_iters = k;
                    let status = if converged {
                        SolveStatus::Optimal
                    } else {
                        SolveStatus::Feasible
                    };
                    (status, x, r)
                } else {
                    (SolveStatus::Feasible, z, r)
                }
            }
        }
    };

    let (offsets, scalar_base) = problem.layout();
    let blocks: Vec<HermitianMatrix> = offsets
        .iter()
        .zip(problem.blocks())
        .map(|(&o, blk)| {
            HermitianMatrix::new(smat(&z.as_slice()[o..o + svec_len(blk.dim)], blk.dim))
                .expect("smat output is Hermitian")
        })
        .collect();
    let scalars = z.as_slice()[scalar_base..].to_vec();
    let primal_residual = problem
        .residuals_at(&blocks, &scalars)
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    let min_eigenvalue = blocks
        .iter()
        .map(HermitianMatrix::min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    Ok(ConicSolution {
        status,
        objective_value: problem.objective_at(&blocks, &scalars),
        blocks,
        scalars,
        primal_residual,
        phase1_residual,
        min_eigenvalue: if min_eigenvalue.is_finite() { min_eigenvalue } else { 0.0 },
        affine_consistent,
        phase1_iterations: p1_iters,
        phase2_iterations: p2_iters,
        history: downsample(history),
    })
}
