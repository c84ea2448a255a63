//! Small dense semidefinite programs and the recovery-map problems built on
//! them.

mod problem;
mod recovery;
mod solver;
pub mod svec;
mod sweep;

pub use problem::{BlockId, ConicProblem, Equality, MapTerm, ProblemSummary, PsdBlock, ScalarId};
pub use recovery::{
    build_cptp_feasibility, build_cptp_feasibility_on, build_overhead_problem_on, certify_cptp,
    certify_cptp_on, sampling_overhead, sampling_overhead_on, CptpCertificate, CptpSummary, Nu,
    OverheadResult, OverheadSummary, RecoveryProblem, MARGINAL_TOL, SOLVER_TP_TOL,
};
pub use solver::{
    recheck, solve, ConicSolution, HistoryPoint, SolutionSummary, SolveStatus, SolverConfig,
    Soundness,
};
pub use sweep::{linspace, recoverability_sweep, SweepReport, SweepRow};
