use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{kernel_inclusion_check, DEFAULT_INCLUSION_TOL};
use crate::registers::DensityOperator;

use super::recovery::{certify_cptp, sampling_overhead, Nu};
use super::solver::{SolveStatus, SolverConfig};

/// One grid point of [`recoverability_sweep`]. Failed stages are `None` and
/// their errors are collected in `errors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub inclusion: Option<bool>,
    pub cptp: Option<SolveStatus>,
    pub hptp: Option<SolveStatus>,
    pub nu: Option<Nu>,
    pub c_sum: Option<f64>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Smallest grid point whose marginal passes the inclusion test.
    pub smallest_inclusion_p: Option<f64>,
    /// Whether every grid point at or above `smallest_inclusion_p` passes.
    pub inclusion_upward_closed: bool,
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count)
            .map(|k| {
                if k == count - 1 {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

fn sweep_point<F>(family: &F, p: f64, config: &SolverConfig) -> SweepRow
where
    F: Fn(f64) -> Result<DensityOperator>,
{
    let mut row = SweepRow {
        p,
        inclusion: None,
        cptp: None,
        hptp: None,
        nu: None,
        c_sum: None,
        errors: vec![],
    };
    let pair = family(p).and_then(|target| {
        let last = target
            .labels()
            .last()
            .cloned()
            .ok_or_else(|| Error::InvalidRegister("empty register".into()))?;
        let marginal = target.partial_trace(&[last])?;
        Ok((target, marginal))
    });
    let (target, marginal) = match pair {
        Ok(x) => x,
        Err(e) => {
            row.errors.push(format!("state: {e}"));
            return row;
        }
    };
    match kernel_inclusion_check(&marginal, DEFAULT_INCLUSION_TOL) {
        Ok(r) => row.inclusion = Some(r.verdict),
        Err(e) => row.errors.push(format!("inclusion: {e}")),
    }
    match certify_cptp(&marginal, &target, config) {
        Ok(c) => row.cptp = Some(c.status),
        Err(e) => row.errors.push(format!("cptp: {e}")),
    }
    match sampling_overhead(&marginal, &target, config) {
        Ok(o) => {
            row.hptp = Some(o.status);
            row.nu = o.nu;
            row.c_sum = o.c_sum();
        }
        Err(e) => row.errors.push(format!("hptp: {e}")),
    }
    row
}

/// Runs the inclusion test, CPTP feasibility and the overhead problem on
/// `family(p)` for every `p` in `grid`, in parallel. The marginal drops the
/// last label of each state.
pub fn recoverability_sweep<F>(family: F, grid: &[f64], config: &SolverConfig) -> Result<SweepReport>
where
    F: Fn(f64) -> Result<DensityOperator> + Sync,
{
    config.validate()?;
    if let Some(&bad) = grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::ParameterOutOfRange(bad));
    }
    let rows: Vec<SweepRow> = grid.par_iter().map(|&p| sweep_point(&family, p, config)).collect();
    let smallest_inclusion_p = rows
        .iter()
        .filter(|r| r.inclusion == Some(true))
        .map(|r| r.p)
        .fold(None, |m: Option<f64>, p| Some(m.map_or(p, |m| m.min(p))));
    let inclusion_upward_closed = match smallest_inclusion_p {
        Some(p0) => rows.iter().filter(|r| r.p >= p0).all(|r| r.inclusion == Some(true)),
        None => true,
    };
    Ok(SweepReport {
        rows,
        smallest_inclusion_p,
        inclusion_upward_closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::{make_state, BuiltinState};

    #[test]
    fn grid_endpoints_are_exact() {
        let g = linspace(0.0, 1.0, 21);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[20], 1.0);
        assert!((g[5] - 0.25).abs() < 1e-15);
        assert_eq!(linspace(0.3, 0.7, 1), vec![0.3]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn rejects_out_of_range_grid() {
        let family = |p| make_state(BuiltinState::Mix { p });
        assert!(matches!(
            recoverability_sweep(family, &[0.5, 1.5], &SolverConfig::default()),
            Err(Error::ParameterOutOfRange(_))
        ));
    }

    #[test]
    fn errors_are_recorded_per_point() {
        let family = |p: f64| {
            if p > 0.5 {
                Err(Error::ParameterOutOfRange(p))
            } else {
                make_state(BuiltinState::Mix { p })
            }
        };
        let report = recoverability_sweep(family, &[0.25, 0.75], &SolverConfig::default()).unwrap();
        assert!(report.rows[0].errors.is_empty());
        assert_eq!(report.rows[0].inclusion, Some(true));
        assert_eq!(report.rows[1].errors.len(), 1);
        assert_eq!(report.rows[1].inclusion, None);
    }
}
