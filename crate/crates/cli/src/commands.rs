use std::fmt::Write;

use anyhow::{bail, Result};
use serde_json::{json, Value};

use vqmc::conic::{
    certify_cptp_on, recoverability_sweep, sampling_overhead_on, SolveStatus, Soundness, SweepReport,
};
use vqmc::linops::MatrixJson;
use vqmc::markov::{conditional_decomposition, ConditionalBlock, kernel_inclusion_check, DEFAULT_INCLUSION_TOL};
use vqmc::registers::{make_state, BuiltinState, DensityOperator, StateFile};

use crate::args::{CertifyArgs, Family, InclusionArgs, Mode, StateArgs, SweepArgs};
use crate::input::{builtin_state, load_state, parse_grid, solver_config, write_file};
use crate::pretty;
use crate::report::{RunReport, Verdict};

/// A finished command: the JSON report and its text rendering.
pub struct Outcome {
    pub report: RunReport,
    pub table: String,
    pub verdict: Verdict,
}

/// Exit status of a solve, downgraded when the independent re-check fails.
pub fn solve_verdict(status: SolveStatus, soundness: Option<&Soundness>) -> Verdict {
    match status {
        SolveStatus::Optimal | SolveStatus::Feasible => {
            if soundness.is_some_and(|s| s.sound) {
                Verdict::Pass
            } else {
                Verdict::Undetermined
            }
        }
        SolveStatus::Infeasible => Verdict::Fail,
        SolveStatus::MaxIter => Verdict::Undetermined,
    }
}

pub fn state(args: &StateArgs) -> Result<Verdict> {
    let rho = make_state(builtin_state(args.name, &args.params)?)?;
    if args.pretty {
        let mut s = format!("{:?}, dims {:?}\n", rho.labels(), rho.register().dims());
        let m = rho.matrix().as_matrix();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)].norm() > 0.0 {
                    let _ = writeln!(s, "  [{i:>2},{j:>2}] {:+.6} {:+.6}i", m[(i, j)].re, m[(i, j)].im);
                }
            }
        }
        print!("{s}");
    }
    let text = rho.to_json() + "\n";
    match &args.out {
        Some(path) => {
            let written = write_file(path, &text)?;
            eprintln!("wrote {}", written.display());
        }
        None if !args.pretty => print!("{text}"),
        None => {}
    }
    Ok(Verdict::Pass)
}

/// A three-label marginal: four-label states drop their last label.
pub fn marginal_of(rho: &DensityOperator) -> Result<DensityOperator> {
    match rho.labels().len() {
        4 => Ok(rho.partial_trace(&[rho.labels()[3].clone()])?),
        3 => Ok(rho.clone()),
        n => bail!(vqmc::Error::WrongLabelCount { expected: 3, found: n }),
    }
}

/// `(AC|j, BC|j)` conditional blocks of a three-label marginal.
fn conditional_pairs(marginal: &DensityOperator) -> Result<Vec<(ConditionalBlock, ConditionalBlock)>> {
    let l = marginal.labels();
    let ac = conditional_decomposition(marginal, &l[2], &[l[1].clone()])?;
    let bc = conditional_decomposition(marginal, &l[2], &[l[0].clone()])?;
    Ok(ac.into_iter().zip(bc).collect())
}

pub fn inclusion(args: &InclusionArgs) -> Result<Outcome> {
    let (rho, mut inputs) = load_state(&args.input)?;
    let marginal = marginal_of(&rho)?;
    let tol = args.tol.unwrap_or(DEFAULT_INCLUSION_TOL);
    let report = kernel_inclusion_check(&marginal, tol)?;
    inputs["labels"] = json!(rho.labels());
    inputs["tol"] = json!(tol);
    let mut results = serde_json::to_value(&report)?;
    let mut table = pretty::inclusion(&report);
    if args.output.verbose {
        let pairs = conditional_pairs(&marginal)?;
        let mut blocks = Vec::new();
        for (a, b) in &pairs {
            table += &pretty::matrix(&format!("AC|{}", a.outcome), a.matrix().as_matrix());
            table += &pretty::matrix(&format!("BC|{}", b.outcome), b.matrix().as_matrix());
            blocks.push(json!({
                "j": a.outcome,
                "weight": a.weight,
                "ac": MatrixJson::from(a.matrix().as_matrix()),
                "bc": MatrixJson::from(b.matrix().as_matrix()),
            }));
        }
        results["conditional_blocks"] = json!(blocks);
    }
    let verdict = if report.verdict { Verdict::Pass } else { Verdict::Fail };
    Ok(Outcome {
        report: RunReport::new("inclusion", inputs, results, None, verdict),
        table,
        verdict,
    })
}

pub fn certify(args: &CertifyArgs) -> Result<Outcome> {
    let (rho, mut inputs) = load_state(&args.input)?;
    let labels = rho.labels().to_vec();
    if labels.len() != 4 {
        bail!(vqmc::Error::WrongLabelCount { expected: 4, found: labels.len() });
    }
    let marginal = rho.partial_trace(&[labels[3].clone()])?;
    let config = solver_config(&args.solver)?;
    let act_on = &labels[2];
    inputs["labels"] = json!(labels);
    inputs["act_on"] = json!(act_on);
    let verbose = args.output.verbose;
    let (results, verdict, table) = match args.mode {
        Mode::Cptp => {
            inputs["mode"] = json!("cptp");
            let cert = certify_cptp_on(&marginal, &rho, act_on, &config)?;
            let verdict = solve_verdict(cert.status, cert.soundness.as_ref());
            let mut results = serde_json::to_value(cert.summary(verbose))?;
            let mut table = format!(
                "CPTP recovery on {act_on}: {}\n  phase-1 residual {:.3e}, primal residual {:.3e}, iterations {}\n  certificate residual {}\n",
                cert.status,
                cert.solution.phase1_residual,
                cert.solution.primal_residual,
                cert.solution.iterations(),
                pretty::opt(cert.certificate_residual),
            );
            if let Some(choi) = cert.choi.as_ref().filter(|_| verbose) {
                results["choi"] = json!(MatrixJson::from(choi.matrix().as_matrix()));
                table += &pretty::matrix("Choi operator", choi.matrix().as_matrix());
            }
            (results, verdict, table)
        }
        Mode::Hptp => {
            inputs["mode"] = json!("hptp");
            let o = sampling_overhead_on(&marginal, &rho, act_on, &config)?;
            let verdict = solve_verdict(o.status, o.soundness.as_ref());
            let mut results = serde_json::to_value(o.summary(verbose))?;
            let mut table = format!(
                "HPTP overhead on {act_on}: {}\n  nu {}, c1 {}, c2 {}, c1+c2 {}\n  certificate residual {}\n",
                o.status,
                pretty::nu(o.nu),
                pretty::opt(o.c1),
                pretty::opt(o.c2),
                pretty::opt(o.c_sum()),
                pretty::opt(o.certificate_residual),
            );
            if let Some(j) = o.choi_difference.as_ref().filter(|_| verbose) {
                results["choi_difference"] = json!(MatrixJson::from(j.matrix().as_matrix()));
                table += &pretty::matrix("J1 - J2", j.matrix().as_matrix());
            }
            (results, verdict, table)
        }
    };
    Ok(Outcome {
        report: RunReport::new("certify", inputs, results, Some(config), verdict),
        table,
        verdict,
    })
}

fn sweep_table(report: &SweepReport) -> String {
    let mut s = format!(
        "{:>8}  {:>9}  {:>10}  {:>10}  {:>10}  {:>10}\n",
        "p", "inclusion", "cptp", "hptp", "nu", "c1+c2"
    );
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{:>8.4}  {:>9}  {:>10}  {:>10}  {:>10}  {:>10}{}",
            r.p,
            r.inclusion.map_or("-".into(), |b| b.to_string()),
            pretty::status(r.cptp),
            pretty::status(r.hptp),
            pretty::nu(r.nu),
            pretty::opt(r.c_sum),
            if r.errors.is_empty() { String::new() } else { format!("  {}", r.errors.join("; ")) }
        );
    }
    let _ = writeln!(
        s,
        "smallest inclusion-passing p: {}{}",
        report.smallest_inclusion_p.map_or("none".into(), |p| p.to_string()),
        if report.inclusion_upward_closed { "" } else { " (not upward closed)" }
    );
    s
}

pub fn sweep(args: &SweepArgs) -> Result<Outcome> {
    let grid = parse_grid(&args.grid)?;
    let config = solver_config(&args.solver)?;
    let family = args.family;
    let report = recoverability_sweep(
        move |p| {
            make_state(match family {
                Family::Mix => BuiltinState::Mix { p },
                Family::ConvexMix => BuiltinState::ConvexMix { lambda: p },
            })
        },
        &grid,
        &config,
    )?;
    let incomplete = report.rows.iter().any(|r| {
        !r.errors.is_empty() || r.cptp == Some(SolveStatus::MaxIter) || r.hptp == Some(SolveStatus::MaxIter)
    });
    let verdict = if incomplete { Verdict::Undetermined } else { Verdict::Pass };
    let inputs = json!({
        "family": match family { Family::Mix => "MIX", Family::ConvexMix => "CONVEX_MIX" },
        "grid": args.grid,
        "points": grid,
    });
    let table = sweep_table(&report);
    Ok(Outcome {
        report: RunReport::new("sweep", inputs, serde_json::to_value(&report)?, Some(config), verdict),
        table,
        verdict,
    })
}

/// Serializes a state for `--verbose` output.
pub fn state_json(rho: &DensityOperator) -> Value {
    json!(StateFile::from(rho))
}
