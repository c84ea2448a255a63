use std::fmt::Write;

use anyhow::Result;
use serde_json::{json, Value};

use vqmc::conic::{certify_cptp, certify_cptp_on, sampling_overhead, Nu, SolveStatus, SolverConfig};
use vqmc::linops::{max_abs_diff, CMatrix, HermitianMatrix, MatrixJson};
use vqmc::markov::{
    apply_choi, kernel_inclusion_check, marginal_block_consistency, theta_blocks, verify_recovery, BlockJson,
    DEFAULT_INCLUSION_TOL,
};
use vqmc::registers::{make_channel_choi, make_state, BuiltinChannel, BuiltinState, DensityOperator, QubitRegister};

use crate::args::{DemoArgs, DemoName};
use crate::commands::{solve_verdict, state_json, Outcome};
use crate::input::solver_config;
use crate::pretty;
use crate::report::{RunReport, Verdict};

/// Residual below which the append-channel reconstruction counts as exact.
const EXACT_TOL: f64 = 1e-12;

pub fn run(args: &DemoArgs) -> Result<Outcome> {
    let config = solver_config(&args.solver)?;
    let (inputs, results, verdict, table) = match args.name {
        DemoName::Nonconvexity => nonconvexity(args.lambda, &config, args.output.verbose)?,
        DemoName::TwoQubitRecovery => two_qubit_recovery(&config, args.output.verbose)?,
        DemoName::AppendChannel => append_channel(&config, args.output.verbose)?,
    };
    Ok(Outcome {
        report: RunReport::new("demo", inputs, results, Some(config), verdict),
        table,
        verdict,
    })
}

type Scenario = (Value, Value, Verdict, String);

struct Point {
    inclusion: bool,
    cptp: SolveStatus,
    nu: Option<Nu>,
    json: Value,
}

fn analyze(name: &str, state: BuiltinState, config: &SolverConfig, verbose: bool) -> Result<Point> {
    let target = make_state(state)?;
    let marginal = target.partial_trace(&["D"])?;
    let inclusion = kernel_inclusion_check(&marginal, DEFAULT_INCLUSION_TOL)?;
    let cert = certify_cptp(&marginal, &target, config)?;
    let overhead = sampling_overhead(&marginal, &target, config)?;
    let mut json = json!({
        "name": name,
        "state": state,
        "inclusion": inclusion,
        "cptp": cert.summary(verbose),
        "hptp": overhead.summary(verbose),
    });
    if verbose {
        json["target"] = state_json(&target);
        json["marginal"] = state_json(&marginal);
    }
    Ok(Point {
        inclusion: inclusion.verdict,
        cptp: cert.status,
        nu: overhead.nu,
        json,
    })
}

fn nonconvexity(lambda: f64, config: &SolverConfig, verbose: bool) -> Result<Scenario> {
    let w = analyze("W4", BuiltinState::W4, config, verbose)?;
    let r = analyze("RHO2", BuiltinState::Rho2, config, verbose)?;
    let m = analyze("CONVEX_MIX", BuiltinState::ConvexMix { lambda }, config, verbose)?;
    let finite = |p: &Point| matches!(p.nu, Some(Nu::Finite(_)));
    let conclusion = if w.inclusion && r.inclusion && !m.inclusion {
        "both endpoints pass kernel inclusion and the mixture fails it, so the recoverable set is not convex"
    } else if finite(&w) && finite(&r) && m.nu == Some(Nu::Infinite) {
        "the mixture passes kernel inclusion, but its HPTP overhead is infinite while both endpoints are finite, so the recoverable set is not convex"
    } else {
        "no separation between the endpoints and the mixture at this lambda"
    };
    let mut table = format!("{:<12} {:>9}  {:>10}  {:>10}\n", "state", "inclusion", "cptp", "nu");
    for (name, p) in [("W4", &w), ("RHO2", &r), ("CONVEX_MIX", &m)] {
        let _ = writeln!(table, "{:<12} {:>9}  {:>10}  {:>10}", name, p.inclusion, p.cptp.to_string(), pretty::nu(p.nu));
    }
    let _ = writeln!(table, "{conclusion}");
    let verdict = if m.inclusion { Verdict::Pass } else { Verdict::Fail };
    let results = json!({
        "endpoints": [w.json, r.json],
        "midpoint": m.json,
        "conclusion": conclusion,
    });
    Ok((json!({ "demo": "nonconvexity", "lambda": lambda }), results, verdict, table))
}

fn two_qubit_recovery(config: &SolverConfig, verbose: bool) -> Result<Scenario> {
    let w4 = make_state(BuiltinState::W4)?;
    let blocks = marginal_block_consistency(&w4, "B", &["C", "D"])?;
    let ab = w4.marginal(&["A", "B"])?;
    let cert = certify_cptp_on(&ab, &w4, "B", config)?;
    let verdict = solve_verdict(cert.status, cert.soundness.as_ref());

    let linear = if blocks.consistent {
        "blocks with equal traced parts agree, so the pairwise test does not exclude a linear map on B"
    } else {
        "two blocks have equal traced parts but differ, so no linear map on B reproduces W4"
    };
    let channel = match cert.status {
        SolveStatus::Infeasible => "no CPTP channel B -> BCD recovers W4 from its AB marginal",
        SolveStatus::Optimal | SolveStatus::Feasible => "a CPTP channel B -> BCD recovers W4 from its AB marginal",
        SolveStatus::MaxIter => "the solver could not decide whether a CPTP channel B -> BCD exists",
    };
    let mut table = format!(
        "block consistency (index {:?}, keep {}, extend {:?}): {}\n",
        blocks.index_labels,
        blocks.keep,
        blocks.extend_to,
        if blocks.consistent { "consistent" } else { "inconsistent" }
    );
    for wit in &blocks.witnesses {
        let _ = writeln!(
            table,
            "  witness M{}{} vs M{}{}: traced gap {:.3e}, full gap {:.3e}",
            wit.first.0, wit.first.1, wit.second.0, wit.second.1, wit.traced_gap, wit.full_gap
        );
    }
    let _ = writeln!(
        table,
        "CPTP recovery B -> BCD: {} (phase-1 residual {:.3e})\n{linear}\n{channel}",
        cert.status, cert.solution.phase1_residual
    );
    let mut results = json!({
        "block_consistency": blocks,
        "cptp": cert.summary(verbose),
        "conclusion": [linear, channel],
    });
    if verbose {
        let theta = theta_blocks(&w4, "A")?;
        for b in &theta {
            table += &pretty::matrix(&format!("M{}{} on {:?}", b.row, b.col, b.on_labels), &b.matrix);
        }
        results["blocks"] = json!(theta.iter().map(BlockJson::from).collect::<Vec<_>>());
        results["target"] = state_json(&w4);
        results["marginal"] = state_json(&ab);
    }
    Ok((json!({ "demo": "two_qubit_recovery" }), results, verdict, table))
}

fn append_channel(config: &SolverConfig, verbose: bool) -> Result<Scenario> {
    let ghz3 = make_state(BuiltinState::Ghz3)?;
    let zero = DensityOperator::new(QubitRegister::qubits(&["D"])?, HermitianMatrix::from_diagonal(&[1.0, 0.0]), true)?;
    let target = ghz3.tensor(&zero)?;
    let choi = make_channel_choi(BuiltinChannel::AppendZero);
    let tp_error = max_abs_diff(&choi.output_trace(), &CMatrix::identity(2, 2));
    let recovered = apply_choi(&ghz3, &choi, "C")?;
    let residual = verify_recovery(&target, &ghz3, &choi)?;
    let cert = certify_cptp(&ghz3, &target, config)?;
    let exact = tp_error <= EXACT_TOL && residual <= EXACT_TOL;
    let conclusion = if exact {
        "appending |0> on D is a CPTP recovery map: GHZ3 ⊗ |0><0| is rebuilt exactly from GHZ3"
    } else {
        "the append channel does not reproduce GHZ3 ⊗ |0><0| within tolerance"
    };
    let mut table = format!(
        "APPEND_ZERO: trace-preservation error {tp_error:.3e}, reconstruction residual {residual:.3e}\nsolver: {}\n{conclusion}\n",
        cert.status
    );
    let mut results = json!({
        "channel": BuiltinChannel::AppendZero,
        "tp_error": tp_error,
        "residual": residual,
        "cptp": cert.summary(verbose),
        "conclusion": conclusion,
    });
    if verbose {
        table += &pretty::matrix("Choi operator", choi.matrix().as_matrix());
        table += &pretty::matrix("recovered state", recovered.matrix().as_matrix());
        results["choi"] = json!(MatrixJson::from(choi.matrix().as_matrix()));
        results["target"] = state_json(&target);
        results["recovered"] = state_json(&recovered);
    }
    let verdict = if exact { Verdict::Pass } else { Verdict::Fail };
    Ok((json!({ "demo": "append_channel" }), results, verdict, table))
}
