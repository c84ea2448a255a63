use std::fmt::Write;

use vqmc::conic::{Nu, SolveStatus};
use vqmc::linops::CMatrix;
use vqmc::markov::InclusionReport;

pub fn status(s: Option<SolveStatus>) -> String {
    s.map_or("-".into(), |s| s.to_string())
}

pub fn nu(n: Option<Nu>) -> String {
    match n {
        Some(Nu::Finite(x)) => format!("{x:.6}"),
        Some(Nu::Infinite) => "inf".into(),
        None => "-".into(),
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |x| format!("{x:.3e}"))
}

pub fn matrix(title: &str, m: &CMatrix) -> String {
    let mut s = format!("{title} ({}x{})\n", m.nrows(), m.ncols());
    let real = m.iter().all(|z| z.im == 0.0);
    for i in 0..m.nrows() {
        s.push_str("  ");
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if real {
                let _ = write!(s, "{:>8.4}", z.re);
            } else {
                let _ = write!(s, " {:>7.4}{:+.4}i", z.re, z.im);
            }
        }
        s.push('\n');
    }
    s
}

pub fn inclusion(r: &InclusionReport) -> String {
    let mut s = format!(
        "kernel inclusion on {:?}: {}\n",
        r.labels,
        if r.verdict { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(s, "  {:>3}  {:>9}  {:>9}  {:>9}  {:>10}  leaking vector", "j", "ker(AC)", "ker(BC)", "contained", "max leak");
    for o in &r.outcomes {
        let _ = writeln!(
            s,
            "  {:>3}  {:>9}  {:>9}  {:>9}  {:>10.3e}  {}",
            o.outcome,
            o.ker_dim_ac,
            o.ker_dim_bc,
            o.contained,
            o.max_leak,
            o.leaking_vector.as_deref().unwrap_or("-")
        );
    }
    s
}
