use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use vqmc::conic::SolverConfig;
use vqmc::registers::{make_state, BuiltinState, DensityOperator};

use crate::args::{Builtin, Params, SolverArgs, StateInput};

pub fn builtin_state(name: Builtin, params: &Params) -> Result<BuiltinState> {
    if params.p.is_some() && name != Builtin::Mix {
        bail!("--p only applies to MIX");
    }
    if params.lambda.is_some() && name != Builtin::ConvexMix {
        bail!("--lambda only applies to CONVEX_MIX");
    }
    Ok(match name {
        Builtin::W4 => BuiltinState::W4,
        Builtin::Ghz4 => BuiltinState::Ghz4,
        Builtin::Rho2 => BuiltinState::Rho2,
        Builtin::Ghz3 => BuiltinState::Ghz3,
        Builtin::Mix => BuiltinState::Mix {
            p: params.p.context("MIX needs --p")?,
        },
        Builtin::ConvexMix => BuiltinState::ConvexMix {
            lambda: params.lambda.context("CONVEX_MIX needs --lambda")?,
        },
    })
}

/// Loads the state and echoes how it was resolved.
pub fn load_state(input: &StateInput) -> Result<(DensityOperator, Value)> {
    match (&input.builtin, &input.path) {
        (Some(name), None) => {
            let b = builtin_state(*name, &input.params)?;
            Ok((make_state(b)?, json!({ "builtin": b })))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let rho = DensityOperator::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
            Ok((rho, json!({ "path": path })))
        }
        _ => bail!("give either --builtin or a state file"),
    }
}

pub fn solver_config(args: &SolverArgs) -> Result<SolverConfig> {
    let mut config = SolverConfig::default();
    if let Some(n) = args.max_iter {
        config.max_iterations = n;
    }
    if let Some(e) = args.eps_feas {
        config.eps_feas = e;
    }
    if let Some(e) = args.eps_infeasible {
        config.eps_infeasible = e;
    }
    config.validate()?;
    Ok(config)
}

/// `start:stop:count` with both endpoints included.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        bail!("grid must look like start:stop:count, got `{spec}`");
    };
    let start: f64 = a.trim().parse().with_context(|| format!("grid start `{a}`"))?;
    let stop: f64 = b.trim().parse().with_context(|| format!("grid stop `{b}`"))?;
    let count: usize = n.trim().parse().with_context(|| format!("grid count `{n}`"))?;
    if count == 0 {
        bail!("grid count must be positive");
    }
    Ok(vqmc::conic::linspace(start, stop, count))
}

/// Resolves `--out` against the output-directory override.
pub fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os("VQMC_OUT_DIR") {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<PathBuf> {
    let path = resolve_out(path);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parses() {
        let g = parse_grid("0:1:21").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], 1.0);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a:1:3").is_err());
    }

    #[test]
    fn parameters_are_checked() {
        let none = Params { p: None, lambda: None };
        assert!(builtin_state(Builtin::Mix, &none).is_err());
        let p = Params { p: Some(0.3), lambda: None };
        assert_eq!(builtin_state(Builtin::Mix, &p).unwrap(), BuiltinState::Mix { p: 0.3 });
        assert!(builtin_state(Builtin::W4, &p).is_err());
        assert!(builtin_state(Builtin::ConvexMix, &p).is_err());
    }
}
