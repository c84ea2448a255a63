use crate::error::{Error, Result};
use crate::linops::{CMatrix, HermitianMatrix};
use crate::registers::{ChoiOperator, DensityOperator, QubitRegister, TRACE_TOL};

/// `(id ⊗ N)(m)` for an arbitrary operator `m` on `register`, with `N` acting
/// on the factor at `pos`. `choi` is any (not necessarily positive or
/// trace-preserving) matrix on `input ⊗ copy ⊗ extension`. Returns the output
/// register and matrix.
pub(crate) fn apply_choi_raw(
    register: &QubitRegister,
    m: &CMatrix,
    choi: &CMatrix,
    extension: &QubitRegister,
    pos: usize,
) -> Result<(QubitRegister, CMatrix)> {
    let d = register.dims()[pos];
    let d_out = d * extension.total_dim();
    if choi.nrows() != d * d_out {
        return Err(Error::DimensionMismatch {
            expected: choi.nrows(),
            found: d * d_out,
        });
    }
    let out_reg = register.insert_after(pos, extension)?;
    let n_ext = extension.len();
    let out_pos: Vec<usize> = (pos..=pos + n_ext).collect();

    let rest_in = register.offsets(&register.complement(&[pos]));
    let unit_in = register.offsets(&[pos]);
    let rest_out = out_reg.offsets(&out_reg.complement(&out_pos));
    let unit_out = out_reg.offsets(&out_pos);

    let j = choi;
    let n = out_reg.total_dim();
    let mut out = CMatrix::zeros(n, n);
    for (a, &ra) in rest_in.iter().enumerate() {
        for (b, &rb) in rest_in.iter().enumerate() {
            for (i, &ui) in unit_in.iter().enumerate() {
                for (k, &uk) in unit_in.iter().enumerate() {
                    let x = m[(ra + ui, rb + uk)];
                    if x.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (o, &uo) in unit_out.iter().enumerate() {
                        for (p, &up) in unit_out.iter().enumerate() {
                            out[(rest_out[a] + uo, rest_out[b] + up)] +=
                                x * j[(i * d_out + o, k * d_out + p)];
                        }
                    }
                }
            }
        }
    }
    Ok((out_reg, out))
}

/// Applies the channel with Choi operator `choi` to the factor `act_on`.
///
/// The output register keeps `act_on` in place (now the channel's copy
/// factor) and inserts the extension labels right after it. The result is
/// marked normalized when the input is, the map is trace preserving and the
/// output trace is within [`TRACE_TOL`] of one.
pub fn apply_choi(rho: &DensityOperator, choi: &ChoiOperator, act_on: &str) -> Result<DensityOperator> {
    let pos = rho.register().position(act_on)?;
    let d = rho.register().dims()[pos];
    if d != choi.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: choi.input_dim(),
            found: d,
        });
    }
    let (register, m) = apply_choi_raw(
        rho.register(),
        rho.matrix().as_matrix(),
        choi.matrix().as_matrix(),
        choi.extension(),
        pos,
    )?;
    let m = HermitianMatrix::new(m)?;
    let normalized = rho.is_normalized() && choi.is_trace_preserving() && (m.trace() - 1.0).abs() <= TRACE_TOL;
    DensityOperator::new(register, m, normalized)
}

/// Max-abs entrywise distance between `target` and the channel applied to
/// `marginal` on the Choi operator's input label.
pub fn verify_recovery(
    target: &DensityOperator,
    marginal: &DensityOperator,
    choi: &ChoiOperator,
) -> Result<f64> {
    let recovered = apply_choi(marginal, choi, choi.input_label())?;
    recovered.max_abs_diff(target)
}
