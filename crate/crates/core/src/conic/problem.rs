use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{max_asymmetry, CMatrix, HermitianMatrix, HERMITIAN_TOL};

use super::svec::{basis_element, svec, svec_len};

/// Handle to a Hermitian PSD variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockId(pub usize);

/// Handle to a free real scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScalarId(pub usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdBlock {
    pub name: String,
    pub dim: usize,
}

/// `sum_k <A_k, X_k> + sum_m g_m s_m = b`, with each `A_k` stored as
/// `svec(A_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Equality {
    pub block_terms: Vec<(BlockId, Vec<f64>)>,
    pub scalar_terms: Vec<(ScalarId, f64)>,
    pub rhs: f64,
    pub tag: String,
}

/// One term of a matrix-valued equality: a linear map applied to a block.
pub struct MapTerm<'a> {
    pub block: BlockId,
    pub map: &'a dyn Fn(&CMatrix) -> CMatrix,
}

/// Minimize a linear functional over PSD blocks and free scalars subject to
/// affine equalities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConicProblem {
    blocks: Vec<PsdBlock>,
    scalars: Vec<String>,
    equalities: Vec<Equality>,
    objective_blocks: Vec<(BlockId, Vec<f64>)>,
    objective_scalars: Vec<(ScalarId, f64)>,
}

/// Shape summary for debug dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub blocks: Vec<PsdBlock>,
    pub scalars: Vec<String>,
    pub equalities: usize,
    pub variables: usize,
}

fn hermitian_data(m: &CMatrix, dim: usize) -> Result<Vec<f64>> {
    if m.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    let asym = max_asymmetry(m);
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            max_asymmetry: asym,
        });
    }
    Ok(svec(m))
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_psd_block(&mut self, name: &str, dim: usize) -> BlockId {
        self.blocks.push(PsdBlock {
            name: name.to_string(),
            dim,
        });
        BlockId(self.blocks.len() - 1)
    }

    pub fn add_scalar(&mut self, name: &str) -> ScalarId {
        self.scalars.push(name.to_string());
        ScalarId(self.scalars.len() - 1)
    }

    fn block(&self, id: BlockId) -> Result<&PsdBlock> {
        self.blocks
            .get(id.0)
            .ok_or_else(|| Error::MalformedProblem(format!("undeclared block {}", id.0)))
    }

    fn check_scalar(&self, id: ScalarId) -> Result<()> {
        if id.0 < self.scalars.len() {
            Ok(())
        } else {
            Err(Error::MalformedProblem(format!("undeclared scalar {}", id.0)))
        }
    }

    /// Adds `sum_k <A_k, X_k> + sum_m g_m s_m = rhs`.
    pub fn add_equality(
        &mut self,
        block_terms: &[(BlockId, &HermitianMatrix)],
        scalar_terms: &[(ScalarId, f64)],
        rhs: f64,
        tag: &str,
    ) -> Result<()> {
        let mut terms = Vec::with_capacity(block_terms.len());
        for (id, a) in block_terms {
            let dim = self.block(*id)?.dim;
            terms.push((*id, hermitian_data(a.as_matrix(), dim)?));
        }
        for (id, _) in scalar_terms {
            self.check_scalar(*id)?;
        }
        self.equalities.push(Equality {
            block_terms: terms,
            scalar_terms: scalar_terms.to_vec(),
            rhs,
            tag: tag.to_string(),
        });
        Ok(())
    }

    /// Adds the Hermitian matrix equation
    /// `sum_k L_k(X_k) + sum_m s_m G_m = rhs` as `dim(rhs)^2` real equalities.
    ///
    /// Each `L_k` must be linear and Hermitian preserving; it is probed on
    /// the orthonormal [`svec`] basis of its block.
    pub fn add_matrix_equality(
        &mut self,
        terms: &[MapTerm<'_>],
        scalar_terms: &[(ScalarId, &HermitianMatrix)],
        rhs: &HermitianMatrix,
        tag: &str,
    ) -> Result<()> {
        let out_dim = rhs.dim();
        let rows = svec_len(out_dim);
        // columns[k][s] = svec(L_k(E_s))
        let mut columns: Vec<(BlockId, Vec<Vec<f64>>)> = Vec::with_capacity(terms.len());
        for term in terms {
            let dim = self.block(term.block)?.dim;
            let mut cols = Vec::with_capacity(svec_len(dim));
            for s in 0..svec_len(dim) {
                let image = (term.map)(&basis_element(dim, s));
                cols.push(hermitian_data(&image, out_dim).map_err(|e| {
                    Error::MalformedProblem(format!("map in `{tag}` is not Hermitian preserving: {e}"))
                })?);
            }
            columns.push((term.block, cols));
        }
        let mut scalar_cols = Vec::with_capacity(scalar_terms.len());
        for (id, g) in scalar_terms {
            self.check_scalar(*id)?;
            scalar_cols.push((*id, hermitian_data(g.as_matrix(), out_dim)?));
        }
        let b = svec(rhs.as_matrix());
        for t in 0..rows {
            let block_terms = columns
                .iter()
                .map(|(id, cols)| (*id, cols.iter().map(|c| c[t]).collect()))
                .collect();
            let scalar_terms = scalar_cols.iter().map(|(id, g)| (*id, g[t])).collect();
            self.equalities.push(Equality {
                block_terms,
                scalar_terms,
                rhs: b[t],
                tag: format!("{tag}[{t}]"),
            });
        }
        Ok(())
    }

    /// Sets the objective `sum_k <C_k, X_k> + sum_m a_m s_m` (minimized).
    pub fn set_objective(
        &mut self,
        block_terms: &[(BlockId, &HermitianMatrix)],
        scalar_terms: &[(ScalarId, f64)],
    ) -> Result<()> {
        let mut terms = Vec::with_capacity(block_terms.len());
        for (id, c) in block_terms {
            let dim = self.block(*id)?.dim;
            terms.push((*id, hermitian_data(c.as_matrix(), dim)?));
        }
        for (id, _) in scalar_terms {
            self.check_scalar(*id)?;
        }
        self.objective_blocks = terms;
        self.objective_scalars = scalar_terms.to_vec();
        Ok(())
    }

    pub fn blocks(&self) -> &[PsdBlock] {
        &self.blocks
    }

    pub fn scalars(&self) -> &[String] {
        &self.scalars
    }

    pub fn equalities(&self) -> &[Equality] {
        &self.equalities
    }

    pub fn has_objective(&self) -> bool {
        self.objective_blocks.iter().any(|(_, c)| c.iter().any(|&x| x != 0.0))
            || self.objective_scalars.iter().any(|&(_, a)| a != 0.0)
    }

    /// Offsets of each block in the stacked variable; scalars follow.
    pub(crate) fn layout(&self) -> (Vec<usize>, usize) {
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut n = 0;
        for b in &self.blocks {
            offsets.push(n);
            n += svec_len(b.dim);
        }
        (offsets, n)
    }

    pub fn num_variables(&self) -> usize {
        self.layout().1 + self.scalars.len()
    }

    /// Dense constraint matrix (row-major) and right-hand side.
    pub(crate) fn dense_constraints(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let (offsets, scalar_base) = self.layout();
        let n = self.num_variables();
        let mut a = Vec::with_capacity(self.equalities.len());
        let mut b = Vec::with_capacity(self.equalities.len());
        for eq in &self.equalities {
            let mut row = vec![0.0; n];
            for (id, data) in &eq.block_terms {
                for (k, x) in data.iter().enumerate() {
                    row[offsets[id.0] + k] += x;
                }
            }
            for (id, g) in &eq.scalar_terms {
                row[scalar_base + id.0] += g;
            }
            a.push(row);
            b.push(eq.rhs);
        }
        (a, b)
    }

    pub(crate) fn dense_objective(&self) -> Vec<f64> {
        let (offsets, scalar_base) = self.layout();
        let mut c = vec![0.0; self.num_variables()];
        for (id, data) in &self.objective_blocks {
            for (k, x) in data.iter().enumerate() {
                c[offsets[id.0] + k] += x;
            }
        }
        for (id, a) in &self.objective_scalars {
            c[scalar_base + id.0] += a;
        }
        c
    }

    /// Objective value at explicit block and scalar values.
    pub fn objective_at(&self, blocks: &[HermitianMatrix], scalars: &[f64]) -> f64 {
        let mut total = 0.0;
        for (id, data) in &self.objective_blocks {
            total += inner(data, blocks[id.0].as_matrix());
        }
        for (id, a) in &self.objective_scalars {
            total += a * scalars[id.0];
        }
        total
    }

    /// Per-equality residuals `lhs - rhs` at explicit values, evaluated
    /// directly on matrices.
    pub fn residuals_at(&self, blocks: &[HermitianMatrix], scalars: &[f64]) -> Vec<f64> {
        self.equalities
            .iter()
            .map(|eq| {
                let mut lhs = 0.0;
                for (id, data) in &eq.block_terms {
                    lhs += inner(data, blocks[id.0].as_matrix());
                }
                for (id, g) in &eq.scalar_terms {
                    lhs += g * scalars[id.0];
                }
                lhs - eq.rhs
            })
            .collect()
    }

    /// Checks that variables exist and the problem is not empty.
    pub fn validate(&self) -> Result<()> {
        if self.num_variables() == 0 {
            return Err(Error::MalformedProblem("no variables".into()));
        }
        for b in &self.blocks {
            if b.dim == 0 {
                return Err(Error::MalformedProblem(format!("block `{}` has dimension 0", b.name)));
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> ProblemSummary {
        ProblemSummary {
            blocks: self.blocks.clone(),
            scalars: self.scalars.clone(),
            equalities: self.equalities.len(),
            variables: self.num_variables(),
        }
    }
}

/// `Tr(A X)` with `A` given as `svec(A)`, computed from the entries of `X`.
fn inner(a_svec: &[f64], x: &CMatrix) -> f64 {
    let d = x.nrows();
    let a = super::svec::smat(a_svec, d);
    (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| (a[(i, j)] * x[(j, i)]).re)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_undeclared_and_non_hermitian_data() {
        let mut p = ConicProblem::new();
        let x = p.add_psd_block("X", 2);
        let bad = BlockId(3);
        let id = HermitianMatrix::identity(2);
        assert!(matches!(
            p.add_equality(&[(bad, &id)], &[], 1.0, "t"),
            Err(Error::MalformedProblem(_))
        ));
        assert!(p.add_equality(&[(x, &id)], &[(ScalarId(0), 1.0)], 1.0, "t").is_err());
        assert!(p.add_equality(&[(x, &HermitianMatrix::identity(3))], &[], 1.0, "t").is_err());
        let skew: &dyn Fn(&CMatrix) -> CMatrix = &|m| m * num_complex::Complex64::new(0.0, 1.0);
        assert!(matches!(
            p.add_matrix_equality(&[MapTerm { block: x, map: skew }], &[], &id, "skew"),
            Err(Error::MalformedProblem(_))
        ));
        assert!(p.validate().is_ok());
        assert!(ConicProblem::new().validate().is_err());
    }

    #[test]
    fn matrix_equality_rows_reproduce_the_map() {
        let mut p = ConicProblem::new();
        let x = p.add_psd_block("X", 2);
        let s = p.add_scalar("s");
        // L(X) = X ⊗ |0><0|, plus s I_4
        let embed: &dyn Fn(&CMatrix) -> CMatrix =
            &|m| m.kronecker(&HermitianMatrix::from_diagonal(&[1.0, 0.0]).into_matrix());
        let rhs = HermitianMatrix::from_diagonal(&[1.0, 0.0, 0.0, 0.0]);
        p.add_matrix_equality(
            &[MapTerm { block: x, map: embed }],
            &[(s, &HermitianMatrix::identity(4))],
            &rhs,
            "embed",
        )
        .unwrap();
        assert_eq!(p.equalities().len(), 16);
        let xv = HermitianMatrix::from_diagonal(&[1.0, 0.0]);
        let res = p.residuals_at(&[xv], &[0.0]);
        assert!(res.iter().all(|r| r.abs() < 1e-15));
        let res = p.residuals_at(&[HermitianMatrix::zeros(2)], &[1.0]);
        assert!(res.iter().any(|r| r.abs() > 0.5));
    }
}
