use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cjson;
use crate::expr::{Evaluator, C64};
use crate::forms::{Form, FormValue};

use super::VerifyError;

/// `|det|` of the antisymmetric coefficient matrix at or below which `Ω`
/// counts as degenerate.
pub const DEGENERACY_DET: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct LeeSolveResult {
    #[serde(with = "cjson::c64_vec")]
    pub point: Vec<C64>,
    /// Coefficients on `dz_1..dz_n, dz̄_1..dz̄_n`.
    #[serde(with = "cjson::c64_vec")]
    pub theta_coeffs: Vec<C64>,
    /// Largest coefficient of `dΩ − θ∧Ω` at the point.
    pub residual: f64,
    /// `max_i |θ_{z̄_i} − conj θ_{z_i}|`.
    pub reality_defect: f64,
}

/// Pointwise Lee-form recovery for a fixed 2-form; `dΩ` is built once.
#[derive(Debug, Clone)]
pub struct LeeSolver {
    omega: Form,
    d_omega: Form,
}

impl LeeSolver {
    pub fn new(omega: &Form) -> Result<Self, VerifyError> {
        if omega.degree() != 2 {
            return Err(VerifyError::BadInput(format!(
                "Lee solver needs a 2-form, got degree {}",
                omega.degree()
            )));
        }
        Ok(LeeSolver {
            omega: omega.clone(),
            d_omega: omega.exterior_d(),
        })
    }

    /// Least squares over the `2n` coefficients of `θ`: the columns are
    /// `e_j ∧ Ω(p)` and the target is `dΩ(p)`, both as 3-form vectors.
    pub fn solve(&self, p: &[C64]) -> Result<LeeSolveResult, VerifyError> {
        let n = self.omega.dim();
        let m = 2 * n;
        let mut ev = Evaluator::new(p);
        let omega = self.omega.evaluate_with(&mut ev)?;
        let d_omega = self.d_omega.evaluate_with(&mut ev)?;

        let mut skew = DMatrix::<C64>::zeros(m, m);
        for (idx, c) in omega.coeffs() {
            skew[(idx[0], idx[1])] = *c;
            skew[(idx[1], idx[0])] = -*c;
        }
        let det = skew.determinant().norm();
        if !(det > DEGENERACY_DET) {
            return Err(VerifyError::DegenerateOmega {
                det,
                point: p.to_vec(),
            });
        }

        let triples = triples(m);
        let mut design = DMatrix::<C64>::zeros(triples.len(), m);
        for j in 0..m {
            let mut e = std::collections::BTreeMap::new();
            e.insert(vec![j], C64::new(1.0, 0.0));
            let col = FormValue::new(n, 1, e).wedge(&omega);
            for (row, idx) in triples.iter().enumerate() {
                design[(row, j)] = col.get(idx);
            }
        }
        let target = DVector::from_iterator(triples.len(), triples.iter().map(|t| d_omega.get(t)));
        let svd = design.svd(true, true);
        let theta = svd
            .solve(&target, 1e-14)
            .map_err(|e| VerifyError::BadInput(e.to_string()))?;

        let mut tv = std::collections::BTreeMap::new();
        for (j, c) in theta.iter().enumerate() {
            tv.insert(vec![j], *c);
        }
        let residual = d_omega.max_diff(&FormValue::new(n, 1, tv).wedge(&omega));
        let reality_defect = (0..n)
            .map(|i| (theta[n + i] - theta[i].conj()).norm())
            .fold(0.0, f64::max);
        Ok(LeeSolveResult {
            point: p.to_vec(),
            theta_coeffs: theta.iter().copied().collect(),
            residual,
            reality_defect,
        })
    }
}

fn triples(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                out.push(vec![a, b, c]);
            }
        }
    }
    out
}

/// One-shot form of [`LeeSolver::solve`].
pub fn solve_lee_pointwise(omega: &Form, p: &[C64]) -> Result<LeeSolveResult, VerifyError> {
    LeeSolver::new(omega)?.solve(p)
}
