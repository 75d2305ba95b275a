//! Numerical Jordan normal form by eigenvalue clustering and generalized
//! eigenvector chains.
//!
//! The Jordan form is discontinuous in the matrix entries, so rank
//! decisions that fall into an ambiguous band are reported as
//! [`MapError::IllConditioned`] instead of being rounded either way.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cjson;
use crate::expr::C64;

use super::linalg::{column_basis, eigenvalues, nullspace, right_singular};
use super::MapError;

#[derive(Debug, Clone, Copy)]
pub struct JordanOptions {
    /// Eigenvalues closer than this are one cluster.
    pub cluster_tol: f64,
    /// Singular values below `rank_tol · max(1, ‖A‖)` are zero.
    pub rank_tol: f64,
    /// Required `‖A − P J P⁻¹‖ / ‖A‖`.
    pub residual_tol: f64,
}

impl Default for JordanOptions {
    fn default() -> Self {
        JordanOptions {
            cluster_tol: 1e-8,
            rank_tol: 1e-8,
            residual_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JordanBlock {
    #[serde(with = "cjson::c64")]
    pub eigenvalue: C64,
    pub size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct JordanDecomposition {
    pub blocks: Vec<JordanBlock>,
    #[serde(with = "cjson::matrix")]
    pub transform: DMatrix<C64>,
    pub reconstruction_residual: f64,
}

impl JordanDecomposition {
    pub fn jordan_matrix(&self) -> DMatrix<C64> {
        jordan_matrix(&self.blocks)
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.blocks.iter().all(|b| b.size == 1)
    }

    /// Block sizes grouped with their eigenvalue, in block order.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }
}

/// Block-diagonal matrix with `λ` on the diagonal and `1` on the
/// superdiagonal inside each block.
pub fn jordan_matrix(blocks: &[JordanBlock]) -> DMatrix<C64> {
    let n: usize = blocks.iter().map(|b| b.size).sum();
    let mut j = DMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        for k in 0..b.size {
            j[(at + k, at + k)] = b.eigenvalue;
            if k + 1 < b.size {
                j[(at + k, at + k + 1)] = C64::new(1.0, 0.0);
            }
        }
        at += b.size;
    }
    j
}

pub fn jordan_form(a: &DMatrix<C64>) -> Result<JordanDecomposition, MapError> {
    jordan_form_with(a, &JordanOptions::default())
}

/// Single-linkage clusters of the spectrum: (mean eigenvalue, multiplicity).
fn cluster_eigenvalues(values: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() < tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C64>)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(v),
            None => groups.push((r, vec![v])),
        }
    }
    let mut clusters: Vec<(C64, usize)> = groups
        .into_iter()
        .map(|(_, g)| {
            let m = g.len();
            (g.iter().sum::<C64>() / m as f64, m)
        })
        .collect();
    clusters.sort_by(|(a, _), (b, _)| {
        b.norm()
            .total_cmp(&a.norm())
            .then(a.arg().total_cmp(&b.arg()))
    });
    clusters
}

pub fn jordan_form_with(
    a: &DMatrix<C64>,
    opts: &JordanOptions,
) -> Result<JordanDecomposition, MapError> {
    if !a.is_square() {
        return Err(MapError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    if n > 16 {
        return Err(MapError::BadParameter(format!(
            "jordan_form supports n <= 16, got {n}"
        )));
    }
    let a_norm = a.norm();
    let tol = opts.rank_tol * a_norm.max(1.0);
    let ambiguous = 100.0 * tol;
    let identity = DMatrix::<C64>::identity(n, n);

    let mut blocks = Vec::new();
    let mut columns: Vec<nalgebra::DVector<C64>> = Vec::with_capacity(n);

    for (lambda, mult) in cluster_eigenvalues(&eigenvalues(a), opts.cluster_tol) {
        let nil = a - &identity * lambda;
        // kernels of N^k, k = 0..=s
        let mut kernels = vec![DMatrix::<C64>::zeros(n, 0)];
        let mut power = identity.clone();
        while kernels.last().map(|k| k.ncols()).unwrap_or(0) < mult {
            if kernels.len() > mult {
                return Err(MapError::IllConditioned(format!(
                    "generalized eigenspace of {lambda} has dimension {} but multiplicity {mult}",
                    kernels.last().map(|k| k.ncols()).unwrap_or(0)
                )));
            }
            power = &nil * &power;
            let (k, smallest_kept, _) = nullspace(&power, tol);
            if smallest_kept < ambiguous {
                return Err(MapError::IllConditioned(format!(
                    "rank of (A - {lambda} I)^{} is ambiguous (singular value {smallest_kept:e})",
                    kernels.len()
                )));
            }
            if k.ncols() <= kernels.last().map(|k| k.ncols()).unwrap_or(0) {
                return Err(MapError::IllConditioned(format!(
                    "kernel chain of {lambda} stalled at dimension {} below multiplicity {mult}",
                    k.ncols()
                )));
            }
            kernels.push(k);
        }
        let s = kernels.len() - 1;
        if kernels[s].ncols() != mult {
            return Err(MapError::IllConditioned(format!(
                "generalized eigenspace of {lambda} has dimension {} but multiplicity {mult}",
                kernels[s].ncols()
            )));
        }
        let d: Vec<usize> = kernels.iter().map(|k| k.ncols()).collect();
        let at_least = |k: usize| if k == 0 || k > s { 0 } else { d[k] - d[k - 1] };

        // chain tops, largest blocks first
        let mut chains: Vec<(usize, nalgebra::DVector<C64>)> = Vec::new();
        for k in (1..=s).rev() {
            let need = at_least(k) - at_least(k + 1);
            if need == 0 {
                continue;
            }
            let mut span_cols: Vec<nalgebra::DVector<C64>> = kernels[k - 1]
                .column_iter()
                .map(|c| c.into_owned())
                .collect();
            for (len, top) in &chains {
                let mut v = top.clone();
                for _ in 0..(len - k) {
                    v = &nil * v;
                }
                span_cols.push(v);
            }
            let span = if span_cols.is_empty() {
                DMatrix::zeros(n, 0)
            } else {
                DMatrix::from_columns(&span_cols)
            };
            let q = column_basis(&span, tol);
            let kk = &kernels[k];
            let residual = kk - &q * (q.adjoint() * kk);
            let (sv, w) = right_singular(&residual);
            if sv.len() < need || sv[need - 1] < ambiguous {
                return Err(MapError::IllConditioned(format!(
                    "cannot complete {need} chain(s) of length {k} for {lambda}"
                )));
            }
            for c in 0..need {
                let v = kk * w.column(c);
                let norm = v.norm();
                chains.push((k, v / C64::new(norm, 0.0)));
            }
        }
        for (len, top) in chains {
            let mut chain = vec![top];
            for _ in 1..len {
                let next = &nil * chain.last().expect("nonempty");
                chain.push(next);
            }
            // P columns: N^{len-1} v, …, N v, v
            columns.extend(chain.into_iter().rev());
            blocks.push(JordanBlock {
                eigenvalue: lambda,
                size: len,
            });
        }
    }

    if columns.len() != n {
        return Err(MapError::IllConditioned(format!(
            "assembled {} of {n} basis vectors",
            columns.len()
        )));
    }
    let p = DMatrix::from_columns(&columns);
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| MapError::IllConditioned("transform matrix is singular".into()))?;
    let j = jordan_matrix(&blocks);
    let residual = (a - &p * &j * &p_inv).norm() / a_norm.max(f64::MIN_POSITIVE);
    if !(residual < opts.residual_tol) {
        return Err(MapError::IllConditioned(format!(
            "reconstruction residual {residual:e}"
        )));
    }
    Ok(JordanDecomposition {
        blocks,
        transform: p,
        reconstruction_residual: residual,
    })
}
