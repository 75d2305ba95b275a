use nalgebra::{DMatrix, Schur};

use crate::expr::C64;

/// Eigenvalues of a square complex matrix (diagonal of its Schur form).
pub fn eigenvalues(a: &DMatrix<C64>) -> Vec<C64> {
    let n = a.nrows();
    if n == 0 {
        return vec![];
    }
    let (_, t) = Schur::new(a.clone()).unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

pub fn spectral_radius(a: &DMatrix<C64>) -> f64 {
    eigenvalues(a).iter().map(|l| l.norm()).fold(0.0, f64::max)
}

/// Singular values (descending) with the matching right singular vectors as
/// columns of the returned matrix.
pub(crate) fn right_singular(a: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let cols = a.ncols();
    let rows = a.nrows();
    // pad to at least square so that V is complete
    let padded = if rows < cols {
        let mut m = DMatrix::<C64>::zeros(cols, cols);
        m.view_mut((0, 0), (rows, cols)).copy_from(a);
        m
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|i, j| svd.singular_values[*j].total_cmp(&svd.singular_values[*i]));
    let sv = order.iter().map(|i| svd.singular_values[*i]).collect();
    let v = DMatrix::from_fn(cols, cols, |r, c| v_t[(order[c], r)].conj());
    (sv, v)
}

/// Orthonormal basis of `{x : a x ≈ 0}`; singular values at or below `tol`
/// count as zero. Also returns the smallest singular value treated as
/// nonzero and the largest treated as zero, for conditioning checks.
pub(crate) fn nullspace(a: &DMatrix<C64>, tol: f64) -> (DMatrix<C64>, f64, f64) {
    let (sv, v) = right_singular(a);
    let rank = sv.iter().filter(|s| **s > tol).count();
    let smallest_kept = if rank > 0 {
        sv[rank - 1]
    } else {
        f64::INFINITY
    };
    let largest_dropped = sv.get(rank).copied().unwrap_or(0.0);
    let basis = v.columns(rank, v.ncols() - rank).into_owned();
    (basis, smallest_kept, largest_dropped)
}

/// Orthonormal basis of the column space of `a` (rank decided by `tol`).
pub(crate) fn column_basis(a: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested u");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|i| svd.singular_values[*i] > tol)
        .collect();
    DMatrix::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_triangular() {
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.7, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.7, 0.0),
            ],
        );
        for l in eigenvalues(&a) {
            assert!((l - C64::new(0.7, 0.0)).norm() < 1e-12);
        }
        assert!((spectral_radius(&a) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let one = C64::new(1.0, 0.0);
        let a = DMatrix::from_row_slice(2, 2, &[one, one, one, one]);
        let (k, _, _) = nullspace(&a, 1e-10);
        assert_eq!(k.ncols(), 1);
        assert!((&a * &k).norm() < 1e-12);
    }
}
