use nalgebra::DMatrix;
use serde::Serialize;

use crate::cjson;
use crate::expr::C64;

use super::{Form, FormError};

/// Coefficient matrix `h` of a (1,1)-form `-√-1 Σ h_ij dz_i ∧ dz̄_j` at a point.
#[derive(Debug, Clone, Serialize)]
pub struct HermitianMatrixSample {
    #[serde(with = "cjson::c64_vec")]
    pub point: Vec<C64>,
    #[serde(with = "cjson::matrix")]
    pub matrix: DMatrix<C64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct DefinitenessOptions {
    /// Allowed magnitude of (2,0) and (0,2) coefficients.
    pub mixed_tol: f64,
    /// Allowed `‖H − H*‖ / ‖H‖`.
    pub hermitian_tol: f64,
    /// Eigenvalues with `|λ|` below this count as zero.
    pub zero_tol: f64,
}

impl Default for DefinitenessOptions {
    fn default() -> Self {
        DefinitenessOptions {
            mixed_tol: 1e-8,
            hermitian_tol: 1e-10,
            zero_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    PositiveDefinite,
    NegativeDefinite,
    PositiveSemidefinite,
    NegativeSemidefinite,
    Indefinite,
    Zero,
}

impl Definiteness {
    /// `+1`/`-1` for (semi)definite outcomes.
    pub fn sign(self) -> Option<i8> {
        match self {
            Definiteness::PositiveDefinite | Definiteness::PositiveSemidefinite => Some(1),
            Definiteness::NegativeDefinite | Definiteness::NegativeSemidefinite => Some(-1),
            _ => None,
        }
    }

    pub fn is_definite(self) -> bool {
        matches!(
            self,
            Definiteness::PositiveDefinite | Definiteness::NegativeDefinite
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DefinitenessReport {
    pub overall: Definiteness,
    pub sign: Option<i8>,
    pub min_rank: usize,
    pub max_rank: usize,
    /// Smallest `|λ|` seen over all points.
    pub min_abs_eigenvalue: f64,
    pub max_abs_eigenvalue: f64,
    pub max_mixed_residual: f64,
    #[serde(skip)]
    pub samples: Vec<HermitianMatrixSample>,
}

/// Extract `h` at `p` and check the (1,1) type and Hermitian symmetry.
/// Returns the sample and the mixed-degree residual.
pub fn hermitian_sample(
    form: &Form,
    p: &[C64],
    opts: &DefinitenessOptions,
) -> Result<(HermitianMatrixSample, f64), FormError> {
    let n = form.dim();
    if form.degree() != 2 {
        return Err(FormError::DegreeMismatch {
            left: form.degree(),
            right: 2,
        });
    }
    let value = form.evaluate(p)?;
    let mut mixed: f64 = 0.0;
    let mut h = DMatrix::<C64>::zeros(n, n);
    for (idx, c) in value.coeffs() {
        let (a, b) = (idx[0], idx[1]);
        if a < n && b >= n {
            // c dz_a ∧ dz̄_j = -√-1 h_aj dz_a ∧ dz̄_j
            h[(a, b - n)] = C64::new(0.0, 1.0) * c;
        } else {
            mixed = mixed.max(c.norm());
        }
    }
    if mixed > opts.mixed_tol {
        return Err(FormError::NotType11 {
            residual: mixed,
            point: p.to_vec(),
        });
    }
    let deviation = (&h - h.adjoint()).norm();
    let scale = h.norm();
    if deviation > opts.hermitian_tol * scale.max(1e-300) && deviation > 1e-14 {
        return Err(FormError::NonHermitian {
            deviation: deviation / scale.max(1e-300),
            point: p.to_vec(),
        });
    }
    let sym = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let mut eigenvalues: Vec<f64> = nalgebra::SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok((
        HermitianMatrixSample {
            point: p.to_vec(),
            matrix: h,
            eigenvalues,
        },
        mixed,
    ))
}

/// Classify a (1,1)-form over a set of points. The common sign is recorded,
/// not assumed.
pub fn definiteness(
    form: &Form,
    points: &[Vec<C64>],
    opts: &DefinitenessOptions,
) -> Result<DefinitenessReport, FormError> {
    let n = form.dim();
    let mut samples = Vec::with_capacity(points.len());
    let mut max_mixed: f64 = 0.0;
    let (mut any_pos, mut any_neg, mut all_full) = (false, false, true);
    let mut mixed_point = false;
    let (mut min_rank, mut max_rank) = (usize::MAX, 0);
    let (mut min_abs, mut max_abs) = (f64::INFINITY, 0.0f64);
    for p in points {
        let (s, mixed) = hermitian_sample(form, p, opts)?;
        max_mixed = max_mixed.max(mixed);
        let pos = s.eigenvalues.iter().filter(|l| **l > opts.zero_tol).count();
        let neg = s
            .eigenvalues
            .iter()
            .filter(|l| **l < -opts.zero_tol)
            .count();
        any_pos |= pos > 0;
        any_neg |= neg > 0;
        mixed_point |= pos > 0 && neg > 0;
        all_full &= pos + neg == n;
        min_rank = min_rank.min(pos + neg);
        max_rank = max_rank.max(pos + neg);
        for l in &s.eigenvalues {
            min_abs = min_abs.min(l.abs());
            max_abs = max_abs.max(l.abs());
        }
        samples.push(s);
    }
    let overall = if mixed_point || (any_pos && any_neg) {
        Definiteness::Indefinite
    } else if any_pos {
        if all_full {
            Definiteness::PositiveDefinite
        } else {
            Definiteness::PositiveSemidefinite
        }
    } else if any_neg {
        if all_full {
            Definiteness::NegativeDefinite
        } else {
            Definiteness::NegativeSemidefinite
        }
    } else {
        Definiteness::Zero
    };
    Ok(DefinitenessReport {
        overall,
        sign: overall.sign(),
        min_rank: if points.is_empty() { 0 } else { min_rank },
        max_rank,
        min_abs_eigenvalue: if points.is_empty() { 0.0 } else { min_abs },
        max_abs_eigenvalue: max_abs,
        max_mixed_residual: max_mixed,
        samples,
    })
}
