use nalgebra::DMatrix;
use serde::Serialize;

use crate::expr::C64;

use super::linalg::{eigenvalues, spectral_radius};
use super::{MapError, PolyAutomorphism};

/// Covering-group datum `G = H ⋊ ⟨φ⟩`: a finite unitary group `H` and a
/// cyclic generator `φ`.
///
/// Unitarity and closure of `H` are checked on construction. Whether `φ` is
/// a contraction is a verification outcome (see `run_suite`), not a
/// construction invariant, so negative controls can be built.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    finite_part: Vec<DMatrix<C64>>,
    cyclic_generator: PolyAutomorphism,
    relation_tolerance: f64,
}

fn is_identity(u: &DMatrix<C64>, tol: f64) -> bool {
    (u - DMatrix::identity(u.nrows(), u.ncols())).norm() < tol
}

impl GroupSpec {
    pub const DEFAULT_RELATION_TOL: f64 = 1e-10;

    pub fn new(
        finite_part: Vec<DMatrix<C64>>,
        cyclic_generator: PolyAutomorphism,
        relation_tolerance: f64,
    ) -> Result<Self, MapError> {
        let n = cyclic_generator.dim();
        if finite_part.is_empty() {
            return Err(MapError::BadParameter(
                "finite part must contain at least the identity".into(),
            ));
        }
        for (i, u) in finite_part.iter().enumerate() {
            if u.nrows() != n || u.ncols() != n {
                return Err(MapError::DimensionMismatch {
                    left: n,
                    right: u.nrows(),
                });
            }
            let defect = (u.adjoint() * u - DMatrix::identity(n, n)).norm();
            if !(defect < 1e-10) {
                return Err(MapError::BadParameter(format!(
                    "finite element {i} is not unitary (‖U*U − I‖ = {defect:e})"
                )));
            }
        }
        let contains = |m: &DMatrix<C64>| {
            finite_part
                .iter()
                .any(|u| (u - m).norm() < relation_tolerance)
        };
        for (i, u) in finite_part.iter().enumerate() {
            if !contains(&u.adjoint()) {
                return Err(MapError::BadParameter(format!(
                    "finite part is not closed under inverses (element {i})"
                )));
            }
            for (j, v) in finite_part.iter().enumerate() {
                if !contains(&(u * v)) {
                    return Err(MapError::BadParameter(format!(
                        "finite part is not closed under products ({i}·{j})"
                    )));
                }
            }
        }
        Ok(GroupSpec {
            finite_part,
            cyclic_generator,
            relation_tolerance,
        })
    }

    /// `H = {I}`.
    pub fn cyclic(generator: PolyAutomorphism) -> Self {
        let n = generator.dim();
        Self::new(
            vec![DMatrix::identity(n, n)],
            generator,
            Self::DEFAULT_RELATION_TOL,
        )
        .expect("trivial finite part is valid")
    }

    pub fn dim(&self) -> usize {
        self.cyclic_generator.dim()
    }

    pub fn finite_part(&self) -> &[DMatrix<C64>] {
        &self.finite_part
    }

    pub fn cyclic_generator(&self) -> &PolyAutomorphism {
        &self.cyclic_generator
    }

    pub fn relation_tolerance(&self) -> f64 {
        self.relation_tolerance
    }

    /// The generator to feed the contraction test: `φ` itself, or `φ⁻¹`
    /// when `φ` is linear and expanding (both generate the same group).
    /// The flag tells whether the inverse was taken.
    pub fn contracting_generator(&self) -> (PolyAutomorphism, bool) {
        let g = &self.cyclic_generator;
        if g.is_linear() {
            let expanding = eigenvalues(&g.linear_part()).iter().all(|l| l.norm() > 1.0);
            if expanding {
                if let Some(inv) = g.inverse_linear() {
                    return (inv, true);
                }
            }
        }
        (g.clone(), false)
    }

    /// The cyclic generator followed by the non-identity elements of `H`
    /// as linear maps.
    pub fn generators(&self) -> Vec<PolyAutomorphism> {
        let mut out = vec![self.cyclic_generator.clone()];
        for u in &self.finite_part {
            if !is_identity(u, self.relation_tolerance) {
                out.push(PolyAutomorphism::linear(u).expect("unitary is invertible"));
            }
        }
        out
    }

    pub fn generator_spectral_radius(&self) -> f64 {
        spectral_radius(&self.cyclic_generator.linear_part())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupElementCheck {
    pub index: usize,
    pub is_identity: bool,
    /// Distance from 1 to the nearest eigenvalue.
    pub distance_to_one: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub free: bool,
    /// Smallest distance to 1 over non-identity elements (∞ if none).
    pub min_distance: f64,
    pub elements: Vec<GroupElementCheck>,
}

/// Necessary linear condition for a free action on `W`: no non-identity
/// element of `H` has eigenvalue 1. Proper discontinuity is not checked.
pub fn fixed_point_free_check(group: &GroupSpec) -> FixedPointReport {
    let tol = group.relation_tolerance;
    let mut elements = Vec::new();
    let mut min_distance = f64::INFINITY;
    for (index, u) in group.finite_part.iter().enumerate() {
        let identity = is_identity(u, tol);
        let distance = eigenvalues(u)
            .iter()
            .map(|l| (l - C64::new(1.0, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        if !identity {
            min_distance = min_distance.min(distance);
        }
        elements.push(GroupElementCheck {
            index,
            is_identity: identity,
            distance_to_one: distance,
        });
    }
    FixedPointReport {
        free: min_distance > tol.max(1e-8),
        min_distance,
        elements,
    }
}

/// Max componentwise deviation of
/// `Φ_r(t + k, e^{√-1 p k} z) = φ^k(Φ_r(t, z))` with
/// `Φ_r(t, z)_i = e^{−r_i t} z_i` and `φ = diag(e^{−r_i + √-1 p_i})`.
///
/// The right side applies `φ` (or `φ⁻¹`) `|k|` times.
pub fn equivariance_check(r: &[f64], p: &[f64], k: i32, samples: &[(f64, Vec<C64>)]) -> f64 {
    let n = r.len();
    assert_eq!(p.len(), n, "weights and phases must have the same length");
    let phi_r = |t: f64, z: &[C64]| -> Vec<C64> {
        z.iter()
            .zip(r)
            .map(|(zi, ri)| zi * (-ri * t).exp())
            .collect()
    };
    let lambda: Vec<C64> = r
        .iter()
        .zip(p)
        .map(|(ri, pi)| C64::new(-ri, *pi).exp())
        .collect();
    let mut worst: f64 = 0.0;
    for (t, z) in samples {
        let rotated: Vec<C64> = z
            .iter()
            .zip(p)
            .map(|(zi, pi)| zi * C64::new(0.0, pi * f64::from(k)).exp())
            .collect();
        let lhs = phi_r(t + f64::from(k), &rotated);
        let mut rhs = phi_r(*t, z);
        for _ in 0..k.unsigned_abs() {
            for (w, l) in rhs.iter_mut().zip(&lambda) {
                if k > 0 {
                    *w *= l;
                } else {
                    *w /= l;
                }
            }
        }
        for (a, b) in lhs.iter().zip(&rhs) {
            worst = worst.max((a - b).norm());
        }
    }
    worst
}
