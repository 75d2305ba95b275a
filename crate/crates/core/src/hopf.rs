//! Ready-made Hopf manifold data: forms, potentials and covering groups for
//! the standard, flat-potential, Kodaira-type and weighted Vaisman
//! structures, plus the two scaling deformation families.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Expr, ExprError, ImplicitTSpec, C64};
use crate::forms::{Form, FormError};
use crate::maps::{GroupSpec, MapError, PolyAutomorphism, ScalingMap};

/// Deviation allowed from Jordan structure in [`family_to_diagonal`].
pub const JORDAN_STRUCTURE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HopfError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("unknown catalog entry `{0}` (valid: example1, example2, kodaira, vaisman)")]
    UnknownEntry(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Param {
    Real(f64),
    Complex([f64; 2]),
}

impl From<f64> for Param {
    fn from(x: f64) -> Self {
        Param::Real(x)
    }
}

impl From<C64> for Param {
    fn from(z: C64) -> Self {
        Param::Complex([z.re, z.im])
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub dim: usize,
    /// Keyed by `Omega`, `theta`, `psi`, …
    pub forms: BTreeMap<String, Form>,
    pub potential: Option<Expr>,
    pub group: GroupSpec,
    pub parameters: BTreeMap<String, Param>,
    /// Whether coefficients go through the Newton-solved `t`; selects the
    /// looser default tolerance.
    pub uses_newton: bool,
}

impl CatalogEntry {
    pub fn form(&self, name: &str) -> Option<&Form> {
        self.forms.get(name)
    }

    pub fn default_tolerance(&self) -> f64 {
        if self.uses_newton {
            1e-8
        } else {
            1e-10
        }
    }

    /// Same structure with a different covering group.
    pub fn with_group(mut self, group: GroupSpec) -> Result<Self, HopfError> {
        if group.dim() != self.dim {
            return Err(MapError::DimensionMismatch {
                left: self.dim,
                right: group.dim(),
            }
            .into());
        }
        self.group = group;
        Ok(self)
    }
}

fn check_expanding(mu: C64) -> Result<(), HopfError> {
    if !(mu.norm() > 1.0) || !mu.norm().is_finite() {
        return Err(HopfError::BadParameter(format!(
            "mu must satisfy |mu| > 1, got |mu| = {}",
            mu.norm()
        )));
    }
    Ok(())
}

fn scalar_group(n: usize, mu: C64) -> Result<GroupSpec, HopfError> {
    Ok(GroupSpec::cyclic(PolyAutomorphism::diagonal(&vec![mu; n])?))
}

/// `-√-1 Σ dz_i ∧ dz̄_i`.
pub fn flat_kahler_form(n: usize) -> Form {
    let minus_i = -Expr::i();
    Form::from_terms(n, 2, (0..n).map(|k| (vec![k, n + k], minus_i.clone())))
        .expect("valid indices")
}

/// `(Σ_i a_i z_i dz̄_i) + (Σ_i b_i z̄_i dz_i)` with the given scalar
/// weights, divided by `denominator`.
fn radial_one_form(n: usize, a: &Expr, b: &Expr, denominator: &Expr) -> Form {
    let mut terms = Vec::with_capacity(2 * n);
    for k in 0..n {
        terms.push((vec![n + k], a * &Expr::var(k) / denominator));
        terms.push((vec![k], b * &Expr::conj_var(k) / denominator));
    }
    Form::from_terms(n, 1, terms).expect("valid indices")
}

/// Standard structure on `ℂ² \ {0}`: `Ω = ω/|z|²`, its Lee form `θ`, the
/// Sasaki form `ψ`, the displayed Fubini–Study form, and `⟨z ↦ μz⟩`.
pub fn example1_entry(mu: C64) -> Result<CatalogEntry, HopfError> {
    check_expanding(mu)?;
    let n = 2;
    let rho = Expr::norm2(n);
    let omega = flat_kahler_form(n);
    let big_omega = omega.scale(&(Expr::one() / &rho));
    let minus_one = Expr::real(-1.0);
    let theta = radial_one_form(n, &minus_one, &minus_one, &rho);
    let psi = radial_one_form(n, &Expr::i(), &-Expr::i(), &rho);

    let mut forms = BTreeMap::new();
    forms.insert("Omega".to_string(), big_omega);
    forms.insert("omega".to_string(), omega);
    forms.insert("theta".to_string(), theta);
    forms.insert("psi".to_string(), psi);
    forms.insert("fubini_study".to_string(), fubini_study_display());
    let mut parameters = BTreeMap::new();
    parameters.insert("mu".to_string(), Param::from(mu));
    Ok(CatalogEntry {
        name: "example1".into(),
        dim: n,
        forms,
        potential: None,
        group: scalar_group(n, mu)?,
        parameters,
        uses_newton: false,
    })
}

/// The displayed Fubini–Study form on `ℂ² \ {0}`:
/// `-√-1/|z|⁴ (|z₂|² dz₁∧dz̄₁ + |z₁|² dz₂∧dz̄₂ − z̄₁z₂ dz₁∧dz̄₂ − z̄₂z₁ dz₂∧dz̄₁)`.
///
/// This equals `-√-1 ∂∂̄ log|z|²`, which is `-½ dψ` for the Sasaki form.
pub fn fubini_study_display() -> Form {
    let n = 2;
    let pre = -Expr::i() / Expr::norm2(n).powi(2);
    let (z1, z2) = (Expr::var(0), Expr::var(1));
    let (w1, w2) = (Expr::conj_var(0), Expr::conj_var(1));
    Form::from_terms(
        n,
        2,
        [
            (vec![0, 2], &pre * &Expr::abs2(1)),
            (vec![1, 3], &pre * &Expr::abs2(0)),
            (vec![0, 3], -(&pre * &(&w1 * &z2))),
            (vec![1, 2], -(&pre * &(&w2 * &z1))),
        ],
    )
    .expect("valid indices")
}

/// `Φ = Σ|z_i|²` and the group `⟨z ↦ μz⟩` on `ℂⁿ \ {0}`.
pub fn example2_potential(n: usize, mu: C64) -> Result<(Expr, GroupSpec), HopfError> {
    check_expanding(mu)?;
    if n < 2 {
        return Err(HopfError::BadParameter(format!(
            "dimension must be >= 2, got {n}"
        )));
    }
    Ok((Expr::norm2(n), scalar_group(n, mu)?))
}

/// `Ω = -√-1 ∂∂̄Φ` for a potential `Φ`.
pub fn potential_form(n: usize, phi: &Expr) -> Form {
    Form::function(n, phi.clone())
        .delbar()
        .del()
        .scale(&-Expr::i())
}

/// Flat potential structure: `Φ = |z|²`, `Ω = -√-1 ∂∂̄Φ`, `θ = 0`.
pub fn example2_entry(n: usize, mu: C64) -> Result<CatalogEntry, HopfError> {
    let (phi, group) = example2_potential(n, mu)?;
    let mut forms = BTreeMap::new();
    forms.insert("Omega".to_string(), potential_form(n, &phi));
    forms.insert("theta".to_string(), Form::zero(n, 1));
    let mut parameters = BTreeMap::new();
    parameters.insert("mu".to_string(), Param::from(mu));
    parameters.insert("n".to_string(), Param::Real(n as f64));
    Ok(CatalogEntry {
        name: "example2".into(),
        dim: n,
        forms,
        potential: Some(phi),
        group,
        parameters,
        uses_newton: false,
    })
}

/// `g_t(z) = (α z₁ + t z₂, α z₂)`.
pub fn kodaira_family(alpha: C64, t: C64) -> Result<PolyAutomorphism, HopfError> {
    let m = alpha.norm();
    if !(m > 0.0 && m < 1.0) {
        return Err(HopfError::BadParameter(format!(
            "alpha must satisfy 0 < |alpha| < 1, got |alpha| = {m}"
        )));
    }
    if !(t.re.is_finite() && t.im.is_finite()) {
        return Err(HopfError::BadParameter("t must be finite".into()));
    }
    let zero = C64::new(0.0, 0.0);
    Ok(PolyAutomorphism::linear(&DMatrix::from_row_slice(
        2,
        2,
        &[alpha, t, zero, alpha],
    ))?)
}

/// The flat potential structure on `ℂ² \ {0}` paired with the group
/// `⟨g_t⟩`. For `t ≠ 0` the potential is not homothetic under `g_t`, so a
/// full suite run fails there; at `t = 0` it passes.
pub fn kodaira_entry(alpha: C64, t: C64) -> Result<CatalogEntry, HopfError> {
    let g = kodaira_family(alpha, t)?;
    let n = 2;
    let phi = Expr::norm2(n);
    let mut forms = BTreeMap::new();
    forms.insert("Omega".to_string(), potential_form(n, &phi));
    forms.insert("theta".to_string(), Form::zero(n, 1));
    let mut parameters = BTreeMap::new();
    parameters.insert("alpha".to_string(), Param::from(alpha));
    parameters.insert("t".to_string(), Param::from(t));
    Ok(CatalogEntry {
        name: "kodaira".into(),
        dim: n,
        forms,
        potential: Some(phi),
        group: GroupSpec::cyclic(g),
        parameters,
        uses_newton: false,
    })
}

fn check_weights(r: &[f64]) -> Result<(), HopfError> {
    if r.len() < 2 {
        return Err(HopfError::BadParameter(format!(
            "need at least two weights, got {}",
            r.len()
        )));
    }
    if let Some(bad) = r.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(HopfError::BadParameter(format!(
            "weights must be positive and finite, got {bad}"
        )));
    }
    Ok(())
}

/// `√-1 (Σ r_i|z_i|²)⁻¹ Σ (z_i dz̄_i − z̄_i dz_i)`.
pub fn weighted_sasaki(r: &[f64]) -> Result<Form, HopfError> {
    check_weights(r)?;
    let n = r.len();
    let denominator = r.iter().enumerate().fold(Expr::zero(), |acc, (k, rk)| {
        acc + Expr::real(*rk) * Expr::abs2(k)
    });
    Ok(radial_one_form(n, &Expr::i(), &-Expr::i(), &denominator))
}

/// The time coordinate `t(w)` of `w = (e^{−r_i t} u_i)` with `|u| = 1`.
pub fn vaisman_time(r: &[f64]) -> Result<Expr, HopfError> {
    check_weights(r)?;
    let spec = ImplicitTSpec::new(r.to_vec())?;
    Ok(Expr::implicit_t_identity(Arc::new(spec)))
}

/// Weighted Vaisman structure for the diagonal group
/// `⟨diag(e^{−r_i + √-1 p_i})⟩`.
///
/// `θ = dt` and `Ω = −θ∧ψ + dψ`, where `ψ` is the weighted Sasaki form
/// written on the sphere factor and carried to `W` through
/// `u_i = e^{r_i t} w_i`.
pub fn vaisman_entry(r: &[f64], p: &[f64]) -> Result<CatalogEntry, HopfError> {
    check_weights(r)?;
    if p.len() != r.len() {
        return Err(HopfError::BadParameter(format!(
            "need one phase per weight: {} weights, {} phases",
            r.len(),
            p.len()
        )));
    }
    if let Some(bad) = p.iter().find(|x| **x == 0.0 || !x.is_finite()) {
        return Err(HopfError::BadParameter(format!(
            "phases must be nonzero and finite, got {bad}"
        )));
    }
    let n = r.len();
    let t = vaisman_time(r)?;
    let theta = Form::function(n, t.clone()).exterior_d();
    let (u, ubar): (Vec<Expr>, Vec<Expr>) = r
        .iter()
        .enumerate()
        .map(|(k, rk)| {
            let s = (Expr::real(*rk) * &t).exp();
            (&s * &Expr::var(k), &s * &Expr::conj_var(k))
        })
        .unzip();
    let psi = weighted_sasaki(r)?.pullback_general(&u, &ubar)?;
    let omega = (-theta.wedge(&psi)?).checked_add(&psi.exterior_d())?;

    let lambda: Vec<C64> = r
        .iter()
        .zip(p)
        .map(|(rk, pk)| C64::new(-rk, *pk).exp())
        .collect();
    let group = GroupSpec::cyclic(PolyAutomorphism::diagonal(&lambda)?);

    let mut forms = BTreeMap::new();
    forms.insert("Omega".to_string(), omega);
    forms.insert("theta".to_string(), theta);
    forms.insert("psi".to_string(), psi);
    forms.insert("t".to_string(), Form::function(n, t));
    let mut parameters = BTreeMap::new();
    for (k, (rk, pk)) in r.iter().zip(p).enumerate() {
        parameters.insert(format!("r{}", k + 1), Param::Real(*rk));
        parameters.insert(format!("p{}", k + 1), Param::Real(*pk));
        parameters.insert(format!("lambda{}", k + 1), Param::from(lambda[k]));
    }
    Ok(CatalogEntry {
        name: "vaisman".into(),
        dim: n,
        forms,
        potential: None,
        group,
        parameters,
        uses_newton: true,
    })
}

/// `t ↦ g_t = T_t⁻¹ g T_t` with `T_t = t·id`: the degree-`k` part of `g`
/// picks up `t^{k−1}`, so `g_1 = g` and `g_0 = L(g)`.
#[derive(Debug, Clone)]
pub struct LinearizingFamily {
    g: PolyAutomorphism,
}

pub fn family_to_linear(g: &PolyAutomorphism) -> LinearizingFamily {
    LinearizingFamily { g: g.clone() }
}

impl LinearizingFamily {
    pub fn base(&self) -> &PolyAutomorphism {
        &self.g
    }

    /// `g_t`; `t = 0` gives the coefficientwise limit.
    pub fn at(&self, t: C64) -> Result<PolyAutomorphism, HopfError> {
        Ok(self
            .g
            .conjugate_by_scaling(&ScalingMap::inverse_uniform(self.g.dim(), t))?)
    }

    pub fn limit(&self) -> Result<PolyAutomorphism, HopfError> {
        self.at(C64::new(0.0, 0.0))
    }
}

/// `t ↦ A_t = T_t A T_t⁻¹` with `T_t = diag(t^{n−1}, …, t, 1)` for a
/// matrix in Jordan form; superdiagonal ones become `t`.
#[derive(Debug, Clone)]
pub struct DiagonalizingFamily {
    a: DMatrix<C64>,
}

/// Checks that `a` is upper bidiagonal with superdiagonal entries in
/// `{0, 1}` and equal diagonal entries across each `1`.
pub fn family_to_diagonal(a: &DMatrix<C64>) -> Result<DiagonalizingFamily, HopfError> {
    if !a.is_square() {
        return Err(MapError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        }
        .into());
    }
    let n = a.nrows();
    let one = C64::new(1.0, 0.0);
    let mut deviation: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)];
            let d = if j == i + 1 {
                v.norm().min((v - one).norm())
            } else if j != i {
                v.norm()
            } else {
                0.0
            };
            deviation = deviation.max(d);
        }
        if i + 1 < n && (a[(i, i + 1)] - one).norm() <= JORDAN_STRUCTURE_TOL {
            deviation = deviation.max((a[(i, i)] - a[(i + 1, i + 1)]).norm());
        }
    }
    if deviation > JORDAN_STRUCTURE_TOL {
        return Err(MapError::NotJordan { deviation }.into());
    }
    Ok(DiagonalizingFamily { a: a.clone() })
}

impl DiagonalizingFamily {
    pub fn base(&self) -> &DMatrix<C64> {
        &self.a
    }

    /// Entry `(i, j)` scales by `t^{j−i}`; `t = 0` gives the diagonal.
    pub fn at(&self, t: C64) -> DMatrix<C64> {
        DMatrix::from_fn(self.a.nrows(), self.a.ncols(), |i, j| {
            if i == j {
                self.a[(i, j)]
            } else if t == C64::new(0.0, 0.0) {
                C64::new(0.0, 0.0)
            } else {
                self.a[(i, j)] * t.powi(j as i32 - i as i32)
            }
        })
    }

    pub fn limit(&self) -> DMatrix<C64> {
        self.at(C64::new(0.0, 0.0))
    }
}
