//! Holomorphic polynomial automorphisms of `ℂⁿ` fixing the origin.
//!
//! Components are sparse tables `exponent vector → coefficient`. The
//! operations the deformation families need (composition, conjugation by
//! weighted scalings, extraction of the linear part) act directly on those
//! tables, so no truncation or numerical differentiation is involved.

mod contraction;
mod group;
mod jordan;
pub(crate) mod linalg;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cjson;
use crate::expr::{Expr, C64};

pub use contraction::{contraction_test, ContractionOptions, ContractionReport};
pub use group::{
    equivariance_check, fixed_point_free_check, FixedPointReport, GroupElementCheck, GroupSpec,
};
pub use jordan::{jordan_form, jordan_matrix, JordanBlock, JordanDecomposition, JordanOptions};
pub use linalg::{eigenvalues, spectral_radius};

/// Default cap on total degree for [`PolyAutomorphism::compose`].
pub const DEFAULT_DEGREE_CAP: u32 = 16;

/// `|det L(g)|` below this is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("component {component} has a constant term; the map must fix the origin")]
    ConstantTerm { component: usize },
    #[error("linear part is singular (|det| = {det:e})")]
    SingularLinearPart { det: f64 },
    #[error("composition degree {degree} exceeds cap {cap}")]
    DegreeOverflow { degree: u32, cap: u32 },
    #[error("scaling parameter t = 0 with negative exponent {exponent}: limit does not exist")]
    DivergentLimit { exponent: i32 },
    #[error("matrix is not in Jordan form (deviation {deviation:e})")]
    NotJordan { deviation: f64 },
    #[error("jordan chain construction is ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("orbit norm {norm:e} exceeded 1e6 after {iteration} iterations")]
    IterationDiverged { norm: f64, iteration: usize },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("malformed map json: {0}")]
    Json(String),
}

pub type Monomial = Vec<u32>;

fn total_degree(m: &[u32]) -> u32 {
    m.iter().sum()
}

/// Sparse polynomial in `z_1..z_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self::monomial(dim, vec![0; dim], c)
    }

    pub fn var(dim: usize, i: usize) -> Self {
        let mut m = vec![0; dim];
        m[i] = 1;
        Self::monomial(dim, m, C64::new(1.0, 0.0))
    }

    pub fn monomial(dim: usize, exponents: Monomial, c: C64) -> Self {
        assert_eq!(exponents.len(), dim, "monomial arity");
        let mut p = Self::zero(dim);
        p.add_term(exponents, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, C64)>>(dim: usize, terms: I) -> Self {
        let mut p = Self::zero(dim);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_default();
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.remove(&m);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, C64> {
        &self.terms
    }

    pub fn coefficient(&self, m: &[u32]) -> C64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| total_degree(m))
            .max()
            .unwrap_or(0)
    }

    /// Degree-`k` homogeneous part.
    pub fn homogeneous_part(&self, k: u32) -> Poly {
        Poly::from_terms(
            self.dim,
            self.terms
                .iter()
                .filter(|(m, _)| total_degree(m) == k)
                .map(|(m, c)| (m.clone(), *c)),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::from_terms(self.dim, self.terms.iter().map(|(m, c)| (m.clone(), c * s)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let m = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn evaluate(&self, z: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(m, c)| m.iter().zip(z).fold(*c, |acc, (e, zi)| acc * zi.powu(*e)))
            .sum()
    }

    pub fn to_expr(&self) -> Expr {
        self.terms.iter().fold(Expr::zero(), |acc, (m, c)| {
            let mono = m
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .fold(Expr::constant(*c), |t, (i, e)| {
                    t * Expr::var(i).powi(*e as i32)
                });
            acc + mono
        })
    }
}

/// Holomorphic polynomial self-map of `ℂⁿ` with `g(0) = 0` and invertible
/// linear part.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyAutomorphism {
    components: Vec<Poly>,
}

impl PolyAutomorphism {
    pub fn new(components: Vec<Poly>) -> Result<Self, MapError> {
        let n = components.len();
        if n == 0 {
            return Err(MapError::BadParameter("map has no components".into()));
        }
        for (i, p) in components.iter().enumerate() {
            if p.dim != n {
                return Err(MapError::DimensionMismatch {
                    left: n,
                    right: p.dim,
                });
            }
            if p.terms.keys().any(|m| total_degree(m) == 0) {
                return Err(MapError::ConstantTerm { component: i });
            }
        }
        let g = PolyAutomorphism { components };
        let det = g.linear_part().determinant().norm();
        if !(det > SINGULAR_DET) {
            return Err(MapError::SingularLinearPart { det });
        }
        Ok(g)
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(|i| Poly::var(n, i)).collect()).expect("identity is valid")
    }

    pub fn linear(a: &DMatrix<C64>) -> Result<Self, MapError> {
        if !a.is_square() {
            return Err(MapError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let n = a.nrows();
        let comps = (0..n)
            .map(|i| {
                Poly::from_terms(
                    n,
                    (0..n).map(|j| {
                        let mut m = vec![0; n];
                        m[j] = 1;
                        (m, a[(i, j)])
                    }),
                )
            })
            .collect();
        Self::new(comps)
    }

    pub fn diagonal(values: &[C64]) -> Result<Self, MapError> {
        Self::linear(&DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(values),
        ))
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    /// `dg(0)`: the degree-1 coefficients, read off the table.
    pub fn linear_part(&self) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            let mut m = vec![0; n];
            m[j] = 1;
            self.components[i].coefficient(&m)
        })
    }

    pub fn evaluate(&self, z: &[C64]) -> Vec<C64> {
        self.components.iter().map(|p| p.evaluate(z)).collect()
    }

    /// `self ∘ inner` with the default degree cap.
    pub fn compose(&self, inner: &PolyAutomorphism) -> Result<PolyAutomorphism, MapError> {
        self.compose_with_cap(inner, DEFAULT_DEGREE_CAP)
    }

    pub fn compose_with_cap(
        &self,
        inner: &PolyAutomorphism,
        cap: u32,
    ) -> Result<PolyAutomorphism, MapError> {
        let n = self.dim();
        if inner.dim() != n {
            return Err(MapError::DimensionMismatch {
                left: n,
                right: inner.dim(),
            });
        }
        let bound = self.degree() * inner.degree();
        if bound > cap {
            return Err(MapError::DegreeOverflow { degree: bound, cap });
        }
        // powers[j][e] = inner_j^e
        let max_exp = self.degree() as usize;
        let powers: Vec<Vec<Poly>> = inner
            .components
            .iter()
            .map(|h| {
                let mut v = vec![Poly::constant(n, C64::new(1.0, 0.0))];
                for e in 1..=max_exp {
                    let next = v[e - 1].mul(h);
                    v.push(next);
                }
                v
            })
            .collect();
        let comps = self
            .components
            .iter()
            .map(|g| {
                g.terms.iter().fold(Poly::zero(n), |acc, (m, c)| {
                    let term = m
                        .iter()
                        .enumerate()
                        .fold(Poly::constant(n, *c), |t, (j, e)| {
                            t.mul(&powers[j][*e as usize])
                        });
                    acc.add(&term)
                })
            })
            .collect();
        PolyAutomorphism::new(comps)
    }

    /// `k`-fold iterate.
    pub fn iterate(&self, k: u32) -> Result<PolyAutomorphism, MapError> {
        let mut out = PolyAutomorphism::identity(self.dim());
        for _ in 0..k {
            out = self.compose(&out)?;
        }
        Ok(out)
    }

    /// `T ∘ self ∘ T⁻¹` for the weighted scaling `T(z)_i = t^{k_i} z_i`.
    ///
    /// The monomial `c z^m` of component `i` becomes `c t^{k_i − ⟨m, k⟩} z^m`.
    /// With `t = 0` the coefficientwise limit is returned when every
    /// exponent is non-negative.
    pub fn conjugate_by_scaling(&self, scaling: &ScalingMap) -> Result<PolyAutomorphism, MapError> {
        let n = self.dim();
        if scaling.weights.len() != n {
            return Err(MapError::DimensionMismatch {
                left: n,
                right: scaling.weights.len(),
            });
        }
        let k = &scaling.weights;
        let mut comps = Vec::with_capacity(n);
        for (i, g) in self.components.iter().enumerate() {
            let mut terms = Vec::with_capacity(g.terms.len());
            for (m, c) in &g.terms {
                let inner: i32 = m.iter().zip(k).map(|(e, w)| *e as i32 * w).sum();
                let factor = scaling.power(k[i] - inner)?;
                terms.push((m.clone(), c * factor));
            }
            comps.push(Poly::from_terms(n, terms));
        }
        PolyAutomorphism::new(comps)
    }

    /// Inverse of a linear map.
    pub fn inverse_linear(&self) -> Option<PolyAutomorphism> {
        if !self.is_linear() {
            return None;
        }
        let inv = self.linear_part().try_inverse()?;
        PolyAutomorphism::linear(&inv).ok()
    }

    pub fn to_exprs(&self) -> Vec<Expr> {
        self.components.iter().map(Poly::to_expr).collect()
    }
}

/// Weighted scaling `T_t(z) = (t^{k_1} z_1, …, t^{k_n} z_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingMap {
    weights: Vec<i32>,
    t: C64,
}

impl ScalingMap {
    pub fn new(weights: Vec<i32>, t: C64) -> Self {
        ScalingMap { weights, t }
    }

    /// `T_t(z) = t z`.
    pub fn uniform(n: usize, t: C64) -> Self {
        Self::new(vec![1; n], t)
    }

    /// `T_t⁻¹(z) = t⁻¹ z`, written with weights `-1`.
    pub fn inverse_uniform(n: usize, t: C64) -> Self {
        Self::new(vec![-1; n], t)
    }

    /// `T_t(z) = (t^{n−1} z_1, t^{n−2} z_2, …, t z_{n−1}, z_n)`.
    pub fn diagonalizing(n: usize, t: C64) -> Self {
        Self::new((0..n).rev().map(|k| k as i32).collect(), t)
    }

    pub fn weights(&self) -> &[i32] {
        &self.weights
    }

    pub fn t(&self) -> C64 {
        self.t
    }

    pub fn apply(&self, z: &[C64]) -> Vec<C64> {
        z.iter()
            .zip(&self.weights)
            .map(|(zi, k)| zi * self.t.powi(*k))
            .collect()
    }

    /// `t^e`, with `0^0 = 1` and `0^e = 0` for `e > 0`.
    fn power(&self, e: i32) -> Result<C64, MapError> {
        if self.t == C64::new(0.0, 0.0) {
            match e {
                0 => Ok(C64::new(1.0, 0.0)),
                e if e > 0 => Ok(C64::new(0.0, 0.0)),
                e => Err(MapError::DivergentLimit { exponent: e }),
            }
        } else {
            Ok(self.t.powi(e))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    monomial: Vec<u32>,
    #[serde(with = "cjson::c64")]
    coeff: C64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapJson {
    dim: usize,
    components: Vec<Vec<TermJson>>,
}

impl Serialize for PolyAutomorphism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MapJson {
            dim: self.dim(),
            components: self
                .components
                .iter()
                .map(|p| {
                    p.terms
                        .iter()
                        .map(|(m, c)| TermJson {
                            monomial: m.clone(),
                            coeff: *c,
                        })
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyAutomorphism {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let j = MapJson::deserialize(d)?;
        if j.components.len() != j.dim {
            return Err(D::Error::custom(format!(
                "dim is {} but {} components given",
                j.dim,
                j.components.len()
            )));
        }
        let mut comps = Vec::with_capacity(j.dim);
        for (i, terms) in j.components.into_iter().enumerate() {
            let mut p = Poly::zero(j.dim);
            for t in terms {
                if t.monomial.len() != j.dim {
                    return Err(D::Error::custom(format!(
                        "component {}: monomial {:?} has {} exponents, expected {}",
                        i + 1,
                        t.monomial,
                        t.monomial.len(),
                        j.dim
                    )));
                }
                p.add_term(t.monomial, t.coeff);
            }
            comps.push(p);
        }
        PolyAutomorphism::new(comps).map_err(D::Error::custom)
    }
}
