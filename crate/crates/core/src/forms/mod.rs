//! Complex-valued differential forms on `W = ℂⁿ \ {0}` with [`Expr`]
//! coefficients.
//!
//! The ordered basis of the complexified cotangent space is
//! `dz_1, …, dz_n, dz̄_1, …, dz̄_n`, numbered `0..2n` (so `dz̄_i` is `n + i`).
//! A term is keyed by a strictly increasing multi-index over that basis.
//! Zero coefficients are pruned, so the zero form has no terms.

mod hermitian;
mod value;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Evaluator, Expr, ExprError, ExprJson, C64};

pub use hermitian::{
    definiteness, hermitian_sample, Definiteness, DefinitenessOptions, DefinitenessReport,
    HermitianMatrixSample,
};
pub use value::FormValue;

pub type MultiIndex = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("invalid multi-index {index:?} for dimension {dim}")]
    BadIndex { index: Vec<usize>, dim: usize },
    #[error("map component {component} depends on a conjugate variable")]
    NonHolomorphicMap { component: usize },
    #[error("evaluating coefficient of {index}: {source}")]
    Eval {
        index: String,
        #[source]
        source: EvalError,
    },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("form is not of type (1,1): mixed-degree residual {residual:e} at {point:?}")]
    NotType11 { residual: f64, point: Vec<C64> },
    #[error("coefficient matrix is not Hermitian: deviation {deviation:e} at {point:?}")]
    NonHermitian { deviation: f64, point: Vec<C64> },
    #[error("basis id `{0}` is not of the form dzK or dzbK")]
    BadBasisId(String),
}

/// Label like `dz1` or `dzb2` for basis element `b` in dimension `dim`.
pub fn basis_label(dim: usize, b: usize) -> String {
    if b < dim {
        format!("dz{}", b + 1)
    } else {
        format!("dzb{}", b - dim + 1)
    }
}

pub fn parse_basis_label(dim: usize, s: &str) -> Result<usize, FormError> {
    let bad = || FormError::BadBasisId(s.to_string());
    let (offset, digits) = if let Some(rest) = s.strip_prefix("dzb") {
        (dim, rest)
    } else if let Some(rest) = s.strip_prefix("dz") {
        (0, rest)
    } else {
        return Err(bad());
    };
    let k: usize = digits.parse().map_err(|_| bad())?;
    if k == 0 || k > dim {
        return Err(bad());
    }
    Ok(offset + k - 1)
}

pub fn index_label(dim: usize, idx: &[usize]) -> String {
    if idx.is_empty() {
        return "1".into();
    }
    idx.iter()
        .map(|b| basis_label(dim, *b))
        .collect::<Vec<_>>()
        .join("^")
}

/// Sort `idx` in place and return the permutation sign, or `None` if an
/// element repeats.
fn sort_with_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Merge two sorted disjoint indices; `None` if they intersect.
pub(crate) fn merge_indices(a: &[usize], b: &[usize]) -> Option<(MultiIndex, f64)> {
    let mut inversions = 0usize;
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            // b[j] jumps over the remaining a's
            inversions += a.len() - i;
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    let sign = if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    Some((out, sign))
}

#[derive(Clone, PartialEq)]
pub struct Form {
    dim: usize,
    degree: usize,
    terms: BTreeMap<MultiIndex, Expr>,
}

impl Form {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Form {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// The 0-form `f`.
    pub fn function(dim: usize, f: Expr) -> Self {
        let mut out = Self::zero(dim, 0);
        out.accumulate(Vec::new(), f);
        out
    }

    /// A single basis covector (`b < 2·dim`).
    pub fn basis(dim: usize, b: usize) -> Self {
        assert!(
            b < 2 * dim,
            "basis element {b} out of range for dimension {dim}"
        );
        let mut out = Self::zero(dim, 1);
        out.terms.insert(vec![b], Expr::one());
        out
    }

    pub fn dz(dim: usize, i: usize) -> Self {
        Self::basis(dim, i)
    }

    pub fn dzbar(dim: usize, i: usize) -> Self {
        Self::basis(dim, dim + i)
    }

    /// Build from arbitrary (unsorted) index lists, normalizing signs.
    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<Self, FormError>
    where
        I: IntoIterator<Item = (Vec<usize>, Expr)>,
    {
        let mut out = Self::zero(dim, degree);
        for (mut idx, c) in terms {
            if idx.len() != degree || idx.iter().any(|b| *b >= 2 * dim) {
                return Err(FormError::BadIndex { index: idx, dim });
            }
            if let Some(sign) = sort_with_sign(&mut idx) {
                let c = if sign < 0.0 { -c } else { c };
                out.accumulate(idx, c);
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Expr> {
        &self.terms
    }

    pub fn coefficient(&self, idx: &[usize]) -> Option<&Expr> {
        self.terms.get(idx)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(&mut self, idx: MultiIndex, c: Expr) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&idx) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(idx, sum);
                }
            }
            None => {
                self.terms.insert(idx, c);
            }
        }
    }

    fn check_compatible(&self, other: &Form) -> Result<(), FormError> {
        if self.dim != other.dim {
            return Err(FormError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Form) -> Result<Form, FormError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            out.accumulate(idx.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Form) -> Result<Form, FormError> {
        self.checked_add(&other.scale(&Expr::real(-1.0)))
    }

    /// Multiply every coefficient by the function `f`.
    pub fn scale(&self, f: &Expr) -> Form {
        let mut out = Self::zero(self.dim, self.degree);
        for (idx, c) in &self.terms {
            out.accumulate(idx.clone(), f * c);
        }
        out
    }

    pub fn wedge(&self, other: &Form) -> Result<Form, FormError> {
        if self.dim != other.dim {
            return Err(FormError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let degree = self.degree + other.degree;
        let mut out = Self::zero(self.dim, degree);
        if degree > 2 * self.dim {
            return Ok(out);
        }
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some((idx, sign)) = merge_indices(a, b) {
                    let c = ca * cb;
                    out.accumulate(idx, if sign < 0.0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Apply `f ↦ Σ_{b ∈ basis} (∂f/∂b) db ∧ ·` restricted to `bases`.
    fn differentiate(&self, bases: std::ops::Range<usize>) -> Form {
        let n = self.dim;
        let mut out = Self::zero(n, self.degree + 1);
        if self.degree >= 2 * n {
            return out;
        }
        for (idx, f) in &self.terms {
            for b in bases.clone() {
                if idx.contains(&b) {
                    continue;
                }
                let df = if b < n { f.d_z(b) } else { f.d_zbar(b - n) };
                if df.is_zero() {
                    continue;
                }
                let pos = idx.iter().filter(|a| **a < b).count();
                let mut new_idx = idx.clone();
                new_idx.insert(pos, b);
                out.accumulate(new_idx, if pos % 2 == 0 { df } else { -df });
            }
        }
        out
    }

    pub fn exterior_d(&self) -> Form {
        self.differentiate(0..2 * self.dim)
    }

    /// `∂`: the part of `d` raising holomorphic degree.
    pub fn del(&self) -> Form {
        self.differentiate(0..self.dim)
    }

    /// `∂̄`: the part of `d` raising antiholomorphic degree.
    pub fn delbar(&self) -> Form {
        self.differentiate(self.dim..2 * self.dim)
    }

    pub fn del_and_delbar(&self) -> (Form, Form) {
        (self.del(), self.delbar())
    }

    /// Component of bidegree `(p, q)`.
    pub fn bidegree_part(&self, p: usize, q: usize) -> Form {
        let n = self.dim;
        let mut out = Self::zero(n, self.degree);
        for (idx, c) in &self.terms {
            let holo = idx.iter().filter(|b| **b < n).count();
            if holo == p && idx.len() - holo == q {
                out.terms.insert(idx.clone(), c.clone());
            }
        }
        out
    }

    /// Complex conjugate form: conjugates coefficients and swaps `dz ↔ dz̄`.
    pub fn conj(&self) -> Form {
        let n = self.dim;
        let mut out = Self::zero(n, self.degree);
        for (idx, c) in &self.terms {
            let mut swapped: Vec<usize> = idx
                .iter()
                .map(|b| if *b < n { b + n } else { b - n })
                .collect();
            let sign = sort_with_sign(&mut swapped).expect("swap keeps indices distinct");
            let cc = c.conj();
            out.accumulate(swapped, if sign < 0.0 { -cc } else { cc });
        }
        out
    }

    /// Pullback along a holomorphic map `z ↦ f(z)`.
    ///
    /// Coefficients are composed with `f` (and `z̄ ↦ conj f`), `dz_i` maps to
    /// `Σ_j ∂f_i/∂z_j dz_j` and `dz̄_i` to its conjugate.
    pub fn pullback(&self, f: &[Expr]) -> Result<Form, FormError> {
        if f.len() != self.dim {
            return Err(FormError::DimensionMismatch {
                left: self.dim,
                right: f.len(),
            });
        }
        if let Some(component) = f.iter().position(Expr::contains_conj) {
            return Err(FormError::NonHolomorphicMap { component });
        }
        let fbar: Vec<Expr> = f.iter().map(Expr::conj).collect();
        self.pullback_general(f, &fbar)
    }

    /// Pullback along a smooth map given by its components `u` and their
    /// conjugates `ubar`, both as functions of `(z, z̄)`.
    ///
    /// `dz_i ↦ d(u_i)`, `dz̄_i ↦ d(ū_i)` with the full exterior derivative.
    pub fn pullback_general(&self, u: &[Expr], ubar: &[Expr]) -> Result<Form, FormError> {
        let n = self.dim;
        for len in [u.len(), ubar.len()] {
            if len != n {
                return Err(FormError::DimensionMismatch {
                    left: n,
                    right: len,
                });
            }
        }
        let mut images: HashMap<usize, Form> = HashMap::new();
        let mut out = Self::zero(n, self.degree);
        for (idx, c) in &self.terms {
            let coeff = c.substitute(u, ubar)?;
            let mut acc = Form::function(n, coeff);
            for b in idx {
                let img = images.entry(*b).or_insert_with(|| {
                    let comp = if *b < n { &u[*b] } else { &ubar[*b - n] };
                    Form::function(n, comp.clone()).exterior_d()
                });
                acc = acc.wedge(img)?;
            }
            out = out.checked_add(&acc)?;
        }
        Ok(out)
    }

    /// Numeric coefficients at `p`.
    pub fn evaluate(&self, p: &[C64]) -> Result<FormValue, FormError> {
        let mut ev = Evaluator::new(p);
        self.evaluate_with(&mut ev)
    }

    /// Evaluate sharing the evaluator's memo table with other forms.
    pub fn evaluate_with(&self, ev: &mut Evaluator<'_>) -> Result<FormValue, FormError> {
        let mut coeffs = BTreeMap::new();
        for (idx, c) in &self.terms {
            let v = ev.eval(c).map_err(|source| FormError::Eval {
                index: index_label(self.dim, idx),
                source,
            })?;
            coeffs.insert(idx.clone(), v);
        }
        Ok(FormValue::new(self.dim, self.degree, coeffs))
    }

    /// Largest coefficient magnitude at `p`.
    pub fn residual_at(&self, p: &[C64]) -> Result<f64, FormError> {
        Ok(self.evaluate(p)?.max_abs())
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form(dim={}, deg={}) {{", self.dim, self.degree)?;
        for (i, (idx, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{}] {}", c, index_label(self.dim, idx))?;
        }
        write!(f, "}}")
    }
}

macro_rules! form_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        /// Panics on dimension or degree mismatch; use the `checked_*`
        /// variant to get an error instead.
        impl ops::$trait<&Form> for &Form {
            type Output = Form;
            fn $method(self, rhs: &Form) -> Form {
                self.$checked(rhs).expect("incompatible forms")
            }
        }
        impl ops::$trait<Form> for Form {
            type Output = Form;
            fn $method(self, rhs: Form) -> Form {
                self.$checked(&rhs).expect("incompatible forms")
            }
        }
    };
}

form_op!(Add, add, checked_add);
form_op!(Sub, sub, checked_sub);

impl ops::Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.scale(&Expr::real(-1.0))
    }
}

impl ops::Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.scale(&Expr::real(-1.0))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormJson {
    dim: usize,
    degree: usize,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    index: Vec<String>,
    coeff: ExprJson,
}

impl Serialize for Form {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FormJson {
            dim: self.dim,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(idx, c)| TermJson {
                    index: idx.iter().map(|b| basis_label(self.dim, *b)).collect(),
                    coeff: c.into(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Form {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let j = FormJson::deserialize(d)?;
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            let idx = t
                .index
                .iter()
                .map(|s| parse_basis_label(j.dim, s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(D::Error::custom)?;
            let c = Expr::try_from(&t.coeff).map_err(D::Error::custom)?;
            terms.push((idx, c));
        }
        Form::from_terms(j.dim, j.degree, terms).map_err(D::Error::custom)
    }
}
