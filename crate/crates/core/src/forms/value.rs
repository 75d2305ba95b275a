use std::collections::BTreeMap;

use crate::expr::C64;

use super::{index_label, merge_indices, MultiIndex};

/// Numeric coefficients of a form at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FormValue {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<MultiIndex, C64>,
}

impl FormValue {
    pub fn new(dim: usize, degree: usize, coeffs: BTreeMap<MultiIndex, C64>) -> Self {
        FormValue {
            dim,
            degree,
            coeffs,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, C64> {
        &self.coeffs
    }

    /// Coefficient on a sorted multi-index (zero when absent).
    pub fn get(&self, idx: &[usize]) -> C64 {
        self.coeffs.get(idx).copied().unwrap_or_default()
    }

    /// Residual norm: the largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficientwise difference over the union of supports.
    pub fn max_diff(&self, other: &FormValue) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|k| (self.get(k) - other.get(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> FormValue {
        FormValue {
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (k.clone(), v * s))
                .collect(),
            ..self.clone()
        }
    }

    pub fn wedge(&self, other: &FormValue) -> FormValue {
        let mut coeffs: BTreeMap<MultiIndex, C64> = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                if let Some((idx, sign)) = merge_indices(a, b) {
                    *coeffs.entry(idx).or_default() += ca * cb * sign;
                }
            }
        }
        FormValue::new(self.dim, self.degree + other.degree, coeffs)
    }

    /// Coefficients keyed by readable labels such as `dz1^dzb2`.
    pub fn labeled(&self) -> BTreeMap<String, C64> {
        self.coeffs
            .iter()
            .map(|(k, v)| (index_label(self.dim, k), *v))
            .collect()
    }
}
