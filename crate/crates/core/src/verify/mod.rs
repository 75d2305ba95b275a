//! Residual certification at sampled points: the lcK identity, closedness
//! of the Lee form, definiteness, potential homothety and group invariance.
//! Every check produces a [`VerificationReport`].

mod lee;
mod suite;

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::cjson;
use crate::expr::{EvalError, Evaluator, Expr, C64};
use crate::forms::{definiteness, DefinitenessOptions, DefinitenessReport, Form, FormError};
use crate::hopf::{potential_form, Param};
use crate::maps::{GroupSpec, MapError, PolyAutomorphism};
use crate::sampling::annulus_points;

pub use lee::{solve_lee_pointwise, LeeSolveResult, LeeSolver, DEGENERACY_DET};
pub use suite::{run_suite, suite_passed, SuiteConfig};

/// Worst offenders kept per report.
pub const MAX_DETAILS: usize = 5;

/// Imaginary part allowed in a real potential.
pub const POTENTIAL_IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("Omega is degenerate at {point:?} (|det| = {det:e})")]
    DegenerateOmega { det: f64, point: Vec<C64> },
    #[error("potential is not real and positive at {point:?}: value {value}")]
    NonPositivePotential { value: C64, point: Vec<C64> },
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Offender {
    #[serde(with = "cjson::c64_vec")]
    pub point: Vec<C64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub check_name: String,
    pub status: Status,
    pub max_residual: f64,
    pub tolerance: f64,
    pub num_points: usize,
    pub seed: u64,
    /// Largest residuals first, ties by sample order.
    pub details: Vec<Offender>,
    pub parameters: BTreeMap<String, Param>,
    pub extras: BTreeMap<String, Value>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    fn new(check_name: &str, samples: &Samples, tolerance: f64, residuals: &[f64]) -> Self {
        let max_residual = residuals.iter().copied().fold(0.0, nan_max);
        let mut order: Vec<usize> = (0..residuals.len()).collect();
        order.sort_by(|a, b| residuals[*b].total_cmp(&residuals[*a]).then(a.cmp(b)));
        let details = order
            .into_iter()
            .take(MAX_DETAILS)
            .map(|k| Offender {
                point: samples.points[k].clone(),
                residual: residuals[k],
            })
            .collect();
        VerificationReport {
            check_name: check_name.to_string(),
            status: status(max_residual, tolerance),
            max_residual,
            tolerance,
            num_points: samples.points.len(),
            seed: samples.seed,
            details,
            parameters: BTreeMap::new(),
            extras: BTreeMap::new(),
        }
    }

    pub fn with_parameters(mut self, parameters: &BTreeMap<String, Param>) -> Self {
        self.parameters = parameters.clone();
        self
    }

    fn extra(mut self, key: &str, value: impl Serialize) -> Self {
        self.extras.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    /// Forces failure while keeping the residual (for side conditions).
    fn fail_if(mut self, cond: bool) -> Self {
        if cond {
            self.status = Status::Fail;
        }
        self
    }
}

/// NaN propagates as a failure.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn status(residual: f64, tolerance: f64) -> Status {
    if residual < tolerance {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// Seeded sample points with the seed kept for reporting.
#[derive(Debug, Clone)]
pub struct Samples {
    pub points: Vec<Vec<C64>>,
    pub seed: u64,
}

impl Samples {
    pub fn annulus(dim: usize, count: usize, seed: u64) -> Self {
        Samples {
            points: annulus_points(dim, count, seed),
            seed,
        }
    }

    pub fn from_points(points: Vec<Vec<C64>>, seed: u64) -> Self {
        Samples { points, seed }
    }
}

fn check_dims(a: &Form, b: &Form) -> Result<(), VerifyError> {
    if a.dim() != b.dim() {
        return Err(FormError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        }
        .into());
    }
    Ok(())
}

/// `max ‖dΩ − θ∧Ω‖` over the samples.
pub fn lck_residual_report(
    omega: &Form,
    theta: &Form,
    samples: &Samples,
    tolerance: f64,
) -> Result<VerificationReport, VerifyError> {
    check_dims(omega, theta)?;
    let defect = omega.exterior_d().checked_sub(&theta.wedge(omega)?)?;
    let residuals = pointwise_norms(&defect, samples)?;
    Ok(VerificationReport::new(
        "lck_residual",
        samples,
        tolerance,
        &residuals,
    ))
}

/// `max ‖dθ‖` over the samples.
pub fn closedness_report(
    check_name: &str,
    form: &Form,
    samples: &Samples,
    tolerance: f64,
) -> Result<VerificationReport, VerifyError> {
    let residuals = pointwise_norms(&form.exterior_d(), samples)?;
    Ok(VerificationReport::new(
        check_name, samples, tolerance, &residuals,
    ))
}

fn pointwise_norms(form: &Form, samples: &Samples) -> Result<Vec<f64>, VerifyError> {
    samples
        .points
        .iter()
        .map(|p| Ok(form.evaluate(p)?.max_abs()))
        .collect()
}

/// The lcK identity and closedness of `θ`; passes iff both residuals are
/// below `tolerance`. Definiteness of the (1,1) part of `Ω` is recorded in
/// `extras` but does not affect the status.
pub fn verify_lck(
    omega: &Form,
    theta: &Form,
    samples: &Samples,
    tolerance: f64,
) -> Result<VerificationReport, VerifyError> {
    let lck = lck_residual_report(omega, theta, samples, tolerance)?;
    let closed = closedness_report("lee_closedness", theta, samples, tolerance)?;
    let mut report = lck.clone();
    report.check_name = "lck".into();
    report.max_residual = nan_max(lck.max_residual, closed.max_residual);
    report.status = if lck.passed() && closed.passed() {
        Status::Pass
    } else {
        Status::Fail
    };
    let def = definiteness_summary(&omega.bidegree_part(1, 1), samples);
    Ok(report
        .extra("lck_residual", lck.max_residual)
        .extra("closedness_residual", closed.max_residual)
        .extra("closedness_details", &closed.details)
        .extra("definiteness", def))
}

fn definiteness_summary(form: &Form, samples: &Samples) -> Value {
    match definiteness(form, &samples.points, &DefinitenessOptions::default()) {
        Ok(r) => serde_json::to_value(r).unwrap_or(Value::Null),
        Err(e) => Value::String(e.to_string()),
    }
}

/// Definiteness of a (1,1)-form with a common sign across all samples.
///
/// The residual at a point is `1/(s·λ_min)`, the largest eigenvalue of
/// `h⁻¹` after orienting by the recorded sign `s`; it is `f64::MAX` when
/// the point is not definite with that sign. The tolerance is
/// `1/zero_tol`, so the check passes iff every oriented eigenvalue
/// exceeds `zero_tol`.
pub fn definiteness_report(
    form: &Form,
    samples: &Samples,
) -> Result<VerificationReport, VerifyError> {
    let opts = DefinitenessOptions::default();
    let report: DefinitenessReport = definiteness(form, &samples.points, &opts)?;
    let sign = f64::from(report.sign.unwrap_or(1));
    let residuals: Vec<f64> = report
        .samples
        .iter()
        .map(|s| {
            let oriented = s
                .eigenvalues
                .iter()
                .map(|l| sign * l)
                .fold(f64::INFINITY, f64::min);
            if oriented > 0.0 {
                1.0 / oriented
            } else {
                f64::MAX
            }
        })
        .collect();
    let out = VerificationReport::new(
        "definiteness",
        samples,
        (1.0 / opts.zero_tol).round(),
        &residuals,
    )
    .fail_if(!report.overall.is_definite());
    Ok(out.extra("summary", &report))
}

/// Homothety of a potential under the group generators, plus closedness and
/// definiteness of `-√-1 ∂∂̄Φ`.
///
/// For each generator `γ` the ratio `Φ(γz)/Φ(z)` is sampled; its deviation
/// from constancy is `max − min`. The residual reported is the largest
/// deviation over generators.
pub fn verify_potential(
    phi: &Expr,
    group: &GroupSpec,
    samples: &Samples,
    tolerance: f64,
) -> Result<VerificationReport, VerifyError> {
    let n = group.dim();
    let mut values = Vec::with_capacity(samples.points.len());
    for p in &samples.points {
        let v = phi.evaluate(p)?;
        if !(v.im.abs() < POTENTIAL_IMAG_TOL && v.re > 0.0) {
            return Err(VerifyError::NonPositivePotential {
                value: v,
                point: p.clone(),
            });
        }
        values.push(v.re);
    }

    let mut generators_json = Vec::new();
    let mut per_point = vec![0.0f64; samples.points.len()];
    let mut worst = 0.0f64;
    let mut all_positive = true;
    for (index, g) in group.generators().iter().enumerate() {
        let mut ratios = Vec::with_capacity(values.len());
        for (p, v) in samples.points.iter().zip(&values) {
            let image = phi.evaluate(&g.evaluate(p))?;
            ratios.push(image.re / v);
        }
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
                (a.min(*r), b.max(*r))
            });
        let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
        let deviation = if ratios.is_empty() { 0.0 } else { hi - lo };
        for (slot, r) in per_point.iter_mut().zip(&ratios) {
            *slot = slot.max((r - mean).abs());
        }
        worst = nan_max(worst, deviation);
        all_positive &= lo > 0.0;
        generators_json.push(serde_json::json!({
            "generator": index,
            "mean_ratio": mean,
            "min_ratio": lo,
            "max_ratio": hi,
            "deviation": deviation,
        }));
    }

    let omega = potential_form(n, phi);
    let closed = closedness_report("potential_closedness", &omega, samples, tolerance)?;
    let def = definiteness(&omega, &samples.points, &DefinitenessOptions::default())?;

    let mut report = VerificationReport::new("potential_homothety", samples, tolerance, &per_point);
    report.max_residual = worst;
    report.status = status(worst, tolerance);
    Ok(report
        .fail_if(!all_positive || !closed.passed() || !def.overall.is_definite())
        .extra("generators", generators_json)
        .extra("closedness_residual", closed.max_residual)
        .extra("definiteness", &def))
}

/// `max ‖g*a − a‖` over the samples.
pub fn verify_invariance(
    a: &Form,
    g: &PolyAutomorphism,
    samples: &Samples,
    tolerance: f64,
) -> Result<VerificationReport, VerifyError> {
    invariance_report("invariance", a, std::slice::from_ref(g), samples, tolerance)
}

pub(crate) fn invariance_report(
    check_name: &str,
    a: &Form,
    generators: &[PolyAutomorphism],
    samples: &Samples,
    tolerance: f64,
) -> Result<VerificationReport, VerifyError> {
    if let Some(g) = generators.iter().find(|g| g.dim() != a.dim()) {
        return Err(FormError::DimensionMismatch {
            left: a.dim(),
            right: g.dim(),
        }
        .into());
    }
    let pulled: Vec<Form> = generators
        .iter()
        .map(|g| a.pullback(&g.to_exprs()))
        .collect::<Result<_, _>>()?;
    let mut residuals = Vec::with_capacity(samples.points.len());
    for p in &samples.points {
        let mut ev = Evaluator::new(p);
        let base = a.evaluate_with(&mut ev)?;
        let mut r = 0.0f64;
        for b in &pulled {
            r = nan_max(r, b.evaluate_with(&mut ev)?.max_diff(&base));
        }
        residuals.push(r);
    }
    Ok(
        VerificationReport::new(check_name, samples, tolerance, &residuals)
            .extra("generators", generators.len()),
    )
}

#[cfg(test)]
mod tests;
