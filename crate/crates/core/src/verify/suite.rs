use crate::hopf::CatalogEntry;
use crate::maps::{contraction_test, fixed_point_free_check, ContractionOptions};

use super::{
    closedness_report, definiteness_report, invariance_report, lck_residual_report,
    verify_potential, Samples, Status, VerificationReport, VerifyError,
};

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub points: usize,
    pub seed: u64,
    /// `None` uses the entry's default.
    pub tolerance: Option<f64>,
    pub contraction: ContractionOptions,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            points: 1000,
            seed: 42,
            tolerance: None,
            contraction: ContractionOptions::default(),
        }
    }
}

fn error_report(
    check_name: &str,
    samples: &Samples,
    tolerance: f64,
    err: &VerifyError,
) -> VerificationReport {
    let mut r = VerificationReport::new(check_name, samples, tolerance, &[]);
    r.status = Status::Fail;
    r.max_residual = f64::MAX;
    r.extra("error", err.to_string())
}

/// Runs, in order: lcK residual, Lee closedness, definiteness of `Ω`,
/// potential homothety (if the entry has a potential), invariance of `θ`
/// and `ψ` under the group generators, the fixed-point check and the
/// contraction test. Failures, including evaluation errors, become failing
/// reports.
pub fn run_suite(entry: &CatalogEntry, config: &SuiteConfig) -> Vec<VerificationReport> {
    let tol = config
        .tolerance
        .unwrap_or_else(|| entry.default_tolerance());
    let samples = Samples::annulus(entry.dim, config.points, config.seed);
    let mut out = Vec::new();
    let mut push = |name: &str, r: Result<VerificationReport, VerifyError>, tolerance: f64| {
        let r = match r {
            Ok(mut r) => {
                r.check_name = name.to_string();
                r
            }
            Err(e) => error_report(name, &samples, tolerance, &e),
        };
        out.push(r.with_parameters(&entry.parameters));
    };

    let omega = entry.form("Omega");
    let theta = entry.form("theta");
    if let (Some(o), Some(t)) = (omega, theta) {
        push(
            "lck_residual",
            lck_residual_report(o, t, &samples, tol),
            tol,
        );
    }
    if let Some(t) = theta {
        push(
            "lee_closedness",
            closedness_report("lee_closedness", t, &samples, tol),
            tol,
        );
    }
    if let Some(o) = omega {
        push("definiteness", definiteness_report(o, &samples), 1e9);
    }
    if let Some(phi) = &entry.potential {
        push(
            "potential_homothety",
            verify_potential(phi, &entry.group, &samples, tol),
            tol,
        );
    }
    let generators = entry.group.generators();
    for name in ["theta", "psi"] {
        if let Some(a) = entry.form(name) {
            let check = format!("invariance_{name}");
            push(
                &check,
                invariance_report(&check, a, &generators, &samples, tol),
                tol,
            );
        }
    }

    let fp = fixed_point_free_check(&entry.group);
    let fp_tol = 1.0 / entry.group.relation_tolerance().max(1e-8);
    let mut fp_report = VerificationReport::new("fixed_point_free", &samples, fp_tol, &[]);
    fp_report.max_residual = if fp.min_distance.is_finite() {
        1.0 / fp.min_distance
    } else {
        0.0
    };
    fp_report.status = if fp.free { Status::Pass } else { Status::Fail };
    out.push(
        fp_report
            .extra("report", &fp)
            .with_parameters(&entry.parameters),
    );

    let (g, inverted) = entry.group.contracting_generator();
    let contraction = match contraction_test(&g, &config.contraction) {
        Ok(c) => {
            let mut r = VerificationReport::new("contraction", &samples, 1.0, &[]);
            r.num_points = c.num_points;
            r.seed = config.contraction.seed;
            r.max_residual = if c.is_contraction {
                c.spectral_radius
            } else {
                c.spectral_radius.max(1.0)
            };
            r.status = if c.is_contraction {
                Status::Pass
            } else {
                Status::Fail
            };
            r.extra("report", &c).extra("generator_inverted", inverted)
        }
        Err(e) => error_report("contraction", &samples, 1.0, &e.into()),
    };
    out.push(contraction.with_parameters(&entry.parameters));
    out
}

pub fn suite_passed(reports: &[VerificationReport]) -> bool {
    reports.iter().all(VerificationReport::passed)
}
