use super::*;
use crate::hopf::{example1_entry, example2_entry, flat_kahler_form, kodaira_entry, vaisman_entry};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn re(x: f64) -> C64 {
    c(x, 0.0)
}

#[test]
fn lee_solver_on_kahler_form_is_zero() {
    let omega = flat_kahler_form(2);
    let r = solve_lee_pointwise(&omega, &[c(0.3, 0.2), c(-0.7, 0.1)]).unwrap();
    assert!(r.theta_coeffs.iter().all(|t| t.norm() < 1e-14));
    assert!(r.residual < 1e-14);
}

#[test]
fn lee_solver_recovers_standard_lee_form() {
    let e = example1_entry(re(2.0)).unwrap();
    let r = solve_lee_pointwise(e.form("Omega").unwrap(), &[re(1.0), re(0.0)]).unwrap();
    let expected = [re(-1.0), re(0.0), re(-1.0), re(0.0)];
    for (a, b) in r.theta_coeffs.iter().zip(expected) {
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }
    assert!(r.reality_defect < 1e-12);
}

#[test]
fn lee_solver_rejects_degenerate_form() {
    let fs = crate::hopf::fubini_study_display();
    assert!(matches!(
        solve_lee_pointwise(&fs, &[re(1.0), re(0.5)]),
        Err(VerifyError::DegenerateOmega { .. })
    ));
}

#[test]
fn lck_examples() {
    let e = example1_entry(re(2.0)).unwrap();
    let samples = Samples::annulus(2, 100, 1);
    let (omega, theta) = (e.form("Omega").unwrap(), e.form("theta").unwrap());
    let r = verify_lck(omega, theta, &samples, 1e-10).unwrap();
    assert!(r.passed(), "{}", r.max_residual);

    let kahler = flat_kahler_form(2);
    assert!(verify_lck(&kahler, &Form::zero(2, 1), &samples, 1e-10)
        .unwrap()
        .passed());

    let doubled = theta.scale(&Expr::real(2.0));
    let bad = verify_lck(omega, &doubled, &samples, 1e-10).unwrap();
    assert!(!bad.passed());
    assert!(bad.max_residual > 0.1);
}

#[test]
fn potential_examples() {
    let samples = Samples::annulus(2, 100, 2);
    let mu = c(1.5, 0.5);
    let e = example2_entry(2, mu).unwrap();
    let r = verify_potential(e.potential.as_ref().unwrap(), &e.group, &samples, 1e-10).unwrap();
    assert!(r.passed());
    assert!(r.max_residual < 1e-12);
    let mean = r.extras["generators"][0]["mean_ratio"].as_f64().unwrap();
    assert!((mean - mu.norm_sqr()).abs() < 1e-12);

    let identity = GroupSpec::cyclic(PolyAutomorphism::identity(2));
    let r = verify_potential(e.potential.as_ref().unwrap(), &identity, &samples, 1e-10).unwrap();
    assert_eq!(
        r.extras["generators"][0]["mean_ratio"].as_f64().unwrap(),
        1.0
    );

    let k = kodaira_entry(re(0.5), re(1.0)).unwrap();
    let r = verify_potential(k.potential.as_ref().unwrap(), &k.group, &samples, 1e-10).unwrap();
    assert!(!r.passed());
    assert!(r.max_residual >= 0.9);
}

#[test]
fn potential_must_be_positive() {
    let samples = Samples::annulus(2, 10, 2);
    let group = GroupSpec::cyclic(PolyAutomorphism::identity(2));
    let err = verify_potential(&-Expr::norm2(2), &group, &samples, 1e-10).unwrap_err();
    assert!(matches!(err, VerifyError::NonPositivePotential { .. }));
    assert!(verify_potential(&Expr::var(0), &group, &samples, 1e-10).is_err());
}

#[test]
fn invariance_examples() {
    let samples = Samples::annulus(2, 50, 3);
    let dz1 = Form::dz(2, 0);
    let id = verify_invariance(&dz1, &PolyAutomorphism::identity(2), &samples, 1e-10).unwrap();
    assert!(id.passed());
    assert_eq!(id.max_residual, 0.0);
    let mu = PolyAutomorphism::diagonal(&[re(2.0), re(2.0)]).unwrap();
    let r = verify_invariance(&dz1, &mu, &samples, 1e-10).unwrap();
    assert!(!r.passed());
    assert!((r.max_residual - 1.0).abs() < 1e-15);

    let v = vaisman_entry(&[1.0, 1.5], &[1.0, 2.0]).unwrap();
    let r = verify_invariance(
        v.form("psi").unwrap(),
        v.group.cyclic_generator(),
        &samples,
        1e-8,
    )
    .unwrap();
    assert!(r.passed(), "{}", r.max_residual);
}

#[test]
fn definiteness_report_orientation() {
    let samples = Samples::annulus(2, 20, 4);
    let r = definiteness_report(&flat_kahler_form(2), &samples).unwrap();
    assert!(r.passed());
    assert!((r.max_residual - 1.0).abs() < 1e-12);
    let fs = crate::hopf::fubini_study_display();
    assert!(!definiteness_report(&fs, &samples).unwrap().passed());
}

#[test]
fn report_details_are_sorted_and_capped() {
    let samples = Samples::annulus(2, 12, 5);
    let residuals: Vec<f64> = (0..12).map(|k| (k % 5) as f64).collect();
    let r = VerificationReport::new("x", &samples, 10.0, &residuals);
    assert_eq!(r.details.len(), MAX_DETAILS);
    assert_eq!(r.details[0].residual, 4.0);
    assert_eq!(r.details[0].point, samples.points[4]);
    assert!(r.passed());
    let nan = VerificationReport::new("x", &samples, 10.0, &[1.0, f64::NAN]);
    assert!(!nan.passed());
}

#[test]
fn suite_on_catalog_entries() {
    let config = SuiteConfig {
        points: 40,
        ..Default::default()
    };
    let e = example1_entry(c(1.5, 0.5)).unwrap();
    let reports = run_suite(&e, &config);
    let names: Vec<&str> = reports.iter().map(|r| r.check_name.as_str()).collect();
    assert_eq!(
        names,
        [
            "lck_residual",
            "lee_closedness",
            "definiteness",
            "invariance_theta",
            "invariance_psi",
            "fixed_point_free",
            "contraction"
        ]
    );
    for r in &reports {
        assert!(r.passed(), "{} {}", r.check_name, r.max_residual);
    }

    let bad = e
        .with_group(GroupSpec::cyclic(
            PolyAutomorphism::diagonal(&[re(1.2), re(0.5)]).unwrap(),
        ))
        .unwrap();
    let reports = run_suite(&bad, &config);
    assert!(!suite_passed(&reports));
    let contraction = reports
        .iter()
        .find(|r| r.check_name == "contraction")
        .unwrap();
    assert!(!contraction.passed());
}

#[test]
fn kodaira_suite_depends_on_t() {
    let config = SuiteConfig {
        points: 30,
        ..Default::default()
    };
    assert!(suite_passed(&run_suite(
        &kodaira_entry(re(0.5), re(0.0)).unwrap(),
        &config
    )));
    let reports = run_suite(&kodaira_entry(re(0.5), re(1.0)).unwrap(), &config);
    let failing: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.check_name.as_str())
        .collect();
    assert_eq!(failing, ["potential_homothety"]);
}
