use serde::Serialize;

use crate::expr::C64;
use crate::sampling::{norm, sphere_points};

use super::linalg::spectral_radius;
use super::{MapError, PolyAutomorphism};

/// Orbit norms above this abort the test.
pub const DIVERGENCE_BOUND: f64 = 1e6;

#[derive(Debug, Clone, Copy)]
pub struct ContractionOptions {
    pub radius: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for ContractionOptions {
    fn default() -> Self {
        ContractionOptions {
            radius: 1.0,
            eps: 1e-6,
            max_iter: 10_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub spectral_radius: f64,
    pub is_contraction: bool,
    /// Iterations until every probe orbit is inside the `eps` ball (0 when
    /// the spectral criterion already fails).
    pub iterations_needed: usize,
    pub num_points: usize,
    pub radius: f64,
    pub eps: f64,
    pub max_orbit_norm: f64,
}

/// Spectral criterion `ρ(L(g)) < 1`, then iteration of `2n² + 64` probe
/// points (the axis points plus seeded points) on the sphere of radius
/// `radius` until all images have norm `< eps`.
pub fn contraction_test(
    g: &PolyAutomorphism,
    opts: &ContractionOptions,
) -> Result<ContractionReport, MapError> {
    if !(opts.radius > 0.0) || !(opts.eps > 0.0) {
        return Err(MapError::BadParameter(
            "radius and eps must be positive".into(),
        ));
    }
    let n = g.dim();
    let rho = spectral_radius(&g.linear_part());
    let count = 2 * n * n + 64;
    let mut report = ContractionReport {
        spectral_radius: rho,
        is_contraction: false,
        iterations_needed: 0,
        num_points: count,
        radius: opts.radius,
        eps: opts.eps,
        max_orbit_norm: opts.radius,
    };
    if !(rho < 1.0) {
        return Ok(report);
    }
    let mut probes: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let mut p = vec![C64::new(0.0, 0.0); n];
            p[i] = C64::new(opts.radius, 0.0);
            p
        })
        .collect();
    probes.extend(sphere_points(n, count - n, opts.radius, opts.seed));

    let mut worst = 0;
    for start in probes {
        let mut z = start;
        let mut k = 0;
        while norm(&z) >= opts.eps {
            if k == opts.max_iter {
                return Ok(report);
            }
            z = g.evaluate(&z);
            k += 1;
            let r = norm(&z);
            report.max_orbit_norm = report.max_orbit_norm.max(r);
            if !(r <= DIVERGENCE_BOUND) {
                return Err(MapError::IterationDiverged {
                    norm: r,
                    iteration: k,
                });
            }
        }
        worst = worst.max(k);
    }
    report.is_contraction = true;
    report.iterations_needed = worst;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn uniform_half_needs_closed_form_count() {
        let g = PolyAutomorphism::diagonal(&[re(0.5), re(0.5)]).unwrap();
        let opts = ContractionOptions {
            radius: 2.0,
            eps: 1e-6,
            ..Default::default()
        };
        let r = contraction_test(&g, &opts).unwrap();
        let closed = ((1e-6f64 / 2.0).ln() / 0.5f64.ln()).ceil() as usize;
        assert_eq!(closed, 21);
        assert!(r.is_contraction);
        assert_eq!(r.iterations_needed, closed);
        assert!((r.spectral_radius - 0.5).abs() < 1e-15);
    }

    #[test]
    fn jordan_block_with_transient_growth() {
        let a = DMatrix::from_row_slice(2, 2, &[re(0.7), re(1.0), re(0.0), re(0.7)]);
        let g = PolyAutomorphism::linear(&a).unwrap();
        let opts = ContractionOptions {
            radius: 2.0,
            eps: 1e-6,
            ..Default::default()
        };
        let r = contraction_test(&g, &opts).unwrap();
        assert!(r.is_contraction);
        // ‖A^k‖ ≤ 0.7^k + k 0.7^{k-1}: first k with 2·bound < eps is an upper bound
        let bound = (1..)
            .find(|&k| 2.0 * (0.7f64.powi(k) + k as f64 * 0.7f64.powi(k - 1)) < 1e-6)
            .unwrap() as usize;
        assert!(r.iterations_needed > 21 && r.iterations_needed <= bound);
        assert!(r.max_orbit_norm > 2.0);
    }

    #[test]
    fn expanding_direction_is_rejected() {
        let g = PolyAutomorphism::diagonal(&[re(1.2), re(0.5)]).unwrap();
        let r = contraction_test(&g, &ContractionOptions::default()).unwrap();
        assert!(!r.is_contraction);
        let id = PolyAutomorphism::identity(2);
        assert!(
            !contraction_test(&id, &ContractionOptions::default())
                .unwrap()
                .is_contraction
        );
    }

    #[test]
    fn nonlinear_contraction() {
        use crate::maps::Poly;
        let g = PolyAutomorphism::new(vec![
            Poly::from_terms(2, [(vec![1, 0], re(0.5)), (vec![0, 2], re(1.0))]),
            Poly::from_terms(2, [(vec![0, 1], re(0.5))]),
        ])
        .unwrap();
        let opts = ContractionOptions {
            radius: 0.5,
            eps: 1e-6,
            ..Default::default()
        };
        assert!(contraction_test(&g, &opts).unwrap().is_contraction);
    }

    #[test]
    fn divergent_orbit_is_an_error() {
        use crate::maps::Poly;
        // linear part contracts but the quadratic term blows up far out
        let g = PolyAutomorphism::new(vec![
            Poly::from_terms(2, [(vec![1, 0], re(0.5)), (vec![2, 0], re(5.0))]),
            Poly::from_terms(2, [(vec![0, 1], re(0.5))]),
        ])
        .unwrap();
        let opts = ContractionOptions {
            radius: 3.0,
            eps: 1e-6,
            ..Default::default()
        };
        assert!(matches!(
            contraction_test(&g, &opts),
            Err(MapError::IterationDiverged { .. })
        ));
    }
}
