use std::collections::HashMap;

use thiserror::Error;

use super::{Expr, ImplicitTSpec, Node, C64};

/// Divisors with magnitude below this are rejected.
pub const DIVISION_EPS: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by near-zero value {divisor:e} at point {point:?}")]
    DivisionNearZero { divisor: f64, point: Vec<C64> },
    #[error("logarithm of {value} off its principal branch at point {point:?}")]
    LogBranch { value: C64, point: Vec<C64> },
    #[error("newton iteration for the implicit coordinate did not converge at point {point:?} (|F| = {residual:e})")]
    NewtonDivergence { residual: f64, point: Vec<C64> },
    #[error("implicit coordinate undefined at the origin, point {point:?}")]
    ImplicitAtOrigin { point: Vec<C64> },
    #[error("variable index {index} out of range for point of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("non-finite value at point {point:?}")]
    NonFinite { point: Vec<C64> },
}

/// Point evaluator with a per-point memo table keyed on node identity.
///
/// Reusing one evaluator for several expressions that share subtrees (the
/// coefficients of a form, say) evaluates each shared node once.
pub struct Evaluator<'p> {
    point: &'p [C64],
    cache: HashMap<usize, C64>,
}

impl<'p> Evaluator<'p> {
    pub fn new(point: &'p [C64]) -> Self {
        Evaluator {
            point,
            cache: HashMap::new(),
        }
    }

    pub fn point(&self) -> &[C64] {
        self.point
    }

    pub fn eval(&mut self, e: &Expr) -> Result<C64, EvalError> {
        if let Some(v) = self.cache.get(&e.key()) {
            return Ok(*v);
        }
        let v = match e.node() {
            Node::Const(c) => *c,
            Node::Var(i) => self.coord(*i)?,
            Node::ConjVar(i) => self.coord(*i)?.conj(),
            Node::Add(a, b) => self.eval(a)? + self.eval(b)?,
            Node::Sub(a, b) => self.eval(a)? - self.eval(b)?,
            Node::Mul(a, b) => self.eval(a)? * self.eval(b)?,
            Node::Div(a, b) => {
                let num = self.eval(a)?;
                let den = self.eval(b)?;
                if den.norm() < DIVISION_EPS {
                    return Err(EvalError::DivisionNearZero {
                        divisor: den.norm(),
                        point: self.point.to_vec(),
                    });
                }
                num / den
            }
            Node::Pow(a, k) => {
                let x = self.eval(a)?;
                if *k < 0 && x.norm() < DIVISION_EPS {
                    return Err(EvalError::DivisionNearZero {
                        divisor: x.norm(),
                        point: self.point.to_vec(),
                    });
                }
                x.powi(*k)
            }
            Node::Exp(a) => self.eval(a)?.exp(),
            Node::Log(a) => {
                let x = self.eval(a)?;
                let on_cut = x.re < 0.0 && x.im.abs() <= DIVISION_EPS * x.norm();
                if x.norm() < DIVISION_EPS || on_cut {
                    return Err(EvalError::LogBranch {
                        value: x,
                        point: self.point.to_vec(),
                    });
                }
                x.ln()
            }
            Node::ImplicitT(spec, args) => {
                let n = spec.dim();
                let mut moduli = Vec::with_capacity(n);
                for j in 0..n {
                    let w = self.eval(&args[j])?;
                    let wb = self.eval(&args[n + j])?;
                    moduli.push((w * wb).re);
                }
                C64::new(solve_implicit_t(spec, &moduli, self.point)?, 0.0)
            }
        };
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(EvalError::NonFinite {
                point: self.point.to_vec(),
            });
        }
        self.cache.insert(e.key(), v);
        Ok(v)
    }

    fn coord(&self, i: usize) -> Result<C64, EvalError> {
        self.point
            .get(i)
            .copied()
            .ok_or(EvalError::IndexOutOfRange {
                index: i,
                dim: self.point.len(),
            })
    }
}

/// Residual `F(t, w) = Σ a_j e^{2 r_j t} - 1` with `a_j = |w_j|²`.
pub fn implicit_residual(weights: &[f64], moduli: &[f64], t: f64) -> f64 {
    weights
        .iter()
        .zip(moduli)
        .map(|(r, a)| a * (2.0 * r * t).exp())
        .sum::<f64>()
        - 1.0
}

/// Newton solve of `F(t, w) = 0`, starting from the equal-weight closed form
/// with the largest weight. `F` is strictly increasing and convex in `t`.
pub(crate) fn solve_implicit_t(
    spec: &ImplicitTSpec,
    moduli: &[f64],
    point: &[C64],
) -> Result<f64, EvalError> {
    let total: f64 = moduli.iter().sum();
    if !(total > 0.0) {
        return Err(EvalError::ImplicitAtOrigin {
            point: point.to_vec(),
        });
    }
    let weights = spec.weights();
    let r_max = weights.iter().cloned().fold(f64::MIN, f64::max);
    let mut t = -total.ln() / (2.0 * r_max);
    let mut f = implicit_residual(weights, moduli, t);
    for _ in 0..spec.newton_max_iter() {
        if f.abs() < spec.newton_tol() {
            // one polishing step; the residual is already tiny
            let fp = derivative(weights, moduli, t);
            let polished = t - f / fp;
            let fpol = implicit_residual(weights, moduli, polished);
            if fpol.abs() <= f.abs() {
                return Ok(polished);
            }
            return Ok(t);
        }
        let fp = derivative(weights, moduli, t);
        t -= f / fp;
        f = implicit_residual(weights, moduli, t);
    }
    Err(EvalError::NewtonDivergence {
        residual: f.abs(),
        point: point.to_vec(),
    })
}

fn derivative(weights: &[f64], moduli: &[f64], t: f64) -> f64 {
    weights
        .iter()
        .zip(moduli)
        .map(|(r, a)| 2.0 * r * a * (2.0 * r * t).exp())
        .sum()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::sampling::annulus_points;

    #[test]
    fn evaluate_norm_at_unit_point() {
        let e = Expr::norm2(2);
        let p = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        assert_eq!(e.evaluate(&p).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn division_near_zero_reports_point() {
        let e = Expr::one() / Expr::norm2(2);
        let p = vec![C64::new(0.0, 0.0); 2];
        match e.evaluate(&p) {
            Err(EvalError::DivisionNearZero { point, .. }) => assert_eq!(point, p),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn log_off_branch_is_error() {
        let e = (Expr::real(-1.0) * Expr::norm2(2)).ln();
        let p = [C64::new(1.0, 0.0), C64::new(0.5, 0.0)];
        assert!(matches!(e.evaluate(&p), Err(EvalError::LogBranch { .. })));
    }

    #[test]
    fn implicit_t_equal_weights_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let r: f64 = rng.random_range(0.2..3.0);
            let spec = Arc::new(ImplicitTSpec::new(vec![r, r]).unwrap());
            let t = Expr::implicit_t_identity(spec);
            for p in annulus_points(2, 10, rng.random()) {
                let closed = -(p[0].norm_sqr() + p[1].norm_sqr()).ln() / (2.0 * r);
                let got = t.evaluate(&p).unwrap();
                assert!((got.re - closed).abs() < 1e-10);
                assert_eq!(got.im, 0.0);
            }
        }
    }

    #[test]
    fn implicit_t_vanishes_on_unit_sphere() {
        let spec = Arc::new(ImplicitTSpec::new(vec![0.3, 2.7, 1.1]).unwrap());
        let t = Expr::implicit_t_identity(spec);
        for p in annulus_points(3, 50, 4) {
            let norm = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let q: Vec<C64> = p.iter().map(|z| z / norm).collect();
            assert!(t.evaluate(&q).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn implicit_t_satisfies_defining_relation() {
        let weights = vec![1.0, 1.5];
        let spec = ImplicitTSpec::new(weights.clone()).unwrap();
        for p in annulus_points(2, 200, 8) {
            let moduli: Vec<f64> = p.iter().map(|z| z.norm_sqr()).collect();
            let t = solve_implicit_t(&spec, &moduli, &p).unwrap();
            assert!(implicit_residual(&weights, &moduli, t).abs() < 1e-11);
        }
    }

    #[test]
    fn implicit_t_at_origin_is_error() {
        let spec = Arc::new(ImplicitTSpec::new(vec![1.0, 2.0]).unwrap());
        let t = Expr::implicit_t_identity(spec);
        let p = vec![C64::new(0.0, 0.0); 2];
        assert!(matches!(
            t.evaluate(&p),
            Err(EvalError::ImplicitAtOrigin { .. })
        ));
    }

    #[test]
    fn newton_cap_is_reported() {
        let spec = Arc::new(ImplicitTSpec::with_newton(vec![0.01, 50.0], 1e-300, 3).unwrap());
        let t = Expr::implicit_t_identity(spec);
        let p = [C64::new(1.9, 0.0), C64::new(0.01, 0.0)];
        assert!(matches!(
            t.evaluate(&p),
            Err(EvalError::NewtonDivergence { .. })
        ));
    }
}
