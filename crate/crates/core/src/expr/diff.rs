use std::collections::HashMap;

use super::{Expr, Node};

/// Wirtinger partial derivative with respect to `z_i` (or `z̄_i` when
/// `conjugate` is set). Total on well-formed expressions.
pub fn wirtinger_d(e: &Expr, i: usize, conjugate: bool) -> Expr {
    let mut memo = HashMap::new();
    d_memo(e, i, conjugate, &mut memo)
}

impl Expr {
    pub fn wirtinger_d(&self, i: usize, conjugate: bool) -> Expr {
        wirtinger_d(self, i, conjugate)
    }

    /// `∂/∂z_i`
    pub fn d_z(&self, i: usize) -> Expr {
        wirtinger_d(self, i, false)
    }

    /// `∂/∂z̄_i`
    pub fn d_zbar(&self, i: usize) -> Expr {
        wirtinger_d(self, i, true)
    }
}

fn d_memo(e: &Expr, i: usize, conj: bool, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(d) = memo.get(&e.key()) {
        return d.clone();
    }
    let out = match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(j) => {
            if !conj && *j == i {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::ConjVar(j) => {
            if conj && *j == i {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(a, b) => d_memo(a, i, conj, memo) + d_memo(b, i, conj, memo),
        Node::Sub(a, b) => d_memo(a, i, conj, memo) - d_memo(b, i, conj, memo),
        Node::Mul(a, b) => {
            let da = d_memo(a, i, conj, memo);
            let db = d_memo(b, i, conj, memo);
            da * b + a * db
        }
        Node::Div(a, b) => {
            // (a/b)' = (a' - (a/b) b') / b
            let da = d_memo(a, i, conj, memo);
            let db = d_memo(b, i, conj, memo);
            if db.is_zero() {
                da / b
            } else {
                (da - e * db) / b
            }
        }
        Node::Pow(a, k) => {
            let da = d_memo(a, i, conj, memo);
            if da.is_zero() {
                Expr::zero()
            } else {
                Expr::real(f64::from(*k)) * a.powi(k - 1) * da
            }
        }
        Node::Exp(a) => {
            let da = d_memo(a, i, conj, memo);
            e * da
        }
        Node::Log(a) => {
            let da = d_memo(a, i, conj, memo);
            da / a
        }
        Node::ImplicitT(spec, args) => {
            // F(t, w) = Σ w_j w̄_j e^{2 r_j t} - 1 = 0
            // ∂t/∂w_j = -w̄_j e^{2 r_j t} / D,  ∂t/∂w̄_j = -w_j e^{2 r_j t} / D
            // D = Σ 2 r_j w_j w̄_j e^{2 r_j t}
            let n = spec.dim();
            let (w, wbar) = args.split_at(n);
            let dw: Vec<Expr> = w.iter().map(|a| d_memo(a, i, conj, memo)).collect();
            let dwbar: Vec<Expr> = wbar.iter().map(|a| d_memo(a, i, conj, memo)).collect();
            if dw.iter().chain(&dwbar).all(Expr::is_zero) {
                Expr::zero()
            } else {
                let growth: Vec<Expr> = spec
                    .weights()
                    .iter()
                    .map(|r| (Expr::real(2.0 * r) * e).exp())
                    .collect();
                let denom = (0..n).fold(Expr::zero(), |acc, j| {
                    acc + Expr::real(2.0 * spec.weights()[j]) * &w[j] * &wbar[j] * &growth[j]
                });
                let numer = (0..n).fold(Expr::zero(), |acc, j| {
                    let a = if dw[j].is_zero() {
                        Expr::zero()
                    } else {
                        &wbar[j] * &growth[j] * &dw[j]
                    };
                    let b = if dwbar[j].is_zero() {
                        Expr::zero()
                    } else {
                        &w[j] * &growth[j] * &dwbar[j]
                    };
                    acc + a + b
                });
                -(numer / denom)
            }
        }
    };
    memo.insert(e.key(), out.clone());
    out
}
