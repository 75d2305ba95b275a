//! Immutable symbolic scalar expressions over `z_1..z_n` and their conjugates.
//!
//! `Var(i)` and `ConjVar(i)` are treated as independent variables, which is
//! exactly the Wirtinger calculus: `∂/∂z_i` kills `ConjVar(i)` and `∂/∂z̄_i`
//! kills `Var(i)`. Indices are 0-based in the Rust API.
//!
//! Nodes are reference counted, so derivatives and substitutions share
//! subtrees and every expression is really a DAG. Evaluation and
//! differentiation memoize on node identity to stay linear in the DAG size.
//!
//! There is no general simplifier. The smart constructors only fold
//! constants and drop additive zeros / multiplicative ones; equality of
//! two expressions as functions is decided numerically with
//! [`numerically_equal`].

mod diff;
mod eval;
mod json;

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

pub use eval::{EvalError, Evaluator};
pub use json::ExprJson;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Parameters of the implicit Vaisman coordinate `t(w)` solving
/// `Σ_i |w_i|² e^{2 r_i t} = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitTSpec {
    weights: Vec<f64>,
    newton_tol: f64,
    newton_max_iter: usize,
}

impl ImplicitTSpec {
    pub const DEFAULT_TOL: f64 = 1e-12;
    pub const DEFAULT_MAX_ITER: usize = 50;

    pub fn new(weights: Vec<f64>) -> Result<Self, ExprError> {
        Self::with_newton(weights, Self::DEFAULT_TOL, Self::DEFAULT_MAX_ITER)
    }

    pub fn with_newton(
        weights: Vec<f64>,
        newton_tol: f64,
        newton_max_iter: usize,
    ) -> Result<Self, ExprError> {
        if weights.len() < 2 {
            return Err(ExprError::BadWeights(format!(
                "need at least 2 weights, got {}",
                weights.len()
            )));
        }
        if let Some(r) = weights.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(ExprError::BadWeights(format!("weight {r} is not positive")));
        }
        if !(newton_tol > 0.0) || newton_max_iter == 0 {
            return Err(ExprError::BadWeights(
                "newton tolerance and iteration cap must be positive".into(),
            ));
        }
        Ok(ImplicitTSpec {
            weights,
            newton_tol,
            newton_max_iter,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn newton_tol(&self) -> f64 {
        self.newton_tol
    }

    pub fn newton_max_iter(&self) -> usize {
        self.newton_max_iter
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("invalid implicit-coordinate weights: {0}")]
    BadWeights(String),
    #[error("malformed expression json: {0}")]
    Json(String),
}

/// Expression node. Children are held by [`Expr`] handles.
#[derive(Debug)]
pub enum Node {
    Const(C64),
    Var(usize),
    ConjVar(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Exp(Expr),
    Log(Expr),
    /// `args` holds `w_1..w_n` followed by `w̄_1..w̄_n`.
    ImplicitT(Arc<ImplicitTSpec>, Vec<Expr>),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    hash: u64,
}

/// Shared handle to an expression DAG.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

fn hash_c64<H: Hasher>(c: C64, h: &mut H) {
    c.re.to_bits().hash(h);
    c.im.to_bits().hash(h);
}

fn same_c64(a: C64, b: C64) -> bool {
    a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()
}

impl Node {
    fn structural_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        match self {
            Node::Const(c) => {
                0u8.hash(&mut h);
                hash_c64(*c, &mut h);
            }
            Node::Var(i) => {
                1u8.hash(&mut h);
                i.hash(&mut h);
            }
            Node::ConjVar(i) => {
                2u8.hash(&mut h);
                i.hash(&mut h);
            }
            Node::Add(a, b) => (3u8, a.0.hash, b.0.hash).hash(&mut h),
            Node::Sub(a, b) => (4u8, a.0.hash, b.0.hash).hash(&mut h),
            Node::Mul(a, b) => (5u8, a.0.hash, b.0.hash).hash(&mut h),
            Node::Div(a, b) => (6u8, a.0.hash, b.0.hash).hash(&mut h),
            Node::Pow(a, k) => (7u8, a.0.hash, *k).hash(&mut h),
            Node::Exp(a) => (8u8, a.0.hash).hash(&mut h),
            Node::Log(a) => (9u8, a.0.hash).hash(&mut h),
            Node::ImplicitT(spec, args) => {
                10u8.hash(&mut h);
                for r in &spec.weights {
                    r.to_bits().hash(&mut h);
                }
                spec.newton_tol.to_bits().hash(&mut h);
                spec.newton_max_iter.hash(&mut h);
                for a in args {
                    a.0.hash.hash(&mut h);
                }
            }
        }
        h.finish()
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => same_c64(*a, *b),
            (Node::Var(a), Node::Var(b)) | (Node::ConjVar(a), Node::ConjVar(b)) => a == b,
            (Node::Add(a, b), Node::Add(c, d))
            | (Node::Sub(a, b), Node::Sub(c, d))
            | (Node::Mul(a, b), Node::Mul(c, d))
            | (Node::Div(a, b), Node::Div(c, d)) => a == c && b == d,
            (Node::Pow(a, k), Node::Pow(b, l)) => k == l && a == b,
            (Node::Exp(a), Node::Exp(b)) | (Node::Log(a), Node::Log(b)) => a == b,
            (Node::ImplicitT(s, a), Node::ImplicitT(t, b)) => s == t && a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state);
    }
}

impl Expr {
    fn from_node(node: Node) -> Self {
        let hash = node.structural_hash();
        Expr(Arc::new(Inner { node, hash }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Identity key used by memo tables.
    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: C64) -> Self {
        // `+ 0.0` maps −0 to +0 so equal values compare equal
        Self::from_node(Node::Const(C64::new(c.re + 0.0, c.im + 0.0)))
    }

    pub fn real(x: f64) -> Self {
        Self::constant(C64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Self::real(0.0)
    }

    pub fn one() -> Self {
        Self::real(1.0)
    }

    /// The imaginary unit `√−1`.
    pub fn i() -> Self {
        Self::constant(C64::new(0.0, 1.0))
    }

    pub fn var(i: usize) -> Self {
        Self::from_node(Node::Var(i))
    }

    pub fn conj_var(i: usize) -> Self {
        Self::from_node(Node::ConjVar(i))
    }

    /// `|z_i|²` as `z_i · z̄_i`.
    pub fn abs2(i: usize) -> Self {
        Self::var(i) * Self::conj_var(i)
    }

    /// `Σ_i |z_i|²` over `0..dim`.
    pub fn norm2(dim: usize) -> Self {
        (0..dim).fold(Self::zero(), |acc, i| acc + Self::abs2(i))
    }

    pub fn as_const(&self) -> Option<C64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.as_const(), Some(c) if c == C64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.as_const(), Some(c) if c == C64::new(1.0, 0.0))
    }

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Self::constant(x + y),
            _ if a.is_zero() => b.clone(),
            _ if b.is_zero() => a.clone(),
            _ => Self::from_node(Node::Add(a.clone(), b.clone())),
        }
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Self::constant(x - y),
            _ if b.is_zero() => a.clone(),
            _ if a.is_zero() => Self::mul(&Self::real(-1.0), b),
            _ => Self::from_node(Node::Sub(a.clone(), b.clone())),
        }
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => return Self::constant(x * y),
            _ if a.is_zero() || b.is_zero() => return Self::zero(),
            _ if a.is_one() => return b.clone(),
            _ if b.is_one() => return a.clone(),
            _ => {}
        }
        // keep at most one leading constant factor
        match (a.as_const(), b.node()) {
            (Some(x), Node::Mul(c, rest)) => {
                if let Some(y) = c.as_const() {
                    return Self::mul(&Self::constant(x * y), rest);
                }
            }
            (None, _) if b.as_const().is_some() => return Self::mul(b, a),
            _ => {}
        }
        Self::from_node(Node::Mul(a.clone(), b.clone()))
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != C64::new(0.0, 0.0) => Self::constant(x / y),
            _ if b.is_one() => a.clone(),
            _ if a.is_zero() => Self::zero(),
            _ => Self::from_node(Node::Div(a.clone(), b.clone())),
        }
    }

    pub fn powi(&self, k: i32) -> Expr {
        if k == 0 {
            return Self::one();
        }
        if k == 1 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            if k > 0 || c != C64::new(0.0, 0.0) {
                return Self::constant(c.powi(k));
            }
        }
        Self::from_node(Node::Pow(self.clone(), k))
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(c) => Self::constant(c.exp()),
            None => Self::from_node(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Expr {
        match self.as_const() {
            Some(c) if c.re > 0.0 && c.im == 0.0 => Self::real(c.re.ln()),
            _ => Self::from_node(Node::Log(self.clone())),
        }
    }

    /// Implicit coordinate `t(w)` with `w` given by `args` (length n) and
    /// `w̄` by `conj_args` (length n).
    pub fn implicit_t(
        spec: Arc<ImplicitTSpec>,
        args: Vec<Expr>,
        conj_args: Vec<Expr>,
    ) -> Result<Expr, ExprError> {
        let n = spec.dim();
        for len in [args.len(), conj_args.len()] {
            if len != n {
                return Err(ExprError::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        let mut all = args;
        all.extend(conj_args);
        Ok(Self::from_node(Node::ImplicitT(spec, all)))
    }

    /// `t(z)` in the identity chart, i.e. with `w = z`.
    pub fn implicit_t_identity(spec: Arc<ImplicitTSpec>) -> Expr {
        let n = spec.dim();
        let args = (0..n).map(Expr::var).collect();
        let conj = (0..n).map(Expr::conj_var).collect();
        Self::implicit_t(spec, args, conj).expect("lengths match by construction")
    }

    /// Largest variable index referenced plus one (0 for constants).
    pub fn min_dim(&self) -> usize {
        let mut memo = HashMap::new();
        self.fold_vars(&mut memo)
    }

    fn fold_vars(&self, memo: &mut HashMap<usize, usize>) -> usize {
        if let Some(&v) = memo.get(&self.key()) {
            return v;
        }
        let v = match self.node() {
            Node::Const(_) => 0,
            Node::Var(i) | Node::ConjVar(i) => i + 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.fold_vars(memo).max(b.fold_vars(memo))
            }
            Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => a.fold_vars(memo),
            Node::ImplicitT(_, args) => args.iter().map(|a| a.fold_vars(memo)).max().unwrap_or(0),
        };
        memo.insert(self.key(), v);
        v
    }

    /// True if any `ConjVar` occurs.
    pub fn contains_conj(&self) -> bool {
        let mut memo = HashMap::new();
        self.has_conj(&mut memo)
    }

    fn has_conj(&self, memo: &mut HashMap<usize, bool>) -> bool {
        if let Some(&v) = memo.get(&self.key()) {
            return v;
        }
        let v = match self.node() {
            Node::Const(_) | Node::Var(_) => false,
            Node::ConjVar(_) => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.has_conj(memo) || b.has_conj(memo)
            }
            Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => a.has_conj(memo),
            Node::ImplicitT(..) => true,
        };
        memo.insert(self.key(), v);
        v
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = HashMap::new();
        self.count_into(&mut seen);
        seen.len()
    }

    fn count_into(&self, seen: &mut HashMap<usize, ()>) {
        if seen.insert(self.key(), ()).is_some() {
            return;
        }
        for c in self.children() {
            c.count_into(seen);
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Const(_) | Node::Var(_) | Node::ConjVar(_) => vec![],
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => vec![a, b],
            Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => vec![a],
            Node::ImplicitT(_, args) => args.iter().collect(),
        }
    }

    /// Formal complex conjugate: swaps `z_i ↔ z̄_i` and conjugates constants.
    pub fn conj(&self) -> Expr {
        let mut memo = HashMap::new();
        self.conj_memo(&mut memo)
    }

    fn conj_memo(&self, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(e) = memo.get(&self.key()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(c) => Expr::constant(c.conj()),
            Node::Var(i) => Expr::conj_var(*i),
            Node::ConjVar(i) => Expr::var(*i),
            Node::Add(a, b) => Expr::add(&a.conj_memo(memo), &b.conj_memo(memo)),
            Node::Sub(a, b) => Expr::sub(&a.conj_memo(memo), &b.conj_memo(memo)),
            Node::Mul(a, b) => Expr::mul(&a.conj_memo(memo), &b.conj_memo(memo)),
            Node::Div(a, b) => Expr::div(&a.conj_memo(memo), &b.conj_memo(memo)),
            Node::Pow(a, k) => a.conj_memo(memo).powi(*k),
            Node::Exp(a) => a.conj_memo(memo).exp(),
            Node::Log(a) => a.conj_memo(memo).ln(),
            Node::ImplicitT(spec, args) => {
                // t is real: conj(t(w, w̄)) = t(conj w̄, conj w)
                let n = spec.dim();
                let new_w = args[n..].iter().map(|a| a.conj_memo(memo)).collect();
                let new_wbar = args[..n].iter().map(|a| a.conj_memo(memo)).collect();
                Expr::implicit_t(spec.clone(), new_w, new_wbar).expect("same arity")
            }
        };
        memo.insert(self.key(), out.clone());
        out
    }

    /// Simultaneous substitution `z_i ↦ z_map[i]`, `z̄_i ↦ zbar_map[i]`.
    pub fn substitute(&self, z_map: &[Expr], zbar_map: &[Expr]) -> Result<Expr, ExprError> {
        if z_map.len() != zbar_map.len() {
            return Err(ExprError::DimensionMismatch {
                expected: z_map.len(),
                got: zbar_map.len(),
            });
        }
        let need = self.min_dim();
        if need > z_map.len() {
            return Err(ExprError::IndexOutOfRange {
                index: need - 1,
                dim: z_map.len(),
            });
        }
        let mut memo = HashMap::new();
        Ok(self.subst_memo(z_map, zbar_map, &mut memo))
    }

    fn subst_memo(&self, z: &[Expr], zb: &[Expr], memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(e) = memo.get(&self.key()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => z[*i].clone(),
            Node::ConjVar(i) => zb[*i].clone(),
            Node::Add(a, b) => Expr::add(&a.subst_memo(z, zb, memo), &b.subst_memo(z, zb, memo)),
            Node::Sub(a, b) => Expr::sub(&a.subst_memo(z, zb, memo), &b.subst_memo(z, zb, memo)),
            Node::Mul(a, b) => Expr::mul(&a.subst_memo(z, zb, memo), &b.subst_memo(z, zb, memo)),
            Node::Div(a, b) => Expr::div(&a.subst_memo(z, zb, memo), &b.subst_memo(z, zb, memo)),
            Node::Pow(a, k) => a.subst_memo(z, zb, memo).powi(*k),
            Node::Exp(a) => a.subst_memo(z, zb, memo).exp(),
            Node::Log(a) => a.subst_memo(z, zb, memo).ln(),
            Node::ImplicitT(spec, args) => {
                let new_args: Vec<Expr> = args.iter().map(|a| a.subst_memo(z, zb, memo)).collect();
                Expr::from_node(Node::ImplicitT(spec.clone(), new_args))
            }
        };
        memo.insert(self.key(), out.clone());
        out
    }

    /// Evaluate at `p`, reading `z̄_i` as `conj(p_i)`.
    pub fn evaluate(&self, p: &[C64]) -> Result<C64, EvalError> {
        Evaluator::new(p).eval(self)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => {
                if c.im == 0.0 {
                    write!(f, "{}", c.re)
                } else {
                    write!(f, "({}{:+}i)", c.re, c.im)
                }
            }
            Node::Var(i) => write!(f, "z{}", i + 1),
            Node::ConjVar(i) => write!(f, "zb{}", i + 1),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "({a})/({b})"),
            Node::Pow(a, k) => write!(f, "({a})^{k}"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Log(a) => write!(f, "log({a})"),
            Node::ImplicitT(spec, _) => write!(f, "t_r{:?}(..)", spec.weights),
        }
    }
}

macro_rules! bin_op {
    ($trait:ident, $method:ident, $ctor:ident) => {
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(self, rhs)
            }
        }
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$ctor(&self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(&self, rhs)
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$ctor(self, &rhs)
            }
        }
    };
}

bin_op!(Add, add, add);
bin_op!(Sub, sub, sub);
bin_op!(Mul, mul, mul);
bin_op!(Div, div, div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul(&Expr::real(-1.0), &self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul(&Expr::real(-1.0), self)
    }
}

impl From<C64> for Expr {
    fn from(c: C64) -> Self {
        Expr::constant(c)
    }
}

impl From<f64> for Expr {
    fn from(x: f64) -> Self {
        Expr::real(x)
    }
}

/// Probabilistic test that `a` and `b` agree as functions on `ℂ^dim \ {0}`.
///
/// Uses 64 seeded points in the sampling annulus and an absolute tolerance of
/// `1e-10` scaled by `max(1, |a|)`. Points where either side fails to
/// evaluate count as disagreement.
pub fn numerically_equal(a: &Expr, b: &Expr, dim: usize, seed: u64) -> bool {
    crate::sampling::annulus_points(dim, 64, seed)
        .iter()
        .all(|p| match (a.evaluate(p), b.evaluate(p)) {
            (Ok(x), Ok(y)) => (x - y).norm() <= 1e-10 * x.norm().max(1.0),
            _ => false,
        })
}
