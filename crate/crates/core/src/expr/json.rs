use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Expr, ExprError, ImplicitTSpec, Node, C64};

/// JSON tree form of an [`Expr`]: `{op, args, value?, index?, exponent?, weights?}`.
///
/// `index` is 1-based (`z1` is index 1). `value` is a `[re, im]` pair.
/// Shared subtrees are written out in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExprJson {
    pub op: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<ExprJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_max_iter: Option<usize>,
}

impl ExprJson {
    fn op(op: &str, args: Vec<ExprJson>) -> Self {
        ExprJson {
            op: op.to_string(),
            args,
            value: None,
            index: None,
            exponent: None,
            weights: None,
            newton_tol: None,
            newton_max_iter: None,
        }
    }
}

impl From<&Expr> for ExprJson {
    fn from(e: &Expr) -> Self {
        match e.node() {
            Node::Const(c) => ExprJson {
                value: Some([c.re, c.im]),
                ..ExprJson::op("const", vec![])
            },
            Node::Var(i) => ExprJson {
                index: Some(i + 1),
                ..ExprJson::op("var", vec![])
            },
            Node::ConjVar(i) => ExprJson {
                index: Some(i + 1),
                ..ExprJson::op("conj_var", vec![])
            },
            Node::Add(a, b) => ExprJson::op("add", vec![a.into(), b.into()]),
            Node::Sub(a, b) => ExprJson::op("sub", vec![a.into(), b.into()]),
            Node::Mul(a, b) => ExprJson::op("mul", vec![a.into(), b.into()]),
            Node::Div(a, b) => ExprJson::op("div", vec![a.into(), b.into()]),
            Node::Pow(a, k) => ExprJson {
                exponent: Some(*k),
                ..ExprJson::op("pow", vec![a.into()])
            },
            Node::Exp(a) => ExprJson::op("exp", vec![a.into()]),
            Node::Log(a) => ExprJson::op("log", vec![a.into()]),
            Node::ImplicitT(spec, args) => ExprJson {
                weights: Some(spec.weights().to_vec()),
                newton_tol: Some(spec.newton_tol()),
                newton_max_iter: Some(spec.newton_max_iter()),
                ..ExprJson::op("implicit_t", args.iter().map(ExprJson::from).collect())
            },
        }
    }
}

impl TryFrom<&ExprJson> for Expr {
    type Error = ExprError;

    fn try_from(j: &ExprJson) -> Result<Self, Self::Error> {
        let bad = |msg: String| ExprError::Json(msg);
        let arity = |n: usize| -> Result<Vec<Expr>, ExprError> {
            if j.args.len() != n {
                return Err(bad(format!(
                    "op `{}` takes {n} args, got {}",
                    j.op,
                    j.args.len()
                )));
            }
            j.args.iter().map(Expr::try_from).collect()
        };
        let index = || -> Result<usize, ExprError> {
            match j.index {
                Some(i) if i >= 1 => Ok(i - 1),
                Some(_) => Err(bad("variable index is 1-based".into())),
                None => Err(bad(format!("op `{}` needs `index`", j.op))),
            }
        };
        Ok(match j.op.as_str() {
            "const" => {
                let [re, im] = j.value.ok_or_else(|| bad("const needs `value`".into()))?;
                Expr::constant(C64::new(re, im))
            }
            "var" => Expr::var(index()?),
            "conj_var" => Expr::conj_var(index()?),
            "add" => {
                let a = arity(2)?;
                &a[0] + &a[1]
            }
            "sub" => {
                let a = arity(2)?;
                &a[0] - &a[1]
            }
            "mul" => {
                let a = arity(2)?;
                &a[0] * &a[1]
            }
            "div" => {
                let a = arity(2)?;
                &a[0] / &a[1]
            }
            "pow" => {
                let k = j
                    .exponent
                    .ok_or_else(|| bad("pow needs `exponent`".into()))?;
                arity(1)?[0].powi(k)
            }
            "exp" => arity(1)?[0].exp(),
            "log" => arity(1)?[0].ln(),
            "implicit_t" => {
                let weights = j
                    .weights
                    .clone()
                    .ok_or_else(|| bad("implicit_t needs `weights`".into()))?;
                let spec = ImplicitTSpec::with_newton(
                    weights,
                    j.newton_tol.unwrap_or(ImplicitTSpec::DEFAULT_TOL),
                    j.newton_max_iter.unwrap_or(ImplicitTSpec::DEFAULT_MAX_ITER),
                )?;
                let n = spec.dim();
                let mut args = arity(2 * n)?;
                let conj = args.split_off(n);
                Expr::implicit_t(Arc::new(spec), args, conj)?
            }
            other => return Err(bad(format!("unknown op `{other}`"))),
        })
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ExprJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = ExprJson::deserialize(d)?;
        Expr::try_from(&j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_handwritten_tree() {
        let text = r#"{"op":"add","args":[
            {"op":"mul","args":[{"op":"var","index":1},{"op":"conj_var","index":1}]},
            {"op":"pow","exponent":2,"args":[{"op":"var","index":2}]}]}"#;
        let e: Expr = serde_json::from_str(text).unwrap();
        let expected = Expr::abs2(0) + Expr::var(1).powi(2);
        assert_eq!(e, expected);
    }

    #[test]
    fn rejects_unknown_op_and_zero_index() {
        assert!(serde_json::from_str::<Expr>(r#"{"op":"sin","args":[]}"#).is_err());
        assert!(serde_json::from_str::<Expr>(r#"{"op":"var","index":0}"#).is_err());
        assert!(serde_json::from_str::<Expr>(r#"{"op":"var","index":1,"bogus":2}"#).is_err());
    }

    #[test]
    fn implicit_t_round_trips() {
        let spec = Arc::new(ImplicitTSpec::new(vec![1.0, 1.5]).unwrap());
        let t = Expr::implicit_t_identity(spec);
        let e = (Expr::real(2.0) * &t).exp() * Expr::abs2(0);
        let text = serde_json::to_string(&e).unwrap();
        let back: Expr = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
    }
}
