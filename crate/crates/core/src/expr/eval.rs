use num_complex::Complex64;
use thiserror::Error;

use super::ast::{Expr, Func, Var};
use crate::gamma::principal_arg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("value {0} is not real (|Im| = {1:.3e})")]
    NotReal(String, f64),
    #[error("variable {0} is unbound")]
    Unbound(String),
}

/// Variable bindings, indexed by the variable slot.
#[derive(Clone, Copy, Debug, Default)]
pub struct Env {
    slots: [Option<Complex64>; 7],
}

impl Env {
    pub fn scalar(z: Complex64) -> Self {
        let mut e = Env::default();
        e.slots[0] = Some(z);
        e
    }

    pub fn ratios(r: [f64; 3], s: [f64; 3]) -> Self {
        let mut e = Env::default();
        for k in 0..3 {
            e.slots[1 + k] = Some(Complex64::new(r[k], 0.0));
            e.slots[4 + k] = Some(Complex64::new(s[k], 0.0));
        }
        e
    }

    pub fn with(mut self, v: Var, value: Complex64) -> Self {
        self.slots[v.slot()] = Some(value);
        self
    }

    fn get(&self, v: Var) -> Result<Complex64, EvalError> {
        self.slots[v.slot()].ok_or_else(|| EvalError::Unbound(v.name()))
    }
}

fn domain(msg: impl Into<String>) -> EvalError {
    EvalError::Domain(msg.into())
}

fn finite(c: Complex64, what: &str) -> Result<Complex64, EvalError> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(c)
    } else {
        Err(domain(format!("{what} is not finite")))
    }
}

fn is_nonpositive_real(c: Complex64) -> bool {
    c.im == 0.0 && c.re <= 0.0
}

pub(crate) fn ln(c: Complex64) -> Result<Complex64, EvalError> {
    if is_nonpositive_real(c) {
        return Err(domain(format!("ln of nonpositive real {}", c.re)));
    }
    Ok(c.ln())
}

pub(crate) fn power(base: Complex64, exponent: Complex64) -> Result<Complex64, EvalError> {
    if exponent.im == 0.0 && exponent.re.fract() == 0.0 && exponent.re.abs() <= 1024.0 {
        let n = exponent.re as i32;
        if base == Complex64::new(0.0, 0.0) && n < 0 {
            return Err(domain("zero to a negative power"));
        }
        return finite(base.powi(n), "power");
    }
    if base == Complex64::new(0.0, 0.0) {
        return if exponent.re > 0.0 {
            Ok(base)
        } else {
            Err(domain("zero to a non-positive power"))
        };
    }
    if base.im == 0.0 && base.re < 0.0 {
        return Err(domain(format!("non-integer power of negative real {}", base.re)));
    }
    finite((exponent * base.ln()).exp(), "power")
}

fn apply_func(f: Func, a: Complex64) -> Result<Complex64, EvalError> {
    let r = match f {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Tan => {
            if a.cos() == Complex64::new(0.0, 0.0) {
                return Err(domain("tan pole"));
            }
            a.tan()
        }
        Func::Exp => a.exp(),
        Func::Ln => ln(a)?,
        Func::Tanh => a.tanh(),
        Func::Sinh => a.sinh(),
        Func::Cosh => a.cosh(),
        Func::Sqrt => a.sqrt(),
        Func::Abs => Complex64::new(a.norm(), 0.0),
        Func::Arg => Complex64::new(principal_arg(a), 0.0),
        Func::Re => Complex64::new(a.re, 0.0),
        Func::Im => Complex64::new(a.im, 0.0),
        Func::Conj => a.conj(),
    };
    finite(r, f.name())
}

const NEWTON_MAX_ITER: usize = 80;

pub(crate) fn eval_node(e: &Expr, env: &Env) -> Result<Complex64, EvalError> {
    Ok(match e {
        Expr::Num(c) => *c,
        Expr::Const(c) => c.value(),
        Expr::Var(v) => env.get(*v)?,
        Expr::Neg(a) => -eval_node(a, env)?,
        Expr::Add(a, b) => eval_node(a, env)? + eval_node(b, env)?,
        Expr::Sub(a, b) => eval_node(a, env)? - eval_node(b, env)?,
        Expr::Mul(a, b) => eval_node(a, env)? * eval_node(b, env)?,
        Expr::Div(a, b) => {
            let d = eval_node(b, env)?;
            if d == Complex64::new(0.0, 0.0) {
                return Err(domain("division by zero"));
            }
            finite(eval_node(a, env)? / d, "quotient")?
        }
        Expr::Pow(a, b) => power(eval_node(a, env)?, eval_node(b, env)?)?,
        Expr::Call(f, a) => apply_func(*f, eval_node(a, env)?)?,
        Expr::Inverse(n) => {
            let target = eval_node(&n.arg, env)?;
            let mut z = eval_node(&n.guess, env)?;
            let scale = target.norm().max(1.0);
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                let inner = Env::scalar(z);
                let resid = eval_node(&n.f, &inner)? - target;
                let slope = eval_node(&n.df, &inner)?;
                if slope == Complex64::new(0.0, 0.0) {
                    return Err(domain("stationary point in inverse solve"));
                }
                let step = resid / slope;
                z -= step;
                if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
                    converged = true;
                    break;
                }
            }
            let resid = eval_node(&n.f, &Env::scalar(z))? - target;
            if !converged && resid.norm() > 1e-12 * scale {
                return Err(domain(format!(
                    "inverse solve did not converge (residual {:.3e})",
                    resid.norm()
                )));
            }
            finite(z, "inverse")?
        }
    })
}
