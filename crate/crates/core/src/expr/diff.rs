use std::sync::Arc;

use super::ast::*;

/// Symbolic partial derivative with respect to a real variable.
pub fn derivative(e: &Node, v: Var) -> Node {
    match &**e {
        Expr::Num(_) | Expr::Const(_) => num(0.0),
        Expr::Var(w) => num(if *w == v { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(derivative(a, v)),
        Expr::Add(a, b) => add(derivative(a, v), derivative(b, v)),
        Expr::Sub(a, b) => sub(derivative(a, v), derivative(b, v)),
        Expr::Mul(a, b) => add(
            mul(derivative(a, v), b.clone()),
            mul(a.clone(), derivative(b, v)),
        ),
        Expr::Div(a, b) => {
            let da = derivative(a, v);
            let db = derivative(b, v);
            sub(
                div(da, b.clone()),
                div(mul(a.clone(), db), pow(b.clone(), num(2.0))),
            )
        }
        Expr::Pow(a, b) => {
            let da = derivative(a, v);
            if !b.mentions(v) {
                // d(a^c) = c a^(c-1) a'
                mul(mul(b.clone(), pow(a.clone(), sub(b.clone(), num(1.0)))), da)
            } else {
                let db = derivative(b, v);
                mul(
                    e.clone(),
                    add(
                        mul(db, call(Func::Ln, a.clone())),
                        div(mul(b.clone(), da), a.clone()),
                    ),
                )
            }
        }
        Expr::Call(f, a) => {
            let da = derivative(a, v);
            if da.is_num_zero() {
                return num(0.0);
            }
            let a = a.clone();
            match f {
                Func::Sin => mul(call(Func::Cos, a), da),
                Func::Cos => neg(mul(call(Func::Sin, a), da)),
                Func::Tan => div(da, pow(call(Func::Cos, a), num(2.0))),
                Func::Exp => mul(e.clone(), da),
                Func::Ln => div(da, a),
                Func::Tanh => div(da, pow(call(Func::Cosh, a), num(2.0))),
                Func::Sinh => mul(call(Func::Cosh, a), da),
                Func::Cosh => mul(call(Func::Sinh, a), da),
                Func::Sqrt => div(da, mul(num(2.0), e.clone())),
                // d|a| = Re(ā a') / |a|
                Func::Abs => div(
                    call(Func::Re, mul(call(Func::Conj, a), da)),
                    e.clone(),
                ),
                // d arg a = Im(a'/a)
                Func::Arg => call(Func::Im, div(da, a)),
                Func::Re => call(Func::Re, da),
                Func::Im => call(Func::Im, da),
                Func::Conj => call(Func::Conj, da),
            }
        }
        Expr::Inverse(n) => {
            // ζ(w) with f(ζ) = w ⇒ dζ/dv = (dw/dv) / f'(ζ)
            let darg = derivative(&n.arg, v);
            if darg.is_num_zero() {
                return num(0.0);
            }
            let at_root = n.df.substitute(&|w| (w == Var::Z).then(|| e.clone()));
            div(darg, at_root)
        }
    }
}

trait ZeroCheck {
    fn is_num_zero(&self) -> bool;
}

impl ZeroCheck for Arc<Expr> {
    fn is_num_zero(&self) -> bool {
        matches!(&**self, Expr::Num(c) if c.re == 0.0 && c.im == 0.0)
    }
}
