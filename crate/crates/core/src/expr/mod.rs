//! A small expression language for the free functions that label the
//! transformation families: scalar functions of one real variable `z`
//! and multivariate functions of the polar ratios `r1..r3`, `s1..s3`.
//!
//! Trees are immutable and shared through [`Arc`](std::sync::Arc); all
//! composite construction goes through constant-folding constructors.

mod ast;
mod diff;
mod eval;
mod parse;

use std::fmt;

use num_complex::Complex64;

pub use ast::{
    add, call, cnum, constant, div, mul, neg, num, pow, sub, var, Const, Expr, Func, InverseNode,
    Node, Var,
};
pub use diff::derivative;
pub use eval::{Env, EvalError};
pub use parse::{parse_aliased, parse_with, ParseError};


/// Imaginary-part tolerance for values that must be real.
pub const REAL_TOLERANCE: f64 = 1e-10;

pub const MULTI_VARS: [Var; 6] = [Var::R(1), Var::R(2), Var::R(3), Var::S(1), Var::S(2), Var::S(3)];

/// A function of one real variable `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarFn(Node);

impl ScalarFn {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_with(text, &[Var::Z]).map(ScalarFn)
    }

    /// Parses a function whose argument is written `name` (e.g. `x` for g(X)).
    pub fn parse_in(text: &str, name: &str) -> Result<Self, ParseError> {
        parse_aliased(text, name).map(ScalarFn)
    }

    /// Wraps a node; it must not mention any variable other than `z`.
    pub fn from_node(node: Node) -> Self {
        debug_assert!(MULTI_VARS.iter().all(|v| !node.mentions(*v)));
        ScalarFn(node)
    }

    pub fn constant(c: f64) -> Self {
        ScalarFn(num(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn identity() -> Self {
        ScalarFn(var(Var::Z))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_constant()
    }

    /// True when the tree has folded to the literal zero.
    pub fn is_zero(&self) -> bool {
        self.0.as_num() == Some(Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        eval::eval_node(&self.0, &Env::scalar(z))
    }

    pub fn eval_at(&self, z: f64) -> Result<Complex64, EvalError> {
        self.eval(Complex64::new(z, 0.0))
    }

    /// Evaluates at a real point and insists on a real result.
    pub fn eval_real(&self, z: f64) -> Result<f64, EvalError> {
        let v = self.eval_at(z)?;
        if v.im.abs() >= REAL_TOLERANCE {
            return Err(EvalError::NotReal(self.to_string(), v.im.abs()));
        }
        Ok(v.re)
    }

    pub fn derivative(&self) -> ScalarFn {
        ScalarFn(derivative(&self.0, Var::Z))
    }

    /// self ∘ inner, i.e. z ↦ self(inner(z)).
    pub fn compose(&self, inner: &ScalarFn) -> ScalarFn {
        ScalarFn(self.substitute_z(inner.node()))
    }

    /// Substitutes `z` by an arbitrary node (which may mention other variables).
    pub fn substitute_z(&self, replacement: &Node) -> Node {
        self.0
            .substitute(&|v| (v == Var::Z).then(|| replacement.clone()))
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl std::str::FromStr for ScalarFn {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScalarFn::parse(s)
    }
}

/// A function of the modulus ratios r_k = R_k/R₀ and phase differences
/// s_k = S_k − S₀, k = 1, 2, 3.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiFn(Node);

impl MultiFn {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_with(text, &MULTI_VARS).map(MultiFn)
    }

    pub fn from_node(node: Node) -> Self {
        debug_assert!(!node.mentions(Var::Z));
        MultiFn(node)
    }

    pub fn constant(c: Complex64) -> Self {
        MultiFn(cnum(c))
    }

    pub fn one() -> Self {
        MultiFn(num(1.0))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn eval(&self, ratios: [f64; 3], diffs: [f64; 3]) -> Result<Complex64, EvalError> {
        eval::eval_node(&self.0, &Env::ratios(ratios, diffs))
    }

    /// Replaces (r1, r2, r3, s1, s2, s3) by the given nodes simultaneously.
    pub fn substitute(&self, args: &[Node; 6]) -> MultiFn {
        MultiFn(self.0.substitute(&|v| match v {
            Var::R(k) => Some(args[k as usize - 1].clone()),
            Var::S(k) => Some(args[k as usize + 2].clone()),
            Var::Z => None,
        }))
    }
}

impl fmt::Display for MultiFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Evaluates an arbitrary node under explicit bindings.
pub fn eval_node(node: &Node, env: &Env) -> Result<Complex64, EvalError> {
    eval::eval_node(node, env)
}
