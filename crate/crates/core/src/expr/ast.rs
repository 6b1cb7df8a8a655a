use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

pub type Node = Arc<Expr>;

/// Free variables of the expression language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// The single argument of a [`ScalarFn`](super::ScalarFn).
    Z,
    /// Modulus ratio R_k / R₀, k = 1…3.
    R(u8),
    /// Phase difference S_k − S₀, k = 1…3.
    S(u8),
}

impl Var {
    pub(crate) fn slot(self) -> usize {
        match self {
            Var::Z => 0,
            Var::R(k) => k as usize,
            Var::S(k) => 3 + k as usize,
        }
    }

    pub fn name(self) -> String {
        match self {
            Var::Z => "z".into(),
            Var::R(k) => format!("r{k}"),
            Var::S(k) => format!("s{k}"),
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Var> {
        match name {
            "z" => Some(Var::Z),
            "r1" => Some(Var::R(1)),
            "r2" => Some(Var::R(2)),
            "r3" => Some(Var::R(3)),
            "s1" => Some(Var::S(1)),
            "s2" => Some(Var::S(2)),
            "s3" => Some(Var::S(3)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Const {
    Pi,
    E,
    I,
}

impl Const {
    pub fn value(self) -> Complex64 {
        match self {
            Const::Pi => Complex64::new(std::f64::consts::PI, 0.0),
            Const::E => Complex64::new(std::f64::consts::E, 0.0),
            Const::I => Complex64::new(0.0, 1.0),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Const::Pi => "pi",
            Const::E => "e",
            Const::I => "i",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Tanh,
    Sinh,
    Cosh,
    Sqrt,
    Abs,
    Arg,
    Re,
    Im,
    Conj,
}

impl Func {
    pub const ALL: [Func; 14] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Ln,
        Func::Tanh,
        Func::Sinh,
        Func::Cosh,
        Func::Sqrt,
        Func::Abs,
        Func::Arg,
        Func::Re,
        Func::Im,
        Func::Conj,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Tanh => "tanh",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Arg => "arg",
            Func::Re => "re",
            Func::Im => "im",
            Func::Conj => "conj",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Numerically inverted function: the solution ζ of f(ζ) = arg, found by
/// Newton iteration from `guess`. `f` and `df` are closed functions of
/// [`Var::Z`]; `arg` and `guess` live in the enclosing scope.
#[derive(Clone, Debug, PartialEq)]
pub struct InverseNode {
    pub f: Node,
    pub df: Node,
    pub arg: Node,
    pub guess: Node,
}

/// Expression tree. Build composites through the folding constructors
/// ([`add`], [`mul`], …) rather than the variants directly.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Const(Const),
    Var(Var),
    Neg(Node),
    Add(Node, Node),
    Sub(Node, Node),
    Mul(Node, Node),
    Div(Node, Node),
    Pow(Node, Node),
    Call(Func, Node),
    Inverse(Arc<InverseNode>),
}

impl Expr {
    pub fn as_num(&self) -> Option<Complex64> {
        match self {
            Expr::Num(c) => Some(*c),
            _ => None,
        }
    }

    fn is_num(&self, v: f64) -> bool {
        matches!(self, Expr::Num(c) if *c == Complex64::new(v, 0.0))
    }

    /// True when no free variable occurs.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
            Expr::Inverse(n) => n.arg.is_constant() && n.guess.is_constant(),
        }
    }

    pub fn mentions(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(a) | Expr::Call(_, a) => a.mentions(v),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.mentions(v) || b.mentions(v)
            }
            Expr::Inverse(n) => n.arg.mentions(v) || n.guess.mentions(v),
        }
    }

    /// Number of nodes in the tree (shared subtrees counted per use).
    pub fn size(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                1 + a.size() + b.size()
            }
            Expr::Inverse(n) => 1 + n.f.size() + n.arg.size() + n.guess.size(),
        }
    }

    /// Simultaneous substitution of variables; untouched variables stay.
    pub fn substitute(self: &Node, map: &dyn Fn(Var) -> Option<Node>) -> Node {
        match &**self {
            Expr::Num(_) | Expr::Const(_) => self.clone(),
            Expr::Var(v) => map(*v).unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => neg(a.substitute(map)),
            Expr::Add(a, b) => add(a.substitute(map), b.substitute(map)),
            Expr::Sub(a, b) => sub(a.substitute(map), b.substitute(map)),
            Expr::Mul(a, b) => mul(a.substitute(map), b.substitute(map)),
            Expr::Div(a, b) => div(a.substitute(map), b.substitute(map)),
            Expr::Pow(a, b) => pow(a.substitute(map), b.substitute(map)),
            Expr::Call(f, a) => call(*f, a.substitute(map)),
            Expr::Inverse(n) => Arc::new(Expr::Inverse(Arc::new(InverseNode {
                f: n.f.clone(),
                df: n.df.clone(),
                arg: n.arg.substitute(map),
                guess: n.guess.substitute(map),
            }))),
        }
    }

    /// Structural equality treating + and * as commutative.
    pub fn equivalent_modulo_commutation(&self, other: &Expr) -> bool {
        use Expr::*;
        match (self, other) {
            (Add(a, b), Add(c, d)) | (Mul(a, b), Mul(c, d)) => {
                (a.equivalent_modulo_commutation(c) && b.equivalent_modulo_commutation(d))
                    || (a.equivalent_modulo_commutation(d) && b.equivalent_modulo_commutation(c))
            }
            (Sub(a, b), Sub(c, d)) | (Div(a, b), Div(c, d)) | (Pow(a, b), Pow(c, d)) => {
                a.equivalent_modulo_commutation(c) && b.equivalent_modulo_commutation(d)
            }
            (Neg(a), Neg(b)) => a.equivalent_modulo_commutation(b),
            (Call(f, a), Call(g, b)) => f == g && a.equivalent_modulo_commutation(b),
            _ => self == other,
        }
    }
}

pub fn num(v: f64) -> Node {
    Arc::new(Expr::Num(Complex64::new(v, 0.0)))
}

pub fn cnum(c: Complex64) -> Node {
    Arc::new(Expr::Num(c))
}

pub fn var(v: Var) -> Node {
    Arc::new(Expr::Var(v))
}

pub fn constant(c: Const) -> Node {
    Arc::new(Expr::Const(c))
}

pub fn neg(a: Node) -> Node {
    match &*a {
        Expr::Num(c) => cnum(-c),
        Expr::Neg(inner) => inner.clone(),
        _ => Arc::new(Expr::Neg(a)),
    }
}

pub fn add(a: Node, b: Node) -> Node {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => cnum(x + y),
        _ if a.is_num(0.0) => b,
        _ if b.is_num(0.0) => a,
        _ => Arc::new(Expr::Add(a, b)),
    }
}

pub fn sub(a: Node, b: Node) -> Node {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => cnum(x - y),
        _ if b.is_num(0.0) => a,
        _ if a.is_num(0.0) => neg(b),
        _ => Arc::new(Expr::Sub(a, b)),
    }
}

pub fn mul(a: Node, b: Node) -> Node {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => cnum(x * y),
        _ if a.is_num(0.0) || b.is_num(0.0) => num(0.0),
        _ if a.is_num(1.0) => b,
        _ if b.is_num(1.0) => a,
        _ if a.is_num(-1.0) => neg(b),
        _ if b.is_num(-1.0) => neg(a),
        _ => Arc::new(Expr::Mul(a, b)),
    }
}

pub fn div(a: Node, b: Node) -> Node {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) if y != Complex64::new(0.0, 0.0) => cnum(x / y),
        _ if a.is_num(0.0) && !b.is_num(0.0) => num(0.0),
        _ if b.is_num(1.0) => a,
        _ => Arc::new(Expr::Div(a, b)),
    }
}

pub fn pow(a: Node, b: Node) -> Node {
    if b.is_num(0.0) {
        return num(1.0);
    }
    if b.is_num(1.0) {
        return a;
    }
    let node = Arc::new(Expr::Pow(a, b));
    fold_if_numeric(node)
}

pub fn call(f: Func, a: Node) -> Node {
    let node = Arc::new(Expr::Call(f, a));
    fold_if_numeric(node)
}

fn fold_if_numeric(node: Node) -> Node {
    let args_numeric = match &*node {
        Expr::Pow(a, b) => a.as_num().is_some() && b.as_num().is_some(),
        Expr::Call(_, a) => a.as_num().is_some(),
        _ => false,
    };
    if args_numeric {
        if let Ok(v) = super::eval::eval_node(&node, &super::eval::Env::default()) {
            return cnum(v);
        }
    }
    node
}

// Precedence levels: sum 1, product 2, unary minus 3, power 4, atom 5.
fn write_prec(e: &Expr, min: u8, out: &mut String) {
    let (prec, text) = match e {
        Expr::Num(c) => (5, format_num(*c)),
        Expr::Const(c) => (5, c.name().to_string()),
        Expr::Var(v) => (5, v.name()),
        Expr::Neg(a) => {
            let mut s = String::from("-");
            write_prec(a, 3, &mut s);
            (3, s)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let mut s = String::new();
            write_prec(a, 1, &mut s);
            s.push_str(if matches!(e, Expr::Add(..)) { " + " } else { " - " });
            write_prec(b, 2, &mut s);
            (1, s)
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            let mut s = String::new();
            write_prec(a, 2, &mut s);
            s.push(if matches!(e, Expr::Mul(..)) { '*' } else { '/' });
            write_prec(b, 3, &mut s);
            (2, s)
        }
        Expr::Pow(a, b) => {
            let mut s = String::new();
            write_prec(a, 5, &mut s);
            s.push('^');
            write_prec(b, 3, &mut s);
            (4, s)
        }
        Expr::Call(f, a) => {
            let mut s = format!("{}(", f.name());
            write_prec(a, 0, &mut s);
            s.push(')');
            (5, s)
        }
        Expr::Inverse(n) => {
            let mut s = String::from("solve[");
            write_prec(&n.f, 0, &mut s);
            s.push_str(" = ");
            write_prec(&n.arg, 0, &mut s);
            s.push(']');
            (5, s)
        }
    };
    if prec < min {
        out.push('(');
        out.push_str(&text);
        out.push(')');
    } else {
        out.push_str(&text);
    }
}

fn format_real(v: f64) -> String {
    format!("{v:?}")
}

fn format_num(c: Complex64) -> String {
    if c.im == 0.0 && c.re.is_sign_positive() {
        format_real(c.re)
    } else if c.im == 0.0 {
        format!("(-{})", format_real(-c.re))
    } else if c.re == 0.0 && c.re.is_sign_positive() {
        if c.im.is_sign_negative() {
            format!("(-{}*i)", format_real(-c.im))
        } else {
            format!("({}*i)", format_real(c.im))
        }
    } else {
        let sign = if c.im.is_sign_negative() { '-' } else { '+' };
        let re = if c.re.is_sign_negative() {
            format!("-{}", format_real(-c.re))
        } else {
            format_real(c.re)
        };
        format!("({re} {sign} {}*i)", format_real(c.im.abs()))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_prec(self, 0, &mut s);
        f.write_str(&s)
    }
}
