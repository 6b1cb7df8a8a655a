use num_complex::Complex64;

use super::kmatrix::KMatrix;
use super::{GaugeTransform, Requirements, Thresholds};
use crate::error::{GaugeError, Result};
use crate::expr::{add, call, cnum, div, mul, num, pow, sub, var, Func, MultiFn, Node, Var};
use crate::gamma::{polar_decompose, Spinor};

/// A local separable transformation
/// ψ_j ↦ R_j^a e^{bS_j} G_j(R₁/R₀, R₂/R₀, R₃/R₀, S₁−S₀, S₂−S₀, S₃−S₀).
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralLSTransform {
    pub k: KMatrix,
    pub g: [MultiFn; 4],
    pub thresholds: Thresholds,
}

impl GeneralLSTransform {
    pub fn new(k: KMatrix, g: [MultiFn; 4]) -> Self {
        GeneralLSTransform {
            k,
            g,
            thresholds: Thresholds::default(),
        }
    }

    pub fn identity() -> Self {
        Self::new(KMatrix::identity(), std::array::from_fn(|_| MultiFn::one()))
    }

    /// Evaluates the map on raw moduli and phases. Phases are used as
    /// given (not reduced to a principal branch), which is what the
    /// one-parameter-group checks need.
    pub fn eval_polar(&self, r: [f64; 4], s: [f64; 4]) -> Result<Spinor> {
        for (j, &rj) in r.iter().enumerate() {
            if !(rj > self.thresholds.eps_r) {
                return Err(GaugeError::DegenerateSpinor(format!(
                    "R_{j} = {rj:.3e} ≤ ε_R = {:.1e}",
                    self.thresholds.eps_r
                )));
            }
        }
        let ratios = [r[1] / r[0], r[2] / r[0], r[3] / r[0]];
        let diffs = [s[1] - s[0], s[2] - s[0], s[3] - s[0]];
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for j in 0..4 {
            let g = self.g[j].eval(ratios, diffs)?;
            out[j] = (self.k.a * r[j].ln() + self.k.b * s[j]).exp() * g;
        }
        let out = Spinor(out);
        if !out.is_finite() {
            return Err(GaugeError::DegenerateSpinor("non-finite image".into()));
        }
        Ok(out)
    }

    /// "self, then `second`" as a single transformation.
    ///
    /// The composite is exact wherever the phases of the intermediate
    /// spinor may be taken on any branch, i.e. when b̃ of `second` is zero,
    /// b̂ of `second` is an integer and `second.g` is 2π-periodic in s.
    pub fn compose(&self, second: &GeneralLSTransform) -> Result<GeneralLSTransform> {
        for k in [&self.k, &second.k] {
            let det = k.det();
            if det == 0.0 || !det.is_finite() {
                return Err(GaugeError::SingularK(det));
            }
        }
        let k1 = self.k;
        let g1: Vec<Node> = self.g.iter().map(|g| g.node().clone()).collect();
        let abs = |n: &Node| call(Func::Abs, n.clone());
        let arg = |n: &Node| call(Func::Arg, n.clone());

        let mut args: [Node; 6] = std::array::from_fn(|_| num(0.0));
        for l in 1..=3u8 {
            let r = var(Var::R(l));
            let s = var(Var::S(l));
            let gl = &g1[l as usize];
            let u = mul(
                mul(
                    pow(r.clone(), num(k1.a.re)),
                    call(Func::Exp, mul(num(k1.b.re), s.clone())),
                ),
                div(abs(gl), abs(&g1[0])),
            );
            let v = add(
                add(
                    mul(num(k1.a.im), call(Func::Ln, r)),
                    mul(num(k1.b.im), s),
                ),
                sub(arg(gl), arg(&g1[0])),
            );
            args[l as usize - 1] = u;
            args[l as usize + 2] = v;
        }

        let (a2, b2) = (second.k.a, second.k.b);
        let g3 = std::array::from_fn(|j| {
            let modulus = call(Func::Exp, mul(cnum(a2), call(Func::Ln, abs(&g1[j]))));
            let phase = call(Func::Exp, mul(cnum(b2), arg(&g1[j])));
            let inner = second.g[j].substitute(&args);
            MultiFn::from_node(mul(mul(modulus, phase), inner.node().clone()))
        });

        Ok(GeneralLSTransform {
            k: k1.then(&second.k),
            g: g3,
            thresholds: self.thresholds,
        })
    }
}

/// Free-function form of [`GeneralLSTransform::compose`] (`n1` acts first).
pub fn compose_general(n1: &GeneralLSTransform, n2: &GeneralLSTransform) -> Result<GeneralLSTransform> {
    n1.compose(n2)
}

impl GaugeTransform for GeneralLSTransform {
    fn apply(&self, psi: &Spinor) -> Result<Spinor> {
        let p = polar_decompose(psi);
        self.eval_polar(p.r, p.s)
    }

    fn requirements(&self) -> Requirements {
        Requirements {
            nonzero_moduli: true,
            ..Requirements::default()
        }
    }

    fn describe(&self) -> String {
        format!(
            "general(a = {}, b = {}, G = [{}, {}, {}, {}])",
            self.k.a, self.k.b, self.g[0], self.g[1], self.g[2], self.g[3]
        )
    }

    fn as_general(&self) -> Option<&GeneralLSTransform> {
        Some(self)
    }
}
