use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::general::GeneralLSTransform;
use super::kmatrix::KMatrix;
use super::{GaugeTransform, Requirements, Thresholds};
use crate::error::{GaugeError, Result};
use crate::expr::{add, call, cnum, div, mul, num, pow, sub, var, Func, MultiFn, Node, ScalarFn, Var};
use crate::gamma::{bilinear_x, scalar_pseudo_apply, z_argument, Spinor, ZConvention, J};

/// ψ ↦ X^{(a−1)/2} (h₁(Z) + h₂(Z) γ₅) ψ.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantTransform {
    pub a: Complex64,
    pub h1: ScalarFn,
    pub h2: ScalarFn,
    pub convention: ZConvention,
    pub thresholds: Thresholds,
}

/// Coefficient multiplying the h₂ term of the lowered G_j.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma5Coefficient {
    /// G_j = (…)(h₁ + h₂ (R_J/R_j) e^{i(S_J − S_j)}); reproduces the
    /// invariant form with γ₅ = iγ₀γ₁γ₂γ₃.
    #[default]
    One,
    /// G_j = (…)(h₁ − i h₂ (R_J/R_j) e^{i(S_J − S_j)}).
    MinusI,
}

impl Gamma5Coefficient {
    pub fn value(self) -> Complex64 {
        match self {
            Gamma5Coefficient::One => Complex64::new(1.0, 0.0),
            Gamma5Coefficient::MinusI => Complex64::new(0.0, -1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gamma5Coefficient::One => "one",
            Gamma5Coefficient::MinusI => "minus_i",
        }
    }
}

impl InvariantTransform {
    pub fn new(a: Complex64, h1: ScalarFn, h2: ScalarFn) -> Self {
        InvariantTransform {
            a,
            h1,
            h2,
            convention: ZConvention::default(),
            thresholds: Thresholds::default(),
        }
    }

    pub fn identity() -> Self {
        Self::new(Complex64::new(1.0, 0.0), ScalarFn::constant(1.0), ScalarFn::zero())
    }

    pub fn with_convention(mut self, convention: ZConvention) -> Self {
        self.convention = convention;
        self
    }

    fn uses_x(&self) -> bool {
        self.a != Complex64::new(1.0, 0.0)
    }

    fn uses_z(&self) -> bool {
        !(self.h1.is_constant() && self.h2.is_constant())
    }

    /// The equivalent local separable transformation with b = i.
    pub fn lower(&self, coefficient: Gamma5Coefficient) -> GeneralLSTransform {
        let r = |k: usize| if k == 0 { num(1.0) } else { var(Var::R(k as u8)) };
        let s = |k: usize| if k == 0 { num(0.0) } else { var(Var::S(k as u8)) };
        let sq = |n: Node| pow(n, num(2.0));

        // X/R₀² and P/R₀² in ratio variables
        let x_ratio = sub(sub(add(num(1.0), sq(r(1))), sq(r(2))), sq(r(3)));
        let p_ratio = mul(
            num(-2.0),
            add(
                mul(r(2), call(Func::Sin, s(2))),
                mul(mul(r(1), r(3)), call(Func::Sin, sub(s(3), s(1)))),
            ),
        );
        let z = div(x_ratio.clone(), mul(num(self.convention.denominator(1.0)), p_ratio));
        let h1z = self.h1.substitute_z(&z);
        let h2z = self.h2.substitute_z(&z);
        let exponent = cnum((self.a - 1.0) / 2.0);

        let g = std::array::from_fn(|j| {
            let jj = J[j];
            let scale = pow(div(x_ratio.clone(), sq(r(j))), exponent.clone());
            let partner = mul(
                div(r(jj), r(j)),
                call(Func::Exp, mul(cnum(Complex64::new(0.0, 1.0)), sub(s(jj), s(j)))),
            );
            let bracket = add(h1z.clone(), mul(mul(cnum(coefficient.value()), h2z.clone()), partner));
            MultiFn::from_node(mul(scale, bracket))
        });
        let mut lowered = GeneralLSTransform::new(KMatrix::new(self.a, Complex64::new(0.0, 1.0)), g);
        lowered.thresholds = self.thresholds;
        lowered
    }
}

/// Free-function form of [`InvariantTransform::lower`].
pub fn lower_invariant_to_general(n: &InvariantTransform, coefficient: Gamma5Coefficient) -> GeneralLSTransform {
    n.lower(coefficient)
}

pub(crate) fn checked_x(psi: &Spinor, eps_x: f64) -> Result<f64> {
    let x = bilinear_x(psi);
    if !(x > eps_x) {
        return Err(GaugeError::DegenerateInvariant(format!(
            "X = {x:.3e} ≤ ε_X = {eps_x:.1e}"
        )));
    }
    Ok(x)
}

impl GaugeTransform for InvariantTransform {
    fn apply(&self, psi: &Spinor) -> Result<Spinor> {
        let scale = if self.uses_x() {
            let x = checked_x(psi, self.thresholds.eps_x)?;
            ((self.a - 1.0) / 2.0 * x.ln()).exp()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let z = if self.uses_z() {
            z_argument(psi, self.convention, self.thresholds.eps_z)?
        } else {
            0.0
        };
        let h1 = self.h1.eval_at(z)?;
        let h2 = self.h2.eval_at(z)?;
        Ok(scale * scalar_pseudo_apply(h1, h2, psi))
    }

    fn requirements(&self) -> Requirements {
        Requirements {
            positive_x: self.uses_x(),
            nonzero_y: self.uses_z(),
            nonzero_moduli: false,
        }
    }

    fn describe(&self) -> String {
        format!("invariant(a = {}, h1 = {}, h2 = {})", self.a, self.h1, self.h2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::gamma5_apply;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn psi() -> Spinor {
        Spinor([c(0.9, 0.2), c(-0.4, 0.3), c(0.2, -0.5), c(0.1, 0.35)])
    }

    #[test]
    fn trivial_parameters() {
        let id = InvariantTransform::identity();
        assert!((id.apply(&psi()).unwrap() - psi()).norm() < 1e-15);
        let g5 = InvariantTransform::new(c(1.0, 0.0), ScalarFn::zero(), ScalarFn::constant(1.0));
        assert!((g5.apply(&psi()).unwrap() - gamma5_apply(&psi())).norm() < 1e-15);
    }

    #[test]
    fn lowered_identity_has_unit_g() {
        let lowered = InvariantTransform::identity().lower(Gamma5Coefficient::MinusI);
        assert_eq!(lowered.k, KMatrix::identity());
        for g in &lowered.g {
            assert_eq!(g, &MultiFn::one());
        }
    }

    #[test]
    fn lowered_gamma5_swaps_components() {
        let g5 = InvariantTransform::new(c(1.0, 0.0), ScalarFn::zero(), ScalarFn::constant(1.0));
        let out = g5.lower(Gamma5Coefficient::One).apply(&psi()).unwrap();
        assert!((out - gamma5_apply(&psi())).norm() < 1e-14);
        let minus_i = g5.lower(Gamma5Coefficient::MinusI).apply(&psi()).unwrap();
        assert!((minus_i - gamma5_apply(&psi()).scale(c(0.0, -1.0))).norm() < 1e-14);
    }

    #[test]
    fn lowering_matches_direct_application() {
        let n = InvariantTransform::new(c(3.0, 0.0), ScalarFn::parse("z").unwrap(), ScalarFn::constant(1.0));
        for conv in [ZConvention::Pseudoscalar, ZConvention::ImaginaryPart] {
            let n = n.clone().with_convention(conv);
            let direct = n.apply(&psi()).unwrap();
            let lowered = n.lower(Gamma5Coefficient::One).apply(&psi()).unwrap();
            assert!((direct - lowered).norm() < 1e-12 * direct.norm());
        }
    }

    #[test]
    fn degenerate_inputs() {
        let n = InvariantTransform::new(c(2.0, 0.0), ScalarFn::constant(1.0), ScalarFn::zero());
        let lower_heavy = Spinor([c(0.1, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(n.apply(&lower_heavy), Err(GaugeError::DegenerateInvariant(_))));
        let zdep = InvariantTransform::new(c(1.0, 0.0), ScalarFn::identity(), ScalarFn::zero());
        let no_y = Spinor([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(zdep.apply(&no_y), Err(GaugeError::DegenerateInvariant(_))));
    }
}
