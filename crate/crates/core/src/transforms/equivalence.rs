use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::check::{sample_rng, sample_spinor, CheckConfig};
use super::invariant::{checked_x, InvariantTransform};
use super::{GaugeTransform, Requirements, Thresholds};
use crate::error::{GaugeError, Result};
use crate::expr::{add, call, cnum, derivative, div, mul, neg, num, sub, var, Expr, Func, InverseNode, Node, ScalarFn, Var};
use crate::gamma::{scalar_pseudo_apply, z_argument, Spinor, ZConvention};

/// Placement of the imaginary unit in the chiral factor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseVariant {
    /// e^{iργ₅} = cos ρ + i sin ρ γ₅, unitary.
    #[default]
    WithI,
    /// e^{ργ₅} = cosh ρ + sinh ρ γ₅, not unitary.
    WithoutI,
}

impl PhaseVariant {
    pub fn name(self) -> &'static str {
        match self {
            PhaseVariant::WithI => "with_i",
            PhaseVariant::WithoutI => "without_i",
        }
    }

    /// The coefficients (α, β) of α + βγ₅ = exp(ρΓ), Γ = iγ₅ or γ₅.
    pub fn chiral(self, rho: f64) -> (Complex64, Complex64) {
        match self {
            PhaseVariant::WithI => (Complex64::new(rho.cos(), 0.0), Complex64::new(0.0, rho.sin())),
            PhaseVariant::WithoutI => (Complex64::new(rho.cosh(), 0.0), Complex64::new(rho.sinh(), 0.0)),
        }
    }
}

impl std::str::FromStr for PhaseVariant {
    type Err = GaugeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with_i" => Ok(PhaseVariant::WithI),
            "without_i" => Ok(PhaseVariant::WithoutI),
            other => Err(GaugeError::InvalidSpec(format!(
                "unknown phase variant {other:?} (expected with_i | without_i)"
            ))),
        }
    }
}

/// ψ ↦ exp(i(â/2) ln X + iφ(Z)) · exp(ρ(Z)Γ) ψ with Γ = iγ₅ (`WithI`)
/// or Γ = γ₅ (`WithoutI`).
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceTransform {
    pub a_hat: f64,
    pub phi: ScalarFn,
    pub rho: ScalarFn,
    pub variant: PhaseVariant,
    pub convention: ZConvention,
    pub thresholds: Thresholds,
}

impl EquivalenceTransform {
    pub fn new(a_hat: f64, phi: ScalarFn, rho: ScalarFn) -> Self {
        EquivalenceTransform {
            a_hat,
            phi,
            rho,
            variant: PhaseVariant::default(),
            convention: ZConvention::default(),
            thresholds: Thresholds::default(),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, ScalarFn::zero(), ScalarFn::zero())
    }

    /// Convenience constructor from expression strings.
    pub fn parse(a_hat: f64, phi: &str, rho: &str) -> Result<Self> {
        Ok(Self::new(a_hat, ScalarFn::parse(phi)?, ScalarFn::parse(rho)?))
    }

    pub fn with_variant(mut self, variant: PhaseVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_convention(mut self, convention: ZConvention) -> Self {
        self.convention = convention;
        self
    }

    fn uses_x(&self) -> bool {
        self.a_hat != 0.0
    }

    fn uses_z(&self) -> bool {
        !(self.phi.is_constant() && self.rho.is_constant())
    }

    fn kappa(&self) -> Node {
        num(self.convention.kappa())
    }

    /// The phase Θ = (â/2) ln X + φ(Z) and the chiral angle ρ(Z) at ψ.
    pub fn angles(&self, psi: &Spinor) -> Result<(f64, f64)> {
        let log_x = if self.uses_x() {
            checked_x(psi, self.thresholds.eps_x)?.ln()
        } else {
            0.0
        };
        let z = if self.uses_z() {
            z_argument(psi, self.convention, self.thresholds.eps_z)?
        } else {
            0.0
        };
        let theta = 0.5 * self.a_hat * log_x + self.phi.eval_real(z)?;
        Ok((theta, self.rho.eval_real(z)?))
    }

    /// Image z̃ of Z under this transform's chiral factor, as a function of z.
    /// Identity for `WithoutI`, where X and Y are unchanged.
    pub fn z_map(&self) -> ScalarFn {
        match self.variant {
            PhaseVariant::WithoutI => ScalarFn::identity(),
            PhaseVariant::WithI => ScalarFn::from_node(self.mobius(&var(Var::Z), self.rho.node(), false)),
        }
    }

    /// (w cos 2ρ + κ sin 2ρ)/(cos 2ρ − κ w sin 2ρ), or its inverse map.
    fn mobius(&self, w: &Node, rho: &Node, inverse: bool) -> Node {
        let two_rho = mul(num(2.0), rho.clone());
        let c = call(Func::Cos, two_rho.clone());
        let s = call(Func::Sin, two_rho);
        let k = if inverse { neg(self.kappa()) } else { self.kappa() };
        div(
            add(mul(w.clone(), c.clone()), mul(k.clone(), s.clone())),
            sub(c, mul(k, mul(w.clone(), s))),
        )
    }

    /// ln(cos 2ρ(z) + κ sin 2ρ(z)/z), the log of X'/X after the chiral factor.
    fn log_x_ratio(&self, z: &Node, rho_at_z: &Node) -> Node {
        let two_rho = mul(num(2.0), rho_at_z.clone());
        let c = call(Func::Cos, two_rho.clone());
        let s = call(Func::Sin, two_rho);
        call(Func::Ln, add(c, div(mul(self.kappa(), s), z.clone())))
    }

    fn check_compatible(&self, other: &EquivalenceTransform) -> Result<()> {
        if self.variant != other.variant {
            return Err(GaugeError::Incompatible(format!(
                "phase variants differ ({} vs {})",
                self.variant.name(),
                other.variant.name()
            )));
        }
        if self.convention != other.convention {
            return Err(GaugeError::Incompatible("Z conventions differ".into()));
        }
        Ok(())
    }

    /// "self, then `second`". The group-law expressions reference the
    /// constituents, so they can be differentiated again.
    pub fn compose(&self, second: &EquivalenceTransform) -> Result<EquivalenceTransform> {
        self.check_compatible(second)?;
        let a_hat = self.a_hat + second.a_hat;
        let (phi, rho) = match self.variant {
            PhaseVariant::WithoutI => (
                add(self.phi.node().clone(), second.phi.node().clone()),
                add(self.rho.node().clone(), second.rho.node().clone()),
            ),
            PhaseVariant::WithI => {
                let z = var(Var::Z);
                let zt = self.mobius(&z, self.rho.node(), false);
                let rho = add(self.rho.node().clone(), second.rho.substitute_z(&zt));
                let phi = add(
                    add(
                        mul(num(0.5 * second.a_hat), self.log_x_ratio(&z, self.rho.node())),
                        self.phi.node().clone(),
                    ),
                    second.phi.substitute_z(&zt),
                );
                (phi, rho)
            }
        };
        Ok(EquivalenceTransform {
            a_hat,
            phi: ScalarFn::from_node(phi),
            rho: ScalarFn::from_node(rho),
            ..self.clone()
        })
    }

    /// The group-law inverse as expressions, without pointwise verification.
    pub fn inverse_unchecked(&self) -> EquivalenceTransform {
        let (phi, rho) = match self.variant {
            PhaseVariant::WithoutI => (neg(self.phi.node().clone()), neg(self.rho.node().clone())),
            PhaseVariant::WithI => {
                let w = var(Var::Z);
                let zstar = if self.rho.is_constant() {
                    self.mobius(&w, self.rho.node(), true)
                } else {
                    let f = self.mobius(&w, self.rho.node(), false);
                    let df = derivative(&f, Var::Z);
                    let guess = self.mobius(&w, self.rho.node(), true);
                    Arc::new(Expr::Inverse(Arc::new(InverseNode { f, df, arg: w.clone(), guess })))
                };
                let rho_star = self.rho.substitute_z(&zstar);
                let phi = sub(
                    mul(num(0.5 * self.a_hat), self.log_x_ratio(&zstar, &rho_star)),
                    self.phi.substitute_z(&zstar),
                );
                (phi, neg(rho_star))
            }
        };
        EquivalenceTransform {
            a_hat: -self.a_hat,
            phi: ScalarFn::from_node(phi),
            rho: ScalarFn::from_node(rho),
            ..self.clone()
        }
    }

    /// The group-law inverse, verified pointwise in both orders on samples
    /// drawn from `cfg`.
    pub fn invert(&self, cfg: &CheckConfig) -> Result<EquivalenceTransform> {
        let inv = self.inverse_unchecked();
        let req = self.requirements().union(inv.requirements());
        let deviations: Vec<Option<f64>> = (0..cfg.sample_count)
            .map(|i| {
                let mut rng = sample_rng(cfg.seed, i as u64);
                let psi = sample_spinor(&mut rng, cfg, req)?;
                let there = inv.apply(&self.apply(&psi).ok()?).ok()?;
                let back = self.apply(&inv.apply(&psi).ok()?).ok()?;
                let scale = psi.norm().max(1.0);
                Some(((there - psi).norm() / scale).max((back - psi).norm() / scale))
            })
            .collect();
        let evaluated = deviations.iter().flatten().count();
        let worst = deviations.iter().flatten().fold(0.0f64, |m, &d| if d.is_nan() { f64::INFINITY } else { m.max(d) });
        if evaluated == 0 || worst > cfg.tolerance {
            return Err(GaugeError::InversionFailure {
                deviation: if evaluated == 0 { f64::INFINITY } else { worst },
                tolerance: cfg.tolerance,
            });
        }
        Ok(inv)
    }

    /// The same map written in the invariant family (a = 1 + iâ).
    pub fn to_invariant(&self) -> InvariantTransform {
        let eiphi = call(Func::Exp, mul(cnum(Complex64::new(0.0, 1.0)), self.phi.node().clone()));
        let rho = self.rho.node().clone();
        let (h1, h2) = match self.variant {
            PhaseVariant::WithI => (
                mul(eiphi.clone(), call(Func::Cos, rho.clone())),
                mul(mul(cnum(Complex64::new(0.0, 1.0)), eiphi), call(Func::Sin, rho)),
            ),
            PhaseVariant::WithoutI => (
                mul(eiphi.clone(), call(Func::Cosh, rho.clone())),
                mul(eiphi, call(Func::Sinh, rho)),
            ),
        };
        InvariantTransform {
            a: Complex64::new(1.0, self.a_hat),
            h1: ScalarFn::from_node(h1),
            h2: ScalarFn::from_node(h2),
            convention: self.convention,
            thresholds: self.thresholds,
        }
    }
}

/// Free-function form of [`EquivalenceTransform::compose`] (`n1` acts first).
pub fn compose_equivalence(n1: &EquivalenceTransform, n2: &EquivalenceTransform) -> Result<EquivalenceTransform> {
    n1.compose(n2)
}

/// Free-function form of [`EquivalenceTransform::invert`].
pub fn invert_equivalence(n: &EquivalenceTransform, cfg: &CheckConfig) -> Result<EquivalenceTransform> {
    n.invert(cfg)
}

impl GaugeTransform for EquivalenceTransform {
    fn apply(&self, psi: &Spinor) -> Result<Spinor> {
        let (theta, rho) = self.angles(psi)?;
        let (alpha, beta) = self.variant.chiral(rho);
        Ok(Complex64::from_polar(1.0, theta) * scalar_pseudo_apply(alpha, beta, psi))
    }

    fn requirements(&self) -> Requirements {
        Requirements {
            positive_x: self.uses_x(),
            nonzero_y: self.uses_z(),
            nonzero_moduli: false,
        }
    }

    fn describe(&self) -> String {
        format!(
            "equivalence(a_hat = {}, phi = {}, rho = {}, variant = {})",
            self.a_hat,
            self.phi,
            self.rho,
            self.variant.name()
        )
    }
}
