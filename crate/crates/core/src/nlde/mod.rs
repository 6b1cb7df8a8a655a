//! Nonlinear Dirac operators (γ_μ p^μ + H(ψ))ψ with p = i∂, their
//! finite-difference residuals on transformed fields, and the reduction
//! of the extended family to the equivalent one.
//!
//! Sign convention: the linear operator is iγ^μ∂_μ − m, so every H
//! reduces to the constant −m when its parameters are trivial.

mod reduction;
mod residual;
mod solution;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GaugeError, Result};
use crate::expr::ScalarFn;
use crate::gamma::{bilinear_x, gamma0_apply, gammas, pseudoscalar_p, scalar_pseudo_apply, Spinor, ZConvention};
use crate::transforms::{EquivalenceTransform, InvariantTransform, PhaseVariant, Requirements, Thresholds};

pub use reduction::{reduction_check, ReductionCandidate, ReductionReport};
pub use residual::{fit_slope, nlde_residual, residual_ladder, sample_points, Region, ResidualReport, StepResidual};
pub use solution::{
    transform_solution, variant_pairing, Certificate, PairingEntry, PairingResult, SolutionMap, SolutionSettings,
    TransformedSolution,
};

/// Smallest admissible |denominator| in the H₁ coefficients.
pub const DENOMINATOR_EPS: f64 = 1e-10;

/// Which algebra the H₁ coefficients are read in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H1Form {
    /// The operator induced by N = X^{(a−1)/2}(h₁ + h₂γ₅): denominators
    /// h₁² − h₂², mass factor (h₁² + h₂² + 2h₁h₂γ₅).
    #[default]
    Derived,
    /// Coefficients with denominators h₁² + h₂², for N = X^{(a−1)/2}(h₁ + h₂Γ)
    /// with Γ = γ₀γ₁γ₂γ₃ = −iγ₅ (Γ² = −1).
    GammaProduct,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NonlinearTerm {
    H1 { a: Complex64, h1: ScalarFn, h2: ScalarFn, form: H1Form },
    H2 { a_hat: f64, phi: ScalarFn, rho: ScalarFn },
    /// `g` is a function of X (written with argument `x`); the others of Z.
    H2Ex { g: Option<ScalarFn>, k: ScalarFn, l: ScalarFn, n: ScalarFn },
}

impl NonlinearTerm {
    pub fn name(&self) -> &'static str {
        match self {
            NonlinearTerm::H1 { .. } => "H1",
            NonlinearTerm::H2 { .. } => "H2",
            NonlinearTerm::H2Ex { .. } => "H2EX",
        }
    }
}

/// A nonlinear term together with the mass, the γ₅-exponent variant and
/// the Z convention; derivatives of the Z-dependent functions are formed
/// once at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearTermSpec {
    term: NonlinearTerm,
    pub mass: f64,
    pub variant: PhaseVariant,
    pub convention: ZConvention,
    pub thresholds: Thresholds,
    /// h₁′, h₂′ for H1 or φ′, ρ′ for H2; unused for H2EX.
    derivatives: [ScalarFn; 2],
}

impl NonlinearTermSpec {
    pub fn new(term: NonlinearTerm) -> Self {
        let derivatives = match &term {
            NonlinearTerm::H1 { h1, h2, .. } => [h1.derivative(), h2.derivative()],
            NonlinearTerm::H2 { phi, rho, .. } => [phi.derivative(), rho.derivative()],
            NonlinearTerm::H2Ex { .. } => [ScalarFn::zero(), ScalarFn::zero()],
        };
        NonlinearTermSpec {
            term,
            mass: 1.0,
            variant: PhaseVariant::default(),
            convention: ZConvention::default(),
            thresholds: Thresholds::default(),
            derivatives,
        }
    }

    pub fn h1(a: Complex64, h1: ScalarFn, h2: ScalarFn) -> Self {
        Self::new(NonlinearTerm::H1 {
            a,
            h1,
            h2,
            form: H1Form::default(),
        })
    }

    pub fn h2(a_hat: f64, phi: ScalarFn, rho: ScalarFn) -> Self {
        Self::new(NonlinearTerm::H2 { a_hat, phi, rho })
    }

    pub fn h2ex(g: Option<ScalarFn>, k: ScalarFn, l: ScalarFn, n: ScalarFn) -> Self {
        Self::new(NonlinearTerm::H2Ex { g, k, l, n })
    }

    /// H = −m.
    pub fn linear() -> Self {
        Self::h2(0.0, ScalarFn::zero(), ScalarFn::zero())
    }

    /// The H₂ term induced by `n`, with its variant and convention.
    pub fn matching_equivalence(n: &EquivalenceTransform) -> Self {
        let mut spec = Self::h2(n.a_hat, n.phi.clone(), n.rho.clone());
        spec.variant = n.variant;
        spec.convention = n.convention;
        spec.thresholds = n.thresholds;
        spec
    }

    /// The H₁ term (derived form) induced by `n`.
    pub fn matching_invariant(n: &InvariantTransform) -> Self {
        let mut spec = Self::h1(n.a, n.h1.clone(), n.h2.clone());
        spec.convention = n.convention;
        spec.thresholds = n.thresholds;
        spec
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    pub fn with_variant(mut self, variant: PhaseVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_convention(mut self, convention: ZConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Switches an H1 term to the given form; other terms are unchanged.
    pub fn with_form(mut self, new_form: H1Form) -> Self {
        if let NonlinearTerm::H1 { form, .. } = &mut self.term {
            *form = new_form;
        }
        self
    }

    pub fn term(&self) -> &NonlinearTerm {
        &self.term
    }

    fn uses_x(&self) -> bool {
        match &self.term {
            NonlinearTerm::H1 { a, .. } => *a != Complex64::new(1.0, 0.0),
            NonlinearTerm::H2 { a_hat, .. } => *a_hat != 0.0,
            NonlinearTerm::H2Ex { g, .. } => g.as_ref().is_some_and(|g| !g.is_zero()),
        }
    }

    fn uses_z(&self) -> bool {
        match &self.term {
            NonlinearTerm::H1 { h1, h2, .. } => !(h1.is_constant() && h2.is_constant()),
            NonlinearTerm::H2 { phi, rho, .. } => !(phi.is_constant() && rho.is_constant()),
            NonlinearTerm::H2Ex { k, l, n, .. } => !(k.is_zero() && l.is_zero() && n.is_constant()),
        }
    }

    /// What the field values must satisfy for H to be defined.
    pub fn requirements(&self) -> Requirements {
        Requirements {
            positive_x: self.uses_x(),
            nonzero_y: self.uses_z(),
            nonzero_moduli: false,
        }
    }

    pub fn describe(&self) -> String {
        let body = match &self.term {
            NonlinearTerm::H1 { a, h1, h2, form } => format!("a = {a}, h1 = {h1}, h2 = {h2}, form = {form:?}"),
            NonlinearTerm::H2 { a_hat, phi, rho } => format!("a_hat = {a_hat}, phi = {phi}, rho = {rho}"),
            NonlinearTerm::H2Ex { g, k, l, n } => {
                let g = g.as_ref().map_or("none".to_string(), |g| g.to_string().replace('z', "x"));
                format!("g = {g}, k = {k}, l = {l}, n = {n}")
            }
        };
        format!("{}({body}; m = {}, variant = {})", self.term.name(), self.mass, self.variant.name())
    }
}

/// X, Z and their four-gradients at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantGradient {
    pub x: f64,
    pub dx: [f64; 4],
    /// Zero when Z was not required.
    pub z: f64,
    pub dz: [f64; 4],
}

/// ∂_μX = 2 Re(ψ̄∂_μψ) and ∂_μZ by the quotient rule from ∂_μP, all from
/// the spinor gradients.
pub fn invariant_gradient(
    psi: &Spinor,
    grad: &[Spinor; 4],
    convention: ZConvention,
    thresholds: &Thresholds,
    req: Requirements,
) -> Result<InvariantGradient> {
    let x = bilinear_x(psi);
    if req.positive_x && !(x > thresholds.eps_x) {
        return Err(GaugeError::DegenerateInvariant(format!(
            "X = {x:.3e} ≤ ε_X = {:.1e}",
            thresholds.eps_x
        )));
    }
    let bar = gamma0_apply(psi);
    let dx: [f64; 4] = std::array::from_fn(|mu| 2.0 * bar.dot(&grad[mu]).re);
    let mut out = InvariantGradient {
        x,
        dx,
        z: 0.0,
        dz: [0.0; 4],
    };
    if req.nonzero_y {
        let p = pseudoscalar_p(psi);
        if !(p.abs() > thresholds.eps_z) {
            return Err(GaugeError::DegenerateInvariant(format!(
                "|Y| = {:.3e} ≤ ε_Z = {:.1e}",
                p.abs(),
                thresholds.eps_z
            )));
        }
        let sigma = convention.denominator(1.0);
        let c = &psi.0;
        let d = sigma * p;
        out.z = x / d;
        for mu in 0..4 {
            let g = &grad[mu].0;
            let cross = g[0].conj() * c[2] + c[0].conj() * g[2] + g[1].conj() * c[3] + c[1].conj() * g[3];
            let dd = -2.0 * sigma * cross.im;
            out.dz[mu] = (dx[mu] * d - x * dd) / (d * d);
        }
    }
    Ok(out)
}

/// H written as three pieces,
/// Hψ = (iγ^μ∂_μX)(cₓψ) + (iγ^μ∂_μZ)((α_z + β_zγ₅)ψ) + (α_m + β_mγ₅)ψ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub x: Complex64,
    pub z: (Complex64, Complex64),
    pub mass: (Complex64, Complex64),
}

impl Coefficients {
    /// The three pieces of Hψ in order (X term, Z term, mass term).
    pub fn terms(&self, psi: &Spinor, inv: &InvariantGradient) -> [Spinor; 3] {
        let g = gammas();
        let x_term = g.i_slash(&inv.dx).apply(&psi.scale(self.x));
        let z_term = if self.z == (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)) {
            Spinor::default()
        } else {
            g.i_slash(&inv.dz).apply(&scalar_pseudo_apply(self.z.0, self.z.1, psi))
        };
        let mass_term = scalar_pseudo_apply(self.mass.0, self.mass.1, psi);
        [x_term, z_term, mass_term]
    }

    pub fn apply(&self, psi: &Spinor, inv: &InvariantGradient) -> Spinor {
        let [a, b, c] = self.terms(psi, inv);
        a + b + c
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// exp(2θΓ) as (α, β) for Γ = iγ₅ (`WithI`) or γ₅ (`WithoutI`).
fn double_exponential(variant: PhaseVariant, theta: f64) -> (Complex64, Complex64) {
    variant.chiral(2.0 * theta)
}

/// The pseudoscalar unit Γ of the variant as a γ₅ coefficient.
fn pseudo_unit(variant: PhaseVariant) -> Complex64 {
    match variant {
        PhaseVariant::WithI => c(0.0, 1.0),
        PhaseVariant::WithoutI => c(1.0, 0.0),
    }
}

impl NonlinearTermSpec {
    /// The coefficients of H at X and Z (Z is ignored when not required).
    pub fn coefficients(&self, x: f64, z: f64) -> Result<Coefficients> {
        let m = self.mass;
        let x_inv = if self.uses_x() { 1.0 / x } else { 0.0 };
        match &self.term {
            NonlinearTerm::H1 { a, h1, h2, form } => {
                let (v1, v2) = (h1.eval_at(z)?, h2.eval_at(z)?);
                let (d1, d2) = (self.derivatives[0].eval_at(z)?, self.derivatives[1].eval_at(z)?);
                let x_coeff = if self.uses_x() { (a - 1.0) * 0.5 * x_inv } else { c(0.0, 0.0) };
                let (den, unit, sign) = match form {
                    H1Form::Derived => (v1 * v1 - v2 * v2, c(1.0, 0.0), -1.0),
                    H1Form::GammaProduct => (v1 * v1 + v2 * v2, c(0.0, -1.0), 1.0),
                };
                if !(den.norm() > DENOMINATOR_EPS) {
                    let which = if *form == H1Form::Derived { "h1² − h2²" } else { "h1² + h2²" };
                    return Err(GaugeError::DenominatorZero(format!("{which} = {den:.3e} at Z = {z}")));
                }
                // (h₁ ∓ h₂Γ)(h₁′ + h₂′Γ) and (h₁ + h₂Γ)² with Γ² = ±1
                let z_coeff = ((v1 * d1 + sign * v2 * d2) / den, unit * (v1 * d2 - d1 * v2) / den);
                let mass = (-m * (v1 * v1 - sign * v2 * v2) / den, -m * unit * 2.0 * v1 * v2 / den);
                Ok(Coefficients {
                    x: x_coeff,
                    z: z_coeff,
                    mass,
                })
            }
            NonlinearTerm::H2 { a_hat, rho, .. } => {
                let unit = pseudo_unit(self.variant);
                let dphi = self.derivatives[0].eval_real(z)?;
                let drho = self.derivatives[1].eval_real(z)?;
                let (alpha, beta) = double_exponential(self.variant, rho.eval_real(z)?);
                Ok(Coefficients {
                    x: c(0.0, 0.5 * a_hat * x_inv),
                    z: (c(0.0, dphi), unit * drho),
                    mass: (-m * alpha, -m * beta),
                })
            }
            NonlinearTerm::H2Ex { g, k, l, n } => {
                let unit = pseudo_unit(self.variant);
                let gx = match g {
                    Some(g) if self.uses_x() => g.eval_real(x)?,
                    _ => 0.0,
                };
                let (alpha, beta) = double_exponential(self.variant, n.eval_real(z)?);
                Ok(Coefficients {
                    x: c(0.0, gx),
                    z: (c(0.0, k.eval_real(z)?), unit * l.eval_real(z)?),
                    mass: (-m * alpha, -m * beta),
                })
            }
        }
    }

    /// The invariants and coefficients at one point.
    pub fn prepare(&self, psi: &Spinor, grad: &[Spinor; 4]) -> Result<(InvariantGradient, Coefficients)> {
        let inv = invariant_gradient(psi, grad, self.convention, &self.thresholds, self.requirements())?;
        let coeffs = self.coefficients(inv.x, inv.z)?;
        Ok((inv, coeffs))
    }

    /// H(ψ)ψ for whichever term this spec carries.
    pub fn eval(&self, psi: &Spinor, grad: &[Spinor; 4]) -> Result<Spinor> {
        let (inv, coeffs) = self.prepare(psi, grad)?;
        Ok(coeffs.apply(psi, &inv))
    }
}

fn expect_term(spec: &NonlinearTermSpec, name: &str) -> Result<()> {
    if spec.term.name() != name {
        return Err(GaugeError::InvalidSpec(format!("expected an {name} term, got {}", spec.term.name())));
    }
    Ok(())
}

/// H₁(ψ)ψ; `spec` must carry an H1 term.
pub fn eval_h1(psi: &Spinor, grad: &[Spinor; 4], spec: &NonlinearTermSpec) -> Result<Spinor> {
    expect_term(spec, "H1")?;
    spec.eval(psi, grad)
}

/// H₂(ψ)ψ; `spec` must carry an H2 term.
pub fn eval_h2(psi: &Spinor, grad: &[Spinor; 4], spec: &NonlinearTermSpec) -> Result<Spinor> {
    expect_term(spec, "H2")?;
    spec.eval(psi, grad)
}

/// H₂,ex(ψ)ψ; `spec` must carry an H2EX term.
pub fn eval_h2ex(psi: &Spinor, grad: &[Spinor; 4], spec: &NonlinearTermSpec) -> Result<Spinor> {
    expect_term(spec, "H2EX")?;
    spec.eval(psi, grad)
}
