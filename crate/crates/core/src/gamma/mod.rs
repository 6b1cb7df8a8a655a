//! Clifford algebra in the Dirac representation, spinor bilinears, polar
//! decomposition and finite spin transformations.
//!
//! Index conventions: the metric is diag(+1, −1, −1, −1) and
//! [`GammaSet::upper`] holds γ^μ with γ^0 = diag(1, 1, −1, −1). The chirality
//! matrix is γ₅ = iγ⁰γ¹γ²γ³, which in this representation swaps the upper
//! and lower two-component blocks.

mod matrix;

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::GaugeError;

pub use matrix::{expm, Mat4, Spinor};
pub(crate) use matrix::{I, ONE, ZERO};

/// Minkowski metric signature (+, −, −, −).
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// v_μ = g_{μν} v^ν. The only place the metric raises or lowers an index.
pub fn lower_index(v: [f64; 4]) -> [f64; 4] {
    std::array::from_fn(|mu| METRIC[mu] * v[mu])
}

/// Componentwise index map realised by γ₅: 0↦2, 1↦3, 2↦0, 3↦1.
pub const J: [usize; 4] = [2, 3, 0, 1];

/// The fixed gamma-matrix convention used throughout the crate.
#[derive(Clone, Debug)]
pub struct GammaSet {
    /// γ^μ, μ = 0…3.
    pub upper: [Mat4; 4],
    /// γ_μ = g_{μν} γ^ν.
    pub lower: [Mat4; 4],
    pub gamma5: Mat4,
}

impl GammaSet {
    fn dirac() -> Self {
        let (o, l, i) = (ZERO, ONE, I);
        let g0 = Mat4::diag([l, l, -l, -l]);
        let g1 = Mat4([[o, o, o, l], [o, o, l, o], [o, -l, o, o], [-l, o, o, o]]);
        let g2 = Mat4([[o, o, o, -i], [o, o, i, o], [o, i, o, o], [-i, o, o, o]]);
        let g3 = Mat4([[o, o, l, o], [o, o, o, -l], [-l, o, o, o], [o, l, o, o]]);
        let upper = [g0, g1, g2, g3];
        let lower = std::array::from_fn(|mu| upper[mu].scale(Complex64::new(METRIC[mu], 0.0)));
        let gamma5 = (g0 * g1 * g2 * g3).scale(I);
        GammaSet {
            upper,
            lower,
            gamma5,
        }
    }

    /// i γ^μ v_μ for a covariant four-vector v_μ (e.g. ∂_μ f).
    pub fn i_slash(&self, v_lower: &[f64; 4]) -> Mat4 {
        let mut m = Mat4::zero();
        for mu in 0..4 {
            m = m + self.upper[mu].scale(Complex64::new(0.0, v_lower[mu]));
        }
        m
    }

    /// γ^μ p_μ for a covariant momentum p_μ.
    pub fn slash(&self, p_lower: &[f64; 4]) -> Mat4 {
        let mut m = Mat4::zero();
        for mu in 0..4 {
            m = m + self.upper[mu].scale(Complex64::new(p_lower[mu], 0.0));
        }
        m
    }
}

/// The process-wide Dirac-representation gamma set.
pub fn gammas() -> &'static GammaSet {
    static SET: OnceLock<GammaSet> = OnceLock::new();
    SET.get_or_init(GammaSet::dirac)
}

/// γ₅ψ evaluated by the component permutation J.
pub fn gamma5_apply(psi: &Spinor) -> Spinor {
    Spinor(std::array::from_fn(|j| psi.0[J[j]]))
}

/// γ⁰ψ (the Dirac adjoint is ψ̄ = (γ⁰ψ)†).
pub fn gamma0_apply(psi: &Spinor) -> Spinor {
    Spinor([psi.0[0], psi.0[1], -psi.0[2], -psi.0[3]])
}

/// (a + bγ₅)ψ.
pub fn scalar_pseudo_apply(a: Complex64, b: Complex64, psi: &Spinor) -> Spinor {
    let g5 = gamma5_apply(psi);
    Spinor(std::array::from_fn(|j| a * psi.0[j] + b * g5.0[j]))
}

/// Scalar bilinear X = ψ̄ψ = |ψ₀|² + |ψ₁|² − |ψ₂|² − |ψ₃|².
pub fn bilinear_x(psi: &Spinor) -> f64 {
    let c = &psi.0;
    c[0].norm_sqr() + c[1].norm_sqr() - c[2].norm_sqr() - c[3].norm_sqr()
}

/// Pseudoscalar bilinear Y = ψ̄γ₅ψ. Purely imaginary in this representation;
/// the real part is exactly zero by construction.
pub fn bilinear_y(psi: &Spinor) -> Complex64 {
    Complex64::new(0.0, 2.0 * cross_im(psi))
}

/// Real pseudoscalar P = ψ̄(iγ₅)ψ = iY.
pub fn pseudoscalar_p(psi: &Spinor) -> f64 {
    -2.0 * cross_im(psi)
}

fn cross_im(psi: &Spinor) -> f64 {
    let c = &psi.0;
    (c[0].conj() * c[2] + c[1].conj() * c[3]).im
}

/// ψ̄Mφ for arbitrary spinors (used for bilinear derivatives).
pub fn adjoint_sandwich(left: &Spinor, m: &Mat4, right: &Spinor) -> Complex64 {
    gamma0_apply(left).dot(&m.apply(right))
}

/// How the real variable Z is formed from X and Y.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZConvention {
    /// Z = X / P with the real pseudoscalar P = ψ̄(iγ₅)ψ.
    #[default]
    Pseudoscalar,
    /// Z = X / Im(Y): the imaginary unit of Y = ψ̄γ₅ψ factored out.
    ImaginaryPart,
}

impl ZConvention {
    /// The real denominator of Z for a given P; Im(Y) = −P.
    pub fn denominator(self, p: f64) -> f64 {
        match self {
            ZConvention::Pseudoscalar => p,
            ZConvention::ImaginaryPart => -p,
        }
    }

    /// Sign κ with P/X = κ/Z, so that X(cos 2ρ + κ sin 2ρ / Z) is the
    /// scalar after a chiral rotation e^{iργ₅}.
    pub fn kappa(self) -> f64 {
        match self {
            ZConvention::Pseudoscalar => 1.0,
            ZConvention::ImaginaryPart => -1.0,
        }
    }
}

/// Default degeneracy threshold on |Y| for forming Z.
pub const DEFAULT_EPS_Z: f64 = 1e-10;

/// The real invariant ratio Z built from X and Y.
pub fn z_argument(psi: &Spinor, convention: ZConvention, eps_z: f64) -> Result<f64, GaugeError> {
    let p = pseudoscalar_p(psi);
    if p.abs() <= eps_z {
        return Err(GaugeError::DegenerateInvariant(format!(
            "|Y| = {:.3e} ≤ ε_Z = {eps_z:.1e}",
            p.abs()
        )));
    }
    Ok(bilinear_x(psi) / convention.denominator(p))
}

/// Componentwise moduli and phases, ψ_j = R_j e^{iS_j}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarForm {
    pub r: [f64; 4],
    pub s: [f64; 4],
}

impl PolarForm {
    pub fn to_spinor(&self) -> Spinor {
        Spinor(std::array::from_fn(|j| Complex64::from_polar(self.r[j], self.s[j])))
    }
}

/// Principal argument in (−π, π]; zero for a vanishing value.
pub fn principal_arg(c: Complex64) -> f64 {
    if c.re == 0.0 && c.im == 0.0 {
        return 0.0;
    }
    let a = c.im.atan2(c.re);
    if a <= -PI {
        PI
    } else {
        a
    }
}

pub fn polar_decompose(psi: &Spinor) -> PolarForm {
    PolarForm {
        r: psi.0.map(|c| c.norm()),
        s: psi.0.map(principal_arg),
    }
}

/// Six independent generator weights α_{μν}, μ < ν, in the order
/// (01, 02, 03, 12, 13, 23).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LorentzParams(pub [f64; 6]);

impl LorentzParams {
    pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

    pub fn single(mu: usize, nu: usize, value: f64) -> Self {
        let mut a = [0.0; 6];
        let idx = Self::PAIRS
            .iter()
            .position(|&p| p == (mu.min(nu), mu.max(nu)))
            .expect("μ ≠ ν in 0..4");
        a[idx] = if mu < nu { value } else { -value };
        LorentzParams(a)
    }

    /// Σ_{μ≠ν} α_{μν} γ_μγ_ν with α_{νμ} = −α_{μν}.
    pub fn generator(&self) -> Mat4 {
        let g = gammas();
        let mut m = Mat4::zero();
        for (k, &(mu, nu)) in Self::PAIRS.iter().enumerate() {
            // α_{μν}γ_μγ_ν + α_{νμ}γ_νγ_μ = 2α_{μν}γ_μγ_ν for μ ≠ ν
            m = m + (g.lower[mu] * g.lower[nu]).scale(Complex64::new(2.0 * self.0[k], 0.0));
        }
        m
    }
}

/// U = exp Σ_{μ≠ν} α_{μν} γ_μ γ_ν.
pub fn lorentz_spin_element(alpha: &LorentzParams) -> Mat4 {
    expm(&alpha.generator())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn clifford_relations_are_exact() {
        let g = gammas();
        for mu in 0..4 {
            for nu in 0..4 {
                let expected = if mu == nu {
                    Mat4::identity().scale(c(2.0 * METRIC[mu], 0.0))
                } else {
                    Mat4::zero()
                };
                assert_eq!(g.lower[mu].anticommutator(&g.lower[nu]), expected);
                assert_eq!(g.upper[mu].anticommutator(&g.upper[nu]), expected);
            }
            assert_eq!(g.gamma5.anticommutator(&g.upper[mu]), Mat4::zero());
        }
        assert_eq!(g.gamma5 * g.gamma5, Mat4::identity());
        assert_eq!(g.gamma5.adjoint(), g.gamma5);
    }

    #[test]
    fn gamma5_is_the_j_permutation() {
        let psi = Spinor([c(1.0, 2.0), c(3.0, -1.0), c(-0.5, 0.0), c(0.0, 7.0)]);
        assert_eq!(gammas().gamma5.apply(&psi), gamma5_apply(&psi));
    }

    #[test]
    fn bilinear_examples() {
        let e0 = Spinor([ONE, ZERO, ZERO, ZERO]);
        assert_eq!(bilinear_x(&e0), 1.0);
        assert_eq!(bilinear_y(&e0), ZERO);
        let e2 = Spinor([ZERO, ZERO, ONE, ZERO]);
        assert_eq!(bilinear_x(&e2), -1.0);
        let psi = Spinor([ONE, ZERO, ONE, ZERO]);
        assert_eq!(bilinear_y(&psi), ZERO);
        // oracle: ψ†γ⁰γ₅ψ as a plain matrix product
        let g = gammas();
        let psi = Spinor([ONE, ZERO, I, ZERO]);
        let direct = psi.dot(&(g.upper[0] * g.gamma5).apply(&psi));
        assert!((bilinear_y(&psi) - direct).norm() < 1e-15);
        assert!((bilinear_y(&psi) - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn z_argument_paths() {
        let psi = Spinor([c(1.0, 0.0), ZERO, c(1.0, 0.0), ZERO]);
        assert!(matches!(
            z_argument(&psi, ZConvention::Pseudoscalar, DEFAULT_EPS_Z),
            Err(GaugeError::DegenerateInvariant(_))
        ));
        // X = 0 with Y ≠ 0
        let psi = Spinor([ONE, ZERO, I, ZERO]);
        assert_eq!(z_argument(&psi, ZConvention::Pseudoscalar, DEFAULT_EPS_Z).unwrap(), 0.0);
        let psi = Spinor([c(2.0, 0.0), ZERO, c(0.0, 1.0), ZERO]);
        let zp = z_argument(&psi, ZConvention::Pseudoscalar, DEFAULT_EPS_Z).unwrap();
        let zq = z_argument(&psi, ZConvention::ImaginaryPart, DEFAULT_EPS_Z).unwrap();
        // X = 3, Y = 2i·Im(2·i) = 4i → P = −4
        assert_eq!(zp, -0.75);
        assert_eq!(zq, 0.75);
    }

    #[test]
    fn polar_examples() {
        let p = polar_decompose(&Spinor([ONE, ZERO, ZERO, ZERO]));
        assert_eq!(p.r, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.s, [0.0; 4]);
        let p = polar_decompose(&Spinor([I, -ONE, ZERO, ZERO]));
        assert_eq!(p.r, [1.0, 1.0, 0.0, 0.0]);
        assert_eq!(p.s, [PI / 2.0, PI, 0.0, 0.0]);
        assert_eq!(principal_arg(c(-1.0, -0.0)), PI);
    }

    #[test]
    fn spin_element_closed_forms() {
        assert!((lorentz_spin_element(&LorentzParams::default()) - Mat4::identity()).max_abs() < 1e-15);
        let g = gammas();
        // (γ₀γ₁)² = 1 ⇒ exp(η γ₀γ₁) = cosh η + sinh η γ₀γ₁
        let eta = 0.7;
        let u = lorentz_spin_element(&LorentzParams::single(0, 1, eta / 2.0));
        let g01 = g.lower[0] * g.lower[1];
        let closed = Mat4::identity().scale(c(eta.cosh(), 0.0)) + g01.scale(c(eta.sinh(), 0.0));
        assert!((u - closed).max_abs() < 1e-14);
        assert!((u.adjoint() * u - Mat4::identity()).max_abs() > 0.1);
        // (γ₁γ₂)² = −1 ⇒ exp(θ γ₁γ₂) = cos θ + sin θ γ₁γ₂, unitary
        let theta = 1.3;
        let u = lorentz_spin_element(&LorentzParams::single(1, 2, theta / 2.0));
        let g12 = g.lower[1] * g.lower[2];
        let closed = Mat4::identity().scale(c(theta.cos(), 0.0)) + g12.scale(c(theta.sin(), 0.0));
        assert!((u - closed).max_abs() < 1e-14);
        assert!((u.adjoint() * u - Mat4::identity()).max_abs() < 1e-14);
        assert!(u.det().norm() > 0.5);
    }
}
