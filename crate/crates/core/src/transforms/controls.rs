//! Transforms built to violate one condition each, so that every checker
//! is exercised on an input it must reject.

use num_complex::Complex64;

use super::check::PolarMap;
use super::{
    EquivalenceTransform, GaugeTransform, GeneralLSTransform, InvariantTransform, KMatrix, PhaseVariant,
    Requirements,
};
use crate::error::Result;
use crate::expr::{MultiFn, ScalarFn};
use crate::gamma::{polar_decompose, Spinor};

/// F₀ = (1 + R₀ + R₁) R₀ e^{iS₀}, other components unchanged. The additive
/// dependence on R₀ + R₁ breaks the scaling invariance of products.
#[derive(Clone, Copy, Debug, Default)]
pub struct NonSeparable;

impl PolarMap for NonSeparable {
    fn eval_polar(&self, r: [f64; 4], s: [f64; 4]) -> Result<Spinor> {
        let mut out = Spinor(std::array::from_fn(|j| Complex64::from_polar(r[j], s[j])));
        out[0] *= 1.0 + r[0] + r[1];
        Ok(out)
    }

    fn describe(&self) -> String {
        "control: F0 = (1 + R0 + R1) psi0".into()
    }
}

impl GaugeTransform for NonSeparable {
    fn apply(&self, psi: &Spinor) -> Result<Spinor> {
        let p = polar_decompose(psi);
        self.eval_polar(p.r, p.s)
    }

    fn requirements(&self) -> Requirements {
        Requirements::default()
    }

    fn describe(&self) -> String {
        PolarMap::describe(self)
    }
}

/// Separable but not built from X and Z: G₀ = 1 + 0.5 r₁.
pub fn poincare_breaking() -> GeneralLSTransform {
    let mut g: [MultiFn; 4] = std::array::from_fn(|_| MultiFn::one());
    g[0] = MultiFn::parse("1 + 0.5*r1").expect("static expression");
    GeneralLSTransform::new(KMatrix::identity(), g)
}

/// Invariant but rescaling the density (a = 2).
pub fn density_breaking_invariant() -> InvariantTransform {
    InvariantTransform::new(Complex64::new(2.0, 0.0), ScalarFn::constant(1.0), ScalarFn::zero())
}

/// The chiral factor without the imaginary unit, ρ = 0.3 z.
pub fn density_breaking_chiral() -> EquivalenceTransform {
    EquivalenceTransform::parse(0.0, "0", "0.3*z")
        .expect("static expression")
        .with_variant(PhaseVariant::WithoutI)
}
