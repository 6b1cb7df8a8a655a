//! Spinor-valued functions on Minkowski space, their finite-difference
//! four-gradients and the linear Dirac residual. Natural units, ħ = c = 1.

mod plane_wave;
mod sampled;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GaugeError, Result};
use crate::gamma::{gammas, Mat4, Spinor};
use crate::transforms::GaugeTransform;

pub use plane_wave::{plane_wave, EnergySign, PlaneWave, PlaneWaveSpec, WaveSum};
pub use sampled::{SampledField, SidecarMeta};

/// A spinor field evaluable at spacetime points x^μ = (t, x, y, z).
pub trait SpinorField: Send + Sync {
    fn eval(&self, x: &[f64; 4]) -> Result<Spinor>;

    fn describe(&self) -> String;

    /// The sampling grid, for fields known only at nodes.
    fn grid(&self) -> Option<&Grid4> {
        None
    }
}

impl<F: SpinorField + ?Sized> SpinorField for Arc<F> {
    fn eval(&self, x: &[f64; 4]) -> Result<Spinor> {
        (**self).eval(x)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }

    fn grid(&self) -> Option<&Grid4> {
        (**self).grid()
    }
}

/// A regular spacetime lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid4 {
    pub origin: [f64; 4],
    pub spacing: [f64; 4],
    pub extents: [usize; 4],
}

impl Grid4 {
    pub fn new(origin: [f64; 4], spacing: [f64; 4], extents: [usize; 4]) -> Result<Self> {
        let g = Grid4 {
            origin,
            spacing,
            extents,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.spacing.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(GaugeError::InvalidSpec("grid spacings must be positive".into()));
        }
        if self.extents.iter().any(|&n| n == 0) {
            return Err(GaugeError::InvalidSpec("grid extents must be positive".into()));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(GaugeError::InvalidSpec("grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, idx: [usize; 4]) -> [f64; 4] {
        std::array::from_fn(|mu| self.origin[mu] + idx[mu] as f64 * self.spacing[mu])
    }

    /// Row-major linear index (t slowest, z fastest).
    pub fn linear(&self, idx: [usize; 4]) -> usize {
        let e = self.extents;
        ((idx[0] * e[1] + idx[1]) * e[2] + idx[2]) * e[3] + idx[3]
    }

    pub fn unravel(&self, mut k: usize) -> [usize; 4] {
        let mut idx = [0; 4];
        for mu in (0..4).rev() {
            idx[mu] = k % self.extents[mu];
            k /= self.extents[mu];
        }
        idx
    }

    /// The node at `x`, if `x` lies on one (to 1e−9 of a spacing).
    pub fn node_at(&self, x: &[f64; 4]) -> Option<[usize; 4]> {
        let mut idx = [0; 4];
        for mu in 0..4 {
            let f = (x[mu] - self.origin[mu]) / self.spacing[mu];
            let r = f.round();
            if (f - r).abs() > 1e-9 || r < 0.0 || r as usize >= self.extents[mu] {
                return None;
            }
            idx[mu] = r as usize;
        }
        Some(idx)
    }
}

/// ψ(x) ≡ ψ₀.
#[derive(Clone, Copy, Debug)]
pub struct ConstantField(pub Spinor);

impl SpinorField for ConstantField {
    fn eval(&self, _: &[f64; 4]) -> Result<Spinor> {
        Ok(self.0)
    }

    fn describe(&self) -> String {
        "constant".into()
    }
}

/// A field given by a closure.
pub struct FnField<F>(pub F, pub String);

impl<F> SpinorField for FnField<F>
where
    F: Fn(&[f64; 4]) -> Result<Spinor> + Send + Sync,
{
    fn eval(&self, x: &[f64; 4]) -> Result<Spinor> {
        (self.0)(x)
    }

    fn describe(&self) -> String {
        self.1.clone()
    }
}

/// x ↦ T(ψ(x)), evaluated exactly so derivatives see the true composite.
#[derive(Clone)]
pub struct Transformed {
    pub field: Arc<dyn SpinorField>,
    pub transform: Arc<dyn GaugeTransform>,
}

impl Transformed {
    pub fn new(field: Arc<dyn SpinorField>, transform: Arc<dyn GaugeTransform>) -> Self {
        Transformed { field, transform }
    }
}

impl SpinorField for Transformed {
    fn eval(&self, x: &[f64; 4]) -> Result<Spinor> {
        self.transform.apply(&self.field.eval(x)?)
    }

    fn describe(&self) -> String {
        format!("{} applied to {}", self.transform.describe(), self.field.describe())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum StencilOrder {
    Second,
    #[default]
    Fourth,
}

impl StencilOrder {
    pub fn order(self) -> u8 {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }

    pub fn radius(self) -> usize {
        match self {
            StencilOrder::Second => 1,
            StencilOrder::Fourth => 2,
        }
    }

    /// Antisymmetric taps (k, w): ∂f ≈ Σ w (f(x + kh) − f(x − kh)) / h.
    fn taps(self) -> &'static [(f64, f64)] {
        match self {
            StencilOrder::Second => &[(1.0, 0.5)],
            StencilOrder::Fourth => &[(1.0, 2.0 / 3.0), (2.0, -1.0 / 12.0)],
        }
    }
}

impl TryFrom<u8> for StencilOrder {
    type Error = GaugeError;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            2 => Ok(StencilOrder::Second),
            4 => Ok(StencilOrder::Fourth),
            other => Err(GaugeError::InvalidSpec(format!("stencil order {other} not in {{2, 4}}"))),
        }
    }
}

impl From<StencilOrder> for u8 {
    fn from(o: StencilOrder) -> u8 {
        o.order()
    }
}

/// Central-difference ∂_μψ, μ = 0…3, at `x`.
///
/// For sampled fields `x` must be a node, `h` a whole multiple of the
/// spacing in every direction, and the stencil must fit in the grid.
pub fn four_gradient(field: &dyn SpinorField, x: &[f64; 4], h: f64, order: StencilOrder) -> Result<[Spinor; 4]> {
    if !(h > 0.0) {
        return Err(GaugeError::InvalidSpec(format!("step h = {h} must be positive")));
    }
    if let Some(grid) = field.grid() {
        check_stencil(grid, x, h, order)?;
    }
    let mut grad = [Spinor::default(); 4];
    for (mu, g) in grad.iter_mut().enumerate() {
        let mut acc = Spinor::default();
        for &(k, weight) in order.taps() {
            let mut fwd = *x;
            let mut bwd = *x;
            fwd[mu] += k * h;
            bwd[mu] -= k * h;
            acc += (weight / h) * (field.eval(&fwd)? - field.eval(&bwd)?);
        }
        *g = acc;
    }
    Ok(grad)
}

fn check_stencil(grid: &Grid4, x: &[f64; 4], h: f64, order: StencilOrder) -> Result<()> {
    let idx = grid
        .node_at(x)
        .ok_or_else(|| GaugeError::OutOfDomain(format!("{x:?} is not a grid node")))?;
    for mu in 0..4 {
        let steps = h / grid.spacing[mu];
        let n = steps.round();
        if n < 1.0 || (steps - n).abs() > 1e-9 * steps {
            return Err(GaugeError::InvalidSpec(format!(
                "h = {h} is not a multiple of spacing {} along axis {mu}",
                grid.spacing[mu]
            )));
        }
        let reach = n as usize * order.radius();
        if idx[mu] < reach || idx[mu] + reach >= grid.extents[mu] {
            return Err(GaugeError::OutOfDomain(format!(
                "stencil of radius {reach} leaves the grid along axis {mu} at index {}",
                idx[mu]
            )));
        }
    }
    Ok(())
}

/// iγ^μ ∂_μ ψ for given gradients.
pub fn dirac_kinetic(grad: &[Spinor; 4]) -> Spinor {
    let g = gammas();
    let mut out = Spinor::default();
    for mu in 0..4 {
        out += Mat4::apply(&g.upper[mu], &grad[mu]).scale(crate::gamma::I);
    }
    out
}

/// (iγ^μ∂_μ − m)ψ at `x` with finite-difference derivatives.
pub fn linear_dirac_residual(
    field: &dyn SpinorField,
    m: f64,
    x: &[f64; 4],
    h: f64,
    order: StencilOrder,
) -> Result<Spinor> {
    let grad = four_gradient(field, x, h, order)?;
    let psi = field.eval(x)?;
    Ok(dirac_kinetic(&grad) - m * psi)
}
