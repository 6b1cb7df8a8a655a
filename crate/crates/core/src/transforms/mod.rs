//! The three transformation families: local separable maps labelled by a
//! K matrix and four functions G_j, the Poincaré-invariant subfamily
//! (a, h₁, h₂), and the density-preserving subfamily (â, φ, ρ).
//!
//! Every family implements [`GaugeTransform`], which is what the
//! condition checkers in [`check`] consume.

pub mod check;
pub mod controls;
mod equivalence;
mod general;
pub mod group;
mod invariant;
mod kmatrix;
mod pointwise;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gamma::Spinor;

pub use check::{check_equivalence, check_poincare, check_separability, CheckConfig};
pub use equivalence::{compose_equivalence, invert_equivalence, EquivalenceTransform, PhaseVariant};
pub use general::{compose_general, GeneralLSTransform};
pub use invariant::{lower_invariant_to_general, Gamma5Coefficient, InvariantTransform};
pub use kmatrix::KMatrix;
pub use pointwise::PointwiseInverse;

/// Thresholds applied when a transform is evaluated on a single spinor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Smallest admissible X when ln X or a complex power of X is formed.
    pub eps_x: f64,
    /// Smallest admissible |Y| when Z is formed.
    pub eps_z: f64,
    /// Smallest admissible modulus R_j.
    pub eps_r: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            eps_x: 1e-10,
            eps_z: crate::gamma::DEFAULT_EPS_Z,
            eps_r: 1e-10,
        }
    }
}

/// What a transform needs of its input; samplers reject spinors that
/// do not meet it, with the sampling epsilons of [`CheckConfig`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirements {
    pub positive_x: bool,
    pub nonzero_y: bool,
    pub nonzero_moduli: bool,
}

impl Requirements {
    pub fn union(self, other: Requirements) -> Requirements {
        Requirements {
            positive_x: self.positive_x || other.positive_x,
            nonzero_y: self.nonzero_y || other.nonzero_y,
            nonzero_moduli: self.nonzero_moduli || other.nonzero_moduli,
        }
    }
}

/// A pointwise map on spinor values.
pub trait GaugeTransform: Send + Sync {
    fn apply(&self, psi: &Spinor) -> Result<Spinor>;

    fn requirements(&self) -> Requirements;

    fn describe(&self) -> String;

    /// The local separable form, when the transform carries one explicitly.
    fn as_general(&self) -> Option<&GeneralLSTransform> {
        None
    }
}

/// Any member of the three families.
#[derive(Clone, Debug)]
pub enum Transform {
    General(GeneralLSTransform),
    Invariant(InvariantTransform),
    Equivalence(EquivalenceTransform),
}

impl Transform {
    /// The local separable representative, lowering through the invariant
    /// family where needed.
    pub fn to_general(&self) -> GeneralLSTransform {
        match self {
            Transform::General(g) => g.clone(),
            Transform::Invariant(n) => n.lower(Gamma5Coefficient::One),
            Transform::Equivalence(n) => n.to_invariant().lower(Gamma5Coefficient::One),
        }
    }

    fn inner(&self) -> &dyn GaugeTransform {
        match self {
            Transform::General(g) => g,
            Transform::Invariant(n) => n,
            Transform::Equivalence(n) => n,
        }
    }
}

impl GaugeTransform for Transform {
    fn apply(&self, psi: &Spinor) -> Result<Spinor> {
        self.inner().apply(psi)
    }

    fn requirements(&self) -> Requirements {
        self.inner().requirements()
    }

    fn describe(&self) -> String {
        self.inner().describe()
    }

    fn as_general(&self) -> Option<&GeneralLSTransform> {
        self.inner().as_general()
    }
}

impl From<GeneralLSTransform> for Transform {
    fn from(g: GeneralLSTransform) -> Self {
        Transform::General(g)
    }
}

impl From<InvariantTransform> for Transform {
    fn from(n: InvariantTransform) -> Self {
        Transform::Invariant(n)
    }
}

impl From<EquivalenceTransform> for Transform {
    fn from(n: EquivalenceTransform) -> Self {
        Transform::Equivalence(n)
    }
}
