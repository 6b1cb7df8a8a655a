use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GaugeError, Result};
use crate::expr::{MultiFn, ScalarFn};
use crate::fields::{EnergySign, PlaneWaveSpec, StencilOrder, WaveSum};
use crate::gamma::ZConvention;
use crate::nlde::{Region, SolutionSettings};
use crate::transforms::{
    CheckConfig, EquivalenceTransform, GeneralLSTransform, InvariantTransform, KMatrix, PhaseVariant, Transform,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Separability,
    Poincare,
    Equivalence,
    GroupLaw,
    SolutionMap,
    Reduction,
    All,
}

/// Every concrete suite, in execution order.
pub const ALL_SUITES: [SuiteName; 6] = [
    SuiteName::Separability,
    SuiteName::Poincare,
    SuiteName::Equivalence,
    SuiteName::GroupLaw,
    SuiteName::SolutionMap,
    SuiteName::Reduction,
];

impl SuiteName {
    pub fn name(self) -> &'static str {
        match self {
            SuiteName::Separability => "separability",
            SuiteName::Poincare => "poincare",
            SuiteName::Equivalence => "equivalence",
            SuiteName::GroupLaw => "group-law",
            SuiteName::SolutionMap => "solution-map",
            SuiteName::Reduction => "reduction",
            SuiteName::All => "all",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SuiteName {
    type Err = GaugeError;
    fn from_str(s: &str) -> Result<Self> {
        ALL_SUITES
            .iter()
            .chain(&[SuiteName::All])
            .find(|n| n.name() == s)
            .copied()
            .ok_or_else(|| {
                GaugeError::InvalidSpec(format!(
                    "unknown suite {s:?} (expected separability | poincare | equivalence | group-law | solution-map | reduction | all)"
                ))
            })
    }
}

fn one() -> [f64; 2] {
    [1.0, 0.0]
}

fn ident_c() -> [f64; 2] {
    [0.0, 1.0]
}

fn text(s: &str) -> String {
    s.to_string()
}

fn one_text() -> String {
    text("1")
}

fn zero_text() -> String {
    text("0")
}

fn ones4() -> [String; 4] {
    std::array::from_fn(|_| one_text())
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// One transformation; complex numbers are written `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyDecl {
    /// ψ_j ↦ R_j^a e^{bS_j} G_j(r₁, r₂, r₃, s₁, s₂, s₃).
    General {
        #[serde(default = "one")]
        a: [f64; 2],
        #[serde(default = "ident_c")]
        b: [f64; 2],
        #[serde(default = "ones4")]
        g: [String; 4],
    },
    /// ψ ↦ X^{(a−1)/2}(h₁(Z) + h₂(Z)γ₅)ψ.
    Invariant {
        #[serde(default = "one")]
        a: [f64; 2],
        #[serde(default = "one_text")]
        h1: String,
        #[serde(default = "zero_text")]
        h2: String,
        #[serde(default)]
        convention: ZConvention,
    },
    /// ψ ↦ X^{iâ/2} e^{iφ(Z)} exp(ρ(Z)Γ)ψ.
    Equivalence {
        #[serde(default)]
        a_hat: f64,
        #[serde(default = "zero_text")]
        phi: String,
        #[serde(default = "zero_text")]
        rho: String,
        #[serde(default)]
        variant: PhaseVariant,
        #[serde(default)]
        convention: ZConvention,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformDecl {
    pub name: String,
    #[serde(flatten)]
    pub family: FamilyDecl,
}

impl TransformDecl {
    pub fn build(&self) -> Result<Transform> {
        let ctx = |e: GaugeError| GaugeError::InvalidSpec(format!("transform {:?}: {e}", self.name));
        let t: Transform = match &self.family {
            FamilyDecl::General { a, b, g } => {
                let mut fns = Vec::with_capacity(4);
                for s in g {
                    fns.push(MultiFn::parse(s).map_err(|e| ctx(e.into()))?);
                }
                let fns: [MultiFn; 4] = fns.try_into().expect("four functions");
                GeneralLSTransform::new(KMatrix::new(complex(*a), complex(*b)), fns).into()
            }
            FamilyDecl::Invariant { a, h1, h2, convention } => InvariantTransform::new(
                complex(*a),
                ScalarFn::parse(h1).map_err(|e| ctx(e.into()))?,
                ScalarFn::parse(h2).map_err(|e| ctx(e.into()))?,
            )
            .with_convention(*convention)
            .into(),
            FamilyDecl::Equivalence {
                a_hat,
                phi,
                rho,
                variant,
                convention,
            } => {
                if !a_hat.is_finite() {
                    return Err(ctx(GaugeError::InvalidSpec("a_hat must be finite".into())));
                }
                EquivalenceTransform::new(
                    *a_hat,
                    ScalarFn::parse(phi).map_err(|e| ctx(e.into()))?,
                    ScalarFn::parse(rho).map_err(|e| ctx(e.into()))?,
                )
                .with_variant(*variant)
                .with_convention(*convention)
                .into()
            }
        };
        if let Transform::General(g) = &t {
            if g.k.det() == 0.0 {
                return Err(ctx(GaugeError::SingularK(0.0)));
            }
        }
        Ok(t)
    }
}

/// One term c·ψ_p of the source superposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveDecl {
    #[serde(default = "one")]
    pub coefficient: [f64; 2],
    #[serde(flatten)]
    pub spec: PlaneWaveSpec,
}

/// Source field, sample points and step ladder of the solution-map suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolutionDecl {
    pub waves: Vec<WaveDecl>,
    pub ladder: Vec<f64>,
    pub order: StencilOrder,
    pub points: usize,
    /// Points with |Z| above this are not used.
    pub z_max: f64,
    pub region: Region,
    /// Accepted distance of the fitted slope from the stencil order.
    pub slope_tolerance: f64,
    /// Bound on the linear residual of N(ψ′) at the finest step.
    pub certificate_tolerance: f64,
    /// Residual level a mismatched pair must stay above.
    pub plateau_floor: f64,
    /// A ladder whose residuals all lie below this is at rounding level
    /// and counts as converged whatever its fitted slope.
    pub rounding_floor: f64,
}

impl Default for SolutionDecl {
    fn default() -> Self {
        SolutionDecl {
            waves: vec![
                WaveDecl {
                    coefficient: one(),
                    spec: PlaneWaveSpec::new(1.0, [0.4, -0.3, 0.2], 0, EnergySign::Positive),
                },
                WaveDecl {
                    coefficient: [0.6, 0.4],
                    spec: PlaneWaveSpec::new(1.0, [-0.2, 0.5, 0.1], 0, EnergySign::Negative),
                },
            ],
            ladder: vec![4e-3, 2e-3, 1e-3],
            order: StencilOrder::Fourth,
            points: 24,
            z_max: 10.0,
            region: Region::default(),
            slope_tolerance: 0.15,
            certificate_tolerance: 1e-6,
            plateau_floor: 1e-3,
            rounding_floor: 1e-9,
        }
    }
}

impl SolutionDecl {
    pub fn source(&self) -> Result<WaveSum> {
        WaveSum::new(self.waves.iter().map(|w| (complex(w.coefficient), w.spec)).collect())
    }

    fn validate(&self) -> Result<()> {
        self.source()?;
        if self.ladder.len() < 3 {
            return Err(GaugeError::InvalidSpec("the step ladder needs at least 3 entries".into()));
        }
        if self.ladder.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(GaugeError::InvalidSpec("ladder steps must be positive".into()));
        }
        if self.points == 0 {
            return Err(GaugeError::InvalidSpec("solution.points must be ≥ 1".into()));
        }
        if self.region.extent.iter().any(|e| !(*e >= 0.0)) {
            return Err(GaugeError::InvalidSpec("region extents must be ≥ 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReductionDecl {
    /// Sampled spinors have Z in this interval.
    pub z_range: [f64; 2],
    pub samples: usize,
}

impl Default for ReductionDecl {
    fn default() -> Self {
        ReductionDecl {
            z_range: [-5.0, 5.0],
            samples: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default = "default_suites")]
    pub suites: Vec<SuiteName>,
    #[serde(default, rename = "transform")]
    pub transforms: Vec<TransformDecl>,
    #[serde(default)]
    pub solution: SolutionDecl,
    #[serde(default)]
    pub reduction: ReductionDecl,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_suites() -> Vec<SuiteName> {
    vec![SuiteName::All]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            check: CheckConfig::default(),
            suites: default_suites(),
            transforms: Vec::new(),
            solution: SolutionDecl::default(),
            reduction: ReductionDecl::default(),
            output: None,
        }
    }
}

impl RunConfig {
    /// The selected suites with `all` expanded, in execution order.
    pub fn selected(&self) -> Vec<SuiteName> {
        let set: BTreeSet<SuiteName> = self
            .suites
            .iter()
            .flat_map(|s| if *s == SuiteName::All { ALL_SUITES.to_vec() } else { vec![*s] })
            .collect();
        ALL_SUITES.iter().copied().filter(|s| set.contains(s)).collect()
    }

    /// Sets the phase variant of every equivalence-family declaration.
    pub fn override_variant(&mut self, v: PhaseVariant) {
        for t in &mut self.transforms {
            if let FamilyDecl::Equivalence { variant, .. } = &mut t.family {
                *variant = v;
            }
        }
    }

    /// Sampling and certificate settings of the solution-map suite.
    pub fn solution_settings(&self) -> SolutionSettings {
        let s = &self.solution;
        let mut sampling = self.check.with_samples(s.points);
        sampling.z_max = s.z_max;
        SolutionSettings {
            region: s.region,
            sampling,
            h: s.ladder.iter().copied().fold(f64::INFINITY, f64::min),
            order: s.order,
            tolerance: s.certificate_tolerance,
        }
    }

    pub fn build_transforms(&self) -> Result<Vec<(String, Transform)>> {
        self.transforms.iter().map(|t| Ok((t.name.clone(), t.build()?))).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.suites.is_empty() {
            return Err(GaugeError::InvalidSpec("no suite selected".into()));
        }
        self.check.validate()?;
        let mut names = BTreeSet::new();
        for t in &self.transforms {
            if !names.insert(t.name.as_str()) {
                return Err(GaugeError::InvalidSpec(format!("duplicate transform name {:?}", t.name)));
            }
            t.build()?;
        }
        let selected = self.selected();
        if selected.contains(&SuiteName::SolutionMap) {
            self.solution.validate()?;
        }
        if selected.contains(&SuiteName::Reduction) {
            let [lo, hi] = self.reduction.z_range;
            if !(lo < hi) || self.reduction.samples == 0 {
                return Err(GaugeError::InvalidSpec("reduction needs z_range[0] < z_range[1] and samples ≥ 1".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in ALL_SUITES.iter().chain(&[SuiteName::All]) {
            assert_eq!(s.name().parse::<SuiteName>().unwrap(), *s);
            assert_eq!(serde_json::to_string(s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("bogus".parse::<SuiteName>().is_err());
    }

    #[test]
    fn all_expands_in_order() {
        let cfg = RunConfig {
            suites: vec![SuiteName::Reduction, SuiteName::All, SuiteName::Poincare],
            ..RunConfig::default()
        };
        assert_eq!(cfg.selected(), ALL_SUITES.to_vec());
    }

    #[test]
    fn declarations_parse_from_json_with_defaults() {
        let json = r#"{
            "suites": ["equivalence"],
            "transform": [
                {"name": "id", "family": "equivalence"},
                {"name": "inv", "family": "invariant", "a": [3, 0], "h1": "z", "h2": "1"},
                {"name": "sep", "family": "general", "g": ["1 + 0.1*r2", "1", "1", "1"]}
            ]
        }"#;
        let cfg: RunConfig = serde_json::from_str(json).unwrap();
        cfg.validate().unwrap();
        let ts = cfg.build_transforms().unwrap();
        assert!(matches!(ts[0].1, Transform::Equivalence(_)));
        assert!(matches!(ts[2].1, Transform::General(_)));
        assert_eq!(cfg.check, CheckConfig::default());
    }

    #[test]
    fn invalid_declarations_are_rejected() {
        let bad_expr = r#"{"transform": [{"name": "x", "family": "equivalence", "rho": "foo(z)"}]}"#;
        let cfg: RunConfig = serde_json::from_str(bad_expr).unwrap();
        assert!(cfg.validate().is_err());
        let dup = r#"{"transform": [{"name": "x", "family": "equivalence"}, {"name": "x", "family": "equivalence"}]}"#;
        assert!(serde_json::from_str::<RunConfig>(dup).unwrap().validate().is_err());
        let none: RunConfig = serde_json::from_str(r#"{"suites": []}"#).unwrap();
        assert!(none.validate().is_err());
        let mut short = RunConfig::default();
        short.solution.ladder = vec![1e-3, 5e-4];
        assert!(short.validate().is_err());
    }
}
