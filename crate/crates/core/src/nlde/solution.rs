use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::residual::{residual_ladder, sample_points, Region, ResidualReport};
use super::NonlinearTermSpec;
use crate::error::{GaugeError, Result};
use crate::fields::{linear_dirac_residual, SpinorField, StencilOrder, Transformed, WaveSum};
use crate::transforms::{
    CheckConfig, EquivalenceTransform, GaugeTransform, InvariantTransform, PhaseVariant, PointwiseInverse,
};

/// A transform whose inverse maps free solutions to NLDE solutions.
#[derive(Clone, Debug, PartialEq)]
pub enum SolutionMap {
    Equivalence(EquivalenceTransform),
    Invariant(InvariantTransform),
}

impl SolutionMap {
    fn forward(&self) -> Arc<dyn GaugeTransform> {
        match self {
            SolutionMap::Equivalence(n) => Arc::new(n.clone()),
            SolutionMap::Invariant(n) => Arc::new(n.clone()),
        }
    }

    /// The group-law inverse (verified on samples of `cfg`) for the
    /// equivalence family, a Newton inverse for the invariant family.
    fn inverse(&self, cfg: &CheckConfig) -> Result<Arc<dyn GaugeTransform>> {
        Ok(match self {
            SolutionMap::Equivalence(n) => Arc::new(n.invert(cfg)?),
            SolutionMap::Invariant(n) => Arc::new(PointwiseInverse::new(n.clone())),
        })
    }

    /// The H term this map induces (H₂ or H₁ in derived form).
    pub fn matching_spec(&self, mass: f64) -> NonlinearTermSpec {
        match self {
            SolutionMap::Equivalence(n) => NonlinearTermSpec::matching_equivalence(n),
            SolutionMap::Invariant(n) => NonlinearTermSpec::matching_invariant(n),
        }
        .with_mass(mass)
    }

    pub fn describe(&self) -> String {
        self.forward().describe()
    }
}

impl From<EquivalenceTransform> for SolutionMap {
    fn from(n: EquivalenceTransform) -> Self {
        SolutionMap::Equivalence(n)
    }
}

impl From<InvariantTransform> for SolutionMap {
    fn from(n: InvariantTransform) -> Self {
        SolutionMap::Invariant(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSettings {
    pub region: Region,
    /// Seed, point count and degeneracy margins for the sample points;
    /// also the samples on which a group inverse is verified.
    pub sampling: CheckConfig,
    pub h: f64,
    pub order: StencilOrder,
    /// Bound on the certificate's linear residual.
    pub tolerance: f64,
}

impl Default for SolutionSettings {
    fn default() -> Self {
        let mut sampling = CheckConfig::default().with_samples(32);
        sampling.z_max = 10.0;
        SolutionSettings {
            region: Region::default(),
            sampling,
            h: 1e-3,
            order: StencilOrder::Fourth,
            tolerance: 1e-6,
        }
    }
}

/// Evidence that ψ' = N⁻¹ψ is what it claims to be: N(ψ') reproduces ψ
/// and solves the linear equation at the sample points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub points: usize,
    /// max ‖N(ψ') − ψ‖ / max(1, ‖ψ‖).
    pub round_trip: f64,
    /// max ‖(iγ^μ∂_μ − m) N(ψ')‖ with finite differences.
    pub linear_residual: f64,
    pub h: f64,
    pub order: u8,
    pub tolerance: f64,
    pub passed: bool,
}

pub struct TransformedSolution {
    /// ψ' = N⁻¹ψ, evaluated analytically point by point.
    pub field: Arc<dyn SpinorField>,
    pub source: Arc<dyn SpinorField>,
    pub map: SolutionMap,
    /// The matching nonlinear term.
    pub spec: NonlinearTermSpec,
    /// Points where ψ' and its invariants are admissible.
    pub points: Vec<[f64; 4]>,
    pub certificate: Certificate,
}

/// Maps a free solution through N⁻¹ and certifies the result. Fails with
/// `DegenerateInvariant` when no sample point is admissible (e.g. a single
/// plane wave, whose Y vanishes identically, under a Z-dependent N).
pub fn transform_solution(source: &WaveSum, map: &SolutionMap, settings: &SolutionSettings) -> Result<TransformedSolution> {
    let forward = map.forward();
    let inverse = map.inverse(&settings.sampling)?;
    let source_field: Arc<dyn SpinorField> = Arc::new(source.clone());
    let field: Arc<dyn SpinorField> = Arc::new(Transformed::new(source_field.clone(), inverse));
    let spec = map.matching_spec(source.mass());
    let req = forward.requirements().union(spec.requirements());
    let points = sample_points(field.as_ref(), &settings.region, &settings.sampling, req);
    if points.is_empty() {
        return Err(GaugeError::DegenerateInvariant(format!(
            "no admissible point among {} samples of {}",
            settings.sampling.sample_count,
            source.describe()
        )));
    }

    let recovered = Transformed::new(field.clone(), forward);
    let mut round_trip = 0.0f64;
    let mut linear = 0.0f64;
    for x in &points {
        let psi = source_field.eval(x)?;
        let back = recovered.eval(x)?;
        round_trip = round_trip.max((back - psi).norm() / psi.norm().max(1.0));
        let r = linear_dirac_residual(&recovered, source.mass(), x, settings.h, settings.order)?;
        linear = linear.max(r.norm());
    }
    let certificate = Certificate {
        points: points.len(),
        round_trip,
        linear_residual: linear,
        h: settings.h,
        order: settings.order.order(),
        tolerance: settings.tolerance,
        passed: round_trip <= 1e-9 && linear <= settings.tolerance,
    };
    Ok(TransformedSolution {
        field,
        source: source_field,
        map: map.clone(),
        spec,
        points,
        certificate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingEntry {
    pub transform_variant: PhaseVariant,
    pub operator_variant: PhaseVariant,
    pub report: ResidualReport,
    pub converges: bool,
}

/// All four (transform variant, operator variant) pairings on one source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingResult {
    pub entries: Vec<PairingEntry>,
    /// The pairings whose residual converges at the stencil order.
    pub self_consistent: Vec<(PhaseVariant, PhaseVariant)>,
}

/// Maps `source` through the inverse of `n` under each phase variant and
/// measures the H₂ residual under each operator variant.
pub fn variant_pairing(
    source: &WaveSum,
    n: &EquivalenceTransform,
    settings: &SolutionSettings,
    ladder: &[f64],
    slope_tolerance: f64,
) -> Result<PairingResult> {
    let variants = [PhaseVariant::WithI, PhaseVariant::WithoutI];
    let mut entries = Vec::new();
    for tv in variants {
        let map = SolutionMap::Equivalence(n.clone().with_variant(tv));
        let sol = transform_solution(source, &map, settings)?;
        for ov in variants {
            let spec = sol.spec.clone().with_variant(ov);
            let report = residual_ladder(sol.field.as_ref(), &spec, &sol.points, ladder, settings.order);
            let converges = report.slope_matches_order(slope_tolerance);
            entries.push(PairingEntry {
                transform_variant: tv,
                operator_variant: ov,
                report,
                converges,
            });
        }
    }
    let self_consistent = entries
        .iter()
        .filter(|e| e.converges)
        .map(|e| (e.transform_variant, e.operator_variant))
        .collect();
    Ok(PairingResult { entries, self_consistent })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::expr::ScalarFn;
    use crate::fields::{EnergySign, PlaneWaveSpec};

    const LADDER: [f64; 3] = [4e-3, 2e-3, 1e-3];

    fn source() -> WaveSum {
        WaveSum::new(vec![
            (Complex64::new(1.0, 0.0), PlaneWaveSpec::new(1.0, [0.4, -0.3, 0.2], 0, EnergySign::Positive)),
            (Complex64::new(0.6, 0.4), PlaneWaveSpec::new(1.0, [-0.2, 0.5, 0.1], 0, EnergySign::Negative)),
        ])
        .unwrap()
    }

    #[test]
    fn identity_map_returns_the_source() {
        let sol = transform_solution(&source(), &EquivalenceTransform::identity().into(), &SolutionSettings::default())
            .unwrap();
        for x in &sol.points {
            assert_eq!(sol.field.eval(x).unwrap(), sol.source.eval(x).unwrap());
        }
        assert!(sol.certificate.passed, "{:?}", sol.certificate);
    }

    #[test]
    fn phase_only_map_keeps_the_density() {
        let n = EquivalenceTransform::new(0.7, ScalarFn::zero(), ScalarFn::zero());
        let sol = transform_solution(&source(), &n.into(), &SolutionSettings::default()).unwrap();
        for x in &sol.points {
            let (a, b) = (sol.field.eval(x).unwrap(), sol.source.eval(x).unwrap());
            assert!((a.density() - b.density()).abs() < 1e-12);
            assert!((a - b).norm() > 1e-6);
        }
    }

    #[test]
    fn single_plane_wave_is_rejected_for_z_dependent_maps() {
        let single = WaveSum::new(vec![(
            Complex64::new(1.0, 0.0),
            PlaneWaveSpec::new(1.0, [0.0; 3], 0, EnergySign::Positive),
        )])
        .unwrap();
        let n = EquivalenceTransform::parse(0.0, "0.1*z", "0").unwrap();
        assert!(matches!(
            transform_solution(&single, &n.into(), &SolutionSettings::default()),
            Err(GaugeError::DegenerateInvariant(_))
        ));
    }

    #[test]
    fn generic_equivalence_map_solves_h2() {
        let n = EquivalenceTransform::parse(0.5, "0.1*z", "0.3*z/(1 + z^2)").unwrap();
        let sol = transform_solution(&source(), &n.into(), &SolutionSettings::default()).unwrap();
        assert!(sol.certificate.passed, "{:?}", sol.certificate);
        let r = residual_ladder(sol.field.as_ref(), &sol.spec, &sol.points, &LADDER, StencilOrder::Second);
        assert!(r.slope_matches_order(0.15), "{:?}", r.slope);
        // the untransformed source does not solve the same equation
        let bare = residual_ladder(sol.source.as_ref(), &sol.spec, &sol.points, &LADDER, StencilOrder::Second);
        assert!(bare.finest().unwrap().max > 1e-3);
    }

    #[test]
    fn invariant_map_solves_h1() {
        let n = InvariantTransform::new(
            Complex64::new(1.0, 0.0),
            ScalarFn::parse("cos(0.2*z)").unwrap(),
            ScalarFn::parse("sin(0.2*z)").unwrap(),
        );
        let mut settings = SolutionSettings::default();
        settings.sampling.sample_count = 12;
        // keep away from h₁² = h₂² (|0.4 z| = π/2), where N is not invertible
        settings.sampling.z_max = 3.0;
        let sol = transform_solution(&source(), &n.into(), &settings).unwrap();
        assert!(sol.certificate.passed, "{:?}", sol.certificate);
        let r = residual_ladder(sol.field.as_ref(), &sol.spec, &sol.points, &LADDER, StencilOrder::Second);
        assert!(r.slope_matches_order(0.15), "{:?}", r);
    }

    #[test]
    fn only_matching_variants_pair() {
        let n = EquivalenceTransform::parse(0.0, "0", "0.2*z/(1 + z^2)").unwrap();
        let mut settings = SolutionSettings::default();
        settings.sampling.sample_count = 12;
        settings.order = StencilOrder::Second;
        let p = variant_pairing(&source(), &n, &settings, &LADDER, 0.15).unwrap();
        assert_eq!(
            p.self_consistent,
            vec![(PhaseVariant::WithI, PhaseVariant::WithI), (PhaseVariant::WithoutI, PhaseVariant::WithoutI)]
        );
    }
}
