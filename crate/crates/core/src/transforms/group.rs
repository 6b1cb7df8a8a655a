//! Pointwise checks of the composition laws, inverses and lowering maps.

use serde::{Deserialize, Serialize};

use super::check::{check_agreement, merge_skips, CheckConfig};
use super::{
    EquivalenceTransform, GaugeTransform, Gamma5Coefficient, GeneralLSTransform, InvariantTransform, Requirements,
};
use crate::error::Result;
use crate::gamma::Spinor;
use crate::report::VerificationReport;

/// Applies the members left to right.
pub struct Sequence<'a>(pub Vec<&'a dyn GaugeTransform>);

impl GaugeTransform for Sequence<'_> {
    fn apply(&self, psi: &Spinor) -> Result<Spinor> {
        let mut cur = *psi;
        for t in &self.0 {
            cur = t.apply(&cur)?;
        }
        Ok(cur)
    }

    fn requirements(&self) -> Requirements {
        self.0
            .iter()
            .fold(Requirements::default(), |acc, t| acc.union(t.requirements()))
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|t| t.describe()).collect();
        format!("[{}]", parts.join(" then "))
    }
}

/// The composite built by `compose_general` against sequential application.
pub fn check_general_composition(
    n1: &GeneralLSTransform,
    n2: &GeneralLSTransform,
    cfg: &CheckConfig,
) -> Result<VerificationReport> {
    let composite = n1.compose(n2)?;
    let mut report = check_agreement("general_composition", &composite, &Sequence(vec![n1, n2]), cfg);
    let expected = super::kmatrix::mat_mul(n2.k.matrix(), n1.k.matrix());
    let got = composite.k.matrix();
    let k_err = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (got[i][j] - expected[i][j]).abs())
        .fold(0.0, f64::max);
    report.metrics.insert("k_product_error".into(), k_err);
    report.passed &= k_err == 0.0;
    Ok(report)
}

/// The group-law composite against sequential application.
pub fn check_equivalence_composition(
    n1: &EquivalenceTransform,
    n2: &EquivalenceTransform,
    cfg: &CheckConfig,
) -> Result<VerificationReport> {
    let composite = n1.compose(n2)?;
    let mut report = check_agreement("equivalence_composition", &composite, &Sequence(vec![n1, n2]), cfg);
    let additive = composite.a_hat == n1.a_hat + n2.a_hat;
    report.metrics.insert("a_hat_additivity_error".into(), (composite.a_hat - (n1.a_hat + n2.a_hat)).abs());
    report.passed &= additive;
    Ok(report)
}

/// (N₁N₂)N₃ against N₁(N₂N₃), both built from the group law.
pub fn check_associativity(
    n1: &EquivalenceTransform,
    n2: &EquivalenceTransform,
    n3: &EquivalenceTransform,
    cfg: &CheckConfig,
) -> Result<VerificationReport> {
    let left = n1.compose(n2)?.compose(n3)?;
    let right = n1.compose(&n2.compose(n3)?)?;
    Ok(check_agreement("associativity", &left, &right, cfg))
}

/// Both one-sided round trips N⁻¹N and NN⁻¹ against the identity.
pub fn check_inverse(n: &EquivalenceTransform, cfg: &CheckConfig) -> VerificationReport {
    let inv = n.inverse_unchecked();
    let id = EquivalenceTransform::identity();
    let after = check_agreement("inverse", &Sequence(vec![n, &inv]), &id, cfg);
    let before = check_agreement("inverse", &Sequence(vec![&inv, n]), &id, cfg);
    combine("inverse", n.describe(), [after, before])
}

/// Composition with the identity on either side.
pub fn check_identity(n: &EquivalenceTransform, cfg: &CheckConfig) -> Result<VerificationReport> {
    let id = EquivalenceTransform::identity()
        .with_variant(n.variant)
        .with_convention(n.convention);
    let left = check_agreement("identity", &id.compose(n)?, n, cfg);
    let right = check_agreement("identity", &n.compose(&id)?, n, cfg);
    Ok(combine("identity", n.describe(), [left, right]))
}

/// Merges reports of the same condition on the same samples: the worst
/// deviation wins and the pass flags are conjoined.
pub fn combine<const K: usize>(condition: &str, subject: String, parts: [VerificationReport; K]) -> VerificationReport {
    let mut it = parts.into_iter();
    let mut out = it.next().expect("at least one report");
    out.condition = condition.to_string();
    out.subject = subject;
    for r in it {
        out.passed &= r.passed;
        out.max_deviation = out.max_deviation.max(r.max_deviation);
        out.mean_deviation = out.mean_deviation.max(r.mean_deviation);
        out.evaluated = out.evaluated.min(r.evaluated);
        out.skipped = out.sample_count - out.evaluated;
        merge_skips(&mut out.skip_reasons, &r.skip_reasons);
        out.notes.extend(r.notes);
    }
    out
}

/// Dual-path comparison of the invariant family against its lowered
/// separable form, under both h₂ coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPathResult {
    pub one: VerificationReport,
    pub minus_i: VerificationReport,
    /// The coefficient whose lowering agrees with direct application.
    pub matching: Option<Gamma5Coefficient>,
}

pub fn check_dual_path(n: &InvariantTransform, cfg: &CheckConfig) -> DualPathResult {
    let run = |c: Gamma5Coefficient| {
        let mut r = check_agreement("dual_path", n, &n.lower(c), cfg);
        r.notes.push(format!("h2 coefficient: {}", c.name()));
        r
    };
    let one = run(Gamma5Coefficient::One);
    let minus_i = run(Gamma5Coefficient::MinusI);
    let matching = match (one.passed, minus_i.passed) {
        (true, false) => Some(Gamma5Coefficient::One),
        (false, true) => Some(Gamma5Coefficient::MinusI),
        _ => None,
    };
    DualPathResult { one, minus_i, matching }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{MultiFn, ScalarFn};
    use crate::transforms::KMatrix;
    use num_complex::Complex64;

    #[test]
    fn identity_laws() {
        let cfg = CheckConfig::default().with_samples(100);
        let n = EquivalenceTransform::parse(0.5, "0.1*z", "0.3*z/(1 + z^2)").unwrap();
        assert!(check_identity(&n, &cfg).unwrap().passed);
        assert!(check_inverse(&n, &cfg).passed);
        let n = n.with_variant(crate::transforms::PhaseVariant::WithoutI);
        assert!(check_identity(&n, &cfg).unwrap().passed);
    }

    #[test]
    fn general_composition_in_admissible_class() {
        let cfg = CheckConfig::default().with_samples(100);
        let n1 = GeneralLSTransform::new(
            KMatrix::new(Complex64::new(1.2, 0.4), Complex64::new(0.3, 1.0)),
            [
                MultiFn::parse("1 + 0.1*r2").unwrap(),
                MultiFn::parse("exp(0.2*i*s1)").unwrap(),
                MultiFn::one(),
                MultiFn::parse("0.5 + r1*r3").unwrap(),
            ],
        );
        let n2 = GeneralLSTransform::new(
            KMatrix::new(Complex64::new(0.8, -0.3), Complex64::new(0.0, 2.0)),
            [
                MultiFn::parse("1 + 0.2*cos(s2)").unwrap(),
                MultiFn::one(),
                MultiFn::parse("2 + sin(s1 - s3)*r1").unwrap(),
                MultiFn::parse("1 + 0.3*r2").unwrap(),
            ],
        );
        let r = check_general_composition(&n1, &n2, &cfg).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn dual_path_picks_unit_coefficient() {
        let cfg = CheckConfig::default().with_samples(100);
        let n = InvariantTransform::new(Complex64::new(3.0, 0.0), ScalarFn::identity(), ScalarFn::constant(1.0));
        let d = check_dual_path(&n, &cfg);
        assert_eq!(d.matching, Some(Gamma5Coefficient::One), "{d:?}");
    }
}
