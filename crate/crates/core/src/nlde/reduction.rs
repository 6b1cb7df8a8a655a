use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NonlinearTermSpec;
use crate::expr::{div, mul, num, var, ScalarFn, Var};
use crate::gamma::{bilinear_x, pseudoscalar_p, Spinor};
use crate::report::VerificationReport;
use crate::transforms::check::{run_samples, sample_spinor};
use crate::transforms::{CheckConfig, PhaseVariant, Requirements};

/// Pointwise tolerance of the reduction comparison.
pub const REDUCTION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionCandidate {
    pub name: String,
    pub report: VerificationReport,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    /// Deviations of the two exponent candidates (n = 2ρ, n = ρ), both with
    /// g(X) = â/(2X), followed by n = ρ with g omitted.
    pub candidates: Vec<ReductionCandidate>,
    /// The unique exponent candidate reproducing H₂, if exactly one does.
    pub matching: Option<String>,
    /// Both exponent candidates agree (ρ ≡ 0 on the sampled range).
    pub degenerate: bool,
    /// Whether the X-gradient term needs g(X) = â/(2X).
    pub g_required: bool,
    pub report: VerificationReport,
}

fn h2ex_candidate(h2: &NonlinearTermSpec, a_hat: f64, phi: &ScalarFn, rho: &ScalarFn, factor: f64, with_g: bool) -> NonlinearTermSpec {
    let g = with_g.then(|| ScalarFn::from_node(div(num(0.5 * a_hat), var(Var::Z))));
    let n = ScalarFn::from_node(mul(num(factor), rho.node().clone()));
    let mut spec = NonlinearTermSpec::h2ex(g, phi.derivative(), rho.derivative(), n);
    spec.mass = h2.mass;
    spec.variant = h2.variant;
    spec.convention = h2.convention;
    spec
}

/// Compares H₂(â, φ, ρ) with H₂,ex(g, k = φ′, l = ρ′, n) on random spinors
/// and gradients with Z in `z_range`, for n = 2ρ and n = ρ (with
/// g = â/(2X)) and for n = ρ without g. Deviations are relative to
/// max(1, ‖H₂ψ‖).
pub fn reduction_check(
    a_hat: f64,
    phi: &ScalarFn,
    rho: &ScalarFn,
    variant: PhaseVariant,
    z_range: (f64, f64),
    cfg: &CheckConfig,
) -> ReductionReport {
    let h2 = NonlinearTermSpec::h2(a_hat, phi.clone(), rho.clone()).with_variant(variant);
    let cases = [("n = 2 rho", 2.0, true), ("n = rho", 1.0, true), ("n = rho, g omitted", 1.0, false)];
    let req = Requirements {
        positive_x: true,
        nonzero_y: true,
        nonzero_moduli: false,
    };
    let b = cfg.component_bound;
    let candidates: Vec<ReductionCandidate> = cases
        .iter()
        .map(|&(name, factor, with_g)| {
            let ex = h2ex_candidate(&h2, a_hat, phi, rho, factor, with_g);
            let mut cfg = cfg.clone();
            cfg.tolerance = REDUCTION_TOLERANCE;
            let report = run_samples("reduction", ex.describe(), &cfg, &[], |rng| {
                let psi = (0..cfg.max_attempts.max(1)).find_map(|_| {
                    let psi = sample_spinor(rng, &cfg, req)?;
                    let z = bilinear_x(&psi) / pseudoscalar_p(&psi);
                    (z_range.0..=z_range.1).contains(&z).then_some(psi)
                });
                let Some(psi) = psi else { return Ok(None) };
                let grad: [Spinor; 4] = std::array::from_fn(|_| {
                    Spinor(std::array::from_fn(|_| Complex64::new(rng.gen_range(-b..=b), rng.gen_range(-b..=b))))
                });
                let a = h2.eval(&psi, &grad)?;
                let e = ex.eval(&psi, &grad)?;
                Ok(Some(vec![(a - e).norm() / a.norm().max(1.0)]))
            });
            ReductionCandidate {
                name: name.to_string(),
                matches: report.passed,
                report,
            }
        })
        .collect();

    let exponent_matches: Vec<&ReductionCandidate> = candidates[..2].iter().filter(|c| c.matches).collect();
    let matching = (exponent_matches.len() == 1).then(|| exponent_matches[0].name.clone());
    let degenerate = exponent_matches.len() == 2;
    let g_required = candidates[1].matches && !candidates[2].matches;

    let mut report = VerificationReport::new("reduction", h2.describe(), cfg);
    report.tolerance = REDUCTION_TOLERANCE;
    report.evaluated = candidates[1].report.evaluated;
    report.skipped = candidates[1].report.skipped;
    report.skip_reasons = candidates[1].report.skip_reasons.clone();
    report.max_deviation = candidates[..2].iter().map(|c| c.report.max_deviation).fold(f64::INFINITY, f64::min);
    report.mean_deviation = candidates[..2]
        .iter()
        .filter(|c| c.matches)
        .map(|c| c.report.mean_deviation)
        .next()
        .unwrap_or(f64::INFINITY);
    for c in &candidates {
        report.metrics.insert(c.name.clone(), c.report.max_deviation);
    }
    report.passed = report.evaluated > 0 && !exponent_matches.is_empty();
    match (&matching, degenerate) {
        (Some(name), _) => report.notes.push(format!("matching exponent candidate: {name}")),
        (None, true) => report.notes.push("both exponent candidates match (degenerate agreement)".into()),
        (None, false) => report.notes.push("no exponent candidate matches".into()),
    }
    if g_required {
        report.notes.push("the X-gradient term requires g(X) = a_hat/(2X)".into());
    }
    ReductionReport {
        candidates,
        matching,
        degenerate,
        g_required,
        report,
    }
}
