use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, SuiteName};
use crate::error::Result;
use crate::expr::ScalarFn;
use crate::fields::{StencilOrder, WaveSum};
use crate::nlde::{
    residual_ladder, transform_solution, Certificate, H1Form, NonlinearTermSpec, ReductionReport, ResidualReport,
    SolutionMap, SolutionSettings,
};
use crate::nlde::reduction_check;
use crate::report::VerificationReport;
use crate::transforms::controls::{density_breaking_chiral, poincare_breaking, NonSeparable};
use crate::transforms::group::{
    check_associativity, check_dual_path, check_equivalence_composition, check_general_composition, check_identity,
    check_inverse, DualPathResult,
};
use crate::transforms::{
    check_equivalence, check_poincare, check_separability, CheckConfig, EquivalenceTransform, Gamma5Coefficient,
    GeneralLSTransform, InvariantTransform, PhaseVariant, Transform,
};

/// Version of the report layout in `schema/report.schema.json`.
pub const SCHEMA_VERSION: u32 = 1;

/// A negative control must miss its condition by more than this.
pub const CONTROL_MARGIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// The condition must hold (converge at the stencil order).
    Holds,
    /// The condition must be violated (residual must plateau).
    Fails,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SuiteItem {
    Verification {
        name: String,
        expect: Expectation,
        ok: bool,
        report: VerificationReport,
    },
    Residual {
        name: String,
        expect: Expectation,
        ok: bool,
        report: ResidualReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        certificate: Option<Certificate>,
    },
    Reduction {
        name: String,
        ok: bool,
        report: ReductionReport,
    },
    DualPath {
        name: String,
        ok: bool,
        result: DualPathResult,
    },
    Error {
        name: String,
        ok: bool,
        message: String,
    },
}

impl SuiteItem {
    pub fn ok(&self) -> bool {
        match self {
            SuiteItem::Verification { ok, .. }
            | SuiteItem::Residual { ok, .. }
            | SuiteItem::Reduction { ok, .. }
            | SuiteItem::DualPath { ok, .. }
            | SuiteItem::Error { ok, .. } => *ok,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            SuiteItem::Verification { name, .. }
            | SuiteItem::Residual { name, .. }
            | SuiteItem::Reduction { name, .. }
            | SuiteItem::DualPath { name, .. }
            | SuiteItem::Error { name, .. } => name,
        }
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let tag = if self.ok() { "ok  " } else { "FAIL" };
        let detail = match self {
            SuiteItem::Verification { report, expect, .. } => format!(
                "{}max {:.3e} (tol {:.1e}), {}/{} evaluated",
                if *expect == Expectation::Fails { "control, " } else { "" },
                report.max_deviation,
                report.tolerance,
                report.evaluated,
                report.sample_count
            ),
            SuiteItem::Residual { report, expect, .. } => format!(
                "{}slope {}, finest {:.3e}",
                if *expect == Expectation::Fails { "control, " } else { "" },
                report.slope.map_or("n/a".to_string(), |s| format!("{s:.3}")),
                report.finest().map_or(f64::NAN, |s| s.max)
            ),
            SuiteItem::Reduction { report, .. } => format!(
                "matching {}",
                report.matching.as_deref().unwrap_or(if report.degenerate { "(degenerate)" } else { "none" })
            ),
            SuiteItem::DualPath { result, .. } => format!(
                "one {:.3e}, minus_i {:.3e}",
                result.one.max_deviation, result.minus_i.max_deviation
            ),
            SuiteItem::Error { message, .. } => message.clone(),
        };
        format!("{tag} {}: {detail}", self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: SuiteName,
    pub passed: bool,
    pub items: Vec<SuiteItem>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: RunConfig,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
    /// Wall-clock seconds per suite; not covered by determinism.
    #[serde(default)]
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn without_timings(&self) -> RunReport {
        RunReport {
            timings: BTreeMap::new(),
            ..self.clone()
        }
    }
}

fn verification(name: String, report: VerificationReport, expect: Expectation) -> SuiteItem {
    let ok = match expect {
        Expectation::Holds => report.passed,
        Expectation::Fails => !report.passed && report.max_deviation > CONTROL_MARGIN,
    };
    SuiteItem::Verification {
        name,
        expect,
        ok,
        report,
    }
}

fn error(name: String, e: impl std::fmt::Display) -> SuiteItem {
    SuiteItem::Error {
        name,
        ok: false,
        message: e.to_string(),
    }
}

fn checked(name: String, r: Result<VerificationReport>) -> SuiteItem {
    match r {
        Ok(report) => verification(name, report, Expectation::Holds),
        Err(e) => error(name, e),
    }
}

/// Runs the selected suites after validating `cfg`. Suites run one after
/// another; every sample loop inside a suite is parallel and index-seeded.
pub fn execute(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let transforms = cfg.build_transforms()?;
    let mut suites = Vec::new();
    let mut timings = BTreeMap::new();
    for suite in cfg.selected() {
        let start = Instant::now();
        let items = match suite {
            SuiteName::Separability => separability(&transforms, &cfg.check),
            SuiteName::Poincare => poincare(&transforms, &cfg.check),
            SuiteName::Equivalence => equivalence(&transforms, &cfg.check),
            SuiteName::GroupLaw => group_law(&transforms, &cfg.check),
            SuiteName::SolutionMap => solution_map(&transforms, cfg)?,
            SuiteName::Reduction => reduction(&transforms, cfg),
            SuiteName::All => unreachable!("expanded by selected()"),
        };
        timings.insert(suite.name().to_string(), start.elapsed().as_secs_f64());
        suites.push(SuiteResult {
            suite,
            passed: items.iter().all(SuiteItem::ok),
            items,
        });
    }
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        passed: suites.iter().all(|s| s.passed),
        suites,
        timings,
    })
}

type Named = (String, Transform);

fn equivalences(ts: &[Named]) -> Vec<(&str, &EquivalenceTransform)> {
    ts.iter()
        .filter_map(|(name, t)| match t {
            Transform::Equivalence(n) => Some((name.as_str(), n)),
            _ => None,
        })
        .collect()
}

fn invariants(ts: &[Named]) -> Vec<(&str, &InvariantTransform)> {
    ts.iter()
        .filter_map(|(name, t)| match t {
            Transform::Invariant(n) => Some((name.as_str(), n)),
            _ => None,
        })
        .collect()
}

fn generals(ts: &[Named]) -> Vec<(&str, &GeneralLSTransform)> {
    ts.iter()
        .filter_map(|(name, t)| match t {
            Transform::General(g) => Some((name.as_str(), g)),
            _ => None,
        })
        .collect()
}

fn separability(ts: &[Named], cfg: &CheckConfig) -> Vec<SuiteItem> {
    let mut items: Vec<SuiteItem> = ts
        .iter()
        .map(|(name, t)| verification(name.clone(), check_separability(&t.to_general(), cfg), Expectation::Holds))
        .collect();
    items.push(verification("control:non-separable".into(), check_separability(&NonSeparable, cfg), Expectation::Fails));
    items
}

fn poincare(ts: &[Named], cfg: &CheckConfig) -> Vec<SuiteItem> {
    let mut items: Vec<SuiteItem> = ts
        .iter()
        .filter(|(_, t)| !matches!(t, Transform::General(_)))
        .map(|(name, t)| verification(name.clone(), check_poincare(t, cfg), Expectation::Holds))
        .collect();
    items.push(verification("control:poincare-breaking".into(), check_poincare(&poincare_breaking(), cfg), Expectation::Fails));
    items
}

fn equivalence(ts: &[Named], cfg: &CheckConfig) -> Vec<SuiteItem> {
    let mut items: Vec<SuiteItem> = equivalences(ts)
        .into_iter()
        .map(|(name, n)| verification(name.to_string(), check_equivalence(n, cfg), Expectation::Holds))
        .collect();
    items.push(verification(
        "control:without_i rho=0.3*z".into(),
        check_equivalence(&density_breaking_chiral(), cfg),
        Expectation::Fails,
    ));
    items
}

fn compatible(a: &EquivalenceTransform, b: &EquivalenceTransform) -> bool {
    a.variant == b.variant && a.convention == b.convention
}

fn group_law(ts: &[Named], cfg: &CheckConfig) -> Vec<SuiteItem> {
    let mut items = Vec::new();
    let eq = equivalences(ts);
    for (name, n) in &eq {
        items.push(checked(format!("identity:{name}"), check_identity(n, cfg)));
        items.push(verification(format!("inverse:{name}"), check_inverse(n, cfg), Expectation::Holds));
    }
    for w in eq.windows(2) {
        let ((na, a), (nb, b)) = (w[0], w[1]);
        if compatible(a, b) {
            items.push(checked(format!("compose:{na}*{nb}"), check_equivalence_composition(a, b, cfg)));
        }
    }
    for w in eq.windows(3) {
        let ((na, a), (nb, b), (nc, c)) = (w[0], w[1], w[2]);
        if compatible(a, b) && compatible(b, c) {
            items.push(checked(format!("associativity:{na}*{nb}*{nc}"), check_associativity(a, b, c, cfg)));
        }
    }
    for w in generals(ts).windows(2) {
        let ((na, a), (nb, b)) = (w[0], w[1]);
        items.push(checked(format!("compose:{na}*{nb}"), check_general_composition(a, b, cfg)));
    }
    for (name, n) in invariants(ts) {
        let result = check_dual_path(n, cfg);
        items.push(SuiteItem::DualPath {
            name: format!("dual-path:{name}"),
            ok: result.matching == Some(Gamma5Coefficient::One),
            result,
        });
    }
    items
}

fn residual_item(
    name: String,
    report: ResidualReport,
    certificate: Option<Certificate>,
    expect: Expectation,
    cfg: &RunConfig,
) -> SuiteItem {
    let at_floor = report.max() <= cfg.solution.rounding_floor;
    let converges = (report.slope_matches_order(cfg.solution.slope_tolerance) || at_floor)
        && report.steps.iter().all(|s| s.skipped == 0 && s.evaluated > 0)
        && certificate.as_ref().map_or(true, |c| c.passed);
    let ok = match expect {
        Expectation::Holds => converges,
        Expectation::Fails => {
            !report.slope_matches_order(cfg.solution.slope_tolerance)
                && !at_floor
                && report.finest().is_some_and(|s| s.evaluated > 0 && s.max > cfg.solution.plateau_floor)
        }
    };
    SuiteItem::Residual {
        name,
        expect,
        ok,
        report,
        certificate,
    }
}

/// Whether the induced operator differs from the linear one.
fn nontrivial(map: &SolutionMap) -> bool {
    match map {
        SolutionMap::Equivalence(n) => n.a_hat != 0.0 || !n.phi.is_constant() || !n.rho.is_zero(),
        SolutionMap::Invariant(n) => n.a != Complex64::new(1.0, 0.0) || !n.h1.is_constant() || !n.h2.is_zero(),
    }
}

/// Every operator family with trivial parameters.
pub fn trivial_specs(mass: f64) -> Vec<(String, NonlinearTermSpec)> {
    let one = Complex64::new(1.0, 0.0);
    let mut out = vec![
        ("H1 derived".to_string(), NonlinearTermSpec::h1(one, ScalarFn::constant(1.0), ScalarFn::zero())),
        (
            "H1 gamma-product".to_string(),
            NonlinearTermSpec::h1(one, ScalarFn::constant(1.0), ScalarFn::zero()).with_form(H1Form::GammaProduct),
        ),
    ];
    for v in [PhaseVariant::WithI, PhaseVariant::WithoutI] {
        out.push((
            format!("H2 {}", v.name()),
            NonlinearTermSpec::h2(0.0, ScalarFn::zero(), ScalarFn::zero()).with_variant(v),
        ));
        out.push((
            format!("H2EX {}", v.name()),
            NonlinearTermSpec::h2ex(None, ScalarFn::zero(), ScalarFn::zero(), ScalarFn::zero()).with_variant(v),
        ));
    }
    out.into_iter().map(|(n, s)| (n, s.with_mass(mass))).collect()
}

fn solution_map(ts: &[Named], cfg: &RunConfig) -> Result<Vec<SuiteItem>> {
    let source: WaveSum = cfg.solution.source()?;
    let settings = cfg.solution_settings();
    let ladder = &cfg.solution.ladder;
    let order: StencilOrder = cfg.solution.order;
    let mut items = Vec::new();

    for (name, n) in equivalences(ts) {
        solution_items(&mut items, name, SolutionMap::Equivalence(n.clone()), &source, &settings, cfg);
    }
    for (name, n) in invariants(ts) {
        solution_items(&mut items, name, SolutionMap::Invariant(n.clone()), &source, &settings, cfg);
    }

    let base = crate::nlde::sample_points(&source, &settings.region, &settings.sampling, Default::default());
    for (label, spec) in trivial_specs(source.mass()) {
        let report = residual_ladder(&source, &spec, &base, ladder, order);
        items.push(residual_item(format!("linear-limit:{label}"), report, None, Expectation::Holds, cfg));
    }
    Ok(items)
}

fn solution_items(
    items: &mut Vec<SuiteItem>,
    name: &str,
    map: SolutionMap,
    source: &WaveSum,
    settings: &SolutionSettings,
    cfg: &RunConfig,
) {
    let ladder = &cfg.solution.ladder;
    let sol = match transform_solution(source, &map, settings) {
        Ok(s) => s,
        Err(e) => {
            items.push(error(format!("solution:{name}"), e));
            return;
        }
    };
    let report = residual_ladder(sol.field.as_ref(), &sol.spec, &sol.points, ladder, settings.order);
    items.push(residual_item(
        format!("solution:{name}"),
        report,
        Some(sol.certificate.clone()),
        Expectation::Holds,
        cfg,
    ));
    if !nontrivial(&map) {
        return;
    }
    let bare = residual_ladder(sol.source.as_ref(), &sol.spec, &sol.points, ladder, settings.order);
    items.push(residual_item(format!("control:untransformed:{name}"), bare, None, Expectation::Fails, cfg));
    if let SolutionMap::Equivalence(n) = &map {
        if !n.rho.is_zero() {
            let other = match n.variant {
                PhaseVariant::WithI => PhaseVariant::WithoutI,
                PhaseVariant::WithoutI => PhaseVariant::WithI,
            };
            let spec = sol.spec.clone().with_variant(other);
            let crossed = residual_ladder(sol.field.as_ref(), &spec, &sol.points, ladder, settings.order);
            items.push(residual_item(
                format!("control:operator-{}:{name}", other.name()),
                crossed,
                None,
                Expectation::Fails,
                cfg,
            ));
        }
    }
}

fn reduction(ts: &[Named], cfg: &RunConfig) -> Vec<SuiteItem> {
    let check = cfg.check.with_samples(cfg.reduction.samples);
    let [lo, hi] = cfg.reduction.z_range;
    equivalences(ts)
        .into_iter()
        .map(|(name, n)| {
            let mut c = check;
            c.z_max = c.z_max.max(lo.abs()).max(hi.abs());
            let report = reduction_check(n.a_hat, &n.phi, &n.rho, n.variant, (lo, hi), &c);
            SuiteItem::Reduction {
                name: format!("reduction:{name}"),
                ok: report.report.passed && (report.matching.is_some() || report.degenerate),
                report,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::{FamilyDecl, TransformDecl};

    fn decl(name: &str, rho: &str, variant: PhaseVariant) -> TransformDecl {
        TransformDecl {
            name: name.into(),
            family: FamilyDecl::Equivalence {
                a_hat: 0.0,
                phi: "0".into(),
                rho: rho.into(),
                variant,
                convention: Default::default(),
            },
        }
    }

    fn quick(suites: Vec<SuiteName>, ts: Vec<TransformDecl>) -> RunConfig {
        RunConfig {
            check: CheckConfig::default().with_samples(200),
            suites,
            transforms: ts,
            ..RunConfig::default()
        }
    }

    #[test]
    fn identity_equivalence_passes() {
        let r = execute(&quick(vec![SuiteName::Equivalence], vec![decl("id", "0", PhaseVariant::WithI)])).unwrap();
        assert!(r.passed, "{:#?}", r.suites);
        assert_eq!(r.suites.len(), 1);
    }

    #[test]
    fn chiral_factor_without_i_fails_equivalence() {
        let r = execute(&quick(vec![SuiteName::Equivalence], vec![decl("bad", "0.3*z", PhaseVariant::WithoutI)])).unwrap();
        assert!(!r.passed);
        let SuiteItem::Verification { report, .. } = &r.suites[0].items[0] else { panic!() };
        assert!(report.max_deviation > 1e-3);
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = quick(
            vec![SuiteName::GroupLaw, SuiteName::Reduction],
            vec![decl("a", "0.25/(1 + z^2)", PhaseVariant::WithI), decl("b", "0.1*z/(1 + z^2)", PhaseVariant::WithI)],
        );
        let a = execute(&cfg).unwrap();
        let b = execute(&cfg).unwrap();
        assert!(a.passed, "{:#?}", a.suites);
        assert_eq!(
            serde_json::to_string(&a.without_timings()).unwrap(),
            serde_json::to_string(&b.without_timings()).unwrap()
        );
    }

    #[test]
    fn invalid_config_is_an_error() {
        let cfg = quick(vec![], vec![]);
        assert!(execute(&cfg).is_err());
    }
}
