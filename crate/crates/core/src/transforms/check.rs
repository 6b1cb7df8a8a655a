//! Randomized condition checkers.
//!
//! Sample `i` of a run draws from its own ChaCha8 stream (`seed`, stream
//! `i`), so reports do not depend on how samples are scheduled on threads.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GaugeTransform, GeneralLSTransform, Requirements};
use crate::error::{GaugeError, Result};
use crate::gamma::{bilinear_x, lorentz_spin_element, polar_decompose, pseudoscalar_p, LorentzParams, Spinor};
use crate::report::VerificationReport;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckConfig {
    pub sample_count: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Real and imaginary parts of sampled components are uniform in
    /// [−component_bound, component_bound].
    pub component_bound: f64,
    pub eps_x: f64,
    pub eps_z: f64,
    pub eps_r: f64,
    /// Samples with |Z| above this are rejected when Z is used.
    pub z_max: f64,
    /// Lorentz parameters α_{μν} are uniform in [−lorentz_bound, lorentz_bound].
    pub lorentz_bound: f64,
    /// Rejection-sampling attempts per sample before it is counted as skipped.
    pub max_attempts: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            sample_count: 1000,
            seed: 0x5eed,
            tolerance: 1e-9,
            component_bound: 1.0,
            eps_x: 1e-2,
            eps_z: 1e-2,
            eps_r: 1e-2,
            z_max: 50.0,
            lorentz_bound: 0.5,
            max_attempts: 256,
        }
    }
}

impl CheckConfig {
    pub fn with_samples(mut self, n: usize) -> Self {
        self.sample_count = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count < 1 {
            return Err(GaugeError::InvalidSpec("sample_count must be ≥ 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(GaugeError::InvalidSpec("tolerance must be > 0".into()));
        }
        if !(self.component_bound > 0.0) {
            return Err(GaugeError::InvalidSpec("component_bound must be > 0".into()));
        }
        for (name, v) in [("eps_x", self.eps_x), ("eps_z", self.eps_z), ("eps_r", self.eps_r)] {
            if !(v >= 0.0) {
                return Err(GaugeError::InvalidSpec(format!("{name} must be ≥ 0")));
            }
        }
        Ok(())
    }
}

/// The generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn meets(psi: &Spinor, cfg: &CheckConfig, req: Requirements) -> bool {
    let x = bilinear_x(psi);
    if req.positive_x && !(x > cfg.eps_x) {
        return false;
    }
    if req.nonzero_y {
        let p = pseudoscalar_p(psi);
        if !(p.abs() > cfg.eps_z) || (x / p).abs() > cfg.z_max {
            return false;
        }
    }
    if req.nonzero_moduli && psi.0.iter().any(|c| !(c.norm() > cfg.eps_r)) {
        return false;
    }
    true
}

/// A random spinor satisfying `req`, or `None` after `max_attempts` rejections.
pub fn sample_spinor(rng: &mut ChaCha8Rng, cfg: &CheckConfig, req: Requirements) -> Option<Spinor> {
    let b = cfg.component_bound;
    for _ in 0..cfg.max_attempts.max(1) {
        let psi = Spinor(std::array::from_fn(|_| Complex64::new(rng.gen_range(-b..=b), rng.gen_range(-b..=b))));
        if meets(&psi, cfg, req) {
            return Some(psi);
        }
    }
    None
}

pub fn sample_lorentz(rng: &mut ChaCha8Rng, bound: f64) -> LorentzParams {
    LorentzParams(std::array::from_fn(|_| rng.gen_range(-bound..=bound)))
}

/// Outcome of one sample: `Ok(Some(values))` with the main deviation first,
/// `Ok(None)` if no admissible input was found, `Err` for a domain error.
pub type SampleOutcome = Result<Option<Vec<f64>>>;

/// Runs `f` on every sample index in parallel and aggregates in index order.
///
/// `metric_names` label the entries after the first in each value vector;
/// their maxima land in the report's metrics.
pub fn run_samples<F>(condition: &str, subject: String, cfg: &CheckConfig, metric_names: &[&str], f: F) -> VerificationReport
where
    F: Fn(&mut ChaCha8Rng) -> SampleOutcome + Sync,
{
    let outcomes: Vec<SampleOutcome> = (0..cfg.sample_count)
        .into_par_iter()
        .map(|i| f(&mut sample_rng(cfg.seed, i as u64)))
        .collect();

    let mut report = VerificationReport::new(condition, subject, cfg);
    let mut maxima = vec![0.0f64; metric_names.len()];
    let mut sum = 0.0;
    for outcome in outcomes {
        match outcome {
            Ok(Some(values)) => {
                let main = sanitize(values[0]);
                report.evaluated += 1;
                report.max_deviation = report.max_deviation.max(main);
                sum += main;
                for (m, v) in maxima.iter_mut().zip(&values[1..]) {
                    *m = m.max(sanitize(*v));
                }
            }
            Ok(None) => *report.skip_reasons.entry("rejected".into()).or_default() += 1,
            Err(e) => *report.skip_reasons.entry(skip_label(&e)).or_default() += 1,
        }
    }
    report.skipped = cfg.sample_count - report.evaluated;
    if report.evaluated > 0 {
        report.mean_deviation = sum / report.evaluated as f64;
    }
    for (name, m) in metric_names.iter().zip(maxima) {
        report.metrics.insert(name.to_string(), m);
    }
    report.finish()
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

pub(crate) fn skip_label(e: &GaugeError) -> String {
    match e {
        GaugeError::DegenerateInvariant(_) => "degenerate_invariant",
        GaugeError::DegenerateSpinor(_) => "degenerate_spinor",
        GaugeError::DenominatorZero(_) => "denominator_zero",
        GaugeError::Eval(_) => "domain_error",
        _ => "other_error",
    }
    .to_string()
}

/// A map given on raw moduli and phases (R, S).
pub trait PolarMap: Sync {
    fn eval_polar(&self, r: [f64; 4], s: [f64; 4]) -> Result<Spinor>;

    fn describe(&self) -> String;
}

impl PolarMap for GeneralLSTransform {
    fn eval_polar(&self, r: [f64; 4], s: [f64; 4]) -> Result<Spinor> {
        GeneralLSTransform::eval_polar(self, r, s)
    }

    fn describe(&self) -> String {
        GaugeTransform::describe(self)
    }
}

fn pair_deviation(a: &Spinor, b: &Spinor, a0: &Spinor, b0: &Spinor) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let reference = a0[i] * b0[j];
            let d = (a[i] * b[j] - reference).norm() / reference.norm().max(1.0);
            worst = worst.max(d);
        }
    }
    worst
}

/// Invariance of every product F_i(R¹,S¹)F_j(R²,S²) under the scaling
/// (e^τR¹, e^{−τ}R²) and the phase translation (S¹+θ, S²−θ).
pub fn check_separability(map: &dyn PolarMap, cfg: &CheckConfig) -> VerificationReport {
    let r_lo = cfg.eps_r.max(0.1);
    let r_hi = cfg.component_bound * std::f64::consts::SQRT_2;
    let r_hi = r_hi.max(2.0 * r_lo);
    run_samples("separability", map.describe(), cfg, &["scale", "translation"], |rng| {
        let mut draw = || -> ([f64; 4], [f64; 4]) {
            (
                std::array::from_fn(|_| rng.gen_range(r_lo..r_hi)),
                std::array::from_fn(|_| rng.gen_range(-PI..PI)),
            )
        };
        let (r1, s1) = draw();
        let (r2, s2) = draw();
        let tau: f64 = rng.gen_range(-0.5..0.5);
        let theta: f64 = rng.gen_range(-PI..PI);
        let f1 = map.eval_polar(r1, s1)?;
        let f2 = map.eval_polar(r2, s2)?;
        let scaled1 = map.eval_polar(r1.map(|r| r * tau.exp()), s1)?;
        let scaled2 = map.eval_polar(r2.map(|r| r * (-tau).exp()), s2)?;
        let shifted1 = map.eval_polar(r1, s1.map(|s| s + theta))?;
        let shifted2 = map.eval_polar(r2, s2.map(|s| s - theta))?;
        let scale = pair_deviation(&scaled1, &scaled2, &f1, &f2);
        let translation = pair_deviation(&shifted1, &shifted2, &f1, &f2);
        Ok(Some(vec![scale.max(translation), scale, translation]))
    })
}

/// ‖N(Uψ) − U N(ψ)‖ for random spinors and random spin elements U.
pub fn check_poincare(n: &dyn GaugeTransform, cfg: &CheckConfig) -> VerificationReport {
    let req = n.requirements();
    run_samples("poincare", n.describe(), cfg, &["relative"], |rng| {
        let Some(psi) = sample_spinor(rng, cfg, req) else {
            return Ok(None);
        };
        let u = lorentz_spin_element(&sample_lorentz(rng, cfg.lorentz_bound));
        let lhs = n.apply(&(u * psi))?;
        let rhs = u * n.apply(&psi)?;
        let d = (lhs - rhs).norm();
        Ok(Some(vec![d, d / rhs.norm().max(1e-300)]))
    })
}

/// |N(ψ)†N(ψ) − ψ†ψ|; for transforms with an explicit separable form also
/// the maximum of |Σ_k R_k²(|G_k|² − 1)|.
pub fn check_equivalence(n: &dyn GaugeTransform, cfg: &CheckConfig) -> VerificationReport {
    let req = n.requirements();
    let general = n.as_general();
    let names: &[&str] = if general.is_some() { &["g_modulus_sum"] } else { &[] };
    let mut report = run_samples("equivalence", n.describe(), cfg, names, |rng| {
        let Some(psi) = sample_spinor(rng, cfg, req) else {
            return Ok(None);
        };
        let d = (n.apply(&psi)?.density() - psi.density()).abs();
        let mut values = vec![d];
        if let Some(g) = general {
            let p = polar_decompose(&psi);
            let ratios = [p.r[1] / p.r[0], p.r[2] / p.r[0], p.r[3] / p.r[0]];
            let diffs = [p.s[1] - p.s[0], p.s[2] - p.s[0], p.s[3] - p.s[0]];
            let mut sum = 0.0;
            for k in 0..4 {
                let gk = g.g[k].eval(ratios, diffs)?;
                sum += p.r[k] * p.r[k] * (gk.norm_sqr() - 1.0);
            }
            values.push(sum.abs());
        }
        Ok(Some(values))
    });
    if let Some(g) = general {
        if g.k.a.re != 1.0 || g.k.b.re != 0.0 {
            report
                .notes
                .push("g_modulus_sum equals the density change only when Re a = 1 and Re b = 0".into());
        }
    }
    report
}

/// Pointwise agreement of two maps, ‖lhs(ψ) − rhs(ψ)‖ / max(1, ‖rhs(ψ)‖).
pub fn check_agreement(
    condition: &str,
    lhs: &dyn GaugeTransform,
    rhs: &dyn GaugeTransform,
    cfg: &CheckConfig,
) -> VerificationReport {
    let req = lhs.requirements().union(rhs.requirements());
    let subject = format!("{} vs {}", lhs.describe(), rhs.describe());
    run_samples(condition, subject, cfg, &[], |rng| {
        let Some(psi) = sample_spinor(rng, cfg, req) else {
            return Ok(None);
        };
        let a = lhs.apply(&psi)?;
        let b = rhs.apply(&psi)?;
        Ok(Some(vec![(a - b).norm() / b.norm().max(1.0)]))
    })
}

/// Extra bookkeeping shared by reports that aggregate sub-reports.
pub fn merge_skips(into: &mut BTreeMap<String, usize>, from: &BTreeMap<String, usize>) {
    for (k, v) in from {
        *into.entry(k.clone()).or_default() += v;
    }
}
