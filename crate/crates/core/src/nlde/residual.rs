use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::NonlinearTermSpec;
use crate::error::Result;
use crate::fields::{dirac_kinetic, four_gradient, SpinorField, StencilOrder};
use crate::gamma::{bilinear_x, pseudoscalar_p};
use crate::transforms::check::{sample_rng, skip_label};
use crate::transforms::{CheckConfig, Requirements};

/// An axis-aligned box of spacetime points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Region {
    pub origin: [f64; 4],
    pub extent: [f64; 4],
}

impl Default for Region {
    fn default() -> Self {
        Region {
            origin: [0.0; 4],
            extent: [1.0; 4],
        }
    }
}

/// Up to `cfg.sample_count` points of `region` where `field` meets `req`
/// with the sampling epsilons of `cfg`. Point k is drawn from stream k,
/// so the set does not depend on thread scheduling.
pub fn sample_points(field: &dyn SpinorField, region: &Region, cfg: &CheckConfig, req: Requirements) -> Vec<[f64; 4]> {
    (0..cfg.sample_count)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = sample_rng(cfg.seed, i as u64);
            (0..cfg.max_attempts.max(1)).find_map(|_| {
                let x: [f64; 4] = std::array::from_fn(|mu| region.origin[mu] + region.extent[mu] * rng.gen::<f64>());
                let psi = field.eval(&x).ok()?;
                let xv = bilinear_x(&psi);
                if req.positive_x && !(xv > cfg.eps_x) {
                    return None;
                }
                if req.nonzero_y {
                    let p = pseudoscalar_p(&psi);
                    if !(p.abs() > cfg.eps_z) || (xv / p).abs() > cfg.z_max {
                        return None;
                    }
                }
                Some(x)
            })
        })
        .collect()
}

/// Residual norms at one step size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepResidual {
    pub h: f64,
    /// ‖iγ^μ∂_μψ + H(ψ)ψ‖ at every evaluated point, in point order.
    pub norms: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub skip_reasons: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub subject: String,
    pub term: String,
    pub order: u8,
    pub point_count: usize,
    pub steps: Vec<StepResidual>,
    /// Least-squares slope of log max-residual against log h; present only
    /// with at least three steps.
    pub slope: Option<f64>,
}

impl ResidualReport {
    /// The largest residual over all steps.
    pub fn max(&self) -> f64 {
        self.steps.iter().map(|s| s.max).fold(0.0, f64::max)
    }

    /// The residual at the smallest step.
    pub fn finest(&self) -> Option<&StepResidual> {
        self.steps.iter().min_by(|a, b| a.h.total_cmp(&b.h))
    }

    /// Whether the fitted slope is within `tolerance` of the stencil order.
    pub fn slope_matches_order(&self, tolerance: f64) -> bool {
        self.slope.is_some_and(|s| (s - self.order as f64).abs() <= tolerance)
    }
}

fn step(field: &dyn SpinorField, spec: &NonlinearTermSpec, points: &[[f64; 4]], h: f64, order: StencilOrder) -> StepResidual {
    let outcomes: Vec<Result<f64>> = points
        .par_iter()
        .map(|x| {
            let grad = four_gradient(field, x, h, order)?;
            let psi = field.eval(x)?;
            let r = dirac_kinetic(&grad) + spec.eval(&psi, &grad)?;
            Ok(r.norm())
        })
        .collect();
    let mut out = StepResidual {
        h,
        norms: Vec::with_capacity(points.len()),
        max: 0.0,
        mean: 0.0,
        evaluated: 0,
        skipped: 0,
        skip_reasons: BTreeMap::new(),
    };
    for o in outcomes {
        match o {
            Ok(n) => {
                let n = if n.is_nan() { f64::INFINITY } else { n };
                out.max = out.max.max(n);
                out.norms.push(n);
            }
            Err(e) => *out.skip_reasons.entry(skip_label(&e)).or_default() += 1,
        }
    }
    out.evaluated = out.norms.len();
    out.skipped = points.len() - out.evaluated;
    if out.evaluated > 0 {
        out.mean = out.norms.iter().sum::<f64>() / out.evaluated as f64;
    }
    out
}

/// The NLDE residual iγ^μ∂_μψ + H(ψ)ψ at each point with one step size.
/// Degenerate points are skipped and counted.
pub fn nlde_residual(
    field: &dyn SpinorField,
    spec: &NonlinearTermSpec,
    points: &[[f64; 4]],
    h: f64,
    order: StencilOrder,
) -> ResidualReport {
    residual_ladder(field, spec, points, &[h], order)
}

/// The residual over a ladder of step sizes, with the convergence slope.
pub fn residual_ladder(
    field: &dyn SpinorField,
    spec: &NonlinearTermSpec,
    points: &[[f64; 4]],
    ladder: &[f64],
    order: StencilOrder,
) -> ResidualReport {
    let steps: Vec<StepResidual> = ladder.iter().map(|&h| step(field, spec, points, h, order)).collect();
    let slope = if steps.len() >= 3 && steps.iter().all(|s| s.evaluated > 0) {
        let hs: Vec<f64> = steps.iter().map(|s| s.h).collect();
        let rs: Vec<f64> = steps.iter().map(|s| s.max).collect();
        fit_slope(&hs, &rs)
    } else {
        None
    };
    ResidualReport {
        subject: field.describe(),
        term: spec.describe(),
        order: order.order(),
        point_count: points.len(),
        steps,
        slope,
    }
}

/// Least-squares slope of log r against log h; `None` with fewer than
/// three pairs or any nonpositive or non-finite entry.
pub fn fit_slope(h: &[f64], r: &[f64]) -> Option<f64> {
    let n = h.len().min(r.len());
    if n < 3 || h.len() != r.len() {
        return None;
    }
    let ok = |v: &f64| v.is_finite() && *v > 0.0;
    if !h.iter().all(ok) || !r.iter().all(ok) {
        return None;
    }
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{EnergySign, PlaneWave, PlaneWaveSpec};

    #[test]
    fn slope_fit() {
        let h = [4e-3, 2e-3, 1e-3];
        let r: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(4)).collect();
        assert!((fit_slope(&h, &r).unwrap() - 4.0).abs() < 1e-12);
        assert!(fit_slope(&h[..2], &r[..2]).is_none());
        assert!(fit_slope(&h, &[1.0, 0.0, 1.0]).is_none());
    }

    #[test]
    fn linear_spec_on_a_plane_wave_converges_at_the_stencil_order() {
        let wave = PlaneWave::new(PlaneWaveSpec::new(1.0, [2.0, -1.5, 2.5], 1, EnergySign::Positive)).unwrap();
        let cfg = CheckConfig::default().with_samples(16);
        let points = sample_points(&wave, &Region::default(), &cfg, Requirements::default());
        assert_eq!(points.len(), 16);
        let spec = NonlinearTermSpec::linear();
        for order in [StencilOrder::Second, StencilOrder::Fourth] {
            let r = residual_ladder(&wave, &spec, &points, &[4e-3, 2e-3, 1e-3], order);
            assert!(r.slope_matches_order(0.15), "{:?}", r.slope);
        }
        let single = nlde_residual(&wave, &spec, &points, 1e-3, StencilOrder::Second);
        assert!(single.slope.is_none());
        assert_eq!(single.steps[0].evaluated, 16);
    }

    #[test]
    fn degenerate_points_are_skipped() {
        // a single plane wave has Y = 0 everywhere
        let wave = PlaneWave::new(PlaneWaveSpec::new(1.0, [0.5, 0.0, 0.0], 0, EnergySign::Positive)).unwrap();
        let spec = NonlinearTermSpec::h2(0.0, crate::expr::ScalarFn::zero(), crate::expr::ScalarFn::identity());
        let r = nlde_residual(&wave, &spec, &[[0.1, 0.2, 0.3, 0.4]], 1e-3, StencilOrder::Fourth);
        assert_eq!(r.steps[0].skipped, 1);
        assert_eq!(r.steps[0].skip_reasons["degenerate_invariant"], 1);
        let cfg = CheckConfig::default().with_samples(8);
        assert!(sample_points(&wave, &Region::default(), &cfg, spec.requirements()).is_empty());
    }
}
