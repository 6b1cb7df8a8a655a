use super::{GaugeTransform, Requirements};
use crate::error::{GaugeError, Result};
use crate::gamma::Spinor;

/// Numerical inverse of an arbitrary transform: solves forward(ψ') = ψ by
/// Newton iteration on the eight real components, with a central-difference
/// Jacobian and step halving.
pub struct PointwiseInverse<T> {
    pub forward: T,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl<T: GaugeTransform> PointwiseInverse<T> {
    pub fn new(forward: T) -> Self {
        PointwiseInverse {
            forward,
            tolerance: 1e-13,
            max_iterations: 60,
        }
    }

    fn residual(&self, x: &[f64; 8], target: &[f64; 8]) -> Result<[f64; 8]> {
        let y = self.forward.apply(&Spinor::from_reals(x))?.to_reals();
        Ok(std::array::from_fn(|k| y[k] - target[k]))
    }

    fn jacobian(&self, x: &[f64; 8], target: &[f64; 8]) -> Result<[[f64; 8]; 8]> {
        let mut jac = [[0.0; 8]; 8];
        let h = 1e-6 * norm(x).max(1.0);
        for col in 0..8 {
            let mut xp = *x;
            let mut xm = *x;
            xp[col] += h;
            xm[col] -= h;
            let fp = self.residual(&xp, target)?;
            let fm = self.residual(&xm, target)?;
            for row in 0..8 {
                jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        Ok(jac)
    }
}

fn norm(v: &[f64; 8]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Gaussian elimination with partial pivoting.
fn solve8(mut a: [[f64; 8]; 8], mut b: [f64; 8]) -> Option<[f64; 8]> {
    for col in 0..8 {
        let pivot = (col..8).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..8 {
            let f = a[row][col] / a[col][col];
            for k in col..8 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 8];
    for row in (0..8).rev() {
        let s: f64 = (row + 1..8).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

impl<T: GaugeTransform> GaugeTransform for PointwiseInverse<T> {
    fn apply(&self, psi: &Spinor) -> Result<Spinor> {
        let target = psi.to_reals();
        let scale = norm(&target).max(1.0);
        let mut x = target;
        let mut f = self.residual(&x, &target)?;
        let mut fnorm = norm(&f);
        for _ in 0..self.max_iterations {
            let converged = fnorm <= self.tolerance * scale;
            let jac = self.jacobian(&x, &target)?;
            let step = solve8(jac, f).ok_or_else(|| GaugeError::InversionFailure {
                deviation: fnorm,
                tolerance: self.tolerance,
            })?;
            if converged {
                // one more step removes what is left above rounding
                let trial: [f64; 8] = std::array::from_fn(|k| x[k] - step[k]);
                if let Ok(ft) = self.residual(&trial, &target) {
                    if norm(&ft) < fnorm {
                        return Ok(Spinor::from_reals(&trial));
                    }
                }
                return Ok(Spinor::from_reals(&x));
            }
            let mut t = 1.0;
            loop {
                let trial: [f64; 8] = std::array::from_fn(|k| x[k] - t * step[k]);
                if let Ok(ft) = self.residual(&trial, &target) {
                    let n = norm(&ft);
                    if n < fnorm || t < 1e-4 {
                        x = trial;
                        f = ft;
                        fnorm = n;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-4 {
                    return Err(GaugeError::InversionFailure {
                        deviation: fnorm,
                        tolerance: self.tolerance,
                    });
                }
            }
        }
        if fnorm <= self.tolerance * scale * 10.0 {
            return Ok(Spinor::from_reals(&x));
        }
        Err(GaugeError::InversionFailure {
            deviation: fnorm,
            tolerance: self.tolerance,
        })
    }

    fn requirements(&self) -> Requirements {
        self.forward.requirements()
    }

    fn describe(&self) -> String {
        format!("inverse of {}", self.forward.describe())
    }
}
