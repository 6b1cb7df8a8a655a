use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpinorField;
use crate::error::{GaugeError, Result};
use crate::gamma::{gammas, lower_index, Mat4, Spinor};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySign {
    #[default]
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveSpec {
    #[serde(default = "unit_mass")]
    pub mass: f64,
    #[serde(default)]
    pub momentum: [f64; 3],
    /// Index of the two-component basis spinor χ_s, s ∈ {0, 1}.
    #[serde(default)]
    pub spin: u8,
    #[serde(default)]
    pub energy: EnergySign,
}

fn unit_mass() -> f64 {
    1.0
}

impl PlaneWaveSpec {
    pub fn new(mass: f64, momentum: [f64; 3], spin: u8, energy: EnergySign) -> Self {
        PlaneWaveSpec {
            mass,
            momentum,
            spin,
            energy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass >= 0.0) || !self.mass.is_finite() {
            return Err(GaugeError::InvalidSpec(format!("mass {} must be ≥ 0", self.mass)));
        }
        if self.momentum.iter().any(|p| !p.is_finite()) {
            return Err(GaugeError::InvalidSpec("momentum must be finite".into()));
        }
        if self.mass == 0.0 && self.momentum.iter().all(|&p| p == 0.0) {
            return Err(GaugeError::InvalidSpec("massless wave needs nonzero momentum".into()));
        }
        if self.spin > 1 {
            return Err(GaugeError::InvalidSpec(format!("spin index {} not in {{0, 1}}", self.spin)));
        }
        Ok(())
    }

    /// E = √(p⃗² + m²).
    pub fn energy_magnitude(&self) -> f64 {
        let p2: f64 = self.momentum.iter().map(|p| p * p).sum();
        (p2 + self.mass * self.mass).sqrt()
    }

    /// Contravariant four-momentum p^μ, with p⁰ = ±E.
    pub fn four_momentum(&self) -> [f64; 4] {
        let e = match self.energy {
            EnergySign::Positive => self.energy_magnitude(),
            EnergySign::Negative => -self.energy_magnitude(),
        };
        [e, self.momentum[0], self.momentum[1], self.momentum[2]]
    }
}

/// ψ(x) = u e^{−ip·x} with u†u = 2E.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWave {
    pub spec: PlaneWaveSpec,
    pub amplitude: Spinor,
    /// Covariant p_μ.
    pub p_lower: [f64; 4],
}

/// σ·p applied to a two-component spinor.
fn sigma_dot(p: [f64; 3], chi: [Complex64; 2]) -> [Complex64; 2] {
    let i = Complex64::new(0.0, 1.0);
    let (px, py, pz) = (p[0], p[1], p[2]);
    [
        chi[0] * pz + chi[1] * (px - i * py),
        chi[0] * (px + i * py) - chi[1] * pz,
    ]
}

impl PlaneWave {
    pub fn new(spec: PlaneWaveSpec) -> Result<Self> {
        spec.validate()?;
        let e = spec.energy_magnitude();
        let em = e + spec.mass;
        let norm = em.sqrt();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let chi = if spec.spin == 0 { [one, zero] } else { [zero, one] };
        let sp = sigma_dot(spec.momentum, chi).map(|c| c / em);
        let amplitude = match spec.energy {
            EnergySign::Positive => Spinor([chi[0], chi[1], sp[0], sp[1]]),
            EnergySign::Negative => Spinor([-sp[0], -sp[1], chi[0], chi[1]]),
        }
        .scale(Complex64::new(norm, 0.0));
        Ok(PlaneWave {
            spec,
            amplitude,
            p_lower: lower_index(spec.four_momentum()),
        })
    }

    /// p·x = p_μ x^μ.
    pub fn phase(&self, x: &[f64; 4]) -> f64 {
        (0..4).map(|mu| self.p_lower[mu] * x[mu]).sum()
    }

    /// (γ^μ p_μ − m) u, zero up to rounding.
    pub fn algebraic_residual(&self) -> Spinor {
        let op = gammas().slash(&self.p_lower) - Mat4::identity().scale(Complex64::new(self.spec.mass, 0.0));
        op * self.amplitude
    }
}

pub fn plane_wave(spec: PlaneWaveSpec) -> Result<PlaneWave> {
    PlaneWave::new(spec)
}

impl SpinorField for PlaneWave {
    fn eval(&self, x: &[f64; 4]) -> Result<Spinor> {
        Ok(self.amplitude.scale(Complex64::from_polar(1.0, -self.phase(x))))
    }

    fn describe(&self) -> String {
        format!(
            "plane wave m = {}, p = {:?}, s = {}, {:?} energy",
            self.spec.mass, self.spec.momentum, self.spec.spin, self.spec.energy
        )
    }
}

/// A finite sum Σ c_k ψ_k of plane waves of equal mass. Each term solves
/// the free equation, so the sum does too; unlike a single wave it can
/// carry a nonzero pseudoscalar ψ̄γ₅ψ.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveSum {
    pub terms: Vec<(Complex64, PlaneWave)>,
}

impl WaveSum {
    pub fn new(terms: Vec<(Complex64, PlaneWaveSpec)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(GaugeError::InvalidSpec("empty superposition".into()));
        }
        let m = terms[0].1.mass;
        let mut out = Vec::with_capacity(terms.len());
        for (c, spec) in terms {
            if spec.mass != m {
                return Err(GaugeError::InvalidSpec("superposed waves must share the mass".into()));
            }
            out.push((c, PlaneWave::new(spec)?));
        }
        Ok(WaveSum { terms: out })
    }

    pub fn mass(&self) -> f64 {
        self.terms[0].1.spec.mass
    }
}

impl SpinorField for WaveSum {
    fn eval(&self, x: &[f64; 4]) -> Result<Spinor> {
        let mut acc = Spinor::default();
        for (c, w) in &self.terms {
            acc += w.eval(x)?.scale(*c);
        }
        Ok(acc)
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, w)| format!("({c})·[{}]", w.describe()))
            .collect();
        parts.join(" + ")
    }
}
