use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Grid4, SpinorField};
use crate::error::{GaugeError, Result};
use crate::gamma::Spinor;

/// A field known on the nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    pub grid: Grid4,
    pub data: Vec<Spinor>,
    pub provenance: String,
}

/// JSON description written next to a binary dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidecarMeta {
    pub format: String,
    pub byte_order: String,
    pub header: String,
    pub payload: String,
    pub extents: [usize; 4],
    pub spacing: [f64; 4],
    pub origin: [f64; 4],
    pub provenance: String,
}

const HEADER_BYTES: usize = 4 * 8 * 3;

impl SampledField {
    /// Samples `field` at every node (in parallel).
    pub fn sample(field: &dyn SpinorField, grid: Grid4) -> Result<Self> {
        grid.validate()?;
        let data = (0..grid.len())
            .into_par_iter()
            .map(|k| field.eval(&grid.point(grid.unravel(k))))
            .collect::<Result<Vec<_>>>()?;
        Ok(SampledField {
            grid,
            data,
            provenance: field.describe(),
        })
    }

    pub fn sidecar(&self) -> SidecarMeta {
        SidecarMeta {
            format: "gaugeforge sampled spinor field v1".into(),
            byte_order: "little-endian".into(),
            header: "4 × u64 extents (t, x, y, z), 4 × f64 spacings, 4 × f64 origin".into(),
            payload: "row-major nodes (t slowest, z fastest); per node 4 components as (re, im) f64 pairs".into(),
            extents: self.grid.extents,
            spacing: self.grid.spacing,
            origin: self.grid.origin,
            provenance: self.provenance.clone(),
        }
    }

    /// Writes `path` (binary) and `path` with a `.json` extension appended (sidecar).
    pub fn write(&self, path: &Path) -> std::io::Result<PathBuf> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        for e in self.grid.extents {
            out.write_all(&(e as u64).to_le_bytes())?;
        }
        for v in self.grid.spacing.iter().chain(&self.grid.origin) {
            out.write_all(&v.to_le_bytes())?;
        }
        for s in &self.data {
            for c in &s.0 {
                out.write_all(&c.re.to_le_bytes())?;
                out.write_all(&c.im.to_le_bytes())?;
            }
        }
        out.flush()?;
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        let side = PathBuf::from(side);
        let json = serde_json::to_string_pretty(&self.sidecar()).map_err(std::io::Error::other)?;
        fs::write(&side, json + "\n")?;
        Ok(side)
    }

    /// Reads a binary dump; provenance is taken from the sidecar if present.
    pub fn read(path: &Path) -> Result<Self> {
        let io = |e: std::io::Error| GaugeError::InvalidSpec(format!("{}: {e}", path.display()));
        let bytes = fs::read(path).map_err(io)?;
        if bytes.len() < HEADER_BYTES {
            return Err(GaugeError::InvalidSpec("truncated header".into()));
        }
        let word = |k: usize| -> [u8; 8] { bytes[8 * k..8 * k + 8].try_into().expect("8 bytes") };
        let extents: [usize; 4] = std::array::from_fn(|k| u64::from_le_bytes(word(k)) as usize);
        let spacing: [f64; 4] = std::array::from_fn(|k| f64::from_le_bytes(word(4 + k)));
        let origin: [f64; 4] = std::array::from_fn(|k| f64::from_le_bytes(word(8 + k)));
        let grid = Grid4::new(origin, spacing, extents)?;
        let payload = &bytes[HEADER_BYTES..];
        if payload.len() != grid.len() * 64 {
            return Err(GaugeError::InvalidSpec(format!(
                "payload has {} bytes, expected {}",
                payload.len(),
                grid.len() * 64
            )));
        }
        let f = |k: usize| f64::from_le_bytes(payload[8 * k..8 * k + 8].try_into().expect("8 bytes"));
        let data = (0..grid.len())
            .map(|n| Spinor(std::array::from_fn(|j| Complex64::new(f(8 * n + 2 * j), f(8 * n + 2 * j + 1)))))
            .collect();
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        let provenance = fs::read_to_string(PathBuf::from(side))
            .ok()
            .and_then(|s| serde_json::from_str::<SidecarMeta>(&s).ok())
            .map(|m| m.provenance)
            .unwrap_or_default();
        Ok(SampledField { grid, data, provenance })
    }
}

impl SpinorField for SampledField {
    fn eval(&self, x: &[f64; 4]) -> Result<Spinor> {
        let idx = self
            .grid
            .node_at(x)
            .ok_or_else(|| GaugeError::OutOfDomain(format!("{x:?} is not a grid node")))?;
        Ok(self.data[self.grid.linear(idx)])
    }

    fn describe(&self) -> String {
        format!("sampled on {:?} nodes: {}", self.grid.extents, self.provenance)
    }

    fn grid(&self) -> Option<&Grid4> {
        Some(&self.grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{four_gradient, EnergySign, PlaneWave, PlaneWaveSpec, StencilOrder};

    fn wave() -> PlaneWave {
        PlaneWave::new(PlaneWaveSpec::new(1.0, [0.5, 0.0, -0.2], 0, EnergySign::Positive)).unwrap()
    }

    #[test]
    fn dump_round_trip() {
        let grid = Grid4::new([0.0, 0.1, 0.2, 0.3], [0.01, 0.02, 0.03, 0.04], [3, 2, 4, 5]).unwrap();
        let sampled = SampledField::sample(&wave(), grid).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.bin");
        let side = sampled.write(&path).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len() as usize, HEADER_BYTES + grid.len() * 64);
        let meta: SidecarMeta = serde_json::from_str(&fs::read_to_string(side).unwrap()).unwrap();
        assert_eq!(meta.extents, [3, 2, 4, 5]);
        let back = SampledField::read(&path).unwrap();
        assert_eq!(back, sampled);
    }

    #[test]
    fn sampled_gradient_matches_analytic_and_checks_bounds() {
        let h = 0.01;
        let grid = Grid4::new([0.0; 4], [h; 4], [9; 4]).unwrap();
        let sampled = SampledField::sample(&wave(), grid).unwrap();
        let x = grid.point([4, 4, 4, 4]);
        let a = four_gradient(&sampled, &x, h, StencilOrder::Fourth).unwrap();
        let b = four_gradient(&wave(), &x, h, StencilOrder::Fourth).unwrap();
        for mu in 0..4 {
            assert!((a[mu] - b[mu]).norm() < 1e-12);
        }
        let edge = grid.point([1, 4, 4, 4]);
        assert!(matches!(
            four_gradient(&sampled, &edge, h, StencilOrder::Fourth),
            Err(GaugeError::OutOfDomain(_))
        ));
        assert!(four_gradient(&sampled, &edge, h, StencilOrder::Second).is_ok());
        assert!(matches!(
            four_gradient(&sampled, &[0.005, 0.04, 0.04, 0.04], h, StencilOrder::Second),
            Err(GaugeError::OutOfDomain(_))
        ));
    }
}
