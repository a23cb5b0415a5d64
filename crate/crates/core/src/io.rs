//! Trajectory files and CSV tables.
//!
//! A trajectory file is a JSON object
//!
//! ```text
//! { "format": "nonmarkov-trajectory", "version": 1, "dim": d,
//!   "model": <model description or null>,
//!   "times": [t_0, ..., t_{N-1}],
//!   "maps": [[re, im, re, im, ...], ...] }
//! ```
//!
//! where each map is the `d²×d²` matrix of `Λ_{t_k}` acting on column-major
//! vectorized operators, itself stored column-major with interleaved real
//! and imaginary parts. Floats use shortest round-trip formatting, so export
//! followed by import reproduces every bit.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::ModelDesc;
use crate::dynamics::{Superoperator, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::measures::Verdict;
use crate::operator::CMatrix;
use crate::witness::WitnessSeries;

pub const TRAJECTORY_FORMAT: &str = "nonmarkov-trajectory";
pub const TRAJECTORY_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryFile {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub model: Option<ModelDesc>,
    pub times: Vec<f64>,
    pub maps: Vec<Vec<f64>>,
}

impl TrajectoryFile {
    pub fn from_trajectory(traj: &Trajectory, model: Option<&ModelDesc>) -> Self {
        let maps = traj.maps().iter().map(|m| m.matrix().iter().flat_map(|z| [z.re, z.im]).collect()).collect();
        Self {
            format: TRAJECTORY_FORMAT.into(),
            version: TRAJECTORY_VERSION,
            dim: traj.dim(),
            model: model.cloned(),
            times: traj.times().to_vec(),
            maps,
        }
    }

    /// Rebuilds and validates the trajectory; the model, when present, is
    /// prepared on the file's grid.
    pub fn into_trajectory(self) -> Result<Trajectory> {
        if self.format != TRAJECTORY_FORMAT {
            return Err(Error::Format(format!("format `{}` is not `{TRAJECTORY_FORMAT}`", self.format)));
        }
        if self.version != TRAJECTORY_VERSION {
            return Err(Error::Format(format!("unsupported version {}", self.version)));
        }
        let d = self.dim;
        if d == 0 {
            return Err(Error::Format("dim must be positive".into()));
        }
        let n = d * d;
        let mut maps = Vec::with_capacity(self.maps.len());
        for (k, raw) in self.maps.iter().enumerate() {
            if raw.len() != 2 * n * n {
                return Err(Error::TrajectoryNode {
                    node: k,
                    reason: format!("{} numbers where {} are needed", raw.len(), 2 * n * n),
                });
            }
            let m = CMatrix::from_iterator(n, n, raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])));
            maps.push(Superoperator::new(d, m)?);
        }
        let model = match &self.model {
            Some(desc) => {
                let mut model = desc.build()?;
                if model.dim() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: model.dim() });
                }
                let grid =
                    TimeGrid::from_times(self.times.clone()).map_err(|e| Error::InvalidTrajectory(e.to_string()))?;
                model.prepare(&grid)?;
                Some(model)
            }
            None => None,
        };
        Trajectory::new(self.times, maps, model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn export_trajectory(path: &Path, traj: &Trajectory, model: Option<&ModelDesc>) -> Result<()> {
    write_file(path, &TrajectoryFile::from_trajectory(traj, model).to_json())
}

/// Reads and validates a trajectory file, returning the model description
/// alongside.
pub fn read_trajectory(path: &Path) -> Result<(Trajectory, Option<ModelDesc>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
    let file = TrajectoryFile::from_json(&text)?;
    let desc = file.model.as_ref().map(|m| m.resolve()).transpose()?;
    Ok((file.into_trajectory()?, desc))
}

pub fn import_trajectory(path: &Path) -> Result<Trajectory> {
    read_trajectory(path).map(|(t, _)| t)
}

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".into()
    }
}

/// Columns `t,value,violating`.
pub fn witness_csv(series: &WitnessSeries) -> String {
    let mut out = String::from("t,value,violating\n");
    for ((&t, &v), bad) in series.times.iter().zip(&series.values).zip(series.violating()) {
        writeln!(out, "{},{},{}", format_float(t), format_float(v), u8::from(bad)).expect("string write");
    }
    out
}

/// Columns `t,g,choi_min_eigenvalue`: `g(t)` at the node and the minimum
/// Choi eigenvalue of the step starting there (`nan` when unavailable).
pub fn diagnostics_csv(times: &[f64], g: Option<&[f64]>, verdict: &Verdict) -> String {
    let mut out = String::from("t,g,choi_min_eigenvalue\n");
    for (k, &t) in times.iter().enumerate() {
        let gk = g.map_or(f64::NAN, |g| g[k]);
        let choi = verdict.steps.get(k).and_then(|s| s.min_eigenvalue).unwrap_or(f64::NAN);
        writeln!(out, "{},{},{}", format_float(t), format_float(gk), format_float(choi)).expect("string write");
    }
    out
}
