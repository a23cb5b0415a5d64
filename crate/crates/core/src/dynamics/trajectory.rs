use serde::{Deserialize, Serialize};

use super::model::GeneratorModel;
use super::ode::{integrate, OdeOptions};
use super::superop::Superoperator;
use crate::error::{Error, Result};
use crate::operator::{CMatrix, CVector};

/// Tolerance on `Λ_{t₀} = id`.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance on trace preservation of every node.
pub const TP_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(t_max: f64, nodes: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("t_max must be positive and finite (got {t_max})")));
        }
        if nodes < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        let h = t_max / (nodes - 1) as f64;
        let mut times: Vec<f64> = (0..nodes).map(|k| k as f64 * h).collect();
        times[nodes - 1] = t_max;
        Ok(Self { times })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidGrid("grid must start at 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("grid must be finite and strictly increasing".into()));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().expect("non-empty grid")
    }

    /// The common spacing when the grid is uniform to 1e-9 relative.
    pub fn uniform_step(&self) -> Option<f64> {
        uniform_step(&self.times)
    }
}

fn uniform_step(times: &[f64]) -> Option<f64> {
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h).then_some(h)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Closed-form maps (dephasing, trace replacement) or the map assembled
    /// from the solved memory kernel (spin-boson).
    #[default]
    Analytic,
    /// Adaptive RK45 integration of `dΛ/dt = L_t Λ`.
    Numeric,
}

/// Dynamical map sampled on a grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    maps: Vec<Superoperator>,
    model: Option<GeneratorModel>,
}

impl Trajectory {
    /// Validates `Λ₀ = id`, dimensions, and trace preservation at every node.
    pub fn new(times: Vec<f64>, maps: Vec<Superoperator>, model: Option<GeneratorModel>) -> Result<Self> {
        let grid = TimeGrid::from_times(times).map_err(|e| Error::InvalidTrajectory(e.to_string()))?;
        if maps.len() != grid.len() {
            return Err(Error::InvalidTrajectory(format!("{} maps for {} grid nodes", maps.len(), grid.len())));
        }
        let d = maps[0].dim();
        for (k, m) in maps.iter().enumerate() {
            if m.dim() != d {
                return Err(Error::TrajectoryNode {
                    node: k,
                    reason: format!("dimension {} differs from {d}", m.dim()),
                });
            }
            if m.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::TrajectoryNode { node: k, reason: "non-finite entry".into() });
            }
            let dev = m.trace_deviation();
            if dev > TP_TOL {
                return Err(Error::TrajectoryNode {
                    node: k,
                    reason: format!("not trace preserving (deviation {dev:e})"),
                });
            }
        }
        let dev0 = maps[0].max_abs_diff(&Superoperator::identity(d));
        if dev0 > IDENTITY_TOL {
            return Err(Error::TrajectoryNode {
                node: 0,
                reason: format!("initial map is not the identity (deviation {dev0:e})"),
            });
        }
        Ok(Self { times: grid.times, maps, model })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn maps(&self) -> &[Superoperator] {
        &self.maps
    }

    pub fn map(&self, k: usize) -> &Superoperator {
        &self.maps[k]
    }

    pub fn model(&self) -> Option<&GeneratorModel> {
        self.model.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn uniform_step(&self) -> Option<f64> {
        uniform_step(&self.times)
    }

    /// Index of the node at `t`, if `t` is a grid node (to round-off).
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * self.t_max().max(1.0);
        let k = self.times.partition_point(|&x| x < t - tol);
        (k < self.times.len() && (self.times[k] - t).abs() <= tol).then_some(k)
    }

    /// `Λ_t`, exact at nodes and cubic (four-node Lagrange) in between.
    pub fn map_at(&self, t: f64) -> Result<Superoperator> {
        if let Some(k) = self.node_index(t) {
            return Ok(self.maps[k].clone());
        }
        let (start, end) = (self.times[0], self.t_max());
        if t < start || t > end {
            return Err(Error::OutOfHorizon { t, start, end });
        }
        let n = self.times.len();
        let right = self.times.partition_point(|&x| x < t);
        let lo = right.saturating_sub(2).min(n.saturating_sub(4));
        let hi = (lo + 4).min(n);
        let d = self.dim();
        let mut acc = Superoperator::zeros(d);
        for i in lo..hi {
            let mut w = 1.0;
            for j in lo..hi {
                if i != j {
                    w *= (t - self.times[j]) / (self.times[i] - self.times[j]);
                }
            }
            acc = acc.add(&self.maps[i].scale(w));
        }
        Ok(acc)
    }

    /// Intermediate propagator `V_{t,s} = Λ_t Λ_s⁻¹`.
    pub fn intermediate_map(&self, t: f64, s: f64) -> Result<Superoperator> {
        if t < s {
            return Err(Error::InvalidGrid(format!("intermediate map needs t >= s (t = {t}, s = {s})")));
        }
        let lam_t = self.map_at(t)?;
        let lam_s = self.map_at(s)?;
        Ok(lam_t.compose(&lam_s.inverse(s)?))
    }

    /// Intermediate propagator between two node indices.
    pub fn intermediate_between(&self, k_t: usize, k_s: usize) -> Result<Superoperator> {
        if k_t < k_s {
            return Err(Error::InvalidGrid("intermediate map needs t >= s".into()));
        }
        Ok(self.maps[k_t].compose(&self.maps[k_s].inverse(self.times[k_s])?))
    }
}

/// Builds `Λ_t` on `grid` from `Λ₀ = id`.
pub fn evolve(model: &GeneratorModel, grid: &TimeGrid, backend: Backend, opts: &OdeOptions) -> Result<Trajectory> {
    let mut model = model.clone();
    model.prepare(grid)?;
    let maps = match backend {
        Backend::Analytic => {
            if !model.has_analytic() {
                return Err(Error::NoAnalyticBackend(model.name()));
            }
            grid.times().iter().map(|&t| model.analytic_map(t)).collect::<Result<Vec<_>>>()?
        }
        Backend::Numeric => {
            if let Some(sol) = model.kernel_solution() {
                check_no_zero_crossing(sol)?;
            }
            integrate_maps(&model, grid, opts)?
        }
    };
    let mut maps = maps;
    maps[0] = Superoperator::identity(model.dim());
    Trajectory::new(grid.times().to_vec(), maps, Some(model))
}

fn integrate_maps(model: &GeneratorModel, grid: &TimeGrid, opts: &OdeOptions) -> Result<Vec<Superoperator>> {
    let d = model.dim();
    let n = d * d;
    let id = CMatrix::identity(n, n);
    let y0 = CVector::from_column_slice(id.as_slice());
    let rhs = |t: f64, y: &CVector| -> Result<CVector> {
        let lam = CMatrix::from_column_slice(n, n, y.as_slice());
        let l = model.generator(t)?;
        let out = l.matrix() * lam;
        Ok(CVector::from_column_slice(out.as_slice()))
    };
    let states = integrate(rhs, 0.0, y0, grid.times(), opts)?;
    Ok(states
        .into_iter()
        .map(|y| Superoperator::new(d, CMatrix::from_column_slice(n, n, y.as_slice())).expect("square"))
        .collect())
}

/// Time-local rates have a pole wherever `G` passes through zero; ODE
/// integration through such a point is ill-posed, so refuse it.
fn check_no_zero_crossing(sol: &super::kernel::KernelSolution) -> Result<()> {
    const FLOOR: f64 = 1e-6;
    const SUB: usize = 8;
    for k in 0..sol.g.len() - 1 {
        let mut prev = (k as f64 * sol.step, sol.at(k as f64 * sol.step)?.0);
        for j in 1..=SUB {
            let t = (k as f64 + j as f64 / SUB as f64) * sol.step;
            let (g, _) = sol.at(t)?;
            // distance from the origin to the chord between samples
            let (t0, g0) = prev;
            let dg = g - g0;
            let s = if dg.norm_sqr() > 0.0 { (-(g0.conj() * dg).re / dg.norm_sqr()).clamp(0.0, 1.0) } else { 0.0 };
            let closest = g0 + dg * s;
            if closest.norm() < FLOOR {
                return Err(Error::SingularRates { t: t0 + s * (t - t0), magnitude: closest.norm() });
            }
            prev = (t, g);
        }
    }
    Ok(())
}
