//! Memory-kernel equation `Ġ(t) = −∫₀ᵗ f(t−τ) G(τ) dτ`, `G(0) = 1`, for the
//! spin-boson amplitude.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|G|` the time-local rates `Ġ/G` are treated as singular.
pub const G_FLOOR: f64 = 1e-12;

/// Reservoir correlation function `f(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MemoryKernel {
    /// `f(t) = ½ γ₀ λ e^{−λt}`
    Exponential { gamma0: f64, lambda: f64 },
    /// Linear interpolation through the table, zero beyond the last time.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl MemoryKernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            MemoryKernel::Exponential { gamma0, lambda } => {
                if !(gamma0.is_finite() && *gamma0 > 0.0 && lambda.is_finite() && *lambda > 0.0) {
                    return Err(Error::InvalidModel("exponential kernel needs gamma0 > 0 and lambda > 0".into()));
                }
            }
            MemoryKernel::Tabulated { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::InvalidModel(
                        "tabulated kernel needs matching, non-empty times and values".into(),
                    ));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidModel("tabulated kernel times must be strictly increasing".into()));
                }
                if times.iter().chain(values).any(|x| !x.is_finite()) {
                    return Err(Error::InvalidModel("tabulated kernel entries must be finite".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            MemoryKernel::Exponential { gamma0, lambda } => 0.5 * gamma0 * lambda * (-lambda * t).exp(),
            MemoryKernel::Tabulated { times, values } => {
                let n = times.len();
                if t < times[0] {
                    return values[0];
                }
                if t > times[n - 1] {
                    return 0.0;
                }
                if n == 1 {
                    return values[0];
                }
                let k = (times.partition_point(|&x| x <= t).max(1) - 1).min(n - 2);
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                values[k] + w * (values[k + 1] - values[k])
            }
        }
    }

    /// Closed-form `(G(t), Ġ(t))` for the exponential kernel:
    /// `G = e^{−λt/2}[cosh(dt/2) + (λ/d) sinh(dt/2)]`, `d = √(λ² − 2γ₀λ)`.
    pub fn closed_form(&self, t: f64) -> Option<(C64, C64)> {
        let MemoryKernel::Exponential { gamma0, lambda } = *self else {
            return None;
        };
        let d = C64::new(lambda * lambda - 2.0 * gamma0 * lambda, 0.0).sqrt();
        let damp = (-0.5 * lambda * t).exp();
        if d.norm() < 1e-12 {
            let g = damp * (1.0 + 0.5 * lambda * t);
            let gd = -0.25 * lambda * lambda * t * damp;
            return Some((C64::new(g, 0.0), C64::new(gd, 0.0)));
        }
        let x = d * (0.5 * t);
        let g = (x.cosh() + x.sinh() * lambda / d) * damp;
        let gd = -(x.sinh() / d) * (gamma0 * lambda * damp);
        Some((g, gd))
    }
}

/// `G` and `Ġ` on a uniform grid, as produced by [`solve_memory_kernel`].
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSolution {
    pub step: f64,
    pub g: Vec<C64>,
    pub g_dot: Vec<C64>,
}

impl KernelSolution {
    pub fn horizon(&self) -> f64 {
        self.step * (self.g.len() - 1) as f64
    }

    /// Cubic Hermite interpolation of `G` (and its derivative) between nodes.
    pub fn at(&self, t: f64) -> Result<(C64, C64)> {
        let end = self.horizon();
        if !(t >= -1e-12 && t <= end * (1.0 + 1e-12) + 1e-12) {
            return Err(Error::KernelUnsolved { t });
        }
        let h = self.step;
        let n = self.g.len();
        let k = ((t / h).floor() as usize).min(n - 2);
        let s = ((t - k as f64 * h) / h).clamp(0.0, 1.0);
        let (g0, g1) = (self.g[k], self.g[k + 1]);
        let (d0, d1) = (self.g_dot[k] * h, self.g_dot[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let g =
            g0 * (2.0 * s3 - 3.0 * s2 + 1.0) + d0 * (s3 - 2.0 * s2 + s) + g1 * (-2.0 * s3 + 3.0 * s2) + d1 * (s3 - s2);
        let gd = (g0 * (6.0 * s2 - 6.0 * s)
            + d0 * (3.0 * s2 - 4.0 * s + 1.0)
            + g1 * (-6.0 * s2 + 6.0 * s)
            + d1 * (3.0 * s2 - 2.0 * s))
            / h;
        Ok((g, gd))
    }

    /// Time-local rates `(s(t), γ(t)) = (−2 Im Ġ/G, −2 Re Ġ/G)`.
    pub fn rates(&self, t: f64) -> Result<(f64, f64)> {
        let (g, gd) = self.at(t)?;
        if g.norm() < G_FLOOR {
            return Err(Error::SingularRates { t, magnitude: g.norm() });
        }
        let r = gd / g;
        Ok((-2.0 * r.im, -2.0 * r.re))
    }

    /// `d|G|²/dt = 2 Re(G* Ġ)` at each node.
    pub fn population_derivative(&self) -> Vec<f64> {
        self.g.iter().zip(&self.g_dot).map(|(g, gd)| 2.0 * (g.conj() * gd).re).collect()
    }
}

/// Implicit trapezoidal product-integration scheme on a uniform grid.
///
/// Both the outer ODE step and the memory integral use the trapezoid rule; the
/// unknown `G_{n+1}` appears linearly and is solved for directly.
pub fn solve_memory_kernel(kernel: &MemoryKernel, step: f64, nodes: usize) -> Result<KernelSolution> {
    kernel.validate()?;
    if !(step > 0.0 && step.is_finite()) || nodes < 2 {
        return Err(Error::InvalidGrid("memory-kernel solver needs a positive step and at least two nodes".into()));
    }
    let f: Vec<f64> = (0..nodes).map(|m| kernel.eval(m as f64 * step)).collect();
    let fmax = f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if step * fmax > 0.5 {
        return Err(Error::KernelStepTooLarge { product: step * fmax });
    }
    let h = step;
    let mut g = vec![C64::new(0.0, 0.0); nodes];
    let mut gd = vec![C64::new(0.0, 0.0); nodes];
    g[0] = C64::new(1.0, 0.0);
    let denom = 1.0 + 0.25 * h * h * f[0];
    for m in 1..nodes {
        // known part of h·[½ f_m G_0 + Σ_{j=1}^{m−1} f_{m−j} G_j + ½ f_0 G_m]
        let mut known = g[0] * (0.5 * f[m]);
        for j in 1..m {
            known += g[j] * f[m - j];
        }
        known *= h;
        g[m] = (g[m - 1] + (gd[m - 1] - known) * (0.5 * h)) / denom;
        gd[m] = -(known + g[m] * (0.5 * h * f[0]));
    }
    Ok(KernelSolution { step, g, g_dot: gd })
}
