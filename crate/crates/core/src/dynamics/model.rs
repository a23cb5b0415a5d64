//! Time-local generators `L_t` and their closed-form propagators where available.

use num_complex::Complex64 as C64;

use super::kernel::{solve_memory_kernel, KernelSolution, MemoryKernel};
use super::scalar::ScalarFn;
use super::superop::Superoperator;
use super::trajectory::TimeGrid;
use crate::error::{Error, Result};
use crate::operator::pauli::{sigma_minus, sigma_plus, sigma_z};
use crate::operator::{CMatrix, HermitianOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianTerm {
    pub operator: HermitianOperator,
    pub coefficient: ScalarFn,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTerm {
    pub operator: CMatrix,
    pub rate: ScalarFn,
}

/// `L_t ρ = −i[H_t, ρ] + Σ_α γ_α(t)(V_α ρ V_α† − ½{V_α†V_α, ρ})` with
/// `H_t = Σ_k c_k(t) H_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GkslGenerator {
    pub dim: usize,
    pub hamiltonian: Vec<HamiltonianTerm>,
    pub noise: Vec<NoiseTerm>,
}

/// `ω_t = base + amplitude(t) · direction`, with `Tr base = 1` and `Tr direction = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaFamily {
    pub base: HermitianOperator,
    pub direction: HermitianOperator,
    pub amplitude: ScalarFn,
}

impl OmegaFamily {
    pub fn new(base: HermitianOperator, direction: HermitianOperator, amplitude: ScalarFn) -> Result<Self> {
        if base.dim() != direction.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), found: direction.dim() });
        }
        if (base.trace() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidModel(format!("omega base must have unit trace (got {})", base.trace())));
        }
        if direction.trace().abs() > 1e-10 {
            return Err(Error::InvalidModel("omega direction must be traceless".into()));
        }
        amplitude.validate()?;
        Ok(Self { base, direction, amplitude })
    }

    pub fn constant(omega: HermitianOperator) -> Result<Self> {
        let d = omega.dim();
        Self::new(omega, HermitianOperator::zeros(d), ScalarFn::constant(0.0))
    }

    pub fn at(&self, t: f64) -> HermitianOperator {
        &self.base + &self.direction.scale(self.amplitude.eval(t))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinBoson {
    pub kernel: MemoryKernel,
    solution: Option<KernelSolution>,
}

impl SpinBoson {
    pub fn new(kernel: MemoryKernel) -> Self {
        Self { kernel, solution: None }
    }

    pub fn solution(&self) -> Option<&KernelSolution> {
        self.solution.as_ref()
    }

    pub fn solve(&mut self, step: f64, nodes: usize) -> Result<&KernelSolution> {
        Ok(self.solution.insert(solve_memory_kernel(&self.kernel, step, nodes)?))
    }

    fn solved(&self, t: f64) -> Result<&KernelSolution> {
        self.solution.as_ref().ok_or(Error::KernelUnsolved { t })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorModel {
    Gksl(GkslGenerator),
    /// `L_t ρ = ½ γ(t)(σ_z ρ σ_z − ρ)`
    Dephasing {
        gamma: ScalarFn,
    },
    /// `L_t ρ = γ(t)(ω_t Tr ρ − ρ)`
    TraceReplacement {
        gamma: ScalarFn,
        omega: OmegaFamily,
    },
    SpinBoson(SpinBoson),
}

const GL_X: [f64; 4] = [0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363];
const GL_W: [f64; 4] = [0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

/// Composite 8-point Gauss-Legendre.
fn quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in GL_X.iter().zip(&GL_W) {
            total += w * (f(mid - half * x) + f(mid + half * x));
        }
    }
    total * 0.5 * h
}

impl GeneratorModel {
    pub fn dephasing(gamma: ScalarFn) -> Self {
        GeneratorModel::Dephasing { gamma }
    }

    pub fn trace_replacement(gamma: ScalarFn, omega: OmegaFamily) -> Self {
        GeneratorModel::TraceReplacement { gamma, omega }
    }

    pub fn spin_boson(kernel: MemoryKernel) -> Self {
        GeneratorModel::SpinBoson(SpinBoson::new(kernel))
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorModel::Gksl(_) => "gksl",
            GeneratorModel::Dephasing { .. } => "dephasing",
            GeneratorModel::TraceReplacement { .. } => "trace_replacement",
            GeneratorModel::SpinBoson(_) => "spin_boson",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GeneratorModel::Gksl(g) => g.dim,
            GeneratorModel::Dephasing { .. } | GeneratorModel::SpinBoson(_) => 2,
            GeneratorModel::TraceReplacement { omega, .. } => omega.base.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GeneratorModel::Gksl(g) => {
                if g.dim == 0 {
                    return Err(Error::InvalidModel("gksl dimension must be positive".into()));
                }
                for h in &g.hamiltonian {
                    if h.operator.dim() != g.dim {
                        return Err(Error::DimensionMismatch { expected: g.dim, found: h.operator.dim() });
                    }
                    h.coefficient.validate()?;
                }
                for n in &g.noise {
                    if n.operator.nrows() != g.dim || n.operator.ncols() != g.dim {
                        return Err(Error::DimensionMismatch { expected: g.dim, found: n.operator.nrows() });
                    }
                    n.rate.validate()?;
                }
                Ok(())
            }
            GeneratorModel::Dephasing { gamma } => gamma.validate(),
            GeneratorModel::TraceReplacement { gamma, omega } => {
                gamma.validate()?;
                omega.amplitude.validate()
            }
            GeneratorModel::SpinBoson(sb) => sb.kernel.validate(),
        }
    }

    /// Solves whatever auxiliary equations the generator needs on `grid`
    /// (the memory-kernel equation for the spin-boson model).
    pub fn prepare(&mut self, grid: &TimeGrid) -> Result<()> {
        self.validate()?;
        if let GeneratorModel::SpinBoson(sb) = self {
            let step = grid
                .uniform_step()
                .ok_or_else(|| Error::InvalidGrid("spin-boson model needs a uniform grid".into()))?;
            sb.solve(step, grid.len())?;
        }
        Ok(())
    }

    pub fn kernel_solution(&self) -> Option<&KernelSolution> {
        match self {
            GeneratorModel::SpinBoson(sb) => sb.solution(),
            _ => None,
        }
    }

    /// Decay rate `γ(t)` of the single-rate presets.
    pub fn rate(&self, t: f64) -> Result<f64> {
        match self {
            GeneratorModel::Dephasing { gamma } | GeneratorModel::TraceReplacement { gamma, .. } => Ok(gamma.eval(t)),
            GeneratorModel::SpinBoson(sb) => Ok(sb.solved(t)?.rates(t)?.1),
            GeneratorModel::Gksl(_) => Err(Error::InvalidModel("gksl generator has no single rate".into())),
        }
    }

    /// `Γ(t) = ∫₀ᵗ γ` for the dephasing and trace-replacement presets.
    pub fn integrated_rate(&self, t: f64) -> Option<f64> {
        match self {
            GeneratorModel::Dephasing { gamma } | GeneratorModel::TraceReplacement { gamma, .. } => {
                Some(gamma.integral(t))
            }
            _ => None,
        }
    }

    /// The `d²×d²` matrix of `L_t`.
    pub fn generator(&self, t: f64) -> Result<Superoperator> {
        match self {
            GeneratorModel::Gksl(g) => {
                let d = g.dim;
                let mut l = Superoperator::zeros(d);
                for term in &g.hamiltonian {
                    let c = term.coefficient.eval(t);
                    let h = term.operator.matrix();
                    let comm = Superoperator::left(h).add(&Superoperator::right(h).scale(-1.0));
                    l = l.add(&comm.scale_complex(C64::new(0.0, -c)));
                }
                for term in &g.noise {
                    l = l.add(&dissipator(&term.operator).scale(term.rate.eval(t)));
                }
                Ok(l)
            }
            GeneratorModel::Dephasing { gamma } => {
                let z = sigma_z();
                let map = Superoperator::sandwich(&z, &z).add(&Superoperator::identity(2).scale(-1.0));
                Ok(map.scale(0.5 * gamma.eval(t)))
            }
            GeneratorModel::TraceReplacement { gamma, omega } => {
                let w = omega.at(t);
                let d = w.dim();
                let map = Superoperator::replacement(w.matrix()).add(&Superoperator::identity(d).scale(-1.0));
                Ok(map.scale(gamma.eval(t)))
            }
            GeneratorModel::SpinBoson(sb) => {
                let (s, gamma) = sb.solved(t)?.rates(t)?;
                let n = sigma_plus() * sigma_minus();
                let comm = Superoperator::left(&n).add(&Superoperator::right(&n).scale(-1.0));
                let l = comm.scale_complex(C64::new(0.0, -0.5 * s)).add(&dissipator(&sigma_minus()).scale(gamma));
                Ok(l)
            }
        }
    }

    pub fn has_analytic(&self) -> bool {
        !matches!(self, GeneratorModel::Gksl(_))
    }

    /// Closed-form `Λ_t`. For the spin-boson model this is the map built from
    /// the solved `G(t)`.
    pub fn analytic_map(&self, t: f64) -> Result<Superoperator> {
        match self {
            GeneratorModel::Gksl(_) => Err(Error::NoAnalyticBackend("gksl")),
            GeneratorModel::Dephasing { gamma } => {
                let damp = (-gamma.integral(t)).exp();
                let m = CMatrix::from_fn(4, 4, |r, c| {
                    let v = match (r, c) {
                        (0, 0) | (3, 3) => 1.0,
                        (1, 1) | (2, 2) => damp,
                        _ => 0.0,
                    };
                    C64::new(v, 0.0)
                });
                Ok(Superoperator::from_parts(2, m))
            }
            GeneratorModel::TraceReplacement { gamma, omega } => {
                let d = omega.base.dim();
                let big_gamma = gamma.integral(t);
                let damp = (-big_gamma).exp();
                // W_t = e^{−Γ(t)} ∫₀ᵗ γ e^{Γ} ω_τ dτ = (1 − e^{−Γ}) base + K(t) direction
                let k = weighted_amplitude(gamma, &omega.amplitude, t);
                let w = &omega.base.scale(1.0 - damp) + &omega.direction.scale(k);
                Ok(Superoperator::identity(d).scale(damp).add(&Superoperator::replacement(w.matrix())))
            }
            GeneratorModel::SpinBoson(sb) => {
                let (g, _) = sb.solved(t)?.at(t)?;
                Ok(spin_boson_map(g))
            }
        }
    }

    /// `Ω_t = (e^{Γ(t)} − 1)⁻¹ ∫₀ᵗ γ(τ) e^{Γ(τ)} ω_τ dτ` for the trace-replacement model.
    pub fn omega_average(&self, t: f64) -> Result<HermitianOperator> {
        let GeneratorModel::TraceReplacement { gamma, omega } = self else {
            return Err(Error::InvalidModel(format!(
                "omega_average needs a trace_replacement model, got {}",
                self.name()
            )));
        };
        let big_gamma = gamma.integral(t);
        if big_gamma.abs() <= 1e-12 {
            if t.abs() <= 1e-12 {
                return Ok(omega.at(0.0));
            }
            return Err(Error::DegenerateAverage { t });
        }
        let k = weighted_amplitude(gamma, &omega.amplitude, t);
        let ratio = k / (1.0 - (-big_gamma).exp());
        Ok(&omega.base + &omega.direction.scale(ratio))
    }
}

/// `K(t) = ∫₀ᵗ γ(τ) e^{Γ(τ) − Γ(t)} a(τ) dτ`.
fn weighted_amplitude(gamma: &ScalarFn, amplitude: &ScalarFn, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let gt = gamma.integral(t);
    let panels = ((t / 0.05).ceil() as usize).max(8);
    quadrature(|tau| gamma.eval(tau) * (gamma.integral(tau) - gt).exp() * amplitude.eval(tau), 0.0, t, panels)
}

/// `ρ ↦ VρV† − ½{V†V, ρ}`.
pub fn dissipator(v: &CMatrix) -> Superoperator {
    let vdv = v.adjoint() * v;
    Superoperator::sandwich(v, &v.adjoint())
        .add(&Superoperator::left(&vdv).scale(-0.5))
        .add(&Superoperator::right(&vdv).scale(-0.5))
}

/// `ρ₁₁ + (1−|G|²)ρ₂₂, |G|²ρ₂₂, ρ₁₂ ↦ G* ρ₁₂` in the `σ₋ = |1⟩⟨2|` convention.
pub fn spin_boson_map(g: C64) -> Superoperator {
    let p = g.norm_sqr();
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = C64::new(1.0, 0.0);
    m[(0, 3)] = C64::new(1.0 - p, 0.0);
    m[(3, 3)] = C64::new(p, 0.0);
    m[(2, 2)] = g.conj();
    m[(1, 1)] = g;
    Superoperator::from_parts(2, m)
}
