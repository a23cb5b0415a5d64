//! Run configuration: a TOML file with `model`, `grid`, `witnesses`,
//! `measures` and `output` sections. Operators, states and models are
//! described by tagged tables; there is no expression language.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    Backend, GeneratorModel, GkslGenerator, HamiltonianTerm, MemoryKernel, NoiseTerm, OdeOptions, OmegaFamily,
    ScalarFn, TimeGrid,
};
use crate::error::{Error, Result};
use crate::measures::{SearchConfig, CHOI_TOL};
use crate::operator::pauli::{pauli_string, sigma_minus, sigma_plus};
use crate::operator::{CMatrix, CVector, DensityMatrix, HermitianOperator};
use crate::witness::WitnessSpec;

/// Smallest accepted node count.
pub const MIN_NODES: usize = 16;

fn config_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { field: field.into(), message: message.into() }
}

/// Prefixes validation failures with the offending field.
fn at<T>(field: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        other => config_err(field, other.to_string()),
    })
}

fn one() -> f64 {
    1.0
}

/// Matrix on a finite-dimensional space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorDesc {
    /// `coefficient · σ_a ⊗ σ_b ⊗ …`, letters from `ixyz`.
    Pauli {
        string: String,
        #[serde(default = "one")]
        coefficient: f64,
    },
    /// `|k⟩⟨k|`.
    Basis {
        dim: usize,
        index: usize,
    },
    /// `|ψ⟩⟨ψ|` for the normalized `(re, im)` amplitudes.
    Ket {
        amplitudes: Vec<[f64; 2]>,
    },
    MaximallyMixed {
        dim: usize,
    },
    /// Row-major entries.
    Matrix {
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
    /// Qubit `σ₋ = |1⟩⟨2|`.
    Lowering,
    /// Qubit `σ₊ = |2⟩⟨1|`.
    Raising,
    Sum {
        terms: Vec<OperatorDesc>,
    },
}

fn ket_from(amplitudes: &[[f64; 2]], field: &str) -> Result<CVector> {
    let v = CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|a| C64::new(a[0], a[1])));
    let n = v.norm();
    if amplitudes.is_empty() || !n.is_finite() || n == 0.0 {
        return Err(config_err(field, "amplitudes must be finite and not all zero"));
    }
    Ok(v.unscale(n))
}

fn basis_index(dim: usize, index: usize, field: &str) -> Result<()> {
    if dim == 0 || index >= dim {
        return Err(config_err(field, format!("basis index {index} outside dimension {dim}")));
    }
    Ok(())
}

impl OperatorDesc {
    pub fn matrix(&self, field: &str) -> Result<CMatrix> {
        match self {
            OperatorDesc::Pauli { string, coefficient } => {
                let op = pauli_string(string)
                    .ok_or_else(|| config_err(field, format!("`{string}` is not a Pauli string over ixyz")))?;
                Ok(op.into_matrix() * C64::new(*coefficient, 0.0))
            }
            OperatorDesc::Basis { dim, index } => {
                basis_index(*dim, *index, field)?;
                Ok(DensityMatrix::basis(*dim, *index).into_operator().into_matrix())
            }
            OperatorDesc::Ket { amplitudes } => {
                let v = ket_from(amplitudes, field)?;
                Ok(&v * v.adjoint())
            }
            OperatorDesc::MaximallyMixed { dim } => {
                if *dim == 0 {
                    return Err(config_err(field, "dimension must be positive"));
                }
                Ok(DensityMatrix::maximally_mixed(*dim).into_operator().into_matrix())
            }
            OperatorDesc::Matrix { re, im } => {
                let n = re.len();
                if n == 0 || re.iter().any(|r| r.len() != n) {
                    return Err(config_err(field, "re must be a non-empty square array"));
                }
                if let Some(im) = im {
                    if im.len() != n || im.iter().any(|r| r.len() != n) {
                        return Err(config_err(field, "im must match the shape of re"));
                    }
                }
                let m = CMatrix::from_fn(n, n, |i, j| C64::new(re[i][j], im.as_ref().map_or(0.0, |m| m[i][j])));
                if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(config_err(field, "entries must be finite"));
                }
                Ok(m)
            }
            OperatorDesc::Lowering => Ok(sigma_minus()),
            OperatorDesc::Raising => Ok(sigma_plus()),
            OperatorDesc::Sum { terms } => {
                let mut acc: Option<CMatrix> = None;
                for (i, t) in terms.iter().enumerate() {
                    let m = t.matrix(&format!("{field}.terms[{i}]"))?;
                    acc = Some(match acc {
                        None => m,
                        Some(a) if a.shape() == m.shape() => a + m,
                        Some(a) => {
                            return Err(config_err(
                                field,
                                format!("term {i} has dimension {} != {}", m.nrows(), a.nrows()),
                            ))
                        }
                    });
                }
                acc.ok_or_else(|| config_err(field, "sum needs at least one term"))
            }
        }
    }

    pub fn hermitian(&self, field: &str) -> Result<HermitianOperator> {
        at(field, HermitianOperator::new(self.matrix(field)?))
    }

    pub fn state(&self, field: &str) -> Result<DensityMatrix> {
        at(field, DensityMatrix::new(self.hermitian(field)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KetDesc {
    Basis { dim: usize, index: usize },
    Amplitudes { amplitudes: Vec<[f64; 2]> },
}

impl KetDesc {
    pub fn vector(&self, field: &str) -> Result<CVector> {
        match self {
            KetDesc::Basis { dim, index } => {
                basis_index(*dim, *index, field)?;
                Ok(crate::operator::pauli::ket(*dim, *index))
            }
            KetDesc::Amplitudes { amplitudes } => ket_from(amplitudes, field),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDesc {
    pub operator: OperatorDesc,
    pub coefficient: ScalarFn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseDesc {
    pub operator: OperatorDesc,
    pub rate: ScalarFn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelDesc {
    /// One of [`PRESETS`].
    Preset {
        name: String,
    },
    Dephasing {
        gamma: ScalarFn,
    },
    /// `ω_t = omega + omega_amplitude(t) · omega_direction`.
    TraceReplacement {
        gamma: ScalarFn,
        omega: OperatorDesc,
        #[serde(default)]
        omega_direction: Option<OperatorDesc>,
        #[serde(default)]
        omega_amplitude: Option<ScalarFn>,
    },
    SpinBoson {
        kernel: MemoryKernel,
    },
    Gksl {
        dim: usize,
        #[serde(default)]
        hamiltonian: Vec<HamiltonianDesc>,
        #[serde(default)]
        noise: Vec<NoiseDesc>,
    },
}

pub const PRESETS: [&str; 5] = [
    "sine_dephasing",
    "constant_dephasing",
    "trace_replacement_separation",
    "spin_boson_underdamped",
    "spin_boson_overdamped",
];

pub fn preset(name: &str) -> Option<ModelDesc> {
    let half_z = OperatorDesc::Pauli { string: "z".into(), coefficient: 0.5 };
    Some(match name {
        "sine_dephasing" => ModelDesc::Dephasing { gamma: ScalarFn::sine(1.0, 1.0, 0.0) },
        "constant_dephasing" => ModelDesc::Dephasing { gamma: ScalarFn::constant(1.0) },
        "trace_replacement_separation" => ModelDesc::TraceReplacement {
            gamma: ScalarFn::constant(1.0),
            omega: OperatorDesc::MaximallyMixed { dim: 2 },
            omega_direction: Some(half_z),
            omega_amplitude: Some(ScalarFn::sine(1.2, 1.0, 0.0)),
        },
        "spin_boson_underdamped" => {
            ModelDesc::SpinBoson { kernel: MemoryKernel::Exponential { gamma0: 4.0, lambda: 1.0 } }
        }
        "spin_boson_overdamped" => {
            ModelDesc::SpinBoson { kernel: MemoryKernel::Exponential { gamma0: 1.0, lambda: 4.0 } }
        }
        _ => return None,
    })
}

impl ModelDesc {
    /// Replaces a preset by its concrete description.
    pub fn resolve(&self) -> Result<ModelDesc> {
        match self {
            ModelDesc::Preset { name } => preset(name).ok_or_else(|| {
                config_err("model.name", format!("unknown preset `{name}` (known: {})", PRESETS.join(", ")))
            }),
            other => Ok(other.clone()),
        }
    }

    pub fn build(&self) -> Result<GeneratorModel> {
        let model = match self.resolve()? {
            ModelDesc::Preset { .. } => unreachable!("resolved"),
            ModelDesc::Dephasing { gamma } => GeneratorModel::dephasing(gamma),
            ModelDesc::TraceReplacement { gamma, omega, omega_direction, omega_amplitude } => {
                let base = omega.hermitian("model.omega")?;
                let direction = match omega_direction {
                    Some(d) => d.hermitian("model.omega_direction")?,
                    None => HermitianOperator::zeros(base.dim()),
                };
                let amplitude = omega_amplitude.unwrap_or(ScalarFn::constant(0.0));
                let family = at("model.omega", OmegaFamily::new(base, direction, amplitude))?;
                GeneratorModel::trace_replacement(gamma, family)
            }
            ModelDesc::SpinBoson { kernel } => GeneratorModel::spin_boson(kernel),
            ModelDesc::Gksl { dim, hamiltonian, noise } => {
                let hamiltonian = hamiltonian
                    .iter()
                    .enumerate()
                    .map(|(i, h)| {
                        Ok(HamiltonianTerm {
                            operator: h.operator.hermitian(&format!("model.hamiltonian[{i}].operator"))?,
                            coefficient: h.coefficient.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let noise = noise
                    .iter()
                    .enumerate()
                    .map(|(i, n)| {
                        Ok(NoiseTerm {
                            operator: n.operator.matrix(&format!("model.noise[{i}].operator"))?,
                            rate: n.rate.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                GeneratorModel::Gksl(GkslGenerator { dim, hamiltonian, noise })
            }
        };
        at("model", model.validate())?;
        Ok(model)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WitnessDesc {
    TraceNormExtended { x: OperatorDesc },
    TraceNormPlain { x: OperatorDesc },
    Blp { rho1: OperatorDesc, rho2: OperatorDesc },
    RelativeEntropy { rho: OperatorDesc, sigma: OperatorDesc },
    Renyi { rho: OperatorDesc, sigma: OperatorDesc, alpha: f64 },
    Tsallis { rho: OperatorDesc, sigma: OperatorDesc, q: f64 },
    Fidelity { rho: OperatorDesc, sigma: OperatorDesc },
    Overlap { rho: OperatorDesc, psi0: KetDesc },
    SkewSchrodinger { rho: OperatorDesc, x0: OperatorDesc, p: f64 },
    SkewHeisenberg { sigma0: OperatorDesc, x: OperatorDesc, p: f64 },
    DualOperatorNorm { x: OperatorDesc },
}

impl WitnessDesc {
    pub fn build(&self, field: &str) -> Result<WitnessSpec> {
        let f = |name: &str| format!("{field}.{name}");
        let spec = match self {
            WitnessDesc::TraceNormExtended { x } => WitnessSpec::trace_norm_extended(x.hermitian(&f("x"))?),
            WitnessDesc::TraceNormPlain { x } => WitnessSpec::trace_norm_plain(x.hermitian(&f("x"))?),
            WitnessDesc::Blp { rho1, rho2 } => WitnessSpec::blp(rho1.state(&f("rho1"))?, rho2.state(&f("rho2"))?),
            WitnessDesc::RelativeEntropy { rho, sigma } => {
                WitnessSpec::relative_entropy(rho.state(&f("rho"))?, sigma.state(&f("sigma"))?)
            }
            WitnessDesc::Renyi { rho, sigma, alpha } => {
                WitnessSpec::renyi(rho.state(&f("rho"))?, sigma.state(&f("sigma"))?, *alpha)
            }
            WitnessDesc::Tsallis { rho, sigma, q } => {
                WitnessSpec::tsallis(rho.state(&f("rho"))?, sigma.state(&f("sigma"))?, *q)
            }
            WitnessDesc::Fidelity { rho, sigma } => {
                WitnessSpec::fidelity(rho.state(&f("rho"))?, sigma.state(&f("sigma"))?)
            }
            WitnessDesc::Overlap { rho, psi0 } => WitnessSpec::overlap(rho.state(&f("rho"))?, psi0.vector(&f("psi0"))?),
            WitnessDesc::SkewSchrodinger { rho, x0, p } => {
                WitnessSpec::skew_schrodinger(rho.state(&f("rho"))?, x0.hermitian(&f("x0"))?, *p)
            }
            WitnessDesc::SkewHeisenberg { sigma0, x, p } => {
                WitnessSpec::skew_heisenberg(sigma0.state(&f("sigma0"))?, x.hermitian(&f("x"))?, *p)
            }
            WitnessDesc::DualOperatorNorm { x } => WitnessSpec::dual_operator_norm(x.hermitian(&f("x"))?),
        };
        at(field, spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntry {
    /// File-name stem for the series; defaults to `<kind>_<index>`.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(flatten)]
    pub witness: WitnessDesc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    #[serde(default)]
    pub backend: Backend,
    #[serde(flatten)]
    pub desc: ModelDesc,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_max: f64,
    pub nodes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasuresSection {
    pub enabled: bool,
    pub verdict_tolerance: f64,
    pub search: SearchConfig,
}

impl Default for MeasuresSection {
    fn default() -> Self {
        Self { enabled: true, verdict_tolerance: CHOI_TOL, search: SearchConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Also write the sampled maps as a trajectory file.
    pub trajectory: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), trajectory: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(default)]
    pub witnesses: Vec<WitnessEntry>,
    #[serde(default)]
    pub measures: MeasuresSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Integrator tolerances for the numeric backend.
    #[serde(default)]
    pub solver: OdeOptions,
}

/// A configuration with every descriptor built and checked.
#[derive(Clone, Debug)]
pub struct ValidatedRun {
    pub config: RunConfig,
    /// The model description with presets expanded.
    pub model_desc: ModelDesc,
    pub model: GeneratorModel,
    pub grid: TimeGrid,
    pub witnesses: Vec<(String, WitnessSpec)>,
}

fn valid_label(label: &str) -> bool {
    !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e.span().map_or_else(|| "config".to_string(), |s| field_at(text, s.start));
            config_err(field, e.message().trim().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<ValidatedRun> {
        let GridSection { t_max, nodes } = self.grid;
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(config_err("grid.t_max", format!("must be positive and finite (got {t_max})")));
        }
        if nodes < MIN_NODES {
            return Err(config_err("grid.nodes", format!("must be at least {MIN_NODES} (got {nodes})")));
        }
        let grid = at("grid", TimeGrid::uniform(t_max, nodes))?;
        let model_desc = self.model.desc.resolve()?;
        let model = model_desc.build()?;
        at("measures.search", self.measures.search.validate())?;
        at("solver", self.solver.validate())?;
        let tol = self.measures.verdict_tolerance;
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(config_err("measures.verdict_tolerance", format!("must be non-negative (got {tol})")));
        }
        let mut witnesses: Vec<(String, WitnessSpec)> = Vec::with_capacity(self.witnesses.len());
        for (i, entry) in self.witnesses.iter().enumerate() {
            let field = format!("witnesses[{i}]");
            let spec = entry.witness.build(&field)?;
            if spec.system_dim() != model.dim() {
                return Err(config_err(
                    field,
                    format!(
                        "witness acts on dimension {} but the model has dimension {}",
                        spec.system_dim(),
                        model.dim()
                    ),
                ));
            }
            let label = entry.label.clone().unwrap_or_else(|| format!("{}_{i}", spec.name()));
            if !valid_label(&label) {
                return Err(config_err(format!("{field}.label"), format!("`{label}` must be non-empty [A-Za-z0-9_-]")));
            }
            if witnesses.iter().any(|(l, _)| *l == label) {
                return Err(config_err(format!("{field}.label"), format!("duplicate label `{label}`")));
            }
            witnesses.push((label, spec));
        }
        Ok(ValidatedRun { config: self.clone(), model_desc, model, grid, witnesses })
    }
}

/// Dotted path of the innermost table header or key at byte `pos`, for
/// error messages.
fn field_at(text: &str, pos: usize) -> String {
    let before = &text[..pos.min(text.len())];
    let mut section = String::new();
    for line in before.lines() {
        let l = line.trim();
        if l.starts_with('[') {
            section = l.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
    }
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next().unwrap_or("");
    let key = line.split('=').next().map(str::trim).filter(|k| !k.is_empty() && !k.starts_with('['));
    match (section.is_empty(), key) {
        (true, Some(k)) => k.to_string(),
        (false, Some(k)) => format!("{section}.{k}"),
        (false, None) => section,
        (true, None) => "config".to_string(),
    }
}
