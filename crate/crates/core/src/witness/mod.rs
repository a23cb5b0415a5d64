//! Witness functionals evaluated along a trajectory, oriented so that a
//! positive flow signals a violation of Markovianity.

mod entropy;
mod spectral;

pub use entropy::{dephasing_eigenvalues, printed_dephasing_eigenvalues, qubit_entropy_flow, QubitEntropyFlow};
pub use spectral::{spectral_modes, SpectralMode, SpectralModes};

use serde::Serialize;

use crate::dynamics::{Superoperator, Trajectory};
use crate::error::{Error, Result};
use crate::operator::divergence::{
    check_renyi_alpha, check_skew_p, check_tsallis_q, fidelity_raw, relative_entropy_raw, renyi_raw, skew_raw,
    tsallis_raw,
};
use crate::operator::{operator_norm, trace_norm, CVector, DensityMatrix, HermitianOperator, ZERO_TOL};
use crate::par::map_indexed;

/// Entry threshold for a violation run.
pub const DETECTION_THRESHOLD: f64 = 1e-9;
/// Tolerance of [`verify_invariance`].
pub const INVARIANCE_TOL: f64 = 1e-8;
/// Relative eigenvalue gap below which two eigenvalues count as crossing.
const KINK_GAP: f64 = 1e-6;

#[derive(Clone, Debug)]
pub enum WitnessKind {
    /// `‖(id⊗Λ_t)X‖₁`, `X` on the doubled space.
    TraceNormExtended {
        x: HermitianOperator,
    },
    /// `‖Λ_t x‖₁`.
    TraceNormPlain {
        x: HermitianOperator,
    },
    /// `½‖Λ_t(ρ₁ − ρ₂)‖₁`.
    Blp {
        rho1: DensityMatrix,
        rho2: DensityMatrix,
    },
    RelativeEntropy {
        rho: DensityMatrix,
        sigma: DensityMatrix,
    },
    Renyi {
        rho: DensityMatrix,
        sigma: DensityMatrix,
        alpha: f64,
    },
    Tsallis {
        rho: DensityMatrix,
        sigma: DensityMatrix,
        q: f64,
    },
    Fidelity {
        rho: DensityMatrix,
        sigma: DensityMatrix,
    },
    /// `⟨ψ₀|Λ_t ρ|ψ₀⟩` for an invariant `|ψ₀⟩`.
    Overlap {
        rho: DensityMatrix,
        psi0: CVector,
    },
    /// `I_p(Λ_t ρ, X₀)` for a constant of motion `X₀`.
    SkewSchrodinger {
        rho: DensityMatrix,
        x0: HermitianOperator,
        p: f64,
    },
    /// `I_p(σ₀, Λ*_t X)` for an invariant `σ₀`.
    SkewHeisenberg {
        sigma0: DensityMatrix,
        x: HermitianOperator,
        p: f64,
    },
    /// `‖(id⊗Λ*_t)X‖`, operator norm.
    DualOperatorNorm {
        x: HermitianOperator,
    },
}

/// Object whose invariance a witness presupposes.
#[derive(Clone, Debug)]
pub enum InvariantObject {
    State(DensityMatrix),
    Observable(HermitianOperator),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InvarianceCheck {
    pub invariant: bool,
    pub max_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct WitnessSpec {
    kind: WitnessKind,
}

fn sqrt_dim(n: usize) -> Option<usize> {
    let d = (n as f64).sqrt().round() as usize;
    (d * d == n && d > 0).then_some(d)
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

impl WitnessSpec {
    /// Rejects PSD `X`; rescales to `‖X‖₁ = 1`.
    pub fn trace_norm_extended(x: HermitianOperator) -> Result<Self> {
        if sqrt_dim(x.dim()).is_none() {
            return Err(Error::InvalidWitness(format!("extended witness needs a d²-dimensional X, got {}", x.dim())));
        }
        let min = x.min_eigenvalue();
        if min >= -ZERO_TOL {
            return Err(Error::InvalidWitness(format!("X is positive semidefinite (min eigenvalue {min:e})")));
        }
        let norm = trace_norm(&x);
        Ok(Self { kind: WitnessKind::TraceNormExtended { x: x.scale(1.0 / norm) } })
    }

    /// Rescales to `‖x‖₁ = 1`.
    pub fn trace_norm_plain(x: HermitianOperator) -> Result<Self> {
        let norm = trace_norm(&x);
        if norm <= ZERO_TOL {
            return Err(Error::InvalidWitness("x vanishes".into()));
        }
        Ok(Self { kind: WitnessKind::TraceNormPlain { x: x.scale(1.0 / norm) } })
    }

    pub fn blp(rho1: DensityMatrix, rho2: DensityMatrix) -> Result<Self> {
        same_dim(rho1.dim(), rho2.dim())?;
        Ok(Self { kind: WitnessKind::Blp { rho1, rho2 } })
    }

    pub fn relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> Result<Self> {
        same_dim(rho.dim(), sigma.dim())?;
        Ok(Self { kind: WitnessKind::RelativeEntropy { rho, sigma } })
    }

    pub fn renyi(rho: DensityMatrix, sigma: DensityMatrix, alpha: f64) -> Result<Self> {
        same_dim(rho.dim(), sigma.dim())?;
        check_renyi_alpha(alpha)?;
        Ok(Self { kind: WitnessKind::Renyi { rho, sigma, alpha } })
    }

    pub fn tsallis(rho: DensityMatrix, sigma: DensityMatrix, q: f64) -> Result<Self> {
        same_dim(rho.dim(), sigma.dim())?;
        check_tsallis_q(q)?;
        Ok(Self { kind: WitnessKind::Tsallis { rho, sigma, q } })
    }

    pub fn fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> Result<Self> {
        same_dim(rho.dim(), sigma.dim())?;
        Ok(Self { kind: WitnessKind::Fidelity { rho, sigma } })
    }

    /// Normalizes `ψ₀`.
    pub fn overlap(rho: DensityMatrix, psi0: CVector) -> Result<Self> {
        same_dim(rho.dim(), psi0.len())?;
        let norm = psi0.norm();
        if norm <= ZERO_TOL {
            return Err(Error::InvalidWitness("psi0 vanishes".into()));
        }
        Ok(Self { kind: WitnessKind::Overlap { rho, psi0: psi0.unscale(norm) } })
    }

    pub fn skew_schrodinger(rho: DensityMatrix, x0: HermitianOperator, p: f64) -> Result<Self> {
        same_dim(rho.dim(), x0.dim())?;
        check_skew_p(p)?;
        Ok(Self { kind: WitnessKind::SkewSchrodinger { rho, x0, p } })
    }

    pub fn skew_heisenberg(sigma0: DensityMatrix, x: HermitianOperator, p: f64) -> Result<Self> {
        same_dim(sigma0.dim(), x.dim())?;
        check_skew_p(p)?;
        Ok(Self { kind: WitnessKind::SkewHeisenberg { sigma0, x, p } })
    }

    /// Rescales to unit operator norm.
    pub fn dual_operator_norm(x: HermitianOperator) -> Result<Self> {
        if sqrt_dim(x.dim()).is_none() {
            return Err(Error::InvalidWitness(format!("dual witness needs a d²-dimensional X, got {}", x.dim())));
        }
        let norm = operator_norm(&x);
        if norm <= ZERO_TOL {
            return Err(Error::InvalidWitness("X vanishes".into()));
        }
        Ok(Self { kind: WitnessKind::DualOperatorNorm { x: x.scale(1.0 / norm) } })
    }

    pub fn kind(&self) -> &WitnessKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            WitnessKind::TraceNormExtended { .. } => "trace_norm_extended",
            WitnessKind::TraceNormPlain { .. } => "trace_norm_plain",
            WitnessKind::Blp { .. } => "blp",
            WitnessKind::RelativeEntropy { .. } => "relative_entropy",
            WitnessKind::Renyi { .. } => "renyi",
            WitnessKind::Tsallis { .. } => "tsallis",
            WitnessKind::Fidelity { .. } => "fidelity",
            WitnessKind::Overlap { .. } => "overlap",
            WitnessKind::SkewSchrodinger { .. } => "skew_schrodinger",
            WitnessKind::SkewHeisenberg { .. } => "skew_heisenberg",
            WitnessKind::DualOperatorNorm { .. } => "dual_operator_norm",
        }
    }

    /// Dimension of the system the witness acts on.
    pub fn system_dim(&self) -> usize {
        match &self.kind {
            WitnessKind::TraceNormExtended { x } | WitnessKind::DualOperatorNorm { x } => {
                sqrt_dim(x.dim()).expect("checked at construction")
            }
            WitnessKind::TraceNormPlain { x } => x.dim(),
            WitnessKind::Blp { rho1, .. } => rho1.dim(),
            WitnessKind::RelativeEntropy { rho, .. }
            | WitnessKind::Renyi { rho, .. }
            | WitnessKind::Tsallis { rho, .. }
            | WitnessKind::Fidelity { rho, .. }
            | WitnessKind::Overlap { rho, .. }
            | WitnessKind::SkewSchrodinger { rho, .. } => rho.dim(),
            WitnessKind::SkewHeisenberg { sigma0, .. } => sigma0.dim(),
        }
    }

    /// `+1` when the functional may not increase under Markovian dynamics,
    /// `−1` when it may not decrease.
    pub fn orientation(&self) -> f64 {
        match self.kind {
            WitnessKind::Fidelity { .. } | WitnessKind::Overlap { .. } | WitnessKind::SkewSchrodinger { .. } => -1.0,
            _ => 1.0,
        }
    }

    pub fn invariance_requirement(&self) -> Option<InvariantObject> {
        match &self.kind {
            WitnessKind::Overlap { psi0, .. } => {
                Some(InvariantObject::State(DensityMatrix::pure(psi0).expect("normalized at construction")))
            }
            WitnessKind::SkewSchrodinger { x0, .. } => Some(InvariantObject::Observable(x0.clone())),
            WitnessKind::SkewHeisenberg { sigma0, .. } => Some(InvariantObject::State(sigma0.clone())),
            _ => None,
        }
    }

    /// Value of the underlying functional for the map `lam`, with the
    /// spectral signature used for kink detection.
    fn sample(&self, lam: &Superoperator, t: f64) -> Result<Sample> {
        let value_only = |v: f64| Sample { value: v, signature: Signature::Smooth };
        let s = match &self.kind {
            WitnessKind::TraceNormExtended { x } => trace_sample(&lam.apply_extended_hermitian(x)),
            WitnessKind::TraceNormPlain { x } => trace_sample(&lam.apply_hermitian(x)),
            WitnessKind::Blp { rho1, rho2 } => {
                let diff = rho1.operator() - rho2.operator();
                let mut s = trace_sample(&lam.apply_hermitian(&diff));
                s.value *= 0.5;
                s
            }
            WitnessKind::RelativeEntropy { rho, sigma } => value_only(relative_entropy_raw(
                &lam.apply_hermitian(rho.operator()),
                &lam.apply_hermitian(sigma.operator()),
            )?),
            WitnessKind::Renyi { rho, sigma, alpha } => value_only(renyi_raw(
                &lam.apply_hermitian(rho.operator()),
                &lam.apply_hermitian(sigma.operator()),
                *alpha,
            )?),
            WitnessKind::Tsallis { rho, sigma, q } => value_only(tsallis_raw(
                &lam.apply_hermitian(rho.operator()),
                &lam.apply_hermitian(sigma.operator()),
                *q,
            )?),
            WitnessKind::Fidelity { rho, sigma } => {
                value_only(fidelity_raw(&lam.apply_hermitian(rho.operator()), &lam.apply_hermitian(sigma.operator()))?)
            }
            WitnessKind::Overlap { rho, psi0 } => value_only(lam.apply_hermitian(rho.operator()).expectation(psi0)),
            WitnessKind::SkewSchrodinger { rho, x0, p } => {
                value_only(skew_raw(&lam.apply_hermitian(rho.operator()), x0, *p)?)
            }
            WitnessKind::SkewHeisenberg { sigma0, x, p } => {
                value_only(skew_raw(sigma0.operator(), &lam.dual().apply_hermitian(x), *p)?)
            }
            WitnessKind::DualOperatorNorm { x } => norm_sample(&lam.dual().apply_extended_hermitian(x)),
        };
        if !s.value.is_finite() {
            return Err(Error::NonFinite { t });
        }
        Ok(s)
    }
}

/// Coarse spectral shape of the evolved operator. The functional is smooth
/// between two samples with equal signatures.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Signature {
    Smooth,
    /// Counts of clearly negative and clearly positive eigenvalues.
    Signs {
        neg: usize,
        pos: usize,
    },
    /// Which end of the spectrum attains the norm, and how many eigenvalues
    /// sit at the top.
    Peak {
        side: i8,
        multiplicity: usize,
    },
}

#[derive(Clone, Copy, Debug)]
struct Sample {
    value: f64,
    signature: Signature,
}

fn trace_sample(a: &HermitianOperator) -> Sample {
    let e = a.eigenvalues();
    let scale = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let gap = KINK_GAP * scale;
    let neg = e.iter().filter(|&&x| x < -gap).count();
    let pos = e.iter().filter(|&&x| x > gap).count();
    Sample { value: e.iter().map(|x| x.abs()).sum(), signature: Signature::Signs { neg, pos } }
}

fn norm_sample(a: &HermitianOperator) -> Sample {
    let e = a.eigenvalues();
    let (hi, lo) = (e[0], e[e.len() - 1]);
    let top = hi.abs().max(lo.abs());
    let gap = KINK_GAP * top;
    let side = if hi + lo > gap {
        1
    } else if hi + lo < -gap {
        -1
    } else {
        0
    };
    let multiplicity = e.iter().filter(|&&x| x.abs() > top - gap).count();
    Sample { value: top, signature: Signature::Peak { side, multiplicity } }
}

fn near_uniform(ts: &[f64]) -> bool {
    let h = ts[1] - ts[0];
    ts.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
}

/// Derivative at `ts[c]` from samples on a window of up to two points per
/// side. Five-point central difference when the window is uniform and free of
/// signature changes, three-point central when only the inner neighbours
/// qualify, and otherwise the one-sided secant of larger magnitude.
fn estimate(ts: &[f64], ss: &[Sample], c: usize) -> f64 {
    let sig = |i: usize| ss[i].signature;
    let v = |i: usize| ss[i].value;
    if c >= 2 && ts.len() >= c + 3 {
        let w = c - 2..c + 3;
        if near_uniform(&ts[w.clone()]) && w.clone().all(|i| sig(i) == sig(c)) {
            let h = ts[c + 1] - ts[c];
            return (-v(c + 2) + 8.0 * v(c + 1) - 8.0 * v(c - 1) + v(c - 2)) / (12.0 * h);
        }
    }
    if sig(c - 1) == sig(c + 1) {
        return (v(c + 1) - v(c - 1)) / (ts[c + 1] - ts[c - 1]);
    }
    let left = (v(c) - v(c - 1)) / (ts[c] - ts[c - 1]);
    let right = (v(c + 1) - v(c)) / (ts[c + 1] - ts[c]);
    if left.abs() >= right.abs() {
        left
    } else {
        right
    }
}

/// Checks dimensions and the invariance precondition of `spec`.
fn check_applicable(traj: &Trajectory, spec: &WitnessSpec) -> Result<()> {
    same_dim(traj.dim(), spec.system_dim())?;
    if let Some(object) = spec.invariance_requirement() {
        let check = verify_invariance(traj, &object);
        if !check.invariant {
            return Err(Error::NotInvariant { deviation: check.max_deviation });
        }
    }
    Ok(())
}

/// Oriented flow of `spec` at `t`, which must lie strictly inside the grid
/// with one grid step of room on each side.
pub fn flow(traj: &Trajectory, spec: &WitnessSpec, t: f64) -> Result<f64> {
    check_applicable(traj, spec)?;
    let times = traj.times();
    let n = times.len();
    if n < 3 {
        return Err(Error::NotInterior { t });
    }
    if let Some(k) = traj.node_index(t) {
        if k == 0 || k == n - 1 {
            return Err(Error::NotInterior { t });
        }
        let lo = k.saturating_sub(2);
        let hi = (k + 2).min(n - 1);
        let ss = (lo..=hi).map(|i| spec.sample(traj.map(i), times[i])).collect::<Result<Vec<_>>>()?;
        return Ok(spec.orientation() * estimate(&times[lo..=hi], &ss, k - lo));
    }
    let right = times.partition_point(|&x| x < t);
    if right == 0 || right >= n {
        return Err(Error::NotInterior { t });
    }
    let h = times[right] - times[right - 1];
    let (start, end) = (times[0], times[n - 1]);
    if t - h < start || t + h > end {
        return Err(Error::NotInterior { t });
    }
    let mut ts = Vec::with_capacity(5);
    for j in -2i32..=2 {
        let s = t + j as f64 * h;
        if s >= start && s <= end {
            ts.push(s);
        }
    }
    let c = ts.iter().position(|&s| s == t).expect("centre is in range");
    let ss = ts.iter().map(|&s| spec.sample(&traj.map_at(s)?, s)).collect::<Result<Vec<_>>>()?;
    Ok(spec.orientation() * estimate(&ts, &ss, c))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ViolationInterval {
    pub t_start: f64,
    pub t_end: f64,
    pub peak: f64,
}

#[derive(Clone, Debug)]
pub struct WitnessSeries {
    pub spec: WitnessSpec,
    /// Interior grid nodes.
    pub times: Vec<f64>,
    /// Oriented flow at `times`.
    pub values: Vec<f64>,
    pub violation_intervals: Vec<ViolationInterval>,
    /// Underlying functional at every grid node.
    pub functional: Vec<f64>,
}

impl WitnessSeries {
    /// Whether the node `times[i]` lies inside a violation interval.
    pub fn violating(&self) -> Vec<bool> {
        self.times.iter().map(|&t| self.violation_intervals.iter().any(|iv| t >= iv.t_start && t <= iv.t_end)).collect()
    }
}

/// Maximal runs that start above `entry` and continue while above `exit`.
pub fn violation_intervals(times: &[f64], values: &[f64], entry: f64, exit: f64) -> Vec<ViolationInterval> {
    let mut out = Vec::new();
    let mut open: Option<ViolationInterval> = None;
    for (&t, &v) in times.iter().zip(values) {
        match open.as_mut() {
            Some(iv) if v > exit => {
                iv.t_end = t;
                iv.peak = iv.peak.max(v);
            }
            Some(_) => out.push(open.take().expect("open interval")),
            None if v > entry => open = Some(ViolationInterval { t_start: t, t_end: t, peak: v }),
            None => {}
        }
    }
    out.extend(open);
    out
}

/// Oriented flow at every interior node.
pub fn series(traj: &Trajectory, spec: &WitnessSpec) -> Result<WitnessSeries> {
    check_applicable(traj, spec)?;
    let times = traj.times();
    let n = times.len();
    if n < 3 {
        return Err(Error::InvalidGrid("a witness series needs at least 3 nodes".into()));
    }
    let samples = map_indexed(n, |k| spec.sample(traj.map(k), times[k])).into_iter().collect::<Result<Vec<_>>>()?;
    let sign = spec.orientation();
    let values: Vec<f64> = (1..n - 1)
        .map(|k| {
            let lo = k.saturating_sub(2);
            let hi = (k + 2).min(n - 1);
            sign * estimate(&times[lo..=hi], &samples[lo..=hi], k - lo)
        })
        .collect();
    let interior = times[1..n - 1].to_vec();
    let violation_intervals = violation_intervals(&interior, &values, DETECTION_THRESHOLD, 0.0);
    Ok(WitnessSeries {
        spec: spec.clone(),
        times: interior,
        values,
        violation_intervals,
        functional: samples.iter().map(|s| s.value).collect(),
    })
}

/// Checks `Λ_t σ₀ = σ₀` (or `Λ*_t X₀ = X₀`) at every node.
pub fn verify_invariance(traj: &Trajectory, object: &InvariantObject) -> InvarianceCheck {
    let target = match object {
        InvariantObject::State(s) => s.operator(),
        InvariantObject::Observable(x) => x,
    };
    if target.dim() != traj.dim() {
        return InvarianceCheck { invariant: false, max_deviation: f64::INFINITY };
    }
    let max_deviation = traj
        .maps()
        .iter()
        .map(|lam| {
            let image = match object {
                InvariantObject::State(_) => lam.apply(target.matrix()),
                InvariantObject::Observable(_) => lam.dual().apply(target.matrix()),
            };
            (image - target.matrix()).iter().fold(0.0f64, |m, z| m.max(z.norm()))
        })
        .fold(0.0f64, f64::max);
    InvarianceCheck { invariant: max_deviation <= INVARIANCE_TOL, max_deviation }
}
