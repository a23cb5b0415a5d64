//! Scalar non-Markovianity measures and the divisibility verdict.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{GeneratorModel, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::operator::pauli::{gell_mann, pauli};
use crate::operator::random::{random_hermitian, random_ket};
use crate::operator::{
    max_entangled_projector, trace_norm, CMatrix, CVector, DensityMatrix, HermitianOperator, ZERO_TOL,
};
use crate::par::map_indexed;
use crate::witness::{series, violation_intervals, ViolationInterval, WitnessSeries, WitnessSpec, DETECTION_THRESHOLD};

/// Default tolerance on negative Choi eigenvalues.
pub const CHOI_TOL: f64 = 1e-8;
/// Default finite difference for [`rhp_g`].
pub const RHP_EPSILON: f64 = 1e-6;
/// Smallest accepted improvement during refinement.
const MIN_IMPROVEMENT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Total number of starting candidates, structured seeds first.
    pub seeds: usize,
    /// Refinement steps per seed.
    pub iterations: usize,
    pub rng_seed: u64,
    /// Initial perturbation size relative to the unit-norm candidate.
    pub step: f64,
    pub choi_tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { seeds: 64, iterations: 200, rng_seed: 0, step: 0.1, choi_tolerance: CHOI_TOL }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(Error::EmptySearch("seeds must be positive".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::ParameterOutOfRange { name: "step", value: self.step, range: "(0,inf)" });
        }
        if !(self.choi_tolerance >= 0.0 && self.choi_tolerance.is_finite()) {
            return Err(Error::ParameterOutOfRange {
                name: "choi_tolerance",
                value: self.choi_tolerance,
                range: "[0,inf)",
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChoiInterval {
    pub t_start: f64,
    pub t_end: f64,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExcludedInterval {
    pub t_start: f64,
    pub t_end: f64,
}

/// Minimum Choi eigenvalue of `V_{t_{k+1}, t_k}`; `None` when `Λ_{t_k}` is
/// singular.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepDiagnostic {
    pub t_start: f64,
    pub t_end: f64,
    pub min_eigenvalue: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub markovian: bool,
    pub violation_intervals: Vec<ChoiInterval>,
    pub excluded_intervals: Vec<ExcludedInterval>,
    pub tolerance: f64,
    #[serde(skip)]
    pub steps: Vec<StepDiagnostic>,
}

/// Negative Choi direction of the worst step.
struct WorstStep {
    node: usize,
    eigenvector: CVector,
}

fn step_diagnostics(traj: &Trajectory) -> Vec<(StepDiagnostic, Option<CVector>)> {
    let times = traj.times();
    map_indexed(times.len() - 1, |k| {
        let diag = |m| StepDiagnostic { t_start: times[k], t_end: times[k + 1], min_eigenvalue: m };
        match traj.intermediate_between(k + 1, k) {
            Ok(v) => {
                let spec = v.choi().spectral();
                let last = spec.eigenvalues.len() - 1;
                (diag(Some(spec.eigenvalues[last])), Some(spec.eigenvector(last)))
            }
            Err(_) => (diag(None), None),
        }
    })
}

/// Complete positivity of every intermediate step `V_{t_{k+1}, t_k}`.
pub fn divisibility_verdict(traj: &Trajectory, tol: f64) -> Result<Verdict> {
    if traj.len() < 2 {
        return Err(Error::InvalidGrid("a verdict needs at least 2 nodes".into()));
    }
    let steps: Vec<StepDiagnostic> = step_diagnostics(traj).into_iter().map(|(s, _)| s).collect();
    Ok(verdict_from_steps(steps, tol))
}

fn verdict_from_steps(steps: Vec<StepDiagnostic>, tol: f64) -> Verdict {
    let mut violation_intervals: Vec<ChoiInterval> = Vec::new();
    let mut excluded_intervals: Vec<ExcludedInterval> = Vec::new();
    let mut prev_violating = false;
    let mut prev_excluded = false;
    for s in &steps {
        match s.min_eigenvalue {
            Some(m) if m < -tol => {
                match violation_intervals.last_mut() {
                    Some(iv) if prev_violating => {
                        iv.t_end = s.t_end;
                        iv.min_eigenvalue = iv.min_eigenvalue.min(m);
                    }
                    _ => {
                        violation_intervals.push(ChoiInterval { t_start: s.t_start, t_end: s.t_end, min_eigenvalue: m })
                    }
                }
                (prev_violating, prev_excluded) = (true, false);
            }
            Some(_) => (prev_violating, prev_excluded) = (false, false),
            None => {
                match excluded_intervals.last_mut() {
                    Some(iv) if prev_excluded => iv.t_end = s.t_end,
                    _ => excluded_intervals.push(ExcludedInterval { t_start: s.t_start, t_end: s.t_end }),
                }
                (prev_violating, prev_excluded) = (false, true);
            }
        }
    }
    Verdict {
        markovian: violation_intervals.is_empty() && excluded_intervals.is_empty(),
        violation_intervals,
        excluded_intervals,
        tolerance: tol,
        steps,
    }
}

fn rhp_quotient(p: &HermitianOperator, y: &HermitianOperator, eps: f64) -> f64 {
    (trace_norm(&(p + &y.scale(eps))) - 1.0) / eps
}

/// `lim_{ε→0⁺} (‖P⁺ + ε(id⊗L_t)P⁺‖₁ − 1)/ε` by one Richardson step on `ε`
/// and `ε/2`.
pub fn rhp_g(model: &GeneratorModel, t: f64, eps: f64) -> Result<f64> {
    let l = model.generator(t)?;
    let p = max_entangled_projector(model.dim())?.into_operator();
    let y = l.apply_extended_hermitian(&p);
    let g = 2.0 * rhp_quotient(&p, &y, 0.5 * eps) - rhp_quotient(&p, &y, eps);
    Ok(g.max(0.0))
}

/// `g(t)` at every grid node. The model is prepared on `grid` first.
pub fn rhp_series(model: &GeneratorModel, grid: &TimeGrid) -> Result<Vec<f64>> {
    let mut model = model.clone();
    model.prepare(grid)?;
    let times = grid.times();
    map_indexed(times.len(), |k| rhp_g(&model, times[k], RHP_EPSILON)).into_iter().collect()
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

/// Trapezoidal integral of [`rhp_g`] over the grid.
pub fn rhp_measure(model: &GeneratorModel, grid: &TimeGrid) -> Result<f64> {
    Ok(trapezoid(grid.times(), &rhp_series(model, grid)?))
}

/// `∫_{λ>0} λ dt` for a functional sampled at the nodes: the sum of its
/// increments over steps where it grows faster than the detection threshold.
pub fn positive_increments(times: &[f64], functional: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(functional.windows(2))
        .map(|(t, f)| {
            let rise = f[1] - f[0];
            if rise > DETECTION_THRESHOLD * (t[1] - t[0]) {
                rise
            } else {
                0.0
            }
        })
        .sum()
}

#[derive(Clone, Debug)]
pub struct WitnessMeasure {
    /// Lower bound on the supremum over unit-trace-norm witnesses.
    pub value: f64,
    pub witness: Option<HermitianOperator>,
    pub series: Option<WitnessSeries>,
    /// Best value after each refinement iteration (index 0: seeds only).
    pub history: Vec<f64>,
    pub seeds_evaluated: usize,
}

#[derive(Clone, Debug)]
pub struct BlpMeasure {
    pub value: f64,
    pub pair: Option<(DensityMatrix, DensityMatrix)>,
    pub series: Option<WitnessSeries>,
    pub history: Vec<f64>,
    pub seeds_evaluated: usize,
}

fn rng_for(cfg: &SearchConfig, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(stream);
    rng
}

struct Refined<T> {
    value: f64,
    candidate: T,
    history: Vec<f64>,
}

/// Random-perturbation hill climb with an adaptive step; only strict
/// improvements are accepted, so the best value is non-decreasing.
fn refine<T, P, F>(start: T, cfg: &SearchConfig, rng: &mut ChaCha8Rng, perturb: P, objective: F) -> Refined<T>
where
    P: Fn(&T, f64, &mut ChaCha8Rng) -> Option<T>,
    F: Fn(&T) -> f64,
{
    let mut value = objective(&start);
    let mut current = start;
    let mut step = cfg.step;
    let mut history = Vec::with_capacity(cfg.iterations + 1);
    history.push(value);
    for _ in 0..cfg.iterations {
        if let Some(cand) = perturb(&current, step, rng) {
            let v = objective(&cand);
            if v > value + MIN_IMPROVEMENT {
                value = v;
                current = cand;
                step = (step * 1.5).min(1.0);
            } else {
                step = (step * 0.85).max(1e-4);
            }
        }
        history.push(value);
    }
    Refined { value, candidate: current, history }
}

/// Deterministic reduction: largest value, lowest index on ties.
fn best_of<T>(results: Vec<Refined<T>>) -> (Option<Refined<T>>, Vec<f64>) {
    let len = results.first().map_or(0, |r| r.history.len());
    let history: Vec<f64> =
        (0..len).map(|i| results.iter().map(|r| r.history[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let mut best: Option<Refined<T>> = None;
    for r in results {
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    (best, history)
}

/// Rescales to unit trace norm; `None` for PSD or vanishing operators.
fn normalize_witness(x: HermitianOperator) -> Option<HermitianOperator> {
    let norm = trace_norm(&x);
    if norm <= ZERO_TOL || x.min_eigenvalue() >= -ZERO_TOL * norm {
        return None;
    }
    Some(x.scale(1.0 / norm))
}

fn local_basis(d: usize) -> Vec<HermitianOperator> {
    if d == 2 {
        "ixyz".chars().map(|c| HermitianOperator::hermitian_part(&pauli(c).expect("pauli letter"))).collect()
    } else {
        let mut out = vec![HermitianOperator::identity(d)];
        out.extend(gell_mann(d));
        out
    }
}

fn product_seeds(d: usize) -> Vec<HermitianOperator> {
    let basis = local_basis(d);
    let mut out = Vec::with_capacity(basis.len() * basis.len());
    for a in &basis {
        for b in &basis {
            out.extend(normalize_witness(a.kron(b)));
        }
    }
    out
}

fn off_diagonal(m: &CMatrix) -> HermitianOperator {
    let mut m = m.clone();
    m.fill_diagonal(C64::new(0.0, 0.0));
    HermitianOperator::hermitian_part(&m)
}

fn choi_seeds(traj: &Trajectory, worst: &WorstStep) -> Vec<HermitianOperator> {
    let d = traj.dim();
    let v = &worst.eigenvector;
    let flip = off_diagonal(&(v * v.adjoint()));
    let mut out = Vec::new();
    out.extend(normalize_witness(flip.clone()));
    if let Ok(inv) = traj.map(worst.node).inverse(traj.times()[worst.node]) {
        out.extend(normalize_witness(inv.apply_extended_hermitian(&flip)));
        if let Ok(p) = max_entangled_projector(d) {
            out.extend(normalize_witness(inv.apply_extended_hermitian(p.operator())));
        }
    }
    out
}

fn worst_step(traj: &Trajectory, tol: f64) -> Option<WorstStep> {
    step_diagnostics(traj)
        .into_iter()
        .enumerate()
        .filter_map(|(k, (s, v))| Some((k, s.min_eigenvalue?, v?)))
        .filter(|&(_, m, _)| m < -tol)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(node, _, eigenvector)| WorstStep { node, eigenvector })
}

fn extended_functional(traj: &Trajectory, x: &HermitianOperator) -> Vec<f64> {
    traj.maps().iter().map(|m| trace_norm(&m.apply_extended_hermitian(x))).collect()
}

fn check_search(traj: &Trajectory, cfg: &SearchConfig) -> Result<()> {
    cfg.validate()?;
    if traj.len() < 3 {
        return Err(Error::EmptySearch("trajectory needs at least 3 nodes".into()));
    }
    Ok(())
}

/// Lower bound on `sup_X ∫_{λ_t(X)>0} λ_t(X) dt` over Hermitian `X` with
/// `‖X‖₁ = 1`.
pub fn witness_measure(traj: &Trajectory, cfg: &SearchConfig) -> Result<WitnessMeasure> {
    check_search(traj, cfg)?;
    let d = traj.dim();
    let times = traj.times();
    let mut seeds = Vec::new();
    if let Some(worst) = worst_step(traj, cfg.choi_tolerance) {
        seeds.extend(choi_seeds(traj, &worst));
    }
    seeds.extend(product_seeds(d));
    seeds.truncate(cfg.seeds);
    let mut fill = rng_for(cfg, 0);
    while seeds.len() < cfg.seeds {
        seeds.extend(normalize_witness(random_hermitian(d * d, &mut fill)));
    }

    let objective = |x: &HermitianOperator| positive_increments(times, &extended_functional(traj, x));
    let perturb = |x: &HermitianOperator, step: f64, rng: &mut ChaCha8Rng| {
        let mut p = random_hermitian(d * d, rng);
        p = p.scale(step / trace_norm(&p));
        normalize_witness(x + &p)
    };
    let results = map_indexed(seeds.len(), |i| {
        let mut rng = rng_for(cfg, i as u64 + 1);
        refine(seeds[i].clone(), cfg, &mut rng, perturb, objective)
    });
    let (best, history) = best_of(results);
    let best = best.expect("at least one seed");
    if best.value <= 0.0 {
        return Ok(WitnessMeasure { value: 0.0, witness: None, series: None, history, seeds_evaluated: seeds.len() });
    }
    let spec = WitnessSpec::trace_norm_extended(best.candidate.clone())?;
    Ok(WitnessMeasure {
        value: best.value,
        witness: Some(best.candidate),
        series: Some(series(traj, &spec)?),
        history,
        seeds_evaluated: seeds.len(),
    })
}

fn axis_pairs(d: usize) -> Vec<(CVector, CVector)> {
    let e = |k: usize| {
        let mut v = CVector::zeros(d);
        v[k] = C64::new(1.0, 0.0);
        v
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            out.push((e(i), e(j)));
            out.push(((e(i) + e(j)) * C64::new(s, 0.0), (e(i) - e(j)) * C64::new(s, 0.0)));
            let ij = e(j) * C64::new(0.0, 1.0);
            out.push(((e(i) + &ij) * C64::new(s, 0.0), (e(i) - &ij) * C64::new(s, 0.0)));
        }
    }
    out
}

fn pair_difference(a: &CVector, b: &CVector) -> HermitianOperator {
    HermitianOperator::hermitian_part(&(a * a.adjoint() - b * b.adjoint()))
}

/// Lower bound on the BLP measure `sup_{ρ₁,ρ₂} ∫_{σ>0} σ dt` over pure pairs.
pub fn blp_measure(traj: &Trajectory, cfg: &SearchConfig) -> Result<BlpMeasure> {
    check_search(traj, cfg)?;
    let d = traj.dim();
    let times = traj.times();
    let mut seeds = axis_pairs(d);
    seeds.truncate(cfg.seeds);
    let mut fill = rng_for(cfg, 0);
    while seeds.len() < cfg.seeds {
        seeds.push((random_ket(d, &mut fill), random_ket(d, &mut fill)));
    }

    let objective = |pair: &(CVector, CVector)| {
        let diff = pair_difference(&pair.0, &pair.1);
        let f: Vec<f64> = traj.maps().iter().map(|m| 0.5 * trace_norm(&m.apply_hermitian(&diff))).collect();
        positive_increments(times, &f)
    };
    let perturb = |pair: &(CVector, CVector), step: f64, rng: &mut ChaCha8Rng| {
        let nudge = |v: &CVector, rng: &mut ChaCha8Rng| {
            let w = v + random_ket(d, rng) * C64::new(step, 0.0);
            let n = w.norm();
            (n > ZERO_TOL).then(|| w.unscale(n))
        };
        Some((nudge(&pair.0, rng)?, nudge(&pair.1, rng)?))
    };
    let results = map_indexed(seeds.len(), |i| {
        let mut rng = rng_for(cfg, i as u64 + 1);
        refine(seeds[i].clone(), cfg, &mut rng, perturb, objective)
    });
    let (best, history) = best_of(results);
    let best = best.expect("at least one seed");
    if best.value <= 0.0 {
        return Ok(BlpMeasure { value: 0.0, pair: None, series: None, history, seeds_evaluated: seeds.len() });
    }
    let rho1 = DensityMatrix::pure(&best.candidate.0)?;
    let rho2 = DensityMatrix::pure(&best.candidate.1)?;
    let spec = WitnessSpec::blp(rho1.clone(), rho2.clone())?;
    Ok(BlpMeasure {
        value: best.value,
        pair: Some((rho1, rho2)),
        series: Some(series(traj, &spec)?),
        history,
        seeds_evaluated: seeds.len(),
    })
}

#[derive(Clone, Debug)]
pub struct MeasureReport {
    pub n_witness: f64,
    pub witness: Option<HermitianOperator>,
    pub witness_intervals: Vec<ViolationInterval>,
    /// `None` when the trajectory carries no generator.
    pub n_rhp: Option<f64>,
    pub rhp_intervals: Vec<ViolationInterval>,
    pub n_blp: f64,
    pub blp_pair: Option<(DensityMatrix, DensityMatrix)>,
    pub blp_intervals: Vec<ViolationInterval>,
}

/// All three measures on one trajectory.
pub fn measure_report(traj: &Trajectory, cfg: &SearchConfig) -> Result<MeasureReport> {
    let w = witness_measure(traj, cfg)?;
    let b = blp_measure(traj, cfg)?;
    let (n_rhp, rhp_intervals) = match traj.model() {
        Some(model) => {
            let grid = TimeGrid::from_times(traj.times().to_vec())?;
            let g = rhp_series(model, &grid)?;
            let intervals = violation_intervals(traj.times(), &g, DETECTION_THRESHOLD, 0.0);
            (Some(trapezoid(traj.times(), &g)), intervals)
        }
        None => (None, Vec::new()),
    };
    Ok(MeasureReport {
        n_witness: w.value,
        witness: w.witness,
        witness_intervals: w.series.map(|s| s.violation_intervals).unwrap_or_default(),
        n_rhp,
        rhp_intervals,
        n_blp: b.value,
        blp_pair: b.pair,
        blp_intervals: b.series.map(|s| s.violation_intervals).unwrap_or_default(),
    })
}
