//! JSON-returning entry points for the static page in `www/`.

use std::f64::consts::PI;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use nonmarkov::config::{ModelDesc, OperatorDesc};
use nonmarkov::dynamics::{evolve, Backend, GeneratorModel, MemoryKernel, OdeOptions, ScalarFn, TimeGrid, Trajectory};
use nonmarkov::measures::{
    blp_measure, divisibility_verdict, rhp_measure, witness_measure, SearchConfig, Verdict, CHOI_TOL,
};
use nonmarkov::operator::pauli::{ket, pauli_string, sigma_x_op};
use nonmarkov::operator::DensityMatrix;
use nonmarkov::witness::{self, WitnessSpec};

const MAX_NODES: usize = 4097;

#[derive(Serialize)]
pub struct Curve {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Serialize)]
pub struct DemoResult {
    pub markovian: bool,
    pub verdict: Verdict,
    pub curves: Vec<Curve>,
    /// Scalar summaries, in display order.
    pub measures: Vec<(String, f64)>,
}

fn search() -> SearchConfig {
    SearchConfig { seeds: 12, iterations: 25, ..SearchConfig::default() }
}

fn grid(t_max: f64, nodes: usize) -> nonmarkov::Result<TimeGrid> {
    TimeGrid::uniform(t_max, nodes.min(MAX_NODES))
}

fn simulate(model: &GeneratorModel, t_max: f64, nodes: usize) -> nonmarkov::Result<(TimeGrid, Trajectory)> {
    let g = grid(t_max, nodes)?;
    let traj = evolve(model, &g, Backend::Analytic, &OdeOptions::default())?;
    Ok((g, traj))
}

fn flow_curve(label: &str, traj: &Trajectory, spec: &WitnessSpec) -> nonmarkov::Result<Curve> {
    let s = witness::series(traj, spec)?;
    Ok(Curve { label: label.into(), times: s.times, values: s.values })
}

/// Dephasing with rate `offset + amplitude · sin t` on `[0, 2π]`.
pub fn dephasing(amplitude: f64, offset: f64, nodes: usize) -> nonmarkov::Result<DemoResult> {
    let model = ModelDesc::Dephasing { gamma: ScalarFn::OffsetSine { offset, amplitude, frequency: 1.0, phase: 0.0 } }
        .build()?;
    let (g, traj) = simulate(&model, 2.0 * PI, nodes)?;
    let verdict = divisibility_verdict(&traj, CHOI_TOL)?;
    let spec = WitnessSpec::trace_norm_extended(pauli_string("xx").expect("valid label"))?;
    let rate = Curve {
        label: "rate".into(),
        times: traj.times().to_vec(),
        values: traj.times().iter().map(|t| offset + amplitude * t.sin()).collect(),
    };
    let wm = witness_measure(&traj, &search())?;
    Ok(DemoResult {
        markovian: verdict.markovian,
        curves: vec![rate, flow_curve("flow of σx⊗σx", &traj, &spec)?],
        measures: vec![("n_witness".into(), wm.value), ("n_rhp".into(), rhp_measure(&model, &g)?)],
        verdict,
    })
}

/// Trace replacement towards `½(I + amplitude · sin t · σz)` at unit rate.
pub fn trace_replacement(amplitude: f64, nodes: usize) -> nonmarkov::Result<DemoResult> {
    let model = ModelDesc::TraceReplacement {
        gamma: ScalarFn::constant(1.0),
        omega: OperatorDesc::MaximallyMixed { dim: 2 },
        omega_direction: Some(OperatorDesc::Pauli { string: "z".into(), coefficient: 0.5 }),
        omega_amplitude: Some(ScalarFn::sine(amplitude, 1.0, 0.0)),
    }
    .build()?;
    let (_, traj) = simulate(&model, 2.0 * PI, nodes)?;
    let verdict = divisibility_verdict(&traj, CHOI_TOL)?;
    let blp = blp_measure(&traj, &search())?;
    let wm = witness_measure(&traj, &search())?;
    let omega_min = Curve {
        label: "min eig Ω_t".into(),
        times: traj.times().to_vec(),
        values: traj
            .times()
            .iter()
            .map(|&t| model.omega_average(t).map(|o| o.min_eigenvalue()))
            .collect::<nonmarkov::Result<_>>()?,
    };
    let mut curves = vec![omega_min];
    if let Some(s) = wm.series {
        curves.push(Curve { label: "best witness flow".into(), times: s.times, values: s.values });
    }
    Ok(DemoResult {
        markovian: verdict.markovian,
        curves,
        measures: vec![("n_witness".into(), wm.value), ("n_blp".into(), blp.value)],
        verdict,
    })
}

/// Damped Jaynes-Cummings model with an exponential memory kernel.
pub fn spin_boson(gamma0: f64, lambda: f64, t_max: f64, nodes: usize) -> nonmarkov::Result<DemoResult> {
    let model = GeneratorModel::spin_boson(MemoryKernel::Exponential { gamma0, lambda });
    let (_, traj) = simulate(&model, t_max, nodes)?;
    let verdict = divisibility_verdict(&traj, CHOI_TOL)?;
    let sol = traj.model().and_then(|m| m.kernel_solution()).expect("spin-boson trajectories carry G");
    let population = Curve {
        label: "|G|²".into(),
        times: traj.times().to_vec(),
        values: sol.g.iter().map(|g| g.norm_sqr()).collect(),
    };
    let overlap = WitnessSpec::overlap(DensityMatrix::basis(2, 1), ket(2, 0))?;
    let skew = WitnessSpec::skew_heisenberg(DensityMatrix::basis(2, 0), sigma_x_op(), 0.5)?;
    Ok(DemoResult {
        markovian: verdict.markovian,
        curves: vec![population, flow_curve("overlap flow", &traj, &overlap)?, flow_curve("skew flow", &traj, &skew)?],
        measures: vec![("excluded intervals".into(), verdict.excluded_intervals.len() as f64)],
        verdict,
    })
}

fn to_js(r: nonmarkov::Result<DemoResult>) -> Result<String, JsError> {
    let r = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&r).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = dephasingDemo)]
pub fn dephasing_demo(amplitude: f64, offset: f64, nodes: usize) -> Result<String, JsError> {
    to_js(dephasing(amplitude, offset, nodes))
}

#[wasm_bindgen(js_name = traceReplacementDemo)]
pub fn trace_replacement_demo(amplitude: f64, nodes: usize) -> Result<String, JsError> {
    to_js(trace_replacement(amplitude, nodes))
}

#[wasm_bindgen(js_name = spinBosonDemo)]
pub fn spin_boson_demo(gamma0: f64, lambda: f64, t_max: f64, nodes: usize) -> Result<String, JsError> {
    to_js(spin_boson(gamma0, lambda, t_max, nodes))
}
