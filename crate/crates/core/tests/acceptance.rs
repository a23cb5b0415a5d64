//! End-to-end acceptance checks. Each test prints a single
//! `criterion N: PASS|FAIL` line followed by its sub-check details.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nonmarkov::config::{preset, ModelDesc, OperatorDesc};
use nonmarkov::dynamics::model::spin_boson_map;
use nonmarkov::dynamics::{
    evolve, solve_memory_kernel, Backend, GeneratorModel, GkslGenerator, HamiltonianTerm, MemoryKernel, NoiseTerm,
    OdeOptions, ScalarFn, Superoperator, TimeGrid, Trajectory,
};
use nonmarkov::measures::{
    blp_measure, divisibility_verdict, rhp_g, rhp_measure, witness_measure, SearchConfig, CHOI_TOL,
};
use nonmarkov::operator::pauli::{ket, pauli_string, sigma_minus, sigma_x_op, sigma_z_op};
use nonmarkov::operator::random::{random_density_matrix, random_hermitian, random_ket};
use nonmarkov::operator::{
    fidelity, relative_entropy, renyi_relative_entropy, skew_information, trace_distance, trace_norm,
    tsallis_relative_entropy, DensityMatrix, HermitianOperator,
};
use nonmarkov::witness::{self, spectral_modes, violation_intervals, ViolationInterval, WitnessSpec};

struct Outcome {
    checks: Vec<(String, bool)>,
}

impl Outcome {
    fn new() -> Self {
        Self { checks: Vec::new() }
    }

    fn check(&mut self, label: impl Into<String>, ok: bool) {
        self.checks.push((label.into(), ok));
    }

    fn finish(self, n: u32, title: &str) {
        let pass = self.checks.iter().all(|(_, ok)| *ok);
        println!("criterion {n}: {} {title}", if pass { "PASS" } else { "FAIL" });
        for (label, ok) in &self.checks {
            println!("  [{}] {label}", if *ok { "ok" } else { "FAILED" });
        }
        assert!(pass, "criterion {n} failed");
    }
}

fn build(desc: &ModelDesc) -> GeneratorModel {
    desc.build().unwrap()
}

fn trajectory(desc: &ModelDesc, t_max: f64, nodes: usize, backend: Backend) -> Trajectory {
    let grid = TimeGrid::uniform(t_max, nodes).unwrap();
    evolve(&build(desc), &grid, backend, &OdeOptions::default()).unwrap()
}

fn sine_dephasing() -> ModelDesc {
    preset("sine_dephasing").unwrap()
}

fn separation(amplitude: f64) -> ModelDesc {
    ModelDesc::TraceReplacement {
        gamma: ScalarFn::constant(1.0),
        omega: OperatorDesc::MaximallyMixed { dim: 2 },
        omega_direction: Some(OperatorDesc::Pauli { string: "z".into(), coefficient: 0.5 }),
        omega_amplitude: Some(ScalarFn::sine(amplitude, 1.0, 0.0)),
    }
}

fn underdamped() -> MemoryKernel {
    MemoryKernel::Exponential { gamma0: 4.0, lambda: 1.0 }
}

fn x0() -> HermitianOperator {
    pauli_string("xx").unwrap().scale(0.5)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Boundaries of two interval lists agree within `tol`.
fn intervals_agree(a: &[ViolationInterval], b: &[ViolationInterval], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| (x.t_start - y.t_start).abs() <= tol && (x.t_end - y.t_end).abs() <= tol)
}

#[test]
fn criterion_1_dephasing_witness_closed_form() {
    let mut out = Outcome::new();
    let start = Instant::now();
    let traj = trajectory(&sine_dephasing(), 2.0 * PI, 257, Backend::Analytic);
    let s = witness::series(&traj, &WitnessSpec::trace_norm_extended(x0()).unwrap()).unwrap();
    let elapsed = start.elapsed();
    let expected: Vec<f64> = s.times.iter().map(|&t| -t.sin() * (-(1.0 - t.cos())).exp()).collect();
    let err = max_abs_diff(&s.values, &expected);
    out.check(format!("max |flow + γ e^(-Γ)| = {err:.3e} <= 1e-4 over {} interior nodes", s.times.len()), err <= 1e-4);
    out.check(format!("runtime {elapsed:?} < 5 s"), elapsed < Duration::from_secs(5));
    out.finish(1, "dephasing witness flow matches the closed form");
}

#[test]
fn criterion_2_dephasing_measures() {
    let mut out = Outcome::new();
    let desc = sine_dephasing();
    let start = Instant::now();
    let grid = TimeGrid::uniform(2.0 * PI, 257).unwrap();
    let traj = evolve(&build(&desc), &grid, Backend::Analytic, &OdeOptions::default()).unwrap();
    let n_rhp = rhp_measure(traj.model().unwrap(), &grid).unwrap();
    let wm = witness_measure(&traj, &SearchConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let bound = 1.0 - (-2.0f64).exp() - 1e-3;
    out.check(format!("n_rhp = {n_rhp:.6} within 1e-2 of 2"), (n_rhp - 2.0).abs() <= 1e-2);
    out.check(format!("n_witness = {:.6} >= {bound:.6}", wm.value), wm.value >= bound);
    let reference = witness::series(&traj, &WitnessSpec::trace_norm_extended(x0()).unwrap()).unwrap();
    let found = wm.series.expect("a witness is recovered");
    let diff = max_abs_diff(&found.values, &reference.values);
    out.check(format!("optimized witness series within {diff:.3e} <= 1e-3 of the X0 series"), diff <= 1e-3);
    out.check(format!("runtime {elapsed:?} < 60 s at the default search budget"), elapsed < Duration::from_secs(60));
    out.finish(2, "dephasing measures");
}

#[test]
fn criterion_3_rhp_rate() {
    let mut out = Outcome::new();
    let model = build(&sine_dephasing());
    let grid = TimeGrid::uniform(2.0 * PI, 257).unwrap();
    let (mut neg_err, mut pos_max, mut neg_nodes) = (0.0f64, 0.0f64, 0);
    for &t in grid.times() {
        let gamma = t.sin();
        let g = rhp_g(&model, t, nonmarkov::measures::RHP_EPSILON).unwrap();
        if gamma < -1e-3 {
            neg_err = neg_err.max((g - gamma.abs()).abs());
            neg_nodes += 1;
        } else if gamma >= 0.0 {
            pos_max = pos_max.max(g.abs());
        }
    }
    out.check(
        format!("|g - |γ|| <= {neg_err:.3e} <= 1e-4 on {neg_nodes} nodes with γ < -1e-3"),
        neg_nodes > 0 && neg_err <= 1e-4,
    );
    out.check(format!("|g| <= {pos_max:.3e} <= 1e-6 where γ >= 0"), pos_max <= 1e-6);
    out.finish(3, "rhp_g equals |γ| on negative-rate stretches and vanishes elsewhere");
}

/// `(t_start, t_end)` where `|a sin t| > 1` on `[0, 2π]`.
fn omega_negative_windows(amplitude: f64) -> Vec<(f64, f64)> {
    let a = (1.0 / amplitude).asin();
    vec![(a, PI - a), (PI + a, 2.0 * PI - a)]
}

fn separation_checks(out: &mut Outcome, amplitude: f64, expected: &[(f64, f64)], tag: &str) {
    let desc = separation(amplitude);
    let traj = trajectory(&desc, 2.0 * PI, 257, Backend::Analytic);
    let model = traj.model().unwrap();
    let min_omega =
        traj.times().iter().map(|&t| model.omega_average(t).unwrap().min_eigenvalue()).fold(f64::INFINITY, f64::min);
    out.check(format!("{tag}: min eig Ω_t on the grid = {min_omega:.4e} >= -1e-9"), min_omega >= -1e-9);

    let blp = blp_measure(&traj, &SearchConfig::default()).unwrap();
    out.check(format!("{tag}: blp_measure = {:.3e} within 1e-8 of 0", blp.value), blp.value.abs() <= 1e-8);

    let verdict = divisibility_verdict(&traj, CHOI_TOL).unwrap();
    let found: Vec<(f64, f64)> = verdict.violation_intervals.iter().map(|iv| (iv.t_start, iv.t_end)).collect();
    let covered = found.len() == expected.len()
        && found.iter().zip(expected).all(|(f, e)| (f.0 - e.0).abs() <= 0.02 && (f.1 - e.1).abs() <= 0.02);
    out.check(format!("{tag}: verdict intervals {found:.3?} match {expected:.3?} within 0.02"), covered);

    let wm = witness_measure(&traj, &SearchConfig::default()).unwrap();
    out.check(format!("{tag}: witness_measure = {:.4e} > 1e-4", wm.value), wm.value > 1e-4);
}

#[test]
fn criterion_4_separation_of_blp_and_divisibility() {
    let mut out = Outcome::new();
    separation_checks(&mut out, 1.2, &[(0.985, 2.157), (PI + 0.985, PI + 2.157)], "amplitude 1.2");
    // Supplementary instance where the Ω_t gate holds; not a substitute for the line above.
    let mut extra = Outcome::new();
    separation_checks(&mut extra, 1.17, &omega_negative_windows(1.17), "amplitude 1.17 (supplementary)");
    for (label, ok) in extra.checks {
        println!("  supplementary [{}] {label}", if ok { "ok" } else { "FAILED" });
    }
    out.finish(4, "trace-replacement dynamics: non-divisible with vanishing BLP measure");
}

#[test]
fn criterion_5_spin_boson_equivalences() {
    let mut out = Outcome::new();
    let kernel = underdamped();
    let (t_max, nodes) = (10.0, 2001);
    let h = t_max / (nodes - 1) as f64;

    let sol = solve_memory_kernel(&kernel, h, nodes).unwrap();
    let g_err = sol
        .g
        .iter()
        .enumerate()
        .map(|(k, g)| (g - kernel.closed_form(k as f64 * h).unwrap().0).norm())
        .fold(0.0, f64::max);
    out.check(format!("numeric G within {g_err:.3e} <= 1e-5 of the closed form"), g_err <= 1e-5);

    let desc = ModelDesc::SpinBoson { kernel: kernel.clone() };
    let traj = trajectory(&desc, t_max, nodes, Backend::Analytic);
    let excited = DensityMatrix::basis(2, 1);
    let ground = DensityMatrix::basis(2, 0);
    let overlap = witness::series(&traj, &WitnessSpec::overlap(excited, ket(2, 0)).unwrap()).unwrap();
    let skew = witness::series(&traj, &WitnessSpec::skew_heisenberg(ground, sigma_x_op(), 0.5).unwrap()).unwrap();
    let dp = traj.model().unwrap().kernel_solution().unwrap().population_derivative();
    let interior = &traj.times()[1..nodes - 1];
    let sign_set = violation_intervals(interior, &dp[1..nodes - 1], witness::DETECTION_THRESHOLD, 0.0);
    out.check(format!("d|G|²/dt > 0 on {} intervals", sign_set.len()), !sign_set.is_empty());
    out.check(
        format!("overlap intervals ({}) agree with the sign set within one step", overlap.violation_intervals.len()),
        intervals_agree(&overlap.violation_intervals, &sign_set, h * (1.0 + 1e-9)),
    );
    out.check(
        format!(
            "Heisenberg skew intervals ({}) agree with the sign set within one step",
            skew.violation_intervals.len()
        ),
        intervals_agree(&skew.violation_intervals, &sign_set, h * (1.0 + 1e-9)),
    );

    let verdict = divisibility_verdict(&traj, CHOI_TOL).unwrap();
    let unflagged = verdict
        .steps
        .iter()
        .enumerate()
        .filter(|(k, s)| sol.g[*k].norm() < 1e-12 && s.min_eigenvalue.is_some())
        .count();
    out.check(
        format!("steps starting at |G| < 1e-12 on the grid are excluded ({unflagged} unflagged)"),
        unflagged == 0,
    );

    // A grid through the first zero of G, with maps from the closed form.
    let omega = (2.0 * 4.0 - 1.0f64).sqrt();
    let t_zero = 2.0 * (PI - omega.atan()) / omega;
    let times: Vec<f64> = (0..=600).map(|k| t_zero * k as f64 / 300.0).collect();
    let maps: Vec<Superoperator> = times.iter().map(|&t| spin_boson_map(kernel.closed_form(t).unwrap().0)).collect();
    let g_zero = kernel.closed_form(t_zero).unwrap().0.norm();
    let exact = Trajectory::new(times, maps, None).unwrap();
    let v = divisibility_verdict(&exact, CHOI_TOL).unwrap();
    let flagged = v.excluded_intervals.iter().any(|iv| iv.t_start <= t_zero && t_zero < iv.t_end);
    out.check(
        format!("node at the zero of G (|G| = {g_zero:.1e}) lies in an excluded interval"),
        g_zero < 1e-12 && flagged,
    );
    out.finish(5, "spin-boson: overlap, Heisenberg skew and d|G|²/dt agree");
}

fn random_triples_error(traj: &Trajectory, rng: &mut ChaCha8Rng, count: usize) -> f64 {
    let n = traj.len();
    let mut worst = 0.0f64;
    for _ in 0..count {
        let mut idx = [rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n)];
        idx.sort_unstable();
        let [u, s, t] = idx;
        let lhs = traj.intermediate_between(t, s).unwrap().compose(&traj.intermediate_between(s, u).unwrap());
        let rhs = traj.intermediate_between(t, u).unwrap();
        worst = worst.max(lhs.distance(&rhs));
    }
    worst
}

#[test]
fn criterion_6_composition_law() {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cases = [
        ("sine dephasing", trajectory(&sine_dephasing(), 2.0 * PI, 257, Backend::Analytic)),
        ("sine dephasing (numeric)", trajectory(&sine_dephasing(), 2.0 * PI, 257, Backend::Numeric)),
        ("trace replacement 1.2", trajectory(&separation(1.2), 2.0 * PI, 257, Backend::Analytic)),
        ("trace replacement 1.2 (numeric)", trajectory(&separation(1.2), 2.0 * PI, 257, Backend::Numeric)),
        (
            "spin-boson underdamped",
            trajectory(&ModelDesc::SpinBoson { kernel: underdamped() }, 10.0, 2001, Backend::Analytic),
        ),
    ];
    for (name, traj) in &cases {
        let err = random_triples_error(traj, &mut rng, 100);
        out.check(format!("{name}: max ‖V(t,s)V(s,u) - V(t,u)‖ = {err:.3e} <= 1e-6"), err <= 1e-6);
    }
    out.finish(6, "composition of intermediate propagators");
}

fn random_gksl(rng: &mut ChaCha8Rng, dim: usize) -> GeneratorModel {
    let hamiltonian =
        vec![HamiltonianTerm { operator: random_hermitian(dim, rng), coefficient: ScalarFn::sine(1.0, 0.7, 0.2) }];
    let noise = (0..2)
        .map(|k| NoiseTerm {
            operator: random_hermitian(dim, rng).matrix() + random_hermitian(dim, rng).matrix() * C64::i(),
            rate: ScalarFn::constant(0.3 + 0.2 * k as f64),
        })
        .collect();
    GeneratorModel::Gksl(GkslGenerator { dim, hamiltonian, noise })
}

/// CPTP snapshot maps from every positive-Ω model plus a generic qutrit generator.
fn cptp_snapshots(rng: &mut ChaCha8Rng) -> Vec<(String, Trajectory)> {
    let grid = TimeGrid::uniform(4.0, 33).unwrap();
    let gksl = evolve(&random_gksl(rng, 3), &grid, Backend::Numeric, &OdeOptions::default()).unwrap();
    let decay = GeneratorModel::Gksl(GkslGenerator {
        dim: 2,
        hamiltonian: vec![HamiltonianTerm { operator: sigma_z_op(), coefficient: ScalarFn::constant(0.5) }],
        noise: vec![NoiseTerm { operator: sigma_minus(), rate: ScalarFn::sine(1.0, 1.0, 0.0) }],
    });
    decay.validate().unwrap();
    let decay = evolve(&decay, &TimeGrid::uniform(2.0, 33).unwrap(), Backend::Numeric, &OdeOptions::default()).unwrap();
    vec![
        ("sine dephasing".into(), trajectory(&sine_dephasing(), 2.0 * PI, 65, Backend::Analytic)),
        ("trace replacement 1.17".into(), trajectory(&separation(1.17), 2.0 * PI, 65, Backend::Analytic)),
        (
            "spin-boson".into(),
            trajectory(&ModelDesc::SpinBoson { kernel: underdamped() }, 10.0, 401, Backend::Analytic),
        ),
        ("qutrit gksl".into(), gksl),
        ("qubit decay with sin rate".into(), decay),
    ]
}

fn pick<'a>(snaps: &'a [(String, Trajectory)], rng: &mut ChaCha8Rng) -> (&'a str, &'a Superoperator) {
    let (name, traj) = &snaps[rng.random_range(0..snaps.len())];
    (name, traj.map(rng.random_range(0..traj.len())))
}

#[test]
fn criterion_7_property_suites() {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let snaps = cptp_snapshots(&mut rng);

    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let (_, lam) = pick(&snaps, &mut rng);
        let d = lam.dim();
        let x = random_hermitian(d * d, &mut rng);
        worst = worst.max(trace_norm(&lam.apply_extended_hermitian(&x)) - trace_norm(&x));
    }
    out.check(format!("contraction: max ‖(id⊗Λ)X‖₁ - ‖X‖₁ = {worst:.3e} <= 1e-8 (200 X)"), worst <= 1e-8);

    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for k in 0..200 {
        let (rho, sigma) = if k % 2 == 0 {
            (random_density_matrix(2, &mut rng), random_density_matrix(2, &mut rng))
        } else {
            (DensityMatrix::pure(&random_ket(2, &mut rng)).unwrap(), random_density_matrix(2, &mut rng))
        };
        let f = fidelity(&rho, &sigma).unwrap();
        let d = trace_distance(&rho, &sigma).unwrap();
        lower = lower.max((1.0 - f) - d);
        upper = upper.max(d - (1.0 - f * f).max(0.0).sqrt());
    }
    out.check(
        format!("F-D bounds on 200 qubit pairs: max (1-F) - D = {lower:.3e}, max D - √(1-F²) = {upper:.3e}"),
        lower <= 1e-10 && upper <= 1e-10,
    );

    let traj = &snaps[0].1;
    let mut nullity = 0.0f64;
    for _ in 0..20 {
        let a = random_hermitian(2, &mut rng);
        let psd = HermitianOperator::new(a.matrix() * a.matrix()).unwrap();
        let s = witness::series(traj, &WitnessSpec::trace_norm_plain(psd).unwrap()).unwrap();
        nullity = nullity.max(s.values.iter().fold(0.0, |m, v| m.max(v.abs())));
        let p = HermitianOperator::outer(&random_ket(2, &mut rng));
        let s = witness::series(traj, &WitnessSpec::trace_norm_plain(p).unwrap()).unwrap();
        nullity = nullity.max(s.values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    out.check(format!("PSD witness nullity: max |flow| = {nullity:.3e} <= 1e-8"), nullity <= 1e-8);

    let (mut re, mut ra, mut ts, mut fi) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..200 {
        let (_, lam) = pick(&snaps, &mut rng);
        let d = lam.dim();
        let rho = random_density_matrix(d, &mut rng);
        let sigma = random_density_matrix(d, &mut rng);
        let out_state =
            |r: &DensityMatrix| DensityMatrix::with_tolerance(lam.apply_hermitian(r.operator()), 1e-8).unwrap();
        let (lr, ls) = (out_state(&rho), out_state(&sigma));
        re = re.max(relative_entropy(&lr, &ls).unwrap() - relative_entropy(&rho, &sigma).unwrap());
        let alpha = [0.3, 0.5, 1.5, 2.0][rng.random_range(0..4)];
        ra = ra.max(
            renyi_relative_entropy(&lr, &ls, alpha).unwrap() - renyi_relative_entropy(&rho, &sigma, alpha).unwrap(),
        );
        let q = [0.0, 0.3, 0.7, 0.95][rng.random_range(0..4)];
        ts =
            ts.max(tsallis_relative_entropy(&lr, &ls, q).unwrap() - tsallis_relative_entropy(&rho, &sigma, q).unwrap());
        fi = fi.max(fidelity(&rho, &sigma).unwrap() - fidelity(&lr, &ls).unwrap());
    }
    out.check(format!("relative entropy non-increasing: max increase {re:.3e} <= 1e-8"), re <= 1e-8);
    out.check(format!("Rényi (α in 0.3..2) non-increasing: max increase {ra:.3e} <= 1e-8"), ra <= 1e-8);
    out.check(format!("Tsallis (q < 1) non-increasing: max increase {ts:.3e} <= 1e-8"), ts <= 1e-8);
    out.check(format!("fidelity non-decreasing: max decrease {fi:.3e} <= 1e-8"), fi <= 1e-8);

    let (mut neg, mut var_err) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let d = rng.random_range(2..5);
        let x = random_hermitian(d, &mut rng);
        let p = rng.random_range(0.05..0.95);
        neg = neg.min(skew_information(&random_density_matrix(d, &mut rng), &x, p).unwrap());
        let psi = random_ket(d, &mut rng);
        let x2 = HermitianOperator::hermitian_part(&(x.matrix() * x.matrix()));
        let variance = x2.expectation(&psi) - x.expectation(&psi).powi(2);
        var_err = var_err.max((skew_information(&DensityMatrix::pure(&psi).unwrap(), &x, p).unwrap() - variance).abs());
    }
    out.check(format!("skew information >= 0: min {neg:.3e} >= -1e-10"), neg >= -1e-10);
    out.check(format!("pure-state skew information equals the variance within {var_err:.3e} <= 1e-8"), var_err <= 1e-8);

    for (name, traj) in dual_cases() {
        let (primal, dual) = detection_pair(&traj, &mut rng);
        out.check(
            format!("dual/primal agreement on {name}: extended detects {primal}, dual detects {dual}"),
            primal == dual,
        );
    }
    out.finish(7, "property suites");
}

fn dual_cases() -> Vec<(&'static str, Trajectory)> {
    vec![
        ("sine dephasing", trajectory(&sine_dephasing(), 2.0 * PI, 129, Backend::Analytic)),
        ("constant dephasing", trajectory(&preset("constant_dephasing").unwrap(), 2.0 * PI, 129, Backend::Analytic)),
        (
            "spin-boson underdamped",
            trajectory(&preset("spin_boson_underdamped").unwrap(), 10.0, 401, Backend::Analytic),
        ),
        ("spin-boson overdamped", trajectory(&preset("spin_boson_overdamped").unwrap(), 10.0, 401, Backend::Analytic)),
        ("trace replacement 1.17", trajectory(&separation(1.17), 2.0 * PI, 129, Backend::Analytic)),
    ]
}

/// Whether the extended trace-norm witness detects a violation (fixed
/// candidates plus the optimized witness), and whether any dual
/// operator-norm candidate does.
fn detection_pair(traj: &Trajectory, rng: &mut ChaCha8Rng) -> (bool, bool) {
    let letters = ['i', 'x', 'y', 'z'];
    let mut candidates: Vec<HermitianOperator> = Vec::new();
    for a in letters {
        for b in letters {
            if (a, b) != ('i', 'i') {
                candidates.push(pauli_string(&format!("{a}{b}")).unwrap());
            }
        }
    }
    candidates.extend((0..16).map(|_| random_hermitian(4, rng)));
    let search = SearchConfig { seeds: 16, iterations: 40, ..SearchConfig::default() };
    let mut primal = witness_measure(traj, &search).unwrap().value > 0.0;
    let mut dual = false;
    for x in candidates {
        if let Ok(spec) = WitnessSpec::trace_norm_extended(x.clone()) {
            primal |= !witness::series(traj, &spec).unwrap().violation_intervals.is_empty();
        }
        dual |= !witness::series(traj, &WitnessSpec::dual_operator_norm(x).unwrap())
            .unwrap()
            .violation_intervals
            .is_empty();
    }
    (primal, dual)
}

#[test]
fn criterion_8_dephasing_spectral_modes() {
    let mut out = Outcome::new();
    let traj = trajectory(&sine_dephasing(), 2.0 * PI, 257, Backend::Analytic);
    let modes = spectral_modes(&traj).unwrap();
    out.check(format!("commutative with {} modes", modes.modes.len()), modes.commutative && modes.modes.len() == 4);
    let times = traj.times();
    let err_to = |m: &nonmarkov::witness::SpectralMode, f: &dyn Fn(f64) -> f64| {
        m.eigenvalues.iter().zip(times).map(|(mu, &t)| (mu - C64::new(f(t), 0.0)).norm()).fold(0.0, f64::max)
    };
    let one = |_: f64| 1.0;
    let decay = |t: f64| (-(1.0 - t.cos())).exp();
    let mut constant = Vec::new();
    let mut decaying = Vec::new();
    for m in &modes.modes {
        let (e1, e2) = (err_to(m, &one), err_to(m, &decay));
        if e1 <= 1e-6 {
            constant.push(m);
        } else if e2 <= 1e-6 {
            decaying.push(m);
        }
    }
    out.check(
        format!("μ = 1 for {} modes, μ = e^(-Γ) for {} modes (tol 1e-6)", constant.len(), decaying.len()),
        constant.len() == 2 && decaying.len() == 2,
    );
    out.check(
        "constant modes have no monotonicity failure",
        constant.iter().all(|m| m.monotonicity_violations.is_empty()),
    );
    // Interior nodes with γ < 0 must be flagged; nodes with γ > 0 must not.
    let h = times[1] - times[0];
    let mut mismatches = 0;
    for m in &decaying {
        for &t in &times[1..times.len() - 1] {
            let flagged = m.monotonicity_violations.iter().any(|iv| t >= iv.t_start && t <= iv.t_end);
            let gamma = t.sin();
            if gamma.abs() > 1e-9 && flagged != (gamma < 0.0) {
                mismatches += 1;
            }
        }
        let iv = &m.monotonicity_violations;
        out.check(
            format!("decaying mode flags {:.4?}", iv.iter().map(|v| (v.t_start, v.t_end)).collect::<Vec<_>>()),
            iv.len() == 1 && (iv[0].t_start - PI).abs() <= h + 1e-9 && (iv[0].t_end - (2.0 * PI - h)).abs() <= 1e-9,
        );
    }
    out.check(format!("monotonicity failure exactly where γ < 0 ({mismatches} mismatched nodes)"), mismatches == 0);
    out.finish(8, "spectral modes of dephasing");
}
