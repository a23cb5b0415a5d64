//! Dormand-Prince 5(4) with Hairer's continuous extension, on complex state vectors.

use num_complex::Complex64 as C64;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::CVector;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { atol: 1e-10, rtol: 1e-8, max_steps: 2_000_000 }
    }
}

impl OdeOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.atol) && positive(self.rtol)) {
            return Err(Error::InvalidModel(format!(
                "ode tolerances must be positive (atol {}, rtol {})",
                self.atol, self.rtol
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidModel("ode max_steps must be positive".into()));
        }
        Ok(())
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn combo(y: &CVector, h: f64, coeffs: &[f64], k: &[CVector]) -> CVector {
    let mut out = y.clone();
    for (c, kj) in coeffs.iter().zip(k) {
        if *c != 0.0 {
            out.axpy(C64::new(h * c, 0.0), kj, C64::new(1.0, 0.0));
        }
    }
    out
}

fn scaled_rms(err: &CVector, y0: &CVector, y1: &CVector, opts: &OdeOptions) -> f64 {
    let n = err.len().max(1) as f64;
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1.iter()))
        .map(|(e, (a, b))| {
            let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
            (e.norm() / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` and samples the solution at every
/// requested output time (ascending, all `≥ t0`) through the dense output.
pub fn integrate<F>(mut f: F, t0: f64, y0: CVector, outputs: &[f64], opts: &OdeOptions) -> Result<Vec<CVector>>
where
    F: FnMut(f64, &CVector) -> Result<CVector>,
{
    let mut result = Vec::with_capacity(outputs.len());
    let Some(&t_end) = outputs.last() else {
        return Ok(result);
    };
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs[0] < t0 {
        return Err(Error::InvalidGrid("output times must be ascending and not before t0".into()));
    }
    let mut next = 0;
    while next < outputs.len() && outputs[next] <= t0 {
        result.push(y0.clone());
        next += 1;
    }
    if next == outputs.len() {
        return Ok(result);
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;

    // initial step from the scaled magnitudes of y and f
    let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.norm()).collect();
    let d0 = (y.iter().zip(&sc).map(|(v, s)| (v.norm() / s).powi(2)).sum::<f64>() / sc.len() as f64).sqrt();
    let d1 = (k1.iter().zip(&sc).map(|(v, s)| (v.norm() / s).powi(2)).sum::<f64>() / sc.len() as f64).sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(t_end - t0).max(1e-12 * (t_end - t0));

    let mut steps = 0usize;
    let mut fac_old = 1e-4f64;
    let mut last_rejected = false;
    while next < outputs.len() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Integration { t, reason: format!("exceeded {} steps", opts.max_steps) });
        }
        let h_min = 1e-14 * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::Integration { t, reason: format!("step size underflow (h = {h:e})") });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        let mut k: Vec<CVector> = Vec::with_capacity(7);
        k.push(k1.clone());
        for s in 1..7 {
            let ys = combo(&y, h, &A[s][..s], &k);
            k.push(f(t + C[s] * h, &ys)?);
        }
        let y_new = combo(&y, h, &A[6][..6], &k);
        // FSAL: k[6] = f(t+h, y_new)
        let mut err = CVector::zeros(y.len());
        for (e, kj) in E.iter().zip(&k) {
            err.axpy(C64::new(h * e, 0.0), kj, C64::new(1.0, 0.0));
        }
        let err_norm = scaled_rms(&err, &y, &y_new, opts);
        if !err_norm.is_finite() {
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        // PI step-size control
        let beta = 0.04;
        let expo = 0.2 - 0.75 * beta;
        let fac11 = err_norm.max(1e-300).powf(expo);
        let fac = (fac11 / fac_old.powf(beta) / 0.9).clamp(0.1, 5.0);
        let mut h_new = h / fac;

        if err_norm <= 1.0 {
            fac_old = err_norm.max(1e-4);
            let t_new = t + h;
            let ydiff = &y_new - &y;
            let bspl = &k[0] * C64::new(h, 0.0) - &ydiff;
            let c3 = &ydiff - &k[6] * C64::new(h, 0.0) - &bspl;
            let mut c4 = CVector::zeros(y.len());
            for (dj, kj) in D.iter().zip(&k) {
                if *dj != 0.0 {
                    c4.axpy(C64::new(h * dj, 0.0), kj, C64::new(1.0, 0.0));
                }
            }
            while next < outputs.len() && outputs[next] <= t_new + 1e-14 * t_new.abs().max(1.0) {
                let s = ((outputs[next] - t) / h).clamp(0.0, 1.0);
                let s1 = 1.0 - s;
                let inner = &c3 + &c4 * C64::new(s1, 0.0);
                let inner = &bspl + inner * C64::new(s, 0.0);
                let inner = &ydiff + inner * C64::new(s1, 0.0);
                result.push(&y + inner * C64::new(s, 0.0));
                next += 1;
            }
            t = t_new;
            y = y_new;
            k1 = k.swap_remove(6);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
        } else {
            h_new = h / (fac11 / 0.9).clamp(1.0, 10.0);
            last_rejected = true;
        }
        h = h_new;
    }
    Ok(result)
}
