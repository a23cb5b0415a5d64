use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time-dependent real coefficient, restricted to presets with closed-form integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFn {
    Constant {
        value: f64,
    },
    /// `amplitude · sin(frequency · t + phase)`
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `offset + amplitude · sin(frequency · t + phase)`
    OffsetSine {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Linear interpolation through `(times, values)`, constant outside the table.
    PiecewiseLinear {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl ScalarFn {
    pub fn constant(value: f64) -> Self {
        ScalarFn::Constant { value }
    }

    pub fn sine(amplitude: f64, frequency: f64, phase: f64) -> Self {
        ScalarFn::Sine { amplitude, frequency, phase }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("non-finite {what} in scalar function")))
            }
        };
        match self {
            ScalarFn::Constant { value } => finite(*value, "value"),
            ScalarFn::Sine { amplitude, frequency, phase } => {
                finite(*amplitude, "amplitude")?;
                finite(*frequency, "frequency")?;
                finite(*phase, "phase")
            }
            ScalarFn::OffsetSine { offset, amplitude, frequency, phase } => {
                finite(*offset, "offset")?;
                finite(*amplitude, "amplitude")?;
                finite(*frequency, "frequency")?;
                finite(*phase, "phase")
            }
            ScalarFn::PiecewiseLinear { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::InvalidModel(
                        "piecewise-linear table needs matching, non-empty times and values".into(),
                    ));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidModel("piecewise-linear times must be strictly increasing".into()));
                }
                times.iter().chain(values).try_for_each(|&x| finite(x, "table entry"))
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Constant { value } => *value,
            ScalarFn::Sine { amplitude, frequency, phase } => amplitude * (frequency * t + phase).sin(),
            ScalarFn::OffsetSine { offset, amplitude, frequency, phase } => {
                offset + amplitude * (frequency * t + phase).sin()
            }
            ScalarFn::PiecewiseLinear { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let k = times.partition_point(|&x| x <= t) - 1;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                values[k] + w * (values[k + 1] - values[k])
            }
        }
    }

    /// `∫₀ᵗ f(τ) dτ`.
    pub fn integral(&self, t: f64) -> f64 {
        let sine_part = |a: f64, w: f64, p: f64| {
            if w == 0.0 {
                a * p.sin() * t
            } else {
                a * (p.cos() - (w * t + p).cos()) / w
            }
        };
        match self {
            ScalarFn::Constant { value } => value * t,
            ScalarFn::Sine { amplitude, frequency, phase } => sine_part(*amplitude, *frequency, *phase),
            ScalarFn::OffsetSine { offset, amplitude, frequency, phase } => {
                offset * t + sine_part(*amplitude, *frequency, *phase)
            }
            ScalarFn::PiecewiseLinear { .. } => self.piecewise_integral(0.0, t),
        }
    }

    fn piecewise_integral(&self, a: f64, b: f64) -> f64 {
        let ScalarFn::PiecewiseLinear { times, .. } = self else { unreachable!() };
        if b < a {
            return -self.piecewise_integral(b, a);
        }
        // breakpoints inside (a, b), integrated piece by piece with the trapezoid rule (exact here)
        let mut pts = vec![a];
        pts.extend(times.iter().copied().filter(|&x| x > a && x < b));
        pts.push(b);
        pts.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (self.eval(w[0]) + self.eval(w[1]))).sum()
    }
}
