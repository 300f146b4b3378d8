//! Voltage-controlled memristor device model.
//!
//! Current through the device is `a1·x·sinh(b·V)` for nonnegative bias and
//! `a2·x·sinh(b·V)` otherwise. The internal state `x` lives in `[0, 1]`
//! (1 = low-resistive, 0 = high-resistive) and moves only when the applied
//! voltage exceeds a polarity-dependent threshold; window functions pin the
//! motion to the valid interval. State integration under an arbitrary
//! voltage waveform uses explicit stepping with an adaptive per-step bound
//! on `|Δx|`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default nondestructive read voltage, strictly inside the threshold band.
pub const DEFAULT_READ_VOLTAGE: f64 = 0.1;

/// Largest admissible state change per integration step.
const MAX_STEP_DELTA: f64 = 0.01;

/// Device fit constants. Defaults are the reference parameter set for the
/// modeled device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemristorParams {
    /// Current amplitude for nonnegative bias.
    pub a1: f64,
    /// Current amplitude for negative bias.
    pub a2: f64,
    /// `sinh` argument scale (1/V).
    pub b: f64,
    /// State-change rate above the positive threshold.
    pub a_p: f64,
    /// State-change rate below the negative threshold.
    pub a_n: f64,
    /// Positive threshold magnitude (V).
    pub v_p: f64,
    /// Negative threshold magnitude (V, stored positive).
    pub v_n: f64,
    /// Breakpoint where increasing motion stops being linear.
    pub x_p: f64,
    /// Breakpoint offset for decreasing motion (linear while `x > 1 - x_n`).
    pub x_n: f64,
    /// Exponential decay rate of increasing motion past `x_p`.
    pub alpha_p: f64,
    /// Exponential decay rate of decreasing motion past `1 - x_n`.
    pub alpha_n: f64,
    /// Direction flag, +1 or -1. With +1, suprathreshold positive voltage
    /// increases the state.
    pub eta: f64,
}

impl Default for MemristorParams {
    fn default() -> Self {
        Self {
            a1: 0.17,
            a2: 0.17,
            b: 0.05,
            a_p: 4000.0,
            a_n: 4000.0,
            v_p: 0.16,
            v_n: 0.15,
            x_p: 0.3,
            x_n: 0.5,
            alpha_p: 1.0,
            alpha_n: 5.0,
            eta: 1.0,
        }
    }
}

impl MemristorParams {
    pub fn validate(&self) -> Result<(), MemristorError> {
        let checks: [(&'static str, f64, bool); 8] = [
            ("v_p", self.v_p, self.v_p > 0.0 && self.v_p.is_finite()),
            ("v_n", self.v_n, self.v_n > 0.0 && self.v_n.is_finite()),
            ("a_p", self.a_p, self.a_p > 0.0 && self.a_p.is_finite()),
            ("a_n", self.a_n, self.a_n > 0.0 && self.a_n.is_finite()),
            ("x_p", self.x_p, self.x_p > 0.0 && self.x_p < 1.0),
            ("x_n", self.x_n, self.x_n > 0.0 && self.x_n < 1.0),
            ("eta", self.eta, self.eta == 1.0 || self.eta == -1.0),
            (
                "a1/a2/b/alpha_p/alpha_n",
                self.a1,
                [self.a1, self.a2, self.b, self.alpha_p, self.alpha_n]
                    .iter()
                    .all(|v| v.is_finite()),
            ),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(MemristorError::InvalidParam { name, value });
            }
        }
        Ok(())
    }

    /// Device current at state `x` under bias `v`.
    pub fn current(&self, x: f64, v: f64) -> f64 {
        let amplitude = if v >= 0.0 { self.a1 } else { self.a2 };
        amplitude * x * (self.b * v).sinh()
    }

    /// Thresholded voltage contribution to the state rate. Identically zero
    /// for `-v_n <= v <= v_p`.
    pub fn threshold_term(&self, v: f64) -> f64 {
        if v > self.v_p {
            self.a_p * (v.exp() - self.v_p.exp())
        } else if v < -self.v_n {
            -self.a_n * ((-v).exp() - self.v_n.exp())
        } else {
            0.0
        }
    }

    /// Dopant-drift multiplier for the given direction of motion. The
    /// window factors force it to zero at the bound the motion runs into.
    pub fn drift_term(&self, x: f64, motion: Motion) -> f64 {
        match motion {
            Motion::Increasing => {
                if x < self.x_p {
                    1.0
                } else {
                    let window = (self.x_p - x) / (1.0 - self.x_p) + 1.0;
                    (-self.alpha_p * (x - self.x_p)).exp() * window
                }
            }
            Motion::Decreasing => {
                if x > 1.0 - self.x_n {
                    1.0
                } else {
                    let window = x / (1.0 - self.x_n);
                    (self.alpha_n * (x + self.x_n - 1.0)).exp() * window
                }
            }
        }
    }

    /// `dx/dt` in 1/ms at state `x` under bias `v`.
    pub fn state_rate(&self, x: f64, v: f64) -> f64 {
        let g = self.threshold_term(v);
        if g == 0.0 {
            return 0.0;
        }
        let motion = if self.eta * g > 0.0 {
            Motion::Increasing
        } else {
            Motion::Decreasing
        };
        self.eta * g * self.drift_term(x, motion)
    }

    /// Read conductance at a nondestructive bias: `current/v_read` with
    /// `0 < v_read <= min(v_p, v_n)`.
    pub fn read_conductance(&self, x: f64, v_read: f64) -> Result<f64, MemristorError> {
        if v_read.is_nan() || v_read <= 0.0 || v_read > self.v_p.min(self.v_n) {
            return Err(MemristorError::DestructiveRead {
                v_read,
                limit: self.v_p.min(self.v_n),
            });
        }
        Ok(self.current(x, v_read) / v_read)
    }

    /// Conductance normalized to `[0, 1]` between the fully-off and
    /// fully-on states. For this device the map is linear, so the value
    /// coincides with `x` up to rounding.
    pub fn normalized_weight(&self, x: f64, v_read: f64) -> Result<f64, MemristorError> {
        let g = self.read_conductance(x, v_read)?;
        let g_min = self.read_conductance(0.0, v_read)?;
        let g_max = self.read_conductance(1.0, v_read)?;
        Ok((g - g_min) / (g_max - g_min))
    }
}

/// Direction of pending state motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    Increasing,
    Decreasing,
}

/// Memristor state variable, kept in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemristorState {
    x: f64,
}

impl MemristorState {
    pub fn new(x: f64) -> Result<Self, MemristorError> {
        if !x.is_finite() || !(0.0..=1.0).contains(&x) {
            return Err(MemristorError::StateOutOfRange { x });
        }
        Ok(Self { x })
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

/// Advance the state under `waveform` from `t0` to `t1` by explicit
/// stepping. Steps never exceed `dt_max` and are shortened so no single
/// step moves the state by more than 0.01; the state is clamped to `[0, 1]`
/// after every step.
pub fn integrate<W>(
    state: &mut MemristorState,
    params: &MemristorParams,
    waveform: W,
    t0: f64,
    t1: f64,
    dt_max: f64,
) -> Result<(), MemristorError>
where
    W: Fn(f64) -> f64,
{
    if !t0.is_finite() || !t1.is_finite() || t1 < t0 {
        return Err(MemristorError::InvalidInterval { t0, t1 });
    }
    if !dt_max.is_finite() || dt_max <= 0.0 {
        return Err(MemristorError::InvalidStep { dt_max });
    }

    let mut t = t0;
    let mut x = state.x;
    while t < t1 {
        let v = waveform(t);
        if !v.is_finite() {
            return Err(MemristorError::NonFiniteVoltage { t, v });
        }
        let rate = params.state_rate(x, v);
        let mut h = dt_max.min(t1 - t);
        if rate != 0.0 {
            h = h.min(MAX_STEP_DELTA / rate.abs());
        }
        if t + h == t {
            return Err(MemristorError::StepUnderflow { t });
        }
        x = (x + rate * h).clamp(0.0, 1.0);
        t += h;
    }
    state.x = x;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MemristorError {
    #[error("memristor parameter {name} = {value} is out of range")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("memristor state x = {x} is outside [0, 1]")]
    StateOutOfRange { x: f64 },
    #[error("read voltage {v_read} V is outside the nondestructive range (0, {limit}]")]
    DestructiveRead { v_read: f64, limit: f64 },
    #[error("integration interval [{t0}, {t1}] is invalid")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("integration step bound dt_max = {dt_max} must be positive and finite")]
    InvalidStep { dt_max: f64 },
    #[error("waveform sample at t = {t} ms is not finite ({v})")]
    NonFiniteVoltage { t: f64, v: f64 },
    #[error("integration step underflowed at t = {t} ms")]
    StepUnderflow { t: f64 },
}
