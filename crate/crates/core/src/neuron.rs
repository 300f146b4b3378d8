//! Leaky integrate-and-fire-with-latency (LIFL) neuron dynamics.
//!
//! The neuron has three regimes: a subthreshold *passive* mode with linear
//! leak, a suprathreshold *active* mode in which the spike is emitted only
//! after a state-dependent delay (the spike latency, `t_f = 1/(S - 1)`),
//! and an absolute refractory period after each spike. State evolution is
//! lazy: the inner state is only reified when an input or a scheduled event
//! touches the neuron, which is what makes the model suitable for
//! event-driven simulation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-neuron model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuronParams {
    /// Threshold offset above unity; the spiking threshold is `1 + d` and
    /// the maximum spike latency is `1/d`.
    pub d: f64,
    /// Linear subthreshold decay per millisecond. Zero makes the neuron a
    /// perfect integrator.
    pub l_d: f64,
    /// Absolute refractory period in milliseconds.
    pub t_arp: f64,
}

impl Default for NeuronParams {
    fn default() -> Self {
        Self {
            d: 0.04,
            l_d: 0.01,
            t_arp: 2.0,
        }
    }
}

impl NeuronParams {
    pub fn new(d: f64, l_d: f64, t_arp: f64) -> Result<Self, NeuronError> {
        let params = Self { d, l_d, t_arp };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), NeuronError> {
        if !self.d.is_finite() || self.d <= 0.0 {
            return Err(NeuronError::InvalidParam {
                name: "d",
                value: self.d,
                constraint: "must be finite and > 0",
            });
        }
        if !self.l_d.is_finite() || self.l_d < 0.0 {
            return Err(NeuronError::InvalidParam {
                name: "l_d",
                value: self.l_d,
                constraint: "must be finite and >= 0",
            });
        }
        if !self.t_arp.is_finite() || self.t_arp < 0.0 {
            return Err(NeuronError::InvalidParam {
                name: "t_arp",
                value: self.t_arp,
                constraint: "must be finite and >= 0",
            });
        }
        Ok(())
    }

    /// Spiking threshold `S_th = 1 + d`.
    pub fn threshold(&self) -> f64 {
        1.0 + self.d
    }

    /// Maximum finite spike latency, reached at `S = S_th`.
    pub fn max_latency(&self) -> f64 {
        1.0 / self.d
    }

    /// Spike latency for a suprathreshold inner state: `t_f = 1/(S - 1)`.
    ///
    /// At exactly `S = S_th` this returns `1/d` without going through the
    /// subtraction, so the boundary latency is exact.
    pub fn time_to_fire(&self, s: f64) -> Result<f64, NeuronError> {
        if !s.is_finite() || s < self.threshold() {
            return Err(NeuronError::BelowThreshold {
                s,
                threshold: self.threshold(),
            });
        }
        if s == self.threshold() {
            return Ok(self.max_latency());
        }
        Ok(1.0 / (s - 1.0))
    }
}

/// Operating regime of the neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Subthreshold leaky integration.
    Passive,
    /// Suprathreshold; a spike is scheduled and counting down.
    Active,
    /// Post-spike; inputs are ignored and the state is pinned at rest.
    Refractory,
}

/// Mutable neuron state. All times are absolute simulation times in ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronState {
    s: f64,
    last_update: f64,
    mode: Mode,
    scheduled_fire: Option<f64>,
    refractory_until: Option<f64>,
}

impl Default for NeuronState {
    fn default() -> Self {
        Self::new()
    }
}

impl NeuronState {
    /// A neuron at rest at time zero.
    pub fn new() -> Self {
        Self {
            s: 0.0,
            last_update: 0.0,
            mode: Mode::Passive,
            scheduled_fire: None,
            refractory_until: None,
        }
    }

    /// Inner state as of the last update time.
    pub fn inner(&self) -> f64 {
        self.s
    }

    pub fn last_update(&self) -> f64 {
        self.last_update
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn scheduled_fire(&self) -> Option<f64> {
        self.scheduled_fire
    }

    pub fn refractory_until(&self) -> Option<f64> {
        self.refractory_until
    }

    fn check_causal(&self, now: f64) -> Result<(), NeuronError> {
        if !now.is_finite() || now < self.last_update {
            return Err(NeuronError::CausalityViolation {
                now,
                last_update: self.last_update,
            });
        }
        Ok(())
    }

    fn check_input(input: f64) -> Result<(), NeuronError> {
        if !input.is_finite() || input < 0.0 {
            return Err(NeuronError::NegativeInput { input });
        }
        Ok(())
    }

    /// Subthreshold update: decay the state over the elapsed interval,
    /// clamp at rest, then add the impulse. If the result reaches the
    /// threshold the neuron switches to active mode and the new fire time
    /// is returned.
    pub fn passive_update(
        &mut self,
        params: &NeuronParams,
        input: f64,
        now: f64,
    ) -> Result<Option<f64>, NeuronError> {
        if self.mode != Mode::Passive {
            return Err(NeuronError::WrongMode {
                expected: Mode::Passive,
                actual: self.mode,
            });
        }
        self.check_causal(now)?;
        Self::check_input(input)?;

        let dt = now - self.last_update;
        self.s = (self.s - params.l_d * dt).max(0.0) + input;
        self.last_update = now;

        if self.s >= params.threshold() {
            let fire_at = now + params.time_to_fire(self.s)?;
            self.mode = Mode::Active;
            self.scheduled_fire = Some(fire_at);
            Ok(Some(fire_at))
        } else {
            Ok(None)
        }
    }

    /// Suprathreshold update. The fractional term advances the state so
    /// that, absent input, the remaining latency shrinks exactly by the
    /// elapsed time; any positive input moves the scheduled fire earlier.
    /// Returns the new absolute fire time.
    pub fn active_update(
        &mut self,
        params: &NeuronParams,
        input: f64,
        now: f64,
    ) -> Result<f64, NeuronError> {
        if self.mode != Mode::Active {
            return Err(NeuronError::WrongMode {
                expected: Mode::Active,
                actual: self.mode,
            });
        }
        let scheduled = self
            .scheduled_fire
            .expect("active mode always has a scheduled fire");
        if now >= scheduled {
            return Err(NeuronError::FireOverdue { now, scheduled });
        }
        self.check_causal(now)?;
        Self::check_input(input)?;

        let dt = now - self.last_update;
        let p = self.s - 1.0;
        self.s = self.s + input + p * p * dt / (1.0 - p * dt);
        self.last_update = now;

        let fire_at = now + params.time_to_fire(self.s)?;
        self.scheduled_fire = Some(fire_at);
        Ok(fire_at)
    }

    /// Emit the scheduled spike: reset to rest and enter the refractory
    /// period. `now` must be the scheduled fire time.
    pub fn fire(&mut self, params: &NeuronParams, now: f64) -> Result<(), NeuronError> {
        if self.mode != Mode::Active {
            return Err(NeuronError::WrongMode {
                expected: Mode::Active,
                actual: self.mode,
            });
        }
        let scheduled = self
            .scheduled_fire
            .expect("active mode always has a scheduled fire");
        if now != scheduled {
            return Err(NeuronError::FireTimeMismatch { now, scheduled });
        }
        self.s = 0.0;
        self.mode = Mode::Refractory;
        self.scheduled_fire = None;
        self.refractory_until = Some(now + params.t_arp);
        self.last_update = now;
        Ok(())
    }

    /// Leave the refractory period; the state stays at rest. An arrival at
    /// exactly the refractory end is processed normally afterwards.
    pub fn end_refractory(&mut self, now: f64) -> Result<(), NeuronError> {
        if self.mode != Mode::Refractory {
            return Err(NeuronError::WrongMode {
                expected: Mode::Refractory,
                actual: self.mode,
            });
        }
        self.check_causal(now)?;
        self.mode = Mode::Passive;
        self.refractory_until = None;
        self.last_update = now;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeuronError {
    #[error("neuron parameter {name} = {value} violates constraint: {constraint}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("update at t = {now} ms precedes last update at t = {last_update} ms")]
    CausalityViolation { now: f64, last_update: f64 },
    #[error("input {input} must be finite and nonnegative")]
    NegativeInput { input: f64 },
    #[error("operation requires {expected:?} mode but neuron is {actual:?}")]
    WrongMode { expected: Mode, actual: Mode },
    #[error("state {s} is below threshold {threshold}; no spike latency is defined")]
    BelowThreshold { s: f64, threshold: f64 },
    #[error("update at t = {now} ms is not before the scheduled fire at {scheduled} ms")]
    FireOverdue { now: f64, scheduled: f64 },
    #[error("fire at t = {now} ms does not match the schedule at {scheduled} ms")]
    FireTimeMismatch { now: f64, scheduled: f64 },
}
