//! Brute-force clock-driven reference simulator.
//!
//! Fixed-step re-evaluation of the neuron and device equations, used as an
//! independent oracle for the event-driven engine. Instead of the engine's
//! latency bookkeeping, every step re-derives the suprathreshold state
//! from the remaining time to fire (`S = 1 + 1/remaining`), which at
//! `dt -> 0` coincides with the fractional active-mode update by
//! construction. Write pulses are integrated with the oracle's own
//! fixed-substep loop at the instant a pairing completes, mirroring the
//! engine's atomic weight updates; the step-size precondition therefore
//! covers event timing (refractory periods, converter constants) but not
//! the pulse width.

use thiserror::Error;

use crate::engine::Network;
use crate::memristor::{MemristorParams, DEFAULT_READ_VOLTAGE};
use crate::neuron::Mode;
use crate::plasticity::delta_t_to_voltage;
use crate::trace::{NeuronId, RecordKind, SynapseId, Trace};

/// Fixed substep count for out-of-band write-pulse integration.
const PULSE_STEPS: usize = 1000;

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Time step in ms.
    pub dt: f64,
    /// End of the simulated interval in ms.
    pub t_end: f64,
}

impl OracleConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self { dt, t_end }
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 100.0,
        }
    }
}

struct ClockedNeuron {
    s: f64,
    /// Absolute fire deadline while suprathreshold.
    fire_at: Option<f64>,
    refractory_until: Option<f64>,
}

struct ClockedSynapse {
    x: f64,
    last_pre: Option<f64>,
    last_post: Option<f64>,
}

/// Integrate one rectangular write pulse with a fixed-step loop.
fn write_pulse(x: f64, voltage: f64, width: f64, params: &MemristorParams) -> f64 {
    let dt = width / PULSE_STEPS as f64;
    let mut x = x;
    for _ in 0..PULSE_STEPS {
        x = (x + params.state_rate(x, voltage) * dt).clamp(0.0, 1.0);
    }
    x
}

struct ClockedRun<'a> {
    net: &'a Network,
    neurons: Vec<ClockedNeuron>,
    synapses: Vec<ClockedSynapse>,
    trace: Trace,
}

impl ClockedRun<'_> {
    fn weight(&self, sid: SynapseId) -> Result<f64, OracleError> {
        Ok(self
            .net
            .synapse(sid)
            .mem_params
            .normalized_weight(self.synapses[sid.0].x, DEFAULT_READ_VOLTAGE)?)
    }

    fn pair(
        &mut self,
        sid: SynapseId,
        t_pre: f64,
        t_post: f64,
        record_time: f64,
    ) -> Result<(), OracleError> {
        let topo = self.net.synapse(sid);
        if (t_post - t_pre).abs() > topo.pipeline.pairing_window {
            return Ok(());
        }
        if let Some(v) = delta_t_to_voltage(t_post - t_pre, &topo.pipeline) {
            self.synapses[sid.0].x = write_pulse(
                self.synapses[sid.0].x,
                v,
                topo.pipeline.pulse_width,
                &topo.mem_params,
            );
            let weight = self.weight(sid)?;
            trace_weight(&mut self.trace, record_time, sid, weight);
        }
        Ok(())
    }

    /// Emit a spike whose exact deadline fell inside the step ending at
    /// `t`. The deadline is known analytically, so the spike is stamped
    /// (and pairing intervals are measured) at the deadline; detection and
    /// delivery stay on the step grid.
    fn fire(
        &mut self,
        neuron: usize,
        deadline: f64,
        t: f64,
        deliveries: &mut Vec<(SynapseId, f64)>,
    ) -> Result<(), OracleError> {
        self.neurons[neuron].s = 0.0;
        self.neurons[neuron].fire_at = None;
        self.neurons[neuron].refractory_until =
            Some(deadline + self.net.neuron_params(NeuronId(neuron)).t_arp);
        self.trace.push(
            deadline,
            RecordKind::Spike {
                neuron: NeuronId(neuron),
            },
        );

        for s_idx in 0..self.net.synapse_count() {
            let topo = self.net.synapse(SynapseId(s_idx));
            if topo.pre == NeuronId(neuron) {
                deliveries.push((SynapseId(s_idx), deadline));
            }
            if topo.post == NeuronId(neuron) && topo.plastic {
                if let Some(t_pre) = self.synapses[s_idx].last_pre.take() {
                    self.pair(SynapseId(s_idx), t_pre, deadline, t)?;
                }
                self.synapses[s_idx].last_post = Some(deadline);
            }
        }
        Ok(())
    }

    /// Apply one input that was emitted at `emitted` and is being
    /// processed at the step ending at `t`. State evolution stays on the
    /// step grid, but threshold crossings are evaluated as of the exact
    /// emission time (the latency map steepens sharply near threshold, so
    /// the fraction of a step between emission and processing matters
    /// there).
    fn apply_input(
        &mut self,
        target: NeuronId,
        input: f64,
        emitted: f64,
        t: f64,
        via_synapse: Option<SynapseId>,
    ) -> Result<(), OracleError> {
        if self.neurons[target.0].refractory_until.is_some() {
            self.trace
                .push(t, RecordKind::SpikeDropped { neuron: target });
            return Ok(());
        }

        if let Some(sid) = via_synapse {
            if self.net.synapse(sid).plastic {
                self.synapses[sid.0].last_pre = Some(emitted);
                if let Some(t_post) = self.synapses[sid.0].last_post.take() {
                    self.pair(sid, emitted, t_post, t)?;
                }
            }
        }

        let params = self.net.neuron_params(target);
        let lateness = t - emitted;
        let neuron = &mut self.neurons[target.0];
        match neuron.fire_at {
            None => {
                // the state had already decayed past the emission time; a
                // state at rest stays at rest (the clamp absorbs the gap)
                let at_emission = if neuron.s > 0.0 {
                    neuron.s + params.l_d * lateness
                } else {
                    0.0
                };
                let crossed = at_emission + input;
                if crossed >= params.threshold() {
                    neuron.fire_at = Some(emitted + 1.0 / (crossed - 1.0));
                    neuron.s = crossed;
                } else {
                    neuron.s += input;
                }
            }
            Some(fire_at) => {
                // re-derive the suprathreshold state from the remaining latency
                let remaining = fire_at - emitted;
                let implied = 1.0 + 1.0 / remaining;
                neuron.s = implied + input;
                neuron.fire_at = Some(emitted + 1.0 / (neuron.s - 1.0));
            }
        }
        let mode = if neuron.fire_at.is_some() {
            Mode::Active
        } else {
            Mode::Passive
        };
        let s = neuron.s;
        self.trace.push(
            t,
            RecordKind::StateSample {
                neuron: target,
                s,
                mode,
            },
        );
        Ok(())
    }
}

fn trace_weight(trace: &mut Trace, t: f64, synapse: SynapseId, weight: f64) {
    trace.push(t, RecordKind::WeightSample { synapse, weight });
}

/// Run the clock-driven reference simulation of `net`.
///
/// The network is only read; initial conditions are copied out. Per step:
/// due fires are emitted first (the firing neuron wins any tie), expired
/// refractory periods are released, passive states decay with a clamp at
/// rest, and the step's stimuli and same-step zero-delay deliveries are
/// applied in order.
pub fn run_clocked(net: &Network, config: &OracleConfig) -> Result<Trace, OracleError> {
    if !config.dt.is_finite() || config.dt <= 0.0 {
        return Err(OracleError::InvalidDt { dt: config.dt });
    }
    if !config.t_end.is_finite() || config.t_end < 0.0 {
        return Err(OracleError::InvalidEndTime {
            t_end: config.t_end,
        });
    }
    for i in 0..net.neuron_count() {
        let t_arp = net.neuron_params(NeuronId(i)).t_arp;
        if t_arp > 0.0 && config.dt > t_arp / 10.0 {
            return Err(OracleError::DtTooCoarse {
                dt: config.dt,
                limit: t_arp / 10.0,
                what: "t_arp",
            });
        }
    }
    for i in 0..net.synapse_count() {
        let tau = net.synapse(SynapseId(i)).pipeline.tau_conv;
        if config.dt > tau / 10.0 {
            return Err(OracleError::DtTooCoarse {
                dt: config.dt,
                limit: tau / 10.0,
                what: "tau_conv",
            });
        }
    }

    let mut run = ClockedRun {
        net,
        neurons: (0..net.neuron_count())
            .map(|_| ClockedNeuron {
                s: 0.0,
                fire_at: None,
                refractory_until: None,
            })
            .collect(),
        synapses: (0..net.synapse_count())
            .map(|i| ClockedSynapse {
                x: net.synapse(SynapseId(i)).memristor.x(),
                last_pre: None,
                last_post: None,
            })
            .collect(),
        trace: Trace::new(),
    };

    for i in 0..net.synapse_count() {
        let w = run.weight(SynapseId(i))?;
        trace_weight(&mut run.trace, 0.0, SynapseId(i), w);
    }

    let steps = (config.t_end / config.dt).floor() as usize;
    // a stimulus is processed at the first step at or after its time
    let mut stim_by_step: Vec<Vec<(NeuronId, f64, f64)>> = vec![Vec::new(); steps + 1];
    for stim in net.stimuli() {
        let idx = (stim.time / config.dt).ceil() as usize;
        if idx <= steps {
            stim_by_step[idx].push((stim.target, stim.amplitude, stim.time));
        }
    }

    let mut deliveries: Vec<(SynapseId, f64)> = Vec::new();
    #[allow(clippy::needless_range_loop)] // k is the step index, not just a buffer cursor
    for k in 0..=steps {
        let t = k as f64 * config.dt;

        deliveries.clear();
        let mut due: Vec<(f64, usize)> = run
            .neurons
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.fire_at.filter(|f| *f <= t).map(|f| (f, i)))
            .collect();
        due.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (deadline, i) in due {
            run.fire(i, deadline, t, &mut deliveries)?;
        }

        for neuron in run.neurons.iter_mut() {
            if neuron.refractory_until.is_some_and(|ru| ru <= t) {
                neuron.refractory_until = None;
            }
        }

        for (i, neuron) in run.neurons.iter_mut().enumerate() {
            if neuron.fire_at.is_none() && neuron.refractory_until.is_none() {
                neuron.s = (neuron.s - net.neuron_params(NeuronId(i)).l_d * config.dt).max(0.0);
            }
        }

        let stim = std::mem::take(&mut stim_by_step[k]);
        for (target, amplitude, emitted) in stim {
            run.apply_input(target, amplitude, emitted, t, None)?;
        }
        let pending: Vec<(SynapseId, f64)> = deliveries.clone();
        for (sid, emitted) in pending {
            let weight = run.weight(sid)?;
            let target = net.synapse(sid).post;
            run.apply_input(target, weight, emitted, t, Some(sid))?;
        }
    }
    Ok(run.trace)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle step dt = {dt} must be positive and finite")]
    InvalidDt { dt: f64 },
    #[error("oracle end time {t_end} must be finite and nonnegative")]
    InvalidEndTime { t_end: f64 },
    #[error("oracle dt = {dt} ms is too coarse: must be at most {limit} ms (10x below {what})")]
    DtTooCoarse {
        dt: f64,
        limit: f64,
        what: &'static str,
    },
    #[error(transparent)]
    Memristor(#[from] crate::memristor::MemristorError),
}
