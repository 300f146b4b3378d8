//! Deterministic discrete-event simulation core.
//!
//! The engine owns a network graph and a time-ordered event queue. Spike
//! latency is realized by scheduling each threshold crossing as a future
//! fire event; any further input reschedules the fire through the neuron's
//! latency-consistent update. Ties at one timestamp resolve by event
//! class — fires first, then refractory ends, then external spikes, then
//! synaptic deliveries — so a neuron that is due to fire always wins over
//! a spike arriving at the same instant, and superseded fire events are
//! discarded by a per-neuron schedule version.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::memristor::{MemristorError, MemristorParams, MemristorState, DEFAULT_READ_VOLTAGE};
use crate::neuron::{Mode, NeuronError, NeuronParams, NeuronState};
use crate::plasticity::{apply_pairing, PlasticityError, StdpPipelineConfig};
use crate::trace::{NeuronId, RecordKind, SynapseId, Trace};

/// What a queued event does when it reaches the front of the queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    /// A previously scheduled spike comes due. Stale versions are ignored.
    NeuronFire { neuron: NeuronId, version: u64 },
    /// The absolute refractory period ends.
    RefractoryEnd { neuron: NeuronId },
    /// A stimulus pulse arrives directly at a neuron (unit weight).
    ExternalSpike { neuron: NeuronId, amplitude: f64 },
    /// A presynaptic spike arrives through a synapse.
    SynapticDelivery { synapse: SynapseId },
}

impl EventKind {
    fn class(&self) -> u8 {
        match self {
            EventKind::NeuronFire { .. } => 0,
            EventKind::RefractoryEnd { .. } => 1,
            EventKind::ExternalSpike { .. } => 2,
            EventKind::SynapticDelivery { .. } => 3,
        }
    }
}

/// A scheduled event. Total order: time, then event class, then target id,
/// then insertion sequence (FIFO among full ties).
#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    target: usize,
    seq: u64,
}

impl Event {
    fn key(&self) -> (f64, u8, usize, u64) {
        (self.time, self.kind.class(), self.target, self.seq)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        let (t1, c1, g1, s1) = self.key();
        let (t2, c2, g2, s2) = other.key();
        t1.total_cmp(&t2)
            .then(c1.cmp(&c2))
            .then(g1.cmp(&g2))
            .then(s1.cmp(&s2))
            .reverse() // BinaryHeap is a max-heap
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue of pending events with monotone pop times.
#[derive(Debug, Clone, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    seq: u64,
    now: f64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Current simulation time (the time of the last popped event).
    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) -> Result<(), EngineError> {
        if !time.is_finite() {
            return Err(EngineError::NonFiniteTime { time });
        }
        if time < self.now {
            return Err(EngineError::SchedulePast {
                time,
                now: self.now,
            });
        }
        let target = match kind {
            EventKind::NeuronFire { neuron, .. } => neuron.0,
            EventKind::RefractoryEnd { neuron } => neuron.0,
            EventKind::ExternalSpike { neuron, .. } => neuron.0,
            EventKind::SynapticDelivery { synapse } => synapse.0,
        };
        self.heap.push(Event {
            time,
            kind,
            target,
            seq: self.seq,
        });
        self.seq += 1;
        Ok(())
    }

    /// Remove and return the globally least event under the total order.
    pub fn pop_next(&mut self) -> Option<Event> {
        let ev = self.heap.pop()?;
        self.now = ev.time;
        Some(ev)
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// A plastic or fixed connection between two neurons. The synaptic weight
/// is the normalized read conductance of the attached memristor.
#[derive(Debug, Clone)]
pub struct Synapse {
    pub pre: NeuronId,
    pub post: NeuronId,
    pub memristor: MemristorState,
    pub mem_params: MemristorParams,
    pub pipeline: StdpPipelineConfig,
    pub plastic: bool,
    /// Axonal delay in ms; reserved, zero by default.
    pub delay: f64,
    /// Most recent presynaptic arrival not yet consumed by a pairing.
    last_pre: Option<f64>,
    /// Most recent postsynaptic fire not yet consumed by a pairing.
    last_post: Option<f64>,
}

impl Synapse {
    /// Current synaptic weight in [0, 1].
    pub fn weight(&self) -> f64 {
        self.mem_params
            .normalized_weight(self.memristor.x(), DEFAULT_READ_VOLTAGE)
            .expect("default read voltage is always nondestructive")
    }
}

/// An external input spike aimed at one neuron.
#[derive(Debug, Clone, Copy)]
pub struct Stimulus {
    pub target: NeuronId,
    pub time: f64,
    pub amplitude: f64,
}

/// Network graph plus all mutable simulation state.
#[derive(Debug, Clone, Default)]
pub struct Network {
    params: Vec<NeuronParams>,
    states: Vec<NeuronState>,
    synapses: Vec<Synapse>,
    stimuli: Vec<Stimulus>,
    outgoing: Vec<Vec<SynapseId>>,
    incoming: Vec<Vec<SynapseId>>,
    fire_version: Vec<u64>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_neuron(&mut self, params: NeuronParams) -> Result<NeuronId, EngineError> {
        params.validate().map_err(|source| EngineError::Neuron {
            time: 0.0,
            neuron: self.params.len(),
            source,
        })?;
        let id = NeuronId(self.params.len());
        self.params.push(params);
        self.states.push(NeuronState::new());
        self.outgoing.push(Vec::new());
        self.incoming.push(Vec::new());
        self.fire_version.push(0);
        Ok(id)
    }

    pub fn add_synapse(
        &mut self,
        pre: NeuronId,
        post: NeuronId,
        initial_x: f64,
        mem_params: MemristorParams,
        pipeline: StdpPipelineConfig,
        plastic: bool,
    ) -> Result<SynapseId, EngineError> {
        self.check_neuron(pre)?;
        self.check_neuron(post)?;
        if pre == post {
            return Err(EngineError::SelfLoop { neuron: pre.0 });
        }
        mem_params.validate()?;
        pipeline
            .validate()
            .map_err(|source| EngineError::Plasticity {
                time: 0.0,
                synapse: self.synapses.len(),
                source,
            })?;
        let memristor = MemristorState::new(initial_x)?;
        let id = SynapseId(self.synapses.len());
        self.synapses.push(Synapse {
            pre,
            post,
            memristor,
            mem_params,
            pipeline,
            plastic,
            delay: 0.0,
            last_pre: None,
            last_post: None,
        });
        self.outgoing[pre.0].push(id);
        self.incoming[post.0].push(id);
        Ok(id)
    }

    pub fn add_stimulus(
        &mut self,
        target: NeuronId,
        time: f64,
        amplitude: f64,
    ) -> Result<(), EngineError> {
        self.check_neuron(target)?;
        if !time.is_finite() || time < 0.0 || !amplitude.is_finite() || amplitude < 0.0 {
            return Err(EngineError::InvalidStimulus { time, amplitude });
        }
        self.stimuli.push(Stimulus {
            target,
            time,
            amplitude,
        });
        Ok(())
    }

    fn check_neuron(&self, id: NeuronId) -> Result<(), EngineError> {
        if id.0 >= self.params.len() {
            return Err(EngineError::UnknownNeuron { neuron: id.0 });
        }
        Ok(())
    }

    pub fn neuron_count(&self) -> usize {
        self.params.len()
    }

    pub fn synapse_count(&self) -> usize {
        self.synapses.len()
    }

    pub fn neuron_params(&self, id: NeuronId) -> &NeuronParams {
        &self.params[id.0]
    }

    pub fn all_neuron_params(&self) -> &[NeuronParams] {
        &self.params
    }

    pub fn neuron_state(&self, id: NeuronId) -> &NeuronState {
        &self.states[id.0]
    }

    pub fn synapse(&self, id: SynapseId) -> &Synapse {
        &self.synapses[id.0]
    }

    pub fn stimuli(&self) -> &[Stimulus] {
        &self.stimuli
    }

    /// Run the simulation until the queue drains or the next event lies
    /// beyond `t_end`. Identical networks and stimuli produce identical
    /// traces on every run.
    ///
    /// Each run replays the stimulus schedule against the current synaptic
    /// weights: neuron states and pairing partners start from rest, while
    /// the memristors keep the conductance the previous run left behind.
    pub fn run(&mut self, t_end: f64) -> Result<Trace, EngineError> {
        if !t_end.is_finite() || t_end < 0.0 {
            return Err(EngineError::InvalidEndTime { t_end });
        }
        for state in &mut self.states {
            *state = NeuronState::new();
        }
        for syn in &mut self.synapses {
            syn.last_pre = None;
            syn.last_post = None;
        }
        let mut queue = EventQueue::new();
        let mut trace = Trace::new();

        for i in 0..self.synapses.len() {
            trace.push(
                0.0,
                RecordKind::WeightSample {
                    synapse: SynapseId(i),
                    weight: self.synapses[i].weight(),
                },
            );
        }
        for stim in &self.stimuli {
            queue.schedule(
                stim.time,
                EventKind::ExternalSpike {
                    neuron: stim.target,
                    amplitude: stim.amplitude,
                },
            )?;
        }

        while let Some(event) = queue.pop_next() {
            if event.time > t_end {
                break;
            }
            match event.kind {
                EventKind::NeuronFire { neuron, version } => {
                    self.handle_fire(neuron, version, event.time, &mut queue, &mut trace)?;
                }
                EventKind::RefractoryEnd { neuron } => {
                    let state = &mut self.states[neuron.0];
                    state
                        .end_refractory(event.time)
                        .map_err(|source| EngineError::Neuron {
                            time: event.time,
                            neuron: neuron.0,
                            source,
                        })?;
                    trace.push(
                        event.time,
                        RecordKind::StateSample {
                            neuron,
                            s: state.inner(),
                            mode: state.mode(),
                        },
                    );
                }
                EventKind::ExternalSpike { neuron, amplitude } => {
                    if self.states[neuron.0].mode() == Mode::Refractory {
                        trace.push(event.time, RecordKind::SpikeDropped { neuron });
                    } else {
                        // direct stimuli carry unit postsynaptic weight
                        self.deliver_input(neuron, amplitude, event.time, &mut queue, &mut trace)?;
                    }
                }
                EventKind::SynapticDelivery { synapse } => {
                    self.handle_delivery(synapse, event.time, &mut queue, &mut trace)?;
                }
            }
        }
        Ok(trace)
    }

    /// Emit the scheduled spike of `neuron`: trace it, start refractoriness,
    /// fan out zero-delay deliveries, and run potentiation pairings on
    /// plastic incoming synapses with a pending presynaptic partner.
    fn handle_fire(
        &mut self,
        neuron: NeuronId,
        version: u64,
        now: f64,
        queue: &mut EventQueue,
        trace: &mut Trace,
    ) -> Result<(), EngineError> {
        if version != self.fire_version[neuron.0] {
            return Ok(()); // superseded schedule
        }
        let params = self.params[neuron.0];
        let state = &mut self.states[neuron.0];
        state
            .fire(&params, now)
            .map_err(|source| EngineError::Neuron {
                time: now,
                neuron: neuron.0,
                source,
            })?;
        trace.push(now, RecordKind::Spike { neuron });
        trace.push(
            now,
            RecordKind::StateSample {
                neuron,
                s: state.inner(),
                mode: state.mode(),
            },
        );
        queue.schedule(now + params.t_arp, EventKind::RefractoryEnd { neuron })?;

        for &sid in &self.outgoing[neuron.0] {
            let delay = self.synapses[sid.0].delay;
            queue.schedule(now + delay, EventKind::SynapticDelivery { synapse: sid })?;
        }

        let incoming = self.incoming[neuron.0].clone();
        for sid in incoming {
            let syn = &mut self.synapses[sid.0];
            if !syn.plastic {
                continue;
            }
            if let Some(t_pre) = syn.last_pre.take() {
                if now - t_pre <= syn.pipeline.pairing_window {
                    let delta = apply_pairing(
                        &mut syn.memristor,
                        t_pre,
                        now,
                        &syn.pipeline,
                        &syn.mem_params,
                    )
                    .map_err(|source| EngineError::Plasticity {
                        time: now,
                        synapse: sid.0,
                        source,
                    })?;
                    debug_assert!(delta >= 0.0);
                    trace.push(
                        now,
                        RecordKind::WeightSample {
                            synapse: sid,
                            weight: self.synapses[sid.0].weight(),
                        },
                    );
                }
            }
            self.synapses[sid.0].last_post = Some(now);
        }
        Ok(())
    }

    /// Deliver a presynaptic spike through `synapse`. Refractory targets
    /// drop the spike without recording a pairing partner. Otherwise the
    /// input is the spike amplitude times the current weight, a depression
    /// pairing runs if the target fired recently, and the target's state
    /// update (re)schedules its fire.
    fn handle_delivery(
        &mut self,
        synapse: SynapseId,
        now: f64,
        queue: &mut EventQueue,
        trace: &mut Trace,
    ) -> Result<(), EngineError> {
        let target = self.synapses[synapse.0].post;
        if self.states[target.0].mode() == Mode::Refractory {
            trace.push(now, RecordKind::SpikeDropped { neuron: target });
            return Ok(());
        }

        // the transiting pulse sees the conductance before any update
        let weight = self.synapses[synapse.0].weight();
        debug_assert!((0.0..=1.0).contains(&weight));
        let input = 1.0 * weight;

        if self.synapses[synapse.0].plastic {
            let syn = &mut self.synapses[synapse.0];
            syn.last_pre = Some(now);
            if let Some(t_post) = syn.last_post.take() {
                if now - t_post <= syn.pipeline.pairing_window {
                    let delta = apply_pairing(
                        &mut syn.memristor,
                        now,
                        t_post,
                        &syn.pipeline,
                        &syn.mem_params,
                    )
                    .map_err(|source| EngineError::Plasticity {
                        time: now,
                        synapse: synapse.0,
                        source,
                    })?;
                    debug_assert!(delta <= 0.0);
                    trace.push(
                        now,
                        RecordKind::WeightSample {
                            synapse,
                            weight: self.synapses[synapse.0].weight(),
                        },
                    );
                }
            }
        }

        self.deliver_input(target, input, now, queue, trace)
    }

    /// Apply a weighted input to a non-refractory neuron and (re)schedule
    /// its fire if it is (or becomes) suprathreshold.
    fn deliver_input(
        &mut self,
        neuron: NeuronId,
        input: f64,
        now: f64,
        queue: &mut EventQueue,
        trace: &mut Trace,
    ) -> Result<(), EngineError> {
        let params = self.params[neuron.0];
        let state = &mut self.states[neuron.0];
        let wrap = |source| EngineError::Neuron {
            time: now,
            neuron: neuron.0,
            source,
        };
        let fire_at = match state.mode() {
            Mode::Passive => state.passive_update(&params, input, now).map_err(wrap)?,
            Mode::Active => Some(state.active_update(&params, input, now).map_err(wrap)?),
            Mode::Refractory => unreachable!("refractory inputs are dropped before delivery"),
        };
        trace.push(
            now,
            RecordKind::StateSample {
                neuron,
                s: state.inner(),
                mode: state.mode(),
            },
        );
        if let Some(fire_at) = fire_at {
            self.fire_version[neuron.0] += 1;
            queue.schedule(
                fire_at,
                EventKind::NeuronFire {
                    neuron,
                    version: self.fire_version[neuron.0],
                },
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("event time {time} is not finite")]
    NonFiniteTime { time: f64 },
    #[error("cannot schedule into the past: t = {time} ms < now = {now} ms")]
    SchedulePast { time: f64, now: f64 },
    #[error("neuron {neuron} does not exist")]
    UnknownNeuron { neuron: usize },
    #[error("self-loop synapses on neuron {neuron} are not allowed")]
    SelfLoop { neuron: usize },
    #[error("stimulus (t = {time} ms, amplitude = {amplitude}) is invalid")]
    InvalidStimulus { time: f64, amplitude: f64 },
    #[error("run end time {t_end} must be finite and nonnegative")]
    InvalidEndTime { t_end: f64 },
    #[error("neuron {neuron} failed at t = {time} ms: {source}")]
    Neuron {
        time: f64,
        neuron: usize,
        source: NeuronError,
    },
    #[error("synapse {synapse} failed at t = {time} ms: {source}")]
    Plasticity {
        time: f64,
        synapse: usize,
        source: PlasticityError,
    },
    #[error(transparent)]
    Memristor(#[from] MemristorError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lone_neuron(l_d: f64) -> (Network, NeuronId) {
        let mut net = Network::new();
        let n = net
            .add_neuron(NeuronParams {
                d: 0.04,
                l_d,
                t_arp: 2.0,
            })
            .unwrap();
        (net, n)
    }

    #[test]
    fn queue_orders_fire_before_delivery() {
        let mut q = EventQueue::new();
        q.schedule(
            10.0,
            EventKind::SynapticDelivery {
                synapse: SynapseId(0),
            },
        )
        .unwrap();
        q.schedule(
            10.0,
            EventKind::NeuronFire {
                neuron: NeuronId(0),
                version: 1,
            },
        )
        .unwrap();
        let first = q.pop_next().unwrap();
        assert!(matches!(first.kind, EventKind::NeuronFire { .. }));
    }

    #[test]
    fn queue_is_fifo_among_full_ties() {
        let mut q = EventQueue::new();
        for amplitude in [1.0, 2.0, 3.0] {
            q.schedule(
                5.0,
                EventKind::ExternalSpike {
                    neuron: NeuronId(0),
                    amplitude,
                },
            )
            .unwrap();
        }
        let mut seen = Vec::new();
        while let Some(ev) = q.pop_next() {
            if let EventKind::ExternalSpike { amplitude, .. } = ev.kind {
                seen.push(amplitude);
            }
        }
        assert_eq!(seen, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn queue_rejects_scheduling_into_the_past() {
        let mut q = EventQueue::new();
        q.schedule(
            5.0,
            EventKind::RefractoryEnd {
                neuron: NeuronId(0),
            },
        )
        .unwrap();
        q.pop_next().unwrap();
        let err = q
            .schedule(
                4.0,
                EventKind::RefractoryEnd {
                    neuron: NeuronId(0),
                },
            )
            .unwrap_err();
        assert!(matches!(err, EngineError::SchedulePast { .. }));
    }

    #[test]
    fn empty_network_yields_empty_trace() {
        let mut net = Network::new();
        let trace = net.run(100.0).unwrap();
        assert!(trace.is_empty());
    }

    #[test]
    fn subthreshold_stimulus_leaves_a_sample_trail_and_no_spike() {
        let (mut net, n) = lone_neuron(0.01);
        net.add_stimulus(n, 5.0, 0.5).unwrap();
        let trace = net.run(100.0).unwrap();
        assert!(trace.spike_times(n).is_empty());
        assert_eq!(trace.records().len(), 1);
        assert!(matches!(
            trace.records()[0].kind,
            RecordKind::StateSample { .. }
        ));
    }

    #[test]
    fn suprathreshold_stimulus_fires_at_latency() {
        // amplitude 1.2 into a resting neuron: t_f = 1/(1.2 - 1) = 5
        let (mut net, n) = lone_neuron(0.01);
        net.add_stimulus(n, 3.0, 1.2).unwrap();
        let trace = net.run(100.0).unwrap();
        let spikes = trace.spike_times(n);
        assert_eq!(spikes.len(), 1);
        assert_abs_diff_eq!(spikes[0], 8.0, epsilon = 1e-12);
    }

    #[test]
    fn refractory_window_drops_inputs_half_open() {
        // fires at 10; t_arp = 2: arrivals in (10, 12) are dropped, an
        // arrival exactly at 12 is processed.
        let (mut net, n) = lone_neuron(0.0);
        net.add_stimulus(n, 9.0, 2.0).unwrap(); // fires at 10
        net.add_stimulus(n, 11.0, 5.0).unwrap(); // inside window: dropped
        net.add_stimulus(n, 12.0, 1.5).unwrap(); // boundary: processed
        let trace = net.run(100.0).unwrap();
        let spikes = trace.spike_times(n);
        assert_eq!(spikes.len(), 2);
        assert_abs_diff_eq!(spikes[0], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spikes[1], 14.0, epsilon = 1e-12); // 12 + 1/(1.5-1)
        let drops = trace
            .records()
            .iter()
            .filter(|r| matches!(r.kind, RecordKind::SpikeDropped { .. }))
            .count();
        assert_eq!(drops, 1);
    }

    #[test]
    fn refractory_opacity_matches_no_input_run() {
        let build = |with_noise: bool| {
            let (mut net, n) = lone_neuron(0.01);
            net.add_stimulus(n, 1.0, 2.0).unwrap(); // fires at 2, refractory (2, 4)
            if with_noise {
                net.add_stimulus(n, 2.5, 3.0).unwrap();
                net.add_stimulus(n, 3.999, 0.7).unwrap();
            }
            net.add_stimulus(n, 6.0, 0.5).unwrap();
            let trace = net.run(50.0).unwrap();
            (net, trace)
        };
        let (quiet_net, quiet) = build(false);
        let (noisy_net, noisy) = build(true);
        assert_eq!(
            quiet.spike_times(NeuronId(0)),
            noisy.spike_times(NeuronId(0))
        );
        assert_eq!(
            quiet_net.neuron_state(NeuronId(0)).inner(),
            noisy_net.neuron_state(NeuronId(0)).inner()
        );
    }

    #[test]
    fn second_input_during_latency_advances_fire() {
        let (mut net, n) = lone_neuron(0.0);
        net.add_stimulus(n, 0.0, 1.2).unwrap(); // would fire at 5
        net.add_stimulus(n, 2.0, 0.5).unwrap(); // boosts mid-latency
        let trace = net.run(50.0).unwrap();
        let spikes = trace.spike_times(n);
        assert_eq!(spikes.len(), 1, "stale fire must not also trigger");
        assert!(spikes[0] < 5.0, "fire must move earlier, got {}", spikes[0]);
        // Eq-2 oracle: S(2) = 1.2 + 0.04*2/(1 - 0.2*2) + 0.5
        let s = 1.2 + 0.5 + 0.04 * 2.0 / (1.0 - 0.2 * 2.0);
        assert_abs_diff_eq!(spikes[0], 2.0 + 1.0 / (s - 1.0), epsilon = 1e-12);
    }

    #[test]
    fn simultaneous_deliveries_equal_one_summed_update() {
        let run_split = {
            let (mut net, n) = lone_neuron(0.01);
            net.add_stimulus(n, 4.0, 0.7).unwrap();
            net.add_stimulus(n, 4.0, 0.6).unwrap();
            net.run(50.0).unwrap().spike_times(n)
        };
        let run_summed = {
            let (mut net, n) = lone_neuron(0.01);
            net.add_stimulus(n, 4.0, 1.3).unwrap();
            net.run(50.0).unwrap().spike_times(n)
        };
        assert_eq!(run_split.len(), 1);
        assert_eq!(run_summed.len(), 1);
        assert_abs_diff_eq!(run_split[0], run_summed[0], epsilon = 1e-12);
    }

    #[test]
    fn delivery_at_fire_time_loses_to_the_fire() {
        // stimulus lands exactly when the spike is due: the neuron fires
        // first and the arrival is then dropped by refractoriness.
        let (mut net, n) = lone_neuron(0.0);
        net.add_stimulus(n, 0.0, 1.5).unwrap(); // fires at 2.0
        net.add_stimulus(n, 2.0, 1.5).unwrap();
        let trace = net.run(50.0).unwrap();
        assert_eq!(trace.spike_times(n).len(), 1);
        let drops = trace
            .records()
            .iter()
            .filter(|r| matches!(r.kind, RecordKind::SpikeDropped { .. }))
            .count();
        assert_eq!(drops, 1);
    }

    #[test]
    fn zero_delay_propagation_and_weight_scaling() {
        let mut net = Network::new();
        let pre = net.add_neuron(NeuronParams::default()).unwrap();
        let post = net.add_neuron(NeuronParams::default()).unwrap();
        net.add_synapse(
            pre,
            post,
            0.55,
            MemristorParams::default(),
            StdpPipelineConfig::reference_calibrated(),
            false,
        )
        .unwrap();
        net.add_stimulus(pre, 1.0, 2.0).unwrap(); // pre fires at 2.0
        let trace = net.run(50.0).unwrap();
        assert_abs_diff_eq!(trace.spike_times(pre)[0], 2.0, epsilon = 1e-12);
        // post receives 0.55 at t = 2.0, subthreshold
        let sample = trace
            .records()
            .iter()
            .find_map(|r| match r.kind {
                RecordKind::StateSample { neuron, s, .. } if neuron == post => Some((r.time, s)),
                _ => None,
            })
            .unwrap();
        assert_abs_diff_eq!(sample.0, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sample.1, 0.55, epsilon = 1e-9);
    }

    #[test]
    fn pre_before_post_potentiates_post_before_pre_depresses() {
        let mut net = Network::new();
        let a = net.add_neuron(NeuronParams::default()).unwrap();
        let b = net.add_neuron(NeuronParams::default()).unwrap();
        let c = net.add_neuron(NeuronParams::default()).unwrap();
        let s_ab = net
            .add_synapse(
                a,
                c,
                0.6,
                MemristorParams::default(),
                StdpPipelineConfig::reference_calibrated(),
                true,
            )
            .unwrap();
        let s_bc = net
            .add_synapse(
                b,
                c,
                0.6,
                MemristorParams::default(),
                StdpPipelineConfig::reference_calibrated(),
                true,
            )
            .unwrap();
        // a fires twice quickly so c crosses threshold; b fires after c
        net.add_stimulus(a, 1.0, 2.0).unwrap();
        net.add_stimulus(a, 4.0, 2.0).unwrap();
        net.add_stimulus(b, 24.0, 2.0).unwrap();
        let w_ab0 = net.synapse(s_ab).weight();
        let w_bc0 = net.synapse(s_bc).weight();
        let trace = net.run(100.0).unwrap();
        assert!(
            !trace.spike_times(c).is_empty(),
            "output neuron must fire in this scenario"
        );
        assert!(net.synapse(s_ab).weight() > w_ab0, "S1 must potentiate");
        assert!(net.synapse(s_bc).weight() < w_bc0, "S2 must depress");
    }

    #[test]
    fn determinism_identical_traces() {
        let build = || {
            let mut net = Network::new();
            let a = net.add_neuron(NeuronParams::default()).unwrap();
            let b = net.add_neuron(NeuronParams::default()).unwrap();
            net.add_synapse(
                a,
                b,
                0.7,
                MemristorParams::default(),
                StdpPipelineConfig::reference_calibrated(),
                true,
            )
            .unwrap();
            for k in 0..20 {
                net.add_stimulus(a, k as f64 * 4.0, 1.1 + 0.05 * k as f64)
                    .unwrap();
            }
            net
        };
        let t1 = build().run(200.0).unwrap();
        let t2 = build().run(200.0).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn trace_times_are_nondecreasing() {
        let mut net = Network::new();
        let a = net.add_neuron(NeuronParams::default()).unwrap();
        let b = net.add_neuron(NeuronParams::default()).unwrap();
        net.add_synapse(
            a,
            b,
            0.8,
            MemristorParams::default(),
            StdpPipelineConfig::reference_calibrated(),
            true,
        )
        .unwrap();
        for k in 0..10 {
            net.add_stimulus(a, 1.0 + k as f64 * 3.0, 1.5).unwrap();
        }
        let trace = net.run(60.0).unwrap();
        let times: Vec<f64> = trace.records().iter().map(|r| r.time).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn builder_rejects_bad_topology() {
        let mut net = Network::new();
        let a = net.add_neuron(NeuronParams::default()).unwrap();
        assert!(matches!(
            net.add_synapse(
                a,
                a,
                0.5,
                MemristorParams::default(),
                StdpPipelineConfig::default(),
                true
            ),
            Err(EngineError::SelfLoop { .. })
        ));
        assert!(matches!(
            net.add_synapse(
                a,
                NeuronId(7),
                0.5,
                MemristorParams::default(),
                StdpPipelineConfig::default(),
                true
            ),
            Err(EngineError::UnknownNeuron { .. })
        ));
        assert!(net.add_stimulus(a, -1.0, 1.0).is_err());
        assert!(net.add_stimulus(a, 1.0, -1.0).is_err());
        assert!(net.add_stimulus(a, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn events_beyond_t_end_are_not_processed() {
        let (mut net, n) = lone_neuron(0.01);
        net.add_stimulus(n, 5.0, 1.2).unwrap();
        net.add_stimulus(n, 50.0, 1.2).unwrap();
        let trace = net.run(10.0).unwrap();
        assert_eq!(trace.spike_times(n).len(), 1);
    }

    #[test]
    fn zero_refractory_period_drops_nothing() {
        // with t_arp = 0 the half-open refractory window is empty: an
        // arrival exactly at the fire time is processed right after the
        // refractory end that was scheduled at the same instant
        let mut net = Network::new();
        let n = net
            .add_neuron(NeuronParams {
                d: 0.04,
                l_d: 0.0,
                t_arp: 0.0,
            })
            .unwrap();
        net.add_stimulus(n, 0.0, 1.5).unwrap(); // fires at 2.0
        net.add_stimulus(n, 2.0, 1.5).unwrap(); // same instant: processed
        let trace = net.run(10.0).unwrap();
        assert_eq!(trace.spike_times(n).len(), 2);
        let drops = trace
            .records()
            .iter()
            .filter(|r| matches!(r.kind, RecordKind::SpikeDropped { .. }))
            .count();
        assert_eq!(drops, 0);
    }

    #[test]
    fn reruns_replay_stimuli_against_persisted_weights() {
        let mut net = Network::new();
        let a = net.add_neuron(NeuronParams::default()).unwrap();
        let b = net.add_neuron(NeuronParams::default()).unwrap();
        let s = net
            .add_synapse(
                a,
                b,
                0.55,
                MemristorParams::default(),
                StdpPipelineConfig::reference_calibrated(),
                true,
            )
            .unwrap();
        net.add_stimulus(a, 1.0, 2.0).unwrap();
        net.add_stimulus(a, 4.0, 2.0).unwrap();

        let t1 = net.run(100.0).unwrap();
        let w1 = net.synapse(s).weight();
        assert!(w1 > 0.55, "first run potentiates");

        // the second run starts from rest but keeps the learned weight,
        // so the same pairing potentiates further
        let t2 = net.run(100.0).unwrap();
        let w2 = net.synapse(s).weight();
        assert!(w2 > w1, "second run continues from the learned weight");
        assert_eq!(t1.spike_times(a), t2.spike_times(a));
    }

    #[test]
    fn networks_are_transferable_between_threads() {
        fn assert_send<T: Send + 'static>(_: &T) {}
        let (mut net, n) = lone_neuron(0.01);
        net.add_stimulus(n, 1.0, 1.5).unwrap();
        assert_send(&net);
        let spikes = std::thread::spawn(move || net.run(20.0).unwrap().spike_times(n))
            .join()
            .unwrap();
        assert_eq!(spikes.len(), 1);
    }
}
