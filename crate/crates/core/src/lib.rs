//! Behavioral simulator of a neuromorphic system built from leaky
//! integrate-and-fire-with-latency neurons and memristive STDP synapses.
//!
//! Suprathreshold neurons fire after a state-dependent continuous delay
//! (`t_f = 1/(S - 1)`) instead of instantly, which lets input strength be
//! encoded in spike timing. Synaptic weights are the normalized read
//! conductance of voltage-controlled memristors; a behavioral weight-update
//! pipeline turns pre/post spike-pairing intervals into polarity-switched
//! write pulses, reproducing an STDP-like learning window.
//!
//! # Modules
//!
//! - [`neuron`] — LIFL neuron dynamics (passive/active modes, latency,
//!   refractoriness)
//! - [`memristor`] — device model: I-V relation, thresholded state motion,
//!   waveform integration
//! - [`plasticity`] — pairing pipeline, ideal STDP reference, calibration
//! - [`engine`] — deterministic event-driven network simulation
//! - [`oracle`] — clock-driven reference simulator for equivalence testing
//! - [`config`] — experiment configuration files
//! - [`experiments`] — drivers producing the latency, STDP-window,
//!   hysteresis, and motif datasets
//! - [`trace`] — output records and CSV export

pub mod config;
pub mod engine;
pub mod experiments;
pub mod memristor;
pub mod neuron;
pub mod oracle;
pub mod plasticity;
pub mod trace;

pub use engine::{EngineError, EventKind, EventQueue, Network, Stimulus, Synapse};
pub use memristor::{MemristorError, MemristorParams, MemristorState};
pub use neuron::{Mode, NeuronError, NeuronParams, NeuronState};
pub use plasticity::{StdpIdealParams, StdpPipelineConfig};
pub use trace::{NeuronId, RecordKind, SynapseId, Trace, TraceRecord};
