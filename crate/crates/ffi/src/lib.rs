//! C ABI for the simulator.
//!
//! Networks and traces are opaque handles created and destroyed here;
//! every fallible call returns a [`LiflStatus`] and writes its result
//! through out-pointers. Synapses use the default device model with the
//! fitted reference pipeline, so weights follow the calibrated STDP
//! window. The header `include/lifl_sim.h` is generated from this file
//! at build time.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use lifl_sim::trace::{NeuronId, RecordKind, SynapseId};
use lifl_sim::{MemristorParams, Network, NeuronParams, StdpPipelineConfig, Trace};

/// Result code of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiflStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument violated a model constraint (wrong id, bad parameter).
    InvalidArgument = 2,
    /// An index was outside the collection it addresses.
    IndexOutOfRange = 3,
    /// The simulation run itself failed.
    RunFailed = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

/// Opaque network being built or simulated.
pub struct NetworkHandle {
    inner: Network,
}

/// Opaque simulation trace.
pub struct TraceHandle {
    trace: Trace,
    spikes: Vec<(f64, u32)>,
    weights: Vec<(f64, u32, f64)>,
}

impl TraceHandle {
    fn new(trace: Trace) -> Self {
        let spikes = trace
            .spikes()
            .into_iter()
            .map(|(t, n)| (t, n.0 as u32))
            .collect();
        let weights = trace
            .records()
            .iter()
            .filter_map(|r| match r.kind {
                RecordKind::WeightSample { synapse, weight } => {
                    Some((r.time, synapse.0 as u32, weight))
                }
                _ => None,
            })
            .collect();
        Self {
            trace,
            spikes,
            weights,
        }
    }
}

fn guarded(body: impl FnOnce() -> LiflStatus) -> LiflStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(LiflStatus::Panic)
}

/// Create an empty network. Free it with `lifl_network_free`.
#[no_mangle]
pub extern "C" fn lifl_network_new() -> *mut NetworkHandle {
    Box::into_raw(Box::new(NetworkHandle {
        inner: Network::new(),
    }))
}

/// Destroy a network created by `lifl_network_new`. A null pointer is a
/// no-op.
///
/// # Safety
/// `net` must be null or a pointer previously returned by
/// `lifl_network_new` that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn lifl_network_free(net: *mut NetworkHandle) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Add a neuron with the given threshold offset, leak and refractory
/// period; writes the new neuron id to `out_id`.
///
/// # Safety
/// `net` must be a live network handle; `out_id` must be valid for one
/// `uint32_t` write or null.
#[no_mangle]
pub unsafe extern "C" fn lifl_network_add_neuron(
    net: *mut NetworkHandle,
    d: f64,
    l_d: f64,
    t_arp: f64,
    out_id: *mut u32,
) -> LiflStatus {
    let Some(net) = net.as_mut() else {
        return LiflStatus::NullPointer;
    };
    guarded(
        || match net.inner.add_neuron(NeuronParams { d, l_d, t_arp }) {
            Ok(id) => {
                if let Some(out) = out_id.as_mut() {
                    *out = id.0 as u32;
                }
                LiflStatus::Ok
            }
            Err(_) => LiflStatus::InvalidArgument,
        },
    )
}

/// Connect `pre` to `post` through a memristive synapse starting at state
/// `initial_x` in [0, 1]. Plastic synapses follow the calibrated STDP
/// pipeline; fixed ones keep their weight. Writes the synapse id to
/// `out_id`.
///
/// # Safety
/// `net` must be a live network handle; `out_id` must be valid for one
/// `uint32_t` write or null.
#[no_mangle]
pub unsafe extern "C" fn lifl_network_add_synapse(
    net: *mut NetworkHandle,
    pre: u32,
    post: u32,
    initial_x: f64,
    plastic: bool,
    out_id: *mut u32,
) -> LiflStatus {
    let Some(net) = net.as_mut() else {
        return LiflStatus::NullPointer;
    };
    guarded(|| {
        let result = net.inner.add_synapse(
            NeuronId(pre as usize),
            NeuronId(post as usize),
            initial_x,
            MemristorParams::default(),
            StdpPipelineConfig::reference_calibrated(),
            plastic,
        );
        match result {
            Ok(id) => {
                if let Some(out) = out_id.as_mut() {
                    *out = id.0 as u32;
                }
                LiflStatus::Ok
            }
            Err(_) => LiflStatus::InvalidArgument,
        }
    })
}

/// Schedule an external spike of the given amplitude at `time_ms`.
///
/// # Safety
/// `net` must be a live network handle.
#[no_mangle]
pub unsafe extern "C" fn lifl_network_add_stimulus(
    net: *mut NetworkHandle,
    target: u32,
    time_ms: f64,
    amplitude: f64,
) -> LiflStatus {
    let Some(net) = net.as_mut() else {
        return LiflStatus::NullPointer;
    };
    guarded(|| {
        match net
            .inner
            .add_stimulus(NeuronId(target as usize), time_ms, amplitude)
        {
            Ok(()) => LiflStatus::Ok,
            Err(_) => LiflStatus::InvalidArgument,
        }
    })
}

/// Run the network until `t_end_ms` and hand back a trace handle through
/// `out_trace`. Every run replays the stimulus schedule from rest while
/// synaptic weights persist, so repeated calls continue learning from
/// where the previous run left the weights. Free the trace with
/// `lifl_trace_free`.
///
/// # Safety
/// `net` must be a live network handle; `out_trace` must be valid for one
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn lifl_network_run(
    net: *mut NetworkHandle,
    t_end_ms: f64,
    out_trace: *mut *mut TraceHandle,
) -> LiflStatus {
    let Some(net) = net.as_mut() else {
        return LiflStatus::NullPointer;
    };
    let Some(out_trace) = out_trace.as_mut() else {
        return LiflStatus::NullPointer;
    };
    guarded(|| match net.inner.run(t_end_ms) {
        Ok(trace) => {
            *out_trace = Box::into_raw(Box::new(TraceHandle::new(trace)));
            LiflStatus::Ok
        }
        Err(_) => LiflStatus::RunFailed,
    })
}

/// Number of neurons in the network; 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live network handle.
#[no_mangle]
pub unsafe extern "C" fn lifl_network_neuron_count(net: *const NetworkHandle) -> usize {
    net.as_ref().map_or(0, |n| n.inner.neuron_count())
}

/// Current weight of a synapse in [0, 1], written to `out_weight`.
///
/// # Safety
/// `net` must be a live network handle; `out_weight` must be valid for
/// one `double` write.
#[no_mangle]
pub unsafe extern "C" fn lifl_network_synapse_weight(
    net: *const NetworkHandle,
    synapse: u32,
    out_weight: *mut f64,
) -> LiflStatus {
    let Some(net) = net.as_ref() else {
        return LiflStatus::NullPointer;
    };
    let Some(out) = out_weight.as_mut() else {
        return LiflStatus::NullPointer;
    };
    if synapse as usize >= net.inner.synapse_count() {
        return LiflStatus::IndexOutOfRange;
    }
    guarded(|| {
        *out = net.inner.synapse(SynapseId(synapse as usize)).weight();
        LiflStatus::Ok
    })
}

/// Destroy a trace returned by `lifl_network_run`. A null pointer is a
/// no-op.
///
/// # Safety
/// `trace` must be null or a pointer previously returned through
/// `lifl_network_run` that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn lifl_trace_free(trace: *mut TraceHandle) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of spikes in the trace; 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn lifl_trace_spike_count(trace: *const TraceHandle) -> usize {
    trace.as_ref().map_or(0, |t| t.spikes.len())
}

/// Fetch one spike by index: its time (ms) and the neuron that fired.
///
/// # Safety
/// `trace` must be a live trace handle; the out-pointers must each be
/// valid for one write or null.
#[no_mangle]
pub unsafe extern "C" fn lifl_trace_spike(
    trace: *const TraceHandle,
    index: usize,
    out_time_ms: *mut f64,
    out_neuron: *mut u32,
) -> LiflStatus {
    let Some(trace) = trace.as_ref() else {
        return LiflStatus::NullPointer;
    };
    let Some(&(time, neuron)) = trace.spikes.get(index) else {
        return LiflStatus::IndexOutOfRange;
    };
    if let Some(out) = out_time_ms.as_mut() {
        *out = time;
    }
    if let Some(out) = out_neuron.as_mut() {
        *out = neuron;
    }
    LiflStatus::Ok
}

/// Number of weight samples in the trace; 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn lifl_trace_weight_count(trace: *const TraceHandle) -> usize {
    trace.as_ref().map_or(0, |t| t.weights.len())
}

/// Fetch one weight sample by index: time (ms), synapse id, and the
/// weight right after the update.
///
/// # Safety
/// `trace` must be a live trace handle; the out-pointers must each be
/// valid for one write or null.
#[no_mangle]
pub unsafe extern "C" fn lifl_trace_weight_sample(
    trace: *const TraceHandle,
    index: usize,
    out_time_ms: *mut f64,
    out_synapse: *mut u32,
    out_weight: *mut f64,
) -> LiflStatus {
    let Some(trace) = trace.as_ref() else {
        return LiflStatus::NullPointer;
    };
    let Some(&(time, synapse, weight)) = trace.weights.get(index) else {
        return LiflStatus::IndexOutOfRange;
    };
    if let Some(out) = out_time_ms.as_mut() {
        *out = time;
    }
    if let Some(out) = out_synapse.as_mut() {
        *out = synapse;
    }
    if let Some(out) = out_weight.as_mut() {
        *out = weight;
    }
    LiflStatus::Ok
}

/// Last sampled weight of a synapse in the trace, written to `out_weight`.
///
/// # Safety
/// `trace` must be a live trace handle; `out_weight` must be valid for
/// one `double` write.
#[no_mangle]
pub unsafe extern "C" fn lifl_trace_final_weight(
    trace: *const TraceHandle,
    synapse: u32,
    out_weight: *mut f64,
) -> LiflStatus {
    let Some(trace) = trace.as_ref() else {
        return LiflStatus::NullPointer;
    };
    let Some(out) = out_weight.as_mut() else {
        return LiflStatus::NullPointer;
    };
    match trace.trace.final_weight(SynapseId(synapse as usize)) {
        Some(w) => {
            *out = w;
            LiflStatus::Ok
        }
        None => LiflStatus::IndexOutOfRange,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn lifl_status_message(status: LiflStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        LiflStatus::Ok => b"ok\0",
        LiflStatus::NullPointer => b"a required pointer argument was null\0",
        LiflStatus::InvalidArgument => b"an argument violated a model constraint\0",
        LiflStatus::IndexOutOfRange => b"index out of range\0",
        LiflStatus::RunFailed => b"simulation run failed\0",
        LiflStatus::Panic => b"internal panic caught at the FFI boundary\0",
    };
    msg.as_ptr() as *const c_char
}
