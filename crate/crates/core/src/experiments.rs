//! Experiment drivers.
//!
//! Each driver builds and runs the simulations behind one of the CLI
//! subcommands and returns plain data rows; CSV formatting lives next to
//! each row type. Sweeps run the independent simulations in parallel and
//! assemble results in input order, so output is deterministic regardless
//! of thread scheduling.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::engine::{EngineError, Network};
use crate::memristor::{integrate, MemristorError, MemristorParams, MemristorState};
use crate::neuron::NeuronParams;
use crate::plasticity::{
    ideal_stdp, probe_delta_x, PlasticityError, StdpIdealParams, StdpPipelineConfig,
};
use crate::trace::{NeuronId, SynapseId, Trace};

/// One row of the latency/input characteristic.
#[derive(Debug, Clone, Copy)]
pub struct LatencyPoint {
    pub input: f64,
    pub s_after_input: f64,
    /// Spike latency measured from a full engine run, if the input reached
    /// threshold.
    pub t_f_measured: Option<f64>,
    /// Spike latency predicted by the firing equation.
    pub t_f_ideal: Option<f64>,
}

/// Drive a fresh single neuron with each amplitude and measure the spike
/// latency from the engine trace.
pub fn latency_curve(
    amplitudes: &[f64],
    params: &NeuronParams,
) -> Result<Vec<LatencyPoint>, EngineError> {
    params.validate().map_err(|source| EngineError::Neuron {
        time: 0.0,
        neuron: 0,
        source,
    })?;
    let stimulus_time = 1.0;
    let horizon = stimulus_time + params.max_latency() + 1.0;
    amplitudes
        .par_iter()
        .map(|&input| {
            let mut net = Network::new();
            let n = net.add_neuron(*params)?;
            net.add_stimulus(n, stimulus_time, input)?;
            let trace = net.run(horizon)?;
            let spikes = trace.spike_times(n);
            // from rest the state right after the stimulus is the input itself
            let s_after_input = input;
            Ok(LatencyPoint {
                input,
                s_after_input,
                t_f_measured: spikes.first().map(|t| t - stimulus_time),
                t_f_ideal: params.time_to_fire(s_after_input).ok(),
            })
        })
        .collect()
}

pub fn write_latency_csv<W: Write>(points: &[LatencyPoint], mut w: W) -> io::Result<()> {
    writeln!(w, "input,s_after_input,t_f_measured,t_f_ideal")?;
    for p in points {
        let fmt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
        writeln!(
            w,
            "{},{},{},{}",
            p.input,
            p.s_after_input,
            fmt(p.t_f_measured),
            fmt(p.t_f_ideal)
        )?;
    }
    Ok(())
}

/// One row of the measured STDP window.
#[derive(Debug, Clone, Copy)]
pub struct StdpCurvePoint {
    pub delta_t: f64,
    pub delta_x: f64,
    /// Ideal window value scaled by the least-squares amplitude fit.
    pub ideal_scaled: f64,
}

/// Measure the pairing response over a grid of intervals, each from a
/// fresh device at `probe_x`, and scale the ideal window onto it.
pub fn stdp_curve(
    delta_ts: &[f64],
    pipeline: &StdpPipelineConfig,
    mem_params: &MemristorParams,
    ideal: &StdpIdealParams,
    probe_x: f64,
) -> Result<Vec<StdpCurvePoint>, PlasticityError> {
    let measured: Vec<(f64, f64)> = delta_ts
        .par_iter()
        .map(|&dt| Ok((dt, probe_delta_x(dt, probe_x, pipeline, mem_params)?)))
        .collect::<Result<_, PlasticityError>>()?;

    let num: f64 = measured
        .iter()
        .map(|(dt, dx)| dx * ideal_stdp(*dt, ideal))
        .sum();
    let den: f64 = measured
        .iter()
        .map(|(dt, _)| ideal_stdp(*dt, ideal).powi(2))
        .sum();
    let scale = if den > 0.0 { num / den } else { 0.0 };

    Ok(measured
        .into_iter()
        .map(|(delta_t, delta_x)| StdpCurvePoint {
            delta_t,
            delta_x,
            ideal_scaled: scale * ideal_stdp(delta_t, ideal),
        })
        .collect())
}

pub fn write_stdp_csv<W: Write>(points: &[StdpCurvePoint], mut w: W) -> io::Result<()> {
    writeln!(w, "delta_t_ms,delta_x,ideal_change_scaled")?;
    for p in points {
        writeln!(w, "{},{},{}", p.delta_t, p.delta_x, p.ideal_scaled)?;
    }
    Ok(())
}

/// One sample of a hysteresis sweep.
#[derive(Debug, Clone, Copy)]
pub struct HysteresisPoint {
    pub time: f64,
    pub v: f64,
    pub i: f64,
    pub x: f64,
}

/// Drive the device with a sinusoid and sample voltage, current and state.
pub fn hysteresis(
    amplitude: f64,
    period: f64,
    cycles: u32,
    mem_params: &MemristorParams,
    x0: f64,
    dt_max: f64,
    samples_per_cycle: usize,
) -> Result<Vec<HysteresisPoint>, MemristorError> {
    mem_params.validate()?;
    let mut state = MemristorState::new(x0)?;
    let waveform = |t: f64| amplitude * (2.0 * std::f64::consts::PI * t / period).sin();
    let total = samples_per_cycle * cycles as usize;
    let sample_dt = period / samples_per_cycle as f64;

    let mut out = Vec::with_capacity(total + 1);
    let snapshot = |t: f64, x: f64| HysteresisPoint {
        time: t,
        v: waveform(t),
        i: mem_params.current(x, waveform(t)),
        x,
    };
    out.push(snapshot(0.0, state.x()));
    for k in 1..=total {
        let t0 = (k - 1) as f64 * sample_dt;
        let t1 = k as f64 * sample_dt;
        integrate(&mut state, mem_params, waveform, t0, t1, dt_max)?;
        out.push(snapshot(t1, state.x()));
    }
    Ok(out)
}

pub fn write_hysteresis_csv<W: Write>(points: &[HysteresisPoint], mut w: W) -> io::Result<()> {
    writeln!(w, "time_ms,V,I,x")?;
    for p in points {
        writeln!(w, "{},{},{},{}", p.time, p.v, p.i, p.x)?;
    }
    Ok(())
}

/// Parameters of the built-in three-neuron motif: two stimulated input
/// neurons converge on one output neuron through plastic synapses. The
/// stimulus trains are timed so the first input fires before the output
/// neuron (potentiating S1) while the second fires after it (depressing
/// S2); `swap` exchanges the two trains and with them the LTP/LTD roles.
#[derive(Debug, Clone)]
pub struct MotifSpec {
    pub neuron: NeuronParams,
    pub mem_params: MemristorParams,
    pub pipeline: StdpPipelineConfig,
    /// Initial state of both synapses.
    pub initial_x: f64,
    /// Number of stimulus rounds.
    pub rounds: usize,
    /// Period between rounds (ms); kept above the pairing window so rounds
    /// pair independently.
    pub period: f64,
    /// Offset of the first round (ms).
    pub offset: f64,
    pub swap: bool,
}

impl Default for MotifSpec {
    fn default() -> Self {
        Self {
            neuron: NeuronParams::default(),
            mem_params: MemristorParams::default(),
            pipeline: StdpPipelineConfig::reference_calibrated(),
            initial_x: 0.55,
            rounds: 6,
            period: 150.0,
            offset: 10.0,
            swap: false,
        }
    }
}

/// Identifiers of the motif's parts within its network.
#[derive(Debug, Clone, Copy)]
pub struct MotifIds {
    pub input_1: NeuronId,
    pub input_2: NeuronId,
    pub output: NeuronId,
    pub synapse_1: SynapseId,
    pub synapse_2: SynapseId,
}

#[derive(Debug, Clone)]
pub struct MotifResult {
    pub ids: MotifIds,
    pub trace: Trace,
    /// Network after the run (final weights live here).
    pub network: Network,
    pub t_end: f64,
}

/// Build the motif network and its stimulus trains.
pub fn motif_network(spec: &MotifSpec) -> Result<(Network, MotifIds, f64), EngineError> {
    let mut net = Network::new();
    let input_1 = net.add_neuron(spec.neuron)?;
    let input_2 = net.add_neuron(spec.neuron)?;
    let output = net.add_neuron(spec.neuron)?;
    let synapse_1 = net.add_synapse(
        input_1,
        output,
        spec.initial_x,
        spec.mem_params,
        spec.pipeline,
        true,
    )?;
    let synapse_2 = net.add_synapse(
        input_2,
        output,
        spec.initial_x,
        spec.mem_params,
        spec.pipeline,
        true,
    )?;

    let (early, late) = if spec.swap {
        (input_2, input_1)
    } else {
        (input_1, input_2)
    };
    for round in 0..spec.rounds {
        let base = spec.offset + round as f64 * spec.period;
        // the early neuron fires twice in quick succession so the output
        // accumulates enough drive to cross threshold
        net.add_stimulus(early, base, 2.0)?;
        net.add_stimulus(early, base + 3.0, 2.0)?;
        // the late neuron fires only after the output spike
        net.add_stimulus(late, base + 20.0, 2.0)?;
    }
    let t_end = spec.offset + spec.rounds as f64 * spec.period;
    Ok((
        net,
        MotifIds {
            input_1,
            input_2,
            output,
            synapse_1,
            synapse_2,
        },
        t_end,
    ))
}

/// Run the built-in motif scenario.
pub fn motif(spec: &MotifSpec) -> Result<MotifResult, EngineError> {
    let (mut net, ids, t_end) = motif_network(spec)?;
    let trace = net.run(t_end)?;
    Ok(MotifResult {
        ids,
        trace,
        network: net,
        t_end,
    })
}
