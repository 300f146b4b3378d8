//! Minimal library usage: two neurons, one plastic synapse, two stimuli.

use lifl_sim::{EngineError, MemristorParams, Network, NeuronParams, StdpPipelineConfig};

fn main() -> Result<(), EngineError> {
    let mut net = Network::new();
    let a = net.add_neuron(NeuronParams::default())?;
    let b = net.add_neuron(NeuronParams::default())?;
    let s = net.add_synapse(
        a,
        b,
        0.55,
        MemristorParams::default(),
        StdpPipelineConfig::reference_calibrated(),
        true,
    )?;
    net.add_stimulus(a, 1.0, 2.0)?;
    net.add_stimulus(a, 4.0, 2.0)?;

    let trace = net.run(100.0)?;
    println!("a spiked at {:?}", trace.spike_times(a));
    println!("b spiked at {:?}", trace.spike_times(b));
    println!(
        "synapse weight after learning: {:.4}",
        net.synapse(s).weight()
    );
    Ok(())
}
