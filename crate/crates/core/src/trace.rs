//! Simulation output records and CSV export.

use std::fmt;
use std::io::{self, Write};

use crate::neuron::{Mode, NeuronParams};

/// Index of a neuron within a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NeuronId(pub usize);

/// Index of a synapse within a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SynapseId(pub usize);

impl fmt::Display for NeuronId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for SynapseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One timestamped simulation output record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub kind: RecordKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecordKind {
    /// A neuron emitted a spike.
    Spike { neuron: NeuronId },
    /// An arriving spike was discarded by a refractory neuron.
    SpikeDropped { neuron: NeuronId },
    /// Inner state right after an event touched the neuron.
    StateSample {
        neuron: NeuronId,
        s: f64,
        mode: Mode,
    },
    /// Synaptic weight right after a plasticity update (or at run start).
    WeightSample { synapse: SynapseId, weight: f64 },
}

/// Event-ordered simulation trace.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(&mut self, time: f64, kind: RecordKind) {
        debug_assert!(
            self.records.last().is_none_or(|r| r.time <= time),
            "trace times must be nondecreasing"
        );
        self.records.push(TraceRecord { time, kind });
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Times at which the given neuron spiked.
    pub fn spike_times(&self, neuron: NeuronId) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| match r.kind {
                RecordKind::Spike { neuron: n } if n == neuron => Some(r.time),
                _ => None,
            })
            .collect()
    }

    /// All spikes as `(time, neuron)` pairs, in emission order.
    pub fn spikes(&self) -> Vec<(f64, NeuronId)> {
        self.records
            .iter()
            .filter_map(|r| match r.kind {
                RecordKind::Spike { neuron } => Some((r.time, neuron)),
                _ => None,
            })
            .collect()
    }

    /// Weight trajectory of one synapse as `(time, weight)` pairs.
    pub fn weight_series(&self, synapse: SynapseId) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter_map(|r| match r.kind {
                RecordKind::WeightSample { synapse: s, weight } if s == synapse => {
                    Some((r.time, weight))
                }
                _ => None,
            })
            .collect()
    }

    /// Last sampled weight of one synapse, if any.
    pub fn final_weight(&self, synapse: SynapseId) -> Option<f64> {
        self.weight_series(synapse).last().map(|(_, w)| *w)
    }

    pub fn write_spikes_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time_ms,neuron")?;
        for r in &self.records {
            if let RecordKind::Spike { neuron } = r.kind {
                writeln!(w, "{},{}", r.time, neuron)?;
            }
        }
        Ok(())
    }

    pub fn write_states_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time_ms,neuron,s,mode")?;
        for r in &self.records {
            if let RecordKind::StateSample { neuron, s, mode } = r.kind {
                writeln!(w, "{},{},{},{}", r.time, neuron, s, mode_name(mode))?;
            }
        }
        Ok(())
    }

    pub fn write_weights_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time_ms,synapse,weight")?;
        for r in &self.records {
            if let RecordKind::WeightSample { synapse, weight } = r.kind {
                writeln!(w, "{},{},{}", r.time, synapse, weight)?;
            }
        }
        Ok(())
    }

    /// Reconstruct inner states on a regular grid by evolving each neuron
    /// analytically between its event-time samples: linear decay with a
    /// clamp in passive mode, the latency-consistent fractional update in
    /// active mode, and rest during refractoriness.
    pub fn dense_states(
        &self,
        params: &[NeuronParams],
        dt: f64,
        t_end: f64,
    ) -> Vec<(f64, NeuronId, f64)> {
        assert!(dt > 0.0 && t_end >= 0.0);
        let mut per_neuron: Vec<Vec<(f64, f64, Mode)>> = vec![Vec::new(); params.len()];
        for r in &self.records {
            if let RecordKind::StateSample { neuron, s, mode } = r.kind {
                per_neuron[neuron.0].push((r.time, s, mode));
            }
        }

        let mut out = Vec::new();
        let steps = (t_end / dt).floor() as usize;
        for k in 0..=steps {
            let t = k as f64 * dt;
            for (idx, samples) in per_neuron.iter().enumerate() {
                let anchor = samples
                    .iter()
                    .rev()
                    .find(|(st, _, _)| *st <= t)
                    .copied()
                    .unwrap_or((0.0, 0.0, Mode::Passive));
                let (t0, s0, mode) = anchor;
                let tau = t - t0;
                let s = match mode {
                    Mode::Passive => (s0 - params[idx].l_d * tau).max(0.0),
                    Mode::Active => {
                        let p = s0 - 1.0;
                        s0 + p * p * tau / (1.0 - p * tau)
                    }
                    Mode::Refractory => 0.0,
                };
                out.push((t, NeuronId(idx), s));
            }
        }
        out
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Passive => "passive",
        Mode::Active => "active",
        Mode::Refractory => "refractory",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_headers_and_rows() {
        let mut trace = Trace::new();
        trace.push(
            1.0,
            RecordKind::Spike {
                neuron: NeuronId(0),
            },
        );
        trace.push(
            1.0,
            RecordKind::WeightSample {
                synapse: SynapseId(2),
                weight: 0.5,
            },
        );
        let mut spikes = Vec::new();
        trace.write_spikes_csv(&mut spikes).unwrap();
        assert_eq!(String::from_utf8(spikes).unwrap(), "time_ms,neuron\n1,0\n");
        let mut weights = Vec::new();
        trace.write_weights_csv(&mut weights).unwrap();
        assert_eq!(
            String::from_utf8(weights).unwrap(),
            "time_ms,synapse,weight\n1,2,0.5\n"
        );
    }

    #[test]
    fn dense_states_decay_between_samples() {
        let params = [NeuronParams {
            d: 0.04,
            l_d: 0.1,
            t_arp: 2.0,
        }];
        let mut trace = Trace::new();
        trace.push(
            0.0,
            RecordKind::StateSample {
                neuron: NeuronId(0),
                s: 1.0,
                mode: Mode::Passive,
            },
        );
        let rows = trace.dense_states(&params, 1.0, 4.0);
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].2, 1.0);
        assert!((rows[2].2 - 0.8).abs() < 1e-12);
        assert!((rows[4].2 - 0.6).abs() < 1e-12);
    }
}
