//! Command-line front end for the simulator.

use std::error::Error;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process;

use clap::{Args, Parser, Subcommand};

use lifl_sim::config::ExperimentConfig;
use lifl_sim::experiments::{
    self, write_hysteresis_csv, write_latency_csv, write_stdp_csv, MotifSpec,
};
use lifl_sim::oracle::{run_clocked, OracleConfig};
use lifl_sim::plasticity::calibrate;
use lifl_sim::trace::Trace;
use lifl_sim::StdpPipelineConfig;

#[derive(Parser)]
#[command(
    name = "lifl-sim",
    version,
    about = "Event-driven simulator for latency-coded spiking neurons with memristive STDP synapses"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Reserved for future stochastic features; the current model is
    /// deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run the clock-driven reference simulator instead of the
    /// event-driven engine (also sets its step when given with --dt-max).
    #[arg(long, global = true)]
    oracle: bool,
    /// Step bound in ms for device integration (and the oracle step).
    #[arg(long, global = true)]
    dt_max: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the latency/input characteristic of the neuron.
    LatencyCurve {
        /// Number of sweep points.
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Smallest input amplitude.
        #[arg(long, default_value_t = 1.05)]
        input_min: f64,
        /// Largest input amplitude.
        #[arg(long, default_value_t = 3.0)]
        input_max: f64,
    },
    /// Measure the pairing response over a grid of spike intervals.
    StdpCurve {
        /// Grid spacing in ms.
        #[arg(long, default_value_t = 2.0)]
        grid_step: f64,
        /// Largest |delta t| in ms.
        #[arg(long, default_value_t = 80.0)]
        grid_max: f64,
        /// Device state each pairing starts from.
        #[arg(long, default_value_t = 0.5)]
        probe_x: f64,
        /// Fit the pipeline to the ideal window before measuring.
        #[arg(long)]
        calibrate: bool,
    },
    /// Sweep the device with a sinusoid and dump the I-V trajectory.
    Hysteresis {
        #[arg(long, default_value_t = 0.45)]
        amplitude: f64,
        /// Period in ms.
        #[arg(long, default_value_t = 1000.0)]
        period: f64,
        #[arg(long, default_value_t = 3)]
        cycles: u32,
        /// Initial device state.
        #[arg(long, default_value_t = 0.5)]
        x0: f64,
        /// Samples per cycle.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Run the built-in three-neuron motif and dump its traces.
    Motif {
        /// Exchange the two stimulus trains (and the LTP/LTD roles).
        #[arg(long)]
        swap: bool,
    },
    /// Run the network described by --config and dump all traces.
    Run {
        /// Also write states resampled on a regular grid (ms).
        #[arg(long)]
        sample_dt: Option<f64>,
    },
}

fn main() {
    if let Err(e) = real_main() {
        eprintln!("error: {e}");
        process::exit(1);
    }
}

fn real_main() -> Result<(), Box<dyn Error>> {
    let cli = Cli::parse();
    let config = match &cli.common.config {
        Some(path) => Some(ExperimentConfig::load(path)?),
        None => None,
    };
    fs::create_dir_all(&cli.common.out)?;

    match cli.command {
        Command::LatencyCurve {
            points,
            input_min,
            input_max,
        } => {
            if points < 2 || input_max <= input_min || !input_min.is_finite() {
                return Err("need at least two points and input_max > input_min".into());
            }
            let params = config.as_ref().map_or_else(Default::default, |c| c.neuron);
            let amplitudes: Vec<f64> = (0..points)
                .map(|k| input_min + (input_max - input_min) * k as f64 / (points - 1) as f64)
                .collect();
            let rows = experiments::latency_curve(&amplitudes, &params)?;
            let path = cli.common.out.join("latency.csv");
            write_file(&path, |w| write_latency_csv(&rows, w))?;
            println!("wrote {}", path.display());
        }
        Command::StdpCurve {
            grid_step,
            grid_max,
            probe_x,
            calibrate: do_calibrate,
        } => {
            if !(grid_step > 0.0 && grid_max > 0.0) {
                return Err("grid_step and grid_max must be positive".into());
            }
            let mem = config
                .as_ref()
                .map_or_else(Default::default, |c| c.memristor);
            let ideal = config.as_ref().map_or_else(Default::default, |c| c.stdp);
            // without an explicit config this command uses the fitted
            // reference pipeline so the window is graded out of the box
            let mut pipeline = config
                .as_ref()
                .map_or_else(StdpPipelineConfig::reference_calibrated, |c| c.pipeline);
            if do_calibrate {
                let (fitted, report) = calibrate(&pipeline, &mem, &ideal, probe_x)?;
                pipeline = fitted;
                println!(
                    "calibrated: peak ratio {:.3}, tau+ {:.1} ms, tau- {:.1} ms, scale {:.4}",
                    report.peak_ratio, report.tau_plus_fit, report.tau_minus_fit, report.scale
                );
            }
            let mut grid = Vec::new();
            let mut dt = -grid_max;
            while dt <= grid_max + 1e-12 {
                if dt != 0.0 {
                    grid.push(dt);
                }
                dt += grid_step;
            }
            let rows = experiments::stdp_curve(&grid, &pipeline, &mem, &ideal, probe_x)?;
            let path = cli.common.out.join("stdp_curve.csv");
            write_file(&path, |w| write_stdp_csv(&rows, w))?;
            println!("wrote {}", path.display());
        }
        Command::Hysteresis {
            amplitude,
            period,
            cycles,
            x0,
            samples,
        } => {
            let mem = config
                .as_ref()
                .map_or_else(Default::default, |c| c.memristor);
            let dt_max = cli.common.dt_max.unwrap_or(period / 4000.0);
            let rows =
                experiments::hysteresis(amplitude, period, cycles, &mem, x0, dt_max, samples)?;
            let path = cli.common.out.join("hysteresis.csv");
            write_file(&path, |w| write_hysteresis_csv(&rows, w))?;
            println!("wrote {}", path.display());
        }
        Command::Motif { swap } => {
            let mut spec = MotifSpec {
                swap,
                ..MotifSpec::default()
            };
            if let Some(c) = &config {
                spec.neuron = c.neuron;
                spec.mem_params = c.memristor;
                spec.pipeline = c.pipeline;
            }
            if cli.common.oracle {
                let (net, _ids, t_end) = experiments::motif_network(&spec)?;
                let dt = cli.common.dt_max.unwrap_or(1e-3);
                let trace = run_clocked(&net, &OracleConfig::new(dt, t_end))?;
                write_trace_bundle(&trace, &cli.common.out)?;
            } else {
                let result = experiments::motif(&spec)?;
                write_trace_bundle(&result.trace, &cli.common.out)?;
            }
        }
        Command::Run { sample_dt } => {
            let config = config.ok_or("the run command requires --config")?;
            let mut net = config.build_network()?;
            let trace = if cli.common.oracle {
                let dt = cli.common.dt_max.unwrap_or(config.run.dt_max);
                run_clocked(&net, &OracleConfig::new(dt, config.run.t_end))?
            } else {
                net.run(config.run.t_end)?
            };
            write_trace_bundle(&trace, &cli.common.out)?;
            if let Some(dt) = sample_dt {
                let rows = trace.dense_states(net.all_neuron_params(), dt, config.run.t_end);
                let path = cli.common.out.join("states_dense.csv");
                write_file(&path, |w| {
                    writeln!(w, "time_ms,neuron,s")?;
                    for (t, n, s) in &rows {
                        writeln!(w, "{t},{n},{s}")?;
                    }
                    Ok(())
                })?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn write_file<F>(path: &Path, fill: F) -> io::Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    fill(&mut w)?;
    w.flush()
}

fn write_trace_bundle(trace: &Trace, out: &Path) -> Result<(), Box<dyn Error>> {
    let spikes = out.join("spikes.csv");
    write_file(&spikes, |w| trace.write_spikes_csv(w))?;
    let states = out.join("states.csv");
    write_file(&states, |w| trace.write_states_csv(w))?;
    let weights = out.join("weights.csv");
    write_file(&weights, |w| trace.write_weights_csv(w))?;
    println!(
        "wrote {} {} {}",
        spikes.display(),
        states.display(),
        weights.display()
    );
    Ok(())
}
