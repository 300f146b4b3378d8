//! Spike-timing-dependent plasticity pipeline.
//!
//! A spike pairing is processed in three behavioral stages, mirroring the
//! synapse weight-update system: the pulse order is detected, the timing
//! difference is converted to an equivalent write voltage by an
//! exponential (RC-like) map, and the memristor is driven with a
//! rectangular polarity-switched pulse of that amplitude. The ideal
//! bi-exponential STDP rule is kept alongside as the reference the
//! pipeline is calibrated against.
//!
//! The device's I-V asymmetry makes one branch intrinsically stronger than
//! the other. Which one is measured, not assumed: [`calibrate`] probes the
//! device, attenuates the dominant branch, and fits the remaining knobs so
//! the Δx(Δt) curve matches the scaled ideal window.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::memristor::{integrate, MemristorError, MemristorParams, MemristorState};

/// Substep divisor for write-pulse integration. Sized so the first-order
/// stepping error stays well under the weight tolerances the engine is
/// held to against the clock-driven reference.
const PULSE_SUBSTEPS: f64 = 512.0;

/// Ideal bi-exponential STDP window parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StdpIdealParams {
    /// Potentiation time constant (ms).
    pub tau_plus: f64,
    /// Depression time constant (ms).
    pub tau_minus: f64,
    /// Peak potentiation amplitude.
    pub a_plus: f64,
    /// Peak depression amplitude (negative).
    pub a_minus: f64,
}

impl Default for StdpIdealParams {
    fn default() -> Self {
        Self {
            tau_plus: 16.8,
            tau_minus: 33.7,
            a_plus: 0.78,
            a_minus: -0.27,
        }
    }
}

impl StdpIdealParams {
    pub fn validate(&self) -> Result<(), PlasticityError> {
        if !(self.tau_plus > 0.0 && self.tau_minus > 0.0) {
            return Err(PlasticityError::InvalidConfig {
                name: "tau_plus/tau_minus",
                constraint: "time constants must be positive",
            });
        }
        if self.a_plus.is_nan() || self.a_plus <= 0.0 {
            return Err(PlasticityError::InvalidConfig {
                name: "a_plus",
                constraint: "must be positive",
            });
        }
        if self.a_minus.is_nan() || self.a_minus >= 0.0 {
            return Err(PlasticityError::InvalidConfig {
                name: "a_minus",
                constraint: "must be negative",
            });
        }
        Ok(())
    }
}

/// Ideal synaptic change for a pairing with `delta_t = t_post - t_pre`.
pub fn ideal_stdp(delta_t: f64, params: &StdpIdealParams) -> f64 {
    if delta_t > 0.0 {
        params.a_plus * (-delta_t / params.tau_plus).exp()
    } else if delta_t < 0.0 {
        params.a_minus * (delta_t / params.tau_minus).exp()
    } else {
        0.0
    }
}

/// Relative order of a pre/post pulse pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseOrder {
    /// Pre pulse arrived first; the synapse strengthens.
    Potentiation,
    /// Post pulse came first; the synapse weakens.
    Depression,
    /// Simultaneous pulses produce no update.
    Coincident,
}

/// Classify a pairing by its pulse order.
pub fn detect_order(t_pre: f64, t_post: f64) -> PulseOrder {
    if t_post > t_pre {
        PulseOrder::Potentiation
    } else if t_post < t_pre {
        PulseOrder::Depression
    } else {
        PulseOrder::Coincident
    }
}

/// Behavioral configuration of the weight-update pipeline.
///
/// `mitigation_gain` scales the potentiation write voltage, and
/// `depression_floor`/`depression_gain` form an affine attenuator on the
/// depression branch (`|V| = floor + gain * (magnitude - v_write_min)`).
/// With the default identity values (`gain = 1`, `floor = v_write_min`)
/// both branches see the raw converter output; [`calibrate`] engages the
/// attenuator on whichever branch the device favors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StdpPipelineConfig {
    /// Peak write amplitude as the pairing interval goes to zero (V).
    pub v_write_max: f64,
    /// Write amplitude floor at large intervals (V); kept above the device
    /// threshold so every in-window pairing has an effect.
    pub v_write_min: f64,
    /// Decay constant of the time-difference-to-voltage converter (ms).
    pub tau_conv: f64,
    /// Write pulse duration (ms).
    pub pulse_width: f64,
    /// Potentiation-branch voltage scale, in (0, 1].
    pub mitigation_gain: f64,
    /// Depression-branch voltage floor (V).
    pub depression_floor: f64,
    /// Depression-branch headroom scale, in (0, 1].
    pub depression_gain: f64,
    /// Pairings farther apart than this are ignored (ms).
    pub pairing_window: f64,
}

impl Default for StdpPipelineConfig {
    fn default() -> Self {
        Self {
            v_write_max: 0.45,
            v_write_min: 0.18,
            tau_conv: 20.0,
            pulse_width: 1.0,
            mitigation_gain: 1.0,
            depression_floor: 0.18,
            depression_gain: 1.0,
            pairing_window: 100.0,
        }
    }
}

impl StdpPipelineConfig {
    /// Pipeline constants fitted against the standard STDP window for the
    /// default device, frozen from a calibration run. This is the
    /// configuration the built-in experiments use.
    pub fn reference_calibrated() -> Self {
        Self {
            v_write_max: 0.45,
            v_write_min: 0.18,
            tau_conv: 16.8,
            pulse_width: 5e-5,
            mitigation_gain: 1.0,
            depression_floor: 0.164,
            depression_gain: 0.2,
            pairing_window: 100.0,
        }
    }

    pub fn validate(&self) -> Result<(), PlasticityError> {
        if !(self.v_write_min > 0.0 && self.v_write_min < self.v_write_max) {
            return Err(PlasticityError::InvalidConfig {
                name: "v_write_min/v_write_max",
                constraint: "need 0 < v_write_min < v_write_max",
            });
        }
        if self.tau_conv.is_nan() || self.tau_conv <= 0.0 {
            return Err(PlasticityError::InvalidConfig {
                name: "tau_conv",
                constraint: "must be positive",
            });
        }
        if self.pulse_width.is_nan() || self.pulse_width <= 0.0 {
            return Err(PlasticityError::InvalidConfig {
                name: "pulse_width",
                constraint: "must be positive",
            });
        }
        if !(self.mitigation_gain > 0.0 && self.mitigation_gain <= 1.0) {
            return Err(PlasticityError::InvalidConfig {
                name: "mitigation_gain",
                constraint: "must be in (0, 1]",
            });
        }
        if self.depression_floor.is_nan() || self.depression_floor <= 0.0 {
            return Err(PlasticityError::InvalidConfig {
                name: "depression_floor",
                constraint: "must be positive",
            });
        }
        if !(self.depression_gain > 0.0 && self.depression_gain <= 1.0) {
            return Err(PlasticityError::InvalidConfig {
                name: "depression_gain",
                constraint: "must be in (0, 1]",
            });
        }
        if self.pairing_window.is_nan() || self.pairing_window <= 0.0 {
            return Err(PlasticityError::InvalidConfig {
                name: "pairing_window",
                constraint: "must be positive",
            });
        }
        Ok(())
    }
}

/// Signed write voltage for a pairing, or `None` when the pairing produces
/// no update (coincident pulses or interval outside the pairing window).
/// The sign follows the pulse order: positive (TE-to-BE) drive for
/// potentiation, negative for depression.
pub fn delta_t_to_voltage(delta_t: f64, config: &StdpPipelineConfig) -> Option<f64> {
    if delta_t.abs() > config.pairing_window {
        return None;
    }
    let magnitude = config.v_write_min
        + (config.v_write_max - config.v_write_min) * (-delta_t.abs() / config.tau_conv).exp();
    match detect_order(0.0, delta_t) {
        PulseOrder::Coincident => None,
        PulseOrder::Potentiation => Some(config.mitigation_gain * magnitude),
        PulseOrder::Depression => Some(
            -(config.depression_floor + config.depression_gain * (magnitude - config.v_write_min)),
        ),
    }
}

/// Apply one spike pairing to a memristor: convert the interval to a write
/// voltage, drive a rectangular pulse of `pulse_width`, and return the
/// state change (which is also the synaptic weight change, since the
/// normalized read conductance is linear in the state). Coincident and
/// out-of-window pairings leave the device untouched and return zero.
pub fn apply_pairing(
    mem: &mut MemristorState,
    t_pre: f64,
    t_post: f64,
    config: &StdpPipelineConfig,
    mem_params: &MemristorParams,
) -> Result<f64, PlasticityError> {
    if !t_pre.is_finite() || !t_post.is_finite() {
        return Err(PlasticityError::InvalidTimestamp { t_pre, t_post });
    }
    if detect_order(t_pre, t_post) == PulseOrder::Coincident {
        return Ok(0.0);
    }
    let voltage = match delta_t_to_voltage(t_post - t_pre, config) {
        Some(v) => v,
        None => return Ok(0.0),
    };
    let before = mem.x();
    integrate(
        mem,
        mem_params,
        |_| voltage,
        0.0,
        config.pulse_width,
        config.pulse_width / PULSE_SUBSTEPS,
    )?;
    Ok(mem.x() - before)
}

/// State change produced by a single pairing started from a fresh device
/// at `probe_x`.
pub fn probe_delta_x(
    delta_t: f64,
    probe_x: f64,
    config: &StdpPipelineConfig,
    mem_params: &MemristorParams,
) -> Result<f64, PlasticityError> {
    let mut mem = MemristorState::new(probe_x)?;
    // pairing timestamps are arbitrary; only the interval matters
    apply_pairing(&mut mem, 0.0, delta_t, config, mem_params)
}

/// Which branch of the window an adjustment applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Potentiation,
    Depression,
}

/// Outcome of a calibration run.
#[derive(Debug, Clone)]
pub struct FitReport {
    /// Largest measured potentiation change on the fit grid.
    pub ltp_peak: f64,
    /// Largest measured depression magnitude on the fit grid.
    pub ltd_peak: f64,
    /// `ltp_peak / ltd_peak`.
    pub peak_ratio: f64,
    /// Log-linear decay constant fitted to the potentiation branch (ms).
    pub tau_plus_fit: f64,
    /// Log-linear decay constant fitted to the depression branch (ms).
    pub tau_minus_fit: f64,
    /// `tau_minus_fit / tau_plus_fit`.
    pub tau_ratio: f64,
    /// Least-squares scale from ideal units to Δx units.
    pub scale: f64,
    /// Sum of squared residuals against the scaled ideal curve, in ideal
    /// units.
    pub normalized_sse: f64,
    /// Instantaneous up/down rate ratio of the bare device at the probe
    /// state under the peak drive.
    pub raw_rate_ratio: f64,
    /// The branch the calibration attenuated.
    pub mitigated_branch: Branch,
}

/// Fit `tau` of `|Δx| ~ A·exp(-|Δt|/tau)` by log-linear least squares.
/// Returns infinity for a non-decaying branch.
pub fn fit_decay_constant(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, dx)| dx.abs() > 0.0)
        .map(|(dt, dx)| (dt.abs(), dx.abs().ln()))
        .collect();
    if logs.len() < 2 {
        return f64::INFINITY;
    }
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if slope < 0.0 {
        -1.0 / slope
    } else {
        f64::INFINITY
    }
}

struct Candidate {
    config: StdpPipelineConfig,
    feasible: bool,
    normalized_sse: f64,
    scale: f64,
    curve: Vec<(f64, f64)>,
}

fn fit_grid(window: f64) -> Vec<f64> {
    let mut dts = Vec::new();
    let mut dt = 2.0;
    while dt <= window * 0.8 {
        dts.push(dt);
        dts.push(-dt);
        dt += 5.0;
    }
    dts
}

fn evaluate_candidate(
    config: &StdpPipelineConfig,
    mem_params: &MemristorParams,
    ideal: &StdpIdealParams,
    probe_x: f64,
    dts: &[f64],
) -> Result<Option<Candidate>, PlasticityError> {
    let mut curve = Vec::with_capacity(dts.len());
    for &dt in dts {
        curve.push((dt, probe_delta_x(dt, probe_x, config, mem_params)?));
    }
    let pos: Vec<(f64, f64)> = curve.iter().copied().filter(|(dt, _)| *dt > 0.0).collect();
    let neg: Vec<(f64, f64)> = curve.iter().copied().filter(|(dt, _)| *dt < 0.0).collect();
    if !pos.iter().all(|(_, dx)| *dx > 0.0) || !neg.iter().all(|(_, dx)| *dx < 0.0) {
        return Ok(None);
    }

    let ideals: Vec<f64> = curve.iter().map(|(dt, _)| ideal_stdp(*dt, ideal)).collect();
    let num: f64 = curve.iter().zip(&ideals).map(|((_, m), i)| m * i).sum();
    let den: f64 = ideals.iter().map(|i| i * i).sum();
    let scale = num / den;
    if scale.is_nan() || scale <= 0.0 {
        return Ok(None);
    }
    let sse: f64 = curve
        .iter()
        .zip(&ideals)
        .map(|((_, m), i)| (m - scale * i).powi(2))
        .sum();
    let normalized_sse = sse / (scale * scale);

    let ltp_peak = pos.iter().map(|(_, dx)| *dx).fold(0.0, f64::max);
    let ltd_peak = neg.iter().map(|(_, dx)| dx.abs()).fold(0.0, f64::max);
    let peak_ratio = ltp_peak / ltd_peak;
    let tau_ratio = fit_decay_constant(&neg) / fit_decay_constant(&pos);

    let target_peak = ideal.a_plus / ideal.a_minus.abs();
    let target_tau = ideal.tau_minus / ideal.tau_plus;
    let feasible = peak_ratio >= 0.75 * target_peak
        && peak_ratio <= 1.25 * target_peak
        && tau_ratio >= 0.70 * target_tau
        && tau_ratio <= 1.30 * target_tau;

    Ok(Some(Candidate {
        config: *config,
        feasible,
        normalized_sse,
        scale,
        curve,
    }))
}

fn search_best(
    candidates: Vec<StdpPipelineConfig>,
    mem_params: &MemristorParams,
    ideal: &StdpIdealParams,
    probe_x: f64,
    dts: &[f64],
) -> Result<Option<Candidate>, PlasticityError> {
    let evaluated: Vec<Result<Option<Candidate>, PlasticityError>> = candidates
        .par_iter()
        .map(|config| evaluate_candidate(config, mem_params, ideal, probe_x, dts))
        .collect();
    // sequential reduction keeps the winner deterministic under parallelism
    let mut best: Option<Candidate> = None;
    for item in evaluated {
        let Some(cand) = item? else { continue };
        if best.as_ref().is_none_or(|b| ranks_ahead(&cand, b)) {
            best = Some(cand);
        }
    }
    Ok(best)
}

/// Ranking for calibration candidates: feasibility first, then fit error.
fn ranks_ahead(a: &Candidate, b: &Candidate) -> bool {
    (a.feasible && !b.feasible) || (a.feasible == b.feasible && a.normalized_sse < b.normalized_sse)
}

/// Fit the pipeline to the ideal STDP window by grid search.
///
/// The device's up/down rate asymmetry at the probe state decides which
/// branch gets attenuated: a depression-dominant device (the default
/// parameter set is one) has its depression drive shaped by the affine
/// attenuator, while a potentiation-dominant device is shaped through
/// `mitigation_gain`. A coarse grid over the write amplitude, converter
/// time constant, pulse width, and branch attenuation is refined once
/// around the best point; candidates matching the ideal peak and
/// decay-constant ratios are preferred, and sum-of-squares error against
/// the scaled ideal curve ranks the rest.
pub fn calibrate(
    config: &StdpPipelineConfig,
    mem_params: &MemristorParams,
    ideal: &StdpIdealParams,
    probe_x: f64,
) -> Result<(StdpPipelineConfig, FitReport), PlasticityError> {
    config.validate()?;
    mem_params.validate()?;
    ideal.validate()?;
    if !(probe_x > 0.0 && probe_x < 1.0) {
        return Err(PlasticityError::InvalidProbe { probe_x });
    }

    let up = mem_params.state_rate(probe_x, config.v_write_max);
    let down = mem_params.state_rate(probe_x, -config.v_write_max);
    if up <= 0.0 || down >= 0.0 {
        return Err(PlasticityError::CalibrationFailed {
            reason: "peak drive does not move the probe state in both directions",
        });
    }
    let raw_rate_ratio = up / down.abs();
    let mitigated_branch = if raw_rate_ratio >= 1.0 {
        Branch::Potentiation
    } else {
        Branch::Depression
    };

    let dts = fit_grid(config.pairing_window);

    let v_maxes = [0.35, 0.40, 0.45];
    let tau_convs = [12.0, 16.8, 22.0, 28.0];
    let widths = [5e-5, 1e-4, 2e-4];
    let mut coarse = Vec::new();
    for &v_write_max in &v_maxes {
        for &tau_conv in &tau_convs {
            for &pulse_width in &widths {
                match mitigated_branch {
                    Branch::Depression => {
                        for floor_off in [0.006, 0.010, 0.014, 0.018, 0.022] {
                            for depression_gain in [0.08, 0.14, 0.2, 0.3, 0.45] {
                                coarse.push(StdpPipelineConfig {
                                    v_write_max,
                                    tau_conv,
                                    pulse_width,
                                    mitigation_gain: 1.0,
                                    depression_floor: mem_params.v_n + floor_off,
                                    depression_gain,
                                    ..*config
                                });
                            }
                        }
                    }
                    Branch::Potentiation => {
                        for mitigation_gain in [0.3, 0.45, 0.6, 0.8, 1.0] {
                            coarse.push(StdpPipelineConfig {
                                v_write_max,
                                tau_conv,
                                pulse_width,
                                mitigation_gain,
                                depression_floor: config.v_write_min,
                                depression_gain: 1.0,
                                ..*config
                            });
                        }
                    }
                }
            }
        }
    }

    let best = search_best(coarse, mem_params, ideal, probe_x, &dts)?.ok_or(
        PlasticityError::CalibrationFailed {
            reason: "no grid point produced both potentiation and depression",
        },
    )?;

    // one refinement pass around the coarse winner
    let c = best.config;
    let mut refined = Vec::new();
    for dv in [-0.04, 0.0, 0.04] {
        let v_write_max = (c.v_write_max + dv).clamp(c.v_write_min + 0.05, 0.5);
        for tf in [0.85, 1.0, 1.15] {
            for wf in [0.6, 1.0, 1.6] {
                match mitigated_branch {
                    Branch::Depression => {
                        for df in [-0.002, 0.0, 0.002] {
                            for gf in [0.75, 0.9, 1.0, 1.15, 1.3] {
                                refined.push(StdpPipelineConfig {
                                    v_write_max,
                                    tau_conv: c.tau_conv * tf,
                                    pulse_width: c.pulse_width * wf,
                                    depression_floor: (c.depression_floor + df)
                                        .max(mem_params.v_n + 1e-3),
                                    depression_gain: (c.depression_gain * gf).min(1.0),
                                    ..c
                                });
                            }
                        }
                    }
                    Branch::Potentiation => {
                        for gf in [0.75, 0.9, 1.0, 1.15, 1.3] {
                            refined.push(StdpPipelineConfig {
                                v_write_max,
                                tau_conv: c.tau_conv * tf,
                                pulse_width: c.pulse_width * wf,
                                mitigation_gain: (c.mitigation_gain * gf).min(1.0),
                                ..c
                            });
                        }
                    }
                }
            }
        }
    }

    let winner = match search_best(refined, mem_params, ideal, probe_x, &dts)? {
        Some(cand) if ranks_ahead(&cand, &best) => cand,
        _ => best,
    };

    let pos: Vec<(f64, f64)> = winner
        .curve
        .iter()
        .copied()
        .filter(|(dt, _)| *dt > 0.0)
        .collect();
    let neg: Vec<(f64, f64)> = winner
        .curve
        .iter()
        .copied()
        .filter(|(dt, _)| *dt < 0.0)
        .collect();
    let ltp_peak = pos.iter().map(|(_, dx)| *dx).fold(0.0, f64::max);
    let ltd_peak = neg.iter().map(|(_, dx)| dx.abs()).fold(0.0, f64::max);
    let tau_plus_fit = fit_decay_constant(&pos);
    let tau_minus_fit = fit_decay_constant(&neg);

    let report = FitReport {
        ltp_peak,
        ltd_peak,
        peak_ratio: ltp_peak / ltd_peak,
        tau_plus_fit,
        tau_minus_fit,
        tau_ratio: tau_minus_fit / tau_plus_fit,
        scale: winner.scale,
        normalized_sse: winner.normalized_sse,
        raw_rate_ratio,
        mitigated_branch,
    };
    Ok((winner.config, report))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlasticityError {
    #[error("pipeline configuration {name} invalid: {constraint}")]
    InvalidConfig {
        name: &'static str,
        constraint: &'static str,
    },
    #[error("pairing timestamps must be finite (t_pre = {t_pre}, t_post = {t_post})")]
    InvalidTimestamp { t_pre: f64, t_post: f64 },
    #[error("probe state {probe_x} must lie strictly inside (0, 1)")]
    InvalidProbe { probe_x: f64 },
    #[error("calibration failed: {reason}")]
    CalibrationFailed { reason: &'static str },
    #[error(transparent)]
    Memristor(#[from] MemristorError),
}
