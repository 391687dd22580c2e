//! Diastolic threshold: the smallest stimulus amplitude whose wave reaches a
//! probe far from the stimulus.

use crate::config::SimulationConfig;
use crate::error::{AppError, Result};
use crate::simulation::{RunOptions, Simulation};

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    /// Upper end of the final bracket, which propagates.
    pub threshold: f64,
    /// Lower end of the final bracket, which does not.
    pub lower: f64,
    pub probe: usize,
    /// Every amplitude tried and whether it propagated, in order.
    pub trials: Vec<(f64, bool)>,
}

/// The node whose distance from the stimulus centroid is closest to
/// `fraction` of the largest such distance.
pub fn probe_node(sim: &Simulation, fraction: f64) -> usize {
    let pts = &sim.domain().points;
    let stim = sim.stimulus_nodes();
    let mut c = [0.0; 3];
    for &i in stim {
        for d in 0..3 {
            c[d] += pts[i][d] / stim.len() as f64;
        }
    }
    let dist = |p: &[f64; 3]| (0..3).map(|d| (p[d] - c[d]).powi(2)).sum::<f64>().sqrt();
    let far = pts.iter().map(dist).fold(0.0, f64::max);
    let target = fraction * far;
    let mut best = 0;
    for (i, p) in pts.iter().enumerate() {
        if (dist(p) - target).abs() < (dist(&pts[best]) - target).abs() {
            best = i;
        }
    }
    best
}

/// Whether `amplitude` activates the probe within the window.
pub fn propagates(sim: &Simulation, probe: usize, amplitude: f64) -> Result<bool> {
    let window = sim.config().threshold.window;
    let run = sim.run(&RunOptions {
        amplitude: Some(amplitude),
        stop_on_activation: Some(probe),
        t_end: window,
        ..RunOptions::default()
    })?;
    Ok(run.activation[probe].is_some())
}

/// Bisection on `[0, threshold.upper]` until the bracket is narrower than
/// `threshold.rel_tol` times its upper end.
pub fn find_diastolic_threshold(cfg: &SimulationConfig) -> Result<ThresholdResult> {
    let sim = Simulation::new(cfg.clone())?;
    threshold_for(&sim)
}

pub fn threshold_for(sim: &Simulation) -> Result<ThresholdResult> {
    let t = &sim.config().threshold;
    if sim.stimulus_nodes().is_empty() {
        return Err(AppError::EmptyStimulus);
    }
    let probe = probe_node(sim, t.probe_fraction);
    let mut trials = Vec::new();
    let (mut lo, mut hi) = (0.0, t.upper);
    let ok = propagates(sim, probe, hi)?;
    trials.push((hi, ok));
    if !ok {
        return Err(AppError::NoPropagation { upper: hi });
    }
    while hi - lo > t.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        let ok = propagates(sim, probe, mid)?;
        trials.push((mid, ok));
        if ok {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdResult {
        threshold: hi,
        lower: lo,
        probe,
        trials,
    })
}
