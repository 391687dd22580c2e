//! Backward Euler in time with Picard iteration on the implicit equation
//!
//! ```text
//! u_{n+1} = f_b(A) (u_n + dt E_c f_a(A) u_{n+1} + dt g(u_{n+1}))
//! ```
//!
//! Auxiliary state (gates, calcium) is re-advanced from step `n` with every
//! voltage iterate.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;
use num_traits::Float;

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::norm_inf;
use crate::vofl::VoflOperator;

/// Uniform time steps of `dt` up to `t_end` (ms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    /// `n_steps = round(t_end / dt)`.
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(t_end.is_finite()) {
            return Err(invalid("t_end", "must be finite"));
        }
        let n_steps = (t_end / dt).round();
        if !(n_steps >= 1.0) {
            return Err(invalid("t_end", "the grid needs at least one step"));
        }
        Ok(Self {
            dt,
            t_end,
            n_steps: n_steps as usize,
        })
    }

    /// Time after `step` steps.
    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardSettings {
    /// Stop when `|u_{k+1} - u_k|_inf <= tol (1 + |u_{k+1}|_inf)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardSettings {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 50 }
    }
}

impl PicardSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid("picard.tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("picard.max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// Pointwise reaction term `g(u, aux, t)` and its auxiliary state.
pub trait ReactionModel {
    type Aux: Clone;

    /// State after one step of `dt` from `aux`, with the voltage frozen at `u`.
    fn advance(&self, aux: &Self::Aux, u: &[f64], dt: f64) -> Result<Self::Aux>;

    /// Writes `g(u, aux, t)` into `out`.
    fn source(&self, u: &[f64], aux: &Self::Aux, t: f64, out: &mut [f64]) -> Result<()>;

    /// Converts an applied current density into a source term (`1 / C_m` for
    /// membrane models).
    fn stimulus_gain(&self) -> f64 {
        1.0
    }
}

/// `g = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NoReaction;

impl ReactionModel for NoReaction {
    type Aux = ();

    fn advance(&self, _aux: &(), _u: &[f64], _dt: f64) -> Result<()> {
        Ok(())
    }

    fn source(&self, _u: &[f64], _aux: &(), _t: f64, out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|o| *o = 0.0);
        Ok(())
    }
}

/// A current density applied on a node set during time windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Stimulus {
    pub nodes: Vec<usize>,
    /// `(start, duration)` pairs in ms.
    pub windows: Vec<(f64, f64)>,
    /// Current density in the model's units (uA cm^-2 for membrane models).
    pub current: f64,
}

impl Stimulus {
    /// Whether the step ending at `t` lies in a window (tested at the step midpoint).
    pub fn is_active(&self, t: f64, dt: f64) -> bool {
        let mid = t - 0.5 * dt;
        self.windows.iter().any(|&(start, len)| mid >= start && mid < start + len)
    }
}

/// Work done by one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub picard_iterations: usize,
    pub last_update: f64,
    pub krylov_iterations: usize,
}

fn check_finite(u: &[f64]) -> Result<()> {
    match u.iter().position(|x| !x.is_finite()) {
        Some(node) => Err(Error::Divergence { node, value: u[node] }),
        None => Ok(()),
    }
}

/// One step from `(u_n, aux_n)` to time `t` (the new level). `forcing` is
/// added to `g` and may be empty.
#[allow(clippy::too_many_arguments)]
pub fn backward_euler_step<M: ReactionModel>(
    op: &VoflOperator,
    u_n: &[f64],
    aux_n: &M::Aux,
    model: &M,
    t: f64,
    dt: f64,
    picard: &PicardSettings,
    forcing: &[f64],
) -> Result<(Vec<f64>, M::Aux, StepReport)> {
    check_dim(op.dim(), u_n.len())?;
    if !forcing.is_empty() {
        check_dim(op.dim(), forcing.len())?;
    }
    picard.validate()?;
    let n = u_n.len();
    let mut report = StepReport::default();
    let mut u = u_n.to_vec();
    let mut g = vec![0.0; n];
    let mut update = f64::INFINITY;
    for k in 1..=picard.max_iter {
        let aux = model.advance(aux_n, &u, dt)?;
        model.source(&u, &aux, t, &mut g)?;
        let (corr, cs) = op.correction(&u)?;
        report.krylov_iterations += cs.iterations;
        let mut rhs = u_n.to_vec();
        for i in 0..n {
            let f = if forcing.is_empty() { 0.0 } else { forcing[i] };
            rhs[i] += dt * (corr[i] + g[i] + f);
        }
        let (next, fs) = op.solve_fb_with_stats(&rhs, dt)?;
        report.krylov_iterations += fs.iterations;
        check_finite(&next)?;
        update = next.iter().zip(&u).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        u = next;
        if update <= picard.tol * (1.0 + norm_inf(&u)) {
            report.picard_iterations = k;
            report.last_update = update;
            let aux = model.advance(aux_n, &u, dt)?;
            return Ok((u, aux, report));
        }
    }
    Err(Error::PicardNoConvergence {
        iterations: picard.max_iter,
        update,
    })
}

/// What observers see after each step (and once for the initial state, step 0).
#[derive(Debug)]
pub struct StepView<'a, A> {
    pub step: usize,
    pub time: f64,
    pub u: &'a [f64],
    pub aux: &'a A,
    /// `None` for the initial state.
    pub report: Option<&'a StepReport>,
}

/// Picard iteration counts over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PicardStats {
    pub steps: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
}

impl PicardStats {
    /// Average number of fixed-point iterations per step.
    pub fn average(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.steps as f64
        }
    }

    fn record(&mut self, r: &StepReport) {
        self.steps += 1;
        self.total_iterations += r.picard_iterations;
        self.max_iterations = self.max_iterations.max(r.picard_iterations);
    }
}

/// Final state of a run.
#[derive(Debug, Clone)]
pub struct Trajectory<A> {
    pub u: Vec<f64>,
    pub aux: A,
    /// Steps actually taken.
    pub steps: usize,
    pub time: f64,
    pub picard: PicardStats,
    pub krylov_iterations: usize,
    /// An observer asked to stop early.
    pub stopped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub picard: PicardSettings,
    /// Observers run at step 0 and every `observe_every` steps (0: only at the end).
    pub observe_every: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            picard: PicardSettings::default(),
            observe_every: 1,
        }
    }
}

/// Runs `grid.n_steps` steps. The observer may return `ControlFlow::Break` to stop.
#[allow(clippy::too_many_arguments)]
pub fn integrate<M, F>(
    op: &VoflOperator,
    u0: Vec<f64>,
    aux0: M::Aux,
    model: &M,
    grid: &TimeGrid,
    stimuli: &[Stimulus],
    options: &IntegrateOptions,
    mut observer: F,
) -> Result<Trajectory<M::Aux>>
where
    M: ReactionModel,
    F: FnMut(&StepView<'_, M::Aux>) -> ControlFlow<()>,
{
    check_dim(op.dim(), u0.len())?;
    for s in stimuli {
        if let Some(&node) = s.nodes.iter().find(|&&i| i >= u0.len()) {
            return Err(invalid("stimulus", alloc::format!("node {node} is out of range")));
        }
    }
    let mut traj = Trajectory {
        u: u0,
        aux: aux0,
        steps: 0,
        time: 0.0,
        picard: PicardStats::default(),
        krylov_iterations: 0,
        stopped: false,
    };
    let first = StepView {
        step: 0,
        time: 0.0,
        u: &traj.u,
        aux: &traj.aux,
        report: None,
    };
    if observer(&first).is_break() {
        traj.stopped = true;
        return Ok(traj);
    }
    let gain = model.stimulus_gain();
    let mut forcing = vec![0.0; traj.u.len()];
    for step in 1..=grid.n_steps {
        let t = grid.time(step);
        forcing.iter_mut().for_each(|f| *f = 0.0);
        let mut any = false;
        for s in stimuli.iter().filter(|s| s.is_active(t, grid.dt)) {
            any = true;
            for &i in &s.nodes {
                forcing[i] += gain * s.current;
            }
        }
        let f: &[f64] = if any { &forcing } else { &[] };
        let (u, aux, report) = backward_euler_step(op, &traj.u, &traj.aux, model, t, grid.dt, &options.picard, f)?;
        traj.u = u;
        traj.aux = aux;
        traj.steps = step;
        traj.time = t;
        traj.picard.record(&report);
        traj.krylov_iterations += report.krylov_iterations;
        let due = step == grid.n_steps || (options.observe_every > 0 && step % options.observe_every == 0);
        if due {
            let view = StepView {
                step,
                time: t,
                u: &traj.u,
                aux: &traj.aux,
                report: Some(&report),
            };
            if observer(&view).is_break() {
                traj.stopped = true;
                break;
            }
        }
    }
    Ok(traj)
}
