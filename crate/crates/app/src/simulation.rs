//! Builds the discrete problem from a configuration and drives the time loop.

use std::fs;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use vofl_core::discretize::{
    build_fvm_tet, build_laplacian_1d, partition_regions, symmetrize, HalfInterval, Laplacian, Mesh1D, OpenBox,
    RegionPartition, SphereRegion, TetMesh,
};
use vofl_core::ionic::{resting_state, BeelerReuter, BrParameters, Fisher, Gates};
use vofl_core::stepper::{integrate, IntegrateOptions, PicardStats, ReactionModel, StepView, Stimulus, TimeGrid};
use vofl_core::vofl::{FractionalOrderField, VoflOperator};

use crate::config::{BoxSpec, Geometry, InitialCondition, ProblemKind, RegionSpec, SimulationConfig, StimulusRegion};
use crate::error::{AppError, Result};
use crate::mesh_io::read_tetgen;
use crate::snapshot::{write_snapshot_1d, write_snapshot_3d, Table};

/// Node coordinates and the Laplacian representation.
#[derive(Debug, Clone)]
pub struct Domain {
    pub points: Vec<[f64; 3]>,
    pub laplacian: Laplacian,
    /// The tetrahedral mesh for 3D geometries.
    pub mesh: Option<TetMesh>,
}

impl Domain {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn build_domain(cfg: &SimulationConfig) -> Result<Domain> {
    match &cfg.geometry {
        Geometry::Interval {
            length,
            spacing,
            nodes,
            origin,
        } => {
            let mesh = match (spacing, nodes) {
                (Some(h), _) => Mesh1D::covering(*length, *h, *origin)?,
                (None, Some(n)) => Mesh1D::new(*n, length / (*n - 1) as f64, *origin)?,
                (None, None) => unreachable!("validated"),
            };
            Ok(Domain {
                points: mesh.points(),
                laplacian: build_laplacian_1d(&mesh).into(),
                mesh: None,
            })
        }
        Geometry::Box { cells, lengths, origin } => tet_domain(TetMesh::box_grid(*cells, *lengths, *origin)?),
        Geometry::Mesh { nodes, elements, scale } => {
            let (Some(n), Some(e)) = (nodes, elements) else {
                unreachable!("validated")
            };
            tet_domain(read_tetgen(n, e, *scale)?)
        }
    }
}

fn tet_domain(mesh: TetMesh) -> Result<Domain> {
    let laplacian = symmetrize(&build_fvm_tet(&mesh)?)?;
    Ok(Domain {
        points: mesh.nodes().to_vec(),
        laplacian,
        mesh: Some(mesh),
    })
}

fn open_box(b: &BoxSpec) -> OpenBox {
    OpenBox {
        lower: b.lower,
        upper: b.upper,
    }
}

pub fn partition(cfg: &SimulationConfig, points: &[[f64; 3]]) -> RegionPartition {
    match &cfg.regions {
        RegionSpec::None => RegionPartition::uniform(points.len()),
        RegionSpec::HalfSplit { split } => {
            let split = split.unwrap_or_else(|| match &cfg.geometry {
                Geometry::Interval { length, origin, .. } => origin + length / 2.0,
                _ => unreachable!("validated"),
            });
            partition_regions(points, &HalfInterval { split })
        }
        RegionSpec::Sphere { center, radius, exclude } => partition_regions(
            points,
            &SphereRegion {
                center: *center,
                radius: *radius,
                exclusion: exclude.as_ref().map(open_box),
            },
        ),
        RegionSpec::Box(b) => {
            let b = open_box(b);
            partition_regions(points, &move |p: [f64; 3]| b.contains(p))
        }
    }
}

pub fn stimulus_nodes(region: &StimulusRegion, points: &[[f64; 3]]) -> Vec<usize> {
    let inside = |p: &[f64; 3]| match region {
        StimulusRegion::Interval { lower, upper } => p[0] >= *lower && p[0] <= *upper,
        StimulusRegion::Sphere { center, radius } => {
            (0..3).map(|d| (p[d] - center[d]).powi(2)).sum::<f64>().sqrt() <= *radius
        }
        StimulusRegion::Box(b) => open_box(b).contains(*p),
    };
    points.iter().enumerate().filter(|(_, p)| inside(p)).map(|(i, _)| i).collect()
}

/// Knobs that vary between runs of one prepared problem.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory for snapshots and activation times; nothing is written without it.
    pub out_dir: Option<PathBuf>,
    /// Replaces the configured stimulus amplitude.
    pub amplitude: Option<f64>,
    /// Ends the run as soon as this node activates.
    pub stop_on_activation: Option<usize>,
    /// Replaces `time.t_end`.
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub state: Vec<f64>,
    pub time: f64,
    pub steps: usize,
    /// First upward crossing of the activation level per node (ms).
    pub activation: Vec<Option<f64>>,
    pub snapshots: Vec<PathBuf>,
    pub picard: PicardStats,
    pub krylov_iterations: usize,
    pub stopped_early: bool,
    /// Extremes of the primary variable over all steps.
    pub min: f64,
    pub max: f64,
}

impl RunSummary {
    /// Activation time at the node closest to `x` along the first axis.
    pub fn activation_near(&self, points: &[[f64; 3]], x: f64) -> Option<f64> {
        let i = nearest(points, [x, points[0][1], points[0][2]]);
        self.activation[i]
    }
}

pub fn nearest(points: &[[f64; 3]], target: [f64; 3]) -> usize {
    let d2 = |p: &[f64; 3]| (0..3).map(|d| (p[d] - target[d]).powi(2)).sum::<f64>();
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if d2(p) < d2(&points[best]) {
            best = i;
        }
    }
    best
}

/// A configuration with its operator assembled, ready to run repeatedly.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimulationConfig,
    domain: Domain,
    operator: VoflOperator,
    stim_nodes: Vec<usize>,
}

impl Simulation {
    pub fn new(cfg: SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let domain = build_domain(&cfg)?;
        let orders = FractionalOrderField::new(cfg.orders.alpha1, cfg.orders.alpha2, partition(&cfg, &domain.points))?;
        let operator = VoflOperator::new(
            domain.laplacian.clone(),
            orders,
            cfg.effective_diffusivity(),
            cfg.engine.settings(),
        )?;
        Self::assemble(cfg, domain, operator)
    }

    fn assemble(cfg: SimulationConfig, domain: Domain, operator: VoflOperator) -> Result<Self> {
        let stim_nodes = match &cfg.stimulus {
            Some(s) => {
                let nodes = stimulus_nodes(&s.region, &domain.points);
                if nodes.is_empty() {
                    return Err(AppError::EmptyStimulus);
                }
                nodes
            }
            None => Vec::new(),
        };
        Ok(Self {
            cfg,
            domain,
            operator,
            stim_nodes,
        })
    }

    /// Same geometry and engine with other orders (the engine does not depend on them).
    pub fn with_orders(&self, alpha1: f64, alpha2: f64) -> Result<Self> {
        let mut cfg = self.cfg.clone();
        cfg.orders.alpha1 = alpha1;
        cfg.orders.alpha2 = alpha2;
        cfg.validate()?;
        let orders = FractionalOrderField::new(alpha1, alpha2, self.operator.orders().partition().clone())?;
        let operator = self.operator.with_orders(orders, cfg.effective_diffusivity())?;
        Self::assemble(cfg, self.domain.clone(), operator)
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn operator(&self) -> &VoflOperator {
        &self.operator
    }

    pub fn stimulus_nodes(&self) -> &[usize] {
        &self.stim_nodes
    }

    fn stimuli(&self, amplitude: Option<f64>) -> Vec<Stimulus> {
        match &self.cfg.stimulus {
            Some(s) => vec![Stimulus {
                nodes: self.stim_nodes.clone(),
                windows: s.schedule().into_iter().map(|t| (t, s.duration)).collect(),
                current: self.cfg.stimulus_current(amplitude.unwrap_or(s.amplitude)),
            }],
            None => Vec::new(),
        }
    }

    fn initial_values(&self) -> Vec<f64> {
        let xs = self.domain.points.iter().map(|p| p[0]);
        match self.cfg.initial_condition() {
            InitialCondition::Rest => resting_state(self.domain.len()).v,
            InitialCondition::Uniform { value } => vec![value; self.domain.len()],
            InitialCondition::Step { front, decay } => xs
                .map(|x| if x <= front { 1.0 } else { (-decay * (x - front)).exp() })
                .collect(),
        }
    }

    pub fn run(&self, opts: &RunOptions) -> Result<RunSummary> {
        let u0 = self.initial_values();
        match self.cfg.problem {
            ProblemKind::Fisher => self.drive(&Fisher, u0, (), opts, |_| Vec::new()),
            ProblemKind::BeelerReuter => {
                let params = BrParameters {
                    cm: self.cfg.physics.capacitance,
                    chi: self.cfg.physics.surface_to_volume,
                    conductivity: self.cfg.physics.conductivity,
                };
                let model = if self.cfg.physics.rate_table {
                    BeelerReuter::with_table(params)
                } else {
                    BeelerReuter::new(params)
                };
                let gates = resting_state(u0.len()).gates;
                self.drive(&model, u0, gates, opts, |g: &Vec<Gates>| gate_columns(g))
            }
        }
    }

    fn drive<M: ReactionModel>(
        &self,
        model: &M,
        u0: Vec<f64>,
        aux0: M::Aux,
        opts: &RunOptions,
        extra: impl Fn(&M::Aux) -> Vec<(&'static str, Vec<f64>)>,
    ) -> Result<RunSummary> {
        let t_end = opts.t_end.unwrap_or(self.cfg.time.t_end);
        let grid = TimeGrid::new(self.cfg.time.dt, t_end)?;
        if let Some(dir) = &opts.out_dir {
            fs::create_dir_all(dir).map_err(|source| AppError::Io {
                path: dir.clone(),
                source,
            })?;
        }
        let stride = self.cfg.snapshot_stride();
        let level = self.cfg.activation_level();
        let n = u0.len();
        let mut activation: Vec<Option<f64>> = vec![None; n];
        let mut prev = u0.clone();
        let mut prev_t = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut snapshots = Vec::new();
        let mut failure: Option<AppError> = None;
        let options = IntegrateOptions {
            picard: self.cfg.picard_settings(),
            observe_every: 1,
        };
        let traj = integrate(
            &self.operator,
            u0,
            aux0,
            model,
            &grid,
            &self.stimuli(opts.amplitude),
            &options,
            |s: &StepView<'_, M::Aux>| {
                for (i, &v) in s.u.iter().enumerate() {
                    lo = lo.min(v);
                    hi = hi.max(v);
                    if activation[i].is_none() && v >= level && (s.step == 0 || prev[i] < level) {
                        activation[i] = Some(if s.step == 0 {
                            0.0
                        } else {
                            prev_t + (s.time - prev_t) * (level - prev[i]) / (v - prev[i])
                        });
                    }
                }
                prev.copy_from_slice(s.u);
                prev_t = s.time;
                if let Some(dir) = &opts.out_dir {
                    let due = s.step == 0 || s.step == grid.n_steps || stride.is_some_and(|k| s.step % k == 0);
                    if due {
                        match self.write_snapshot(dir, snapshots.len(), s.time, s.u, extra(s.aux)) {
                            Ok(p) => snapshots.push(p),
                            Err(e) => {
                                failure = Some(e);
                                return ControlFlow::Break(());
                            }
                        }
                    }
                }
                match opts.stop_on_activation {
                    Some(node) if activation[node].is_some() => ControlFlow::Break(()),
                    _ => ControlFlow::Continue(()),
                }
            },
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        if let Some(dir) = &opts.out_dir {
            let times: Vec<f64> = activation.iter().map(|a| a.unwrap_or(f64::NAN)).collect();
            let path = self.write_field(dir, "activation", traj.time, "activation", &times)?;
            snapshots.push(path);
        }
        Ok(RunSummary {
            state: traj.u,
            time: traj.time,
            steps: traj.steps,
            activation,
            snapshots,
            picard: traj.picard,
            krylov_iterations: traj.krylov_iterations,
            stopped_early: traj.stopped,
            min: lo,
            max: hi,
        })
    }

    fn variable_name(&self) -> &'static str {
        match self.cfg.problem {
            ProblemKind::Fisher => "u",
            ProblemKind::BeelerReuter => "v",
        }
    }

    fn write_snapshot(
        &self,
        dir: &Path,
        index: usize,
        time: f64,
        u: &[f64],
        extra: Vec<(&'static str, Vec<f64>)>,
    ) -> Result<PathBuf> {
        let stem = format!("snapshot_{index:05}");
        match &self.domain.mesh {
            Some(_) => self.write_field(dir, &stem, time, self.variable_name(), u),
            None => {
                let mut table = Table::new(time)
                    .with("x", self.domain.points.iter().map(|p| p[0]).collect())
                    .with(self.variable_name(), u.to_vec());
                if self.cfg.output.gates {
                    for (name, col) in extra {
                        table = table.with(name, col);
                    }
                }
                let path = dir.join(format!("{stem}.dat"));
                write_snapshot_1d(&table, &path)?;
                Ok(path)
            }
        }
    }

    fn write_field(&self, dir: &Path, stem: &str, time: f64, name: &str, values: &[f64]) -> Result<PathBuf> {
        match &self.domain.mesh {
            Some(mesh) => {
                let path = dir.join(format!("{stem}.vtk"));
                write_snapshot_3d(mesh, time, name, values, &path)?;
                Ok(path)
            }
            None => {
                let path = dir.join(format!("{stem}.dat"));
                let table = Table::new(time)
                    .with("x", self.domain.points.iter().map(|p| p[0]).collect())
                    .with(name, values.to_vec());
                write_snapshot_1d(&table, &path)?;
                Ok(path)
            }
        }
    }
}

fn gate_columns(gates: &[Gates]) -> Vec<(&'static str, Vec<f64>)> {
    let col = |f: fn(&Gates) -> f64| gates.iter().map(f).collect::<Vec<f64>>();
    vec![
        ("m", col(|g| g.m)),
        ("h", col(|g| g.h)),
        ("j", col(|g| g.j)),
        ("d", col(|g| g.d)),
        ("f", col(|g| g.f)),
        ("x_gate", col(|g| g.x)),
        ("c", col(|g| g.c)),
    ]
}
