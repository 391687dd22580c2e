//! Simulation configuration in TOML.
//!
//! Every table rejects unknown keys. Omitted tables take the defaults below;
//! `problem`, `geometry`, `orders` and `time` are required. The README lists
//! the full schema with an example.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vofl_core::matfunc::EngineSettings;
use vofl_core::stepper::PicardSettings;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("override `{0}` is not of the form key=value")]
    Override(String),
    #[error("unknown preset `{name}` (available: {available})")]
    UnknownPreset { name: String, available: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Fisher,
    BeelerReuter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Geometry {
    /// Uniform finite differences on `[origin, origin + length]`; give either
    /// `spacing` or `nodes`.
    Interval {
        length: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spacing: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nodes: Option<usize>,
        #[serde(default)]
        origin: f64,
    },
    /// Generated box of `cells` cubes, six tetrahedra each.
    Box {
        cells: [usize; 3],
        lengths: [f64; 3],
        #[serde(default)]
        origin: [f64; 3],
    },
    /// TetGen `.node` / `.ele` pair, coordinates multiplied by `scale`.
    Mesh {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nodes: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        elements: Option<PathBuf>,
        #[serde(default = "one")]
        scale: f64,
    },
}

impl Geometry {
    pub fn is_interval(&self) -> bool {
        matches!(self, Geometry::Interval { .. })
    }
}

fn one() -> f64 {
    1.0
}

/// Axis-aligned box; bounds may be `inf` / `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

/// Which nodes form the damaged region 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionSpec {
    /// Everything is region 1.
    #[default]
    None,
    /// `x > split`; the split defaults to the middle of an interval.
    HalfSplit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        split: Option<f64>,
    },
    /// Closed ball minus an optional open box.
    Sphere {
        center: [f64; 3],
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exclude: Option<BoxSpec>,
    },
    /// Open box.
    Box(BoxSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Orders {
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Monodomain constants. `D_eff = D / (chi C_m)` unless given directly; the
/// Fisher problem uses `D` as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    /// `D` in mS cm^-1.
    pub conductivity: f64,
    /// `C_m` in uF cm^-2.
    pub capacitance: f64,
    /// `chi` in cm^-1.
    pub surface_to_volume: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_diffusivity: Option<f64>,
    /// Tabulated Beeler-Reuter rates (0.01 mV grid) instead of direct evaluation.
    pub rate_table: bool,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            conductivity: 1.0,
            capacitance: 1.0,
            surface_to_volume: 2000.0,
            effective_diffusivity: None,
            rate_table: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSettings {
    /// ms
    pub dt: f64,
    /// ms
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        let p = PicardSettings::default();
        Self {
            tol: p.tol,
            max_iter: p.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub quad_points: usize,
    /// Eigenpairs handled exactly; automatic when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deflation: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    pub poly_degree: usize,
    pub check_refinement: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let e = EngineSettings::default();
        Self {
            quad_points: e.quad_points,
            deflation: e.deflation,
            tol: e.tol,
            max_iter: e.max_iter,
            poly_degree: e.poly_degree,
            check_refinement: e.check_refinement,
        }
    }
}

impl EngineConfig {
    pub fn settings(&self) -> EngineSettings {
        EngineSettings {
            quad_points: self.quad_points,
            deflation: self.deflation,
            tol: self.tol,
            max_iter: self.max_iter,
            poly_degree: self.poly_degree,
            check_refinement: self.check_refinement,
            ..EngineSettings::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StimulusRegion {
    /// `lower <= x <= upper` on the first coordinate.
    Interval { lower: f64, upper: f64 },
    /// Closed ball.
    Sphere { center: [f64; 3], radius: f64 },
    Box(BoxSpec),
}

/// Current applied during `[T_k, T_k + duration)` for every start time `T_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusProtocol {
    /// Start times in ms. With `interval` and `count`, only the first is used
    /// and the rest are generated.
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// ms
    pub duration: f64,
    /// uA cm^-3 (for example `12 * chi`); divided by `chi` to get a membrane
    /// current density. Fisher problems take it as a plain source.
    pub amplitude: f64,
    pub region: StimulusRegion,
}

impl StimulusProtocol {
    pub fn schedule(&self) -> Vec<f64> {
        match (self.interval, self.count, self.times.first()) {
            (Some(step), Some(count), Some(&start)) => (0..count).map(|k| start + step * k as f64).collect(),
            _ => self.times.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Beeler-Reuter resting state.
    Rest,
    /// `1` for `x <= front`, `exp(-decay (x - front))` beyond.
    Step { front: f64, decay: f64 },
    Uniform { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Snapshot cadence in ms, rounded to whole steps. Without it only the
    /// initial and final states are written.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<f64>,
    /// Add gating variables to 1D snapshots.
    pub gates: bool,
    /// Level whose first upward crossing defines activation (0 mV for
    /// Beeler-Reuter, 0.5 for Fisher when omitted).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub activation_level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    /// Upper bisection bracket, same units as the stimulus amplitude.
    pub upper: f64,
    /// Probe distance from the stimulus as a fraction of the farthest node.
    pub probe_fraction: f64,
    /// Bracket width relative to its upper end at which bisection stops.
    pub rel_tol: f64,
    /// Observation window in ms; `time.t_end` when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            upper: 100_000.0,
            probe_fraction: 0.75,
            rel_tol: 0.01,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub problem: ProblemKind,
    pub geometry: Geometry,
    #[serde(default)]
    pub regions: RegionSpec,
    pub orders: Orders,
    #[serde(default)]
    pub physics: Physics,
    pub time: TimeSettings,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stimulus: Option<StimulusProtocol>,
    /// Rest for Beeler-Reuter, the `front = 5, decay = 10` step for Fisher.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialCondition>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub threshold: ThresholdConfig,
}

impl SimulationConfig {
    /// Diffusion coefficient in front of the fractional operator.
    pub fn effective_diffusivity(&self) -> f64 {
        if let Some(d) = self.physics.effective_diffusivity {
            return d;
        }
        match self.problem {
            ProblemKind::Fisher => self.physics.conductivity,
            ProblemKind::BeelerReuter => {
                self.physics.conductivity / (self.physics.surface_to_volume * self.physics.capacitance)
            }
        }
    }

    /// Stimulus amplitude converted to what the reaction model adds per unit time.
    pub fn stimulus_current(&self, amplitude: f64) -> f64 {
        match self.problem {
            ProblemKind::Fisher => amplitude,
            ProblemKind::BeelerReuter => amplitude / self.physics.surface_to_volume,
        }
    }

    pub fn initial_condition(&self) -> InitialCondition {
        self.initial.clone().unwrap_or(match self.problem {
            ProblemKind::Fisher => InitialCondition::Step { front: 5.0, decay: 10.0 },
            ProblemKind::BeelerReuter => InitialCondition::Rest,
        })
    }

    pub fn activation_level(&self) -> f64 {
        self.output.activation_level.unwrap_or(match self.problem {
            ProblemKind::Fisher => 0.5,
            ProblemKind::BeelerReuter => 0.0,
        })
    }

    pub fn picard_settings(&self) -> PicardSettings {
        PicardSettings {
            tol: self.picard.tol,
            max_iter: self.picard.max_iter,
        }
    }

    /// Steps between snapshots, if any.
    pub fn snapshot_stride(&self) -> Option<usize> {
        self.output
            .snapshot_every
            .map(|every| ((every / self.time.dt).round() as usize).max(1))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, format!("must be positive, got {v}")))
            }
        };
        for (field, a) in [("orders.alpha1", self.orders.alpha1), ("orders.alpha2", self.orders.alpha2)] {
            if !(a > 1.0 && a <= 2.0) {
                return Err(invalid(field, format!("must lie in (1, 2], got {a}")));
            }
        }
        match &self.geometry {
            Geometry::Interval {
                length,
                spacing,
                nodes,
                origin,
            } => {
                positive("geometry.length", *length)?;
                if !origin.is_finite() {
                    return Err(invalid("geometry.origin", "must be finite"));
                }
                match (spacing, nodes) {
                    (Some(h), None) => positive("geometry.spacing", *h)?,
                    (None, Some(n)) if *n >= 2 => {}
                    (None, Some(n)) => return Err(invalid("geometry.nodes", format!("need at least 2, got {n}"))),
                    _ => return Err(invalid("geometry.spacing", "give exactly one of `spacing` and `nodes`")),
                }
            }
            Geometry::Box { cells, lengths, .. } => {
                if cells.contains(&0) {
                    return Err(invalid("geometry.cells", "every axis needs at least one cell"));
                }
                for l in lengths {
                    positive("geometry.lengths", *l)?;
                }
            }
            Geometry::Mesh { nodes, elements, scale } => {
                if nodes.is_none() {
                    return Err(invalid("geometry.nodes", "missing mesh path (.node file)"));
                }
                if elements.is_none() {
                    return Err(invalid("geometry.elements", "missing mesh path (.ele file)"));
                }
                positive("geometry.scale", *scale)?;
            }
        }
        match &self.regions {
            RegionSpec::HalfSplit { split: None } if !self.geometry.is_interval() => {
                return Err(invalid("regions.split", "required unless the geometry is an interval"));
            }
            RegionSpec::Sphere { radius, .. } => positive("regions.radius", *radius)?,
            _ => {}
        }
        positive("physics.conductivity", self.physics.conductivity)?;
        positive("physics.capacitance", self.physics.capacitance)?;
        positive("physics.surface_to_volume", self.physics.surface_to_volume)?;
        if let Some(d) = self.physics.effective_diffusivity {
            positive("physics.effective_diffusivity", d)?;
        }
        positive("time.dt", self.time.dt)?;
        positive("time.t_end", self.time.t_end)?;
        if self.time.dt > self.time.t_end {
            return Err(invalid("time.dt", "larger than time.t_end"));
        }
        positive("picard.tol", self.picard.tol)?;
        if self.picard.max_iter == 0 {
            return Err(invalid("picard.max_iter", "must be at least 1"));
        }
        self.engine
            .settings()
            .validate()
            .map_err(|e| invalid("engine", e.to_string()))?;
        if let Some(s) = &self.stimulus {
            let times = s.schedule();
            if times.is_empty() {
                return Err(invalid("stimulus.times", "at least one start time is needed"));
            }
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("stimulus.times", "must be strictly ascending"));
            }
            if s.interval.is_some() != s.count.is_some() {
                return Err(invalid("stimulus.interval", "`interval` and `count` go together"));
            }
            if let Some(i) = s.interval {
                positive("stimulus.interval", i)?;
            }
            positive("stimulus.duration", s.duration)?;
            if !(s.amplitude >= 0.0 && s.amplitude.is_finite()) {
                return Err(invalid("stimulus.amplitude", format!("must be non-negative, got {}", s.amplitude)));
            }
            match s.region {
                StimulusRegion::Interval { lower, upper } if !(lower <= upper) => {
                    return Err(invalid("stimulus.region", "lower exceeds upper"));
                }
                StimulusRegion::Sphere { radius, .. } => positive("stimulus.region.radius", radius)?,
                _ => {}
            }
        }
        match (self.problem, self.initial_condition()) {
            (ProblemKind::Fisher, InitialCondition::Rest) => {
                return Err(invalid("initial.kind", "`rest` only applies to beeler-reuter"));
            }
            (_, InitialCondition::Step { decay, .. }) if !(decay >= 0.0) => {
                return Err(invalid("initial.decay", "must be non-negative"));
            }
            _ => {}
        }
        if let Some(e) = self.output.snapshot_every {
            positive("output.snapshot_every", e)?;
        }
        positive("threshold.upper", self.threshold.upper)?;
        if !(self.threshold.probe_fraction > 0.0 && self.threshold.probe_fraction <= 1.0) {
            return Err(invalid("threshold.probe_fraction", "must lie in (0, 1]"));
        }
        positive("threshold.rel_tol", self.threshold.rel_tol)?;
        if let Some(w) = self.threshold.window {
            positive("threshold.window", w)?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Sets a dotted key such as `orders.alpha1` to a TOML value. Values that
    /// do not parse as TOML are taken as strings.
    pub fn apply_override(&self, assignment: &str) -> Result<Self, ConfigError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Override(assignment.to_string()))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Override(assignment.to_string()));
        }
        let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
            Ok(mut t) => t.remove("v").expect("key present"),
            Err(_) => toml::Value::String(raw.trim().to_string()),
        };
        let mut root = toml::Value::try_from(self).expect("configuration serializes");
        let mut node = &mut root;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = node
                .as_table_mut()
                .ok_or_else(|| invalid(key, format!("`{}` is not a table", parts[..i].join("."))))?;
            if i + 1 == parts.len() {
                table.insert(part.to_string(), value.clone());
                break;
            }
            node = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
        let cfg: SimulationConfig = root.try_into().map_err(|e: toml::de::Error| invalid(key, e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<SimulationConfig, ConfigError> {
    let cfg: SimulationConfig = toml::from_str(text).map_err(|e| {
        let mut line = e.span().map_or(1, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        // tagged tables report the table header; point at the offending key instead
        if let Some(key) = e.message().strip_prefix("unknown field `").and_then(|m| m.split('`').next()) {
            let found = text.lines().enumerate().skip(line - 1).find(|(_, l)| {
                l.trim_start()
                    .strip_prefix(key)
                    .is_some_and(|rest| rest.trim_start().starts_with('='))
            });
            if let Some((i, _)) = found {
                line = i + 1;
            }
        }
        ConfigError::Parse {
            line,
            message: e.message().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}
