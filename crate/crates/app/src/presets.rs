//! Built-in experiments.
//!
//! Parameters the experiments leave open are fixed here: time step and
//! cadence for the Fisher run, snapshot cadence, deflation counts, and the
//! whole `br-slab-3d` geometry, a desk-sized stand-in for the heart mesh.

use std::path::PathBuf;

use crate::config::{
    BoxSpec, ConfigError, EngineConfig, Geometry, OutputConfig, Orders, Physics, PicardConfig, ProblemKind,
    RegionSpec, SimulationConfig, StimulusProtocol, StimulusRegion, ThresholdConfig, TimeSettings,
};

pub const PRESETS: [&str; 4] = ["fisher-1d", "br-cable-1d", "br-heart-3d", "br-slab-3d"];

const CHI: f64 = 2000.0;

fn output(every: f64) -> OutputConfig {
    OutputConfig {
        snapshot_every: Some(every),
        ..OutputConfig::default()
    }
}

fn engine(deflation: usize) -> EngineConfig {
    EngineConfig {
        deflation: Some(deflation),
        ..EngineConfig::default()
    }
}

/// Fisher growth on `[0, 100]`, orders 1.5 | 2 split at 50, step initial data.
pub fn fisher_1d() -> SimulationConfig {
    SimulationConfig {
        problem: ProblemKind::Fisher,
        geometry: Geometry::Interval {
            length: 100.0,
            spacing: Some(0.1),
            nodes: None,
            origin: 0.0,
        },
        regions: RegionSpec::HalfSplit { split: Some(50.0) },
        orders: Orders { alpha1: 1.5, alpha2: 2.0 },
        physics: Physics::default(),
        time: TimeSettings { dt: 0.1, t_end: 30.0 },
        picard: PicardConfig::default(),
        engine: engine(40),
        stimulus: None,
        initial: None,
        output: output(5.0),
        threshold: ThresholdConfig::default(),
    }
}

/// Beeler-Reuter cable of 10 cm, standard diffusion in both halves, stimulus
/// of `12 chi` on `[0, 0.25]` at 10 ms for 5 ms.
pub fn br_cable_1d() -> SimulationConfig {
    SimulationConfig {
        problem: ProblemKind::BeelerReuter,
        geometry: Geometry::Interval {
            length: 10.0,
            spacing: Some(0.01),
            nodes: None,
            origin: 0.0,
        },
        regions: RegionSpec::HalfSplit { split: Some(5.0) },
        orders: Orders { alpha1: 2.0, alpha2: 2.0 },
        physics: Physics {
            conductivity: 1.0,
            ..Physics::default()
        },
        time: TimeSettings { dt: 0.25, t_end: 1200.0 },
        picard: PicardConfig::default(),
        engine: engine(20),
        stimulus: Some(StimulusProtocol {
            times: vec![10.0],
            interval: None,
            count: None,
            duration: 5.0,
            amplitude: 12.0 * CHI,
            region: StimulusRegion::Interval { lower: 0.0, upper: 0.25 },
        }),
        initial: None,
        output: output(100.0),
        threshold: ThresholdConfig {
            upper: 40.0 * CHI,
            ..ThresholdConfig::default()
        },
    }
}

/// Rabbit ventricles with an ischaemic ball of order 1.7; the mesh is not
/// bundled, so `geometry.nodes` / `geometry.elements` must be supplied.
pub fn br_heart_3d() -> SimulationConfig {
    SimulationConfig {
        problem: ProblemKind::BeelerReuter,
        geometry: Geometry::Mesh {
            nodes: None,
            elements: None,
            scale: 1.0,
        },
        regions: RegionSpec::Sphere {
            center: [1.0352, -0.6256, 0.248],
            radius: 1.25,
            exclude: Some(BoxSpec {
                lower: [-0.3, 0.095, f64::NEG_INFINITY],
                upper: [1.3, f64::INFINITY, f64::INFINITY],
            }),
        },
        orders: Orders { alpha1: 2.0, alpha2: 1.7 },
        physics: Physics {
            conductivity: 2.0,
            ..Physics::default()
        },
        time: TimeSettings { dt: 0.25, t_end: 1500.0 },
        picard: PicardConfig::default(),
        engine: engine(20),
        stimulus: Some(StimulusProtocol {
            times: vec![10.0],
            interval: Some(325.0),
            count: Some(5),
            duration: 5.0,
            amplitude: 14.0 * CHI,
            region: StimulusRegion::Sphere {
                center: [0.3513, 0.0707, -1.0772],
                radius: 0.5,
            },
        }),
        initial: None,
        output: output(10.0),
        threshold: ThresholdConfig {
            upper: 40.0 * CHI,
            ..ThresholdConfig::default()
        },
    }
}

/// A 1.8 x 0.4 x 0.2 cm slab (1665 nodes) with a band `0.6 < x < 1.2` of order
/// 1.7 and the heart's tissue constants, stimulated on its `x <= 0.1` end.
pub fn br_slab_3d() -> SimulationConfig {
    SimulationConfig {
        problem: ProblemKind::BeelerReuter,
        geometry: Geometry::Box {
            cells: [36, 8, 4],
            lengths: [1.8, 0.4, 0.2],
            origin: [0.0; 3],
        },
        regions: RegionSpec::Box(BoxSpec {
            lower: [0.6, f64::NEG_INFINITY, f64::NEG_INFINITY],
            upper: [1.2, f64::INFINITY, f64::INFINITY],
        }),
        orders: Orders { alpha1: 2.0, alpha2: 1.7 },
        physics: Physics {
            conductivity: 2.0,
            ..Physics::default()
        },
        time: TimeSettings { dt: 0.1, t_end: 80.0 },
        picard: PicardConfig::default(),
        engine: engine(8),
        stimulus: Some(StimulusProtocol {
            times: vec![10.0],
            interval: None,
            count: None,
            duration: 5.0,
            amplitude: 14.0 * CHI,
            region: StimulusRegion::Interval {
                lower: f64::NEG_INFINITY,
                upper: 0.1,
            },
        }),
        initial: None,
        output: output(5.0),
        threshold: ThresholdConfig {
            upper: 40.0 * CHI,
            ..ThresholdConfig::default()
        },
    }
}

/// The preset as a configuration; validation is left to the caller because
/// `br-heart-3d` is incomplete until a mesh is given.
pub fn preset(name: &str) -> Result<SimulationConfig, ConfigError> {
    match name {
        "fisher-1d" => Ok(fisher_1d()),
        "br-cable-1d" => Ok(br_cable_1d()),
        "br-heart-3d" => Ok(br_heart_3d()),
        "br-slab-3d" => Ok(br_slab_3d()),
        _ => Err(ConfigError::UnknownPreset {
            name: name.to_string(),
            available: PRESETS.join(", "),
        }),
    }
}

/// Points a mesh geometry at `<prefix>.node` and `<prefix>.ele`.
pub fn with_mesh_prefix(mut cfg: SimulationConfig, prefix: &str) -> SimulationConfig {
    if let Geometry::Mesh { nodes, elements, .. } = &mut cfg.geometry {
        *nodes = Some(PathBuf::from(format!("{prefix}.node")));
        *elements = Some(PathBuf::from(format!("{prefix}.ele")));
    }
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn presets_round_trip() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            let text = cfg.to_toml();
            let back: SimulationConfig = toml::from_str(&text).unwrap();
            assert_eq!(back, cfg, "{name}");
            if name != "br-heart-3d" {
                assert_eq!(parse_config(&text).unwrap(), cfg);
            }
        }
    }

    #[test]
    fn heart_needs_mesh() {
        let err = preset("br-heart-3d").unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("geometry.nodes"), "{err}");
        let cfg = with_mesh_prefix(preset("br-heart-3d").unwrap(), "/data/rabbit");
        cfg.validate().unwrap();
    }

    #[test]
    fn cable_parameters() {
        let c = br_cable_1d();
        assert_eq!(c.effective_diffusivity(), 5e-4);
        assert_eq!(c.stimulus_current(c.stimulus.as_ref().unwrap().amplitude), 12.0);
        assert_eq!(br_heart_3d().stimulus.unwrap().schedule(), vec![10.0, 335.0, 660.0, 985.0, 1310.0]);
        assert!(preset("nope").is_err());
    }
}
