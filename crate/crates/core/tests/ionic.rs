use std::ops::ControlFlow;

use proptest::prelude::*;
use vofl_core::ionic::{
    br_advance_gates, br_currents, br_rates, fisher_source, resting_state, BeelerReuter, BrParameters, Gate, Gates,
};
use vofl_core::matfunc::EngineSettings;
use vofl_core::sparse::SparseOperator;
use vofl_core::stepper::{integrate, IntegrateOptions, Stimulus, TimeGrid};
use vofl_core::vofl::{FractionalOrderField, VoflOperator};

/// A membrane patch: one node and no diffusion.
fn single_cell() -> VoflOperator {
    let a = SparseOperator::from_diagonal(&[0.0]);
    let orders = FractionalOrderField::uniform(2.0, 1).unwrap();
    VoflOperator::new(a.into(), orders, 0.0, EngineSettings::default()).unwrap()
}

/// Voltage trace sampled every step.
fn run_cell(current: f64, t_end: f64, dt: f64) -> Vec<(f64, f64)> {
    let model = BeelerReuter::new(BrParameters::default());
    let rest = resting_state(1);
    let stim = Stimulus {
        nodes: vec![0],
        windows: vec![(10.0, 5.0)],
        current,
    };
    let mut trace = Vec::new();
    integrate(
        &single_cell(),
        rest.v,
        rest.gates,
        &model,
        &TimeGrid::new(dt, t_end).unwrap(),
        &[stim],
        &IntegrateOptions::default(),
        |s| {
            trace.push((s.time, s.u[0]));
            ControlFlow::Continue(())
        },
    )
    .unwrap();
    trace
}

#[test]
fn stimulated_cell_fires_and_recovers() {
    let trace = run_cell(12.0, 600.0, 0.25);
    let peak = trace.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    assert!(peak > 0.0, "peak {peak}");
    let (t_end, v_end) = *trace.last().unwrap();
    assert_eq!(t_end, 600.0);
    assert!((v_end + 85.0).abs() <= 5.0, "{v_end}");
    // upstroke happens during the stimulus, not before
    assert!(trace.iter().filter(|p| p.0 <= 10.0).all(|p| p.1 < -80.0));
}

#[test]
fn unstimulated_cell_stays_at_rest() {
    let trace = run_cell(0.0, 100.0, 0.25);
    let drift = trace.iter().map(|p| (p.1 + 85.0).abs()).fold(0.0, f64::max);
    assert!(drift <= 0.5, "{drift}");
}

#[test]
fn weak_stimulus_does_not_fire() {
    let trace = run_cell(0.5, 100.0, 0.25);
    assert!(trace.iter().all(|p| p.1 < -40.0));
}

#[test]
fn gate_step_matches_fine_reference() {
    // forward Euler with 10^4 substeps on dG/dt = a (1 - G) - b G
    let dt = 0.25;
    for &v in &[-85.0, -60.0, -30.0, 0.0, 25.0] {
        let r = br_rates(v);
        let g0 = Gates { m: 0.3, h: 0.6, j: 0.7, d: 0.2, f: 0.8, x: 0.1, c: 1.0 };
        let g1 = br_advance_gates(&g0, v, dt, &r).unwrap();
        for gate in Gate::ALL {
            let (a, b) = (r.alpha[gate as usize], r.beta[gate as usize]);
            let mut y = g0.gate(gate);
            let h = dt / 10_000.0;
            for _ in 0..10_000 {
                y += h * (a * (1.0 - y) - b * y);
            }
            assert!((g1.gate(gate) - y).abs() <= 1e-4, "{gate:?} at {v}: {} vs {y}", g1.gate(gate));
        }
    }
}

#[test]
fn fisher_fixed_points() {
    for u in [-1.0, -0.1, 0.3, 0.5, 0.99, 1.2, 2.0] {
        assert_ne!(fisher_source(u), 0.0);
    }
    assert_eq!(fisher_source(0.0), 0.0);
    assert_eq!(fisher_source(1.0), 0.0);
}

proptest! {
    #[test]
    fn gates_stay_in_unit_interval(
        start in prop::array::uniform6(0.0f64..=1.0),
        voltages in prop::collection::vec(-120.0f64..80.0, 1..40),
        dt in 0.01f64..2.0,
    ) {
        let mut g = Gates { m: start[0], h: start[1], j: start[2], d: start[3], f: start[4], x: start[5], c: 1.0 };
        for v in voltages {
            g = br_advance_gates(&g, v, dt, &br_rates(v)).unwrap();
            for gate in Gate::ALL {
                let x = g.gate(gate);
                prop_assert!((0.0..=1.0).contains(&x), "{:?} = {}", gate, x);
            }
            prop_assert!(g.c > 0.0);
        }
    }

    #[test]
    fn currents_are_finite(v in -120.0f64..80.0, m in 0.0f64..=1.0, d in 0.0f64..=1.0, c in 1e-6f64..10.0) {
        let g = Gates { m, h: 0.5, j: 0.5, d, f: 0.5, x: 0.5, c };
        let i = br_currents(v, &g).unwrap();
        prop_assert!(i.i_ion.is_finite());
        prop_assert!((i.i_ion - (i.i_na + i.i_k + i.i_x + i.i_s)).abs() < 1e-9 * (1.0 + i.i_ion.abs()));
    }
}
