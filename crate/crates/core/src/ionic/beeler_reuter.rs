//! The Beeler-Reuter ventricular membrane model: four currents, six gates and
//! scaled intracellular calcium `c = 1e7 [Ca]_i`.

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};

/// Coefficients of `(C1 e^{C2 (v+C3)} + C4 (v+C5)) / (e^{C6 (v+C3)} + C7)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCoefficients(pub [f64; 7]);

/// Below this the denominator is treated as vanishing and the limit is used.
const SINGULAR_DENOMINATOR: f64 = 1e-9;

impl RateCoefficients {
    pub fn eval(&self, v: f64) -> f64 {
        let [c1, c2, c3, c4, c5, c6, c7] = self.0;
        let x = v + c3;
        let den = (c6 * x).exp() + c7;
        if den.abs() < SINGULAR_DENOMINATOR {
            // 0/0 at x = 0 (only for C7 = -1, C5 = C3); l'Hopital at x = 0
            return (c1 * c2 + c4) / c6;
        }
        (c1 * (c2 * x).exp() + c4 * (v + c5)) / den
    }
}

/// Gate identifiers in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    M,
    H,
    J,
    D,
    F,
    X,
}

impl Gate {
    pub const ALL: [Gate; 6] = [Gate::M, Gate::H, Gate::J, Gate::D, Gate::F, Gate::X];
}

/// Opening and closing rates of every gate, rows `(alpha, beta)` in the order m, h, j, d, f, x.
pub const RATE_TABLE: [(RateCoefficients, RateCoefficients); 6] = [
    (
        RateCoefficients([0.0, 0.0, 47.0, -1.0, 47.0, -0.1, -1.0]),
        RateCoefficients([40.0, -0.056, 72.0, 0.0, 0.0, 0.0, 0.0]),
    ),
    (
        RateCoefficients([0.126, -0.25, 77.0, 0.0, 0.0, 0.0, 0.0]),
        RateCoefficients([1.7, 0.0, 22.5, 0.0, 0.0, -0.082, 1.0]),
    ),
    (
        RateCoefficients([0.055, -0.25, 78.0, 0.0, 0.0, -0.2, 1.0]),
        RateCoefficients([0.3, 0.0, 32.0, 0.0, 0.0, -0.1, 1.0]),
    ),
    (
        RateCoefficients([0.095, -0.01, -5.0, 0.0, 0.0, -0.072, 1.0]),
        RateCoefficients([0.07, -0.017, 44.0, 0.0, 0.0, 0.05, 1.0]),
    ),
    (
        RateCoefficients([0.012, -0.008, 28.0, 0.0, 0.0, 0.15, 1.0]),
        RateCoefficients([0.0065, -0.02, 30.0, 0.0, 0.0, -0.2, 1.0]),
    ),
    (
        RateCoefficients([0.0005, 0.083, 50.0, 0.0, 0.0, 0.057, 1.0]),
        RateCoefficients([0.0013, -0.06, 20.0, 0.0, 0.0, -0.04, 1.0]),
    ),
];

/// All twelve rates at one voltage, in ms^-1.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rates {
    pub alpha: [f64; 6],
    pub beta: [f64; 6],
}

impl Rates {
    pub fn get(&self, gate: Gate) -> (f64, f64) {
        (self.alpha[gate as usize], self.beta[gate as usize])
    }
}

/// Direct evaluation of every rate at `v` (mV).
pub fn br_rates(v: f64) -> Rates {
    let mut r = Rates::default();
    for (i, (a, b)) in RATE_TABLE.iter().enumerate() {
        r.alpha[i] = a.eval(v);
        r.beta[i] = b.eval(v);
    }
    r
}

/// Rates tabulated on a uniform voltage grid with linear interpolation.
/// Voltages outside the grid fall back to direct evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    v_min: f64,
    step: f64,
    values: Vec<Rates>,
}

impl RateTable {
    /// 0.01 mV spacing over [-120, 80] mV.
    pub fn standard() -> Self {
        Self::new(-120.0, 80.0, 0.01)
    }

    pub fn new(v_min: f64, v_max: f64, step: f64) -> Self {
        let n = ((v_max - v_min) / step).round() as usize + 1;
        let values = (0..n).map(|i| br_rates(v_min + step * i as f64)).collect();
        Self { v_min, step, values }
    }

    pub fn rates(&self, v: f64) -> Rates {
        let s = (v - self.v_min) / self.step;
        if !(s >= 0.0) || s >= (self.values.len() - 1) as f64 {
            return br_rates(v);
        }
        let i = s as usize;
        let t = s - i as f64;
        let (lo, hi) = (&self.values[i], &self.values[i + 1]);
        let mut r = Rates::default();
        for k in 0..6 {
            r.alpha[k] = lo.alpha[k] + t * (hi.alpha[k] - lo.alpha[k]);
            r.beta[k] = lo.beta[k] + t * (hi.beta[k] - lo.beta[k]);
        }
        r
    }
}

/// Gates and calcium of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gates {
    pub m: f64,
    pub h: f64,
    pub j: f64,
    pub d: f64,
    pub f: f64,
    pub x: f64,
    /// `1e7 [Ca]_i`.
    pub c: f64,
}

impl Gates {
    pub const REST: Gates = Gates {
        m: 0.0,
        h: 1.0,
        j: 1.0,
        d: 0.0,
        f: 1.0,
        x: 0.0,
        c: 1.0,
    };

    pub fn gate(&self, g: Gate) -> f64 {
        match g {
            Gate::M => self.m,
            Gate::H => self.h,
            Gate::J => self.j,
            Gate::D => self.d,
            Gate::F => self.f,
            Gate::X => self.x,
        }
    }

    fn gate_mut(&mut self, g: Gate) -> &mut f64 {
        match g {
            Gate::M => &mut self.m,
            Gate::H => &mut self.h,
            Gate::J => &mut self.j,
            Gate::D => &mut self.d,
            Gate::F => &mut self.f,
            Gate::X => &mut self.x,
        }
    }
}

/// Resting potential in mV.
pub const REST_POTENTIAL: f64 = -85.0;

/// Per-node state of the tissue: voltage, gates and calcium.
#[derive(Debug, Clone, PartialEq)]
pub struct IonicStateField {
    pub v: Vec<f64>,
    pub gates: Vec<Gates>,
}

/// `v = -85 mV`, `(m, h, j, d, f, x) = (0, 1, 1, 0, 1, 0)`, `c = 1` at every node.
pub fn resting_state(n: usize) -> IonicStateField {
    IonicStateField {
        v: alloc::vec![REST_POTENTIAL; n],
        gates: alloc::vec![Gates::REST; n],
    }
}

/// Membrane currents in uA cm^-2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Currents {
    pub i_na: f64,
    pub i_k: f64,
    pub i_x: f64,
    pub i_s: f64,
    pub i_ion: f64,
}

/// `x / (1 - e^{-a x})`, continuous at zero.
fn x_over_one_minus_exp(x: f64, a: f64) -> f64 {
    let den = 1.0 - (-a * x).exp();
    if den.abs() < SINGULAR_DENOMINATOR {
        1.0 / a
    } else {
        x / den
    }
}

/// Slow inward current; needs `c > 0` for the calcium reversal potential.
pub fn slow_inward_current(v: f64, g: &Gates) -> Result<f64> {
    if !(g.c > 0.0) {
        return Err(Error::CalciumDomain(g.c));
    }
    Ok(0.09 * g.d * g.f * (v + 82.3 + 13.0287 * (1e-7 * g.c).ln()))
}

pub fn br_currents(v: f64, g: &Gates) -> Result<Currents> {
    let i_na = (4.0 * g.m * g.m * g.m * g.h * g.j + 0.003) * (v - 50.0);
    let i_k = 1.4 * ((0.04 * (v + 85.0)).exp() - 1.0) / ((0.08 * (v + 53.0)).exp() + (0.04 * (v + 53.0)).exp())
        + 0.07 * x_over_one_minus_exp(v + 23.0, 0.04);
    let i_x = 0.8 * g.x * ((0.04 * (v + 77.0)).exp() - 1.0) / (0.04 * (v + 35.0)).exp();
    let i_s = slow_inward_current(v, g)?;
    Ok(Currents {
        i_na,
        i_k,
        i_x,
        i_s,
        i_ion: i_na + i_k + i_x + i_s,
    })
}

/// Lower bound kept on `c` so the reversal potential stays defined.
const CALCIUM_FLOOR: f64 = 1e-6;

/// Advances gates exponentially at frozen `v` and calcium by backward Euler
/// with `I_s` taken from the incoming state.
pub fn br_advance_gates(g: &Gates, v: f64, dt: f64, rates: &Rates) -> Result<Gates> {
    let mut out = *g;
    for gate in Gate::ALL {
        let (a, b) = rates.get(gate);
        let s = a + b;
        if s > 0.0 {
            let inf = a / s;
            let value = inf + (g.gate(gate) - inf) * (-dt * s).exp();
            *out.gate_mut(gate) = value.clamp(0.0, 1.0);
        }
    }
    let i_s = slow_inward_current(v, g)?;
    out.c = ((g.c + dt * (0.07 - i_s)) / (1.0 + 0.07 * dt)).max(CALCIUM_FLOOR);
    Ok(out)
}

/// Membrane and coupling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrParameters {
    /// Membrane capacitance, uF cm^-2.
    pub cm: f64,
    /// Surface-to-volume ratio, cm^-1.
    pub chi: f64,
    /// Conductivity, mS cm^-1.
    pub conductivity: f64,
}

impl Default for BrParameters {
    fn default() -> Self {
        Self {
            cm: 1.0,
            chi: 2000.0,
            conductivity: 1.0,
        }
    }
}

impl BrParameters {
    /// `D / (chi C_m)`, the coefficient of the fractional Laplacian in the
    /// voltage equation (cm^alpha ms^-1).
    pub fn effective_diffusivity(&self) -> f64 {
        self.conductivity / (self.chi * self.cm)
    }
}
