//! Reaction terms: the Fisher source and the Beeler-Reuter membrane model.

mod beeler_reuter;

pub use beeler_reuter::{
    br_advance_gates, br_currents, br_rates, resting_state, slow_inward_current, BrParameters, Currents, Gate,
    Gates, IonicStateField, RateCoefficients, RateTable, Rates, RATE_TABLE, REST_POTENTIAL,
};

use alloc::vec::Vec;

use crate::error::Result;
use crate::stepper::ReactionModel;

/// `g(u) = u (1 - u)`.
pub fn fisher_source(u: f64) -> f64 {
    u * (1.0 - u)
}

/// Logistic growth with no auxiliary state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Fisher;

impl ReactionModel for Fisher {
    type Aux = ();

    fn advance(&self, _aux: &(), _u: &[f64], _dt: f64) -> Result<()> {
        Ok(())
    }

    fn source(&self, u: &[f64], _aux: &(), _t: f64, out: &mut [f64]) -> Result<()> {
        for (o, &x) in out.iter_mut().zip(u) {
            *o = fisher_source(x);
        }
        Ok(())
    }
}

/// The voltage equation source `-I_ion / C_m` with gates as auxiliary state.
#[derive(Debug, Clone, PartialEq)]
pub struct BeelerReuter {
    pub params: BrParameters,
    table: Option<RateTable>,
}

impl BeelerReuter {
    pub fn new(params: BrParameters) -> Self {
        Self { params, table: None }
    }

    /// Uses a 0.01 mV rate table instead of evaluating exponentials.
    pub fn with_table(params: BrParameters) -> Self {
        Self {
            params,
            table: Some(RateTable::standard()),
        }
    }

    pub fn rates(&self, v: f64) -> Rates {
        match &self.table {
            Some(t) => t.rates(v),
            None => br_rates(v),
        }
    }
}

impl ReactionModel for BeelerReuter {
    type Aux = Vec<Gates>;

    fn advance(&self, aux: &Vec<Gates>, u: &[f64], dt: f64) -> Result<Vec<Gates>> {
        aux.iter()
            .zip(u)
            .map(|(g, &v)| br_advance_gates(g, v, dt, &self.rates(v)))
            .collect()
    }

    fn source(&self, u: &[f64], aux: &Vec<Gates>, _t: f64, out: &mut [f64]) -> Result<()> {
        let inv_cm = 1.0 / self.params.cm;
        for ((o, &v), g) in out.iter_mut().zip(u).zip(aux) {
            *o = -br_currents(v, g)?.i_ion * inv_cm;
        }
        Ok(())
    }

    fn stimulus_gain(&self) -> f64 {
        1.0 / self.params.cm
    }
}
