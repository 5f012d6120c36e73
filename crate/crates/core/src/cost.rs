//! Static gate-level power proxy.
//!
//! Power is the sum of per-gate weights over the active netlist. The default
//! weights follow static CMOS transistor counts; a table derived from a real
//! cell library can be loaded from JSON instead.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{GateFunction, Netlist};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CostError {
    #[error("cost table has no weight for gate function {0}")]
    MissingWeight(GateFunction),
    #[error("weight for {function} must be finite and non-negative, got {weight}")]
    InvalidWeight { function: GateFunction, weight: f64 },
    #[error("golden circuit has zero cost; relative power is undefined")]
    ZeroGoldenCost,
    #[error("cannot parse cost table: {0}")]
    Parse(String),
}

/// Gate function -> relative power units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostTable {
    weights: BTreeMap<GateFunction, f64>,
}

impl Default for CostTable {
    fn default() -> Self {
        use GateFunction::*;
        let weights = [
            (Inv, 2.0),
            (Buf, 4.0),
            (Nand, 4.0),
            (Nor, 4.0),
            (And, 6.0),
            (Or, 6.0),
            (Xor, 8.0),
            (Xnor, 8.0),
            (Const0, 0.0),
            (Const1, 0.0),
        ];
        CostTable {
            weights: weights.into_iter().collect(),
        }
    }
}

impl CostTable {
    pub fn new(weights: BTreeMap<GateFunction, f64>) -> Result<Self, CostError> {
        for (&function, &weight) in &weights {
            if !weight.is_finite() || weight < 0.0 {
                return Err(CostError::InvalidWeight { function, weight });
            }
        }
        Ok(CostTable { weights })
    }

    /// Parses `{"AND": 6, "XOR": 8, ...}`.
    pub fn from_json(text: &str) -> Result<Self, CostError> {
        let weights: BTreeMap<GateFunction, f64> =
            serde_json::from_str(text).map_err(|e| CostError::Parse(e.to_string()))?;
        Self::new(weights)
    }

    pub fn weight(&self, f: GateFunction) -> Result<f64, CostError> {
        self.weights.get(&f).copied().ok_or(CostError::MissingWeight(f))
    }

    /// Checks that every function in `functions` has a weight.
    pub fn covers(&self, functions: &[GateFunction]) -> Result<(), CostError> {
        functions.iter().try_for_each(|&f| self.weight(f).map(|_| ()))
    }

    /// Dense weight array indexed by [`GateFunction::ordinal`]; missing
    /// entries are `NaN`.
    pub(crate) fn dense(&self) -> [f64; 10] {
        let mut out = [f64::NAN; 10];
        for (&f, &w) in &self.weights {
            out[f.ordinal()] = w;
        }
        out
    }
}

pub fn power_estimate(netlist: &Netlist, table: &CostTable) -> Result<f64, CostError> {
    netlist
        .gates()
        .iter()
        .try_fold(0.0, |acc, g| Ok(acc + table.weight(g.function())?))
}

pub fn relative_power(cand: &Netlist, golden: &Netlist, table: &CostTable) -> Result<f64, CostError> {
    let reference = power_estimate(golden, table)?;
    if reference <= 0.0 {
        return Err(CostError::ZeroGoldenCost);
    }
    Ok(power_estimate(cand, table)? / reference)
}
