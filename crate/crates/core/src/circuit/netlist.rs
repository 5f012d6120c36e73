use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CircuitError, GateFunction};

/// A single gate. Signals are numbered with primary inputs first, then gates
/// in list order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    function: GateFunction,
    fan_ins: [usize; 2],
}

impl Gate {
    /// `fan_ins` must hold exactly `function.arity()` signals.
    pub fn new(function: GateFunction, fan_ins: &[usize]) -> Self {
        assert_eq!(fan_ins.len(), function.arity(), "arity mismatch for {function}");
        let mut slots = [0; 2];
        slots[..fan_ins.len()].copy_from_slice(fan_ins);
        Gate { function, fan_ins: slots }
    }

    pub fn function(&self) -> GateFunction {
        self.function
    }

    pub fn fan_ins(&self) -> &[usize] {
        &self.fan_ins[..self.function.arity()]
    }

    /// Both fan-in slots; slots past the arity hold signal 0.
    pub(crate) fn raw_fan_ins(&self) -> [usize; 2] {
        self.fan_ins
    }
}

/// Topologically ordered combinational gate list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Netlist {
    inputs: usize,
    gates: Vec<Gate>,
    outputs: Vec<usize>,
}

impl Netlist {
    /// Builds a netlist, checking that every fan-in refers to an earlier signal
    /// and every output to an existing one.
    pub fn new(inputs: usize, gates: Vec<Gate>, outputs: Vec<usize>) -> Result<Self, CircuitError> {
        if inputs == 0 {
            return Err(CircuitError::MalformedNetlist("no primary inputs".into()));
        }
        for (g, gate) in gates.iter().enumerate() {
            let own = inputs + g;
            if let Some(&bad) = gate.fan_ins().iter().find(|&&s| s >= own) {
                return Err(CircuitError::MalformedNetlist(format!(
                    "gate {g} (signal {own}) reads signal {bad}, which is not earlier"
                )));
            }
        }
        let signals = inputs + gates.len();
        if let Some(&bad) = outputs.iter().find(|&&o| o >= signals) {
            return Err(CircuitError::MalformedNetlist(format!(
                "output references missing signal {bad}"
            )));
        }
        Ok(Netlist { inputs, gates, outputs })
    }

    pub(crate) fn from_parts_unchecked(inputs: usize, gates: Vec<Gate>, outputs: Vec<usize>) -> Self {
        debug_assert!(Netlist::new(inputs, gates.clone(), outputs.clone()).is_ok());
        Netlist { inputs, gates, outputs }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn signal_count(&self) -> usize {
        self.inputs + self.gates.len()
    }

    /// Evaluates one input vector (bit `i` of `x` drives input `i`).
    /// Slow reference path; the simulator module does the packed version.
    pub fn eval(&self, x: u64) -> u64 {
        let mut values = Vec::with_capacity(self.signal_count());
        values.extend((0..self.inputs).map(|i| (x >> i) & 1 == 1));
        for gate in &self.gates {
            let [a, b] = gate.raw_fan_ins();
            let v = gate.function.eval_bool(values[a], values[b]);
            values.push(v);
        }
        self.outputs
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &o)| acc | ((values[o] as u64) << j))
    }
}

/// Gate count per function; every function is present, possibly with zero.
pub type GateCounts = BTreeMap<GateFunction, usize>;

pub fn count_gates(netlist: &Netlist) -> GateCounts {
    let mut counts: GateCounts = GateFunction::ALL.iter().map(|&f| (f, 0)).collect();
    for gate in netlist.gates() {
        *counts.get_mut(&gate.function()).unwrap() += 1;
    }
    counts
}
