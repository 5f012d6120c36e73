//! Cartesian Genetic Programming representation of combinational circuits.
//!
//! A candidate circuit with `n_i` primary inputs and `n_o` primary outputs is a
//! linear array of `n_n` two-input nodes. Primary inputs occupy signal indices
//! `0..n_i`, node `j` drives signal `n_i + j`. Each node is three genes
//! `(fan_in_0, fan_in_1, function)`; the last `n_o` genes select the outputs.

mod gate;
mod genome;
mod netlist;
mod verilog;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use gate::{default_gate_set, minimal_gate_set, GateFunction, UnknownGateFunction};
pub use genome::{validate_genes, CgpGenome, GENOME_SCHEMA};
pub use netlist::{count_gates, Gate, GateCounts, Netlist};
pub use verilog::export_verilog;

/// Maximum fan-in of a node. Fixed: the encoding always stores two fan-in genes.
pub const NODE_ARITY: usize = 2;

/// Genes per node: `NODE_ARITY` fan-ins plus the function gene.
pub const GENES_PER_NODE: usize = NODE_ARITY + 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("invalid CGP parameters: {0}")]
    InvalidParams(String),
    #[error("invalid genome: {}", format_violations(.0))]
    InvalidGenome(Vec<Violation>),
    #[error("circuit needs {required} nodes but only {available} are configured")]
    NodeBudget { required: usize, available: usize },
    #[error("gate function {0} is not in the enabled function set")]
    FunctionNotEnabled(GateFunction),
    #[error("interface mismatch: expected {expected_inputs} inputs / {expected_outputs} outputs, found {inputs} / {outputs}")]
    InterfaceMismatch {
        expected_inputs: usize,
        expected_outputs: usize,
        inputs: usize,
        outputs: usize,
    },
    #[error("malformed netlist: {0}")]
    MalformedNetlist(String),
    #[error("netlist has no outputs")]
    NoOutputs,
    #[error("invalid Verilog module name `{0}`")]
    InvalidModuleName(String),
}

fn format_violations(v: &[Violation]) -> String {
    let shown: Vec<String> = v.iter().take(5).map(|x| x.to_string()).collect();
    let mut s = format!("{} violation(s): {}", v.len(), shown.join("; "));
    if v.len() > 5 {
        s.push_str("; ...");
    }
    s
}

/// One broken genome invariant, located by gene position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    GeneCount { expected: usize, found: usize },
    /// A fan-in pointing at the node itself or at a later signal.
    ForwardReference { gene: usize, node: usize, target: u32 },
    LevelsBack { gene: usize, node: usize, target: u32, levels_back: usize },
    FunctionOutOfRange { gene: usize, code: u32, available: usize },
    OutputOutOfRange { gene: usize, target: u32, signals: usize },
}

impl Violation {
    pub fn gene(&self) -> Option<usize> {
        match *self {
            Violation::GeneCount { .. } => None,
            Violation::ForwardReference { gene, .. }
            | Violation::LevelsBack { gene, .. }
            | Violation::FunctionOutOfRange { gene, .. }
            | Violation::OutputOutOfRange { gene, .. } => Some(gene),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GeneCount { expected, found } => {
                write!(f, "gene count: expected {expected}, found {found}")
            }
            Violation::ForwardReference { gene, node, target } => write!(
                f,
                "gene {gene}: feedback/forward reference from node {node} to signal {target}"
            ),
            Violation::LevelsBack { gene, node, target, levels_back } => write!(
                f,
                "gene {gene}: node {node} references signal {target} beyond levels-back {levels_back}"
            ),
            Violation::FunctionOutOfRange { gene, code, available } => write!(
                f,
                "gene {gene}: function index out of range ({code} >= {available})"
            ),
            Violation::OutputOutOfRange { gene, target, signals } => write!(
                f,
                "gene {gene}: output index out of range ({target} >= {signals})"
            ),
        }
    }
}

/// Shape of a CGP encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgpParams {
    pub inputs: usize,
    pub outputs: usize,
    pub nodes: usize,
    /// How many node positions back a fan-in may reach. Primary inputs are
    /// always reachable.
    pub levels_back: usize,
    /// Enabled functions; the function gene indexes this list.
    pub functions: Vec<GateFunction>,
}

impl CgpParams {
    /// Unrestricted levels-back and the default function set.
    pub fn new(inputs: usize, outputs: usize, nodes: usize) -> Self {
        CgpParams {
            inputs,
            outputs,
            nodes,
            levels_back: nodes,
            functions: default_gate_set(),
        }
    }

    pub fn with_levels_back(mut self, levels_back: usize) -> Self {
        self.levels_back = levels_back;
        self
    }

    pub fn with_functions(mut self, functions: Vec<GateFunction>) -> Self {
        self.functions = functions;
        self
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let bad = |m: &str| Err(CircuitError::InvalidParams(m.to_string()));
        if self.inputs == 0 {
            return bad("n_i must be at least 1");
        }
        if self.outputs == 0 {
            return bad("n_o must be at least 1");
        }
        if self.nodes == 0 {
            return bad("n_n must be at least 1");
        }
        if self.levels_back == 0 || self.levels_back > self.nodes {
            return bad("levels-back must lie in 1..=n_n");
        }
        if self.functions.is_empty() {
            return bad("function set is empty");
        }
        for (i, f) in self.functions.iter().enumerate() {
            if self.functions[..i].contains(f) {
                return Err(CircuitError::InvalidParams(format!(
                    "duplicate function {f} in function set"
                )));
            }
        }
        if u32::try_from(self.signal_count()).is_err() {
            return bad("too many signals");
        }
        Ok(())
    }

    /// Primary inputs plus nodes.
    pub fn signal_count(&self) -> usize {
        self.inputs + self.nodes
    }

    /// `n_n * (n_a + 1) + n_o`.
    pub fn genome_len(&self) -> usize {
        self.nodes * GENES_PER_NODE + self.outputs
    }

    pub fn function_code(&self, f: GateFunction) -> Option<u32> {
        self.functions.iter().position(|&g| g == f).map(|i| i as u32)
    }

    /// Lowest node signal index reachable from node `node`.
    pub(crate) fn lowest_reachable_node(&self, node: usize) -> usize {
        let own = self.inputs + node;
        own.saturating_sub(self.levels_back).max(self.inputs)
    }

    /// Whether `target` is a legal fan-in for node `node`.
    pub fn fan_in_legal(&self, node: usize, target: usize) -> bool {
        target < self.inputs
            || (target >= self.lowest_reachable_node(node) && target < self.inputs + node)
    }
}
