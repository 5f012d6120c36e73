use std::num::NonZeroUsize;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CgpParams, CircuitError, Gate, GateFunction, Netlist, Violation, GENES_PER_NODE};

/// Schema identifier written into serialized genomes.
pub const GENOME_SCHEMA: &str = "axcgp-genome/v1";

/// A validated CGP chromosome.
///
/// Genes are stored flat: `n_n` triples `(fan_in_0, fan_in_1, function)`
/// followed by `n_o` output genes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GenomeFile", into = "GenomeFile")]
pub struct CgpGenome {
    params: Arc<CgpParams>,
    genes: Vec<u32>,
}

/// Checks every genome invariant and reports all violations found.
pub fn validate_genes(params: &CgpParams, genes: &[u32]) -> Result<(), Vec<Violation>> {
    let expected = params.genome_len();
    if genes.len() != expected {
        return Err(vec![Violation::GeneCount {
            expected,
            found: genes.len(),
        }]);
    }
    let mut violations = Vec::new();
    for node in 0..params.nodes {
        let base = node * GENES_PER_NODE;
        let own = params.inputs + node;
        for slot in 0..2 {
            let gene = base + slot;
            let target = genes[gene];
            let t = target as usize;
            if t >= own {
                violations.push(Violation::ForwardReference { gene, node, target });
            } else if !params.fan_in_legal(node, t) {
                violations.push(Violation::LevelsBack {
                    gene,
                    node,
                    target,
                    levels_back: params.levels_back,
                });
            }
        }
        let code = genes[base + 2];
        if code as usize >= params.functions.len() {
            violations.push(Violation::FunctionOutOfRange {
                gene: base + 2,
                code,
                available: params.functions.len(),
            });
        }
    }
    let signals = params.signal_count();
    for (k, &target) in genes[params.nodes * GENES_PER_NODE..].iter().enumerate() {
        if target as usize >= signals {
            violations.push(Violation::OutputOutOfRange {
                gene: params.nodes * GENES_PER_NODE + k,
                target,
                signals,
            });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

impl CgpGenome {
    pub fn new(params: impl Into<Arc<CgpParams>>, genes: Vec<u32>) -> Result<Self, CircuitError> {
        let params = params.into();
        params.validate()?;
        validate_genes(&params, &genes).map_err(CircuitError::InvalidGenome)?;
        Ok(CgpGenome { params, genes })
    }

    /// Encodes a netlist into the first `gates.len()` nodes. The remaining
    /// nodes get placeholder genes `(0, 0, 0)`, which are inactive.
    pub fn from_netlist(
        netlist: &Netlist,
        params: impl Into<Arc<CgpParams>>,
    ) -> Result<Self, CircuitError> {
        let params = params.into();
        params.validate()?;
        if netlist.inputs() != params.inputs || netlist.outputs().len() != params.outputs {
            return Err(CircuitError::InterfaceMismatch {
                expected_inputs: params.inputs,
                expected_outputs: params.outputs,
                inputs: netlist.inputs(),
                outputs: netlist.outputs().len(),
            });
        }
        if netlist.gates().len() > params.nodes {
            return Err(CircuitError::NodeBudget {
                required: netlist.gates().len(),
                available: params.nodes,
            });
        }
        let mut genes = vec![0u32; params.genome_len()];
        for (j, gate) in netlist.gates().iter().enumerate() {
            let code = params
                .function_code(gate.function())
                .ok_or(CircuitError::FunctionNotEnabled(gate.function()))?;
            let base = j * GENES_PER_NODE;
            for (slot, &src) in gate.fan_ins().iter().enumerate() {
                genes[base + slot] = src as u32;
            }
            genes[base + 2] = code;
        }
        let out_base = params.nodes * GENES_PER_NODE;
        for (k, &o) in netlist.outputs().iter().enumerate() {
            genes[out_base + k] = o as u32;
        }
        Self::new(params, genes)
    }

    pub fn params(&self) -> &CgpParams {
        &self.params
    }

    pub fn shared_params(&self) -> &Arc<CgpParams> {
        &self.params
    }

    pub fn genes(&self) -> &[u32] {
        &self.genes
    }

    /// `(fan_in_0, fan_in_1, function)` of node `j`.
    pub fn node(&self, j: usize) -> (usize, usize, GateFunction) {
        let base = j * GENES_PER_NODE;
        let f = self.params.functions[self.genes[base + 2] as usize];
        (self.genes[base] as usize, self.genes[base + 1] as usize, f)
    }

    pub fn output_genes(&self) -> &[u32] {
        &self.genes[self.params.nodes * GENES_PER_NODE..]
    }

    /// Marks which nodes are backward-reachable from an output.
    pub fn active_nodes(&self) -> Vec<bool> {
        let n_i = self.params.inputs;
        let mut active = vec![false; self.params.nodes];
        for &o in self.output_genes() {
            if o as usize >= n_i {
                active[o as usize - n_i] = true;
            }
        }
        for j in (0..self.params.nodes).rev() {
            if !active[j] {
                continue;
            }
            let (a, b, f) = self.node(j);
            for &src in [a, b].iter().take(f.arity()) {
                if src >= n_i {
                    active[src - n_i] = true;
                }
            }
        }
        active
    }

    /// Netlist of exactly the active nodes, in node order.
    pub fn decode_active(&self) -> Netlist {
        let n_i = self.params.inputs;
        let active = self.active_nodes();
        // signal index in the genome -> signal index in the netlist
        let mut remap: Vec<usize> = (0..self.params.signal_count()).collect();
        let mut gates = Vec::with_capacity(active.iter().filter(|&&a| a).count());
        for j in 0..self.params.nodes {
            if !active[j] {
                continue;
            }
            let (a, b, f) = self.node(j);
            let fan_ins = [a, b];
            let mapped: Vec<usize> = fan_ins[..f.arity()].iter().map(|&s| remap[s]).collect();
            remap[n_i + j] = n_i + gates.len();
            gates.push(Gate::new(f, &mapped));
        }
        let outputs = self.output_genes().iter().map(|&o| remap[o as usize]).collect();
        Netlist::from_parts_unchecked(n_i, gates, outputs)
    }

    /// Point mutation: `h` distinct gene positions are resampled uniformly
    /// over their legal ranges. The new value may equal the old one.
    pub fn mutate<R: Rng + ?Sized>(&self, h: NonZeroUsize, rng: &mut R) -> CgpGenome {
        let p = &*self.params;
        let len = self.genes.len();
        let count = h.get().min(len);
        let mut genes = self.genes.clone();
        let node_genes = p.nodes * GENES_PER_NODE;
        for pos in index::sample(rng, len, count).into_iter() {
            genes[pos] = if pos < node_genes {
                let node = pos / GENES_PER_NODE;
                if pos % GENES_PER_NODE == 2 {
                    rng.random_range(0..p.functions.len()) as u32
                } else {
                    sample_fan_in(p, node, rng)
                }
            } else {
                rng.random_range(0..p.signal_count()) as u32
            };
        }
        debug_assert!(validate_genes(p, &genes).is_ok());
        CgpGenome {
            params: Arc::clone(&self.params),
            genes,
        }
    }
}

fn sample_fan_in<R: Rng + ?Sized>(p: &CgpParams, node: usize, rng: &mut R) -> u32 {
    let lowest = p.lowest_reachable_node(node);
    let own = p.inputs + node;
    let choices = p.inputs + (own - lowest);
    let r = rng.random_range(0..choices);
    let target = if r < p.inputs { r } else { lowest + (r - p.inputs) };
    target as u32
}

/// On-disk form of a genome.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenomeFile {
    schema: String,
    params: ParamsHeader,
    genes: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsHeader {
    inputs: usize,
    outputs: usize,
    nodes: usize,
    arity: usize,
    levels_back: usize,
    functions: Vec<GateFunction>,
}

impl From<CgpGenome> for GenomeFile {
    fn from(g: CgpGenome) -> Self {
        let p = &*g.params;
        GenomeFile {
            schema: GENOME_SCHEMA.to_string(),
            params: ParamsHeader {
                inputs: p.inputs,
                outputs: p.outputs,
                nodes: p.nodes,
                arity: super::NODE_ARITY,
                levels_back: p.levels_back,
                functions: p.functions.clone(),
            },
            genes: g.genes,
        }
    }
}

impl TryFrom<GenomeFile> for CgpGenome {
    type Error = String;

    fn try_from(f: GenomeFile) -> Result<Self, Self::Error> {
        if f.schema != GENOME_SCHEMA {
            return Err(format!(
                "field `schema`: expected \"{GENOME_SCHEMA}\", found \"{}\"",
                f.schema
            ));
        }
        if f.params.arity != super::NODE_ARITY {
            return Err(format!(
                "field `params.arity`: only arity {} is supported, found {}",
                super::NODE_ARITY,
                f.params.arity
            ));
        }
        let params = CgpParams {
            inputs: f.params.inputs,
            outputs: f.params.outputs,
            nodes: f.params.nodes,
            levels_back: f.params.levels_back,
            functions: f.params.functions,
        };
        CgpGenome::new(params, f.genes).map_err(|e| format!("field `genes`: {e}"))
    }
}
