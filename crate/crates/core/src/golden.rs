//! Exact reference circuits emitted directly as CGP genomes.
//!
//! Operand packing: operand A occupies inputs `0..w`, operand B inputs `w..2w`,
//! so input vector `k` encodes `a = k mod 2^w` and `b = k >> w`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::{CgpGenome, CgpParams, CircuitError, Gate, GateFunction, Netlist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoldenKind {
    Adder,
    Multiplier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenSpec {
    pub kind: GoldenKind,
    /// Bits per operand.
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GoldenError {
    #[error("operand width must be at least 1")]
    ZeroWidth,
    #[error("operand width {0} exceeds the supported maximum of 12")]
    TooWide(usize),
    #[error("golden {kind:?} of width {width} needs {required} nodes, but n_n = {available}")]
    TooFewNodes {
        kind: GoldenKind,
        width: usize,
        required: usize,
        available: usize,
    },
    #[error("golden circuit needs {needed} inputs / {needed_out} outputs, params have {inputs} / {outputs}")]
    Interface {
        needed: usize,
        needed_out: usize,
        inputs: usize,
        outputs: usize,
    },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

impl GoldenSpec {
    pub fn multiplier(width: usize) -> Self {
        GoldenSpec { kind: GoldenKind::Multiplier, width }
    }

    pub fn adder(width: usize) -> Self {
        GoldenSpec { kind: GoldenKind::Adder, width }
    }

    pub fn inputs(&self) -> usize {
        2 * self.width
    }

    pub fn outputs(&self) -> usize {
        match self.kind {
            GoldenKind::Adder => self.width + 1,
            GoldenKind::Multiplier => 2 * self.width,
        }
    }

    /// Reference arithmetic on the packed input vector `k`.
    pub fn reference(&self, k: u64) -> u64 {
        let mask = (1u64 << self.width) - 1;
        let (a, b) = (k & mask, k >> self.width);
        match self.kind {
            GoldenKind::Adder => a + b,
            GoldenKind::Multiplier => a * b,
        }
    }

    /// Params with the right interface, default function set and unrestricted
    /// levels-back.
    pub fn params(&self, nodes: usize) -> CgpParams {
        CgpParams::new(self.inputs(), self.outputs(), nodes)
    }

    pub fn validate(&self) -> Result<(), GoldenError> {
        if self.width == 0 {
            return Err(GoldenError::ZeroWidth);
        }
        // 2w inputs must stay within the exhaustive simulation cap
        if self.width > 12 {
            return Err(GoldenError::TooWide(self.width));
        }
        Ok(())
    }

    /// Gate-level netlist of the exact circuit.
    pub fn netlist(&self, functions: &[GateFunction]) -> Result<Netlist, GoldenError> {
        self.validate()?;
        let mut b = Builder::new(self.inputs(), functions);
        let w = self.width;
        let outputs = match self.kind {
            GoldenKind::Adder => ripple_carry_adder(&mut b, w)?,
            GoldenKind::Multiplier => array_multiplier(&mut b, w)?,
        };
        Ok(Netlist::new(self.inputs(), b.gates, outputs)?)
    }
}

/// Builds the exact circuit for `spec` and encodes it into a full-length genome
/// under `params`. Unused nodes hold inactive placeholder genes.
pub fn generate_golden(
    spec: &GoldenSpec,
    params: impl Into<Arc<CgpParams>>,
) -> Result<CgpGenome, GoldenError> {
    let params = params.into();
    params.validate()?;
    if params.inputs != spec.inputs() || params.outputs != spec.outputs() {
        return Err(GoldenError::Interface {
            needed: spec.inputs(),
            needed_out: spec.outputs(),
            inputs: params.inputs,
            outputs: params.outputs,
        });
    }
    let netlist = spec.netlist(&params.functions)?;
    if netlist.gates().len() > params.nodes {
        return Err(GoldenError::TooFewNodes {
            kind: spec.kind,
            width: spec.width,
            required: netlist.gates().len(),
            available: params.nodes,
        });
    }
    Ok(CgpGenome::from_netlist(&netlist, params)?)
}

struct Builder<'a> {
    inputs: usize,
    functions: &'a [GateFunction],
    gates: Vec<Gate>,
}

impl<'a> Builder<'a> {
    fn new(inputs: usize, functions: &'a [GateFunction]) -> Self {
        Builder { inputs, functions, gates: Vec::new() }
    }

    fn gate(&mut self, f: GateFunction, fan_ins: &[usize]) -> Result<usize, GoldenError> {
        if !self.functions.contains(&f) {
            return Err(CircuitError::FunctionNotEnabled(f).into());
        }
        self.gates.push(Gate::new(f, fan_ins));
        Ok(self.inputs + self.gates.len() - 1)
    }

    fn zero(&mut self) -> Result<usize, GoldenError> {
        if self.functions.contains(&GateFunction::Const0) {
            self.gate(GateFunction::Const0, &[])
        } else {
            self.gate(GateFunction::Xor, &[0, 0])
        }
    }

    fn half_adder(&mut self, a: usize, b: usize) -> Result<(usize, usize), GoldenError> {
        let s = self.gate(GateFunction::Xor, &[a, b])?;
        let c = self.gate(GateFunction::And, &[a, b])?;
        Ok((s, c))
    }

    /// 2 XOR, 2 AND, 1 OR.
    fn full_adder(&mut self, a: usize, b: usize, cin: usize) -> Result<(usize, usize), GoldenError> {
        let t = self.gate(GateFunction::Xor, &[a, b])?;
        let s = self.gate(GateFunction::Xor, &[t, cin])?;
        let g = self.gate(GateFunction::And, &[a, b])?;
        let p = self.gate(GateFunction::And, &[t, cin])?;
        let c = self.gate(GateFunction::Or, &[g, p])?;
        Ok((s, c))
    }

    /// Sums one to three bits of equal weight.
    fn add_bits(&mut self, bits: &[usize]) -> Result<(usize, Option<usize>), GoldenError> {
        match *bits {
            [x] => Ok((x, None)),
            [x, y] => self.half_adder(x, y).map(|(s, c)| (s, Some(c))),
            [x, y, z] => self.full_adder(x, y, z).map(|(s, c)| (s, Some(c))),
            _ => unreachable!("column height {}", bits.len()),
        }
    }
}

/// Half adder at bit 0, full adders above it; the last carry is the MSB.
fn ripple_carry_adder(b: &mut Builder, w: usize) -> Result<Vec<usize>, GoldenError> {
    let mut outputs = Vec::with_capacity(w + 1);
    let (s, mut carry) = b.half_adder(0, w)?;
    outputs.push(s);
    for i in 1..w {
        let (s, c) = b.full_adder(i, w + i, carry)?;
        outputs.push(s);
        carry = c;
    }
    outputs.push(carry);
    Ok(outputs)
}

/// Carry-save array multiplier with a ripple-carry final row.
#[allow(clippy::needless_range_loop)]
fn array_multiplier(b: &mut Builder, w: usize) -> Result<Vec<usize>, GoldenError> {
    let mut pp = vec![vec![0usize; w]; w];
    for (i, row) in pp.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            // a_j & b_i, weight i + j
            *cell = b.gate(GateFunction::And, &[j, w + i])?;
        }
    }
    let mut outputs = Vec::with_capacity(2 * w);
    if w == 1 {
        outputs.push(pp[0][0]);
        outputs.push(b.zero()?);
        return Ok(outputs);
    }

    // sums[j] has weight i + j and carries[j] weight i + j + 1 after row i
    let mut sums: Vec<usize> = pp[0].clone();
    let mut carries: Vec<Option<usize>> = vec![None; w];
    outputs.push(sums[0]);
    for row in pp.iter().skip(1) {
        let mut next_sums = Vec::with_capacity(w);
        let mut next_carries = Vec::with_capacity(w);
        for j in 0..w {
            let mut column = vec![row[j]];
            column.extend(sums.get(j + 1).copied());
            column.extend(carries[j]);
            let (s, c) = b.add_bits(&column)?;
            next_sums.push(s);
            next_carries.push(c);
        }
        outputs.push(next_sums[0]);
        sums = next_sums;
        carries = next_carries;
    }

    // remaining sums[1..] and carries hold weights w .. 2w-1
    let mut ripple: Option<usize> = None;
    for j in 0..w {
        let mut column: Vec<usize> = Vec::with_capacity(3);
        column.extend(sums.get(j + 1).copied());
        column.extend(carries[j]);
        column.extend(ripple);
        if column.is_empty() {
            outputs.push(b.zero()?);
            continue;
        }
        let (s, c) = b.add_bits(&column)?;
        outputs.push(s);
        ripple = c;
    }
    Ok(outputs)
}
