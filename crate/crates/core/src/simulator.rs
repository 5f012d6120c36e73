//! Exhaustive bit-parallel simulation.
//!
//! Every signal is a bit-plane of `2^n` bits packed into 64-bit words: bit `k`
//! of a plane is the signal's value under input vector `k`.

use crate::circuit::{CgpGenome, GateFunction, Netlist};

/// Largest input count accepted for exhaustive simulation.
pub const MAX_INPUTS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("exhaustive simulation cap exceeded: {0} inputs (allowed 1..={MAX_INPUTS})")]
    CapExceeded(usize),
    #[error("circuit has {circuit} inputs but planes cover {planes}")]
    InputMismatch { circuit: usize, planes: usize },
    #[error("expected {expected} output planes, found {found}")]
    PlaneCount { expected: usize, found: usize },
}

/// Within-word patterns for input planes 0..6.
const LOW_PLANE_MASKS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// A set of bit-planes over all `2^n_inputs` input vectors, stored plane-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedPlanes {
    n_inputs: usize,
    words_per_plane: usize,
    words: Vec<u64>,
}

impl PackedPlanes {
    fn zeroed(n_inputs: usize, planes: usize) -> Self {
        let words_per_plane = words_for(n_inputs);
        PackedPlanes {
            n_inputs,
            words_per_plane,
            words: vec![0; planes * words_per_plane],
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn words_per_plane(&self) -> usize {
        self.words_per_plane
    }

    pub fn plane_count(&self) -> usize {
        self.words.len() / self.words_per_plane
    }

    pub fn plane(&self, i: usize) -> &[u64] {
        &self.words[i * self.words_per_plane..(i + 1) * self.words_per_plane]
    }

    /// Number of input vectors, `2^n_inputs`.
    pub fn vectors(&self) -> usize {
        1 << self.n_inputs
    }

    /// Value of plane `i` under input vector `k`.
    pub fn bit(&self, i: usize, k: usize) -> bool {
        (self.plane(i)[k / 64] >> (k % 64)) & 1 == 1
    }

    /// Mask of valid bits in the final word of each plane.
    fn tail_mask(&self) -> u64 {
        tail_mask(self.n_inputs)
    }
}

fn words_for(n_inputs: usize) -> usize {
    (1usize << n_inputs).div_ceil(64)
}

fn tail_mask(n_inputs: usize) -> u64 {
    if n_inputs >= 6 {
        u64::MAX
    } else {
        (1u64 << (1 << n_inputs)) - 1
    }
}

/// Input planes where bit `k` of plane `i` equals bit `i` of `k`.
#[allow(clippy::needless_range_loop)]
pub fn build_input_planes(n_inputs: usize) -> Result<PackedPlanes, SimError> {
    if n_inputs == 0 || n_inputs > MAX_INPUTS {
        return Err(SimError::CapExceeded(n_inputs));
    }
    let mut planes = PackedPlanes::zeroed(n_inputs, n_inputs);
    let wpp = planes.words_per_plane;
    let mask = planes.tail_mask();
    for i in 0..n_inputs {
        let plane = &mut planes.words[i * wpp..(i + 1) * wpp];
        if i < 6 {
            plane.fill(LOW_PLANE_MASKS[i] & mask);
        } else {
            for (w, word) in plane.iter_mut().enumerate() {
                *word = if (w >> (i - 6)) & 1 == 1 { u64::MAX } else { 0 };
            }
        }
    }
    Ok(planes)
}

/// Reusable bit-parallel evaluator. Holds the input planes and a scratch
/// buffer so repeated evaluations do not reallocate.
#[derive(Debug, Clone)]
pub struct Simulator {
    inputs: PackedPlanes,
    scratch: Vec<u64>,
}

impl Simulator {
    pub fn new(n_inputs: usize) -> Result<Self, SimError> {
        Ok(Simulator {
            inputs: build_input_planes(n_inputs)?,
            scratch: Vec::new(),
        })
    }

    pub fn input_planes(&self) -> &PackedPlanes {
        &self.inputs
    }

    /// Simulates a netlist; returns one plane per output.
    pub fn run(&mut self, netlist: &Netlist) -> Result<PackedPlanes, SimError> {
        simulate_into(netlist, &self.inputs, &mut self.scratch)
    }

    pub fn run_genome(&mut self, genome: &CgpGenome) -> Result<PackedPlanes, SimError> {
        self.run(&genome.decode_active())
    }
}

/// Simulates the active part of `genome` over `planes`.
pub fn simulate(genome: &CgpGenome, planes: &PackedPlanes) -> Result<PackedPlanes, SimError> {
    simulate_netlist(&genome.decode_active(), planes)
}

pub fn simulate_netlist(netlist: &Netlist, planes: &PackedPlanes) -> Result<PackedPlanes, SimError> {
    simulate_into(netlist, planes, &mut Vec::new())
}

fn simulate_into(
    netlist: &Netlist,
    inputs: &PackedPlanes,
    scratch: &mut Vec<u64>,
) -> Result<PackedPlanes, SimError> {
    if netlist.inputs() != inputs.n_inputs || inputs.plane_count() != inputs.n_inputs {
        return Err(SimError::InputMismatch {
            circuit: netlist.inputs(),
            planes: inputs.n_inputs,
        });
    }
    let wpp = inputs.words_per_plane;
    let n_i = netlist.inputs();
    let gate_words = netlist.gates().len() * wpp;
    scratch.clear();
    scratch.resize(gate_words, 0);

    for (g, gate) in netlist.gates().iter().enumerate() {
        let (done, rest) = scratch.split_at_mut(g * wpp);
        let out = &mut rest[..wpp];
        let [a, b] = gate.raw_fan_ins();
        let plane = |s: usize| -> &[u64] {
            if s < n_i {
                inputs.plane(s)
            } else {
                &done[(s - n_i) * wpp..(s - n_i + 1) * wpp]
            }
        };
        let (pa, pb) = (plane(a), plane(b));
        match gate.function() {
            GateFunction::Buf => out.copy_from_slice(pa),
            GateFunction::Inv => zip_map1(out, pa, |x| !x),
            GateFunction::And => zip_map2(out, pa, pb, |x, y| x & y),
            GateFunction::Or => zip_map2(out, pa, pb, |x, y| x | y),
            GateFunction::Xor => zip_map2(out, pa, pb, |x, y| x ^ y),
            GateFunction::Nand => zip_map2(out, pa, pb, |x, y| !(x & y)),
            GateFunction::Nor => zip_map2(out, pa, pb, |x, y| !(x | y)),
            GateFunction::Xnor => zip_map2(out, pa, pb, |x, y| !(x ^ y)),
            GateFunction::Const0 => out.fill(0),
            GateFunction::Const1 => out.fill(u64::MAX),
        }
    }

    let mut result = PackedPlanes::zeroed(inputs.n_inputs, netlist.outputs().len());
    let mask = inputs.tail_mask();
    for (j, &o) in netlist.outputs().iter().enumerate() {
        let src = if o < n_i {
            inputs.plane(o)
        } else {
            &scratch[(o - n_i) * wpp..(o - n_i + 1) * wpp]
        };
        let dst = &mut result.words[j * wpp..(j + 1) * wpp];
        dst.copy_from_slice(src);
        dst[wpp - 1] &= mask;
    }
    Ok(result)
}

#[inline]
fn zip_map1(out: &mut [u64], a: &[u64], f: impl Fn(u64) -> u64) {
    for (o, &x) in out.iter_mut().zip(a) {
        *o = f(x);
    }
}

#[inline]
fn zip_map2(out: &mut [u64], a: &[u64], b: &[u64], f: impl Fn(u64, u64) -> u64) {
    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
        *o = f(x, y);
    }
}

/// Per-input integer outputs: `values[k] = int(f(x_k))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputInts {
    values: Vec<u64>,
    width: usize,
}

impl OutputInts {
    pub fn new(values: Vec<u64>, width: usize) -> Self {
        debug_assert!(width >= 64 || values.iter().all(|&v| v < (1u64 << width)));
        OutputInts { values, width }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Output bit count `m`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reassembles per-vector integers from `m` output planes; plane `j` is bit `j`.
pub fn extract_output_ints(planes: &PackedPlanes, m: usize) -> Result<OutputInts, SimError> {
    if planes.plane_count() != m {
        return Err(SimError::PlaneCount {
            expected: m,
            found: planes.plane_count(),
        });
    }
    let n = planes.vectors();
    let mut values = vec![0u64; n];
    for j in 0..m {
        for (w, &word) in planes.plane(j).iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let t = bits.trailing_zeros() as usize;
                values[w * 64 + t] |= 1 << j;
                bits &= bits - 1;
            }
        }
    }
    Ok(OutputInts::new(values, m))
}

/// Simulates a genome from scratch and returns its integer outputs.
pub fn evaluate_genome(genome: &CgpGenome) -> Result<OutputInts, SimError> {
    let planes = build_input_planes(genome.params().inputs)?;
    let out = simulate(genome, &planes)?;
    extract_output_ints(&out, genome.params().outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CgpParams, Gate};

    #[test]
    fn one_input_plane() {
        let p = build_input_planes(1).unwrap();
        assert_eq!(p.words_per_plane(), 1);
        assert_eq!(p.plane(0), &[0b10]);
    }

    #[test]
    fn plane_six_of_seven_inputs() {
        let p = build_input_planes(7).unwrap();
        assert_eq!(p.plane(6), &[0, u64::MAX]);
    }

    #[test]
    fn sixteen_inputs_use_1024_words() {
        let p = build_input_planes(16).unwrap();
        assert_eq!(p.words_per_plane(), 1024);
        assert_eq!(p.plane_count(), 16);
    }

    #[test]
    fn input_plane_bits_follow_vector_index() {
        for n in 1..=9 {
            let p = build_input_planes(n).unwrap();
            for i in 0..n {
                for k in 0..(1usize << n) {
                    assert_eq!(p.bit(i, k), (k >> i) & 1 == 1, "n={n} i={i} k={k}");
                }
                // trailing bits zero
                let total = p.words_per_plane() * 64;
                for k in (1usize << n)..total {
                    assert!(!p.bit(i, k));
                }
            }
        }
    }

    #[test]
    fn cap() {
        assert_eq!(build_input_planes(0), Err(SimError::CapExceeded(0)));
        assert_eq!(build_input_planes(25), Err(SimError::CapExceeded(25)));
    }

    #[test]
    fn constant_outputs_keep_tail_bits_clear() {
        let nl = Netlist::new(
            2,
            vec![Gate::new(GateFunction::Const1, &[]), Gate::new(GateFunction::Inv, &[0])],
            vec![2, 3],
        )
        .unwrap();
        let planes = build_input_planes(2).unwrap();
        let out = simulate_netlist(&nl, &planes).unwrap();
        assert_eq!(out.plane(0), &[0b1111]);
        assert_eq!(out.plane(1), &[0b0101]);
    }

    #[test]
    fn wire_through_copies_input_planes() {
        let params = CgpParams::new(7, 7, 3);
        let mut genes = vec![0u32; params.genome_len()];
        let n = genes.len();
        for j in 0..7 {
            genes[n - 7 + j] = j as u32;
        }
        let g = CgpGenome::new(params, genes).unwrap();
        let planes = build_input_planes(7).unwrap();
        let out = simulate(&g, &planes).unwrap();
        assert_eq!(out, planes);
    }

    #[test]
    fn mismatched_inputs() {
        let nl = Netlist::new(3, vec![], vec![0]).unwrap();
        let planes = build_input_planes(4).unwrap();
        assert!(matches!(
            simulate_netlist(&nl, &planes),
            Err(SimError::InputMismatch { circuit: 3, planes: 4 })
        ));
    }

    #[test]
    fn extraction() {
        let planes = build_input_planes(5).unwrap();
        let zero = PackedPlanes::zeroed(5, 3);
        assert!(extract_output_ints(&zero, 3).unwrap().values().iter().all(|&v| v == 0));

        let nl = Netlist::new(5, vec![], vec![0]).unwrap();
        let out = simulate_netlist(&nl, &planes).unwrap();
        let ints = extract_output_ints(&out, 1).unwrap();
        for (k, &v) in ints.values().iter().enumerate() {
            assert_eq!(v, k as u64 % 2);
        }
        // identity on all inputs
        let ints = extract_output_ints(&planes, 5).unwrap();
        assert_eq!(ints.values(), (0..32).collect::<Vec<u64>>().as_slice());
        assert!(extract_output_ints(&planes, 4).is_err());
    }
}
