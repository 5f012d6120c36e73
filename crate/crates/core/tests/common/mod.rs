//! Reference implementations shared by the integration tests. Everything here
//! works one input vector at a time and avoids the library's fast paths.
#![allow(dead_code)]

use std::collections::BTreeMap;

use axcgp::circuit::{default_gate_set, CgpGenome, CgpParams, GateFunction, Netlist};
use axcgp::golden::GoldenSpec;
use rand::Rng;

/// Uniform random genome with every gene in its legal range.
pub fn random_genome<R: Rng>(params: &CgpParams, rng: &mut R) -> CgpGenome {
    let mut genes = Vec::with_capacity(params.genome_len());
    for node in 0..params.nodes {
        let own = params.inputs + node;
        let lo = own.saturating_sub(params.levels_back).max(params.inputs);
        // primary inputs, then the reachable window of earlier nodes
        let choices = params.inputs + (own - lo);
        for _ in 0..2 {
            let k = rng.random_range(0..choices);
            let target = if k < params.inputs { k } else { lo + (k - params.inputs) };
            genes.push(target as u32);
        }
        genes.push(rng.random_range(0..params.functions.len()) as u32);
    }
    for _ in 0..params.outputs {
        genes.push(rng.random_range(0..params.inputs + params.nodes) as u32);
    }
    CgpGenome::new(params.clone(), genes).expect("generator produces legal genes")
}

pub fn random_params<R: Rng>(rng: &mut R, inputs: usize, max_outputs: usize) -> CgpParams {
    let outputs = rng.random_range(1..=max_outputs);
    let nodes = rng.random_range(1..=40);
    let levels_back = rng.random_range(1..=nodes);
    CgpParams::new(inputs, outputs, nodes)
        .with_levels_back(levels_back)
        .with_functions(default_gate_set())
}

fn apply(f: GateFunction, a: bool, b: bool) -> bool {
    match f {
        GateFunction::Buf => a,
        GateFunction::Inv => !a,
        GateFunction::And => a && b,
        GateFunction::Or => a || b,
        GateFunction::Xor => a != b,
        GateFunction::Nand => !(a && b),
        GateFunction::Nor => !(a || b),
        GateFunction::Xnor => a == b,
        GateFunction::Const0 => false,
        GateFunction::Const1 => true,
    }
}

/// Interprets every node of the genome (active or not) for input vector `x`.
pub fn interpret_genome(genome: &CgpGenome, x: u64) -> u64 {
    let p = genome.params();
    let mut signals: Vec<bool> = (0..p.inputs).map(|i| (x >> i) & 1 == 1).collect();
    for j in 0..p.nodes {
        let (a, b, f) = genome.node(j);
        let v = apply(f, signals[a], signals[b]);
        signals.push(v);
    }
    genome
        .output_genes()
        .iter()
        .enumerate()
        .map(|(k, &s)| (signals[s as usize] as u64) << k)
        .sum()
}

pub fn interpret_all(genome: &CgpGenome) -> Vec<u64> {
    (0..1u64 << genome.params().inputs).map(|x| interpret_genome(genome, x)).collect()
}

pub fn interpret_netlist(nl: &Netlist, x: u64) -> u64 {
    let mut signals: Vec<bool> = (0..nl.inputs()).map(|i| (x >> i) & 1 == 1).collect();
    for g in nl.gates() {
        let fi = g.fan_ins();
        let a = fi.first().is_some_and(|&s| signals[s]);
        let b = fi.get(1).is_some_and(|&s| signals[s]);
        signals.push(apply(g.function(), a, b));
    }
    nl.outputs()
        .iter()
        .enumerate()
        .map(|(k, &s)| (signals[s] as u64) << k)
        .sum()
}

/// Error metrics computed straight from their definitions.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveMetrics {
    pub wce: u64,
    pub mae: f64,
    pub er: f64,
    pub mre: f64,
    pub acc0: bool,
    pub avg: f64,
    pub stddev: f64,
    pub histogram: BTreeMap<i64, u64>,
}

pub fn naive_metrics(golden: &[u64], cand: &[u64]) -> NaiveMetrics {
    assert_eq!(golden.len(), cand.len());
    let n = golden.len() as f64;
    let errors: Vec<i64> = golden.iter().zip(cand).map(|(&g, &c)| g as i64 - c as i64).collect();
    let mut histogram = BTreeMap::new();
    for &e in &errors {
        *histogram.entry(e).or_insert(0) += 1;
    }
    let avg = errors.iter().map(|&e| e as f64).sum::<f64>() / n;
    let var = errors.iter().map(|&e| (e as f64 - avg).powi(2)).sum::<f64>() / n;
    NaiveMetrics {
        wce: errors.iter().map(|e| e.unsigned_abs()).max().unwrap_or(0),
        mae: errors.iter().map(|e| e.unsigned_abs() as f64).sum::<f64>() / n,
        er: errors.iter().filter(|&&e| e != 0).count() as f64 / n,
        mre: golden
            .iter()
            .zip(&errors)
            .map(|(&g, &e)| e.unsigned_abs() as f64 / g.max(1) as f64)
            .sum::<f64>()
            / n,
        acc0: golden.iter().zip(cand).all(|(&g, &c)| g != 0 || c == 0),
        avg,
        stddev: var.sqrt(),
        histogram,
    }
}

/// Independent functional check of a multiplier/adder netlist.
pub fn reference_outputs(spec: &GoldenSpec) -> Vec<u64> {
    let w = spec.width;
    let mask = (1u64 << w) - 1;
    (0..1u64 << (2 * w))
        .map(|x| {
            let (a, b) = (x & mask, x >> w);
            match spec.kind {
                axcgp::golden::GoldenKind::Multiplier => a * b,
                axcgp::golden::GoldenKind::Adder => a + b,
            }
        })
        .collect()
}

/// All (power, error) pairs not dominated by any other, by direct comparison.
pub fn brute_force_front(points: &[(f64, f64)]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            !points.iter().any(|&q| {
                let p = points[i];
                q.0 <= p.0 && q.1 <= p.1 && (q.0 < p.0 || q.1 < p.1)
            })
        })
        .collect()
}
