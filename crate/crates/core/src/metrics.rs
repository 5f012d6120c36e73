//! Arithmetic error metrics of a candidate against the golden circuit.
//!
//! The signed error of input vector `x` is `e(x) = int(f_G(x)) - int(f_C(x))`.
//! Sums over all `2^n` vectors are kept as exact integers; the mean-style
//! metrics divide at the boundary.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};

use crate::simulator::OutputInts;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("output length mismatch: golden has {golden} values, candidate {candidate}")]
    LengthMismatch { golden: usize, candidate: usize },
    #[error("output width mismatch: golden is {golden} bits, candidate {candidate}")]
    WidthMismatch { golden: usize, candidate: usize },
    #[error("output count {0} is not a power of two")]
    NotExhaustive(usize),
    #[error("gauss sigma must be a finite value >= 1, got {0}")]
    InvalidSigma(f64),
}

/// Error summary without the histogram. This is what the search loop computes
/// for every candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    n_inputs: usize,
    n_outputs: usize,
    wce: u64,
    sum_abs: u64,
    sum_signed: i64,
    sum_sq: u128,
    erroneous: u64,
    relative_sum: f64,
    acc0: bool,
}

fn check_shapes(golden: &OutputInts, cand: &OutputInts) -> Result<usize, MetricsError> {
    if golden.len() != cand.len() {
        return Err(MetricsError::LengthMismatch {
            golden: golden.len(),
            candidate: cand.len(),
        });
    }
    if golden.width() != cand.width() {
        return Err(MetricsError::WidthMismatch {
            golden: golden.width(),
            candidate: cand.width(),
        });
    }
    if !golden.len().is_power_of_two() {
        return Err(MetricsError::NotExhaustive(golden.len()));
    }
    Ok(golden.len().trailing_zeros() as usize)
}

pub fn error_stats(golden: &OutputInts, cand: &OutputInts) -> Result<ErrorStats, MetricsError> {
    let n_inputs = check_shapes(golden, cand)?;
    let mut s = ErrorStats {
        n_inputs,
        n_outputs: golden.width(),
        wce: 0,
        sum_abs: 0,
        sum_signed: 0,
        sum_sq: 0,
        erroneous: 0,
        relative_sum: 0.0,
        acc0: true,
    };
    for (&g, &c) in golden.values().iter().zip(cand.values()) {
        if g == c {
            continue;
        }
        let e = g as i64 - c as i64;
        let abs = e.unsigned_abs();
        s.erroneous += 1;
        s.wce = s.wce.max(abs);
        s.sum_abs += abs;
        s.sum_signed += e;
        s.sum_sq += (abs as u128) * (abs as u128);
        s.relative_sum += abs as f64 / g.max(1) as f64;
        if g == 0 {
            s.acc0 = false;
        }
    }
    Ok(s)
}

impl ErrorStats {
    /// Input bit count `n`.
    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    /// Output bit count `m`.
    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn vectors(&self) -> u64 {
        1u64 << self.n_inputs
    }

    pub fn wce(&self) -> u64 {
        self.wce
    }

    /// `Σ |e|` over all vectors.
    pub fn sum_abs_error(&self) -> u64 {
        self.sum_abs
    }

    /// `Σ e` over all vectors.
    pub fn sum_signed_error(&self) -> i64 {
        self.sum_signed
    }

    pub fn sum_squared_error(&self) -> u128 {
        self.sum_sq
    }

    /// Number of vectors where the outputs differ.
    pub fn erroneous_inputs(&self) -> u64 {
        self.erroneous
    }

    pub fn mae(&self) -> f64 {
        self.sum_abs as f64 / self.vectors() as f64
    }

    pub fn er(&self) -> f64 {
        self.erroneous as f64 / self.vectors() as f64
    }

    /// Mean of `|e| / max(int(f_G), 1)`.
    pub fn mre(&self) -> f64 {
        self.relative_sum / self.vectors() as f64
    }

    pub fn acc0(&self) -> bool {
        self.acc0
    }

    /// Signed mean error; positive means the candidate under-approximates.
    pub fn avg(&self) -> f64 {
        self.sum_signed as f64 / self.vectors() as f64
    }

    /// Population standard deviation of the signed error, zeros included.
    pub fn stddev(&self) -> f64 {
        let n = self.vectors() as i128;
        let num = self.sum_sq as i128 * n - (self.sum_signed as i128) * (self.sum_signed as i128);
        ((num.max(0) as f64) / (n as f64 * n as f64)).sqrt()
    }

    fn output_range(&self) -> f64 {
        2f64.powi(self.n_outputs as i32)
    }

    pub fn relative(&self) -> RelativeProfile {
        let range = self.output_range();
        RelativeProfile {
            wce: 100.0 * self.wce as f64 / range,
            mae: 100.0 * self.mae() / range,
            er: 100.0 * self.er(),
            mre: 100.0 * self.mre(),
            avg: 100.0 * self.avg().abs() / range,
        }
    }

    // Threshold checks in relative percent. Each compares an integer sum
    // against `pct * 2^k`, so the boundary is decided without division.

    pub fn wce_within(&self, pct: f64) -> bool {
        100.0 * self.wce as f64 <= pct * self.output_range()
    }

    pub fn mae_within(&self, pct: f64) -> bool {
        100.0 * self.sum_abs as f64 <= pct * self.output_range() * self.vectors() as f64
    }

    pub fn er_within(&self, pct: f64) -> bool {
        100.0 * self.erroneous as f64 <= pct * self.vectors() as f64
    }

    pub fn mre_within(&self, pct: f64) -> bool {
        100.0 * self.mre() <= pct
    }

    /// Bounds `|avg|`.
    pub fn avg_within(&self, pct: f64) -> bool {
        100.0 * self.sum_signed.unsigned_abs() as f64
            <= pct * self.output_range() * self.vectors() as f64
    }
}

/// Metrics relative to the output range `2^m` (ER and MRE relative to 1),
/// in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeProfile {
    pub wce: f64,
    pub mae: f64,
    pub er: f64,
    pub mre: f64,
    /// `100 * |avg| / 2^m`.
    pub avg: f64,
}

/// Full error profile including the signed-error histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorProfile {
    stats: ErrorStats,
    histogram: BTreeMap<i64, u64>,
}

pub fn error_profile(golden: &OutputInts, cand: &OutputInts) -> Result<ErrorProfile, MetricsError> {
    let stats = error_stats(golden, cand)?;
    let mut histogram = BTreeMap::new();
    for (&g, &c) in golden.values().iter().zip(cand.values()) {
        *histogram.entry(g as i64 - c as i64).or_insert(0) += 1;
    }
    Ok(ErrorProfile { stats, histogram })
}

impl ErrorProfile {
    pub fn stats(&self) -> &ErrorStats {
        &self.stats
    }

    /// Signed error -> number of input vectors; counts sum to `2^n`.
    pub fn histogram(&self) -> &BTreeMap<i64, u64> {
        &self.histogram
    }

    pub fn wce(&self) -> u64 {
        self.stats.wce()
    }

    pub fn mae(&self) -> f64 {
        self.stats.mae()
    }

    pub fn er(&self) -> f64 {
        self.stats.er()
    }

    pub fn mre(&self) -> f64 {
        self.stats.mre()
    }

    pub fn acc0(&self) -> bool {
        self.stats.acc0()
    }

    pub fn avg(&self) -> f64 {
        self.stats.avg()
    }

    pub fn relative(&self) -> RelativeProfile {
        self.stats.relative()
    }

    pub fn error_stddev(&self) -> f64 {
        self.stats.stddev()
    }

    /// Writes the histogram as two-column CSV `error,count`.
    pub fn write_histogram_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "error,count")?;
        for (e, c) in &self.histogram {
            writeln!(w, "{e},{c}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> ProfileJson {
        let s = &self.stats;
        ProfileJson {
            n_inputs: s.n_inputs,
            n_outputs: s.n_outputs,
            wce: s.wce,
            mae: s.mae(),
            er: s.er(),
            mre: s.mre(),
            acc0: s.acc0 as u8,
            avg: s.avg(),
            stddev: s.stddev(),
            sum_abs_error: s.sum_abs,
            sum_signed_error: s.sum_signed,
            erroneous_inputs: s.erroneous,
            relative: s.relative(),
            histogram: self.histogram.iter().map(|(&e, &c)| (e, c)).collect(),
        }
    }
}

/// JSON form of an [`ErrorProfile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileJson {
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub wce: u64,
    pub mae: f64,
    pub er: f64,
    pub mre: f64,
    pub acc0: u8,
    pub avg: f64,
    pub stddev: f64,
    pub sum_abs_error: u64,
    pub sum_signed_error: i64,
    pub erroneous_inputs: u64,
    pub relative: RelativeProfile,
    /// `(error, count)` pairs in ascending error order.
    pub histogram: Vec<(i64, u64)>,
}

impl Serialize for ErrorProfile {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

pub fn error_stddev(profile: &ErrorProfile) -> f64 {
    profile.error_stddev()
}

pub fn relative_profile(profile: &ErrorProfile) -> RelativeProfile {
    profile.relative()
}

/// How the amplitude of the reference Gaussian is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeMode {
    /// Total mass over all integers equals `2^n`.
    #[default]
    MassNormalized,
    /// Total mass equals the number of erroneous vectors.
    CountNormalized,
}

/// Target error distribution: mean 0, standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussSpecRaw")]
pub struct GaussSpec {
    sigma: f64,
    #[serde(default)]
    amplitude_mode: AmplitudeMode,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussSpecRaw {
    sigma: f64,
    #[serde(default)]
    amplitude_mode: AmplitudeMode,
}

impl TryFrom<GaussSpecRaw> for GaussSpec {
    type Error = MetricsError;

    fn try_from(r: GaussSpecRaw) -> Result<Self, Self::Error> {
        GaussSpec::new(r.sigma, r.amplitude_mode)
    }
}

impl GaussSpec {
    /// Bins are whole-number intervals, so `sigma < 1` is rejected.
    pub fn new(sigma: f64, amplitude_mode: AmplitudeMode) -> Result<Self, MetricsError> {
        if !sigma.is_finite() || sigma < 1.0 {
            return Err(MetricsError::InvalidSigma(sigma));
        }
        Ok(GaussSpec { sigma, amplitude_mode })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn amplitude_mode(&self) -> AmplitudeMode {
        self.amplitude_mode
    }

    /// Integer range `[lo, hi)` covered by bin `b`, i.e. `[(b-1/2)σ, (b+1/2)σ)`.
    fn bin_range(&self, b: i64) -> (i64, i64) {
        let lo = ((b as f64 - 0.5) * self.sigma).ceil() as i64;
        let hi = ((b as f64 + 0.5) * self.sigma).ceil() as i64;
        (lo, hi)
    }

    fn bin_of(&self, e: i64) -> i64 {
        let mut b = (e as f64 / self.sigma + 0.5).floor() as i64;
        loop {
            let (lo, hi) = self.bin_range(b);
            if e < lo {
                b -= 1;
            } else if e >= hi {
                b += 1;
            } else {
                return b;
            }
        }
    }

    fn density(&self, e: i64) -> f64 {
        let x = e as f64 / self.sigma;
        (-0.5 * x * x).exp()
    }

    /// `Σ_e exp(-e²/2σ²)` over all integers (terms past 40σ underflow).
    fn unit_mass(&self) -> f64 {
        let reach = (40.0 * self.sigma).ceil() as i64;
        let tail: f64 = (1..=reach).map(|e| self.density(e)).sum();
        1.0 + 2.0 * tail
    }
}

/// Whether the nonzero part of the error histogram stays under the scaled
/// Gaussian `A·exp(-e²/2σ²)`, comparing per-bin averages over bins of width σ
/// centred on zero. Error 0 is excluded from both sides.
pub fn gauss_satisfied(profile: &ErrorProfile, spec: &GaussSpec) -> bool {
    let stats = profile.stats();
    if stats.erroneous_inputs() == 0 {
        return true;
    }
    let mass = match spec.amplitude_mode {
        AmplitudeMode::MassNormalized => stats.vectors() as f64,
        AmplitudeMode::CountNormalized => stats.erroneous_inputs() as f64,
    };
    let amplitude = mass / spec.unit_mass();

    let mut observed: BTreeMap<i64, u64> = BTreeMap::new();
    for (&e, &count) in profile.histogram() {
        if e != 0 && count > 0 {
            *observed.entry(spec.bin_of(e)).or_insert(0) += count;
        }
    }
    observed.into_iter().all(|(b, count)| {
        // Both sides average over the same nonzero integers of the bin, so
        // the sums can be compared directly.
        let (lo, hi) = spec.bin_range(b);
        let envelope: f64 = (lo..hi).filter(|&e| e != 0).map(|e| spec.density(e)).sum();
        count as f64 <= amplitude * envelope
    })
}
