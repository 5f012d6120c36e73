//! Post-hoc analysis of run matrices: Pareto fronts, correlation between
//! metrics and rank-sum significance tests.

mod plot;
mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use plot::pareto_svg;
pub use stats::{mann_whitney_u, pearson, MannWhitney, StatsError};

/// One designed circuit, positioned in (power, error) space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub id: String,
    pub config: String,
    pub relative_power: f64,
    pub wce_pct: f64,
    pub mae_pct: f64,
    pub er_pct: f64,
    pub mre_pct: f64,
    pub avg_pct: f64,
    pub stddev: f64,
}

/// Error coordinate used for a 2-D front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorAxis {
    Wce,
    Mae,
    Er,
    Mre,
    Avg,
    Stddev,
}

impl ErrorAxis {
    pub const ALL: [ErrorAxis; 6] = [
        ErrorAxis::Wce,
        ErrorAxis::Mae,
        ErrorAxis::Er,
        ErrorAxis::Mre,
        ErrorAxis::Avg,
        ErrorAxis::Stddev,
    ];

    pub fn of(self, p: &ParetoPoint) -> f64 {
        match self {
            ErrorAxis::Wce => p.wce_pct,
            ErrorAxis::Mae => p.mae_pct,
            ErrorAxis::Er => p.er_pct,
            ErrorAxis::Mre => p.mre_pct,
            ErrorAxis::Avg => p.avg_pct,
            ErrorAxis::Stddev => p.stddev,
        }
    }

    /// Column name in the results CSV.
    pub fn column(self) -> &'static str {
        match self {
            ErrorAxis::Wce => "wce_pct",
            ErrorAxis::Mae => "mae_pct",
            ErrorAxis::Er => "er_pct",
            ErrorAxis::Mre => "mre_pct",
            ErrorAxis::Avg => "avg_pct",
            ErrorAxis::Stddev => "stddev",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorAxis::Wce => "wce",
            ErrorAxis::Mae => "mae",
            ErrorAxis::Er => "er",
            ErrorAxis::Mre => "mre",
            ErrorAxis::Avg => "avg",
            ErrorAxis::Stddev => "stddev",
        }
    }
}

impl fmt::Display for ErrorAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorAxis::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown error axis `{s}`"))
    }
}

/// `a` dominates `b` when it is no worse on both axes and better on one.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Points not dominated in (relative power, chosen error), both minimized.
/// Exact duplicates of a front point are all kept. Input order is preserved.
pub fn pareto_front(points: &[ParetoPoint], axis: ErrorAxis) -> Vec<ParetoPoint> {
    pareto_indices(points, axis).into_iter().map(|i| points[i].clone()).collect()
}

/// Indices of [`pareto_front`] members, ascending. O(n log n).
pub fn pareto_indices(points: &[ParetoPoint], axis: ErrorAxis) -> Vec<usize> {
    let key = |i: usize| (points[i].relative_power, axis.of(&points[i]));
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });

    let mut keep = Vec::new();
    // lowest error among strictly cheaper points seen so far
    let mut best_err = f64::INFINITY;
    let mut i = 0;
    while i < order.len() {
        let power = key(order[i]).0;
        let group_min = key(order[i]).1;
        let mut j = i;
        while j < order.len() && key(order[j]).0 == power {
            if key(order[j]).1 == group_min && group_min < best_err {
                keep.push(order[j]);
            }
            j += 1;
        }
        best_err = best_err.min(group_min);
        i = j;
    }
    keep.sort_unstable();
    keep
}

/// Metric columns correlated by [`correlation_matrix`].
pub const CORRELATED_METRICS: [ErrorAxis; 6] = ErrorAxis::ALL;

/// `|r|` between every pair of the six metrics; `None` where a series is
/// degenerate.
pub fn correlation_matrix(points: &[ParetoPoint]) -> Vec<Vec<Option<f64>>> {
    let series: Vec<Vec<f64>> = CORRELATED_METRICS
        .iter()
        .map(|a| points.iter().map(|p| a.of(p)).collect())
        .collect();
    series
        .iter()
        .map(|x| series.iter().map(|y| pearson(x, y).ok().map(f64::abs)).collect())
        .collect()
}
