use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metrics::{gauss_satisfied, ErrorProfile, ErrorStats, GaussSpec};

/// Error metric a constraint bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Metric {
    Wce,
    Mae,
    Er,
    Mre,
    Acc0,
    Avg,
    Gauss,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Metric::Wce => "WCE",
            Metric::Mae => "MAE",
            Metric::Er => "ER",
            Metric::Mre => "MRE",
            Metric::Acc0 => "ACC0",
            Metric::Avg => "AVG",
            Metric::Gauss => "GAUSS",
        };
        f.write_str(s)
    }
}

/// One `error_i(G, C) <= T_i` term. Thresholds are in relative percent:
/// WCE, MAE and AVG relative to `2^m`, ER and MRE relative to 1. AVG bounds
/// the absolute value of the signed mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "UPPERCASE", deny_unknown_fields)]
pub enum Constraint {
    Wce { threshold: f64 },
    Mae { threshold: f64 },
    Er { threshold: f64 },
    Mre { threshold: f64 },
    /// Exact result whenever the golden output is zero.
    Acc0,
    Avg { threshold: f64 },
    Gauss(GaussSpec),
}

impl Constraint {
    pub fn metric(&self) -> Metric {
        match self {
            Constraint::Wce { .. } => Metric::Wce,
            Constraint::Mae { .. } => Metric::Mae,
            Constraint::Er { .. } => Metric::Er,
            Constraint::Mre { .. } => Metric::Mre,
            Constraint::Acc0 => Metric::Acc0,
            Constraint::Avg { .. } => Metric::Avg,
            Constraint::Gauss(_) => Metric::Gauss,
        }
    }

    pub fn threshold(&self) -> Option<f64> {
        match *self {
            Constraint::Wce { threshold }
            | Constraint::Mae { threshold }
            | Constraint::Er { threshold }
            | Constraint::Mre { threshold }
            | Constraint::Avg { threshold } => Some(threshold),
            Constraint::Acc0 | Constraint::Gauss(_) => None,
        }
    }

    /// `None` for GAUSS, which needs the histogram.
    pub fn check_stats(&self, s: &ErrorStats) -> Option<bool> {
        Some(match *self {
            Constraint::Wce { threshold } => s.wce_within(threshold),
            Constraint::Mae { threshold } => s.mae_within(threshold),
            Constraint::Er { threshold } => s.er_within(threshold),
            Constraint::Mre { threshold } => s.mre_within(threshold),
            Constraint::Acc0 => s.acc0(),
            Constraint::Avg { threshold } => s.avg_within(threshold),
            Constraint::Gauss(_) => return None,
        })
    }

    pub fn check(&self, p: &ErrorProfile) -> bool {
        match self {
            Constraint::Gauss(spec) => gauss_satisfied(p, spec),
            other => other.check_stats(p.stats()).unwrap(),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Acc0 => write!(f, "ACC0"),
            Constraint::Gauss(g) => write!(f, "GAUSS(sigma={})", g.sigma()),
            c => write!(f, "{}<={}%", c.metric(), c.threshold().unwrap()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstraintError {
    #[error("constraint set is empty")]
    Empty,
    #[error("metric {0} appears more than once")]
    Duplicate(Metric),
    #[error("threshold for {metric} must be finite and >= 0, got {threshold}")]
    BadThreshold { metric: Metric, threshold: f64 },
}

/// Conjunction of constraints over distinct metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Constraint>", into = "Vec<Constraint>")]
pub struct ConstraintSet {
    constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<Constraint>) -> Result<Self, ConstraintError> {
        if constraints.is_empty() {
            return Err(ConstraintError::Empty);
        }
        for (i, c) in constraints.iter().enumerate() {
            if constraints[..i].iter().any(|d| d.metric() == c.metric()) {
                return Err(ConstraintError::Duplicate(c.metric()));
            }
            if let Some(t) = c.threshold() {
                if !t.is_finite() || t < 0.0 {
                    return Err(ConstraintError::BadThreshold {
                        metric: c.metric(),
                        threshold: t,
                    });
                }
            }
        }
        Ok(ConstraintSet { constraints })
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn get(&self, metric: Metric) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.metric() == metric)
    }

    pub fn needs_histogram(&self) -> bool {
        self.get(Metric::Gauss).is_some()
    }

    pub fn gauss(&self) -> Option<&GaussSpec> {
        match self.get(Metric::Gauss) {
            Some(Constraint::Gauss(g)) => Some(g),
            _ => None,
        }
    }

    /// Checks every histogram-free constraint.
    pub fn check_stats(&self, s: &ErrorStats) -> bool {
        self.constraints.iter().all(|c| c.check_stats(s).unwrap_or(true))
    }

    /// Full conjunction.
    pub fn satisfied(&self, p: &ErrorProfile) -> bool {
        self.constraints.iter().all(|c| c.check(p))
    }

    /// Set with one more constraint.
    pub fn with(&self, c: Constraint) -> Result<Self, ConstraintError> {
        let mut v = self.constraints.clone();
        v.push(c);
        Self::new(v)
    }
}

impl TryFrom<Vec<Constraint>> for ConstraintSet {
    type Error = ConstraintError;

    fn try_from(v: Vec<Constraint>) -> Result<Self, Self::Error> {
        ConstraintSet::new(v)
    }
}

impl From<ConstraintSet> for Vec<Constraint> {
    fn from(s: ConstraintSet) -> Self {
        s.constraints
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.constraints.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(" & "))
    }
}
