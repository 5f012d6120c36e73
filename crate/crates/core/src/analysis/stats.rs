use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 observations, got {0}")]
    TooShort(usize),
    #[error("degenerate series: zero variance")]
    Degenerate,
    #[error("empty sample")]
    Empty,
    #[error("non-finite observation")]
    NonFinite,
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(StatsError::TooShort(xs.len()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Degenerate);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Mann-Whitney U test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MannWhitney {
    /// Pairs `(x, y)` with `x > y`, ties counted as one half. Zero when every
    /// `x` is below every `y`.
    pub u_x: f64,
    /// Same with the roles swapped; `u_x + u_y = n_x * n_y`.
    pub u_y: f64,
    pub z: f64,
    /// Two-sided p-value from the normal approximation.
    pub p_value: f64,
    /// Set when `min(n_x, n_y) < 8`, where the normal approximation is rough.
    pub approximate: bool,
}

/// Rank-sum test with midranks for ties. The p-value uses the normal
/// approximation with tie correction and a 0.5 continuity correction.
pub fn mann_whitney_u(xs: &[f64], ys: &[f64]) -> Result<MannWhitney, StatsError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(StatsError::Empty);
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (nx, ny) = (xs.len(), ys.len());
    let n = nx + ny;
    // (value, belongs to xs)
    let mut pooled: Vec<(f64, bool)> = xs
        .iter()
        .map(|&v| (v, true))
        .chain(ys.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sum_x = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // ranks i+1 ..= j share their mean
        let midrank = (i + 1 + j) as f64 / 2.0;
        let in_x = pooled[i..j].iter().filter(|p| p.1).count();
        rank_sum_x += midrank * in_x as f64;
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }

    let (fx, fy, fnn) = (nx as f64, ny as f64, n as f64);
    let u_x = rank_sum_x - fx * (fx + 1.0) / 2.0;
    let u_y = fx * fy - u_x;
    let mean = fx * fy / 2.0;
    let variance = fx * fy / 12.0 * ((fnn + 1.0) - tie_term / (fnn * (fnn - 1.0)).max(1.0));
    let (z, p_value) = if variance > 0.0 {
        let z = ((u_x - mean).abs() - 0.5).max(0.0) / variance.sqrt();
        let normal = Normal::new(0.0, 1.0).unwrap();
        (z, (2.0 * normal.sf(z)).min(1.0))
    } else {
        (0.0, 1.0)
    };
    Ok(MannWhitney {
        u_x,
        u_y,
        z,
        p_value,
        approximate: nx.min(ny) < 8,
    })
}
