use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evolve, ConstraintSet, RunResult, SearchConfig, SearchError};

/// A constraint set with a label used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedConstraints {
    pub name: String,
    pub constraints: ConstraintSet,
}

/// One cell of a run matrix.
#[derive(Debug)]
pub struct MatrixRun {
    pub config_index: usize,
    pub config_name: String,
    pub repeat: usize,
    pub seed: u64,
    pub result: Result<RunResult, SearchError>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seed: `splitmix64(base + splitmix64(config << 32 | repeat))`.
///
/// splitmix64 is a bijection on `u64`, so distinct `(config, repeat)` pairs
/// (each below `2^32`) always get distinct seeds for a given base.
pub fn derive_seed(base_seed: u64, config_index: usize, repeat: usize) -> u64 {
    let cell = ((config_index as u64) << 32) | (repeat as u64 & 0xFFFF_FFFF);
    splitmix64(base_seed.wrapping_add(splitmix64(cell)))
}

/// Runs `repeats` independent searches per constraint set. `base.seed` is the
/// base seed; `base.constraints` is replaced by each grid entry. Results come
/// back in `(config, repeat)` order regardless of scheduling. Runs execute on
/// the current rayon pool.
pub fn run_matrix(base: &SearchConfig, grid: &[NamedConstraints], repeats: usize) -> Vec<MatrixRun> {
    let cells: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|c| (0..repeats).map(move |r| (c, r)))
        .collect();
    cells
        .into_par_iter()
        .map(|(c, r)| {
            let seed = derive_seed(base.seed, c, r);
            let cfg = SearchConfig {
                constraints: grid[c].constraints.clone(),
                seed,
                ..base.clone()
            };
            MatrixRun {
                config_index: c,
                config_name: grid[c].name.clone(),
                repeat: r,
                seed,
                result: evolve(&cfg),
            }
        })
        .collect()
}
