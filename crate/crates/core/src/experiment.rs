//! Experiment configuration files and the results CSV.
//!
//! Config files are JSON with strict field checking. The results CSV starts
//! with `#` comment lines (schema id first, then an optional generation stamp)
//! followed by a header row and one row per run.

use std::collections::HashSet;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::analysis::ParetoPoint;
use crate::circuit::{default_gate_set, GateFunction};
use crate::cost::CostTable;
use crate::golden::{generate_golden, GoldenSpec};
use crate::metrics::{gauss_satisfied, GaussSpec};
use crate::search::{NamedConstraints, RunResult, SearchConfig};

pub const RESULTS_SCHEMA: &str = "axcgp-results/v1";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CgpSection {
    pub nodes: usize,
    /// Defaults to `nodes` (unrestricted).
    #[serde(default)]
    pub levels_back: Option<usize>,
    /// Defaults to the full function set.
    #[serde(default)]
    pub functions: Option<Vec<GateFunction>>,
}

fn default_lambda() -> usize {
    4
}

fn default_mutation_genes() -> usize {
    5
}

fn default_repeats() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    #[serde(default = "default_lambda")]
    pub lambda: usize,
    #[serde(default = "default_mutation_genes")]
    pub mutation_genes: usize,
    pub max_evaluations: u64,
    #[serde(default)]
    pub wall_clock_secs: Option<f64>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub golden: GoldenSpec,
    pub cgp: CgpSection,
    pub search: SearchSection,
    pub constraint_grid: Vec<NamedConstraints>,
    /// JSON cost table; the built-in table when absent.
    #[serde(default)]
    pub cost_table: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Gauss check reported in the `gauss_ok` column for configs that do not
    /// constrain GAUSS themselves.
    #[serde(default)]
    pub gauss_report: Option<GaussSpec>,
}

impl ExperimentConfig {
    /// Parses and validates. Syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.constraint_grid.is_empty() {
            return bad("constraint_grid: at least one named constraint set is required".into());
        }
        let mut names = HashSet::new();
        for (i, entry) in self.constraint_grid.iter().enumerate() {
            if entry.name.is_empty()
                || !entry.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.+".contains(c))
            {
                return bad(format!(
                    "constraint_grid[{i}].name: `{}` must be non-empty and use only [A-Za-z0-9-_.+]",
                    entry.name
                ));
            }
            if !names.insert(entry.name.as_str()) {
                return bad(format!("constraint_grid[{i}].name: duplicate name `{}`", entry.name));
            }
        }
        if self.search.repeats == 0 {
            return bad("search.repeats: must be at least 1".into());
        }
        if self.search.max_evaluations == 0 {
            return bad("search.max_evaluations: must be positive".into());
        }
        if let Some(s) = self.search.wall_clock_secs {
            if !s.is_finite() || s <= 0.0 {
                return bad("search.wall_clock_secs: must be a positive number".into());
            }
        }
        let sc = self.search_config(CostTable::default());
        sc.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        generate_golden(&self.golden, sc.params).map_err(|e| ConfigError::Invalid(format!("cgp: {e}")))?;
        Ok(())
    }

    /// Search settings shared by every run. Constraints and seed are
    /// placeholders; the matrix runner fills them per cell.
    pub fn search_config(&self, cost_table: CostTable) -> SearchConfig {
        let mut params = self.golden.params(self.cgp.nodes);
        if let Some(l) = self.cgp.levels_back {
            params.levels_back = l;
        }
        params.functions = self.cgp.functions.clone().unwrap_or_else(default_gate_set);
        SearchConfig {
            params,
            golden: self.golden,
            constraints: self.constraint_grid[0].constraints.clone(),
            lambda: self.search.lambda,
            mutation_genes: self.search.mutation_genes,
            max_evaluations: self.search.max_evaluations,
            wall_clock: self.search.wall_clock_secs.map(Duration::from_secs_f64),
            seed: self.search.seed,
            cost_table,
        }
    }
}

/// One row of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config: String,
    pub seed: u64,
    pub evaluations: u64,
    pub relative_power: f64,
    pub wce_pct: f64,
    pub mae_pct: f64,
    pub er_pct: f64,
    pub mre_pct: f64,
    pub avg_pct: f64,
    pub acc0: u8,
    pub stddev: f64,
    /// Empty when no Gauss spec applies.
    pub gauss_ok: Option<u8>,
}

pub const RESULT_COLUMNS: [&str; 12] = [
    "config",
    "seed",
    "evaluations",
    "relative_power",
    "wce_pct",
    "mae_pct",
    "er_pct",
    "mre_pct",
    "avg_pct",
    "acc0",
    "stddev",
    "gauss_ok",
];

impl ResultRow {
    /// `gauss` is the run's own GAUSS constraint if it has one, otherwise the
    /// report spec.
    pub fn from_run(config: &str, run: &RunResult, gauss: Option<&GaussSpec>) -> Self {
        let p = &run.best_profile;
        let r = p.relative();
        ResultRow {
            config: config.to_string(),
            seed: run.seed,
            evaluations: run.evaluations_used,
            relative_power: run.relative_power,
            wce_pct: r.wce,
            mae_pct: r.mae,
            er_pct: r.er,
            mre_pct: r.mre,
            avg_pct: r.avg,
            acc0: p.acc0() as u8,
            stddev: p.error_stddev(),
            gauss_ok: gauss.map(|g| gauss_satisfied(p, g) as u8),
        }
    }

    pub fn to_point(&self, index: usize) -> ParetoPoint {
        ParetoPoint {
            id: format!("{}#{}", self.config, index),
            config: self.config.clone(),
            relative_power: self.relative_power,
            wce_pct: self.wce_pct,
            mae_pct: self.mae_pct,
            er_pct: self.er_pct,
            mre_pct: self.mre_pct,
            avg_pct: self.avg_pct,
            stddev: self.stddev,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ResultsError {
    #[error("results CSV is missing column `{0}`")]
    MissingColumn(String),
    #[error("results CSV row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Writes the comment header, the column header and all rows. With
/// `generated_unix` set, a `# generated:` stamp follows the schema line; it is
/// the only line that differs between reruns.
pub fn write_results_csv<W: Write>(
    mut w: W,
    rows: &[ResultRow],
    generated_unix: Option<u64>,
) -> Result<(), ResultsError> {
    writeln!(w, "# schema: {RESULTS_SCHEMA}")?;
    if let Some(t) = generated_unix {
        writeln!(w, "# generated: {t}")?;
    }
    let mut csv = csv::Writer::from_writer(w);
    if rows.is_empty() {
        csv.write_record(RESULT_COLUMNS)?;
    }
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_results_csv<R: Read>(r: R) -> Result<Vec<ResultRow>, ResultsError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let headers = reader.headers()?.clone();
    for col in RESULT_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(ResultsError::MissingColumn(col.to_string()));
        }
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| ResultsError::BadRow {
                row: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Drops `# generated:` lines so reruns can be compared byte for byte.
pub fn strip_generated_stamp(csv_text: &str) -> String {
    csv_text
        .lines()
        .filter(|l| !l.starts_with("# generated:"))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG: &str = r#"{
        "golden": {"kind": "multiplier", "width": 3},
        "cgp": {"nodes": 60},
        "search": {"max_evaluations": 200, "repeats": 2, "seed": 3},
        "constraint_grid": [
            {"name": "wce5", "constraints": [{"metric": "WCE", "threshold": 5}]},
            {"name": "mae1+er50", "constraints": [
                {"metric": "MAE", "threshold": 1}, {"metric": "ER", "threshold": 50}]}
        ]
    }"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(CONFIG).unwrap();
        assert_eq!(cfg.search.lambda, 4);
        assert_eq!(cfg.search.mutation_genes, 5);
        assert_eq!(cfg.constraint_grid.len(), 2);
        let sc = cfg.search_config(CostTable::default());
        assert_eq!(sc.params.levels_back, 60);
        assert_eq!(sc.params.inputs, 6);
        assert_eq!(sc.params.outputs, 6);
    }

    #[test]
    fn unknown_fields_report_position() {
        let text = CONFIG.replace("\"nodes\": 60", "\"nodes\": 60, \"colour\": 1");
        match ExperimentConfig::from_json(&text) {
            Err(ConfigError::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("colour"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_rejections() {
        for (from, to) in [
            ("\"repeats\": 2", "\"repeats\": 0"),
            ("\"max_evaluations\": 200", "\"max_evaluations\": 0"),
            ("\"name\": \"wce5\"", "\"name\": \"mae1+er50\""),
            ("\"name\": \"wce5\"", "\"name\": \"a/b\""),
            ("\"nodes\": 60", "\"nodes\": 10"),
            ("\"width\": 3", "\"width\": 0"),
        ] {
            let text = CONFIG.replace(from, to);
            assert!(
                matches!(ExperimentConfig::from_json(&text), Err(ConfigError::Invalid(_))),
                "{to}"
            );
        }
    }

    fn row(config: &str, gauss: Option<u8>) -> ResultRow {
        ResultRow {
            config: config.into(),
            seed: 42,
            evaluations: 100,
            relative_power: 0.75,
            wce_pct: 1.5,
            mae_pct: 0.25,
            er_pct: 30.0,
            mre_pct: 2.0,
            avg_pct: 0.1,
            acc0: 1,
            stddev: 3.5,
            gauss_ok: gauss,
        }
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row("a", None), row("b", Some(1))];
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &rows, Some(1234)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# schema: axcgp-results/v1"));
        assert_eq!(lines.next(), Some("# generated: 1234"));
        assert_eq!(lines.next(), Some(RESULT_COLUMNS.join(",").as_str()));
        assert_eq!(lines.next(), Some("a,42,100,0.75,1.5,0.25,30.0,2.0,0.1,1,3.5,"));
        assert_eq!(read_results_csv(text.as_bytes()).unwrap(), rows);
        assert!(!strip_generated_stamp(&text).contains("generated"));
    }

    #[test]
    fn empty_results_still_have_header() {
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &[], None).unwrap();
        assert!(read_results_csv(buf.as_slice()).unwrap().is_empty());
    }

    #[test]
    fn missing_column_is_named() {
        let text = "config,seed\nx,1\n";
        match read_results_csv(text.as_bytes()) {
            Err(ResultsError::MissingColumn(c)) => assert_eq!(c, "evaluations"),
            other => panic!("{other:?}"),
        }
    }
}
