use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use axcgp::analysis::{correlation_matrix, mann_whitney_u, pareto_front, pareto_svg, ErrorAxis, CORRELATED_METRICS};
use axcgp::circuit::{export_verilog, CgpGenome};
use axcgp::cost::{power_estimate, CostTable};
use axcgp::experiment::{read_results_csv, write_results_csv, ExperimentConfig, ResultRow};
use axcgp::golden::GoldenSpec;
use axcgp::metrics::error_profile;
use axcgp::search::run_matrix;
use axcgp::simulator::{build_input_planes, evaluate_genome, extract_output_ints, simulate_netlist};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "axcgp", version, about = "Evolve approximate adders and multipliers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every constraint set of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads; defaults to the logical CPU count.
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the per-run evaluation budget.
        #[arg(long)]
        budget_evals: Option<u64>,
        #[arg(long)]
        wall_clock_secs: Option<f64>,
        #[arg(long)]
        cost_table: Option<PathBuf>,
    },
    /// Print the error profile of a stored genome against a golden circuit.
    Eval {
        #[arg(long)]
        genome: PathBuf,
        /// `multiplier:W` or `adder:W`.
        #[arg(long, value_parser = parse_golden)]
        golden: GoldenSpec,
        #[arg(long)]
        cost_table: Option<PathBuf>,
    },
    /// Write the active circuit of a genome as structural Verilog.
    ExportVerilog {
        #[arg(long)]
        genome: PathBuf,
        #[arg(long, default_value = "approx")]
        module: String,
        /// Standard output when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Post-process a results CSV.
    Analyze {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, value_enum)]
        mode: AnalyzeMode,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also draw one SVG per error axis (pareto mode).
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyzeMode {
    Pareto,
    Correlation,
    Significance,
}

fn parse_golden(s: &str) -> Result<GoldenSpec, String> {
    let (kind, width) = s
        .split_once(':')
        .ok_or_else(|| format!("expected KIND:WIDTH, got `{s}`"))?;
    let width: usize = width.parse().map_err(|_| format!("bad width `{width}`"))?;
    let spec = match kind {
        "multiplier" | "mul" => GoldenSpec::multiplier(width),
        "adder" | "add" => GoldenSpec::adder(width),
        _ => return Err(format!("unknown golden kind `{kind}`")),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

/// Error with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, error: e.into() }
    }
}

type CmdResult = Result<(), Failure>;

/// Unreadable input files exit with code 2.
fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        error: anyhow!("cannot read {}: {e}", path.display()),
    })
}

fn load_cost_table(path: Option<&Path>) -> Result<CostTable, Failure> {
    match path {
        None => Ok(CostTable::default()),
        Some(p) => {
            let text = read_input(p)?;
            Ok(CostTable::from_json(&text).with_context(|| format!("cost table {}", p.display()))?)
        }
    }
}

fn load_genome(path: &Path) -> Result<CgpGenome, Failure> {
    let text = read_input(path)?;
    let genome = serde_json::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok(genome)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn verilog_ident(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    config: &Path,
    out_dir: Option<PathBuf>,
    workers: Option<usize>,
    seed: Option<u64>,
    budget_evals: Option<u64>,
    wall_clock_secs: Option<f64>,
    cost_table: Option<PathBuf>,
) -> CmdResult {
    let text = read_input(config)?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| anyhow!("{}: {e}", config.display()))?;
    if let Some(s) = seed {
        cfg.search.seed = s;
    }
    if let Some(b) = budget_evals {
        cfg.search.max_evaluations = b;
    }
    if let Some(w) = wall_clock_secs {
        cfg.search.wall_clock_secs = Some(w);
    }
    if cost_table.is_some() {
        cfg.cost_table = cost_table;
    }
    cfg.validate().map_err(|e| anyhow!("{}: {e}", config.display()))?;

    // relative paths in the config resolve against its directory
    let base_dir = config.parent().unwrap_or(Path::new("."));
    let table_path = cfg.cost_table.as_ref().map(|p| base_dir.join(p));
    let table = load_cost_table(table_path.as_deref())?;
    let out_dir = out_dir
        .or_else(|| cfg.output_dir.as_ref().map(|p| base_dir.join(p)))
        .ok_or_else(|| anyhow!("no output directory: pass --out-dir or set output_dir"))?;
    let runs_dir = out_dir.join("runs");
    let circuits_dir = out_dir.join("circuits");
    for d in [&out_dir, &runs_dir, &circuits_dir] {
        fs::create_dir_all(d).with_context(|| format!("cannot create {}", d.display()))?;
    }

    let base = cfg.search_config(table);
    base.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()?;
    let runs = pool.install(|| run_matrix(&base, &cfg.constraint_grid, cfg.search.repeats));

    let mut rows = Vec::with_capacity(runs.len());
    let mut failures = 0;
    for run in &runs {
        let stem = format!("{}_r{}", run.config_name, run.repeat);
        let result = match &run.result {
            Ok(r) => r,
            Err(e) => {
                failures += 1;
                eprintln!("run {stem} (seed {}) failed: {e}", run.seed);
                continue;
            }
        };
        let constraints = &cfg.constraint_grid[run.config_index].constraints;
        let gauss = constraints.gauss().or(cfg.gauss_report.as_ref());
        rows.push(ResultRow::from_run(&run.config_name, result, gauss));

        let record = serde_json::json!({
            "config": run.config_name,
            "repeat": run.repeat,
            "constraints": constraints,
            "result": result,
        });
        write_file(&runs_dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&record)?)?;
        write_file(
            &circuits_dir.join(format!("{stem}.genome.json")),
            serde_json::to_string_pretty(&result.best_genome)?,
        )?;
        let module = format!("approx_{}", verilog_ident(&stem));
        let verilog = export_verilog(&result.best_genome.decode_active(), &module)?;
        write_file(&circuits_dir.join(format!("{stem}.v")), verilog)?;
    }

    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut csv = Vec::new();
    write_results_csv(&mut csv, &rows, Some(stamp))?;
    let csv_path = out_dir.join("results.csv");
    write_file(&csv_path, csv)?;
    eprintln!("{} runs, {} failed; results in {}", runs.len(), failures, csv_path.display());
    if failures > 0 {
        return Err(anyhow!("{failures} of {} runs failed", runs.len()).into());
    }
    Ok(())
}

fn cmd_eval(genome: &Path, golden: GoldenSpec, cost_table: Option<&Path>) -> CmdResult {
    let genome = load_genome(genome)?;
    let table = load_cost_table(cost_table)?;
    let params = genome.params();
    if params.inputs != golden.inputs() || params.outputs != golden.outputs() {
        return Err(anyhow!(
            "genome has {} inputs / {} outputs, golden needs {} / {}",
            params.inputs,
            params.outputs,
            golden.inputs(),
            golden.outputs()
        )
        .into());
    }
    let reference = golden.netlist(&params.functions)?;
    let planes = simulate_netlist(&reference, &build_input_planes(golden.inputs())?)?;
    let golden_ints = extract_output_ints(&planes, golden.outputs())?;
    let profile = error_profile(&golden_ints, &evaluate_genome(&genome)?)?;
    let cost = power_estimate(&genome.decode_active(), &table)?;
    let golden_cost = power_estimate(&reference, &table)?;
    let out = serde_json::json!({
        "golden": golden,
        "profile": profile.to_json(),
        "power": cost,
        "golden_power": golden_cost,
        "relative_power": if golden_cost > 0.0 { Some(cost / golden_cost) } else { None },
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_export(genome: &Path, module: &str, output: Option<&Path>) -> CmdResult {
    let genome = load_genome(genome)?;
    let verilog = export_verilog(&genome.decode_active(), module)?;
    match output {
        Some(p) => write_file(p, verilog)?,
        None => io::stdout().write_all(verilog.as_bytes())?,
    }
    Ok(())
}

fn cmd_analyze(results: &Path, mode: AnalyzeMode, out_dir: &Path, svg: bool) -> CmdResult {
    let text = read_input(results)?;
    let rows = read_results_csv(text.as_bytes()).map_err(|e| anyhow!("{}: {e}", results.display()))?;
    let points: Vec<_> = rows.iter().enumerate().map(|(i, r)| r.to_point(i)).collect();
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;

    match mode {
        AnalyzeMode::Pareto => {
            for axis in ErrorAxis::ALL {
                let mut w = csv_writer(&out_dir.join(format!("pareto_{axis}.csv")))?;
                w.write_record(["config", "row", "relative_power", axis.column()])?;
                let configs: BTreeSet<&str> = points.iter().map(|p| p.config.as_str()).collect();
                for config in configs {
                    let group: Vec<_> = points.iter().filter(|p| p.config == config).cloned().collect();
                    for p in pareto_front(&group, axis) {
                        let row = p.id.rsplit('#').next().unwrap_or("");
                        w.write_record([
                            p.config.as_str(),
                            row,
                            &p.relative_power.to_string(),
                            &axis.of(&p).to_string(),
                        ])?;
                    }
                }
                w.flush()?;
                if svg {
                    write_file(&out_dir.join(format!("pareto_{axis}.svg")), pareto_svg(&points, axis))?;
                }
            }
        }
        AnalyzeMode::Correlation => {
            let m = correlation_matrix(&points);
            let mut w = csv_writer(&out_dir.join("correlation.csv"))?;
            let mut header = vec!["metric".to_string()];
            header.extend(CORRELATED_METRICS.iter().map(|a| a.to_string()));
            w.write_record(&header)?;
            for (a, row) in CORRELATED_METRICS.iter().zip(&m) {
                let mut rec = vec![a.to_string()];
                rec.extend(row.iter().map(|v| v.map(|r| r.to_string()).unwrap_or_default()));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        AnalyzeMode::Significance => {
            let mut configs: Vec<&str> = Vec::new();
            for r in &rows {
                if !configs.contains(&r.config.as_str()) {
                    configs.push(&r.config);
                }
            }
            let power = |c: &str| -> Vec<f64> {
                rows.iter().filter(|r| r.config == c).map(|r| r.relative_power).collect()
            };
            let mut w = csv_writer(&out_dir.join("significance.csv"))?;
            w.write_record(["config_a", "config_b", "n_a", "n_b", "u_a", "u_b", "p_value", "approximate"])?;
            for (i, a) in configs.iter().enumerate() {
                for b in &configs[i + 1..] {
                    let (xa, xb) = (power(a), power(b));
                    let t = mann_whitney_u(&xa, &xb)?;
                    w.write_record([
                        a.to_string(),
                        b.to_string(),
                        xa.len().to_string(),
                        xb.len().to_string(),
                        t.u_x.to_string(),
                        t.u_y.to_string(),
                        t.p_value.to_string(),
                        t.approximate.to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out_dir,
            workers,
            seed,
            budget_evals,
            wall_clock_secs,
            cost_table,
        } => cmd_run(&config, out_dir, workers, seed, budget_evals, wall_clock_secs, cost_table),
        Command::Eval {
            genome,
            golden,
            cost_table,
        } => cmd_eval(&genome, golden, cost_table.as_deref()),
        Command::ExportVerilog { genome, module, output } => cmd_export(&genome, &module, output.as_deref()),
        Command::Analyze {
            results,
            mode,
            out_dir,
            svg,
        } => cmd_analyze(&results, mode, &out_dir, svg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
