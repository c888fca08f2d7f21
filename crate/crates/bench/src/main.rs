//! Command-line interface for planning runs, benchmark suites, scenario
//! generation, and snapshot rendering.
//!
//! Exit codes: 0 on success (including planner failures during a suite), 1
//! on internal errors, 2 on bad input.

use clap::{Parser, Subcommand};
use mosaic_bench::scenarios::{make_scenario, Family};
use mosaic_bench::suite::{run_loaded, run_suite, write_outputs, PlannerKind, SuiteOptions};
use mosaic_bench::svg::{parse_snapshot, render_svg};
use mosaic_core::io::{LoadedScenario, ScenarioFile};
use mosaic_core::oracle::OracleConfig;
use mosaic_core::planner::PlanBudget;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "mosaic", about = "Skill-centric tabletop planner and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one planner on one scenario and write its artifacts.
    Plan {
        /// Scenario family name (transport|clutter|movables) or a path to a
        /// scenario JSON file.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "mosaic")]
        planner: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: u64,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 60.0)]
        time_budget: f64,
        /// Output directory for run.json, graph.txt, plan.txt, plan.svg.
        #[arg(long)]
        out: PathBuf,
        /// Oracle exploitation weight alpha.
        #[arg(long)]
        oracle_alpha: Option<f64>,
        /// Probability of connecting straight to the goal condition.
        #[arg(long)]
        oracle_direct_goal: Option<f64>,
        /// Disable the Gaussian noise on skill selection.
        #[arg(long)]
        oracle_no_noise: bool,
    },
    /// Run the full (families x planners x seeds) comparison grid.
    Suite {
        /// Comma-separated families.
        #[arg(long, default_value = "transport,clutter,movables")]
        families: String,
        /// Comma-separated planners.
        #[arg(long, default_value = "mosaic,options,cem,roadmap,inc-roadmap")]
        planners: String,
        /// Seed range `A..B` (half-open) or a single count `N` for `0..N`.
        #[arg(long, default_value = "0..50")]
        seeds: String,
        #[arg(long, default_value_t = 10_000)]
        max_iters: u64,
        #[arg(long, default_value_t = 60.0)]
        time_budget: f64,
        #[arg(long)]
        out: PathBuf,
        /// Zero out wall-clock timings in the artifacts so repeated runs are
        /// byte-identical.
        #[arg(long)]
        redact_timing: bool,
    },
    /// Render a graph or plan snapshot to SVG.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a scenario file for a family and seed.
    MakeScenario {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_scenario_file(arg: &str) -> Result<LoadedScenario, String> {
    let path = Path::new(arg);
    if !path.exists() {
        return Err(format!(
            "'{arg}' is neither a scenario family nor an existing file"
        ));
    }
    let file = ScenarioFile::load(path).map_err(|e| e.to_string())?;
    file.build().map_err(|e| e.to_string())
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.parse().map_err(|_| format!("bad seed range {spec}"))?;
        let b: u64 = b.parse().map_err(|_| format!("bad seed range {spec}"))?;
        if a >= b {
            return Err(format!("empty seed range {spec}"));
        }
        Ok((a..b).collect())
    } else {
        let n: u64 = spec.parse().map_err(|_| format!("bad seed spec {spec}"))?;
        if n == 0 {
            return Err("need at least one seed".into());
        }
        Ok((0..n).collect())
    }
}

fn workers_from_env() -> usize {
    std::env::var("MOSAIC_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::BadInput(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum CliError {
    BadInput(String),
    Internal(String),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Plan {
            scenario,
            planner,
            seed,
            max_iters,
            time_budget,
            out,
            oracle_alpha,
            oracle_direct_goal,
            oracle_no_noise,
        } => {
            let planner = PlannerKind::parse(&planner)
                .ok_or_else(|| CliError::BadInput(format!("unknown planner '{planner}'")))?;
            if time_budget <= 0.0 || max_iters == 0 {
                return Err(CliError::BadInput("budget must be positive".into()));
            }
            let budget = PlanBudget::new(max_iters, Duration::from_secs_f64(time_budget));
            let mut oracle = OracleConfig::default();
            if let Some(a) = oracle_alpha {
                oracle.alpha = a;
            }
            if let Some(p) = oracle_direct_goal {
                oracle.p_direct_goal = p;
            }
            if oracle_no_noise {
                oracle.noise = false;
            }
            oracle
                .check()
                .map_err(|e| CliError::BadInput(e.to_string()))?;
            let opts = SuiteOptions {
                budget,
                redact_timing: false,
                validate: true,
                oracle,
            };

            let (loaded, label) = match Family::parse(&scenario) {
                Some(family) => (make_scenario(family, seed), family.name().to_string()),
                None => (
                    load_scenario_file(&scenario).map_err(CliError::BadInput)?,
                    scenario.clone(),
                ),
            };
            let (record, plan) = run_loaded(&loaded, &label, planner, seed, &opts);
            std::fs::create_dir_all(&out).map_err(|e| CliError::Internal(e.to_string()))?;
            std::fs::write(
                out.join("run.json"),
                serde_json::to_string_pretty(&record).unwrap() + "\n",
            )
            .map_err(|e| CliError::Internal(e.to_string()))?;
            match plan {
                Some(p) => {
                    if let Some(snapshot) = &p.snapshot {
                        std::fs::write(out.join("graph.txt"), snapshot)
                            .map_err(|e| CliError::Internal(e.to_string()))?;
                    }
                    let plan_text = p.snapshot_text(&loaded.scenario);
                    std::fs::write(out.join("plan.txt"), &plan_text)
                        .map_err(|e| CliError::Internal(e.to_string()))?;
                    let snap = parse_snapshot(&plan_text)
                        .map_err(|e| CliError::Internal(e.to_string()))?;
                    std::fs::write(out.join("plan.svg"), render_svg(&snap))
                        .map_err(|e| CliError::Internal(e.to_string()))?;
                    println!(
                        "solved: {} steps, cost {:.3}, {} iterations",
                        record.plan_length.unwrap_or(0),
                        p.total_cost,
                        record.iterations
                    );
                }
                None => println!(
                    "failed after {} iterations ({:.3}s)",
                    record.iterations, record.planning_time_s
                ),
            }
            Ok(())
        }
        Command::Suite {
            families,
            planners,
            seeds,
            max_iters,
            time_budget,
            out,
            redact_timing,
        } => {
            let families: Vec<Family> = families
                .split(',')
                .map(|s| {
                    Family::parse(s.trim())
                        .ok_or_else(|| CliError::BadInput(format!("unknown family '{s}'")))
                })
                .collect::<Result<_, _>>()?;
            let planners: Vec<PlannerKind> = planners
                .split(',')
                .map(|s| {
                    PlannerKind::parse(s.trim())
                        .ok_or_else(|| CliError::BadInput(format!("unknown planner '{s}'")))
                })
                .collect::<Result<_, _>>()?;
            if families.is_empty() || planners.is_empty() {
                return Err(CliError::BadInput(
                    "need at least one family and planner".into(),
                ));
            }
            let seeds = parse_seeds(&seeds).map_err(CliError::BadInput)?;
            if time_budget <= 0.0 || max_iters == 0 {
                return Err(CliError::BadInput("budget must be positive".into()));
            }
            let opts = SuiteOptions {
                budget: PlanBudget::new(max_iters, Duration::from_secs_f64(time_budget)),
                redact_timing,
                validate: true,
                oracle: OracleConfig::default(),
            };
            let result = run_suite(&families, &planners, &seeds, &opts, workers_from_env());
            let summary = write_outputs(&out, &result.records, redact_timing)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            for (cell, s) in &summary.cells {
                println!(
                    "{cell}: {}/{} success, median {:.3}s",
                    s.successes, s.runs, s.time_median_s
                );
            }
            Ok(())
        }
        Command::Render { input, out } => {
            let text =
                std::fs::read_to_string(&input).map_err(|e| CliError::BadInput(e.to_string()))?;
            let snap = parse_snapshot(&text).map_err(|e| CliError::BadInput(e.to_string()))?;
            std::fs::write(&out, render_svg(&snap))
                .map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(())
        }
        Command::MakeScenario { family, seed, out } => {
            let family = Family::parse(&family)
                .ok_or_else(|| CliError::BadInput(format!("unknown family '{family}'")))?;
            let loaded = make_scenario(family, seed);
            let file = ScenarioFile::from_parts(&loaded.scenario, &loaded.skills, &loaded.oracle);
            std::fs::write(&out, file.to_json())
                .map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(())
        }
    }
}
