//! Multi-seed planner comparison: run every (family, planner, seed) cell,
//! write per-run records as CSV and JSON, and aggregate success rates,
//! planning-time quantiles, and head-to-head matrices on commonly solved
//! instances.

use crate::scenarios::{make_scenario, Family};
use mosaic_core::baselines::{
    cem_plan, incremental_roadmap_plan, roadmap_plan, skills_as_options_plan, CemConfig,
    OptionsConfig, RoadmapConfig,
};
use mosaic_core::oracle::OracleConfig;
use mosaic_core::planner::{plan, validate_plan, Plan, PlanBudget};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PlannerKind {
    Mosaic,
    Options,
    Cem,
    Roadmap,
    IncRoadmap,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 5] = [
        PlannerKind::Mosaic,
        PlannerKind::Options,
        PlannerKind::Cem,
        PlannerKind::Roadmap,
        PlannerKind::IncRoadmap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PlannerKind::Mosaic => "mosaic",
            PlannerKind::Options => "options",
            PlannerKind::Cem => "cem",
            PlannerKind::Roadmap => "roadmap",
            PlannerKind::IncRoadmap => "inc-roadmap",
        }
    }

    pub fn parse(s: &str) -> Option<PlannerKind> {
        match s {
            "mosaic" => Some(PlannerKind::Mosaic),
            "options" => Some(PlannerKind::Options),
            "cem" => Some(PlannerKind::Cem),
            "roadmap" => Some(PlannerKind::Roadmap),
            "inc-roadmap" => Some(PlannerKind::IncRoadmap),
            _ => None,
        }
    }
}

/// One benchmark run. `plan_length` is present exactly when the run
/// succeeded.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub scenario: String,
    pub planner: String,
    pub seed: u64,
    pub success: bool,
    pub plan_length: Option<usize>,
    pub planning_time_s: f64,
    pub iterations: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub budget: PlanBudget,
    /// Replace wall-clock timings with zeros in the emitted artifacts, so
    /// two identical runs produce byte-identical files.
    pub redact_timing: bool,
    /// Planner-validated runs: re-simulate every returned plan and fail the
    /// run if validation fails.
    pub validate: bool,
    pub oracle: OracleConfig,
}

/// Stable 64-bit FNV-1a over the run configuration.
fn config_hash(label: &str, planner: PlannerKind, budget: &PlanBudget, oracle: &OracleConfig) -> String {
    let text = format!(
        "{}|{}|{}|{}|{:?}",
        label,
        planner.name(),
        budget.max_iters,
        budget.wall_clock.as_secs(),
        oracle
    );
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Execute one cell of a benchmark family. Returns the record and, on
/// success, the plan.
pub fn run_one(
    family: Family,
    planner: PlannerKind,
    seed: u64,
    opts: &SuiteOptions,
) -> (RunRecord, Option<Plan>) {
    let loaded = make_scenario(family, seed);
    run_loaded(&loaded, family.name(), planner, seed, opts)
}

/// Execute one planner on an already-loaded scenario.
pub fn run_loaded(
    loaded: &mosaic_core::io::LoadedScenario,
    label: &str,
    planner: PlannerKind,
    seed: u64,
    opts: &SuiteOptions,
) -> (RunRecord, Option<Plan>) {
    let scenario = &loaded.scenario;
    let skills = &loaded.skills;
    let oracle_cfg = OracleConfig {
        seed,
        ..opts.oracle
    };
    // The hash identifies the configuration; the seed is its own column.
    let hash = config_hash(label, planner, &opts.budget, &opts.oracle);
    let t0 = std::time::Instant::now();
    let result = match planner {
        PlannerKind::Mosaic => plan(scenario, skills, &oracle_cfg, &opts.budget),
        PlannerKind::Options => skills_as_options_plan(
            scenario,
            skills,
            &OptionsConfig {
                seed,
                ..OptionsConfig::default()
            },
            &opts.budget,
        ),
        PlannerKind::Cem => cem_plan(
            scenario,
            skills,
            &CemConfig {
                seed,
                ..CemConfig::default()
            },
            &opts.budget,
        ),
        PlannerKind::Roadmap => roadmap_plan(
            scenario,
            skills,
            &RoadmapConfig {
                seed,
                ..RoadmapConfig::default()
            },
            &opts.budget,
        ),
        PlannerKind::IncRoadmap => incremental_roadmap_plan(
            scenario,
            skills,
            &RoadmapConfig {
                seed,
                ..RoadmapConfig::default()
            },
            &opts.budget,
        ),
    };
    let elapsed = t0.elapsed().as_secs_f64();
    match result {
        Ok(p) => {
            let valid = !opts.validate || validate_plan(scenario, skills, &p).ok;
            let record = RunRecord {
                scenario: label.into(),
                planner: planner.name().into(),
                seed,
                success: valid,
                plan_length: if valid { Some(p.len()) } else { None },
                planning_time_s: elapsed,
                iterations: p.iterations,
                config_hash: hash,
            };
            (record, Some(p))
        }
        Err(report) => (
            RunRecord {
                scenario: label.into(),
                planner: planner.name().into(),
                seed,
                success: false,
                plan_length: None,
                planning_time_s: elapsed,
                iterations: report.iterations,
                config_hash: hash,
            },
            None,
        ),
    }
}

pub struct SuiteResult {
    pub records: Vec<RunRecord>,
}

/// Run the full grid. Cells are distributed over `workers` threads and
/// merged back in deterministic cell order.
pub fn run_suite(
    families: &[Family],
    planners: &[PlannerKind],
    seeds: &[u64],
    opts: &SuiteOptions,
    workers: usize,
) -> SuiteResult {
    let cells: Vec<(Family, PlannerKind, u64)> = families
        .iter()
        .flat_map(|&f| {
            planners
                .iter()
                .flat_map(move |&p| seeds.iter().map(move |&s| (f, p, s)))
        })
        .collect();
    let records = if workers <= 1 {
        cells
            .iter()
            .map(|&(f, p, s)| run_one(f, p, s, opts).0)
            .collect()
    } else {
        let mut slots: Vec<Option<RunRecord>> = vec![None; cells.len()];
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots_mutex = std::sync::Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= cells.len() {
                        break;
                    }
                    let (f, p, s) = cells[i];
                    let rec = run_one(f, p, s, opts).0;
                    slots_mutex.lock().unwrap()[i] = Some(rec);
                });
            }
        });
        slots.into_iter().map(|r| r.expect("all cells ran")).collect()
    };
    SuiteResult { records }
}

fn fmt_time(t: f64, redact: bool) -> f64 {
    if redact {
        0.0
    } else {
        t
    }
}

pub fn records_csv(records: &[RunRecord], redact: bool) -> String {
    let mut out = String::from(
        "scenario,planner,seed,success,plan_length,planning_time_s,iterations,config_hash\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{},{}\n",
            r.scenario,
            r.planner,
            r.seed,
            r.success,
            r.plan_length.map_or(String::new(), |l| l.to_string()),
            fmt_time(r.planning_time_s, redact),
            r.iterations,
            r.config_hash,
        ));
    }
    out
}

pub fn records_json(records: &[RunRecord], redact: bool) -> String {
    let redacted: Vec<RunRecord> = records
        .iter()
        .map(|r| RunRecord {
            planning_time_s: fmt_time(r.planning_time_s, redact),
            ..r.clone()
        })
        .collect();
    serde_json::to_string_pretty(&redacted).expect("records serialize") + "\n"
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CellSummary {
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_plan_length: Option<f64>,
    pub time_median_s: f64,
    pub time_iqr_low_s: f64,
    pub time_iqr_high_s: f64,
    pub time_mean_s: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HeadToHead {
    pub planners: Vec<String>,
    /// `time_ratio[i][j]`: mean planning-time ratio of planner i to planner
    /// j over instances both solved (1.0 on the diagonal).
    pub time_ratio: Vec<Vec<Option<f64>>>,
    /// `length_ratio[i][j]`: mean plan-length ratio of planner i to j.
    pub length_ratio: Vec<Vec<Option<f64>>>,
    pub common_solved: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SuiteSummary {
    pub cells: BTreeMap<String, CellSummary>,
    pub head_to_head: BTreeMap<String, HeadToHead>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Aggregate statistics recomputed directly from the raw records.
pub fn summarize(records: &[RunRecord], redact: bool) -> SuiteSummary {
    let mut cells: BTreeMap<String, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry(format!("{}/{}", r.scenario, r.planner))
            .or_default()
            .push(r);
    }
    let cell_summaries: BTreeMap<String, CellSummary> = cells
        .iter()
        .map(|(key, rs)| {
            let successes = rs.iter().filter(|r| r.success).count();
            let mut times: Vec<f64> = rs
                .iter()
                .map(|r| fmt_time(r.planning_time_s, redact))
                .collect();
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let lengths: Vec<f64> = rs
                .iter()
                .filter_map(|r| r.plan_length.map(|l| l as f64))
                .collect();
            (
                key.clone(),
                CellSummary {
                    runs: rs.len(),
                    successes,
                    success_rate: successes as f64 / rs.len() as f64,
                    mean_plan_length: if lengths.is_empty() {
                        None
                    } else {
                        Some(lengths.iter().sum::<f64>() / lengths.len() as f64)
                    },
                    time_median_s: quantile(&times, 0.5),
                    time_iqr_low_s: quantile(&times, 0.25),
                    time_iqr_high_s: quantile(&times, 0.75),
                    time_mean_s: times.iter().sum::<f64>() / times.len().max(1) as f64,
                },
            )
        })
        .collect();

    // Head-to-head per family over commonly solved (family, seed) instances.
    let mut families: Vec<String> = records.iter().map(|r| r.scenario.clone()).collect();
    families.sort();
    families.dedup();
    let mut planners: Vec<String> = records.iter().map(|r| r.planner.clone()).collect();
    planners.sort();
    planners.dedup();

    let mut head_to_head = BTreeMap::new();
    for family in &families {
        let lookup = |p: &str, seed: u64| -> Option<&RunRecord> {
            records
                .iter()
                .find(|r| r.scenario == *family && r.planner == p && r.seed == seed)
        };
        let mut seeds: Vec<u64> = records
            .iter()
            .filter(|r| r.scenario == *family)
            .map(|r| r.seed)
            .collect();
        seeds.sort();
        seeds.dedup();
        let n = planners.len();
        let mut time_ratio = vec![vec![None; n]; n];
        let mut length_ratio = vec![vec![None; n]; n];
        let mut common = vec![vec![0usize; n]; n];
        for (i, pi) in planners.iter().enumerate() {
            for (j, pj) in planners.iter().enumerate() {
                let mut t_ratios = Vec::new();
                let mut l_ratios = Vec::new();
                for &seed in &seeds {
                    if let (Some(a), Some(b)) = (lookup(pi, seed), lookup(pj, seed)) {
                        if a.success && b.success {
                            let ta = fmt_time(a.planning_time_s, redact);
                            let tb = fmt_time(b.planning_time_s, redact);
                            if i == j {
                                t_ratios.push(1.0);
                            } else if tb > 0.0 {
                                t_ratios.push(ta / tb);
                            }
                            if let (Some(la), Some(lb)) = (a.plan_length, b.plan_length) {
                                if i == j {
                                    l_ratios.push(1.0);
                                } else if lb > 0 {
                                    l_ratios.push(la as f64 / lb as f64);
                                }
                            }
                        }
                    }
                }
                common[i][j] = t_ratios.len().max(l_ratios.len());
                if !t_ratios.is_empty() {
                    time_ratio[i][j] =
                        Some(t_ratios.iter().sum::<f64>() / t_ratios.len() as f64);
                }
                if !l_ratios.is_empty() {
                    length_ratio[i][j] =
                        Some(l_ratios.iter().sum::<f64>() / l_ratios.len() as f64);
                }
            }
        }
        head_to_head.insert(
            family.clone(),
            HeadToHead {
                planners: planners.clone(),
                time_ratio,
                length_ratio,
                common_solved: common,
            },
        );
    }
    SuiteSummary {
        cells: cell_summaries,
        head_to_head,
    }
}

/// Write `runs.csv`, `runs.json`, and `summary.json` under `out_dir`.
pub fn write_outputs(
    out_dir: &Path,
    records: &[RunRecord],
    redact: bool,
) -> std::io::Result<SuiteSummary> {
    std::fs::create_dir_all(out_dir)?;
    let mut csv = std::fs::File::create(out_dir.join("runs.csv"))?;
    csv.write_all(records_csv(records, redact).as_bytes())?;
    let mut json = std::fs::File::create(out_dir.join("runs.json"))?;
    json.write_all(records_json(records, redact).as_bytes())?;
    let summary = summarize(records, redact);
    let mut sfile = std::fs::File::create(out_dir.join("summary.json"))?;
    sfile.write_all((serde_json::to_string_pretty(&summary).unwrap() + "\n").as_bytes())?;
    Ok(summary)
}
