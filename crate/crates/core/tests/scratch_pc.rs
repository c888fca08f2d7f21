mod common;

use common::transport_scenario;
use mosaic_core::oracle::OracleConfig;
use mosaic_core::planner::{plan, PlanBudget};
use mosaic_core::skills::SkillConfig;
use std::time::Duration;

#[test]
#[ignore]
fn iteration_distribution() {
    let scenario = transport_scenario(true);
    let cfg = SkillConfig::default();
    let mut iters: Vec<u64> = Vec::new();
    let t0 = std::time::Instant::now();
    for seed in 0..50u64 {
        let oracle = OracleConfig {
            seed,
            ..OracleConfig::default()
        };
        match plan(
            &scenario,
            &cfg,
            &oracle,
            &PlanBudget::new(10_000, Duration::from_secs(120)),
        ) {
            Ok(p) => iters.push(p.iterations),
            Err(r) => {
                eprintln!("seed {seed}: FAILED after {} iters", r.iterations);
                iters.push(u64::MAX);
            }
        }
    }
    let mut sorted = iters.clone();
    sorted.sort();
    eprintln!(
        "min {} median {} p90 {} max {} | wall for 50 runs: {:?}",
        sorted[0],
        sorted[25],
        sorted[45],
        sorted[49],
        t0.elapsed()
    );
    let solved = iters.iter().filter(|&&i| i != u64::MAX).count();
    eprintln!("solved {solved}/50");
}
