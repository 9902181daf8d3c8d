//! Run the default case-study scenario: parts arrive at B1, product agents
//! choose machines, resource agents record every execution and tune their
//! machines every 500 minutes. Prints the policy ticks and the per-window
//! OEE table.
//!
//! ```bash
//! cargo run --example simulate_case_study
//! cargo run --example simulate_case_study -- my-scenario.toml
//! ```

use std::path::PathBuf;

use ontomas::builder::read_bundle_dir;
use ontomas::sim::{run_scenario_with_bundle, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let scenario = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| root.join("fixtures/scenarios/default.toml"));
    let cfg = ScenarioConfig::from_toml(&std::fs::read_to_string(scenario)?)?;
    let bundle = read_bundle_dir(&root.join("fixtures/case_study"))?;

    let (kb, trace) = run_scenario_with_bundle(&bundle, &cfg)?;
    println!(
        "{} parts arrived, {} left through B3, {} trace records, KB revision {}",
        trace.arrived,
        trace.exited,
        trace.records.len(),
        kb.revision()
    );

    for tick in &trace.ticks {
        println!("\npolicy tick at minute {}", tick.time);
        for o in &tick.observations {
            println!("  observed {} uptime {}", o.resource, o.uptime.round_dp(3));
        }
        for a in &tick.adjustments {
            println!(
                "  {} {:+} min -> {} min / {} kWh",
                a.machine,
                a.duration_delta,
                a.after.duration_min(),
                a.after.energy_kwh().round_dp(4)
            );
        }
        if let Some(e) = &tick.error {
            println!("  no change: {e}");
        }
        println!("  fleet energy {} kWh", tick.fleet_energy_kwh.round_dp(4));
    }

    println!("\nOEE per window (from the final knowledge base)");
    println!("{:<4} {:>6} {:>6} {:>6} {:>7}", "", "start", "end", "runs", "uptime");
    for r in &trace.oee_series {
        println!(
            "{:<4} {:>6} {:>6} {:>6} {:>7}",
            r.resource,
            r.window_start.minutes(),
            r.window_end.minutes(),
            r.executions,
            r.uptime.round_dp(3)
        );
    }
    println!("\nfirst trace records:");
    for line in trace.to_jsonl().lines().take(8) {
        println!("  {line}");
    }
    Ok(())
}
