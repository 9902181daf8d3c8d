//! OEE from execution history: record a few runs on M1 and compute
//! uptime, performance efficiency, quality rate and OEE over windows.
//!
//! ```bash
//! cargo run --example oee_report
//! ```

use ontomas::builder::{build_abox, parse_csv_bundle, read_bundle_dir};
use ontomas::kb::KnowledgeBase;
use ontomas::runtime::{
    add_planned_execution_data, compute_oee, update_execution_data, ExecStatus, ExecutionPatch, NewExecution,
    Performance, SimTime,
};
use rust_decimal::Decimal;

/// Plans a 20-minute run of P1 on M1 at `start` and records it as taking
/// `real` minutes with the given quality.
fn run(kb: &mut KnowledgeBase, start: i64, real: i64, quality: &str) -> Result<(), Box<dyn std::error::Error>> {
    let id = add_planned_execution_data(
        kb,
        &NewExecution {
            product: "part".into(),
            plan: "P1@M1".into(),
            planned_start: SimTime(start),
            planned_end: SimTime(start + 20),
            resource: Some("M1".into()),
        },
    )?;
    update_execution_data(
        kb,
        &id,
        &ExecutionPatch {
            status: Some(ExecStatus::Running),
            real_start: Some(SimTime(start)),
            ..Default::default()
        },
    )?;
    update_execution_data(
        kb,
        &id,
        &ExecutionPatch {
            status: Some(ExecStatus::Successful),
            real_end: Some(SimTime(start + real)),
            real_performance: Some(Performance::new(
                Decimal::from(real),
                Decimal::from(100),
                Decimal::ZERO,
                quality.parse()?,
            )?),
            ..Default::default()
        },
    )?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/case_study");
    let mut kb = KnowledgeBase::new();
    build_abox(&mut kb, &parse_csv_bundle(&read_bundle_dir(&dir)?)?)?;

    run(&mut kb, 0, 20, "1")?;
    run(&mut kb, 30, 25, "0.9")?; // five minutes slow, some scrap
    run(&mut kb, 70, 20, "1")?;

    println!(
        "{:<12} {:>5} {:>6} {:>10} {:>8} {:>8}",
        "window", "busy", "uptime", "efficiency", "quality", "OEE"
    );
    for (a, b) in [(0, 50), (0, 100), (25, 75), (50, 100)] {
        let r = compute_oee(&kb, "M1", SimTime(a), SimTime(b))?;
        println!(
            "{:<12} {:>5} {:>6} {:>10} {:>8} {:>8}",
            format!("{a}..{b}"),
            r.busy_minutes,
            r.uptime.round_dp(3),
            r.perf_efficiency.round_dp(3),
            r.quality_rate.round_dp(3),
            r.oee.round_dp(3)
        );
    }
    Ok(())
}
