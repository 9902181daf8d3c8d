//! Walk one process execution through its lifecycle the way product and
//! resource agents do: propose, acknowledge, start, finish. Illegal
//! transitions are refused and leave the knowledge base untouched.
//!
//! ```bash
//! cargo run --example lifecycle
//! ```

use chrono::{TimeZone, Utc};
use ontomas::builder::{build_abox, parse_csv_bundle, read_bundle_dir};
use ontomas::kb::KnowledgeBase;
use ontomas::runtime::{
    add_planned_execution_data, get_product_status, instantiate_product, update_execution_data, ExecStatus,
    ExecutionPatch, NewExecution, Performance, SimTime,
};
use rust_decimal::Decimal;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/case_study");
    let mut kb = KnowledgeBase::new();
    build_abox(&mut kb, &parse_csv_bundle(&read_bundle_dir(&dir)?)?)?;

    // a new part, made from the `part` template
    instantiate_product(
        &mut kb,
        "part",
        "part0042",
        Utc.with_ymd_and_hms(2023, 1, 1, 4, 0, 0).unwrap(),
    )?;

    // product agent proposes M3's variant of P1 without a resource ...
    let id = add_planned_execution_data(
        &mut kb,
        &NewExecution {
            product: "part0042".into(),
            plan: "P1@M3".into(),
            planned_start: SimTime(2),
            planned_end: SimTime(17),
            resource: None,
        },
    )?;
    println!("{id}: proposed (revision {})", kb.revision());

    // ... and M3's resource agent acknowledges it
    let steps = [
        ExecutionPatch {
            status: Some(ExecStatus::Planned),
            resource: Some("M3".into()),
            ..Default::default()
        },
        ExecutionPatch {
            status: Some(ExecStatus::Running),
            real_start: Some(SimTime(2)),
            ..Default::default()
        },
        ExecutionPatch {
            status: Some(ExecStatus::Successful),
            real_end: Some(SimTime(18)),
            real_performance: Some(Performance::new(
                Decimal::from(16),
                Decimal::from(121),
                Decimal::ZERO,
                Decimal::ONE,
            )?),
            ..Default::default()
        },
    ];
    for patch in &steps {
        let e = update_execution_data(&mut kb, &id, patch)?;
        println!("{id}: {} (revision {})", e.status, kb.revision());
    }

    // terminal statuses cannot go back
    let before = kb.dump_turtle();
    let err = update_execution_data(
        &mut kb,
        &id,
        &ExecutionPatch {
            status: Some(ExecStatus::Running),
            ..Default::default()
        },
    )
    .unwrap_err();
    println!("\nrejected: {err} [{}]", err.code());
    assert_eq!(kb.dump_turtle(), before);

    let status = get_product_status(&kb, "part0042")?;
    println!("\n{}", serde_json::to_string_pretty(&status)?);
    Ok(())
}
