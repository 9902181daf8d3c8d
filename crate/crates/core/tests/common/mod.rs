//! Shared helpers for the integration tests: fixture loading, random
//! fixtures, and a brute-force query evaluator used as an oracle.

#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;
use std::path::PathBuf;

use ontomas::builder::{build_abox, parse_csv_bundle, read_bundle_dir};
use ontomas::kb::KnowledgeBase;
use ontomas::runtime::{
    add_planned_execution_data, update_execution_data, ExecStatus, ExecutionPatch, NewExecution, Performance, SimTime,
};
use rand::Rng;
use rust_decimal::Decimal;

pub fn fixture(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(path)
}

pub fn bundle(name: &str) -> BTreeMap<String, String> {
    read_bundle_dir(&fixture(name)).expect("fixture bundle")
}

pub fn case_study_kb() -> KnowledgeBase {
    let pd = parse_csv_bundle(&bundle("case_study")).expect("case study parses");
    let mut kb = KnowledgeBase::new();
    build_abox(&mut kb, &pd).expect("case study builds");
    kb
}

pub fn dec(s: &str) -> Decimal {
    s.parse().expect("decimal literal")
}

/// What a random history fixture put into the KB for one execution.
#[derive(Clone, Debug)]
pub struct Recorded {
    pub id: String,
    pub machine: String,
    pub status: ExecStatus,
    pub real_start: Option<i64>,
    pub real_end: Option<i64>,
    pub energy: Option<Decimal>,
}

/// Records `n` executions of P1 with random machines, outcomes, times and
/// real performance. Products are created from the `part` template.
pub fn random_history(kb: &mut KnowledgeBase, rng: &mut impl Rng, n: usize) -> Vec<Recorded> {
    let machines = ["M1", "M2", "M3", "M4"];
    let mut out = Vec::new();
    for i in 0..n {
        let product = format!("fx{i:03}");
        let deadline = SimTime(10_000).to_datetime();
        ontomas::runtime::instantiate_product(kb, "part", &product, deadline).unwrap();
        let machine = machines[rng.random_range(0..machines.len())];
        let start = rng.random_range(0..2_000i64);
        let planned = rng.random_range(10..25i64);
        let id = add_planned_execution_data(
            kb,
            &NewExecution {
                product: product.clone(),
                plan: format!("P1@{machine}"),
                planned_start: SimTime(start),
                planned_end: SimTime(start + planned),
                resource: Some(machine.into()),
            },
        )
        .unwrap();
        let mut rec = Recorded {
            id: id.clone(),
            machine: machine.into(),
            status: ExecStatus::Planned,
            real_start: None,
            real_end: None,
            energy: None,
        };
        // 0: stays planned, 1: running, 2: successful, 3: errored
        let stage = rng.random_range(0..4);
        if stage >= 1 {
            let real_start = start + rng.random_range(0..5i64);
            update_execution_data(
                kb,
                &id,
                &ExecutionPatch {
                    status: Some(ExecStatus::Running),
                    real_start: Some(SimTime(real_start)),
                    ..Default::default()
                },
            )
            .unwrap();
            rec.status = ExecStatus::Running;
            rec.real_start = Some(real_start);
            if stage >= 2 {
                let real_end = real_start + rng.random_range(1..30i64);
                let energy = Decimal::new(rng.random_range(5_000..15_000i64), 2);
                let quality = Decimal::new(rng.random_range(80..=100i64), 2);
                let emissions = Decimal::new(rng.random_range(0..500i64), 1);
                let perf = Performance::new(Decimal::from(real_end - real_start), energy, emissions, quality).unwrap();
                let status = if stage == 2 {
                    ExecStatus::Successful
                } else {
                    ExecStatus::Errored
                };
                update_execution_data(
                    kb,
                    &id,
                    &ExecutionPatch {
                        status: Some(status),
                        real_end: Some(SimTime(real_end)),
                        real_performance: Some(perf),
                        error_message: (status == ExecStatus::Errored).then(|| "spindle fault".into()),
                        ..Default::default()
                    },
                )
                .unwrap();
                rec.status = status;
                rec.real_end = Some(real_end);
                rec.energy = Some(energy);
            }
        }
        out.push(rec);
    }
    out
}
