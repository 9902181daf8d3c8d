//! Product-agent machine selection. The KB only lists which plans each
//! machine can run and what they are expected to cost; the agent scores
//! the candidates with its product's objective function.

use rust_decimal::Decimal;
use serde::Serialize;

use super::SimError;
use crate::kb::vocab::{ex_term, CAPABLE_OF, DEFINES, REALIZES};
use crate::kb::KnowledgeBase;
use crate::runtime::{
    executions_on_resource, expected_performance, machines, product_objective, Coefficient, ExecStatus, Metric,
    Performance, RuntimeError, SimTime,
};

/// One machine/plan option as the product agent sees it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Candidate {
    pub machine: String,
    pub plan: String,
    pub expected: Performance,
    /// When the machine's already planned or running work is expected to
    /// end; `None` if it has none.
    pub free_at: Option<SimTime>,
    /// `max(now, free_at) + expected duration`.
    pub completion: SimTime,
    #[serde(with = "rust_decimal::serde::float")]
    pub score: Decimal,
}

/// Σ coefficient × metric, with completion time measured in minutes from
/// `now`.
pub fn objective_score(coefficients: &[Coefficient], expected: &Performance, completion_in: i64) -> Decimal {
    coefficients
        .iter()
        .map(|c| {
            let metric = match c.metric {
                Metric::CompletionTime => Decimal::from(completion_in),
                Metric::EnergyKwh => expected.energy_kwh(),
                Metric::Emissions => expected.emissions(),
                Metric::Quality => expected.quality(),
            };
            c.value * metric
        })
        .sum()
}

/// Latest expected end of the planned and running work on a machine.
pub fn machine_free_at(kb: &KnowledgeBase, machine: &str) -> Result<Option<SimTime>, RuntimeError> {
    let mut free: Option<SimTime> = None;
    for e in executions_on_resource(kb, machine)? {
        let end = match e.status {
            ExecStatus::Planned => e.planned_end,
            ExecStatus::Running => {
                let start = e.real_start.unwrap_or(e.planned_start);
                e.planned_end.max(start + (e.planned_end - e.planned_start))
            }
            _ => continue,
        };
        free = Some(free.map_or(end, |f| f.max(end)));
    }
    Ok(free)
}

/// Every machine/plan pair able to realize one of the product's features,
/// scored at time `now`, best first (score, then machine id, then plan).
pub fn candidates(kb: &KnowledgeBase, product: &str, now: SimTime) -> Result<Vec<Candidate>, SimError> {
    let g = kb.graph();
    let coefficients = product_objective(kb, product)?;
    let features = g.objects_of(&ex_term(product), &ex_term(DEFINES));
    let mut out = Vec::new();
    for m in machines(kb) {
        let plans = g.objects_of(&ex_term(&m), &ex_term(CAPABLE_OF));
        let free_at = machine_free_at(kb, &m)?;
        for plan in plans {
            let realizes = g.objects_of(&plan, &ex_term(REALIZES));
            if !realizes.iter().any(|f| features.contains(f)) {
                continue;
            }
            let plan_id = crate::runtime::local_id(&plan);
            let Ok(expected) = expected_performance(kb, &plan_id) else {
                continue;
            };
            let start = free_at.map_or(now, |f| now.max(f));
            let duration = expected.duration_min().ceil().try_into().unwrap_or(i64::MAX / 4);
            let completion = start + duration;
            out.push(Candidate {
                machine: m.clone(),
                plan: plan_id,
                expected,
                free_at,
                completion,
                score: objective_score(&coefficients, &expected, completion - now),
            });
        }
    }
    out.sort_by(|a, b| (a.score, &a.machine, &a.plan).cmp(&(b.score, &b.machine, &b.plan)));
    Ok(out)
}

/// The machine/plan the product agent picks: argmin of its objective.
pub fn pa_select_machine(kb: &KnowledgeBase, product: &str, now: SimTime) -> Result<Candidate, SimError> {
    candidates(kb, product, now)?
        .into_iter()
        .next()
        .ok_or_else(|| SimError::NoCapableResource(product.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{build_abox, parse_csv_bundle, read_bundle_dir};
    use crate::runtime::{add_planned_execution_data, change_resource_performance, update_execution_data};
    use crate::runtime::{ExecutionPatch, NewExecution};

    fn kb() -> KnowledgeBase {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/case_study");
        let pd = parse_csv_bundle(&read_bundle_dir(&dir).unwrap()).unwrap();
        let mut kb = KnowledgeBase::new();
        build_abox(&mut kb, &pd).unwrap();
        kb
    }

    #[test]
    fn idle_plant_picks_fastest() {
        let kb = kb();
        let c = pa_select_machine(&kb, "part", SimTime(0)).unwrap();
        assert_eq!(
            (c.machine.as_str(), c.plan.as_str(), c.completion),
            ("M3", "P1@M3", SimTime(15))
        );
    }

    #[test]
    fn busy_machine_loses_to_next_fastest() {
        let mut kb = kb();
        // M3 is busy for 10 more minutes at t = 100
        let id = add_planned_execution_data(
            &mut kb,
            &NewExecution {
                product: "part".into(),
                plan: "P1@M3".into(),
                planned_start: SimTime(95),
                planned_end: SimTime(110),
                resource: Some("M3".into()),
            },
        )
        .unwrap();
        update_execution_data(
            &mut kb,
            &id,
            &ExecutionPatch {
                status: Some(ExecStatus::Running),
                real_start: Some(SimTime(95)),
                ..Default::default()
            },
        )
        .unwrap();
        let all = candidates(&kb, "part", SimTime(100)).unwrap();
        let m3 = all.iter().find(|c| c.machine == "M3").unwrap();
        assert_eq!(m3.completion - SimTime(100), 25);
        assert_eq!(all[0].machine, "M4");
        assert_eq!(all[0].completion - SimTime(100), 17);
    }

    #[test]
    fn adjusted_durations_still_pick_m3() {
        let mut kb = kb();
        let p = |d: i64, e: &str| {
            Performance::new(Decimal::from(d), e.parse().unwrap(), Decimal::ZERO, Decimal::ONE).unwrap()
        };
        change_resource_performance(&mut kb, "M1", "P1", &p(18, "110.25")).unwrap();
        change_resource_performance(&mut kb, "M3", "P1", &p(16, "114")).unwrap();
        let all = candidates(&kb, "part", SimTime(0)).unwrap();
        let order: Vec<&str> = all.iter().map(|c| c.machine.as_str()).collect();
        assert_eq!(order, ["M3", "M4", "M1", "M2"]);
    }

    #[test]
    fn score_weights_every_metric() {
        let perf = Performance::new(Decimal::from(15), Decimal::from(120), Decimal::from(3), Decimal::ONE).unwrap();
        let coefs = [
            Coefficient {
                metric: Metric::CompletionTime,
                value: Decimal::ONE,
            },
            Coefficient {
                metric: Metric::EnergyKwh,
                value: Decimal::new(5, 1),
            },
            Coefficient {
                metric: Metric::Emissions,
                value: Decimal::from(2),
            },
            Coefficient {
                metric: Metric::Quality,
                value: Decimal::from(-10),
            },
        ];
        assert_eq!(objective_score(&coefs, &perf, 15), Decimal::from(15 + 60 + 6 - 10));
    }
}
