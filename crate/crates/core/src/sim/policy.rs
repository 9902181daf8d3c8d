//! Resource-agent energy/time trade policy.
//!
//! A machine whose uptime falls below the threshold speeds up: each step
//! takes one minute off its expected duration and multiplies its energy
//! cost by `1 + rate` (compounding). Steps are added until the projected
//! uptime clears the threshold or the cap is reached. Projected uptime
//! after `k` steps is `uptime × min(efficiency, 1) × d / (d − k)`.
//!
//! If the fleet's expected energy then exceeds the budget, the machine with
//! the highest uptime slows down (one minute more, energy × `1 − rate` per
//! step) as long as its own projection stays above the threshold; the next
//! one takes over when it cannot.

use std::collections::BTreeMap;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Deserializer, Serialize};

use super::SimError;
use crate::kb::KnowledgeBase;
use crate::runtime::{
    change_resource_performance, compute_oee, expected_performance, machines, resolve_plan_instance, Performance,
    RuntimeError, SimTime,
};

/// Reads a decimal from a TOML/JSON number through its shortest decimal
/// text, so `0.05` stays exactly 0.05.
pub(crate) fn decimal_from_number<'de, D: Deserializer<'de>>(d: D) -> Result<Decimal, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        Int(i64),
        Float(f64),
        Text(String),
    }
    let text = match Num::deserialize(d)? {
        Num::Int(i) => return Ok(Decimal::from(i)),
        Num::Float(f) => f.to_string(),
        Num::Text(s) => s,
    };
    text.parse::<Decimal>()
        .or_else(|_| Decimal::from_scientific(&text))
        .map_err(serde::de::Error::custom)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RaPolicyConfig {
    #[serde(deserialize_with = "decimal_from_number")]
    pub uptime_threshold: Decimal,
    #[serde(deserialize_with = "decimal_from_number")]
    pub energy_budget_kwh: Decimal,
    #[serde(deserialize_with = "decimal_from_number")]
    pub trade_rate_per_minute: Decimal,
    pub evaluation_window_min: i64,
    pub speed_up_steps_cap: u32,
}

impl Default for RaPolicyConfig {
    fn default() -> Self {
        RaPolicyConfig {
            uptime_threshold: Decimal::new(5, 1),
            energy_budget_kwh: Decimal::from(450),
            trade_rate_per_minute: Decimal::new(5, 2),
            evaluation_window_min: 500,
            speed_up_steps_cap: 5,
        }
    }
}

impl RaPolicyConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if self.uptime_threshold <= Decimal::ZERO || self.uptime_threshold >= Decimal::ONE {
            return bad("policy.uptime_threshold must be within (0, 1)");
        }
        if self.trade_rate_per_minute <= Decimal::ZERO || self.trade_rate_per_minute >= Decimal::ONE {
            return bad("policy.trade_rate_per_minute must be within (0, 1)");
        }
        if self.energy_budget_kwh < Decimal::ZERO {
            return bad("policy.energy_budget_kwh must be >= 0");
        }
        if self.evaluation_window_min <= 0 {
            return bad("policy.evaluation_window_min must be > 0");
        }
        Ok(())
    }
}

/// What a resource agent knows about its machine when the policy runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MachineSnapshot {
    pub machine: String,
    pub plan: String,
    #[serde(with = "rust_decimal::serde::float")]
    pub uptime: Decimal,
    #[serde(with = "rust_decimal::serde::float")]
    pub perf_efficiency: Decimal,
    pub expected: Performance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Adjustment {
    pub machine: String,
    pub plan: String,
    /// Negative for a speed-up.
    pub duration_delta: i64,
    /// Overall energy multiplier, e.g. 1.1025 for two speed-up steps.
    #[serde(with = "rust_decimal::serde::float")]
    pub energy_factor: Decimal,
    pub before: Performance,
    pub after: Performance,
}

fn projected_uptime(s: &MachineSnapshot, duration: Decimal) -> Decimal {
    s.uptime * s.perf_efficiency.min(Decimal::ONE) * s.expected.duration_min() / duration
}

pub fn fleet_energy<'a>(perfs: impl IntoIterator<Item = &'a Performance>) -> Decimal {
    perfs.into_iter().map(Performance::energy_kwh).sum()
}

struct Working {
    steps: i64,
    perf: Performance,
}

/// Pure policy: which machines change and how. Does not touch the KB.
pub fn plan_adjustments(snapshots: &[MachineSnapshot], policy: &RaPolicyConfig) -> Result<Vec<Adjustment>, SimError> {
    let up = Decimal::ONE + policy.trade_rate_per_minute;
    let down = Decimal::ONE - policy.trade_rate_per_minute;
    let cap = i64::from(policy.speed_up_steps_cap);
    let mut work: BTreeMap<&str, Working> = snapshots
        .iter()
        .map(|s| {
            (
                s.machine.as_str(),
                Working {
                    steps: 0,
                    perf: s.expected,
                },
            )
        })
        .collect();

    let mut below: Vec<&MachineSnapshot> = snapshots
        .iter()
        .filter(|s| s.uptime < policy.uptime_threshold)
        .collect();
    below.sort_by(|a, b| (a.uptime, &a.machine).cmp(&(b.uptime, &b.machine)));
    for s in &below {
        let w = work.get_mut(s.machine.as_str()).expect("snapshot machine");
        while w.steps < cap
            && w.perf.duration_min() - Decimal::ONE >= Decimal::ONE
            && projected_uptime(s, w.perf.duration_min()) <= policy.uptime_threshold
        {
            w.perf = Performance::new(
                w.perf.duration_min() - Decimal::ONE,
                w.perf.energy_kwh() * up,
                w.perf.emissions(),
                w.perf.quality(),
            )?;
            w.steps += 1;
        }
    }

    let sped: Vec<&str> = work.iter().filter(|(_, w)| w.steps > 0).map(|(m, _)| *m).collect();
    let mut donors: Vec<&MachineSnapshot> = snapshots
        .iter()
        .filter(|s| !sped.contains(&s.machine.as_str()))
        .collect();
    donors.sort_by(|a, b| (b.uptime, &a.machine).cmp(&(a.uptime, &b.machine)));
    let mut slow_steps: BTreeMap<&str, i64> = BTreeMap::new();
    let total = |work: &BTreeMap<&str, Working>| fleet_energy(work.values().map(|w| &w.perf));
    'budget: while total(&work) > policy.energy_budget_kwh {
        for s in &donors {
            let taken = slow_steps.entry(s.machine.as_str()).or_default();
            let w = work.get_mut(s.machine.as_str()).expect("snapshot machine");
            let longer = w.perf.duration_min() + Decimal::ONE;
            if *taken < cap && projected_uptime(s, longer) > policy.uptime_threshold {
                w.perf = Performance::new(longer, w.perf.energy_kwh() * down, w.perf.emissions(), w.perf.quality())?;
                *taken += 1;
                continue 'budget;
            }
        }
        return Err(SimError::BudgetInfeasible {
            fleet_energy_kwh: total(&work),
            budget_kwh: policy.energy_budget_kwh,
        });
    }

    let mut out = Vec::new();
    for s in snapshots {
        let after = work[s.machine.as_str()].perf;
        if after == s.expected {
            continue;
        }
        let delta = after.duration_min() - s.expected.duration_min();
        out.push(Adjustment {
            machine: s.machine.clone(),
            plan: s.plan.clone(),
            duration_delta: delta.to_i64().expect("step counts are small integers"),
            energy_factor: if s.expected.energy_kwh().is_zero() {
                Decimal::ONE
            } else {
                (after.energy_kwh() / s.expected.energy_kwh()).normalize()
            },
            before: s.expected,
            after,
        });
    }
    // slow-downs first so the fleet never passes the budget mid-commit
    out.sort_by(|a, b| (b.duration_delta > 0, &a.machine).cmp(&(a.duration_delta > 0, &b.machine)));
    Ok(out)
}

/// Uptime/efficiency observations for one machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub machine: String,
    pub uptime: Decimal,
    pub perf_efficiency: Decimal,
}

/// Snapshot of every machine's plan for `plan` in the KB.
pub fn snapshots(
    kb: &KnowledgeBase,
    plan: &str,
    observations: &[Observation],
) -> Result<Vec<MachineSnapshot>, SimError> {
    observations
        .iter()
        .map(|o| {
            let instance = resolve_plan_instance(kb, &o.machine, plan)?;
            let instance = crate::runtime::local_id(&instance);
            Ok(MachineSnapshot {
                machine: o.machine.clone(),
                expected: expected_performance(kb, &instance)?,
                plan: instance,
                uptime: o.uptime,
                perf_efficiency: o.perf_efficiency,
            })
        })
        .collect()
}

/// Plans adjustments from the given observations and commits them through
/// the runtime model, slow-downs first.
pub fn ra_adjust(
    kb: &mut KnowledgeBase,
    policy: &RaPolicyConfig,
    plan: &str,
    observations: &[Observation],
) -> Result<Vec<Adjustment>, SimError> {
    let snaps = snapshots(kb, plan, observations)?;
    let adjustments = plan_adjustments(&snaps, policy)?;
    for a in &adjustments {
        change_resource_performance(kb, &a.machine, &a.plan, &a.after)?;
    }
    Ok(adjustments)
}

/// Observes every machine's OEE over `[start, end)` and applies the policy.
pub fn ra_evaluate_and_adjust(
    kb: &mut KnowledgeBase,
    policy: &RaPolicyConfig,
    plan: &str,
    start: SimTime,
    end: SimTime,
) -> Result<Vec<Adjustment>, SimError> {
    let observations = observe(kb, start, end)?;
    ra_adjust(kb, policy, plan, &observations)
}

pub fn observe(kb: &KnowledgeBase, start: SimTime, end: SimTime) -> Result<Vec<Observation>, RuntimeError> {
    machines(kb)
        .into_iter()
        .map(|m| {
            let r = compute_oee(kb, &m, start, end)?;
            Ok(Observation {
                machine: m,
                uptime: r.uptime,
                perf_efficiency: r.perf_efficiency,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn snap(m: &str, uptime: &str, eff: &str, dur: i64, energy: i64) -> MachineSnapshot {
        MachineSnapshot {
            machine: m.into(),
            plan: format!("P1@{m}"),
            uptime: d(uptime),
            perf_efficiency: d(eff),
            expected: Performance::new(Decimal::from(dur), Decimal::from(energy), Decimal::ZERO, Decimal::ONE).unwrap(),
        }
    }

    fn table_one(uptimes: [&str; 4], effs: [&str; 4]) -> Vec<MachineSnapshot> {
        vec![
            snap("M1", uptimes[0], effs[0], 20, 100),
            snap("M2", uptimes[1], effs[1], 18, 110),
            snap("M3", uptimes[2], effs[2], 15, 120),
            snap("M4", uptimes[3], effs[3], 17, 115),
        ]
    }

    #[test]
    fn case_study_adjustment() {
        let snaps = table_one(["0.48", "0.60", "0.80", "0.70"], ["0.95", "0.93", "0.80", "0.85"]);
        let adj = plan_adjustments(&snaps, &RaPolicyConfig::default()).unwrap();
        assert_eq!(adj.len(), 2);
        assert_eq!(adj[0].machine, "M3");
        assert_eq!(
            (adj[0].after.duration_min(), adj[0].after.energy_kwh()),
            (d("16"), d("114"))
        );
        assert_eq!(adj[0].duration_delta, 1);
        assert_eq!(adj[1].machine, "M1");
        assert_eq!(
            (adj[1].after.duration_min(), adj[1].after.energy_kwh()),
            (d("18"), d("110.25"))
        );
        assert_eq!(adj[1].duration_delta, -2);
        assert_eq!(adj[1].energy_factor, d("1.1025"));
        let fleet = d("110.25") + d("110") + d("114") + d("115");
        let after: Vec<Performance> = snaps
            .iter()
            .map(|s| {
                adj.iter()
                    .find(|a| a.machine == s.machine)
                    .map_or(s.expected, |a| a.after)
            })
            .collect();
        assert_eq!(fleet_energy(&after), fleet);
        assert_eq!(fleet, d("449.25"));
    }

    #[test]
    fn nothing_to_do_above_threshold() {
        let snaps = table_one(["0.6", "0.6", "0.8", "0.7"], ["1", "1", "1", "1"]);
        assert!(plan_adjustments(&snaps, &RaPolicyConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn steps_stop_at_the_cap() {
        let snaps = vec![snap("M1", "0.1", "1", 20, 100)];
        let policy = RaPolicyConfig {
            energy_budget_kwh: Decimal::from(10_000),
            ..Default::default()
        };
        let adj = plan_adjustments(&snaps, &policy).unwrap();
        assert_eq!(adj[0].duration_delta, -5);
        assert_eq!(adj[0].after.energy_kwh(), d("127.62815625"));
    }

    #[test]
    fn duration_never_below_one_minute() {
        let snaps = vec![snap("M1", "0.1", "1", 2, 100)];
        let adj = plan_adjustments(&snaps, &RaPolicyConfig::default()).unwrap();
        assert_eq!(adj[0].after.duration_min(), Decimal::ONE);
    }

    #[test]
    fn budget_can_be_infeasible() {
        let snaps = table_one(["0.2", "0.2", "0.2", "0.2"], ["1", "1", "1", "1"]);
        assert!(matches!(
            plan_adjustments(&snaps, &RaPolicyConfig::default()),
            Err(SimError::BudgetInfeasible { .. })
        ));
    }

    #[test]
    fn toml_decimals_are_exact() {
        let p: RaPolicyConfig = toml::from_str("trade_rate_per_minute = 0.05\nenergy_budget_kwh = 450").unwrap();
        assert_eq!(p.trade_rate_per_minute, d("0.05"));
        assert_eq!(p.energy_budget_kwh, d("450"));
        assert_eq!(p.evaluation_window_min, 500);
    }
}
