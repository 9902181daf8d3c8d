use rust_decimal::Decimal;
use serde::Serialize;

use super::{
    executions_of_product, literal_decimal, literal_time, local_id, performance_triples, read_performance, require,
    unknown, Coefficient, ExecStatus, Metric, Performance, RuntimeError, SimTime,
};
use crate::kb::vocab::*;
use crate::kb::{Changeset, Iri, KnowledgeBase, Pattern, Term};
use crate::query::{eval_select, parse, QueryForm, Solutions};

/// The resource-history query. `<resource>` and the status literal are
/// placeholders filled in by [`resource_history_query`].
pub const RESOURCE_HISTORY_QUERY: &str = include_str!("../../queries/resource_history.rq");

/// History query text for one resource and status.
pub fn resource_history_query(resource: &Iri, status: ExecStatus) -> String {
    RESOURCE_HISTORY_QUERY
        .replace("<resource>", &format!("<{}>", resource.as_str()))
        .replace("\"successful\"", &format!("\"{}\"", status.as_str()))
}

/// One row of a resource's history.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HistoryRow {
    pub execution_id: String,
    #[serde(with = "rust_decimal::serde::float")]
    pub emissions: Decimal,
    #[serde(with = "rust_decimal::serde::float")]
    pub energy_kwh: Decimal,
    #[serde(with = "rust_decimal::serde::float")]
    pub quality: Decimal,
    pub real_start: SimTime,
    pub real_end: SimTime,
}

/// Converts history-query solutions into rows ordered by (realStart, id).
pub fn history_from_solutions(sol: &Solutions) -> Result<Vec<HistoryRow>, RuntimeError> {
    let mut rows = Vec::with_capacity(sol.rows.len());
    for b in &sol.rows {
        let bad = |var: &str| RuntimeError::InconsistentRecord {
            id: b.get("executionId").map(local_id).unwrap_or_default(),
            reason: format!("history column {var} is missing or mistyped"),
        };
        let dec = |var: &str| b.get(var).and_then(literal_decimal).ok_or_else(|| bad(var));
        let time = |var: &str| b.get(var).and_then(literal_time).ok_or_else(|| bad(var));
        rows.push(HistoryRow {
            execution_id: b.get("executionId").map(local_id).ok_or_else(|| bad("executionId"))?,
            emissions: dec("emissions")?,
            energy_kwh: dec("costs")?,
            quality: dec("quality")?,
            real_start: time("realStartTime")?,
            real_end: time("realEndTime")?,
        });
    }
    rows.sort_by(|a, b| (a.real_start, &a.execution_id).cmp(&(b.real_start, &b.execution_id)));
    Ok(rows)
}

/// Executions on `resource` with the given status, via the history query.
pub fn get_resource_history(
    kb: &KnowledgeBase,
    resource: &str,
    status: ExecStatus,
) -> Result<Vec<HistoryRow>, RuntimeError> {
    let r = require(kb.graph(), resource, RESOURCE)?;
    let text = resource_history_query(r.as_iri().expect("resources are IRIs"), status);
    let QueryForm::Select(q) = parse(&text)?.form else {
        unreachable!("the history query is a SELECT")
    };
    history_from_solutions(&eval_select(kb.graph(), &q))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExecutionSummary {
    pub id: String,
    pub plan: String,
    pub resource: Option<String>,
    pub status: ExecStatus,
    pub planned_start: SimTime,
    pub planned_end: SimTime,
    pub real_start: Option<SimTime>,
    pub real_end: Option<SimTime>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProductStatus {
    pub product: String,
    pub features: Vec<String>,
    pub deadline: Option<SimTime>,
    pub executions: Vec<ExecutionSummary>,
    /// Status of the last execution in plan order, or `no-executions`.
    pub latest_status: String,
}

pub fn get_product_status(kb: &KnowledgeBase, product: &str) -> Result<ProductStatus, RuntimeError> {
    let g = kb.graph();
    let p = require(g, product, PRODUCT)?;
    let mut features: Vec<String> = g.objects_of(&p, &ex_term(DEFINES)).iter().map(local_id).collect();
    features.sort();
    let deadline = g.object_of(&p, &ex_term(DEADLINE)).as_ref().and_then(literal_time);
    let executions: Vec<ExecutionSummary> = executions_of_product(kb, product)?
        .into_iter()
        .map(|e| ExecutionSummary {
            id: e.id,
            plan: e.plan,
            resource: e.resource,
            status: e.status,
            planned_start: e.planned_start,
            planned_end: e.planned_end,
            real_start: e.real_start,
            real_end: e.real_end,
        })
        .collect();
    let latest_status = executions
        .last()
        .map_or("no-executions", |e| e.status.as_str())
        .to_string();
    Ok(ProductStatus {
        product: product.to_string(),
        features,
        deadline,
        executions,
        latest_status,
    })
}

/// The plan instance `resource` is capable of for `plan`: the plan itself
/// or the resource's own variant `plan@resource`.
pub fn resolve_plan_instance(kb: &KnowledgeBase, resource: &str, plan: &str) -> Result<Term, RuntimeError> {
    let g = kb.graph();
    let r = require(g, resource, RESOURCE)?;
    let capable = g.objects_of(&r, &ex_term(CAPABLE_OF));
    let variant = crate::builder::plan_variant_id(plan, resource);
    let found = [plan, variant.as_str()]
        .into_iter()
        .filter_map(|id| try_ex(id).ok().map(Term::Iri))
        .find(|t| capable.contains(t));
    found.ok_or_else(|| unknown("plan for resource", &format!("{resource}/{plan}")))
}

fn expected_node(kb: &KnowledgeBase, plan_instance: &Term) -> Result<Term, RuntimeError> {
    kb.graph()
        .object_of(plan_instance, &ex_term(EXPECTED_PERFORMANCE))
        .ok_or_else(|| unknown("expected performance", &local_id(plan_instance)))
}

/// Expected performance of a plan instance.
pub fn expected_performance(kb: &KnowledgeBase, plan_instance: &str) -> Result<Performance, RuntimeError> {
    let plan = require(kb.graph(), plan_instance, PROCESS_PLAN)?;
    read_performance(kb.graph(), &expected_node(kb, &plan)?)
}

/// Rewrites the expected performance `resource` has for `plan`.
pub fn change_resource_performance(
    kb: &mut KnowledgeBase,
    resource: &str,
    plan: &str,
    new: &Performance,
) -> Result<Performance, RuntimeError> {
    let instance = resolve_plan_instance(kb, resource, plan)?;
    let node = expected_node(kb, &instance)?;
    let g = kb.graph();
    let mut delete = Vec::new();
    for pred in [DURATION, ENERGY_COST, EMISSIONS, QUALITY] {
        delete.extend(g.match_raw(&Pattern::new(Some(node.clone()), Some(ex_term(pred)), None)));
    }
    let insert = performance_triples(&node, new);
    delete.retain(|t| !insert.contains(t));
    let insert = insert.into_iter().filter(|t| !g.contains(t)).collect();
    kb.apply(&Changeset { delete, insert })?;
    Ok(*new)
}

/// Machines in the KB, sorted by id.
pub fn machines(kb: &KnowledgeBase) -> Vec<String> {
    let mut out: Vec<String> = kb
        .graph()
        .match_pattern(&Pattern::new(None, Some(Term::Iri(rdf_type())), Some(ex_term(MACHINE))))
        .iter()
        .map(|t| local_id(t.subject()))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Objective-function coefficients of a product, sorted by metric.
pub fn product_objective(kb: &KnowledgeBase, product: &str) -> Result<Vec<Coefficient>, RuntimeError> {
    let g = kb.graph();
    let p = require(g, product, PRODUCT)?;
    let mut out = Vec::new();
    for obj in g.objects_of(&p, &ex_term(HAS_OBJECTIVE_FUNCTION)) {
        for c in g.objects_of(&obj, &ex_term(HAS_COEFFICIENT)) {
            let bad = |reason: &str| RuntimeError::InconsistentRecord {
                id: local_id(&c),
                reason: reason.to_string(),
            };
            let value = g
                .object_of(&c, &ex_term(HAS_VALUE))
                .as_ref()
                .and_then(literal_decimal)
                .ok_or_else(|| bad("missing hasValue"))?;
            let metric: Metric = g
                .object_of(&c, &ex_term(COEFFICIENT_FOR))
                .and_then(|t| t.as_literal().and_then(|l| l.as_str()).and_then(|s| s.parse().ok()))
                .ok_or_else(|| bad("missing or unknown coefficientFor"))?;
            out.push(Coefficient { metric, value });
        }
    }
    out.sort_by_key(|c| c.metric);
    Ok(out)
}

/// Availability, performance and quality of one resource over a window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OeeReport {
    pub resource: String,
    pub window_start: SimTime,
    pub window_end: SimTime,
    pub executions: usize,
    pub busy_minutes: i64,
    #[serde(with = "rust_decimal::serde::float")]
    pub uptime: Decimal,
    #[serde(with = "rust_decimal::serde::float")]
    pub perf_efficiency: Decimal,
    #[serde(with = "rust_decimal::serde::float")]
    pub quality_rate: Decimal,
    #[serde(with = "rust_decimal::serde::float")]
    pub oee: Decimal,
}

/// OEE of `resource` over `[start, end)`, computed from its successful
/// history rows that overlap the window.
///
/// * uptime = busy minutes inside the window / window length
/// * performance efficiency = Σ planned durations / Σ real durations; the
///   planned window was fixed from the expected performance in force when
///   the execution was planned, so later performance changes do not
///   rewrite history (the plan's current expected duration is used only
///   for executions without a planned window)
/// * quality rate = mean real quality
/// * oee = uptime × min(performance efficiency, 1) × quality rate
///
/// Efficiency and quality default to 1 when no execution overlaps.
pub fn compute_oee(
    kb: &KnowledgeBase,
    resource: &str,
    start: SimTime,
    end: SimTime,
) -> Result<OeeReport, RuntimeError> {
    if end <= start {
        return Err(RuntimeError::EmptyWindow);
    }
    let rows = get_resource_history(kb, resource, ExecStatus::Successful)?;
    let g = kb.graph();
    let mut busy = 0i64;
    let mut expected = Decimal::ZERO;
    let mut real = Decimal::ZERO;
    let mut quality = Decimal::ZERO;
    let mut n = 0usize;
    for row in rows.iter().filter(|r| r.real_start < end && r.real_end > start) {
        busy += row.real_end.min(end) - row.real_start.max(start);
        let real_duration = Decimal::from(row.real_end - row.real_start);
        let exec = ex_term(&row.execution_id);
        let time_of = |pred: &str| g.object_of(&exec, &ex_term(pred)).as_ref().and_then(literal_time);
        let planned = match (time_of(PLANNED_START_TIME), time_of(PLANNED_END_TIME)) {
            (Some(a), Some(b)) if b > a => Decimal::from(b - a),
            _ => g
                .object_of(&exec, &ex_term(RUNS_PROCESS_PLAN))
                .and_then(|plan| expected_node(kb, &plan).ok())
                .and_then(|node| read_performance(g, &node).ok())
                .map_or(real_duration, |p| p.duration_min()),
        };
        expected += planned;
        real += real_duration;
        quality += row.quality;
        n += 1;
    }
    let uptime = (Decimal::from(busy) / Decimal::from(end - start))
        .min(Decimal::ONE)
        .normalize();
    let perf_efficiency = if real.is_zero() {
        Decimal::ONE
    } else {
        (expected / real).normalize()
    };
    let quality_rate = if n == 0 {
        Decimal::ONE
    } else {
        (quality / Decimal::from(n)).normalize()
    };
    let oee = (uptime * perf_efficiency.min(Decimal::ONE) * quality_rate).normalize();
    Ok(OeeReport {
        resource: resource.to_string(),
        window_start: start,
        window_end: end,
        executions: n,
        busy_minutes: busy,
        uptime,
        perf_efficiency,
        quality_rate,
        oee,
    })
}
