//! Typed façade over the knowledge base: the process-execution lifecycle
//! and the five interactions agents, engineers and customers use at
//! runtime. Every operation reads or writes the KB as one atomic step.

mod execution;
mod reports;
mod types;

pub use execution::{
    add_planned_execution_data, executions_of_product, executions_on_resource, get_execution, instantiate_product,
    update_execution_data, ExecutionPatch, NewExecution, ProcessExecution,
};
pub use reports::{
    change_resource_performance, compute_oee, expected_performance, get_product_status, get_resource_history,
    history_from_solutions, machines, product_objective, resolve_plan_instance, resource_history_query,
    ExecutionSummary, HistoryRow, OeeReport, ProductStatus, RESOURCE_HISTORY_QUERY,
};
pub use types::*;

use crate::kb::vocab::{ex_term, try_ex};
use crate::kb::{Graph, KbError, Term};
use crate::query::QueryError;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("unknown {kind} {id:?}")]
    UnknownEntity { kind: &'static str, id: String },
    #[error("invalid window: start {start} is after end {end}")]
    InvalidWindow { start: SimTime, end: SimTime },
    #[error("illegal status transition {from} -> {to}")]
    IllegalTransition { from: ExecStatus, to: ExecStatus },
    #[error("status {status} requires {field}")]
    MissingField { status: ExecStatus, field: &'static str },
    #[error("domain violation: {0}")]
    DomainViolation(#[from] DomainViolation),
    #[error("evaluation window is empty")]
    EmptyWindow,
    #[error("record {id} is inconsistent: {reason}")]
    InconsistentRecord { id: String, reason: String },
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

impl RuntimeError {
    /// Stable machine-readable name of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            RuntimeError::UnknownEntity { .. } => "UnknownEntity",
            RuntimeError::InvalidWindow { .. } => "InvalidWindow",
            RuntimeError::IllegalTransition { .. } => "IllegalTransition",
            RuntimeError::MissingField { .. } => "MissingField",
            RuntimeError::DomainViolation(_) => "DomainViolation",
            RuntimeError::EmptyWindow => "EmptyWindow",
            RuntimeError::InconsistentRecord { .. } => "InconsistentRecord",
            RuntimeError::Kb(_) => "KbError",
            RuntimeError::Query(_) => "QueryError",
        }
    }
}

pub(crate) fn unknown(kind: &'static str, id: &str) -> RuntimeError {
    RuntimeError::UnknownEntity {
        kind,
        id: id.to_string(),
    }
}

/// Resolves `id` to its `ex:` IRI and checks it is an instance of `class`.
pub(crate) fn require(g: &Graph, id: &str, class: &'static str) -> Result<Term, RuntimeError> {
    let kind = class;
    let iri = try_ex(id).map_err(|_| unknown(kind, id))?;
    let term = Term::Iri(iri);
    if g.is_instance_of(&term, &ex_term(class)) {
        Ok(term)
    } else {
        Err(unknown(kind, id))
    }
}

/// Local (`ex:`) name of an IRI term; the full IRI text otherwise.
pub fn local_id(t: &Term) -> String {
    match t.as_iri() {
        Some(iri) => iri.local_name().unwrap_or(iri.as_str()).to_string(),
        None => t.canonical(),
    }
}

pub(crate) fn literal_time(t: &Term) -> Option<SimTime> {
    t.as_literal()
        .and_then(|l| l.as_datetime())
        .and_then(SimTime::from_datetime)
}

pub(crate) fn literal_decimal(t: &Term) -> Option<rust_decimal::Decimal> {
    t.as_literal().and_then(|l| l.as_decimal())
}

/// Reads the four metric values of a performance node.
pub(crate) fn read_performance(g: &Graph, node: &Term) -> Result<Performance, RuntimeError> {
    use crate::kb::vocab::{DURATION, EMISSIONS, ENERGY_COST, QUALITY};
    let inconsistent = |reason: String| RuntimeError::InconsistentRecord {
        id: local_id(node),
        reason,
    };
    let value = |pred: &str| {
        g.object_of(node, &ex_term(pred))
            .as_ref()
            .and_then(literal_decimal)
            .ok_or_else(|| inconsistent(format!("missing or non-numeric {pred}")))
    };
    Performance::new(
        value(DURATION)?,
        value(ENERGY_COST)?,
        value(EMISSIONS)?,
        value(QUALITY)?,
    )
    .map_err(|v| inconsistent(v.to_string()))
}

pub(crate) fn performance_triples(node: &Term, perf: &Performance) -> Vec<crate::kb::Triple> {
    use crate::kb::vocab::{ex, rdf_type, DURATION, EMISSIONS, ENERGY_COST, PERFORMANCE, QUALITY};
    use crate::kb::Triple;
    let subject = node.as_iri().expect("performance nodes are IRIs").clone();
    vec![
        Triple::from_iris(subject.clone(), rdf_type(), ex_term(PERFORMANCE)),
        Triple::from_iris(subject.clone(), ex(DURATION), Term::decimal(perf.duration_min())),
        Triple::from_iris(subject.clone(), ex(ENERGY_COST), Term::decimal(perf.energy_kwh())),
        Triple::from_iris(subject.clone(), ex(EMISSIONS), Term::decimal(perf.emissions())),
        Triple::from_iris(subject, ex(QUALITY), Term::decimal(perf.quality())),
    ]
}
