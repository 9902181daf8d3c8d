use std::collections::HashSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{
    literal_time, local_id, performance_triples, read_performance, require, unknown, DomainViolation, ExecStatus,
    Performance, RuntimeError, SimTime,
};
use crate::builder::{AboxWriter, ProductSpec};
use crate::kb::vocab::*;
use crate::kb::{Changeset, Graph, KnowledgeBase, Pattern, Term, Triple};

/// One real-world run of a process plan for a product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProcessExecution {
    pub id: String,
    pub product: String,
    pub plan: String,
    pub resource: Option<String>,
    pub status: ExecStatus,
    pub planned_start: SimTime,
    pub planned_end: SimTime,
    pub real_start: Option<SimTime>,
    pub real_end: Option<SimTime>,
    pub real_performance: Option<Performance>,
    pub error_message: Option<String>,
}

impl ProcessExecution {
    /// Checks the record-level invariants that depend on the status.
    pub fn check(&self) -> Result<(), RuntimeError> {
        if self.planned_start > self.planned_end {
            return Err(RuntimeError::InvalidWindow {
                start: self.planned_start,
                end: self.planned_end,
            });
        }
        let status = self.status;
        let missing = |field| Err(RuntimeError::MissingField { status, field });
        if status.rank() >= ExecStatus::Running.rank() {
            if self.resource.is_none() {
                return missing("resource");
            }
            if self.real_start.is_none() {
                return missing("realStart");
            }
        }
        if status == ExecStatus::Successful {
            if self.real_end.is_none() {
                return missing("realEnd");
            }
            if self.real_performance.is_none() {
                return missing("realPerformance");
            }
        }
        if status == ExecStatus::Errored && self.error_message.is_none() {
            return missing("errorMessage");
        }
        if let (Some(start), Some(end)) = (self.real_start, self.real_end) {
            if start > end {
                return Err(RuntimeError::InvalidWindow { start, end });
            }
        }
        Ok(())
    }

    fn real_performance_node(&self) -> String {
        format!("{}_real", self.id)
    }

    fn triples(&self) -> Vec<Triple> {
        let s = ex(&self.id);
        let mut out = vec![
            Triple::from_iris(s.clone(), rdf_type(), ex_term(PROCESS_EXECUTION)),
            Triple::from_iris(ex(&self.product), ex(HAS_PROCESS_EXECUTION), Term::Iri(s.clone())),
            Triple::from_iris(s.clone(), ex(RUNS_PROCESS_PLAN), ex_term(&self.plan)),
            Triple::from_iris(s.clone(), ex(HAS_STATUS), Term::string(self.status.as_str())),
            Triple::from_iris(
                s.clone(),
                ex(PLANNED_START_TIME),
                Term::datetime(self.planned_start.to_datetime()),
            ),
            Triple::from_iris(
                s.clone(),
                ex(PLANNED_END_TIME),
                Term::datetime(self.planned_end.to_datetime()),
            ),
        ];
        if let Some(r) = &self.resource {
            out.push(Triple::from_iris(s.clone(), ex(RUNS_ON_RESOURCE), ex_term(r)));
        }
        if let Some(t) = self.real_start {
            out.push(Triple::from_iris(
                s.clone(),
                ex(REAL_START_TIME),
                Term::datetime(t.to_datetime()),
            ));
        }
        if let Some(t) = self.real_end {
            out.push(Triple::from_iris(
                s.clone(),
                ex(REAL_END_TIME),
                Term::datetime(t.to_datetime()),
            ));
        }
        if let Some(p) = &self.real_performance {
            let node = ex_term(&self.real_performance_node());
            out.push(Triple::from_iris(s.clone(), ex(REAL_PERFORMANCE), node.clone()));
            out.extend(performance_triples(&node, p));
        }
        if let Some(m) = &self.error_message {
            out.push(Triple::from_iris(s, ex(HAS_ERROR_MESSAGE), Term::string(m)));
        }
        out
    }
}

/// Everything currently stored about an execution: its own triples, the
/// product link, and its real-performance node.
fn stored_triples(g: &Graph, exec: &Term) -> Vec<Triple> {
    let mut out = g.match_raw(&Pattern::new(Some(exec.clone()), None, None));
    out.extend(g.match_raw(&Pattern::new(
        None,
        Some(ex_term(HAS_PROCESS_EXECUTION)),
        Some(exec.clone()),
    )));
    for node in g.objects_of(exec, &ex_term(REAL_PERFORMANCE)) {
        out.extend(g.match_raw(&Pattern::new(Some(node), None, None)));
    }
    out
}

/// Net changeset turning `old` into `new`; untouched triples are left alone.
fn diff(old: Vec<Triple>, new: Vec<Triple>) -> Changeset {
    let old_set: HashSet<&Triple> = old.iter().collect();
    let new_set: HashSet<&Triple> = new.iter().collect();
    let delete = old.iter().filter(|t| !new_set.contains(t)).cloned().collect();
    let mut seen = HashSet::new();
    let insert = new
        .iter()
        .filter(|t| !old_set.contains(t) && seen.insert(*t))
        .cloned()
        .collect();
    Changeset { delete, insert }
}

fn read(g: &Graph, exec: &Term) -> Result<ProcessExecution, RuntimeError> {
    let id = local_id(exec);
    let inconsistent = |reason: &str| RuntimeError::InconsistentRecord {
        id: id.clone(),
        reason: reason.to_string(),
    };
    let one = |pred: &str| g.object_of(exec, &ex_term(pred));
    let time = |pred: &str| -> Result<Option<SimTime>, RuntimeError> {
        match one(pred) {
            None => Ok(None),
            Some(t) => literal_time(&t)
                .map(Some)
                .ok_or_else(|| inconsistent(&format!("{pred} is not a whole-minute dateTime"))),
        }
    };
    let owners = g.subjects_with(&ex_term(HAS_PROCESS_EXECUTION), exec);
    let [product] = owners.as_slice() else {
        return Err(inconsistent("must belong to exactly one product"));
    };
    let plan = one(RUNS_PROCESS_PLAN).ok_or_else(|| inconsistent("missing runsProcessPlan"))?;
    let status = one(HAS_STATUS)
        .and_then(|t| t.as_literal().and_then(|l| l.as_str()).and_then(|s| s.parse().ok()))
        .ok_or_else(|| inconsistent("missing or unknown hasStatus"))?;
    let planned_start = time(PLANNED_START_TIME)?.ok_or_else(|| inconsistent("missing plannedStartTime"))?;
    let planned_end = time(PLANNED_END_TIME)?.ok_or_else(|| inconsistent("missing plannedEndTime"))?;
    let real_performance = match one(REAL_PERFORMANCE) {
        Some(node) => Some(read_performance(g, &node)?),
        None => None,
    };
    Ok(ProcessExecution {
        id: id.clone(),
        product: local_id(product),
        plan: local_id(&plan),
        resource: one(RUNS_ON_RESOURCE).map(|t| local_id(&t)),
        status,
        planned_start,
        planned_end,
        real_start: time(REAL_START_TIME)?,
        real_end: time(REAL_END_TIME)?,
        real_performance,
        error_message: one(HAS_ERROR_MESSAGE).and_then(|t| t.as_literal().and_then(|l| l.as_str()).map(String::from)),
    })
}

pub fn get_execution(kb: &KnowledgeBase, id: &str) -> Result<ProcessExecution, RuntimeError> {
    let exec = require(kb.graph(), id, PROCESS_EXECUTION)?;
    read(kb.graph(), &exec)
}

fn sorted_executions(g: &Graph, execs: Vec<Term>) -> Result<Vec<ProcessExecution>, RuntimeError> {
    let mut out = execs.iter().map(|e| read(g, e)).collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| (a.planned_start, &a.id).cmp(&(b.planned_start, &b.id)));
    Ok(out)
}

/// Executions of a product, ordered by (plannedStart, id).
pub fn executions_of_product(kb: &KnowledgeBase, product: &str) -> Result<Vec<ProcessExecution>, RuntimeError> {
    let g = kb.graph();
    let p = require(g, product, PRODUCT)?;
    sorted_executions(g, g.objects_of(&p, &ex_term(HAS_PROCESS_EXECUTION)))
}

/// Executions assigned to a resource, ordered by (plannedStart, id).
pub fn executions_on_resource(kb: &KnowledgeBase, resource: &str) -> Result<Vec<ProcessExecution>, RuntimeError> {
    let g = kb.graph();
    let r = require(g, resource, RESOURCE)?;
    sorted_executions(g, g.subjects_with(&ex_term(RUNS_ON_RESOURCE), &r))
}

/// Request body for [`add_planned_execution_data`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NewExecution {
    pub product: String,
    pub plan: String,
    pub planned_start: SimTime,
    pub planned_end: SimTime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource: Option<String>,
}

/// Records a new execution of `plan` for `product`. With a resource it is
/// stored as `planned` (proposal and acknowledgement in one step); without
/// one it stays `proposed` until a resource agent accepts it.
pub fn add_planned_execution_data(kb: &mut KnowledgeBase, req: &NewExecution) -> Result<String, RuntimeError> {
    let g = kb.graph();
    require(g, &req.product, PRODUCT)?;
    require(g, &req.plan, PROCESS_PLAN)?;
    if let Some(r) = &req.resource {
        require(g, r, RESOURCE)?;
    }
    if req.planned_start > req.planned_end {
        return Err(RuntimeError::InvalidWindow {
            start: req.planned_start,
            end: req.planned_end,
        });
    }
    let existing = g
        .objects_of(&ex_term(&req.product), &ex_term(HAS_PROCESS_EXECUTION))
        .len();
    let id = (existing + 1..)
        .map(|k| format!("exec_{}_{k}", req.product))
        .find(|id| g.match_raw(&Pattern::new(Some(ex_term(id)), None, None)).is_empty())
        .expect("an unused id exists");
    let rec = ProcessExecution {
        id: id.clone(),
        product: req.product.clone(),
        plan: req.plan.clone(),
        resource: req.resource.clone(),
        status: if req.resource.is_some() {
            ExecStatus::Planned
        } else {
            ExecStatus::Proposed
        },
        planned_start: req.planned_start,
        planned_end: req.planned_end,
        real_start: None,
        real_end: None,
        real_performance: None,
        error_message: None,
    };
    rec.check()?;
    kb.apply(&diff(Vec::new(), rec.triples()))?;
    Ok(id)
}

/// Partial update of an execution. Absent fields keep their value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExecutionPatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<ExecStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planned_start: Option<SimTime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planned_end: Option<SimTime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_start: Option<SimTime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_end: Option<SimTime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_performance: Option<Performance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_message: Option<String>,
}

/// Applies a patch as one DELETE/INSERT step. Illegal transitions and
/// records that would break an invariant are rejected without touching
/// the KB.
pub fn update_execution_data(
    kb: &mut KnowledgeBase,
    id: &str,
    patch: &ExecutionPatch,
) -> Result<ProcessExecution, RuntimeError> {
    let g = kb.graph();
    let exec = require(g, id, PROCESS_EXECUTION)?;
    let current = read(g, &exec)?;
    let mut next = current.clone();
    if let Some(to) = patch.status {
        if to != current.status && !current.status.can_become(to) {
            return Err(RuntimeError::IllegalTransition {
                from: current.status,
                to,
            });
        }
        next.status = to;
    }
    if let Some(r) = &patch.resource {
        require(g, r, RESOURCE)?;
        next.resource = Some(r.clone());
    }
    if let Some(p) = &patch.plan {
        require(g, p, PROCESS_PLAN)?;
        next.plan = p.clone();
    }
    next.planned_start = patch.planned_start.unwrap_or(next.planned_start);
    next.planned_end = patch.planned_end.unwrap_or(next.planned_end);
    next.real_start = patch.real_start.or(next.real_start);
    next.real_end = patch.real_end.or(next.real_end);
    next.real_performance = patch.real_performance.or(next.real_performance);
    if let Some(m) = &patch.error_message {
        next.error_message = Some(m.clone());
    }
    next.check()?;
    let changes = diff(stored_triples(g, &exec), next.triples());
    kb.apply(&changes)?;
    Ok(next)
}

/// Creates product `new_id` from a template product: same features and
/// objective function, its own deadline.
pub fn instantiate_product(
    kb: &mut KnowledgeBase,
    template: &str,
    new_id: &str,
    deadline: DateTime<Utc>,
) -> Result<(), RuntimeError> {
    let g = kb.graph();
    let t = require(g, template, PRODUCT)?;
    let iri = try_ex(new_id).map_err(|_| unknown(PRODUCT, new_id))?;
    if !g.match_raw(&Pattern::new(Some(Term::Iri(iri)), None, None)).is_empty() {
        return Err(DomainViolation {
            field: "id",
            reason: format!("{new_id:?} already exists"),
        }
        .into());
    }
    let spec = ProductSpec {
        id: new_id.to_string(),
        defines: g.objects_of(&t, &ex_term(DEFINES)).iter().map(local_id).collect(),
        deadline,
        coefficients: super::product_objective(kb, template)?,
    };
    let mut w = AboxWriter::default();
    w.product(&spec);
    let changes = w.into_changeset(kb);
    kb.apply(&changes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{build_abox, parse_csv_bundle, read_bundle_dir};
    use proptest::prelude::*;
    use rust_decimal::Decimal;

    fn case_study_kb() -> KnowledgeBase {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/case_study");
        let pd = parse_csv_bundle(&read_bundle_dir(&dir).unwrap()).unwrap();
        let mut kb = KnowledgeBase::new();
        build_abox(&mut kb, &pd).unwrap();
        kb
    }

    fn new_exec(plan: &str, start: i64, end: i64, resource: Option<&str>) -> NewExecution {
        NewExecution {
            product: "part".into(),
            plan: plan.into(),
            planned_start: SimTime(start),
            planned_end: SimTime(end),
            resource: resource.map(String::from),
        }
    }

    fn perf(duration: i64) -> Performance {
        Performance::new(Decimal::from(duration), Decimal::from(100), Decimal::ZERO, Decimal::ONE).unwrap()
    }

    #[test]
    fn planned_execution_with_resource() {
        let mut kb = case_study_kb();
        let id = add_planned_execution_data(&mut kb, &new_exec("P1@M2", 100, 118, Some("M2"))).unwrap();
        let e = get_execution(&kb, &id).unwrap();
        assert_eq!(e.status, ExecStatus::Planned);
        assert_eq!(e.planned_end - e.planned_start, 18);
        assert_eq!(e.resource.as_deref(), Some("M2"));

        let id2 = add_planned_execution_data(&mut kb, &new_exec("P1", 100, 100, None)).unwrap();
        assert_eq!(get_execution(&kb, &id2).unwrap().status, ExecStatus::Proposed);
        assert_ne!(id, id2);
    }

    #[test]
    fn planned_execution_errors() {
        let mut kb = case_study_kb();
        let mut req = new_exec("P1", 0, 10, None);
        req.product = "ghostPart".into();
        assert!(matches!(
            add_planned_execution_data(&mut kb, &req),
            Err(RuntimeError::UnknownEntity { .. })
        ));
        assert!(matches!(
            add_planned_execution_data(&mut kb, &new_exec("P1", 10, 0, None)),
            Err(RuntimeError::InvalidWindow { .. })
        ));
        assert!(matches!(
            add_planned_execution_data(&mut kb, &new_exec("M1", 0, 1, None)),
            Err(RuntimeError::UnknownEntity { .. })
        ));
        assert_eq!(kb.revision(), 1);
    }

    #[test]
    fn full_lifecycle() {
        let mut kb = case_study_kb();
        let id = add_planned_execution_data(&mut kb, &new_exec("P1@M3", 2, 17, Some("M3"))).unwrap();
        let running = ExecutionPatch {
            status: Some(ExecStatus::Running),
            real_start: Some(SimTime(2)),
            ..Default::default()
        };
        update_execution_data(&mut kb, &id, &running).unwrap();
        let status = kb.graph().object_of(&ex_term(&id), &ex_term(HAS_STATUS)).unwrap();
        assert_eq!(status, Term::string("running"));

        let skip = ExecutionPatch {
            status: Some(ExecStatus::Planned),
            ..Default::default()
        };
        assert_eq!(
            update_execution_data(&mut kb, &id, &skip).unwrap_err(),
            RuntimeError::IllegalTransition {
                from: ExecStatus::Running,
                to: ExecStatus::Planned
            }
        );

        let incomplete = ExecutionPatch {
            status: Some(ExecStatus::Successful),
            real_end: Some(SimTime(17)),
            ..Default::default()
        };
        assert_eq!(
            update_execution_data(&mut kb, &id, &incomplete).unwrap_err(),
            RuntimeError::MissingField {
                status: ExecStatus::Successful,
                field: "realPerformance"
            }
        );

        let done = ExecutionPatch {
            status: Some(ExecStatus::Successful),
            real_end: Some(SimTime(17)),
            real_performance: Some(perf(15)),
            ..Default::default()
        };
        let e = update_execution_data(&mut kb, &id, &done).unwrap();
        assert_eq!(e.real_performance, Some(perf(15)));
        let node = kb.graph().object_of(&ex_term(&id), &ex_term(REAL_PERFORMANCE)).unwrap();
        assert_eq!(read_performance(kb.graph(), &node).unwrap(), perf(15));
        assert_eq!(get_execution(&kb, &id).unwrap(), e);
    }

    #[test]
    fn planned_to_successful_is_illegal() {
        let mut kb = case_study_kb();
        let id = add_planned_execution_data(&mut kb, &new_exec("P1@M1", 0, 20, Some("M1"))).unwrap();
        let before = kb.dump_turtle();
        let patch = ExecutionPatch {
            status: Some(ExecStatus::Successful),
            real_start: Some(SimTime(0)),
            real_end: Some(SimTime(20)),
            real_performance: Some(perf(20)),
            ..Default::default()
        };
        assert!(matches!(
            update_execution_data(&mut kb, &id, &patch),
            Err(RuntimeError::IllegalTransition { .. })
        ));
        assert_eq!(kb.dump_turtle(), before);
    }

    #[test]
    fn errored_needs_message() {
        let mut kb = case_study_kb();
        let id = add_planned_execution_data(&mut kb, &new_exec("P1@M1", 0, 20, Some("M1"))).unwrap();
        update_execution_data(
            &mut kb,
            &id,
            &ExecutionPatch {
                status: Some(ExecStatus::Running),
                real_start: Some(SimTime(0)),
                ..Default::default()
            },
        )
        .unwrap();
        let bare = ExecutionPatch {
            status: Some(ExecStatus::Errored),
            ..Default::default()
        };
        assert!(matches!(
            update_execution_data(&mut kb, &id, &bare),
            Err(RuntimeError::MissingField {
                field: "errorMessage",
                ..
            })
        ));
        let with_msg = ExecutionPatch {
            status: Some(ExecStatus::Errored),
            error_message: Some("spindle fault".into()),
            ..Default::default()
        };
        assert_eq!(
            update_execution_data(&mut kb, &id, &with_msg).unwrap().status,
            ExecStatus::Errored
        );
    }

    #[test]
    fn instantiate_copies_template() {
        let mut kb = case_study_kb();
        instantiate_product(&mut kb, "part", "part0001", SimTime(30).to_datetime()).unwrap();
        assert_eq!(
            super::super::product_objective(&kb, "part0001").unwrap(),
            super::super::product_objective(&kb, "part").unwrap()
        );
        assert!(instantiate_product(&mut kb, "part", "part0001", SimTime(30).to_datetime()).is_err());
    }

    fn arb_patch() -> impl Strategy<Value = ExecutionPatch> {
        (
            proptest::option::of(proptest::sample::select(ExecStatus::ALL.to_vec())),
            proptest::option::of(0i64..40),
            proptest::option::of(0i64..40),
            proptest::option::of(1i64..30),
            any::<bool>(),
            any::<bool>(),
        )
            .prop_map(|(status, rs, re, dur, res, msg)| ExecutionPatch {
                status,
                real_start: rs.map(SimTime),
                real_end: re.map(SimTime),
                real_performance: dur.map(perf),
                resource: res.then(|| "M1".to_string()),
                error_message: msg.then(|| "fault".to_string()),
                ..Default::default()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn status_history_is_a_lifecycle_prefix(patches in proptest::collection::vec(arb_patch(), 1..12)) {
            let mut kb = case_study_kb();
            let id = add_planned_execution_data(&mut kb, &new_exec("P1", 0, 20, None)).unwrap();
            let mut last = ExecStatus::Proposed;
            for p in &patches {
                let before = kb.dump_turtle();
                let rev = kb.revision();
                match update_execution_data(&mut kb, &id, p) {
                    Ok(rec) => {
                        prop_assert!(rec.status == last || last.can_become(rec.status));
                        last = rec.status;
                        prop_assert_eq!(kb.revision(), rev + 1);
                    }
                    Err(_) => {
                        prop_assert_eq!(kb.dump_turtle(), before);
                        prop_assert_eq!(kb.revision(), rev);
                    }
                }
                let stored = get_execution(&kb, &id).unwrap();
                prop_assert_eq!(stored.status, last);
                prop_assert!(stored.check().is_ok());
            }
        }
    }
}
