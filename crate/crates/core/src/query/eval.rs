use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use serde::ser::{SerializeStruct, Serializer};

use super::{Filter, Query, QueryError, QueryForm, SelectQuery, Slot, TriplePattern, Variable, WhereClause};
use crate::kb::{Changeset, Graph, Literal, Pattern, Term, Triple, UpdateStats};
use crate::syntax::CmpOp;

/// One solution: variable name to term.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Binding(BTreeMap<Variable, Term>);

impl Binding {
    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(&Variable::new(var))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn insert(&mut self, var: Variable, term: Term) {
        self.0.insert(var, term);
    }

    fn resolve<'a>(&'a self, slot: &'a Slot) -> Option<&'a Term> {
        match slot {
            Slot::Var(v) => self.0.get(v),
            Slot::Term(t) => Some(t),
        }
    }
}

/// Projected solutions in deterministic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solutions {
    pub vars: Vec<Variable>,
    pub rows: Vec<Binding>,
}

impl Solutions {
    /// Rows as canonical term text in projection order.
    pub fn table(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|b| {
                self.vars
                    .iter()
                    .map(|v| b.0.get(v).map(Term::canonical).unwrap_or_default())
                    .collect()
            })
            .collect()
    }
}

impl serde::Serialize for Solutions {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Solutions", 2)?;
        let vars: Vec<&str> = self.vars.iter().map(Variable::name).collect();
        st.serialize_field("vars", &vars)?;
        st.serialize_field("rows", &self.table())?;
        st.end()
    }
}

/// Literal-aware comparison used by `FILTER`.
///
/// Numbers compare numerically across integer/decimal, strings by code
/// point, dateTimes chronologically, booleans with `false < true`. IRIs
/// support only `=` and `!=`. Any other pairing is incomparable and the
/// filter is false, whatever the operator.
pub fn compare_terms(left: &Term, op: CmpOp, right: &Term) -> bool {
    let ord = match (left, right) {
        (Term::Iri(a), Term::Iri(b)) => {
            return match op {
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
                _ => false,
            };
        }
        (Term::Literal(a), Term::Literal(b)) => match literal_order(a, b) {
            Some(o) => o,
            None => return false,
        },
        _ => return false,
    };
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    }
}

fn literal_order(a: &Literal, b: &Literal) -> Option<Ordering> {
    if let (Some(x), Some(y)) = (a.as_decimal(), b.as_decimal()) {
        return Some(x.cmp(&y));
    }
    match (a, b) {
        (Literal::String(x), Literal::String(y)) => Some(x.cmp(y)),
        (Literal::DateTime(x), Literal::DateTime(y)) => Some(x.cmp(y)),
        (Literal::Boolean(x), Literal::Boolean(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

fn filter_holds(f: &Filter, b: &Binding) -> bool {
    match (b.resolve(&f.left), b.resolve(&f.right)) {
        (Some(l), Some(r)) => compare_terms(l, f.op, r),
        _ => false,
    }
}

/// Extends `b` so that `pattern` instantiates to `t`, or `None` when a
/// variable repeated inside the pattern would need two different values.
fn unify(pattern: &TriplePattern, t: &Triple, b: &Binding) -> Option<Binding> {
    let mut out = b.clone();
    for (slot, term) in [
        (&pattern.subject, t.subject()),
        (&pattern.predicate, t.predicate()),
        (&pattern.object, t.object()),
    ] {
        match slot {
            Slot::Term(c) => {
                if c != term {
                    return None;
                }
            }
            Slot::Var(v) => match out.0.get(v) {
                Some(existing) if existing != term => return None,
                Some(_) => {}
                None => {
                    out.0.insert(v.clone(), term.clone());
                }
            },
        }
    }
    Some(out)
}

/// All solutions of the basic graph pattern that satisfy every filter.
/// Patterns are joined left to right; each step asks the store for the
/// instantiated pattern so the narrowest index is used.
fn solve(g: &Graph, clause: &WhereClause) -> Vec<Binding> {
    let mut partial = vec![Binding::default()];
    for pattern in &clause.patterns {
        let mut next = Vec::new();
        for b in &partial {
            let bound = |slot: &Slot| b.resolve(slot).cloned();
            let probe = Pattern::new(
                bound(&pattern.subject),
                bound(&pattern.predicate),
                bound(&pattern.object),
            );
            for t in g.match_pattern(&probe) {
                if let Some(ext) = unify(pattern, &t, b) {
                    next.push(ext);
                }
            }
        }
        partial = next;
        if partial.is_empty() {
            break;
        }
    }
    partial.retain(|b| clause.filters.iter().all(|f| filter_holds(f, b)));
    partial
}

fn project(vars: &[Variable], b: &Binding) -> Binding {
    Binding(
        vars.iter()
            .filter_map(|v| b.0.get(v).map(|t| (v.clone(), t.clone())))
            .collect(),
    )
}

pub fn eval_select(g: &Graph, q: &SelectQuery) -> Solutions {
    let mut rows: Vec<Binding> = solve(g, &q.where_clause).iter().map(|b| project(&q.vars, b)).collect();
    if q.distinct {
        let mut seen = HashSet::new();
        rows.retain(|b| seen.insert(b.clone()));
    }
    rows.sort_by_cached_key(|b| {
        q.vars
            .iter()
            .map(|v| b.0.get(v).map(Term::canonical).unwrap_or_default())
            .collect::<Vec<_>>()
    });
    Solutions {
        vars: q.vars.clone(),
        rows,
    }
}

fn instantiate(template: &TriplePattern, b: &Binding) -> Result<Triple, QueryError> {
    let get = |slot: &Slot| -> Result<Term, QueryError> {
        match slot {
            Slot::Term(t) => Ok(t.clone()),
            Slot::Var(v) => {
                b.0.get(v)
                    .cloned()
                    .ok_or_else(|| QueryError::UnboundTemplateVariable(v.0.clone()))
            }
        }
    };
    Ok(Triple::new(
        get(&template.subject)?,
        get(&template.predicate)?,
        get(&template.object)?,
    )?)
}

fn dedup_sorted(mut v: Vec<Triple>) -> Vec<Triple> {
    let mut seen = HashSet::new();
    v.retain(|t| seen.insert(t.clone()));
    crate::kb::graph_sort(&mut v);
    v
}

/// Computes the triples an update would delete and insert without touching
/// the graph. All errors surface here, so applying the result cannot fail
/// half way.
pub fn plan_update(g: &Graph, q: &Query) -> Result<Changeset, QueryError> {
    match &q.form {
        QueryForm::Select(_) => Err(QueryError::UnsupportedFeature("SELECT is not an update".into())),
        QueryForm::InsertData(templates) => {
            let empty = Binding::default();
            let insert = templates
                .iter()
                .map(|t| instantiate(t, &empty))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Changeset {
                delete: Vec::new(),
                insert: dedup_sorted(insert),
            })
        }
        QueryForm::Modify(m) => {
            let bound = m.where_clause.bound_vars();
            for v in m.delete.iter().chain(&m.insert).flat_map(TriplePattern::vars) {
                if !bound.contains(v) {
                    return Err(QueryError::UnboundTemplateVariable(v.0.clone()));
                }
            }
            for v in m.where_clause.filters.iter().flat_map(Filter::vars) {
                if !bound.contains(v) {
                    return Err(QueryError::UnboundVariable(v.0.clone()));
                }
            }
            let solutions = solve(g, &m.where_clause);
            let mut delete = Vec::new();
            let mut insert = Vec::new();
            for b in &solutions {
                for t in &m.delete {
                    delete.push(instantiate(t, b)?);
                }
                for t in &m.insert {
                    insert.push(instantiate(t, b)?);
                }
            }
            Ok(Changeset {
                delete: dedup_sorted(delete),
                insert: dedup_sorted(insert),
            })
        }
    }
}

/// Runs an update directly against a graph. Atomic: on error the graph is
/// unchanged.
pub fn eval_update(g: &mut Graph, q: &Query) -> Result<UpdateStats, QueryError> {
    let changes = plan_update(g, q)?;
    Ok(g.apply(&changes))
}
