//! The SPARQL subset used by agents: `SELECT [DISTINCT]` over basic graph
//! patterns with comparison `FILTER`s, `INSERT DATA`, and
//! `DELETE { } INSERT { } WHERE { }` updates.

mod eval;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

use crate::kb::{KbError, KnowledgeBase, Term, UpdateStats};
pub use crate::syntax::CmpOp;

pub use eval::{compare_terms, eval_select, eval_update, plan_update, Binding, Solutions};
pub use parser::parse;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("syntax error at line {line}, column {col}: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
        found: String,
    },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("variable ?{0} is not bound by the WHERE clause")]
    UnboundVariable(String),
    #[error("template variable ?{0} is not bound by the WHERE clause")]
    UnboundTemplateVariable(String),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(pub String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Self {
        Variable(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// A pattern position: a variable or a concrete term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Var(Variable),
    Term(Term),
}

impl Slot {
    pub fn var(&self) -> Option<&Variable> {
        match self {
            Slot::Var(v) => Some(v),
            Slot::Term(_) => None,
        }
    }
}

impl From<Term> for Slot {
    fn from(t: Term) -> Self {
        Slot::Term(t)
    }
}

impl From<Variable> for Slot {
    fn from(v: Variable) -> Self {
        Slot::Var(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: Slot,
    pub predicate: Slot,
    pub object: Slot,
}

impl TriplePattern {
    pub fn new(subject: impl Into<Slot>, predicate: impl Into<Slot>, object: impl Into<Slot>) -> Self {
        TriplePattern {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn slots(&self) -> [&Slot; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn vars(&self) -> impl Iterator<Item = &Variable> {
        self.slots().into_iter().filter_map(Slot::var)
    }
}

/// `FILTER(left op right)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Filter {
    pub left: Slot,
    pub op: CmpOp,
    pub right: Slot,
}

impl Filter {
    pub fn vars(&self) -> impl Iterator<Item = &Variable> {
        [&self.left, &self.right].into_iter().filter_map(Slot::var)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WhereClause {
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Filter>,
}

impl WhereClause {
    /// Variables bound by the patterns, in order of first appearance.
    pub fn bound_vars(&self) -> Vec<Variable> {
        let mut out: Vec<Variable> = Vec::new();
        for v in self.patterns.iter().flat_map(TriplePattern::vars) {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectQuery {
    pub vars: Vec<Variable>,
    pub distinct: bool,
    pub where_clause: WhereClause,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModifyQuery {
    pub delete: Vec<TriplePattern>,
    pub insert: Vec<TriplePattern>,
    pub where_clause: WhereClause,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryForm {
    Select(SelectQuery),
    InsertData(Vec<TriplePattern>),
    Modify(ModifyQuery),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub prefixes: BTreeMap<String, String>,
    pub form: QueryForm,
}

impl Query {
    pub fn is_update(&self) -> bool {
        !matches!(self.form, QueryForm::Select(_))
    }
}

/// Result of running arbitrary query text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Solutions(Solutions),
    Updated(UpdateStats),
}

/// Parses and runs `text` against the knowledge base. Updates go through
/// [`KnowledgeBase::apply`], so they are atomic and cannot touch the TBox.
pub fn execute(kb: &mut KnowledgeBase, text: &str) -> Result<Outcome, QueryError> {
    let q = parse(text)?;
    match &q.form {
        QueryForm::Select(s) => Ok(Outcome::Solutions(eval_select(kb.graph(), s))),
        _ => {
            let changes = plan_update(kb.graph(), &q)?;
            Ok(Outcome::Updated(kb.apply(&changes)?))
        }
    }
}

/// Read-only counterpart of [`execute`]; rejects updates.
pub fn select(kb: &KnowledgeBase, text: &str) -> Result<Solutions, QueryError> {
    let q = parse(text)?;
    match &q.form {
        QueryForm::Select(s) => Ok(eval_select(kb.graph(), s)),
        _ => Err(QueryError::UnsupportedFeature("update in read-only context".into())),
    }
}
