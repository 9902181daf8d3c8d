//! Knowledge base: RDF terms, the manufacturing TBox, an indexed in-memory
//! triple store and its Turtle form.

mod graph;
mod schema;
mod term;
pub mod turtle;
pub mod vocab;

use std::collections::HashSet;

pub(crate) use graph::sort_triples as graph_sort;
pub use graph::{Graph, Pattern};
pub use schema::{DatatypeProperty, ObjectProperty, OntologySchema};
pub use term::{format_datetime, parse_datetime, Datatype, Iri, Literal, Term, Triple};
pub use turtle::{dump_turtle, load_turtle, ParseError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum KbError {
    #[error("invalid IRI: {0}")]
    InvalidIri(String),
    #[error("invalid literal {lexical:?} for datatype <{datatype}>")]
    InvalidLiteral { lexical: String, datatype: &'static str },
    #[error("malformed triple: {0}")]
    MalformedTriple(String),
    #[error("schema triple cannot be removed: {0}")]
    ProtectedTriple(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Triples to delete and then insert, applied as one unit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Changeset {
    pub delete: Vec<Triple>,
    pub insert: Vec<Triple>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct UpdateStats {
    pub inserted: usize,
    pub deleted: usize,
}

impl Graph {
    /// Deletes first, then inserts. Counts only triples whose presence
    /// actually changed.
    pub fn apply(&mut self, changes: &Changeset) -> UpdateStats {
        let mut stats = UpdateStats::default();
        for t in &changes.delete {
            if self.remove_triple(t) {
                stats.deleted += 1;
            }
        }
        for t in &changes.insert {
            if self.insert(t.clone()) {
                stats.inserted += 1;
            }
        }
        stats
    }
}

/// The graph plus the bookkeeping every writer needs: which triples belong
/// to the TBox (and may not be retracted) and a revision counter bumped once
/// per committed change.
#[derive(Clone, Debug)]
pub struct KnowledgeBase {
    graph: Graph,
    schema: OntologySchema,
    tbox: HashSet<Triple>,
    revision: u64,
}

impl Default for KnowledgeBase {
    fn default() -> Self {
        KnowledgeBase::with_schema(OntologySchema::default())
    }
}

impl KnowledgeBase {
    pub fn new() -> Self {
        KnowledgeBase::default()
    }

    pub fn with_schema(schema: OntologySchema) -> Self {
        let graph = Graph::with_schema(&schema);
        let tbox = schema.tbox_triples().into_iter().collect();
        KnowledgeBase {
            graph,
            schema,
            tbox,
            revision: 0,
        }
    }

    /// Wraps an existing graph, adding any TBox triples it lacks.
    pub fn from_graph(mut graph: Graph) -> Self {
        let schema = OntologySchema::default();
        let tbox: HashSet<Triple> = schema.tbox_triples().into_iter().collect();
        for t in &tbox {
            graph.insert(t.clone());
        }
        KnowledgeBase {
            graph,
            schema,
            tbox,
            revision: 0,
        }
    }

    pub fn load_turtle(text: &str) -> Result<Self, ParseError> {
        load_turtle(text).map(KnowledgeBase::from_graph)
    }

    pub fn dump_turtle(&self) -> String {
        dump_turtle(&self.graph)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn schema(&self) -> &OntologySchema {
        &self.schema
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn is_tbox(&self, t: &Triple) -> bool {
        self.tbox.contains(t)
    }

    /// Number of instance (non-TBox) triples.
    pub fn abox_len(&self) -> usize {
        self.graph.iter().filter(|t| !self.tbox.contains(t)).count()
    }

    /// Applies a changeset atomically. Rejects the whole set, leaving the
    /// graph and revision untouched, if it would delete a TBox triple.
    pub fn apply(&mut self, changes: &Changeset) -> Result<UpdateStats, KbError> {
        if let Some(t) = changes.delete.iter().find(|t| self.tbox.contains(t)) {
            return Err(KbError::ProtectedTriple(t.to_string()));
        }
        let stats = self.graph.apply(changes);
        self.revision += 1;
        Ok(stats)
    }

    pub fn insert(&mut self, t: Triple) -> Result<bool, KbError> {
        let stats = self.apply(&Changeset {
            delete: Vec::new(),
            insert: vec![t],
        })?;
        Ok(stats.inserted == 1)
    }

    /// Removes matching ABox triples; fails without side effects if any
    /// match is part of the TBox.
    pub fn retract(&mut self, pattern: &Pattern) -> Result<usize, KbError> {
        let delete = self.graph.match_raw(pattern);
        self.apply(&Changeset {
            delete,
            insert: Vec::new(),
        })
        .map(|s| s.deleted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vocab::{ex_term, rdf_type};

    #[test]
    fn fresh_kb_holds_only_tbox() {
        let kb = KnowledgeBase::new();
        assert_eq!(kb.abox_len(), 0);
        assert_eq!(kb.graph().len(), OntologySchema::default().tbox_triples().len());
        let machine_sub = Triple::new(
            ex_term("Machine"),
            Term::Iri(vocab::iri(vocab::RDFS_SUBCLASS_OF)),
            ex_term("Resource"),
        )
        .unwrap();
        assert!(kb.graph().contains(&machine_sub));
        let dom = Triple::new(
            ex_term("runsOnResource"),
            Term::Iri(vocab::iri(vocab::RDFS_DOMAIN)),
            ex_term("ProcessExecution"),
        )
        .unwrap();
        assert!(kb.graph().contains(&dom));
    }

    #[test]
    fn tbox_is_protected_through_the_facade() {
        let mut kb = KnowledgeBase::new();
        let before = kb.dump_turtle();
        let err = kb
            .retract(&Pattern::new(Some(ex_term("Machine")), None, None))
            .unwrap_err();
        assert!(matches!(err, KbError::ProtectedTriple(_)));
        assert_eq!(kb.dump_turtle(), before);
        assert_eq!(kb.revision(), 0);

        kb.insert(Triple::from_iris(vocab::ex("M1"), rdf_type(), ex_term("Machine")))
            .unwrap();
        assert_eq!(kb.retract(&Pattern::new(Some(ex_term("M1")), None, None)).unwrap(), 1);
        assert_eq!(kb.revision(), 2);
    }

    #[test]
    fn raw_graph_allows_full_wipe() {
        let kb = KnowledgeBase::new();
        let mut g = kb.graph().clone();
        let n = g.remove(&Pattern::any());
        assert_eq!(n, OntologySchema::default().tbox_triples().len());
        assert!(g.is_empty());
    }
}
