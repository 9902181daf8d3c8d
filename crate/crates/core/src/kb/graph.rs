use std::collections::{HashMap, HashSet};

use super::schema::OntologySchema;
use super::term::{Term, Triple};
use super::vocab::{RDFS_SUBCLASS_OF, RDF_TYPE};

/// A triple pattern; `None` components are wildcards.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub subject: Option<Term>,
    pub predicate: Option<Term>,
    pub object: Option<Term>,
}

impl Pattern {
    pub fn new(subject: Option<Term>, predicate: Option<Term>, object: Option<Term>) -> Self {
        Pattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn any() -> Self {
        Pattern::default()
    }

    pub fn matches(&self, t: &Triple) -> bool {
        self.subject.as_ref().is_none_or(|s| s == t.subject())
            && self.predicate.as_ref().is_none_or(|p| p == t.predicate())
            && self.object.as_ref().is_none_or(|o| o == t.object())
    }
}

type Bucket = HashSet<Triple>;

/// In-memory triple set with single and paired position indexes.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    triples: HashSet<Triple>,
    by_s: HashMap<Term, Bucket>,
    by_p: HashMap<Term, Bucket>,
    by_o: HashMap<Term, Bucket>,
    by_sp: HashMap<(Term, Term), Bucket>,
    by_po: HashMap<(Term, Term), Bucket>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for Graph {}

fn add(map: &mut HashMap<Term, Bucket>, key: &Term, t: &Triple) {
    map.entry(key.clone()).or_default().insert(t.clone());
}

fn add2(map: &mut HashMap<(Term, Term), Bucket>, key: (Term, Term), t: &Triple) {
    map.entry(key).or_default().insert(t.clone());
}

fn drop1(map: &mut HashMap<Term, Bucket>, key: &Term, t: &Triple) {
    if let Some(bucket) = map.get_mut(key) {
        bucket.remove(t);
        if bucket.is_empty() {
            map.remove(key);
        }
    }
}

fn drop2(map: &mut HashMap<(Term, Term), Bucket>, key: (Term, Term), t: &Triple) {
    if let Some(bucket) = map.get_mut(&key) {
        bucket.remove(t);
        if bucket.is_empty() {
            map.remove(&key);
        }
    }
}

pub(crate) fn sort_triples(v: &mut [Triple]) {
    v.sort_by_cached_key(Triple::sort_key);
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    /// A graph holding exactly the schema's TBox triples.
    pub fn with_schema(schema: &OntologySchema) -> Self {
        let mut g = Graph::new();
        for t in schema.tbox_triples() {
            g.insert(t);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    /// Unordered iteration over all triples.
    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// All triples in canonical `(s, p, o)` order.
    pub fn sorted(&self) -> Vec<Triple> {
        let mut v: Vec<Triple> = self.triples.iter().cloned().collect();
        sort_triples(&mut v);
        v
    }

    /// Returns `true` if the triple was new.
    pub fn insert(&mut self, t: Triple) -> bool {
        if self.triples.contains(&t) {
            return false;
        }
        let (s, p, o) = (t.subject().clone(), t.predicate().clone(), t.object().clone());
        add(&mut self.by_s, &s, &t);
        add(&mut self.by_p, &p, &t);
        add(&mut self.by_o, &o, &t);
        add2(&mut self.by_sp, (s, p.clone()), &t);
        add2(&mut self.by_po, (p, o), &t);
        self.triples.insert(t);
        true
    }

    /// Returns `true` if the triple was present.
    pub fn remove_triple(&mut self, t: &Triple) -> bool {
        if !self.triples.remove(t) {
            return false;
        }
        let (s, p, o) = (t.subject(), t.predicate(), t.object());
        drop1(&mut self.by_s, s, t);
        drop1(&mut self.by_p, p, t);
        drop1(&mut self.by_o, o, t);
        drop2(&mut self.by_sp, (s.clone(), p.clone()), t);
        drop2(&mut self.by_po, (p.clone(), o.clone()), t);
        true
    }

    /// Removes every stored triple matching the pattern and returns the count.
    /// No entailment is applied here.
    pub fn remove(&mut self, pattern: &Pattern) -> usize {
        let doomed = self.match_raw(pattern);
        for t in &doomed {
            self.remove_triple(t);
        }
        doomed.len()
    }

    /// Stored triples matching the pattern, in canonical order.
    pub fn match_raw(&self, pattern: &Pattern) -> Vec<Triple> {
        let mut out: Vec<Triple> = self
            .candidates(pattern)
            .filter(|t| pattern.matches(t))
            .cloned()
            .collect();
        sort_triples(&mut out);
        out
    }

    /// Picks the narrowest index for the bound positions. The caller still
    /// filters with [`Pattern::matches`] for positions the index ignores.
    fn candidates<'a>(&'a self, pattern: &Pattern) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
        fn bucket<'a, K: std::hash::Hash + Eq>(
            map: &'a HashMap<K, Bucket>,
            key: &K,
        ) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
            match map.get(key) {
                Some(b) => Box::new(b.iter()),
                None => Box::new(std::iter::empty()),
            }
        }
        match (&pattern.subject, &pattern.predicate, &pattern.object) {
            (Some(s), Some(p), Some(o)) => {
                let probe = Triple::new(s.clone(), p.clone(), o.clone());
                match probe {
                    Ok(t) => match self.triples.get(&t) {
                        Some(found) => Box::new(std::iter::once(found)),
                        None => Box::new(std::iter::empty()),
                    },
                    Err(_) => Box::new(std::iter::empty()),
                }
            }
            (Some(s), Some(p), None) => bucket(&self.by_sp, &(s.clone(), p.clone())),
            (None, Some(p), Some(o)) => bucket(&self.by_po, &(p.clone(), o.clone())),
            (Some(s), None, _) => bucket(&self.by_s, s),
            (None, Some(p), None) => bucket(&self.by_p, p),
            (None, None, Some(o)) => bucket(&self.by_o, o),
            (None, None, None) => Box::new(self.triples.iter()),
        }
    }

    /// Pattern match with `rdfs:subClassOf` entailment on `rdf:type`: an
    /// instance of a class is also reported as an instance of every
    /// (transitive) superclass. All other predicates match as stored.
    pub fn match_pattern(&self, pattern: &Pattern) -> Vec<Triple> {
        let rdf_type = Term::Iri(super::vocab::rdf_type());
        let type_possible = pattern.predicate.as_ref().is_none_or(|p| *p == rdf_type);
        if !type_possible {
            return self.match_raw(pattern);
        }

        let mut found: HashSet<Triple> = self.match_raw(pattern).into_iter().collect();

        // stored type assertions that could entail a matching triple
        let seeds: Vec<&Triple> = match (&pattern.subject, &pattern.object) {
            (Some(s), _) => self
                .candidates(&Pattern::new(Some(s.clone()), Some(rdf_type.clone()), None))
                .collect(),
            (None, Some(class)) => self
                .subclasses_of(class)
                .into_iter()
                .flat_map(|c| self.candidates(&Pattern::new(None, Some(rdf_type.clone()), Some(c))))
                .collect(),
            (None, None) => self
                .candidates(&Pattern::new(None, Some(rdf_type.clone()), None))
                .collect(),
        };
        for seed in seeds {
            for sup in self.superclasses_of(seed.object()) {
                let t = Triple::new(seed.subject().clone(), rdf_type.clone(), sup).expect("seed subject is an IRI");
                if pattern.matches(&t) {
                    found.insert(t);
                }
            }
        }
        let mut out: Vec<Triple> = found.into_iter().collect();
        sort_triples(&mut out);
        out
    }

    /// Strict transitive superclasses.
    pub fn superclasses_of(&self, class: &Term) -> Vec<Term> {
        self.closure(class, true)
    }

    /// The class itself plus every transitive subclass.
    pub fn subclasses_of(&self, class: &Term) -> Vec<Term> {
        let mut v = vec![class.clone()];
        v.extend(self.closure(class, false));
        v
    }

    fn closure(&self, start: &Term, upward: bool) -> Vec<Term> {
        let sub = Term::Iri(super::vocab::iri(RDFS_SUBCLASS_OF));
        let mut seen: HashSet<Term> = HashSet::new();
        let mut stack = vec![start.clone()];
        let mut out = Vec::new();
        while let Some(c) = stack.pop() {
            let next: Vec<Term> = if upward {
                self.candidates(&Pattern::new(Some(c.clone()), Some(sub.clone()), None))
                    .map(|t| t.object().clone())
                    .collect()
            } else {
                self.candidates(&Pattern::new(None, Some(sub.clone()), Some(c.clone())))
                    .map(|t| t.subject().clone())
                    .collect()
            };
            for n in next {
                if n != *start && seen.insert(n.clone()) {
                    out.push(n.clone());
                    stack.push(n);
                }
            }
        }
        out.sort();
        out
    }

    /// True when `instance rdf:type class` holds under subclass entailment.
    pub fn is_instance_of(&self, instance: &Term, class: &Term) -> bool {
        let ty = Term::Iri(super::vocab::iri(RDF_TYPE));
        !self
            .match_pattern(&Pattern::new(Some(instance.clone()), Some(ty), Some(class.clone())))
            .is_empty()
    }

    /// Single object for `(subject, predicate, ?)`, the smallest in canonical
    /// order if several are stored.
    pub fn object_of(&self, subject: &Term, predicate: &Term) -> Option<Term> {
        self.match_raw(&Pattern::new(Some(subject.clone()), Some(predicate.clone()), None))
            .into_iter()
            .next()
            .map(|t| t.object().clone())
    }

    pub fn objects_of(&self, subject: &Term, predicate: &Term) -> Vec<Term> {
        self.match_raw(&Pattern::new(Some(subject.clone()), Some(predicate.clone()), None))
            .into_iter()
            .map(|t| t.object().clone())
            .collect()
    }

    pub fn subjects_with(&self, predicate: &Term, object: &Term) -> Vec<Term> {
        self.match_raw(&Pattern::new(None, Some(predicate.clone()), Some(object.clone())))
            .into_iter()
            .map(|t| t.subject().clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::vocab::{self, ex_term};
    use proptest::prelude::*;

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(ex_term(s), ex_term(p), ex_term(o)).unwrap()
    }

    #[test]
    fn duplicate_insert_is_noop() {
        let mut g = Graph::new();
        assert!(g.insert(t("a", "b", "c")));
        assert!(!g.insert(t("a", "b", "c")));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn remove_counts_matches() {
        let mut g = Graph::new();
        g.insert(t("exec1", "hasStatus", "x"));
        g.insert(t("exec1", "other", "x"));
        let n = g.remove(&Pattern::new(Some(ex_term("exec1")), Some(ex_term("hasStatus")), None));
        assert_eq!(n, 1);
        assert_eq!(g.len(), 1);
        assert_eq!(g.remove(&Pattern::new(Some(ex_term("nope")), None, None)), 0);
    }

    #[test]
    fn type_match_follows_subclass_chain() {
        let mut g = Graph::with_schema(&OntologySchema::default());
        let ty = Term::Iri(vocab::rdf_type());
        g.insert(Triple::new(ex_term("M1"), ty.clone(), ex_term("Machine")).unwrap());
        let resources = g.match_pattern(&Pattern::new(None, Some(ty.clone()), Some(ex_term("Resource"))));
        assert_eq!(resources.len(), 1);
        assert_eq!(resources[0].subject(), &ex_term("M1"));
        // raw match does not entail
        assert!(g
            .match_raw(&Pattern::new(None, Some(ty), Some(ex_term("Resource"))))
            .is_empty());
        assert!(g.is_instance_of(&ex_term("M1"), &ex_term("Resource")));
        assert!(!g.is_instance_of(&ex_term("M1"), &ex_term("Robot")));
    }

    #[test]
    fn subclass_cycle_terminates() {
        let mut g = Graph::new();
        let sub = Term::Iri(vocab::iri(RDFS_SUBCLASS_OF));
        g.insert(Triple::new(ex_term("A"), sub.clone(), ex_term("B")).unwrap());
        g.insert(Triple::new(ex_term("B"), sub, ex_term("A")).unwrap());
        assert_eq!(g.superclasses_of(&ex_term("A")), vec![ex_term("B")]);
    }

    fn small_term() -> impl Strategy<Value = Term> {
        (0u8..6).prop_map(|i| ex_term(&format!("n{i}")))
    }

    fn object_term() -> impl Strategy<Value = Term> {
        prop_oneof![small_term(), (0i64..4).prop_map(Term::integer)]
    }

    fn triple() -> impl Strategy<Value = Triple> {
        (small_term(), small_term(), object_term()).prop_map(|(s, p, o)| Triple::new(s, p, o).unwrap())
    }

    proptest! {
        #[test]
        fn index_lookup_equals_full_scan(
            triples in prop::collection::vec(triple(), 0..120),
            s in prop::option::of(small_term()),
            p in prop::option::of(small_term()),
            o in prop::option::of(object_term()),
        ) {
            let mut g = Graph::new();
            for t in &triples {
                g.insert(t.clone());
            }
            let pattern = Pattern::new(s, p, o);
            let mut scan: Vec<Triple> = g.iter().filter(|t| pattern.matches(t)).cloned().collect();
            sort_triples(&mut scan);
            prop_assert_eq!(g.match_raw(&pattern), scan);
        }

        #[test]
        fn insert_then_remove_restores(triples in prop::collection::vec(triple(), 0..60), extra in triple()) {
            let mut g = Graph::new();
            for t in &triples {
                g.insert(t.clone());
            }
            let before = g.clone();
            let was_new = g.insert(extra.clone());
            if was_new {
                g.remove_triple(&extra);
            }
            prop_assert_eq!(&g, &before);
            // indexes agree after the round trip too
            for t in before.iter() {
                prop_assert_eq!(g.match_raw(&Pattern::new(Some(t.subject().clone()), None, None)),
                                before.match_raw(&Pattern::new(Some(t.subject().clone()), None, None)));
            }
        }
    }
}
