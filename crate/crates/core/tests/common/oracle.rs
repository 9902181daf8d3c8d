//! Random SELECT queries over random graphs, and a deliberately naive
//! evaluator for them: every pattern is matched by scanning every triple,
//! patterns are joined by plain nested loops, filters run at the end.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use chrono::{TimeZone, Utc};
use ontomas::kb::{Graph, Iri, Literal, Term, Triple};
use rand::seq::IndexedRandom;
use rand::Rng;
use rust_decimal::Decimal;

const EX: &str = "http://example.org/manufacturing#";
const VARS: [&str; 4] = ["a", "b", "c", "d"];
const OPS: [&str; 6] = ["=", "!=", "<", "<=", ">", ">="];

#[derive(Clone, Debug)]
pub enum Slot {
    Var(usize),
    Const(Term),
}

#[derive(Clone, Debug)]
pub struct Filter {
    pub left: Slot,
    pub op: &'static str,
    pub right: Slot,
}

#[derive(Clone, Debug)]
pub struct RandomQuery {
    pub distinct: bool,
    pub star: bool,
    pub projection: Vec<usize>,
    pub patterns: Vec<[Slot; 3]>,
    pub filters: Vec<Filter>,
}

fn ex(local: &str) -> Term {
    Term::Iri(Iri::new(format!("{EX}{local}")).unwrap())
}

fn random_node(rng: &mut impl Rng) -> Term {
    ex(&format!("n{}", rng.random_range(0..6)))
}

fn random_predicate(rng: &mut impl Rng) -> Term {
    ex(&format!("p{}", rng.random_range(0..3)))
}

fn random_literal(rng: &mut impl Rng) -> Term {
    match rng.random_range(0..5) {
        0 => Term::integer(rng.random_range(-3..4)),
        1 => Term::decimal(Decimal::new(rng.random_range(-30..40), 1)),
        2 => Term::string(*["a", "b", "B", "ab", ""].choose(rng).unwrap()),
        3 => Term::Literal(Literal::Boolean(rng.random_bool(0.5))),
        _ => Term::datetime(Utc.with_ymd_and_hms(2023, 1, 1, rng.random_range(0..3), 0, 0).unwrap()),
    }
}

fn random_object(rng: &mut impl Rng) -> Term {
    if rng.random_bool(0.5) {
        random_node(rng)
    } else {
        random_literal(rng)
    }
}

/// A graph of at most 200 distinct triples over a small vocabulary, so
/// that joins actually meet.
pub fn random_graph(rng: &mut impl Rng) -> Vec<Triple> {
    let n = rng.random_range(0..=200);
    let mut set = BTreeSet::new();
    for _ in 0..n {
        let s = random_node(rng);
        let p = random_predicate(rng);
        let o = random_object(rng);
        set.insert(Triple::new(s, p, o).unwrap());
    }
    set.into_iter().collect()
}

pub fn to_graph(triples: &[Triple]) -> Graph {
    let mut g = Graph::new();
    for t in triples {
        g.insert(t.clone());
    }
    g
}

fn slot(rng: &mut impl Rng, position: usize) -> Slot {
    if rng.random_bool(0.6) {
        return Slot::Var(rng.random_range(0..VARS.len()));
    }
    Slot::Const(match position {
        0 => random_node(rng),
        1 => random_predicate(rng),
        _ => random_object(rng),
    })
}

pub fn random_query(rng: &mut impl Rng) -> RandomQuery {
    let n = rng.random_range(1..=3);
    let mut patterns: Vec<[Slot; 3]> = (0..n).map(|_| [slot(rng, 0), slot(rng, 1), slot(rng, 2)]).collect();
    if bound_vars(&patterns).is_empty() {
        patterns[0][0] = Slot::Var(0);
    }
    let bound = bound_vars(&patterns);
    let filters = (0..rng.random_range(0..=2))
        .map(|_| Filter {
            left: Slot::Var(*bound.choose(rng).unwrap()),
            op: OPS.choose(rng).unwrap(),
            right: if rng.random_bool(0.4) {
                Slot::Var(*bound.choose(rng).unwrap())
            } else {
                Slot::Const(random_object(rng))
            },
        })
        .collect();
    let star = rng.random_bool(0.2);
    let projection = if star {
        bound.clone()
    } else {
        let k = rng.random_range(1..=bound.len());
        bound.choose_multiple(rng, k).copied().collect()
    };
    RandomQuery {
        distinct: rng.random_bool(0.5),
        star,
        projection,
        patterns,
        filters,
    }
}

/// Variables in order of first appearance.
fn bound_vars(patterns: &[[Slot; 3]]) -> Vec<usize> {
    let mut out = Vec::new();
    for p in patterns {
        for s in p {
            if let Slot::Var(v) = s {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
        }
    }
    out
}

fn render_term(t: &Term, rng: &mut impl Rng) -> String {
    match t {
        Term::Iri(i) if rng.random_bool(0.5) => format!("ex:{}", i.as_str().strip_prefix(EX).unwrap()),
        Term::Literal(Literal::Integer(i)) if rng.random_bool(0.5) => i.to_string(),
        Term::Literal(Literal::Decimal(d)) if d.to_string().contains('.') && rng.random_bool(0.5) => d.to_string(),
        Term::Literal(Literal::String(s)) if rng.random_bool(0.5) => format!("'{s}'"),
        Term::Literal(Literal::Boolean(b)) if rng.random_bool(0.5) => b.to_string(),
        _ => t.canonical(),
    }
}

fn render_slot(s: &Slot, rng: &mut impl Rng) -> String {
    match s {
        Slot::Var(v) => format!("?{}", VARS[*v]),
        Slot::Const(t) => render_term(t, rng),
    }
}

/// Query text in the engine's grammar, mixing abbreviated and full term
/// syntax.
pub fn render_query(q: &RandomQuery, rng: &mut impl Rng) -> String {
    let mut text = format!("PREFIX ex: <{EX}>\nSELECT ");
    if q.distinct {
        text.push_str("DISTINCT ");
    }
    if q.star {
        text.push('*');
    } else {
        let vars: Vec<String> = q.projection.iter().map(|v| format!("?{}", VARS[*v])).collect();
        text.push_str(&vars.join(" "));
    }
    text.push_str(" WHERE {\n");
    for p in &q.patterns {
        let parts: Vec<String> = p.iter().map(|s| render_slot(s, rng)).collect();
        text.push_str(&format!("  {} .\n", parts.join(" ")));
    }
    for f in &q.filters {
        text.push_str(&format!(
            "  FILTER ({} {} {})\n",
            render_slot(&f.left, rng),
            f.op,
            render_slot(&f.right, rng)
        ));
    }
    text.push('}');
    text
}

fn numeric(l: &Literal) -> Option<Decimal> {
    match l {
        Literal::Integer(i) => Some(Decimal::from(*i)),
        Literal::Decimal(d) => Some(*d),
        _ => None,
    }
}

/// Filter comparison: numbers by value, strings by code point, times
/// chronologically, booleans false < true; IRIs only for (in)equality;
/// anything else is false.
fn holds(l: &Term, op: &str, r: &Term) -> bool {
    let ord = match (l, r) {
        (Term::Iri(a), Term::Iri(b)) => {
            return match op {
                "=" => a == b,
                "!=" => a != b,
                _ => false,
            }
        }
        (Term::Literal(a), Term::Literal(b)) => match (numeric(a), numeric(b), a, b) {
            (Some(x), Some(y), _, _) => x.cmp(&y),
            (_, _, Literal::String(x), Literal::String(y)) => x.chars().cmp(y.chars()),
            (_, _, Literal::DateTime(x), Literal::DateTime(y)) => x.cmp(y),
            (_, _, Literal::Boolean(x), Literal::Boolean(y)) => x.cmp(y),
            _ => return false,
        },
        _ => return false,
    };
    match op {
        "=" => ord == Ordering::Equal,
        "!=" => ord != Ordering::Equal,
        "<" => ord == Ordering::Less,
        "<=" => ord != Ordering::Greater,
        ">" => ord == Ordering::Greater,
        _ => ord != Ordering::Less,
    }
}

fn join(triples: &[Triple], patterns: &[[Slot; 3]], binding: &mut Vec<Option<Term>>, out: &mut Vec<Vec<Option<Term>>>) {
    let Some((first, rest)) = patterns.split_first() else {
        out.push(binding.clone());
        return;
    };
    for t in triples {
        let saved = binding.clone();
        let terms = [t.subject(), t.predicate(), t.object()];
        let fits = first.iter().zip(terms).all(|(s, term)| match s {
            Slot::Const(c) => c == term,
            Slot::Var(v) => match &binding[*v] {
                Some(b) => b == term,
                None => {
                    binding[*v] = Some(term.clone());
                    true
                }
            },
        });
        if fits {
            join(triples, rest, binding, out);
        }
        *binding = saved;
    }
}

/// Rows of canonical term text, in the engine's documented order.
pub fn evaluate(triples: &[Triple], q: &RandomQuery) -> Vec<Vec<String>> {
    let mut solutions = Vec::new();
    join(triples, &q.patterns, &mut vec![None; VARS.len()], &mut solutions);
    let value = |b: &Vec<Option<Term>>, s: &Slot| match s {
        Slot::Var(v) => b[*v].clone(),
        Slot::Const(t) => Some(t.clone()),
    };
    let mut rows: Vec<Vec<String>> = solutions
        .iter()
        .filter(|b| {
            q.filters.iter().all(|f| match (value(b, &f.left), value(b, &f.right)) {
                (Some(l), Some(r)) => holds(&l, f.op, &r),
                _ => false,
            })
        })
        .map(|b| {
            q.projection
                .iter()
                .map(|v| b[*v].as_ref().unwrap().canonical())
                .collect()
        })
        .collect();
    if q.distinct {
        let mut seen = BTreeSet::new();
        rows.retain(|r| seen.insert(r.clone()));
    }
    rows.sort();
    rows
}
