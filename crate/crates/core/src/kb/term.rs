use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{DateTime, NaiveDateTime, Utc};
use rust_decimal::Decimal;

use super::vocab;
use super::KbError;

/// An absolute IRI. Never empty, never contains whitespace.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(text: impl AsRef<str>) -> Result<Self, KbError> {
        let text = text.as_ref();
        if text.is_empty() {
            return Err(KbError::InvalidIri("empty IRI".into()));
        }
        if let Some(c) = text
            .chars()
            .find(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
        {
            return Err(KbError::InvalidIri(format!("{text:?} contains {c:?}")));
        }
        Ok(Iri(Arc::from(text)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Local part after the manufacturing namespace, if the IRI lives there.
    pub fn local_name(&self) -> Option<&str> {
        self.0.strip_prefix(vocab::EX)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Datatype {
    String,
    Integer,
    Decimal,
    Boolean,
    DateTime,
}

impl Datatype {
    pub fn iri(self) -> &'static str {
        match self {
            Datatype::String => vocab::XSD_STRING,
            Datatype::Integer => vocab::XSD_INTEGER,
            Datatype::Decimal => vocab::XSD_DECIMAL,
            Datatype::Boolean => vocab::XSD_BOOLEAN,
            Datatype::DateTime => vocab::XSD_DATETIME,
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        Some(match iri {
            vocab::XSD_STRING => Datatype::String,
            vocab::XSD_INTEGER => Datatype::Integer,
            vocab::XSD_DECIMAL => Datatype::Decimal,
            vocab::XSD_BOOLEAN => Datatype::Boolean,
            vocab::XSD_DATETIME => Datatype::DateTime,
            _ => return None,
        })
    }
}

/// A typed literal. Decimals are kept normalized so that equal values have
/// equal canonical text.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Literal {
    String(Arc<str>),
    Integer(i64),
    Decimal(Decimal),
    Boolean(bool),
    DateTime(DateTime<Utc>),
}

impl Literal {
    pub fn string(s: impl AsRef<str>) -> Self {
        Literal::String(Arc::from(s.as_ref()))
    }

    pub fn decimal(d: Decimal) -> Self {
        Literal::Decimal(d.normalize())
    }

    pub fn datatype(&self) -> Datatype {
        match self {
            Literal::String(_) => Datatype::String,
            Literal::Integer(_) => Datatype::Integer,
            Literal::Decimal(_) => Datatype::Decimal,
            Literal::Boolean(_) => Datatype::Boolean,
            Literal::DateTime(_) => Datatype::DateTime,
        }
    }

    /// Lexical form, e.g. `110.25` or `2023-01-01T00:00:00Z`.
    pub fn lexical(&self) -> String {
        match self {
            Literal::String(s) => s.to_string(),
            Literal::Integer(i) => i.to_string(),
            Literal::Decimal(d) => d.normalize().to_string(),
            Literal::Boolean(b) => b.to_string(),
            Literal::DateTime(t) => format_datetime(t),
        }
    }

    /// Parse a lexical form under the given datatype.
    pub fn parse(lexical: &str, datatype: Datatype) -> Result<Self, KbError> {
        let bad = || KbError::InvalidLiteral {
            lexical: lexical.to_string(),
            datatype: datatype.iri(),
        };
        Ok(match datatype {
            Datatype::String => Literal::string(lexical),
            Datatype::Integer => Literal::Integer(lexical.parse().map_err(|_| bad())?),
            Datatype::Decimal => {
                if lexical.contains(['e', 'E']) {
                    return Err(bad());
                }
                Literal::decimal(Decimal::from_str(lexical).map_err(|_| bad())?)
            }
            Datatype::Boolean => match lexical {
                "true" | "1" => Literal::Boolean(true),
                "false" | "0" => Literal::Boolean(false),
                _ => return Err(bad()),
            },
            Datatype::DateTime => Literal::DateTime(parse_datetime(lexical).ok_or_else(bad)?),
        })
    }

    pub fn as_decimal(&self) -> Option<Decimal> {
        match self {
            Literal::Integer(i) => Some(Decimal::from(*i)),
            Literal::Decimal(d) => Some(*d),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Literal::String(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_datetime(&self) -> Option<DateTime<Utc>> {
        match self {
            Literal::DateTime(t) => Some(*t),
            _ => None,
        }
    }

    fn canonical(&self) -> String {
        let mut out = String::from("\"");
        escape_into(&self.lexical(), &mut out);
        out.push('"');
        if !matches!(self, Literal::String(_)) {
            out.push_str("^^<");
            out.push_str(self.datatype().iri());
            out.push('>');
        }
        out
    }
}

pub(crate) fn escape_into(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
}

/// ISO-8601 UTC, second resolution.
pub fn format_datetime(t: &DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Accepts RFC 3339 timestamps plus the minute-resolution forms
/// `YYYY-MM-DDTHH:MMZ` and `YYYY-MM-DDTHH:MM`.
pub fn parse_datetime(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    let naive = s.strip_suffix('Z').unwrap_or(s);
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(naive, fmt).ok())
        .map(|n| n.and_utc())
}

/// An RDF term: an IRI or a literal. Blank nodes are not supported.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn iri(text: impl AsRef<str>) -> Result<Self, KbError> {
        Iri::new(text).map(Term::Iri)
    }

    pub fn string(s: impl AsRef<str>) -> Self {
        Term::Literal(Literal::string(s))
    }

    pub fn decimal(d: Decimal) -> Self {
        Term::Literal(Literal::decimal(d))
    }

    pub fn integer(i: i64) -> Self {
        Term::Literal(Literal::Integer(i))
    }

    pub fn datetime(t: DateTime<Utc>) -> Self {
        Term::Literal(Literal::DateTime(t))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            Term::Iri(_) => None,
        }
    }

    /// N-Triples style text: `<iri>`, `"text"` or `"lex"^^<datatype>`.
    /// Every ordering in the store is defined over this text.
    pub fn canonical(&self) -> String {
        match self {
            Term::Iri(i) => i.to_string(),
            Term::Literal(l) => l.canonical(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical().cmp(&other.canonical())
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

/// A subject–predicate–object statement. Subject and predicate are IRIs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, KbError> {
        if !subject.is_iri() {
            return Err(KbError::MalformedTriple(format!("subject {subject} is not an IRI")));
        }
        if !predicate.is_iri() {
            return Err(KbError::MalformedTriple(format!("predicate {predicate} is not an IRI")));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    /// Infallible constructor for IRIs already known to be valid.
    pub fn from_iris(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject: Term::Iri(subject),
            predicate: Term::Iri(predicate),
            object: object.into(),
        }
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn sort_key(&self) -> (String, String, String) {
        (
            self.subject.canonical(),
            self.predicate.canonical(),
            self.object.canonical(),
        )
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

impl PartialOrd for Triple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Triple {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}
