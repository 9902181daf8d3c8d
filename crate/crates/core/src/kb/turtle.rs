//! Turtle subset: prefixed names, IRI references, plain and typed literals,
//! bare numbers and booleans, `a`, and `;` / `,` lists. No blank nodes,
//! collections or language tags.
//!
//! The writer emits one statement per line, sorted by canonical `(s, p, o)`
//! text, after a fixed block of `@prefix` lines.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::graph::Graph;
use super::term::{escape_into, Datatype, Iri, Literal, Term, Triple};
use super::vocab::{RDF_TYPE, STANDARD_PREFIXES, XSD_STRING};
use crate::syntax::{self, Token, TokenKind};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("Turtle parse error at line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

pub fn load_turtle(text: &str) -> Result<Graph, ParseError> {
    let mut g = Graph::new();
    for t in parse_triples(text)? {
        g.insert(t);
    }
    Ok(g)
}

pub fn parse_triples(text: &str) -> Result<Vec<Triple>, ParseError> {
    let tokens = syntax::tokenize(text).map_err(|e| ParseError {
        line: e.line,
        col: e.col,
        message: e.message,
    })?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: syntax::end_position(text),
        prefixes: STANDARD_PREFIXES
            .iter()
            .map(|(p, ns)| (p.to_string(), ns.to_string()))
            .collect(),
        out: Vec::new(),
    };
    p.document()?;
    Ok(p.out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    prefixes: HashMap<String, String>,
    out: Vec<Triple>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, expected: &str) -> Result<Token, ParseError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(self.eof(expected)),
        }
    }

    fn eof(&self, expected: &str) -> ParseError {
        ParseError {
            line: self.end.0,
            col: self.end.1,
            message: format!("unexpected end of input, expected {expected}"),
        }
    }

    fn error_at(tok: &Token, message: impl Into<String>) -> ParseError {
        ParseError {
            line: tok.line,
            col: tok.col,
            message: message.into(),
        }
    }

    fn document(&mut self) -> Result<(), ParseError> {
        while let Some(tok) = self.peek().cloned() {
            match &tok.kind {
                TokenKind::Word(w) if w == "@prefix" => {
                    self.pos += 1;
                    self.prefix_decl()?;
                    self.expect_dot()?;
                }
                TokenKind::Word(w) if w.eq_ignore_ascii_case("prefix") => {
                    self.pos += 1;
                    self.prefix_decl()?;
                }
                TokenKind::Word(w) if w == "@base" || w.eq_ignore_ascii_case("base") => {
                    return Err(Self::error_at(&tok, "base IRIs are not supported"));
                }
                _ => {
                    self.statement()?;
                }
            }
        }
        Ok(())
    }

    fn prefix_decl(&mut self) -> Result<(), ParseError> {
        let tok = self.next("prefix name")?;
        let TokenKind::PrefixedName { prefix, local } = &tok.kind else {
            return Err(Self::error_at(
                &tok,
                format!("expected prefix name, found {}", tok.kind),
            ));
        };
        if !local.is_empty() {
            return Err(Self::error_at(&tok, "prefix name must end with ':'"));
        }
        let iri_tok = self.next("namespace IRI")?;
        let TokenKind::IriRef(ns) = &iri_tok.kind else {
            return Err(Self::error_at(
                &iri_tok,
                format!("expected namespace IRI, found {}", iri_tok.kind),
            ));
        };
        self.prefixes.insert(prefix.clone(), ns.clone());
        Ok(())
    }

    fn expect_dot(&mut self) -> Result<(), ParseError> {
        let tok = self.next("'.'")?;
        if tok.kind != TokenKind::Dot {
            return Err(Self::error_at(&tok, format!("expected '.', found {}", tok.kind)));
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let subject = self.iri("subject")?;
        loop {
            let predicate = self.predicate()?;
            loop {
                let object = self.object()?;
                self.out
                    .push(Triple::from_iris(subject.clone(), predicate.clone(), object));
                match self.peek().map(|t| &t.kind) {
                    Some(TokenKind::Comma) => self.pos += 1,
                    _ => break,
                }
            }
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Semicolon) => {
                    self.pos += 1;
                    // trailing ';' before '.' is allowed
                    if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Dot)) {
                        break;
                    }
                }
                _ => break,
            }
        }
        self.expect_dot()
    }

    fn resolve(&self, tok: &Token) -> Result<Option<Iri>, ParseError> {
        match &tok.kind {
            TokenKind::IriRef(i) => Iri::new(i).map(Some).map_err(|e| Self::error_at(tok, e.to_string())),
            TokenKind::PrefixedName { prefix, local } => {
                let ns = self
                    .prefixes
                    .get(prefix)
                    .ok_or_else(|| Self::error_at(tok, format!("undeclared prefix '{prefix}:'")))?;
                Iri::new(format!("{ns}{local}"))
                    .map(Some)
                    .map_err(|e| Self::error_at(tok, e.to_string()))
            }
            _ => Ok(None),
        }
    }

    fn iri(&mut self, what: &str) -> Result<Iri, ParseError> {
        let tok = self.next(what)?;
        self.resolve(&tok)?
            .ok_or_else(|| Self::error_at(&tok, format!("expected {what} IRI, found {}", tok.kind)))
    }

    fn predicate(&mut self) -> Result<Iri, ParseError> {
        if let Some(Token {
            kind: TokenKind::Word(w),
            ..
        }) = self.peek()
        {
            if w == "a" {
                self.pos += 1;
                return Ok(super::vocab::iri(RDF_TYPE));
            }
        }
        self.iri("predicate")
    }

    fn object(&mut self) -> Result<Term, ParseError> {
        let tok = self.next("object")?;
        if let Some(iri) = self.resolve(&tok)? {
            return Ok(Term::Iri(iri));
        }
        match &tok.kind {
            TokenKind::Str(s) => {
                let s = s.clone();
                match self.peek().map(|t| t.kind.clone()) {
                    Some(TokenKind::DoubleCaret) => {
                        self.pos += 1;
                        let dt_tok = self.next("datatype IRI")?;
                        let dt_iri = self.resolve(&dt_tok)?.ok_or_else(|| {
                            Self::error_at(&dt_tok, format!("expected datatype IRI, found {}", dt_tok.kind))
                        })?;
                        let dt = Datatype::from_iri(dt_iri.as_str())
                            .ok_or_else(|| Self::error_at(&dt_tok, format!("unsupported datatype {dt_iri}")))?;
                        Literal::parse(&s, dt)
                            .map(Term::Literal)
                            .map_err(|e| Self::error_at(&tok, e.to_string()))
                    }
                    Some(TokenKind::LangTag(_)) => {
                        let lt = self.next("language tag")?;
                        Err(Self::error_at(&lt, "language-tagged literals are not supported"))
                    }
                    _ => Ok(Term::string(s)),
                }
            }
            TokenKind::Number(n) => {
                let dt = if n.contains('.') {
                    Datatype::Decimal
                } else {
                    Datatype::Integer
                };
                Literal::parse(n, dt)
                    .map(Term::Literal)
                    .map_err(|e| Self::error_at(&tok, e.to_string()))
            }
            TokenKind::Word(w) if w == "true" || w == "false" => Ok(Term::Literal(Literal::Boolean(w == "true"))),
            other => Err(Self::error_at(&tok, format!("expected object, found {other}"))),
        }
    }
}

/// Shortest faithful rendering of an IRI: a prefixed name when the local
/// part is a plain identifier, otherwise `<...>`.
fn write_iri(out: &mut String, iri: &Iri) {
    for (prefix, ns) in STANDARD_PREFIXES {
        if let Some(local) = iri.as_str().strip_prefix(ns) {
            let mut chars = local.chars();
            let plain = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if plain {
                let _ = write!(out, "{prefix}:{local}");
                return;
            }
        }
    }
    let _ = write!(out, "<{}>", iri.as_str());
}

fn write_term(out: &mut String, term: &Term) {
    match term {
        Term::Iri(i) => write_iri(out, i),
        Term::Literal(l) => {
            out.push('"');
            escape_into(&l.lexical(), out);
            out.push('"');
            let dt = l.datatype().iri();
            if dt != XSD_STRING {
                out.push_str("^^");
                write_iri(out, &super::vocab::iri(dt));
            }
        }
    }
}

pub fn dump_turtle(g: &Graph) -> String {
    let mut out = String::new();
    for (prefix, ns) in STANDARD_PREFIXES {
        let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
    }
    out.push('\n');
    for t in g.sorted() {
        write_term(&mut out, t.subject());
        out.push(' ');
        write_term(&mut out, t.predicate());
        out.push(' ');
        write_term(&mut out, t.object());
        out.push_str(" .\n");
    }
    out
}
