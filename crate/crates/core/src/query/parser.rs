use std::collections::BTreeMap;

use super::{
    Filter, ModifyQuery, Query, QueryError, QueryForm, SelectQuery, Slot, TriplePattern, Variable, WhereClause,
};
use crate::kb::vocab::{self, RDF_TYPE, STANDARD_PREFIXES};
use crate::kb::{Datatype, Iri, Literal, Term};
use crate::syntax::{self, Token, TokenKind};

/// Keywords from full SPARQL that this engine deliberately rejects.
const UNSUPPORTED: &[&str] = &[
    "OPTIONAL",
    "UNION",
    "MINUS",
    "GRAPH",
    "SERVICE",
    "BIND",
    "VALUES",
    "GROUP",
    "ORDER",
    "HAVING",
    "LIMIT",
    "OFFSET",
    "CONSTRUCT",
    "ASK",
    "DESCRIBE",
    "FROM",
    "NAMED",
    "EXISTS",
    "NOT",
    "COUNT",
    "SUM",
    "MIN",
    "MAX",
    "AVG",
    "SAMPLE",
    "LOAD",
    "CLEAR",
    "DROP",
    "CREATE",
    "ADD",
    "MOVE",
    "COPY",
    "WITH",
    "USING",
    "BASE",
    "REDUCED",
    "REGEX",
    "BOUND",
    "STR",
    "LANG",
    "DATATYPE",
    "IF",
    "COALESCE",
    "IN",
];

fn is_unsupported(word: &str) -> bool {
    UNSUPPORTED.iter().any(|k| k.eq_ignore_ascii_case(word))
}

pub fn parse(text: &str) -> Result<Query, QueryError> {
    let tokens = syntax::tokenize(text).map_err(|e| QueryError::Syntax {
        line: e.line,
        col: e.col,
        expected: "valid token".into(),
        found: e.message,
    })?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: syntax::end_position(text),
        prefixes: STANDARD_PREFIXES
            .iter()
            .map(|(p, ns)| (p.to_string(), ns.to_string()))
            .collect(),
        declared: BTreeMap::new(),
    };
    let form = p.query()?;
    Ok(Query {
        prefixes: p.declared,
        form,
    })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    prefixes: BTreeMap<String, String>,
    declared: BTreeMap<String, String>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek_kind(), Some(TokenKind::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn error(&self, expected: &str) -> QueryError {
        match self.peek() {
            Some(tok) => {
                if let TokenKind::Word(w) = &tok.kind {
                    if is_unsupported(w) {
                        return QueryError::UnsupportedFeature(w.to_ascii_uppercase());
                    }
                }
                QueryError::Syntax {
                    line: tok.line,
                    col: tok.col,
                    expected: expected.into(),
                    found: tok.kind.to_string(),
                }
            }
            None => QueryError::Syntax {
                line: self.end.0,
                col: self.end.1,
                expected: expected.into(),
                found: "end of input".into(),
            },
        }
    }

    fn error_at(tok: &Token, expected: &str, found: impl Into<String>) -> QueryError {
        QueryError::Syntax {
            line: tok.line,
            col: tok.col,
            expected: expected.into(),
            found: found.into(),
        }
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Result<(), QueryError> {
        if self.peek_kind() == Some(&kind) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.peek_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(kw))
        }
    }

    fn query(&mut self) -> Result<QueryForm, QueryError> {
        self.prologue()?;
        let form = if self.peek_keyword("SELECT") {
            self.pos += 1;
            QueryForm::Select(self.select()?)
        } else if self.peek_keyword("INSERT") {
            let next_is_data = matches!(
                self.tokens.get(self.pos + 1).map(|t| &t.kind),
                Some(TokenKind::Word(w)) if w.eq_ignore_ascii_case("DATA")
            );
            if next_is_data {
                self.pos += 2;
                QueryForm::InsertData(self.template_block()?)
            } else {
                QueryForm::Modify(self.modify()?)
            }
        } else if self.peek_keyword("DELETE") {
            let next = self.tokens.get(self.pos + 1).map(|t| &t.kind);
            match next {
                Some(TokenKind::Word(w)) if w.eq_ignore_ascii_case("DATA") => {
                    return Err(QueryError::UnsupportedFeature("DELETE DATA".into()));
                }
                Some(TokenKind::Word(w)) if w.eq_ignore_ascii_case("WHERE") => {
                    return Err(QueryError::UnsupportedFeature("DELETE WHERE".into()));
                }
                _ => {}
            }
            QueryForm::Modify(self.modify()?)
        } else {
            return Err(self.error("SELECT, INSERT or DELETE"));
        };
        if self.peek().is_some() {
            return Err(self.error("end of query"));
        }
        Ok(form)
    }

    fn prologue(&mut self) -> Result<(), QueryError> {
        while self.peek_keyword("PREFIX") {
            self.pos += 1;
            let tok = self.peek().cloned().ok_or_else(|| self.error("prefix name"))?;
            let TokenKind::PrefixedName { prefix, local } = &tok.kind else {
                return Err(self.error("prefix name"));
            };
            if !local.is_empty() {
                return Err(Self::error_at(&tok, "prefix name ending in ':'", tok.kind.to_string()));
            }
            self.pos += 1;
            let iri_tok = self.peek().cloned().ok_or_else(|| self.error("namespace IRI"))?;
            let TokenKind::IriRef(ns) = &iri_tok.kind else {
                return Err(self.error("namespace IRI"));
            };
            self.pos += 1;
            self.prefixes.insert(prefix.clone(), ns.clone());
            self.declared.insert(prefix.clone(), ns.clone());
        }
        Ok(())
    }

    fn select(&mut self) -> Result<SelectQuery, QueryError> {
        let distinct = if self.peek_keyword("DISTINCT") {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut vars = Vec::new();
        let mut star = false;
        if self.peek_kind() == Some(&TokenKind::Star) {
            self.pos += 1;
            star = true;
        } else {
            while let Some(TokenKind::Var(v)) = self.peek_kind() {
                vars.push(Variable::new(v.clone()));
                self.pos += 1;
            }
            if vars.is_empty() {
                return Err(self.error("variable or '*'"));
            }
        }
        if self.peek_keyword("WHERE") {
            self.pos += 1;
        }
        let where_clause = self.group()?;
        let bound = where_clause.bound_vars();
        if star {
            vars = bound.clone();
        }
        for v in vars.iter().chain(where_clause.filters.iter().flat_map(Filter::vars)) {
            if !bound.contains(v) {
                return Err(QueryError::UnboundVariable(v.0.clone()));
            }
        }
        Ok(SelectQuery {
            vars,
            distinct,
            where_clause,
        })
    }

    fn modify(&mut self) -> Result<ModifyQuery, QueryError> {
        let mut delete = Vec::new();
        let mut insert = Vec::new();
        if self.peek_keyword("DELETE") {
            self.pos += 1;
            delete = self.template_block()?;
        }
        if self.peek_keyword("INSERT") {
            self.pos += 1;
            insert = self.template_block()?;
        }
        self.expect_keyword("WHERE")?;
        let where_clause = self.group()?;
        Ok(ModifyQuery {
            delete,
            insert,
            where_clause,
        })
    }

    /// `{ triples }` without filters, as used by INSERT/DELETE templates.
    fn template_block(&mut self) -> Result<Vec<TriplePattern>, QueryError> {
        self.expect(TokenKind::LBrace, "'{'")?;
        let mut out = Vec::new();
        loop {
            match self.peek_kind() {
                Some(TokenKind::RBrace) => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(TokenKind::Dot) => self.pos += 1,
                _ => self.triples(&mut out)?,
            }
        }
    }

    fn group(&mut self) -> Result<WhereClause, QueryError> {
        self.expect(TokenKind::LBrace, "'{'")?;
        let mut clause = WhereClause::default();
        loop {
            match self.peek_kind() {
                Some(TokenKind::RBrace) => {
                    self.pos += 1;
                    return Ok(clause);
                }
                Some(TokenKind::Dot) => self.pos += 1,
                Some(TokenKind::Word(w)) if w.eq_ignore_ascii_case("FILTER") => {
                    self.pos += 1;
                    clause.filters.push(self.filter()?);
                }
                Some(TokenKind::LBrace) => {
                    return Err(QueryError::UnsupportedFeature("nested group".into()));
                }
                _ => self.triples(&mut clause.patterns)?,
            }
        }
    }

    fn filter(&mut self) -> Result<Filter, QueryError> {
        self.expect(TokenKind::LParen, "'('")?;
        let left = self.operand()?;
        let op = match self.peek_kind() {
            Some(TokenKind::Op(op)) => *op,
            _ => return Err(self.error("comparison operator")),
        };
        self.pos += 1;
        let right = self.operand()?;
        self.expect(TokenKind::RParen, "')'")?;
        Ok(Filter { left, op, right })
    }

    fn operand(&mut self) -> Result<Slot, QueryError> {
        if let Some(TokenKind::Var(v)) = self.peek_kind() {
            let v = Variable::new(v.clone());
            self.pos += 1;
            return Ok(Slot::Var(v));
        }
        self.term("variable, IRI or literal").map(Slot::Term)
    }

    /// Subject with its predicate-object list, appended to `out`.
    fn triples(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let subject = self.slot("subject")?;
        loop {
            let predicate = if self.peek_keyword("a") {
                self.pos += 1;
                Slot::Term(Term::Iri(vocab::iri(RDF_TYPE)))
            } else {
                self.slot("predicate")?
            };
            loop {
                let object = self.slot("object")?;
                out.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.peek_kind() == Some(&TokenKind::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.peek_kind() == Some(&TokenKind::Semicolon) {
                self.pos += 1;
                if matches!(self.peek_kind(), Some(TokenKind::Dot | TokenKind::RBrace)) {
                    break;
                }
            } else {
                break;
            }
        }
        match self.peek_kind() {
            Some(TokenKind::Dot) => {
                self.pos += 1;
                Ok(())
            }
            Some(TokenKind::RBrace) => Ok(()),
            Some(TokenKind::Word(w)) if w.eq_ignore_ascii_case("FILTER") => Ok(()),
            _ => Err(self.error("'.' or '}'")),
        }
    }

    fn slot(&mut self, what: &str) -> Result<Slot, QueryError> {
        if let Some(TokenKind::Var(v)) = self.peek_kind() {
            let v = Variable::new(v.clone());
            self.pos += 1;
            return Ok(Slot::Var(v));
        }
        self.term(what).map(Slot::Term)
    }

    fn term(&mut self, what: &str) -> Result<Term, QueryError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error(what));
        };
        let term = match &tok.kind {
            TokenKind::IriRef(i) => {
                Term::Iri(Iri::new(i).map_err(|e| Self::error_at(&tok, "valid IRI", e.to_string()))?)
            }
            TokenKind::PrefixedName { .. } => Term::Iri(self.resolve(&tok)?),
            TokenKind::Str(s) => {
                let s = s.clone();
                self.pos += 1;
                return self.string_literal(s, &tok);
            }
            TokenKind::Number(n) => {
                let dt = if n.contains('.') {
                    Datatype::Decimal
                } else {
                    Datatype::Integer
                };
                Term::Literal(Literal::parse(n, dt).map_err(|e| Self::error_at(&tok, "number", e.to_string()))?)
            }
            TokenKind::Word(w) if w == "true" || w == "false" => Term::Literal(Literal::Boolean(w == "true")),
            _ => return Err(self.error(what)),
        };
        self.pos += 1;
        Ok(term)
    }

    fn string_literal(&mut self, s: String, tok: &Token) -> Result<Term, QueryError> {
        match self.peek_kind() {
            Some(TokenKind::DoubleCaret) => {
                self.pos += 1;
                let dt_tok = self.peek().cloned().ok_or_else(|| self.error("datatype IRI"))?;
                let dt_iri = match &dt_tok.kind {
                    TokenKind::IriRef(i) => i.clone(),
                    TokenKind::PrefixedName { .. } => self.resolve(&dt_tok)?.as_str().to_string(),
                    _ => return Err(self.error("datatype IRI")),
                };
                self.pos += 1;
                let dt = Datatype::from_iri(&dt_iri)
                    .ok_or_else(|| QueryError::UnsupportedFeature(format!("datatype <{dt_iri}>")))?;
                Literal::parse(&s, dt)
                    .map(Term::Literal)
                    .map_err(|e| Self::error_at(tok, "literal", e.to_string()))
            }
            Some(TokenKind::LangTag(_)) => Err(QueryError::UnsupportedFeature("language tags".into())),
            _ => Ok(Term::string(s)),
        }
    }

    fn resolve(&self, tok: &Token) -> Result<Iri, QueryError> {
        let TokenKind::PrefixedName { prefix, local } = &tok.kind else {
            unreachable!("resolve called on non-prefixed token");
        };
        let ns = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| Self::error_at(tok, "declared prefix", format!("'{prefix}:'")))?;
        Iri::new(format!("{ns}{local}")).map_err(|e| Self::error_at(tok, "valid IRI", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::vocab::ex_term;
    use crate::syntax::CmpOp;

    #[test]
    fn minimal_select() {
        let q = parse("SELECT ?s WHERE { ?s ?p ?o }").unwrap();
        let QueryForm::Select(s) = q.form else { panic!() };
        assert_eq!(s.vars, vec![Variable::new("s")]);
        assert!(!s.distinct);
        assert_eq!(s.where_clause.patterns.len(), 1);
        assert_eq!(s.where_clause.patterns[0].vars().count(), 3);
    }

    #[test]
    fn group_by_is_unsupported() {
        let err = parse("SELECT ?s WHERE { ?s ?p ?o } GROUP BY ?s").unwrap_err();
        assert_eq!(err, QueryError::UnsupportedFeature("GROUP".into()));
        let err = parse("SELECT ?s WHERE { ?s ?p ?o OPTIONAL { ?s ?q ?r } }").unwrap_err();
        assert_eq!(err, QueryError::UnsupportedFeature("OPTIONAL".into()));
        let err = parse("SELECT ?s WHERE { ?s ?p ?o } LIMIT 3").unwrap_err();
        assert_eq!(err, QueryError::UnsupportedFeature("LIMIT".into()));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse("SELECT ?s WHERE {\n  ?s ?p }").unwrap_err();
        match err {
            QueryError::Syntax {
                line, col, expected, ..
            } => {
                assert_eq!((line, col), (2, 9));
                assert_eq!(expected, "object");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projected_variable_must_be_bound() {
        assert_eq!(
            parse("SELECT ?x WHERE { ?s ?p ?o }").unwrap_err(),
            QueryError::UnboundVariable("x".into())
        );
        assert_eq!(
            parse("SELECT ?s WHERE { ?s ?p ?o FILTER(?z = 1) }").unwrap_err(),
            QueryError::UnboundVariable("z".into())
        );
    }

    #[test]
    fn filter_and_lists() {
        let q = parse(
            "PREFIX m: <http://example.org/manufacturing#>\n\
             SELECT DISTINCT * WHERE { ?e m:hasStatus ?s ; m:runsOnResource m:M1, m:M2 . FILTER(?s != \"errored\") }",
        )
        .unwrap();
        assert_eq!(
            q.prefixes.get("m").map(String::as_str),
            Some("http://example.org/manufacturing#")
        );
        let QueryForm::Select(s) = q.form else { panic!() };
        assert!(s.distinct);
        assert_eq!(s.vars, vec![Variable::new("e"), Variable::new("s")]);
        assert_eq!(s.where_clause.patterns.len(), 3);
        assert_eq!(s.where_clause.patterns[2].object, Slot::Term(ex_term("M2")));
        assert_eq!(s.where_clause.filters[0].op, CmpOp::Ne);
    }

    #[test]
    fn update_forms() {
        let q = parse("INSERT DATA { ex:e1 ex:hasStatus \"planned\" . ex:e1 a ex:ProcessExecution }").unwrap();
        let QueryForm::InsertData(t) = q.form else { panic!() };
        assert_eq!(t.len(), 2);

        let q = parse(
            "DELETE { ?e ex:hasStatus ?old } INSERT { ?e ex:hasStatus \"running\" } \
             WHERE { ?e ex:hasStatus ?old FILTER(?old = \"planned\") }",
        )
        .unwrap();
        let QueryForm::Modify(m) = q.form else { panic!() };
        assert_eq!((m.delete.len(), m.insert.len()), (1, 1));
        assert_eq!(m.where_clause.filters.len(), 1);

        assert!(matches!(
            parse("DELETE DATA { ex:a ex:b ex:c }").unwrap_err(),
            QueryError::UnsupportedFeature(_)
        ));
    }

    #[test]
    fn typed_literals_in_queries() {
        let q = parse("SELECT ?p WHERE { ?p ex:energyCost \"110.25\"^^xsd:decimal . ?p ex:duration 18 }").unwrap();
        let QueryForm::Select(s) = q.form else { panic!() };
        let Slot::Term(Term::Literal(l)) = &s.where_clause.patterns[0].object else {
            panic!()
        };
        assert_eq!(l.lexical(), "110.25");
        let Slot::Term(Term::Literal(l)) = &s.where_clause.patterns[1].object else {
            panic!()
        };
        assert_eq!(l, &Literal::Integer(18));
    }
}
