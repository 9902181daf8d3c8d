//! Tokenizer shared by the Turtle loader and the query parser.
//!
//! Both grammars are built from the same lexical pieces (IRI references,
//! prefixed names, quoted strings, numbers, punctuation), so one lexer
//! serves both. Keywords are left as bare [`TokenKind::Word`]s and
//! interpreted by each parser.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    /// `<http://...>` with the brackets stripped.
    IriRef(String),
    /// `prefix:local`; the prefix may be empty.
    PrefixedName {
        prefix: String,
        local: String,
    },
    /// `?name` or `$name`.
    Var(String),
    /// Quoted string with escapes resolved.
    Str(String),
    /// Integer or decimal lexeme, sign included.
    Number(String),
    /// Bare identifier: keywords, `a`, `true`, `false`, `@prefix`.
    Word(String),
    Dot,
    Semicolon,
    Comma,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Star,
    DoubleCaret,
    /// Language tag, e.g. `@en`. Neither grammar accepts these, but they
    /// are tokenized so the parsers can report a precise error.
    LangTag(String),
    Op(CmpOp),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::IriRef(i) => write!(f, "<{i}>"),
            TokenKind::PrefixedName { prefix, local } => write!(f, "{prefix}:{local}"),
            TokenKind::Var(v) => write!(f, "?{v}"),
            TokenKind::Str(s) => write!(f, "{s:?}"),
            TokenKind::Number(n) => f.write_str(n),
            TokenKind::Word(w) => f.write_str(w),
            TokenKind::Dot => f.write_str("'.'"),
            TokenKind::Semicolon => f.write_str("';'"),
            TokenKind::Comma => f.write_str("','"),
            TokenKind::LBrace => f.write_str("'{'"),
            TokenKind::RBrace => f.write_str("'}'"),
            TokenKind::LParen => f.write_str("'('"),
            TokenKind::RParen => f.write_str("')'"),
            TokenKind::Star => f.write_str("'*'"),
            TokenKind::DoubleCaret => f.write_str("'^^'"),
            TokenKind::LangTag(t) => write!(f, "@{t}"),
            TokenKind::Op(op) => write!(f, "'{}'", op.symbol()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Characters that may follow a backslash inside a prefixed local name.
const LOCAL_ESCAPES: &str = "_~.-!$&'()*+,;=/?#@%";

pub fn is_local_escape(c: char) -> bool {
    LOCAL_ESCAPES.contains(c)
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(tok) = lx.next_token()? {
        out.push(tok);
    }
    Ok(out)
}

/// Position just past the last character, used for "unexpected end of input".
pub fn end_position(src: &str) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for c in src.chars() {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, line: usize, col: usize, message: impl Into<String>) -> LexError {
        LexError {
            line,
            col,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<Token>, LexError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let kind = match c {
            '<' => self.lex_angle(line, col)?,
            '"' | '\'' => self.lex_string(c, line, col)?,
            '?' | '$' => {
                self.bump();
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err(self.err(line, col, "empty variable name"));
                }
                TokenKind::Var(name)
            }
            '.' => {
                if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                    self.lex_number(line, col)?
                } else {
                    self.bump();
                    TokenKind::Dot
                }
            }
            ';' => self.single(TokenKind::Semicolon),
            ',' => self.single(TokenKind::Comma),
            '{' => self.single(TokenKind::LBrace),
            '}' => self.single(TokenKind::RBrace),
            '(' => self.single(TokenKind::LParen),
            ')' => self.single(TokenKind::RParen),
            '*' => self.single(TokenKind::Star),
            '^' => {
                self.bump();
                if self.peek() == Some('^') {
                    self.bump();
                    TokenKind::DoubleCaret
                } else {
                    return Err(self.err(line, col, "expected '^^'"));
                }
            }
            '=' => self.single(TokenKind::Op(CmpOp::Eq)),
            '!' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    TokenKind::Op(CmpOp::Ne)
                } else {
                    return Err(self.err(line, col, "expected '!='"));
                }
            }
            '>' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    TokenKind::Op(CmpOp::Ge)
                } else {
                    TokenKind::Op(CmpOp::Gt)
                }
            }
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                if word.is_empty() {
                    return Err(self.err(line, col, "expected directive or language tag after '@'"));
                }
                if word == "prefix" || word == "base" {
                    TokenKind::Word(format!("@{word}"))
                } else {
                    TokenKind::LangTag(word)
                }
            }
            '+' | '-' => {
                if self.peek_at(1).is_some_and(|d| d.is_ascii_digit() || d == '.') {
                    self.lex_number(line, col)?
                } else {
                    return Err(self.err(line, col, format!("unexpected character '{c}'")));
                }
            }
            c if c.is_ascii_digit() => self.lex_number(line, col)?,
            ':' => self.lex_name()?,
            c if c.is_alphabetic() || c == '_' => self.lex_name()?,
            other => return Err(self.err(line, col, format!("unexpected character '{other}'"))),
        };
        Ok(Some(Token { kind, line, col }))
    }

    fn single(&mut self, kind: TokenKind) -> TokenKind {
        self.bump();
        kind
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    /// `<` starts either an IRI reference or a comparison operator. An IRI
    /// reference never contains whitespace, so scan ahead for a closing `>`.
    fn lex_angle(&mut self, line: usize, col: usize) -> Result<TokenKind, LexError> {
        let mut end = None;
        let mut i = self.pos + 1;
        while let Some(&c) = self.chars.get(i) {
            if c == '>' {
                end = Some(i);
                break;
            }
            if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
                break;
            }
            i += 1;
        }
        let next = self.peek_at(1);
        match end {
            Some(end) if next != Some('=') => {
                self.bump();
                let mut iri = String::new();
                while self.pos < end {
                    iri.push(self.bump().unwrap_or_default());
                }
                self.bump();
                if iri.is_empty() {
                    return Err(self.err(line, col, "empty IRI reference"));
                }
                Ok(TokenKind::IriRef(iri))
            }
            _ => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    Ok(TokenKind::Op(CmpOp::Le))
                } else {
                    Ok(TokenKind::Op(CmpOp::Lt))
                }
            }
        }
    }

    fn lex_string(&mut self, quote: char, line: usize, col: usize) -> Result<TokenKind, LexError> {
        self.bump();
        let mut s = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(self.err(line, col, "unterminated string literal"));
            };
            match c {
                c if c == quote => break,
                '\n' => return Err(self.err(line, col, "newline in string literal")),
                '\\' => {
                    let (el, ec) = (self.line, self.col);
                    let esc = self
                        .bump()
                        .ok_or_else(|| self.err(line, col, "unterminated string literal"))?;
                    match esc {
                        'n' => s.push('\n'),
                        't' => s.push('\t'),
                        'r' => s.push('\r'),
                        'b' => s.push('\u{8}'),
                        'f' => s.push('\u{c}'),
                        '"' => s.push('"'),
                        '\'' => s.push('\''),
                        '\\' => s.push('\\'),
                        'u' | 'U' => {
                            let n = if esc == 'u' { 4 } else { 8 };
                            let mut hex = String::new();
                            for _ in 0..n {
                                hex.push(
                                    self.bump()
                                        .ok_or_else(|| self.err(el, ec, "truncated unicode escape"))?,
                                );
                            }
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or_else(|| self.err(el, ec, "invalid unicode escape"))?;
                            s.push(ch);
                        }
                        other => return Err(self.err(el, ec, format!("invalid escape '\\{other}'"))),
                    }
                }
                c => s.push(c),
            }
        }
        Ok(TokenKind::Str(s))
    }

    fn lex_number(&mut self, line: usize, col: usize) -> Result<TokenKind, LexError> {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
            s.push('.');
            self.bump();
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            return Err(self.err(line, col, "double literals are not supported"));
        }
        if !s.chars().any(|c| c.is_ascii_digit()) {
            return Err(self.err(line, col, "malformed number"));
        }
        Ok(TokenKind::Number(s))
    }

    fn lex_name(&mut self) -> Result<TokenKind, LexError> {
        let head = self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '-');
        if self.peek() != Some(':') {
            return Ok(TokenKind::Word(head));
        }
        self.bump();
        let mut local = String::new();
        loop {
            match self.peek() {
                Some(c) if c.is_alphanumeric() || c == '_' || c == '-' => {
                    local.push(c);
                    self.bump();
                }
                Some('.')
                    if self
                        .peek_at(1)
                        .is_some_and(|n| n.is_alphanumeric() || n == '_' || n == '-') =>
                {
                    local.push('.');
                    self.bump();
                }
                Some('\\') => {
                    let (el, ec) = (self.line, self.col);
                    self.bump();
                    match self.bump() {
                        Some(c) if is_local_escape(c) => local.push(c),
                        _ => return Err(self.err(el, ec, "invalid escape in prefixed name")),
                    }
                }
                _ => break,
            }
        }
        Ok(TokenKind::PrefixedName { prefix: head, local })
    }
}
