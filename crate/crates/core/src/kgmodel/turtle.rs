//! Lexer and parser for the closed Turtle subset used by knowledge-base
//! files: `@prefix` declarations, prefixed names, `a`, string, numeric and
//! boolean literals, `;`/`,` abbreviations, and `( … )` lists. Blank-node
//! property lists and full IRIs outside prefix declarations are rejected.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub const FIXED_PREFIXES: [(&str, &str); 6] = [
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rec", "https://w3id.org/rec#"),
    ("skg", "https://signalkg.visualmodel.org/skg#"),
    ("skos", "http://www.w3.org/2004/02/skos/core#"),
    ("sosa", "http://www.w3.org/ns/sosa/"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    pub prefix: String,
    pub local: String,
}

impl Name {
    pub fn new(prefix: &str, local: &str) -> Self {
        Name {
            prefix: prefix.to_string(),
            local: local.to_string(),
        }
    }

    pub fn is(&self, prefix: &str, local: &str) -> bool {
        self.prefix == prefix && self.local == local
    }

    pub fn is_rdf_type(&self) -> bool {
        self.is("rdf", "type")
    }
}

impl std::fmt::Display for Name {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local)
    }
}

#[derive(Debug, Clone)]
pub enum Term {
    Name(Name),
    Str(String),
    Number(f64),
    Bool(bool),
    List(Vec<Term>),
}

impl Term {
    fn rank(&self) -> u8 {
        match self {
            Term::Name(_) => 0,
            Term::Str(_) => 1,
            Term::Number(_) => 2,
            Term::Bool(_) => 3,
            Term::List(_) => 4,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Term::Name(_) => "name",
            Term::Str(_) => "string",
            Term::Number(_) => "number",
            Term::Bool(_) => "boolean",
            Term::List(_) => "list",
        }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Name(a), Term::Name(b)) => a.cmp(b),
            (Term::Str(a), Term::Str(b)) => a.cmp(b),
            (Term::Number(a), Term::Number(b)) => a.total_cmp(b),
            (Term::Bool(a), Term::Bool(b)) => a.cmp(b),
            (Term::List(a), Term::List(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Term {}

/// A statement about an instance. Instances are identified by local name
/// only; their namespace prefix is not significant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Triple {
    pub subject: String,
    pub predicate: Name,
    pub object: Term,
}

#[derive(Debug, Default)]
pub(crate) struct Document {
    pub triples: Vec<Triple>,
    /// Declared prefixes outside the fixed vocabulary.
    pub extra_prefixes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    PrefixKw,
    Iri(String),
    /// `prefix:` in a declaration.
    Namespace(String),
    Name(String, String),
    A,
    Str(String),
    Number(f64),
    Bool(bool),
    Dot,
    Semi,
    Comma,
    Open,
    Close,
    Datatype,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if is_name_char(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn next_token(&mut self) -> Result<Spanned> {
        self.skip_trivia();
        let (line, column) = (self.line, self.column);
        let spanned = |tok| Ok(Spanned { tok, line, column });
        let Some(c) = self.peek() else {
            return spanned(Tok::Eof);
        };
        match c {
            '.' => {
                self.bump();
                spanned(Tok::Dot)
            }
            ';' => {
                self.bump();
                spanned(Tok::Semi)
            }
            ',' => {
                self.bump();
                spanned(Tok::Comma)
            }
            '(' => {
                self.bump();
                spanned(Tok::Open)
            }
            ')' => {
                self.bump();
                spanned(Tok::Close)
            }
            '[' | ']' => Err(self.err(line, column, "blank nodes are not supported")),
            '^' => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(self.err(line, column, "expected `^^`"));
                }
                spanned(Tok::Datatype)
            }
            '@' => {
                self.bump();
                let w = self.word();
                if w == "prefix" {
                    spanned(Tok::PrefixKw)
                } else {
                    Err(self.err(line, column, format!("unsupported directive `@{w}`")))
                }
            }
            '<' => {
                self.bump();
                let mut iri = String::new();
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some(c) if c.is_whitespace() => {
                            return Err(self.err(line, column, "whitespace in IRI"))
                        }
                        Some(c) => iri.push(c),
                        None => return Err(self.err(line, column, "unterminated IRI")),
                    }
                }
                spanned(Tok::Iri(iri))
            }
            '"' => self.string(line, column),
            c if c.is_ascii_digit() || c == '+' || c == '-' => self.number(line, column),
            c if is_name_char(c) || c == ':' => {
                let prefix = self.word();
                if self.peek() == Some(':') {
                    self.bump();
                    let local = self.word();
                    if local.is_empty() {
                        return spanned(Tok::Namespace(prefix));
                    }
                    return spanned(Tok::Name(prefix, local));
                }
                match prefix.as_str() {
                    "a" => spanned(Tok::A),
                    "true" => spanned(Tok::Bool(true)),
                    "false" => spanned(Tok::Bool(false)),
                    _ => Err(self.err(line, column, format!("unexpected word `{prefix}`"))),
                }
            }
            other => Err(self.err(line, column, format!("unexpected character `{other}`"))),
        }
    }

    fn string(&mut self, line: usize, column: usize) -> Result<Spanned> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => {
                    let esc = match self.bump() {
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('r') => '\r',
                        Some('"') => '"',
                        Some('\\') => '\\',
                        Some('\'') => '\'',
                        Some(other) => {
                            return Err(self.err(
                                self.line,
                                self.column,
                                format!("unsupported escape `\\{other}`"),
                            ))
                        }
                        None => return Err(self.err(line, column, "unterminated string")),
                    };
                    s.push(esc);
                }
                Some('\n') | None => return Err(self.err(line, column, "unterminated string")),
                Some(c) => s.push(c),
            }
        }
        // language tags carry no meaning here
        if self.peek() == Some('@') {
            self.bump();
            self.word();
        }
        Ok(Spanned {
            tok: Tok::Str(s),
            line,
            column,
        })
    }

    fn number(&mut self, line: usize, column: usize) -> Result<Spanned> {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        let digits = |lx: &mut Self, s: &mut String| {
            let mut n = 0;
            while let Some(c) = lx.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    lx.bump();
                    n += 1;
                } else {
                    break;
                }
            }
            n
        };
        let mut mantissa = digits(self, &mut s);
        if self.peek() == Some('.') {
            // a dot only belongs to the number when a digit follows it
            let mut ahead = self.chars.clone();
            ahead.next();
            if ahead.peek().is_some_and(|c| c.is_ascii_digit()) {
                s.push('.');
                self.bump();
                mantissa += digits(self, &mut s);
            }
        }
        if mantissa == 0 {
            return Err(self.err(line, column, "malformed number"));
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            s.push(e);
            self.bump();
            if let Some(c @ ('+' | '-')) = self.peek() {
                s.push(c);
                self.bump();
            }
            if digits(self, &mut s) == 0 {
                return Err(self.err(line, column, "malformed exponent"));
            }
        }
        let value: f64 = s
            .parse()
            .map_err(|_| self.err(line, column, format!("malformed number `{s}`")))?;
        Ok(Spanned {
            tok: Tok::Number(value),
            line,
            column,
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    current: Spanned,
    /// prefix -> IRI
    prefixes: BTreeMap<String, String>,
    /// IRI -> canonical fixed prefix
    canonical: BTreeMap<&'static str, &'static str>,
    doc: Document,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut lexer = Lexer::new(src);
        let current = lexer.next_token()?;
        Ok(Parser {
            lexer,
            current,
            prefixes: FIXED_PREFIXES
                .iter()
                .map(|(p, iri)| (p.to_string(), iri.to_string()))
                .collect(),
            canonical: FIXED_PREFIXES.iter().map(|(p, iri)| (*iri, *p)).collect(),
            doc: Document::default(),
        })
    }

    fn advance(&mut self) -> Result<Spanned> {
        let next = self.lexer.next_token()?;
        Ok(std::mem::replace(&mut self.current, next))
    }

    fn error_here(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.current.line,
            column: self.current.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.current.tok == tok {
            self.advance()?;
            Ok(())
        } else {
            Err(self.error_here(format!("expected {what}")))
        }
    }

    fn document(mut self) -> Result<Document> {
        loop {
            match &self.current.tok {
                Tok::Eof => break,
                Tok::PrefixKw => self.prefix_decl()?,
                _ => {
                    self.statement()?;
                    self.expect(Tok::Dot, "`.` after statement")?;
                }
            }
        }
        Ok(self.doc)
    }

    fn prefix_decl(&mut self) -> Result<()> {
        self.advance()?;
        let Tok::Namespace(prefix) = self.current.tok.clone() else {
            return Err(self.error_here("expected `prefix:` in @prefix declaration"));
        };
        self.advance()?;
        let Tok::Iri(iri) = self.current.tok.clone() else {
            return Err(self.error_here("expected `<iri>` in @prefix declaration"));
        };
        if let Some((_, fixed)) = FIXED_PREFIXES.iter().find(|(p, _)| *p == prefix) {
            if *fixed != iri {
                return Err(self.error_here(format!(
                    "prefix `{prefix}:` is reserved for <{fixed}>"
                )));
            }
        } else if !self.canonical.contains_key(iri.as_str()) {
            self.doc.extra_prefixes.insert(prefix.clone(), iri.clone());
        }
        self.prefixes.insert(prefix, iri);
        self.advance()?;
        self.expect(Tok::Dot, "`.` after @prefix declaration")
    }

    fn resolve(&self, prefix: &str, local: &str) -> Result<Name> {
        let iri = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| self.error_here(format!("undeclared prefix `{prefix}:`")))?;
        let prefix = self.canonical.get(iri.as_str()).copied().unwrap_or(prefix);
        Ok(Name::new(prefix, local))
    }

    fn statement(&mut self) -> Result<()> {
        let subject = match self.current.tok.clone() {
            Tok::Name(p, l) => self.resolve(&p, &l)?.local,
            Tok::Iri(_) => {
                return Err(self.error_here("full IRIs are only allowed in @prefix declarations"))
            }
            _ => return Err(self.error_here("expected a subject name")),
        };
        self.advance()?;
        loop {
            let predicate = match self.current.tok.clone() {
                Tok::A => Name::new("rdf", "type"),
                Tok::Name(p, l) => self.resolve(&p, &l)?,
                _ => return Err(self.error_here("expected a predicate")),
            };
            self.advance()?;
            loop {
                let object = self.object()?;
                self.doc.triples.push(Triple {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.current.tok == Tok::Comma {
                    self.advance()?;
                } else {
                    break;
                }
            }
            if self.current.tok == Tok::Semi {
                self.advance()?;
                // trailing `;` before the final `.`
                if self.current.tok == Tok::Dot {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(())
    }

    fn object(&mut self) -> Result<Term> {
        let term = match self.current.tok.clone() {
            Tok::Name(p, l) => Term::Name(self.resolve(&p, &l)?),
            Tok::Number(n) => Term::Number(n),
            Tok::Bool(b) => Term::Bool(b),
            Tok::Str(s) => {
                self.advance()?;
                return self.typed_literal(s);
            }
            Tok::Open => {
                self.advance()?;
                let mut items = Vec::new();
                while self.current.tok != Tok::Close {
                    if self.current.tok == Tok::Eof {
                        return Err(self.error_here("unterminated list"));
                    }
                    items.push(self.object()?);
                }
                Term::List(items)
            }
            Tok::Iri(_) => {
                return Err(self.error_here("full IRIs are only allowed in @prefix declarations"))
            }
            _ => return Err(self.error_here("expected an object")),
        };
        self.advance()?;
        Ok(term)
    }

    fn typed_literal(&mut self, text: String) -> Result<Term> {
        if self.current.tok != Tok::Datatype {
            return Ok(Term::Str(text));
        }
        self.advance()?;
        let Tok::Name(p, l) = self.current.tok.clone() else {
            return Err(self.error_here("expected a datatype name after `^^`"));
        };
        let datatype = self.resolve(&p, &l)?;
        let term = match (datatype.prefix.as_str(), datatype.local.as_str()) {
            ("xsd", "double" | "decimal" | "float" | "integer" | "int" | "long") => {
                let n = text
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|n| n.is_finite())
                    .ok_or_else(|| self.error_here(format!("`{text}` is not a valid {datatype}")))?;
                Term::Number(n)
            }
            ("xsd", "boolean") => match text.as_str() {
                "true" | "1" => Term::Bool(true),
                "false" | "0" => Term::Bool(false),
                _ => return Err(self.error_here(format!("`{text}` is not a valid xsd:boolean"))),
            },
            ("xsd", "string") => Term::Str(text),
            _ => return Err(self.error_here(format!("unsupported datatype {datatype}"))),
        };
        self.advance()?;
        Ok(term)
    }
}

pub(crate) fn parse_document(src: &str) -> Result<Document> {
    Parser::new(src)?.document()
}
