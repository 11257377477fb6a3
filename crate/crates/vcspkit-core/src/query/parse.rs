//! Rule syntax for unions of conjunctive queries.
//!
//! ```text
//! #relation R/2
//! #exogenous S
//! q() :- R(x,y), S(y,z).
//! q() :- R(x,x).
//! ```
//! Lines starting with `%` are comments.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{Atom, ConjunctiveQuery, QueryError, Signature, UnionQuery};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

/// A parsed query file: the declared signature, the union, and the relations
/// marked exogenous.
#[derive(Clone, Debug)]
pub struct QueryFile {
    pub query: UnionQuery,
    pub exogenous: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Directive(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Slash,
    Turnstile,
}

struct Lexer<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    pos: Position,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Lexer<'a> {
        Lexer {
            chars: text.chars().peekable(),
            pos: Position { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Position)>, QueryError> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let at = self.pos;
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '%' => {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '(' | ')' | ',' | '.' | '/' => {
                    self.bump();
                    let t = match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        '.' => Tok::Dot,
                        _ => Tok::Slash,
                    };
                    out.push((t, at));
                }
                ':' => {
                    self.bump();
                    if self.chars.peek() != Some(&'-') {
                        return Err(syntax(at, "expected `:-`"));
                    }
                    self.bump();
                    out.push((Tok::Turnstile, at));
                }
                '#' => {
                    self.bump();
                    let word = self.word();
                    if word.is_empty() {
                        return Err(syntax(at, "expected a directive name after `#`"));
                    }
                    out.push((Tok::Directive(word), at));
                }
                c if c.is_ascii_digit() => {
                    let word = self.word();
                    let n = word
                        .parse()
                        .map_err(|_| syntax(at, "malformed integer"))?;
                    out.push((Tok::Int(n), at));
                }
                c if is_ident_start(c) => {
                    let word = self.word();
                    out.push((Tok::Ident(word), at));
                }
                other => {
                    return Err(syntax(at, &alloc::format!("unexpected character `{other}`")));
                }
            }
        }
        Ok(out)
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if is_ident_char(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn syntax(at: Position, message: &str) -> QueryError {
    QueryError::Syntax {
        at,
        message: message.to_string(),
    }
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    i: usize,
    end: Position,
}

struct RawAtom {
    name: String,
    at: Position,
    args: Vec<String>,
}

struct RawRule {
    head: String,
    head_at: Position,
    body: Vec<RawAtom>,
}

enum Item {
    Relation(String, usize, Position),
    Exogenous(String, Position),
    Rule(RawRule),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn here(&self) -> Position {
        self.toks.get(self.i).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Position, QueryError> {
        let at = self.here();
        if self.peek() == Some(&want) {
            self.i += 1;
            Ok(at)
        } else {
            Err(syntax(at, &alloc::format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Position), QueryError> {
        let at = self.here();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.i += 1;
                Ok((s, at))
            }
            _ => Err(syntax(at, &alloc::format!("expected {what}"))),
        }
    }

    fn items(&mut self) -> Result<Vec<Item>, QueryError> {
        let mut items = Vec::new();
        while let Some(tok) = self.peek().cloned() {
            let at = self.here();
            match tok {
                Tok::Directive(d) if d == "relation" => {
                    self.i += 1;
                    let (name, name_at) = self.ident("a relation name")?;
                    self.expect(Tok::Slash, "`/` and an arity")?;
                    let at_n = self.here();
                    let arity = match self.peek() {
                        Some(Tok::Int(n)) => *n,
                        _ => return Err(syntax(at_n, "expected an arity")),
                    };
                    self.i += 1;
                    items.push(Item::Relation(name, arity, name_at));
                }
                Tok::Directive(d) if d == "exogenous" => {
                    self.i += 1;
                    let (name, name_at) = self.ident("a relation name")?;
                    items.push(Item::Exogenous(name, name_at));
                }
                Tok::Directive(d) => {
                    return Err(syntax(at, &alloc::format!("unknown directive `#{d}`")));
                }
                Tok::Ident(_) => items.push(Item::Rule(self.rule()?)),
                _ => return Err(syntax(at, "expected a rule or a directive")),
            }
        }
        Ok(items)
    }

    fn rule(&mut self) -> Result<RawRule, QueryError> {
        let (head, head_at) = self.ident("a rule head")?;
        self.expect(Tok::LParen, "`(` after the rule head")?;
        self.expect(Tok::RParen, "`)`: only Boolean queries are supported")?;
        self.expect(Tok::Turnstile, "`:-`")?;
        let mut body = alloc::vec![self.atom()?];
        loop {
            match self.peek() {
                Some(Tok::Comma) => {
                    self.i += 1;
                    body.push(self.atom()?);
                }
                Some(Tok::Dot) => {
                    self.i += 1;
                    break;
                }
                _ => return Err(syntax(self.here(), "expected `,` or `.`")),
            }
        }
        Ok(RawRule {
            head,
            head_at,
            body,
        })
    }

    fn atom(&mut self) -> Result<RawAtom, QueryError> {
        let (name, at) = self.ident("an atom")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut args = alloc::vec![self.ident("a variable")?.0];
        loop {
            match self.peek() {
                Some(Tok::Comma) => {
                    self.i += 1;
                    args.push(self.ident("a variable")?.0);
                }
                Some(Tok::RParen) => {
                    self.i += 1;
                    break;
                }
                _ => return Err(syntax(self.here(), "expected `,` or `)`")),
            }
        }
        Ok(RawAtom { name, at, args })
    }
}

fn parse_items(text: &str) -> Result<Vec<Item>, QueryError> {
    let toks = Lexer::new(text).tokens()?;
    let mut last = Position { line: 1, column: 1 };
    for (line, l) in text.split('\n').enumerate() {
        last = Position {
            line: line + 1,
            column: l.chars().count() + 1,
        };
    }
    Parser { toks, i: 0, end: last }.items()
}

fn build(
    items: Vec<Item>,
    mut sig: Signature,
) -> Result<(UnionQuery, Vec<usize>), QueryError> {
    let mut rules = Vec::new();
    let mut exo_names = Vec::new();
    for item in items {
        match item {
            Item::Relation(name, arity, at) => match sig.index_of(&name) {
                Some(r) if sig.arity(r) != arity => {
                    return Err(QueryError::ArityMismatch {
                        at,
                        name,
                        expected: sig.arity(r),
                        found: arity,
                    })
                }
                Some(_) => {}
                None => {
                    sig.add(&name, arity)?;
                }
            },
            Item::Exogenous(name, at) => exo_names.push((name, at)),
            Item::Rule(r) => rules.push(r),
        }
    }
    let first = rules.first().ok_or(QueryError::EmptyUnion)?;
    let head = first.head.clone();
    let mut disjuncts = Vec::new();
    for rule in &rules {
        if rule.head != head {
            return Err(QueryError::MixedHeads {
                at: rule.head_at,
                first: head,
                other: rule.head.clone(),
            });
        }
        let mut variables: Vec<String> = Vec::new();
        let mut atoms = Vec::new();
        for a in &rule.body {
            let rel = sig.index_of(&a.name).ok_or_else(|| QueryError::UnknownRelation {
                at: a.at,
                name: a.name.clone(),
            })?;
            if sig.arity(rel) != a.args.len() {
                return Err(QueryError::ArityMismatch {
                    at: a.at,
                    name: a.name.clone(),
                    expected: sig.arity(rel),
                    found: a.args.len(),
                });
            }
            let args = a
                .args
                .iter()
                .map(|v| match variables.iter().position(|w| w == v) {
                    Some(i) => i,
                    None => {
                        variables.push(v.clone());
                        variables.len() - 1
                    }
                })
                .collect();
            atoms.push(Atom { relation: rel, args });
        }
        disjuncts.push(ConjunctiveQuery::new(sig.clone(), variables, atoms)?);
    }
    let mut exogenous = Vec::new();
    for (name, at) in exo_names {
        let r = sig
            .index_of(&name)
            .ok_or(QueryError::UnknownRelation { at, name })?;
        if !exogenous.contains(&r) {
            exogenous.push(r);
        }
    }
    exogenous.sort_unstable();
    Ok((UnionQuery::new(disjuncts)?, exogenous))
}

/// Parses rules over `sig`. `#relation` lines in the text may extend the
/// signature; `#exogenous` lines are validated and otherwise ignored.
pub fn parse_union_query(text: &str, sig: &Signature) -> Result<UnionQuery, QueryError> {
    build(parse_items(text)?, sig.clone()).map(|(q, _)| q)
}

/// Parses a self-contained query file whose signature comes from its
/// `#relation` declarations.
pub fn parse_query_file(text: &str) -> Result<QueryFile, QueryError> {
    let (query, exogenous) = build(parse_items(text)?, Signature::new())?;
    Ok(QueryFile { query, exogenous })
}
