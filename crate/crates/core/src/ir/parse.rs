use std::collections::HashSet;
use std::fmt;

use super::{Atom, Pred, Program, Rule, Term};
use crate::symbol::Symbol;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Quoted(String),
    Var(String),
    LParen,
    RParen,
    Comma,
    Period,
    Neck,
    Query,
    EdbKw,
    Slash,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(s) => format!("name `{s}`"),
            Tok::Quoted(s) => format!("quoted name '{s}'"),
            Tok::Var(s) => format!("variable `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Period => "`.`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::Query => "`?-`".into(),
            Tok::EdbKw => "`.edb`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn err(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        match c {
            '(' => {
                out.push((Tok::LParen, pos));
                bump!();
            }
            ')' => {
                out.push((Tok::RParen, pos));
                bump!();
            }
            ',' => {
                out.push((Tok::Comma, pos));
                bump!();
            }
            '/' => {
                out.push((Tok::Slash, pos));
                bump!();
            }
            ':' if chars.get(i + 1) == Some(&'-') => {
                out.push((Tok::Neck, pos));
                bump!();
                bump!();
            }
            '?' if chars.get(i + 1) == Some(&'-') => {
                out.push((Tok::Query, pos));
                bump!();
                bump!();
            }
            '.' => {
                let kw: String = chars[i + 1..].iter().take(3).collect();
                let after = chars.get(i + 4).copied();
                if kw == "edb" && !after.is_some_and(is_ident_char) {
                    out.push((Tok::EdbKw, pos));
                    for _ in 0..4 {
                        bump!();
                    }
                } else {
                    out.push((Tok::Period, pos));
                    bump!();
                }
            }
            '\'' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(err(pos, "unterminated quoted name")),
                        Some('\'') => {
                            bump!();
                            break;
                        }
                        Some('\\') => {
                            bump!();
                            match chars.get(i) {
                                Some('n') => s.push('\n'),
                                Some(&e @ ('\'' | '\\')) => s.push(e),
                                Some(&e) => {
                                    return Err(err(
                                        Pos { line, column: col },
                                        format!("unknown escape `\\{e}`"),
                                    ))
                                }
                                None => return Err(err(pos, "unterminated quoted name")),
                            }
                            bump!();
                        }
                        Some(&ch) => {
                            s.push(ch);
                            bump!();
                        }
                    }
                }
                out.push((Tok::Quoted(s), pos));
            }
            c if is_ident_char(c) => {
                let mut s = String::new();
                while i < chars.len() && is_ident_char(chars[i]) {
                    s.push(chars[i]);
                    bump!();
                }
                let first = s.chars().next().expect("non-empty identifier");
                if first.is_uppercase() || first == '_' {
                    out.push((Tok::Var(s), pos));
                } else {
                    out.push((Tok::Name(s), pos));
                }
            }
            other => return Err(err(pos, format!("unexpected character `{other}`"))),
        }
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    anon: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, ParseError> {
        let (t, pos) = self.next();
        if t == want {
            Ok(pos)
        } else {
            Err(err(
                pos,
                format!("expected {}, found {}", want.describe(), t.describe()),
            ))
        }
    }

    fn name(&mut self) -> Result<(String, Pos), ParseError> {
        match self.next() {
            (Tok::Name(s) | Tok::Quoted(s), pos) => Ok((s, pos)),
            (t, pos) => Err(err(pos, format!("expected a name, found {}", t.describe()))),
        }
    }

    fn term(&mut self, allow_anon: bool) -> Result<Term, ParseError> {
        match self.next() {
            (Tok::Name(s) | Tok::Quoted(s), _) => Ok(Term::Const(Symbol::intern(&s))),
            (Tok::Var(v), pos) if v == "_" => {
                if !allow_anon {
                    return Err(err(pos, "anonymous variable `_` is only allowed in rule bodies"));
                }
                self.anon += 1;
                // Placeholder; renamed to a fresh name once the clause is complete.
                Ok(Term::Var(Symbol::intern(&format!("_ {}", self.anon))))
            }
            (Tok::Var(v), _) => Ok(Term::Var(Symbol::intern(&v))),
            (t, pos) => Err(err(pos, format!("expected a term, found {}", t.describe()))),
        }
    }

    fn atom(&mut self, allow_anon: bool) -> Result<(Atom, Pos), ParseError> {
        let (name, pos) = self.name()?;
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            args.push(self.term(allow_anon)?);
            while *self.peek() == Tok::Comma {
                self.next();
                args.push(self.term(allow_anon)?);
            }
            self.expect(Tok::RParen)?;
        }
        Ok((Atom::new(Symbol::intern(&name), args), pos))
    }
}

fn rename_anonymous(rule: &mut Rule) {
    let mut used: HashSet<Symbol> = rule.variables().into_iter().collect();
    let mut counter = 0usize;
    for atom in &mut rule.body {
        for t in &mut atom.args {
            if let Term::Var(v) = t {
                if v.as_str().starts_with("_ ") {
                    let fresh = loop {
                        let cand = Symbol::intern(&format!("_{counter}"));
                        counter += 1;
                        if !used.contains(&cand) {
                            break cand;
                        }
                    };
                    used.insert(fresh);
                    *v = fresh;
                }
            }
        }
    }
}

/// Parse a program in `.dl` syntax.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        anon: 0,
    };
    let mut edb: Vec<Pred> = Vec::new();
    let mut rules = Vec::new();
    let mut query: Option<Atom> = None;
    let mut uses: Vec<(Pred, Pos)> = Vec::new();

    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::EdbKw => {
                p.next();
                let (name, _) = p.name()?;
                p.expect(Tok::Slash)?;
                let (arity, apos) = p.name()?;
                let arity: usize = arity
                    .parse()
                    .map_err(|_| err(apos, format!("expected an arity, found `{arity}`")))?;
                p.expect(Tok::Period)?;
                let pred = Pred::new(Symbol::intern(&name), arity);
                if !edb.contains(&pred) {
                    edb.push(pred);
                }
            }
            Tok::Query => {
                let qpos = p.pos();
                p.next();
                let (atom, pos) = p.atom(false)?;
                p.expect(Tok::Period)?;
                if query.is_some() {
                    return Err(err(qpos, "duplicate query"));
                }
                uses.push((atom.pred(), pos));
                query = Some(atom);
            }
            _ => {
                let (head, hpos) = p.atom(false)?;
                uses.push((head.pred(), hpos));
                let mut body = Vec::new();
                if *p.peek() == Tok::Neck {
                    p.next();
                    loop {
                        let (a, apos) = p.atom(true)?;
                        uses.push((a.pred(), apos));
                        body.push(a);
                        if *p.peek() == Tok::Comma {
                            p.next();
                        } else {
                            break;
                        }
                    }
                }
                p.expect(Tok::Period)?;
                let mut rule = Rule::new(head, body);
                rename_anonymous(&mut rule);
                rules.push(rule);
            }
        }
    }

    // A name declared EDB but used with an undeclared arity is almost always a typo.
    for (pred, pos) in &uses {
        let declared: Vec<&Pred> = edb.iter().filter(|d| d.name == pred.name).collect();
        if !declared.is_empty() && !declared.iter().any(|d| d.arity == pred.arity) {
            return Err(err(
                *pos,
                format!(
                    "arity conflict: `{}` used with arity {} but declared as {}",
                    pred.name, pred.arity, declared[0]
                ),
            ));
        }
    }

    let query = query.ok_or_else(|| err(p.pos(), "program has no query (`?- atom.`)"))?;
    Ok(Program { edb, rules, query })
}

/// Parse a facts file: ground atoms terminated by periods. Returns each atom
/// with the line it starts on.
pub fn parse_facts(text: &str) -> Result<Vec<(Atom, usize)>, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        anon: 0,
    };
    let mut out = Vec::new();
    while *p.peek() != Tok::Eof {
        let (atom, pos) = p.atom(false)?;
        if !atom.is_ground() {
            return Err(err(pos, format!("fact `{atom}` is not ground")));
        }
        p.expect(Tok::Period)?;
        out.push((atom, pos.line));
    }
    Ok(out)
}
