//! Datalog abstract syntax, its concrete `.dl` syntax, and static checks.

pub(crate) mod numbered;
mod parse;
mod validate;

use std::fmt;

pub use parse::{parse_facts, parse_program, ParseError};
pub use validate::{validate_program, ValidationReport, Violation, ViolationKind};

use crate::symbol::Symbol;

/// A predicate identity: name together with arity (`p/1` and `p/2` differ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pred {
    pub name: Symbol,
    pub arity: usize,
}

impl Pred {
    pub fn new(name: impl Into<Symbol>, arity: usize) -> Self {
        Pred {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_name(f, self.name.as_str())?;
        write!(f, "/{}", self.arity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(Symbol),
    /// Variable names are scoped to a single rule.
    Var(Symbol),
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::Const(Symbol::intern(name))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Symbol::intern(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write_name(f, c.as_str()),
            Term::Var(v) => f.write_str(v.as_str()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub name: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(name: impl Into<Symbol>, args: Vec<Term>) -> Self {
        Atom {
            name: name.into(),
            args,
        }
    }

    pub fn pred(&self) -> Pred {
        Pred {
            name: self.name,
            arity: self.args.len(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_name(f, self.name.as_str())?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A Horn clause. An empty body makes the rule a fact of its (IDB) head.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Rule {
    pub fn new(head: Atom, body: Vec<Atom>) -> Self {
        Rule { head, body }
    }

    pub fn fact(head: Atom) -> Self {
        Rule {
            head,
            body: Vec::new(),
        }
    }

    /// Variables of the rule in order of first occurrence (head, then body).
    pub fn variables(&self) -> Vec<Symbol> {
        let mut seen = Vec::new();
        for v in self.head.vars().chain(self.body.iter().flat_map(Atom::vars)) {
            if !seen.contains(&v) {
                seen.push(v);
            }
        }
        seen
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, a) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
        }
        f.write_str(".")
    }
}

/// A positive Datalog program with its EDB declarations and one query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub edb: Vec<Pred>,
    pub rules: Vec<Rule>,
    pub query: Atom,
}

impl Program {
    pub fn is_edb(&self, pred: Pred) -> bool {
        self.edb.contains(&pred)
    }

    /// Every predicate that is not declared EDB is intensional.
    pub fn idb_preds(&self) -> Vec<Pred> {
        let mut out: Vec<Pred> = Vec::new();
        let all = self
            .rules
            .iter()
            .flat_map(|r| std::iter::once(&r.head).chain(&r.body))
            .chain(std::iter::once(&self.query));
        for a in all {
            let p = a.pred();
            if !self.is_edb(p) && !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    /// Query positions holding variables, in argument order.
    pub fn query_vars(&self) -> Vec<Symbol> {
        self.query.vars().collect()
    }

    /// Query constants, in argument order (repeats kept).
    pub fn query_constants(&self) -> Vec<Symbol> {
        self.query
            .args
            .iter()
            .filter_map(|t| match t {
                Term::Const(c) => Some(*c),
                Term::Var(_) => None,
            })
            .collect()
    }

    /// Replace the query's constants positionally.
    pub fn with_query_constants(&self, constants: &[Symbol]) -> Option<Program> {
        if constants.len() != self.query_constants().len() {
            return None;
        }
        let mut it = constants.iter();
        let args = self
            .query
            .args
            .iter()
            .map(|t| match t {
                Term::Const(_) => Term::Const(*it.next().expect("length checked")),
                v => v.clone(),
            })
            .collect();
        Some(Program {
            edb: self.edb.clone(),
            rules: self.rules.clone(),
            query: Atom::new(self.query.name, args),
        })
    }
}

/// Canonical `.dl` text: declarations, rules in order, then the query.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.edb {
            writeln!(f, ".edb {p}.")?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        writeln!(f, "?- {}.", self.query)
    }
}

pub fn print_program(p: &Program) -> String {
    p.to_string()
}

/// True when `name` can be written without quotes as a constant or predicate.
pub fn is_bare_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn write_name(f: &mut impl fmt::Write, name: &str) -> fmt::Result {
    if is_bare_name(name) {
        return f.write_str(name);
    }
    f.write_char('\'')?;
    for c in name.chars() {
        match c {
            '\'' => f.write_str("\\'")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('\'')
}
