use std::collections::HashSet;
use std::fmt;

use super::{Program, Term};
use crate::symbol::Symbol;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Head variable with no occurrence in the body (includes non-ground facts).
    UnboundHeadVar(Symbol),
    /// A rule defines a predicate that is declared extensional.
    EdbInHead,
    QueryOnEdb,
    RepeatedQueryVar(Symbol),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Index into `Program::rules`; `None` for the query.
    pub rule: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            Some(i) => write!(f, "rule {i}: ")?,
            None => f.write_str("query: ")?,
        }
        match &self.kind {
            ViolationKind::UnboundHeadVar(v) => {
                write!(f, "head variable {v} not bound in body")
            }
            ViolationKind::EdbInHead => f.write_str("EDB predicate defined by rule"),
            ViolationKind::QueryOnEdb => f.write_str("query predicate is declared EDB"),
            ViolationKind::RepeatedQueryVar(v) => {
                write!(f, "variable {v} repeated in query")
            }
        }
    }
}

/// All violations found; the program is valid iff this is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport(pub Vec<Violation>);

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_program(p: &Program) -> ValidationReport {
    let mut out = Vec::new();
    for (i, rule) in p.rules.iter().enumerate() {
        if p.is_edb(rule.head.pred()) {
            out.push(Violation {
                rule: Some(i),
                kind: ViolationKind::EdbInHead,
            });
        }
        let bound: HashSet<Symbol> = rule.body.iter().flat_map(|a| a.vars()).collect();
        let mut reported = HashSet::new();
        for v in rule.head.vars() {
            if !bound.contains(&v) && reported.insert(v) {
                out.push(Violation {
                    rule: Some(i),
                    kind: ViolationKind::UnboundHeadVar(v),
                });
            }
        }
    }
    if p.is_edb(p.query.pred()) {
        out.push(Violation {
            rule: None,
            kind: ViolationKind::QueryOnEdb,
        });
    }
    let mut seen = HashSet::new();
    for t in &p.query.args {
        if let Term::Var(v) = t {
            if !seen.insert(*v) {
                out.push(Violation {
                    rule: None,
                    kind: ViolationKind::RepeatedQueryVar(*v),
                });
            }
        }
    }
    ValidationReport(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    #[test]
    fn range_restriction() {
        let p = parse_program(".edb par/2.\nanc(X,Y) :- par(X,Z).\n?- anc(a,Y).").unwrap();
        let r = validate_program(&p);
        assert_eq!(
            r.0,
            vec![Violation {
                rule: Some(0),
                kind: ViolationKind::UnboundHeadVar(Symbol::intern("Y"))
            }]
        );
        assert_eq!(r.to_string(), "rule 0: head variable Y not bound in body");
    }

    #[test]
    fn edb_in_head() {
        let p = parse_program(".edb par/2.\npar(X,Y) :- e(X,Y).\n?- e(a,Y).").unwrap();
        let r = validate_program(&p);
        assert!(r.0.iter().any(|v| v.kind == ViolationKind::EdbInHead));
    }

    #[test]
    fn ancestor_is_valid() {
        let p = parse_program(
            ".edb par/2.\nanc(X,Y) :- par(X,Y).\nanc(X,Y) :- anc(X,Z), par(Z,Y).\n?- anc(a,Y).",
        )
        .unwrap();
        assert!(validate_program(&p).is_valid());
    }

    #[test]
    fn non_ground_fact_and_query_checks() {
        let p = parse_program(".edb e/1.\np(X).\n?- e(X).").unwrap();
        let kinds: Vec<_> = validate_program(&p).0.into_iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::UnboundHeadVar(Symbol::intern("X"))));
        assert!(kinds.contains(&ViolationKind::QueryOnEdb));

        let p = parse_program("p(a,b).\n?- p(X,X).").unwrap();
        assert_eq!(
            validate_program(&p).0[0].kind,
            ViolationKind::RepeatedQueryVar(Symbol::intern("X"))
        );
    }
}
