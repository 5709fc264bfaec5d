use std::collections::BTreeSet;
use std::fmt;

use crate::ir::{Atom, Term};
use crate::store::Tuple;
use crate::symbol::Symbol;

/// Deduplicated query answers, ordered lexicographically by constant name.
///
/// A boolean query that succeeds holds exactly one empty tuple.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnswerSet(BTreeSet<Tuple>);

impl AnswerSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, tuple: Tuple) -> bool {
        self.0.insert(tuple)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, tuple: &[Symbol]) -> bool {
        self.0.contains(tuple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Symbol]> {
        self.0.iter().map(|t| &**t)
    }

    /// Tuples in `self` but not in `other`.
    pub fn difference<'a>(&'a self, other: &'a AnswerSet) -> impl Iterator<Item = &'a [Symbol]> {
        self.0.difference(&other.0).map(|t| &**t)
    }

    /// Keep tuples of `query`'s predicate that agree with its constants,
    /// projected onto its variable positions.
    pub fn project<'a>(query: &Atom, tuples: impl IntoIterator<Item = &'a [Symbol]>) -> AnswerSet {
        let mut out = AnswerSet::new();
        'next: for t in tuples {
            let mut row = Vec::new();
            for (arg, v) in query.args.iter().zip(t) {
                match arg {
                    Term::Const(c) if c != v => continue 'next,
                    Term::Const(_) => {}
                    Term::Var(_) => row.push(*v),
                }
            }
            out.insert(row.into());
        }
        out
    }

    /// One line per tuple: comma-separated constants, `()` for the empty tuple.
    pub fn to_lines(&self) -> String {
        self.to_string()
    }
}

pub(crate) fn fmt_tuple(f: &mut impl fmt::Write, t: &[Symbol]) -> fmt::Result {
    if t.is_empty() {
        return f.write_str("()");
    }
    for (i, c) in t.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        crate::ir::write_name(f, c.as_str())?;
    }
    Ok(())
}

impl fmt::Display for AnswerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.0 {
            fmt_tuple(f, t)?;
            f.write_str("\n")?;
        }
        Ok(())
    }
}

impl FromIterator<Tuple> for AnswerSet {
    fn from_iter<I: IntoIterator<Item = Tuple>>(iter: I) -> Self {
        AnswerSet(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tup(names: &[&str]) -> Tuple {
        names.iter().map(|n| Symbol::intern(n)).collect()
    }

    #[test]
    fn projection_filters_constants() {
        let q = Atom::new("anc", vec![Term::constant("a"), Term::var("Y")]);
        let rows = [tup(&["a", "c"]), tup(&["b", "c"]), tup(&["a", "b"])];
        let ans = AnswerSet::project(&q, rows.iter().map(|t| &**t));
        assert_eq!(ans.to_string(), "b\nc\n");
    }

    #[test]
    fn boolean_answer_is_empty_tuple() {
        let q = Atom::new("anc", vec![Term::constant("a"), Term::constant("c")]);
        let rows = [tup(&["a", "c"])];
        let ans = AnswerSet::project(&q, rows.iter().map(|t| &**t));
        assert_eq!(ans.len(), 1);
        assert_eq!(ans.to_string(), "()\n");
    }
}
