//! Rules with variables numbered by first occurrence, shared by the engines.

use super::{Atom, Pred, Rule, Term};
use crate::symbol::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Var(usize),
    Const(Symbol),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NumAtom {
    pub pred: Pred,
    pub args: Vec<Arg>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumRule {
    pub head: NumAtom,
    pub body: Vec<NumAtom>,
    /// Original variable names, indexed by variable number.
    pub names: Vec<Symbol>,
}

impl NumRule {
    pub fn from_rule(rule: &Rule) -> NumRule {
        let names = rule.variables();
        let conv = |a: &Atom| NumAtom {
            pred: a.pred(),
            args: a
                .args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => Arg::Const(*c),
                    Term::Var(v) => Arg::Var(names.iter().position(|n| n == v).expect("collected")),
                })
                .collect(),
        };
        NumRule {
            head: conv(&rule.head),
            body: rule.body.iter().map(conv).collect(),
            names: names.clone(),
        }
    }

    pub fn var_count(&self) -> usize {
        self.names.len()
    }
}
