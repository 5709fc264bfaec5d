use std::fmt;

use crate::ir::{Atom, Pred, Rule, Term};
use crate::symbol::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DTerm {
    Const(Symbol),
    Var(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DAtom {
    pub pred: Pred,
    pub args: Vec<DTerm>,
}

/// A derived rule: a head and the body literals still to be resolved.
/// The selected literal is always the leftmost remaining one.
///
/// Variables are numbered by first occurrence (head, then body), so two
/// rules are variants of each other iff they compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DerivedRule {
    head: DAtom,
    body: Vec<DAtom>,
    vars: u32,
}

impl DerivedRule {
    pub fn new(head: DAtom, body: Vec<DAtom>) -> DerivedRule {
        let mut map: Vec<(u32, u32)> = Vec::new();
        let mut next = 0u32;
        let mut renumber = |a: &DAtom| DAtom {
            pred: a.pred,
            args: a
                .args
                .iter()
                .map(|t| match t {
                    DTerm::Var(v) => DTerm::Var(match map.iter().find(|(o, _)| o == v) {
                        Some((_, n)) => *n,
                        None => {
                            map.push((*v, next));
                            next += 1;
                            next - 1
                        }
                    }),
                    c => *c,
                })
                .collect(),
        };
        let head = renumber(&head);
        let body = body.iter().map(&mut renumber).collect();
        DerivedRule {
            head,
            body,
            vars: next,
        }
    }

    pub fn from_rule(rule: &Rule) -> DerivedRule {
        let names = rule.variables();
        let conv = |a: &Atom| DAtom {
            pred: a.pred(),
            args: a
                .args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => DTerm::Const(*c),
                    Term::Var(v) => DTerm::Var(names.iter().position(|n| n == v).expect("collected") as u32),
                })
                .collect(),
        };
        DerivedRule::new(conv(&rule.head), rule.body.iter().map(conv).collect())
    }

    /// Back to surface syntax, naming variables `V0`, `V1`, ….
    pub fn to_rule(&self) -> Rule {
        let conv = |a: &DAtom| {
            Atom::new(
                a.pred.name,
                a.args
                    .iter()
                    .map(|t| match t {
                        DTerm::Const(c) => Term::Const(*c),
                        DTerm::Var(v) => Term::Var(Symbol::intern(&format!("V{v}"))),
                    })
                    .collect(),
            )
        };
        Rule::new(conv(&self.head), self.body.iter().map(conv).collect())
    }

    pub fn head(&self) -> &DAtom {
        &self.head
    }

    pub fn body(&self) -> &[DAtom] {
        &self.body
    }

    pub fn selected(&self) -> Option<&DAtom> {
        self.body.first()
    }

    pub fn is_unit(&self) -> bool {
        self.body.is_empty()
    }

    pub fn var_count(&self) -> u32 {
        self.vars
    }

    pub fn is_ground(&self) -> bool {
        self.vars == 0
    }

    /// The predicate sequence (head first); rules can only subsume rules of
    /// the same skeleton.
    pub fn skeleton(&self) -> Vec<Pred> {
        std::iter::once(&self.head)
            .chain(&self.body)
            .map(|a| a.pred)
            .collect()
    }

    /// All argument terms, head first.
    pub fn terms(&self) -> impl Iterator<Item = DTerm> + '_ {
        std::iter::once(&self.head)
            .chain(&self.body)
            .flat_map(|a| a.args.iter().copied())
    }

    /// The head of a unit as a ground tuple.
    pub fn ground_head(&self) -> Option<Box<[Symbol]>> {
        self.head
            .args
            .iter()
            .map(|t| match t {
                DTerm::Const(c) => Some(*c),
                DTerm::Var(_) => None,
            })
            .collect()
    }
}

impl fmt::Display for DerivedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rule())
    }
}

/// Bindings over the union of two renamed-apart variable spaces.
struct Subst(Vec<Option<DTerm>>);

impl Subst {
    fn new(vars: u32) -> Self {
        Subst(vec![None; vars as usize])
    }

    fn resolve(&self, mut t: DTerm) -> DTerm {
        while let DTerm::Var(v) = t {
            match self.0[v as usize] {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    fn unify(&mut self, a: DTerm, b: DTerm) -> bool {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (a, b) {
            _ if a == b => true,
            (DTerm::Var(v), other) | (other, DTerm::Var(v)) => {
                self.0[v as usize] = Some(other);
                true
            }
            _ => false,
        }
    }

    fn apply(&self, a: &DAtom, offset: u32) -> DAtom {
        DAtom {
            pred: a.pred,
            args: a.args.iter().map(|t| self.resolve(shift(*t, offset))).collect(),
        }
    }
}

fn shift(t: DTerm, offset: u32) -> DTerm {
    match t {
        DTerm::Var(v) => DTerm::Var(v + offset),
        c => c,
    }
}

fn unify_atoms(s: &mut Subst, a: &DAtom, a_off: u32, b: &DAtom, b_off: u32) -> bool {
    a.pred == b.pred
        && a.args
            .iter()
            .zip(&b.args)
            .all(|(x, y)| s.unify(shift(*x, a_off), shift(*y, b_off)))
}

/// Prediction: resolve the caller's selected literal against a program rule's
/// head, yielding the program rule instantiated by the mgu.
pub fn instantiate(caller: &DerivedRule, program_rule: &DerivedRule) -> Option<DerivedRule> {
    let goal = caller.selected()?;
    let off = caller.vars;
    let mut s = Subst::new(caller.vars + program_rule.vars);
    if !unify_atoms(&mut s, goal, 0, &program_rule.head, off) {
        return None;
    }
    Some(DerivedRule::new(
        s.apply(&program_rule.head, off),
        program_rule.body.iter().map(|a| s.apply(a, off)).collect(),
    ))
}

/// Completion: resolve the waiter's selected literal against a unit, removing it.
pub fn reduce(waiter: &DerivedRule, unit: &DerivedRule) -> Option<DerivedRule> {
    debug_assert!(unit.is_unit());
    let goal = waiter.selected()?;
    let off = waiter.vars;
    let mut s = Subst::new(waiter.vars + unit.vars);
    if !unify_atoms(&mut s, goal, 0, &unit.head, off) {
        return None;
    }
    Some(DerivedRule::new(
        s.apply(&waiter.head, 0),
        waiter.body[1..].iter().map(|a| s.apply(a, 0)).collect(),
    ))
}

/// [`reduce`] against a ground fact of the selected literal's predicate.
pub fn reduce_fact(waiter: &DerivedRule, pred: Pred, tuple: &[Symbol]) -> Option<DerivedRule> {
    let goal = waiter.selected()?;
    if goal.pred != pred {
        return None;
    }
    let mut binding: Vec<Option<Symbol>> = vec![None; waiter.vars as usize];
    for (t, v) in goal.args.iter().zip(tuple) {
        match t {
            DTerm::Const(c) if c != v => return None,
            DTerm::Const(_) => {}
            DTerm::Var(x) => match binding[*x as usize] {
                Some(b) if b != *v => return None,
                Some(_) => {}
                None => binding[*x as usize] = Some(*v),
            },
        }
    }
    let apply = |a: &DAtom| DAtom {
        pred: a.pred,
        args: a
            .args
            .iter()
            .map(|t| match t {
                DTerm::Var(x) => binding[*x as usize].map_or(*t, DTerm::Const),
                c => *c,
            })
            .collect(),
    };
    Some(DerivedRule::new(
        apply(&waiter.head),
        waiter.body[1..].iter().map(apply).collect(),
    ))
}

/// True iff some substitution maps `general` onto `specific` position-wise.
pub fn subsumes(general: &DerivedRule, specific: &DerivedRule) -> bool {
    if general.head.pred != specific.head.pred
        || general.body.len() != specific.body.len()
        || general
            .body
            .iter()
            .zip(&specific.body)
            .any(|(a, b)| a.pred != b.pred)
    {
        return false;
    }
    let mut theta: Vec<Option<DTerm>> = vec![None; general.vars as usize];
    general.terms().zip(specific.terms()).all(|(g, s)| match g {
        DTerm::Const(_) => g == s,
        DTerm::Var(v) => match theta[v as usize] {
            Some(t) => t == s,
            None => {
                theta[v as usize] = Some(s);
                true
            }
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    /// Parse a single clause (no query needed).
    pub(crate) fn rule(text: &str) -> DerivedRule {
        let p = parse_program(&format!("{text}\n?- zz_unused.")).unwrap();
        DerivedRule::from_rule(&p.rules[0])
    }

    #[test]
    fn instantiate_examples() {
        let caller = rule("goal(Y) :- anc(a,Y).");
        let prog = rule("anc(X,Y) :- par(X,Y).");
        assert_eq!(instantiate(&caller, &prog), Some(rule("anc(a,Z) :- par(a,Z).")));

        let caller = rule("goal :- p(a).");
        assert_eq!(instantiate(&caller, &rule("p(b).")), None);

        let caller = rule("s :- q(X,X).");
        let prog = rule("q(U,V) :- e(U,V).");
        assert_eq!(instantiate(&caller, &prog), Some(rule("q(X,X) :- e(X,X).")));
    }

    #[test]
    fn reduce_examples() {
        let waiter = rule("anc(a,Y) :- par(a,Y).");
        let par = Pred::new("par", 2);
        let ab = [Symbol::intern("a"), Symbol::intern("b")];
        assert_eq!(reduce_fact(&waiter, par, &ab), Some(rule("anc(a,b).")));

        let waiter = rule("goal(Y) :- anc(a,Y).");
        assert_eq!(reduce(&waiter, &rule("anc(a,b).")), Some(rule("goal(b).")));

        let waiter = rule("p :- q(c).");
        assert_eq!(reduce(&waiter, &rule("q(d).")), None);
        assert_eq!(
            reduce_fact(&waiter, Pred::new("q", 1), &[Symbol::intern("d")]),
            None
        );
    }

    #[test]
    fn reduce_keeps_remaining_body() {
        let waiter = rule("anc(X,Y) :- anc(X,Z), par(Z,Y).");
        let got = reduce(&waiter, &rule("anc(a,b).")).unwrap();
        assert_eq!(got, rule("anc(a,Y) :- par(b,Y)."));
        assert_eq!(got.selected().unwrap().pred, Pred::new("par", 2));
    }

    #[test]
    fn subsumption_examples() {
        let general = rule("anc(X,Y) :- par(X,Y).");
        let specific = rule("anc(a,Y) :- par(a,Y).");
        assert!(subsumes(&general, &specific));
        assert!(!subsumes(&specific, &general));
        let renamed = rule("anc(P,Q) :- par(P,Q).");
        assert!(subsumes(&general, &renamed));
        assert_eq!(general, renamed);
    }

    #[test]
    fn subsumption_respects_repeated_variables() {
        assert!(subsumes(&rule("p(X,Y) :- e(X,Y)."), &rule("p(X,X) :- e(X,X).")));
        assert!(!subsumes(&rule("p(X,X) :- e(X,X)."), &rule("p(X,Y) :- e(X,Y).")));
        assert!(!subsumes(&rule("p(X) :- e(X)."), &rule("p(X) :- f(X).")));
    }
}
