use std::collections::{HashMap, HashSet};

use super::{Binding, ItemSchema, Slot};
use crate::ir::numbered::{Arg, NumAtom, NumRule};
use crate::ir::{Atom, Pred, Program, Rule, Term};
use crate::store::BindingPattern;
use crate::symbol::Symbol;

/// Name of the synthetic goal predicate.
pub(crate) const GOAL: &str = "goal";

/// A program prepared for compilation: numbered rules with the synthetic goal
/// rule `goal(V…) :- q(A0, …)` appended. Every query position gets its own
/// goal-rule variable; constant positions are bound to initial parameters.
#[derive(Clone, Debug)]
pub struct CompiledProgram {
    pub rules: Vec<NumRule>,
    pub edb: HashSet<Pred>,
    by_head: HashMap<Pred, Vec<usize>>,
    pub query: Atom,
}

impl CompiledProgram {
    pub fn new(p: &Program) -> CompiledProgram {
        let mut rules: Vec<NumRule> = p.rules.iter().map(NumRule::from_rule).collect();
        let mut by_head: HashMap<Pred, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            by_head.entry(r.head.pred).or_default().push(i);
        }
        let mut names = Vec::new();
        let mut qc = 0;
        for t in &p.query.args {
            match t {
                Term::Var(v) => names.push(*v),
                Term::Const(_) => {
                    names.push(Symbol::intern(&format!("_Q{qc}")));
                    qc += 1;
                }
            }
        }
        let head_vars: Vec<Term> = p
            .query
            .args
            .iter()
            .zip(&names)
            .filter(|(t, _)| t.is_var())
            .map(|(_, n)| Term::Var(*n))
            .collect();
        let goal = Rule::new(
            Atom::new(GOAL, head_vars),
            vec![Atom::new(
                p.query.name,
                names.iter().map(|n| Term::Var(*n)).collect(),
            )],
        );
        let mut goal = NumRule::from_rule(&goal);
        // `from_rule` numbers head variables first; renumber so that variable i
        // is query position i.
        let body_vars: Vec<usize> = goal.body[0]
            .args
            .iter()
            .map(|a| match a {
                Arg::Var(v) => *v,
                Arg::Const(_) => unreachable!(),
            })
            .collect();
        let renum = |a: &Arg| match a {
            Arg::Var(v) => Arg::Var(body_vars.iter().position(|b| b == v).expect("present")),
            c => *c,
        };
        goal.head.args = goal.head.args.iter().map(renum).collect();
        goal.body[0].args = goal.body[0].args.iter().map(renum).collect();
        goal.names = names;
        rules.push(goal);
        CompiledProgram {
            rules,
            edb: p.edb.iter().copied().collect(),
            by_head,
            query: p.query.clone(),
        }
    }

    pub fn goal_rule(&self) -> usize {
        self.rules.len() - 1
    }

    pub fn is_edb(&self, pred: Pred) -> bool {
        self.edb.contains(&pred)
    }

    pub fn rules_for(&self, pred: Pred) -> &[usize] {
        self.by_head.get(&pred).map_or(&[], Vec::as_slice)
    }

    /// The initial kernel: the goal item with each query constant bound to the
    /// parameter slot of its index among the query constants.
    pub fn goal_item(&self) -> ItemSchema {
        let mut binding = Vec::new();
        let mut qc = 0;
        for t in &self.query.args {
            match t {
                Term::Var(_) => binding.push(Binding::Unbound),
                Term::Const(_) => {
                    binding.push(Binding::Param(qc));
                    qc += 1;
                }
            }
        }
        ItemSchema {
            rule: self.goal_rule(),
            dot: 0,
            call: BindingPattern::new(Vec::new()),
            binding,
            guards: Vec::new(),
        }
    }

    pub fn selected(&self, item: &ItemSchema) -> Option<&NumAtom> {
        self.rules[item.rule].body.get(item.dot)
    }
}

/// Bindings of the selected literal's arguments under `item`.
pub(crate) fn call_args(lit: &NumAtom, item: &ItemSchema) -> Vec<Binding> {
    lit.args
        .iter()
        .map(|a| match a {
            Arg::Const(c) => Binding::Const(*c),
            Arg::Var(v) => item.binding[*v],
        })
        .collect()
}

/// Predict rule `r` for a call whose arguments are bound as in `caller`.
fn predict(rule: &NumRule, r: usize, caller: &[Binding]) -> Option<ItemSchema> {
    let mut binding = vec![Binding::Unbound; rule.var_count()];
    let mut guards: Vec<(Slot, Symbol)> = Vec::new();
    for (b, h) in caller.iter().zip(&rule.head.args) {
        match (*b, *h) {
            (Binding::Unbound, _) => {}
            (Binding::Const(c), Arg::Const(d)) => {
                if c != d {
                    return None;
                }
            }
            (Binding::Param(s), Arg::Const(d)) => guards.push((s, d)),
            (b, Arg::Var(u)) => match (binding[u], b) {
                (Binding::Unbound, b) => binding[u] = b,
                (Binding::Const(c0), Binding::Const(c)) => {
                    if c != c0 {
                        return None;
                    }
                }
                (Binding::Const(c0), Binding::Param(s)) => guards.push((s, c0)),
                (Binding::Param(s0), Binding::Const(c)) => {
                    binding[u] = Binding::Const(c);
                    guards.push((s0, c));
                }
                // Two parameters meeting in one head variable: the equality is
                // enforced by the answer channel key, not by the item.
                (Binding::Param(_), Binding::Param(_)) => {}
                (_, Binding::Unbound) => unreachable!(),
            },
        }
    }
    guards.sort();
    guards.dedup();
    if guards.windows(2).any(|w| w[0].0 == w[1].0) {
        return None;
    }
    Some(ItemSchema {
        rule: r,
        dot: 0,
        call: BindingPattern::new(caller.iter().map(|b| *b != Binding::Unbound).collect()),
        binding,
        guards,
    })
}

/// Close `kernel` under prediction. The result is sorted and duplicate free.
pub fn closure(kernel: impl IntoIterator<Item = ItemSchema>, p: &CompiledProgram) -> Vec<ItemSchema> {
    let mut seen: HashSet<ItemSchema> = HashSet::new();
    let mut work: Vec<ItemSchema> = Vec::new();
    for item in kernel {
        if seen.insert(item.clone()) {
            work.push(item);
        }
    }
    while let Some(item) = work.pop() {
        let Some(lit) = p.selected(&item) else { continue };
        if p.is_edb(lit.pred) {
            continue;
        }
        let caller = call_args(lit, &item);
        for &r in p.rules_for(lit.pred) {
            if let Some(new) = predict(&p.rules[r], r, &caller) {
                if seen.insert(new.clone()) {
                    work.push(new);
                }
            }
        }
    }
    let mut out: Vec<ItemSchema> = seen.into_iter().collect();
    out.sort();
    out
}
