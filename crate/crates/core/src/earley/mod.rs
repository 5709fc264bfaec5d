//! Earley deduction interpreter.
//!
//! The store is seeded with `goal(V…) :- query` and saturated with two
//! inference steps applied to the leftmost body literal of each derived rule:
//!
//! * instantiation: an intensional selected literal is unified with the heads
//!   of program rules, adding the instantiated program rules;
//! * reduction: a selected literal is resolved against a unit (a derived rule
//!   with empty body) or, for extensional literals, against facts fetched from
//!   the [`FactStore`] with the literal's bound/free pattern.
//!
//! A new rule is kept only when no stored rule subsumes it, and stored rules it
//! subsumes are dropped.

mod rule;
mod store;

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::Write;

pub use rule::{instantiate, reduce, reduce_fact, subsumes, DAtom, DTerm, DerivedRule};
pub use store::{Insertion, RuleId, RuleStore};

use crate::answer::AnswerSet;
use crate::ir::{Atom, Pred, Program, Rule, Term};
use crate::store::{BindingPattern, FactStore, Tuple};
use crate::symbol::Symbol;
use crate::{ensure_valid, Error, Result};

#[derive(Clone, Debug)]
pub struct Options {
    /// Maximum agenda steps; `None` is unbounded.
    pub budget: Option<u64>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            budget: Some(100_000_000),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub steps: u64,
    pub inserted: usize,
    pub subsumed: usize,
    pub live: usize,
}

#[derive(Default)]
struct UnitTable {
    tuples: Vec<Tuple>,
    set: HashSet<Tuple>,
    indexes: HashMap<BindingPattern, HashMap<Tuple, Vec<u32>>>,
}

impl UnitTable {
    fn add(&mut self, t: Tuple) -> bool {
        if !self.set.insert(t.clone()) {
            return false;
        }
        let id = self.tuples.len() as u32;
        for (pattern, ix) in &mut self.indexes {
            ix.entry(pattern.project(&t)).or_default().push(id);
        }
        self.tuples.push(t);
        true
    }

    fn matching(&mut self, pattern: &BindingPattern, key: &[Symbol]) -> Vec<Tuple> {
        if !self.indexes.contains_key(pattern) {
            let mut ix: HashMap<Tuple, Vec<u32>> = HashMap::new();
            for (i, t) in self.tuples.iter().enumerate() {
                ix.entry(pattern.project(t)).or_default().push(i as u32);
            }
            self.indexes.insert(pattern.clone(), ix);
        }
        self.indexes[pattern]
            .get(key)
            .map(|ids| ids.iter().map(|&i| self.tuples[i as usize].clone()).collect())
            .unwrap_or_default()
    }
}

/// Bound/free pattern of a literal (constants are bound) and its bound values.
fn call_key(lit: &DAtom) -> (BindingPattern, Tuple) {
    let pattern = BindingPattern::new(lit.args.iter().map(|t| matches!(t, DTerm::Const(_))).collect());
    let key = lit
        .args
        .iter()
        .filter_map(|t| match t {
            DTerm::Const(c) => Some(*c),
            DTerm::Var(_) => None,
        })
        .collect();
    (pattern, key)
}

/// Source of a derivation, for the trace.
enum Other<'a> {
    Program(usize),
    Derived(RuleId),
    Fact(Pred, &'a [Symbol]),
}

struct Engine<'a, 'w> {
    program: &'a Program,
    facts: &'a FactStore,
    rules: RuleStore,
    by_head: HashMap<Pred, Vec<(usize, DerivedRule)>>,
    units: HashMap<Pred, UnitTable>,
    waiters: HashMap<Pred, HashMap<BindingPattern, HashMap<Tuple, Vec<RuleId>>>>,
    agenda: VecDeque<RuleId>,
    trace: Option<&'w mut dyn Write>,
    stats: Stats,
}

impl Engine<'_, '_> {
    fn add(&mut self, kind: char, parent: RuleId, other: Other<'_>, rule: DerivedRule) {
        let text = self.trace.is_some().then(|| rule.to_string());
        match self.rules.insert(rule) {
            Insertion::Added { id, .. } => {
                self.stats.inserted += 1;
                self.agenda.push_back(id);
                if let (Some(w), Some(text)) = (self.trace.as_mut(), text) {
                    let other = match other {
                        Other::Program(i) => format!("r{i}"),
                        Other::Derived(id) => id.to_string(),
                        Other::Fact(p, t) => {
                            let atom = Atom::new(p.name, t.iter().map(|c| Term::Const(*c)).collect());
                            atom.to_string()
                        }
                    };
                    // Tracing is best effort.
                    let _ = writeln!(w, "{kind} {parent} {other} -> {id} {text}");
                }
            }
            Insertion::Subsumed { .. } => self.stats.subsumed += 1,
        }
    }

    fn step(&mut self, id: RuleId) -> Result<()> {
        let rule = self.rules.get(id).clone();
        let Some(lit) = rule.selected() else {
            let tuple = rule
                .ground_head()
                .expect("units of range-restricted programs are ground");
            let pred = rule.head().pred;
            if !self.units.entry(pred).or_default().add(tuple.clone()) {
                return Ok(());
            }
            let mut ready = Vec::new();
            if let Some(by_pattern) = self.waiters.get(&pred) {
                for (pattern, by_key) in by_pattern {
                    if let Some(ws) = by_key.get(&pattern.project(&tuple)) {
                        ready.extend(ws.iter().copied());
                    }
                }
            }
            ready.sort_unstable();
            for w in ready {
                if !self.rules.is_live(w) {
                    continue;
                }
                if let Some(r) = reduce_fact(self.rules.get(w), pred, &tuple) {
                    self.add('R', w, Other::Derived(id), r);
                }
            }
            return Ok(());
        };
        let (pattern, key) = call_key(lit);
        if self.program.is_edb(lit.pred) {
            let facts: Vec<&[Symbol]> = self.facts.lookup(lit.pred, &pattern, &key)?.collect();
            for t in facts {
                if let Some(r) = reduce_fact(&rule, lit.pred, t) {
                    self.add('R', id, Other::Fact(lit.pred, t), r);
                }
            }
            return Ok(());
        }
        self.waiters
            .entry(lit.pred)
            .or_default()
            .entry(pattern.clone())
            .or_default()
            .entry(key.clone())
            .or_default()
            .push(id);
        let known = self.units.entry(lit.pred).or_default().matching(&pattern, &key);
        for t in known {
            if let Some(r) = reduce_fact(&rule, lit.pred, &t) {
                self.add('R', id, Other::Fact(lit.pred, &t), r);
            }
        }
        let candidates = self.by_head.get(&lit.pred).cloned().unwrap_or_default();
        for (i, prog) in candidates {
            if let Some(r) = instantiate(&rule, &prog) {
                self.add('I', id, Other::Program(i), r);
            }
        }
        Ok(())
    }
}

/// Answer `p`'s query by Earley deduction.
pub fn earley_run(p: &Program, facts: &FactStore) -> Result<AnswerSet> {
    run(p, facts, &Options::default(), None).map(|(a, _)| a)
}

/// Like [`earley_run`], with a step budget and an optional trace sink that
/// receives one `I|R <parent> <other> -> <id> <rule>` line per stored rule.
pub fn run(
    p: &Program,
    facts: &FactStore,
    opts: &Options,
    trace: Option<&mut dyn Write>,
) -> Result<(AnswerSet, Stats)> {
    ensure_valid(p)?;
    let goal_pred = Pred::new(Symbol::intern("$goal"), p.query_vars().len());
    let goal_rule = Rule::new(
        Atom::new(
            goal_pred.name,
            p.query_vars().into_iter().map(Term::Var).collect(),
        ),
        vec![p.query.clone()],
    );
    let mut by_head: HashMap<Pred, Vec<(usize, DerivedRule)>> = HashMap::new();
    for (i, r) in p.rules.iter().enumerate() {
        by_head
            .entry(r.head.pred())
            .or_default()
            .push((i, DerivedRule::from_rule(r)));
    }
    let mut engine = Engine {
        program: p,
        facts,
        rules: RuleStore::new(),
        by_head,
        units: HashMap::new(),
        waiters: HashMap::new(),
        agenda: VecDeque::new(),
        trace,
        stats: Stats::default(),
    };
    if let Insertion::Added { id, .. } = engine.rules.insert(DerivedRule::from_rule(&goal_rule)) {
        engine.stats.inserted += 1;
        engine.agenda.push_back(id);
    }
    while let Some(id) = engine.agenda.pop_front() {
        if !engine.rules.is_live(id) {
            continue;
        }
        engine.stats.steps += 1;
        if let Some(budget) = opts.budget {
            if engine.stats.steps > budget {
                return Err(Error::BudgetExceeded { budget });
            }
        }
        engine.step(id)?;
    }
    engine.stats.live = engine.rules.len();
    let answers = engine
        .units
        .get(&goal_pred)
        .map(|u| u.tuples.iter().cloned().collect())
        .unwrap_or_default();
    Ok((answers, engine.stats))
}
