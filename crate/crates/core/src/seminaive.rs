//! Bottom-up semi-naive evaluation: the reference oracle for the other engines.
//!
//! Each round joins every rule with at least one body occurrence restricted
//! to the tuples that were new in the previous round. Body literals are joined
//! left to right; extensional literals go through [`FactStore::lookup`], so the
//! store's counters reflect the work done here as well.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::answer::AnswerSet;
use crate::ir::numbered::{Arg, NumAtom, NumRule};
use crate::ir::{Pred, Program};
use crate::store::{BindingPattern, FactStore, Tuple};
use crate::symbol::Symbol;
use crate::{ensure_valid, Error, Result};

#[derive(Clone, Debug, Default)]
pub struct Options {
    /// Abort with [`Error::BudgetExceeded`] once more tuples than this are derived.
    pub max_tuples: Option<u64>,
}

/// The least fixpoint: every derivable ground IDB tuple, per predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DerivedSet {
    relations: BTreeMap<Pred, BTreeSet<Tuple>>,
    /// Rounds until the delta became empty.
    pub rounds: usize,
}

impl DerivedSet {
    pub fn relation(&self, pred: Pred) -> impl Iterator<Item = &[Symbol]> {
        self.relations
            .get(&pred)
            .into_iter()
            .flat_map(|s| s.iter().map(|t| &**t))
    }

    pub fn predicates(&self) -> impl Iterator<Item = Pred> + '_ {
        self.relations.keys().copied()
    }

    pub fn total(&self) -> usize {
        self.relations.values().map(BTreeSet::len).sum()
    }
}

#[derive(Default)]
struct Rel {
    tuples: Vec<Tuple>,
    set: HashSet<Tuple>,
    indexes: HashMap<BindingPattern, HashMap<Tuple, Vec<u32>>>,
}

impl Rel {
    fn ensure_index(&mut self, pattern: &BindingPattern) {
        if !self.indexes.contains_key(pattern) {
            let mut ix: HashMap<Tuple, Vec<u32>> = HashMap::new();
            for (i, t) in self.tuples.iter().enumerate() {
                ix.entry(pattern.project(t)).or_default().push(i as u32);
            }
            self.indexes.insert(pattern.clone(), ix);
        }
    }

    fn push(&mut self, t: Tuple) {
        if !self.set.insert(t.clone()) {
            return;
        }
        let id = self.tuples.len() as u32;
        for (pattern, ix) in &mut self.indexes {
            ix.entry(pattern.project(&t)).or_default().push(id);
        }
        self.tuples.push(t);
    }
}

/// Which slice of an IDB relation a body literal may read in one round.
#[derive(Clone, Copy)]
enum Window {
    Full,
    Old,
    Delta,
}

struct Plan {
    rule: NumRule,
    /// Static binding pattern of each body literal under left-to-right joining.
    patterns: Vec<BindingPattern>,
    idb: Vec<bool>,
}

struct Evaluator<'a> {
    store: &'a FactStore,
    rels: HashMap<Pred, Rel>,
    /// Per predicate: (start of delta, end of delta) in `tuples`.
    bounds: HashMap<Pred, (usize, usize)>,
}

impl Evaluator<'_> {
    fn window_range(&self, pred: Pred, w: Window) -> (usize, usize) {
        let (ds, de) = self.bounds.get(&pred).copied().unwrap_or((0, 0));
        match w {
            Window::Full => (0, de),
            Window::Old => (0, ds),
            Window::Delta => (ds, de),
        }
    }

    fn join(
        &self,
        plan: &Plan,
        windows: &[Window],
        k: usize,
        binding: &mut Vec<Option<Symbol>>,
        out: &mut Vec<(Pred, Tuple)>,
    ) -> Result<()> {
        let rule = &plan.rule;
        if k == rule.body.len() {
            let head = ground(&rule.head, binding);
            out.push((rule.head.pred, head));
            return Ok(());
        }
        let lit = &rule.body[k];
        let pattern = &plan.patterns[k];
        let key: Vec<Symbol> = lit
            .args
            .iter()
            .enumerate()
            .filter(|(i, _)| pattern.is_bound(*i))
            .map(|(_, a)| match a {
                Arg::Const(c) => *c,
                Arg::Var(v) => binding[*v].expect("bound by an earlier literal"),
            })
            .collect();
        if !plan.idb[k] {
            let facts: Vec<&[Symbol]> = self.store.lookup(lit.pred, pattern, &key)?.collect();
            for t in facts {
                self.extend(plan, windows, k, lit, t, binding, out)?;
            }
            return Ok(());
        }
        let Some(rel) = self.rels.get(&lit.pred) else {
            return Ok(());
        };
        let (lo, hi) = self.window_range(lit.pred, windows[k]);
        if key.is_empty() {
            for t in &rel.tuples[lo..hi] {
                self.extend(plan, windows, k, lit, t, binding, out)?;
            }
        } else if let Some(ids) = rel.indexes[pattern].get(key.as_slice()) {
            let start = ids.partition_point(|&i| (i as usize) < lo);
            for &i in &ids[start..] {
                if i as usize >= hi {
                    break;
                }
                self.extend(plan, windows, k, lit, &rel.tuples[i as usize], binding, out)?;
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        plan: &Plan,
        windows: &[Window],
        k: usize,
        lit: &NumAtom,
        tuple: &[Symbol],
        binding: &mut Vec<Option<Symbol>>,
        out: &mut Vec<(Pred, Tuple)>,
    ) -> Result<()> {
        let mut newly = Vec::new();
        let mut ok = true;
        for (a, v) in lit.args.iter().zip(tuple) {
            if let Arg::Var(x) = a {
                match binding[*x] {
                    Some(b) if b != *v => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        binding[*x] = Some(*v);
                        newly.push(*x);
                    }
                }
            }
        }
        if ok {
            self.join(plan, windows, k + 1, binding, out)?;
        }
        for x in newly {
            binding[x] = None;
        }
        Ok(())
    }
}

fn ground(atom: &NumAtom, binding: &[Option<Symbol>]) -> Tuple {
    atom.args
        .iter()
        .map(|a| match a {
            Arg::Const(c) => *c,
            Arg::Var(v) => binding[*v].expect("range-restricted rule"),
        })
        .collect()
}

fn plan_rule(rule: NumRule, p: &Program) -> Plan {
    let mut bound = vec![false; rule.var_count()];
    let mut patterns = Vec::new();
    let mut idb = Vec::new();
    for lit in &rule.body {
        patterns.push(BindingPattern::new(
            lit.args
                .iter()
                .map(|a| match a {
                    Arg::Const(_) => true,
                    Arg::Var(v) => bound[*v],
                })
                .collect(),
        ));
        for a in &lit.args {
            if let Arg::Var(v) = a {
                bound[*v] = true;
            }
        }
        idb.push(!p.is_edb(lit.pred));
    }
    Plan { rule, patterns, idb }
}

pub fn evaluate(p: &Program, store: &FactStore) -> Result<DerivedSet> {
    evaluate_with(p, store, &Options::default())
}

pub fn evaluate_with(p: &Program, store: &FactStore, opts: &Options) -> Result<DerivedSet> {
    ensure_valid(p)?;
    let plans: Vec<Plan> = p
        .rules
        .iter()
        .map(|r| plan_rule(NumRule::from_rule(r), p))
        .collect();
    let mut ev = Evaluator {
        store,
        rels: p.idb_preds().into_iter().map(|q| (q, Rel::default())).collect(),
        bounds: HashMap::new(),
    };
    for plan in &plans {
        for (k, lit) in plan.rule.body.iter().enumerate() {
            if plan.idb[k] && plan.patterns[k].bound_count() > 0 {
                ev.rels
                    .get_mut(&lit.pred)
                    .expect("IDB relation")
                    .ensure_index(&plan.patterns[k]);
            }
        }
    }

    let mut derived: u64 = 0;
    let mut rounds = 0usize;
    let mut first = true;
    loop {
        let mut out = Vec::new();
        for plan in &plans {
            let idb_positions: Vec<usize> = (0..plan.idb.len()).filter(|&k| plan.idb[k]).collect();
            let mut binding = vec![None; plan.rule.var_count()];
            if first {
                if idb_positions.is_empty() {
                    let windows = vec![Window::Full; plan.idb.len()];
                    ev.join(plan, &windows, 0, &mut binding, &mut out)?;
                }
                continue;
            }
            // One pass per IDB occurrence: earlier occurrences read everything
            // known so far, later ones only what predates the delta.
            for &d in &idb_positions {
                let windows: Vec<Window> = (0..plan.idb.len())
                    .map(|k| match k.cmp(&d) {
                        std::cmp::Ordering::Less => Window::Full,
                        std::cmp::Ordering::Equal => Window::Delta,
                        std::cmp::Ordering::Greater => Window::Old,
                    })
                    .collect();
                ev.join(plan, &windows, 0, &mut binding, &mut out)?;
            }
        }
        first = false;
        rounds += 1;

        let mut new_bounds = HashMap::new();
        let mut grew = false;
        for q in ev.rels.keys() {
            let len = ev.rels[q].tuples.len();
            new_bounds.insert(*q, len);
        }
        for (pred, t) in out {
            let rel = ev.rels.get_mut(&pred).expect("IDB relation");
            let before = rel.tuples.len();
            rel.push(t);
            if rel.tuples.len() > before {
                grew = true;
                derived += 1;
                if let Some(max) = opts.max_tuples {
                    if derived > max {
                        return Err(Error::BudgetExceeded { budget: max });
                    }
                }
            }
        }
        for (q, start) in new_bounds {
            let end = ev.rels[&q].tuples.len();
            ev.bounds.insert(q, (start, end));
        }
        if !grew {
            break;
        }
    }

    let relations = ev
        .rels
        .into_iter()
        .map(|(q, r)| (q, r.tuples.into_iter().collect()))
        .collect();
    Ok(DerivedSet { relations, rounds })
}

/// Answers to `p`'s query from the full fixpoint.
pub fn answer_query(p: &Program, store: &FactStore) -> Result<AnswerSet> {
    answer_query_with(p, store, &Options::default())
}

pub fn answer_query_with(p: &Program, store: &FactStore, opts: &Options) -> Result<AnswerSet> {
    let derived = evaluate_with(p, store, opts)?;
    Ok(AnswerSet::project(&p.query, derived.relation(p.query.pred())))
}
