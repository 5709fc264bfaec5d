use std::collections::VecDeque;
use std::hash::BuildHasherDefault;
use std::rc::Rc;

use indexmap::{Equivalent, IndexSet};
use rustc_hash::{FxHashMap, FxHasher};

use super::{Automaton, Channel, Input, Slot, Source, StateId, Transition};
use crate::answer::AnswerSet;
use crate::store::{FactStore, Tuple};
use crate::symbol::Symbol;
use crate::{Error, Result};

type FxIndexSet<T> = IndexSet<T, BuildHasherDefault<FxHasher>>;

type Row = Rc<[Symbol]>;

#[derive(PartialEq, Eq, Hash)]
struct Instance(StateId, Row);

/// Borrowed form of [`Instance`], hashing identically, so that duplicate
/// targets are found without allocating.
#[derive(Hash)]
struct InstanceRef<'b>(StateId, &'b [Symbol]);

impl Equivalent<Instance> for InstanceRef<'_> {
    fn equivalent(&self, key: &Instance) -> bool {
        self.0 == key.0 && *self.1 == *key.1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Distinct state instances created.
    pub instances: usize,
    /// Distinct answer tuples over all channels.
    pub answers: usize,
}

#[derive(Default)]
struct ChannelData {
    tuples: FxIndexSet<Row>,
    /// Tuple indices per value of the bound positions.
    by_key: FxHashMap<Tuple, Vec<u32>>,
    /// Waiting (instance, completion transition) pairs per key.
    consumers: FxHashMap<Tuple, Vec<(u32, u32)>>,
}

enum Event {
    Instance(usize),
    Answer(usize, usize),
}

struct Runtime<'a> {
    a: &'a Automaton,
    store: &'a FactStore,
    channel_ids: FxHashMap<&'a Channel, usize>,
    channels: Vec<ChannelData>,
    /// Per channel, the bound positions of its pattern.
    bound_positions: Vec<Vec<usize>>,
    completion_channel: Vec<usize>,
    answer_channel: Vec<usize>,
    instances: FxIndexSet<Instance>,
    agenda: VecDeque<Event>,
    /// Scratch space for keys and rows under construction.
    buf: Vec<Symbol>,
    key: Vec<Symbol>,
}

fn eval(src: Source, params: &[Symbol], tuple: &[Symbol]) -> Symbol {
    match src {
        Source::Param(s) => params[s as usize],
        Source::Const(c) => c,
        Source::Arg(j) => tuple[j],
    }
}

fn guards_hold(guards: &[(Slot, Symbol)], params: &[Symbol]) -> bool {
    guards.iter().all(|(s, c)| params[*s as usize] == *c)
}

fn enabled(t: &Transition, params: &[Symbol]) -> bool {
    t.when.is_empty() || t.when.iter().any(|g| guards_hold(g, params))
}

impl<'a> Runtime<'a> {
    fn new(a: &'a Automaton, store: &'a FactStore) -> Self {
        let mut channel_ids: FxHashMap<&Channel, usize> = FxHashMap::default();
        let mut bound_positions = Vec::new();
        let all = a
            .completions
            .iter()
            .filter_map(|t| match &t.input {
                Input::Answer(c) => Some(c),
                Input::Scan(_) => None,
            })
            .chain(a.answers.iter().map(|d| &d.channel))
            .chain(std::iter::once(&a.goal.channel));
        for c in all {
            if !channel_ids.contains_key(c) {
                channel_ids.insert(c, channel_ids.len());
                bound_positions.push(c.pattern.bound_positions().collect());
            }
        }
        let completion_channel = a
            .completions
            .iter()
            .map(|t| match &t.input {
                Input::Answer(c) => channel_ids[c],
                Input::Scan(_) => unreachable!("completions read answers"),
            })
            .collect();
        let answer_channel = a.answers.iter().map(|d| channel_ids[&d.channel]).collect();
        let channels = (0..channel_ids.len()).map(|_| ChannelData::default()).collect();
        Runtime {
            a,
            store,
            channel_ids,
            channels,
            bound_positions,
            completion_channel,
            answer_channel,
            instances: FxIndexSet::default(),
            agenda: VecDeque::new(),
            buf: Vec::new(),
            key: Vec::new(),
        }
    }

    fn add_instance(&mut self, state: StateId, params: &[Symbol]) {
        if self.instances.contains(&InstanceRef(state, params)) {
            return;
        }
        let (id, _) = self.instances.insert_full(Instance(state, params.into()));
        self.agenda.push_back(Event::Instance(id));
    }

    fn add_answer(&mut self, ch: usize, tuple: &[Symbol]) {
        let data = &mut self.channels[ch];
        if data.tuples.contains(tuple) {
            return;
        }
        let (idx, _) = data.tuples.insert_full(tuple.into());
        self.key.clear();
        self.key
            .extend(self.bound_positions[ch].iter().map(|&i| tuple[i]));
        match data.by_key.get_mut(self.key.as_slice()) {
            Some(ids) => ids.push(idx as u32),
            None => {
                data.by_key.insert(self.key.as_slice().into(), vec![idx as u32]);
            }
        }
        self.agenda.push_back(Event::Answer(ch, idx));
    }

    /// Apply transition `t` from an instance with `params` to `tuple`.
    fn fire(&mut self, t: &Transition, params: &[Symbol], tuple: &[Symbol]) {
        if t.compare
            .iter()
            .any(|(pos, src)| tuple[*pos] != eval(*src, params, tuple))
        {
            return;
        }
        let mut target = std::mem::take(&mut self.buf);
        target.clear();
        target.extend(t.assign.iter().map(|s| eval(*s, params, tuple)));
        self.add_instance(t.to, &target);
        self.buf = target;
    }

    fn on_instance(&mut self, id: usize) -> Result<()> {
        let a = self.a;
        let Instance(sid, params) = &self.instances[id];
        let (sid, params) = (*sid, Rc::clone(params));
        let state = &a.states[sid];
        for &d in &state.answers {
            let decl = &a.answers[d];
            if guards_hold(&decl.when, &params) {
                let tuple: Vec<Symbol> = decl.proj.iter().map(|s| eval(*s, &params, &[])).collect();
                self.add_answer(self.answer_channel[d], &tuple);
            }
        }
        // Transitions split from one group read the same facts; look them up once.
        let mut fetched: Option<(usize, Vec<&[Symbol]>)> = None;
        for &ti in &state.scans {
            let t = &a.scans[ti];
            if !enabled(t, &params) {
                continue;
            }
            let reuse = matches!(&fetched, Some((prev, _)) if {
                let p = &a.scans[*prev];
                p.input == t.input && p.pattern == t.pattern && p.bound == t.bound
            });
            if !reuse {
                let key: Vec<Symbol> = t.bound.iter().map(|s| eval(*s, &params, &[])).collect();
                let Input::Scan(pred) = t.input else {
                    unreachable!()
                };
                fetched = Some((ti, self.store.lookup(pred, &t.pattern, &key)?.collect()));
            }
            let (_, facts) = fetched.as_ref().expect("fetched above");
            for f in facts {
                self.fire(t, &params, f);
            }
        }
        for &ti in &state.completions {
            let t = &a.completions[ti];
            if !enabled(t, &params) {
                continue;
            }
            let key: Tuple = t.bound.iter().map(|s| eval(*s, &params, &[])).collect();
            let ch = self.completion_channel[ti];
            let known = self.channels[ch].by_key.get(&key).cloned().unwrap_or_default();
            self.channels[ch]
                .consumers
                .entry(key)
                .or_default()
                .push((id as u32, ti as u32));
            for idx in known {
                let tuple = Rc::clone(&self.channels[ch].tuples[idx as usize]);
                self.fire(t, &params, &tuple);
            }
        }
        Ok(())
    }

    fn on_answer(&mut self, ch: usize, idx: usize) {
        let tuple = Rc::clone(&self.channels[ch].tuples[idx]);
        self.key.clear();
        self.key
            .extend(self.bound_positions[ch].iter().map(|&i| tuple[i]));
        let Some(waiting) = self.channels[ch].consumers.get(self.key.as_slice()).cloned() else {
            return;
        };
        let a = self.a;
        for (inst, ti) in waiting {
            let params = Rc::clone(&self.instances[inst as usize].1);
            self.fire(&a.completions[ti as usize], &params, &tuple);
        }
    }
}

/// Execute `a` against `store` for the given query constants.
pub fn run_automaton(a: &Automaton, store: &FactStore, query_constants: &[Symbol]) -> Result<AnswerSet> {
    run_with_stats(a, store, query_constants).map(|(ans, _)| ans)
}

pub fn run_with_stats(
    a: &Automaton,
    store: &FactStore,
    query_constants: &[Symbol],
) -> Result<(AnswerSet, RunStats)> {
    if query_constants.len() != a.init_params.len() {
        return Err(Error::QueryArity {
            expected: a.init_params.len(),
            found: query_constants.len(),
        });
    }
    let mut rt = Runtime::new(a, store);
    let init: Vec<Symbol> = a.init_assign.iter().map(|&i| query_constants[i]).collect();
    rt.add_instance(a.initial, &init);
    while let Some(ev) = rt.agenda.pop_front() {
        match ev {
            Event::Instance(id) => rt.on_instance(id)?,
            Event::Answer(ch, idx) => rt.on_answer(ch, idx),
        }
    }
    // Goal answers: tuples of the query's channel whose bound positions carry
    // the query constants, projected onto the query variables.
    let ch = rt.channel_ids[&a.goal.channel];
    let init: Vec<Symbol> = a.init_assign.iter().map(|&i| query_constants[i]).collect();
    let key: Tuple = a
        .goal
        .args
        .iter()
        .filter_map(|s| match s {
            Source::Param(p) => Some(init[*p as usize]),
            _ => None,
        })
        .collect();
    let var_positions: Vec<usize> = a
        .goal
        .args
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s, Source::Arg(_)))
        .map(|(i, _)| i)
        .collect();
    let answers: AnswerSet = rt.channels[ch]
        .by_key
        .get(&key)
        .into_iter()
        .flatten()
        .map(|&idx| {
            let t = &rt.channels[ch].tuples[idx as usize];
            var_positions.iter().map(|&i| t[i]).collect()
        })
        .collect();
    let stats = RunStats {
        instances: rt.instances.len(),
        answers: rt.channels.iter().map(|c| c.tuples.len()).sum(),
    };
    Ok((answers, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::build_automaton;
    use crate::ir::{parse_program, Pred};
    use crate::seminaive::answer_query;

    const ANCESTOR: &str =
        ".edb par/2.\nanc(X,Y) :- par(X,Y).\nanc(X,Y) :- anc(X,Z), par(Z,Y).\n?- anc(a,Y).";

    fn sym(s: &str) -> Symbol {
        Symbol::intern(s)
    }

    #[test]
    fn ancestor_answers() {
        let p = parse_program(ANCESTOR).unwrap();
        let a = build_automaton(&p).unwrap();
        let mut b = FactStore::builder(&p.edb);
        b.insert_names(Pred::new("par", 2), &["a", "b"]).unwrap();
        b.insert_names(Pred::new("par", 2), &["b", "c"]).unwrap();
        let s = b.build();
        let got = run_automaton(&a, &s, &[sym("a")]).unwrap();
        assert_eq!(got.to_string(), "b\nc\n");
        assert_eq!(got, answer_query(&p, &s).unwrap());
        assert_eq!(run_automaton(&a, &s, &[sym("b")]).unwrap().to_string(), "c\n");
    }

    #[test]
    fn empty_store_and_arity() {
        let p = parse_program(ANCESTOR).unwrap();
        let a = build_automaton(&p).unwrap();
        let s = FactStore::empty(&p.edb);
        assert!(run_automaton(&a, &s, &[sym("a")]).unwrap().is_empty());
        assert!(matches!(
            run_automaton(&a, &s, &[]),
            Err(Error::QueryArity {
                expected: 1,
                found: 0
            })
        ));
    }

    #[test]
    fn same_generation() {
        let p = parse_program(".edb up/2.\n.edb down/2.\n.edb flat/2.\nsg(X,Y) :- flat(X,Y).\nsg(X,Y) :- up(X,U), sg(U,V), down(V,Y).\n?- sg(a,Y).").unwrap();
        let mut b = FactStore::builder(&p.edb);
        b.insert_names(Pred::new("up", 2), &["a", "b"]).unwrap();
        b.insert_names(Pred::new("down", 2), &["b", "c"]).unwrap();
        b.insert_names(Pred::new("flat", 2), &["b", "b"]).unwrap();
        let s = b.build();
        let a = build_automaton(&p).unwrap();
        assert_eq!(run_automaton(&a, &s, &[sym("a")]).unwrap().to_string(), "c\n");
    }

    #[test]
    fn boolean_query_and_unit_rule() {
        let p = parse_program(".edb e/1.\nok :- e(a).\nyes.\n?- ok.").unwrap();
        let a = build_automaton(&p).unwrap();
        let mut b = FactStore::builder(&p.edb);
        b.insert_names(Pred::new("e", 1), &["a"]).unwrap();
        assert_eq!(run_automaton(&a, &b.build(), &[]).unwrap().to_string(), "()\n");
        assert!(run_automaton(&a, &FactStore::empty(&p.edb), &[])
            .unwrap()
            .is_empty());

        let p = parse_program(".edb e/1.\nyes.\n?- yes.").unwrap();
        let a = build_automaton(&p).unwrap();
        assert_eq!(
            run_automaton(&a, &FactStore::empty(&p.edb), &[]).unwrap().len(),
            1
        );
    }
}
