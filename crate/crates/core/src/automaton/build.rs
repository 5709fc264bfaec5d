use std::collections::{BTreeMap, HashMap, VecDeque};

use super::closure::{call_args, closure, CompiledProgram, GOAL};
use super::{
    canonicalize, AnswerDecl, Automaton, Binding, Channel, GoalDecl, Input, ItemSchema, RuleInfo, Slot,
    Source, State, StateId, Transition,
};
use crate::ir::numbered::Arg;
use crate::ir::{Program, Rule, Term};
use crate::store::BindingPattern;
use crate::symbol::Symbol;
use crate::{ensure_valid, Error, Result};

pub const DEFAULT_STATE_CAP: usize = 100_000;

/// Shape of a selected literal's argument: bound to a known source, or free
/// and first seen at the given position (repeated free variables point back to
/// their first position).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Shape {
    Bound(Source),
    Free(usize),
}

fn shape_of(lit_args: &[Arg], call: &[Binding]) -> Vec<Shape> {
    let mut out: Vec<Shape> = Vec::with_capacity(call.len());
    for (pos, (a, b)) in lit_args.iter().zip(call).enumerate() {
        out.push(match b {
            Binding::Param(s) => Shape::Bound(Source::Param(*s)),
            Binding::Const(c) => Shape::Bound(Source::Const(*c)),
            Binding::Unbound => {
                let first = lit_args[..pos].iter().position(|x| x == a).unwrap_or(pos);
                Shape::Free(first)
            }
        });
    }
    out
}

fn reserved(name: &str) -> bool {
    name == GOAL
        || name.starts_with("ans_")
        || (name.len() > 1 && name.starts_with('s') && name[1..].bytes().all(|b| b.is_ascii_digit()))
}

fn check_names(p: &Program) -> Result<()> {
    let names = p
        .edb
        .iter()
        .map(|d| d.name)
        .chain(
            p.rules
                .iter()
                .flat_map(|r| std::iter::once(&r.head).chain(&r.body).map(|a| a.name)),
        )
        .chain(std::iter::once(p.query.name));
    for n in names {
        if reserved(n.as_str()) {
            return Err(Error::ReservedName(n.as_str().to_owned()));
        }
    }
    Ok(())
}

/// Partition advanced items by the exact set of source-state slots (below
/// `k`) they mention. Each part becomes its own target state, so a state never
/// carries more parameters than one rule has variables plus one literal has
/// arguments, and the construction is finite.
fn components(kernel: &[ItemSchema], k: Slot) -> Vec<Vec<usize>> {
    let mut parts: BTreeMap<Vec<Slot>, Vec<usize>> = BTreeMap::new();
    for (i, item) in kernel.iter().enumerate() {
        let mut slots: Vec<Slot> = item.slots().filter(|&s| s < k).collect();
        slots.sort_unstable();
        slots.dedup();
        parts.entry(slots).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = parts.into_values().collect();
    out.sort();
    out
}

struct Builder<'a> {
    prog: &'a CompiledProgram,
    cap: usize,
    states: Vec<State>,
    index: HashMap<Vec<ItemSchema>, StateId>,
    kernels: HashMap<Vec<ItemSchema>, (StateId, BTreeMap<Slot, Slot>)>,
    queue: VecDeque<StateId>,
    scans: Vec<Transition>,
    completions: Vec<Transition>,
    answers: Vec<AnswerDecl>,
}

impl Builder<'_> {
    /// The state reached from `kernel`, with the renaming of kernel slots to
    /// state slots. Closure commutes with slot renaming, so targets are cached
    /// by canonical kernel.
    fn target(&mut self, kernel: &[ItemSchema]) -> Result<(StateId, BTreeMap<Slot, Slot>)> {
        let (canon_kernel, to_canon) = canonicalize(kernel);
        let (id, from_canon) = match self.kernels.get(&canon_kernel) {
            Some(hit) => hit.clone(),
            None => {
                let hit = self.intern(closure(canon_kernel.iter().cloned(), self.prog))?;
                self.kernels.insert(canon_kernel, hit.clone());
                hit
            }
        };
        let map = to_canon
            .into_iter()
            .map(|(old, mid)| (old, from_canon[&mid]))
            .collect();
        Ok((id, map))
    }

    /// Canonicalize, intern, and return the state id with the slot renaming.
    fn intern(&mut self, items: Vec<ItemSchema>) -> Result<(StateId, BTreeMap<Slot, Slot>)> {
        let (canon, map) = canonicalize(&items);
        if let Some(&id) = self.index.get(&canon) {
            return Ok((id, map));
        }
        let id = self.states.len();
        if id >= self.cap {
            return Err(Error::StateCapExceeded {
                cap: self.cap,
                reached: id + 1,
            });
        }
        self.states.push(State {
            id,
            param_count: map.len(),
            items: canon.clone(),
            scans: Vec::new(),
            completions: Vec::new(),
            answers: Vec::new(),
        });
        self.index.insert(canon, id);
        self.queue.push_back(id);
        Ok((id, map))
    }

    fn expand(&mut self, sid: StateId) -> Result<()> {
        let items = self.states[sid].items.clone();
        let k = self.states[sid].param_count as Slot;
        let goal = self.prog.goal_rule();

        for item in &items {
            let rule = &self.prog.rules[item.rule];
            if item.rule == goal || item.dot < rule.body.len() {
                continue;
            }
            let proj = rule
                .head
                .args
                .iter()
                .map(|a| match a {
                    Arg::Const(c) => Source::Const(*c),
                    Arg::Var(v) => match item.binding[*v] {
                        Binding::Param(s) => Source::Param(s),
                        Binding::Const(c) => Source::Const(c),
                        Binding::Unbound => unreachable!("range restriction binds head variables"),
                    },
                })
                .collect();
            let decl = AnswerDecl {
                channel: Channel {
                    pred: rule.head.pred,
                    pattern: item.call.clone(),
                },
                state: sid,
                proj,
                when: item.guards.clone(),
            };
            let dup = self.states[sid].answers.iter().any(|&i| self.answers[i] == decl);
            if !dup {
                self.states[sid].answers.push(self.answers.len());
                self.answers.push(decl);
            }
        }

        let mut groups: BTreeMap<(bool, crate::ir::Pred, Vec<Shape>), Vec<&ItemSchema>> = BTreeMap::new();
        for item in &items {
            if item.rule == goal {
                continue;
            }
            let Some(lit) = self.prog.selected(item) else {
                continue;
            };
            let call = call_args(lit, item);
            let shape = shape_of(&lit.args, &call);
            let is_scan = self.prog.is_edb(lit.pred);
            // Scans sort before completions.
            groups.entry((!is_scan, lit.pred, shape)).or_default().push(item);
        }

        for ((is_completion, pred, shape), members) in groups {
            let pattern = BindingPattern::new(shape.iter().map(|s| matches!(s, Shape::Bound(_))).collect());
            let mut kernel = Vec::with_capacity(members.len());
            for item in &members {
                let lit = self.prog.selected(item).expect("grouped items select a literal");
                let mut binding = item.binding.clone();
                for (pos, a) in lit.args.iter().enumerate() {
                    if let (Arg::Var(v), Shape::Free(first)) = (a, shape[pos]) {
                        binding[*v] = Binding::Param(k + first as Slot);
                    }
                }
                kernel.push(ItemSchema {
                    rule: item.rule,
                    dot: item.dot + 1,
                    call: item.call.clone(),
                    binding,
                    guards: item.guards.clone(),
                });
            }
            let bound: Vec<Source> = shape
                .iter()
                .filter_map(|s| match s {
                    Shape::Bound(src) => Some(*src),
                    Shape::Free(_) => None,
                })
                .collect();
            let compare: Vec<(usize, Source)> = shape
                .iter()
                .enumerate()
                .filter_map(|(pos, s)| match s {
                    Shape::Free(first) if *first != pos => Some((pos, Source::Arg(*first))),
                    _ => None,
                })
                .collect();
            let input = if is_completion {
                Input::Answer(Channel {
                    pred,
                    pattern: pattern.clone(),
                })
            } else {
                Input::Scan(pred)
            };
            for component in components(&kernel, k) {
                let part: Vec<ItemSchema> = component.iter().map(|&i| kernel[i].clone()).collect();
                let (to, map) = self.target(&part)?;
                let mut assign = vec![Source::Param(0); map.len()];
                for (&old, &new) in &map {
                    assign[new as usize] = if old < k {
                        Source::Param(old)
                    } else {
                        Source::Arg((old - k) as usize)
                    };
                }
                let when = if component.iter().any(|&i| members[i].guards.is_empty()) {
                    Vec::new()
                } else {
                    let mut w: Vec<_> = component.iter().map(|&i| members[i].guards.clone()).collect();
                    w.sort();
                    w.dedup();
                    w
                };
                let t = Transition {
                    from: sid,
                    input: input.clone(),
                    pattern: pattern.clone(),
                    bound: bound.clone(),
                    to,
                    assign,
                    compare: compare.clone(),
                    when,
                };
                if is_completion {
                    self.states[sid].completions.push(self.completions.len());
                    self.completions.push(t);
                } else {
                    self.states[sid].scans.push(self.scans.len());
                    self.scans.push(t);
                }
            }
        }
        Ok(())
    }
}

/// Compile `p` with the default state cap.
pub fn build_automaton(p: &Program) -> Result<Automaton> {
    build_automaton_with(p, DEFAULT_STATE_CAP)
}

/// Compile `p`, failing once more than `state_cap` states would be needed.
pub fn build_automaton_with(p: &Program, state_cap: usize) -> Result<Automaton> {
    ensure_valid(p)?;
    check_names(p)?;
    let prog = CompiledProgram::new(p);
    let mut b = Builder {
        prog: &prog,
        cap: state_cap,
        states: Vec::new(),
        index: HashMap::new(),
        kernels: HashMap::new(),
        queue: VecDeque::new(),
        scans: Vec::new(),
        completions: Vec::new(),
        answers: Vec::new(),
    };
    let goal_item = prog.goal_item();
    let (initial, init_map) = b.intern(closure([goal_item.clone()], &prog))?;
    while let Some(sid) = b.queue.pop_front() {
        b.expand(sid)?;
    }

    let mut init_assign = vec![0; init_map.len()];
    for (&old, &new) in &init_map {
        init_assign[new as usize] = old as usize;
    }
    let query_pattern = BindingPattern::new(p.query.args.iter().map(|t| !t.is_var()).collect());
    let mut var_index = 0;
    let args = goal_item
        .binding
        .iter()
        .map(|b| match b {
            Binding::Param(s) => Source::Param(init_map[s]),
            _ => {
                var_index += 1;
                Source::Arg(var_index - 1)
            }
        })
        .collect();
    let rules = prog
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| RuleInfo {
            text: if i == prog.goal_rule() {
                goal_rule_text(p)
            } else {
                p.rules[i].to_string()
            },
            var_names: r.names.clone(),
            body_len: r.body.len(),
        })
        .collect();
    Ok(Automaton {
        states: b.states,
        scans: b.scans,
        completions: b.completions,
        answers: b.answers,
        initial,
        init_params: p.query_constants(),
        init_assign,
        goal: GoalDecl {
            channel: Channel {
                pred: p.query.pred(),
                pattern: query_pattern,
            },
            args,
        },
        query: p.query.clone(),
        edb: p.edb.clone(),
        rules,
    })
}

fn goal_rule_text(p: &Program) -> String {
    let mut qc = 0;
    let body_args = p
        .query
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => Term::Var(*v),
            Term::Const(_) => {
                qc += 1;
                Term::Var(Symbol::intern(&format!("_Q{}", qc - 1)))
            }
        })
        .collect();
    let head = crate::ir::Atom::new(GOAL, p.query_vars().into_iter().map(Term::Var).collect());
    Rule::new(head, vec![crate::ir::Atom::new(p.query.name, body_args)]).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    const ANCESTOR: &str =
        ".edb par/2.\nanc(X,Y) :- par(X,Y).\nanc(X,Y) :- anc(X,Z), par(Z,Y).\n?- anc(a,Y).";

    #[test]
    fn ancestor_shape() {
        let a = build_automaton(&parse_program(ANCESTOR).unwrap()).unwrap();
        assert_eq!(a.initial, 0);
        assert_eq!(a.states[0].items.len(), 3);
        assert_eq!(a.states[0].param_count, 1);
        assert!(a.states.len() >= 2);
        let s0_scans: Vec<_> = a.states[0].scans.iter().map(|&i| &a.scans[i]).collect();
        assert_eq!(s0_scans.len(), 1);
        assert_eq!(s0_scans[0].pattern.to_string(), "bf");
        assert_eq!(s0_scans[0].bound, vec![Source::Param(0)]);
        assert!(a
            .answers
            .iter()
            .any(|d| d.channel.pred.name.as_str() == "anc" && d.channel.pattern.to_string() == "bf"));
        let s0_completions: Vec<_> = a.states[0]
            .completions
            .iter()
            .map(|&i| &a.completions[i])
            .collect();
        assert_eq!(s0_completions.len(), 1);
        assert_eq!(
            s0_completions[0].assign.len(),
            a.states[s0_completions[0].to].param_count
        );
    }

    #[test]
    fn single_edb_rule_has_two_states() {
        let p = parse_program(".edb e/1.\np(X) :- e(X).\n?- p(X).").unwrap();
        let a = build_automaton(&p).unwrap();
        assert_eq!(a.states.len(), 2);
    }

    #[test]
    fn deterministic() {
        let p = parse_program(ANCESTOR).unwrap();
        assert_eq!(
            build_automaton(&p).unwrap().dump(),
            build_automaton(&p).unwrap().dump()
        );
    }

    #[test]
    fn cap_and_reserved_names() {
        let p = parse_program(ANCESTOR).unwrap();
        assert!(matches!(
            build_automaton_with(&p, 1),
            Err(Error::StateCapExceeded { cap: 1, reached: 2 })
        ));
        for bad in ["s1", "goal", "ans_x"] {
            let p = parse_program(&format!(".edb e/1.\n{bad}(X) :- e(X).\n?- {bad}(X).")).unwrap();
            assert!(
                matches!(build_automaton(&p), Err(Error::ReservedName(_))),
                "{bad}"
            );
        }
        let p = parse_program(".edb e/1.\nsx(X) :- e(X).\n?- sx(X).").unwrap();
        assert!(build_automaton(&p).is_ok());
    }
}
