use super::closure::GOAL;
use super::{Automaton, Channel, Input, Slot, Source, StateId, Transition};
use crate::ir::{Atom, Pred, Program, Rule, Term};
use crate::symbol::Symbol;

fn var(prefix: char, i: usize) -> Term {
    Term::Var(Symbol::intern(&format!("{prefix}{i}")))
}

fn state_name(id: StateId) -> Symbol {
    Symbol::intern(&format!("s{id}"))
}

fn channel_name(c: &Channel) -> Symbol {
    Symbol::intern(&c.predicate_name())
}

/// Substitute guard constants for the guarded state variables `X<slot>`.
fn apply_guards(rule: &Rule, guards: &[(Slot, Symbol)]) -> Rule {
    let sub = |a: &Atom| {
        Atom::new(
            a.name,
            a.args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => guards
                        .iter()
                        .find(|(s, _)| var('X', *s as usize) == Term::Var(*v))
                        .map_or(t.clone(), |(_, c)| Term::Const(*c)),
                    c => c.clone(),
                })
                .collect(),
        )
    };
    Rule::new(sub(&rule.head), rule.body.iter().map(sub).collect())
}

fn guarded(rule: Rule, when: &[Vec<(Slot, Symbol)>]) -> Vec<Rule> {
    if when.is_empty() {
        vec![rule]
    } else {
        when.iter().map(|g| apply_guards(&rule, g)).collect()
    }
}

fn state_atom(a: &Automaton, id: StateId) -> Atom {
    Atom::new(
        state_name(id),
        (0..a.states[id].param_count).map(|i| var('X', i)).collect(),
    )
}

fn source_term(s: Source) -> Term {
    match s {
        Source::Param(p) => var('X', p as usize),
        Source::Const(c) => Term::Const(c),
        Source::Arg(j) => var('F', j),
    }
}

fn transition_rule(a: &Automaton, t: &Transition) -> Vec<Rule> {
    let (name, arity) = match &t.input {
        Input::Scan(p) => (p.name, p.arity),
        Input::Answer(c) => (channel_name(c), c.pred.arity),
    };
    let mut bound = t.bound.iter();
    let args = (0..arity)
        .map(|pos| {
            if t.pattern.is_bound(pos) {
                source_term(*bound.next().expect("one source per bound position"))
            } else {
                match t.compare.iter().find(|(p, _)| *p == pos) {
                    Some((_, src)) => source_term(*src),
                    None => var('F', pos),
                }
            }
        })
        .collect();
    let head = Atom::new(
        state_name(t.to),
        t.assign.iter().map(|s| source_term(*s)).collect(),
    );
    let rule = Rule::new(head, vec![state_atom(a, t.from), Atom::new(name, args)]);
    guarded(rule, &t.when)
}

/// The automaton as a Datalog program: one predicate per state, one rule per
/// transition and answer declaration, and a `goal` predicate for the query.
/// Evaluating it bottom-up with the original facts yields the same answers as
/// running the automaton.
pub fn emit_rewritten_program(a: &Automaton) -> Program {
    let mut rules = Vec::new();
    let seed: Vec<Term> = a
        .init_assign
        .iter()
        .map(|&i| Term::Const(a.init_params[i]))
        .collect();
    rules.push(Rule::fact(Atom::new(state_name(a.initial), seed)));
    for t in &a.scans {
        rules.extend(transition_rule(a, t));
    }
    for t in &a.completions {
        rules.extend(transition_rule(a, t));
    }
    for d in &a.answers {
        let head = Atom::new(
            channel_name(&d.channel),
            d.proj.iter().map(|s| source_term(*s)).collect(),
        );
        let rule = Rule::new(head, vec![state_atom(a, d.state)]);
        rules.push(apply_guards(&rule, &d.when));
    }
    let query_vars: Vec<Term> = a
        .goal
        .args
        .iter()
        .filter_map(|s| match s {
            Source::Arg(i) => Some(var('V', *i)),
            _ => None,
        })
        .collect();
    let goal_args = a
        .goal
        .args
        .iter()
        .map(|s| match s {
            Source::Arg(i) => var('V', *i),
            other => source_term(*other),
        })
        .collect();
    rules.push(Rule::new(
        Atom::new(GOAL, query_vars.clone()),
        vec![
            state_atom(a, a.initial),
            Atom::new(channel_name(&a.goal.channel), goal_args),
        ],
    ));
    let mut edb: Vec<Pred> = a.edb.clone();
    edb.sort();
    Program {
        edb,
        rules,
        query: Atom::new(GOAL, query_vars),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{build_automaton, run_automaton};
    use crate::ir::{parse_program, print_program};
    use crate::seminaive::answer_query;
    use crate::store::FactStore;

    const ANCESTOR: &str =
        ".edb par/2.\nanc(X,Y) :- par(X,Y).\nanc(X,Y) :- anc(X,Z), par(Z,Y).\n?- anc(a,Y).";

    #[test]
    fn ancestor_rewritten_shape_and_semantics() {
        let p = parse_program(ANCESTOR).unwrap();
        let a = build_automaton(&p).unwrap();
        let r = emit_rewritten_program(&a);
        let text = print_program(&r);
        assert!(text.contains("s0(a)."), "{text}");
        assert!(
            text.lines()
                .any(|l| l.starts_with("ans_anc_bf(X0,X1) :- s") && l.ends_with("(X0,X1).")),
            "{text}"
        );
        let reparsed = parse_program(&text).unwrap();
        assert_eq!(print_program(&reparsed), text);

        let mut b = FactStore::builder(&p.edb);
        b.insert_names(Pred::new("par", 2), &["a", "b"]).unwrap();
        b.insert_names(Pred::new("par", 2), &["b", "c"]).unwrap();
        let s = b.build();
        let via_rewrite = answer_query(&r, &s).unwrap();
        assert_eq!(
            via_rewrite,
            run_automaton(&a, &s, &[Symbol::intern("a")]).unwrap()
        );
        assert_eq!(via_rewrite.to_string(), "b\nc\n");
    }

    #[test]
    fn no_transitions_no_answers() {
        let p = parse_program(".edb e/1.\np(X) :- q(X).\nq(X) :- p(X).\n?- p(X).").unwrap();
        let a = build_automaton(&p).unwrap();
        assert!(a.scans.is_empty());
        let r = emit_rewritten_program(&a);
        let s = FactStore::empty(&p.edb);
        assert!(answer_query(&r, &s).unwrap().is_empty());
    }
}
