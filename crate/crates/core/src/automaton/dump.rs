use std::fmt::Write;

use super::{Automaton, Binding, Input, ItemSchema, Slot, Source, Transition};
use crate::symbol::Symbol;

fn source(s: Source) -> String {
    match s {
        Source::Param(p) => format!("P{p}"),
        Source::Const(c) => c.to_string(),
        Source::Arg(j) => format!("F{j}"),
    }
}

fn list(items: impl IntoIterator<Item = String>) -> String {
    items.into_iter().collect::<Vec<_>>().join(", ")
}

fn guards(g: &[(Slot, Symbol)]) -> String {
    list(g.iter().map(|(s, c)| format!("P{s}={c}")))
}

fn item(a: &Automaton, it: &ItemSchema) -> String {
    let info = &a.rules[it.rule];
    let vars = list(it.binding.iter().zip(&info.var_names).map(|(b, n)| match b {
        Binding::Unbound => format!("{n}=_"),
        Binding::Param(s) => format!("{n}=P{s}"),
        Binding::Const(c) => format!("{n}={c}"),
    }));
    format!(
        "r{}@{}/{} {{{vars}}} guards{{{}}}",
        it.rule,
        it.dot,
        it.call,
        guards(&it.guards)
    )
}

fn transition(kind: &str, t: &Transition) -> String {
    let label = match &t.input {
        Input::Scan(p) => format!("{}/{}", p.name, t.pattern),
        Input::Answer(c) => c.predicate_name(),
    };
    let mut line = format!(
        "{kind} s{} --{label}[bound:{}]--> s{} assign[{}] cmp[{}]",
        t.from,
        list(t.bound.iter().map(|s| source(*s))),
        t.to,
        list(
            t.assign
                .iter()
                .enumerate()
                .map(|(i, s)| format!("P{i}<-{}", source(*s)))
        ),
        list(t.compare.iter().map(|(p, s)| format!("F{p}={}", source(*s)))),
    );
    if !t.when.is_empty() {
        let alts: Vec<String> = t.when.iter().map(|g| guards(g)).collect();
        let _ = write!(line, " when[{}]", alts.join(" | "));
    }
    line
}

pub(super) fn dump(a: &Automaton) -> String {
    let mut out = String::from("automaton v1\n");
    for (i, r) in a.rules.iter().enumerate() {
        let _ = writeln!(out, "rule r{i}: {}", r.text);
    }
    let _ = writeln!(
        out,
        "init s{} [{}]",
        a.initial,
        list(
            a.init_assign
                .iter()
                .enumerate()
                .map(|(slot, &q)| format!("P{slot}<-{}", a.init_params[q]))
        )
    );
    let _ = writeln!(
        out,
        "goal {}[{}]",
        a.goal.channel.predicate_name(),
        list(a.goal.args.iter().map(|s| match s {
            Source::Arg(i) => format!("V{i}"),
            other => source(*other),
        }))
    );
    for s in &a.states {
        let _ = writeln!(out, "state s{} params {}", s.id, s.param_count);
        for it in &s.items {
            let _ = writeln!(out, "  {}", item(a, it));
        }
        for &t in &s.scans {
            let _ = writeln!(out, "  {}", transition("scan", &a.scans[t]));
        }
        for &t in &s.completions {
            let _ = writeln!(out, "  {}", transition("complete", &a.completions[t]));
        }
        for &d in &s.answers {
            let d = &a.answers[d];
            let _ = write!(
                out,
                "  ans {}/{} from s{} proj[{}]",
                d.channel.pred.name,
                d.channel.pattern,
                d.state,
                list(d.proj.iter().map(|s| source(*s)))
            );
            if !d.when.is_empty() {
                let _ = write!(out, " when[{}]", guards(&d.when));
            }
            out.push('\n');
        }
    }
    out
}
