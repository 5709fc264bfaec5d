//! Side-by-side comparison of all engines on one program and fact store.

use std::fmt;

use crate::answer::{fmt_tuple, AnswerSet};
use crate::automaton::{build_automaton_with, emit_rewritten_program, run_automaton, DEFAULT_STATE_CAP};
use crate::ir::Program;
use crate::store::FactStore;
use crate::{earley, seminaive, Result};

pub const ENGINES: [&str; 4] = ["seminaive", "earley", "automaton", "rewritten"];

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub state_cap: usize,
    /// Drop one answer from the named engine's result; used to exercise the
    /// disagreement report.
    pub sabotage: Option<String>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            state_cap: DEFAULT_STATE_CAP,
            sabotage: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    /// One answer set per entry of [`ENGINES`], in that order.
    pub results: Vec<(&'static str, AnswerSet)>,
}

impl CheckReport {
    pub fn agree(&self) -> bool {
        self.results.windows(2).all(|w| w[0].1 == w[1].1)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.agree() {
            return writeln!(
                f,
                "OK: {} engines agree ({} answers)",
                self.results.len(),
                self.results[0].1.len()
            );
        }
        writeln!(f, "MISMATCH: engines disagree")?;
        for (name, answers) in &self.results {
            writeln!(f, "  {name}: {} answers", answers.len())?;
        }
        for i in 0..self.results.len() {
            for j in i + 1..self.results.len() {
                let (a, sa) = &self.results[i];
                let (b, sb) = &self.results[j];
                if sa == sb {
                    continue;
                }
                writeln!(f, "{a} vs {b}:")?;
                for t in sa.difference(sb) {
                    f.write_str("  < ")?;
                    fmt_tuple(f, t)?;
                    f.write_str("\n")?;
                }
                for t in sb.difference(sa) {
                    f.write_str("  > ")?;
                    fmt_tuple(f, t)?;
                    f.write_str("\n")?;
                }
            }
        }
        Ok(())
    }
}

/// Run every engine and collect their answers. Errors of any engine abort.
pub fn check(p: &Program, store: &FactStore, opts: &CheckOptions) -> Result<CheckReport> {
    let oracle = seminaive::answer_query(p, store)?;
    let interp = earley::run(p, store, &earley::Options::default(), None)?.0;
    let a = build_automaton_with(p, opts.state_cap)?;
    let compiled = run_automaton(&a, store, &p.query_constants())?;
    let rewritten = seminaive::answer_query(&emit_rewritten_program(&a), store)?;
    let mut results: Vec<(&'static str, AnswerSet)> = ENGINES
        .into_iter()
        .zip([oracle, interp, compiled, rewritten])
        .collect();
    if let Some(target) = &opts.sabotage {
        if let Some((_, set)) = results.iter_mut().find(|(n, _)| n == target) {
            let first: Option<Box<[crate::Symbol]>> = set.iter().next().map(Into::into);
            *set = match first {
                Some(t) => set.iter().filter(|x| **x != *t).map(Into::into).collect(),
                None => [Box::from([crate::Symbol::intern("bogus")])]
                    .into_iter()
                    .collect(),
            };
        }
    }
    Ok(CheckReport { results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_program, Pred};

    fn ancestor() -> (Program, FactStore) {
        let p = parse_program(
            ".edb par/2.\nanc(X,Y) :- par(X,Y).\nanc(X,Y) :- anc(X,Z), par(Z,Y).\n?- anc(a,Y).",
        )
        .unwrap();
        let mut b = FactStore::builder(&p.edb);
        b.insert_names(Pred::new("par", 2), &["a", "b"]).unwrap();
        b.insert_names(Pred::new("par", 2), &["b", "c"]).unwrap();
        let s = b.build();
        (p, s)
    }

    #[test]
    fn ancestor_agrees() {
        let (p, s) = ancestor();
        let r = check(&p, &s, &CheckOptions::default()).unwrap();
        assert!(r.agree());
        assert_eq!(r.to_string(), "OK: 4 engines agree (2 answers)\n");
    }

    #[test]
    fn sabotage_is_reported() {
        let (p, s) = ancestor();
        let opts = CheckOptions {
            sabotage: Some("automaton".into()),
            ..Default::default()
        };
        let r = check(&p, &s, &opts).unwrap();
        assert!(!r.agree());
        let text = r.to_string();
        assert!(text.starts_with("MISMATCH"), "{text}");
        assert!(text.contains("seminaive vs automaton:\n  < b\n"), "{text}");
    }
}
