//! Context-free grammars as Datalog recognizers.
//!
//! Grammar lines have the form `N -> X1 X2 …`, with `|` separating
//! alternatives and `.` or `ε` standing for the empty sequence. The head of
//! the first line is the start symbol; symbols that head no production are
//! terminals and match one input character each.
//!
//! A nonterminal `N` becomes the predicate `n/2` over input positions:
//! `N -> X1 … Xk` turns into `n(I0,Ik) :- x1(I0,I1), …, xk(Ik-1,Ik)`, with
//! terminals read from extensional `tok_<t>/2` facts. Empty productions become
//! `n(I,I) :- pos(I)`, so every rule stays range restricted. The query asks
//! for `s(0,len)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::ir::{Atom, Pred, Program, Rule, Term};
use crate::store::FactStore;
use crate::symbol::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrammarError {
    #[error("grammar has no productions")]
    Empty,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("nonterminals {0} and {1} map to the same predicate")]
    NameClash(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub head: String,
    pub body: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub start: String,
    pub productions: Vec<Production>,
}

impl Grammar {
    pub fn parse(text: &str) -> Result<Grammar, GrammarError> {
        let mut productions = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
                continue;
            }
            let syntax = |message: &str| GrammarError::Syntax {
                line: i + 1,
                message: message.to_owned(),
            };
            let (head, rhs) = line.split_once("->").ok_or_else(|| syntax("expected `->`"))?;
            let head = head.trim();
            if head.is_empty() || head.contains(char::is_whitespace) {
                return Err(syntax("expected a single nonterminal before `->`"));
            }
            for alt in rhs.split('|') {
                let syms: Vec<&str> = alt.split_whitespace().collect();
                let body = match syms.as_slice() {
                    ["."] | ["ε"] => Vec::new(),
                    [] => return Err(syntax("empty alternative; write `.` for the empty sequence")),
                    s => s.iter().map(|s| s.to_string()).collect(),
                };
                productions.push(Production {
                    head: head.to_owned(),
                    body,
                });
            }
        }
        let start = productions.first().ok_or(GrammarError::Empty)?.head.clone();
        Ok(Grammar { start, productions })
    }

    pub fn nonterminals(&self) -> BTreeSet<&str> {
        self.productions.iter().map(|p| p.head.as_str()).collect()
    }

    pub fn terminals(&self) -> BTreeSet<&str> {
        let nts = self.nonterminals();
        self.productions
            .iter()
            .flat_map(|p| p.body.iter().map(String::as_str))
            .filter(|s| !nts.contains(s))
            .collect()
    }
}

/// A recognizer program for one grammar and one input string.
#[derive(Debug, Clone)]
pub struct Recognizer {
    pub program: Program,
    pub facts: Vec<(Pred, Vec<Symbol>)>,
}

impl Recognizer {
    pub fn fact_store(&self) -> FactStore {
        let mut b = FactStore::builder(&self.program.edb);
        for (pred, args) in &self.facts {
            b.insert(*pred, args).expect("facts match the declarations");
        }
        b.build()
    }

    /// The facts in `.dl` syntax, one per line.
    pub fn facts_text(&self) -> String {
        let mut out = String::new();
        for (pred, args) in &self.facts {
            let atom = Atom::new(pred.name, args.iter().map(|c| Term::Const(*c)).collect());
            let _ = writeln!(out, "{atom}.");
        }
        out
    }
}

fn token_pred(t: &str) -> Pred {
    let mut name = String::from("tok_");
    for c in t.chars() {
        if c.is_ascii_alphanumeric() {
            name.push(c);
        } else {
            let _ = write!(name, "_{:x}_", c as u32);
        }
    }
    Pred::new(name.as_str(), 2)
}

fn nonterminal_name(n: &str) -> String {
    let lower = n.to_lowercase();
    let clashes = lower == "pos"
        || lower == "goal"
        || lower.starts_with("tok_")
        || lower.starts_with("ans_")
        || (lower.len() > 1 && lower.starts_with('s') && lower[1..].bytes().all(|b| b.is_ascii_digit()));
    if clashes {
        format!("nt_{lower}")
    } else {
        lower
    }
}

fn position(i: usize) -> Symbol {
    Symbol::intern(&i.to_string())
}

/// Encode `grammar` and `input` (one token per character).
pub fn recognizer(grammar: &Grammar, input: &str) -> Result<Recognizer, GrammarError> {
    let mut names: HashMap<&str, Symbol> = HashMap::new();
    let mut taken: HashMap<String, &str> = HashMap::new();
    for n in grammar.nonterminals() {
        let name = nonterminal_name(n);
        if let Some(other) = taken.get(&name) {
            return Err(GrammarError::NameClash(other.to_string(), n.to_owned()));
        }
        taken.insert(name.clone(), n);
        names.insert(n, Symbol::intern(&name));
    }
    let pos = Pred::new("pos", 1);
    let mut edb: Vec<Pred> = grammar.terminals().into_iter().map(token_pred).collect();
    edb.push(pos);
    edb.sort();

    let var = |i: usize| Term::Var(Symbol::intern(&format!("I{i}")));
    let rules = grammar
        .productions
        .iter()
        .map(|p| {
            let head_name = names[p.head.as_str()];
            if p.body.is_empty() {
                return Rule::new(
                    Atom::new(head_name, vec![var(0), var(0)]),
                    vec![Atom::new(pos.name, vec![var(0)])],
                );
            }
            let body = p
                .body
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let name = names
                        .get(s.as_str())
                        .copied()
                        .unwrap_or_else(|| token_pred(s).name);
                    Atom::new(name, vec![var(i), var(i + 1)])
                })
                .collect();
            Rule::new(Atom::new(head_name, vec![var(0), var(p.body.len())]), body)
        })
        .collect();

    let chars: Vec<char> = input.chars().collect();
    let query = Atom::new(
        names[grammar.start.as_str()],
        vec![Term::Const(position(0)), Term::Const(position(chars.len()))],
    );
    let mut facts = Vec::new();
    for (i, c) in chars.iter().enumerate() {
        let pred = token_pred(&c.to_string());
        if edb.contains(&pred) {
            facts.push((pred, vec![position(i), position(i + 1)]));
        }
    }
    for i in 0..=chars.len() {
        facts.push((pos, vec![position(i)]));
    }
    Ok(Recognizer {
        program: Program { edb, rules, query },
        facts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_program, print_program};
    use crate::seminaive::answer_query;

    const ANBN: &str = "S -> a S b | .\n";

    fn accepts(g: &str, input: &str) -> bool {
        let r = recognizer(&Grammar::parse(g).unwrap(), input).unwrap();
        !answer_query(&r.program, &r.fact_store()).unwrap().is_empty()
    }

    #[test]
    fn parses_alternatives_and_epsilon() {
        let g = Grammar::parse(ANBN).unwrap();
        assert_eq!(g.start, "S");
        assert_eq!(g.productions.len(), 2);
        assert!(g.productions[1].body.is_empty());
        assert_eq!(g.terminals().into_iter().collect::<Vec<_>>(), vec!["a", "b"]);
        assert_eq!(
            Grammar::parse("S -> ε").unwrap().productions[0].body,
            Vec::<String>::new()
        );
    }

    #[test]
    fn grammar_errors() {
        assert_eq!(Grammar::parse("# nothing\n"), Err(GrammarError::Empty));
        assert!(matches!(
            Grammar::parse("S a b"),
            Err(GrammarError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            Grammar::parse("S -> a |"),
            Err(GrammarError::Syntax { .. })
        ));
    }

    #[test]
    fn encoding_shape() {
        let r = recognizer(&Grammar::parse(ANBN).unwrap(), "ab").unwrap();
        let text = print_program(&r.program);
        assert_eq!(
            text,
            ".edb pos/1.\n.edb tok_a/2.\n.edb tok_b/2.\ns(I0,I3) :- tok_a(I0,I1), s(I1,I2), tok_b(I2,I3).\ns(I0,I0) :- pos(I0).\n?- s(0,2).\n"
        );
        assert!(parse_program(&text).is_ok());
        assert_eq!(
            r.facts_text(),
            "tok_a(0,1).\ntok_b(1,2).\npos(0).\npos(1).\npos(2).\n"
        );
    }

    #[test]
    fn anbn_language() {
        for w in ["ab", "aabb", ""] {
            assert!(accepts(ANBN, w), "{w:?}");
        }
        for w in ["a", "aab", "ba", "abc"] {
            assert!(!accepts(ANBN, w), "{w:?}");
        }
    }

    #[test]
    fn punctuation_terminals_and_left_recursion() {
        let g = "E -> E + T | T\nT -> x | ( E )\n";
        assert!(accepts(g, "x+(x+x)"));
        assert!(!accepts(g, "x+"));
        assert_eq!(token_pred("+").name.as_str(), "tok__2b_");
    }
}
