//! Subsumption-reduced store of derived rules.
//!
//! Rules are grouped by skeleton (the predicate sequence of head and body,
//! constants and variables abstracted away). Inside a group, a discrimination
//! trie over the flattened argument positions narrows the candidates for
//! forward subsumption (is the new rule redundant?) and backward subsumption
//! (which stored rules does the new rule make redundant?). Candidates are then
//! confirmed with [`subsumes`].

use std::collections::HashMap;

use super::rule::{subsumes, DTerm, DerivedRule};
use crate::ir::Pred;
use crate::symbol::Symbol;

pub type RuleId = usize;

#[derive(Default)]
struct Node {
    /// `None` keys variables (of any name).
    children: HashMap<Option<Symbol>, usize>,
    rules: Vec<RuleId>,
}

struct Trie {
    nodes: Vec<Node>,
}

fn key(t: DTerm) -> Option<Symbol> {
    match t {
        DTerm::Const(c) => Some(c),
        DTerm::Var(_) => None,
    }
}

impl Trie {
    fn new() -> Self {
        Trie {
            nodes: vec![Node::default()],
        }
    }

    fn insert(&mut self, terms: &[DTerm], id: RuleId) {
        let mut at = 0;
        for t in terms {
            let k = key(*t);
            at = match self.nodes[at].children.get(&k) {
                Some(&n) => n,
                None => {
                    self.nodes.push(Node::default());
                    let n = self.nodes.len() - 1;
                    self.nodes[at].children.insert(k, n);
                    n
                }
            };
        }
        self.nodes[at].rules.push(id);
    }

    fn remove(&mut self, terms: &[DTerm], id: RuleId) {
        let mut at = 0;
        for t in terms {
            match self.nodes[at].children.get(&key(*t)) {
                Some(&n) => at = n,
                None => return,
            }
        }
        self.nodes[at].rules.retain(|r| *r != id);
    }

    /// Stored rules that could generalize `terms`.
    fn generalizations(&self, terms: &[DTerm], out: &mut Vec<RuleId>) {
        let mut stack = vec![(0usize, 0usize)];
        while let Some((at, depth)) = stack.pop() {
            if depth == terms.len() {
                out.extend_from_slice(&self.nodes[at].rules);
                continue;
            }
            let node = &self.nodes[at];
            if let Some(&n) = node.children.get(&None) {
                stack.push((n, depth + 1));
            }
            if let DTerm::Const(c) = terms[depth] {
                if let Some(&n) = node.children.get(&Some(c)) {
                    stack.push((n, depth + 1));
                }
            }
        }
    }

    /// Stored rules that `terms` could generalize.
    fn instances(&self, terms: &[DTerm], out: &mut Vec<RuleId>) {
        let mut stack = vec![(0usize, 0usize)];
        while let Some((at, depth)) = stack.pop() {
            if depth == terms.len() {
                out.extend_from_slice(&self.nodes[at].rules);
                continue;
            }
            let node = &self.nodes[at];
            match terms[depth] {
                DTerm::Const(c) => {
                    if let Some(&n) = node.children.get(&Some(c)) {
                        stack.push((n, depth + 1));
                    }
                }
                DTerm::Var(_) => stack.extend(node.children.values().map(|&n| (n, depth + 1))),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Insertion {
    /// Stored under `id`; `removed` lists rules it subsumed.
    Added { id: RuleId, removed: Vec<RuleId> },
    /// An existing rule already subsumes the candidate.
    Subsumed { by: RuleId },
}

/// Derived rules with the invariant that no live rule subsumes another.
#[derive(Default)]
pub struct RuleStore {
    rules: Vec<DerivedRule>,
    live: Vec<bool>,
    groups: HashMap<Vec<Pred>, Trie>,
    live_count: usize,
}

impl RuleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, rule: DerivedRule) -> Insertion {
        let terms: Vec<DTerm> = rule.terms().collect();
        let trie = self.groups.entry(rule.skeleton()).or_insert_with(Trie::new);
        let mut cands = Vec::new();
        trie.generalizations(&terms, &mut cands);
        if let Some(&by) = cands.iter().find(|&&c| subsumes(&self.rules[c], &rule)) {
            return Insertion::Subsumed { by };
        }
        cands.clear();
        trie.instances(&terms, &mut cands);
        let mut removed = Vec::new();
        for c in cands {
            if subsumes(&rule, &self.rules[c]) {
                let old: Vec<DTerm> = self.rules[c].terms().collect();
                trie.remove(&old, c);
                self.live[c] = false;
                self.live_count -= 1;
                removed.push(c);
            }
        }
        let id = self.rules.len();
        trie.insert(&terms, id);
        self.rules.push(rule);
        self.live.push(true);
        self.live_count += 1;
        removed.sort_unstable();
        Insertion::Added { id, removed }
    }

    pub fn get(&self, id: RuleId) -> &DerivedRule {
        &self.rules[id]
    }

    pub fn is_live(&self, id: RuleId) -> bool {
        self.live[id]
    }

    /// Number of live rules.
    pub fn len(&self) -> usize {
        self.live_count
    }

    pub fn is_empty(&self) -> bool {
        self.live_count == 0
    }

    /// Rules ever inserted, including ones later removed.
    pub fn inserted(&self) -> usize {
        self.rules.len()
    }

    pub fn live(&self) -> impl Iterator<Item = (RuleId, &DerivedRule)> {
        self.rules.iter().enumerate().filter(|(i, _)| self.live[*i])
    }
}
