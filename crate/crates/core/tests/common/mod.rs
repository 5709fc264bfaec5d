//! Shared fixtures: the standard example programs and a seeded generator of
//! small random programs with matching fact stores.
#![allow(dead_code)]

use earley_datalog::{parse_program, FactStore, Pred, Program, Symbol};
use earley_datalog::{validate_program, Atom, Rule, Term};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const ANCESTOR: &str =
    ".edb par/2.\nanc(X,Y) :- par(X,Y).\nanc(X,Y) :- anc(X,Z), par(Z,Y).\n?- anc(a,Y).\n";

pub const SAME_GEN: &str = ".edb up/2.\n.edb down/2.\n.edb flat/2.\nsg(X,Y) :- flat(X,Y).\nsg(X,Y) :- up(X,U), sg(U,V), down(V,Y).\n?- sg(a,Y).\n";

pub fn sym(s: &str) -> Symbol {
    Symbol::intern(s)
}

/// ANCESTOR with the query constant replaced.
pub fn ancestor_with_query(c: &str) -> Program {
    parse_program(&ANCESTOR.replace("anc(a,Y)", &format!("anc({c},Y)"))).unwrap()
}

/// par(i, i+1) for i in 0..n.
pub fn chain_store(p: &Program, n: usize) -> FactStore {
    let mut b = FactStore::builder(&p.edb);
    let par = Pred::new("par", 2);
    for i in 0..n {
        b.insert(par, &[sym(&i.to_string()), sym(&(i + 1).to_string())])
            .unwrap();
    }
    b.build()
}

/// A complete binary tree of the given depth with nodes named `n<k>` in heap
/// order (root `n1`, children of `n<k>` are `n<2k>` and `n<2k+1>`): `up` goes
/// child to parent, `down` parent to child, `flat` links sibling leaves both
/// ways. Returns the store and the leftmost leaf.
pub fn sg_tree(p: &Program, depth: u32) -> (FactStore, String) {
    let mut b = FactStore::builder(&p.edb);
    let (up, down, flat) = (Pred::new("up", 2), Pred::new("down", 2), Pred::new("flat", 2));
    let node = |k: u64| sym(&format!("n{k}"));
    let first_leaf = 1u64 << depth;
    for k in 2..(first_leaf << 1) {
        b.insert(up, &[node(k), node(k / 2)]).unwrap();
        b.insert(down, &[node(k / 2), node(k)]).unwrap();
    }
    for k in (first_leaf..(first_leaf << 1)).step_by(2) {
        b.insert(flat, &[node(k), node(k + 1)]).unwrap();
        b.insert(flat, &[node(k + 1), node(k)]).unwrap();
    }
    (b.build(), format!("n{first_leaf}"))
}

pub struct Case {
    pub program: Program,
    pub store: FactStore,
}

const VARS: [&str; 4] = ["X", "Y", "Z", "W"];

fn constant(rng: &mut ChaCha8Rng, n_consts: usize) -> Term {
    Term::Const(sym(&format!("c{}", rng.gen_range(0..n_consts))))
}

fn random_atom(rng: &mut ChaCha8Rng, pred: Pred, n_consts: usize) -> Atom {
    let args = (0..pred.arity)
        .map(|_| {
            if rng.gen_bool(0.15) {
                constant(rng, n_consts)
            } else {
                Term::Var(sym(VARS.choose(rng).unwrap()))
            }
        })
        .collect();
    Atom::new(pred.name, args)
}

/// One random valid program: at most 4 IDB predicates with at most 3 rules
/// each and at most 3 body literals per rule, and at most 50 facts over at
/// most 8 constants.
pub fn random_case(rng: &mut ChaCha8Rng) -> Case {
    loop {
        if let Some(c) = try_case(rng) {
            return c;
        }
    }
}

fn try_case(rng: &mut ChaCha8Rng) -> Option<Case> {
    let n_consts = rng.gen_range(2..=8);
    let edb: Vec<Pred> = (0..rng.gen_range(1..=3))
        .map(|i| Pred::new(format!("e{i}").as_str(), rng.gen_range(1..=2)))
        .collect();
    let idb: Vec<Pred> = (0..rng.gen_range(1..=4))
        .map(|i| Pred::new(format!("p{i}").as_str(), rng.gen_range(0..=2)))
        .collect();
    let all: Vec<Pred> = edb.iter().chain(&idb).copied().collect();
    let mut rules = Vec::new();
    for &h in &idb {
        for _ in 0..rng.gen_range(1..=3) {
            let body: Vec<Atom> = if rng.gen_bool(0.05) {
                Vec::new()
            } else {
                (0..rng.gen_range(1..=3))
                    .map(|_| {
                        let pred = *all.choose(rng).unwrap();
                        random_atom(rng, pred, n_consts)
                    })
                    .collect()
            };
            let body_vars: Vec<Symbol> = body.iter().flat_map(|a| a.vars()).collect();
            let head_args = (0..h.arity)
                .map(|_| {
                    if body_vars.is_empty() || rng.gen_bool(0.1) {
                        constant(rng, n_consts)
                    } else {
                        Term::Var(*body_vars.choose(rng).unwrap())
                    }
                })
                .collect();
            rules.push(Rule::new(Atom::new(h.name, head_args), body));
        }
    }
    let q = idb[0];
    let query_args = (0..q.arity)
        .map(|i| {
            if rng.gen_bool(0.4) {
                constant(rng, n_consts)
            } else {
                Term::Var(sym(&format!("Q{i}")))
            }
        })
        .collect();
    let program = Program {
        edb: edb.clone(),
        rules,
        query: Atom::new(q.name, query_args),
    };
    if !validate_program(&program).is_valid() {
        return None;
    }
    let mut b = FactStore::builder(&edb);
    let n_facts = rng.gen_range(0..=50);
    for _ in 0..n_facts {
        let pred = *edb.choose(rng).unwrap();
        let args: Vec<Symbol> = (0..pred.arity)
            .map(|_| sym(&format!("c{}", rng.gen_range(0..n_consts))))
            .collect();
        b.insert(pred, &args).unwrap();
    }
    Some(Case {
        program,
        store: b.build(),
    })
}
