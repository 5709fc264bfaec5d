//! Canonical form of item sets up to renaming of parameter slots.
//!
//! Each slot gets a signature that does not depend on slot names: the sorted
//! list of places where it occurs (item shape, binding positions, guard
//! constants). Slots are numbered in signature order; slots with equal
//! signatures are tried in every order, and the renaming giving the least
//! sorted item list wins.

use std::collections::BTreeMap;

use super::{Binding, ItemSchema, Slot};
use crate::store::BindingPattern;
use crate::symbol::Symbol;

/// An item with slot names erased.
type Shape = (usize, usize, BindingPattern, Vec<Binding>, Vec<Symbol>);

fn shape(item: &ItemSchema) -> Shape {
    let binding = item
        .binding
        .iter()
        .map(|b| match b {
            Binding::Param(_) => Binding::Param(0),
            other => *other,
        })
        .collect();
    let mut consts: Vec<Symbol> = item.guards.iter().map(|(_, c)| *c).collect();
    consts.sort();
    (item.rule, item.dot, item.call.clone(), binding, consts)
}

type Signature = Vec<(Shape, Vec<usize>, Vec<Symbol>)>;

fn signatures(items: &[ItemSchema]) -> BTreeMap<Slot, Signature> {
    let mut sigs: BTreeMap<Slot, Signature> = BTreeMap::new();
    for item in items {
        let sh = shape(item);
        let mut slots: Vec<Slot> = item.slots().collect();
        slots.sort_unstable();
        slots.dedup();
        for s in slots {
            let positions = item
                .binding
                .iter()
                .enumerate()
                .filter(|(_, b)| **b == Binding::Param(s))
                .map(|(i, _)| i)
                .collect();
            let consts = item
                .guards
                .iter()
                .filter(|(g, _)| *g == s)
                .map(|(_, c)| *c)
                .collect();
            sigs.entry(s).or_default().push((sh.clone(), positions, consts));
        }
    }
    for sig in sigs.values_mut() {
        sig.sort();
    }
    sigs
}

fn rename(items: &[ItemSchema], map: &BTreeMap<Slot, Slot>) -> Vec<ItemSchema> {
    let mut out: Vec<ItemSchema> = items
        .iter()
        .map(|item| {
            let mut guards: Vec<(Slot, Symbol)> = item.guards.iter().map(|(s, c)| (map[s], *c)).collect();
            guards.sort();
            ItemSchema {
                rule: item.rule,
                dot: item.dot,
                call: item.call.clone(),
                binding: item
                    .binding
                    .iter()
                    .map(|b| match b {
                        Binding::Param(s) => Binding::Param(map[s]),
                        other => *other,
                    })
                    .collect(),
                guards,
            }
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Advance `perm` to the next permutation in lexicographic order.
fn next_permutation(perm: &mut [Slot]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let Some(i) = (0..perm.len() - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
        return false;
    };
    let j = (i + 1..perm.len())
        .rev()
        .find(|&j| perm[j] > perm[i])
        .expect("exists");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Canonical form of `items` and the renaming from their slots to canonical
/// slots. Two item sets get equal forms iff they are equal up to renaming.
pub fn canonicalize(items: &[ItemSchema]) -> (Vec<ItemSchema>, BTreeMap<Slot, Slot>) {
    let sigs = signatures(items);
    let mut classes: BTreeMap<&Signature, Vec<Slot>> = BTreeMap::new();
    for (s, sig) in &sigs {
        classes.entry(sig).or_default().push(*s);
    }
    let mut classes: Vec<Vec<Slot>> = classes.into_values().collect();
    let mut best: Option<(Vec<ItemSchema>, BTreeMap<Slot, Slot>)> = None;
    loop {
        let map: BTreeMap<Slot, Slot> = classes
            .iter()
            .flatten()
            .enumerate()
            .map(|(new, old)| (*old, new as Slot))
            .collect();
        let form = rename(items, &map);
        if best.as_ref().is_none_or(|(b, _)| form < *b) {
            best = Some((form, map));
        }
        // Odometer over the permutations of every class.
        let mut advanced = false;
        for class in classes.iter_mut().rev() {
            if next_permutation(class) {
                advanced = true;
                break;
            }
            class.sort_unstable();
        }
        if !advanced {
            break;
        }
    }
    best.expect("at least one renaming")
}
