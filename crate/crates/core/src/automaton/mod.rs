//! Compilation of a program and its query into a parameterized automaton.
//!
//! A state is a canonical set of dotted rule schemas ([`ItemSchema`]). Each
//! item binds its rule variables to nothing yet, to a parameter slot of the
//! state, or to a program constant. Parameters are the data values a state
//! instance carries at runtime.
//!
//! Reading a fact of an extensional predicate moves every item that selects a
//! literal of the same shape into a successor state ([`Transition`] with
//! [`Input::Scan`]); the successor is closed under prediction at compile time,
//! so runtime work reduces to parameter assignments and a few comparisons.
//! Intensional literals are resolved through answer channels: completed items
//! publish tuples on `(predicate, call pattern)` channels ([`AnswerDecl`]) and
//! waiting items consume them ([`Input::Answer`]).
//!
//! The automaton runs directly ([`run_automaton`]) or is emitted as Datalog
//! ([`emit_rewritten_program`]) with one predicate per state and one rule per
//! transition.

mod build;
mod canon;
mod closure;
mod dump;
mod emit;
mod run;

use std::fmt;

pub use build::{build_automaton, build_automaton_with, DEFAULT_STATE_CAP};
pub use canon::canonicalize;
pub use closure::{closure, CompiledProgram};
pub use emit::emit_rewritten_program;
pub use run::{run_automaton, run_with_stats, RunStats};

use crate::ir::{Atom, Pred};
use crate::store::BindingPattern;
use crate::symbol::Symbol;

pub type StateId = usize;
pub type Slot = u32;

/// What a rule variable is bound to inside an item.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Binding {
    Unbound,
    Param(Slot),
    Const(Symbol),
}

/// A dotted rule schema.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemSchema {
    /// Index into the program's rules; one past the last is the goal rule.
    pub rule: usize,
    pub dot: usize,
    /// Pattern of the call this item was predicted for; decides which answer
    /// channel its completions publish on.
    pub call: BindingPattern,
    /// Per rule variable, by first-occurrence number.
    pub binding: Vec<Binding>,
    /// Slot/constant equalities the item needs at runtime; sorted.
    pub guards: Vec<(Slot, Symbol)>,
}

impl ItemSchema {
    /// Every slot mentioned by bindings or guards, in order of appearance.
    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        self.binding
            .iter()
            .filter_map(|b| match b {
                Binding::Param(s) => Some(*s),
                _ => None,
            })
            .chain(self.guards.iter().map(|(s, _)| *s))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub id: StateId,
    pub items: Vec<ItemSchema>,
    pub param_count: usize,
    /// Indexes into [`Automaton::scans`], [`Automaton::completions`] and
    /// [`Automaton::answers`] for transitions leaving this state.
    pub scans: Vec<usize>,
    pub completions: Vec<usize>,
    pub answers: Vec<usize>,
}

/// An answer channel: answers of `pred` for calls with this pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel {
    pub pred: Pred,
    pub pattern: BindingPattern,
}

impl Channel {
    /// Predicate name used for the channel in rewritten programs.
    pub fn predicate_name(&self) -> String {
        format!("ans_{}_{}", self.pred.name, self.pattern)
    }
}

/// Where a runtime value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    /// A parameter of the source state instance.
    Param(Slot),
    Const(Symbol),
    /// A position of the fact or answer tuple being read.
    Arg(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Input {
    Scan(Pred),
    Answer(Channel),
}

impl Input {
    pub fn pred(&self) -> Pred {
        match self {
            Input::Scan(p) => *p,
            Input::Answer(c) => c.pred,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: StateId,
    pub input: Input,
    pub pattern: BindingPattern,
    /// Lookup key: one source (parameter or constant) per bound position.
    pub bound: Vec<Source>,
    pub to: StateId,
    /// One source per parameter slot of `to`.
    pub assign: Vec<Source>,
    /// Tuple positions that must equal another source.
    pub compare: Vec<(usize, Source)>,
    /// Disjunction of guard conjunctions; empty means unconditional.
    pub when: Vec<Vec<(Slot, Symbol)>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerDecl {
    pub channel: Channel,
    pub state: StateId,
    /// The published tuple, one source (parameter or constant) per argument.
    pub proj: Vec<Source>,
    pub when: Vec<(Slot, Symbol)>,
}

/// How the query's answers are read off its answer channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoalDecl {
    pub channel: Channel,
    /// Per query position: `Param` slot of the initial state for constants,
    /// `Arg(i)` for the i-th query variable.
    pub args: Vec<Source>,
}

/// Static description of a program rule, kept for dumps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleInfo {
    pub text: String,
    pub var_names: Vec<Symbol>,
    pub body_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    pub states: Vec<State>,
    pub scans: Vec<Transition>,
    pub completions: Vec<Transition>,
    pub answers: Vec<AnswerDecl>,
    pub initial: StateId,
    /// The query constants, in query order.
    pub init_params: Vec<Symbol>,
    /// For each parameter slot of the initial state, the index of the query
    /// constant that seeds it.
    pub init_assign: Vec<usize>,
    pub goal: GoalDecl,
    pub query: Atom,
    pub edb: Vec<Pred>,
    pub rules: Vec<RuleInfo>,
}

impl Automaton {
    /// The canonical textual dump.
    pub fn dump(&self) -> String {
        dump::dump(self)
    }
}

impl fmt::Display for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}
