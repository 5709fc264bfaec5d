//! A Datalog workbench built around Earley deduction.
//!
//! Three engines answer the same query over the same extensional database:
//!
//! * [`seminaive`]: bottom-up semi-naive fixpoint; the reference oracle.
//! * [`earley`]: an Earley-deduction interpreter (instantiation and
//!   reduction over a subsumption-reduced store of derived rules).
//! * [`automaton`]: a compiler from a program and query to a parameterized
//!   finite automaton whose states are sets of dotted rule schemas. The
//!   automaton can be executed directly or emitted as a rewritten Datalog
//!   program whose bottom-up evaluation reproduces its execution.
//!
//! [`check`] runs all of them side by side, [`bench`] times them and
//! [`grammar`] turns context-free grammars into Datalog recognizers.

pub mod answer;
pub mod automaton;
pub mod bench;
pub mod check;
pub mod earley;
pub mod grammar;
pub mod ir;
pub mod seminaive;
pub mod store;
pub mod symbol;

pub use answer::AnswerSet;
pub use ir::{parse_program, print_program, validate_program, Atom, Pred, Program, Rule, Term};
pub use store::{load_facts, BindingPattern, FactStore};
pub use symbol::Symbol;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ir::ParseError),
    #[error(transparent)]
    Load(#[from] store::LoadError),
    #[error(transparent)]
    Store(#[from] store::StoreError),
    #[error("invalid program:\n{0}")]
    Invalid(ir::ValidationReport),
    #[error("step budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("state cap of {cap} exceeded ({reached} states reached)")]
    StateCapExceeded { cap: usize, reached: usize },
    #[error("predicate name `{0}` is reserved for compiled programs")]
    ReservedName(String),
    #[error("expected {expected} query constants, got {found}")]
    QueryArity { expected: usize, found: usize },
}

impl Error {
    /// True for resource limits (state cap, step or tuple budgets).
    pub fn is_limit(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. } | Error::StateCapExceeded { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Reject programs that fail static validation.
pub fn ensure_valid(p: &Program) -> Result<()> {
    let report = validate_program(p);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::Invalid(report))
    }
}
