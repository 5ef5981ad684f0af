//! Symbolic bit-vector core: expressions, bit-blasting, SAT and enumeration.

pub mod cnf;
pub mod enumerate;
pub mod expr;
pub mod sat;

use thiserror::Error;

pub use cnf::{bit_blast, CnfFormula, Lit};
pub use enumerate::{all_solutions, all_values, find_model, is_satisfiable, Model, Query, Solution, SolverLimits};
pub use expr::{ExprId, ExprStore, Node, VarKey};
pub use sat::{check_sat, SatOutcome, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Conflicts,
    Clauses,
}

impl std::fmt::Display for Limit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Limit::Conflicts => "conflict-budget",
            Limit::Clauses => "clause-cap",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("solver resource limit reached: {0}")]
    ResourceOut(Limit),
    #[error("expression has more than {cap} feasible values")]
    CapExceeded { cap: usize },
    #[error("failed to write CNF dump: {0}")]
    Dump(String),
}
