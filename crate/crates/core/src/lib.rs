//! Cirquent calculus with countable and uncountable recurrences, as games
//! played by interactive machines.

pub mod bits;
pub mod calculus;
pub mod kernel;
pub mod machines;
pub mod strategies;
pub mod syntax;

pub use bits::{Bits, InfBits};
pub use calculus::{check_formula_proof, check_proof, check_step, Proof, ProofStep, RuleInstance};
pub use kernel::{GameExpr, Interpretation, Labmove, Player, Reading, Run};
pub use syntax::{parse_cirquent, parse_formula, parse_proof, Cirquent, Formula};
