//! Runs, projections and game evaluation.

mod atoms;
mod game;
mod run;

pub use atoms::{
    balance, bot_parity, capped, enumeration_game, enumeration_losers, is_numeral, last_mover,
    parity, sum_mod3, template, FiniteAtomGame,
};
pub use game::{
    first_illegal, is_legal, legal_extension, legal_next, winner, CirquentGame, Game, GameExpr,
    Interpretation, Reading,
};
pub use run::{
    bt_structure, class_reps, cross_product, is_delay, negate_run, parse_replicative,
    parse_thread_move, project_cell, project_cell_indexed, project_thread, project_thread_indexed,
    run, strip_prefix, strip_prefix_indexed, thread_class_reps, thread_reps, BtStructure, CellMove,
    Labmove, Player, Run,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("atom `{0}` has no interpretation")]
    UnknownAtom(String),
    #[error("transcript line {line}: cannot read `{text}`")]
    Transcript { line: usize, text: String },
    #[error("unknown atom template `{0}`")]
    BadTemplate(String),
    #[error("bad interpretation entry `{0}`")]
    BadInterpretation(String),
}
