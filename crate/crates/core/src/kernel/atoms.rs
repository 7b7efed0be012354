//! Atom games and the templates used to interpret atoms.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::run::{Labmove, Player, Run};
use super::KernelError;

pub type LegalFn = Arc<dyn Fn(&Run, &Labmove) -> bool + Send + Sync>;
pub type WinnerFn = Arc<dyn Fn(&Run) -> Player + Send + Sync>;

/// An elementary game given by a legality predicate and a winner function that
/// treats its argument as a completed legal run. Legality of whole runs and the
/// illegal-run convention are derived by the evaluator, not stored here.
#[derive(Clone)]
pub struct FiniteAtomGame {
    name: String,
    legal: LegalFn,
    winner: WinnerFn,
    pool: Vec<String>,
    is_static: bool,
    position_free: bool,
}

impl fmt::Debug for FiniteAtomGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteAtomGame")
            .field("name", &self.name)
            .field("pool", &self.pool)
            .field("static", &self.is_static)
            .field("position_free", &self.position_free)
            .finish()
    }
}

impl FiniteAtomGame {
    pub fn new(
        name: impl Into<String>,
        legal: impl Fn(&Run, &Labmove) -> bool + Send + Sync + 'static,
        winner: impl Fn(&Run) -> Player + Send + Sync + 'static,
    ) -> Self {
        FiniteAtomGame {
            name: name.into(),
            legal: Arc::new(legal),
            winner: Arc::new(winner),
            pool: default_pool(),
            is_static: false,
            position_free: false,
        }
    }

    pub fn with_pool(mut self, pool: Vec<String>) -> Self {
        self.pool = pool;
        self
    }

    pub fn with_static(mut self, yes: bool) -> Self {
        self.is_static = yes;
        self
    }

    /// Declares that legality of a move never depends on the position.
    pub fn with_position_free(mut self, yes: bool) -> Self {
        self.position_free = yes;
        self
    }

    pub fn is_position_free(&self) -> bool {
        self.position_free
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Moves a random opponent draws from.
    pub fn pool(&self) -> &[String] {
        &self.pool
    }

    /// Whether the template is known to be insensitive to delays.
    pub fn is_static(&self) -> bool {
        self.is_static
    }

    pub fn legal(&self, pos: &Run, lm: &Labmove) -> bool {
        (self.legal)(pos, lm)
    }

    /// Index of the first move that is illegal in its position.
    pub fn first_illegal(&self, run: &Run) -> Option<usize> {
        let mut pos = Run::new();
        for (k, lm) in run.iter().enumerate() {
            if !self.legal(&pos, lm) {
                return Some(k);
            }
            pos.push(lm.clone());
        }
        None
    }

    /// Winner of a run, honouring the illegal-run convention.
    pub fn winner(&self, run: &Run) -> Player {
        match self.first_illegal(run) {
            Some(k) => run[k].player.flip(),
            None => (self.winner)(run),
        }
    }

    /// Winner of a run already known to be legal.
    pub fn winner_of_legal(&self, run: &Run) -> Player {
        (self.winner)(run)
    }
}

fn default_pool() -> Vec<String> {
    ["0", "1", "2", "3"].iter().map(|s| s.to_string()).collect()
}

/// A decimal numeral without leading zeros.
pub fn is_numeral(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'))
}

fn numeral_legal(_: &Run, lm: &Labmove) -> bool {
    is_numeral(&lm.mv)
}

fn numeral_game(
    name: impl Into<String>,
    winner: impl Fn(&Run) -> Player + Send + Sync + 'static,
) -> FiniteAtomGame {
    FiniteAtomGame::new(name, numeral_legal, winner).with_position_free(true)
}

fn won_if(top: bool) -> Player {
    if top {
        Player::Top
    } else {
        Player::Bot
    }
}

/// Every numeral is legal for both players at every moment; `loser` picks the
/// runs lost by ⊤.
pub fn enumeration_game(
    name: impl Into<String>,
    loser: impl Fn(&Run) -> bool + Send + Sync + 'static,
) -> FiniteAtomGame {
    numeral_game(name, move |r| won_if(!loser(r)))
}

/// Enumeration game lost by ⊤ exactly on the listed runs.
pub fn enumeration_losers(losers: Vec<Run>) -> FiniteAtomGame {
    let set: BTreeSet<String> = losers.iter().map(Run::to_string).collect();
    enumeration_game("enum", move |r| set.contains(&r.to_string()))
}

/// Whoever moved last wins; ⊤ wins the empty run.
pub fn last_mover() -> FiniteAtomGame {
    numeral_game("last-mover", |r| {
        r.last().map_or(Player::Top, |lm| lm.player)
    })
}

/// ⊤ wins iff the first move is an even numeral (or there is none).
pub fn parity() -> FiniteAtomGame {
    numeral_game("parity", |r| {
        won_if(r.first().is_none_or(|lm| last_digit_even(&lm.mv)))
    })
}

/// ⊤ wins iff it made at least as many moves as ⊥.
pub fn balance() -> FiniteAtomGame {
    numeral_game("balance", |r| {
        won_if(r.moves_of(Player::Top).len() >= r.moves_of(Player::Bot).len())
    })
    .with_static(true)
}

/// ⊤ wins iff the numerals played sum to a multiple of 3.
pub fn sum_mod3() -> FiniteAtomGame {
    numeral_game("sum3", |r| {
        let s: u32 = r.iter().map(|lm| digit_sum(&lm.mv) % 3).sum();
        won_if(s.is_multiple_of(3))
    })
    .with_static(true)
}

/// ⊤ wins iff ⊥'s first numeral is even or ⊥ never moved.
pub fn bot_parity() -> FiniteAtomGame {
    numeral_game("bot-parity", |r| {
        won_if(
            r.moves_of(Player::Bot)
                .first()
                .is_none_or(|m| last_digit_even(m)),
        )
    })
    .with_static(true)
}

/// Like [`balance`], but each player may move at most `cap` times.
pub fn capped(cap: usize) -> FiniteAtomGame {
    FiniteAtomGame::new(
        format!("capped:{cap}"),
        move |pos, lm| is_numeral(&lm.mv) && pos.moves_of(lm.player).len() < cap,
        |r| won_if(r.moves_of(Player::Top).len() >= r.moves_of(Player::Bot).len()),
    )
    .with_static(true)
}

fn last_digit_even(m: &str) -> bool {
    m.bytes().last().is_some_and(|b| (b - b'0').is_multiple_of(2))
}

fn digit_sum(m: &str) -> u32 {
    m.bytes().map(|b| (b - b'0') as u32).sum()
}

/// Builds an atom from a template spec: `balance`, `sum3`, `bot-parity`,
/// `parity`, `last-mover`, `capped:K`, or `enum:RUN/RUN/...` where a run is
/// `e` or moves like `B7+T3`.
pub fn template(spec: &str) -> Result<FiniteAtomGame, KernelError> {
    let spec = spec.trim();
    let bad = || KernelError::BadTemplate(spec.to_string());
    let atom = match spec {
        "balance" => balance(),
        "sum3" => sum_mod3(),
        "bot-parity" => bot_parity(),
        "parity" => parity(),
        "last-mover" => last_mover(),
        _ => {
            if let Some(k) = spec.strip_prefix("capped:") {
                capped(k.parse().map_err(|_| bad())?)
            } else if let Some(body) = spec.strip_prefix("enum:") {
                let runs = body
                    .split('/')
                    .map(|r| parse_compact_run(r).ok_or_else(bad))
                    .collect::<Result<Vec<_>, _>>()?;
                enumeration_losers(runs)
            } else {
                return Err(bad());
            }
        }
    };
    Ok(atom)
}

fn parse_compact_run(text: &str) -> Option<Run> {
    let text = text.trim();
    if text == "e" || text.is_empty() {
        return Some(Run::new());
    }
    text.split('+')
        .map(|m| {
            let (tag, mv) = m.split_at_checked(1)?;
            let player = match tag {
                "T" => Player::Top,
                "B" => Player::Bot,
                _ => return None,
            };
            is_numeral(mv).then(|| Labmove::new(player, mv))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::run::run;

    #[test]
    fn enumeration_legality() {
        let g = enumeration_losers(vec![run(&[("B", "7")])]);
        assert!(g.legal(&Run::new(), &Labmove::top("42")));
        assert!(g.legal(&run(&[("B", "3")]), &Labmove::bot("42")));
        assert!(!g.legal(&Run::new(), &Labmove::bot("abc")));
        assert!(!g.legal(&Run::new(), &Labmove::bot("07")));
        assert_eq!(g.winner(&run(&[("B", "7")])), Player::Bot);
        assert_eq!(g.winner(&run(&[("B", "8")])), Player::Top);
        assert_eq!(g.winner(&run(&[("T", "x")])), Player::Bot);
    }

    #[test]
    fn templates_parse() {
        for s in [
            "balance",
            "sum3",
            "bot-parity",
            "parity",
            "last-mover",
            "capped:2",
        ] {
            assert!(template(s).is_ok(), "{s}");
        }
        let g = template("enum:B7/T1+B2").unwrap();
        assert_eq!(g.winner(&run(&[("T", "1"), ("B", "2")])), Player::Bot);
        assert_eq!(g.winner(&run(&[("B", "2"), ("T", "1")])), Player::Top);
        assert!(template("enum:X7").is_err());
        assert!(template("chess").is_err());
    }

    #[test]
    fn capped_limits_each_player() {
        let g = capped(1);
        assert_eq!(
            g.first_illegal(&run(&[("T", "1"), ("B", "1"), ("B", "2")])),
            Some(2)
        );
        assert_eq!(
            g.winner(&run(&[("T", "1"), ("B", "1"), ("B", "2")])),
            Player::Top
        );
    }

    #[test]
    fn static_templates_ignore_delays() {
        let gamma = run(&[("T", "1"), ("B", "2"), ("T", "4"), ("B", "5")]);
        let omega = run(&[("B", "2"), ("T", "1"), ("B", "5"), ("T", "4")]);
        for g in [balance(), sum_mod3(), bot_parity(), capped(3)] {
            assert!(g.is_static());
            assert_eq!(g.winner(&gamma), g.winner(&omega), "{}", g.name());
        }
    }
}
