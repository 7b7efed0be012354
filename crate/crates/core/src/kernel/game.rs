//! Games built from atoms by the connectives, and their legality and winners.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::atoms::{template, FiniteAtomGame};
use super::run::{
    class_reps, cross_product, negate_run, parse_replicative, parse_thread_move,
    project_cell_indexed, project_thread_indexed, strip_prefix, strip_prefix_indexed, BtStructure,
    CellMove, Labmove, Player, Run,
};
use super::KernelError;
use crate::bits::{is_prefix, Bits, InfBits};
use crate::syntax::{Cirquent, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Game {
    Atom(String),
    NegAtom(String),
    And(Box<Game>, Box<Game>),
    Or(Box<Game>, Box<Game>),
    CRec(Box<Game>),
    CCoRec(Box<Game>),
    URec(Box<Game>),
    UCoRec(Box<Game>),
    /// Countable recurrence in the branching (replicative) style.
    OldCRec(Box<Game>),
    OldCCoRec(Box<Game>),
}

/// How `!c` and `?c` are read when turning a formula into a game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reading {
    New,
    Old,
}

impl Game {
    pub fn from_formula(f: &Formula, reading: Reading) -> Game {
        let sub = |g: &Formula| Box::new(Game::from_formula(g, reading));
        match f {
            Formula::Atom(p) => Game::Atom(p.clone()),
            Formula::NegAtom(p) => Game::NegAtom(p.clone()),
            Formula::And(a, b) => Game::And(sub(a), sub(b)),
            Formula::Or(a, b) => Game::Or(sub(a), sub(b)),
            Formula::CRec(a) => match reading {
                Reading::New => Game::CRec(sub(a)),
                Reading::Old => Game::OldCRec(sub(a)),
            },
            Formula::CCoRec(a) => match reading {
                Reading::New => Game::CCoRec(sub(a)),
                Reading::Old => Game::OldCCoRec(sub(a)),
            },
            Formula::URec(a) => Game::URec(sub(a)),
            Formula::UCoRec(a) => Game::UCoRec(sub(a)),
        }
    }

    pub fn negated(&self) -> Game {
        let n = |g: &Game| Box::new(g.negated());
        match self {
            Game::Atom(p) => Game::NegAtom(p.clone()),
            Game::NegAtom(p) => Game::Atom(p.clone()),
            Game::And(a, b) => Game::Or(n(a), n(b)),
            Game::Or(a, b) => Game::And(n(a), n(b)),
            Game::CRec(a) => Game::CCoRec(n(a)),
            Game::CCoRec(a) => Game::CRec(n(a)),
            Game::URec(a) => Game::UCoRec(n(a)),
            Game::UCoRec(a) => Game::URec(n(a)),
            Game::OldCRec(a) => Game::OldCCoRec(n(a)),
            Game::OldCCoRec(a) => Game::OldCRec(n(a)),
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Game::Atom(p) | Game::NegAtom(p) => {
                out.insert(p.clone());
            }
            Game::And(a, b) | Game::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Game::CRec(a)
            | Game::CCoRec(a)
            | Game::URec(a)
            | Game::UCoRec(a)
            | Game::OldCRec(a)
            | Game::OldCCoRec(a) => a.collect_atoms(out),
        }
    }
}

/// The game of a cirquent. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirquentGame {
    pub parts: Vec<Game>,
    pub under: Vec<BTreeSet<usize>>,
    pub over: Vec<BTreeSet<usize>>,
}

impl CirquentGame {
    pub fn from_cirquent(c: &Cirquent, reading: Reading) -> Self {
        CirquentGame {
            parts: c
                .formulas
                .iter()
                .map(|f| Game::from_formula(f, reading))
                .collect(),
            under: c.under.clone(),
            over: c.over.clone(),
        }
    }

    /// Overgroups containing oformula `a`.
    pub fn overgroups_of(&self, a: usize) -> Vec<usize> {
        (0..self.over.len())
            .filter(|&j| self.over[j].contains(&a))
            .collect()
    }
}

/// Either a formula game or a cirquent game; cirquents only occur at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameExpr {
    Plain(Game),
    Cirquent(CirquentGame),
}

impl From<Game> for GameExpr {
    fn from(g: Game) -> Self {
        GameExpr::Plain(g)
    }
}

impl From<CirquentGame> for GameExpr {
    fn from(c: CirquentGame) -> Self {
        GameExpr::Cirquent(c)
    }
}

impl GameExpr {
    pub fn from_formula(f: &Formula, reading: Reading) -> Self {
        GameExpr::Plain(Game::from_formula(f, reading))
    }

    pub fn from_cirquent(c: &Cirquent, reading: Reading) -> Self {
        GameExpr::Cirquent(CirquentGame::from_cirquent(c, reading))
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        match self {
            GameExpr::Plain(g) => g.atoms(),
            GameExpr::Cirquent(c) => c.parts.iter().flat_map(Game::atoms).collect(),
        }
    }
}

/// Assigns an atom game to every atom name.
#[derive(Debug, Clone, Default)]
pub struct Interpretation {
    atoms: BTreeMap<String, FiniteAtomGame>,
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every name gets the same game.
    pub fn uniform<I, S>(names: I, game: &FiniteAtomGame) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut itp = Self::new();
        for n in names {
            itp.insert(n, game.clone());
        }
        itp
    }

    pub fn with(mut self, name: impl Into<String>, game: FiniteAtomGame) -> Self {
        self.insert(name, game);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, game: FiniteAtomGame) {
        self.atoms.insert(name.into(), game);
    }

    pub fn get(&self, name: &str) -> Option<&FiniteAtomGame> {
        self.atoms.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.atoms.keys().map(String::as_str)
    }

    /// Reads entries `NAME=TEMPLATE` separated by commas or newlines.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, KernelError> {
        let mut itp = Self::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for entry in line.split(',') {
                let entry = entry.trim();
                if entry.is_empty() {
                    continue;
                }
                let (name, spec) = entry
                    .split_once('=')
                    .ok_or_else(|| KernelError::BadInterpretation(entry.to_string()))?;
                let name = name.trim();
                if !crate::syntax::is_atom_name(name) {
                    return Err(KernelError::BadInterpretation(entry.to_string()));
                }
                itp.insert(name, template(spec)?);
            }
        }
        Ok(itp)
    }

    pub fn covers(&self, g: &GameExpr) -> Result<(), KernelError> {
        match g.atoms().into_iter().find(|p| !self.atoms.contains_key(p)) {
            Some(p) => Err(KernelError::UnknownAtom(p)),
            None => Ok(()),
        }
    }

    fn atom(&self, p: &str) -> &FiniteAtomGame {
        self.atoms
            .get(p)
            .expect("interpretation coverage is checked before evaluation")
    }
}

/// Index of the first move of `run` that makes it illegal, if any.
pub fn first_illegal(
    g: &GameExpr,
    itp: &Interpretation,
    run: &Run,
) -> Result<Option<usize>, KernelError> {
    itp.covers(g)?;
    Ok(match g {
        GameExpr::Plain(g) => illegal_at(g, itp, run),
        GameExpr::Cirquent(c) => cirquent_illegal(c, itp, run),
    })
}

pub fn is_legal(g: &GameExpr, itp: &Interpretation, run: &Run) -> Result<bool, KernelError> {
    Ok(first_illegal(g, itp, run)?.is_none())
}

/// Whether `pos` followed by `lm` is a legal position.
pub fn legal_extension(
    g: &GameExpr,
    itp: &Interpretation,
    pos: &Run,
    lm: &Labmove,
) -> Result<bool, KernelError> {
    is_legal(g, itp, &pos.extended(lm.clone()))
}

/// Like [`legal_extension`] but trusts that `pos` is already legal, so only
/// the threads the new move touches are examined.
pub fn legal_next(
    g: &GameExpr,
    itp: &Interpretation,
    pos: &Run,
    lm: &Labmove,
) -> Result<bool, KernelError> {
    itp.covers(g)?;
    Ok(match g {
        GameExpr::Plain(g) => next_ok(g, itp, pos, lm),
        GameExpr::Cirquent(c) => cirquent_next_ok(c, itp, pos, lm),
    })
}

/// The player who wins `run`. An illegal run is lost by whoever made its
/// first illegal move.
pub fn winner(g: &GameExpr, itp: &Interpretation, run: &Run) -> Result<Player, KernelError> {
    if let Some(k) = first_illegal(g, itp, run)? {
        return Ok(run[k].player.flip());
    }
    Ok(match g {
        GameExpr::Plain(g) => win(g, itp, run),
        GameExpr::Cirquent(c) => cirquent_win(c, itp, run),
    })
}

fn earliest(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn upto(run: &Run, bad: Option<usize>) -> Run {
    run.prefix(bad.unwrap_or(run.len()))
}

fn component(mv: &str) -> Option<(&'static str, &str)> {
    if let Some(r) = mv.strip_prefix("1.") {
        Some(("1.", r))
    } else {
        mv.strip_prefix("2.").map(|r| ("2.", r))
    }
}

fn illegal_at(g: &Game, itp: &Interpretation, run: &Run) -> Option<usize> {
    match g {
        Game::Atom(p) => itp.atom(p).first_illegal(run),
        Game::NegAtom(p) => itp.atom(p).first_illegal(&negate_run(run)),
        Game::And(l, r) | Game::Or(l, r) => {
            let mut bad = run.iter().position(|lm| component(&lm.mv).is_none());
            let head = upto(run, bad);
            for (part, pre) in [(l, "1."), (r, "2.")] {
                let (sub, idx) = strip_prefix_indexed(&head, pre);
                bad = earliest(bad, illegal_at(part, itp, &sub).map(|k| idx[k]));
            }
            bad
        }
        Game::CRec(h) | Game::CCoRec(h) | Game::URec(h) | Game::UCoRec(h) => {
            let bad = run
                .iter()
                .position(|lm| parse_thread_move(&lm.mv).is_none());
            earliest(bad, threads_illegal(h, itp, &upto(run, bad)))
        }
        Game::OldCRec(h) => old_illegal(h, itp, run, Player::Bot),
        Game::OldCCoRec(h) => old_illegal(h, itp, run, Player::Top),
    }
}

fn used_addresses(run: &Run) -> Vec<Bits> {
    run.iter()
        .filter_map(|lm| parse_thread_move(&lm.mv).map(|(w, _)| w))
        .collect()
}

fn threads_illegal(h: &Game, itp: &Interpretation, run: &Run) -> Option<usize> {
    let mut bad = None;
    for x in class_reps(&used_addresses(run)) {
        let (sub, idx) = project_thread_indexed(run, &x);
        bad = earliest(bad, illegal_at(h, itp, &sub).map(|k| idx[k]));
    }
    bad
}

fn old_illegal(h: &Game, itp: &Interpretation, run: &Run, replicator: Player) -> Option<usize> {
    let mut bt = BtStructure::default();
    let mut bad = None;
    for (k, lm) in run.iter().enumerate() {
        let ok = if let Some(w) = parse_replicative(&lm.mv) {
            let ok = lm.player == replicator && bt.is_leaf(&w);
            if ok {
                bt.replicate(&w);
            }
            ok
        } else if let Some((w, _)) = parse_thread_move(&lm.mv) {
            bt.is_node(&w)
        } else {
            false
        };
        if !ok {
            bad = Some(k);
            break;
        }
    }
    earliest(bad, threads_illegal(h, itp, &upto(run, bad)))
}

fn cell_ok(c: &CirquentGame, mv: &str) -> Option<CellMove> {
    let cm = CellMove::parse(mv, c.over.len())?;
    if cm.a == 0 || cm.a > c.parts.len() {
        return None;
    }
    let a = cm.a - 1;
    let stray = (0..c.over.len()).any(|j| !c.over[j].contains(&a) && !cm.coords[j].is_empty());
    (!stray).then_some(cm)
}

/// Per-coordinate representatives for the cell of oformula `a` (0-based).
fn cell_reps(c: &CirquentGame, a: usize, moves: &[CellMove]) -> Vec<Vec<InfBits>> {
    let per: Vec<Vec<InfBits>> = (0..c.over.len())
        .map(|j| {
            if c.over[j].contains(&a) {
                let used: Vec<&Bits> = moves
                    .iter()
                    .filter(|m| m.a == a + 1)
                    .map(|m| &m.coords[j])
                    .collect();
                class_reps(used)
            } else {
                vec![InfBits::zeros()]
            }
        })
        .collect();
    cross_product(&per)
}

fn cirquent_illegal(c: &CirquentGame, itp: &Interpretation, run: &Run) -> Option<usize> {
    let mut parsed = Vec::new();
    let mut bad = None;
    for (k, lm) in run.iter().enumerate() {
        match cell_ok(c, &lm.mv) {
            Some(cm) => parsed.push(cm),
            None => {
                bad = Some(k);
                break;
            }
        }
    }
    let head = upto(run, bad);
    for (a, part) in c.parts.iter().enumerate() {
        for xs in cell_reps(c, a, &parsed) {
            let (sub, idx) = project_cell_indexed(&head, a + 1, &xs);
            bad = earliest(bad, illegal_at(part, itp, &sub).map(|k| idx[k]));
        }
    }
    bad
}

fn next_ok(g: &Game, itp: &Interpretation, pos: &Run, lm: &Labmove) -> bool {
    match g {
        Game::Atom(p) => itp.atom(p).legal(pos, lm),
        Game::NegAtom(p) => itp.atom(p).legal(&negate_run(pos), &lm.flipped()),
        Game::And(l, r) | Game::Or(l, r) => match component(&lm.mv) {
            Some((pre, rest)) => {
                let part = if pre == "1." { l } else { r };
                let sub = if position_free(part, itp) {
                    Run::new()
                } else {
                    strip_prefix(pos, pre)
                };
                next_ok(part, itp, &sub, &Labmove::new(lm.player, rest))
            }
            None => false,
        },
        Game::CRec(h) | Game::CCoRec(h) | Game::URec(h) | Game::UCoRec(h) => {
            thread_next_ok(h, itp, pos, lm)
        }
        Game::OldCRec(h) | Game::OldCCoRec(h) => {
            let replicator = if matches!(g, Game::OldCRec(_)) {
                Player::Bot
            } else {
                Player::Top
            };
            let bt = super::run::bt_structure(pos);
            if let Some(w) = parse_replicative(&lm.mv) {
                lm.player == replicator && bt.is_leaf(&w)
            } else {
                match parse_thread_move(&lm.mv) {
                    Some((w, _)) => bt.is_node(&w) && thread_next_ok(h, itp, pos, lm),
                    None => false,
                }
            }
        }
    }
}

/// Legality of a move of `g` never depends on the position.
fn position_free(g: &Game, itp: &Interpretation) -> bool {
    match g {
        Game::Atom(p) | Game::NegAtom(p) => itp.atom(p).is_position_free(),
        Game::And(l, r) | Game::Or(l, r) => position_free(l, itp) && position_free(r, itp),
        Game::CRec(h) | Game::CCoRec(h) | Game::URec(h) | Game::UCoRec(h) => position_free(h, itp),
        Game::OldCRec(_) | Game::OldCCoRec(_) => false,
    }
}

fn thread_next_ok(h: &Game, itp: &Interpretation, pos: &Run, lm: &Labmove) -> bool {
    let Some((w, rest)) = parse_thread_move(&lm.mv) else {
        return false;
    };
    if position_free(h, itp) {
        return next_ok(h, itp, &Run::new(), &Labmove::new(lm.player, rest));
    }
    // threads through w are told apart only by addresses extending w
    let mut used: Vec<Bits> = used_addresses(pos)
        .into_iter()
        .filter(|u| w.is_proper_prefix_of(u))
        .collect();
    used.push(w.clone());
    let inner = Labmove::new(lm.player, rest);
    class_reps(&used)
        .into_iter()
        .filter(|x| is_prefix(&w, x))
        .all(|x| next_ok(h, itp, &super::run::project_thread(pos, &x), &inner))
}

fn cirquent_next_ok(c: &CirquentGame, itp: &Interpretation, pos: &Run, lm: &Labmove) -> bool {
    let Some(cm) = cell_ok(c, &lm.mv) else {
        return false;
    };
    let a = cm.a - 1;
    let inner = Labmove::new(lm.player, cm.rest.clone());
    if position_free(&c.parts[a], itp) {
        return next_ok(&c.parts[a], itp, &Run::new(), &inner);
    }
    let mut parsed: Vec<CellMove> = pos
        .iter()
        .filter_map(|l| CellMove::parse(&l.mv, c.over.len()))
        .collect();
    parsed.push(cm.clone());
    cell_reps(c, a, &parsed)
        .into_iter()
        .filter(|xs| cm.coords.iter().zip(xs).all(|(u, x)| is_prefix(u, x)))
        .all(|xs| {
            next_ok(
                &c.parts[a],
                itp,
                &project_cell_indexed(pos, cm.a, &xs).0,
                &inner,
            )
        })
}

/// Winner of a run already known to be legal.
fn win(g: &Game, itp: &Interpretation, run: &Run) -> Player {
    let top = match g {
        Game::Atom(p) => return itp.atom(p).winner_of_legal(run),
        Game::NegAtom(p) => return itp.atom(p).winner_of_legal(&negate_run(run)).flip(),
        Game::And(l, r) => {
            win(l, itp, &strip_prefix(run, "1.")) == Player::Top
                && win(r, itp, &strip_prefix(run, "2.")) == Player::Top
        }
        Game::Or(l, r) => {
            win(l, itp, &strip_prefix(run, "1.")) == Player::Top
                || win(r, itp, &strip_prefix(run, "2.")) == Player::Top
        }
        Game::CRec(h) | Game::URec(h) | Game::OldCRec(h) => class_reps(&used_addresses(run))
            .iter()
            .all(|x| win(h, itp, &super::run::project_thread(run, x)) == Player::Top),
        Game::CCoRec(h) | Game::UCoRec(h) | Game::OldCCoRec(h) => class_reps(&used_addresses(run))
            .iter()
            .any(|x| win(h, itp, &super::run::project_thread(run, x)) == Player::Top),
    };
    if top {
        Player::Top
    } else {
        Player::Bot
    }
}

fn cirquent_win(c: &CirquentGame, itp: &Interpretation, run: &Run) -> Player {
    let n = c.over.len();
    let parsed: Vec<CellMove> = run
        .iter()
        .filter_map(|lm| CellMove::parse(&lm.mv, n))
        .collect();
    let reps: Vec<Vec<InfBits>> = (0..n)
        .map(|j| class_reps(parsed.iter().map(|m| &m.coords[j])))
        .collect();
    let mut memo: HashMap<(usize, Vec<InfBits>), Player> = HashMap::new();
    let mut cell_top = |a: usize, xs: &[InfBits]| -> bool {
        let key: Vec<InfBits> = (0..n)
            .map(|j| {
                if c.over[j].contains(&a) {
                    xs[j].clone()
                } else {
                    InfBits::zeros()
                }
            })
            .collect();
        let p = *memo.entry((a, key.clone())).or_insert_with(|| {
            let (sub, _) = project_cell_indexed(run, a + 1, &key);
            win(&c.parts[a], itp, &sub)
        });
        p == Player::Top
    };
    for group in &c.under {
        let relevant: Vec<usize> = (0..n)
            .filter(|&j| group.iter().any(|a| c.over[j].contains(a)))
            .collect();
        let per: Vec<Vec<InfBits>> = (0..n)
            .map(|j| {
                if relevant.contains(&j) {
                    reps[j].clone()
                } else {
                    vec![InfBits::zeros()]
                }
            })
            .collect();
        for xs in cross_product(&per) {
            if !group.iter().any(|&a| cell_top(a, &xs)) {
                return Player::Bot;
            }
        }
    }
    Player::Top
}
