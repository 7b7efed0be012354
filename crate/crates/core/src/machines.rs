//! Easy-play machines, environments, the simulation scheduler and composition.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bits::{Bits, InfBits};
use crate::kernel::{
    bt_structure, legal_next, project_cell, project_thread, strip_prefix, Game, GameExpr,
    Interpretation, Labmove, Player, Run,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discipline {
    /// At most one move per cycle.
    Epm,
    /// Any finite block of moves per cycle.
    Bmepm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Grant,
    Moves(Vec<String>),
}

/// A deterministic machine. `query` sees the whole run tape, including its
/// own earlier moves, and either grants permission or moves.
pub trait Machine: Send {
    fn discipline(&self) -> Discipline {
        Discipline::Epm
    }
    fn query(&mut self, tape: &Run) -> Action;
    fn box_clone(&self) -> Box<dyn Machine>;
}

impl Clone for Box<dyn Machine> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

/// Turns each environment move into the machine's replies.
pub trait Responder: Send + Clone + 'static {
    fn respond(&mut self, mv: &str) -> Vec<String>;
}

#[derive(Clone)]
pub struct FnResponder<F>(pub F);

impl<F> Responder for FnResponder<F>
where
    F: FnMut(&str) -> Vec<String> + Send + Clone + 'static,
{
    fn respond(&mut self, mv: &str) -> Vec<String> {
        (self.0)(mv)
    }
}

/// A machine that only reacts to ⊥ moves, queueing its replies and granting
/// whenever the queue is empty.
#[derive(Clone)]
pub struct Reactive<R> {
    inner: R,
    cursor: usize,
    outbox: VecDeque<String>,
    discipline: Discipline,
}

impl<R: Responder> Reactive<R> {
    pub fn new(inner: R) -> Self {
        Reactive {
            inner,
            cursor: 0,
            outbox: VecDeque::new(),
            discipline: Discipline::Epm,
        }
    }

    pub fn blocks(mut self) -> Self {
        self.discipline = Discipline::Bmepm;
        self
    }

    pub fn responder(&self) -> &R {
        &self.inner
    }
}

impl<R: Responder> Machine for Reactive<R> {
    fn discipline(&self) -> Discipline {
        self.discipline
    }

    fn query(&mut self, tape: &Run) -> Action {
        for lm in &tape[self.cursor.min(tape.len())..] {
            if lm.player == Player::Bot {
                let replies = self.inner.respond(&lm.mv);
                self.outbox.extend(replies);
            }
        }
        self.cursor = tape.len();
        if self.outbox.is_empty() {
            return Action::Grant;
        }
        match self.discipline {
            Discipline::Epm => Action::Moves(self.outbox.pop_front().into_iter().collect()),
            Discipline::Bmepm => Action::Moves(self.outbox.drain(..).collect()),
        }
    }

    fn box_clone(&self) -> Box<dyn Machine> {
        Box::new(self.clone())
    }
}

/// Reactive machine from a closure.
pub fn reactive<F>(f: F) -> Box<dyn Machine>
where
    F: FnMut(&str) -> Vec<String> + Send + Clone + 'static,
{
    Box::new(Reactive::new(FnResponder(f)))
}

/// Always grants, never moves.
pub fn silent_machine() -> Box<dyn Machine> {
    reactive(|_: &str| Vec::new())
}

/// Plays the listed moves one per cycle, then grants forever.
pub fn scripted_machine(moves: Vec<String>) -> Box<dyn Machine> {
    #[derive(Clone)]
    struct Script(VecDeque<String>);
    impl Machine for Script {
        fn query(&mut self, _: &Run) -> Action {
            match self.0.pop_front() {
                Some(m) => Action::Moves(vec![m]),
                None => Action::Grant,
            }
        }
        fn box_clone(&self) -> Box<dyn Machine> {
            Box::new(self.clone())
        }
    }
    Box::new(Script(moves.into()))
}

/// Where a simulated node's move goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Port {
    Real,
    Node(usize),
}

/// Translates moves between the real play and the imaginary plays of a
/// [`Network`]'s nodes. Moves with no translation are dropped.
pub trait Router: Send {
    /// A ⊥ move of the real play, delivered to nodes as ⊥ moves.
    fn from_env(&mut self, mv: &str) -> Vec<(usize, String)>;
    /// A ⊤ move of node `node`; goes out as a real ⊤ move or into another
    /// node as a ⊥ move.
    fn from_node(&mut self, node: usize, mv: &str) -> Vec<(Port, String)>;
    fn box_clone(&self) -> Box<dyn Router>;
}

impl Clone for Box<dyn Router> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

#[derive(Clone)]
struct Node {
    machine: Box<dyn Machine>,
    tape: Run,
    inbox: Vec<String>,
}

const SETTLE_ROUNDS: usize = 10_000;

/// A machine that runs other machines on imaginary tapes and routes moves
/// between them and the real play. Nodes only see environment moves when
/// they grant, so the whole thing behaves like a single easy-play machine.
#[derive(Clone)]
pub struct Network {
    nodes: Vec<Node>,
    router: Box<dyn Router>,
    cursor: usize,
    outbox: VecDeque<String>,
}

impl Network {
    pub fn new(machines: Vec<Box<dyn Machine>>, router: Box<dyn Router>) -> Self {
        Network {
            nodes: machines
                .into_iter()
                .map(|machine| Node {
                    machine,
                    tape: Run::new(),
                    inbox: Vec::new(),
                })
                .collect(),
            router,
            cursor: 0,
            outbox: VecDeque::new(),
        }
    }

    /// The imaginary run seen by node `i`.
    pub fn node_tape(&self, i: usize) -> &Run {
        &self.nodes[i].tape
    }

    fn settle(&mut self) {
        for _ in 0..SETTLE_ROUNDS {
            let mut progress = false;
            for i in 0..self.nodes.len() {
                let action = {
                    let node = &mut self.nodes[i];
                    node.machine.query(&node.tape)
                };
                match action {
                    Action::Moves(ms) => {
                        for mv in ms {
                            progress = true;
                            self.nodes[i].tape.push(Labmove::top(mv.clone()));
                            for (port, out) in self.router.from_node(i, &mv) {
                                match port {
                                    Port::Real => self.outbox.push_back(out),
                                    Port::Node(j) => self.nodes[j].inbox.push(out),
                                }
                            }
                        }
                    }
                    Action::Grant => {
                        let node = &mut self.nodes[i];
                        if !node.inbox.is_empty() {
                            progress = true;
                            for m in node.inbox.drain(..) {
                                node.tape.push(Labmove::bot(m));
                            }
                        }
                    }
                }
            }
            if !progress {
                break;
            }
        }
    }
}

impl Machine for Network {
    fn query(&mut self, tape: &Run) -> Action {
        for lm in &tape[self.cursor.min(tape.len())..] {
            if lm.player == Player::Bot {
                for (i, m) in self.router.from_env(&lm.mv) {
                    self.nodes[i].inbox.push(m);
                }
            }
        }
        self.cursor = tape.len();
        if self.outbox.is_empty() {
            self.settle();
        }
        match self.outbox.pop_front() {
            Some(m) => Action::Moves(vec![m]),
            None => Action::Grant,
        }
    }

    fn box_clone(&self) -> Box<dyn Machine> {
        Box::new(self.clone())
    }
}

/// Stateless router around a single node given by two translations.
#[derive(Clone)]
pub struct MapRouter<I, O> {
    inward: I,
    outward: O,
}

impl<I, O> Router for MapRouter<I, O>
where
    I: FnMut(&str) -> Vec<String> + Send + Clone + 'static,
    O: FnMut(&str) -> Vec<String> + Send + Clone + 'static,
{
    fn from_env(&mut self, mv: &str) -> Vec<(usize, String)> {
        (self.inward)(mv).into_iter().map(|m| (0, m)).collect()
    }

    fn from_node(&mut self, _: usize, mv: &str) -> Vec<(Port, String)> {
        (self.outward)(mv)
            .into_iter()
            .map(|m| (Port::Real, m))
            .collect()
    }

    fn box_clone(&self) -> Box<dyn Router> {
        Box::new(self.clone())
    }
}

/// Runs `m` on an imaginary tape, renaming moves both ways.
pub fn relabel<I, O>(m: Box<dyn Machine>, inward: I, outward: O) -> Box<dyn Machine>
where
    I: FnMut(&str) -> Vec<String> + Send + Clone + 'static,
    O: FnMut(&str) -> Vec<String> + Send + Clone + 'static,
{
    Box::new(Network::new(
        vec![m],
        Box::new(MapRouter { inward, outward }),
    ))
}

fn split_component(mv: &str) -> Option<(u8, &str)> {
    if let Some(r) = mv.strip_prefix("1.") {
        Some((1, r))
    } else {
        mv.strip_prefix("2.").map(|r| (2, r))
    }
}

#[derive(Clone)]
struct ModusPonens;

impl Router for ModusPonens {
    fn from_env(&mut self, mv: &str) -> Vec<(usize, String)> {
        vec![(0, format!("2.{mv}"))]
    }

    fn from_node(&mut self, node: usize, mv: &str) -> Vec<(Port, String)> {
        if node == 1 {
            return vec![(Port::Node(0), format!("1.{mv}"))];
        }
        match split_component(mv) {
            Some((1, r)) => vec![(Port::Node(1), r.to_string())],
            Some((_, r)) => vec![(Port::Real, r.to_string())],
            None => Vec::new(),
        }
    }

    fn box_clone(&self) -> Box<dyn Router> {
        Box::new(self.clone())
    }
}

/// From `n` playing `¬A ∨ B` and `m` playing `A`, a machine playing `B`.
pub fn compose_modus_ponens(n: Box<dyn Machine>, m: Box<dyn Machine>) -> Box<dyn Machine> {
    Box::new(Network::new(vec![n, m], Box::new(ModusPonens)))
}

#[derive(Clone)]
struct Transitive;

impl Router for Transitive {
    fn from_env(&mut self, mv: &str) -> Vec<(usize, String)> {
        match split_component(mv) {
            Some((1, _)) => vec![(0, mv.to_string())],
            Some((_, _)) => vec![(1, mv.to_string())],
            None => Vec::new(),
        }
    }

    fn from_node(&mut self, node: usize, mv: &str) -> Vec<(Port, String)> {
        match (node, split_component(mv)) {
            (0, Some((1, _))) | (1, Some((2, _))) => vec![(Port::Real, mv.to_string())],
            (0, Some((_, r))) => vec![(Port::Node(1), format!("1.{r}"))],
            (_, Some((_, r))) => vec![(Port::Node(0), format!("2.{r}"))],
            (_, None) => Vec::new(),
        }
    }

    fn box_clone(&self) -> Box<dyn Router> {
        Box::new(self.clone())
    }
}

/// From `n1` playing `¬A ∨ B` and `n2` playing `¬B ∨ C`, a machine playing `¬A ∨ C`.
pub fn compose_transitive(n1: Box<dyn Machine>, n2: Box<dyn Machine>) -> Box<dyn Machine> {
    Box::new(Network::new(vec![n1, n2], Box::new(Transitive)))
}

/// Moves on behalf of ⊥, consulted only when permission is granted.
pub trait Environment {
    /// `grant_no` counts grants from 1.
    fn respond(&mut self, tape: &Run, grant_no: usize) -> Vec<String>;
}

impl<F: FnMut(&Run, usize) -> Vec<String>> Environment for F {
    fn respond(&mut self, tape: &Run, grant_no: usize) -> Vec<String> {
        self(tape, grant_no)
    }
}

pub fn silent_environment() -> impl Environment {
    |_: &Run, _: usize| Vec::new()
}

/// Plays the listed moves on the listed grant numbers.
pub fn scripted_environment(script: Vec<(usize, Vec<String>)>) -> impl Environment {
    move |_: &Run, grant_no: usize| {
        script
            .iter()
            .filter(|(g, _)| *g == grant_no)
            .flat_map(|(_, ms)| ms.iter().cloned())
            .collect()
    }
}

/// On each grant, with probability ½, plays one ⊥ move drawn uniformly from
/// the legal ones among a batch of random candidates shaped after the game.
pub struct RandomEnvironment {
    rng: ChaCha8Rng,
    game: GameExpr,
    itp: Interpretation,
    checked: usize,
    tape_legal: bool,
    tries: usize,
}

pub fn random_legal_environment(
    seed: u64,
    game: &GameExpr,
    itp: &Interpretation,
) -> RandomEnvironment {
    RandomEnvironment {
        rng: ChaCha8Rng::seed_from_u64(seed),
        game: game.clone(),
        itp: itp.clone(),
        checked: 0,
        tape_legal: true,
        tries: 24,
    }
}

impl RandomEnvironment {
    /// Legal ⊥ moves found among a fresh batch of candidates, deduplicated.
    pub fn legal_candidates(&mut self, tape: &Run) -> Vec<String> {
        while self.checked < tape.len() && self.tape_legal {
            let k = self.checked;
            self.tape_legal =
                legal_next(&self.game, &self.itp, &tape.prefix(k), &tape[k]).unwrap_or(false);
            self.checked += 1;
        }
        if !self.tape_legal {
            return Vec::new();
        }
        let mut seen = BTreeSet::new();
        for _ in 0..self.tries {
            let cand = match &self.game {
                GameExpr::Plain(g) => random_move(g, &self.itp, tape, &mut self.rng),
                GameExpr::Cirquent(c) => {
                    let a = self.rng.gen_range(0..c.parts.len());
                    let coords: Vec<Bits> = (0..c.over.len())
                        .map(|j| {
                            if c.over[j].contains(&a) {
                                random_bits(&mut self.rng, 3)
                            } else {
                                Bits::empty()
                            }
                        })
                        .collect();
                    let sub = if has_old(&c.parts[a]) {
                        let xs: Vec<InfBits> =
                            coords.iter().cloned().map(InfBits::zero_tailed).collect();
                        project_cell(tape, a + 1, &xs)
                    } else {
                        Run::new()
                    };
                    random_move(&c.parts[a], &self.itp, &sub, &mut self.rng).map(|m| {
                        let cs: Vec<String> = coords.iter().map(Bits::to_string).collect();
                        format!("{};{}.{}", a + 1, cs.join(","), m)
                    })
                }
            };
            if let Some(m) = cand {
                seen.insert(m);
            }
        }
        seen.into_iter()
            .filter(|m| {
                legal_next(&self.game, &self.itp, tape, &Labmove::bot(m.clone())).unwrap_or(false)
            })
            .collect()
    }
}

impl Environment for RandomEnvironment {
    fn respond(&mut self, tape: &Run, _: usize) -> Vec<String> {
        if !self.rng.gen_bool(0.5) {
            return Vec::new();
        }
        let cands = self.legal_candidates(tape);
        cands.choose(&mut self.rng).cloned().into_iter().collect()
    }
}

fn random_bits(rng: &mut ChaCha8Rng, max_len: usize) -> Bits {
    let len = rng.gen_range(0..=max_len);
    Bits::from_bools((0..len).map(|_| rng.gen_bool(0.5)).collect())
}

/// Candidate generation only looks at the position below old recurrences.
fn has_old(g: &Game) -> bool {
    match g {
        Game::Atom(_) | Game::NegAtom(_) => false,
        Game::And(l, r) | Game::Or(l, r) => has_old(l) || has_old(r),
        Game::CRec(h) | Game::CCoRec(h) | Game::URec(h) | Game::UCoRec(h) => has_old(h),
        Game::OldCRec(_) | Game::OldCCoRec(_) => true,
    }
}

/// A structurally plausible move of `g` at position `pos`; legality is not
/// guaranteed.
fn random_move(g: &Game, itp: &Interpretation, pos: &Run, rng: &mut ChaCha8Rng) -> Option<String> {
    match g {
        Game::Atom(p) | Game::NegAtom(p) => itp.get(p)?.pool().choose(rng).cloned(),
        Game::And(l, r) | Game::Or(l, r) => {
            let (part, pre) = if rng.gen_bool(0.5) {
                (l, "1.")
            } else {
                (r, "2.")
            };
            let sub = if has_old(part) {
                strip_prefix(pos, pre)
            } else {
                Run::new()
            };
            random_move(part, itp, &sub, rng).map(|m| format!("{pre}{m}"))
        }
        Game::CRec(h) | Game::CCoRec(h) | Game::URec(h) | Game::UCoRec(h) => {
            let w = random_bits(rng, 3);
            let sub = if has_old(h) {
                project_thread(pos, &InfBits::zero_tailed(w.clone()))
            } else {
                Run::new()
            };
            random_move(h, itp, &sub, rng).map(|m| format!("{w}.{m}"))
        }
        Game::OldCRec(h) | Game::OldCCoRec(h) => {
            let bt = bt_structure(pos);
            if matches!(g, Game::OldCRec(_)) && rng.gen_bool(0.3) {
                let leaves: Vec<Bits> = bt.leaves().into_iter().collect();
                return leaves.choose(rng).map(|w| format!("{w}:"));
            }
            let nodes: Vec<Bits> = bt.nodes().iter().cloned().collect();
            let w = nodes.choose(rng)?.clone();
            let sub = project_thread(pos, &InfBits::zero_tailed(w.clone()));
            random_move(h, itp, &sub, rng).map(|m| format!("{w}.{m}"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub horizon: usize,
    /// Permission is granted at least every `fairness` cycles.
    pub fairness: usize,
    /// Extra cycles, without grants, in which the machine may finish replying.
    pub drain: usize,
}

impl SimConfig {
    pub fn new(horizon: usize) -> Self {
        SimConfig {
            horizon,
            fairness: 1,
            drain: 100_000,
        }
    }

    pub fn fairness(mut self, k: usize) -> Self {
        self.fairness = k;
        self
    }

    pub fn drain(mut self, cycles: usize) -> Self {
        self.drain = cycles;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Grant(usize),
    Move(Labmove),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub cycle: usize,
    pub event: Event,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.event {
            Event::Grant(n) => write!(f, "{} grant {}", self.cycle, n),
            Event::Move(lm) => write!(f, "{} {}", self.cycle, lm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub run: Run,
    pub trace: Vec<TraceEntry>,
    pub grants: usize,
}

impl Simulation {
    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|t| format!("{t}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("cycle {cycle}: easy-play machine made {count} moves at once")]
    ContractViolation { cycle: usize, count: usize },
    #[error("horizon and fairness must be positive")]
    BadConfig,
}

/// Runs `m` against `e` for `cfg.horizon` cycles. Each cycle the machine is
/// queried first; then, if it granted or fairness forces it, the environment
/// answers. Afterwards the machine alone keeps running until it grants (at
/// most `cfg.drain` cycles).
pub fn simulate(
    m: &mut dyn Machine,
    e: &mut dyn Environment,
    cfg: &SimConfig,
) -> Result<Simulation, SimError> {
    if cfg.horizon == 0 || cfg.fairness == 0 {
        return Err(SimError::BadConfig);
    }
    let mut sim = Simulation {
        run: Run::new(),
        trace: Vec::new(),
        grants: 0,
    };
    let mut since_grant = 0;
    let epm = m.discipline() == Discipline::Epm;
    let machine_turn =
        |m: &mut dyn Machine, sim: &mut Simulation, cycle: usize| match m.query(&sim.run) {
            Action::Grant => Ok(true),
            Action::Moves(ms) => {
                if epm && ms.len() > 1 {
                    return Err(SimError::ContractViolation {
                        cycle,
                        count: ms.len(),
                    });
                }
                for mv in ms {
                    let lm = Labmove::top(mv);
                    sim.trace.push(TraceEntry {
                        cycle,
                        event: Event::Move(lm.clone()),
                    });
                    sim.run.push(lm);
                }
                Ok(false)
            }
        };
    for cycle in 1..=cfg.horizon {
        let granted = machine_turn(m, &mut sim, cycle)?;
        since_grant += 1;
        if granted || since_grant >= cfg.fairness {
            since_grant = 0;
            sim.grants += 1;
            sim.trace.push(TraceEntry {
                cycle,
                event: Event::Grant(sim.grants),
            });
            for mv in e.respond(&sim.run, sim.grants) {
                let lm = Labmove::bot(mv);
                sim.trace.push(TraceEntry {
                    cycle,
                    event: Event::Move(lm.clone()),
                });
                sim.run.push(lm);
            }
        }
    }
    for cycle in cfg.horizon + 1..=cfg.horizon + cfg.drain {
        if machine_turn(m, &mut sim, cycle)? {
            break;
        }
    }
    Ok(sim)
}
