//! Concrete strategies, the rule transformers, proof synthesis, the recurrence
//! equivalence translator and the counterstrategy loop.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::bits::{defusion, fusions, shortlex, Bits, InfBits};
use crate::calculus::{check_proof, check_step, Kind, Proof, ProofError, RuleInstance, StepError};
use crate::kernel::{
    is_numeral, parse_replicative, parse_thread_move, CellMove, Game, GameExpr, Labmove, Player,
    Reading, Run,
};
use crate::machines::{
    compose_modus_ponens, compose_transitive, reactive, relabel, silent_machine, Action,
    Environment, Machine, Network, Port, Reactive, Responder, Router,
};
use crate::syntax::{clubsuit, Cirquent, Formula};

fn component(mv: &str) -> Option<(u8, &str)> {
    if let Some(r) = mv.strip_prefix("1.") {
        Some((1, r))
    } else {
        mv.strip_prefix("2.").map(|r| (2, r))
    }
}

/// Mirrors `1.α ↔ 2.α`. Wins `¬A ∨ A` for every `A`.
pub fn copycat() -> Box<dyn Machine> {
    reactive(|mv: &str| match component(mv) {
        Some((1, r)) => vec![format!("2.{r}")],
        Some((_, r)) => vec![format!("1.{r}")],
        None => Vec::new(),
    })
}

/// Copycat between the paired oformulas of an axiom with `2n` oformulas.
pub fn axiom_copycat(n: usize) -> Box<dyn Machine> {
    reactive(move |mv: &str| {
        let Some(mut cm) = CellMove::parse(mv, n) else {
            return Vec::new();
        };
        if cm.a > 2 * n {
            return Vec::new();
        }
        cm.a = if cm.a % 2 == 1 { cm.a + 1 } else { cm.a - 1 };
        vec![cm.to_string()]
    })
}

/// Plays `?u(¬A) ∨ !c(A)` by copying `1.w.α ↔ 2.w.α`.
pub fn st_to_cst() -> Box<dyn Machine> {
    copycat()
}

/// Plays `?c(A∧¬B) ∨ (?c¬A ∨ !cB)`: `1.w.1.α ↔ 2.1.w.α`, `1.w.2.α ↔ 2.2.w.α`.
pub fn cst_distribution() -> Box<dyn Machine> {
    reactive(|mv: &str| match component(mv) {
        Some((1, r)) => {
            let Some((w, rest)) = parse_thread_move(r) else {
                return Vec::new();
            };
            match component(rest) {
                Some((k, alpha)) => vec![format!("2.{k}.{w}.{alpha}")],
                None => Vec::new(),
            }
        }
        Some((_, r)) => {
            let Some((k, rest)) = component(r) else {
                return Vec::new();
            };
            match parse_thread_move(rest) {
                Some((w, alpha)) => vec![format!("1.{w}.{k}.{alpha}")],
                None => Vec::new(),
            }
        }
        None => Vec::new(),
    })
}

/// Plays `?c_old(¬A) ∨ A`, never replicating: `1.ε.α ↔ 2.α`.
pub fn cst_elimination() -> Box<dyn Machine> {
    reactive(|mv: &str| match component(mv) {
        Some((1, r)) => match parse_thread_move(r) {
            Some((w, alpha)) if w.is_empty() => vec![format!("2.{alpha}")],
            _ => Vec::new(),
        },
        Some((_, r)) => vec![format!("1.e.{r}")],
        None => Vec::new(),
    })
}

/// M1: plays `?c_old(¬A) ∨ !c_new(A)`.
#[derive(Debug, Clone, Default)]
pub struct OldToNew {
    nodes: BTreeSet<Bits>,
}

impl OldToNew {
    pub fn new() -> Self {
        OldToNew {
            nodes: BTreeSet::from([Bits::empty()]),
        }
    }

    fn is_leaf(&self, w: &Bits) -> bool {
        self.nodes.contains(w) && !self.nodes.contains(&w.pushed(false))
    }
}

impl Responder for OldToNew {
    fn respond(&mut self, mv: &str) -> Vec<String> {
        match component(mv) {
            Some((1, r)) => match parse_thread_move(r) {
                Some((w, beta)) => vec![format!("2.{w}.{beta}")],
                None => Vec::new(),
            },
            Some((_, r)) => {
                let Some((w, beta)) = parse_thread_move(r) else {
                    return Vec::new();
                };
                let mut out = Vec::new();
                for p in w.prefixes().filter(|p| p.len() < w.len()) {
                    if self.is_leaf(&p) {
                        out.push(format!("1.{p}:"));
                        self.nodes.insert(p.pushed(false));
                        self.nodes.insert(p.pushed(true));
                    }
                }
                out.push(format!("1.{w}.{beta}"));
                out
            }
            None => Vec::new(),
        }
    }
}

pub fn bridge_old_to_new() -> Box<dyn Machine> {
    Box::new(Reactive::new(OldToNew::new()))
}

/// The function `f` from the leaves of the replication tree of `!c_old A` to
/// addresses of `?c_new ¬A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafMap {
    map: BTreeMap<Bits, Bits>,
}

impl Default for LeafMap {
    fn default() -> Self {
        LeafMap {
            map: BTreeMap::from([(Bits::empty(), Bits::empty())]),
        }
    }
}

impl LeafMap {
    pub fn get(&self, leaf: &Bits) -> Option<&Bits> {
        self.map.get(leaf)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Bits, &Bits)> {
        self.map.iter()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Bits> {
        self.map.keys()
    }

    /// The leaf on the way to `v`.
    pub fn leaf_of(&self, v: &InfBits) -> Option<&Bits> {
        self.map.keys().find(|l| crate::bits::is_prefix(l, v))
    }

    /// Values are pairwise prefix-incomparable.
    pub fn is_prefix_free(&self) -> bool {
        let vals: Vec<&Bits> = self.map.values().collect();
        vals.iter().enumerate().all(|(i, a)| {
            vals.iter()
                .enumerate()
                .all(|(j, b)| i == j || !a.is_prefix_of(b))
        })
    }

    /// `x1 ≼ x2 ⇒ f(x1) ≼ f(x2)` against an earlier state.
    pub fn is_monotone_after(&self, before: &LeafMap) -> bool {
        before.map.iter().all(|(x1, f1)| {
            self.map
                .iter()
                .filter(|(x2, _)| x1.is_prefix_of(x2))
                .all(|(_, f2)| f1.is_prefix_of(f2))
        })
    }
}

/// M2: plays `?c_new(¬A) ∨ !c_old(A)`.
///
/// The verbatim replication step sets `f(w0)=v0, f(w1)=v1`. The `fresh` variant
/// pads with zeros past every address already used below `v`, so earlier
/// moves that were ignored never leak into a new leaf's thread.
#[derive(Debug, Clone, Default)]
pub struct NewToOld {
    f: LeafMap,
    used: BTreeSet<Bits>,
    fresh: bool,
}

impl NewToOld {
    pub fn verbatim() -> Self {
        NewToOld::default()
    }

    pub fn fresh() -> Self {
        NewToOld {
            fresh: true,
            ..NewToOld::default()
        }
    }

    pub fn leaf_map(&self) -> &LeafMap {
        &self.f
    }

    /// The thread of `?c_new ¬A` synchronised with thread `v` of `!c_old A`:
    /// `f(y)·0^m·v'` where `y·v' = v`, `y` a leaf, and `0^m` steps past every
    /// address used below `f(y)`. Same number of 1s as `v`.
    pub fn witness(&self, v: &InfBits) -> Option<InfBits> {
        let leaf = self.f.leaf_of(v)?;
        let fy = self.f.get(leaf)?;
        let pad = self
            .used
            .iter()
            .filter(|u| fy.is_prefix_of(u))
            .map(|u| u.len() - fy.len())
            .max()
            .unwrap_or(0);
        let rest = v.take(v.prefix().len().max(leaf.len())).suffix(leaf.len());
        let prefix = fy.concat(&Bits::zeros(pad)).concat(&rest);
        Some(InfBits::new(prefix, v.tail()))
    }

    fn replicate(&mut self, w: &Bits) {
        let Some(v) = self.f.map.remove(w) else {
            return;
        };
        let pad = if self.fresh {
            self.used
                .iter()
                .filter(|u| v.is_prefix_of(u))
                .map(|u| u.len() - v.len())
                .max()
                .unwrap_or(0)
        } else {
            0
        };
        let base = v.concat(&Bits::zeros(pad));
        self.f.map.insert(w.pushed(false), base.pushed(false));
        self.f.map.insert(w.pushed(true), base.pushed(true));
    }

    fn step(&mut self, mv: &str) -> Vec<String> {
        match component(mv) {
            Some((2, r)) => {
                if let Some(w) = parse_replicative(r) {
                    self.replicate(&w);
                    return Vec::new();
                }
                let Some((w, beta)) = parse_thread_move(r) else {
                    return Vec::new();
                };
                let targets: Vec<Bits> = self
                    .f
                    .iter()
                    .filter(|(u, _)| w.is_prefix_of(u))
                    .map(|(_, fu)| fu.clone())
                    .collect();
                targets
                    .into_iter()
                    .map(|fu| {
                        self.used.insert(fu.clone());
                        format!("1.{fu}.{beta}")
                    })
                    .collect()
            }
            Some((_, r)) => {
                let Some((w, beta)) = parse_thread_move(r) else {
                    return Vec::new();
                };
                self.used.insert(w.clone());
                let below = self
                    .f
                    .iter()
                    .find(|(_, fx)| fx.is_proper_prefix_of(&w))
                    .map(|(x, fx)| (x.clone(), fx.clone()));
                if let Some((x, fx)) = below {
                    if w.suffix(fx.len()).ones() > 0 {
                        return Vec::new();
                    }
                    self.f.map.insert(x.clone(), w);
                    return vec![format!("2.{x}.{beta}")];
                }
                self.f
                    .iter()
                    .filter(|(_, fy)| w.is_prefix_of(fy))
                    .map(|(y, _)| format!("2.{y}.{beta}"))
                    .collect()
            }
            None => Vec::new(),
        }
    }
}

impl Responder for NewToOld {
    fn respond(&mut self, mv: &str) -> Vec<String> {
        let before = self.f.clone();
        let out = self.step(mv);
        debug_assert!(self.f.is_prefix_free(), "leaf map lost prefix-freeness");
        debug_assert!(self.f.is_monotone_after(&before), "leaf map not monotone");
        out
    }
}

pub fn bridge_new_to_old() -> Box<dyn Machine> {
    Box::new(Reactive::new(NewToOld::verbatim()))
}

pub fn bridge_new_to_old_fresh() -> Box<dyn Machine> {
    Box::new(Reactive::new(NewToOld::fresh()))
}

/// From a machine playing `F♣` to one playing `!c F`: `w.α ↔ 1;w.α`.
pub fn clubsuit_adapter(m: Box<dyn Machine>) -> Box<dyn Machine> {
    relabel(
        m,
        |mv: &str| match parse_thread_move(mv) {
            Some(_) => vec![format!("1;{mv}")],
            None => Vec::new(),
        },
        |mv: &str| match mv.strip_prefix("1;") {
            Some(r) if parse_thread_move(r).is_some() => vec![r.to_string()],
            _ => Vec::new(),
        },
    )
}

/// From a machine playing `F♣` to one playing `F`.
pub fn formula_adapter(m: Box<dyn Machine>) -> Box<dyn Machine> {
    compose_modus_ponens(
        cst_elimination(),
        compose_modus_ponens(bridge_new_to_old(), clubsuit_adapter(m)),
    )
}

/// Move translation between the real cirquent `B` and the simulated premise `A`.
#[derive(Debug, Clone)]
enum CellMap {
    Permute {
        forms: Option<usize>,
        coords: Option<usize>,
    },
    Weaken {
        dropped: usize,
        coords: Vec<usize>,
    },
    Contract {
        at: usize,
    },
    Split {
        at: usize,
    },
    Duplicate {
        at: usize,
    },
    Merge {
        at: usize,
        first: BTreeSet<usize>,
        second: BTreeSet<usize>,
    },
    Rec {
        at: usize,
        insert: usize,
    },
    CoRecZero {
        at: usize,
        used: BTreeSet<Bits>,
    },
    CoRec {
        at: usize,
        over: Vec<usize>,
    },
}

fn swap_at(i: usize, at: usize) -> usize {
    if i == at {
        at + 1
    } else if i == at + 1 {
        at
    } else {
        i
    }
}

fn cell(a: usize, coords: Vec<Bits>, rest: impl Into<String>) -> CellMove {
    CellMove {
        a: a + 1,
        coords,
        rest: rest.into(),
    }
}

fn all_fusions(parts: &[Bits]) -> Vec<Bits> {
    fusions(parts)
        .map(|s| s.into_iter().collect())
        .unwrap_or_default()
}

impl CellMap {
    fn inward(&mut self, cm: CellMove) -> Vec<CellMove> {
        let a = cm.a - 1;
        let mut coords = cm.coords;
        match self {
            CellMap::Permute { forms, coords: c } => {
                let a = forms.map_or(a, |at| swap_at(a, at));
                if let Some(at) = *c {
                    coords.swap(at, at + 1);
                }
                vec![cell(a, coords, cm.rest)]
            }
            CellMap::Weaken {
                dropped,
                coords: gone,
            } => {
                if a == *dropped || gone.iter().any(|&j| !coords[j].is_empty()) {
                    return Vec::new();
                }
                for &j in gone.iter().rev() {
                    coords.remove(j);
                }
                vec![cell(if a > *dropped { a - 1 } else { a }, coords, cm.rest)]
            }
            CellMap::Contract { at } => {
                let at = *at;
                if a != at {
                    return vec![cell(if a > at { a + 1 } else { a }, coords, cm.rest)];
                }
                let Some((u, alpha)) = parse_thread_move(&cm.rest) else {
                    return Vec::new();
                };
                match u.get(0) {
                    None => vec![
                        cell(at, coords.clone(), format!("e.{alpha}")),
                        cell(at + 1, coords, format!("e.{alpha}")),
                    ],
                    Some(b) => {
                        let target = if b { at + 1 } else { at };
                        vec![cell(target, coords, format!("{}.{alpha}", u.suffix(1)))]
                    }
                }
            }
            CellMap::Split { at } => {
                let at = *at;
                if a != at {
                    return vec![cell(if a > at { a + 1 } else { a }, coords, cm.rest)];
                }
                match component(&cm.rest) {
                    Some((1, r)) => vec![cell(at, coords, r)],
                    Some((_, r)) => vec![cell(at + 1, coords, r)],
                    None => Vec::new(),
                }
            }
            CellMap::Duplicate { at } => {
                let at = *at;
                let pair = [coords[at].clone(), coords[at + 1].clone()];
                coords.remove(at + 1);
                all_fusions(&pair)
                    .into_iter()
                    .map(|v| {
                        let mut cs = coords.clone();
                        cs[at] = v;
                        cell(a, cs, cm.rest.clone())
                    })
                    .collect()
            }
            CellMap::Merge { at, first, second } => {
                let at = *at;
                let u = coords[at].clone();
                let (u1, u2) = match (first.contains(&a), second.contains(&a)) {
                    (true, true) => {
                        let d = defusion(&u, 2).expect("arity 2");
                        (d[0].clone(), d[1].clone())
                    }
                    (true, false) => (u, Bits::empty()),
                    (false, true) => (Bits::empty(), u),
                    (false, false) => (Bits::empty(), Bits::empty()),
                };
                coords[at] = u1;
                coords.insert(at + 1, u2);
                vec![cell(a, coords, cm.rest)]
            }
            CellMap::Rec { at, insert } => {
                if a != *at {
                    coords.insert(*insert, Bits::empty());
                    return vec![cell(a, coords, cm.rest)];
                }
                let Some((u, alpha)) = parse_thread_move(&cm.rest) else {
                    return Vec::new();
                };
                coords.insert(*insert, u);
                vec![cell(a, coords, alpha)]
            }
            CellMap::CoRecZero { at, used } => {
                if a != *at {
                    return vec![cell(a, coords, cm.rest)];
                }
                let Some((v, beta)) = parse_thread_move(&cm.rest) else {
                    return Vec::new();
                };
                used.insert(v.clone());
                if v.ones() > 0 {
                    return Vec::new();
                }
                vec![cell(a, coords, beta)]
            }
            CellMap::CoRec { at, over } => {
                if a != *at {
                    return vec![cell(a, coords, cm.rest)];
                }
                let Some((u, alpha)) = parse_thread_move(&cm.rest) else {
                    return Vec::new();
                };
                let parts = defusion(&u, over.len()).expect("positive arity");
                for (j, p) in over.iter().zip(parts) {
                    coords[*j] = p;
                }
                vec![cell(a, coords, alpha)]
            }
        }
    }

    fn outward(&mut self, cm: CellMove) -> Vec<CellMove> {
        let a = cm.a - 1;
        let mut coords = cm.coords;
        match self {
            CellMap::Permute { .. } => self.inward(CellMove {
                a: a + 1,
                coords,
                rest: cm.rest,
            }),
            CellMap::Weaken {
                dropped,
                coords: gone,
            } => {
                for &j in gone.iter() {
                    coords.insert(j, Bits::empty());
                }
                vec![cell(if a >= *dropped { a + 1 } else { a }, coords, cm.rest)]
            }
            CellMap::Contract { at } | CellMap::Split { at } => {
                let at = *at;
                let contract = matches!(self, CellMap::Contract { .. });
                if a < at {
                    return vec![cell(a, coords, cm.rest)];
                }
                if a > at + 1 {
                    return vec![cell(a - 1, coords, cm.rest)];
                }
                let second = a == at + 1;
                if contract {
                    let Some((u, alpha)) = parse_thread_move(&cm.rest) else {
                        return Vec::new();
                    };
                    let mut w = Bits::empty().pushed(second);
                    w = w.concat(&u);
                    vec![cell(at, coords, format!("{w}.{alpha}"))]
                } else {
                    let k = if second { 2 } else { 1 };
                    vec![cell(at, coords, format!("{k}.{}", cm.rest))]
                }
            }
            CellMap::Duplicate { at } => {
                let at = *at;
                let d = defusion(&coords[at], 2).expect("arity 2");
                coords[at] = d[0].clone();
                coords.insert(at + 1, d[1].clone());
                vec![cell(a, coords, cm.rest)]
            }
            CellMap::Merge { at, first, second } => {
                let at = *at;
                let u2 = coords.remove(at + 1);
                let u1 = coords[at].clone();
                let merged = match (first.contains(&a), second.contains(&a)) {
                    (true, true) => all_fusions(&[u1, u2]),
                    (true, false) => vec![u1],
                    (false, true) => vec![u2],
                    (false, false) => vec![Bits::empty()],
                };
                merged
                    .into_iter()
                    .map(|v| {
                        let mut cs = coords.clone();
                        cs[at] = v;
                        cell(a, cs, cm.rest.clone())
                    })
                    .collect()
            }
            CellMap::Rec { at, insert } => {
                let u = coords.remove(*insert);
                if a == *at {
                    vec![cell(a, coords, format!("{u}.{}", cm.rest))]
                } else {
                    vec![cell(a, coords, cm.rest)]
                }
            }
            CellMap::CoRecZero { at, used } => {
                if a != *at {
                    return vec![cell(a, coords, cm.rest)];
                }
                let k = used
                    .iter()
                    .map(|v| {
                        let lead = v.as_slice().iter().take_while(|b| !**b).count();
                        lead.min(v.len().saturating_sub(1)) + 1
                    })
                    .max()
                    .unwrap_or(0);
                let u = Bits::zeros(k);
                used.insert(u.clone());
                vec![cell(a, coords, format!("{u}.{}", cm.rest))]
            }
            CellMap::CoRec { at, over } => {
                if a != *at {
                    return vec![cell(a, coords, cm.rest)];
                }
                let parts: Vec<Bits> = over.iter().map(|&j| coords[j].clone()).collect();
                for &j in over.iter() {
                    coords[j] = Bits::empty();
                }
                all_fusions(&parts)
                    .into_iter()
                    .map(|v| cell(a, coords.clone(), format!("{v}.{}", cm.rest)))
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone)]
struct CellRouter {
    real: usize,
    inner: usize,
    map: CellMap,
}

impl Router for CellRouter {
    fn from_env(&mut self, mv: &str) -> Vec<(usize, String)> {
        let Some(cm) = CellMove::parse(mv, self.real) else {
            return Vec::new();
        };
        self.map
            .inward(cm)
            .into_iter()
            .map(|c| (0, c.to_string()))
            .collect()
    }

    fn from_node(&mut self, _: usize, mv: &str) -> Vec<(Port, String)> {
        let Some(cm) = CellMove::parse(mv, self.inner) else {
            return Vec::new();
        };
        self.map
            .outward(cm)
            .into_iter()
            .map(|c| (Port::Real, c.to_string()))
            .collect()
    }

    fn box_clone(&self) -> Box<dyn Router> {
        Box::new(self.clone())
    }
}

/// From a machine playing `premise`, a machine playing `conclusion`.
pub fn transform_rule(
    r: &RuleInstance,
    premise: &Cirquent,
    conclusion: &Cirquent,
    m: Box<dyn Machine>,
) -> Result<Box<dyn Machine>, StepError> {
    check_step(Some(premise), conclusion, r)?;
    let map = match r {
        RuleInstance::Axiom => return Err(StepError::AxiomWithPremise),
        RuleInstance::Exchange {
            kind: Kind::Undergroup,
            ..
        }
        | RuleInstance::Duplication {
            kind: Kind::Undergroup,
            ..
        } => return Ok(m),
        RuleInstance::Exchange { kind, at } => CellMap::Permute {
            forms: (*kind == Kind::Oformula).then_some(*at),
            coords: (*kind == Kind::Overgroup).then_some(*at),
        },
        RuleInstance::Duplication { at, .. } => CellMap::Duplicate { at: *at },
        RuleInstance::Merging { at } => CellMap::Merge {
            at: *at,
            first: premise.over[*at].clone(),
            second: premise.over[*at + 1].clone(),
        },
        RuleInstance::Weakening { of, .. } => {
            if premise.len() == conclusion.len() {
                return Ok(m);
            }
            let gone = (0..conclusion.over.len())
                .filter(|&j| conclusion.over[j] == BTreeSet::from([*of]))
                .collect();
            CellMap::Weaken {
                dropped: *of,
                coords: gone,
            }
        }
        RuleInstance::Contraction { of } => CellMap::Contract { at: *of },
        RuleInstance::OrIntro { of } | RuleInstance::AndIntro { of } => CellMap::Split { at: *of },
        RuleInstance::RecIntro { of, insert } => CellMap::Rec {
            at: *of,
            insert: *insert,
        },
        RuleInstance::CoRecIntro { of, over } if over.is_empty() => CellMap::CoRecZero {
            at: *of,
            used: BTreeSet::new(),
        },
        RuleInstance::CoRecIntro { of, over } => CellMap::CoRec {
            at: *of,
            over: over.iter().copied().collect(),
        },
    };
    let router = CellRouter {
        real: conclusion.over.len(),
        inner: premise.over.len(),
        map,
    };
    Ok(Box::new(Network::new(vec![m], Box::new(router))))
}

/// A machine for the conclusion cirquent of a checked proof.
pub fn synthesize_cirquent(p: &Proof) -> Result<Box<dyn Machine>, ProofError> {
    check_proof(p)?;
    let first = &p.steps[0].cirquent;
    let mut m = axiom_copycat(first.len() / 2);
    for k in 1..p.steps.len() {
        let (prev, cur) = (&p.steps[k - 1], &p.steps[k]);
        m = transform_rule(&cur.rule, &prev.cirquent, &cur.cirquent, m).map_err(|reason| {
            ProofError::Step {
                step: k + 1,
                reason,
            }
        })?;
    }
    Ok(m)
}

/// The formula a proof's conclusion is the `♣` form of, if any.
pub fn clubsuit_formula(c: &Cirquent) -> Option<&Formula> {
    match c.formulas.as_slice() {
        [f] if *c == clubsuit(f) => Some(f),
        _ => None,
    }
}

/// A machine together with the game it is meant to win.
pub struct Solution {
    pub machine: Box<dyn Machine>,
    pub game: GameExpr,
}

/// Synthesizes a solution; a proof of `F♣` yields a machine playing `F`.
pub fn synthesize(p: &Proof) -> Result<Solution, ProofError> {
    let m = synthesize_cirquent(p)?;
    let conclusion = p.conclusion().ok_or(ProofError::Empty)?;
    Ok(match clubsuit_formula(conclusion) {
        Some(f) => Solution {
            machine: formula_adapter(m),
            game: GameExpr::from_formula(f, Reading::New),
        },
        None => Solution {
            machine: m,
            game: GameExpr::from_cirquent(conclusion, Reading::New),
        },
    })
}

/// `T→L` reads the antecedent with the old countable recurrence and the
/// consequent with the new one; `L→T` the other way round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    OldToNew,
    NewToOld,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::OldToNew => Direction::NewToOld,
            Direction::NewToOld => Direction::OldToNew,
        }
    }

    fn readings(self) -> (Reading, Reading) {
        match self {
            Direction::OldToNew => (Reading::Old, Reading::New),
            Direction::NewToOld => (Reading::New, Reading::Old),
        }
    }
}

/// The game `F_from → F_to` played by [`equivalence_machine`].
pub fn equivalence_game(f: &Formula, dir: Direction) -> Game {
    let (from, to) = dir.readings();
    Game::Or(
        Box::new(Game::from_formula(f, from).negated()),
        Box::new(Game::from_formula(f, to)),
    )
}

/// A machine playing `¬B ∨ A` from one playing `¬A ∨ B`.
pub fn swap_sides(m: Box<dyn Machine>) -> Box<dyn Machine> {
    let swap = |mv: &str| match component(mv) {
        Some((1, r)) => vec![format!("2.{r}")],
        Some((_, r)) => vec![format!("1.{r}")],
        None => Vec::new(),
    };
    relabel(m, swap, swap)
}

#[derive(Debug, Clone)]
struct PairRouter;

impl Router for PairRouter {
    fn from_env(&mut self, mv: &str) -> Vec<(usize, String)> {
        let Some((side, r)) = component(mv) else {
            return Vec::new();
        };
        match component(r) {
            Some((k, rest)) => vec![(k as usize - 1, format!("{side}.{rest}"))],
            None => Vec::new(),
        }
    }

    fn from_node(&mut self, node: usize, mv: &str) -> Vec<(Port, String)> {
        match component(mv) {
            Some((side, rest)) => vec![(Port::Real, format!("{side}.{}.{rest}", node + 1))],
            None => Vec::new(),
        }
    }

    fn box_clone(&self) -> Box<dyn Router> {
        Box::new(self.clone())
    }
}

/// From machines for `A→A'` and `B→B'`, one for `A∘B → A'∘B'` with `∘` either
/// `∧` or `∨`.
pub fn lift_pair(left: Box<dyn Machine>, right: Box<dyn Machine>) -> Box<dyn Machine> {
    Box::new(Network::new(vec![left, right], Box::new(PairRouter)))
}

#[derive(Clone)]
struct Copy {
    machine: Box<dyn Machine>,
    tape: Run,
    inbox: Vec<String>,
}

/// Plays `!u A` by running a copy of a machine for `A` in every thread. Copies
/// are kept on the leaves of a trie and cloned when the adversary moves below
/// a leaf.
#[derive(Clone)]
pub struct Promote {
    copies: BTreeMap<Bits, Copy>,
    cursor: usize,
    outbox: VecDeque<String>,
}

const PROMOTE_ROUNDS: usize = 10_000;

impl Promote {
    pub fn new(m: Box<dyn Machine>) -> Self {
        let root = Copy {
            machine: m,
            tape: Run::new(),
            inbox: Vec::new(),
        };
        Promote {
            copies: BTreeMap::from([(Bits::empty(), root)]),
            cursor: 0,
            outbox: VecDeque::new(),
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Bits> {
        self.copies.keys()
    }

    fn deliver(&mut self, w: &Bits, alpha: &str) {
        while let Some(l) = self
            .copies
            .keys()
            .find(|l| l.is_proper_prefix_of(w))
            .cloned()
        {
            let c = self.copies.remove(&l).expect("leaf present");
            self.copies.insert(l.pushed(false), c.clone());
            self.copies.insert(l.pushed(true), c);
        }
        for (l, c) in self.copies.iter_mut() {
            if w.is_prefix_of(l) {
                c.inbox.push(alpha.to_string());
            }
        }
    }

    fn settle(&mut self) {
        for _ in 0..PROMOTE_ROUNDS {
            let mut progress = false;
            for (l, c) in self.copies.iter_mut() {
                match c.machine.query(&c.tape) {
                    Action::Moves(ms) => {
                        for mv in ms {
                            progress = true;
                            self.outbox.push_back(format!("{l}.{mv}"));
                            c.tape.push(Labmove::top(mv));
                        }
                    }
                    Action::Grant => {
                        if !c.inbox.is_empty() {
                            progress = true;
                            for m in c.inbox.drain(..) {
                                c.tape.push(Labmove::bot(m));
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

impl Machine for Promote {
    fn query(&mut self, tape: &Run) -> Action {
        let fresh: Vec<String> = tape[self.cursor.min(tape.len())..]
            .iter()
            .filter(|lm| lm.player == Player::Bot)
            .map(|lm| lm.mv.clone())
            .collect();
        self.cursor = tape.len();
        for mv in fresh {
            if let Some((w, alpha)) = parse_thread_move(&mv) {
                self.deliver(&w, alpha);
                self.settle();
            }
        }
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

/// Wins `!u(A→B) → (!uA → !uB)` and its countable twin; `m` wins `A→B`.
fn through_recurrence(m: Box<dyn Machine>, countable: bool) -> Box<dyn Machine> {
    let lifted = Box::new(Promote::new(m));
    let lifted = if countable {
        compose_modus_ponens(st_to_cst(), lifted)
    } else {
        lifted
    };
    compose_modus_ponens(cst_distribution(), lifted)
}

/// A machine winning `F_T → F_L` (or the converse), built by recursion on `f`.
pub fn equivalence_machine(f: &Formula, dir: Direction) -> Box<dyn Machine> {
    match f {
        Formula::Atom(_) | Formula::NegAtom(_) => copycat(),
        Formula::And(a, b) | Formula::Or(a, b) => {
            lift_pair(equivalence_machine(a, dir), equivalence_machine(b, dir))
        }
        Formula::CRec(e) => {
            let inner = through_recurrence(equivalence_machine(e, dir), true);
            match dir {
                Direction::OldToNew => compose_transitive(bridge_old_to_new(), inner),
                Direction::NewToOld => compose_transitive(inner, bridge_new_to_old_fresh()),
            }
        }
        Formula::URec(e) => through_recurrence(equivalence_machine(e, dir), false),
        Formula::CCoRec(e) => {
            let neg = Formula::CRec(Box::new(crate::syntax::negate(e)));
            swap_sides(equivalence_machine(&neg, dir.flip()))
        }
        Formula::UCoRec(e) => {
            let neg = Formula::URec(Box::new(crate::syntax::negate(e)));
            swap_sides(equivalence_machine(&neg, dir.flip()))
        }
    }
}

/// Natural numbers already played; hands out fresh ones.
#[derive(Debug, Clone, Default)]
pub struct FreshCounter {
    used: BTreeSet<u64>,
    next: u64,
}

impl FreshCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, n: u64) {
        self.used.insert(n);
    }

    pub fn contains(&self, n: u64) -> bool {
        self.used.contains(&n)
    }

    pub fn next(&mut self) -> u64 {
        while self.used.contains(&self.next) {
            self.next += 1;
        }
        let n = self.next;
        self.used.insert(n);
        n
    }
}

/// The numeral a move ends with, if any.
pub fn trailing_numeral(mv: &str) -> Option<u64> {
    let tail = mv.rsplit(['.', ';', ':']).next()?;
    if is_numeral(tail) {
        tail.parse().ok()
    } else {
        None
    }
}

/// ⊥'s loop in `?c(¬P) ∨ !u(P)`: on the i'th grant plays `2.w_i.u` with `w_i`
/// the i'th string in shortlex order and `u` fresh.
#[derive(Debug, Clone, Default)]
pub struct CounterLoop {
    fresh: FreshCounter,
    seen: usize,
}

pub fn counterstrategy_loop() -> CounterLoop {
    CounterLoop::default()
}

impl CounterLoop {
    pub fn counter(&self) -> &FreshCounter {
        &self.fresh
    }
}

impl Environment for CounterLoop {
    fn respond(&mut self, tape: &Run, grant_no: usize) -> Vec<String> {
        for lm in &tape[self.seen.min(tape.len())..] {
            if let Some(n) = trailing_numeral(&lm.mv) {
                self.fresh.observe(n);
            }
        }
        self.seen = tape.len();
        let Ok(w) = shortlex(grant_no as u64) else {
            return Vec::new();
        };
        vec![format!("2.{w}.{}", self.fresh.next())]
    }
}

/// Names accepted by [`catalog`].
pub const CATALOG: &[&str] = &[
    "silent",
    "copycat",
    "axiom-copycat:N",
    "bridge-old-new",
    "bridge-new-old",
    "bridge-new-old-fresh",
    "st-to-cst",
    "cst-distribution",
    "cst-elimination",
];

pub fn catalog(name: &str) -> Option<Box<dyn Machine>> {
    Some(match name {
        "silent" => silent_machine(),
        "copycat" => copycat(),
        "bridge-old-new" => bridge_old_to_new(),
        "bridge-new-old" => bridge_new_to_old(),
        "bridge-new-old-fresh" => bridge_new_to_old_fresh(),
        "st-to-cst" => st_to_cst(),
        "cst-distribution" => cst_distribution(),
        "cst-elimination" => cst_elimination(),
        _ => {
            let n: usize = name.strip_prefix("axiom-copycat:")?.parse().ok()?;
            if n == 0 {
                return None;
            }
            axiom_copycat(n)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ProofStep;
    use crate::kernel::Run;
    use crate::machines::{scripted_environment, scripted_machine, simulate, SimConfig};
    use crate::syntax::{parse_cirquent, parse_formula};

    /// The machine's replies when the environment plays `moves` on the first grant.
    fn replies(m: &mut dyn Machine, moves: &[&str]) -> Vec<String> {
        let script = vec![(1, moves.iter().map(|s| s.to_string()).collect())];
        let sim = simulate(m, &mut scripted_environment(script), &SimConfig::new(40)).unwrap();
        sim.run
            .moves_of(Player::Top)
            .into_iter()
            .map(String::from)
            .collect()
    }

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn axiom_copycat_pairs() {
        assert_eq!(
            replies(&mut *axiom_copycat(1), &["1;0.5"]),
            strs(&["2;0.5"])
        );
        assert_eq!(
            replies(&mut *axiom_copycat(2), &["4;e,10.7", "3;e,1.2"]),
            strs(&["3;e,10.7", "4;e,1.2"])
        );
        assert!(replies(&mut *axiom_copycat(2), &[]).is_empty());
    }

    #[test]
    fn mirror_strategies() {
        assert_eq!(replies(&mut *st_to_cst(), &["1.0.3"]), strs(&["2.0.3"]));
        assert_eq!(replies(&mut *st_to_cst(), &["2.0.3"]), strs(&["1.0.3"]));
        assert_eq!(
            replies(&mut *cst_distribution(), &["1.0.1.3"]),
            strs(&["2.1.0.3"])
        );
        assert_eq!(
            replies(&mut *cst_distribution(), &["2.2.e.3"]),
            strs(&["1.e.2.3"])
        );
        assert_eq!(replies(&mut *cst_elimination(), &["2.3"]), strs(&["1.e.3"]));
        assert_eq!(replies(&mut *cst_elimination(), &["1.e.3"]), strs(&["2.3"]));
        for m in [st_to_cst(), cst_distribution(), cst_elimination()] {
            assert!(replies(&mut *m.clone(), &[]).is_empty());
        }
    }

    #[test]
    fn old_to_new_replicates_down_to_the_node() {
        assert_eq!(
            replies(&mut *bridge_old_to_new(), &["2.01.3"]),
            strs(&["1.e:", "1.0:", "1.01.3"])
        );
        assert_eq!(
            replies(&mut *bridge_old_to_new(), &["2.1.3", "2.e.4", "1.0.5"]),
            strs(&["1.e:", "1.1.3", "1.e.4", "2.0.5"])
        );
    }

    fn new_to_old(variant: NewToOld, moves: &[&str]) -> (Vec<String>, LeafMap) {
        let mut m = Reactive::new(variant);
        let out = replies(&mut m, moves);
        (out, m.responder().leaf_map().clone())
    }

    fn leaf_map(pairs: &[(&str, &str)]) -> Vec<(Bits, Bits)> {
        pairs
            .iter()
            .map(|(a, b)| (Bits::parse_token(a).unwrap(), Bits::parse_token(b).unwrap()))
            .collect()
    }

    fn entries(f: &LeafMap) -> Vec<(Bits, Bits)> {
        f.iter().map(|(a, b)| (a.clone(), b.clone())).collect()
    }

    #[test]
    fn new_to_old_cases() {
        let (out, f) = new_to_old(NewToOld::verbatim(), &["2.e:"]);
        assert!(out.is_empty());
        assert_eq!(entries(&f), leaf_map(&[("0", "0"), ("1", "1")]));

        let (out, _) = new_to_old(NewToOld::verbatim(), &["2.e.3"]);
        assert_eq!(out, strs(&["1.e.3"]));

        let (out, f) = new_to_old(NewToOld::verbatim(), &["1.01.3"]);
        assert!(out.is_empty());
        assert_eq!(entries(&f), leaf_map(&[("e", "e")]));

        let (out, f) = new_to_old(NewToOld::verbatim(), &["1.00.3", "2.e.4"]);
        assert_eq!(out, strs(&["2.e.3", "1.00.4"]));
        assert_eq!(entries(&f), leaf_map(&[("e", "00")]));

        // w equal to f(x) falls through to the prefix branch.
        let (out, _) = new_to_old(NewToOld::verbatim(), &["2.e:", "1.1.3", "1.e.4"]);
        assert_eq!(out, strs(&["2.1.3", "2.0.4", "2.1.4"]));

        let (out, _) = new_to_old(NewToOld::verbatim(), &["2.e:", "2.e.5"]);
        assert_eq!(out, strs(&["1.0.5", "1.1.5"]));
    }

    #[test]
    fn fresh_replication_skips_used_addresses() {
        let (_, f) = new_to_old(NewToOld::verbatim(), &["1.1.5", "2.e:"]);
        assert_eq!(entries(&f), leaf_map(&[("0", "0"), ("1", "1")]));
        let (_, f) = new_to_old(NewToOld::fresh(), &["1.1.5", "2.e:"]);
        assert_eq!(entries(&f), leaf_map(&[("0", "00"), ("1", "01")]));
        let (_, f) = new_to_old(NewToOld::fresh(), &["2.e:"]);
        assert_eq!(entries(&f), leaf_map(&[("0", "0"), ("1", "1")]));
    }

    #[test]
    fn witness_follows_leaf_map() {
        let one = InfBits::zero_tailed(Bits::parse_token("1").unwrap());
        let mut m = NewToOld::verbatim();
        for mv in ["2.e:", "1.100.3", "2.0:"] {
            m.respond(mv);
        }
        assert_eq!(
            m.leaf_map()
                .get(&Bits::parse_token("1").unwrap())
                .unwrap()
                .to_string(),
            "100"
        );
        assert_eq!(m.witness(&one).unwrap().to_string(), "1:0*");
        let v = InfBits::zero_tailed(Bits::parse_token("01").unwrap());
        assert_eq!(m.witness(&v).unwrap().to_string(), "01:0*");
        let mut m = NewToOld::fresh();
        for mv in ["1.1.5", "2.e:"] {
            m.respond(mv);
        }
        assert_eq!(m.witness(&one).unwrap().to_string(), "01:0*");
        // ones past the leaf survive, after the padding
        m.respond("1.0100.7");
        assert!(m.respond("1.01001.8").is_empty());
        let v = InfBits::zero_tailed(Bits::parse_token("11").unwrap());
        assert_eq!(m.witness(&v).unwrap().to_string(), "010001:0*");
    }

    #[test]
    fn clubsuit_renaming() {
        let mut m = clubsuit_adapter(scripted_machine(strs(&["1;0.3"])));
        assert_eq!(replies(&mut *m, &[]), strs(&["0.3"]));
        let mut net = Network::new(
            vec![silent_machine()],
            Box::new(CellRouter {
                real: 1,
                inner: 1,
                map: CellMap::Permute {
                    forms: None,
                    coords: None,
                },
            }),
        );
        assert!(replies(&mut net, &["1;0.3"]).is_empty());
        let echo = reactive(|mv: &str| vec![mv.replacen("1;", "1;1", 1)]);
        assert_eq!(
            replies(&mut *clubsuit_adapter(echo), &["0.3"]),
            strs(&["10.3"])
        );
        assert!(replies(&mut *clubsuit_adapter(silent_machine()), &[]).is_empty());
    }

    fn cq(text: &str) -> Cirquent {
        parse_cirquent(text).unwrap()
    }

    /// Forwards every ⊥ move unchanged so the translation is visible.
    fn echo() -> Box<dyn Machine> {
        reactive(|mv: &str| vec![mv.to_string()])
    }

    #[test]
    fn exchange_passes_moves_through() {
        let a = cq("cirquent\nf 1: ~P\nf 2: P\nu 1: 1 2\no 1: 1 2\no 2: 1 2\no 3: 1 2\nend\n");
        let r = RuleInstance::Exchange {
            kind: Kind::Overgroup,
            at: 1,
        };
        let b = crate::calculus::apply_top_down(&a, &r).unwrap();
        let mut m = transform_rule(&r, &a, &b, echo()).unwrap();
        assert_eq!(replies(&mut *m, &["1;0,10,11.3"]), strs(&["1;0,10,11.3"]));
    }

    fn inner_sees(r: &RuleInstance, a: &Cirquent, b: &Cirquent, moves: &[&str]) -> Vec<String> {
        check_step(Some(a), b, r).unwrap();
        let mut router = router_for(r, a, b);
        moves
            .iter()
            .flat_map(|m| router.from_env(m).into_iter().map(|(_, s)| s))
            .collect()
    }

    fn router_for(r: &RuleInstance, a: &Cirquent, b: &Cirquent) -> CellRouter {
        let map = match r {
            RuleInstance::Exchange { kind, at } => CellMap::Permute {
                forms: (*kind == Kind::Oformula).then_some(*at),
                coords: (*kind == Kind::Overgroup).then_some(*at),
            },
            RuleInstance::Contraction { of } => CellMap::Contract { at: *of },
            RuleInstance::OrIntro { of } => CellMap::Split { at: *of },
            _ => unreachable!(),
        };
        CellRouter {
            real: b.over.len(),
            inner: a.over.len(),
            map,
        }
    }

    #[test]
    fn rule_translations() {
        let a = cq("cirquent\nf 1: ~P\nf 2: P\nu 1: 1 2\no 1: 1 2\no 2: 1 2\no 3: 1 2\nend\n");
        let r = RuleInstance::Exchange {
            kind: Kind::Overgroup,
            at: 1,
        };
        let b = crate::calculus::apply_top_down(&a, &r).unwrap();
        assert_eq!(
            inner_sees(&r, &a, &b, &["1;0,10,11.3"]),
            strs(&["1;0,11,10.3"])
        );

        let a = cq("cirquent\nf 1: ~P\nf 2: P\nu 1: 1 2\no 1: 1 2\nend\n");
        let b = cq("cirquent\nf 1: ~P | P\nu 1: 1\no 1: 1\nend\n");
        let r = RuleInstance::OrIntro { of: 0 };
        let mut router = router_for(&r, &a, &b);
        let out: Vec<String> = router
            .from_node(0, "2;0.3")
            .into_iter()
            .map(|(_, s)| s)
            .collect();
        assert_eq!(out, strs(&["1;0.2.3"]));
        assert_eq!(inner_sees(&r, &a, &b, &["1;0.1.3"]), strs(&["1;0.3"]));

        let a = cq("cirquent\nf 1: ?c ~P\nf 2: ?c ~P\nf 3: P\nu 1: 1 2 3\no 1: 1 2 3\nend\n");
        let b = cq("cirquent\nf 1: ?c ~P\nf 2: P\nu 1: 1 2\no 1: 1 2\nend\n");
        let r = RuleInstance::Contraction { of: 0 };
        assert_eq!(
            inner_sees(&r, &a, &b, &["1;0.e.3"]),
            strs(&["1;0.e.3", "2;0.e.3"])
        );
        assert_eq!(
            inner_sees(&r, &a, &b, &["1;0.10.3", "2;1.4"]),
            strs(&["2;0.0.3", "3;1.4"])
        );
    }

    #[test]
    fn duplication_and_merging_use_fusion() {
        let mut dup = CellMap::Duplicate { at: 0 };
        let cm = CellMove::parse("1;01,110.3", 2).unwrap();
        let got: Vec<String> = dup.inward(cm).iter().map(|c| c.to_string()).collect();
        assert_eq!(got, strs(&["1;011100.3", "1;011110.3"]));
        let back = dup.outward(CellMove::parse("1;100110101.3", 1).unwrap());
        assert_eq!(back[0].to_string(), "1;10111,0100.3");

        let mut merge = CellMap::Merge {
            at: 0,
            first: BTreeSet::from([0, 1]),
            second: BTreeSet::from([0]),
        };
        let got = merge.inward(CellMove::parse("1;100110101.3", 1).unwrap());
        assert_eq!(got[0].to_string(), "1;10111,0100.3");
        let got = merge.inward(CellMove::parse("2;01.3", 1).unwrap());
        assert_eq!(got[0].to_string(), "2;01,e.3");
        let got: Vec<String> = merge
            .outward(CellMove::parse("1;001,110.3", 2).unwrap())
            .iter()
            .map(|c| c.to_string())
            .collect();
        assert_eq!(got, strs(&["1;010110.3"]));
    }

    #[test]
    fn corecurrence_without_new_overgroups_pins_zero_thread() {
        let mut map = CellMap::CoRecZero {
            at: 0,
            used: BTreeSet::new(),
        };
        let first = map.outward(CellMove::parse("1;e.3", 1).unwrap());
        assert_eq!(first[0].to_string(), "1;e.e.3");
        assert!(map
            .inward(CellMove::parse("1;e.01.4", 1).unwrap())
            .is_empty());
        assert_eq!(
            map.inward(CellMove::parse("1;e.00.4", 1).unwrap())[0].to_string(),
            "1;e.4"
        );
        let next = map.outward(CellMove::parse("1;e.5", 1).unwrap());
        assert_eq!(next[0].to_string(), "1;e.00.5");
    }

    #[test]
    fn corecurrence_with_overgroups_uses_n_fusion() {
        let mut map = CellMap::CoRec {
            at: 0,
            over: vec![0, 1, 2],
        };
        let got: Vec<String> = map
            .outward(CellMove::parse("1;000,11,001.3", 3).unwrap())
            .iter()
            .map(|c| c.to_string())
            .collect();
        assert_eq!(got, strs(&["1;e,e,e.010010001.3", "1;e,e,e.010010011.3"]));
        let back = map.inward(CellMove::parse("1;e,e,e.010010001.3", 3).unwrap());
        assert_eq!(back[0].to_string(), "1;000,110,001.3");
    }

    #[test]
    fn recurrence_moves_coordinate_into_address() {
        let mut map = CellMap::Rec { at: 1, insert: 1 };
        let got = map.inward(CellMove::parse("2;0.10.3", 1).unwrap());
        assert_eq!(got[0].to_string(), "2;0,10.3");
        let got = map.inward(CellMove::parse("1;0.3", 1).unwrap());
        assert_eq!(got[0].to_string(), "1;0,e.3");
        let got = map.outward(CellMove::parse("2;0,11.3", 2).unwrap());
        assert_eq!(got[0].to_string(), "2;0.11.3");
    }

    #[test]
    fn weakening_ignores_deleted_oformula() {
        let mut map = CellMap::Weaken {
            dropped: 1,
            coords: vec![1],
        };
        assert!(map
            .inward(CellMove::parse("2;e,0.3", 2).unwrap())
            .is_empty());
        let got = map.inward(CellMove::parse("3;1,e.3", 2).unwrap());
        assert_eq!(got[0].to_string(), "2;1.3");
        let got = map.outward(CellMove::parse("2;1.4", 1).unwrap());
        assert_eq!(got[0].to_string(), "3;1,e.4");
    }

    #[test]
    fn undergroup_rules_keep_the_machine() {
        let a = cq("cirquent\nf 1: ~P\nf 2: P\nu 1: 1 2\no 1: 1 2\nend\n");
        let r = RuleInstance::Duplication {
            kind: Kind::Undergroup,
            at: 0,
        };
        let b = crate::calculus::apply_top_down(&a, &r).unwrap();
        let mut m = transform_rule(&r, &a, &b, axiom_copycat(1)).unwrap();
        assert_eq!(replies(&mut *m, &["1;0.3"]), strs(&["2;0.3"]));
        let bad = RuleInstance::OrIntro { of: 0 };
        assert!(transform_rule(&bad, &a, &b, silent_machine()).is_err());
    }

    fn p_implies_p() -> Proof {
        let axiom = cq("cirquent\nf 1: ~P\nf 2: P\nu 1: 1 2\no 1: 1 2\nend\n");
        let last = cq("cirquent\nf 1: ~P | P\nu 1: 1\no 1: 1\nend\n");
        Proof {
            steps: vec![
                ProofStep {
                    rule: RuleInstance::Axiom,
                    cirquent: axiom,
                },
                ProofStep {
                    rule: RuleInstance::OrIntro { of: 0 },
                    cirquent: last,
                },
            ],
        }
    }

    #[test]
    fn synthesized_p_implies_p_copies() {
        let s = synthesize(&p_implies_p()).unwrap();
        assert_eq!(
            s.game,
            GameExpr::from_formula(&parse_formula("P -> P").unwrap(), Reading::New)
        );
        let mut m = s.machine;
        assert_eq!(replies(&mut *m, &["2.3"]), strs(&["1.3"]));
        let trace = |m: &mut dyn Machine| {
            let script = vec![(1, strs(&["2.3"])), (3, strs(&["1.4"]))];
            simulate(m, &mut scripted_environment(script), &SimConfig::new(20))
                .unwrap()
                .trace_text()
        };
        let one = trace(&mut *synthesize(&p_implies_p()).unwrap().machine);
        let two = trace(&mut *synthesize(&p_implies_p()).unwrap().machine);
        assert_eq!(one, two);
        let mut broken = p_implies_p();
        broken.steps[1].rule = RuleInstance::AndIntro { of: 0 };
        assert!(synthesize(&broken).is_err());
    }

    #[test]
    fn promote_splits_copies() {
        let mut m = Promote::new(copycat());
        assert_eq!(replies(&mut m, &["0.1.3"]), strs(&["0.2.3"]));
        let mut m = Promote::new(copycat());
        let out = replies(&mut m, &["e.1.3", "01.2.4"]);
        assert_eq!(out, strs(&["e.2.3", "01.1.4"]));
        let leaves: Vec<String> = m.leaves().map(|l| l.to_string()).collect();
        assert_eq!(leaves, strs(&["00", "01", "1"]));
    }

    #[test]
    fn counterstrategy_plays_fresh_numbers() {
        let mut env = counterstrategy_loop();
        let mut tape = Run::new();
        let mut played = Vec::new();
        for g in 1..=3 {
            let ms = env.respond(&tape, g);
            for mv in &ms {
                tape.push(Labmove::bot(mv.clone()));
            }
            played.extend(ms);
        }
        assert_eq!(played, strs(&["2.e.0", "2.0.1", "2.1.2"]));
        tape.push(Labmove::top("1.e.3"));
        assert_eq!(env.respond(&tape, 4), strs(&["2.00.4"]));
        let mut env = counterstrategy_loop();
        let mut tape = Run::new();
        tape.push(Labmove::top("1.e.0"));
        assert_eq!(env.respond(&tape, 1), strs(&["2.e.1"]));
    }

    #[test]
    fn fresh_counter_never_repeats() {
        let mut c = FreshCounter::new();
        c.observe(0);
        c.observe(2);
        assert_eq!(c.next(), 1);
        assert_eq!(c.next(), 3);
        assert!(c.contains(3));
        assert_eq!(trailing_numeral("2.01.17"), Some(17));
        assert_eq!(trailing_numeral("1;e,0.5"), Some(5));
        assert_eq!(trailing_numeral("1.0:"), None);
    }

    #[test]
    fn catalog_names() {
        for name in CATALOG {
            let name = name.replace('N', "2");
            assert!(catalog(&name).is_some(), "{name}");
        }
        assert!(catalog("axiom-copycat:0").is_none());
        assert!(catalog("nope").is_none());
    }
}
