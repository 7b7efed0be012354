//! The ten cirquent rules and linear proof checking.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::syntax::{clubsuit, negate, validate_cirquent, Cirquent, Formula, Violation};

/// Which list of objects an Exchange or Duplication acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Oformula,
    Undergroup,
    Overgroup,
}

impl Kind {
    fn letter(self) -> char {
        match self {
            Kind::Oformula => 'o',
            Kind::Undergroup => 'u',
            Kind::Overgroup => 'g',
        }
    }
}

/// A rule together with the parameters that pin down one instance.
/// Indices are 0-based; the text form is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleInstance {
    Axiom,
    Exchange {
        kind: Kind,
        at: usize,
    },
    /// `kind` is never [`Kind::Oformula`].
    Duplication {
        kind: Kind,
        at: usize,
    },
    Merging {
        at: usize,
    },
    Weakening {
        under: usize,
        of: usize,
    },
    Contraction {
        of: usize,
    },
    OrIntro {
        of: usize,
    },
    AndIntro {
        of: usize,
    },
    RecIntro {
        of: usize,
        insert: usize,
    },
    CoRecIntro {
        of: usize,
        over: BTreeSet<usize>,
    },
}

impl RuleInstance {
    pub fn name(&self) -> &'static str {
        match self {
            RuleInstance::Axiom => "axiom",
            RuleInstance::Exchange { .. } => "exchange",
            RuleInstance::Duplication { .. } => "duplicate",
            RuleInstance::Merging { .. } => "merge",
            RuleInstance::Weakening { .. } => "weaken",
            RuleInstance::Contraction { .. } => "contract",
            RuleInstance::OrIntro { .. } => "or-intro",
            RuleInstance::AndIntro { .. } => "and-intro",
            RuleInstance::RecIntro { .. } => "rec-intro",
            RuleInstance::CoRecIntro { .. } => "corec-intro",
        }
    }

    /// Exchange, Duplication and Merging are read top-down, the rest bottom-up.
    pub fn is_top_down(&self) -> bool {
        matches!(
            self,
            RuleInstance::Exchange { .. }
                | RuleInstance::Duplication { .. }
                | RuleInstance::Merging { .. }
        )
    }
}

impl fmt::Display for RuleInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.name();
        match self {
            RuleInstance::Axiom => write!(f, "{name}"),
            RuleInstance::Exchange { kind, at } | RuleInstance::Duplication { kind, at } => {
                write!(f, "{name} kind={} at={}", kind.letter(), at + 1)
            }
            RuleInstance::Merging { at } => write!(f, "{name} at={}", at + 1),
            RuleInstance::Weakening { under, of } => {
                write!(f, "{name} under={} of={}", under + 1, of + 1)
            }
            RuleInstance::Contraction { of }
            | RuleInstance::OrIntro { of }
            | RuleInstance::AndIntro { of } => write!(f, "{name} of={}", of + 1),
            RuleInstance::RecIntro { of, insert } => {
                write!(f, "{name} of={} insert={}", of + 1, insert + 1)
            }
            RuleInstance::CoRecIntro { of, over } => {
                let list: Vec<String> = over.iter().map(|k| (k + 1).to_string()).collect();
                write!(f, "{name} of={} over={}", of + 1, list.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleParseError {
    #[error("empty rule")]
    Empty,
    #[error("unknown rule `{0}`")]
    Unknown(String),
    #[error("bad parameters for `{rule}`: expected `{expected}`")]
    Params { rule: String, expected: String },
}

impl FromStr for RuleInstance {
    type Err = RuleParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut words = s.split_whitespace();
        let name = words.next().ok_or(RuleParseError::Empty)?;
        let params: Vec<(&str, &str)> = words
            .map(|w| w.split_once('=').unwrap_or((w, "\u{0}")))
            .collect();
        let expected = match name {
            "axiom" => "",
            "exchange" => "kind=<o|u|g> at=<i>",
            "duplicate" => "kind=<u|g> at=<i>",
            "merge" => "at=<i>",
            "weaken" => "under=<i> of=<j>",
            "contract" | "or-intro" | "and-intro" => "of=<j>",
            "rec-intro" => "of=<j> insert=<k>",
            "corec-intro" => "of=<j> over=<k1,k2,…>",
            _ => return Err(RuleParseError::Unknown(name.to_string())),
        };
        let bad = || RuleParseError::Params {
            rule: name.to_string(),
            expected: expected.to_string(),
        };
        let keys: Vec<&str> = expected
            .split_whitespace()
            .map(|kv| kv.split('=').next().unwrap_or(""))
            .collect();
        if params.len() != keys.len() || params.iter().zip(&keys).any(|((k, _), e)| k != e) {
            return Err(bad());
        }
        let index = |v: &str| -> Result<usize, RuleParseError> {
            match v.parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i - 1),
                _ => Err(bad()),
            }
        };
        let value = |k: usize| params[k].1;
        let kind = |v: &str| match v {
            "o" => Ok(Kind::Oformula),
            "u" => Ok(Kind::Undergroup),
            "g" => Ok(Kind::Overgroup),
            _ => Err(bad()),
        };
        Ok(match name {
            "axiom" => RuleInstance::Axiom,
            "exchange" => RuleInstance::Exchange {
                kind: kind(value(0))?,
                at: index(value(1))?,
            },
            "duplicate" => {
                let k = kind(value(0))?;
                if k == Kind::Oformula {
                    return Err(bad());
                }
                RuleInstance::Duplication {
                    kind: k,
                    at: index(value(1))?,
                }
            }
            "merge" => RuleInstance::Merging {
                at: index(value(0))?,
            },
            "weaken" => RuleInstance::Weakening {
                under: index(value(0))?,
                of: index(value(1))?,
            },
            "contract" => RuleInstance::Contraction {
                of: index(value(0))?,
            },
            "or-intro" => RuleInstance::OrIntro {
                of: index(value(0))?,
            },
            "and-intro" => RuleInstance::AndIntro {
                of: index(value(0))?,
            },
            "rec-intro" => RuleInstance::RecIntro {
                of: index(value(0))?,
                insert: index(value(1))?,
            },
            _ => {
                let list = value(1);
                let mut over = BTreeSet::new();
                if !list.is_empty() {
                    for k in list.split(',') {
                        if !over.insert(index(k)?) {
                            return Err(bad());
                        }
                    }
                }
                RuleInstance::CoRecIntro {
                    of: index(value(0))?,
                    over,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofStep {
    pub rule: RuleInstance,
    pub cirquent: Cirquent,
}

/// A linear proof: step 1 is an axiom, each later step follows from the one before.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub steps: Vec<ProofStep>,
}

impl Proof {
    pub fn conclusion(&self) -> Option<&Cirquent> {
        self.steps.last().map(|s| &s.cirquent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("premise is malformed: {0}")]
    BadPremise(Violation),
    #[error("conclusion is malformed: {0}")]
    BadConclusion(Violation),
    #[error("axiom takes no premise")]
    AxiomWithPremise,
    #[error("rule needs a premise")]
    MissingPremise,
    #[error("not of the form ¬F,F")]
    NotAxiom,
    #[error("{what} {index} out of range")]
    OutOfRange { what: &'static str, index: usize },
    #[error("oformula {index} is not a {expected}")]
    WrongHead {
        index: usize,
        expected: &'static str,
    },
    #[error("undergroup {0} has fewer than 2 elements")]
    SmallUndergroup(usize),
    #[error("undergroup {under} does not contain oformula {of}")]
    NoArc { under: usize, of: usize },
    #[error("overgroup {over} already contains oformula {of}")]
    AlreadyIncluded { over: usize, of: usize },
    #[error("premise and conclusion do not match the rule")]
    Mismatch,
}

fn out_of_range(what: &'static str, i: usize) -> StepError {
    StepError::OutOfRange { what, index: i + 1 }
}

fn map_groups(gs: &[BTreeSet<usize>], f: impl Fn(usize) -> Option<usize>) -> Vec<BTreeSet<usize>> {
    gs.iter()
        .map(|g| g.iter().filter_map(|&a| f(a)).collect())
        .collect()
}

/// Conclusion of a top-down rule applied to `premise`.
pub fn apply_top_down(premise: &Cirquent, r: &RuleInstance) -> Result<Cirquent, StepError> {
    let mut c = premise.clone();
    match *r {
        RuleInstance::Exchange { kind, at } => match kind {
            Kind::Oformula => {
                if at + 1 >= c.formulas.len() {
                    return Err(out_of_range("oformula", at + 1));
                }
                c.formulas.swap(at, at + 1);
                let sw = |a: usize| {
                    Some(if a == at {
                        at + 1
                    } else if a == at + 1 {
                        at
                    } else {
                        a
                    })
                };
                c.under = map_groups(&c.under, sw);
                c.over = map_groups(&c.over, sw);
            }
            Kind::Undergroup => {
                if at + 1 >= c.under.len() {
                    return Err(out_of_range("undergroup", at + 1));
                }
                c.under.swap(at, at + 1);
            }
            Kind::Overgroup => {
                if at + 1 >= c.over.len() {
                    return Err(out_of_range("overgroup", at + 1));
                }
                c.over.swap(at, at + 1);
            }
        },
        RuleInstance::Duplication { kind, at } => {
            let (groups, what) = match kind {
                Kind::Undergroup => (&mut c.under, "undergroup"),
                Kind::Overgroup => (&mut c.over, "overgroup"),
                Kind::Oformula => return Err(StepError::Mismatch),
            };
            if at >= groups.len() {
                return Err(out_of_range(what, at));
            }
            let g = groups[at].clone();
            groups.insert(at + 1, g);
        }
        RuleInstance::Merging { at } => {
            if at + 1 >= c.over.len() {
                return Err(out_of_range("overgroup", at + 1));
            }
            let second = c.over.remove(at + 1);
            c.over[at].extend(second);
        }
        _ => return Err(StepError::Mismatch),
    }
    Ok(c)
}

fn head_check(
    c: &Cirquent,
    of: usize,
    ok: impl Fn(&Formula) -> Option<Vec<Formula>>,
    expected: &'static str,
) -> Result<Vec<Formula>, StepError> {
    let f = c.formulas.get(of).ok_or(out_of_range("oformula", of))?;
    ok(f).ok_or(StepError::WrongHead {
        index: of + 1,
        expected,
    })
}

/// Replaces oformula `of` by `parts` (1 or 2 of them); when there are two,
/// every group listed in `both` gets both, others keep just the first.
fn split_oformula(c: &Cirquent, of: usize, parts: Vec<Formula>) -> Cirquent {
    let extra = parts.len() - 1;
    let mut formulas = c.formulas.clone();
    formulas.splice(of..=of, parts);
    let shift = |g: &BTreeSet<usize>| -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &a in g {
            if a < of {
                out.insert(a);
            } else if a == of {
                out.extend(of..=of + extra);
            } else {
                out.insert(a + extra);
            }
        }
        out
    };
    Cirquent::new(
        formulas,
        c.under.iter().map(shift).collect(),
        c.over.iter().map(shift).collect(),
    )
}

/// The unique premise a bottom-up rule assigns to `conclusion`.
pub fn reconstruct_premise(conclusion: &Cirquent, r: &RuleInstance) -> Result<Cirquent, StepError> {
    let c = conclusion;
    match r {
        RuleInstance::Weakening { under, of } => {
            let (u, a) = (*under, *of);
            let g = c.under.get(u).ok_or(out_of_range("undergroup", u))?;
            if a >= c.formulas.len() {
                return Err(out_of_range("oformula", a));
            }
            if !g.contains(&a) {
                return Err(StepError::NoArc {
                    under: u + 1,
                    of: a + 1,
                });
            }
            if g.len() < 2 {
                return Err(StepError::SmallUndergroup(u + 1));
            }
            let mut p = c.clone();
            p.under[u].remove(&a);
            if p.under.iter().any(|g| g.contains(&a)) {
                return Ok(p);
            }
            p.formulas.remove(a);
            let drop = |x: usize| match x.cmp(&a) {
                std::cmp::Ordering::Less => Some(x),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(x - 1),
            };
            p.under = map_groups(&p.under, drop);
            p.over = map_groups(&p.over, drop);
            p.over.retain(|g| !g.is_empty());
            Ok(p)
        }
        RuleInstance::Contraction { of } => {
            let parts = head_check(
                c,
                *of,
                |f| match f {
                    Formula::CCoRec(_) | Formula::UCoRec(_) => Some(vec![f.clone(), f.clone()]),
                    _ => None,
                },
                "corecurrence",
            )?;
            Ok(split_oformula(c, *of, parts))
        }
        RuleInstance::OrIntro { of } => {
            let parts = head_check(
                c,
                *of,
                |f| match f {
                    Formula::Or(a, b) => Some(vec![(**a).clone(), (**b).clone()]),
                    _ => None,
                },
                "disjunction",
            )?;
            Ok(split_oformula(c, *of, parts))
        }
        RuleInstance::AndIntro { of } => {
            let of = *of;
            let parts = head_check(
                c,
                of,
                |f| match f {
                    Formula::And(a, b) => Some(vec![(**a).clone(), (**b).clone()]),
                    _ => None,
                },
                "conjunction",
            )?;
            let both = split_oformula(c, of, parts);
            let mut under = Vec::new();
            for g in &both.under {
                if g.contains(&of) {
                    let mut ge = g.clone();
                    ge.remove(&(of + 1));
                    let mut gf = g.clone();
                    gf.remove(&of);
                    under.push(ge);
                    under.push(gf);
                } else {
                    under.push(g.clone());
                }
            }
            Ok(Cirquent::new(both.formulas, under, both.over))
        }
        RuleInstance::RecIntro { of, insert } => {
            let parts = head_check(
                c,
                *of,
                |f| match f {
                    Formula::CRec(a) | Formula::URec(a) => Some(vec![(**a).clone()]),
                    _ => None,
                },
                "recurrence",
            )?;
            if *insert > c.over.len() {
                return Err(out_of_range("overgroup", *insert));
            }
            let mut p = split_oformula(c, *of, parts);
            p.over.insert(*insert, BTreeSet::from([*of]));
            Ok(p)
        }
        RuleInstance::CoRecIntro { of, over } => {
            let parts = head_check(
                c,
                *of,
                |f| match f {
                    Formula::CCoRec(a) | Formula::UCoRec(a) => Some(vec![(**a).clone()]),
                    _ => None,
                },
                "corecurrence",
            )?;
            let mut p = split_oformula(c, *of, parts);
            for &k in over {
                let g = p.over.get_mut(k).ok_or(out_of_range("overgroup", k))?;
                if !g.insert(*of) {
                    return Err(StepError::AlreadyIncluded {
                        over: k + 1,
                        of: of + 1,
                    });
                }
            }
            Ok(p)
        }
        _ => Err(StepError::Mismatch),
    }
}

fn is_axiom(c: &Cirquent) -> bool {
    let n = c.formulas.len();
    if n == 0 || n % 2 == 1 {
        return false;
    }
    let pairs: Vec<BTreeSet<usize>> = (0..n / 2)
        .map(|i| BTreeSet::from([2 * i, 2 * i + 1]))
        .collect();
    c.formulas.chunks(2).all(|p| p[0] == negate(&p[1])) && c.under == pairs && c.over == pairs
}

pub fn check_step(
    premise: Option<&Cirquent>,
    conclusion: &Cirquent,
    r: &RuleInstance,
) -> Result<(), StepError> {
    validate_cirquent(conclusion).map_err(StepError::BadConclusion)?;
    if let Some(p) = premise {
        validate_cirquent(p).map_err(StepError::BadPremise)?;
    }
    match (r, premise) {
        (RuleInstance::Axiom, None) => {
            if is_axiom(conclusion) {
                Ok(())
            } else {
                Err(StepError::NotAxiom)
            }
        }
        (RuleInstance::Axiom, Some(_)) => Err(StepError::AxiomWithPremise),
        (_, None) => Err(StepError::MissingPremise),
        (r, Some(p)) => {
            let ok = if r.is_top_down() {
                apply_top_down(p, r)? == *conclusion
            } else {
                reconstruct_premise(conclusion, r)? == *p
            };
            if ok {
                Ok(())
            } else {
                Err(StepError::Mismatch)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("empty proof")]
    Empty,
    #[error("step {step}: {reason}")]
    Step { step: usize, reason: StepError },
    #[error("conclusion mismatch")]
    ConclusionMismatch,
}

pub fn check_proof(p: &Proof) -> Result<(), ProofError> {
    if p.steps.is_empty() {
        return Err(ProofError::Empty);
    }
    let mut prev: Option<&Cirquent> = None;
    for (i, s) in p.steps.iter().enumerate() {
        check_step(prev, &s.cirquent, &s.rule).map_err(|reason| ProofError::Step {
            step: i + 1,
            reason,
        })?;
        prev = Some(&s.cirquent);
    }
    Ok(())
}

/// A proof of `f` is a proof whose last cirquent is `f♣`.
pub fn check_formula_proof(f: &Formula, p: &Proof) -> Result<(), ProofError> {
    check_proof(p)?;
    if p.conclusion() != Some(&clubsuit(f)) {
        return Err(ProofError::ConclusionMismatch);
    }
    Ok(())
}
