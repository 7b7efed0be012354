//! Formulas, cirquents and their text formats.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::calculus::{Proof, ProofStep, RuleInstance};

/// A formula in negation normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    NegAtom(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// `!c`
    CRec(Box<Formula>),
    /// `?c`
    CCoRec(Box<Formula>),
    /// `!u`
    URec(Box<Formula>),
    /// `?u`
    UCoRec(Box<Formula>),
}

impl Formula {
    pub fn atom(p: &str) -> Formula {
        Formula::Atom(p.to_string())
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// `a -> b`, i.e. `~a | b`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(negate(&a), b)
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                Formula::Atom(p) | Formula::NegAtom(p) => {
                    out.insert(p.clone());
                }
                Formula::And(a, b) | Formula::Or(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                Formula::CRec(a) | Formula::CCoRec(a) | Formula::URec(a) | Formula::UCoRec(a) => {
                    stack.push(a)
                }
            }
        }
        out
    }

    fn is_binary(&self) -> bool {
        matches!(self, Formula::And(..) | Formula::Or(..))
    }
}

pub fn negate(f: &Formula) -> Formula {
    let n = |g: &Formula| Box::new(negate(g));
    match f {
        Formula::Atom(p) => Formula::NegAtom(p.clone()),
        Formula::NegAtom(p) => Formula::Atom(p.clone()),
        Formula::And(a, b) => Formula::Or(n(a), n(b)),
        Formula::Or(a, b) => Formula::And(n(a), n(b)),
        Formula::CRec(a) => Formula::CCoRec(n(a)),
        Formula::CCoRec(a) => Formula::CRec(n(a)),
        Formula::URec(a) => Formula::UCoRec(n(a)),
        Formula::UCoRec(a) => Formula::URec(n(a)),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn sub(g: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if g.is_binary() {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        }
        let prefix = |f: &mut fmt::Formatter<'_>, op: &str, g: &Formula| {
            write!(f, "{op} ")?;
            sub(g, f)
        };
        match self {
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::NegAtom(p) => write!(f, "~{p}"),
            Formula::And(a, b) | Formula::Or(a, b) => {
                sub(a, f)?;
                write!(
                    f,
                    "{}",
                    if matches!(self, Formula::And(..)) {
                        " & "
                    } else {
                        " | "
                    }
                )?;
                sub(b, f)
            }
            Formula::CRec(a) => prefix(f, "!c", a),
            Formula::CCoRec(a) => prefix(f, "?c", a),
            Formula::URec(a) => prefix(f, "!u", a),
            Formula::UCoRec(a) => prefix(f, "?u", a),
        }
    }
}

impl FromStr for Formula {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

pub fn serialize_formula(f: &Formula) -> String {
    f.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    At {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("no steps")]
    NoSteps,
    #[error("unexpected end of input: {0}")]
    Eof(String),
}

/// Upper-case identifier.
pub fn is_atom_name(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_uppercase())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Atom(String),
    Not,
    And,
    Or,
    Imp,
    Prefix(&'static str),
    LParen,
    RParen,
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let at = |msg: String| SyntaxError::At { line, col, msg };
        let (tok, width) = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                col += 1;
                i += 1;
                continue;
            }
            '~' => (Tok::Not, 1),
            '&' => (Tok::And, 1),
            '|' => (Tok::Or, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '-' if chars.get(i + 1) == Some(&'>') => (Tok::Imp, 2),
            '!' | '?' => {
                let op = match (c, chars.get(i + 1)) {
                    ('!', Some('c')) => "!c",
                    ('?', Some('c')) => "?c",
                    ('!', Some('u')) => "!u",
                    ('?', Some('u')) => "?u",
                    _ => return Err(at(format!("unknown operator `{c}`"))),
                };
                if chars
                    .get(i + 2)
                    .is_some_and(|d| d.is_ascii_alphanumeric() || *d == '_')
                {
                    return Err(at(format!("unknown operator `{op}…`")));
                }
                (Tok::Prefix(op), 2)
            }
            c if c.is_ascii_uppercase() => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                (Tok::Atom(chars[i..j].iter().collect()), j - i)
            }
            _ => return Err(at(format!("unexpected character `{c}`"))),
        };
        out.push(Lexed { tok, line, col });
        i += width;
        col += width;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn err(&self, msg: &str) -> SyntaxError {
        let (line, col) = self
            .toks
            .get(self.pos)
            .map_or(self.end, |l| (l.line, l.col));
        SyntaxError::At {
            line,
            col,
            msg: msg.to_string(),
        }
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Imp) {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.err("expected a formula"));
        };
        self.pos += 1;
        match tok {
            Tok::Atom(p) => Ok(Formula::Atom(p)),
            Tok::Not => Ok(negate(&self.unary()?)),
            Tok::Prefix(op) => {
                let g = Box::new(self.unary()?);
                Ok(match op {
                    "!c" => Formula::CRec(g),
                    "?c" => Formula::CCoRec(g),
                    "!u" => Formula::URec(g),
                    _ => Formula::UCoRec(g),
                })
            }
            Tok::LParen => {
                let f = self.implication()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(f)
            }
            _ => {
                self.pos -= 1;
                Err(self.err("expected a formula"))
            }
        }
    }
}

/// Parses the ASCII formula syntax into negation normal form.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let lines: Vec<&str> = text.split('\n').collect();
    let end = (
        lines.len(),
        lines.last().map_or(0, |l| l.chars().count()) + 1,
    );
    let mut p = Parser { toks, pos: 0, end };
    let f = p.implication()?;
    if p.pos < p.toks.len() {
        return Err(p.err("unexpected token"));
    }
    Ok(f)
}

/// Oformulas with undergroups and overgroups; indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cirquent {
    pub formulas: Vec<Formula>,
    pub under: Vec<BTreeSet<usize>>,
    pub over: Vec<BTreeSet<usize>>,
}

impl Cirquent {
    pub fn new(
        formulas: Vec<Formula>,
        under: Vec<BTreeSet<usize>>,
        over: Vec<BTreeSet<usize>>,
    ) -> Self {
        Cirquent {
            formulas,
            under,
            over,
        }
    }

    /// Builds a cirquent from 1-based group lists, as usually written.
    pub fn from_one_based(formulas: Vec<Formula>, under: &[&[usize]], over: &[&[usize]]) -> Self {
        let conv = |gs: &[&[usize]]| {
            gs.iter()
                .map(|g| g.iter().map(|i| i - 1).collect())
                .collect()
        };
        Cirquent::new(formulas, conv(under), conv(over))
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }
}

impl fmt::Display for Cirquent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_cirquent(self))
    }
}

/// `F♣`: one oformula, alone in one undergroup and one overgroup.
pub fn clubsuit(f: &Formula) -> Cirquent {
    Cirquent::new(
        vec![f.clone()],
        vec![BTreeSet::from([0])],
        vec![BTreeSet::from([0])],
    )
}

/// First broken well-formedness condition, reported with 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("no oformulas")]
    NoOformulas,
    #[error("no undergroups")]
    NoUndergroups,
    #[error("no overgroups")]
    NoOvergroups,
    #[error("empty undergroup {0}")]
    EmptyUndergroup(usize),
    #[error("empty overgroup {0}")]
    EmptyOvergroup(usize),
    #[error("undergroup {0} names a missing oformula")]
    UnderOutOfRange(usize),
    #[error("overgroup {0} names a missing oformula")]
    OverOutOfRange(usize),
    #[error("oformula {0} in no undergroup")]
    NotInUndergroup(usize),
    #[error("oformula {0} in no overgroup")]
    NotInOvergroup(usize),
}

pub fn validate_cirquent(c: &Cirquent) -> Result<(), Violation> {
    if c.formulas.is_empty() {
        return Err(Violation::NoOformulas);
    }
    if c.under.is_empty() {
        return Err(Violation::NoUndergroups);
    }
    if c.over.is_empty() {
        return Err(Violation::NoOvergroups);
    }
    let n = c.formulas.len();
    for (i, g) in c.under.iter().enumerate() {
        if g.is_empty() {
            return Err(Violation::EmptyUndergroup(i + 1));
        }
        if g.iter().any(|&a| a >= n) {
            return Err(Violation::UnderOutOfRange(i + 1));
        }
    }
    for (i, g) in c.over.iter().enumerate() {
        if g.is_empty() {
            return Err(Violation::EmptyOvergroup(i + 1));
        }
        if g.iter().any(|&a| a >= n) {
            return Err(Violation::OverOutOfRange(i + 1));
        }
    }
    for a in 0..n {
        if !c.under.iter().any(|g| g.contains(&a)) {
            return Err(Violation::NotInUndergroup(a + 1));
        }
        if !c.over.iter().any(|g| g.contains(&a)) {
            return Err(Violation::NotInOvergroup(a + 1));
        }
    }
    Ok(())
}

fn group_text(g: &BTreeSet<usize>) -> String {
    g.iter()
        .map(|a| (a + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn serialize_cirquent(c: &Cirquent) -> String {
    let mut out = String::from("cirquent\n");
    for (i, f) in c.formulas.iter().enumerate() {
        out.push_str(&format!("  f {}: {}\n", i + 1, f));
    }
    for (i, g) in c.under.iter().enumerate() {
        out.push_str(&format!("  u {}: {}\n", i + 1, group_text(g)).replace(": \n", ":\n"));
    }
    for (i, g) in c.over.iter().enumerate() {
        out.push_str(&format!("  o {}: {}\n", i + 1, group_text(g)).replace(": \n", ":\n"));
    }
    out.push_str("end\n");
    out
}

/// Meaningful lines with their 1-based numbers; comments and blanks dropped.
struct Lines<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Lines { items, pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let it = self.items.get(self.pos).copied();
        self.pos += 1;
        it
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.items.get(self.pos).copied()
    }
}

fn line_err(line: usize, msg: impl Into<String>) -> SyntaxError {
    SyntaxError::Line {
        line,
        msg: msg.into(),
    }
}

fn read_cirquent(lines: &mut Lines<'_>) -> Result<Cirquent, SyntaxError> {
    match lines.next() {
        Some((_, "cirquent")) => {}
        Some((n, other)) => {
            return Err(line_err(n, format!("expected `cirquent`, found `{other}`")))
        }
        None => return Err(SyntaxError::Eof("expected `cirquent`".into())),
    }
    let mut formulas = Vec::new();
    let mut under = Vec::new();
    let mut over = Vec::new();
    let mut group_lines = Vec::new();
    loop {
        let Some((n, line)) = lines.next() else {
            return Err(SyntaxError::Eof("expected `end`".into()));
        };
        if line == "end" {
            break;
        }
        let (head, body) = line
            .split_once(':')
            .ok_or_else(|| line_err(n, "expected `f|u|o <index>: …`"))?;
        let mut parts = head.split_whitespace();
        let (Some(kind), Some(idx), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(line_err(n, "expected `f|u|o <index>: …`"));
        };
        let idx: usize = idx
            .parse()
            .map_err(|_| line_err(n, format!("bad index `{idx}`")))?;
        let target_len = match kind {
            "f" => formulas.len(),
            "u" => under.len(),
            "o" => over.len(),
            _ => return Err(line_err(n, format!("unknown entry kind `{kind}`"))),
        };
        if idx != target_len + 1 {
            return Err(line_err(
                n,
                format!("expected `{kind} {}`, found `{kind} {idx}`", target_len + 1),
            ));
        }
        if kind == "f" {
            let f = parse_formula(body).map_err(|e| match e {
                SyntaxError::At { col, msg, .. } => line_err(n, format!("column {col}: {msg}")),
                other => other,
            })?;
            formulas.push(f);
            continue;
        }
        let mut g = BTreeSet::new();
        for tok in body.split_whitespace() {
            let a: usize = tok
                .parse()
                .map_err(|_| line_err(n, format!("bad oformula index `{tok}`")))?;
            if a == 0 || !g.insert(a - 1) {
                return Err(line_err(
                    n,
                    format!("bad or duplicate oformula index `{tok}`"),
                ));
            }
        }
        group_lines.push((n, g.clone()));
        if kind == "u" {
            under.push(g);
        } else {
            over.push(g);
        }
    }
    for (n, g) in &group_lines {
        if let Some(a) = g.iter().find(|&&a| a >= formulas.len()) {
            return Err(line_err(*n, format!("oformula {} out of range", a + 1)));
        }
    }
    let end_line = lines
        .items
        .get(lines.pos.saturating_sub(1))
        .map_or(0, |x| x.0);
    for (name, empty) in [
        ("f", formulas.is_empty()),
        ("u", under.is_empty()),
        ("o", over.is_empty()),
    ] {
        if empty {
            return Err(line_err(end_line, format!("missing `{name}` section")));
        }
    }
    Ok(Cirquent::new(formulas, under, over))
}

/// Parses one `cirquent … end` block. Groups may be empty here; use
/// [`validate_cirquent`] for the well-formedness conditions.
pub fn parse_cirquent(text: &str) -> Result<Cirquent, SyntaxError> {
    let mut lines = Lines::new(text);
    let c = read_cirquent(&mut lines)?;
    if let Some((n, extra)) = lines.next() {
        return Err(line_err(n, format!("trailing text `{extra}`")));
    }
    Ok(c)
}

/// Reads `step k` / `rule …` / cirquent blocks.
pub fn parse_proof(text: &str) -> Result<Proof, SyntaxError> {
    let mut lines = Lines::new(text);
    let mut steps = Vec::new();
    while let Some((n, header)) = lines.next() {
        let k = header
            .strip_prefix("step ")
            .and_then(|k| k.trim().parse::<usize>().ok())
            .ok_or_else(|| line_err(n, format!("expected `step <k>`, found `{header}`")))?;
        if k != steps.len() + 1 {
            return Err(line_err(
                n,
                format!("expected step {}, found step {k}", steps.len() + 1),
            ));
        }
        let (rn, rule_line) = lines
            .next()
            .ok_or_else(|| SyntaxError::Eof(format!("rule of step {k}")))?;
        let body = rule_line
            .strip_prefix("rule ")
            .ok_or_else(|| line_err(rn, format!("expected `rule …`, found `{rule_line}`")))?;
        let rule: RuleInstance = body.parse().map_err(|e| line_err(rn, format!("{e}")))?;
        if lines.peek().is_none() {
            return Err(SyntaxError::Eof(format!("cirquent of step {k}")));
        }
        let cirquent = read_cirquent(&mut lines)?;
        steps.push(ProofStep { rule, cirquent });
    }
    if steps.is_empty() {
        return Err(SyntaxError::NoSteps);
    }
    Ok(Proof { steps })
}

pub fn serialize_proof(p: &Proof) -> String {
    let mut out = String::new();
    for (i, s) in p.steps.iter().enumerate() {
        out.push_str(&format!("step {}\nrule {}\n", i + 1, s.rule));
        out.push_str(&serialize_cirquent(&s.cirquent));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn atom(s: &str) -> Formula {
        Formula::atom(s)
    }

    fn neg(s: &str) -> Formula {
        Formula::NegAtom(s.into())
    }

    #[test]
    fn sugar_and_normal_form() {
        assert_eq!(p("P -> P"), Formula::or(neg("P"), atom("P")));
        assert_eq!(p("~(!c P)"), Formula::CCoRec(Box::new(neg("P"))));
        assert_eq!(p("~(P & Q)"), Formula::or(neg("P"), neg("Q")));
        assert_eq!(p("~~P"), atom("P"));
        assert_eq!(p("~?u P"), Formula::URec(Box::new(neg("P"))));
    }

    #[test]
    fn precedence() {
        assert_eq!(
            p("P | Q & R"),
            Formula::or(atom("P"), Formula::and(atom("Q"), atom("R")))
        );
        assert_eq!(
            p("P -> Q -> R"),
            Formula::or(neg("P"), Formula::or(neg("Q"), atom("R")))
        );
        assert_eq!(
            p("!c P & Q"),
            Formula::and(Formula::CRec(Box::new(atom("P"))), atom("Q"))
        );
        assert_eq!(p("P & Q & R"), p("(P & Q) & R"));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_formula("P &\n  !x Q"),
            Err(SyntaxError::At {
                line: 2,
                col: 3,
                msg: "unknown operator `!`".into()
            })
        );
        assert!(matches!(
            parse_formula("P & "),
            Err(SyntaxError::At { line: 1, .. })
        ));
        assert!(matches!(parse_formula("(P"), Err(SyntaxError::At { .. })));
        assert!(matches!(
            parse_formula("p"),
            Err(SyntaxError::At { col: 1, .. })
        ));
        assert!(matches!(
            parse_formula("P Q"),
            Err(SyntaxError::At { col: 3, .. })
        ));
        assert!(matches!(
            parse_formula("!cc P"),
            Err(SyntaxError::At { .. })
        ));
    }

    #[test]
    fn negation_examples() {
        assert_eq!(negate(&atom("P")), neg("P"));
        assert_eq!(
            negate(&Formula::CRec(Box::new(atom("P")))),
            Formula::CCoRec(Box::new(neg("P")))
        );
    }

    #[test]
    fn validation() {
        let ok = Cirquent::from_one_based(vec![atom("P")], &[&[1]], &[&[1]]);
        assert_eq!(validate_cirquent(&ok), Ok(()));
        let c = Cirquent::from_one_based(vec![atom("P"), atom("Q")], &[&[1]], &[&[1, 2]]);
        assert_eq!(validate_cirquent(&c), Err(Violation::NotInUndergroup(2)));
        assert_eq!(
            Violation::NotInUndergroup(2).to_string(),
            "oformula 2 in no undergroup"
        );
        let c = Cirquent::from_one_based(vec![atom("P")], &[&[]], &[&[1]]);
        assert_eq!(validate_cirquent(&c), Err(Violation::EmptyUndergroup(1)));
    }

    #[test]
    fn clubsuit_shape() {
        let c = clubsuit(&atom("P"));
        assert_eq!(
            c,
            Cirquent::from_one_based(vec![atom("P")], &[&[1]], &[&[1]])
        );
        let c = clubsuit(&p("P -> P"));
        assert_eq!(validate_cirquent(&c), Ok(()));
        assert_eq!(parse_cirquent(&serialize_cirquent(&c)), Ok(c));
    }

    #[test]
    fn diagram_cirquent() {
        let text = "cirquent\n  f 1: H\n  f 2: F\n  f 3: E\n  f 4: F\n  u 1: 1 2\n  u 2: 2 3\n  u 3: 4\n  o 1: 1 2 3\n  o 2: 3\n  o 3: 4\nend\n";
        let c = parse_cirquent(text).unwrap();
        assert_eq!(
            c,
            Cirquent::from_one_based(
                vec![atom("H"), atom("F"), atom("E"), atom("F")],
                &[&[1, 2], &[2, 3], &[4]],
                &[&[1, 2, 3], &[3], &[4]]
            )
        );
        assert_eq!(validate_cirquent(&c), Ok(()));
        assert_eq!(serialize_cirquent(&c), text);
    }

    #[test]
    fn cirquent_file_errors() {
        let dup = "cirquent\nf 1: P\nu 1: 1 1\no 1: 1\nend";
        assert!(matches!(
            parse_cirquent(dup),
            Err(SyntaxError::Line { line: 3, .. })
        ));
        let range = "cirquent\nf 1: P\nu 1: 2\no 1: 1\nend";
        assert!(matches!(
            parse_cirquent(range),
            Err(SyntaxError::Line { line: 3, .. })
        ));
        let missing = "cirquent\nf 1: P\nu 1: 1\nend";
        assert!(parse_cirquent(missing).is_err());
        assert!(parse_cirquent("cirquent\nf 1: P\nu 1: 1\no 1: 1\n").is_err());
        assert!(parse_cirquent("cirquent\nf 2: P\nu 1: 1\no 1: 1\nend").is_err());
        let bad_formula = "cirquent\nf 1: P &\nu 1: 1\no 1: 1\nend";
        assert!(matches!(
            parse_cirquent(bad_formula),
            Err(SyntaxError::Line { line: 2, .. })
        ));
    }

    const TWO_STEPS: &str = "# P -> P\nstep 1\nrule axiom\ncirquent\n  f 1: ~P\n  f 2: P\n  u 1: 1 2\n  o 1: 1 2\nend\n\nstep 2\nrule or-intro of=1\ncirquent\n  f 1: ~P | P\n  u 1: 1\n  o 1: 1\nend\n";

    #[test]
    fn proof_files() {
        let proof = parse_proof(TWO_STEPS).unwrap();
        assert_eq!(proof.steps.len(), 2);
        assert_eq!(proof.steps[0].rule, RuleInstance::Axiom);
        assert_eq!(proof.steps[1].rule, RuleInstance::OrIntro { of: 0 });
        assert_eq!(parse_proof(&serialize_proof(&proof)), Ok(proof));
        assert_eq!(parse_proof("# nothing\n"), Err(SyntaxError::NoSteps));
        let gap = TWO_STEPS.replace("step 2", "step 3");
        assert!(matches!(
            parse_proof(&gap),
            Err(SyntaxError::Line { line: 11, .. })
        ));
        let unknown = TWO_STEPS.replace("or-intro of=1", "cut of=1");
        assert!(matches!(
            parse_proof(&unknown),
            Err(SyntaxError::Line { line: 12, .. })
        ));
        let arity = TWO_STEPS.replace("or-intro of=1", "or-intro");
        assert!(parse_proof(&arity).is_err());
        let header = TWO_STEPS.replace("step 1", "stage 1");
        assert!(parse_proof(&header).is_err());
    }

    pub(crate) fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["P", "Q", "R1", "Long_name"]).prop_map(Formula::atom),
            prop::sample::select(vec!["P", "Q"]).prop_map(|p| Formula::NegAtom(p.into())),
        ];
        leaf.prop_recursive(5, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                inner.clone().prop_map(|a| Formula::CRec(Box::new(a))),
                inner.clone().prop_map(|a| Formula::CCoRec(Box::new(a))),
                inner.clone().prop_map(|a| Formula::URec(Box::new(a))),
                inner.prop_map(|a| Formula::UCoRec(Box::new(a))),
            ]
        })
    }

    fn arb_cirquent() -> impl Strategy<Value = Cirquent> {
        (1usize..5).prop_flat_map(|n| {
            let group = prop::collection::btree_set(0..n, 1..=n);
            (
                prop::collection::vec(arb_formula(), n),
                prop::collection::vec(group.clone(), 1..4),
                prop::collection::vec(group, 1..4),
            )
                .prop_map(move |(fs, mut u, mut o)| {
                    // every oformula lands in some group
                    u.push((0..n).collect());
                    o.push((0..n).collect());
                    Cirquent::new(fs, u, o)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn formula_round_trip(f in arb_formula()) {
            prop_assert_eq!(parse_formula(&serialize_formula(&f)), Ok(f));
        }

        #[test]
        fn negation_is_an_involution(f in arb_formula()) {
            prop_assert_eq!(negate(&negate(&f)), f);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn cirquent_round_trip(c in arb_cirquent()) {
            prop_assert_eq!(validate_cirquent(&c), Ok(()));
            prop_assert_eq!(parse_cirquent(&serialize_cirquent(&c)), Ok(c));
        }
    }
}
