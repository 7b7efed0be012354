use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::bits::{is_prefix, Bits, InfBits};

use super::KernelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Top,
    Bot,
}

impl Player {
    pub fn flip(self) -> Player {
        match self {
            Player::Top => Player::Bot,
            Player::Bot => Player::Top,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Top => "T",
            Player::Bot => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labmove {
    pub player: Player,
    pub mv: String,
}

impl Labmove {
    pub fn new(player: Player, mv: impl Into<String>) -> Self {
        Labmove {
            player,
            mv: mv.into(),
        }
    }

    pub fn top(mv: impl Into<String>) -> Self {
        Labmove::new(Player::Top, mv)
    }

    pub fn bot(mv: impl Into<String>) -> Self {
        Labmove::new(Player::Bot, mv)
    }

    pub fn flipped(&self) -> Labmove {
        Labmove::new(self.player.flip(), self.mv.clone())
    }
}

impl fmt::Display for Labmove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.player, self.mv)
    }
}

/// A finite run. Infinite runs only ever show up as their finite prefixes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Run(Vec<Labmove>);

impl Run {
    pub fn new() -> Self {
        Run(Vec::new())
    }

    pub fn push(&mut self, lm: Labmove) {
        self.0.push(lm);
    }

    pub fn extended(&self, lm: Labmove) -> Run {
        let mut r = self.clone();
        r.push(lm);
        r
    }

    pub fn prefix(&self, len: usize) -> Run {
        Run(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn into_vec(self) -> Vec<Labmove> {
        self.0
    }

    /// Moves made by `p`, in order.
    pub fn moves_of(&self, p: Player) -> Vec<&str> {
        self.0
            .iter()
            .filter(|lm| lm.player == p)
            .map(|lm| lm.mv.as_str())
            .collect()
    }
}

impl Deref for Run {
    type Target = [Labmove];
    fn deref(&self) -> &[Labmove] {
        &self.0
    }
}

impl From<Vec<Labmove>> for Run {
    fn from(v: Vec<Labmove>) -> Self {
        Run(v)
    }
}

impl FromIterator<Labmove> for Run {
    fn from_iter<I: IntoIterator<Item = Labmove>>(iter: I) -> Self {
        Run(iter.into_iter().collect())
    }
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for lm in &self.0 {
            writeln!(f, "{lm}")?;
        }
        Ok(())
    }
}

/// Transcript format: one `T <move>` or `B <move>` per line. Blank lines and
/// `#` comments are skipped.
impl FromStr for Run {
    type Err = KernelError;
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut out = Run::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || KernelError::Transcript {
                line: no + 1,
                text: raw.to_string(),
            };
            let (tag, mv) = line.split_once(' ').ok_or_else(bad)?;
            let player = match tag {
                "T" => Player::Top,
                "B" => Player::Bot,
                _ => return Err(bad()),
            };
            let mv = mv.trim();
            if mv.is_empty() {
                return Err(bad());
            }
            out.push(Labmove::new(player, mv));
        }
        Ok(out)
    }
}

/// Shorthand for tests and examples: `run(&[("B", "1.a"), ("T", "2.a")])`.
pub fn run(moves: &[(&str, &str)]) -> Run {
    moves
        .iter()
        .map(|(p, m)| {
            let player = if *p == "T" { Player::Top } else { Player::Bot };
            Labmove::new(player, *m)
        })
        .collect()
}

pub fn negate_run(g: &Run) -> Run {
    g.iter().map(Labmove::flipped).collect()
}

/// `Γ^α`
pub fn strip_prefix(g: &Run, a: &str) -> Run {
    strip_prefix_indexed(g, a).0
}

/// Like [`strip_prefix`], also returning the original index of every kept move.
pub fn strip_prefix_indexed(g: &Run, a: &str) -> (Run, Vec<usize>) {
    let mut out = Run::new();
    let mut idx = Vec::new();
    for (k, lm) in g.iter().enumerate() {
        if let Some(rest) = lm.mv.strip_prefix(a) {
            out.push(Labmove::new(lm.player, rest));
            idx.push(k);
        }
    }
    (out, idx)
}

/// Splits `w.β` into its bitstring address and the remainder.
pub fn parse_thread_move(mv: &str) -> Option<(Bits, &str)> {
    let (w, rest) = mv.split_once('.')?;
    Some((Bits::parse_token(w)?, rest))
}

/// Recognises a replicative move `w:`.
pub fn parse_replicative(mv: &str) -> Option<Bits> {
    Bits::parse_token(mv.strip_suffix(':')?)
}

/// `Θ^{≼x}`
pub fn project_thread(g: &Run, x: &InfBits) -> Run {
    project_thread_indexed(g, x).0
}

pub fn project_thread_indexed(g: &Run, x: &InfBits) -> (Run, Vec<usize>) {
    let mut out = Run::new();
    let mut idx = Vec::new();
    for (k, lm) in g.iter().enumerate() {
        if let Some((w, rest)) = parse_thread_move(&lm.mv) {
            if is_prefix(&w, x) {
                out.push(Labmove::new(lm.player, rest));
                idx.push(k);
            }
        }
    }
    (out, idx)
}

/// A parsed cirquent move `a;u1,…,un.rest`. `a` is 1-based as in the text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellMove {
    pub a: usize,
    pub coords: Vec<Bits>,
    pub rest: String,
}

impl CellMove {
    pub fn parse(mv: &str, n: usize) -> Option<CellMove> {
        let (head, tail) = mv.split_once(';')?;
        if head.is_empty() || !head.bytes().all(|b| b.is_ascii_digit()) || head.starts_with('0') {
            return None;
        }
        let a = head.parse().ok()?;
        let (coords_txt, rest) = tail.split_once('.')?;
        let coords: Vec<Bits> = if n == 0 {
            if !coords_txt.is_empty() {
                return None;
            }
            Vec::new()
        } else {
            coords_txt
                .split(',')
                .map(Bits::parse_token)
                .collect::<Option<_>>()?
        };
        if coords.len() != n {
            return None;
        }
        Some(CellMove {
            a,
            coords,
            rest: rest.to_string(),
        })
    }
}

impl fmt::Display for CellMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords: Vec<String> = self.coords.iter().map(Bits::to_string).collect();
        write!(f, "{};{}.{}", self.a, coords.join(","), self.rest)
    }
}

/// `Γ^{≼a;x⃗}`
pub fn project_cell(g: &Run, a: usize, xs: &[InfBits]) -> Run {
    project_cell_indexed(g, a, xs).0
}

pub fn project_cell_indexed(g: &Run, a: usize, xs: &[InfBits]) -> (Run, Vec<usize>) {
    let mut out = Run::new();
    let mut idx = Vec::new();
    for (k, lm) in g.iter().enumerate() {
        let Some(cm) = CellMove::parse(&lm.mv, xs.len()) else {
            continue;
        };
        if cm.a == a && cm.coords.iter().zip(xs).all(|(u, x)| is_prefix(u, x)) {
            out.push(Labmove::new(lm.player, cm.rest));
            idx.push(k);
        }
    }
    (out, idx)
}

/// The replication tree of an old-style countable recurrence position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BtStructure {
    nodes: BTreeSet<Bits>,
}

impl Default for BtStructure {
    fn default() -> Self {
        BtStructure {
            nodes: BTreeSet::from([Bits::empty()]),
        }
    }
}

impl BtStructure {
    pub fn nodes(&self) -> &BTreeSet<Bits> {
        &self.nodes
    }

    pub fn is_node(&self, w: &Bits) -> bool {
        self.nodes.contains(w)
    }

    pub fn is_leaf(&self, w: &Bits) -> bool {
        self.is_node(w) && !self.nodes.contains(&w.pushed(false))
    }

    pub fn leaves(&self) -> BTreeSet<Bits> {
        self.nodes
            .iter()
            .filter(|w| self.is_leaf(w))
            .cloned()
            .collect()
    }

    /// The leaf lying on the infinite path `v`.
    pub fn leaf_of(&self, v: &InfBits) -> Bits {
        let mut w = Bits::empty();
        while !self.is_leaf(&w) {
            w.push(v.bit(w.len()));
        }
        w
    }

    pub fn replicate(&mut self, w: &Bits) {
        self.nodes.insert(w.pushed(false));
        self.nodes.insert(w.pushed(true));
    }
}

/// Nodes are ε plus both children of every `u` replicated by some move `u:`.
pub fn bt_structure(pos: &Run) -> BtStructure {
    let mut bt = BtStructure::default();
    for lm in pos.iter() {
        if let Some(u) = parse_replicative(&lm.mv) {
            bt.replicate(&u);
        }
    }
    bt
}

/// One representative per thread class induced by the prefixes in `used`:
/// `u·b·0^ω` for every `u` in the prefix closure and every bit `b` with
/// `u·b` outside it. With nothing but ε in the closure the single class is
/// represented by `0^ω`.
pub fn class_reps<'a, I>(used: I) -> Vec<InfBits>
where
    I: IntoIterator<Item = &'a Bits>,
{
    let mut closure: BTreeSet<Bits> = BTreeSet::from([Bits::empty()]);
    for w in used {
        closure.extend(w.prefixes());
    }
    if closure.len() == 1 {
        return vec![InfBits::zeros()];
    }
    let mut out = BTreeSet::new();
    for u in &closure {
        for b in [false, true] {
            let ub = u.pushed(b);
            if !closure.contains(&ub) {
                out.insert(InfBits::zero_tailed(ub));
            }
        }
    }
    out.into_iter().collect()
}

/// Thread representatives for a run of `w.β` moves.
pub fn thread_reps(g: &Run) -> Vec<InfBits> {
    let used: Vec<Bits> = g
        .iter()
        .filter_map(|lm| parse_thread_move(&lm.mv).map(|(w, _)| w))
        .collect();
    class_reps(&used)
}

/// Per-coordinate representatives for a run of `a;u⃗.β` moves with `n`
/// coordinates, combined by cross product.
pub fn thread_class_reps(g: &Run, n: usize) -> Vec<Vec<InfBits>> {
    let mut used: Vec<BTreeSet<Bits>> = vec![BTreeSet::new(); n];
    for lm in g.iter() {
        if let Some(cm) = CellMove::parse(&lm.mv, n) {
            for (j, u) in cm.coords.into_iter().enumerate() {
                used[j].insert(u);
            }
        }
    }
    let per: Vec<Vec<InfBits>> = used.iter().map(class_reps).collect();
    cross_product(&per)
}

pub fn cross_product<T: Clone>(per: &[Vec<T>]) -> Vec<Vec<T>> {
    per.iter().fold(vec![Vec::new()], |acc, choices| {
        acc.iter()
            .flat_map(|pre| {
                choices.iter().map(move |c| {
                    let mut v = pre.clone();
                    v.push(c.clone());
                    v
                })
            })
            .collect()
    })
}

/// Is `omega` a `p`-delay of `gamma`?
pub fn is_delay(omega: &Run, gamma: &Run, p: Player) -> bool {
    for q in [Player::Top, Player::Bot] {
        if omega.moves_of(q) != gamma.moves_of(q) {
            return false;
        }
    }
    // for the n'th p-move, how many opponent moves precede it
    let lead = |r: &Run| -> Vec<usize> {
        let mut seen = 0;
        let mut out = Vec::new();
        for lm in r.iter() {
            if lm.player == p {
                out.push(seen);
            } else {
                seen += 1;
            }
        }
        out
    };
    lead(omega)
        .iter()
        .zip(lead(gamma).iter())
        .all(|(o, g)| o >= g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{bits, Tail};

    #[test]
    fn strip_prefix_example() {
        let g = run(&[
            ("T", "1.alpha"),
            ("B", "2.beta"),
            ("T", "1.gamma"),
            ("B", "2.delta"),
        ]);
        assert_eq!(
            strip_prefix(&g, "1."),
            run(&[("T", "alpha"), ("T", "gamma")])
        );
        assert_eq!(strip_prefix(&Run::new(), "7."), Run::new());
    }

    #[test]
    fn project_thread_example() {
        let g = run(&[
            ("B", "10.alpha"),
            ("T", "111.beta"),
            ("B", "1.gamma"),
            ("B", "00.alpha"),
        ]);
        let x = InfBits::new(Bits::empty(), Tail::Ones);
        assert_eq!(
            project_thread(&g, &x),
            run(&[("T", "beta"), ("B", "gamma")])
        );
        let g = run(&[("B", "1.a"), ("T", "01.b")]);
        assert_eq!(project_thread(&g, &InfBits::zeros()), Run::new());
    }

    #[test]
    fn project_cell_example() {
        let g = run(&[
            ("B", "1;100,11.alpha"),
            ("T", "1;01,100.beta"),
            ("B", "1;1,1.gamma"),
            ("B", "2;100,111.delta"),
        ]);
        let xs = [
            InfBits::zero_tailed(bits("1")),
            InfBits::new(Bits::empty(), Tail::Ones),
        ];
        assert_eq!(
            project_cell(&g, 1, &xs),
            run(&[("B", "alpha"), ("B", "gamma")])
        );
        assert_eq!(project_cell(&g, 3, &xs), Run::new());
    }

    #[test]
    fn project_cell_without_coordinates() {
        let g = run(&[("B", "1;.a"), ("T", "2;.b"), ("B", "1;.c")]);
        assert_eq!(project_cell(&g, 1, &[]), run(&[("B", "a"), ("B", "c")]));
        assert_eq!(project_cell(&g, 1, &[]), strip_prefix(&g, "1;."));
    }

    #[test]
    fn bt_examples() {
        let leaves = |r: Run| bt_structure(&r).leaves();
        assert_eq!(leaves(Run::new()), BTreeSet::from([Bits::empty()]));
        assert_eq!(
            leaves(run(&[("B", "e:")])),
            BTreeSet::from([bits("0"), bits("1")])
        );
        assert_eq!(
            leaves(run(&[("B", "e:"), ("B", "1:")])),
            BTreeSet::from([bits("0"), bits("10"), bits("11")])
        );
        let bt = bt_structure(&run(&[("B", "e:")]));
        assert_eq!(bt.nodes().len(), 3);
    }

    #[test]
    fn reps_examples() {
        assert_eq!(thread_reps(&run(&[("B", "a")])), vec![InfBits::zeros()]);
        let got: BTreeSet<InfBits> = thread_reps(&run(&[("B", "1.m")])).into_iter().collect();
        let want: BTreeSet<InfBits> = ["0", "10", "11"]
            .iter()
            .map(|s| InfBits::zero_tailed(bits(s)))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn delay_examples() {
        let omega = run(&[("B", "a"), ("T", "a"), ("T", "g"), ("B", "b")]);
        let gamma = run(&[("B", "a"), ("T", "a"), ("B", "b"), ("T", "g")]);
        assert!(is_delay(&omega, &gamma, Player::Bot));
        assert!(!is_delay(&gamma, &omega, Player::Bot));
        assert!(is_delay(&gamma, &gamma, Player::Top));
        // moving ⊥'s move later is a ⊥-delay, moving it earlier is not
        let late = run(&[("T", "a"), ("B", "b")]);
        let early = run(&[("B", "b"), ("T", "a")]);
        assert!(is_delay(&late, &early, Player::Bot));
        assert!(!is_delay(&early, &late, Player::Bot));
    }

    #[test]
    fn transcript_round_trip() {
        let g = run(&[("B", "1;100,11.alpha"), ("T", "0:")]);
        let text = g.to_string();
        assert_eq!(text, "B 1;100,11.alpha\nT 0:\n");
        assert_eq!(text.parse::<Run>().unwrap(), g);
        assert!("X foo".parse::<Run>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_prefix() -> impl Strategy<Value = Bits> {
            proptest::collection::vec(any::<bool>(), 0..=2).prop_map(Bits::from_bools)
        }

        fn arb_thread_run(max: usize) -> impl Strategy<Value = Run> {
            proptest::collection::vec((any::<bool>(), arb_prefix(), 0u8..3), 0..=max).prop_map(
                |v| {
                    v.into_iter()
                        .map(|(t, w, m)| {
                            let p = if t { Player::Top } else { Player::Bot };
                            Labmove::new(p, format!("{w}.{m}"))
                        })
                        .collect()
                },
            )
        }

        fn arb_run() -> impl Strategy<Value = Run> {
            proptest::collection::vec((any::<bool>(), "[12]\\.[a-c]{1,3}"), 0..12).prop_map(|v| {
                v.into_iter()
                    .map(|(t, m)| Labmove::new(if t { Player::Top } else { Player::Bot }, m))
                    .collect()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn negation_is_involution(g in arb_run()) {
                prop_assert_eq!(negate_run(&negate_run(&g)), g);
            }

            #[test]
            fn components_partition(g in arb_run()) {
                let (a, ia) = strip_prefix_indexed(&g, "1.");
                let (b, ib) = strip_prefix_indexed(&g, "2.");
                prop_assert_eq!(a.len() + b.len(), g.len());
                let mut all: Vec<usize> = ia.into_iter().chain(ib).collect();
                all.sort();
                prop_assert_eq!(all, (0..g.len()).collect::<Vec<_>>());
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]

            #[test]
            fn reps_cover_their_classes(
                g in arb_thread_run(3),
                tails in proptest::collection::vec((proptest::collection::vec(any::<bool>(), 0..6), any::<bool>()), 50),
            ) {
                let reps = thread_reps(&g);
                // the first 3 bits of a rep pin its class, since prefixes have length <= 2
                for rep in &reps {
                    let want = project_thread(&g, rep);
                    for (t, ones) in &tails {
                        let tail = if *ones { Tail::Ones } else { Tail::Zeros };
                        let member = InfBits::new(rep.take(3).concat(&Bits::from_bools(t.clone())), tail);
                        prop_assert_eq!(project_thread(&g, &member), want.clone());
                    }
                }
                for k in 0..16u32 {
                    let x = InfBits::zero_tailed(Bits::from_bools((0..4).map(|i| (k >> i) & 1 == 1).collect()));
                    let px = project_thread(&g, &x);
                    prop_assert!(reps.iter().any(|r| project_thread(&g, r) == px));
                }
            }

            #[test]
            fn projection_depends_on_used_prefixes(g in arb_thread_run(4), a in 0u32..16, b in 0u32..16) {
                let mk = |k: u32| InfBits::zero_tailed(Bits::from_bools((0..4).map(|i| (k >> i) & 1 == 1).collect()));
                let (x, y) = (mk(a), mk(b));
                let used: Vec<Bits> = g.iter().filter_map(|lm| parse_thread_move(&lm.mv).map(|(w, _)| w)).collect();
                let same = used.iter().all(|w| is_prefix(w, &x) == is_prefix(w, &y));
                if same {
                    prop_assert_eq!(project_thread(&g, &x), project_thread(&g, &y));
                }
            }
        }
    }
}
