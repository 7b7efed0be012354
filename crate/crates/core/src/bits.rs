//! Finite bitstrings, eventually-constant infinite bitstrings, shortlex
//! enumeration and the fusion/defusion family.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("bad bitstring `{0}`")]
    Parse(String),
    #[error("shortlex index must be at least 1")]
    ZeroIndex,
    #[error("fusion needs at least one input")]
    EmptyFusion,
    #[error("fuse_inf accepts only essentially finite inputs, got {0}")]
    OnesTail(InfBits),
    #[error("arity must be positive")]
    ZeroArity,
}

/// A finite bitstring. The empty string is written `e`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn empty() -> Self {
        Bits(Vec::new())
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Bits(vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn pushed(&self, b: bool) -> Bits {
        let mut out = self.clone();
        out.push(b);
        out
    }

    pub fn concat(&self, other: &Bits) -> Bits {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Bits(v)
    }

    /// Suffix starting at position `from`.
    pub fn suffix(&self, from: usize) -> Bits {
        Bits(self.0[from.min(self.0.len())..].to_vec())
    }

    pub fn prefix(&self, len: usize) -> Bits {
        Bits(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn is_prefix_of(&self, other: &Bits) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_proper_prefix_of(&self, other: &Bits) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    pub fn comparable(&self, other: &Bits) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// All prefixes, from ε up to and including `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = Bits> + '_ {
        (0..=self.len()).map(move |k| self.prefix(k))
    }

    /// Parse a bit token: `e` or a nonempty run of `0`/`1`.
    pub fn parse_token(s: &str) -> Option<Bits> {
        if s == "e" {
            return Some(Bits::empty());
        }
        if s.is_empty() {
            return None;
        }
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Bits)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = BitsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Bits::parse_token(s.trim()).ok_or_else(|| BitsError::Parse(s.to_string()))
    }
}

/// Shorthand used heavily in tests: `bits("0110")`. Panics on bad input.
pub fn bits(s: &str) -> Bits {
    s.parse().expect("valid bitstring literal")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tail {
    Zeros,
    Ones,
}

impl Tail {
    fn bit(self) -> bool {
        self == Tail::Ones
    }
}

/// An eventually constant infinite bitstring `prefix · b^ω`, kept canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfBits {
    prefix: Bits,
    tail: Tail,
}

impl InfBits {
    pub fn new(prefix: Bits, tail: Tail) -> Self {
        let mut v = prefix.0;
        while v.last() == Some(&tail.bit()) {
            v.pop();
        }
        InfBits {
            prefix: Bits(v),
            tail,
        }
    }

    pub fn zeros() -> Self {
        InfBits::new(Bits::empty(), Tail::Zeros)
    }

    /// `w · 0^ω`
    pub fn zero_tailed(w: Bits) -> Self {
        InfBits::new(w, Tail::Zeros)
    }

    pub fn prefix(&self) -> &Bits {
        &self.prefix
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn is_essentially_finite(&self) -> bool {
        self.tail == Tail::Zeros
    }

    /// Bit at 0-based position `i`.
    pub fn bit(&self, i: usize) -> bool {
        self.prefix.get(i).unwrap_or(self.tail.bit())
    }

    /// The first `n` bits.
    pub fn take(&self, n: usize) -> Bits {
        Bits((0..n).map(|i| self.bit(i)).collect())
    }

    /// Number of 1s; `None` when infinite.
    pub fn ones(&self) -> Option<usize> {
        self.is_essentially_finite().then(|| self.prefix.ones())
    }

    /// Drops the first `n` bits.
    pub fn shift(&self, n: usize) -> InfBits {
        InfBits::new(self.prefix.suffix(n), self.tail)
    }
}

impl fmt::Display for InfBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = if self.tail == Tail::Ones { '1' } else { '0' };
        write!(f, "{}:{}*", self.prefix, t)
    }
}

impl FromStr for InfBits {
    type Err = BitsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || BitsError::Parse(s.to_string());
        let (w, t) = s.trim().split_once(':').ok_or_else(err)?;
        let tail = match t {
            "0*" => Tail::Zeros,
            "1*" => Tail::Ones,
            _ => return Err(err()),
        };
        let prefix = Bits::parse_token(w).ok_or_else(err)?;
        Ok(InfBits::new(prefix, tail))
    }
}

/// Anything that can be read bit by bit from the left.
pub trait BitSeq {
    fn bit_at(&self, i: usize) -> Option<bool>;
}

impl BitSeq for Bits {
    fn bit_at(&self, i: usize) -> Option<bool> {
        self.get(i)
    }
}

impl BitSeq for InfBits {
    fn bit_at(&self, i: usize) -> Option<bool> {
        Some(self.bit(i))
    }
}

/// `u ≼ x`
pub fn is_prefix<S: BitSeq + ?Sized>(u: &Bits, x: &S) -> bool {
    u.as_slice()
        .iter()
        .enumerate()
        .all(|(i, b)| x.bit_at(i) == Some(*b))
}

/// The `i`'th string of ε, 0, 1, 00, 01, … (1-based).
pub fn shortlex(i: u64) -> Result<Bits, BitsError> {
    if i == 0 {
        return Err(BitsError::ZeroIndex);
    }
    let width = 63 - i.leading_zeros() as usize;
    Ok(Bits((0..width).rev().map(|k| (i >> k) & 1 == 1).collect()))
}

/// 1-based position of the bit of component `i` (1-based) at depth `j` (1-based)
/// inside an `n`-fusion.
fn fused_position(n: usize, i: usize, j: usize) -> usize {
    j * n - n + i
}

/// All shortest `z` such that bit `jn−n+i` of `z` is bit `j` of `xs[i]`.
pub fn fusions(xs: &[Bits]) -> Result<BTreeSet<Bits>, BitsError> {
    let n = xs.len();
    if n == 0 {
        return Err(BitsError::EmptyFusion);
    }
    let len = xs
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_empty())
        .map(|(k, x)| fused_position(n, k + 1, x.len()))
        .max()
        .unwrap_or(0);
    let mut fixed: Vec<Option<bool>> = vec![None; len];
    for (k, x) in xs.iter().enumerate() {
        for (j, b) in x.as_slice().iter().enumerate() {
            fixed[fused_position(n, k + 1, j + 1) - 1] = Some(*b);
        }
    }
    let free: Vec<usize> = (0..len).filter(|p| fixed[*p].is_none()).collect();
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << free.len()) {
        let mut z: Vec<bool> = fixed.iter().map(|b| b.unwrap_or(false)).collect();
        for (k, p) in free.iter().enumerate() {
            z[*p] = (mask >> k) & 1 == 1;
        }
        out.insert(Bits(z));
    }
    Ok(out)
}

/// Component `i` keeps the bits at positions `j ≡ i (mod n)`, counting from 1.
pub fn defusion(z: &Bits, n: usize) -> Result<Vec<Bits>, BitsError> {
    if n == 0 {
        return Err(BitsError::ZeroArity);
    }
    let mut out = vec![Bits::empty(); n];
    for (p, b) in z.as_slice().iter().enumerate() {
        out[p % n].push(*b);
    }
    Ok(out)
}

pub fn defusion_inf(z: &InfBits, n: usize) -> Result<Vec<InfBits>, BitsError> {
    if n == 0 {
        return Err(BitsError::ZeroArity);
    }
    let width = z.prefix().len().div_ceil(n) * n;
    Ok(defusion(&z.take(width), n)?
        .into_iter()
        .map(|p| InfBits::new(p, z.tail()))
        .collect())
}

/// The unique fusion of essentially finite infinite bitstrings.
pub fn fuse_inf(xs: &[InfBits]) -> Result<InfBits, BitsError> {
    let n = xs.len();
    if n == 0 {
        return Err(BitsError::EmptyFusion);
    }
    if let Some(bad) = xs.iter().find(|x| !x.is_essentially_finite()) {
        return Err(BitsError::OnesTail(bad.clone()));
    }
    let depth = xs.iter().map(|x| x.prefix().len()).max().unwrap_or(0);
    let z = (0..depth * n).map(|p| xs[p % n].bit(p / n)).collect();
    Ok(InfBits::new(Bits(z), Tail::Zeros))
}
