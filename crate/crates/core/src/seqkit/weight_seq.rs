use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A sum or count that is either finite or certified infinite.
#[derive(Clone, Debug, PartialEq)]
pub enum ExtReal<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> ExtReal<S> {
    pub fn zero() -> Self {
        ExtReal::Finite(S::zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a.clone() + b.clone()),
            _ => ExtReal::Infinite,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::Finite(x) => x.to_f64_lossy(),
            ExtReal::Infinite => f64::INFINITY,
        }
    }
}

impl<S: fmt::Display> fmt::Display for ExtReal<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinite => write!(f, "inf"),
        }
    }
}

/// Cardinality of a subsequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Card {
    Finite(usize),
    Infinite,
}

impl Card {
    pub fn is_infinite(self) -> bool {
        matches!(self, Card::Infinite)
    }

    pub fn is_zero(self) -> bool {
        self == Card::Finite(0)
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Card::Finite(n) => write!(f, "{n}"),
            Card::Infinite => write!(f, "inf"),
        }
    }
}

/// One interleaved strand of a closed-form tail: at cycle `k` it yields
/// `offset + first * ratio^k`, with `0 <= ratio < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Component<S> {
    pub offset: S,
    pub first: S,
    pub ratio: S,
}

impl<S: Scalar> Component<S> {
    pub fn new(offset: S, first: S, ratio: S) -> Result<Self> {
        if ratio < S::zero() || ratio >= S::one() {
            return Err(Error::InvalidTail(format!("ratio {ratio} outside [0, 1)")));
        }
        if offset < S::zero() || offset.clone() + first.clone() < S::zero() {
            return Err(Error::InvalidTail(format!(
                "component offset {offset}, first {first} produces negative values"
            )));
        }
        Ok(Component { offset, first, ratio })
    }

    pub fn value(&self, k: usize) -> S {
        self.offset.clone() + self.first.clone() * num_traits::pow(self.ratio.clone(), k)
    }

    /// Constant from cycle 1 on.
    pub fn is_eventually_constant(&self) -> bool {
        self.first.is_zero() || self.ratio.is_zero()
    }

    /// The same strand started `k` cycles later.
    pub fn advanced(&self, k: usize) -> Self {
        Component {
            offset: self.offset.clone(),
            first: self.first.clone() * num_traits::pow(self.ratio.clone(), k),
            ratio: self.ratio.clone(),
        }
    }

    /// Exact sum of every value of the strand.
    pub fn total(&self) -> ExtReal<S> {
        if !self.offset.is_zero() {
            return ExtReal::Infinite;
        }
        ExtReal::Finite(self.first.clone() / (S::one() - self.ratio.clone()))
    }

    /// `1 - value` as a strand.
    pub fn complement(&self) -> Self {
        Component {
            offset: S::one() - self.offset.clone(),
            first: -self.first.clone(),
            ratio: self.ratio.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tail<S> {
    /// No entries after the head.
    Finite,
    /// Infinitely many zeros after the head.
    Zeros,
    /// Interleaved closed-form strands, repeated cycle by cycle.
    Cyclic(Vec<Component<S>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqKind {
    Finite,
    FinitelySupported,
    GeometricTail,
    ConstantTail,
    CyclicTail,
}

impl SeqKind {
    pub fn name(self) -> &'static str {
        match self {
            SeqKind::Finite => "finite",
            SeqKind::FinitelySupported => "finitely-supported",
            SeqKind::GeometricTail => "geometric-tail",
            SeqKind::ConstantTail => "constant-tail",
            SeqKind::CyclicTail => "cyclic-tail",
        }
    }
}

/// A nonnegative sequence, finite or infinite with a closed-form tail.
///
/// Every tail sum is computed from the closed form, never estimated.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSeq<S> {
    head: Vec<S>,
    tail: Tail<S>,
}

impl<S: Scalar> WeightSeq<S> {
    fn checked(head: Vec<S>, tail: Tail<S>) -> Result<Self> {
        if let Some((index, v)) = head.iter().enumerate().find(|(_, v)| **v < S::zero()) {
            return Err(Error::EntryOutOfRange {
                index,
                value: v.to_f64_lossy(),
                range: "[0, inf)",
            });
        }
        if let Tail::Cyclic(comps) = &tail {
            if comps.is_empty() {
                return Err(Error::InvalidTail("cyclic tail with no components".into()));
            }
            for c in comps {
                Component::new(c.offset.clone(), c.first.clone(), c.ratio.clone())?;
            }
        }
        Ok(WeightSeq { head, tail })
    }

    pub fn finite(values: Vec<S>) -> Result<Self> {
        Self::checked(values, Tail::Finite)
    }

    pub fn finitely_supported(values: Vec<S>) -> Result<Self> {
        Self::checked(values, Tail::Zeros)
    }

    /// `values` followed by `first, first*ratio, first*ratio^2, ...`.
    pub fn geometric_tail(values: Vec<S>, first: S, ratio: S) -> Result<Self> {
        let c = Component::new(S::zero(), first, ratio)?;
        Self::checked(values, Tail::Cyclic(vec![c]))
    }

    /// `values` followed by `value` repeated forever.
    pub fn constant_tail(values: Vec<S>, value: S) -> Result<Self> {
        let c = Component::new(value, S::zero(), S::zero())?;
        Self::checked(values, Tail::Cyclic(vec![c]))
    }

    pub fn cyclic_tail(values: Vec<S>, components: Vec<Component<S>>) -> Result<Self> {
        Self::checked(values, Tail::Cyclic(components))
    }

    pub fn from_parts(head: Vec<S>, tail: Tail<S>) -> Result<Self> {
        Self::checked(head, tail)
    }

    pub fn empty() -> Self {
        WeightSeq {
            head: Vec::new(),
            tail: Tail::Finite,
        }
    }

    pub fn head(&self) -> &[S] {
        &self.head
    }

    pub fn tail(&self) -> &Tail<S> {
        &self.tail
    }

    pub fn kind(&self) -> SeqKind {
        match &self.tail {
            Tail::Finite => SeqKind::Finite,
            Tail::Zeros => SeqKind::FinitelySupported,
            Tail::Cyclic(c) if c.len() == 1 && c[0].offset.is_zero() => SeqKind::GeometricTail,
            Tail::Cyclic(c) if c.len() == 1 && c[0].first.is_zero() => SeqKind::ConstantTail,
            Tail::Cyclic(_) => SeqKind::CyclicTail,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.tail, Tail::Finite)
    }

    pub fn len(&self) -> Card {
        match self.tail {
            Tail::Finite => Card::Finite(self.head.len()),
            _ => Card::Infinite,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Card::Finite(0)
    }

    /// The finite values, or an error for infinite kinds.
    pub fn as_finite(&self) -> Result<&[S]> {
        if self.is_finite() {
            Ok(&self.head)
        } else {
            Err(Error::InfiniteSequence)
        }
    }

    /// Entry `i` (0-based); positions past a finite end read as zero.
    pub fn get(&self, i: usize) -> S {
        if i < self.head.len() {
            return self.head[i].clone();
        }
        match &self.tail {
            Tail::Finite | Tail::Zeros => S::zero(),
            Tail::Cyclic(comps) => {
                let p = i - self.head.len();
                comps[p % comps.len()].value(p / comps.len())
            }
        }
    }

    /// The first `n` entries (fewer if the sequence is finite and shorter).
    pub fn prefix(&self, n: usize) -> Vec<S> {
        let n = match self.len() {
            Card::Finite(len) => n.min(len),
            Card::Infinite => n,
        };
        (0..n).map(|i| self.get(i)).collect()
    }

    /// The sequence with its first `n` entries removed.
    pub fn skip(&self, n: usize) -> Self {
        if n <= self.head.len() {
            return WeightSeq {
                head: self.head[n..].to_vec(),
                tail: self.tail.clone(),
            };
        }
        match &self.tail {
            Tail::Finite | Tail::Zeros => WeightSeq {
                head: Vec::new(),
                tail: self.tail.clone(),
            },
            Tail::Cyclic(comps) => {
                let p = n - self.head.len();
                let (k0, rem) = (p / comps.len(), p % comps.len());
                if rem == 0 {
                    WeightSeq {
                        head: Vec::new(),
                        tail: Tail::Cyclic(comps.iter().map(|c| c.advanced(k0)).collect()),
                    }
                } else {
                    WeightSeq {
                        head: comps[rem..].iter().map(|c| c.value(k0)).collect(),
                        tail: Tail::Cyclic(comps.iter().map(|c| c.advanced(k0 + 1)).collect()),
                    }
                }
            }
        }
    }

    /// The same sequence with `cycles` tail cycles moved into the head.
    pub fn unrolled(&self, cycles: usize) -> Self {
        match &self.tail {
            Tail::Cyclic(comps) => {
                let mut head = self.head.clone();
                for k in 0..cycles {
                    head.extend(comps.iter().map(|c| c.value(k)));
                }
                WeightSeq {
                    head,
                    tail: Tail::Cyclic(comps.iter().map(|c| c.advanced(cycles)).collect()),
                }
            }
            _ => self.clone(),
        }
    }

    /// Exact sum of all entries.
    pub fn total(&self) -> ExtReal<S> {
        let head = self.head.iter().fold(S::zero(), |acc, x| acc + x.clone());
        let mut sum = ExtReal::Finite(head);
        if let Tail::Cyclic(comps) = &self.tail {
            for c in comps {
                sum = sum.add(&c.total());
            }
        }
        sum
    }

    /// Exact sum of the entries at positions `>= from` (0-based).
    pub fn tail_sum(&self, from: usize) -> ExtReal<S> {
        self.skip(from).total()
    }

    /// Checks `0 <= entry <= 1` everywhere.
    pub fn check_unit_interval(&self) -> Result<()> {
        if let Some((index, v)) = self.head.iter().enumerate().find(|(_, v)| **v > S::one()) {
            return Err(Error::EntryOutOfRange {
                index,
                value: v.to_f64_lossy(),
                range: "[0, 1]",
            });
        }
        if let Tail::Cyclic(comps) = &self.tail {
            for (j, c) in comps.iter().enumerate() {
                let start = c.value(0);
                if c.offset > S::one() || start > S::one() {
                    let bad = if start > S::one() { start } else { c.offset.clone() };
                    return Err(Error::EntryOutOfRange {
                        index: self.head.len() + j,
                        value: bad.to_f64_lossy(),
                        range: "[0, 1]",
                    });
                }
            }
        }
        Ok(())
    }

    /// `1 - ξ` entrywise. Entries must lie in `[0, 1]`.
    pub fn complement(&self) -> Result<Self> {
        self.check_unit_interval()?;
        let head = self.head.iter().map(|x| S::one() - x.clone()).collect();
        let tail = match &self.tail {
            Tail::Finite => Tail::Finite,
            Tail::Zeros => Tail::Cyclic(vec![Component {
                offset: S::one(),
                first: S::zero(),
                ratio: S::zero(),
            }]),
            Tail::Cyclic(comps) => Tail::Cyclic(comps.iter().map(Component::complement).collect()),
        };
        Self::checked(head, tail)
    }

    /// Appends entries to the head of a finite sequence, or ahead of the tail.
    pub fn with_appended(&self, extra: &[S]) -> Result<Self> {
        let mut head = self.head.clone();
        head.extend_from_slice(extra);
        Self::checked(head, self.tail.clone())
    }

    /// Number of tail cycles after which every strand stays on one side of
    /// `threshold` under the test `value <= threshold`, together with that side.
    pub(crate) fn settle(&self, threshold: &S) -> Result<(usize, Vec<bool>)> {
        const CAP: usize = 10_000_000;
        let Tail::Cyclic(comps) = &self.tail else {
            return Ok((0, Vec::new()));
        };
        let mut cycles = 0;
        let mut sides = Vec::with_capacity(comps.len());
        for c in comps {
            let below = if c.is_eventually_constant() {
                c.offset <= *threshold
            } else if c.offset == *threshold {
                c.first < S::zero()
            } else {
                c.offset < *threshold
            };
            sides.push(below);
            let mut k = 0;
            let mut v = c.value(0);
            while (v <= *threshold) != below {
                k += 1;
                if k > CAP {
                    return Err(Error::InvalidTail(format!(
                        "strand does not settle around {threshold} within {CAP} cycles"
                    )));
                }
                v = c.value(k);
            }
            // Eventually constant strands take their constant value from cycle 1.
            if c.is_eventually_constant() && !c.first.is_zero() {
                k = k.max(1);
            }
            cycles = cycles.max(k);
        }
        Ok((cycles, sides))
    }
}

impl<S: Scalar> fmt::Display for WeightSeq<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, x) in self.head.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        match &self.tail {
            Tail::Finite => {}
            Tail::Zeros => write!(f, "{}0, 0, ...", if self.head.is_empty() { "" } else { ", " })?,
            Tail::Cyclic(comps) => {
                for c in comps {
                    write!(f, ", ({} + {}*{}^k)", c.offset, c.first, c.ratio)?;
                }
                write!(f, " ...")?;
            }
        }
        write!(f, ">")
    }
}
