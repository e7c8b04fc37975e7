use crate::error::Result;
use crate::scalar::Scalar;

use super::{Card, Component, Tail, WeightSeq};

/// Maps indices of a subsequence back to positions in the source sequence.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PositionMap {
    explicit: Vec<usize>,
    /// Source position of the first unrolled tail cycle.
    base: usize,
    /// Strands per source cycle.
    cycle: usize,
    /// Source strand indices that feed this subsequence, in order.
    strands: Vec<usize>,
}

impl PositionMap {
    pub fn position(&self, i: usize) -> usize {
        if i < self.explicit.len() {
            return self.explicit[i];
        }
        assert!(!self.strands.is_empty(), "index {i} past a finite subsequence");
        let p = i - self.explicit.len();
        let (k, s) = (p / self.strands.len(), p % self.strands.len());
        self.base + k * self.cycle + self.strands[s]
    }

    pub fn count(&self) -> Card {
        if self.strands.is_empty() {
            Card::Finite(self.explicit.len())
        } else {
            Card::Infinite
        }
    }

    /// Positions of the first `n` entries (all of them if finite and shorter).
    pub fn first(&self, n: usize) -> Vec<usize> {
        let n = match self.count() {
            Card::Finite(c) => n.min(c),
            Card::Infinite => n,
        };
        (0..n).map(|i| self.position(i)).collect()
    }
}

/// `ξ = μ ⊕ (1 − λ) ⊕ 0_m ⊕ 1_n`, with μ in `(0, 1/2]` and λ in `(0, 1/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitSeq<S> {
    pub mu: WeightSeq<S>,
    pub lambda: WeightSeq<S>,
    pub zeros: Card,
    pub ones: Card,
    pub mu_positions: PositionMap,
    pub lambda_positions: PositionMap,
    pub zero_positions: PositionMap,
    pub one_positions: PositionMap,
}

impl<S: Scalar> SplitSeq<S> {
    /// Number of μ entries.
    pub fn m(&self) -> Card {
        self.mu.len()
    }

    /// Number of λ entries.
    pub fn n(&self) -> Card {
        self.lambda.len()
    }
}

/// `ξ = ξ̃ ⊕ 0_m ⊕ 1_n` with ξ̃ strictly inside `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stripped<S> {
    pub core: WeightSeq<S>,
    pub core_positions: PositionMap,
    pub zeros: Card,
    pub ones: Card,
    pub zero_positions: PositionMap,
    pub one_positions: PositionMap,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Zero,
    One,
    Mu,
    Lambda,
}

struct Buckets<S> {
    heads: [Vec<S>; 4],
    explicit: [Vec<usize>; 4],
    strands: [Vec<(usize, Component<S>)>; 4],
    base: usize,
    cycle: usize,
}

fn slot(c: Class) -> usize {
    match c {
        Class::Zero => 0,
        Class::One => 1,
        Class::Mu => 2,
        Class::Lambda => 3,
    }
}

fn bucketize<S: Scalar>(xi: &WeightSeq<S>) -> Result<Buckets<S>> {
    xi.check_unit_interval()?;
    let half = S::ratio(1, 2);
    let (mut cycles, sides) = xi.settle(&half)?;
    if let Tail::Cyclic(comps) = xi.tail() {
        // a decreasing strand may start at exactly 1, an increasing one at exactly 0
        if comps.iter().any(|c| {
            let v = c.value(0);
            !c.is_eventually_constant() && (v.is_zero() || v.is_one())
        }) {
            cycles = cycles.max(1);
        }
    }
    let unrolled = xi.unrolled(cycles);

    let classify = |v: &S| {
        if v.is_zero() {
            Class::Zero
        } else if v.is_one() {
            Class::One
        } else if *v <= half {
            Class::Mu
        } else {
            Class::Lambda
        }
    };

    let mut b = Buckets {
        heads: Default::default(),
        explicit: Default::default(),
        strands: Default::default(),
        base: unrolled.head().len(),
        cycle: 0,
    };
    for (pos, v) in unrolled.head().iter().enumerate() {
        let c = classify(v);
        b.heads[slot(c)].push(v.clone());
        b.explicit[slot(c)].push(pos);
    }
    if let Tail::Cyclic(comps) = unrolled.tail() {
        b.cycle = comps.len();
        for (j, c) in comps.iter().enumerate() {
            let class = if c.is_eventually_constant() {
                classify(&c.offset)
            } else if sides[j] {
                Class::Mu
            } else {
                Class::Lambda
            };
            let strand = if c.is_eventually_constant() {
                Component {
                    offset: c.offset.clone(),
                    first: S::zero(),
                    ratio: S::zero(),
                }
            } else {
                c.clone()
            };
            b.strands[slot(class)].push((j, strand));
        }
    }
    Ok(b)
}

impl<S: Scalar> Buckets<S> {
    fn positions(&self, c: Class) -> PositionMap {
        PositionMap {
            explicit: self.explicit[slot(c)].clone(),
            base: self.base,
            cycle: self.cycle,
            strands: self.strands[slot(c)].iter().map(|(j, _)| *j).collect(),
        }
    }

    fn count(&self, c: Class) -> Card {
        if self.strands[slot(c)].is_empty() {
            Card::Finite(self.heads[slot(c)].len())
        } else {
            Card::Infinite
        }
    }

    fn seq(&self, c: Class, complement: bool) -> Result<WeightSeq<S>> {
        let map = |v: &S| if complement { S::one() - v.clone() } else { v.clone() };
        let head = self.heads[slot(c)].iter().map(map).collect();
        let strands = &self.strands[slot(c)];
        let tail = if strands.is_empty() {
            Tail::Finite
        } else {
            Tail::Cyclic(
                strands
                    .iter()
                    .map(|(_, s)| if complement { s.complement() } else { s.clone() })
                    .collect(),
            )
        };
        WeightSeq::from_parts(head, tail)
    }
}

/// Splits `ξ` into `μ` (entries in `(0, 1/2]`), `λ = 1 − (entries in (1/2, 1))`,
/// and counts of zeros and ones.
pub fn split_mu_lambda<S: Scalar>(xi: &WeightSeq<S>) -> Result<SplitSeq<S>> {
    let b = bucketize(xi)?;
    Ok(SplitSeq {
        mu: b.seq(Class::Mu, false)?,
        lambda: b.seq(Class::Lambda, true)?,
        zeros: b.count(Class::Zero),
        ones: b.count(Class::One),
        mu_positions: b.positions(Class::Mu),
        lambda_positions: b.positions(Class::Lambda),
        zero_positions: b.positions(Class::Zero),
        one_positions: b.positions(Class::One),
    })
}

/// Removes the entries equal to 0 or 1, keeping the rest in source order.
pub fn strip01<S: Scalar>(xi: &WeightSeq<S>) -> Result<Stripped<S>> {
    let b = bucketize(xi)?;
    // merge the μ and λ buckets back in source order
    let mut head: Vec<(usize, S)> = b.explicit[slot(Class::Mu)]
        .iter()
        .cloned()
        .zip(b.heads[slot(Class::Mu)].iter().cloned())
        .chain(
            b.explicit[slot(Class::Lambda)]
                .iter()
                .cloned()
                .zip(b.heads[slot(Class::Lambda)].iter().cloned()),
        )
        .collect();
    head.sort_by_key(|(p, _)| *p);
    let mut strands: Vec<(usize, Component<S>)> = b.strands[slot(Class::Mu)]
        .iter()
        .chain(b.strands[slot(Class::Lambda)].iter())
        .cloned()
        .collect();
    strands.sort_by_key(|(j, _)| *j);

    let core_positions = PositionMap {
        explicit: head.iter().map(|(p, _)| *p).collect(),
        base: b.base,
        cycle: b.cycle,
        strands: strands.iter().map(|(j, _)| *j).collect(),
    };
    let tail = if strands.is_empty() {
        Tail::Finite
    } else {
        Tail::Cyclic(strands.into_iter().map(|(_, s)| s).collect())
    };
    Ok(Stripped {
        core: WeightSeq::from_parts(head.into_iter().map(|(_, v)| v).collect(), tail)?,
        core_positions,
        zeros: b.count(Class::Zero),
        ones: b.count(Class::One),
        zero_positions: b.positions(Class::Zero),
        one_positions: b.positions(Class::One),
    })
}
