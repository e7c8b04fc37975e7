//! Block plans for the infinite cases. Plans are pure sequence arithmetic:
//! which entries go into a block and which target weights sit on which `E_j`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seqkit::{integer_split, majorizes_slices, Card, WeightSeq};

/// Where a block entry comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Src {
    Mu(usize),
    /// Carries weight `1 − λ_i`.
    Lambda(usize),
    /// Entry of the sequence with zeros and ones stripped.
    Core(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockEntry<S> {
    pub src: Src,
    pub value: S,
}

/// One stage: `Σ entries = Σ targets` as operators, plus entries placed
/// directly on a single `E`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPlan<S> {
    pub stage: usize,
    /// Entries realized through the Horn chain.
    pub entries: Vec<BlockEntry<S>>,
    /// `(j, η)`: weight `η` on `E_j`.
    pub targets: Vec<(usize, S)>,
    /// Entries placed as `value · E_j`.
    pub colinear: Vec<(BlockEntry<S>, usize)>,
    pub mu: Range<usize>,
    pub lambda: Range<usize>,
    /// Weight of `E_c` already used before this stage.
    pub r_in: S,
    pub r_out: S,
    /// After the stage, everything realized equals `Σ_{j<c} E_j + r_out E_c`
    /// minus the carry, with `c` this value.
    pub consumed_through: usize,
    /// Weight on `E_j` owed to a later stage.
    pub carry: Option<(usize, S)>,
    pub extensions: usize,
}

impl<S: Scalar> BlockPlan<S> {
    pub fn values(&self) -> Vec<S> {
        self.entries.iter().map(|e| e.value.clone()).collect()
    }

    pub fn eta(&self) -> Vec<S> {
        self.targets.iter().map(|(_, w)| w.clone()).collect()
    }

    pub fn majorization_holds(&self) -> bool {
        let n = self.entries.len().max(self.targets.len()).max(1);
        let tol = S::tol(1e-10) * S::from_usize(n).expect("usize");
        majorizes_slices(&self.values(), &self.eta(), &tol).holds
    }
}

fn tol<S: Scalar>() -> S {
    S::tol(1e-12)
}

fn has<S: Scalar>(seq: &WeightSeq<S>, i: usize) -> bool {
    match seq.len() {
        Card::Finite(n) => i < n,
        Card::Infinite => true,
    }
}

fn tail<S: Scalar>(seq: &WeightSeq<S>, from: usize) -> Result<S> {
    seq.tail_sum(from)
        .finite()
        .cloned()
        .ok_or_else(|| Error::Precondition("expected a summable sequence".into()))
}

/// Targets for a block of total `s` starting on `E_c`, of which `r_in` is used:
/// `1 − r_in` on `E_c`, then ones, then the remainder.
pub fn block_targets<S: Scalar>(c: usize, r_in: &S, s: &S) -> (Vec<(usize, S)>, usize, S) {
    let avail = S::one() - r_in.clone();
    if *s < avail.clone() - tol() {
        return (vec![(c, s.clone())], c, r_in.clone() + s.clone());
    }
    let mut targets = vec![(c, avail.clone())];
    let rest = s.clone() - avail;
    let rest = if rest < S::zero() { S::zero() } else { rest };
    let (q, r) = integer_split(&rest, &tol());
    targets.extend((1..=q).map(|i| (c + i, S::one())));
    if r > S::zero() {
        targets.push((c + q + 1, r.clone()));
    }
    (targets, c + q + 1, r)
}

fn guard<S: Scalar>(stage: usize, limit: usize, mut build: impl FnMut(usize) -> Result<BlockPlan<S>>) -> Result<BlockPlan<S>> {
    for ext in 0..=limit {
        let mut plan = build(ext)?;
        if plan.majorization_holds() {
            plan.extensions = ext;
            return Ok(plan);
        }
    }
    Err(Error::PlanAssertion {
        stage,
        detail: format!("block majorization still fails after {limit} extensions"),
    })
}

struct Block<S> {
    entries: Vec<BlockEntry<S>>,
    sum: S,
}

impl<S: Scalar> Block<S> {
    fn new() -> Self {
        Block {
            entries: Vec::new(),
            sum: S::zero(),
        }
    }

    fn mu(&mut self, mu: &WeightSeq<S>, i: usize) {
        let v = mu.get(i);
        self.sum = self.sum.clone() + v.clone();
        self.entries.push(BlockEntry { src: Src::Mu(i), value: v });
    }

    fn lambda(&mut self, lambda: &WeightSeq<S>, i: usize) {
        let v = S::one() - lambda.get(i);
        self.sum = self.sum.clone() + v.clone();
        self.entries.push(BlockEntry {
            src: Src::Lambda(i),
            value: v,
        });
    }
}

struct Cursor<S> {
    m: usize,
    l: usize,
    c: usize,
    r: S,
}

impl<S: Scalar> Cursor<S> {
    fn start() -> Self {
        Cursor {
            m: 0,
            l: 0,
            c: 0,
            r: S::zero(),
        }
    }

    fn plan(&self, stage: usize, block: Block<S>, m_end: usize, l_end: usize) -> BlockPlan<S> {
        let (targets, c, r) = block_targets(self.c, &self.r, &block.sum);
        BlockPlan {
            stage,
            entries: block.entries,
            targets,
            colinear: Vec::new(),
            mu: self.m..m_end,
            lambda: self.l..l_end,
            r_in: self.r.clone(),
            r_out: r,
            consumed_through: c,
            carry: None,
            extensions: 0,
        }
    }

    fn advance(&mut self, plan: &BlockPlan<S>) {
        self.m = plan.mu.end;
        self.l = plan.lambda.end;
        self.c = plan.consumed_through;
        self.r = plan.r_out.clone();
    }
}

/// `Σμ = ∞`: each stage pairs one `1 − λ` with the shortest μ-run that brings
/// the block to at least `2 − r`, targeting `(1 − r, 1, r')` with `r' < 1/2`.
/// Once λ runs out, μ-runs alone are cut at `1 − r`.
pub fn plan_mu_diverges<S: Scalar>(
    mu: &WeightSeq<S>,
    lambda: &WeightSeq<S>,
    stages: usize,
    extend_limit: usize,
) -> Result<Vec<BlockPlan<S>>> {
    if !mu.len().is_infinite() {
        return Err(Error::Precondition("μ must be infinite with divergent sum".into()));
    }
    let mut cur = Cursor::<S>::start();
    let mut plans = Vec::with_capacity(stages);
    for stage in 0..stages {
        let with_lambda = has(lambda, cur.l);
        let plan = guard(stage, extend_limit, |ext| {
            let mut b = Block::new();
            let mut l_end = cur.l;
            if with_lambda {
                b.lambda(lambda, cur.l);
                l_end += 1;
            }
            let need = S::from_usize(if with_lambda { 2 } else { 1 }).unwrap() - cur.r.clone() - tol();
            let mut j = cur.m;
            while b.sum < need {
                b.mu(mu, j);
                j += 1;
            }
            for _ in 0..ext {
                b.mu(mu, j);
                j += 1;
            }
            Ok(cur.plan(stage, b, j, l_end))
        })?;
        cur.advance(&plan);
        plans.push(plan);
    }
    Ok(plans)
}

/// First-fit bin packing of `values` into bins of capacity `cap`, returning
/// the indices in each bin.
pub fn first_fit_bins<S: Scalar>(values: &[S], cap: &S) -> Vec<Vec<usize>> {
    let mut bins: Vec<(S, Vec<usize>)> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match bins
            .iter_mut()
            .find(|(s, _)| s.clone() + v.clone() <= cap.clone() + tol())
        {
            Some((s, idx)) => {
                *s = s.clone() + v.clone();
                idx.push(i);
            }
            None => bins.push((v.clone(), vec![i])),
        }
    }
    bins.into_iter().map(|(_, idx)| idx).collect()
}

/// `Σλ = ∞`, `Σμ < ∞`: μ is packed into bins `Λ_k` of sum at most one, with
/// bin `k` placed on `E_k` and its slack `s_k` added to the first λ-block.
/// A summable infinite μ gets one extra bin for its tail, emitted lazily.
pub fn plan_lambda_diverges<S: Scalar>(
    mu: &WeightSeq<S>,
    lambda: &WeightSeq<S>,
    stages: usize,
    extend_limit: usize,
) -> Result<Vec<BlockPlan<S>>> {
    if !lambda.len().is_infinite() {
        return Err(Error::Precondition("λ must be infinite with divergent sum".into()));
    }
    let (packed, tail_start) = if mu.is_finite() {
        (mu.as_finite()?.len(), None)
    } else {
        let mut p = 0;
        while tail(mu, p)? > S::one() {
            p += 1;
        }
        (p, Some(p))
    };
    let bins = first_fit_bins(&mu.prefix(packed), &S::one());
    let mut slack: Vec<S> = bins
        .iter()
        .map(|b| S::one() - b.iter().fold(S::zero(), |s, &i| s + mu.get(i)))
        .collect();
    if let Some(p) = tail_start {
        slack.push(S::one() - tail(mu, p)?);
    }
    let k = slack.len();
    let tail_bin = tail_start.map(|p| (p, k - 1));

    let mut cur = Cursor::<S>::start();
    let mut mu_next = tail_start.unwrap_or(packed);
    let mut plans = Vec::with_capacity(stages);
    for stage in 0..stages {
        let first = stage == 0;
        let kk = if first {
            k
        } else if cur.r > tol() {
            1
        } else {
            0
        };
        let need = S::from_usize(2 * kk + 1).unwrap() - tol();
        let mut plan = guard(stage, extend_limit, |ext| {
            let mut b = Block::new();
            let mut lsum = S::zero();
            let mut j = cur.l;
            while lsum < need {
                lsum = lsum + lambda.get(j);
                b.lambda(lambda, j);
                j += 1;
            }
            for _ in 0..ext {
                b.lambda(lambda, j);
                j += 1;
            }
            if !first {
                return Ok(cur.plan(stage, b, cur.m, j));
            }
            let mut targets: Vec<(usize, S)> = slack
                .iter()
                .enumerate()
                .filter(|(_, s)| **s > tol())
                .map(|(i, s)| (i, s.clone()))
                .collect();
            let rest = b.sum.clone() - slack.iter().fold(S::zero(), |a, s| a + s.clone());
            let (q, r) = integer_split(&rest, &tol());
            targets.extend((0..q).map(|i| (k + i, S::one())));
            if r > S::zero() {
                targets.push((k + q, r.clone()));
            }
            Ok(BlockPlan {
                stage,
                entries: b.entries,
                targets,
                colinear: Vec::new(),
                mu: 0..0,
                lambda: 0..j,
                r_in: S::zero(),
                r_out: r,
                consumed_through: k + q,
                carry: None,
                extensions: 0,
            })
        })?;
        if first {
            for (bin, idx) in bins.iter().enumerate() {
                for &i in idx {
                    plan.colinear.push((
                        BlockEntry {
                            src: Src::Mu(i),
                            value: mu.get(i),
                        },
                        bin,
                    ));
                }
            }
        }
        if let Some((_, e)) = tail_bin {
            // release as many tail entries as λ entries were used
            let start = mu_next;
            mu_next += plan.lambda.len();
            for i in start..mu_next {
                plan.colinear.push((
                    BlockEntry {
                        src: Src::Mu(i),
                        value: mu.get(i),
                    },
                    e,
                ));
            }
            plan.carry = Some((e, tail(mu, mu_next)?));
        }
        plan.mu = cur.m..mu_next;
        cur.advance(&plan);
        plans.push(plan);
    }
    Ok(plans)
}

const SEARCH_LIMIT: usize = 1_000_000;

fn search(stage: usize, from: usize, mut ok: impl FnMut(usize) -> Result<bool>) -> Result<usize> {
    for n in from..from + SEARCH_LIMIT {
        if ok(n)? {
            return Ok(n);
        }
    }
    Err(Error::PlanAssertion {
        stage,
        detail: "no admissible cut point found".into(),
    })
}

/// `M = N = ∞` with both sums finite and `k = Σλ − Σμ`. Cut points `n_j`,
/// `m_j` keep the remainders `r_j = T_λ(n_j) − T_μ(m_j)` in `[0, 1/2)`.
pub fn plan_both_summable<S: Scalar>(
    mu: &WeightSeq<S>,
    lambda: &WeightSeq<S>,
    k: i64,
    stages: usize,
    extend_limit: usize,
) -> Result<Vec<BlockPlan<S>>> {
    if !mu.len().is_infinite() || !lambda.len().is_infinite() {
        return Err(Error::Precondition("μ and λ must both be infinite".into()));
    }
    let half = S::ratio(1, 2);
    let mut cur = Cursor::<S>::start();
    let mut plans = Vec::with_capacity(stages);
    for stage in 0..stages {
        let (lower, ceiling) = if stage == 0 {
            ((k + 1).max(1) as usize, None)
        } else {
            (cur.l + 2, Some(tail(mu, cur.m)?))
        };
        let n0 = search(stage, lower, |n| {
            let t = tail(lambda, n)?;
            Ok(match &ceiling {
                None => t < half,
                Some(c) => t <= *c,
            })
        })?;
        let plan = guard(stage, extend_limit, |ext| {
            let n = n0 + ext;
            let tl = tail(lambda, n)?;
            let m_lower = if stage == 0 { 0 } else { cur.m + 1 };
            let m = search(stage, m_lower, |m| Ok(tail(mu, m)? <= tl))?;
            let mut b = Block::new();
            (cur.m..m).for_each(|i| b.mu(mu, i));
            (cur.l..n).for_each(|i| b.lambda(lambda, i));
            Ok(cur.plan(stage, b, m, n))
        })?;
        cur.advance(&plan);
        plans.push(plan);
    }
    Ok(plans)
}

/// Head block for `M < ∞`, `N = ∞`, `Σλ < ∞`: all of μ with `1 − λ_j` for
/// `j < n`, where `n >= k + 2` is the first cut with `T_λ(n) < 1`. The target
/// is `(1, ..., 1, r)` with `n − k` ones.
pub fn plan_m_finite_head<S: Scalar>(
    mu: &WeightSeq<S>,
    lambda: &WeightSeq<S>,
    k: i64,
    extend_limit: usize,
) -> Result<BlockPlan<S>> {
    let m = mu.as_finite()?.len();
    if !lambda.len().is_infinite() {
        return Err(Error::Precondition("λ must be infinite".into()));
    }
    let n0 = search(0, (k + 2).max(1) as usize, |n| Ok(tail(lambda, n)? < S::one()))?;
    let cur = Cursor::<S>::start();
    guard(0, extend_limit, |ext| {
        let n = n0 + ext;
        let mut b = Block::new();
        (0..m).for_each(|i| b.mu(mu, i));
        (0..n).for_each(|i| b.lambda(lambda, i));
        Ok(cur.plan(0, b, m, n))
    })
}

/// `Σξ = n < ∞`: a head of sum `n − 1 + r` against `(1, ..., 1, r)` on
/// `E_0, ..., E_{n-1}`, and the rest placed on `E_{n-1}`. An infinite rest is
/// released one entry per later stage.
pub fn plan_finite_rank<S: Scalar>(core: &WeightSeq<S>, n: usize, stages: usize) -> Result<Vec<BlockPlan<S>>> {
    if n == 0 {
        return if core.is_empty() {
            Ok(Vec::new())
        } else {
            Err(Error::Precondition("a nonempty sequence cannot sum to zero".into()))
        };
    }
    let nn = S::from_usize(n).unwrap();
    let base = S::from_usize(n - 1).unwrap();
    let entry = |i: usize| BlockEntry {
        src: Src::Core(i),
        value: core.get(i),
    };
    // head length m and its partial sum
    let (m, partial) = match core.len() {
        Card::Finite(len) => {
            let mut p = S::zero();
            let mut best = (0, S::zero());
            for i in 0..len {
                if p < nn.clone() - tol() {
                    best = (i, p.clone());
                }
                p = p + core.get(i);
            }
            best
        }
        Card::Infinite => {
            let mut p = S::zero();
            let mut i = 0;
            while p < base.clone() - tol() {
                p = p + core.get(i);
                i += 1;
            }
            (i, p)
        }
    };
    let r = partial - base;
    let r = if r < tol() { S::zero() } else { r };
    let mut targets: Vec<(usize, S)> = (0..n - 1).map(|i| (i, S::one())).collect();
    if r > S::zero() {
        targets.push((n - 1, r.clone()));
    }
    let mut head = BlockPlan {
        stage: 0,
        entries: (0..m).map(entry).collect(),
        targets,
        colinear: Vec::new(),
        mu: 0..0,
        lambda: 0..0,
        r_in: S::zero(),
        r_out: S::zero(),
        consumed_through: n,
        carry: None,
        extensions: 0,
    };
    if !head.majorization_holds() {
        return Err(Error::PlanAssertion {
            stage: 0,
            detail: "head block is not majorized by its target".into(),
        });
    }
    let mut plans = Vec::new();
    match core.len() {
        Card::Finite(len) => {
            head.colinear = (m..len).map(|i| (entry(i), n - 1)).collect();
            plans.push(head);
        }
        Card::Infinite => {
            head.carry = Some((n - 1, tail(core, m)?));
            plans.push(head);
            for stage in 1..stages {
                let i = m + stage - 1;
                plans.push(BlockPlan {
                    stage,
                    entries: Vec::new(),
                    targets: Vec::new(),
                    colinear: vec![(entry(i), n - 1)],
                    mu: 0..0,
                    lambda: 0..0,
                    r_in: S::zero(),
                    r_out: S::zero(),
                    consumed_through: n,
                    carry: Some((n - 1, tail(core, i + 1)?)),
                    extensions: 0,
                });
            }
        }
    }
    Ok(plans)
}
