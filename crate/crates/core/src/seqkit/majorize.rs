use crate::error::{Error, Result};
use crate::scalar::{near_integer, to_usize, Scalar};

use super::WeightSeq;

/// Outcome of a majorization test `ξ ≺ η`.
#[derive(Clone, Debug, PartialEq)]
pub struct MajorizationVerdict<S> {
    pub holds: bool,
    /// Number of leading terms `k` in the first violated inequality
    /// `Σ_{j<=k} ξ*_j <= Σ_{j<=k} η*_j`.
    pub failing_index: Option<usize>,
    /// `Σξ − Ση`.
    pub sum_gap: S,
}

/// Stable non-increasing order of a slice.
pub fn sorted_desc<S: Scalar>(values: &[S]) -> Vec<S> {
    let mut v = values.to_vec();
    // sort_by is stable, so equal entries keep their original order
    v.sort_by(|a, b| b.partial_cmp(a).expect("comparable weights"));
    v
}

/// The non-increasing rearrangement `ξ*` of a finite sequence.
pub fn rearrange_desc<S: Scalar>(seq: &WeightSeq<S>) -> Result<WeightSeq<S>> {
    WeightSeq::finite(sorted_desc(seq.as_finite()?))
}

/// `ξ ≺ η` for finite sequences, zero-padding the shorter one.
pub fn majorizes<S: Scalar>(xi: &WeightSeq<S>, eta: &WeightSeq<S>) -> Result<MajorizationVerdict<S>> {
    Ok(majorizes_slices(xi.as_finite()?, eta.as_finite()?, &S::tol(1e-12)))
}

/// Slice form of [`majorizes`] with an explicit slack on every comparison.
pub fn majorizes_slices<S: Scalar>(xi: &[S], eta: &[S], tol: &S) -> MajorizationVerdict<S> {
    let n = xi.len().max(eta.len());
    let mut xs = sorted_desc(xi);
    let mut es = sorted_desc(eta);
    xs.resize(n, S::zero());
    es.resize(n, S::zero());

    let mut px = S::zero();
    let mut pe = S::zero();
    let mut failing_index = None;
    for k in 0..n {
        px = px + xs[k].clone();
        pe = pe + es[k].clone();
        if failing_index.is_none() && px > pe.clone() + tol.clone() {
            failing_index = Some(k + 1);
        }
    }
    let sum_gap = px - pe;
    let holds = failing_index.is_none() && sum_gap.magnitude() <= *tol;
    MajorizationVerdict {
        holds,
        failing_index,
        sum_gap,
    }
}

fn check_unit_entries<S: Scalar>(values: &[S]) -> Result<()> {
    for (index, v) in values.iter().enumerate() {
        if *v < S::zero() || *v > S::one() {
            return Err(Error::EntryOutOfRange {
                index,
                value: v.to_f64_lossy(),
                range: "[0, 1]",
            });
        }
    }
    Ok(())
}

/// Writes `total = N + r` with `N` a nonnegative integer and `0 <= r < 1`,
/// snapping `r` to zero or one within `tol`.
pub fn integer_split<S: Scalar>(total: &S, tol: &S) -> (usize, S) {
    if let Some(n) = near_integer(total, tol) {
        return (to_usize(&n), S::zero());
    }
    let n = total.floor_val();
    (to_usize(&n), total.clone() - n)
}

/// For `0 <= ξ_j <= 1` with `Σξ = N + r`, the target `(1, ..., 1, r)`
/// (N ones, `r` omitted when zero) that majorizes `ξ`.
pub fn elem_eta_i<S: Scalar>(xi: &WeightSeq<S>) -> Result<WeightSeq<S>> {
    let values = xi.as_finite()?;
    check_unit_entries(values)?;
    let total = values.iter().fold(S::zero(), |acc, x| acc + x.clone());
    let (ones, r) = integer_split(&total, &S::tol(1e-12));
    let mut eta = vec![S::one(); ones];
    if r > S::zero() {
        eta.push(r);
    }
    WeightSeq::finite(eta)
}

/// Decides `ξ ≺ (1, ..., 1, r1, r2)` through the single inequality
/// `Σ_{j<=N+1} ξ*_j <= N + r1`, where `N = Σξ − r1 − r2`.
pub fn elem_check_ii<S: Scalar>(xi: &WeightSeq<S>, r1: &S, r2: &S) -> Result<bool> {
    let values = xi.as_finite()?;
    check_unit_entries(values)?;
    if !(S::zero() < *r2 && r2 <= r1 && *r1 <= S::one()) {
        return Err(Error::Precondition(format!("need 0 < r2 <= r1 <= 1, got r1 = {r1}, r2 = {r2}")));
    }
    let tol = S::tol(1e-12);
    let total = values.iter().fold(S::zero(), |acc, x| acc + x.clone());
    let rest = total - r1.clone() - r2.clone();
    let n = near_integer(&rest, &tol)
        .filter(|n| *n >= S::zero())
        .ok_or_else(|| Error::Precondition(format!("Σξ − r1 − r2 = {rest} is not a nonnegative integer")))?;
    let n = to_usize(&n);
    let lead = sorted_desc(values)
        .into_iter()
        .take(n + 1)
        .fold(S::zero(), |acc, x| acc + x);
    Ok(lead <= S::from_usize(n).expect("usize") + r1.clone() + tol)
}
