//! Decision procedures for finite operators and the algebra of admissible sequences.

use crate::error::{Error, Result};
use crate::horn::horn_decompose;
use crate::operators::{frame_operator, HermOp, RankOneDecomp, UnitVec};
use crate::scalar::{near_integer, Real, Scalar};
use crate::seqkit::{kadison_check, Card, ExtReal, WeightSeq};

#[derive(Clone, Debug)]
pub struct SumOfProjReport<T: Real> {
    /// `tr((A − I)₊)`
    pub excess: T,
    /// `tr((I − A)₊ R_A)`
    pub deficiency: T,
    pub gap: T,
    pub is_sum: bool,
    /// Rank-one projections summing to `A`.
    pub witness: Option<RankOneDecomp<T>>,
}

/// Decides whether a positive finite matrix is a sum of projections:
/// `tr((A − I)₊) − tr((I − A)₊ R_A)` must be a nonnegative integer.
pub fn sum_of_projections_check<T: Real>(a: &HermOp<T>, with_witness: bool) -> Result<SumOfProjReport<T>> {
    let eig = a.check_psd()?;
    let thr = eig.range_threshold();
    let mut excess = T::zero();
    let mut deficiency = T::zero();
    for &l in &eig.values {
        if l > T::one() {
            excess += l - T::one();
        } else if l > thr {
            deficiency += T::one() - l;
        }
    }
    let gap = excess - deficiency;
    let snapped = near_integer(&gap, &T::tol(1e-9)).filter(|n| *n >= T::zero());
    let is_sum = snapped.is_some();
    let witness = match (with_witness && is_sum, a.dim()) {
        (false, _) | (true, 0) => None,
        (true, n) => {
            let count = near_integer(&a.trace(), &T::tol(1e-9))
                .map(|t| t.to_f64_lossy().round() as usize)
                .ok_or_else(|| Error::Precondition("trace is not an integer".into()))?;
            let vecs: Vec<UnitVec<T>> = (0..n)
                .map(|j| UnitVec::normalized(eig.vectors.column(j).into_owned()))
                .collect::<Result<_>>()?;
            let eta: Vec<T> = eig.values.iter().map(|&l| if l > thr { l } else { T::zero() }).collect();
            Some(horn_decompose(&eta, &vecs, &vec![T::one(); count])?)
        }
    };
    Ok(SumOfProjReport {
        excess,
        deficiency,
        gap: snapped.unwrap_or(gap),
        is_sum,
        witness,
    })
}

/// `Σξ = tr(A)` within `1e-10`.
pub fn trace_admissibility_check<T: Real>(xi: &WeightSeq<T>, a: &HermOp<T>) -> Result<bool> {
    let total = xi.as_finite()?.iter().fold(T::zero(), |s, x| s + *x);
    Ok((total - a.trace()).abs() <= T::tol(1e-10))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProjDiagReport {
    /// `ξ` is the diagonal of some projection of rank `p_rank`.
    pub adm_p: bool,
    /// `1 − ξ` is the diagonal of some projection of rank `codim`.
    pub adm_complement: bool,
    /// Both, so `diag ξ` lies in the expectation of the unitary orbit.
    pub unitary_orbit: bool,
}

fn matches_card<S: Scalar>(sum: &ExtReal<S>, c: Card) -> bool {
    match (sum, c) {
        (ExtReal::Infinite, Card::Infinite) => true,
        (ExtReal::Finite(s), Card::Finite(n)) => (s.clone() - S::from_usize(n).unwrap()).magnitude() <= S::tol(1e-10),
        _ => false,
    }
}

/// Diagonal test against a projection with the given rank and corank.
pub fn projection_diag_check<S: Scalar>(xi: &WeightSeq<S>, p_rank: Card, codim: Card) -> Result<ProjDiagReport> {
    let report = kadison_check(xi, &S::ratio(1, 2))?;
    if !report.satisfied {
        return Err(Error::Kadison {
            a: report.a.to_f64(),
            b: report.b.to_f64(),
        });
    }
    let adm_p = matches_card(&xi.total(), p_rank);
    let adm_complement = matches_card(&xi.complement()?.total(), codim);
    Ok(ProjDiagReport {
        adm_p,
        adm_complement,
        unitary_orbit: adm_p && adm_complement,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IneqReport<T> {
    pub holds: bool,
    /// `tr((A − I)₊)`
    pub lhs: T,
    /// `Σ (w_j − 1)` over weights above one.
    pub rhs: T,
}

/// For `Σ w_j v_j⊗v_j <= A`, checks `tr((A − I)₊) >= Σ (w_j − 1)₊`.
pub fn ineq_check<T: Real>(a: &HermOp<T>, d: &RankOneDecomp<T>) -> Result<IneqReport<T>> {
    if d.dim() > a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: d.dim(),
        });
    }
    let b = frame_operator(&d.embed(a.dim()));
    let diff = HermOp::new(a.matrix() - b.matrix())?;
    let eig = a.eig();
    let scale = eig.values.first().copied().unwrap_or_else(T::zero).max(T::one());
    if let Some(&min) = diff.eig().values.last() {
        if min < -T::tol(1e-9) * scale {
            return Err(Error::Precondition(format!(
                "frame operator exceeds A (smallest eigenvalue of the difference {min})"
            )));
        }
    }
    let lhs = eig.values.iter().filter(|&&l| l > T::one()).fold(T::zero(), |s, &l| s + l - T::one());
    let rhs = d
        .weights()
        .into_iter()
        .filter(|&w| w > T::one())
        .fold(T::zero(), |s, w| s + w - T::one());
    Ok(IneqReport {
        holds: lhs >= rhs - T::tol(1e-9),
        lhs,
        rhs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum AdmMode<T> {
    /// Decomposition of `A + B`, interleaving the two term lists.
    DirectSum,
    /// `t·d1 + (1 − t)·d2` for two decompositions of the same operator.
    ConvexMix(T),
    /// Splits term `j` into weights `η_j` and `w_j − η_j` on the same vector.
    Split(Vec<T>),
}

fn interleave<T: Real>(dim: usize, a: Vec<(T, UnitVec<T>)>, b: Vec<(T, UnitVec<T>)>) -> Result<RankOneDecomp<T>> {
    let mut out = RankOneDecomp::new(dim);
    let (mut ia, mut ib) = (a.into_iter(), b.into_iter());
    loop {
        let (x, y) = (ia.next(), ib.next());
        if x.is_none() && y.is_none() {
            return Ok(out);
        }
        for (w, v) in x.into_iter().chain(y) {
            out.push(w, v)?;
        }
    }
}

pub fn adm_transform<T: Real>(
    d1: &RankOneDecomp<T>,
    d2: Option<&RankOneDecomp<T>>,
    mode: &AdmMode<T>,
) -> Result<RankOneDecomp<T>> {
    let need_second = || d2.ok_or_else(|| Error::Precondition("this mode needs a second decomposition".into()));
    match mode {
        AdmMode::DirectSum => {
            let d2 = need_second()?;
            let dim = d1.dim().max(d2.dim());
            interleave(dim, d1.embed(dim).into_terms(), d2.embed(dim).into_terms())
        }
        AdmMode::ConvexMix(t) => {
            let d2 = need_second()?;
            if !(*t >= T::zero() && *t <= T::one()) {
                return Err(Error::Precondition(format!("mixing parameter {t} is outside [0, 1]")));
            }
            let dim = d1.dim().max(d2.dim());
            let (a, b) = (d1.embed(dim), d2.embed(dim));
            let gap = frame_operator(&a).distance(&frame_operator(&b))?;
            if gap > T::tol(1e-10) {
                return Err(Error::Precondition(format!("decompositions of different operators (distance {gap})")));
            }
            let scale = |d: RankOneDecomp<T>, s: T| d.into_terms().into_iter().map(|(w, v)| (w * s, v)).collect();
            interleave(dim, scale(a, *t), scale(b, T::one() - *t))
        }
        AdmMode::Split(eta) => {
            if eta.len() > d1.len() {
                return Err(Error::DimensionMismatch {
                    expected: d1.len(),
                    found: eta.len(),
                });
            }
            let mut out = RankOneDecomp::new(d1.dim());
            for (j, (w, v)) in d1.terms().iter().enumerate() {
                match eta.get(j) {
                    Some(&e) => {
                        if e < T::zero() || e > *w {
                            return Err(Error::Precondition(format!("split weight {e} is outside [0, {w}]")));
                        }
                        out.push(e, v.clone())?;
                        out.push(*w - e, v.clone())?;
                    }
                    None => out.push(*w, v.clone())?,
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, i: usize) -> UnitVec<f64> {
        UnitVec::basis(dim, i)
    }

    #[test]
    fn sums_of_projections_examples() {
        let r = sum_of_projections_check(&HermOp::from_diag(&[1.5f64, 0.5]), true).unwrap();
        assert!((r.excess - 0.5).abs() < 1e-12 && (r.deficiency - 0.5).abs() < 1e-12);
        assert!(r.is_sum && r.gap == 0.0);
        let w = r.witness.unwrap();
        assert_eq!(w.weights(), vec![1.0, 1.0]);
        assert!(frame_operator(&w).distance(&HermOp::from_diag(&[1.5, 0.5])).unwrap() < 1e-8);

        let r = sum_of_projections_check(&HermOp::from_diag(&[0.5f64]), true).unwrap();
        assert!(!r.is_sum && (r.gap + 0.5).abs() < 1e-12 && r.witness.is_none());

        let r = sum_of_projections_check(&HermOp::<f64>::identity(2), true).unwrap();
        assert!(r.is_sum && r.gap == 0.0);
        assert_eq!(r.witness.unwrap().len(), 2);

        let r = sum_of_projections_check(&HermOp::<f64>::identity(4).scale(2.0), true).unwrap();
        assert_eq!(r.witness.unwrap().len(), 8);

        assert!(matches!(
            sum_of_projections_check(&HermOp::from_diag(&[1.0, -0.5]), false),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn trace_examples() {
        let fin = |v: &[f64]| WeightSeq::finite(v.to_vec()).unwrap();
        assert!(trace_admissibility_check(&fin(&[1.0, 1.0]), &HermOp::identity(2)).unwrap());
        assert!(!trace_admissibility_check(&fin(&[0.5]), &HermOp::identity(2)).unwrap());
        assert!(trace_admissibility_check(&fin(&[0.7, 0.3]), &HermOp::from_diag(&[1.0])).unwrap());
    }

    #[test]
    fn projection_diag_examples() {
        let fin = |v: &[f64]| WeightSeq::finite(v.to_vec()).unwrap();
        let r = projection_diag_check(&fin(&[0.5; 4]), Card::Finite(2), Card::Finite(2)).unwrap();
        assert_eq!((r.adm_p, r.adm_complement, r.unitary_orbit), (true, true, true));
        let r = projection_diag_check(&fin(&[1.0, 1.0]), Card::Finite(1), Card::Finite(0)).unwrap();
        assert!(!r.adm_p);
        let r = projection_diag_check(&fin(&[0.5, 0.5]), Card::Finite(1), Card::Finite(3)).unwrap();
        assert_eq!((r.adm_p, r.adm_complement, r.unitary_orbit), (true, false, false));
        let r = projection_diag_check(&WeightSeq::constant_tail(vec![], 0.5).unwrap(), Card::Infinite, Card::Infinite)
            .unwrap();
        assert!(r.unitary_orbit);
        assert!(matches!(
            projection_diag_check(&fin(&[0.3]), Card::Finite(0), Card::Finite(1)),
            Err(Error::Kadison { .. })
        ));
    }

    #[test]
    fn ineq_examples() {
        let d = RankOneDecomp::from_terms(1, vec![(2.0, e(1, 0))]).unwrap();
        let r = ineq_check(&HermOp::from_diag(&[2.0]), &d).unwrap();
        assert!(r.holds && (r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12);

        let d = RankOneDecomp::from_terms(2, vec![(1.0, e(2, 0))]).unwrap();
        let r = ineq_check(&HermOp::identity(2), &d).unwrap();
        assert!(r.holds && r.lhs.abs() < 1e-12 && r.rhs == 0.0);

        let d = RankOneDecomp::from_terms(2, vec![(1.4, e(2, 0))]).unwrap();
        let r = ineq_check(&HermOp::from_diag(&[1.5, 1.5]), &d).unwrap();
        assert!(r.holds && (r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 0.4).abs() < 1e-12);

        let d = RankOneDecomp::from_terms(1, vec![(2.0, e(1, 0))]).unwrap();
        assert!(ineq_check(&HermOp::from_diag(&[1.0]), &d).is_err());
    }

    #[test]
    fn transforms() {
        let a = RankOneDecomp::from_terms(2, vec![(1.0, e(2, 0))]).unwrap();
        let b = RankOneDecomp::from_terms(2, vec![(1.0, e(2, 1))]).unwrap();
        let s = adm_transform(&a, Some(&b), &AdmMode::DirectSum).unwrap();
        assert_eq!(s.len(), 2);
        assert!(frame_operator(&s).distance(&HermOp::identity(2)).unwrap() < 1e-15);

        let m = adm_transform(&a, Some(&a), &AdmMode::ConvexMix(0.5)).unwrap();
        assert_eq!(m.weights(), vec![0.5, 0.5]);
        assert!(adm_transform(&a, Some(&b), &AdmMode::ConvexMix(0.5)).is_err());
        assert!(adm_transform(&a, None, &AdmMode::DirectSum).is_err());

        let sp = adm_transform(&a, None, &AdmMode::Split(vec![0.3])).unwrap();
        assert!((sp.weights()[0] - 0.3).abs() < 1e-15 && (sp.weights()[1] - 0.7).abs() < 1e-15);
        assert!(adm_transform(&a, None, &AdmMode::Split(vec![1.3])).is_err());
    }
}
