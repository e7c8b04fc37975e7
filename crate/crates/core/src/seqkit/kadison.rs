use crate::error::{Error, Result};
use crate::scalar::{near_integer, Scalar};

use super::{ExtReal, Tail, WeightSeq};

#[derive(Clone, Debug, PartialEq)]
pub struct KadisonReport<S> {
    /// `Σ{ξ_i : ξ_i <= α}`
    pub a: ExtReal<S>,
    /// `Σ{1 − ξ_i : ξ_i > α}`
    pub b: ExtReal<S>,
    pub alpha: S,
    pub satisfied: bool,
    /// `a − b` when both sums are finite and the difference is an integer.
    pub integer_gap: Option<i64>,
}

/// Splits `ξ` at `α` and tests whether `a + b = ∞` or `a − b ∈ ℤ`.
pub fn kadison_check<S: Scalar>(xi: &WeightSeq<S>, alpha: &S) -> Result<KadisonReport<S>> {
    if !(S::zero() < *alpha && *alpha < S::one()) {
        return Err(Error::Precondition(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    xi.check_unit_interval()?;
    let (cycles, sides) = xi.settle(alpha)?;
    let unrolled = xi.unrolled(cycles);

    let mut a = S::zero();
    let mut b = S::zero();
    for v in unrolled.head() {
        if v <= alpha {
            a = a + v.clone();
        } else {
            b = b + (S::one() - v.clone());
        }
    }
    let mut a = ExtReal::Finite(a);
    let mut b = ExtReal::Finite(b);
    if let Tail::Cyclic(comps) = unrolled.tail() {
        for (c, below) in comps.iter().zip(sides) {
            if below {
                a = a.add(&c.total());
            } else {
                b = b.add(&c.complement().total());
            }
        }
    }

    let integer_gap = match (&a, &b) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => {
            near_integer(&(x.clone() - y.clone()), &S::tol(1e-9)).and_then(|n| n.to_i64())
        }
        _ => None,
    };
    let satisfied = a.is_infinite() || b.is_infinite() || integer_gap.is_some();
    Ok(KadisonReport {
        a,
        b,
        alpha: alpha.clone(),
        satisfied,
        integer_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn not_kadison_example() {
        let xi = WeightSeq::constant_tail(vec![0.3], 1.0).unwrap();
        let r = kadison_check(&xi, &0.5).unwrap();
        assert_eq!(r.a, ExtReal::Finite(0.3));
        assert_eq!(r.b, ExtReal::Finite(0.0));
        assert!(!r.satisfied);
    }

    #[test]
    fn divergent_lower_part() {
        let xi = WeightSeq::constant_tail(vec![], 0.5).unwrap();
        let r = kadison_check(&xi, &0.5).unwrap();
        assert!(r.a.is_infinite());
        assert!(r.satisfied);
    }

    #[test]
    fn finite_exact() {
        let q = |s: &str| BigRational::parse_decimal(s).unwrap();
        let xi = WeightSeq::finite(vec![q("0.3"), q("0.9"), q("0.8")]).unwrap();
        let r = kadison_check(&xi, &q("0.5")).unwrap();
        assert_eq!(r.a, ExtReal::Finite(q("0.3")));
        assert_eq!(r.b, ExtReal::Finite(q("0.3")));
        assert_eq!(r.integer_gap, Some(0));
        assert!(r.satisfied);
    }

    #[test]
    fn geometric_complement_tail() {
        // 1 − 2^{-(j+1)}, j >= 0: 0.5 sits in a, the rest sum to 1/2 in b
        let xi = WeightSeq::cyclic_tail(
            vec![],
            vec![crate::seqkit::Component::new(1.0, -0.5, 0.5).unwrap()],
        )
        .unwrap();
        let r = kadison_check(&xi, &0.5).unwrap();
        assert_eq!(r.a, ExtReal::Finite(0.5));
        assert_eq!(r.b, ExtReal::Finite(0.5));
        assert_eq!(r.integer_gap, Some(0));
    }

    #[test]
    fn rejects_bad_alpha_and_entries() {
        let xi = WeightSeq::finite(vec![0.5]).unwrap();
        assert!(kadison_check(&xi, &1.0).is_err());
        let bad = WeightSeq::finite(vec![1.5]).unwrap();
        assert!(kadison_check(&bad, &0.5).is_err());
    }
}
