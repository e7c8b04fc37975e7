//! `B = (1 − Σλ) u_0⊗u_0 + Σ_{j>=1} u_j⊗u_j` with `Σλ < 1`, rewritten one
//! mix at a time as `Σ_j (1 − λ_j) v_j⊗v_j`.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::horn::mix_two;
use crate::operators::{cx, UnitVec};
use crate::scalar::Real;
use crate::seqkit::WeightSeq;

use super::stream::StreamView;

#[derive(Clone, Debug)]
pub struct KeyStage<T: Real> {
    pub lambda_index: usize,
    /// `v_s`, carrying weight `1 − λ_s`.
    pub emitted: UnitVec<T>,
    pub emitted_weight: T,
    /// The carried vector after this stage and its weight `1 − T(s+1)`.
    pub w: UnitVec<T>,
    pub w_weight: T,
    pub sigma: Complex<T>,
    pub tau: Complex<T>,
    /// `(1 − T(s)) T(s+1) / ((1 − T(s+1)) T(s))`
    pub sigma_bound: T,
    /// Coefficients of `w` against `u_0, ..., u_{s+1}`.
    pub x: Vec<Complex<T>>,
    /// `(1 − T(c)) T(s+1) / (T(c) (1 − T(s+1)))` per coordinate.
    pub x_bounds: Vec<T>,
    pub bounds_ok: bool,
}

impl<T: Real> KeyStage<T> {
    pub fn x_norm(&self) -> T {
        self.x.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct KeyCaseRun<T: Real> {
    pub stages: Vec<KeyStage<T>>,
    /// `T(s) = Σ_{j>=s} λ_j` for `s = 0..=stages`.
    pub tails: Vec<T>,
}

/// Runs up to `stages` mixes of the key case against the vectors of `u`.
/// Stops early when a finite λ runs out.
pub fn keycase_run<T: Real>(lambda: &WeightSeq<T>, u: &StreamView<'_, T>, stages: usize) -> Result<KeyCaseRun<T>> {
    let total = *lambda
        .total()
        .finite()
        .ok_or_else(|| Error::Precondition("key case needs Σλ < 1".into()))?;
    if total >= T::one() {
        return Err(Error::Precondition(format!("key case needs Σλ < 1, got {total}")));
    }
    let count = match lambda.len() {
        crate::seqkit::Card::Finite(n) => n.min(stages),
        crate::seqkit::Card::Infinite => stages,
    };
    let tail = |s: usize| *lambda.tail_sum(s).finite().expect("summable");
    let eps = T::tol(1e-12);
    let slack = T::tol(1e-9);

    let mut tails = vec![tail(0)];
    let mut w = u.get(0)?;
    let mut x = vec![cx(T::one())];
    let mut out = Vec::with_capacity(count);
    for s in 0..count {
        let (t_s, t_next) = (tails[s], tail(s + 1));
        tails.push(t_next);
        let lam = lambda.get(s);
        let next = u.get(s + 1)?;
        let dim = w.dim().max(next.dim());
        let (w0, next) = (w.embed(dim), next.embed(dim));
        let (sigma, tau, emitted, w_new, sigma_bound) = if t_s <= eps {
            // nothing left to spread: w keeps full weight and is emitted as is
            (cx(T::zero()), cx(T::one()), w0, next, T::zero())
        } else {
            let m = mix_two(T::one() - t_s, T::one(), &w0, &next, T::one() - t_next, T::one() - lam)?;
            let bound = (T::one() - t_s) * t_next / ((T::one() - t_next) * t_s);
            (m.sigma, m.tau, m.w_prime, m.w, bound)
        };
        for c in x.iter_mut() {
            *c *= sigma;
        }
        x.push(tau);

        let x_bounds: Vec<T> = (0..x.len())
            .map(|c| {
                let tc = tails[c];
                if c + 1 == x.len() || tc <= eps {
                    T::one()
                } else {
                    (T::one() - tc) * t_next / (tc * (T::one() - t_next))
                }
            })
            .collect();
        let bounds_ok = sigma.norm_sqr() <= sigma_bound + slack || t_s <= eps;
        let bounds_ok = bounds_ok && x.iter().zip(&x_bounds).all(|(z, b)| z.norm_sqr() <= *b + slack);

        out.push(KeyStage {
            lambda_index: s,
            emitted,
            emitted_weight: T::one() - lam,
            w: w_new.clone(),
            w_weight: T::one() - t_next,
            sigma,
            tau,
            sigma_bound,
            x: x.clone(),
            x_bounds,
            bounds_ok,
        });
        w = w_new;
    }
    Ok(KeyCaseRun { stages: out, tails })
}
