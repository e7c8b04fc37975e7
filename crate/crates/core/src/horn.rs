//! The 2×2 mixing lemma and the Horn chain built from it.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::operators::{cx, CMatrix, HermOp, RankOneDecomp, UnitVec};
use crate::scalar::Real;
use crate::seqkit::majorizes_slices;

/// Coefficients of the quadratic `(1+h) z² − (2+αh) z_o z + z_o² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadratic<T> {
    pub z_minus: T,
    pub h: T,
    pub alpha: T,
}

/// `ξ1 w⊗w + ξ2 w'⊗w' = η1 u⊗u + η2 u'⊗u'` with `w = σu + τu'` and
/// `w' = σ'u + τ'u'`.
#[derive(Clone, Debug)]
pub struct MixResult<T: Real> {
    pub w: UnitVec<T>,
    pub w_prime: UnitVec<T>,
    pub sigma: Complex<T>,
    pub tau: Complex<T>,
    pub sigma_prime: Complex<T>,
    pub tau_prime: Complex<T>,
    /// `η1(η1 − ξ2) / (ξ1(η1 − η2))`, the bound on `|σ|²`.
    pub z_o: T,
    /// `|(u, u')|`
    pub gamma: T,
    /// Present when the general branch ran.
    pub quadratic: Option<Quadratic<T>>,
    /// `|‖σu+τu'‖² − 1|` and `|‖σ'u+τ'u'‖² − 1|` before normalization.
    pub norm_defects: (T, T),
}

fn combo<T: Real>(a: Complex<T>, u: &UnitVec<T>, b: Complex<T>, v: &UnitVec<T>) -> nalgebra::DVector<Complex<T>> {
    u.coords() * a + v.coords() * b
}

fn finish<T: Real>(
    u: &UnitVec<T>,
    u_prime: &UnitVec<T>,
    coeffs: [Complex<T>; 4],
    z_o: T,
    gamma: T,
    quadratic: Option<Quadratic<T>>,
) -> Result<MixResult<T>> {
    let [sigma, tau, sigma_prime, tau_prime] = coeffs;
    let w = combo(sigma, u, tau, u_prime);
    let wp = combo(sigma_prime, u, tau_prime, u_prime);
    let norm_defects = ((w.norm_squared() - T::one()).abs(), (wp.norm_squared() - T::one()).abs());
    Ok(MixResult {
        w: UnitVec::normalized(w)?,
        w_prime: UnitVec::normalized(wp)?,
        sigma,
        tau,
        sigma_prime,
        tau_prime,
        z_o,
        gamma,
        quadratic,
        norm_defects,
    })
}

/// Rewrites `η1 u⊗u + η2 u'⊗u'` as `ξ1 w⊗w + ξ2 w'⊗w'` for `(ξ1, ξ2) ≺ (η1, η2)`.
pub fn mix_two<T: Real>(
    eta1: T,
    eta2: T,
    u: &UnitVec<T>,
    u_prime: &UnitVec<T>,
    xi1: T,
    xi2: T,
) -> Result<MixResult<T>> {
    if u.dim() != u_prime.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: u_prime.dim(),
        });
    }
    for (index, x) in [eta1, eta2, xi1, xi2].into_iter().enumerate() {
        if x < T::zero() {
            return Err(Error::EntryOutOfRange {
                index,
                value: x.to_f64_lossy(),
                range: "[0, inf)",
            });
        }
    }
    let scale = T::one().max(eta1).max(eta2);
    let tol = T::tol(1e-12) * scale;
    if eta1 == eta2 {
        return Err(Error::EqualEta);
    }
    let verdict = majorizes_slices(&[xi1, xi2], &[eta1, eta2], &tol);
    if !verdict.holds {
        return Err(Error::Majorization {
            failing_index: verdict.failing_index,
            sum_gap: verdict.sum_gap.to_f64_lossy(),
        });
    }
    if xi1 <= T::zero() {
        return Err(Error::ZeroTarget);
    }

    let z_o = (eta1 * (eta1 - xi2) / (xi1 * (eta1 - eta2))).max(T::zero());
    let g = u.inner(u_prime);
    let gamma = g.norm_sqr().sqrt().min(T::one());
    let (zero, one) = (cx(T::zero()), cx(T::one()));

    if (xi1 - eta1).abs() <= tol {
        return finish(u, u_prime, [one, zero, zero, one], z_o, gamma, None);
    }
    if (xi2 - eta1).abs() <= tol {
        return finish(u, u_prime, [zero, one, one, zero], z_o, gamma, None);
    }

    // rotate u' so that (u, c u') = γ >= 0
    let c = if gamma > T::zero() { g / cx(g.norm_sqr().sqrt()) } else { one };

    if eta1 < eta2 && gamma > T::zero() {
        // With real coefficients the norm equation forces στ < 0 and |σ|²+|τ|² > 1.
        // A quarter-turn between σ and τ kills the cross term: |σ|² = z_o, |τ|² = 1 − z_o,
        // and diag(η) − ξ1 c c* stays rank one for every γ.
        let z = z_o.min(T::one());
        let sigma = cx(z.sqrt());
        let tau = Complex::new(T::zero(), (T::one() - z).sqrt());
        let k11 = eta1 - xi1 * z;
        let k22 = eta2 - xi1 * (T::one() - z);
        let k21 = -(tau * sigma.conj()) * cx(xi1);
        let (sp, tp) = if k11 >= k22 {
            let sp = (k11.max(T::zero()) / xi2).sqrt();
            (cx(sp), k21 / cx(xi2 * sp))
        } else {
            let tp = (k22.max(T::zero()) / xi2).sqrt();
            (k21.conj() / cx(xi2 * tp), cx(tp))
        };
        return finish(u, u_prime, [sigma, c * tau, sp, c * tp], z_o, gamma, None);
    }

    let d = eta1 - eta2;
    let h = T::lit(4.0) * eta1 * eta2 * gamma * gamma / (d * d);
    let alpha = d / (eta1 - xi2);
    let two = T::lit(2.0);
    let disc = (T::lit(4.0) * (alpha - T::one()) * h + alpha * alpha * h * h).max(T::zero());
    let z_minus = (two * z_o / (two + alpha * h + disc.sqrt())).min(z_o);
    let sigma = z_minus.sqrt();
    // the norm equation forces στ to have the sign of η1 − η2
    let sign = if eta1 > eta2 { T::one() } else { -T::one() };
    let tau = if eta1 > T::tol(1e-8) * scale {
        sign * (eta2 / xi1 - eta2 / eta1 * z_minus).max(T::zero()).sqrt()
    } else {
        // second equation is ill-conditioned here; take the matching root of the ellipse
        -gamma * sigma + sign * (T::one() - sigma * sigma + gamma * gamma * sigma * sigma).max(T::zero()).sqrt()
    };
    let sp = ((eta1 - xi1 * sigma * sigma) / xi2).max(T::zero()).sqrt();
    let tp = -sign * ((eta2 - xi1 * tau * tau) / xi2).max(T::zero()).sqrt();

    finish(
        u,
        u_prime,
        [cx(sigma), c * cx(tau), cx(sp), c * cx(tp)],
        z_o,
        gamma,
        Some(Quadratic { z_minus, h, alpha }),
    )
}

/// Result of a Horn chain, aligned with the target sequence.
#[derive(Clone, Debug)]
pub struct HornTrace<T: Real> {
    /// `vectors[j]` carries weight `ξ_j`; `None` for zero targets.
    pub vectors: Vec<Option<UnitVec<T>>>,
    /// Total pool weight plus emitted weight after each step.
    pub totals: Vec<T>,
    pub mixes: usize,
}

struct PoolEntry<T: Real> {
    weight: T,
    v: UnitVec<T>,
}

/// Realizes `ξ ≺ η` as rank-one projections: `Σ ξ_j P_j = Σ η_j E_j`.
/// Zero targets are dropped from the output.
pub fn horn_decompose<T: Real>(eta: &[T], e: &[UnitVec<T>], xi: &[T]) -> Result<RankOneDecomp<T>> {
    let trace = horn_decompose_traced(eta, e, xi)?;
    let dim = e.iter().map(UnitVec::dim).max().unwrap_or(0);
    let mut d = RankOneDecomp::new(dim);
    for (w, v) in xi.iter().zip(trace.vectors) {
        if let Some(v) = v {
            d.push(*w, v)?;
        }
    }
    Ok(d)
}

/// [`horn_decompose`] with the per-target alignment and step totals.
pub fn horn_decompose_traced<T: Real>(eta: &[T], e: &[UnitVec<T>], xi: &[T]) -> Result<HornTrace<T>> {
    if eta.len() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: eta.len(),
            found: e.len(),
        });
    }
    for (index, x) in eta.iter().chain(xi).enumerate() {
        if *x < T::zero() {
            return Err(Error::EntryOutOfRange {
                index,
                value: x.to_f64_lossy(),
                range: "[0, inf)",
            });
        }
    }
    let dim = e.iter().map(UnitVec::dim).max().unwrap_or(0);
    let scale = eta.iter().fold(T::one(), |m, x| m.max(*x));
    let n = T::from_usize(eta.len().max(xi.len()).max(1)).unwrap();
    let tol = T::tol(1e-12) * scale;
    let verdict = majorizes_slices(xi, eta, &(T::tol(1e-10) * scale * n));
    if !verdict.holds {
        return Err(Error::Majorization {
            failing_index: verdict.failing_index,
            sum_gap: verdict.sum_gap.to_f64_lossy(),
        });
    }

    let mut pool: Vec<PoolEntry<T>> = eta
        .iter()
        .zip(e)
        .filter(|(w, _)| **w > T::zero())
        .map(|(w, v)| PoolEntry {
            weight: *w,
            v: v.embed(dim),
        })
        .collect();

    let mut order: Vec<usize> = (0..xi.len()).filter(|&j| xi[j] > T::zero()).collect();
    order.sort_by(|&a, &b| xi[b].partial_cmp(&xi[a]).unwrap());

    let mut vectors: Vec<Option<UnitVec<T>>> = vec![None; xi.len()];
    let mut totals = Vec::with_capacity(order.len());
    let mut emitted = T::zero();
    let mut mixes = 0;
    for (step, &j) in order.iter().enumerate() {
        let t = xi[j];
        let fail = || Error::Majorization {
            failing_index: Some(step + 1),
            sum_gap: (emitted - eta.iter().fold(T::zero(), |s, x| s + *x)).to_f64_lossy(),
        };
        if let Some(i) = pool.iter().position(|p| (p.weight - t).abs() <= tol) {
            vectors[j] = Some(pool.remove(i).v);
        } else {
            let a = pool
                .iter()
                .enumerate()
                .filter(|(_, p)| p.weight >= t)
                .min_by(|x, y| x.1.weight.partial_cmp(&y.1.weight).unwrap().then(x.0.cmp(&y.0)))
                .map(|(i, _)| i)
                .ok_or_else(fail)?;
            let b = pool
                .iter()
                .enumerate()
                .filter(|(_, p)| p.weight < t && p.weight > tol)
                .max_by(|x, y| x.1.weight.partial_cmp(&y.1.weight).unwrap().then(y.0.cmp(&x.0)))
                .map(|(i, _)| i);
            match b {
                None => {
                    let pa = pool.remove(a);
                    vectors[j] = Some(pa.v.clone());
                    let rest = pa.weight - t;
                    if rest > tol {
                        pool.push(PoolEntry { weight: rest, v: pa.v });
                    }
                }
                Some(b) => {
                    let (wa, wb) = (pool[a].weight, pool[b].weight);
                    let m = mix_two(wa, wb, &pool[a].v, &pool[b].v, t, wa + wb - t)?;
                    mixes += 1;
                    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
                    pool.remove(hi);
                    pool.remove(lo);
                    vectors[j] = Some(m.w);
                    let rest = wa + wb - t;
                    if rest > tol {
                        pool.push(PoolEntry {
                            weight: rest,
                            v: m.w_prime,
                        });
                    }
                }
            }
        }
        emitted += t;
        totals.push(emitted + pool.iter().fold(T::zero(), |s, p| s + p.weight));
    }
    let left = pool.iter().fold(T::zero(), |s, p| s + p.weight);
    if left > T::tol(1e-10) * scale * n {
        return Err(Error::Majorization {
            failing_index: None,
            sum_gap: (-left).to_f64_lossy(),
        });
    }
    Ok(HornTrace { vectors, totals, mixes })
}

/// A Hermitian matrix with eigenvalues `λ` and diagonal `ξ`, for `ξ ≺ λ`.
pub fn schur_horn_matrix<T: Real>(lambda: &[T], xi: &[T]) -> Result<HermOp<T>> {
    let n = lambda.len().max(xi.len());
    let mut lam = lambda.to_vec();
    let mut x = xi.to_vec();
    lam.resize(n, T::zero());
    x.resize(n, T::zero());
    let basis: Vec<UnitVec<T>> = (0..n).map(|i| UnitVec::basis(n, i)).collect();
    let trace = horn_decompose_traced(&lam, &basis, &x)?;
    // Gram matrix of √ξ_j v_j; zero targets give zero rows
    let g = CMatrix::from_fn(n, n, |i, j| match (&trace.vectors[i], &trace.vectors[j]) {
        (Some(vi), Some(vj)) => vj.inner(vi) * cx((x[i] * x[j]).sqrt()),
        _ => cx(T::zero()),
    });
    Ok(HermOp::from_hermitian_unchecked(g))
}
