//! Decomposes `A = Σ_j u_j⊗u_j` as `Σ_j ξ_j v_j⊗v_j` for a sequence `ξ`
//! satisfying the Kadison condition, one certified stage at a time.

pub mod keycase;
pub mod plan;
pub mod stream;

use nalgebra::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::horn::horn_decompose_traced;
use crate::operators::{frame_operator, CMatrix, HermOp, RankOneDecomp, UnitVec};
use crate::scalar::{near_integer, Real, Scalar};
use crate::seqkit::{kadison_check, split_mu_lambda, strip01, Card, ExtReal, SplitSeq, Stripped, WeightSeq};

pub use keycase::{keycase_run, KeyCaseRun, KeyStage};
pub use plan::{
    block_targets, first_fit_bins, plan_both_summable, plan_finite_rank, plan_lambda_diverges, plan_m_finite_head,
    plan_mu_diverges, BlockEntry, BlockPlan, Src,
};
pub use stream::{ProjectionStream, StreamView};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseKind {
    FiniteRank,
    MuDiverges,
    LambdaDiverges,
    BothSummable,
    MFiniteNInf,
}

impl CaseKind {
    pub fn name(self) -> &'static str {
        match self {
            CaseKind::FiniteRank => "FINITE_RANK",
            CaseKind::MuDiverges => "MU_DIVERGES",
            CaseKind::LambdaDiverges => "LAMBDA_DIVERGES",
            CaseKind::BothSummable => "BOTH_SUMMABLE",
            CaseKind::MFiniteNInf => "M_FINITE_N_INF",
        }
    }
}

/// Case of `ξ` after stripping zeros and ones. `k = Σλ − Σμ` when both are finite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CaseTag {
    pub kind: CaseKind,
    pub k: Option<i64>,
    pub m: Card,
    pub n: Card,
}

struct Analysis<S> {
    stripped: Stripped<S>,
    split: SplitSeq<S>,
    tag: CaseTag,
}

fn analyze<S: Scalar>(xi: &WeightSeq<S>) -> Result<Analysis<S>> {
    let report = kadison_check(xi, &S::ratio(1, 2))?;
    if !report.satisfied {
        return Err(Error::Kadison {
            a: report.a.to_f64(),
            b: report.b.to_f64(),
        });
    }
    let stripped = strip01(xi)?;
    let split = split_mu_lambda(&stripped.core)?;
    let (m, n) = (split.m(), split.n());
    let (sm, sl) = (split.mu.total(), split.lambda.total());
    let k = match (sm.finite(), sl.finite()) {
        (Some(a), Some(b)) => {
            let d = b.clone() - a.clone();
            let k = near_integer(&d, &S::tol(1e-9))
                .ok_or_else(|| Error::Precondition(format!("Σλ − Σμ = {d} is not an integer")))?;
            Some(k.to_f64_lossy().round() as i64)
        }
        _ => None,
    };
    let kind = if !stripped.core.total().is_infinite() {
        CaseKind::FiniteRank
    } else if sm.is_infinite() {
        CaseKind::MuDiverges
    } else if sl.is_infinite() {
        CaseKind::LambdaDiverges
    } else if m.is_infinite() {
        CaseKind::BothSummable
    } else {
        CaseKind::MFiniteNInf
    };
    Ok(Analysis {
        stripped,
        split,
        tag: CaseTag { kind, k, m, n },
    })
}

/// Classifies `ξ` into one of the five cases. Fails if Kadison's condition does not hold.
pub fn classify_case<S: Scalar>(xi: &WeightSeq<S>) -> Result<CaseTag> {
    Ok(analyze(xi)?.tag)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarpenterConfig {
    /// Number of stages to realize for infinite sequences.
    pub stages: usize,
    /// Maximum number of single-entry block extensions per stage.
    pub extend_limit: usize,
    /// Largest acceptable stage residual (Frobenius).
    pub tol: f64,
}

impl Default for CarpenterConfig {
    fn default() -> Self {
        CarpenterConfig {
            stages: 10,
            extend_limit: 10_000,
            tol: 1e-8,
        }
    }
}

/// Per-stage check of `Σ emitted + carries = Σ_{j<c} E_j + r E_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct StageCertificate<T> {
    pub stage: usize,
    pub consumed_through: usize,
    pub r_in: T,
    pub r_out: T,
    pub eta: Vec<T>,
    pub block: Vec<T>,
    pub extensions: usize,
    /// `‖Σ block terms − Σ η_i E_i‖_F`.
    pub block_residual: T,
    /// Cumulative identity residual.
    pub residual: T,
    /// Total weight still owed to later stages.
    pub carry: T,
    pub remainder_ok: bool,
    /// Number of core terms emitted so far.
    pub emitted: usize,
}

#[derive(Clone, Debug)]
pub struct CarpenterTerm<T: Real> {
    pub weight: T,
    pub vector: UnitVec<T>,
    /// Index into `ξ`.
    pub position: usize,
}

#[derive(Clone, Debug)]
pub struct CarpenterOutput<T: Real> {
    pub case: CaseTag,
    pub terms: Vec<CarpenterTerm<T>>,
    pub plans: Vec<BlockPlan<T>>,
    pub certificates: Vec<StageCertificate<T>>,
    pub keycase: Option<KeyCaseRun<T>>,
    /// The operator the emitted prefix decomposes.
    pub target: HermOp<T>,
    /// `‖Σ terms − target‖_F`.
    pub residual: T,
}

impl<T: Real> CarpenterOutput<T> {
    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    pub fn decomp(&self) -> RankOneDecomp<T> {
        let mut d = RankOneDecomp::new(self.dim());
        for t in &self.terms {
            d.push(t.weight, t.vector.clone()).expect("terms fit the target dimension");
        }
        d
    }

    pub fn positions(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.position).collect()
    }

    /// Largest residual over all stage certificates and the final check.
    pub fn max_residual(&self) -> T {
        self.certificates.iter().fold(self.residual, |m, c| m.max(c.residual))
    }
}

struct Acc<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> Acc<T> {
    fn new() -> Self {
        Acc { m: CMatrix::zeros(0, 0) }
    }

    fn grow(&mut self, d: usize) {
        if d > self.m.nrows() {
            let old = std::mem::replace(&mut self.m, CMatrix::zeros(0, 0));
            self.m = old.resize(d, d, Complex::zero());
        }
    }

    fn add(&mut self, w: T, v: &UnitVec<T>) {
        let d = v.dim();
        self.grow(d);
        let p = v.projection() * Complex::new(w, T::zero());
        let mut view = self.m.view_mut((0, 0), (d, d));
        view += p;
    }

    fn distance(&self, other: &Acc<T>) -> T {
        let d = self.m.nrows().max(other.m.nrows());
        let a = self.m.clone().resize(d, d, Complex::zero());
        let b = other.m.clone().resize(d, d, Complex::zero());
        (a - b).norm()
    }
}

struct Realizer<'a, T: Real> {
    view: StreamView<'a, T>,
    terms: Vec<(T, UnitVec<T>, Src)>,
    emitted: Acc<T>,
    full: Acc<T>,
    c: usize,
    certificates: Vec<StageCertificate<T>>,
    r_cap: T,
}

impl<'a, T: Real> Realizer<'a, T> {
    fn new(view: StreamView<'a, T>, r_cap: T) -> Self {
        Realizer {
            view,
            terms: Vec::new(),
            emitted: Acc::new(),
            full: Acc::new(),
            c: 0,
            certificates: Vec::new(),
            r_cap,
        }
    }

    fn emit(&mut self, w: T, v: UnitVec<T>, src: Src) {
        self.emitted.add(w, &v);
        self.terms.push((w, v, src));
    }

    fn advance_to(&mut self, c: usize) -> Result<()> {
        while self.c < c {
            let e = self.view.get(self.c)?;
            self.full.add(T::one(), &e);
            self.c += 1;
        }
        Ok(())
    }

    /// `Σ_{j<c} E_j + r E_c − carries`.
    fn expected(&self, r: T, carries: &[(T, UnitVec<T>)]) -> Result<Acc<T>> {
        let mut acc = Acc { m: self.full.m.clone() };
        if r > T::zero() {
            acc.add(r, &self.view.get(self.c)?);
        }
        for (w, v) in carries {
            acc.add(-*w, v);
        }
        Ok(acc)
    }

    #[allow(clippy::too_many_arguments)]
    fn certify(
        &mut self,
        stage: usize,
        r_in: T,
        r_out: T,
        carries: &[(T, UnitVec<T>)],
        eta: Vec<T>,
        block: Vec<T>,
        extensions: usize,
        block_residual: T,
    ) -> Result<()> {
        let residual = self.expected(r_out, carries)?.distance(&self.emitted);
        self.certificates.push(StageCertificate {
            stage,
            consumed_through: self.c,
            r_in,
            r_out,
            eta,
            block,
            extensions,
            block_residual,
            residual,
            carry: carries.iter().fold(T::zero(), |s, (w, _)| s + *w),
            remainder_ok: r_out >= T::zero() && r_out < self.r_cap,
            emitted: self.terms.len(),
        });
        Ok(())
    }

    fn realize(&mut self, plan: &BlockPlan<T>) -> Result<()> {
        let eta = plan.eta();
        let values = plan.values();
        let mut block = Acc::new();
        let mut target = Acc::new();
        if !plan.entries.is_empty() {
            let vecs = plan
                .targets
                .iter()
                .map(|(j, _)| self.view.get(*j))
                .collect::<Result<Vec<_>>>()?;
            for ((_, w), v) in plan.targets.iter().zip(&vecs) {
                target.add(*w, v);
            }
            let trace = horn_decompose_traced(&eta, &vecs, &values)?;
            for (entry, v) in plan.entries.iter().zip(trace.vectors) {
                let v = v.ok_or_else(|| Error::PlanAssertion {
                    stage: plan.stage,
                    detail: "zero entry inside a block".into(),
                })?;
                block.add(entry.value, &v);
                self.emit(entry.value, v, entry.src);
            }
        }
        for (entry, j) in &plan.colinear {
            let v = self.view.get(*j)?;
            self.emit(entry.value, v, entry.src);
        }
        self.advance_to(plan.consumed_through)?;
        let carries = match &plan.carry {
            Some((j, w)) => vec![(*w, self.view.get(*j)?)],
            None => Vec::new(),
        };
        self.certify(
            plan.stage,
            plan.r_in,
            plan.r_out,
            &carries,
            eta,
            values,
            plan.extensions,
            block.distance(&target),
        )
    }
}

fn trace_mismatch<T: Real>(total: &ExtReal<T>, len: Card) -> Error {
    Error::TraceMismatch {
        sequence: total.to_string(),
        operator: len.to_string(),
    }
}

/// Splits the stream between the stripped sequence and the ones of `ξ`.
fn partition<'a, T: Real>(
    stream: &'a ProjectionStream<T>,
    core_total: &ExtReal<T>,
    ones: Card,
) -> Result<(StreamView<'a, T>, Option<StreamView<'a, T>>)> {
    let len = stream.len();
    let total = core_total.add(&match ones {
        Card::Finite(n) => ExtReal::Finite(T::from_usize(n).unwrap()),
        Card::Infinite => ExtReal::Infinite,
    });
    match (len, &total) {
        (Card::Finite(l), ExtReal::Finite(t)) => {
            let l_t = T::from_usize(l).unwrap();
            if (*t - l_t).abs() > T::tol(1e-9) * l_t.max(T::one()) {
                return Err(trace_mismatch(&total, len));
            }
        }
        (Card::Infinite, ExtReal::Infinite) => {}
        _ => return Err(trace_mismatch(&total, len)),
    }
    let view = |offset, stride, len| StreamView {
        stream,
        offset,
        stride,
        len,
    };
    Ok(match (core_total, ones) {
        (_, Card::Finite(0)) => (StreamView::whole(stream), None),
        (_, Card::Finite(n1)) => {
            let rest = match len {
                Card::Finite(l) => Card::Finite(l - n1),
                Card::Infinite => Card::Infinite,
            };
            (view(n1, 1, rest), Some(view(0, 1, Card::Finite(n1))))
        }
        (ExtReal::Finite(t), Card::Infinite) => {
            let t = t.to_f64_lossy().round() as usize;
            (view(0, 1, Card::Finite(t)), Some(view(t, 1, Card::Infinite)))
        }
        (ExtReal::Infinite, Card::Infinite) => (view(0, 2, Card::Infinite), Some(view(1, 2, Card::Infinite))),
    })
}

/// Decomposes `A = Σ u_j⊗u_j` against `ξ`, realizing `config.stages` stages
/// when `ξ` is infinite. Every stage is certified; a residual above
/// `config.tol` is an error.
pub fn carpenter_decompose<T: Real>(
    xi: &WeightSeq<T>,
    stream: &ProjectionStream<T>,
    config: &CarpenterConfig,
) -> Result<CarpenterOutput<T>> {
    stream.validate()?;
    let an = analyze(xi)?;
    let tag = an.tag;
    let core_total = an.stripped.core.total();
    let (core_view, ones_view) = partition(stream, &core_total, an.stripped.ones)?;

    let half = T::lit(0.5);
    let r_cap = match tag.kind {
        CaseKind::MuDiverges | CaseKind::BothSummable => half,
        _ => T::one(),
    };
    let mut rz = Realizer::new(core_view, r_cap);
    let (mu, lambda) = (&an.split.mu, &an.split.lambda);
    let limit = config.extend_limit;
    let mut keycase = None;
    let plans = match tag.kind {
        CaseKind::FiniteRank => {
            let t = *core_total.finite().expect("finite");
            let n = near_integer(&t, &T::tol(1e-9)).ok_or_else(|| Error::PlanAssertion {
                stage: 0,
                detail: format!("finite trace {t} is not an integer"),
            })?;
            plan_finite_rank(&an.stripped.core, n.to_f64_lossy().round() as usize, config.stages.max(1))?
        }
        CaseKind::MuDiverges => plan_mu_diverges(mu, lambda, config.stages, limit)?,
        CaseKind::LambdaDiverges => plan_lambda_diverges(mu, lambda, config.stages, limit)?,
        CaseKind::BothSummable => plan_both_summable(mu, lambda, tag.k.unwrap(), config.stages, limit)?,
        CaseKind::MFiniteNInf => vec![plan_m_finite_head(mu, lambda, tag.k.unwrap(), limit)?],
    };
    for plan in &plans {
        rz.realize(plan)?;
    }

    if tag.kind == CaseKind::MFiniteNInf {
        let head = &plans[0];
        let n = head.lambda.end;
        let base = head.consumed_through;
        let run = keycase_run(&lambda.skip(n), &core_view.skip(base), config.stages.saturating_sub(1))?;
        for (s, st) in run.stages.iter().enumerate() {
            rz.emit(st.emitted_weight, st.emitted.clone(), Src::Lambda(n + s));
            rz.advance_to(base + s + 2)?;
            let pair = rz.view.get(base + s + 1)?;
            let mut mixed = Acc::new();
            mixed.add(st.emitted_weight, &st.emitted);
            mixed.add(st.w_weight, &st.w);
            let mut source = Acc::new();
            source.add(T::one() - run.tails[s], &if s == 0 { rz.view.get(base)? } else { run.stages[s - 1].w.clone() });
            source.add(T::one(), &pair);
            rz.certify(
                s + 1,
                T::zero(),
                T::zero(),
                &[(st.w_weight, st.w.clone())],
                vec![T::one() - run.tails[s], T::one()],
                vec![T::one() - run.tails[s + 1], st.emitted_weight],
                0,
                mixed.distance(&source),
            )?;
        }
        keycase = Some(run);
    }

    for cert in &rz.certificates {
        if cert.residual > T::lit(config.tol) {
            return Err(Error::PlanAssertion {
                stage: cert.stage,
                detail: format!("identity residual {} exceeds {}", cert.residual, config.tol),
            });
        }
    }

    // the operator the prefix decomposes
    let last = rz.certificates.last();
    let r_final = last.map_or(T::zero(), |c| c.r_out);
    let carries: Vec<(T, UnitVec<T>)> = match (tag.kind, plans.last(), &keycase) {
        (CaseKind::MFiniteNInf, _, Some(run)) if !run.stages.is_empty() => {
            let st = run.stages.last().unwrap();
            vec![(st.w_weight, st.w.clone())]
        }
        (CaseKind::MFiniteNInf, _, _) => Vec::new(),
        (_, Some(p), _) => match &p.carry {
            Some((j, w)) => vec![(*w, rz.view.get(*j)?)],
            None => Vec::new(),
        },
        _ => Vec::new(),
    };
    let mut target = rz.expected(r_final, &carries)?;

    let pos = |src: Src| -> usize {
        let core_index = match src {
            Src::Mu(i) => an.split.mu_positions.position(i),
            Src::Lambda(i) => an.split.lambda_positions.position(i),
            Src::Core(i) => i,
        };
        an.stripped.core_positions.position(core_index)
    };
    // planned values pass through tail arithmetic; report the source entries themselves
    let mut terms: Vec<CarpenterTerm<T>> = Vec::with_capacity(rz.terms.len());
    for (w, v, src) in &rz.terms {
        let position = pos(*src);
        let weight = xi.get(position);
        if (weight - *w).abs() > T::tol(1e-12) * weight.max(T::one()) {
            return Err(Error::PlanAssertion {
                stage: rz.certificates.len(),
                detail: format!("planned weight {w} at position {position} differs from {weight}"),
            });
        }
        terms.push(CarpenterTerm {
            weight,
            vector: v.clone(),
            position,
        });
    }

    if let Some(ov) = ones_view {
        let count = match an.stripped.ones {
            Card::Finite(n) => n,
            Card::Infinite => config.stages,
        };
        for i in 0..count {
            let e = ov.get(i)?;
            target.add(T::one(), &e);
            terms.push(CarpenterTerm {
                weight: T::one(),
                vector: e,
                position: an.stripped.one_positions.position(i),
            });
        }
    }
    if let Card::Finite(z) = an.stripped.zeros {
        for i in 0..z {
            terms.push(CarpenterTerm {
                weight: T::zero(),
                vector: UnitVec::basis(1, 0),
                position: an.stripped.zero_positions.position(i),
            });
        }
    }

    let dim = terms
        .iter()
        .map(|t| t.vector.dim())
        .chain(std::iter::once(target.m.nrows()))
        .max()
        .unwrap_or(0)
        .max(1);
    target.grow(dim);
    for t in terms.iter_mut() {
        t.vector = t.vector.embed(dim);
    }
    let target = HermOp::from_hermitian_unchecked(target.m);
    let mut out = CarpenterOutput {
        case: tag,
        terms,
        plans,
        certificates: rz.certificates,
        keycase,
        target,
        residual: T::zero(),
    };
    out.residual = frame_operator(&out.decomp()).distance(&out.target)?;
    if out.residual > T::lit(config.tol) {
        return Err(Error::PlanAssertion {
            stage: out.certificates.len(),
            detail: format!("final residual {} exceeds {}", out.residual, config.tol),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqkit::Component;

    fn cfg(stages: usize) -> CarpenterConfig {
        CarpenterConfig {
            stages,
            ..Default::default()
        }
    }

    #[test]
    fn classify_examples() {
        let c = classify_case(&WeightSeq::constant_tail(vec![], 0.5f64).unwrap()).unwrap();
        assert_eq!(c.kind, CaseKind::MuDiverges);
        let c = classify_case(&WeightSeq::finite(vec![0.5f64; 4]).unwrap()).unwrap();
        assert_eq!(c.kind, CaseKind::FiniteRank);
        // ξ_j = 1 − 2^{-(j+1)}: μ = (1/2), λ_j = 2^{-(j+2)}, k = 0
        let xi = WeightSeq::cyclic_tail(vec![], vec![Component::new(1.0f64, -0.5, 0.5).unwrap()]).unwrap();
        let c = classify_case(&xi).unwrap();
        assert_eq!((c.kind, c.k, c.m), (CaseKind::MFiniteNInf, Some(0), Card::Finite(1)));
        let xi = WeightSeq::cyclic_tail(vec![], vec![Component::new(1.0f64, -0.25, 0.5).unwrap()]).unwrap();
        assert!(matches!(classify_case(&xi), Err(Error::Kadison { .. })));
    }

    #[test]
    fn finite_rank_identity_basis() {
        let xi = WeightSeq::finite(vec![0.5f64; 4]).unwrap();
        let s = ProjectionStream::Explicit((0..2).map(|i| UnitVec::basis(2, i)).collect());
        let out = carpenter_decompose(&xi, &s, &cfg(5)).unwrap();
        assert_eq!(out.terms.len(), 4);
        assert!(out.target.distance(&HermOp::identity(2)).unwrap() < 1e-14);
        assert!(out.max_residual() < 1e-10);
        let mut p = out.positions();
        p.sort();
        assert_eq!(p, vec![0, 1, 2, 3]);
    }

    #[test]
    fn trace_mismatch_is_reported() {
        let xi = WeightSeq::finite(vec![0.5f64; 3]).unwrap();
        let s = ProjectionStream::Explicit((0..2).map(|i| UnitVec::basis(2, i)).collect());
        assert!(matches!(
            carpenter_decompose(&xi, &s, &cfg(5)),
            Err(Error::TraceMismatch { .. }) | Err(Error::Kadison { .. })
        ));
        let xi = WeightSeq::finite(vec![0.5f64; 2]).unwrap();
        assert!(matches!(
            carpenter_decompose(&xi, &ProjectionStream::OrthonormalBasis, &cfg(5)),
            Err(Error::TraceMismatch { .. })
        ));
    }

    #[test]
    fn all_cases_certify() {
        let streams = [
            ProjectionStream::<f64>::OrthonormalBasis,
            ProjectionStream::BlockOverlap { block: 3 },
            ProjectionStream::RandomBlock { block: 4, seed: 11 },
        ];
        let seqs = vec![
            // MU_DIVERGES: μ ≡ 0.4 interleaved with λ ≡ 0.1
            WeightSeq::cyclic_tail(
                vec![],
                vec![Component::new(0.4, 0.0, 0.0).unwrap(), Component::new(0.9, 0.0, 0.0).unwrap()],
            )
            .unwrap(),
            // LAMBDA_DIVERGES
            WeightSeq::constant_tail(vec![0.6, 0.5], 0.75).unwrap(),
            // BOTH_SUMMABLE, k = 1
            WeightSeq::cyclic_tail(
                vec![],
                vec![Component::new(0.0, 0.125, 0.5).unwrap(), Component::new(1.0, -0.25, 0.8).unwrap()],
            )
            .unwrap(),
            // M_FINITE_N_INF
            WeightSeq::cyclic_tail(vec![], vec![Component::new(1.0, -0.5, 0.5).unwrap()]).unwrap(),
            // ones and zeros around a μ-divergent core
            WeightSeq::cyclic_tail(
                vec![0.0, 1.0],
                vec![Component::new(0.5, 0.0, 0.0).unwrap(), Component::new(1.0, 0.0, 0.0).unwrap()],
            )
            .unwrap(),
        ];
        for xi in &seqs {
            for s in &streams {
                let out = carpenter_decompose(xi, s, &cfg(10)).unwrap();
                assert!(out.max_residual() < 1e-10, "{:?}: {}", out.case.kind, out.max_residual());
                assert!(out.certificates.len() >= 10, "{:?}", out.case.kind);
                for c in &out.certificates {
                    assert!(c.remainder_ok, "{:?} stage {}", out.case.kind, c.stage);
                }
                for t in &out.terms {
                    assert_eq!(t.weight, xi.get(t.position));
                }
            }
        }
    }
}
