//! Rank-one decompositions versus partial isometries with a prescribed diagonal.

use crate::error::{Error, Result};
use crate::operators::{
    cx, frame_operator, polar_partial_isometry, range_projection, sqrt_psd, CMatrix, HermOp, PartialIsometryRec,
    RankOneDecomp, UnitVec,
};
use crate::scalar::Real;

/// Weights at or below this are treated as zero.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct BridgeRecord<T: Real> {
    pub a: HermOp<T>,
    pub decomp: RankOneDecomp<T>,
    pub v: PartialIsometryRec<T>,
    /// `diag(V A V*)`, one entry per kept term.
    pub diag: Vec<T>,
    /// Indices of terms whose weight was dropped as zero.
    pub dropped: Vec<usize>,
}

/// The analysis matrix with rows `√ξ_j v_j*`.
pub fn analysis_matrix<T: Real>(d: &RankOneDecomp<T>) -> CMatrix<T> {
    let rows = d.len();
    CMatrix::from_fn(rows, d.dim(), |j, k| {
        let (w, v) = &d.terms()[j];
        v.coords()[k].conj() * cx(w.sqrt())
    })
}

/// `B = Σ √ξ_j e_j ⊗ v_j`, `A = B*B` and `V` the polar factor of `B`.
pub fn decomp_to_isometry<T: Real>(d: &RankOneDecomp<T>) -> BridgeRecord<T> {
    let floor = T::lit(WEIGHT_FLOOR);
    let mut kept = RankOneDecomp::new(d.dim());
    let mut dropped = Vec::new();
    for (j, (w, v)) in d.terms().iter().enumerate() {
        if *w > floor {
            kept.push(*w, v.clone()).expect("same dimension");
        } else {
            dropped.push(j);
        }
    }
    let b = analysis_matrix(&kept);
    let a = HermOp::from_hermitian_unchecked(b.adjoint() * &b);
    let v = polar_partial_isometry(&b);
    let vav = &v.matrix * a.matrix() * v.matrix.adjoint();
    let diag = (0..vav.nrows()).map(|i| vav[(i, i)].re).collect();
    BridgeRecord {
        a,
        decomp: d.clone(),
        v,
        diag,
        dropped,
    }
}

/// `ξ_j = (V A V*)_jj` and `v_j = A^{1/2} V* e_j / √ξ_j`, for `V*V = R_A`.
pub fn isometry_to_decomp<T: Real>(a: &HermOp<T>, v: &CMatrix<T>) -> Result<RankOneDecomp<T>> {
    if v.ncols() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: v.ncols(),
        });
    }
    let r = range_projection(a);
    let deviation = (v.adjoint() * v - r.matrix()).norm();
    if deviation > T::tol(1e-10) {
        return Err(Error::NotPartialIsometry {
            deviation: deviation.to_f64_lossy(),
        });
    }
    let root = sqrt_psd(a)?;
    let cols = root.matrix() * v.adjoint();
    let vav = v * a.matrix() * v.adjoint();
    let floor = T::lit(WEIGHT_FLOOR);
    let mut d = RankOneDecomp::new(a.dim());
    for j in 0..v.nrows() {
        let xi = vav[(j, j)].re;
        if xi > floor {
            let col = cols.column(j).map(|z| z / cx(xi.sqrt()));
            d.push(xi, UnitVec::normalized(col)?)?;
        }
    }
    Ok(d)
}

/// `G_ij = √(ξ_i ξ_j) (v_j, v_i)`.
pub fn gram_matrix<T: Real>(d: &RankOneDecomp<T>) -> HermOp<T> {
    let b = analysis_matrix(d);
    HermOp::from_hermitian_unchecked(&b * b.adjoint())
}

/// Frobenius distance of `V*V` from the range projection of `A`.
pub fn domain_defect<T: Real>(rec: &BridgeRecord<T>) -> T {
    let r = range_projection(&rec.a);
    (rec.v.matrix.adjoint() * &rec.v.matrix - r.matrix()).norm()
}

/// Sanity residual `‖frame_operator(d) − A‖_F` for a record.
pub fn record_residual<T: Real>(rec: &BridgeRecord<T>) -> T {
    frame_operator(&rec.decomp).distance(&rec.a).expect("same dimension")
}
