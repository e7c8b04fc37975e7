//! Dense Hermitian operators, unit vectors and rank-one decompositions.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Cx<T> = Complex<T>;
pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

pub(crate) fn cx<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Eigenvalues this far below zero are treated as zero.
pub const CLAMP: f64 = 1e-10;

/// Eigenvalues above `RANGE_TOL * max(1, λ_max)` count toward the range.
pub const RANGE_TOL: f64 = 1e-10;

/// A square Hermitian matrix. The stored entries are exactly Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermOp<T: Real> {
    m: CMatrix<T>,
}

/// Eigenpairs with eigenvalues sorted non-increasing.
#[derive(Clone, Debug)]
pub struct Eig<T: Real> {
    pub values: Vec<T>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> Eig<T> {
    /// `Σ f(λ_i) v_i v_i*`.
    pub fn apply(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, lam) in self.values.iter().enumerate() {
            let s = cx(f(*lam));
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn range_threshold(&self) -> T {
        let top = self.values.first().copied().unwrap_or_else(T::zero);
        T::lit(RANGE_TOL) * top.max(T::one())
    }
}

impl<T: Real> HermOp<T> {
    /// Accepts a square matrix whose anti-Hermitian part is within
    /// `1e-12 * dim * max(1, ‖M‖_F)` and stores its Hermitian part.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let adj = m.adjoint();
        let deviation = (&m - &adj).norm();
        let scale = T::one().max(m.norm()) * T::from_usize(m.nrows().max(1)).unwrap();
        if deviation > T::tol(1e-12) * scale {
            return Err(Error::NotHermitian {
                deviation: deviation.to_f64_lossy(),
            });
        }
        let half = T::lit(0.5);
        Ok(HermOp {
            m: (&m + &adj).map(|z| z * cx(half)),
        })
    }

    /// Builds from a real symmetric or complex Hermitian matrix without checks
    /// beyond symmetrizing.
    pub(crate) fn from_hermitian_unchecked(m: CMatrix<T>) -> Self {
        let adj = m.adjoint();
        let half = cx(T::lit(0.5));
        HermOp {
            m: (&m + &adj).map(|z| z * half),
        }
    }

    pub fn from_diag(values: &[T]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|x| cx(*x)));
        HermOp {
            m: CMatrix::from_diagonal(&d),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        HermOp {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermOp {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).fold(T::zero(), |acc, i| acc + self.m[(i, i)].re)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    pub fn eig(&self) -> Eig<T> {
        let n = self.dim();
        if n == 0 {
            return Eig {
                values: Vec::new(),
                vectors: CMatrix::zeros(0, 0),
            };
        }
        let se = SymmetricEigen::new(self.m.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
        let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
        Eig { values, vectors }
    }

    /// Fails unless the smallest eigenvalue is at least `-1e-10 * max(1, λ_max)`.
    pub fn check_psd(&self) -> Result<Eig<T>> {
        let e = self.eig();
        if let Some(&min) = e.values.last() {
            if min < -e.range_threshold() {
                return Err(Error::NotPsd {
                    min_eigenvalue: min.to_f64_lossy(),
                });
            }
        }
        Ok(e)
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &HermOp<T>) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok((&self.m - &other.m).norm())
    }

    /// Zero-pads to a larger dimension.
    pub fn embed(&self, dim: usize) -> Self {
        assert!(dim >= self.dim());
        let mut m = CMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.m);
        HermOp { m }
    }

    pub fn add(&self, other: &HermOp<T>) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(HermOp { m: &self.m + &other.m })
    }

    pub fn scale(&self, t: T) -> Self {
        HermOp {
            m: self.m.map(|z| z * cx(t)),
        }
    }
}

/// Eigenvalues with multiplicity, non-increasing, with values in
/// `[-1e-10, 0)` clamped to zero.
pub fn eigenvalues_desc<T: Real>(a: &HermOp<T>) -> Vec<T> {
    let clamp = T::lit(CLAMP);
    a.eig()
        .values
        .into_iter()
        .map(|x| if x < T::zero() && x >= -clamp { T::zero() } else { x })
        .collect()
}

/// The positive square root.
pub fn sqrt_psd<T: Real>(a: &HermOp<T>) -> Result<HermOp<T>> {
    let e = a.check_psd()?;
    // eigenvalues within roundoff of zero are zero; the root would amplify them to ~1e-8
    let top = e.values.first().copied().unwrap_or_else(T::zero).max(T::one());
    let floor = T::default_epsilon() * T::lit(64.0) * top * T::from_usize(a.dim().max(1)).unwrap();
    Ok(HermOp::from_hermitian_unchecked(e.apply(|x| if x > floor { x.sqrt() } else { T::zero() })))
}

/// Orthogonal projection onto the span of eigenvectors above the range threshold.
pub fn range_projection<T: Real>(a: &HermOp<T>) -> HermOp<T> {
    let e = a.eig();
    let thr = e.range_threshold();
    HermOp::from_hermitian_unchecked(e.apply(|x| if x > thr { T::one() } else { T::zero() }))
}

/// A unit vector in `ℂ^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVec<T: Real> {
    coords: CVector<T>,
}

impl<T: Real> UnitVec<T> {
    /// Accepts coordinates with norm 1 within `1e-12`.
    pub fn new(coords: CVector<T>) -> Result<Self> {
        let norm = coords.norm();
        if (norm - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::NotUnit {
                norm: norm.to_f64_lossy(),
            });
        }
        Ok(UnitVec { coords })
    }

    /// Divides by the norm. Fails on the zero vector.
    pub fn normalized(coords: CVector<T>) -> Result<Self> {
        let norm = coords.norm();
        if norm.is_zero() || !norm.is_finite() {
            return Err(Error::NotUnit { norm: 0.0 });
        }
        Ok(UnitVec {
            coords: coords.map(|z| z / cx(norm)),
        })
    }

    /// The standard basis vector `e_i` (0-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut coords = CVector::zeros(dim);
        coords[i] = cx(T::one());
        UnitVec { coords }
    }

    pub fn from_real(values: &[T]) -> Result<Self> {
        Self::normalized(DVector::from_iterator(values.len(), values.iter().map(|x| cx(*x))))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &CVector<T> {
        &self.coords
    }

    /// Zero-pads to `dim` coordinates.
    pub fn embed(&self, dim: usize) -> Self {
        assert!(dim >= self.dim(), "cannot embed dimension {} into {dim}", self.dim());
        let mut coords = CVector::zeros(dim);
        coords.rows_mut(0, self.dim()).copy_from(&self.coords);
        UnitVec { coords }
    }

    /// `(self, other)`, linear in the first slot.
    pub fn inner(&self, other: &UnitVec<T>) -> Complex<T> {
        other.coords.dotc(&self.coords)
    }

    /// `v v*`.
    pub fn projection(&self) -> CMatrix<T> {
        &self.coords * self.coords.adjoint()
    }

    /// Index of the last nonzero coordinate plus one.
    pub fn support_len(&self) -> usize {
        self.coords
            .iter()
            .rposition(|z| !z.re.is_zero() || !z.im.is_zero())
            .map_or(0, |i| i + 1)
    }
}

/// Ordered `(weight, unit vector)` terms in a common ambient dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneDecomp<T: Real> {
    dim: usize,
    terms: Vec<(T, UnitVec<T>)>,
}

impl<T: Real> RankOneDecomp<T> {
    pub fn new(dim: usize) -> Self {
        RankOneDecomp {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(dim: usize, terms: Vec<(T, UnitVec<T>)>) -> Result<Self> {
        let mut d = Self::new(dim);
        for (w, v) in terms {
            d.push(w, v)?;
        }
        Ok(d)
    }

    /// Appends a term, zero-padding shorter vectors.
    pub fn push(&mut self, weight: T, v: UnitVec<T>) -> Result<()> {
        if weight < T::zero() {
            return Err(Error::EntryOutOfRange {
                index: self.terms.len(),
                value: weight.to_f64_lossy(),
                range: "[0, inf)",
            });
        }
        if v.dim() > self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        let v = if v.dim() < self.dim { v.embed(self.dim) } else { v };
        self.terms.push((weight, v));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(T, UnitVec<T>)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(T, UnitVec<T>)> {
        self.terms
    }

    pub fn weights(&self) -> Vec<T> {
        self.terms.iter().map(|(w, _)| *w).collect()
    }

    pub fn total_weight(&self) -> T {
        self.terms.iter().fold(T::zero(), |acc, (w, _)| acc + *w)
    }

    /// Re-expresses every vector in a larger ambient dimension.
    pub fn embed(&self, dim: usize) -> Self {
        RankOneDecomp {
            dim,
            terms: self.terms.iter().map(|(w, v)| (*w, v.embed(dim))).collect(),
        }
    }

    pub fn extend(&mut self, other: RankOneDecomp<T>) -> Result<()> {
        for (w, v) in other.terms {
            self.push(w, v)?;
        }
        Ok(())
    }
}

/// `Σ w_j v_j v_j*`.
pub fn frame_operator<T: Real>(d: &RankOneDecomp<T>) -> HermOp<T> {
    let mut m = CMatrix::zeros(d.dim, d.dim);
    for (w, v) in &d.terms {
        let c = v.coords();
        let s = cx(*w);
        for j in 0..d.dim {
            let cj = c[j].conj() * s;
            if cj.re.is_zero() && cj.im.is_zero() {
                continue;
            }
            for i in 0..d.dim {
                m[(i, j)] += c[i] * cj;
            }
        }
    }
    HermOp::from_hermitian_unchecked(m)
}

/// `‖A − Σ w_j v_j v_j*‖_F`.
pub fn residual_norm<T: Real>(a: &HermOp<T>, d: &RankOneDecomp<T>) -> Result<T> {
    a.distance(&frame_operator(d))
}

/// A matrix `V` together with its domain projection `V*V`.
#[derive(Clone, Debug)]
pub struct PartialIsometryRec<T: Real> {
    pub matrix: CMatrix<T>,
    pub domain_projection: HermOp<T>,
}

impl<T: Real> PartialIsometryRec<T> {
    /// Checks that `V*V` is the given projection within `1e-10`.
    pub fn new(matrix: CMatrix<T>, domain_projection: HermOp<T>) -> Result<Self> {
        let vv = matrix.adjoint() * &matrix;
        if vv.nrows() != domain_projection.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain_projection.dim(),
                found: vv.nrows(),
            });
        }
        let deviation = (&vv - domain_projection.matrix()).norm();
        let p = domain_projection.matrix();
        let idem = (p * p - p).norm();
        let worst = deviation.max(idem);
        if worst > T::tol(1e-10) {
            return Err(Error::NotPartialIsometry {
                deviation: worst.to_f64_lossy(),
            });
        }
        Ok(PartialIsometryRec {
            matrix,
            domain_projection,
        })
    }
}

/// `B = V (B*B)^{1/2}` with `V*V` the range projection of `B*B`, computed from
/// the eigendecomposition of `B*B`.
pub fn polar_partial_isometry<T: Real>(b: &CMatrix<T>) -> PartialIsometryRec<T> {
    let bb = HermOp::from_hermitian_unchecked(b.adjoint() * b);
    let e = bb.eig();
    let thr = e.range_threshold();
    let inv_sqrt = e.apply(|s| if s > thr { T::one() / s.sqrt() } else { T::zero() });
    let v = b * inv_sqrt;
    let domain = HermOp::from_hermitian_unchecked(e.apply(|s| if s > thr { T::one() } else { T::zero() }));
    PartialIsometryRec {
        matrix: v,
        domain_projection: domain,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn real(rows: usize, cols: usize, v: &[f64]) -> CMatrix<f64> {
        CMatrix::from_row_iterator(rows, cols, v.iter().map(|x| cx(*x)))
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalues_desc(&HermOp::from_diag(&[1.0, 3.0, 2.0])), vec![3.0, 2.0, 1.0]);
        let v = UnitVec::from_real(&[1.0, 2.0, 2.0]).unwrap();
        let mut d = RankOneDecomp::new(3);
        d.push(2.0, v).unwrap();
        let ev = eigenvalues_desc(&frame_operator(&d));
        assert!(close(ev[0], 2.0, 1e-12) && ev[1].abs() < 1e-12 && ev[2].abs() < 1e-12);

        let d = RankOneDecomp::from_terms(2, vec![(0.7, UnitVec::basis(2, 0)), (0.5, UnitVec::basis(2, 0))]).unwrap();
        let ev = eigenvalues_desc(&frame_operator(&d));
        assert!(close(ev[0], 1.2, 1e-12) && ev[1] == 0.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        assert!(HermOp::new(real(2, 2, &[1.0, 2.0, 0.0, 1.0])).is_err());
        assert!(HermOp::new(real(1, 2, &[1.0, 2.0])).is_err());
        let mut m = real(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        m[(0, 1)] = Complex::new(0.0, 1.0);
        m[(1, 0)] = Complex::new(0.0, -1.0);
        assert!(HermOp::new(m).is_ok());
    }

    #[test]
    fn sqrt_examples() {
        let s = sqrt_psd(&HermOp::from_diag(&[4.0, 9.0])).unwrap();
        assert!(s.distance(&HermOp::from_diag(&[2.0, 3.0])).unwrap() < 1e-12);
        let s = sqrt_psd(&HermOp::<f64>::zeros(2)).unwrap();
        assert!(s.matrix().norm() < 1e-15);

        let a = HermOp::new(real(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let s = sqrt_psd(&a).unwrap();
        assert!((s.matrix() * s.matrix() - a.matrix()).norm() < 1e-12);
        let ev = eigenvalues_desc(&s);
        assert!(close(ev[0], 3f64.sqrt(), 1e-12) && close(ev[1], 1.0, 1e-12));

        assert!(sqrt_psd(&HermOp::from_diag(&[1.0, -0.5])).is_err());
    }

    #[test]
    fn polar_examples() {
        let b = real(2, 1, &[1.0, 1.0]);
        let p = polar_partial_isometry(&b);
        let h = 0.5f64.sqrt();
        assert!((&p.matrix - real(2, 1, &[h, h])).norm() < 1e-12);
        assert!(close(p.domain_projection.matrix()[(0, 0)].re, 1.0, 1e-12));
        assert!((&p.matrix * cx(2f64.sqrt()) - &b).norm() < 1e-12);

        let p = polar_partial_isometry(&CMatrix::<f64>::identity(2, 2));
        assert!((&p.matrix - CMatrix::identity(2, 2)).norm() < 1e-12);

        let p = polar_partial_isometry(&CMatrix::<f64>::zeros(2, 2));
        assert!(p.matrix.norm() == 0.0 && p.domain_projection.matrix().norm() == 0.0);
        assert!(PartialIsometryRec::new(p.matrix, p.domain_projection).is_ok());
    }

    #[test]
    fn frame_operator_examples() {
        let d = RankOneDecomp::from_terms(2, vec![(1.0, UnitVec::basis(2, 0)), (1.0, UnitVec::basis(2, 1))]).unwrap();
        assert_eq!(frame_operator(&d), HermOp::identity(2));
        assert_eq!(frame_operator(&RankOneDecomp::<f64>::new(2)), HermOp::zeros(2));
        let d = RankOneDecomp::from_terms(2, vec![(0.5, UnitVec::from_real(&[1.0, 1.0]).unwrap())]).unwrap();
        let want = HermOp::new(real(2, 2, &[0.25, 0.25, 0.25, 0.25])).unwrap();
        assert!(frame_operator(&d).distance(&want).unwrap() < 1e-15);
        assert!(close(frame_operator(&d).trace(), 0.5, 1e-15));
    }

    #[test]
    fn residual_examples() {
        let i2 = HermOp::<f64>::identity(2);
        let d = RankOneDecomp::from_terms(2, vec![(1.0, UnitVec::basis(2, 0)), (1.0, UnitVec::basis(2, 1))]).unwrap();
        assert_eq!(residual_norm(&i2, &d).unwrap(), 0.0);
        assert!(close(residual_norm(&i2, &RankOneDecomp::new(2)).unwrap(), 2f64.sqrt(), 1e-15));
        let d = RankOneDecomp::from_terms(1, vec![(1.0, UnitVec::basis(1, 0)), (1.0, UnitVec::basis(1, 0))]).unwrap();
        assert_eq!(residual_norm(&HermOp::from_diag(&[2.0]), &d).unwrap(), 0.0);
        assert!(residual_norm(&HermOp::identity(3), &d).is_err());
    }

    #[test]
    fn unit_vectors() {
        assert!(UnitVec::<f64>::new(DVector::from_element(2, cx(1.0))).is_err());
        assert!(UnitVec::<f64>::normalized(DVector::zeros(3)).is_err());
        let v = UnitVec::<f64>::basis(2, 1).embed(4);
        assert_eq!(v.dim(), 4);
        assert_eq!(v.support_len(), 2);
        let mut d = RankOneDecomp::new(1);
        assert!(d.push(1.0, UnitVec::basis(2, 0)).is_err());
        assert!(d.push(-1.0, UnitVec::basis(1, 0)).is_err());
    }
}
