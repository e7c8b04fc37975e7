use nalgebra::{Complex, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operators::{cx, UnitVec};
use crate::scalar::Real;
use crate::seqkit::Card;

/// Unit vectors `u_0, u_1, ...` with finite supports, defining `A = Σ u_j ⊗ u_j`.
#[derive(Clone, Debug, PartialEq)]
pub enum ProjectionStream<T: Real> {
    /// `e_0, e_1, ...`
    OrthonormalBasis,
    /// A finite list.
    Explicit(Vec<UnitVec<T>>),
    /// Within each block of `block` coordinates, vector `p` is
    /// `e_p + c_p e_{p+1 mod block}` normalized, with a fixed complex `c_p`.
    BlockOverlap { block: usize },
    /// Seeded random complex vectors supported on their block.
    RandomBlock { block: usize, seed: u64 },
}

impl<T: Real> ProjectionStream<T> {
    pub fn len(&self) -> Card {
        match self {
            ProjectionStream::Explicit(v) => Card::Finite(v.len()),
            _ => Card::Infinite,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Card::Finite(0)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProjectionStream::BlockOverlap { block } | ProjectionStream::RandomBlock { block, .. } if *block == 0 => {
                Err(Error::Precondition("stream block size must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Number of leading coordinates that can be nonzero in `u_j`.
    pub fn window(&self, j: usize) -> usize {
        match self {
            ProjectionStream::OrthonormalBasis => j + 1,
            ProjectionStream::Explicit(v) => v[j].dim(),
            ProjectionStream::BlockOverlap { block } | ProjectionStream::RandomBlock { block, .. } => {
                (j / block + 1) * block
            }
        }
    }

    /// `u_j`, represented in exactly `window(j)` coordinates.
    pub fn get(&self, j: usize) -> UnitVec<T> {
        match self {
            ProjectionStream::OrthonormalBasis => UnitVec::basis(j + 1, j),
            ProjectionStream::Explicit(v) => v[j].clone(),
            ProjectionStream::BlockOverlap { block } => {
                let n = *block;
                let (start, p) = (j / n * n, j % n);
                let mut coords = DVector::zeros(start + n);
                if n == 1 {
                    coords[start] = cx(T::one());
                    return UnitVec::new(coords).expect("unit");
                }
                let angle = 0.7 + 0.9 * p as f64;
                let c = Complex::new(T::lit(0.5 * angle.cos()), T::lit(0.5 * angle.sin()));
                coords[start + p] = cx(T::one());
                coords[start + (p + 1) % n] = c;
                UnitVec::normalized(coords).expect("nonzero")
            }
            ProjectionStream::RandomBlock { block, seed } => {
                let n = *block;
                let start = j / n * n;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(j as u64);
                let mut coords = DVector::zeros(start + n);
                loop {
                    for i in 0..n {
                        let re: f64 = rng.random_range(-1.0..1.0);
                        let im: f64 = rng.random_range(-1.0..1.0);
                        coords[start + i] = Complex::new(T::lit(re), T::lit(im));
                    }
                    if let Ok(v) = UnitVec::normalized(coords.clone()) {
                        return v;
                    }
                }
            }
        }
    }
}

/// The sub-stream `j ↦ u_{offset + j·stride}`, optionally of finite length.
#[derive(Clone, Copy, Debug)]
pub struct StreamView<'a, T: Real> {
    pub stream: &'a ProjectionStream<T>,
    pub offset: usize,
    pub stride: usize,
    pub len: Card,
}

impl<'a, T: Real> StreamView<'a, T> {
    pub fn whole(stream: &'a ProjectionStream<T>) -> Self {
        StreamView {
            stream,
            offset: 0,
            stride: 1,
            len: stream.len(),
        }
    }

    pub fn base_index(&self, j: usize) -> usize {
        self.offset + j * self.stride
    }

    pub fn available(&self, j: usize) -> bool {
        match self.len {
            Card::Finite(n) => j < n,
            Card::Infinite => true,
        }
    }

    pub fn get(&self, j: usize) -> Result<UnitVec<T>> {
        if !self.available(j) {
            return Err(Error::Precondition(format!("stream has no vector at index {j}")));
        }
        Ok(self.stream.get(self.base_index(j)))
    }

    /// The view shifted by `n` entries.
    pub fn skip(&self, n: usize) -> Self {
        StreamView {
            stream: self.stream,
            offset: self.base_index(n),
            stride: self.stride,
            len: match self.len {
                Card::Finite(m) => Card::Finite(m.saturating_sub(n)),
                Card::Infinite => Card::Infinite,
            },
        }
    }
}
