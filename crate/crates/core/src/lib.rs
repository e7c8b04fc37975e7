pub mod bridge;
pub mod carpenter;
pub mod checkers;
pub mod error;
pub mod horn;
pub mod io;
pub mod operators;
pub mod scalar;
pub mod seqkit;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

use num_rational::BigRational;

/// Double-precision sequence.
pub type Seq64 = seqkit::WeightSeq<f64>;
/// Sequence with exact rational entries.
pub type ExactSeq = seqkit::WeightSeq<BigRational>;
pub type Op64 = operators::HermOp<f64>;
pub type Vec64 = operators::UnitVec<f64>;
pub type Decomp64 = operators::RankOneDecomp<f64>;
pub type Stream64 = carpenter::ProjectionStream<f64>;
