//! Weight sequences, majorization and the Kadison condition.

mod kadison;
mod majorize;
mod split;
mod weight_seq;

pub use kadison::{kadison_check, KadisonReport};
pub use majorize::{
    elem_check_ii, elem_eta_i, integer_split, majorizes, majorizes_slices, rearrange_desc, sorted_desc,
    MajorizationVerdict,
};
pub use split::{split_mu_lambda, strip01, PositionMap, SplitSeq, Stripped};
pub use weight_seq::{Card, Component, ExtReal, SeqKind, Tail, WeightSeq};
