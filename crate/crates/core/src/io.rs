//! JSON formats for sequences, operators, decompositions and projection streams.
//!
//! Numbers may be JSON numbers or strings; strings let exact scalars take
//! values such as `"1/3"`. Floats are written as shortest round-trip decimals.

use nalgebra::{Complex, DVector};
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::carpenter::ProjectionStream;
use crate::error::{Error, Result};
use crate::operators::{CMatrix, HermOp, RankOneDecomp, UnitVec};
use crate::scalar::{Real, Scalar};
use crate::seqkit::{Component, Tail, WeightSeq};

fn parse_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Number(Number),
    Text(String),
}

impl Num {
    pub fn get<S: Scalar>(&self) -> Result<S> {
        let text = match self {
            Num::Number(n) => n.to_string(),
            Num::Text(s) => s.clone(),
        };
        S::parse_decimal(&text).ok_or_else(|| Error::Parse(format!("not a number: {text:?}")))
    }

    pub fn of<S: Scalar>(x: &S) -> Num {
        if S::TOL_SCALE == 0.0 {
            return Num::Text(x.to_string());
        }
        match Number::from_f64(x.to_f64_lossy()) {
            Some(n) => Num::Number(n),
            None => Num::Text(x.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentFile {
    pub offset: Num,
    pub first: Num,
    pub ratio: Num,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SeqFile {
    Finite {
        values: Vec<Num>,
    },
    FinitelySupported {
        values: Vec<Num>,
    },
    GeometricTail {
        #[serde(default)]
        head: Vec<Num>,
        first: Num,
        ratio: Num,
    },
    ConstantTail {
        #[serde(default)]
        head: Vec<Num>,
        value: Num,
    },
    CyclicTail {
        #[serde(default)]
        head: Vec<Num>,
        components: Vec<ComponentFile>,
    },
}

fn nums<S: Scalar>(v: &[Num]) -> Result<Vec<S>> {
    v.iter().map(Num::get).collect()
}

impl SeqFile {
    pub fn to_seq<S: Scalar>(&self) -> Result<WeightSeq<S>> {
        match self {
            SeqFile::Finite { values } => WeightSeq::finite(nums(values)?),
            SeqFile::FinitelySupported { values } => WeightSeq::finitely_supported(nums(values)?),
            SeqFile::GeometricTail { head, first, ratio } => {
                WeightSeq::geometric_tail(nums(head)?, first.get()?, ratio.get()?)
            }
            SeqFile::ConstantTail { head, value } => WeightSeq::constant_tail(nums(head)?, value.get()?),
            SeqFile::CyclicTail { head, components } => {
                let comps = components
                    .iter()
                    .map(|c| Component::new(c.offset.get()?, c.first.get()?, c.ratio.get()?))
                    .collect::<Result<Vec<_>>>()?;
                WeightSeq::cyclic_tail(nums(head)?, comps)
            }
        }
    }

    pub fn from_seq<S: Scalar>(seq: &WeightSeq<S>) -> SeqFile {
        let head: Vec<Num> = seq.head().iter().map(Num::of).collect();
        match seq.tail() {
            Tail::Finite => SeqFile::Finite { values: head },
            Tail::Zeros => SeqFile::FinitelySupported { values: head },
            Tail::Cyclic(c) if c.len() == 1 && c[0].offset.is_zero() => SeqFile::GeometricTail {
                head,
                first: Num::of(&c[0].first),
                ratio: Num::of(&c[0].ratio),
            },
            Tail::Cyclic(c) if c.len() == 1 && c[0].first.is_zero() => SeqFile::ConstantTail {
                head,
                value: Num::of(&c[0].offset),
            },
            Tail::Cyclic(c) => SeqFile::CyclicTail {
                head,
                components: c
                    .iter()
                    .map(|c| ComponentFile {
                        offset: Num::of(&c.offset),
                        first: Num::of(&c.first),
                        ratio: Num::of(&c.ratio),
                    })
                    .collect(),
            },
        }
    }
}

pub fn parse_sequence<S: Scalar>(text: &str) -> Result<WeightSeq<S>> {
    serde_json::from_str::<SeqFile>(text).map_err(parse_err)?.to_seq()
}

pub fn sequence_to_json<S: Scalar>(seq: &WeightSeq<S>) -> String {
    to_json(&SeqFile::from_seq(seq))
}

/// A matrix entry: a real number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

impl Entry {
    pub fn get<T: Real>(self) -> Complex<T> {
        match self {
            Entry::Complex([re, im]) => Complex::new(T::lit(re), T::lit(im)),
            Entry::Real(re) => Complex::new(T::lit(re), T::zero()),
        }
    }

    pub fn of<T: Real>(z: &Complex<T>) -> Entry {
        Entry::Complex([z.re.to_f64_lossy(), z.im.to_f64_lossy()])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorFile {
    /// Row-major entries.
    Dense { dim: usize, entries: Vec<Entry> },
    Diag { diag: Vec<f64> },
}

impl OperatorFile {
    pub fn to_op<T: Real>(&self) -> Result<HermOp<T>> {
        match self {
            OperatorFile::Diag { diag } => Ok(HermOp::from_diag(&diag.iter().map(|&x| T::lit(x)).collect::<Vec<_>>())),
            OperatorFile::Dense { dim, entries } => {
                if entries.len() != dim * dim {
                    return Err(Error::Parse(format!(
                        "operator of dimension {dim} needs {} entries, found {}",
                        dim * dim,
                        entries.len()
                    )));
                }
                HermOp::new(CMatrix::from_fn(*dim, *dim, |i, j| entries[i * dim + j].get()))
            }
        }
    }

    pub fn from_op<T: Real>(a: &HermOp<T>) -> OperatorFile {
        let n = a.dim();
        let m = a.matrix();
        OperatorFile::Dense {
            dim: n,
            entries: (0..n * n).map(|k| Entry::of(&m[(k / n, k % n)])).collect(),
        }
    }
}

pub fn parse_operator<T: Real>(text: &str) -> Result<HermOp<T>> {
    serde_json::from_str::<OperatorFile>(text).map_err(parse_err)?.to_op()
}

pub fn operator_to_json<T: Real>(a: &HermOp<T>) -> String {
    to_json(&OperatorFile::from_op(a))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermFile {
    pub weight: f64,
    pub vector: Vec<Entry>,
    /// Index of the weight in the source sequence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompFile {
    pub dim: usize,
    pub terms: Vec<TermFile>,
}

fn vector<T: Real>(entries: &[Entry]) -> Result<UnitVec<T>> {
    UnitVec::new(DVector::from_iterator(entries.len(), entries.iter().map(|e| e.get())))
}

impl DecompFile {
    pub fn to_decomp<T: Real>(&self) -> Result<RankOneDecomp<T>> {
        let mut d = RankOneDecomp::new(self.dim);
        for t in &self.terms {
            if t.vector.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: t.vector.len(),
                });
            }
            d.push(T::lit(t.weight), vector(&t.vector)?)?;
        }
        Ok(d)
    }

    pub fn from_decomp<T: Real>(d: &RankOneDecomp<T>, positions: Option<&[usize]>) -> DecompFile {
        DecompFile {
            dim: d.dim(),
            terms: d
                .terms()
                .iter()
                .enumerate()
                .map(|(j, (w, v))| TermFile {
                    weight: w.to_f64_lossy(),
                    vector: v.coords().iter().map(Entry::of).collect(),
                    position: positions.map(|p| p[j]),
                })
                .collect(),
        }
    }
}

pub fn parse_decomp<T: Real>(text: &str) -> Result<RankOneDecomp<T>> {
    serde_json::from_str::<DecompFile>(text).map_err(parse_err)?.to_decomp()
}

pub fn decomp_to_json<T: Real>(d: &RankOneDecomp<T>, positions: Option<&[usize]>) -> String {
    to_json(&DecompFile::from_decomp(d, positions))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StreamFile {
    OrthonormalBasis,
    Explicit {
        vectors: Vec<Vec<Entry>>,
    },
    BlockOverlap {
        block: usize,
    },
    /// Without a seed, the caller's default applies.
    RandomBlock {
        block: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl StreamFile {
    pub fn to_stream<T: Real>(&self, default_seed: u64) -> Result<ProjectionStream<T>> {
        let s = match self {
            StreamFile::OrthonormalBasis => ProjectionStream::OrthonormalBasis,
            StreamFile::Explicit { vectors } => {
                ProjectionStream::Explicit(vectors.iter().map(|v| vector(v)).collect::<Result<_>>()?)
            }
            StreamFile::BlockOverlap { block } => ProjectionStream::BlockOverlap { block: *block },
            StreamFile::RandomBlock { block, seed } => ProjectionStream::RandomBlock {
                block: *block,
                seed: seed.unwrap_or(default_seed),
            },
        };
        s.validate()?;
        Ok(s)
    }
}

pub fn parse_stream<T: Real>(text: &str, default_seed: u64) -> Result<ProjectionStream<T>> {
    serde_json::from_str::<StreamFile>(text).map_err(parse_err)?.to_stream(default_seed)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<V: Serialize>(v: &V) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Parses arbitrary JSON, mapping failures to [`Error::Parse`].
pub fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(parse_err)
}
