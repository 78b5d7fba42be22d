//! Transversal structures on essentially 4-connected toroidal triangulations.
//!
//! The crate implements balanced 4-orientations of the angle map, their
//! distributive lattice, the bijection with unicellular mobiles, a binary
//! codec built on ternary trees, and the exact counting pipeline for the
//! sequence 0, 1, 6, 40, 268, 1801, 12120, ...

// index loops here usually walk several parallel arrays at once
#![allow(clippy::needless_range_loop)]

pub mod angle;
pub mod census;
pub mod codec;
pub mod fixtures;
pub mod lattice;
pub mod map;
pub mod mobile;
pub mod series;
pub mod transversal;

pub use map::{CycleWalk, DartId, EdgeId, FaceId, ToroidalMap, VertexId};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid walk: {0}")]
    InvalidWalk(String),
    #[error("input is not a triangulation")]
    NotTriangulation,
    #[error("cannot contract a loop")]
    LoopContraction,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("cover window too small: {0}")]
    CoverWindow(String),
    #[error("not a 4-orientation: {0}")]
    NotFourOrientation(String),
    #[error("labeling inconsistency: {0}")]
    Labeling(String),
    #[error("transversal structure local property fails at vertex {0}")]
    LocalProperty(usize),
    #[error("mobile: {0}")]
    Mobile(String),
    #[error("codec: {0}")]
    Codec(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("internal invariant violation: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
