use thiserror::Error;

use crate::simplex::Simplex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {0} appears twice in a simplex")]
    RepeatedVertex(u32),
    #[error("vertex id 0 is reserved; ids start at 1")]
    ZeroVertex,
    #[error("simplex has {0} vertices, more than the supported maximum")]
    TooManyVertices(usize),
    #[error("facet {facet} lies outside the vertex range 1..={n}")]
    VertexOutOfRange { facet: Simplex, n: u32 },
    #[error("facet {facet} does not have {expected} vertices")]
    WrongFacetSize { facet: Simplex, expected: usize },
    #[error("facet {0} listed twice")]
    DuplicateFacet(Simplex),
    #[error("cone vertex {0} already belongs to the complex")]
    ConeVertexClash(u32),
    #[error("dimension {0} is not supported here")]
    UnsupportedDimension(usize),
    #[error("simplex {simplex} does not match the {model} cost model")]
    WrongModel { simplex: Simplex, model: String },
    #[error("need at least {needed} vertices, got {got}")]
    TooFewVertices { needed: u32, got: u32 },
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),
    #[error("exact tour search supports at most {limit} cities, got {cities}")]
    TooLargeForExact { cities: usize, limit: usize },
    #[error("instance too small: {0}")]
    TooSmall(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("ridge {0} is not on the boundary")]
    RidgeNotOnBoundary(Simplex),
    #[error("ridges {0} and {1} do not share a codimension-one face")]
    RidgesNotAdjacent(Simplex, Simplex),
    #[error("move would degenerate the complex: {0}")]
    WouldDegenerate(String),
    #[error("invalid facet count {0}: must be even and at least 4")]
    InvalidFacetCount(usize),
    #[error("sampling failed after {0} attempts")]
    SamplingFailed(usize),
    #[error("no separator found: {0}")]
    NoSeparatorFound(String),
    #[error("witness complex is not a 2-sphere: {0}")]
    WitnessNotSphere(String),
    #[error("partial complex is not contained in the witness sphere")]
    HNotSubcomplex,
    #[error("nothing to patch: the witness adds no facets")]
    EmptyPatch,
    #[error("{0} is not an edge of the complex")]
    NotAnEdge(Simplex),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("patching failed: {0}")]
    PatchFailed(String),
}
