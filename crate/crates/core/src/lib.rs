//! Cheap spanning spheres in complete complexes with random cell costs.
//!
//! The crate builds, verifies and scores triangulated spheres on the vertex
//! set `[n] = {1, ..., n}` under i.i.d. uniform costs, either on top cells or
//! on vertex pairs.

pub mod boltzmann;
pub mod bounds;
pub mod constructions;
pub mod cost;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod lc;
pub mod patcher;
pub mod simplex;
pub mod stats;
pub mod unionfind;
pub mod verify;

pub use constructions::{build_cone_sphere, s_star, sphere_from_cycle, PoleCycleSphere, TourMethod};
pub use cost::{derive_seed, CostModel, QueryLog, Seed, WeightOracle};
pub use error::{Error, Result};
pub use simplex::{PureComplex, Simplex, Vertex};
pub use verify::{verify, Outcome, Reason, SphereVerdict};
