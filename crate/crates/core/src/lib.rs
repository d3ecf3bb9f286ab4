//! Numerical toolkit for harmonic maps into non-positively curved spaces.
//!
//! The crate is organised around four concrete NPC geometries (Euclidean space,
//! the hyperbolic plane, the symmetric space of positive-definite matrices and
//! metric trees) and the machinery built on top of them:
//!
//! * [`npc`]: the [`Geometry`](npc::Geometry) trait, comparison-inequality
//!   checkers and barycenters.
//! * [`spd`]: exact geometry of `P(n, R)` with a Jacobi eigensolver.
//! * [`isometry`]: classification, translation lengths, Iwasawa
//!   decomposition, decay rays and torus maps.
//! * [`cylinder`]: discrete equivariant harmonic sections on the half
//!   cylinder and their energy diagnostics.
//! * [`bochner`]: finite-difference probes of the flat Bochner identities.
//! * [`report`]: deterministic artifact emission.
//! * [`acceptance`]: the named acceptance checks shared by tests and CLI.

pub mod acceptance;
pub mod bochner;
pub mod cylinder;
pub mod error;
pub mod isometry;
pub mod npc;
pub mod report;
pub mod rng;
pub mod spd;

pub use error::{Error, Result};
pub use isometry::{Classification, Isometry, IsometryDescriptor};
pub use npc::{Geometry, Point, SpaceDescriptor};
