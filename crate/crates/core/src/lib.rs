//! Symmetry-driven abstraction of finite integer windows.
//!
//! Transforms act on points of `Z^n` (or on a finite set through
//! permutation tables). Each subset of a generator set induces the orbit
//! partition of a window; the family of all such partitions forms a lattice
//! of abstractions that can be explored, related and fit to data.

pub mod affine_id;
pub mod engine;
pub mod error;
pub mod generators;
pub mod infolattice;
pub mod lattice;
pub mod matrix;
pub mod music;
pub mod partition;
pub mod space;
pub mod transform;
pub mod unionfind;

pub use error::{Error, Result};
pub use generators::{is_minimal_generating_set, standard_generators, Generator, GeneratorSet};
pub use matrix::IntMatrix;
pub use partition::{MeetStep, Partition, Relation};
pub use space::{HypercubeWindow, Point};
pub use transform::{AffineTransform, Family, TableTransform, Transform, TransformKind};
pub use unionfind::UnionFind;
