//! Ford domains, sets of branches and transfer-operator determinants for
//! geometrically finite Fuchsian groups.
//!
//! The library is layered bottom-up: [`moebius`] models PSL(2,R),
//! [`group`] enumerates words and conjugacy classes, [`iso`] and [`ford`]
//! build isometric spheres and the common exterior, [`auxiliary`] adds a
//! parabolic translation to a funnel group, [`branch`] builds and verifies
//! cross sections, and [`transfer`] / [`zeta`] compare Fredholm
//! determinants with truncated Euler products. [`pipeline`] ties the stages
//! together for the `zb` binary.

pub mod auxiliary;
pub mod branch;
pub mod check;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod ford;
pub mod group;
pub mod iso;
pub mod moebius;
pub mod pipeline;
pub mod render;
pub mod spec_file;
pub mod transfer;
pub mod zeta;

pub use group::{GroupPresentation, Word, WordBall};
pub use moebius::{BoundaryInterval, BoundaryPoint, Geodesic, HPoint, Moebius};
