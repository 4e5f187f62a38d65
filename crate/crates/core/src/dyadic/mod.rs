//! The dyadic-cube construction pipeline: E_k projection, level schedule,
//! piecewise-constant BV joining of two boundary maps, geodesic-cone
//! smoothing and the strip / cube / half-space extensions built from it.

mod bv;
mod extend;
mod lattice;
mod projector;
mod schedule;
mod smooth;

pub use bv::{
    build_bv_extension, jump_energy, BvExtension, FaceClass, FaceSmoothing, JumpEnergy, JumpFace,
    Layer,
};
pub use extend::{
    cube_extension, halfspace_extension, strip_extension, CubeBoundary, CubeReport,
    HalfspaceReport, StripExtension, StripParams, StripReport,
};
pub use lattice::DyadicLattice;
pub use projector::{project_ek, projection_l1_defect};
pub use schedule::{gamma_energy, select_schedule, DyadicSchedule, LevelCert};
pub use smooth::{cone_value, smooth_extension};
