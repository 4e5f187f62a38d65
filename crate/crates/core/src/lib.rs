//! Numerical kernels for manifold-valued L^1 maps on grids: nonlocal
//! double-integral energies with asymptotic means, dyadic piecewise-constant
//! joining of two boundary maps, geodesic-cone smoothing, and the resulting
//! strip / cube / half-space W^{1,1} extensions with their trace checks.
//!
//! Maps are piecewise constant on uniform grids with a constant tail
//! outside a finite window, which keeps every integral over R^d exactly
//! computable up to quadrature of the cutoff shells.

pub mod corpus;
pub mod dyadic;
pub mod energy;
pub mod error;
pub mod grid;
pub mod manifold;
pub mod num;
pub mod slab;
pub mod trace;

pub use error::{Error, Result};
pub use grid::GridMap;
pub use slab::SlabMap;
pub use manifold::{Manifold, Point};
pub use num::Norm;

