//! Eigenvalues, torsional rigidity and the Blaschke–Santaló style
//! diagram of Dirichlet Laplacians on balls, boxes, products, unions and
//! rasterized planar domains.

// Guards such as `!(x > 0.0)` are written that way on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod diagram;
pub mod exact;
pub mod fd;
pub mod heat;
pub mod quad;
pub mod shapes;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use fd::{GridField, RasterDomain};
pub use shapes::{Method, Shape, SpectralSummary};
pub use specfun::BesselOrder;
