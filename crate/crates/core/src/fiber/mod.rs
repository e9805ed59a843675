//! The fiber eigenproblem `-(c u')' + (c mu^2 - lambda) u = 0` on `(0, H)`
//! with Dirichlet conditions.
//!
//! Piecewise-constant profiles are solved in closed form piece by piece;
//! every other profile goes through the Pruefer phase/amplitude system.

mod eigen;
mod eigenfunction;
mod liouville;
mod pruefer;
mod transfer;

pub use eigen::{eigenvalue, eigenvalue_count, spectrum_in_range, winding};
pub use eigenfunction::{eigenfunction, eigenpair, FiberEigenpair, GridSpec};
pub use liouville::{liouville_transform, LiouvilleTransform};
pub use pruefer::{shoot_pruefer, PruferShot, PruferState};
pub use transfer::{propagate_pc, PcPropagation, PieceTrace, TransferMatrix2x2};

pub(crate) use pruefer::advance_smooth;
pub(crate) use transfer::{rescale_angle, Regime, Segment};
