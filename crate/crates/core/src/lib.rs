//! Spectral spatial dynamics for x-periodic travelling waves of the abcd
//! Boussinesq system: parameter regimes, per-mode roots and eigenbases, the
//! Green operator of the hyperbolic part, the conserved energy, and the
//! center-manifold reduction with its y-evolution.
// Negated comparisons reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cubic;
pub mod dd;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod hypgreen;
pub mod manifold;
pub mod modes;
pub mod params;
pub mod series;
pub mod specspace;

pub use error::{Error, Result};
pub use manifold::{BottomVelocity, LPConfig, Manifold, Trajectory};
pub use modes::{ModeClass, ModeTable};
pub use params::{Params, ParamsFile};
pub use specspace::SpectralState;
