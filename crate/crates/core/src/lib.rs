//! Noise propagation, exact oracles and Monte Carlo for quantum state
//! magnification: a shearing interaction maps a collective spin's J_z onto
//! J_y with gain M, so a detector far noisier than the standard quantum limit
//! can still resolve squeezed-state signals.
//!
//! The analytic modules are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix them to `f64`.

pub mod dicke;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod kerr;
pub mod limits;
pub mod oracle;
pub mod protocol;
pub mod scalar;
pub mod state;
pub mod units;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SpinState = state::SpinGaussianState<f64>;
pub type Apparatus = units::ApparatusParams<f64>;
pub type Db = units::DbValue<f64>;
pub type Dicke = dicke::DickeVector<f64>;
pub type Quadratures = kerr::QuadratureState<f64>;
