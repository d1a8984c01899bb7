//! Rayleigh-equation machinery for linear inviscid damping and vorticity
//! depletion of symmetric shear flows in a channel.
//!
//! The pipeline runs bottom-up: [`profiles`] fixes the base flow, [`rayleigh`]
//! builds the regular homogeneous solution, [`singular`] and [`spectral`]
//! evaluate the principal-value quantities, [`kernels`] and [`evolution`]
//! assemble the damping kernels and the stream function, and [`oracle`] is an
//! independent matrix discretization used to check all of it.

pub mod evolution;
pub mod funcs;
pub mod interp;
pub mod kernels;
pub mod oracle;
pub mod profiles;
pub mod quad;
pub mod rayleigh;
pub mod singular;
pub mod spectral;

pub type C64 = num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
