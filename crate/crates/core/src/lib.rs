pub mod cli;
pub mod cusp;
pub mod differential;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod polyalg;
pub mod singular_slice;
pub mod surface;

pub use error::{Error, Result};
