pub mod cones;
pub mod curvature;
pub mod eigen;
pub mod error;
pub mod exec;
pub mod flow;
pub mod group_actions;
pub mod lambda2;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
