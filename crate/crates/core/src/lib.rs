pub mod asymptotics;
pub mod calibration;
pub mod cli;
pub mod config;
pub mod consistency;
pub mod error;
pub mod families;
pub mod grid;
pub mod optimize;
pub mod posterior;
pub mod rng;
pub mod selfcheck;

pub use error::{Error, Result};
