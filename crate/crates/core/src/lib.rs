pub mod cli_io;
pub mod error;
pub mod localization;
pub mod numerics;
pub mod phase_space;
pub mod scenarios;
pub mod weyl;

pub use error::{Error, Result};
