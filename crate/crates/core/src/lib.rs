pub mod classical;
pub mod cpm;
pub mod decoherence;
pub mod error;
pub mod gen;
pub mod locality;
pub mod measurement;
pub mod relcore;
pub mod selfcheck;

pub use error::{Error, Result};
