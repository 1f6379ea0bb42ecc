pub mod blur;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod filter;
pub mod frame;
pub mod io;
pub mod resample;
pub mod seed;

pub use error::{Error, Result};
pub mod degrade;
pub mod flow;
pub mod mask;
pub mod metrics;
