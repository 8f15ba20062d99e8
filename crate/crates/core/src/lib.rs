pub mod charfn;
pub mod dilation;
pub mod error;
pub mod intertwiner;
pub mod lifting;
pub mod ncsystem;
pub mod numkernel;
pub mod report;
pub mod rowtuple;
pub mod scattering;
pub mod suite;
pub mod transfer;
pub mod words;

pub use error::{Error, Result};
