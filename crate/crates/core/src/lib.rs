pub mod boundary;
pub mod cli;
pub mod error;
pub mod furman;
pub mod groups;
pub mod horoprod;
pub mod modelcount;
pub mod poly;
pub mod qimaps;
pub mod search;
pub mod spaces;
pub mod spectral;

pub use error::{Error, Result};
