pub mod cli;
pub mod covering;
pub mod error;
pub mod exec;
pub mod io;
pub mod measure;
pub mod metric;
pub mod report;
pub mod wbcp;

pub use error::{Error, Result};
