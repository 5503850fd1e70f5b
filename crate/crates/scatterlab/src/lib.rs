//! Command-line front end for `scatterlab-core`: a thread-pool executor,
//! JSON/CSV/SVG formats, reference fixtures for local P^2 and the golden
//! verification suites.

pub mod cli;
pub mod exec;
pub mod fixtures;
pub mod formats;
pub mod verify;

pub use exec::Pool;
