//! Exact scattering diagrams, broken lines, theta functions and mirror maps
//! for toric del Pezzo fan pictures.
//!
//! The crate is `no_std` and only needs `alloc`. Parallel work is routed
//! through the [`exec::Executor`] trait so a host can plug in a thread pool.

#![no_std]

extern crate alloc;

pub mod brokenlines;
pub mod exec;
pub mod geom;
pub mod mirrormap;
pub mod rat;
pub mod scattering;
pub mod series;
pub mod surface;

pub use rat::Rat;
pub use series::{Mono, Series, SeriesError};
