//! Desktop-grid parameter sweep toolkit.
//!
//! * [`hosts`]: synthetic volunteer-host populations.
//! * [`gridsim`]: discrete-event simulation of a master dispatching jobs to churning hosts.
//! * [`md`]: molecular-dynamics tensile jobs with common neighbor analysis.
//! * [`stats`]: ensemble statistics (fits, KS tests, Pearson-plane moments, bootstrap).
//! * [`sweep`] and [`analyze`]: the local sweep runner and ensemble report pipeline.

pub mod analyze;
pub mod config;
mod csvfmt;
pub mod error;
pub mod gridsim;
pub mod hosts;
pub mod md;
pub mod output;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
