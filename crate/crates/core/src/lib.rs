//! Metric Ramsey extraction into HST subspaces, and adversary lower bounds for
//! (unfair) metrical task systems and the K-server reduction.

pub mod adversary;
pub mod error;
pub mod hst;
pub mod kserver;
pub mod metric;
pub mod mts;
pub mod oracle;
pub mod probcheck;
pub mod ramsey;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use hst::{HstClass, HstTree};
pub use metric::{ApproxReport, MetricSpace, Norm};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
