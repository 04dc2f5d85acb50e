//! Multi-criteria evaluation of feature-attribution explanation methods.
//!
//! Explanations are scored on fidelity, interpretability, robustness,
//! fairness and completeness. Each raw value in `[0, 1]` maps onto a 1-5
//! rubric, and a domain weight profile combines the five into one score.

pub mod criteria;
pub mod data;
pub mod error;
pub mod explain;
pub mod io;
pub mod metrics;
mod linalg;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod score;

pub use criteria::{Criteria, Criterion, MetricVector};
pub use data::{Attribution, DataKind, Dataset, Instance, Shape};
pub use error::{Error, ErrorClass, Result};
pub use oracle::{Model, Oracle};
pub use rng::{derive_stream, RngSpec, Stream};
