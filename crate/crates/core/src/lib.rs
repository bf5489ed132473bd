//! Certify ψ-(α, β, γ)-contraction hypotheses for pairs of selfmaps on real
//! intervals and solve for their point of coincidence and common fixed point.
//!
//! The modules build on each other:
//!
//! * [`metric`]: interval domains, sample grids, evaluable maps;
//! * [`gauges`]: altering distances, integrands and the gauge triple;
//! * [`contraction`]: the contraction inequality and sampled certificates;
//! * [`jungck`]: the Jungck iteration, coincidence/OWC/E.A. probes and
//!   non-Cauchy witnesses;
//! * [`scenario`]: scenario files, the built-in catalog and report files;
//! * [`pipeline`]: the check / certify / solve workflows used by front ends.

pub mod contraction;
pub mod error;
pub mod expr;
pub mod gauges;
pub mod jungck;
pub mod metric;
pub mod pipeline;
pub mod quadrature;
pub mod roots;
pub mod scenario;

pub use error::{Error, Result};
