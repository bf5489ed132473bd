//! The Jungck iteration `y_n = S x_n = T x_{n+1}` and the probes built on it.
//!
//! Each step solves `T(x_{n+1}) = S(x_n)` for the smallest preimage in
//! domain order (or through a supplied inverse of `T`). The iteration stops
//! once three consecutive step distances `d(y_n, y_{n+1})` fall below the
//! tolerance.

mod cauchy;
mod probes;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use cauchy::{extract_cauchy_witness, CauchyWitness, WitnessIndex};
pub use probes::{
    check_owc, check_property_ea, extract_poc, extract_poc_at, extrapolate_limit, find_coincidence_points,
    uniqueness_probe, Coincidences, EaReport, OwcReport, OwcVerdict, PocExtraction, StartOutcome,
    UniquenessReport, EA_WINDOW,
};

use crate::contraction::ContractionPair;
use crate::error::{Error, Result};
use crate::metric::{distance, DEFAULT_SCAN_RESOLUTION};
use crate::roots::{preimage, Preimage};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_RF_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

/// Consecutive small steps required before convergence is declared.
pub const CONFIRMATION_WINDOW: usize = 3;

/// Tolerances and budgets shared by the iteration and its probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterConfig {
    pub tol: f64,
    pub rf_tol: f64,
    pub max_iters: usize,
    pub scan_resolution: usize,
}

impl Default for IterConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            rf_tol: DEFAULT_RF_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            scan_resolution: DEFAULT_SCAN_RESOLUTION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Converged,
    MaxIters,
    PreimageFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JungckTrace {
    pub x_seq: Vec<f64>,
    pub y_seq: Vec<f64>,
    /// `d(y_n, y_{n+1})`, one entry per completed step.
    pub step_dist: Vec<f64>,
    pub status: TraceStatus,
    /// Estimate of the limit `z` of `(y_n)` when converged.
    pub limit: Option<f64>,
    /// Completed steps.
    pub iterations: usize,
    /// First step of the confirming window.
    pub converged_at: Option<usize>,
    /// Step whose preimage could not be found.
    pub failed_at: Option<usize>,
}

impl JungckTrace {
    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            status: self.status,
            iterations: self.iterations,
            converged_at: self.converged_at,
            failed_at: self.failed_at,
            x0: self.x_seq[0],
            limit: self.limit,
            last_step_dist: self.step_dist.last().copied(),
        }
    }

    /// Writes the trace as CSV with header `n,x_n,y_n,step_dist`. The last
    /// row has an empty `step_dist`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,x_n,y_n,step_dist")?;
        for (n, (x, y)) in self.x_seq.iter().zip(&self.y_seq).enumerate() {
            match self.step_dist.get(n) {
                Some(d) => writeln!(out, "{n},{x},{y},{d}")?,
                None => writeln!(out, "{n},{x},{y},")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub status: TraceStatus,
    pub iterations: usize,
    pub converged_at: Option<usize>,
    pub failed_at: Option<usize>,
    pub x0: f64,
    pub limit: Option<f64>,
    pub last_step_dist: Option<f64>,
}

/// One step: the smallest `x` with `|T(x) - S(x_n)| <= rf_tol`.
pub fn jungck_step(pair: &ContractionPair, x_n: f64, rf_tol: f64, scan_resolution: usize) -> Result<f64> {
    let target = pair.s.eval(x_n);
    if !target.is_finite() {
        return Err(Error::NonFinite { what: pair.s.label().to_string(), at: x_n });
    }
    match preimage(&pair.t, target, scan_resolution, rf_tol)? {
        Preimage::Found(q) => Ok(q),
        Preimage::NotAttained | Preimage::Undecided => Err(Error::PreimageFailed { target, index: None }),
    }
}

/// Runs the iteration from `x0`. Preimage failures end the trace with status
/// `PreimageFailed` and the failing step recorded.
pub fn iterate(pair: &ContractionPair, x0: f64, cfg: &IterConfig) -> Result<JungckTrace> {
    if !pair.domain().contains(x0) {
        return Err(Error::OutsideDomain(x0));
    }
    if !(cfg.tol > 0.0 && cfg.rf_tol > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let mut trace = JungckTrace {
        x_seq: vec![x0],
        y_seq: vec![pair.s.eval(x0)],
        step_dist: Vec::new(),
        status: TraceStatus::MaxIters,
        limit: None,
        iterations: 0,
        converged_at: None,
        failed_at: None,
    };
    let mut small_run = 0;
    for n in 0..cfg.max_iters {
        let x_next = match jungck_step(pair, trace.x_seq[n], cfg.rf_tol, cfg.scan_resolution) {
            Ok(x) => x,
            Err(Error::PreimageFailed { .. }) => {
                trace.status = TraceStatus::PreimageFailed;
                trace.failed_at = Some(n);
                return Ok(trace);
            }
            Err(e) => return Err(e),
        };
        let y_next = pair.s.eval(x_next);
        let d = distance(trace.y_seq[n], y_next);
        trace.x_seq.push(x_next);
        trace.y_seq.push(y_next);
        trace.step_dist.push(d);
        trace.iterations = n + 1;
        small_run = if d < cfg.tol { small_run + 1 } else { 0 };
        if small_run == CONFIRMATION_WINDOW {
            trace.status = TraceStatus::Converged;
            trace.converged_at = Some(n + 1 - CONFIRMATION_WINDOW);
            trace.limit = Some(y_next);
            return Ok(trace);
        }
    }
    Ok(trace)
}
