use serde::{Deserialize, Serialize};

use super::{iterate, IterConfig, JungckTrace, TraceStatus};
use crate::contraction::ContractionPair;
use crate::error::{Error, Result};
use crate::metric::{distance, SampleGrid};
use crate::roots::{locate_zeros, preimage, Preimage};

/// Tail length inspected by the E.A. probe.
pub const EA_WINDOW: usize = 5;

const EA_MIN_TERMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PocExtraction {
    /// The approximate limit the extraction started from.
    pub z: f64,
    /// Smallest solution of `T(u) = z`, if any.
    pub u: Option<f64>,
    /// `z` when `|S(u) - z| <= tol`.
    pub poc: Option<f64>,
    pub su_residual: Option<f64>,
    pub tu_residual: Option<f64>,
}

/// Solves `T(u) = z` and publishes `z` as the point of coincidence when
/// `S(u)` lands within `tol` of it.
pub fn extract_poc_at(pair: &ContractionPair, z: f64, rf_tol: f64, tol: f64, scan_resolution: usize) -> Result<PocExtraction> {
    let mut out = PocExtraction { z, u: None, poc: None, su_residual: None, tu_residual: None };
    if let Preimage::Found(u) = preimage(&pair.t, z, scan_resolution, rf_tol)? {
        let su = distance(pair.s.eval(u), z);
        let tu = distance(pair.t.eval(u), z);
        out.u = Some(u);
        out.su_residual = Some(su);
        out.tu_residual = Some(tu);
        if su <= tol && tu <= tol {
            out.poc = Some(z);
        }
    }
    Ok(out)
}

/// [`extract_poc_at`] applied to the limit of a converged trace.
pub fn extract_poc(pair: &ContractionPair, trace: &JungckTrace, rf_tol: f64, tol: f64, scan_resolution: usize) -> Result<PocExtraction> {
    match (trace.status, trace.limit) {
        (TraceStatus::Converged, Some(z)) => extract_poc_at(pair, z, rf_tol, tol, scan_resolution),
        _ => Err(Error::InvalidArgument("trace has not converged".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coincidences {
    Points(Vec<f64>),
    /// `|S - T|` is below tolerance on the whole grid.
    IdenticalMaps,
}

impl Coincidences {
    pub fn points(&self) -> &[f64] {
        match self {
            Coincidences::Points(p) => p,
            Coincidences::IdenticalMaps => &[],
        }
    }
}

/// Approximates `C(S, T)`, the zeros of `x ↦ S(x) - T(x)` on the grid.
pub fn find_coincidence_points(pair: &ContractionPair, grid: &SampleGrid, rf_tol: f64) -> Result<Coincidences> {
    let g = |x: f64| pair.s.eval(x) - pair.t.eval(x);
    if grid.points().iter().all(|&x| g(x).abs() <= rf_tol) {
        return Ok(Coincidences::IdenticalMaps);
    }
    let scan = locate_zeros(g, grid.points(), rf_tol)?;
    Ok(Coincidences::Points(scan.roots))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OwcVerdict {
    Holds,
    Fails,
    NoCpFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OwcReport {
    pub verdict: OwcVerdict,
    /// The coincidence point where `S` and `T` commute, or the one with the
    /// smallest commutator when none does.
    pub witness: Option<f64>,
    /// `|S(T(w)) - T(S(w))|` at the witness.
    pub commutator: Option<f64>,
}

/// Occasional weak compatibility: `S` and `T` commute at some coincidence point.
pub fn check_owc(pair: &ContractionPair, cps: &[f64], tol: f64) -> OwcReport {
    let mut best: Option<(f64, f64)> = None;
    for &cp in cps {
        let c = distance(pair.s.eval(pair.t.eval(cp)), pair.t.eval(pair.s.eval(cp)));
        if c <= tol {
            return OwcReport { verdict: OwcVerdict::Holds, witness: Some(cp), commutator: Some(c) };
        }
        if best.is_none_or(|(_, b)| c < b) {
            best = Some((cp, c));
        }
    }
    match best {
        None => OwcReport { verdict: OwcVerdict::NoCpFound, witness: None, commutator: None },
        Some((cp, c)) => OwcReport { verdict: OwcVerdict::Fails, witness: Some(cp), commutator: Some(c) },
    }
}

/// Limit estimate for a slowly converging tail.
///
/// Uses the Levin u-transform of order 2 on the last four terms, which is
/// exact (up to rounding) for tails of the form `L + c/(n + a)` and `L + c q^n`. Falls back to
/// the last term when the tail is flat or the transform breaks down.
pub fn extrapolate_limit(seq: &[f64]) -> f64 {
    const K: usize = 2;
    let last = *seq.last().expect("nonempty sequence");
    if seq.len() < K + 2 {
        return last;
    }
    let start = seq.len() - (K + 1);
    let scale = last.abs().max(1.0);
    let mut num = 0.0;
    let mut den = 0.0;
    let binom = [1.0, 2.0, 1.0];
    for j in 0..=K {
        let m = start + j;
        let a = seq[m] - seq[m - 1];
        if a.abs() <= 1e-15 * scale {
            return last;
        }
        let omega = (m as f64 + 1.0) * a;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * binom[j] * ((start + j + 1) as f64 / (start + K + 1) as f64).powi(K as i32 - 1) / omega;
        num += w * (seq[m] - last);
        den += w;
    }
    let estimate = last + num / den;
    if estimate.is_finite() {
        estimate
    } else {
        last
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EaReport {
    pub holds: bool,
    /// Common limit `t` of `(S x_n)` and `(T x_n)`.
    pub limit_estimate: Option<f64>,
    pub s_limit: f64,
    pub t_limit: f64,
    /// Largest successive gap over the last [`EA_WINDOW`] terms.
    pub s_tail_gap: f64,
    pub t_tail_gap: f64,
    pub terms: usize,
}

fn tail_gap(values: &[f64]) -> f64 {
    values[values.len() - EA_WINDOW - 1..]
        .windows(2)
        .map(|w| distance(w[0], w[1]))
        .fold(0.0, f64::max)
}

/// Property (E.A.) along a candidate sequence: both image tails settle and
/// their limit estimates agree within `10·tol`.
pub fn check_property_ea(pair: &ContractionPair, seq: &[f64], tol: f64) -> Result<EaReport> {
    if seq.len() < EA_MIN_TERMS {
        return Err(Error::InvalidArgument(format!(
            "E.A. probe needs at least {EA_MIN_TERMS} terms, got {}",
            seq.len()
        )));
    }
    if let Some(&x) = seq.iter().find(|x| !pair.domain().contains(**x)) {
        return Err(Error::OutsideDomain(x));
    }
    let s_vals: Vec<f64> = seq.iter().map(|&x| pair.s.eval(x)).collect();
    let t_vals: Vec<f64> = seq.iter().map(|&x| pair.t.eval(x)).collect();
    let s_tail_gap = tail_gap(&s_vals);
    let t_tail_gap = tail_gap(&t_vals);
    let s_limit = extrapolate_limit(&s_vals);
    let t_limit = extrapolate_limit(&t_vals);
    let holds = s_tail_gap < tol && t_tail_gap < tol && distance(s_limit, t_limit) <= 10.0 * tol;
    Ok(EaReport {
        holds,
        limit_estimate: holds.then_some(0.5 * (s_limit + t_limit)),
        s_limit,
        t_limit,
        s_tail_gap,
        t_tail_gap,
        terms: seq.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: f64,
    pub status: TraceStatus,
    pub limit: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub all_agree: bool,
    pub limits: Vec<f64>,
    /// Largest pairwise distance between converged limits.
    pub spread: f64,
    pub converged: usize,
    pub outcomes: Vec<StartOutcome>,
}

/// Runs the iteration from every start; converged limits must agree within
/// `10·tol` of the first one. Failed starts are reported, not fatal.
pub fn uniqueness_probe(pair: &ContractionPair, starts: &[f64], cfg: &IterConfig) -> Result<UniquenessReport> {
    if starts.len() < 2 {
        return Err(Error::InvalidArgument("uniqueness probe needs at least 2 starts".into()));
    }
    let mut outcomes = Vec::with_capacity(starts.len());
    for &start in starts {
        let trace = iterate(pair, start, cfg)?;
        outcomes.push(StartOutcome { start, status: trace.status, limit: trace.limit, iterations: trace.iterations });
    }
    let limits: Vec<f64> = outcomes.iter().filter_map(|o| o.limit).collect();
    let spread = match (
        limits.iter().copied().reduce(f64::min),
        limits.iter().copied().reduce(f64::max),
    ) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    };
    let all_agree = !limits.is_empty() && limits.iter().all(|l| distance(*l, limits[0]) <= 10.0 * cfg.tol);
    Ok(UniquenessReport { all_agree, converged: limits.len(), limits, spread, outcomes })
}
