//! Real-interval metric domains, sample grids and evaluable selfmaps.
//!
//! Every space handled by the crate is an interval of the real line with the
//! Euclidean metric `d(a, b) = |a - b|`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{self, Preimage};

/// Euclidean distance on the real line.
#[inline]
pub fn distance(a: f64, b: f64) -> f64 {
    (a - b).abs()
}

/// An interval `[lo, hi]`, with each end independently open or closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    lo: f64,
    hi: f64,
    closed_ends: (bool, bool),
}

impl Domain {
    pub fn new(lo: f64, hi: f64, closed_ends: (bool, bool)) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDomain { lo, hi });
        }
        Ok(Self { lo, hi, closed_ends })
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, (true, true))
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn closed_ends(&self) -> (bool, bool) {
        self.closed_ends
    }

    pub fn contains(&self, p: f64) -> bool {
        let above = if self.closed_ends.0 { p >= self.lo } else { p > self.lo };
        let below = if self.closed_ends.1 { p <= self.hi } else { p < self.hi };
        above && below
    }

    pub fn diameter(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    /// The closed interval actually sampled: open ends are pulled inward by a
    /// tiny fraction of the width.
    pub(crate) fn sampling_bounds(&self) -> (f64, f64) {
        let nudge = self.diameter() * f64::powi(2.0, -30);
        let a = if self.closed_ends.0 { self.lo } else { self.lo + nudge };
        let b = if self.closed_ends.1 { self.hi } else { self.hi - nudge };
        (a, b)
    }

    /// `n` equispaced points over the sampling bounds, endpoints included.
    pub(crate) fn linspace(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.sampling_bounds();
        linspace(a, b, n)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.closed_ends.0 { '[' } else { '(' };
        let close = if self.closed_ends.1 { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a + 0.5 * (b - a)],
        _ => {
            let last = (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        b
                    } else {
                        a + (b - a) * (i as f64 / last)
                    }
                })
                .collect()
        }
    }
}

pub type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A selfmap of a real interval, evaluated through a pure closure.
#[derive(Clone)]
pub struct ScalarMap {
    eval: EvalFn,
    inverse: Option<EvalFn>,
    label: String,
    domain: Domain,
    declared_range: Option<Domain>,
}

impl ScalarMap {
    pub fn new<F>(label: impl Into<String>, domain: Domain, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            inverse: None,
            label: label.into(),
            domain,
            declared_range: None,
        }
    }

    pub fn identity(domain: Domain) -> Self {
        Self::new("x", domain, |x| x)
    }

    /// Attach a right inverse used to solve `T(q) = y` without scanning.
    pub fn with_inverse<F>(mut self, inverse: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn with_declared_range(mut self, range: Domain) -> Self {
        self.declared_range = Some(range);
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn inverse(&self) -> Option<&EvalFn> {
        self.inverse.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn declared_range(&self) -> Option<&Domain> {
        self.declared_range.as_ref()
    }

    /// Evaluates on every grid point, failing on non-finite output or on a
    /// value outside the declared range.
    pub fn check_values(&self, grid: &SampleGrid) -> Result<()> {
        for &p in grid.points() {
            let v = self.eval(p);
            if !v.is_finite() {
                return Err(Error::NonFinite { what: self.label.clone(), at: p });
            }
            if let Some(range) = &self.declared_range {
                if !range.contains(v) {
                    return Err(Error::InvalidArgument(format!(
                        "{}({p}) = {v} is outside the declared range {range}",
                        self.label
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarMap")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("declared_range", &self.declared_range)
            .field("has_inverse", &self.inverse.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridStrategy {
    Uniform,
    UniformJitter,
    UserSupplied,
}

/// Sorted sample points of a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    points: Vec<f64>,
    strategy: GridStrategy,
    seed: u64,
}

const DUPLICATE_TOL: f64 = 1e-15;

impl SampleGrid {
    /// Builds a user-supplied grid: points are sorted and near-duplicates
    /// dropped.
    pub fn from_points(domain: &Domain, mut points: Vec<f64>) -> Result<Self> {
        if let Some(&p) = points.iter().find(|p| !domain.contains(**p)) {
            return Err(Error::OutsideDomain(p));
        }
        points.sort_by(f64::total_cmp);
        points.dedup_by(|b, a| (*b - *a).abs() <= DUPLICATE_TOL);
        if points.len() < 2 {
            return Err(Error::GridTooSmall(points.len()));
        }
        Ok(Self { points, strategy: GridStrategy::UserSupplied, seed: 0 })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn strategy(&self) -> GridStrategy {
        self.strategy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Inserts every cell midpoint, halving the spacing.
    pub fn refined(&self) -> Self {
        let mut points = Vec::with_capacity(2 * self.points.len() - 1);
        for w in self.points.windows(2) {
            points.push(w[0]);
            points.push(w[0] + 0.5 * (w[1] - w[0]));
        }
        points.extend(self.points.last());
        points.dedup();
        Self { points, strategy: self.strategy, seed: self.seed }
    }
}

/// `n` points covering `domain`. Closed endpoints are always included and
/// the result is a pure function of its arguments.
pub fn sample_grid(domain: &Domain, n: usize, strategy: GridStrategy, seed: u64) -> Result<SampleGrid> {
    if n < 2 {
        return Err(Error::GridTooSmall(n));
    }
    let mut points = domain.linspace(n);
    match strategy {
        GridStrategy::Uniform => {}
        GridStrategy::UniformJitter => {
            let (a, b) = domain.sampling_bounds();
            let quarter = 0.25 * (b - a) / (n - 1) as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for p in points.iter_mut().take(n - 1).skip(1) {
                *p += rng.gen_range(-quarter..quarter);
            }
        }
        GridStrategy::UserSupplied => {
            return Err(Error::InvalidArgument(
                "user-supplied grids are built with SampleGrid::from_points".into(),
            ))
        }
    }
    Ok(SampleGrid { points, strategy, seed })
}

/// Default number of scan points used to bracket preimages.
pub const DEFAULT_SCAN_RESOLUTION: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    /// True iff every sampled `S(p)` was located in the range of `T`.
    pub holds: bool,
    pub points_checked: usize,
    /// Grid points whose image under `S` has no bracketed preimage under `T`.
    pub missing: Vec<f64>,
    /// Grid points where a sign change of `T - S(p)` turned out to be a jump.
    pub undecided: Vec<f64>,
}

/// Samples the hypothesis `S(M) ⊆ T(M)`: every `S(p)` on the grid must be
/// attained by `T` somewhere on the domain.
pub fn check_range_containment(
    s: &ScalarMap,
    t: &ScalarMap,
    grid: &SampleGrid,
    scan_resolution: usize,
    rf_tol: f64,
) -> Result<ContainmentReport> {
    let mut missing = Vec::new();
    let mut undecided = Vec::new();
    for &p in grid.points() {
        let target = s.eval(p);
        if !target.is_finite() {
            return Err(Error::NonFinite { what: s.label().to_string(), at: p });
        }
        match roots::preimage(t, target, scan_resolution, rf_tol)? {
            Preimage::Found(_) => {}
            Preimage::NotAttained => missing.push(p),
            Preimage::Undecided => undecided.push(p),
        }
    }
    Ok(ContainmentReport {
        holds: missing.is_empty() && undecided.is_empty(),
        points_checked: grid.len(),
        missing,
        undecided,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Domain {
        Domain::closed(0.0, 1.0).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(0.25, 0.75), 0.5);
        assert_eq!(distance(0.3, 0.3), 0.0);
        assert!((distance(2.0 / 3.0, 2.0 / 3.0 + 0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn domain_rejects_inverted_bounds() {
        assert!(Domain::closed(1.0, 1.0).is_err());
        assert!(Domain::closed(2.0, 1.0).is_err());
        assert!(Domain::closed(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn contains_respects_open_ends() {
        let d = Domain::new(0.0, 1.0, (false, true)).unwrap();
        assert!(!d.contains(0.0));
        assert!(d.contains(1.0));
        assert!(d.contains(1e-300));
        assert!(!d.contains(1.0 + 1e-15));
    }

    #[test]
    fn uniform_grids() {
        let g = sample_grid(&unit(), 3, GridStrategy::Uniform, 0).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0]);
        let half = Domain::closed(0.5, 1.0).unwrap();
        let g = sample_grid(&half, 2, GridStrategy::Uniform, 0).unwrap();
        assert_eq!(g.points(), &[0.5, 1.0]);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(matches!(
            sample_grid(&unit(), 1, GridStrategy::Uniform, 0),
            Err(Error::GridTooSmall(1))
        ));
    }

    #[test]
    fn jitter_is_reproducible_and_sorted() {
        let a = sample_grid(&unit(), 5, GridStrategy::UniformJitter, 7).unwrap();
        let b = sample_grid(&unit(), 5, GridStrategy::UniformJitter, 7).unwrap();
        let bits = |g: &SampleGrid| g.points().iter().map(|p| p.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.len(), 5);
        assert!(a.points().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a.points()[0], 0.0);
        assert_eq!(a.points()[4], 1.0);
        let c = sample_grid(&unit(), 5, GridStrategy::UniformJitter, 8).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn open_domain_grid_stays_inside() {
        let d = Domain::new(0.0, 1.0, (false, false)).unwrap();
        let g = sample_grid(&d, 9, GridStrategy::Uniform, 0).unwrap();
        assert!(g.points().iter().all(|p| d.contains(*p)));
    }

    #[test]
    fn user_grid_sorts_and_dedups() {
        let g = SampleGrid::from_points(&unit(), vec![0.5, 0.1, 0.5 + 1e-17, 0.9]).unwrap();
        assert_eq!(g.points(), &[0.1, 0.5, 0.9]);
        assert!(SampleGrid::from_points(&unit(), vec![0.1, 2.0]).is_err());
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = sample_grid(&unit(), 3, GridStrategy::Uniform, 0).unwrap().refined();
        assert_eq!(g.points(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn containment_example_one() {
        let d = unit();
        let s = ScalarMap::new("x/16", d, |x| x / 16.0);
        let t = ScalarMap::new("x/2", d, |x| x / 2.0);
        let grid = sample_grid(&d, 65, GridStrategy::Uniform, 0).unwrap();
        let r = check_range_containment(&s, &t, &grid, DEFAULT_SCAN_RESOLUTION, 1e-12).unwrap();
        assert!(r.holds);
        assert!(r.missing.is_empty() && r.undecided.is_empty());
    }

    #[test]
    fn containment_fails_when_range_is_too_small() {
        let d = unit();
        let s = ScalarMap::identity(d);
        let t = ScalarMap::new("x/2", d, |x| x / 2.0);
        let grid = sample_grid(&d, 65, GridStrategy::Uniform, 0).unwrap();
        let r = check_range_containment(&s, &t, &grid, DEFAULT_SCAN_RESOLUTION, 1e-12).unwrap();
        assert!(!r.holds);
        assert!(r.missing.contains(&1.0));
        assert!(!r.missing.contains(&0.25));
    }

    #[test]
    fn declared_range_is_checked() {
        let d = unit();
        let narrow = Domain::closed(0.0, 0.25).unwrap();
        let grid = sample_grid(&d, 5, GridStrategy::Uniform, 0).unwrap();
        let ok = ScalarMap::new("x/4", d, |x| x / 4.0).with_declared_range(narrow);
        assert!(ok.check_values(&grid).is_ok());
        let bad = ScalarMap::new("x/2", d, |x| x / 2.0).with_declared_range(narrow);
        assert!(bad.check_values(&grid).is_err());
    }
}
