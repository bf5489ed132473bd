//! Altering distances, integrands and the gauge triple `(α, β, γ)`, with
//! sampled checkers for the axioms each must satisfy.
//!
//! Every checker is evidence at sample resolution: limits superior are probed
//! along a fixed ladder of right offsets and continuity is probed by watching
//! the oscillation shrink under grid refinement.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{linspace, SampleGrid};
use crate::quadrature;

/// Margin applied to every strict `< 1` comparison.
pub const STRICT_MARGIN: f64 = 1e-12;

/// Tolerance for `ψ(0) = 0`.
pub const ZERO_TOL: f64 = 1e-12;

/// Default right-approach offsets `1e-1, 1e-2, …, 1e-8`.
pub const DEFAULT_OFFSETS: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

/// Default number of dyadic refinements used for the continuity probe.
pub const DEFAULT_REFINE_LEVELS: usize = 3;

/// Smallest integral over `[0, ε]` counted as positive.
pub const PHI_POSITIVE_FLOOR: f64 = 1e-14;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Integrand `φ` for the integral-type contraction.
#[derive(Clone)]
pub struct IntegrandPhi {
    phi: RealFn,
    label: String,
}

impl IntegrandPhi {
    pub fn new<F>(label: impl Into<String>, phi: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { phi: Arc::new(phi), label: label.into() }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.phi)(t)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for IntegrandPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegrandPhi").field("label", &self.label).finish()
    }
}

#[derive(Clone)]
enum PsiKind {
    Direct(RealFn),
    Integral { phi: IntegrandPhi, tol: f64 },
    Composed { outer: Box<AlteringDistance>, inner: Box<AlteringDistance> },
}

/// A candidate altering distance `ψ`.
#[derive(Clone)]
pub struct AlteringDistance {
    kind: PsiKind,
    label: String,
}

impl AlteringDistance {
    pub fn new<F>(label: impl Into<String>, psi: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { kind: PsiKind::Direct(Arc::new(psi)), label: label.into() }
    }

    pub fn identity() -> Self {
        Self::new("t", |t| t)
    }

    pub fn square() -> Self {
        Self::new("t^2", |t| t * t)
    }

    /// `t ↦ outer(inner(t))`.
    pub fn compose(outer: &AlteringDistance, inner: &AlteringDistance) -> Self {
        Self {
            label: format!("{} ∘ {}", outer.label, inner.label),
            kind: PsiKind::Composed {
                outer: Box::new(outer.clone()),
                inner: Box::new(inner.clone()),
            },
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates `ψ(t)`, surfacing quadrature failures.
    pub fn try_eval(&self, t: f64) -> Result<f64> {
        match &self.kind {
            PsiKind::Direct(f) => Ok(f(t)),
            PsiKind::Integral { phi, tol } => {
                if t == 0.0 {
                    Ok(0.0)
                } else {
                    quadrature::integrate(|s| phi.eval(s), 0.0, t, *tol)
                        .map_err(|_| Error::Quadrature { s: t })
                }
            }
            PsiKind::Composed { outer, inner } => outer.try_eval(inner.try_eval(t)?),
        }
    }

    /// Like [`try_eval`](Self::try_eval) but maps failures to NaN.
    pub fn eval(&self, t: f64) -> f64 {
        self.try_eval(t).unwrap_or(f64::NAN)
    }
}

impl fmt::Debug for AlteringDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlteringDistance").field("label", &self.label).finish()
    }
}

/// `ψ₀(s) = ∫₀ˢ φ(t) dt`, evaluated by adaptive quadrature with absolute
/// error at most `quadrature_tol`.
pub fn compose_integral(phi: &IntegrandPhi, quadrature_tol: f64) -> Result<AlteringDistance> {
    if !(quadrature_tol > 0.0) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
    }
    Ok(AlteringDistance {
        label: format!("∫₀ˢ {}", phi.label),
        kind: PsiKind::Integral { phi: phi.clone(), tol: quadrature_tol },
    })
}

/// The parameter functions `α, β, γ : [0, ∞) → [0, 1)`.
#[derive(Clone)]
pub struct GaugeTriple {
    alpha: RealFn,
    beta: RealFn,
    gamma: RealFn,
    label: String,
}

impl GaugeTriple {
    pub fn new<A, B, C>(label: impl Into<String>, alpha: A, beta: B, gamma: C) -> Self
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            alpha: Arc::new(alpha),
            beta: Arc::new(beta),
            gamma: Arc::new(gamma),
            label: label.into(),
        }
    }

    pub fn constant(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self::new(
            format!("α={alpha}, β={beta}, γ={gamma}"),
            move |_| alpha,
            move |_| beta,
            move |_| gamma,
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn alpha(&self, t: f64) -> f64 {
        (self.alpha)(t)
    }

    #[inline]
    pub fn beta(&self, t: f64) -> f64 {
        (self.beta)(t)
    }

    #[inline]
    pub fn gamma(&self, t: f64) -> f64 {
        (self.gamma)(t)
    }

    /// All three values at `t`, each checked against the codomain `[0, 1)`.
    pub fn checked(&self, t: f64) -> Result<(f64, f64, f64)> {
        let check = |which: &'static str, value: f64| {
            if value.is_finite() && (0.0..1.0).contains(&value) {
                Ok(value)
            } else {
                Err(Error::GaugeCodomain { which, t, value })
            }
        };
        Ok((
            check("alpha", self.alpha(t))?,
            check("beta", self.beta(t))?,
            check("gamma", self.gamma(t))?,
        ))
    }
}

impl fmt::Debug for GaugeTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeTriple").field("label", &self.label).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inversion {
    pub t0: f64,
    pub t1: f64,
    pub v0: f64,
    pub v1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlteringDistanceReport {
    pub psi1: bool,
    pub psi2: bool,
    pub psi3: bool,
    pub psi1_witness: Option<PointValue>,
    pub psi2_witness: Option<Inversion>,
    /// Largest jump between neighbouring samples, one entry per grid level.
    pub moduli: Vec<f64>,
}

impl AlteringDistanceReport {
    pub fn passed(&self) -> bool {
        self.psi1 && self.psi2 && self.psi3
    }
}

fn psi_values(ad: &AlteringDistance, points: &[f64]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|&t| {
            let v = ad.try_eval(t)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { what: format!("psi = {}", ad.label()), at: t })
            }
        })
        .collect()
}

/// Factor by which the sampled modulus must shrink per halving of the spacing.
/// A jump keeps the modulus near its height; Hölder functions with exponent
/// above 0.15 shrink faster than this.
pub const MODULUS_SHRINK: f64 = 0.9;

fn oscillation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

/// Checks the three altering-distance axioms on `grid` (a grid of `[0, t_max]`).
pub fn check_altering_distance(
    ad: &AlteringDistance,
    grid: &SampleGrid,
    refine_levels: usize,
) -> Result<AlteringDistanceReport> {
    if refine_levels == 0 {
        return Err(Error::InvalidArgument("refine_levels must be positive".into()));
    }
    if let Some(&t) = grid.points().iter().find(|t| **t < 0.0) {
        return Err(Error::OutsideDomain(t));
    }
    let points = grid.points();
    let values = psi_values(ad, points)?;

    let at_zero = ad.try_eval(0.0)?;
    if !at_zero.is_finite() {
        return Err(Error::NonFinite { what: format!("psi = {}", ad.label()), at: 0.0 });
    }
    let psi1_witness = if at_zero.abs() > ZERO_TOL {
        Some(PointValue { t: 0.0, value: at_zero })
    } else {
        points
            .iter()
            .zip(&values)
            .find(|(t, v)| **t > 0.0 && **v <= 0.0)
            .map(|(&t, &value)| PointValue { t, value })
    };

    let psi2_witness = points.windows(2).zip(values.windows(2)).find_map(|(t, v)| {
        (v[1] < v[0]).then(|| Inversion { t0: t[0], t1: t[1], v0: v[0], v1: v[1] })
    });

    let mut moduli = vec![oscillation(&values)];
    let mut level = grid.clone();
    for _ in 0..refine_levels {
        level = level.refined();
        moduli.push(oscillation(&psi_values(ad, level.points())?));
    }
    let psi3 = moduli.windows(2).all(|w| w[1] <= MODULUS_SHRINK * w[0] || w[1] <= ZERO_TOL);

    Ok(AlteringDistanceReport {
        psi1: psi1_witness.is_none(),
        psi2: psi2_witness.is_none(),
        psi3,
        psi1_witness,
        psi2_witness,
        moduli,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioWitness {
    pub t: f64,
    pub s: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeReport {
    pub sum_ok: bool,
    pub gamma0_ok: bool,
    pub ratio_ok: bool,
    pub points_checked: usize,
    pub max_sum: f64,
    /// Grid points where `α + β + γ ≥ 1`.
    pub sum_violations: usize,
    pub sum_witness: Option<PointValue>,
    /// Largest `γ(h)` over the approach offsets.
    pub gamma0_sup: f64,
    pub gamma0_margin: f64,
    /// Supremum of `(α + β)/(1 − γ)` over all probed `t + h`.
    pub max_ratio: f64,
    pub ratio_margin: f64,
    pub ratio_witness: Option<RatioWitness>,
}

impl GaugeReport {
    pub fn passed(&self) -> bool {
        self.sum_ok && self.gamma0_ok && self.ratio_ok
    }
}

/// Samples the side conditions on `(α, β, γ)`: pointwise sum below one, right
/// limsup of `γ` at zero below one, and right limsup of `(α + β)/(1 − γ)`
/// below one at every positive grid point.
pub fn check_gauge_conditions(
    g: &GaugeTriple,
    t_grid: &SampleGrid,
    approach_offsets: &[f64],
) -> Result<GaugeReport> {
    if approach_offsets.is_empty()
        || approach_offsets.iter().any(|h| !(*h > 0.0))
        || approach_offsets.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument(
            "approach offsets must be a decreasing sequence of positive reals".into(),
        ));
    }

    let mut max_sum = f64::NEG_INFINITY;
    let mut sum_violations = 0;
    let mut sum_witness = None;
    for &t in t_grid.points() {
        let (a, b, c) = g.checked(t)?;
        let sum = a + b + c;
        max_sum = max_sum.max(sum);
        if sum >= 1.0 - STRICT_MARGIN {
            sum_violations += 1;
            sum_witness.get_or_insert(PointValue { t, value: sum });
        }
    }

    let mut gamma0_sup = f64::NEG_INFINITY;
    for &h in approach_offsets {
        gamma0_sup = gamma0_sup.max(g.checked(h)?.2);
    }

    let mut max_ratio = 0.0f64;
    let mut ratio_witness: Option<RatioWitness> = None;
    for &t in t_grid.points().iter().filter(|t| **t > 0.0) {
        for &h in approach_offsets {
            let s = t + h;
            let (a, b, c) = g.checked(s)?;
            let ratio = (a + b) / (1.0 - c);
            if ratio_witness.is_none_or(|w| ratio > w.ratio) {
                ratio_witness = Some(RatioWitness { t, s, ratio });
            }
            max_ratio = max_ratio.max(ratio);
        }
    }

    let gamma0_margin = 1.0 - gamma0_sup;
    let ratio_margin = 1.0 - max_ratio;
    Ok(GaugeReport {
        sum_ok: sum_violations == 0,
        gamma0_ok: gamma0_margin > STRICT_MARGIN,
        ratio_ok: ratio_margin > STRICT_MARGIN,
        points_checked: t_grid.len(),
        max_sum,
        sum_violations,
        sum_witness,
        gamma0_sup,
        gamma0_margin,
        max_ratio,
        ratio_margin,
        ratio_witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiReport {
    pub phi2_ok: bool,
    pub phi3_ok: bool,
    pub phi2_witness: Option<PointValue>,
    /// First `ε` whose integral is not positive, with that integral.
    pub phi3_witness: Option<PointValue>,
}

impl PhiReport {
    pub fn passed(&self) -> bool {
        self.phi2_ok && self.phi3_ok
    }
}

/// Checks non-negativity of `φ` on `[0, max ε]` and positivity of its
/// integral over every `[0, ε]`.
pub fn check_phi(phi: &IntegrandPhi, eps_list: &[f64], quadrature_tol: f64) -> Result<PhiReport> {
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("eps_list must be nonempty and positive".into()));
    }
    let mut points: Vec<f64> = eps_list.iter().flat_map(|&e| linspace(0.0, e, 33)).collect();
    let widest = eps_list.iter().copied().fold(0.0, f64::max);
    points.extend(linspace(0.0, widest, 257));
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut phi2_witness = None;
    for &t in &points {
        let v = phi.eval(t);
        if !v.is_finite() {
            return Err(Error::NonFinite { what: format!("phi = {}", phi.label()), at: t });
        }
        if v < 0.0 {
            phi2_witness = Some(PointValue { t, value: v });
            break;
        }
    }

    let mut phi3_witness = None;
    for &eps in eps_list {
        let integral = quadrature::integrate(|t| phi.eval(t), 0.0, eps, quadrature_tol)?;
        if !(integral > PHI_POSITIVE_FLOOR) {
            phi3_witness = Some(PointValue { t: eps, value: integral });
            break;
        }
    }

    Ok(PhiReport {
        phi2_ok: phi2_witness.is_none(),
        phi3_ok: phi3_witness.is_none(),
        phi2_witness,
        phi3_witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{sample_grid, Domain, GridStrategy};

    fn grid(lo: f64, hi: f64, n: usize) -> SampleGrid {
        sample_grid(&Domain::closed(lo, hi).unwrap(), n, GridStrategy::Uniform, 0).unwrap()
    }

    #[test]
    fn square_is_altering_distance() {
        let r = check_altering_distance(&AlteringDistance::square(), &grid(0.0, 2.0, 64), 3).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.moduli.len(), 4);
    }

    #[test]
    fn identity_is_altering_distance() {
        let r = check_altering_distance(&AlteringDistance::identity(), &grid(0.0, 1.0, 64), 3).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn constant_fails_psi1() {
        let one = AlteringDistance::new("1", |_| 1.0);
        let r = check_altering_distance(&one, &grid(0.0, 1.0, 64), 3).unwrap();
        assert!(!r.psi1);
        assert_eq!(r.psi1_witness, Some(PointValue { t: 0.0, value: 1.0 }));
        assert!(r.psi2 && r.psi3);
    }

    #[test]
    fn decreasing_fails_psi2() {
        let bump = AlteringDistance::new("t(1.2-t)", |t| t * (1.2 - t));
        let r = check_altering_distance(&bump, &grid(0.0, 1.0, 11), 3).unwrap();
        assert!(r.psi1 && !r.psi2);
        let w = r.psi2_witness.unwrap();
        assert!(w.t0 >= 0.6 - 1e-12 && w.v1 < w.v0);
    }

    #[test]
    fn jump_fails_psi3() {
        let jump = AlteringDistance::new("jump", |t| if t <= 0.3 { t } else { t + 0.5 });
        let r = check_altering_distance(&jump, &grid(0.0, 1.0, 16), 3).unwrap();
        assert!(r.psi1 && r.psi2 && !r.psi3, "{r:?}");
    }

    #[test]
    fn non_finite_psi_is_hard_failure() {
        let bad = AlteringDistance::new("1/(t-0.5)^2", |t| 1.0 / (t - 0.5).powi(2));
        let err = check_altering_distance(&bad, &grid(0.0, 1.0, 3), 1).unwrap_err();
        assert!(matches!(err, Error::NonFinite { at, .. } if at == 0.5));
    }

    #[test]
    fn oversized_gauges_fail_sum() {
        let g = GaugeTriple::constant(0.5, 0.5, 0.25);
        let r = check_gauge_conditions(&g, &grid(0.0, 1.0, 33), &DEFAULT_OFFSETS).unwrap();
        assert!(!r.sum_ok);
        assert_eq!(r.sum_violations, 33);
        assert_eq!(r.sum_witness.unwrap().value, 1.25);
        // (1/2 + 1/2) / (3/4) > 1 as well
        assert!(!r.ratio_ok);
    }

    #[test]
    fn example_two_gauges_pass_with_half_ratio() {
        let g = GaugeTriple::constant(0.125, 0.25, 0.25);
        let r = check_gauge_conditions(&g, &grid(0.0, 1.0, 33), &DEFAULT_OFFSETS).unwrap();
        assert!(r.passed());
        assert!((r.max_ratio - 0.5).abs() <= 1e-12);
        assert!((r.gamma0_margin - 0.75).abs() <= 1e-15);
    }

    #[test]
    fn zero_gauges() {
        let g = GaugeTriple::constant(0.0, 0.0, 0.0);
        let r = check_gauge_conditions(&g, &grid(0.0, 1.0, 9), &DEFAULT_OFFSETS).unwrap();
        assert!(r.passed());
        assert_eq!(r.max_ratio, 0.0);
    }

    #[test]
    fn gamma_at_one_is_hard_failure() {
        let g = GaugeTriple::new("bad", |_| 0.0, |_| 0.0, |t| if t > 0.5 { 1.0 } else { 0.1 });
        let err = check_gauge_conditions(&g, &grid(0.0, 1.0, 9), &DEFAULT_OFFSETS).unwrap_err();
        assert!(matches!(err, Error::GaugeCodomain { which: "gamma", .. }));
    }

    #[test]
    fn offsets_must_decrease() {
        let g = GaugeTriple::constant(0.0, 0.0, 0.0);
        assert!(check_gauge_conditions(&g, &grid(0.0, 1.0, 9), &[1e-3, 1e-1]).is_err());
    }

    #[test]
    fn ratio_limsup_is_probed_to_the_right() {
        // α jumps up just to the right of 0.5 and creeps toward 1
        let g = GaugeTriple::new(
            "creeping",
            |s: f64| if s > 0.5 { 1.0 - (s - 0.5) } else { 0.0 },
            |_| 0.0,
            |_| 0.0,
        );
        let r = check_gauge_conditions(&g, &grid(0.0, 1.0, 5), &DEFAULT_OFFSETS).unwrap();
        assert!(r.sum_ok);
        assert!(r.max_ratio > 0.9999999);
        assert_eq!(r.ratio_witness.unwrap().t, 0.5);
    }

    #[test]
    fn compose_integral_reproduces_antiderivatives() {
        let psi0 = compose_integral(&IntegrandPhi::new("2t", |t| 2.0 * t), 1e-10).unwrap();
        for s in [0.1, 0.5, 1.0, 2.0] {
            assert!((psi0.eval(s) - s * s).abs() <= 1e-10);
        }
        assert_eq!(psi0.eval(0.0), 0.0);
        let psi0 = compose_integral(&IntegrandPhi::new("1", |_| 1.0), 1e-10).unwrap();
        assert!((psi0.eval(0.7) - 0.7).abs() <= 1e-12);
        let psi0 = compose_integral(&IntegrandPhi::new("3t^2", |t| 3.0 * t * t), 1e-10).unwrap();
        assert!((psi0.eval(2.0) - 8.0).abs() <= 1e-10);
    }

    #[test]
    fn composed_integral_is_altering_distance() {
        let psi0 = compose_integral(&IntegrandPhi::new("2t", |t| 2.0 * t), 1e-10).unwrap();
        let r = check_altering_distance(&psi0, &grid(0.0, 2.0, 64), 3).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn phi_checks() {
        let eps = [1e-3, 1e-1, 1.0];
        let r = check_phi(&IntegrandPhi::new("2t", |t| 2.0 * t), &eps, 1e-12).unwrap();
        assert!(r.passed());
        let r = check_phi(&IntegrandPhi::new("0", |_| 0.0), &eps, 1e-12).unwrap();
        assert!(r.phi2_ok && !r.phi3_ok);
        assert_eq!(r.phi3_witness.unwrap().t, 1e-3);
        let r = check_phi(&IntegrandPhi::new("t-0.5", |t| t - 0.5), &eps, 1e-12).unwrap();
        assert!(!r.phi2_ok);
        assert!(r.phi2_witness.unwrap().t < 0.5);
    }
}
