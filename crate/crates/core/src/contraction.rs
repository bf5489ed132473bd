//! The ψ-(α, β, γ)-contraction inequality and sampled certificates for it.
//!
//! For a pair `(S, T)` the inequality reads, with `D = d(Tx, Ty)`,
//!
//! ```text
//! Ψ(d(Sx, Sy)) <= α(D) Ψ(D) + β(D) Ψ(d(Sx, Tx)) + γ(D) Ψ(d(Sy, Ty))
//! ```
//!
//! where `Ψ` is `ψ` for the plain form and `ψ₀ ∘ ψ` for the integral form.
//! The inequality is not symmetric in `(x, y)`, so both orders are sampled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauges::{compose_integral, AlteringDistance, GaugeTriple, IntegrandPhi};
use crate::metric::{distance, Domain, ScalarMap};

pub const DEFAULT_CERT_TOL: f64 = 1e-12;
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-12;
pub const DEFAULT_N_PAIRS: usize = 10_000;

const NEAR_DIAGONAL: [f64; 2] = [1e-3, 1e-6];

/// How the middle `β` term is formed in the integral form.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiddleTerm {
    /// `ψ₀(ψ(d(Sx, Tx)))`, like the other two terms.
    #[default]
    Rewritten,
    /// `ψ₀(d(Sx, Tx))` without `ψ`.
    Literal,
}

#[derive(Debug, Clone)]
pub struct ContractionPair {
    pub s: ScalarMap,
    pub t: ScalarMap,
    pub psi: AlteringDistance,
    pub gauges: GaugeTriple,
    pub integral_phi: Option<IntegrandPhi>,
    pub middle_term: MiddleTerm,
}

impl ContractionPair {
    pub fn new(s: ScalarMap, t: ScalarMap, psi: AlteringDistance, gauges: GaugeTriple) -> Result<Self> {
        if s.domain() != t.domain() {
            return Err(Error::InvalidArgument(format!(
                "S is defined on {} but T on {}",
                s.domain(),
                t.domain()
            )));
        }
        Ok(Self { s, t, psi, gauges, integral_phi: None, middle_term: MiddleTerm::default() })
    }

    pub fn with_integral(mut self, phi: IntegrandPhi, middle_term: MiddleTerm) -> Self {
        self.integral_phi = Some(phi);
        self.middle_term = middle_term;
        self
    }

    pub fn domain(&self) -> &Domain {
        self.s.domain()
    }
}

/// Which altering distance feeds the inequality.
#[derive(Debug, Clone)]
pub enum Form {
    Plain,
    Integral { psi0: AlteringDistance, middle: MiddleTerm },
}

impl Form {
    pub fn integral(pair: &ContractionPair, quadrature_tol: f64) -> Result<Self> {
        let phi = pair.integral_phi.as_ref().ok_or(Error::MissingIntegrand)?;
        Ok(Form::Integral { psi0: compose_integral(phi, quadrature_tol)?, middle: pair.middle_term })
    }
}

/// The three weighted terms of the right-hand side at one `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    pub lhs: f64,
    pub alpha_term: f64,
    pub beta_term: f64,
    pub gamma_term: f64,
}

impl Terms {
    pub fn rhs(&self) -> f64 {
        self.alpha_term + self.beta_term + self.gamma_term
    }

    /// `rhs - lhs`; negative means the inequality fails at this pair.
    pub fn slack(&self) -> f64 {
        self.rhs() - self.lhs
    }
}

fn finite(value: f64, term: &str, x: f64, y: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what: format!("{term} at pair ({x}, {y})"), at: x })
    }
}

/// Evaluates both sides of the inequality at `(x, y)`.
pub fn terms(pair: &ContractionPair, form: &Form, x: f64, y: f64) -> Result<Terms> {
    let dom = pair.domain();
    for p in [x, y] {
        if !dom.contains(p) {
            return Err(Error::OutsideDomain(p));
        }
    }
    let (sx, sy) = (pair.s.eval(x), pair.s.eval(y));
    let (tx, ty) = (pair.t.eval(x), pair.t.eval(y));
    let psi = |d: f64| -> Result<f64> {
        match form {
            Form::Plain => pair.psi.try_eval(d),
            Form::Integral { psi0, .. } => psi0.try_eval(pair.psi.try_eval(d)?),
        }
    };
    let d_t = finite(distance(tx, ty), "d(Tx, Ty)", x, y)?;
    let d_s = finite(distance(sx, sy), "d(Sx, Sy)", x, y)?;
    let d_x = finite(distance(sx, tx), "d(Sx, Tx)", x, y)?;
    let d_y = finite(distance(sy, ty), "d(Sy, Ty)", x, y)?;
    let (a, b, c) = pair.gauges.checked(d_t)?;

    let middle = match form {
        Form::Integral { psi0, middle: MiddleTerm::Literal } => psi0.try_eval(d_x)?,
        _ => psi(d_x)?,
    };
    Ok(Terms {
        lhs: finite(psi(d_s)?, "lhs", x, y)?,
        alpha_term: finite(a * psi(d_t)?, "alpha term", x, y)?,
        beta_term: finite(b * middle, "beta term", x, y)?,
        gamma_term: finite(c * psi(d_y)?, "gamma term", x, y)?,
    })
}

/// `(lhs, rhs)` of the inequality at `(x, y)`, using the integral form when
/// the pair carries an integrand.
pub fn lhs_rhs(pair: &ContractionPair, x: f64, y: f64) -> Result<(f64, f64)> {
    let form = match pair.integral_phi {
        Some(_) => Form::integral(pair, DEFAULT_QUADRATURE_TOL)?,
        None => Form::Plain,
    };
    let t = terms(pair, &form, x, y)?;
    Ok((t.lhs, t.rhs()))
}

/// The stratified sampling plan: a product grid (both orders and the
/// diagonal), near-diagonal pairs at `|x - y| ∈ {1e-3, 1e-6}` and seeded
/// uniform pairs. Exactly `n_pairs` pairs are returned.
pub fn sample_pairs(domain: &Domain, n_pairs: usize, seed: u64) -> Vec<(f64, f64)> {
    if n_pairs == 0 {
        return Vec::new();
    }
    let side = (((n_pairs / 2) as f64).sqrt() as usize).max(1);
    let axis = domain.linspace(side);
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n_pairs);
    'grid: for &x in &axis {
        for &y in &axis {
            if pairs.len() == n_pairs {
                break 'grid;
            }
            pairs.push((x, y));
        }
    }

    let near_budget = (n_pairs - pairs.len()) * 2 / 5;
    let near_target = pairs.len() + near_budget;
    if near_budget > 0 {
        let anchors = domain.linspace((near_budget / (2 * NEAR_DIAGONAL.len())).max(2));
        'near: for &x in &anchors {
            for &h in &NEAR_DIAGONAL {
                for y in [x + h, x - h] {
                    if pairs.len() >= near_target {
                        break 'near;
                    }
                    if domain.contains(y) {
                        pairs.push((x, y));
                    }
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = domain.sampling_bounds();
    while pairs.len() < n_pairs {
        pairs.push((rng.gen_range(a..=b), rng.gen_range(a..=b)));
    }
    pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateForm {
    Plain,
    Integral,
}

/// Sampled evidence for the contraction inequality. A `certified` verdict
/// means no sampled pair violated it beyond `tolerance`; it is not a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    pub form: CertificateForm,
    pub pairs_checked: usize,
    /// `max(lhs - rhs)` over all pairs; positive means the inequality failed.
    pub max_violation: f64,
    pub min_slack: f64,
    pub worst_pair: (f64, f64),
    pub worst_terms: Terms,
    pub seed: u64,
    pub tolerance: f64,
    pub quadrature_tol: Option<f64>,
    pub verdict: Verdict,
}

/// Slack `rhs - lhs` at each pair, in order.
pub fn pair_slacks(pair: &ContractionPair, form: &Form, pairs: &[(f64, f64)]) -> Result<Vec<f64>> {
    pairs.iter().map(|&(x, y)| terms(pair, form, x, y).map(|t| t.slack())).collect()
}

fn run_certificate(
    pair: &ContractionPair,
    form: &Form,
    n_pairs: usize,
    seed: u64,
    tolerance: f64,
    quadrature_tol: Option<f64>,
) -> Result<ContractionCertificate> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("n_pairs must be at least 1".into()));
    }
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidArgument("tolerance must be non-negative".into()));
    }
    let pairs = sample_pairs(pair.domain(), n_pairs, seed);
    let mut worst: Option<((f64, f64), Terms)> = None;
    for &(x, y) in &pairs {
        let t = terms(pair, form, x, y)?;
        let replace = match &worst {
            None => true,
            Some((wp, wt)) => {
                let (s, ws) = (t.slack(), wt.slack());
                s < ws || (s == ws && (x, y) < *wp)
            }
        };
        if replace {
            worst = Some(((x, y), t));
        }
    }
    let (worst_pair, worst_terms) = worst.expect("at least one pair");
    let min_slack = worst_terms.slack();
    let max_violation = -min_slack;
    Ok(ContractionCertificate {
        form: match form {
            Form::Plain => CertificateForm::Plain,
            Form::Integral { .. } => CertificateForm::Integral,
        },
        pairs_checked: pairs.len(),
        max_violation,
        min_slack,
        worst_pair,
        worst_terms,
        seed,
        tolerance,
        quadrature_tol,
        verdict: if max_violation > tolerance { Verdict::Violated } else { Verdict::Certified },
    })
}

/// Certificate for the plain inequality with `ψ`.
pub fn certify(pair: &ContractionPair, n_pairs: usize, seed: u64, tolerance: f64) -> Result<ContractionCertificate> {
    run_certificate(pair, &Form::Plain, n_pairs, seed, tolerance, None)
}

/// Certificate for the integral-type inequality, routed through `ψ₀ ∘ ψ`.
pub fn certify_integral(
    pair: &ContractionPair,
    n_pairs: usize,
    seed: u64,
    tolerance: f64,
    quadrature_tol: f64,
) -> Result<ContractionCertificate> {
    let form = Form::integral(pair, quadrature_tol)?;
    run_certificate(pair, &form, n_pairs, seed, tolerance, Some(quadrature_tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Domain {
        Domain::closed(0.0, 1.0).unwrap()
    }

    fn example_one(gauges: GaugeTriple) -> ContractionPair {
        let d = unit();
        ContractionPair::new(
            ScalarMap::new("x/16", d, |x| x / 16.0),
            ScalarMap::new("x/2", d, |x| x / 2.0),
            AlteringDistance::square(),
            gauges,
        )
        .unwrap()
    }

    fn example_two() -> ContractionPair {
        let d = unit();
        ContractionPair::new(
            ScalarMap::new("S", d, |x| if x <= 0.5 { 0.0 } else { 1.0 / 16.0 }),
            ScalarMap::new("x/2", d, |x| x / 2.0),
            AlteringDistance::square(),
            GaugeTriple::constant(0.125, 0.25, 0.25),
        )
        .unwrap()
    }

    fn example_three() -> ContractionPair {
        let d = Domain::closed(0.5, 1.0).unwrap();
        let c = 2.0 / 3.0;
        ContractionPair::new(
            ScalarMap::new("S", d, move |x| if x < c { 0.5 } else { 1.0 - 0.5 * x }),
            ScalarMap::new("T", d, move |x| if x < c { 1.0 } else { x }),
            AlteringDistance::square(),
            GaugeTriple::constant(0.25, 0.25, 0.125),
        )
        .unwrap()
    }

    #[test]
    fn example_one_corrected_terms() {
        // oracle: d(S1,S0) = 1/16, d(T1,T0) = 1/2, d(S1,T1) = 7/16, d(S0,T0) = 0
        let pair = example_one(GaugeTriple::constant(0.125, 0.125, 0.125));
        let (lhs, rhs) = lhs_rhs(&pair, 1.0, 0.0).unwrap();
        let expected_rhs = 0.125 * 0.25 + 0.125 * (49.0 / 256.0);
        assert!((lhs - 1.0 / 256.0).abs() < 1e-15);
        assert!((rhs - expected_rhs).abs() < 1e-15);
        assert!((rhs - 0.0551757).abs() < 1e-6);
        assert!(lhs < rhs);
    }

    #[test]
    fn example_three_terms() {
        let pair = example_three();
        let t = terms(&pair, &Form::Plain, 2.0 / 3.0, 1.0).unwrap();
        assert!((t.lhs - 1.0 / 36.0).abs() < 1e-15);
        assert!((t.alpha_term - 1.0 / 36.0).abs() < 1e-15);
        assert!(t.beta_term.abs() < 1e-15);
        assert!((t.gamma_term - 1.0 / 32.0).abs() < 1e-15);
        assert!(t.lhs < t.rhs());
    }

    #[test]
    fn diagonal_lhs_is_zero() {
        let pair = example_three();
        for x in [0.5, 0.6, 2.0 / 3.0, 0.9] {
            assert_eq!(lhs_rhs(&pair, x, x).unwrap().0, 0.0);
        }
    }

    #[test]
    fn sampling_plan_is_exact_and_deterministic() {
        let d = unit();
        for n in [1, 2, 7, 100, 10_000] {
            let a = sample_pairs(&d, n, 42);
            assert_eq!(a.len(), n);
            assert!(a.iter().all(|(x, y)| d.contains(*x) && d.contains(*y)));
            assert_eq!(a, sample_pairs(&d, n, 42));
        }
        let pairs = sample_pairs(&d, 10_000, 1);
        let near = pairs.iter().filter(|(x, y)| (x - y).abs() > 0.0 && (x - y).abs() <= 1.1e-6).count();
        assert!(near > 100);
        assert!(pairs.contains(&(0.0, 1.0)) && pairs.contains(&(1.0, 0.0)));
    }

    #[test]
    fn example_two_is_certified() {
        let c = certify(&example_two(), 10_000, 42, 1e-12).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        assert_eq!(c.pairs_checked, 10_000);
        assert!(c.min_slack >= -1e-12);
    }

    #[test]
    fn identity_pair_is_violated() {
        let d = unit();
        let pair = ContractionPair::new(
            ScalarMap::identity(d),
            ScalarMap::identity(d),
            AlteringDistance::square(),
            GaugeTriple::constant(0.125, 0.25, 0.25),
        )
        .unwrap();
        let c = certify(&pair, 100, 42, 1e-12).unwrap();
        assert_eq!(c.verdict, Verdict::Violated);
        // worst case is the full diameter: (1 - α)·1
        assert!((c.max_violation - 0.875).abs() < 1e-12);
    }

    #[test]
    fn single_pair_is_the_diagonal() {
        let c = certify(&example_two(), 1, 0, 1e-12).unwrap();
        assert_eq!(c.worst_pair.0, c.worst_pair.1);
        assert_eq!(c.verdict, Verdict::Certified);
        assert!(certify(&example_two(), 0, 0, 1e-12).is_err());
    }

    #[test]
    fn integral_with_unit_integrand_matches_plain() {
        let pair = example_two().with_integral(IntegrandPhi::new("1", |_| 1.0), MiddleTerm::Rewritten);
        let pairs = sample_pairs(pair.domain(), 2_000, 3);
        let plain = pair_slacks(&pair, &Form::Plain, &pairs).unwrap();
        let integral = pair_slacks(&pair, &Form::integral(&pair, 1e-12).unwrap(), &pairs).unwrap();
        for (a, b) in plain.iter().zip(&integral) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn integral_needs_integrand() {
        assert!(matches!(
            certify_integral(&example_two(), 10, 0, 1e-12, 1e-12),
            Err(Error::MissingIntegrand)
        ));
    }

    #[test]
    fn literal_middle_term_differs_from_rewrite() {
        let base = example_two();
        let phi = IntegrandPhi::new("2t", |t| 2.0 * t);
        let rewritten = base.clone().with_integral(phi.clone(), MiddleTerm::Rewritten);
        let literal = base.with_integral(phi, MiddleTerm::Literal);
        let fr = Form::integral(&rewritten, 1e-12).unwrap();
        let fl = Form::integral(&literal, 1e-12).unwrap();
        // x = 1: d(S1, T1) = 7/16
        let r = terms(&rewritten, &fr, 1.0, 0.0).unwrap();
        let l = terms(&literal, &fl, 1.0, 0.0).unwrap();
        let d: f64 = 7.0 / 16.0;
        assert!((r.beta_term - 0.25 * d.powi(4)).abs() < 1e-12);
        assert!((l.beta_term - 0.25 * d.powi(2)).abs() < 1e-12);
        assert_eq!(r.alpha_term, l.alpha_term);
    }

    #[test]
    fn domains_must_match() {
        let s = ScalarMap::identity(unit());
        let t = ScalarMap::identity(Domain::closed(0.0, 2.0).unwrap());
        assert!(ContractionPair::new(s, t, AlteringDistance::square(), GaugeTriple::constant(0.0, 0.0, 0.0)).is_err());
    }
}
