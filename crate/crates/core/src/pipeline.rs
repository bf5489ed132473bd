//! Check, certify and solve workflows over a [`Scenario`].

use serde::{Deserialize, Serialize};

use crate::contraction::{
    certify, certify_integral, ContractionCertificate, ContractionPair, Verdict, DEFAULT_CERT_TOL, DEFAULT_N_PAIRS,
    DEFAULT_QUADRATURE_TOL,
};
use crate::error::Result;
use crate::gauges::{
    check_altering_distance, check_gauge_conditions, check_phi, compose_integral, AlteringDistance,
    AlteringDistanceReport, GaugeReport, PhiReport, DEFAULT_OFFSETS, DEFAULT_REFINE_LEVELS,
};
use crate::jungck::{
    check_owc, check_property_ea, extract_poc, extract_poc_at, find_coincidence_points, iterate, uniqueness_probe,
    Coincidences, EaReport, IterConfig, JungckTrace, OwcReport, OwcVerdict, PocExtraction, TraceStatus,
    TraceSummary, UniquenessReport, DEFAULT_MAX_ITERS, DEFAULT_RF_TOL, DEFAULT_TOL,
};
use crate::metric::{
    check_range_containment, distance, sample_grid, ContainmentReport, GridStrategy, SampleGrid,
    DEFAULT_SCAN_RESOLUTION,
};
use crate::scenario::{DeclaredFact, Model, Scenario};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_UNIQUENESS_STARTS: usize = 16;

const CHECK_GRID_POINTS: usize = 65;
const CONTAINMENT_GRID_POINTS: usize = 257;
const PHI_EPS: [f64; 3] = [1e-3, 1e-1, 1.0];

/// Tolerances, budgets and seeds for every workflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub tol: f64,
    pub rf_tol: f64,
    pub max_iters: usize,
    pub scan_resolution: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub cert_tol: f64,
    pub quadrature_tol: f64,
    /// Start of the main iteration; the domain midpoint when absent.
    pub x0: Option<f64>,
    pub uniqueness_starts: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            rf_tol: DEFAULT_RF_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            scan_resolution: DEFAULT_SCAN_RESOLUTION,
            n_pairs: DEFAULT_N_PAIRS,
            seed: DEFAULT_SEED,
            cert_tol: DEFAULT_CERT_TOL,
            quadrature_tol: DEFAULT_QUADRATURE_TOL,
            x0: None,
            uniqueness_starts: DEFAULT_UNIQUENESS_STARTS,
        }
    }
}

impl Settings {
    pub fn iter_config(&self) -> IterConfig {
        IterConfig {
            tol: self.tol,
            rf_tol: self.rf_tol,
            max_iters: self.max_iters,
            scan_resolution: self.scan_resolution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub altering_distance: AlteringDistanceReport,
    pub gauges: GaugeReport,
    pub phi: Option<PhiReport>,
    /// Axioms for `ψ₀ ∘ ψ` when an integrand is present.
    pub integral_altering_distance: Option<AlteringDistanceReport>,
    pub containment: ContainmentReport,
    /// Containment only gates the verdict when the scenario declares it.
    pub containment_declared: bool,
    pub passed: bool,
    pub failures: Vec<String>,
}

fn psi_failures(what: &str, r: &AlteringDistanceReport, out: &mut Vec<String>) {
    if !r.psi1 {
        match r.psi1_witness {
            Some(w) => out.push(format!("{what}: vanishing axiom fails, {what}({}) = {}", w.t, w.value)),
            None => out.push(format!("{what}: vanishing axiom fails")),
        }
    }
    if !r.psi2 {
        if let Some(w) = r.psi2_witness {
            out.push(format!(
                "{what}: not monotone, {what}({}) = {} > {what}({}) = {}",
                w.t0, w.v0, w.t1, w.v1
            ));
        }
    }
    if !r.psi3 {
        out.push(format!("{what}: sampled modulus does not shrink under refinement: {:?}", r.moduli));
    }
}

/// Runs every hypothesis check that can be sampled: altering distance axioms,
/// gauge conditions, the integrand conditions and, when declared, `S(M) ⊆ T(M)`.
pub fn check(scenario: &Scenario, settings: &Settings) -> Result<CheckReport> {
    let model = scenario.build()?;
    let pair = &model.pair;
    let t_grid = distance_grid(pair)?;

    let altering_distance = check_altering_distance(&pair.psi, &t_grid, DEFAULT_REFINE_LEVELS)?;
    let gauges = check_gauge_conditions(&pair.gauges, &t_grid, &DEFAULT_OFFSETS)?;
    let (phi, integral_altering_distance) = match &pair.integral_phi {
        Some(phi) => {
            let psi0 = compose_integral(phi, settings.quadrature_tol)?;
            let composed = AlteringDistance::compose(&psi0, &pair.psi);
            (
                Some(check_phi(phi, &PHI_EPS, settings.quadrature_tol)?),
                Some(check_altering_distance(&composed, &t_grid, DEFAULT_REFINE_LEVELS)?),
            )
        }
        None => (None, None),
    };
    let containment = containment(pair, settings)?;
    let containment_declared = scenario.has_fact(DeclaredFact::RangeContainment);

    let mut failures = Vec::new();
    psi_failures("psi", &altering_distance, &mut failures);
    if let Some(r) = &integral_altering_distance {
        psi_failures("psi0∘psi", r, &mut failures);
    }
    if !gauges.sum_ok {
        let at = gauges.sum_witness.map_or(f64::NAN, |w| w.t);
        failures.push(format!(
            "gauges: alpha + beta + gamma reaches {} at t = {at} ({} of {} sampled t)",
            gauges.max_sum, gauges.sum_violations, gauges.points_checked
        ));
    }
    if !gauges.gamma0_ok {
        failures.push(format!("gauges: gamma near 0 reaches {}", gauges.gamma0_sup));
    }
    if !gauges.ratio_ok {
        let w = gauges.ratio_witness.map(|w| format!(" at t = {}, t + h = {}", w.t, w.s)).unwrap_or_default();
        failures.push(format!("gauges: (alpha + beta)/(1 - gamma) reaches {}{w}", gauges.max_ratio));
    }
    if let Some(p) = &phi {
        if let Some(w) = p.phi2_witness {
            failures.push(format!("phi: negative value {} at t = {}", w.value, w.t));
        }
        if let Some(w) = p.phi3_witness {
            failures.push(format!("phi: integral over [0, {}] is {}", w.t, w.value));
        }
    }
    if containment_declared && !containment.holds {
        let p = containment.missing.first().or(containment.undecided.first());
        failures.push(format!(
            "range containment: S(p) has no preimage under T at p = {}",
            p.map_or(f64::NAN, |p| *p)
        ));
    }

    Ok(CheckReport {
        altering_distance,
        gauges,
        phi,
        integral_altering_distance,
        containment,
        containment_declared,
        passed: failures.is_empty(),
        failures,
    })
}

/// Uniform grid of `[0, diam M]`, the range of every distance fed to `ψ` and the gauges.
fn distance_grid(pair: &ContractionPair) -> Result<SampleGrid> {
    let d = crate::metric::Domain::closed(0.0, pair.domain().diameter())?;
    sample_grid(&d, CHECK_GRID_POINTS, GridStrategy::Uniform, 0)
}

fn containment(pair: &ContractionPair, settings: &Settings) -> Result<ContainmentReport> {
    let grid = sample_grid(pair.domain(), CONTAINMENT_GRID_POINTS, GridStrategy::Uniform, 0)?;
    check_range_containment(&pair.s, &pair.t, &grid, settings.scan_resolution, settings.rf_tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub plain: ContractionCertificate,
    pub integral: Option<ContractionCertificate>,
    pub passed: bool,
}

/// Samples the contraction inequality, and its integral form when the
/// scenario has an integrand.
pub fn certify_scenario(scenario: &Scenario, settings: &Settings) -> Result<CertifyReport> {
    let model = scenario.build()?;
    let pair = &model.pair;
    let plain = certify(pair, settings.n_pairs, settings.seed, settings.cert_tol)?;
    let integral = match pair.integral_phi {
        Some(_) => Some(certify_integral(
            pair,
            settings.n_pairs,
            settings.seed,
            settings.cert_tol,
            settings.quadrature_tol,
        )?),
        None => None,
    };
    let passed = plain.verdict == Verdict::Certified
        && integral.as_ref().is_none_or(|c| c.verdict == Verdict::Certified);
    Ok(CertifyReport { plain, integral, passed })
}

/// How the point of coincidence was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Limit of the Jungck sequence, under `S(M) ⊆ T(M)` and complete `T(M)`.
    Jungck,
    /// Common limit along the E.A. sequence, under closed `T(M)`.
    PropertyEa,
}

/// The first solve stage that did not succeed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Neither route has its hypotheses available.
    Hypotheses,
    PointOfCoincidence,
    Owc,
    Closure,
    Expected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub x0: f64,
    pub containment: ContainmentReport,
    pub trace: TraceSummary,
    /// `step_dist[k+1] / step_dist[k]` at the first pair of positive steps;
    /// late steps sit at the root-finding tolerance and say little.
    pub observed_rate: Option<f64>,
    pub ea: Option<EaReport>,
    pub route: Option<Route>,
    pub poc_extraction: Option<PocExtraction>,
    /// The raw limit estimate when the point of coincidence was snapped to a
    /// located coincidence point.
    pub polished_from: Option<f64>,
    pub coincidence_points: Coincidences,
    pub owc: OwcReport,
    pub uniqueness: UniquenessReport,
    pub poc: Option<f64>,
    pub cfp: Option<f64>,
    /// `(|S(w) - w|, |T(w) - w|)` at the point of coincidence.
    pub closure_residuals: Option<(f64, f64)>,
    pub expected_match: Option<bool>,
    pub failed_stage: Option<Stage>,
    pub passed: bool,
}

pub struct SolveOutcome {
    pub report: SolveReport,
    pub trace: JungckTrace,
}

fn observed_rate(step_dist: &[f64]) -> Option<f64> {
    step_dist
        .windows(2)
        .find(|w| w[0] > 0.0 && w[1] > 0.0)
        .map(|w| w[1] / w[0])
}

/// The full solve: iterate, extract the point of coincidence along the first
/// route whose hypotheses hold, locate coincidence points, probe OWC and
/// publish the common fixed point when it closes.
pub fn solve(scenario: &Scenario, settings: &Settings) -> Result<SolveOutcome> {
    let model = scenario.build()?;
    let pair = &model.pair;
    let cfg = settings.iter_config();
    let x0 = settings.x0.unwrap_or_else(|| pair.domain().midpoint());

    let containment = containment(pair, settings)?;
    let trace = iterate(pair, x0, &cfg)?;
    let ea = match &model.ea_sequence {
        Some(seq) => Some(check_property_ea(pair, seq, model.ea_tol)?),
        None => None,
    };
    let scan = sample_grid(pair.domain(), settings.scan_resolution, GridStrategy::Uniform, 0)?;
    let coincidence_points = find_coincidence_points(pair, &scan, settings.rf_tol)?;
    let owc = check_owc(pair, coincidence_points.points(), 10.0 * settings.rf_tol);

    let mut route = None;
    let mut poc_extraction = None;
    let mut polished_from = None;
    let mut hypotheses_available = false;

    let jungck_ok = trace.status == TraceStatus::Converged
        && containment.holds
        && scenario.has_fact(DeclaredFact::CompleteRange);
    if jungck_ok {
        hypotheses_available = true;
        let ex = extract_poc(pair, &trace, settings.rf_tol, settings.tol, settings.scan_resolution)?;
        if ex.poc.is_some() {
            route = Some(Route::Jungck);
        }
        poc_extraction = Some(ex);
    }
    if route.is_none() && scenario.has_fact(DeclaredFact::ClosedRange) {
        if let Some(z) = ea.as_ref().and_then(|e| e.limit_estimate) {
            hypotheses_available = true;
            let (ex, from) = ea_poc(pair, &model, z, coincidence_points.points(), settings)?;
            if ex.poc.is_some() {
                route = Some(Route::PropertyEa);
            }
            poc_extraction = Some(ex);
            polished_from = from;
        }
    }
    let poc = poc_extraction.and_then(|e| e.poc);

    let closure_residuals = poc.map(|w| (distance(pair.s.eval(w), w), distance(pair.t.eval(w), w)));
    let closes = closure_residuals.is_some_and(|(s, t)| s <= 10.0 * settings.tol && t <= 10.0 * settings.tol);
    let cfp = (owc.verdict == OwcVerdict::Holds && closes).then_some(poc).flatten();

    let starts = sample_grid(pair.domain(), settings.uniqueness_starts.max(2), GridStrategy::Uniform, 0)?;
    let uniqueness = uniqueness_probe(pair, starts.points(), &cfg)?;

    let expected_match = expected_match(&model, poc, cfp, &coincidence_points, settings.tol);
    let failed_stage = if !hypotheses_available {
        Some(Stage::Hypotheses)
    } else if poc.is_none() {
        Some(Stage::PointOfCoincidence)
    } else if owc.verdict != OwcVerdict::Holds {
        Some(Stage::Owc)
    } else if cfp.is_none() {
        Some(Stage::Closure)
    } else if expected_match == Some(false) {
        Some(Stage::Expected)
    } else {
        None
    };

    let report = SolveReport {
        x0,
        containment,
        trace: trace.summary(),
        observed_rate: observed_rate(&trace.step_dist),
        ea,
        route,
        poc_extraction,
        polished_from,
        coincidence_points,
        owc,
        uniqueness,
        poc,
        cfp,
        closure_residuals,
        expected_match,
        passed: failed_stage.is_none(),
        failed_stage,
    };
    Ok(SolveOutcome { report, trace })
}

/// Extracts the point of coincidence at the E.A. limit `z`. The limit is an
/// extrapolation, so when it misses by more than `tol` it is snapped to
/// `T(c)` for the located coincidence point `c` whose value is nearest,
/// provided that value lies within `10·ea_tol` of `z`.
fn ea_poc(
    pair: &ContractionPair,
    model: &Model,
    z: f64,
    cps: &[f64],
    settings: &Settings,
) -> Result<(PocExtraction, Option<f64>)> {
    let ex = extract_poc_at(pair, z, settings.rf_tol, settings.tol, settings.scan_resolution)?;
    if ex.poc.is_some() {
        return Ok((ex, None));
    }
    let nearest = cps
        .iter()
        .map(|&c| pair.t.eval(c))
        .filter(|v| distance(*v, z) <= 10.0 * model.ea_tol)
        .min_by(|a, b| distance(*a, z).total_cmp(&distance(*b, z)));
    match nearest {
        Some(v) => Ok((extract_poc_at(pair, v, settings.rf_tol, settings.tol, settings.scan_resolution)?, Some(z))),
        None => Ok((ex, None)),
    }
}

fn expected_match(model: &Model, poc: Option<f64>, cfp: Option<f64>, cps: &Coincidences, tol: f64) -> Option<bool> {
    let e = &model.expected;
    if e.poc.is_none() && e.cfp.is_none() && e.cps.is_none() {
        return None;
    }
    let close = |want: Option<f64>, got: Option<f64>| match (want, got) {
        (None, _) => true,
        (Some(w), Some(g)) => distance(w, g) <= 10.0 * tol,
        (Some(_), None) => false,
    };
    let cps_ok = match (&e.cps, cps) {
        (None, _) => true,
        (Some(_), Coincidences::IdenticalMaps) => false,
        (Some(want), Coincidences::Points(got)) => {
            want.len() == got.len() && want.iter().all(|w| got.iter().any(|g| distance(*w, *g) <= 10.0 * tol))
        }
    };
    Some(close(e.poc, poc) && close(e.cfp, cfp) && cps_ok)
}
