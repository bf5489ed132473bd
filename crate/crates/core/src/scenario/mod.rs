//! Scenario files: a domain, the maps `S` and `T`, the altering distance, the
//! gauges and the facts a solve may rely on.
//!
//! Scenarios are TOML documents. Numbers may be written as literals or as
//! constant expressions such as `"2/3"`; map, gauge and sequence formulas use
//! the expression language of [`crate::expr`].
//!
//! ```toml
//! schema_version = 1
//! name = "halves"
//! declared_facts = ["range_containment", "complete_range"]
//!
//! [domain]
//! lo = 0
//! hi = 1
//!
//! [maps.s]
//! expr = "x/16"
//!
//! [maps.t]
//! expr = "x/2"
//!
//! [gauges]
//! alpha = "1/8"
//! beta = "1/8"
//! gamma = "1/8"
//! ```

mod catalog;
mod report;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use catalog::{builtin_catalog, catalog_entry, catalog_names, catalog_source};
pub use report::{load_report, save_report, Report};

use crate::contraction::{ContractionPair, MiddleTerm};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::gauges::{AlteringDistance, GaugeTriple, IntegrandPhi, DEFAULT_OFFSETS};
use crate::metric::{linspace, Domain, ScalarMap};

pub const SCHEMA_VERSION: u32 = 1;

/// Points per map used to validate totality and the selfmap property.
const VALIDATION_POINTS: usize = 1025;
const GAUGE_VALIDATION_POINTS: usize = 257;
const DEFAULT_EA_TOL: f64 = 1e-4;

/// A literal number or a constant expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Expr(String),
}

impl Number {
    pub fn value(&self, field: &str) -> Result<f64> {
        let v = match self {
            Number::Value(v) => *v,
            Number::Expr(src) => {
                let e = parse_in(field, src)?;
                e.constant_value()
                    .ok_or_else(|| scenario_err(field, format!("`{src}` must not contain a variable")))?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(scenario_err(field, "value is not finite"))
        }
    }
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Number::Value(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lo: Number,
    pub hi: Number,
    #[serde(default = "both_closed")]
    pub closed: [bool; 2],
}

fn both_closed() -> [bool; 2] {
    [true, true]
}

/// One branch of a piecewise map, active on `[lo, hi]` with the ends open or
/// closed per `closed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub lo: Number,
    pub hi: Number,
    #[serde(default = "both_closed")]
    pub closed: [bool; 2],
    pub expr: String,
}

/// A map given by one formula in `x` or by pieces; the first matching piece
/// wins. `inverse` is an optional formula for the inverse, tried before root
/// finding when solving `T(u) = v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<Piece>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Maps {
    pub s: MapSpec,
    pub t: MapSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSpec {
    pub alpha: String,
    pub beta: String,
    pub gamma: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclaredFact {
    /// `S(M) ⊆ T(M)`.
    RangeContainment,
    /// `T(M)` is complete.
    CompleteRange,
    /// `T(M)` is closed.
    ClosedRange,
    /// `φ` is summable on compact subsets.
    IntegrablePhi,
}

/// A candidate sequence `x_n = expr(n)` for `n = start..=end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EaSequenceSpec {
    pub expr: String,
    pub start: u64,
    pub end: u64,
    #[serde(default = "default_ea_tol")]
    pub tol: f64,
}

fn default_ea_tol() -> f64 {
    DEFAULT_EA_TOL
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poc: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfp: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cps: Option<Vec<Number>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default)]
    pub declared_facts: BTreeSet<DeclaredFact>,
    #[serde(default = "default_psi")]
    pub psi: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default)]
    pub integral_middle_term: MiddleTerm,
    pub domain: DomainSpec,
    pub maps: Maps,
    pub gauges: GaugeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ea_sequence: Option<EaSequenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

fn default_psi() -> String {
    "t".into()
}

/// Expected values with every number evaluated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpectedValues {
    pub poc: Option<f64>,
    pub cfp: Option<f64>,
    pub cps: Option<Vec<f64>>,
}

/// A validated scenario turned into evaluable objects.
#[derive(Debug, Clone)]
pub struct Model {
    pub pair: ContractionPair,
    pub ea_sequence: Option<Vec<f64>>,
    pub ea_tol: f64,
    pub expected: ExpectedValues,
}

fn scenario_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Scenario { field: field.to_string(), msg: msg.into() }
}

fn parse_in(field: &str, src: &str) -> Result<Expr> {
    Expr::parse(src).map_err(|e| scenario_err(field, format!("`{src}`: {e}")))
}

fn collect_vars(e: &Expr, out: &mut BTreeSet<char>) {
    match e {
        Expr::Num(_) => {}
        Expr::Var(v) => {
            out.insert(*v);
        }
        Expr::Neg(a) => collect_vars(a, out),
        Expr::Bin(_, a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Expr::Call(_, args) => args.iter().for_each(|a| collect_vars(a, out)),
    }
}

/// Parses `src` and rejects variables other than `var`.
fn formula(field: &str, src: &str, var: char) -> Result<Expr> {
    let e = parse_in(field, src)?;
    let mut vars = BTreeSet::new();
    collect_vars(&e, &mut vars);
    if let Some(v) = vars.into_iter().find(|v| *v != var) {
        return Err(scenario_err(field, format!("`{src}` uses `{v}`; only `{var}` is allowed here")));
    }
    Ok(e)
}

struct CompiledPiece {
    domain: Domain,
    expr: Expr,
}

fn compile_map(field: &str, spec: &MapSpec, domain: Domain) -> Result<ScalarMap> {
    let map = match (&spec.expr, spec.pieces.is_empty()) {
        (Some(src), true) => {
            let e = formula(field, src, 'x')?;
            ScalarMap::new(src.clone(), domain, move |x| e.eval(x))
        }
        (None, false) => {
            let mut pieces = Vec::with_capacity(spec.pieces.len());
            let mut label = String::new();
            for (i, p) in spec.pieces.iter().enumerate() {
                let pf = format!("{field}.pieces[{i}]");
                let (lo, hi) = (p.lo.value(&pf)?, p.hi.value(&pf)?);
                for bp in [lo, hi] {
                    if !(domain.lo()..=domain.hi()).contains(&bp) {
                        return Err(Error::Breakpoint { map: field.to_string(), bp });
                    }
                }
                let piece_domain = Domain::new(lo, hi, (p.closed[0], p.closed[1]))
                    .map_err(|e| scenario_err(&pf, e.to_string()))?;
                if i > 0 {
                    label.push_str("; ");
                }
                let _ = write!(label, "{} on {piece_domain}", p.expr);
                pieces.push(CompiledPiece { domain: piece_domain, expr: formula(&pf, &p.expr, 'x')? });
            }
            ScalarMap::new(label, domain, move |x| {
                pieces
                    .iter()
                    .find(|p| p.domain.contains(x))
                    .map_or(f64::NAN, |p| p.expr.eval(x))
            })
        }
        _ => return Err(scenario_err(field, "give exactly one of `expr` or `pieces`")),
    };
    Ok(match &spec.inverse {
        Some(src) => {
            let inv = formula(&format!("{field}.inverse"), src, 'x')?;
            map.with_inverse(move |v| inv.eval(v))
        }
        None => map,
    })
}

/// Points on which a map is validated: a uniform grid plus every piece end.
fn validation_points(spec: &MapSpec, domain: &Domain) -> Vec<f64> {
    let mut xs = domain.linspace(VALIDATION_POINTS);
    for p in &spec.pieces {
        for n in [&p.lo, &p.hi] {
            if let Ok(v) = n.value("") {
                xs.push(v);
            }
        }
    }
    xs.retain(|x| domain.contains(*x));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

fn check_selfmap(field: &str, map: &ScalarMap, points: &[f64]) -> Result<()> {
    let domain = map.domain();
    for &x in points {
        let v = map.eval(x);
        if !v.is_finite() {
            return Err(Error::NonTotal { map: field.to_string(), x });
        }
        if !domain.contains(v) {
            return Err(scenario_err(field, format!("value {v} at x = {x} leaves the domain {domain}")));
        }
    }
    Ok(())
}

fn unary(field: &str, src: &str) -> Result<Expr> {
    formula(field, src, 't')
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| Error::Toml(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Toml(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain> {
        let lo = self.domain.lo.value("domain.lo")?;
        let hi = self.domain.hi.value("domain.hi")?;
        Domain::new(lo, hi, (self.domain.closed[0], self.domain.closed[1]))
    }

    pub fn has_fact(&self, fact: DeclaredFact) -> bool {
        self.declared_facts.contains(&fact)
    }

    /// Checks everything [`Scenario::build`] relies on: schema version,
    /// formulas, breakpoints, totality and the selfmap property of both maps,
    /// and the gauge codomain on `[0, diam M]`.
    pub fn validate(&self) -> Result<()> {
        self.build().map(|_| ())
    }

    pub fn build(&self) -> Result<Model> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(scenario_err(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.name.trim().is_empty() {
            return Err(scenario_err("name", "must not be empty"));
        }
        let domain = self.domain()?;
        let s = compile_map("maps.s", &self.maps.s, domain)?;
        let t = compile_map("maps.t", &self.maps.t, domain)?;
        check_selfmap("maps.s", &s, &validation_points(&self.maps.s, &domain))?;
        check_selfmap("maps.t", &t, &validation_points(&self.maps.t, &domain))?;

        let psi_expr = unary("psi", &self.psi)?;
        let psi = AlteringDistance::new(self.psi.clone(), move |t| psi_expr.eval(t));

        let [a, b, c] = [
            unary("gauges.alpha", &self.gauges.alpha)?,
            unary("gauges.beta", &self.gauges.beta)?,
            unary("gauges.gamma", &self.gauges.gamma)?,
        ];
        let label = format!("α={}, β={}, γ={}", self.gauges.alpha, self.gauges.beta, self.gauges.gamma);
        let gauges = GaugeTriple::new(label, move |t| a.eval(t), move |t| b.eval(t), move |t| c.eval(t));
        let mut probe = linspace(0.0, domain.diameter(), GAUGE_VALIDATION_POINTS);
        probe.extend(DEFAULT_OFFSETS);
        for t in probe {
            gauges.checked(t).map_err(|e| scenario_err("gauges", e.to_string()))?;
        }

        let mut pair = ContractionPair::new(s, t, psi, gauges)?;
        if let Some(src) = &self.phi {
            let e = unary("phi", src)?;
            pair = pair.with_integral(IntegrandPhi::new(src.clone(), move |t| e.eval(t)), self.integral_middle_term);
        }

        let (ea_sequence, ea_tol) = match &self.ea_sequence {
            Some(spec) => (Some(self.ea_terms(spec, &domain)?), spec.tol),
            None => (None, DEFAULT_EA_TOL),
        };

        let expected = match &self.expected {
            None => ExpectedValues::default(),
            Some(e) => ExpectedValues {
                poc: e.poc.as_ref().map(|n| n.value("expected.poc")).transpose()?,
                cfp: e.cfp.as_ref().map(|n| n.value("expected.cfp")).transpose()?,
                cps: e
                    .cps
                    .as_ref()
                    .map(|v| v.iter().map(|n| n.value("expected.cps")).collect::<Result<Vec<_>>>())
                    .transpose()?,
            },
        };

        Ok(Model { pair, ea_sequence, ea_tol, expected })
    }

    fn ea_terms(&self, spec: &EaSequenceSpec, domain: &Domain) -> Result<Vec<f64>> {
        let field = "ea_sequence";
        if spec.end < spec.start {
            return Err(scenario_err(field, "end must not precede start"));
        }
        if !(spec.tol > 0.0) {
            return Err(scenario_err(field, "tol must be positive"));
        }
        let e = formula(field, &spec.expr, 'n')?;
        (spec.start..=spec.end)
            .map(|n| {
                let x = e.eval(n as f64);
                if domain.contains(x) {
                    Ok(x)
                } else {
                    Err(scenario_err(field, format!("term {x} at n = {n} lies outside {domain}")))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
name = "halves"

[domain]
lo = 0
hi = 1

[maps.s]
expr = "x/16"

[maps.t]
expr = "x/2"

[gauges]
alpha = "1/8"
beta = "1/8"
gamma = "1/8"
"#;

    #[test]
    fn minimal_scenario_builds() {
        let sc = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(sc.psi, "t");
        assert_eq!(sc.domain.closed, [true, true]);
        let model = sc.build().unwrap();
        assert_eq!(model.pair.s.eval(1.0), 0.0625);
        assert_eq!(model.pair.gauges.gamma(0.3), 0.125);
    }

    #[test]
    fn toml_round_trip() {
        let sc = Scenario::from_toml_str(MINIMAL).unwrap();
        let again = Scenario::from_toml_str(&sc.to_toml_string().unwrap()).unwrap();
        assert_eq!(sc, again);
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = MINIMAL.replace("name = \"halves\"", "name = \"halves\"\ncolour = 3");
        assert!(matches!(Scenario::from_toml_str(&text), Err(Error::Toml(_))));
    }

    #[test]
    fn rejects_breakpoint_outside_domain() {
        let text = MINIMAL.replace(
            "[maps.s]\nexpr = \"x/16\"",
            "[[maps.s.pieces]]\nlo = 0\nhi = 2\nexpr = \"0\"",
        );
        let err = Scenario::from_toml_str(&text).unwrap_err();
        assert!(matches!(err, Error::Breakpoint { bp, .. } if bp == 2.0), "{err}");
    }

    #[test]
    fn rejects_gamma_equal_to_one() {
        let text = MINIMAL.replace("gamma = \"1/8\"", "gamma = \"1\"");
        let err = Scenario::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
    }

    #[test]
    fn rejects_gaps_between_pieces() {
        let text = MINIMAL.replace(
            "[maps.s]\nexpr = \"x/16\"",
            "[[maps.s.pieces]]\nlo = 0\nhi = 0.5\nclosed = [true, false]\nexpr = \"0\"\n\n\
             [[maps.s.pieces]]\nlo = 0.5\nhi = 1\nclosed = [false, true]\nexpr = \"x/2\"",
        );
        let err = Scenario::from_toml_str(&text).unwrap_err();
        assert!(matches!(err, Error::NonTotal { x, .. } if x == 0.5), "{err}");
    }

    #[test]
    fn rejects_maps_leaving_the_domain() {
        let text = MINIMAL.replace("expr = \"x/16\"", "expr = \"x + 1\"");
        assert!(Scenario::from_toml_str(&text).unwrap_err().to_string().contains("leaves"));
    }

    #[test]
    fn rejects_wrong_variable_and_bad_syntax() {
        let text = MINIMAL.replace("expr = \"x/16\"", "expr = \"t/16\"");
        assert!(Scenario::from_toml_str(&text).unwrap_err().to_string().contains("only `x`"));
        let text = MINIMAL.replace("expr = \"x/16\"", "expr = \"x/\"");
        assert!(matches!(Scenario::from_toml_str(&text), Err(Error::Scenario { .. })));
    }

    #[test]
    fn constant_numbers_accept_expressions() {
        assert_eq!(Number::Expr("2/3".into()).value("f").unwrap(), 2.0 / 3.0);
        assert!(Number::Expr("x".into()).value("f").is_err());
        assert!(Number::Expr("1/0".into()).value("f").is_err());
    }

    #[test]
    fn schema_version_is_checked() {
        let text = MINIMAL.replace("schema_version = 1", "schema_version = 2");
        assert!(Scenario::from_toml_str(&text).unwrap_err().to_string().contains("schema_version"));
    }
}
