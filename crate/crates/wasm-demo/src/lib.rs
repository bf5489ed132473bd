//! Browser bindings for the static demo page in `www/`.
//!
//! Every export takes scenario TOML and returns JSON. The plain functions
//! below do the work and are what the native tests exercise.

use jungck_core::contraction::{terms, Form};
use jungck_core::jungck::{iterate, IterConfig};
use jungck_core::metric::{sample_grid, GridStrategy};
use jungck_core::pipeline::{self, Settings};
use jungck_core::scenario::{catalog_names, catalog_source, Report, Scenario};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest heatmap side accepted by [`slack_field`].
pub const MAX_RESOLUTION: usize = 256;

/// The iteration from one start, shaped for plotting.
#[derive(Debug, Serialize)]
pub struct TraceView {
    pub x0: f64,
    pub x_seq: Vec<f64>,
    pub y_seq: Vec<f64>,
    pub step_dist: Vec<f64>,
    pub status: String,
    pub limit: Option<f64>,
    pub iterations: usize,
    /// `d(y_{n+1}, y_{n+2}) / d(y_n, y_{n+1})` wherever the denominator is positive.
    pub step_ratios: Vec<f64>,
}

/// Slack `rhs - lhs` of the contraction inequality on a square grid, row-major in `y`.
#[derive(Debug, Serialize)]
pub struct SlackField {
    pub lo: f64,
    pub hi: f64,
    pub resolution: usize,
    pub axis: Vec<f64>,
    pub slack: Vec<f64>,
    pub min_slack: f64,
    pub worst_pair: (f64, f64),
    pub violations: usize,
}

fn parse(toml: &str) -> Result<Scenario, String> {
    let sc = Scenario::from_toml_str(toml).map_err(|e| e.to_string())?;
    sc.validate().map_err(|e| e.to_string())?;
    Ok(sc)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

pub fn list_catalog() -> Vec<String> {
    catalog_names().iter().map(|s| s.to_string()).collect()
}

pub fn catalog_text(name: &str) -> Result<String, String> {
    catalog_source(name).map(str::to_string).ok_or_else(|| format!("no built-in scenario `{name}`"))
}

/// Runs the iteration from `x0`, or from the domain midpoint when `x0` is NaN.
pub fn trace(toml: &str, x0: f64) -> Result<TraceView, String> {
    let model = parse(toml)?.build().map_err(|e| e.to_string())?;
    let x0 = if x0.is_nan() { model.pair.domain().midpoint() } else { x0 };
    let t = iterate(&model.pair, x0, &IterConfig::default()).map_err(|e| e.to_string())?;
    let step_ratios = t.step_dist.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect();
    Ok(TraceView {
        x0,
        status: serde_json::to_value(t.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        limit: t.limit,
        iterations: t.iterations,
        x_seq: t.x_seq,
        y_seq: t.y_seq,
        step_dist: t.step_dist,
        step_ratios,
    })
}

pub fn slack(toml: &str, resolution: usize) -> Result<SlackField, String> {
    if !(2..=MAX_RESOLUTION).contains(&resolution) {
        return Err(format!("resolution must lie in 2..={MAX_RESOLUTION}"));
    }
    let model = parse(toml)?.build().map_err(|e| e.to_string())?;
    let pair = &model.pair;
    let dom = pair.domain();
    let axis = sample_grid(dom, resolution, GridStrategy::Uniform, 0).map_err(|e| e.to_string())?.points().to_vec();
    let mut field = Vec::with_capacity(resolution * resolution);
    let mut min_slack = f64::INFINITY;
    let mut worst_pair = (axis[0], axis[0]);
    let mut violations = 0;
    for &y in &axis {
        for &x in &axis {
            let s = terms(pair, &Form::Plain, x, y).map_err(|e| e.to_string())?.slack();
            if s < min_slack {
                min_slack = s;
                worst_pair = (x, y);
            }
            if s < 0.0 {
                violations += 1;
            }
            field.push(s);
        }
    }
    Ok(SlackField { lo: dom.lo(), hi: dom.hi(), resolution, axis, slack: field, min_slack, worst_pair, violations })
}

/// Check, certify and solve with default settings and the given seed.
pub fn full_report(toml: &str, seed: u64) -> Result<Report, String> {
    let sc = parse(toml)?;
    let settings = Settings { seed, ..Settings::default() };
    let mut report = Report::new(&sc, settings);
    report.check = Some(pipeline::check(&sc, &settings).map_err(|e| e.to_string())?);
    report.certify = Some(pipeline::certify_scenario(&sc, &settings).map_err(|e| e.to_string())?);
    report.solve = Some(pipeline::solve(&sc, &settings).map_err(|e| e.to_string())?.report);
    Ok(report)
}

fn js<T>(r: Result<T, String>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = catalogNames)]
pub fn catalog_names_js() -> Result<String, JsValue> {
    js(to_json(&list_catalog()))
}

#[wasm_bindgen(js_name = catalogText)]
pub fn catalog_text_js(name: &str) -> Result<String, JsValue> {
    js(catalog_text(name))
}

#[wasm_bindgen(js_name = jungckTrace)]
pub fn jungck_trace_js(toml: &str, x0: f64) -> Result<String, JsValue> {
    js(trace(toml, x0).and_then(|t| to_json(&t)))
}

#[wasm_bindgen(js_name = slackField)]
pub fn slack_field_js(toml: &str, resolution: usize) -> Result<String, JsValue> {
    js(slack(toml, resolution).and_then(|f| to_json(&f)))
}

#[wasm_bindgen(js_name = fullReport)]
pub fn full_report_js(toml: &str, seed: u32) -> Result<String, JsValue> {
    js(full_report(toml, u64::from(seed)).and_then(|r| r.to_json().map_err(|e| e.to_string())))
}
