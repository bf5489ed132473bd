//! Human-readable output.

use std::fmt::Write;

use jungck_core::contraction::ContractionCertificate;
use jungck_core::jungck::{Coincidences, OwcVerdict};
use jungck_core::pipeline::{CertifyReport, CheckReport, SolveReport};
use jungck_core::scenario::{Report, Scenario};

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

/// Shortest round-trip form, in scientific notation outside `[1e-4, 1e6)`.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), num)
}

pub fn report(scenario: &Scenario, report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}", scenario.name);
    if !scenario.declared_facts.is_empty() {
        let facts: Vec<String> = scenario
            .declared_facts
            .iter()
            .map(|f| serde_json::to_value(f).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
            .collect();
        let _ = writeln!(out, "declared: {}", facts.join(", "));
    }
    if let Some(c) = &report.check {
        check(&mut out, c);
    }
    if let Some(c) = &report.certify {
        certify(&mut out, c);
    }
    if let Some(s) = &report.solve {
        solve(&mut out, s);
    }
    out
}

fn check(out: &mut String, c: &CheckReport) {
    let ad = &c.altering_distance;
    let g = &c.gauges;
    let _ = writeln!(out, "check: {}", verdict(c.passed));
    let _ = writeln!(out, "  psi axioms      {} {} {}", verdict(ad.psi1), verdict(ad.psi2), verdict(ad.psi3));
    let _ = writeln!(
        out,
        "  gauges          sum {} (max {}), gamma near 0 {} (sup {}), ratio {} (max {})",
        verdict(g.sum_ok),
        num(g.max_sum),
        verdict(g.gamma0_ok),
        num(g.gamma0_sup),
        verdict(g.ratio_ok),
        num(g.max_ratio)
    );
    if let Some(p) = &c.phi {
        let _ = writeln!(out, "  phi             nonnegative {}, positive mass {}", verdict(p.phi2_ok), verdict(p.phi3_ok));
    }
    if let Some(r) = &c.integral_altering_distance {
        let _ = writeln!(out, "  psi0∘psi axioms {} {} {}", verdict(r.psi1), verdict(r.psi2), verdict(r.psi3));
    }
    let declared = if c.containment_declared { "" } else { " (not declared, informational)" };
    let _ = writeln!(
        out,
        "  S(M) ⊆ T(M)     {} over {} points{declared}",
        verdict(c.containment.holds),
        c.containment.points_checked
    );
    for f in &c.failures {
        let _ = writeln!(out, "  ! {f}");
    }
}

fn certificate(out: &mut String, name: &str, c: &ContractionCertificate) {
    let t = &c.worst_terms;
    let _ = writeln!(out, "  {name:<9} {:?} over {} pairs (seed {})", c.verdict, c.pairs_checked, c.seed);
    let _ = writeln!(out, "            min slack {} at (x, y) = ({}, {})", num(c.min_slack), num(c.worst_pair.0), num(c.worst_pair.1));
    let _ = writeln!(
        out,
        "            lhs {} vs alpha term {} + beta term {} + gamma term {}",
        num(t.lhs),
        num(t.alpha_term),
        num(t.beta_term),
        num(t.gamma_term)
    );
}

fn certify(out: &mut String, c: &CertifyReport) {
    let _ = writeln!(out, "certify: {}", verdict(c.passed));
    certificate(out, "plain", &c.plain);
    if let Some(i) = &c.integral {
        certificate(out, "integral", i);
    }
}

fn solve(out: &mut String, s: &SolveReport) {
    let _ = writeln!(out, "solve: {}", verdict(s.passed));
    let t = &s.trace;
    let _ = writeln!(
        out,
        "  iteration       from x0 = {}: {:?} after {} steps, limit {}",
        num(s.x0),
        t.status,
        t.iterations,
        opt(t.limit)
    );
    if let Some(r) = s.observed_rate {
        let _ = writeln!(out, "  step ratio      {}", num(r));
    }
    if let Some(ea) = &s.ea {
        let _ = writeln!(
            out,
            "  property E.A.   {} (limits S {}, T {}; tail gaps {}, {})",
            verdict(ea.holds),
            num(ea.s_limit),
            num(ea.t_limit),
            num(ea.s_tail_gap),
            num(ea.t_tail_gap)
        );
    }
    let route = s.route.map_or_else(|| "-".into(), |r| format!("{r:?}"));
    let _ = writeln!(out, "  route           {route}");
    if let Some(from) = s.polished_from {
        let _ = writeln!(out, "  polished        limit estimate {} snapped to a coincidence point", num(from));
    }
    match &s.coincidence_points {
        Coincidences::Points(p) => {
            let _ = writeln!(out, "  C(S, T)         {p:?}");
        }
        Coincidences::IdenticalMaps => {
            let _ = writeln!(out, "  C(S, T)         S and T agree on the whole grid");
        }
    }
    let owc = match s.owc.verdict {
        OwcVerdict::Holds => format!("holds at {}", opt(s.owc.witness)),
        OwcVerdict::Fails => "fails".into(),
        OwcVerdict::NoCpFound => "no coincidence point".into(),
    };
    let _ = writeln!(out, "  OWC             {owc}");
    let u = &s.uniqueness;
    let _ = writeln!(
        out,
        "  uniqueness      {} of {} starts converged, spread {}",
        u.converged,
        u.outcomes.len(),
        num(u.spread)
    );
    let _ = writeln!(out, "  poc             {}", opt(s.poc));
    let _ = writeln!(out, "  cfp             {}", opt(s.cfp));
    if let Some(m) = s.expected_match {
        let _ = writeln!(out, "  expected        {}", verdict(m));
    }
    if let Some(stage) = s.failed_stage {
        let _ = writeln!(out, "  ! failed at stage {stage:?}");
    }
}
