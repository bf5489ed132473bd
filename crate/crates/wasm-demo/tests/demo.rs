use jungck_wasm_demo::{catalog_text, full_report, list_catalog, slack, trace};

#[test]
fn catalog_is_exposed() {
    let names = list_catalog();
    assert_eq!(names.len(), 5);
    for n in &names {
        assert!(catalog_text(n).unwrap().contains("schema_version"));
    }
}

#[test]
fn example_one_trace_is_geometric() {
    let t = trace(&catalog_text("example1_corrected").unwrap(), 1.0).unwrap();
    assert_eq!(t.limit, Some(0.0));
    assert!(t.step_ratios.iter().take(8).all(|r| (r - 0.125).abs() < 1e-10));
}

#[test]
fn example_two_field_has_no_violations() {
    let f = slack(&catalog_text("example2").unwrap(), 33).unwrap();
    assert_eq!(f.slack.len(), 33 * 33);
    assert_eq!(f.violations, 0);
    assert!(f.min_slack >= 0.0);
}

#[test]
fn identity_pair_field_is_violated() {
    let src = catalog_text("example1_corrected").unwrap().replace("\"x/16\"", "\"x\"").replace("\"x/2\"", "\"x\"");
    let f = slack(&src, 17).unwrap();
    assert!(f.violations > 0);
    assert!(f.min_slack < 0.0);
}

#[test]
fn report_matches_cli_semantics() {
    let r = full_report(&catalog_text("example3").unwrap(), 42).unwrap();
    let cfp = r.solve.as_ref().unwrap().cfp.unwrap();
    assert!((cfp - 2.0 / 3.0).abs() <= 1e-9);
    assert_eq!(r.settings.seed, 42);
}

#[test]
fn bad_toml_is_an_error() {
    assert!(trace("not = [valid", 0.0).is_err());
}
