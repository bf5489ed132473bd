//! Built-in scenarios, embedded at compile time.

use super::Scenario;

const SOURCES: [(&str, &str); 5] = [
    ("example1_as_printed", include_str!("../../scenarios/example1_as_printed.toml")),
    ("example1_corrected", include_str!("../../scenarios/example1_corrected.toml")),
    ("example2", include_str!("../../scenarios/example2.toml")),
    ("example2_integral", include_str!("../../scenarios/example2_integral.toml")),
    ("example3", include_str!("../../scenarios/example3.toml")),
];

pub fn catalog_names() -> Vec<&'static str> {
    SOURCES.iter().map(|(name, _)| *name).collect()
}

/// The TOML source of a built-in scenario.
pub fn catalog_source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, src)| *src)
}

pub fn catalog_entry(name: &str) -> Option<Scenario> {
    catalog_source(name).map(|src| Scenario::from_toml_str(src).expect("built-in scenarios are valid"))
}

pub fn builtin_catalog() -> Vec<Scenario> {
    catalog_names().into_iter().filter_map(catalog_entry).collect()
}
