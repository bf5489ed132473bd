//! Report files: JSON documents with a fixed field order.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DeclaredFact, Scenario, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::pipeline::{CertifyReport, CheckReport, Settings, SolveReport};

/// Everything a run produced for one scenario. Sections that were not run
/// are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub declared_facts: BTreeSet<DeclaredFact>,
    pub settings: Settings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifyReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
}

impl Report {
    pub fn new(scenario: &Scenario, settings: Settings) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.name.clone(),
            declared_facts: scenario.declared_facts.clone(),
            settings,
            check: None,
            certify: None,
            solve: None,
        }
    }

    /// True when every section that was run passed.
    pub fn passed(&self) -> bool {
        self.check.as_ref().is_none_or(|c| c.passed)
            && self.certify.as_ref().is_none_or(|c| c.passed)
            && self.solve.as_ref().is_none_or(|s| s.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Report = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::Scenario {
                field: "schema_version".into(),
                msg: format!("unsupported report version {}", report.schema_version),
            });
        }
        Ok(report)
    }
}

pub fn save_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    let mut text = report.to_json()?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_report(path: impl AsRef<Path>) -> Result<Report> {
    Report::from_json(&std::fs::read_to_string(path)?)
}
