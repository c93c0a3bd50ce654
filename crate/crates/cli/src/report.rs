//! Versioned JSON reports.

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// One pass/fail check embedded in a report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `>=`, `>` or `<=`.
    pub relation: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: ">=",
            threshold,
            pass: value >= threshold,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: ">",
            threshold,
            pass: value > threshold,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: "<=",
            threshold,
            pass: value <= threshold,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: C,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(command: &'static str, config: C, checks: Vec<Check>, result: R) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "hidcvx",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            checks,
            pass,
            result,
        }
    }
}

/// What a subcommand hands back to `main`.
pub struct Outcome {
    pub json: String,
    pub csv: Option<String>,
    pub pass: bool,
}

impl Outcome {
    pub fn new<C: Serialize, R: Serialize>(
        report: &Report<C, R>,
        csv: Option<String>,
    ) -> anyhow::Result<Self> {
        let mut json = serde_json::to_string_pretty(report)?;
        json.push('\n');
        Ok(Self {
            json,
            csv,
            pass: report.pass,
        })
    }
}

/// Joins CSV rows; every field is numeric or a bare identifier.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
