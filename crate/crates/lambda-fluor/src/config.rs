//! Flat `key = value` run configuration.
//!
//! The format is deliberately trivial: one `key = value` per line, `#`
//! comments, blank lines ignored. Grid and output settings use dotted
//! keys (`grid.span`, `output.format`) so the file stays flat and
//! diff-friendly. Echoing a parsed config with [`RunConfig::to_text`] and
//! reparsing yields an identical value; numbers print in shortest
//! round-trip decimal form.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Output format of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    /// Flat `key = value` report.
    StructuredText,
}

impl OutputFormat {
    fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::StructuredText => "structured-text",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "structured-text" => Ok(OutputFormat::StructuredText),
            other => Err(Error::InvalidConfig(format!(
                "output.format must be `csv` or `structured-text`, got `{other}`"
            ))),
        }
    }
}

/// Frequency-grid settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    /// Half-width of the uniform grid, in units of γ₁. Defaults to ten
    /// times the largest rate in the problem.
    pub span: f64,
    /// Number of uniform points; odd counts hit the laser frequency
    /// exactly.
    pub points: usize,
    /// Add the logarithmic center insert that resolves the narrow feature.
    pub refine_center: bool,
}

/// Output settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub format: Option<OutputFormat>,
    pub path: Option<PathBuf>,
}

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub grid: GridConfig,
    pub output: OutputConfig,
}

fn default_span(params: &SystemParams) -> f64 {
    10.0 * params
        .omega1
        .max(params.omega2)
        .max(params.detuning.abs() + params.splitting.abs())
        .max(params.gamma1)
        .max(params.gamma2)
}

const DEFAULT_POINTS: usize = 4001;

impl RunConfig {
    /// Parses the flat `key = value` format. Unknown keys are rejected by
    /// name, except the `result.*` namespace, which commands use to echo
    /// computed scalars into CSV headers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "line {}: empty key or value",
                    lineno + 1
                )));
            }
            if seen.insert(key.clone(), value).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate key `{key}`")));
            }
        }

        let mut take_f64 = |key: &str| -> Result<Option<f64>> {
            match seen.remove(key) {
                None => Ok(None),
                Some(v) => v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::InvalidConfig(format!("key `{key}`: not a number: `{v}`"))),
            }
        };

        let mut require_f64 = |key: &'static str| -> Result<f64> {
            take_f64(key)?
                .ok_or_else(|| Error::InvalidConfig(format!("missing required key `{key}`")))
        };

        let params = SystemParams::new(
            require_f64("gamma1")?,
            require_f64("gamma2")?,
            require_f64("omega1")?,
            require_f64("omega2")?,
            require_f64("detuning")?,
            require_f64("splitting")?,
            require_f64("p")?,
        )?;

        let span = take_f64("grid.span")?.unwrap_or_else(|| default_span(&params));
        if !span.is_finite() || span <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "grid.span must be finite and > 0, got {span}"
            )));
        }
        let points = match seen.remove("grid.points") {
            None => DEFAULT_POINTS,
            Some(v) => v.parse::<usize>().map_err(|_| {
                Error::InvalidConfig(format!("key `grid.points`: not an integer: `{v}`"))
            })?,
        };
        if points < 3 {
            return Err(Error::InvalidConfig(format!(
                "grid.points must be at least 3, got {points}"
            )));
        }
        let refine_center = match seen.remove("grid.refine_center") {
            None => false,
            Some(v) => match v.as_str() {
                "true" => true,
                "false" => false,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "key `grid.refine_center`: expected true or false, got `{other}`"
                    )))
                }
            },
        };

        let format = match seen.remove("output.format") {
            None => None,
            Some(v) => Some(OutputFormat::parse(&v)?),
        };
        let path = seen.remove("output.path").map(PathBuf::from);

        if let Some(unknown) = seen.keys().find(|k| !k.starts_with("result.")) {
            return Err(Error::InvalidConfig(format!("unknown key `{unknown}`")));
        }

        Ok(RunConfig {
            params,
            grid: GridConfig {
                span,
                points,
                refine_center,
            },
            output: OutputConfig { format, path },
        })
    }

    /// Serializes back to the flat format; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        for (key, value) in [
            ("gamma1", p.gamma1),
            ("gamma2", p.gamma2),
            ("omega1", p.omega1),
            ("omega2", p.omega2),
            ("detuning", p.detuning),
            ("splitting", p.splitting),
            ("p", p.p),
            ("grid.span", self.grid.span),
        ] {
            out.push_str(&format!("{key} = {value}\n"));
        }
        out.push_str(&format!("grid.points = {}\n", self.grid.points));
        out.push_str(&format!(
            "grid.refine_center = {}\n",
            self.grid.refine_center
        ));
        if let Some(format) = self.output.format {
            out.push_str(&format!("output.format = {}\n", format.as_str()));
        }
        if let Some(path) = &self.output.path {
            out.push_str(&format!("output.path = {}\n", path.display()));
        }
        out
    }
}
