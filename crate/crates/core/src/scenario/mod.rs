//! Scenario files: one TOML document describing a coverage run or a cabin
//! run, command-line overrides on top of it, and the output/report plumbing.

mod report;
mod run;

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cabin::{CabinError, UeArray, DEFAULT_FREQUENCY_HZ, DEFAULT_TX_FRACTIONS};
use crate::constellation::{ConstellationError, ElementTemplate, InsertionPolicy};
use crate::flight::{FlightError, FlightSpec};
use crate::visibility::VisibilityMask;

pub use report::{report, ReportSummary};
pub use run::{resolve_output_dir, run, RunOutcome, MANIFEST_FILE, TIMESTAMP_KEY};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const OUTPUT_ENV: &str = "SKYBRIDGE_OUT";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{file}: [{section}] `{key}`: {message}")]
    Invalid {
        file: PathBuf,
        section: String,
        key: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("invalid override `{expr}`: {message}")]
    Override { expr: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Constellation(#[from] ConstellationError),
    #[error(transparent)]
    Cabin(#[from] CabinError),
    #[error(transparent)]
    Flight(#[from] FlightError),
}

impl ScenarioError {
    /// 2 for bad input (config, overrides, run directory), 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Invalid { .. } | ScenarioError::Input { .. } | ScenarioError::Override { .. } => 2,
            _ => 1,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Coverage,
    Cabin,
}

/// One fixed satellite for the `parallel` strategy; the remaining elements
/// come from the template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedSatellite {
    pub raan_deg: f64,
    pub true_anomaly_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstellationSection {
    pub strategy: String,
    pub serving_policy: String,
    pub connect_timeout_s: f64,
    pub max_satellites: usize,
    pub search_raan_step_deg: f64,
    pub search_anomaly_step_deg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lookahead_s: Option<f64>,
    pub template: ElementTemplate,
    pub mask: VisibilityMask,
    pub satellites: Vec<FixedSatellite>,
}

impl Default for ConstellationSection {
    fn default() -> Self {
        let p = InsertionPolicy::default();
        Self {
            strategy: "sequential".into(),
            serving_policy: "sticky".into(),
            connect_timeout_s: p.connect_timeout_s,
            max_satellites: p.max_satellites,
            search_raan_step_deg: p.search_raan_step_deg,
            search_anomaly_step_deg: p.search_anomaly_step_deg,
            lookahead_s: p.lookahead_s,
            template: p.template,
            mask: VisibilityMask::default(),
            satellites: Vec::new(),
        }
    }
}

impl ConstellationSection {
    pub fn policy(&self) -> InsertionPolicy {
        InsertionPolicy {
            connect_timeout_s: self.connect_timeout_s,
            max_satellites: self.max_satellites,
            search_raan_step_deg: self.search_raan_step_deg,
            search_anomaly_step_deg: self.search_anomaly_step_deg,
            lookahead_s: self.lookahead_s,
            template: self.template,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CabinSection {
    pub tracer: String,
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
    pub reflection_loss_db: f64,
    pub frequency_hz: f64,
    pub angular_sep_deg: f64,
    pub max_reflections: usize,
    /// Multiplier on the distance-proportional capture radius.
    pub capture_scale: f64,
    pub ue_array: UeArray,
    /// Transmitter positions along the cabin, as fractions of its length.
    pub tx_fractions: Vec<f64>,
    pub dump_paths: bool,
}

impl Default for CabinSection {
    fn default() -> Self {
        Self {
            tracer: "sbr".into(),
            length_m: 45.0,
            width_m: 5.6,
            height_m: 2.4,
            reflection_loss_db: 1.0,
            frequency_hz: DEFAULT_FREQUENCY_HZ,
            angular_sep_deg: 1.0,
            max_reflections: 2,
            capture_scale: 1.0,
            ue_array: UeArray::default(),
            tx_fractions: DEFAULT_TX_FRACTIONS.to_vec(),
            dump_paths: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flight: Option<FlightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constellation: Option<ConstellationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cabin: Option<CabinSection>,
}

/// A parsed scenario plus where it came from.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub path: PathBuf,
    pub config: ScenarioConfig,
    pub overrides: Vec<String>,
}

impl LoadedScenario {
    pub fn base_dir(&self) -> &Path {
        self.path.parent().unwrap_or(Path::new("."))
    }

    pub fn stem(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into())
    }

    pub(crate) fn invalid(&self, section: &str, key: &str, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid {
            file: self.path.clone(),
            section: section.into(),
            key: key.into(),
            message: message.into(),
        }
    }
}

/// Applies `section.key=value` to a TOML tree. The value is read as a TOML
/// literal when it parses as one and as a bare string otherwise.
pub fn apply_override(tree: &mut toml::Table, expr: &str) -> Result<(), ScenarioError> {
    let err = |m: &str| ScenarioError::Override {
        expr: expr.into(),
        message: m.into(),
    };
    let (path, raw) = expr.split_once('=').ok_or_else(|| err("expected key=value"))?;
    let keys: Vec<&str> = path.trim().split('.').map(str::trim).collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(err("empty key segment"));
    }
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let (last, parents) = keys.split_last().expect("non-empty");
    let mut node = tree;
    for k in parents {
        let entry = node
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| err(&format!("`{k}` is not a table")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// Section header and key for a deserialization error at `span` in `text`.
fn locate(text: &str, span: Option<Range<usize>>, message: &str) -> (String, String) {
    let backticked = |prefix: &str| {
        message
            .find(prefix)
            .and_then(|i| message[i + prefix.len()..].split('`').next())
            .map(str::to_string)
    };
    let Some(span) = span else {
        return ("(top level)".into(), backticked("field `").unwrap_or_default());
    };
    let start = span.start.min(text.len());
    let mut section = "(top level)".to_string();
    for line in text[..start].lines() {
        let l = line.trim();
        if l.starts_with('[') {
            section = l.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
    }
    let line_start = text[..start].rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next().unwrap_or("").trim();
    let key = if let Some(k) = backticked("missing field `") {
        k
    } else if let Some((k, _)) = line.split_once('=') {
        k.trim().to_string()
    } else if line.starts_with('[') {
        line.trim_matches(|c| c == '[' || c == ']').trim().to_string()
    } else {
        backticked("field `").unwrap_or_default()
    };
    (section, key)
}

/// Reads a scenario file, applies overrides in order and checks the result.
pub fn load(path: &Path, overrides: &[String]) -> Result<LoadedScenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Input {
        path: path.to_path_buf(),
        message: format!("cannot read scenario file: {e}"),
    })?;
    let parse_error = |text: &str, e: toml::de::Error| {
        let (section, key) = locate(text, e.span(), e.message());
        ScenarioError::Invalid {
            file: path.to_path_buf(),
            section,
            key,
            message: e.message().trim().to_string(),
        }
    };
    let mut tree: toml::Table = toml::from_str(&text).map_err(|e| parse_error(&text, e))?;
    let effective = if overrides.is_empty() {
        text
    } else {
        for o in overrides {
            apply_override(&mut tree, o)?;
        }
        toml::to_string(&tree).map_err(|e| ScenarioError::Override {
            expr: overrides.join(" "),
            message: e.to_string(),
        })?
    };
    let config: ScenarioConfig = toml::from_str(&effective).map_err(|e| parse_error(&effective, e))?;
    let loaded = LoadedScenario {
        path: path.to_path_buf(),
        config,
        overrides: overrides.to_vec(),
    };
    check_sections(&loaded)?;
    Ok(loaded)
}

fn check_sections(s: &LoadedScenario) -> Result<(), ScenarioError> {
    let c = &s.config;
    match c.mode {
        Mode::Coverage => {
            if c.cabin.is_some() {
                return Err(s.invalid("cabin", "mode", "a coverage scenario must not have a [cabin] section"));
            }
            if c.flight.is_none() {
                return Err(s.invalid("flight", "mode", "a coverage scenario needs a [flight] section"));
            }
        }
        Mode::Cabin => {
            if c.flight.is_some() || c.constellation.is_some() {
                return Err(s.invalid(
                    "(top level)",
                    "mode",
                    "a cabin scenario takes only a [cabin] section",
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("s.toml");
        std::fs::write(&p, body).unwrap();
        p
    }

    const COVERAGE: &str = r#"
mode = "coverage"

[flight]
origin = { lat_deg = 40.0, lon_deg = -73.0 }
destination = { lat_deg = 18.0, lon_deg = -69.0 }

[constellation]
max_satellites = 3
"#;

    #[test]
    fn loads_and_defaults() {
        let d = tempfile::tempdir().unwrap();
        let s = load(&write(d.path(), COVERAGE), &[]).unwrap();
        let c = s.config.constellation.unwrap();
        assert_eq!(c.max_satellites, 3);
        assert_eq!(c.strategy, "sequential");
        assert_eq!(c.template, ElementTemplate::default());
    }

    #[test]
    fn unknown_key_names_section_and_key() {
        let d = tempfile::tempdir().unwrap();
        let body = COVERAGE.replace("max_satellites = 3", "max_satelites = 3");
        let err = load(&write(d.path(), &body), &[]).unwrap_err();
        match &err {
            ScenarioError::Invalid { section, key, .. } => {
                assert_eq!(section, "constellation");
                assert_eq!(key, "max_satelites");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("s.toml"));
    }

    #[test]
    fn wrong_type_names_key() {
        let d = tempfile::tempdir().unwrap();
        let body = COVERAGE.replace("max_satellites = 3", "max_satellites = \"many\"");
        match load(&write(d.path(), &body), &[]).unwrap_err() {
            ScenarioError::Invalid { section, key, .. } => {
                assert_eq!((section.as_str(), key.as_str()), ("constellation", "max_satellites"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_apply_and_create_tables() {
        let d = tempfile::tempdir().unwrap();
        let p = write(d.path(), COVERAGE);
        let s = load(
            &p,
            &[
                "constellation.max_satellites=7".into(),
                "constellation.template.inclination_deg = 53".into(),
                "constellation.strategy=parallel".into(),
            ],
        )
        .unwrap();
        let c = s.config.constellation.unwrap();
        assert_eq!(c.max_satellites, 7);
        assert_eq!(c.template.inclination_deg, 53.0);
        assert_eq!(c.strategy, "parallel");
        assert!(matches!(
            load(&p, &["novalue".into()]),
            Err(ScenarioError::Override { .. })
        ));
    }

    #[test]
    fn mode_sections_are_exclusive() {
        let d = tempfile::tempdir().unwrap();
        let body = format!("{COVERAGE}\n[cabin]\n");
        assert!(matches!(
            load(&write(d.path(), &body), &[]),
            Err(ScenarioError::Invalid { .. })
        ));
        let cabin = "mode = \"cabin\"\n[cabin]\nangular_sep_deg = 5.0\n";
        let s = load(&write(d.path(), cabin), &[]).unwrap();
        assert_eq!(s.config.cabin.unwrap().angular_sep_deg, 5.0);
    }

    #[test]
    fn missing_file_is_input_error() {
        let err = load(Path::new("/nonexistent/x.toml"), &[]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("/nonexistent/x.toml"));
    }
}
