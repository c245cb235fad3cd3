use std::ffi::OsStr;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::{CabinSection, ConstellationSection, LoadedScenario, Mode, ScenarioError, VERSION};
use crate::cabin::{
    aggregate_stats, ceiling_transmitters, trace, tracer_registry, CabinGeometry, CabinScenario, CaptureRadius,
    PathLossMatrix, TraceParams,
};
use crate::constellation::{
    extract_handovers, handovers_to_csv, insertion_registry, satellites_to_csv, serving_registry,
    ConstellationError, CoverageProblem, CoverageSummary,
};
use crate::flight::{FlightError, Trajectory};
use crate::visibility::{MaskError, SampledFlight};

pub const MANIFEST_FILE: &str = "run_manifest.json";
/// The only manifest entry that differs between identical runs.
pub const TIMESTAMP_KEY: &str = "generated_unix_s";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    /// One-line human summary.
    pub headline: String,
}

/// `--out`, else the scenario's `output_dir`, else `<env root>/<stem>`,
/// else `out/<stem>`.
pub fn resolve_output_dir(cli_out: Option<&Path>, scenario: &LoadedScenario, env_root: Option<&OsStr>) -> PathBuf {
    if let Some(p) = cli_out {
        return p.to_path_buf();
    }
    if let Some(p) = &scenario.config.output_dir {
        return p.clone();
    }
    let root = env_root
        .filter(|r| !r.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"));
    root.join(scenario.stem())
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, ScenarioError> {
        std::fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), ScenarioError> {
        let p = self.dir.join(name);
        std::fs::write(&p, contents).map_err(|e| ScenarioError::io(&p, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<(), ScenarioError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable output");
        text.push('\n');
        self.write(name, text)
    }
}

/// Executes a loaded scenario and writes its outputs plus the manifest.
pub fn run(scenario: &LoadedScenario, out_dir: &Path) -> Result<RunOutcome, ScenarioError> {
    let mut out = Outputs::new(out_dir)?;
    let headline = match scenario.config.mode {
        Mode::Coverage => run_coverage(scenario, &mut out)?,
        Mode::Cabin => run_cabin(scenario, &mut out)?,
    };
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "artifact": "skybridge",
        "version": VERSION,
        "mode": scenario.config.mode,
        "scenario_file": scenario.path.display().to_string(),
        "overrides": scenario.overrides,
        "resolved_config": scenario.config,
        "outputs": out.files,
        TIMESTAMP_KEY: timestamp,
    });
    out.write_json(MANIFEST_FILE, &manifest)?;
    Ok(RunOutcome {
        output_dir: out.dir,
        files: out.files,
        headline,
    })
}

fn flight_error(s: &LoadedScenario, e: FlightError) -> ScenarioError {
    match e {
        FlightError::Validation { field, message } => s.invalid("flight", field, message),
        FlightError::Io { path, source } => ScenarioError::Input {
            path,
            message: source.to_string(),
        },
        FlightError::Parse { path, message } => ScenarioError::Input { path, message },
        other => ScenarioError::Flight(other),
    }
}

fn track_csv(trajectory: &Trajectory, grid: &[f64]) -> Result<String, FlightError> {
    let mut text = String::from("t_s,lat_deg,lon_deg,alt_m\n");
    for &t in grid {
        let g = trajectory.state_at(t)?.geodetic;
        text.push_str(&format!("{},{:.9},{:.9},{:.3}\n", t, g.lat_deg(), g.lon_deg(), g.alt_m));
    }
    Ok(text)
}

fn validate_constellation(s: &LoadedScenario, c: &ConstellationSection) -> Result<(), ScenarioError> {
    c.mask.validate().map_err(|e| {
        let key = match e {
            MaskError::MinElevation(_) => "min_elevation_deg",
            MaskError::BeamHalfAngle(_) => "beam_half_angle_deg",
        };
        s.invalid("constellation.mask", key, e.to_string())
    })?;
    c.policy().validate().map_err(|e| match e {
        ConstellationError::Policy { field, message } => s.invalid("constellation", field, message),
        other => s.invalid("constellation.template", "", other.to_string()),
    })?;
    if c.strategy != "parallel" && !c.satellites.is_empty() {
        return Err(s.invalid(
            "constellation",
            "satellites",
            "a fixed satellite list is only used by strategy = \"parallel\"",
        ));
    }
    Ok(())
}

fn run_coverage(s: &LoadedScenario, out: &mut Outputs) -> Result<String, ScenarioError> {
    let spec = s.config.flight.as_ref().expect("checked at load");
    let c = s.config.constellation.clone().unwrap_or_default();
    let trajectory = spec.to_trajectory(s.base_dir()).map_err(|e| flight_error(s, e))?;
    validate_constellation(s, &c)?;
    let strategy = insertion_registry()
        .create(&c.strategy)
        .map_err(|e| s.invalid("constellation", "strategy", e.to_string()))?;
    let serving = serving_registry()
        .create(&c.serving_policy)
        .map_err(|e| s.invalid("constellation", "serving_policy", e.to_string()))?;
    let epoch = trajectory.start_t_s();
    let fixed = c
        .satellites
        .iter()
        .enumerate()
        .map(|(i, f)| {
            c.template
                .elements(f.raan_deg, f.true_anomaly_deg, epoch)
                .map_err(|e| s.invalid("constellation.satellites", &i.to_string(), e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let flight = SampledFlight::new(&trajectory)?;
    let policy = c.policy();
    let outcome = strategy.run(
        &CoverageProblem {
            flight: &flight,
            policy: &policy,
            mask: &c.mask,
            fixed_satellites: &fixed,
        },
        serving.as_ref(),
    )?;
    let events = extract_handovers(&outcome.timeline);
    let summary = CoverageSummary::new(&outcome, &events, trajectory.duration_s());
    out.write("timeline.csv", outcome.timeline.to_csv())?;
    out.write("handovers.csv", handovers_to_csv(&events))?;
    out.write("satellites.csv", satellites_to_csv(&outcome.satellites))?;
    out.write("flight_track.csv", track_csv(&trajectory, &flight.grid)?)?;
    out.write_json("summary.json", &summary)?;
    Ok(format!(
        "coverage {:.2}% with {} active / {} discarded satellites, {} handovers, max gap {} s",
        summary.coverage_pct,
        summary.n_satellites_active,
        summary.n_satellites_discarded,
        summary.n_handovers,
        summary.max_gap_s
    ))
}

fn build_cabin(s: &LoadedScenario, c: &CabinSection) -> Result<CabinScenario, ScenarioError> {
    for (key, v) in [("length_m", c.length_m), ("width_m", c.width_m), ("height_m", c.height_m)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(s.invalid("cabin", key, format!("must be positive, got {v}")));
        }
    }
    if !(c.reflection_loss_db >= 0.0 && c.reflection_loss_db.is_finite()) {
        return Err(s.invalid("cabin", "reflection_loss_db", "must be >= 0"));
    }
    if !(c.frequency_hz > 0.0 && c.frequency_hz.is_finite()) {
        return Err(s.invalid("cabin", "frequency_hz", "must be positive"));
    }
    if !(c.angular_sep_deg > 0.0 && c.angular_sep_deg <= 10.0) {
        return Err(s.invalid("cabin", "angular_sep_deg", "must be in (0, 10]"));
    }
    if c.max_reflections > 2 {
        return Err(s.invalid("cabin", "max_reflections", "must be at most 2"));
    }
    if !(c.capture_scale > 0.0 && c.capture_scale.is_finite()) {
        return Err(s.invalid("cabin", "capture_scale", "must be positive"));
    }
    if c.tx_fractions.is_empty() || c.tx_fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
        return Err(s.invalid("cabin", "tx_fractions", "needs at least one value, each in (0, 1)"));
    }
    let geometry = CabinGeometry::new(c.length_m, c.width_m, c.height_m, c.reflection_loss_db)?;
    let params = TraceParams {
        angular_sep_deg: c.angular_sep_deg,
        max_reflections: c.max_reflections,
        capture: CaptureRadius::Proportional { scale: c.capture_scale },
    };
    let mut scenario = CabinScenario::default_layout(geometry, c.ue_array, c.frequency_hz, params);
    scenario.transmitters = ceiling_transmitters(&geometry, &c.tx_fractions, c.frequency_hz);
    Ok(scenario)
}

fn run_cabin(s: &LoadedScenario, out: &mut Outputs) -> Result<String, ScenarioError> {
    let c = s.config.cabin.clone().unwrap_or_default();
    let tracer = tracer_registry()
        .create(&c.tracer)
        .map_err(|e| s.invalid("cabin", "tracer", e.to_string()))?;
    let scenario = build_cabin(s, &c)?;
    let traced = trace(&scenario, tracer.as_ref())?;
    let matrix = PathLossMatrix::build(&scenario, &traced)?;
    let stats = aggregate_stats(&matrix)?;
    let mut buf = Vec::new();
    matrix.write_csv(&mut buf).map_err(std::io::Error::other).map_err(|e| ScenarioError::io(&out.dir, e))?;
    out.write("path_loss_matrix.csv", buf)?;
    out.write_json("tx_stats.json", &stats)?;
    if c.dump_paths {
        let mut buf = Vec::new();
        matrix
            .write_paths_csv(&traced, &mut buf)
            .map_err(std::io::Error::other)
            .map_err(|e| ScenarioError::io(&out.dir, e))?;
        out.write("paths.csv", buf)?;
    }
    let means: Vec<String> = stats.per_tx.iter().map(|t| format!("{:.2}", t.mean_db)).collect();
    Ok(format!(
        "global mean best-path loss {:.2} dB over {} links; per-Tx means [{}] dB",
        stats.global_mean_db,
        matrix.links.len(),
        means.join(", ")
    ))
}
