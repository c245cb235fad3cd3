//! Aircraft trajectory along a great circle, or replayed from a recorded
//! LLA track.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orbit::{geodetic_to_ecef, Geodetic, Vec3, EARTH_RADIUS_M};

pub const DEFAULT_CRUISE_ALT_M: f64 = 11_000.0;
pub const DEFAULT_GROUND_SPEED_MPS: f64 = 250.0;
pub const DEFAULT_TIMESTEP_S: f64 = 1.0;

#[derive(Debug, Error)]
pub enum FlightError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid flight plan: `{field}` {message}")]
    Validation {
        field: &'static str,
        message: String,
    },
    #[error("time {t_s} s outside flight window [{start_s}, {end_s}]")]
    OutOfRange { t_s: f64, start_s: f64, end_s: f64 },
}

fn invalid(field: &'static str, message: impl Into<String>) -> FlightError {
    FlightError::Validation {
        field,
        message: message.into(),
    }
}

/// Central angle between two surface points (haversine form).
pub fn central_angle(a: &Geodetic, b: &Geodetic) -> f64 {
    let dlat = b.lat_rad - a.lat_rad;
    let dlon = b.lon_rad - a.lon_rad;
    let h = (dlat / 2.0).sin().powi(2)
        + a.lat_rad.cos() * b.lat_rad.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * h.sqrt().min(1.0).asin()
}

/// Surface great-circle distance on the spherical Earth, metres.
pub fn great_circle_distance(a: &Geodetic, b: &Geodetic) -> f64 {
    central_angle(a, b) * EARTH_RADIUS_M
}

/// Constant-speed, constant-altitude great-circle flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlightPlan {
    pub origin: Geodetic,
    pub destination: Geodetic,
    pub cruise_alt_m: f64,
    pub ground_speed_mps: f64,
    pub departure_t_s: f64,
    pub timestep_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AircraftState {
    pub t_s: f64,
    pub geodetic: Geodetic,
    pub ecef_m: Vec3,
}

impl AircraftState {
    fn from_geodetic(t_s: f64, geodetic: Geodetic) -> Self {
        Self {
            t_s,
            geodetic,
            ecef_m: geodetic_to_ecef(&geodetic),
        }
    }
}

impl FlightPlan {
    pub fn new(
        origin: Geodetic,
        destination: Geodetic,
        cruise_alt_m: f64,
        ground_speed_mps: f64,
        departure_t_s: f64,
        timestep_s: f64,
    ) -> Result<Self, FlightError> {
        if !(ground_speed_mps > 0.0) || !ground_speed_mps.is_finite() {
            return Err(invalid("ground_speed_mps", "must be positive"));
        }
        if !(timestep_s > 0.0) || !timestep_s.is_finite() {
            return Err(invalid("timestep_s", "must be positive"));
        }
        if !(cruise_alt_m >= 0.0) || !cruise_alt_m.is_finite() {
            return Err(invalid("cruise_alt_m", "must be non-negative"));
        }
        if !departure_t_s.is_finite() {
            return Err(invalid("departure_t_s", "must be finite"));
        }
        let angle = central_angle(&origin, &destination);
        if angle < 1e-12 {
            return Err(invalid("destination", "coincides with origin"));
        }
        if (std::f64::consts::PI - angle) < 1e-9 {
            return Err(invalid("destination", "is antipodal to origin; route is ambiguous"));
        }
        Ok(Self {
            origin: origin.with_alt(cruise_alt_m),
            destination: destination.with_alt(cruise_alt_m),
            cruise_alt_m,
            ground_speed_mps,
            departure_t_s,
            timestep_s,
        })
    }

    pub fn central_angle(&self) -> f64 {
        central_angle(&self.origin, &self.destination)
    }

    /// Route length measured at cruise altitude.
    pub fn distance_m(&self) -> f64 {
        self.central_angle() * (EARTH_RADIUS_M + self.cruise_alt_m)
    }

    pub fn duration_s(&self) -> f64 {
        self.distance_m() / self.ground_speed_mps
    }

    pub fn arrival_t_s(&self) -> f64 {
        self.departure_t_s + self.duration_s()
    }
}

/// Aircraft state at `t_s`, interpolated along the great circle at cruise
/// altitude.
pub fn position_at(plan: &FlightPlan, t_s: f64) -> Result<AircraftState, FlightError> {
    let end = plan.arrival_t_s();
    let slack = 1e-9 * end.abs().max(1.0);
    if !(t_s >= plan.departure_t_s - slack && t_s <= end + slack) {
        return Err(FlightError::OutOfRange {
            t_s,
            start_s: plan.departure_t_s,
            end_s: end,
        });
    }
    let fraction = ((t_s - plan.departure_t_s) / plan.duration_s()).clamp(0.0, 1.0);
    let geodetic = slerp_geodetic(&plan.origin, &plan.destination, fraction, plan.cruise_alt_m);
    Ok(AircraftState::from_geodetic(t_s, geodetic))
}

fn slerp_geodetic(a: &Geodetic, b: &Geodetic, fraction: f64, alt_m: f64) -> Geodetic {
    if fraction == 0.0 {
        return a.with_alt(alt_m);
    }
    if fraction == 1.0 {
        return b.with_alt(alt_m);
    }
    let u = a.unit_vector();
    let v = b.unit_vector();
    let omega = u.dot(&v).clamp(-1.0, 1.0).acos();
    let p = if omega < 1e-12 {
        u
    } else {
        (u * ((1.0 - fraction) * omega).sin() + v * (fraction * omega).sin()) / omega.sin()
    };
    let lat_rad = p.z.atan2(p.x.hypot(p.y));
    let lon_rad = if p.x.hypot(p.y) < 1e-15 { 0.0 } else { p.y.atan2(p.x) };
    Geodetic {
        lat_rad,
        lon_rad: crate::orbit::wrap_pi(lon_rad),
        alt_m,
    }
}

/// One row of a recorded track file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackSample {
    pub t_s: f64,
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_m: f64,
}

/// Externally recorded LLA samples, replayed with great-circle interpolation
/// between consecutive rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedTrack {
    samples: Vec<(f64, Geodetic)>,
    timestep_s: f64,
}

impl RecordedTrack {
    pub fn new(rows: &[TrackSample], timestep_s: f64) -> Result<Self, FlightError> {
        if rows.len() < 2 {
            return Err(invalid("track_csv", "needs at least two samples"));
        }
        if !(timestep_s > 0.0) {
            return Err(invalid("timestep_s", "must be positive"));
        }
        let mut samples = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if i > 0 && !(r.t_s > rows[i - 1].t_s) {
                return Err(invalid(
                    "t_s",
                    format!("must be strictly increasing (row {})", i + 1),
                ));
            }
            let g = Geodetic::from_degrees(r.lat_deg, r.lon_deg, r.alt_m)
                .map_err(|e| invalid("lat_deg/lon_deg/alt_m", format!("row {}: {e}", i + 1)))?;
            samples.push((r.t_s, g));
        }
        Ok(Self {
            samples,
            timestep_s,
        })
    }

    pub fn from_csv(path: &Path, timestep_s: f64) -> Result<Self, FlightError> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| FlightError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let headers = reader
            .headers()
            .map_err(|e| FlightError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?
            .clone();
        let expected = ["t_s", "lat_deg", "lon_deg", "alt_m"];
        if headers.iter().map(str::trim).ne(expected.iter().copied()) {
            return Err(FlightError::Parse {
                path: path.to_path_buf(),
                message: format!("header must be `{}`", expected.join(",")),
            });
        }
        let mut rows = Vec::new();
        for rec in reader.deserialize::<TrackSample>() {
            rows.push(rec.map_err(|e| FlightError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?);
        }
        Self::new(&rows, timestep_s)
    }

    pub fn start_t_s(&self) -> f64 {
        self.samples[0].0
    }

    pub fn end_t_s(&self) -> f64 {
        self.samples[self.samples.len() - 1].0
    }

    pub fn state_at(&self, t_s: f64) -> Result<AircraftState, FlightError> {
        if !(t_s >= self.start_t_s() && t_s <= self.end_t_s()) {
            return Err(FlightError::OutOfRange {
                t_s,
                start_s: self.start_t_s(),
                end_s: self.end_t_s(),
            });
        }
        let idx = self
            .samples
            .partition_point(|(t, _)| *t <= t_s)
            .clamp(1, self.samples.len() - 1);
        let (t0, g0) = self.samples[idx - 1];
        let (t1, g1) = self.samples[idx];
        let f = ((t_s - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let alt = g0.alt_m + f * (g1.alt_m - g0.alt_m);
        Ok(AircraftState::from_geodetic(
            t_s,
            slerp_geodetic(&g0, &g1, f, alt),
        ))
    }
}

/// Either trajectory source the simulator can consume.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    Planned(FlightPlan),
    Recorded(RecordedTrack),
}

impl Trajectory {
    pub fn start_t_s(&self) -> f64 {
        match self {
            Self::Planned(p) => p.departure_t_s,
            Self::Recorded(r) => r.start_t_s(),
        }
    }

    pub fn end_t_s(&self) -> f64 {
        match self {
            Self::Planned(p) => p.arrival_t_s(),
            Self::Recorded(r) => r.end_t_s(),
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.end_t_s() - self.start_t_s()
    }

    pub fn timestep_s(&self) -> f64 {
        match self {
            Self::Planned(p) => p.timestep_s,
            Self::Recorded(r) => r.timestep_s,
        }
    }

    pub fn state_at(&self, t_s: f64) -> Result<AircraftState, FlightError> {
        match self {
            Self::Planned(p) => position_at(p, t_s),
            Self::Recorded(r) => r.state_at(t_s),
        }
    }

    /// Sample times `start + k·step` for `k < ceil(duration / step)`; each
    /// sample stands for the half-open interval `[t, t + step)`.
    pub fn time_grid(&self) -> Vec<f64> {
        let step = self.timestep_s();
        let n = (self.duration_s() / step - 1e-9).ceil().max(1.0) as usize;
        let start = self.start_t_s();
        (0..n).map(|k| start + k as f64 * step).collect()
    }
}

/// On-disk flight section: endpoints plus kinematics, or a CSV track path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<LatLon>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub destination: Option<LatLon>,
    #[serde(default = "default_cruise_alt")]
    pub cruise_alt_m: f64,
    #[serde(default = "default_speed")]
    pub ground_speed_mps: f64,
    #[serde(default)]
    pub departure_t_s: f64,
    #[serde(default = "default_timestep")]
    pub timestep_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatLon {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

fn default_cruise_alt() -> f64 {
    DEFAULT_CRUISE_ALT_M
}
fn default_speed() -> f64 {
    DEFAULT_GROUND_SPEED_MPS
}
fn default_timestep() -> f64 {
    DEFAULT_TIMESTEP_S
}

impl FlightSpec {
    pub fn to_plan(&self) -> Result<FlightPlan, FlightError> {
        let origin = self.origin.ok_or_else(|| invalid("origin", "is required"))?;
        let destination = self
            .destination
            .ok_or_else(|| invalid("destination", "is required"))?;
        let o = Geodetic::from_degrees(origin.lat_deg, origin.lon_deg, 0.0)
            .map_err(|e| invalid("origin", e.to_string()))?;
        let d = Geodetic::from_degrees(destination.lat_deg, destination.lon_deg, 0.0)
            .map_err(|e| invalid("destination", e.to_string()))?;
        FlightPlan::new(
            o,
            d,
            self.cruise_alt_m,
            self.ground_speed_mps,
            self.departure_t_s,
            self.timestep_s,
        )
    }

    /// Resolves to a trajectory; a relative `track_csv` is taken relative to
    /// `base_dir`.
    pub fn to_trajectory(&self, base_dir: &Path) -> Result<Trajectory, FlightError> {
        match &self.track_csv {
            Some(csv_path) => {
                if self.origin.is_some() || self.destination.is_some() {
                    return Err(invalid(
                        "track_csv",
                        "cannot be combined with origin/destination",
                    ));
                }
                let path = if csv_path.is_absolute() {
                    csv_path.clone()
                } else {
                    base_dir.join(csv_path)
                };
                Ok(Trajectory::Recorded(RecordedTrack::from_csv(
                    &path,
                    self.timestep_s,
                )?))
            }
            None => Ok(Trajectory::Planned(self.to_plan()?)),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlightFile {
    flight: FlightSpec,
}

/// Reads a flight plan from a TOML file holding either bare flight keys or a
/// `[flight]` table.
pub fn load_flight_plan(path: &Path) -> Result<FlightPlan, FlightError> {
    let text = std::fs::read_to_string(path).map_err(|source| FlightError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |e: toml::de::Error| FlightError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let table: toml::Table = toml::from_str(&text).map_err(parse_err)?;
    let spec = if table.contains_key("flight") {
        toml::from_str::<FlightFile>(&text).map_err(parse_err)?.flight
    } else {
        toml::from_str::<FlightSpec>(&text).map_err(parse_err)?
    };
    spec.to_plan()
}
