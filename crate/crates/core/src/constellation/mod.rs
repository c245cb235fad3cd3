//! Sequential satellite insertion, serving-satellite selection and coverage
//! bookkeeping.
//!
//! A run alternates between simulating the current constellation over the
//! flight grid and, while an uncovered sample remains and the budget allows,
//! inserting one more satellite chosen by an exhaustive RAAN/true-anomaly
//! grid search. Inserted satellites that make no contact within the connect
//! timeout are discarded.

mod insertion;
mod metrics;
mod search;
mod serving;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orbit::{orbital_period, KeplerianElements, OrbitError};

pub use insertion::{
    build_timeline, registry as insertion_registry, run_parallel, run_sequential_insertion,
    satellite_visibility, CoverageProblem, InsertionOutcome, InsertionStrategy, Parallel,
    SatVisibility, Sequential,
};
pub use metrics::{coverage_percentage, extract_handovers, CoverageSummary};
pub use search::{initial_satellite, next_satellite, ElementSearch, Selection};
pub use serving::{
    registry as serving_registry, select_serving, Candidate, MaxElevation, ServingPolicy, Sticky,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstellationError {
    #[error("route unreachable with template: no grid cell is visible between t = {start_s} s and t = {end_s} s")]
    Unreachable { start_s: f64, end_s: f64 },
    #[error("no uncovered segment remains")]
    NoGap,
    #[error("invalid insertion policy: `{field}` {message}")]
    Policy {
        field: &'static str,
        message: String,
    },
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

fn policy_err(field: &'static str, message: impl Into<String>) -> ConstellationError {
    ConstellationError::Policy {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SatelliteStatus {
    Pending,
    Active,
    Discarded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Satellite {
    pub id: usize,
    pub elements: KeplerianElements,
    pub inserted_t_s: f64,
    pub status: SatelliteStatus,
}

/// Orbit shape shared by every inserted satellite; the search only varies
/// RAAN and true anomaly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElementTemplate {
    pub sma_m: f64,
    pub eccentricity: f64,
    pub inclination_deg: f64,
    pub arg_periapsis_deg: f64,
}

impl Default for ElementTemplate {
    fn default() -> Self {
        Self {
            sma_m: 7.2e6,
            eccentricity: 0.05,
            inclination_deg: 70.0,
            arg_periapsis_deg: 0.0,
        }
    }
}

impl ElementTemplate {
    pub fn elements(
        &self,
        raan_deg: f64,
        true_anomaly_deg: f64,
        epoch_s: f64,
    ) -> Result<KeplerianElements, OrbitError> {
        KeplerianElements::from_degrees(
            self.sma_m,
            self.eccentricity,
            self.inclination_deg,
            raan_deg,
            self.arg_periapsis_deg,
            true_anomaly_deg,
            epoch_s,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InsertionPolicy {
    pub connect_timeout_s: f64,
    pub max_satellites: usize,
    pub search_raan_step_deg: f64,
    pub search_anomaly_step_deg: f64,
    /// Search window length; one template orbital period when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lookahead_s: Option<f64>,
    pub template: ElementTemplate,
}

impl Default for InsertionPolicy {
    fn default() -> Self {
        Self {
            connect_timeout_s: 120.0,
            max_satellites: 40,
            search_raan_step_deg: 1.0,
            search_anomaly_step_deg: 1.0,
            lookahead_s: None,
            template: ElementTemplate::default(),
        }
    }
}

impl InsertionPolicy {
    pub fn validate(&self) -> Result<(), ConstellationError> {
        if !(self.connect_timeout_s > 0.0) {
            return Err(policy_err("connect_timeout_s", "must be positive"));
        }
        if self.max_satellites < 1 {
            return Err(policy_err("max_satellites", "must be at least 1"));
        }
        if !(self.search_raan_step_deg > 0.0 && self.search_raan_step_deg <= 360.0) {
            return Err(policy_err("search_raan_step_deg", "must be in (0, 360]"));
        }
        if !(self.search_anomaly_step_deg > 0.0 && self.search_anomaly_step_deg <= 360.0) {
            return Err(policy_err("search_anomaly_step_deg", "must be in (0, 360]"));
        }
        if let Some(l) = self.lookahead_s {
            if !(l > 0.0) {
                return Err(policy_err("lookahead_s", "must be positive"));
            }
        }
        self.template.elements(0.0, 0.0, 0.0)?;
        Ok(())
    }

    pub fn lookahead_s(&self) -> f64 {
        self.lookahead_s
            .unwrap_or_else(|| orbital_period(self.template.sma_m))
    }
}

/// Per-sample serving record over the flight grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageTimeline {
    pub grid: Vec<f64>,
    pub step_s: f64,
    pub serving: Vec<Option<usize>>,
    pub elevation_deg: Vec<Option<f64>>,
    pub slant_range_m: Vec<Option<f64>>,
}

impl CoverageTimeline {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn covered_samples(&self) -> usize {
        self.serving.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_fully_covered(&self) -> bool {
        self.serving.iter().all(Option::is_some)
    }

    /// `t_s,serving_sat,elevation_deg,slant_range_m`; unserved samples leave
    /// the last three columns empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,serving_sat,elevation_deg,slant_range_m\n");
        for k in 0..self.len() {
            match self.serving[k] {
                Some(id) => out.push_str(&format!(
                    "{},{},{:.6},{:.3}\n",
                    self.grid[k],
                    id,
                    self.elevation_deg[k].unwrap_or(f64::NAN),
                    self.slant_range_m[k].unwrap_or(f64::NAN)
                )),
                None => out.push_str(&format!("{},,,\n", self.grid[k])),
            }
        }
        out
    }
}

/// A change of serving satellite. A loss of service followed by a new
/// satellite is one event whose `gap_s` is the unserved time in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HandoverEvent {
    pub t_s: f64,
    pub from: Option<usize>,
    pub to: Option<usize>,
    pub gap_s: f64,
}

pub fn handovers_to_csv(events: &[HandoverEvent]) -> String {
    let mut out = String::from("t_s,from_sat,to_sat,gap_s\n");
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for e in events {
        out.push_str(&format!("{},{},{},{}\n", e.t_s, opt(e.from), opt(e.to), e.gap_s));
    }
    out
}

pub fn satellites_to_csv(sats: &[Satellite]) -> String {
    let mut out = String::from(
        "sat_id,status,inserted_t_s,sma_m,eccentricity,inclination_deg,raan_deg,arg_periapsis_deg,true_anomaly_deg,epoch_s\n",
    );
    for s in sats {
        let e = &s.elements;
        let status = match s.status {
            SatelliteStatus::Pending => "pending",
            SatelliteStatus::Active => "active",
            SatelliteStatus::Discarded => "discarded",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{:.9},{:.9},{:.9},{:.9},{}\n",
            s.id,
            status,
            s.inserted_t_s,
            e.sma_m(),
            e.eccentricity(),
            e.inclination_rad().to_degrees(),
            e.raan_rad().to_degrees(),
            e.arg_periapsis_rad().to_degrees(),
            e.true_anomaly_at_epoch_rad().to_degrees(),
            e.epoch_s()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_defaults_and_validation() {
        let p = InsertionPolicy::default();
        p.validate().unwrap();
        assert!((p.lookahead_s() - orbital_period(7.2e6)).abs() < 1e-9);
        let bad = InsertionPolicy {
            max_satellites: 0,
            ..p
        };
        assert!(matches!(
            bad.validate(),
            Err(ConstellationError::Policy { field: "max_satellites", .. })
        ));
        let bad = InsertionPolicy {
            connect_timeout_s: 0.0,
            ..p
        };
        assert!(bad.validate().is_err());
        let bad = InsertionPolicy {
            search_raan_step_deg: 0.0,
            ..p
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn timeline_csv_layout() {
        let tl = CoverageTimeline {
            grid: vec![0.0, 1.0],
            step_s: 1.0,
            serving: vec![Some(2), None],
            elevation_deg: vec![Some(45.0), None],
            slant_range_m: vec![Some(1.0e6), None],
        };
        assert_eq!(
            tl.to_csv(),
            "t_s,serving_sat,elevation_deg,slant_range_m\n0,2,45.000000,1000000.000\n1,,,\n"
        );
    }
}
