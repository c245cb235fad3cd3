//! Aircraft-to-satellite geometry: elevation, slant range, nadir beam cone
//! and access intervals over a sampled flight.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flight::{AircraftState, Trajectory};
use crate::orbit::{eci_to_ecef, eci_vector_to_ecef, EciState, KeplerianElements, Orbit, Vec3, EARTH_RADIUS_M};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaskError {
    #[error("min_elevation_deg {0} outside [0, 90)")]
    MinElevation(f64),
    #[error("beam_half_angle_deg {0} outside (0, 90]")]
    BeamHalfAngle(f64),
}

/// Elevation floor at the aircraft plus the satellite's nadir beam cone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VisibilityMask {
    pub min_elevation_deg: f64,
    pub beam_half_angle_deg: f64,
}

impl Default for VisibilityMask {
    fn default() -> Self {
        Self {
            min_elevation_deg: 10.0,
            beam_half_angle_deg: 60.0,
        }
    }
}

impl VisibilityMask {
    pub fn new(min_elevation_deg: f64, beam_half_angle_deg: f64) -> Result<Self, MaskError> {
        let m = Self {
            min_elevation_deg,
            beam_half_angle_deg,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MaskError> {
        if !(0.0..90.0).contains(&self.min_elevation_deg) {
            return Err(MaskError::MinElevation(self.min_elevation_deg));
        }
        if !(self.beam_half_angle_deg > 0.0 && self.beam_half_angle_deg <= 90.0) {
            return Err(MaskError::BeamHalfAngle(self.beam_half_angle_deg));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub t_s: f64,
    pub sat_id: usize,
    pub elevation_deg: f64,
    pub slant_range_m: f64,
    pub visible: bool,
}

/// Elevation of `sat` above the observer's local horizontal plane, degrees.
pub fn elevation_angle(observer_ecef: &Vec3, sat_ecef: &Vec3) -> f64 {
    let up = observer_ecef.normalize();
    let los = sat_ecef - observer_ecef;
    let n = los.norm();
    if n == 0.0 {
        return 90.0;
    }
    (up.dot(&los) / n).clamp(-1.0, 1.0).asin().to_degrees()
}

/// Angle at the satellite between its nadir and the target, degrees.
pub fn off_nadir_angle(sat_ecef: &Vec3, target_ecef: &Vec3) -> f64 {
    let nadir = -sat_ecef.normalize();
    let to_target = target_ecef - sat_ecef;
    let n = to_target.norm();
    if n == 0.0 {
        return 0.0;
    }
    (nadir.dot(&to_target) / n).clamp(-1.0, 1.0).acos().to_degrees()
}

/// True when the straight segment between `a` and `b` stays outside the
/// Earth sphere (touching at an endpoint counts as clear).
pub fn clears_earth(a: &Vec3, b: &Vec3) -> bool {
    let d = b - a;
    let len2 = d.norm_squared();
    let s = if len2 == 0.0 {
        0.0
    } else {
        (-a.dot(&d) / len2).clamp(0.0, 1.0)
    };
    (a + d * s).norm() >= EARTH_RADIUS_M - 1e-6
}

/// Link metrics between two Earth-fixed points: elevation, slant range and
/// whether all three mask conditions hold (boundaries inclusive).
pub fn evaluate_link(observer_ecef: &Vec3, sat_ecef: &Vec3, mask: &VisibilityMask) -> (f64, f64, bool) {
    let elevation = elevation_angle(observer_ecef, sat_ecef);
    let range = (sat_ecef - observer_ecef).norm();
    let visible = elevation >= mask.min_elevation_deg
        && off_nadir_angle(sat_ecef, observer_ecef) <= mask.beam_half_angle_deg
        && clears_earth(observer_ecef, sat_ecef);
    (elevation, range, visible)
}

pub fn is_visible(
    aircraft: &AircraftState,
    sat: &EciState,
    sat_id: usize,
    mask: &VisibilityMask,
) -> LinkSample {
    let sat_ecef = eci_to_ecef(sat);
    let (elevation_deg, slant_range_m, visible) = evaluate_link(&aircraft.ecef_m, &sat_ecef, mask);
    LinkSample {
        t_s: aircraft.t_s,
        sat_id,
        elevation_deg,
        slant_range_m,
        visible,
    }
}

/// Half-open access window `[start_s, end_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub start_s: f64,
    pub end_s: f64,
}

impl Interval {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Collapses a per-sample visibility vector into maximal runs.
pub fn intervals_from_flags(grid: &[f64], step_s: f64, flags: &[bool]) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for (k, &v) in flags.iter().enumerate() {
        match (v, open) {
            (true, None) => open = Some(k),
            (false, Some(s)) => {
                out.push(Interval {
                    start_s: grid[s],
                    end_s: grid[k - 1] + step_s,
                });
                open = None;
            }
            _ => {}
        }
    }
    if let Some(s) = open {
        out.push(Interval {
            start_s: grid[s],
            end_s: grid[flags.len() - 1] + step_s,
        });
    }
    out
}

/// Pre-sampled aircraft positions on the simulation grid. Shared by every
/// visibility evaluation in a run.
#[derive(Debug, Clone)]
pub struct SampledFlight {
    pub grid: Vec<f64>,
    pub step_s: f64,
    pub aircraft_ecef: Vec<Vec3>,
}

impl SampledFlight {
    pub fn new(trajectory: &Trajectory) -> Result<Self, crate::flight::FlightError> {
        let grid = trajectory.time_grid();
        let aircraft_ecef = grid
            .iter()
            .map(|t| trajectory.state_at(*t).map(|s| s.ecef_m))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            grid,
            step_s: trajectory.timestep_s(),
            aircraft_ecef,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Link evaluation for one orbit at grid index `k`; samples before the
    /// element epoch are never visible.
    pub fn link_at(&self, orbit: &Orbit, k: usize, mask: &VisibilityMask) -> (f64, f64, bool) {
        let t = self.grid[k];
        match orbit.position_at(t) {
            Ok(eci) => evaluate_link(&self.aircraft_ecef[k], &eci_vector_to_ecef(&eci, t), mask),
            Err(_) => (f64::NAN, f64::NAN, false),
        }
    }

    pub fn visible_at(&self, orbit: &Orbit, k: usize, mask: &VisibilityMask) -> bool {
        self.link_at(orbit, k, mask).2
    }
}

/// Maximal visibility runs of one satellite over the flight grid.
pub fn access_intervals(
    sat: &KeplerianElements,
    flight: &SampledFlight,
    mask: &VisibilityMask,
) -> Vec<Interval> {
    let orbit = Orbit::new(sat);
    let flags: Vec<bool> = (0..flight.len())
        .map(|k| flight.visible_at(&orbit, k, mask))
        .collect();
    intervals_from_flags(&flight.grid, flight.step_s, &flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{geodetic_to_ecef, Geodetic};

    fn ecef(lat: f64, lon: f64, alt: f64) -> Vec3 {
        geodetic_to_ecef(&Geodetic::from_degrees(lat, lon, alt).unwrap())
    }

    #[test]
    fn zenith_and_horizon() {
        let obs = ecef(20.0, 30.0, 11_000.0);
        let above = ecef(20.0, 30.0, 800_000.0);
        assert!((elevation_angle(&obs, &above) - 90.0).abs() < 1e-9);
        // a point displaced along the local east direction lies on the horizon plane
        let up = obs.normalize();
        let east = Vec3::z().cross(&up).normalize();
        let side = obs + east * 500_000.0;
        assert!(elevation_angle(&obs, &side).abs() < 1e-9);
    }

    #[test]
    fn planar_triangle_elevation() {
        // Oracle: tan(el) = (cos γ - r_obs/r_sat) / sin γ, γ = 10°.
        let r_obs = EARTH_RADIUS_M + 11_000.0;
        let r_sat = EARTH_RADIUS_M + 829_000.0;
        let g = 10f64.to_radians();
        let oracle = ((g.cos() - r_obs / r_sat) / g.sin()).atan().to_degrees();
        assert!((oracle - 29.5433).abs() < 1e-3);
        let el = elevation_angle(&ecef(0.0, 0.0, 11_000.0), &ecef(0.0, 10.0, 829_000.0));
        assert!((el - oracle).abs() < 1e-9);
    }

    #[test]
    fn zenith_visible_far_side_not() {
        let mask = VisibilityMask::default();
        let obs = ecef(10.0, 10.0, 11_000.0);
        let (_, _, v) = evaluate_link(&obs, &ecef(10.0, 10.0, 829_000.0), &mask);
        assert!(v);
        let (_, _, v) = evaluate_link(&obs, &ecef(-10.0, -170.0, 829_000.0), &mask);
        assert!(!v);
        assert!(!clears_earth(&obs, &ecef(-10.0, -170.0, 829_000.0)));
    }

    #[test]
    fn boundary_inclusive() {
        let obs = ecef(0.0, 0.0, 11_000.0);
        let sat = ecef(0.0, 10.0, 829_000.0);
        let el = elevation_angle(&obs, &sat);
        let nadir = off_nadir_angle(&sat, &obs);
        let mask = VisibilityMask::new(el, 90.0).unwrap();
        assert!(evaluate_link(&obs, &sat, &mask).2);
        let mask = VisibilityMask::new(0.0, nadir).unwrap();
        assert!(evaluate_link(&obs, &sat, &mask).2);
        let mask = VisibilityMask::new(el + 1e-9, 90.0).unwrap();
        assert!(!evaluate_link(&obs, &sat, &mask).2);
    }

    #[test]
    fn mask_validation() {
        assert!(VisibilityMask::new(90.0, 60.0).is_err());
        assert!(VisibilityMask::new(-1.0, 60.0).is_err());
        assert!(VisibilityMask::new(10.0, 0.0).is_err());
        assert!(VisibilityMask::new(10.0, 90.0).is_ok());
    }

    #[test]
    fn slant_range_at_least_altitude_gap() {
        let obs = ecef(5.0, 5.0, 11_000.0);
        for lon in [5.0, 6.0, 8.0, 12.0] {
            let sat = ecef(5.0, lon, 829_000.0);
            let (_, range, _) = evaluate_link(&obs, &sat, &VisibilityMask::default());
            assert!(range >= 818_000.0 - 1e-6);
        }
    }

    #[test]
    fn intervals_from_runs() {
        let grid: Vec<f64> = (0..8).map(|k| k as f64).collect();
        let flags = [false, true, true, false, false, true, true, true];
        let iv = intervals_from_flags(&grid, 1.0, &flags);
        assert_eq!(
            iv,
            vec![
                Interval { start_s: 1.0, end_s: 3.0 },
                Interval { start_s: 5.0, end_s: 8.0 }
            ]
        );
        assert!(intervals_from_flags(&grid, 1.0, &[false; 8]).is_empty());
        assert_eq!(intervals_from_flags(&grid, 1.0, &[true; 8]).len(), 1);
    }
}
