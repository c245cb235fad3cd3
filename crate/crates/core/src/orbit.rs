//! Two-body Keplerian propagation and Earth-frame conversions.
//!
//! The Earth is a sphere of radius [`EARTH_RADIUS_M`] spinning at a constant
//! rate about the inertial z axis. The Greenwich angle is zero at simulation
//! time zero, so ECI and ECEF coincide at `t = 0`.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Earth gravitational parameter, m³/s².
pub const MU_EARTH: f64 = 3.986004418e14;
/// Mean spherical Earth radius, m.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
/// Sidereal rotation rate, rad/s.
pub const EARTH_ROTATION_RATE: f64 = 7.2921159e-5;

const KEPLER_MAX_ITER: usize = 50;
const KEPLER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("semi-major axis {0} m must exceed the Earth radius")]
    SemiMajorAxis(f64),
    #[error("eccentricity {0} outside [0, 1)")]
    Eccentricity(f64),
    #[error("orbital element `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("Kepler iteration did not converge (M = {mean_anomaly}, e = {eccentricity}, residual {residual:e})")]
    NoConvergence {
        mean_anomaly: f64,
        eccentricity: f64,
        residual: f64,
    },
    #[error("time {t_s} s precedes element epoch {epoch_s} s")]
    BeforeEpoch { t_s: f64, epoch_s: f64 },
    #[error("latitude {0} rad outside [-pi/2, pi/2]")]
    Latitude(f64),
    #[error("altitude {0} m is negative")]
    Altitude(f64),
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_pi(angle: f64) -> f64 {
    let r = normalize_angle(angle + PI) - PI;
    if r >= PI {
        -PI
    } else {
        r
    }
}

/// The six classical elements of one orbit plus the epoch they refer to.
///
/// Angles are normalized into `[0, 2π)` on construction, so a RAAN of -170°
/// is stored as 190° and a true anomaly of 390° as 30°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeplerianElements {
    sma_m: f64,
    eccentricity: f64,
    inclination_rad: f64,
    raan_rad: f64,
    arg_periapsis_rad: f64,
    true_anomaly_at_epoch_rad: f64,
    epoch_s: f64,
}

impl KeplerianElements {
    pub fn new(
        sma_m: f64,
        eccentricity: f64,
        inclination_rad: f64,
        raan_rad: f64,
        arg_periapsis_rad: f64,
        true_anomaly_at_epoch_rad: f64,
        epoch_s: f64,
    ) -> Result<Self, OrbitError> {
        for (name, v) in [
            ("sma_m", sma_m),
            ("eccentricity", eccentricity),
            ("inclination", inclination_rad),
            ("raan", raan_rad),
            ("arg_periapsis", arg_periapsis_rad),
            ("true_anomaly", true_anomaly_at_epoch_rad),
            ("epoch", epoch_s),
        ] {
            if !v.is_finite() {
                return Err(OrbitError::NonFinite(name));
            }
        }
        if sma_m <= EARTH_RADIUS_M {
            return Err(OrbitError::SemiMajorAxis(sma_m));
        }
        if !(0.0..1.0).contains(&eccentricity) {
            return Err(OrbitError::Eccentricity(eccentricity));
        }
        Ok(Self {
            sma_m,
            eccentricity,
            inclination_rad: normalize_angle(inclination_rad),
            raan_rad: normalize_angle(raan_rad),
            arg_periapsis_rad: normalize_angle(arg_periapsis_rad),
            true_anomaly_at_epoch_rad: normalize_angle(true_anomaly_at_epoch_rad),
            epoch_s,
        })
    }

    /// Same as [`KeplerianElements::new`] with every angle given in degrees.
    pub fn from_degrees(
        sma_m: f64,
        eccentricity: f64,
        inclination_deg: f64,
        raan_deg: f64,
        arg_periapsis_deg: f64,
        true_anomaly_deg: f64,
        epoch_s: f64,
    ) -> Result<Self, OrbitError> {
        Self::new(
            sma_m,
            eccentricity,
            inclination_deg.to_radians(),
            raan_deg.to_radians(),
            arg_periapsis_deg.to_radians(),
            true_anomaly_deg.to_radians(),
            epoch_s,
        )
    }

    pub fn sma_m(&self) -> f64 {
        self.sma_m
    }
    pub fn eccentricity(&self) -> f64 {
        self.eccentricity
    }
    pub fn inclination_rad(&self) -> f64 {
        self.inclination_rad
    }
    pub fn raan_rad(&self) -> f64 {
        self.raan_rad
    }
    pub fn arg_periapsis_rad(&self) -> f64 {
        self.arg_periapsis_rad
    }
    pub fn true_anomaly_at_epoch_rad(&self) -> f64 {
        self.true_anomaly_at_epoch_rad
    }
    pub fn epoch_s(&self) -> f64 {
        self.epoch_s
    }

    pub fn mean_motion(&self) -> f64 {
        (MU_EARTH / self.sma_m.powi(3)).sqrt()
    }

    pub fn period_s(&self) -> f64 {
        orbital_period(self.sma_m)
    }

    /// Mean anomaly at the epoch, derived from the stored true anomaly.
    pub fn mean_anomaly_at_epoch(&self) -> f64 {
        let e = self.eccentricity;
        let half = 0.5 * self.true_anomaly_at_epoch_rad;
        let ecc_anomaly =
            2.0 * ((1.0 - e).sqrt() * half.sin()).atan2((1.0 + e).sqrt() * half.cos());
        normalize_angle(ecc_anomaly - e * ecc_anomaly.sin())
    }

    /// Specific orbital energy, J/kg.
    pub fn specific_energy(&self) -> f64 {
        -MU_EARTH / (2.0 * self.sma_m)
    }
}

/// Inertial state of a satellite at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EciState {
    pub position_m: Vec3,
    pub velocity_mps: Vec3,
    pub t_s: f64,
}

impl EciState {
    pub fn specific_energy(&self) -> f64 {
        0.5 * self.velocity_mps.norm_squared() - MU_EARTH / self.position_m.norm()
    }

    pub fn angular_momentum(&self) -> Vec3 {
        self.position_m.cross(&self.velocity_mps)
    }
}

/// Spherical-Earth latitude, longitude and altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geodetic {
    pub lat_rad: f64,
    pub lon_rad: f64,
    pub alt_m: f64,
}

impl Geodetic {
    pub fn new(lat_rad: f64, lon_rad: f64, alt_m: f64) -> Result<Self, OrbitError> {
        if !lat_rad.is_finite() || lat_rad.abs() > PI / 2.0 {
            return Err(OrbitError::Latitude(lat_rad));
        }
        if !lon_rad.is_finite() {
            return Err(OrbitError::NonFinite("longitude"));
        }
        if !(alt_m >= 0.0) || !alt_m.is_finite() {
            return Err(OrbitError::Altitude(alt_m));
        }
        Ok(Self {
            lat_rad,
            lon_rad: wrap_pi(lon_rad),
            alt_m,
        })
    }

    pub fn from_degrees(lat_deg: f64, lon_deg: f64, alt_m: f64) -> Result<Self, OrbitError> {
        Self::new(lat_deg.to_radians(), lon_deg.to_radians(), alt_m)
    }

    pub fn lat_deg(&self) -> f64 {
        self.lat_rad.to_degrees()
    }

    pub fn lon_deg(&self) -> f64 {
        self.lon_rad.to_degrees()
    }

    pub fn with_alt(self, alt_m: f64) -> Self {
        Self { alt_m, ..self }
    }

    /// Unit vector from the Earth's centre through this point.
    pub fn unit_vector(&self) -> Vec3 {
        let (slat, clat) = self.lat_rad.sin_cos();
        let (slon, clon) = self.lon_rad.sin_cos();
        Vec3::new(clat * clon, clat * slon, slat)
    }
}

/// Solves Kepler's equation `E - e sin E = M` by Newton iteration.
///
/// Starts from `E = M` for `e < 0.8` and from `π` otherwise.
pub fn solve_kepler(mean_anomaly_rad: f64, eccentricity: f64) -> Result<f64, OrbitError> {
    if !(0.0..1.0).contains(&eccentricity) {
        return Err(OrbitError::Eccentricity(eccentricity));
    }
    let m = normalize_angle(mean_anomaly_rad);
    let e = eccentricity;
    if e == 0.0 {
        return Ok(m);
    }
    let mut ecc = if e < 0.8 { m } else { PI };
    for _ in 0..KEPLER_MAX_ITER {
        let f = ecc - e * ecc.sin() - m;
        let step = f / (1.0 - e * ecc.cos());
        ecc -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    let residual = (ecc - e * ecc.sin() - m).abs();
    if residual < KEPLER_TOLERANCE {
        Ok(ecc)
    } else {
        Err(OrbitError::NoConvergence {
            mean_anomaly: m,
            eccentricity: e,
            residual,
        })
    }
}

/// `T = 2π sqrt(a³/μ)`.
pub fn orbital_period(sma_m: f64) -> f64 {
    TAU * (sma_m.powi(3) / MU_EARTH).sqrt()
}

/// Precomputed perifocal basis for repeated propagation of one orbit.
#[derive(Debug, Clone, Copy)]
pub struct Orbit {
    elements: KeplerianElements,
    p_hat: Vec3,
    q_hat: Vec3,
    mean_motion: f64,
    mean_anomaly_epoch: f64,
    semi_minor_ratio: f64,
}

impl Orbit {
    pub fn new(elements: &KeplerianElements) -> Self {
        let (so, co) = elements.raan_rad.sin_cos();
        let (sw, cw) = elements.arg_periapsis_rad.sin_cos();
        let (si, ci) = elements.inclination_rad.sin_cos();
        let p_hat = Vec3::new(co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si);
        let q_hat = Vec3::new(-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si);
        Self {
            elements: *elements,
            p_hat,
            q_hat,
            mean_motion: elements.mean_motion(),
            mean_anomaly_epoch: elements.mean_anomaly_at_epoch(),
            semi_minor_ratio: (1.0 - elements.eccentricity.powi(2)).sqrt(),
        }
    }

    pub fn elements(&self) -> &KeplerianElements {
        &self.elements
    }

    fn eccentric_anomaly(&self, t_s: f64) -> Result<f64, OrbitError> {
        if t_s < self.elements.epoch_s {
            return Err(OrbitError::BeforeEpoch {
                t_s,
                epoch_s: self.elements.epoch_s,
            });
        }
        let m = self.mean_anomaly_epoch + self.mean_motion * (t_s - self.elements.epoch_s);
        solve_kepler(m, self.elements.eccentricity)
    }

    /// Inertial position only; skips the velocity terms.
    pub fn position_at(&self, t_s: f64) -> Result<Vec3, OrbitError> {
        let ecc = self.eccentric_anomaly(t_s)?;
        let (s, c) = ecc.sin_cos();
        let a = self.elements.sma_m;
        let x = a * (c - self.elements.eccentricity);
        let y = a * self.semi_minor_ratio * s;
        Ok(self.p_hat * x + self.q_hat * y)
    }

    pub fn state_at(&self, t_s: f64) -> Result<EciState, OrbitError> {
        let ecc = self.eccentric_anomaly(t_s)?;
        let (s, c) = ecc.sin_cos();
        let a = self.elements.sma_m;
        let e = self.elements.eccentricity;
        let b = self.semi_minor_ratio;
        let r = a * (1.0 - e * c);
        let x = a * (c - e);
        let y = a * b * s;
        let k = (MU_EARTH * a).sqrt() / r;
        let vx = -k * s;
        let vy = k * b * c;
        Ok(EciState {
            position_m: self.p_hat * x + self.q_hat * y,
            velocity_mps: self.p_hat * vx + self.q_hat * vy,
            t_s,
        })
    }
}

/// Two-body state of `elements` at simulation time `t_s`.
pub fn propagate(elements: &KeplerianElements, t_s: f64) -> Result<EciState, OrbitError> {
    Orbit::new(elements).state_at(t_s)
}

/// Greenwich rotation angle at simulation time `t_s`.
pub fn greenwich_angle(t_s: f64) -> f64 {
    EARTH_ROTATION_RATE * t_s
}

/// Rotates an inertial vector into the Earth-fixed frame at time `t_s`.
pub fn eci_vector_to_ecef(v: &Vec3, t_s: f64) -> Vec3 {
    let (s, c) = greenwich_angle(t_s).sin_cos();
    Vec3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z)
}

pub fn eci_to_ecef(state: &EciState) -> Vec3 {
    eci_vector_to_ecef(&state.position_m, state.t_s)
}

pub fn geodetic_to_ecef(g: &Geodetic) -> Vec3 {
    g.unit_vector() * (EARTH_RADIUS_M + g.alt_m)
}

/// Spherical inverse of [`geodetic_to_ecef`]. On the polar axis the longitude
/// is reported as zero.
pub fn ecef_to_geodetic(v: &Vec3) -> Geodetic {
    let r = v.norm();
    let horizontal = v.x.hypot(v.y);
    let lat_rad = v.z.atan2(horizontal);
    let lon_rad = if horizontal <= r * 1e-15 {
        0.0
    } else {
        wrap_pi(v.y.atan2(v.x))
    };
    Geodetic {
        lat_rad,
        lon_rad,
        alt_m: r - EARTH_RADIUS_M,
    }
}
