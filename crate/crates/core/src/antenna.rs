//! Array-factor gain of uniformly weighted planar and linear arrays with
//! ideal (conjugate-phase) steering. Elements are isotropic.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::orbit::Vec3;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Gains below this are reported as the floor instead of `-inf`.
pub const GAIN_FLOOR_DB: f64 = -200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayKind {
    /// `rows` along `axis_v`, `cols` along `axis_u`.
    Ura { rows: usize, cols: usize },
    /// `n` elements along `axis_u`.
    Ula { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub kind: ArrayKind,
    pub element_spacing_wavelengths: f64,
    /// Frequency at which the spacing is expressed in wavelengths.
    pub design_frequency_hz: f64,
    pub axis_u: Vec3,
    pub axis_v: Vec3,
}

impl ArrayGeometry {
    pub fn ura(rows: usize, cols: usize, design_frequency_hz: f64) -> Self {
        Self {
            kind: ArrayKind::Ura { rows, cols },
            element_spacing_wavelengths: 0.5,
            design_frequency_hz,
            axis_u: Vec3::x(),
            axis_v: Vec3::y(),
        }
    }

    pub fn ula(n: usize, design_frequency_hz: f64) -> Self {
        Self {
            kind: ArrayKind::Ula { n },
            element_spacing_wavelengths: 0.5,
            design_frequency_hz,
            axis_u: Vec3::x(),
            axis_v: Vec3::y(),
        }
    }

    /// Orients the array plane; both axes are normalized.
    pub fn with_axes(mut self, axis_u: Vec3, axis_v: Vec3) -> Self {
        self.axis_u = axis_u.normalize();
        self.axis_v = axis_v.normalize();
        self
    }

    pub fn is_valid(&self) -> bool {
        let dims_ok = match self.kind {
            ArrayKind::Ura { rows, cols } => rows >= 1 && cols >= 1,
            ArrayKind::Ula { n } => n >= 1,
        };
        dims_ok && self.element_spacing_wavelengths > 0.0 && self.design_frequency_hz > 0.0
    }

    pub fn n_elements(&self) -> usize {
        match self.kind {
            ArrayKind::Ura { rows, cols } => rows * cols,
            ArrayKind::Ula { n } => n,
        }
    }

    pub fn peak_gain_db(&self) -> f64 {
        10.0 * (self.n_elements() as f64).log10()
    }

    /// Element positions in metres, centred on the array phase centre.
    pub fn element_positions_m(&self) -> Vec<Vec3> {
        let d = self.element_spacing_wavelengths * SPEED_OF_LIGHT / self.design_frequency_hz;
        let (rows, cols) = match self.kind {
            ArrayKind::Ura { rows, cols } => (rows, cols),
            ArrayKind::Ula { n } => (1, n),
        };
        let cu = (cols as f64 - 1.0) / 2.0;
        let cv = (rows as f64 - 1.0) / 2.0;
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                out.push(self.axis_u * ((c as f64 - cu) * d) + self.axis_v * ((r as f64 - cv) * d));
            }
        }
        out
    }
}

/// `|AF|² / N` for an array steered toward `steer_dir`, evaluated at
/// `query_dir`. Equals `N` when the two directions coincide.
pub fn array_factor_linear(geom: &ArrayGeometry, steer_dir: &Vec3, query_dir: &Vec3, frequency_hz: f64) -> f64 {
    let k = TAU * frequency_hz / SPEED_OF_LIGHT;
    let delta = query_dir - steer_dir;
    let (re, im) = geom
        .element_positions_m()
        .iter()
        .fold((0.0, 0.0), |(re, im), p| {
            let (s, c) = (k * p.dot(&delta)).sin_cos();
            (re + c, im + s)
        });
    (re * re + im * im) / geom.n_elements() as f64
}

pub fn array_factor_gain(geom: &ArrayGeometry, steer_dir: &Vec3, query_dir: &Vec3, frequency_hz: f64) -> f64 {
    let lin = array_factor_linear(geom, steer_dir, query_dir, frequency_hz);
    if lin > 0.0 {
        (10.0 * lin.log10()).max(GAIN_FLOOR_DB)
    } else {
        GAIN_FLOOR_DB
    }
}

/// An array with its beam fixed on one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeredGain {
    pub geometry: ArrayGeometry,
    pub steer_direction: Vec3,
    pub frequency_hz: f64,
}

impl SteeredGain {
    pub fn gain_db(&self, query_dir: &Vec3) -> f64 {
        array_factor_gain(&self.geometry, &self.steer_direction, query_dir, self.frequency_hz)
    }

    pub fn at_frequency(self, frequency_hz: f64) -> Self {
        Self {
            frequency_hz,
            ..self
        }
    }
}

/// Steers `geom` at `direction`, operating at its design frequency.
pub fn steer_toward(geom: &ArrayGeometry, direction: &Vec3) -> SteeredGain {
    SteeredGain {
        geometry: *geom,
        steer_direction: direction.normalize(),
        frequency_hz: geom.design_frequency_hz,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const F: f64 = 5.8e9;

    fn dir(theta_deg: f64, phi_deg: f64) -> Vec3 {
        let (st, ct) = theta_deg.to_radians().sin_cos();
        let (sp, cp) = phi_deg.to_radians().sin_cos();
        Vec3::new(st * cp, st * sp, ct)
    }

    #[test]
    fn peak_gains() {
        let ura = ArrayGeometry::ura(4, 8, F);
        let s = dir(30.0, 40.0);
        assert!((array_factor_gain(&ura, &s, &s, F) - 15.051_499_783).abs() < 1e-6);
        let ue = ArrayGeometry::ura(2, 2, F);
        assert!((array_factor_gain(&ue, &s, &s, F) - 6.020_599_913).abs() < 1e-6);
    }

    #[test]
    fn single_element_is_isotropic() {
        for g in [ArrayGeometry::ula(1, F), ArrayGeometry::ura(1, 1, F)] {
            for q in [dir(0.0, 0.0), dir(90.0, 10.0), dir(170.0, 200.0)] {
                assert!(array_factor_gain(&g, &dir(45.0, 45.0), &q, F).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ula_endfire_matches_phasor_sum() {
        // Direct phasor sum: broadside steer, endfire query, spacing λ/2
        // gives phase π·k per element; Σ_{k<4} e^{iπk} = 0.
        let ula = ArrayGeometry::ula(4, F);
        let broadside = Vec3::z();
        let endfire = Vec3::x();
        let oracle: f64 = {
            let (re, im) = (0..4).fold((0.0f64, 0.0f64), |(r, i), k| {
                let ph = std::f64::consts::PI * k as f64;
                (r + ph.cos(), i + ph.sin())
            });
            (re * re + im * im) / 4.0
        };
        let lin = array_factor_linear(&ula, &broadside, &endfire, F);
        assert!((lin - oracle).abs() < 1e-12);
        assert_eq!(array_factor_gain(&ula, &broadside, &endfire, F), GAIN_FLOOR_DB);
        // 60° off broadside: phase step π·sin 60° per element
        let q = dir(60.0, 0.0);
        let psi = std::f64::consts::PI * 60f64.to_radians().sin();
        let (re, im) = (0..4).fold((0.0f64, 0.0f64), |(r, i), k| {
            let ph = psi * k as f64;
            (r + ph.cos(), i + ph.sin())
        });
        assert!((array_factor_linear(&ula, &broadside, &q, F) - (re * re + im * im) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn steered_peak_on_one_degree_grid() {
        let ura = ArrayGeometry::ura(4, 8, F);
        let steer = dir(37.0, 122.0);
        let g = steer_toward(&ura, &steer);
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for t in 0..=180 {
            for p in 0..360 {
                let v = g.gain_db(&dir(t as f64, p as f64));
                if v > best.0 {
                    best = (v, t as f64, p as f64);
                }
            }
        }
        assert_eq!((best.1, best.2), (37.0, 122.0));
        assert!((best.0 - ura.peak_gain_db()).abs() < 1e-9);
    }

    #[test]
    fn ideal_steer_maximizes_link() {
        // For a single path, no steer direction on a 1° grid beats steering
        // straight at the path.
        let ue = ArrayGeometry::ura(2, 2, F).with_axes(Vec3::x(), Vec3::z());
        let path_dir = dir(71.0, 13.0);
        let ideal = steer_toward(&ue, &path_dir).gain_db(&path_dir);
        for t in (0..=180).step_by(3) {
            for p in (0..360).step_by(3) {
                let g = array_factor_gain(&ue, &dir(t as f64, p as f64), &path_dir, F);
                assert!(g <= ideal + 1e-9);
            }
        }
    }

    #[test]
    fn ula_axial_symmetry() {
        let ula = ArrayGeometry::ula(4, F);
        let s = Vec3::z();
        let a = array_factor_gain(&ula, &s, &dir(50.0, 20.0), F);
        let b = array_factor_gain(&ula, &s, &dir(50.0, -20.0), F);
        assert!((a - b).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn reciprocity(t1 in 0.0..180.0f64, p1 in 0.0..360.0f64, t2 in 0.0..180.0f64, p2 in 0.0..360.0f64) {
            let ura = ArrayGeometry::ura(4, 8, F);
            let (a, b) = (dir(t1, p1), dir(t2, p2));
            let ab = array_factor_linear(&ura, &a, &b, F);
            let ba = array_factor_linear(&ura, &b, &a, F);
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert!(ab <= 32.0 + 1e-9);
        }
    }
}
