//! Launch directions from a geodesic (icosahedral) subdivision of the sphere.

use super::CabinError;
use crate::orbit::Vec3;

/// Angle subtended by one icosahedron edge, degrees (`atan 2`).
pub const ICOSAHEDRON_EDGE_DEG: f64 = 63.434_948_822_922_01;

#[derive(Debug, Clone, PartialEq)]
pub struct RaySet {
    pub angular_sep_deg: f64,
    /// Each icosahedron edge is split into this many segments.
    pub frequency: usize,
    pub directions: Vec<Vec3>,
}

impl RaySet {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Smallest subdivision whose mean neighbour spacing does not exceed `sep_deg`.
pub fn subdivision_frequency(sep_deg: f64) -> usize {
    ((ICOSAHEDRON_EDGE_DEG / sep_deg) - 1e-9).ceil().max(1.0) as usize
}

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 2]>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v = Vec::with_capacity(12);
    for s1 in [-1.0, 1.0] {
        for s2 in [-1.0, 1.0] {
            v.push(Vec3::new(0.0, s1, s2 * phi));
            v.push(Vec3::new(s1, s2 * phi, 0.0));
            v.push(Vec3::new(s2 * phi, 0.0, s1));
        }
    }
    let adjacent = |a: usize, b: usize| ((v[a] - v[b]).norm() - 2.0).abs() < 1e-9;
    let mut edges = Vec::new();
    let mut faces = Vec::new();
    for a in 0..12 {
        for b in a + 1..12 {
            if !adjacent(a, b) {
                continue;
            }
            edges.push([a, b]);
            for c in b + 1..12 {
                if adjacent(a, c) && adjacent(b, c) {
                    faces.push([a, b, c]);
                }
            }
        }
    }
    (v, edges, faces)
}

/// Deterministic unit directions: `10ν² + 2` points, each vertex, edge and
/// face point generated exactly once.
pub fn launch_rays(angular_sep_deg: f64) -> Result<RaySet, CabinError> {
    if !(angular_sep_deg > 0.0 && angular_sep_deg <= 10.0) {
        return Err(CabinError::Separation(angular_sep_deg));
    }
    let nu = subdivision_frequency(angular_sep_deg);
    let (v, edges, faces) = icosahedron();
    let nf = nu as f64;
    let mut dirs = Vec::with_capacity(10 * nu * nu + 2);
    dirs.extend(v.iter().map(|p| p.normalize()));
    for [a, b] in edges {
        for m in 1..nu {
            let t = m as f64 / nf;
            dirs.push((v[a] * (1.0 - t) + v[b] * t).normalize());
        }
    }
    for [a, b, c] in faces {
        for i in 1..nu {
            for j in 1..nu - i {
                let k = nu - i - j;
                let p = (v[a] * i as f64 + v[b] * j as f64 + v[c] * k as f64) / nf;
                dirs.push(p.normalize());
            }
        }
    }
    Ok(RaySet {
        angular_sep_deg,
        frequency: nu,
        directions: dirs,
    })
}
