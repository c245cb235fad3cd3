//! Specular path finding: shooting-and-bouncing rays plus an exact
//! image-method enumerator behind one `Tracer` trait.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::launch::launch_rays;
use super::{CabinError, CabinGeometry, CabinScenario, Face};
use crate::orbit::Vec3;
use crate::registry::Registry;

/// One specular propagation path from a transmitter to a receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPath {
    /// Tx, reflection points in order, Rx.
    pub vertices: Vec<Vec3>,
    /// Faces hit, in order.
    pub faces: Vec<Face>,
    pub length_m: f64,
    /// Unit vector leaving the transmitter.
    pub departure: Vec3,
    /// Unit propagation direction arriving at the receiver.
    pub arrival: Vec3,
}

impl RayPath {
    pub fn n_reflections(&self) -> usize {
        self.faces.len()
    }

    fn from_vertices(vertices: Vec<Vec3>, faces: Vec<Face>) -> Self {
        let length_m = vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let n = vertices.len();
        Self {
            departure: (vertices[1] - vertices[0]).normalize(),
            arrival: (vertices[n - 1] - vertices[n - 2]).normalize(),
            vertices,
            faces,
            length_m,
        }
    }
}

/// The specular path from `tx` to `rx` hitting exactly `faces` in order, if
/// one exists. Built by successive mirror images of the transmitter, then
/// checked to land inside each face rectangle.
pub fn specular_path(geom: &CabinGeometry, tx: &Vec3, rx: &Vec3, faces: &[Face]) -> Option<RayPath> {
    if (rx - tx).norm() == 0.0 || faces.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    let mut images = Vec::with_capacity(faces.len() + 1);
    images.push(*tx);
    for f in faces {
        let last = images[images.len() - 1];
        images.push(geom.mirror(&last, *f));
    }
    let dims = geom.dims();
    let tol = 1e-9 * dims.max();
    let mut target = *rx;
    let mut points = Vec::with_capacity(faces.len());
    for i in (0..faces.len()).rev() {
        let src = images[i + 1];
        let (axis, plane) = (faces[i].axis(), geom.face_coordinate(faces[i]));
        let denom = target[axis] - src[axis];
        if denom == 0.0 {
            return None;
        }
        let s = (plane - src[axis]) / denom;
        if !(s > 0.0 && s < 1.0) {
            return None;
        }
        let mut p = src + (target - src) * s;
        p[axis] = plane;
        if (0..3).any(|a| p[a] < -tol || p[a] > dims[a] + tol) {
            return None;
        }
        points.push(p);
        target = p;
    }
    let mut vertices = Vec::with_capacity(faces.len() + 2);
    vertices.push(*tx);
    vertices.extend(points.into_iter().rev());
    vertices.push(*rx);
    if vertices.windows(2).any(|w| (w[1] - w[0]).norm() <= tol) {
        return None;
    }
    Some(RayPath::from_vertices(vertices, faces.to_vec()))
}

/// Reception sphere radius used by the ray shooter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaptureRadius {
    /// `scale · d · 2·tan(sep/2)` at unfolded distance `d`.
    Proportional { scale: f64 },
    Fixed { radius_m: f64 },
}

impl Default for CaptureRadius {
    fn default() -> Self {
        CaptureRadius::Proportional { scale: 1.0 }
    }
}

impl CaptureRadius {
    pub fn radius_m(&self, unfolded_distance_m: f64, sep_rad: f64) -> f64 {
        match *self {
            CaptureRadius::Proportional { scale } => scale * unfolded_distance_m * 2.0 * (sep_rad / 2.0).tan(),
            CaptureRadius::Fixed { radius_m } => radius_m,
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            CaptureRadius::Proportional { scale } => scale > 0.0 && scale.is_finite(),
            CaptureRadius::Fixed { radius_m } => radius_m > 0.0 && radius_m.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceParams {
    pub angular_sep_deg: f64,
    pub max_reflections: usize,
    pub capture: CaptureRadius,
}

impl Default for TraceParams {
    fn default() -> Self {
        Self {
            angular_sep_deg: 1.0,
            max_reflections: 2,
            capture: CaptureRadius::default(),
        }
    }
}

pub const MAX_REFLECTIONS: usize = 2;

impl TraceParams {
    pub fn validate(&self) -> Result<(), CabinError> {
        if !(self.angular_sep_deg > 0.0 && self.angular_sep_deg <= 10.0) {
            return Err(CabinError::Separation(self.angular_sep_deg));
        }
        if self.max_reflections > MAX_REFLECTIONS {
            return Err(CabinError::Geometry(format!(
                "max_reflections {} exceeds {MAX_REFLECTIONS}",
                self.max_reflections
            )));
        }
        if !self.capture.is_valid() {
            return Err(CabinError::Geometry("capture radius must be positive".into()));
        }
        Ok(())
    }
}

/// Finds the paths from one transmitter to every receiver. The result holds
/// one list per receiver, sorted by face sequence; the direct path (empty
/// sequence) therefore comes first.
pub trait Tracer: Send + Sync {
    fn name(&self) -> &'static str;
    fn trace_from(&self, geom: &CabinGeometry, tx: &Vec3, rxs: &[Vec3], params: &TraceParams) -> Vec<Vec<RayPath>>;
}

/// Shooting and bouncing rays with sphere capture. Each captured face
/// sequence is resolved to its exact specular path.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sbr;

/// Exhaustive mirror-image enumeration of every face sequence.
#[derive(Debug, Default, Clone, Copy)]
pub struct ImageMethod;

fn resolve(geom: &CabinGeometry, tx: &Vec3, rx: &Vec3, sequences: impl Iterator<Item = Vec<Face>>) -> Vec<RayPath> {
    let mut paths: Vec<RayPath> = specular_path(geom, tx, rx, &[]).into_iter().collect();
    paths.extend(sequences.filter_map(|s| specular_path(geom, tx, rx, &s)));
    paths.sort_by(|a, b| a.faces.cmp(&b.faces).then(a.length_m.total_cmp(&b.length_m)));
    paths.dedup_by(|a, b| a.faces == b.faces);
    paths
}

type Hits = BTreeSet<(usize, Vec<Face>)>;

fn shoot(geom: &CabinGeometry, tx: &Vec3, dir: &Vec3, rxs: &[Vec3], params: &TraceParams, sep_rad: f64, hits: &mut Hits) {
    let mut pos = *tx;
    let mut d = *dir;
    let mut travelled = 0.0;
    let mut faces: Vec<Face> = Vec::with_capacity(params.max_reflections);
    for bounce in 0..=params.max_reflections {
        let (t, face) = geom.exit(&pos, &d);
        if bounce > 0 {
            for (r, rx) in rxs.iter().enumerate() {
                let v = rx - pos;
                let tau = v.dot(&d).clamp(0.0, t);
                let miss = (v - d * tau).norm_squared();
                let radius = params.capture.radius_m(travelled + tau, sep_rad);
                if miss <= radius * radius {
                    hits.insert((r, faces.clone()));
                }
            }
        }
        if bounce == params.max_reflections || !t.is_finite() {
            break;
        }
        pos += d * t;
        pos[face.axis()] = geom.face_coordinate(face);
        travelled += t;
        d[face.axis()] = -d[face.axis()];
        faces.push(face);
    }
}

impl Tracer for Sbr {
    fn name(&self) -> &'static str {
        "sbr"
    }

    fn trace_from(&self, geom: &CabinGeometry, tx: &Vec3, rxs: &[Vec3], params: &TraceParams) -> Vec<Vec<RayPath>> {
        let rays = launch_rays(params.angular_sep_deg).expect("separation validated by caller");
        let sep_rad = params.angular_sep_deg.to_radians();
        let hits = rays
            .directions
            .par_iter()
            .fold(Hits::new, |mut acc, d| {
                shoot(geom, tx, d, rxs, params, sep_rad, &mut acc);
                acc
            })
            .reduce(Hits::new, |mut a, mut b| {
                a.append(&mut b);
                a
            });
        let mut per_rx: Vec<Vec<Vec<Face>>> = vec![Vec::new(); rxs.len()];
        for (r, seq) in hits {
            per_rx[r].push(seq);
        }
        per_rx
            .into_iter()
            .zip(rxs)
            .map(|(seqs, rx)| resolve(geom, tx, rx, seqs.into_iter()))
            .collect()
    }
}

/// All face sequences of length 1..=`max_len` without immediate repeats.
pub fn face_sequences(max_len: usize) -> Vec<Vec<Face>> {
    let mut out: Vec<Vec<Face>> = Vec::new();
    let mut layer: Vec<Vec<Face>> = vec![Vec::new()];
    for _ in 0..max_len {
        let next: Vec<Vec<Face>> = layer
            .iter()
            .flat_map(|s| {
                Face::ALL.iter().filter(|f| s.last() != Some(f)).map(move |f| {
                    let mut t = s.clone();
                    t.push(*f);
                    t
                })
            })
            .collect();
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

impl Tracer for ImageMethod {
    fn name(&self) -> &'static str {
        "image"
    }

    fn trace_from(&self, geom: &CabinGeometry, tx: &Vec3, rxs: &[Vec3], params: &TraceParams) -> Vec<Vec<RayPath>> {
        let seqs = face_sequences(params.max_reflections);
        rxs.par_iter()
            .map(|rx| resolve(geom, tx, rx, seqs.iter().cloned()))
            .collect()
    }
}

pub fn registry() -> Registry<dyn Tracer> {
    let mut r: Registry<dyn Tracer> = Registry::new("tracer");
    r.register("sbr", || Box::new(Sbr))
        .register("image", || Box::new(ImageMethod));
    r
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkPaths {
    pub tx_id: usize,
    pub rx_id: usize,
    pub paths: Vec<RayPath>,
}

/// Traces every transmitter of `scenario`; links come out transmitter-major
/// in node order.
pub fn trace(scenario: &CabinScenario, tracer: &dyn Tracer) -> Result<Vec<LinkPaths>, CabinError> {
    scenario.validate()?;
    let rxs: Vec<Vec3> = scenario.receivers.iter().map(|r| r.position_m).collect();
    let per_tx: Vec<Vec<Vec<RayPath>>> = scenario
        .transmitters
        .par_iter()
        .map(|t| tracer.trace_from(&scenario.geometry, &t.position_m, &rxs, &scenario.params))
        .collect();
    Ok(scenario
        .transmitters
        .iter()
        .zip(per_tx)
        .flat_map(|(t, lists)| {
            scenario.receivers.iter().zip(lists).map(move |(r, paths)| LinkPaths {
                tx_id: t.id,
                rx_id: r.id,
                paths,
            })
        })
        .collect())
}
