//! In-cabin propagation: an empty metallic box, ceiling transmitters, seat
//! receivers, specular ray tracing and per-link path loss.

mod launch;
mod loss;
mod tracer;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antenna::ArrayGeometry;
use crate::orbit::Vec3;

pub use launch::{launch_rays, subdivision_frequency, RaySet, ICOSAHEDRON_EDGE_DEG};
pub use loss::{
    aggregate_stats, evaluate_link, fspl_db, path_loss, quantile, CabinStats, LinkLoss,
    PathLossMatrix, TxStats,
};
pub use tracer::{
    registry as tracer_registry, specular_path, trace, CaptureRadius, ImageMethod, LinkPaths,
    RayPath, Sbr, TraceParams, Tracer,
};

pub const DEFAULT_FREQUENCY_HZ: f64 = 5.8e9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CabinError {
    #[error("invalid cabin geometry: {0}")]
    Geometry(String),
    #[error("{kind} {id} at ({x:.3}, {y:.3}, {z:.3}) is not strictly inside the cabin")]
    NodeOutside {
        kind: &'static str,
        id: usize,
        x: f64,
        y: f64,
        z: f64,
    },
    #[error("angular separation {0}° outside (0, 10]")]
    Separation(f64),
    #[error("path loss undefined: {0}")]
    Domain(String),
    #[error("invalid antenna array for {0}")]
    Array(&'static str),
}

/// One of the six walls of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::XMin,
        Face::XMax,
        Face::YMin,
        Face::YMax,
        Face::ZMin,
        Face::ZMax,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn axis(self) -> usize {
        self.index() / 2
    }

    pub fn is_max(self) -> bool {
        self.index() % 2 == 1
    }

    pub fn from_axis(axis: usize, is_max: bool) -> Self {
        Self::ALL[axis * 2 + usize::from(is_max)]
    }

    /// Unit normal pointing into the cabin.
    pub fn inward_normal(self) -> Vec3 {
        let mut n = Vec3::zeros();
        n[self.axis()] = if self.is_max() { -1.0 } else { 1.0 };
        n
    }

    pub fn label(self) -> &'static str {
        match self {
            Face::XMin => "x-",
            Face::XMax => "x+",
            Face::YMin => "y-",
            Face::YMax => "y+",
            Face::ZMin => "z-",
            Face::ZMax => "z+",
        }
    }
}

/// Axis-aligned box `[0, length] × [0, width] × [0, height]`: x runs along
/// the fuselage, z is up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CabinGeometry {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
    /// Loss per reflection, dB, indexed by [`Face::index`].
    pub face_loss_db: [f64; 6],
}

impl Default for CabinGeometry {
    fn default() -> Self {
        Self::new(45.0, 5.6, 2.4, 1.0).expect("default cabin is valid")
    }
}

impl CabinGeometry {
    pub fn new(length_m: f64, width_m: f64, height_m: f64, reflection_loss_db: f64) -> Result<Self, CabinError> {
        let g = Self {
            length_m,
            width_m,
            height_m,
            face_loss_db: [reflection_loss_db; 6],
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), CabinError> {
        for (name, v) in [
            ("length_m", self.length_m),
            ("width_m", self.width_m),
            ("height_m", self.height_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CabinError::Geometry(format!("{name} must be positive, got {v}")));
            }
        }
        if self.face_loss_db.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(CabinError::Geometry("reflection loss must be >= 0".into()));
        }
        Ok(())
    }

    pub fn dims(&self) -> Vec3 {
        Vec3::new(self.length_m, self.width_m, self.height_m)
    }

    pub fn face_coordinate(&self, face: Face) -> f64 {
        if face.is_max() {
            self.dims()[face.axis()]
        } else {
            0.0
        }
    }

    pub fn contains_strictly(&self, p: &Vec3) -> bool {
        let d = self.dims();
        (0..3).all(|a| p[a] > 0.0 && p[a] < d[a])
    }

    /// Mirror image of `p` across the plane of `face`.
    pub fn mirror(&self, p: &Vec3, face: Face) -> Vec3 {
        let mut q = *p;
        q[face.axis()] = 2.0 * self.face_coordinate(face) - p[face.axis()];
        q
    }

    /// Distance along `dir` from an interior `origin` to the wall it hits,
    /// and that wall. Ties go to the lowest axis.
    pub fn exit(&self, origin: &Vec3, dir: &Vec3) -> (f64, Face) {
        let d = self.dims();
        let mut best = (f64::INFINITY, Face::XMin);
        for a in 0..3 {
            if dir[a] == 0.0 {
                continue;
            }
            let is_max = dir[a] > 0.0;
            let bound = if is_max { d[a] } else { 0.0 };
            let t = ((bound - origin[a]) / dir[a]).max(0.0);
            if t < best.0 {
                best = (t, Face::from_axis(a, is_max));
            }
        }
        best
    }

    pub fn reflection_loss_db(&self, faces: &[Face]) -> f64 {
        faces.iter().map(|f| self.face_loss_db[f.index()]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitterNode {
    pub id: usize,
    pub position_m: Vec3,
    pub array: ArrayGeometry,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverNode {
    pub id: usize,
    pub position_m: Vec3,
    pub array: ArrayGeometry,
}

/// How the four user-equipment elements are arranged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UeArray {
    #[default]
    #[serde(rename = "2x2")]
    Planar2x2,
    #[serde(rename = "1x4")]
    Linear1x4,
}

impl UeArray {
    pub fn geometry(self, frequency_hz: f64) -> ArrayGeometry {
        match self {
            UeArray::Planar2x2 => ArrayGeometry::ura(2, 2, frequency_hz).with_axes(Vec3::x(), Vec3::z()),
            UeArray::Linear1x4 => ArrayGeometry::ula(4, frequency_hz).with_axes(Vec3::x(), Vec3::z()),
        }
    }
}

/// Ceiling transmitters (4×8 URA in the horizontal plane) at the given
/// fractions of the cabin length, on the centreline just below the ceiling.
pub fn ceiling_transmitters(geom: &CabinGeometry, fractions: &[f64], frequency_hz: f64) -> Vec<TransmitterNode> {
    let z = geom.height_m - (0.1f64).min(geom.height_m / 4.0);
    fractions
        .iter()
        .enumerate()
        .map(|(id, f)| TransmitterNode {
            id,
            position_m: Vec3::new(geom.length_m * f, geom.width_m / 2.0, z),
            array: ArrayGeometry::ura(4, 8, frequency_hz),
        })
        .collect()
}

pub const DEFAULT_TX_FRACTIONS: [f64; 4] = [0.125, 0.375, 0.625, 0.875];
pub const SEAT_HEIGHT_M: f64 = 1.1;
const SEAT_ROWS: usize = 20;
/// Lateral seat positions of the left block as fractions of the width; the
/// right block mirrors it across the aisle.
const LEFT_BLOCK_FRACTIONS: [f64; 3] = [3.0 / 28.0, 5.5 / 28.0, 8.0 / 28.0];

/// 2 seat columns × 20 rows × 3 seats, rows evenly spread along the cabin.
/// Ids run row by row, left block first.
pub fn seat_receivers(geom: &CabinGeometry, ue: UeArray, frequency_hz: f64) -> Vec<ReceiverNode> {
    let z = SEAT_HEIGHT_M.min(geom.height_m / 2.0);
    let mut out = Vec::with_capacity(SEAT_ROWS * 6);
    for row in 0..SEAT_ROWS {
        let x = (row as f64 + 0.5) * geom.length_m / SEAT_ROWS as f64;
        let left = LEFT_BLOCK_FRACTIONS.map(|f| f * geom.width_m);
        let right = LEFT_BLOCK_FRACTIONS.map(|f| geom.width_m - f * geom.width_m);
        for y in left.into_iter().chain(right) {
            out.push(ReceiverNode {
                id: out.len(),
                position_m: Vec3::new(x, y, z),
                array: ue.geometry(frequency_hz),
            });
        }
    }
    out
}

/// A complete in-cabin propagation study.
#[derive(Debug, Clone, PartialEq)]
pub struct CabinScenario {
    pub geometry: CabinGeometry,
    pub transmitters: Vec<TransmitterNode>,
    pub receivers: Vec<ReceiverNode>,
    pub frequency_hz: f64,
    pub params: TraceParams,
}

impl CabinScenario {
    /// The default cabin: 4 ceiling transmitters and 120 seat receivers.
    pub fn default_layout(geometry: CabinGeometry, ue: UeArray, frequency_hz: f64, params: TraceParams) -> Self {
        Self {
            transmitters: ceiling_transmitters(&geometry, &DEFAULT_TX_FRACTIONS, frequency_hz),
            receivers: seat_receivers(&geometry, ue, frequency_hz),
            geometry,
            frequency_hz,
            params,
        }
    }

    pub fn validate(&self) -> Result<(), CabinError> {
        self.geometry.validate()?;
        if !(self.frequency_hz > 0.0) {
            return Err(CabinError::Domain(format!("frequency {} Hz", self.frequency_hz)));
        }
        self.params.validate()?;
        let check = |kind: &'static str, id: usize, p: &Vec3| {
            if self.geometry.contains_strictly(p) {
                Ok(())
            } else {
                Err(CabinError::NodeOutside {
                    kind,
                    id,
                    x: p.x,
                    y: p.y,
                    z: p.z,
                })
            }
        };
        for t in &self.transmitters {
            check("transmitter", t.id, &t.position_m)?;
            if !t.array.is_valid() {
                return Err(CabinError::Array("transmitter"));
            }
        }
        for r in &self.receivers {
            check("receiver", r.id, &r.position_m)?;
            if !r.array.is_valid() {
                return Err(CabinError::Array("receiver"));
            }
        }
        Ok(())
    }
}
