//! Shared helpers for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use skybridge::cabin::{CabinGeometry, Face};
use skybridge::orbit::Vec3;

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// Specular paths in a box found by unfolding it into a lattice of mirrored
/// cells: the receiver image in cell `n` along an axis of length `L` sits at
/// `n·L + rx` (even `n`) or `n·L + L − rx` (odd `n`). The unfolded straight
/// line from the transmitter crosses the planes `k·L` in travel order; plane
/// `k` is the real wall at `L` for odd `k` and at 0 for even `k`.
pub fn lattice_paths(geom: &CabinGeometry, tx: &Vec3, rx: &Vec3, max_reflections: i32) -> Vec<(Vec<Face>, f64)> {
    let dims = geom.dims();
    let r = max_reflections;
    let mut out = Vec::new();
    for nx in -r..=r {
        for ny in -r..=r {
            for nz in -r..=r {
                let n = [nx, ny, nz];
                if n.iter().map(|v| v.abs()).sum::<i32>() > r {
                    continue;
                }
                let mut img = Vec3::zeros();
                for a in 0..3 {
                    let l = dims[a];
                    let base = n[a] as f64 * l;
                    img[a] = if n[a] % 2 == 0 { base + rx[a] } else { base + l - rx[a] };
                }
                let mut crossings: Vec<(f64, Face)> = Vec::new();
                for a in 0..3 {
                    let ks: Vec<i32> = if n[a] > 0 {
                        (1..=n[a]).collect()
                    } else {
                        (n[a] + 1..=0).rev().collect()
                    };
                    for k in ks {
                        let plane = k as f64 * dims[a];
                        let s = (plane - tx[a]) / (img[a] - tx[a]);
                        crossings.push((s, Face::from_axis(a, k.rem_euclid(2) == 1)));
                    }
                }
                crossings.sort_by(|x, y| x.0.total_cmp(&y.0));
                let faces: Vec<Face> = crossings.into_iter().map(|c| c.1).collect();
                out.push((faces, (img - tx).norm()));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}
