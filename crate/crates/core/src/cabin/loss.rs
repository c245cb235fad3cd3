//! Friis path loss, per-link steering and the boxplot statistics.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tracer::{LinkPaths, RayPath};
use super::{CabinError, CabinGeometry, CabinScenario, ReceiverNode, TransmitterNode};
use crate::antenna::{steer_toward, SPEED_OF_LIGHT};

/// Free-space loss `20·log10(4π·d·f/c)`, dB.
pub fn fspl_db(distance_m: f64, frequency_hz: f64) -> Result<f64, CabinError> {
    if !(distance_m > 0.0 && distance_m.is_finite()) {
        return Err(CabinError::Domain(format!("path length {distance_m} m")));
    }
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(CabinError::Domain(format!("frequency {frequency_hz} Hz")));
    }
    Ok(20.0 * (4.0 * std::f64::consts::PI * distance_m * frequency_hz / SPEED_OF_LIGHT).log10())
}

/// Free-space loss plus reflection losses minus both antenna gains.
pub fn path_loss(
    path: &RayPath,
    geom: &CabinGeometry,
    frequency_hz: f64,
    tx_gain_db: f64,
    rx_gain_db: f64,
) -> Result<f64, CabinError> {
    Ok(fspl_db(path.length_m, frequency_hz)? + geom.reflection_loss_db(&path.faces) - tx_gain_db - rx_gain_db)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkLoss {
    pub tx_id: usize,
    pub rx_id: usize,
    /// Loss of the strongest path with both arrays steered onto it.
    pub best_loss_db: f64,
    /// Power sum of every path under that same steering.
    pub combined_loss_db: f64,
    pub n_paths: usize,
    /// Per-path loss under the link steering, in path order.
    pub path_losses_db: Vec<f64>,
}

/// Steers the transmitter along the strongest path's departure and the
/// receiver back along its arrival, then scores every path of the link.
pub fn evaluate_link(
    link: &LinkPaths,
    tx: &TransmitterNode,
    rx: &ReceiverNode,
    geom: &CabinGeometry,
    frequency_hz: f64,
) -> Result<LinkLoss, CabinError> {
    if link.paths.is_empty() {
        return Err(CabinError::Domain(format!("no path from tx {} to rx {}", link.tx_id, link.rx_id)));
    }
    let bare: Vec<f64> = link
        .paths
        .iter()
        .map(|p| path_loss(p, geom, frequency_hz, 0.0, 0.0))
        .collect::<Result<_, _>>()?;
    let strongest = bare
        .iter()
        .enumerate()
        .fold(0, |best, (i, l)| if *l < bare[best] { i } else { best });
    let sp = &link.paths[strongest];
    let tx_beam = steer_toward(&tx.array, &sp.departure).at_frequency(frequency_hz);
    let rx_beam = steer_toward(&rx.array, &(-sp.arrival)).at_frequency(frequency_hz);
    let losses: Vec<f64> = link
        .paths
        .iter()
        .zip(&bare)
        .map(|(p, l)| l - tx_beam.gain_db(&p.departure) - rx_beam.gain_db(&(-p.arrival)))
        .collect();
    let power: f64 = losses.iter().map(|l| 10f64.powf(-l / 10.0)).sum();
    Ok(LinkLoss {
        tx_id: link.tx_id,
        rx_id: link.rx_id,
        best_loss_db: losses[strongest],
        combined_loss_db: -10.0 * power.log10(),
        n_paths: link.paths.len(),
        path_losses_db: losses,
    })
}

/// Loss table over every (transmitter, receiver) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossMatrix {
    pub links: Vec<LinkLoss>,
}

impl PathLossMatrix {
    pub fn build(scenario: &CabinScenario, traced: &[LinkPaths]) -> Result<Self, CabinError> {
        let links = traced
            .iter()
            .map(|l| {
                let tx = scenario.transmitters.iter().find(|t| t.id == l.tx_id);
                let rx = scenario.receivers.iter().find(|r| r.id == l.rx_id);
                match (tx, rx) {
                    (Some(tx), Some(rx)) => evaluate_link(l, tx, rx, &scenario.geometry, scenario.frequency_hz),
                    _ => Err(CabinError::Domain(format!("unknown link {} -> {}", l.tx_id, l.rx_id))),
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { links })
    }

    pub fn tx_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.links.iter().map(|l| l.tx_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tx_id", "rx_id", "best_loss_db", "combined_loss_db", "n_paths"])?;
        for l in &self.links {
            out.write_record([
                l.tx_id.to_string(),
                l.rx_id.to_string(),
                format!("{:.6}", l.best_loss_db),
                format!("{:.6}", l.combined_loss_db),
                l.n_paths.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Per-path dump; `traced` must be the input `build` was given.
    pub fn write_paths_csv<W: Write>(&self, traced: &[LinkPaths], w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tx_id", "rx_id", "n_reflections", "length_m", "loss_db"])?;
        for (l, t) in self.links.iter().zip(traced) {
            for (p, loss) in t.paths.iter().zip(&l.path_losses_db) {
                out.write_record([
                    l.tx_id.to_string(),
                    l.rx_id.to_string(),
                    p.n_reflections().to_string(),
                    format!("{:.6}", p.length_m),
                    format!("{loss:.6}"),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> std::io::Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f)).map_err(std::io::Error::other)
    }
}

/// Linear-interpolation quantile of sorted data (`pos = q·(n−1)`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TxStats {
    pub tx_id: usize,
    pub n_links: usize,
    pub mean_db: f64,
    pub median_db: f64,
    pub q1_db: f64,
    pub q3_db: f64,
    pub min_db: f64,
    pub max_db: f64,
}

impl TxStats {
    fn from_values(tx_id: usize, mut v: Vec<f64>) -> Self {
        v.sort_by(f64::total_cmp);
        Self {
            tx_id,
            n_links: v.len(),
            mean_db: v.iter().sum::<f64>() / v.len() as f64,
            median_db: median(&v),
            q1_db: quantile(&v, 0.25),
            q3_db: quantile(&v, 0.75),
            min_db: v[0],
            max_db: v[v.len() - 1],
        }
    }
}

/// Per-transmitter statistics over best-path loss, with the combined-power
/// variant alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CabinStats {
    pub per_tx: Vec<TxStats>,
    pub global_mean_db: f64,
    pub per_tx_combined: Vec<TxStats>,
    pub global_mean_combined_db: f64,
}

pub fn aggregate_stats(matrix: &PathLossMatrix) -> Result<CabinStats, CabinError> {
    if matrix.links.is_empty() {
        return Err(CabinError::Domain("empty path-loss matrix".into()));
    }
    let per = |pick: fn(&LinkLoss) -> f64| -> Vec<TxStats> {
        matrix
            .tx_ids()
            .into_iter()
            .map(|id| {
                let v = matrix.links.iter().filter(|l| l.tx_id == id).map(pick).collect();
                TxStats::from_values(id, v)
            })
            .collect()
    };
    let mean = |pick: fn(&LinkLoss) -> f64| matrix.links.iter().map(pick).sum::<f64>() / matrix.links.len() as f64;
    Ok(CabinStats {
        per_tx: per(|l| l.best_loss_db),
        global_mean_db: mean(|l| l.best_loss_db),
        per_tx_combined: per(|l| l.combined_loss_db),
        global_mean_combined_db: mean(|l| l.combined_loss_db),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::Vec3;

    const F: f64 = 5.8e9;

    fn los(d: f64) -> RayPath {
        let g = CabinGeometry::new(100.0, 10.0, 10.0, 1.0).unwrap();
        super::super::specular_path(&g, &Vec3::new(1.0, 5.0, 5.0), &Vec3::new(1.0 + d, 5.0, 5.0), &[]).unwrap()
    }

    #[test]
    fn friis_examples() {
        // Oracle values from an independent evaluation of the Friis formula.
        let g = CabinGeometry::default();
        assert!((path_loss(&los(1.0), &g, F, 0.0, 0.0).unwrap() - 47.716_343_093).abs() < 1e-6);
        assert!((path_loss(&los(10.0), &g, F, 0.0, 0.0).unwrap() - 67.716_343_093).abs() < 1e-6);
        let l = path_loss(&los(10.0), &g, F, 15.05, 6.02).unwrap();
        assert!((l - 46.646_343_093).abs() < 1e-6);
        let p = super::super::specular_path(
            &g,
            &Vec3::new(1.0, 1.0, 1.0),
            &Vec3::new(3.0, 2.0, 1.0),
            &[super::super::Face::ZMax],
        )
        .unwrap();
        assert!((path_loss(&p, &g, F, 0.0, 0.0).unwrap() - fspl_db(p.length_m, F).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_length_is_domain_error() {
        assert!(matches!(fspl_db(0.0, F), Err(CabinError::Domain(_))));
    }

    #[test]
    fn quantile_conventions() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 0.75), 3.25);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
    }

    fn matrix(values: &[f64]) -> PathLossMatrix {
        PathLossMatrix {
            links: values
                .iter()
                .enumerate()
                .map(|(i, v)| LinkLoss {
                    tx_id: 0,
                    rx_id: i,
                    best_loss_db: *v,
                    combined_loss_db: *v,
                    n_paths: 1,
                    path_losses_db: vec![*v],
                })
                .collect(),
        }
    }

    #[test]
    fn stats_examples() {
        let s = aggregate_stats(&matrix(&[50.0, 60.0])).unwrap();
        assert_eq!(s.per_tx[0].mean_db, 55.0);
        assert_eq!(s.per_tx[0].median_db, 55.0);
        let s = aggregate_stats(&matrix(&[61.5; 5])).unwrap();
        let t = &s.per_tx[0];
        for v in [t.mean_db, t.median_db, t.q1_db, t.q3_db, t.min_db, t.max_db, s.global_mean_db] {
            assert_eq!(v, 61.5);
        }
        assert!(aggregate_stats(&PathLossMatrix { links: vec![] }).is_err());
    }
}
