//! Exhaustive RAAN / true-anomaly grid search over the shared template.
//!
//! Candidates are scored lexicographically: the earliest first-visible sample
//! at or after the search start wins, then the longest contiguous visible run
//! from that sample (capped at the lookahead window), then the lowest grid
//! cell in RAAN-major order.

use rayon::prelude::*;

use super::{ConstellationError, CoverageTimeline, InsertionPolicy};
use crate::orbit::{KeplerianElements, Orbit};
use crate::visibility::{SampledFlight, VisibilityMask};

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub elements: KeplerianElements,
    pub raan_deg: f64,
    pub true_anomaly_deg: f64,
    /// Grid index of the first visible sample.
    pub first_visible_idx: usize,
    /// Contiguous visible samples starting at `first_visible_idx`.
    pub run_len: usize,
}

fn grid_values(step_deg: f64) -> Vec<f64> {
    let n = (360.0 / step_deg - 1e-9).ceil().max(1.0) as usize;
    (0..n).map(|k| k as f64 * step_deg).collect()
}

/// Candidate orbits for one flight, built once and reused for every
/// insertion of a run.
pub struct ElementSearch<'a> {
    flight: &'a SampledFlight,
    mask: VisibilityMask,
    raans: Vec<f64>,
    anomalies: Vec<f64>,
    orbits: Vec<Orbit>,
    window_samples: usize,
}

impl<'a> ElementSearch<'a> {
    pub fn new(
        flight: &'a SampledFlight,
        policy: &InsertionPolicy,
        mask: &VisibilityMask,
    ) -> Result<Self, ConstellationError> {
        policy.validate()?;
        let epoch = flight.grid.first().copied().unwrap_or(0.0);
        let raans = grid_values(policy.search_raan_step_deg);
        let anomalies = grid_values(policy.search_anomaly_step_deg);
        let mut orbits = Vec::with_capacity(raans.len() * anomalies.len());
        for &raan in &raans {
            for &nu in &anomalies {
                orbits.push(Orbit::new(&policy.template.elements(raan, nu, epoch)?));
            }
        }
        let window_samples = (policy.lookahead_s() / flight.step_s).ceil().max(1.0) as usize;
        Ok(Self {
            flight,
            mask: *mask,
            raans,
            anomalies,
            orbits,
            window_samples,
        })
    }

    pub fn candidate_count(&self) -> usize {
        self.orbits.len()
    }

    fn run_len(&self, c: usize, from: usize, end: usize) -> usize {
        (from..end)
            .take_while(|&k| self.flight.visible_at(&self.orbits[c], k, &self.mask))
            .count()
    }

    /// One past the last grid index searched from `start`.
    pub fn window_end(&self, start: usize) -> usize {
        (start + self.window_samples).min(self.flight.len())
    }

    /// Best candidate for the window starting at grid index `start`.
    pub fn best_from(&self, start: usize) -> Result<Selection, ConstellationError> {
        let n = self.flight.len();
        if start >= n {
            return Err(ConstellationError::NoGap);
        }
        let end = self.window_end(start);
        for k in start..end {
            let hits: Vec<usize> = (0..self.orbits.len())
                .into_par_iter()
                .filter(|&c| self.flight.visible_at(&self.orbits[c], k, &self.mask))
                .collect();
            if hits.is_empty() {
                continue;
            }
            let runs: Vec<usize> = hits.par_iter().map(|&c| self.run_len(c, k, end)).collect();
            let (best, run_len) = hits
                .iter()
                .zip(&runs)
                .fold((hits[0], runs[0]), |acc, (&c, &r)| if r > acc.1 { (c, r) } else { acc });
            let n_nu = self.anomalies.len();
            return Ok(Selection {
                elements: *self.orbits[best].elements(),
                raan_deg: self.raans[best / n_nu],
                true_anomaly_deg: self.anomalies[best % n_nu],
                first_visible_idx: k,
                run_len,
            });
        }
        Err(ConstellationError::Unreachable {
            start_s: self.flight.grid[start],
            end_s: self.flight.grid[end - 1] + self.flight.step_s,
        })
    }
}

/// First satellite of a run: the best candidate from departure.
pub fn initial_satellite(
    flight: &SampledFlight,
    policy: &InsertionPolicy,
    mask: &VisibilityMask,
) -> Result<Selection, ConstellationError> {
    ElementSearch::new(flight, policy, mask)?.best_from(0)
}

/// Best candidate for the first uncovered sample of `timeline`.
pub fn next_satellite(
    flight: &SampledFlight,
    timeline: &CoverageTimeline,
    policy: &InsertionPolicy,
    mask: &VisibilityMask,
) -> Result<Selection, ConstellationError> {
    let gap = timeline
        .serving
        .iter()
        .position(Option::is_none)
        .ok_or(ConstellationError::NoGap)?;
    ElementSearch::new(flight, policy, mask)?.best_from(gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing() {
        assert_eq!(grid_values(1.0).len(), 360);
        assert_eq!(grid_values(90.0), vec![0.0, 90.0, 180.0, 270.0]);
        assert_eq!(grid_values(100.0), vec![0.0, 100.0, 200.0, 300.0]);
        assert_eq!(grid_values(360.0), vec![0.0]);
    }
}
