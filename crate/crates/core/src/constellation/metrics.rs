use serde::{Deserialize, Serialize};

use super::{CoverageTimeline, HandoverEvent, InsertionOutcome, SatelliteStatus};

/// Serving changes along the timeline.
///
/// `A, none…, B` collapses into a single `A → B` event carrying the gap.
/// Service coming back on the same satellite after a gap is reported with
/// `from = None`. Neither the initial acquisition nor a trailing loss of
/// service produces an event, so the gaps sum to the uncovered time between
/// the first and last covered samples.
pub fn extract_handovers(timeline: &CoverageTimeline) -> Vec<HandoverEvent> {
    let mut events = Vec::new();
    let mut last: Option<(usize, usize)> = None;
    for (k, serving) in timeline.serving.iter().enumerate() {
        let Some(id) = *serving else { continue };
        if let Some((prev, last_k)) = last {
            if prev != id || last_k + 1 != k {
                events.push(HandoverEvent {
                    t_s: timeline.grid[k],
                    from: (prev != id).then_some(prev),
                    to: Some(id),
                    gap_s: (k - last_k - 1) as f64 * timeline.step_s,
                });
            }
        }
        last = Some((id, k));
    }
    events
}

/// Covered samples over all samples, percent.
pub fn coverage_percentage(timeline: &CoverageTimeline) -> f64 {
    if timeline.is_empty() {
        return 0.0;
    }
    100.0 * timeline.covered_samples() as f64 / timeline.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub coverage_pct: f64,
    pub n_satellites_active: usize,
    pub n_satellites_discarded: usize,
    pub n_handovers: usize,
    pub max_gap_s: f64,
    pub total_gap_s: f64,
    pub n_satellites_pending: usize,
    pub flight_duration_s: f64,
    pub n_samples: usize,
    pub budget_exhausted: bool,
}

impl CoverageSummary {
    pub fn new(outcome: &InsertionOutcome, events: &[HandoverEvent], flight_duration_s: f64) -> Self {
        let count = |s: SatelliteStatus| outcome.satellites.iter().filter(|x| x.status == s).count();
        Self {
            coverage_pct: (coverage_percentage(&outcome.timeline) * 100.0).round() / 100.0,
            n_satellites_active: count(SatelliteStatus::Active),
            n_satellites_discarded: count(SatelliteStatus::Discarded),
            n_handovers: events.len(),
            max_gap_s: events.iter().map(|e| e.gap_s).fold(0.0, f64::max),
            total_gap_s: events.iter().map(|e| e.gap_s).fold(0.0, |a, g| a + g),
            n_satellites_pending: count(SatelliteStatus::Pending),
            flight_duration_s,
            n_samples: outcome.timeline.len(),
            budget_exhausted: outcome.budget_exhausted,
        }
    }
}
