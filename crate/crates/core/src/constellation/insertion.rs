use rayon::prelude::*;

use super::search::ElementSearch;
use super::serving::{Candidate, ServingPolicy, Sticky};
use super::{
    ConstellationError, CoverageTimeline, InsertionPolicy, Satellite, SatelliteStatus,
};
use crate::orbit::{KeplerianElements, Orbit};
use crate::registry::Registry;
use crate::visibility::{SampledFlight, VisibilityMask};

/// Per-sample link state of one satellite over the flight grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SatVisibility {
    pub visible: Vec<bool>,
    pub elevation_deg: Vec<f64>,
    pub slant_range_m: Vec<f64>,
}

impl SatVisibility {
    pub fn first_visible_from(&self, k: usize) -> Option<usize> {
        (k..self.visible.len()).find(|&j| self.visible[j])
    }
}

/// Link state of `elements` on every grid sample at or after `from_idx`;
/// earlier samples are left invisible.
pub fn satellite_visibility(
    flight: &SampledFlight,
    elements: &KeplerianElements,
    from_idx: usize,
    mask: &VisibilityMask,
) -> SatVisibility {
    let orbit = Orbit::new(elements);
    let n = flight.len();
    let mut vis = SatVisibility {
        visible: vec![false; n],
        elevation_deg: vec![f64::NAN; n],
        slant_range_m: vec![f64::NAN; n],
    };
    for k in from_idx..n {
        let (el, range, v) = flight.link_at(&orbit, k, mask);
        vis.visible[k] = v;
        vis.elevation_deg[k] = el;
        vis.slant_range_m[k] = range;
    }
    vis
}

/// Folds visibility into a serving timeline. Discarded satellites are
/// ignored.
pub fn build_timeline(
    flight: &SampledFlight,
    satellites: &[Satellite],
    visibility: &[SatVisibility],
    policy: &dyn ServingPolicy,
) -> CoverageTimeline {
    let n = flight.len();
    let mut tl = CoverageTimeline {
        grid: flight.grid.clone(),
        step_s: flight.step_s,
        serving: vec![None; n],
        elevation_deg: vec![None; n],
        slant_range_m: vec![None; n],
    };
    let live: Vec<usize> = satellites
        .iter()
        .enumerate()
        .filter(|(_, s)| s.status != SatelliteStatus::Discarded)
        .map(|(i, _)| i)
        .collect();
    let mut current = None;
    let mut visible = Vec::with_capacity(live.len());
    for k in 0..n {
        visible.clear();
        visible.extend(live.iter().filter(|&&i| visibility[i].visible[k]).map(|&i| Candidate {
            sat_id: satellites[i].id,
            elevation_deg: visibility[i].elevation_deg[k],
        }));
        current = policy.select(&visible, current);
        if let Some(id) = current {
            let i = satellites.iter().position(|s| s.id == id).expect("serving id exists");
            tl.serving[k] = Some(id);
            tl.elevation_deg[k] = Some(visibility[i].elevation_deg[k]);
            tl.slant_range_m[k] = Some(visibility[i].slant_range_m[k]);
        }
    }
    tl
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertionOutcome {
    pub satellites: Vec<Satellite>,
    pub timeline: CoverageTimeline,
    /// The loop stopped on the satellite budget with samples still uncovered.
    pub budget_exhausted: bool,
}

/// Everything an insertion strategy needs for one run.
pub struct CoverageProblem<'a> {
    pub flight: &'a SampledFlight,
    pub policy: &'a InsertionPolicy,
    pub mask: &'a VisibilityMask,
    /// Predefined satellites; only the parallel strategy reads these.
    pub fixed_satellites: &'a [KeplerianElements],
}

pub trait InsertionStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(
        &self,
        problem: &CoverageProblem<'_>,
        serving: &dyn ServingPolicy,
    ) -> Result<InsertionOutcome, ConstellationError>;
}

/// Adds satellites one at a time at the first uncovered sample. Windows in
/// which no candidate is ever visible are skipped; a route with no reachable
/// sample at all is an error.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sequential;

/// Uses a predefined satellite list with insertion disabled. Every satellite
/// exists from departure and no connect timeout applies.
#[derive(Debug, Default, Clone, Copy)]
pub struct Parallel;

fn in_spans(k: usize, spans: &[(usize, usize)]) -> bool {
    spans.iter().any(|&(a, b)| k >= a && k < b)
}

impl InsertionStrategy for Sequential {
    fn name(&self) -> &'static str {
        "sequential"
    }

    fn run(
        &self,
        problem: &CoverageProblem<'_>,
        serving: &dyn ServingPolicy,
    ) -> Result<InsertionOutcome, ConstellationError> {
        let flight = problem.flight;
        let policy = problem.policy;
        let search = ElementSearch::new(flight, policy, problem.mask)?;
        let mut satellites: Vec<Satellite> = Vec::new();
        let mut visibility: Vec<SatVisibility> = Vec::new();
        // Samples no candidate can reach; never searched again.
        let mut unreachable: Vec<(usize, usize)> = Vec::new();
        let mut budget_exhausted = false;
        loop {
            let timeline = build_timeline(flight, &satellites, &visibility, serving);
            let gap = (0..timeline.len())
                .find(|&k| timeline.serving[k].is_none() && !in_spans(k, &unreachable));
            let Some(gap) = gap else {
                if satellites.is_empty() && !timeline.is_empty() {
                    return Err(ConstellationError::Unreachable {
                        start_s: flight.grid[0],
                        end_s: flight.grid[flight.len() - 1] + flight.step_s,
                    });
                }
                return Ok(InsertionOutcome {
                    satellites,
                    timeline,
                    budget_exhausted,
                });
            };
            if satellites.len() >= policy.max_satellites {
                budget_exhausted = true;
                return Ok(InsertionOutcome {
                    satellites,
                    timeline,
                    budget_exhausted,
                });
            }
            let sel = match search.best_from(gap) {
                Ok(sel) => sel,
                Err(ConstellationError::Unreachable { .. }) => {
                    unreachable.push((gap, search.window_end(gap)));
                    continue;
                }
                Err(e) => return Err(e),
            };
            if sel.first_visible_idx > gap {
                unreachable.push((gap, sel.first_visible_idx));
            }
            let inserted_t_s = flight.grid[gap];
            let vis = satellite_visibility(flight, &sel.elements, gap, problem.mask);
            let status = match vis.first_visible_from(gap) {
                Some(f) if flight.grid[f] - inserted_t_s <= policy.connect_timeout_s => {
                    SatelliteStatus::Active
                }
                _ => SatelliteStatus::Discarded,
            };
            satellites.push(Satellite {
                id: satellites.len(),
                elements: sel.elements,
                inserted_t_s,
                status,
            });
            visibility.push(vis);
        }
    }
}

impl InsertionStrategy for Parallel {
    fn name(&self) -> &'static str {
        "parallel"
    }

    fn run(
        &self,
        problem: &CoverageProblem<'_>,
        serving: &dyn ServingPolicy,
    ) -> Result<InsertionOutcome, ConstellationError> {
        if problem.fixed_satellites.len() > problem.policy.max_satellites {
            return Err(ConstellationError::Policy {
                field: "max_satellites",
                message: format!(
                    "is {} but {} fixed satellites were given",
                    problem.policy.max_satellites,
                    problem.fixed_satellites.len()
                ),
            });
        }
        let flight = problem.flight;
        let t0 = flight.grid.first().copied().unwrap_or(0.0);
        let visibility: Vec<SatVisibility> = problem
            .fixed_satellites
            .par_iter()
            .map(|el| satellite_visibility(flight, el, 0, problem.mask))
            .collect();
        let satellites: Vec<Satellite> = problem
            .fixed_satellites
            .iter()
            .zip(&visibility)
            .enumerate()
            .map(|(id, (el, vis))| Satellite {
                id,
                elements: *el,
                inserted_t_s: t0,
                status: if vis.visible.iter().any(|&v| v) {
                    SatelliteStatus::Active
                } else {
                    SatelliteStatus::Pending
                },
            })
            .collect();
        let timeline = build_timeline(flight, &satellites, &visibility, serving);
        Ok(InsertionOutcome {
            satellites,
            timeline,
            budget_exhausted: false,
        })
    }
}

pub fn registry() -> Registry<dyn InsertionStrategy> {
    let mut r: Registry<dyn InsertionStrategy> = Registry::new("insertion strategy");
    r.register("sequential", || Box::new(Sequential))
        .register("parallel", || Box::new(Parallel));
    r
}

/// Sequential insertion with the sticky serving policy.
pub fn run_sequential_insertion(
    flight: &SampledFlight,
    policy: &InsertionPolicy,
    mask: &VisibilityMask,
) -> Result<InsertionOutcome, ConstellationError> {
    Sequential.run(
        &CoverageProblem {
            flight,
            policy,
            mask,
            fixed_satellites: &[],
        },
        &Sticky,
    )
}

/// Fixed-list ("parallel") run with the sticky serving policy.
pub fn run_parallel(
    flight: &SampledFlight,
    policy: &InsertionPolicy,
    mask: &VisibilityMask,
    satellites: &[KeplerianElements],
) -> Result<InsertionOutcome, ConstellationError> {
    Parallel.run(
        &CoverageProblem {
            flight,
            policy,
            mask,
            fixed_satellites: satellites,
        },
        &Sticky,
    )
}
