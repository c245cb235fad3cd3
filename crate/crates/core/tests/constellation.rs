use skybridge::constellation::{
    build_timeline, initial_satellite, next_satellite, run_sequential_insertion, satellite_visibility,
    ConstellationError, ElementTemplate, InsertionPolicy, SatelliteStatus, Sticky,
};
use skybridge::flight::{FlightPlan, Trajectory};
use skybridge::orbit::{Geodetic, Orbit, MU_EARTH};
use skybridge::visibility::{SampledFlight, VisibilityMask};

fn flight(o: (f64, f64), d: (f64, f64), speed: f64, step: f64) -> SampledFlight {
    let plan = FlightPlan::new(
        Geodetic::from_degrees(o.0, o.1, 0.0).unwrap(),
        Geodetic::from_degrees(d.0, d.1, 0.0).unwrap(),
        11_000.0,
        speed,
        0.0,
        step,
    )
    .unwrap();
    SampledFlight::new(&Trajectory::Planned(plan)).unwrap()
}

fn coarse(template: ElementTemplate) -> InsertionPolicy {
    InsertionPolicy {
        search_raan_step_deg: 5.0,
        search_anomaly_step_deg: 5.0,
        template,
        ..Default::default()
    }
}

#[test]
fn equatorial_template_can_sit_overhead_at_departure() {
    let f = flight((0.0, 0.0), (0.0, 5.0), 250.0, 10.0);
    let template = ElementTemplate {
        eccentricity: 0.0,
        inclination_deg: 0.0,
        ..Default::default()
    };
    let mask = VisibilityMask::default();
    // the grid cell placing the sub-satellite point on the origin
    let overhead = template.elements(0.0, 0.0, 0.0).unwrap();
    let (el, _, visible) = f.link_at(&Orbit::new(&overhead), 0, &mask);
    assert!(visible);
    assert!((el - 90.0).abs() < 1e-6);
    let sel = initial_satellite(&f, &coarse(template), &mask).unwrap();
    assert_eq!(sel.first_visible_idx, 0);
}

#[test]
fn next_satellite_covers_the_gap_or_reports_none() {
    let f = flight((40.0, -74.0), (30.0, -70.0), 250.0, 5.0);
    let policy = coarse(ElementTemplate::default());
    let mask = VisibilityMask::default();
    let first = initial_satellite(&f, &policy, &mask).unwrap();
    let vis = vec![satellite_visibility(&f, &first.elements, 0, &mask)];
    let sats = vec![skybridge::constellation::Satellite {
        id: 0,
        elements: first.elements,
        inserted_t_s: 0.0,
        status: SatelliteStatus::Active,
    }];
    let tl = build_timeline(&f, &sats, &vis, &Sticky);
    let gap = tl.serving.iter().position(Option::is_none).unwrap();
    let next = next_satellite(&f, &tl, &policy, &mask).unwrap();
    assert_eq!(next.first_visible_idx, gap);
    assert!(f.visible_at(&Orbit::new(&next.elements), gap, &mask));

    let mut full = tl.clone();
    full.serving.iter_mut().for_each(|s| *s = Some(0));
    assert!(matches!(
        next_satellite(&f, &full, &policy, &mask),
        Err(ConstellationError::NoGap)
    ));
}

#[test]
fn second_insertion_trails_by_mean_motion() {
    // Circular polar template with RAAN pinned to one value: the second
    // satellite must reach the same place a time Δt later, so its anomaly at
    // the common epoch trails by n·Δt, up to aircraft motion, Earth rotation
    // and the 1° grid.
    let f = flight((-10.0, 0.0), (10.0, 0.0), 250.0, 5.0);
    let template = ElementTemplate {
        eccentricity: 0.0,
        inclination_deg: 90.0,
        ..Default::default()
    };
    let policy = InsertionPolicy {
        max_satellites: 2,
        search_raan_step_deg: 360.0,
        search_anomaly_step_deg: 1.0,
        template,
        ..Default::default()
    };
    let out = run_sequential_insertion(&f, &policy, &VisibilityMask::default()).unwrap();
    assert_eq!(out.satellites.len(), 2);
    let (a, b) = (&out.satellites[0], &out.satellites[1]);
    let dt = b.inserted_t_s - a.inserted_t_s;
    assert!(dt > 0.0);
    let n = (MU_EARTH / template.sma_m.powi(3)).sqrt();
    let trail = (a.elements.true_anomaly_at_epoch_rad() - b.elements.true_anomaly_at_epoch_rad()).to_degrees();
    let trail = trail.rem_euclid(360.0);
    let expected = (n * dt).to_degrees();
    assert!(
        (trail - expected).abs() < 5.0,
        "trail {trail:.2} deg vs n·dt {expected:.2} deg over dt {dt} s"
    );
}

#[test]
fn short_flight_needs_one_satellite() {
    let f = flight((40.0, -74.0), (40.5, -74.0), 250.0, 1.0);
    let out = run_sequential_insertion(&f, &coarse(ElementTemplate::default()), &VisibilityMask::default()).unwrap();
    assert_eq!(out.satellites.len(), 1);
    assert_eq!(out.satellites[0].status, SatelliteStatus::Active);
    assert!(out.timeline.is_fully_covered());
}

#[test]
fn timeout_budget_and_lifecycle_invariants() {
    // a tight timeout on a coarse grid forces discards
    let f = flight((40.64, -73.78), (18.43, -69.67), 250.0, 5.0);
    let mask = VisibilityMask::default();
    let policy = InsertionPolicy {
        connect_timeout_s: 5.0,
        max_satellites: 15,
        search_raan_step_deg: 120.0,
        search_anomaly_step_deg: 120.0,
        ..Default::default()
    };
    let out = run_sequential_insertion(&f, &policy, &mask).unwrap();
    assert!(out.satellites.len() <= policy.max_satellites);
    assert!(out.satellites.iter().any(|s| s.status == SatelliteStatus::Discarded));
    for (i, s) in out.satellites.iter().enumerate() {
        assert_eq!(s.id, i);
        let from = f.grid.iter().position(|t| *t >= s.inserted_t_s).unwrap();
        let vis = satellite_visibility(&f, &s.elements, from, &mask);
        let within = (from..f.len())
            .take_while(|&k| f.grid[k] - s.inserted_t_s <= policy.connect_timeout_s)
            .any(|k| vis.visible[k]);
        match s.status {
            SatelliteStatus::Discarded => assert!(!within, "satellite {i} contacted in time"),
            SatelliteStatus::Active => assert!(within),
            SatelliteStatus::Pending => panic!("sequential run leaves no pending satellites"),
        }
    }
    assert!(out.timeline.serving.iter().flatten().all(|id| out.satellites[*id].status == SatelliteStatus::Active));
}

#[test]
fn identical_inputs_identical_outputs() {
    let f = flight((40.64, -73.78), (35.0, -72.0), 250.0, 5.0);
    let p = coarse(ElementTemplate::default());
    let a = run_sequential_insertion(&f, &p, &VisibilityMask::default()).unwrap();
    let b = run_sequential_insertion(&f, &p, &VisibilityMask::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.timeline.to_csv(), b.timeline.to_csv());
}

#[test]
fn unreachable_route_is_an_error() {
    let f = flight((40.0, -74.0), (40.2, -74.0), 250.0, 5.0);
    let policy = InsertionPolicy {
        search_raan_step_deg: 180.0,
        search_anomaly_step_deg: 180.0,
        lookahead_s: Some(60.0),
        ..Default::default()
    };
    let mask = VisibilityMask::new(89.0, 60.0).unwrap();
    assert!(matches!(
        run_sequential_insertion(&f, &policy, &mask),
        Err(ConstellationError::Unreachable { .. })
    ));
    assert!(matches!(
        initial_satellite(&f, &policy, &mask),
        Err(ConstellationError::Unreachable { .. })
    ));
}
