use crate::registry::Registry;

/// A satellite visible at the current sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub sat_id: usize,
    pub elevation_deg: f64,
}

/// Chooses the serving satellite at one sample given what is visible and
/// what served the previous sample.
pub trait ServingPolicy: Send + Sync {
    fn name(&self) -> &'static str;
    fn select(&self, visible: &[Candidate], current: Option<usize>) -> Option<usize>;
}

fn highest(visible: &[Candidate]) -> Option<usize> {
    visible
        .iter()
        .fold(None::<Candidate>, |best, c| match best {
            Some(b)
                if b.elevation_deg > c.elevation_deg
                    || (b.elevation_deg == c.elevation_deg && b.sat_id < c.sat_id) =>
            {
                Some(b)
            }
            _ => Some(*c),
        })
        .map(|c| c.sat_id)
}

/// Keeps the current satellite while it stays visible; otherwise takes the
/// highest one (ties to the lowest id).
#[derive(Debug, Default, Clone, Copy)]
pub struct Sticky;

impl ServingPolicy for Sticky {
    fn name(&self) -> &'static str {
        "sticky"
    }

    fn select(&self, visible: &[Candidate], current: Option<usize>) -> Option<usize> {
        if let Some(id) = current {
            if visible.iter().any(|c| c.sat_id == id) {
                return Some(id);
            }
        }
        highest(visible)
    }
}

/// Always serves from the highest satellite, handing over whenever another
/// one climbs above the current.
#[derive(Debug, Default, Clone, Copy)]
pub struct MaxElevation;

impl ServingPolicy for MaxElevation {
    fn name(&self) -> &'static str {
        "max-elevation"
    }

    fn select(&self, visible: &[Candidate], _current: Option<usize>) -> Option<usize> {
        highest(visible)
    }
}

pub fn select_serving(visible: &[Candidate], current: Option<usize>) -> Option<usize> {
    Sticky.select(visible, current)
}

pub fn registry() -> Registry<dyn ServingPolicy> {
    let mut r: Registry<dyn ServingPolicy> = Registry::new("serving policy");
    r.register("sticky", || Box::new(Sticky))
        .register("max-elevation", || Box::new(MaxElevation));
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(sat_id: usize, elevation_deg: f64) -> Candidate {
        Candidate {
            sat_id,
            elevation_deg,
        }
    }

    #[test]
    fn keeps_current_while_visible() {
        assert_eq!(select_serving(&[c(0, 20.0), c(5, 40.0)], Some(0)), Some(0));
    }

    #[test]
    fn tie_goes_to_lowest_id() {
        assert_eq!(select_serving(&[c(3, 41.0), c(1, 41.0)], Some(7)), Some(1));
        assert_eq!(select_serving(&[c(1, 41.0), c(3, 41.0)], None), Some(1));
    }

    #[test]
    fn empty_is_gap() {
        assert_eq!(select_serving(&[], Some(2)), None);
    }

    #[test]
    fn max_elevation_switches() {
        assert_eq!(MaxElevation.select(&[c(0, 20.0), c(5, 40.0)], Some(0)), Some(5));
    }

    #[test]
    fn registry_names() {
        let r = registry();
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["max-elevation", "sticky"]);
        assert_eq!(r.create("sticky").unwrap().name(), "sticky");
        assert!(r.create("random").is_err());
    }
}
