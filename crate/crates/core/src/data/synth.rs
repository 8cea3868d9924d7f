//! Seeded synthetic workload generation: Poisson arrivals over a
//! piecewise-constant hourly rate profile, with origins and destinations
//! drawn from a Gaussian hotspot mixture.

use crate::data::DataError;
use crate::model::{manhattan_dist, KmBounds, Point, RequestId, TripRequest};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hotspot {
    pub center: Point,
    /// Spread of the hotspot, kilometers.
    pub std_dev: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Length of the arrival process, minutes. Hours beyond the rate
    /// profile contribute nothing.
    pub duration_min: f64,
    /// Requests per minute, one entry per hour.
    pub rate_per_min_by_hour: Vec<f64>,
    pub region: KmBounds,
    pub hotspots: Vec<Hotspot>,
    pub seed: u64,
    /// Patience stamped onto every generated request, minutes.
    #[serde(default = "default_patience")]
    pub patience: f64,
    /// Geographic anchor used when exporting the workload as a trip-record
    /// CSV.
    #[serde(default = "default_anchor_lat")]
    pub anchor_lat: f64,
    #[serde(default = "default_anchor_lon")]
    pub anchor_lon: f64,
}

fn default_patience() -> f64 {
    20.0
}
fn default_anchor_lat() -> f64 {
    40.75
}
fn default_anchor_lon() -> f64 {
    -73.98
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |msg: String| Err(DataError::InvalidSpec(msg));
        if !(self.duration_min >= 0.0) {
            return bad("duration_min must be non-negative".to_string());
        }
        if self.rate_per_min_by_hour.iter().any(|&r| !(r >= 0.0)) {
            return bad("rates must be non-negative".to_string());
        }
        if self.region.validate().is_err() {
            return bad("region must have positive extent".to_string());
        }
        if self.hotspots.is_empty() {
            return bad("at least one hotspot is required".to_string());
        }
        if self.hotspots.iter().any(|h| h.weight < 0.0 || h.std_dev < 0.0) {
            return bad("hotspot weights and spreads must be non-negative".to_string());
        }
        let total: f64 = self.hotspots.iter().map(|h| h.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("hotspot weights must sum to 1, got {total}"));
        }
        if !(self.patience > 0.0) {
            return bad("patience must be positive".to_string());
        }
        Ok(())
    }
}

fn sample_point(rng: &mut ChaCha8Rng, spec: &SyntheticSpec) -> Point {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut chosen = &spec.hotspots[spec.hotspots.len() - 1];
    for h in &spec.hotspots {
        cumulative += h.weight;
        if u <= cumulative {
            chosen = h;
            break;
        }
    }
    let point = if chosen.std_dev > 0.0 {
        let nx = Normal::new(chosen.center.x, chosen.std_dev).expect("validated std_dev");
        let ny = Normal::new(chosen.center.y, chosen.std_dev).expect("validated std_dev");
        Point::new(nx.sample(rng), ny.sample(rng))
    } else {
        chosen.center
    };
    spec.region.clamp(point)
}

/// Generates the workload described by `spec`. Deterministic for a given
/// seed; release times are quantized to whole seconds.
pub fn generate(spec: &SyntheticSpec) -> Result<Vec<TripRequest>, DataError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut workload: Vec<TripRequest> = Vec::new();

    let whole_minutes = spec.duration_min.ceil() as u64;
    for minute in 0..whole_minutes {
        let rate = spec
            .rate_per_min_by_hour
            .get((minute / 60) as usize)
            .copied()
            .unwrap_or(0.0);
        // The last minute may be fractional; scale its expected count.
        let width = (spec.duration_min - minute as f64).min(1.0);
        let lambda = rate * width;
        if lambda <= 0.0 {
            continue;
        }
        let count = Poisson::new(lambda).expect("positive lambda").sample(&mut rng) as u64;
        let second_span = ((60.0 * width) as u64).max(1);
        for _ in 0..count {
            let second = minute * 60 + rng.gen_range(0..second_span);
            let release = second as f64 / 60.0;
            let origin = sample_point(&mut rng, spec);
            let mut destination = sample_point(&mut rng, spec);
            let mut tries = 0;
            while manhattan_dist(origin, destination) < 1e-9 && tries < 32 {
                destination = sample_point(&mut rng, spec);
                tries += 1;
            }
            if manhattan_dist(origin, destination) < 1e-9 {
                // Degenerate mixture; nudge inside the region.
                let dx = if origin.x - spec.region.min_x > spec.region.max_x - origin.x {
                    -0.001
                } else {
                    0.001
                };
                destination = Point::new(origin.x + dx, origin.y);
            }
            workload.push(TripRequest::new(
                RequestId(0),
                origin,
                destination,
                release,
                spec.patience,
            ));
        }
    }

    workload.sort_by(|a, b| a.release_time.partial_cmp(&b.release_time).expect("finite"));
    for (i, r) in workload.iter_mut().enumerate() {
        r.id = RequestId(i as u32);
    }
    Ok(workload)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> SyntheticSpec {
        SyntheticSpec {
            duration_min: 10.0,
            rate_per_min_by_hour: vec![10.0],
            region: KmBounds::new(0.0, 0.0, 10.0, 10.0),
            hotspots: vec![
                Hotspot { center: Point::new(2.0, 2.0), std_dev: 0.5, weight: 0.6 },
                Hotspot { center: Point::new(8.0, 8.0), std_dev: 0.5, weight: 0.4 },
            ],
            seed: 42,
            patience: 20.0,
            anchor_lat: 40.75,
            anchor_lon: -73.98,
        }
    }

    #[test]
    fn zero_rates_empty_workload() {
        let spec = SyntheticSpec { rate_per_min_by_hour: vec![0.0], ..base_spec() };
        assert!(generate(&spec).unwrap().is_empty());
    }

    #[test]
    fn fixed_seed_reproduces_exactly() {
        let spec = base_spec();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SyntheticSpec { seed: 43, ..base_spec() };
        assert_ne!(generate(&other).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn poisson_count_within_three_sigma() {
        // Rate 10/min over 10 min: expect 100 +- 3 * sqrt(100).
        let n = generate(&base_spec()).unwrap().len() as f64;
        assert!((n - 100.0).abs() <= 30.0, "count {n} outside 3 sigma of 100");
    }

    #[test]
    fn workload_is_sorted_in_region_and_well_formed() {
        let workload = generate(&base_spec()).unwrap();
        let region = base_spec().region;
        assert!(workload.windows(2).all(|w| w[0].release_time <= w[1].release_time));
        for (i, r) in workload.iter().enumerate() {
            assert_eq!(r.id, RequestId(i as u32));
            assert!(region.contains(r.origin) && region.contains(r.destination));
            assert!(r.origin != r.destination);
            assert!(r.release_time < 10.0 + 1.0);
        }
    }

    #[test]
    fn weights_must_sum_to_one() {
        let mut spec = base_spec();
        spec.hotspots[0].weight = 0.9;
        assert!(matches!(generate(&spec), Err(DataError::InvalidSpec(_))));
    }
}
