//! Baseline matchers: the trapezoid-gated data-driven matcher (DDM) and the
//! gate-free online greedy matcher (OG).

use crate::matching::insertion::{insertion_cost, with_inserted};
use crate::matching::{MatchDecision, TrapezoidParams};
use crate::model::{euclid_dist, occupancy_profile, Point, RouteStop, TripRequest, Vehicle};

/// Membership in an isosceles trapezoid ahead of `pos`: the near edge of
/// width `near_width` is centered at the vehicle, the far edge of width
/// `far_width` sits at `depth` along the heading.
fn in_trapezoid(pos: Point, heading: (f64, f64), q: Point, t: &TrapezoidParams) -> bool {
    let dx = q.x - pos.x;
    let dy = q.y - pos.y;
    let along = heading.0 * dx + heading.1 * dy;
    if along < 0.0 || along > t.depth {
        return false;
    }
    let cross = heading.0 * dy - heading.1 * dx;
    let half_width = 0.5 * (t.near_width + (t.far_width - t.near_width) * (along / t.depth));
    cross.abs() <= half_width
}

/// The unit heading of a moving vehicle, toward the first route point away
/// from its position.
fn heading(vehicle: &Vehicle) -> Option<(f64, f64)> {
    let target = vehicle.route.iter().map(|s| s.location).find(|p| *p != vehicle.position)?;
    let dx = target.x - vehicle.position.x;
    let dy = target.y - vehicle.position.y;
    let len = (dx * dx + dy * dy).sqrt();
    Some((dx / len, dy / len))
}

/// Cheapest capacity-feasible joint insertion of pickup and dropoff into a
/// vehicle's route, scanning every slot pair. Earlier pairs win ties.
/// Returns (pickup index, dropoff index in the pickup-extended route, added
/// Manhattan distance).
fn cheapest_pair(vehicle: &Vehicle, request: &TripRequest) -> Option<(usize, usize, f64)> {
    let route = &vehicle.route;
    let occupancy = occupancy_profile(route, vehicle.onboard.len());
    let capacity = vehicle.capacity as i32;
    let mut best: Option<(usize, usize, f64)> = None;

    for i in 0..=route.len() {
        if occupancy[i] >= capacity {
            continue;
        }
        let pickup_cost = insertion_cost(vehicle.position, route, request.origin, i);
        let extended = with_inserted(route, RouteStop::pickup(request.id, request.origin), i);
        let extended_occ = occupancy_profile(&extended, vehicle.onboard.len());
        let mut running_max = i32::MIN;
        for j in (i + 1)..=extended.len() {
            // Occupancy ahead of every stop the new rider passes through.
            running_max = running_max.max(extended_occ[j]);
            if running_max > capacity {
                break;
            }
            let cost = pickup_cost
                + insertion_cost(vehicle.position, &extended, request.destination, j);
            if best.map_or(true, |(_, _, c)| cost < c) {
                best = Some((i, j, cost));
            }
        }
    }
    best
}

/// Data-driven baseline: vehicles qualify when the origin lies inside the
/// heading-aligned trapezoid (idle vehicles: within `depth` of the
/// vehicle), then the cheapest joint insertion wins fleet-wide. There is no
/// destination gate.
pub fn ddm_match(
    request: &TripRequest,
    fleet: &[Vehicle],
    trapezoid: &TrapezoidParams,
    _now: f64,
) -> Option<MatchDecision> {
    let mut best: Option<MatchDecision> = None;
    for vehicle in fleet {
        let qualifies = match heading(vehicle) {
            Some(h) => in_trapezoid(vehicle.position, h, request.origin, trapezoid),
            None => euclid_dist(vehicle.position, request.origin) <= trapezoid.depth,
        };
        if !qualifies {
            continue;
        }
        if let Some((pickup_index, dropoff_index, added_km)) = cheapest_pair(vehicle, request) {
            let candidate =
                MatchDecision { vehicle: vehicle.id, pickup_index, dropoff_index, added_km };
            if candidate.beats(&best) {
                best = Some(candidate);
            }
        }
    }
    best
}

/// Online greedy baseline: every vehicle and every feasible slot pair is
/// considered, and the globally smallest added distance wins. No spatial
/// gate of any kind.
pub fn og_match(request: &TripRequest, fleet: &[Vehicle], _now: f64) -> Option<MatchDecision> {
    let mut best: Option<MatchDecision> = None;
    for vehicle in fleet {
        if let Some((pickup_index, dropoff_index, added_km)) = cheapest_pair(vehicle, request) {
            let candidate =
                MatchDecision { vehicle: vehicle.id, pickup_index, dropoff_index, added_km };
            if candidate.beats(&best) {
                best = Some(candidate);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RequestId, VehicleId};

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn request(id: u32, origin: Point, dest: Point) -> TripRequest {
        TripRequest::new(RequestId(id), origin, dest, 0.0, 20.0)
    }

    fn moving_vehicle(id: u32, pos: Point, toward: Point) -> Vehicle {
        let mut v = Vehicle::new(VehicleId(id), pos, 4, 0.5);
        let rid = RequestId(100 + id);
        v.route = vec![RouteStop::pickup(rid, toward), RouteStop::dropoff(rid, pt(toward.x + 1.0, toward.y))];
        v
    }

    #[test]
    fn trapezoid_contains_axis_point_at_half_depth() {
        let t = TrapezoidParams::default();
        let inside = in_trapezoid(pt(0.0, 0.0), (1.0, 0.0), pt(t.depth / 2.0, 0.0), &t);
        assert!(inside);
    }

    #[test]
    fn trapezoid_rejects_behind_and_tapers_width() {
        let t = TrapezoidParams::default();
        assert!(!in_trapezoid(pt(0.0, 0.0), (1.0, 0.0), pt(-0.1, 0.0), &t));
        // Near the vehicle only the narrow edge applies.
        assert!(!in_trapezoid(pt(0.0, 0.0), (1.0, 0.0), pt(0.0, t.near_width), &t));
        assert!(in_trapezoid(pt(0.0, 0.0), (1.0, 0.0), pt(0.0, t.near_width / 2.0), &t));
        // At full depth the wide edge applies.
        assert!(in_trapezoid(pt(0.0, 0.0), (1.0, 0.0), pt(t.depth, t.far_width / 2.0), &t));
        assert!(!in_trapezoid(pt(0.0, 0.0), (1.0, 0.0), pt(t.depth, t.far_width / 2.0 + 0.01), &t));
    }

    #[test]
    fn ddm_rejects_origin_behind_vehicle() {
        let t = TrapezoidParams::default();
        let fleet = vec![moving_vehicle(0, pt(0.0, 0.0), pt(2.0, 0.0))];
        let req = request(0, pt(-0.5, 0.0), pt(3.0, 0.0));
        assert!(ddm_match(&req, &fleet, &t, 0.0).is_none());
    }

    #[test]
    fn ddm_accepts_origin_on_heading_axis() {
        let t = TrapezoidParams::default();
        let fleet = vec![moving_vehicle(0, pt(0.0, 0.0), pt(2.0, 0.0))];
        let req = request(0, pt(1.0, 0.0), pt(3.0, 0.0));
        let d = ddm_match(&req, &fleet, &t, 0.0).unwrap();
        assert_eq!(d.vehicle, VehicleId(0));
        assert!(d.added_km >= 0.0);
    }

    #[test]
    fn og_single_empty_vehicle_takes_detour_minimal_insertion() {
        let fleet = vec![Vehicle::new(VehicleId(0), pt(0.0, 0.0), 4, 0.5)];
        let req = request(0, pt(1.0, 0.0), pt(2.0, 0.0));
        let d = og_match(&req, &fleet, 0.0).unwrap();
        assert_eq!((d.pickup_index, d.dropoff_index), (0, 1));
        assert_eq!(d.added_km, 2.0);
    }

    #[test]
    fn og_prefers_vehicle_already_passing_by() {
        // Vehicle 0 already drives through both points; vehicle 1 idles far away.
        let v0 = moving_vehicle(0, pt(0.0, 0.0), pt(4.0, 0.0));
        let v1 = Vehicle::new(VehicleId(1), pt(10.0, 10.0), 4, 0.5);
        let req = request(0, pt(1.0, 0.0), pt(2.0, 0.0));
        let d = og_match(&req, &[v0, v1], 0.0).unwrap();
        assert_eq!(d.vehicle, VehicleId(0));
        assert!(d.added_km.abs() < 1e-12);
    }
}
