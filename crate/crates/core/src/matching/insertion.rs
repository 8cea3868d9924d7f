//! Route insertion primitives: detour costs, slot scans, and the
//! feasibility checks shared by every matching strategy.

use crate::model::{
    manhattan_dist, occupancy_profile, OnboardRider, Point, RequestId, RouteStop, StopKind,
};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RouteError {
    #[error("capacity exceeded ahead of stop {at}: occupancy {occupancy} > {capacity}")]
    CapacityExceeded { at: usize, occupancy: i32, capacity: usize },
    #[error("occupancy drops below zero ahead of stop {at}")]
    NegativeOccupancy { at: usize },
    #[error("dropoff for request {0:?} precedes its pickup")]
    DropoffBeforePickup(RequestId),
    #[error("request {0:?} appears more than once as {1:?}")]
    DuplicateStop(RequestId, StopKind),
    #[error("onboard request {0:?} has no dropoff stop")]
    MissingDropoff(RequestId),
    #[error("pickup for request {0:?} has no dropoff stop")]
    UnpairedPickup(RequestId),
}

/// Added Manhattan route length when a stop at `location` is spliced in at
/// `index` of `route`, which is driven from `start`.
pub fn insertion_cost(start: Point, route: &[RouteStop], location: Point, index: usize) -> f64 {
    debug_assert!(index <= route.len());
    let prev = if index == 0 { start } else { route[index - 1].location };
    match route.get(index) {
        Some(next) => {
            manhattan_dist(prev, location) + manhattan_dist(location, next.location)
                - manhattan_dist(prev, next.location)
        }
        None => manhattan_dist(prev, location),
    }
}

/// Linear scan over the slots of `route` (from `fixed_after` through the
/// append position) returning the feasible slot with the smallest added
/// Manhattan length. Earlier slots win ties.
pub fn cheapest_insertion<F>(
    route: &[RouteStop],
    vehicle_pos: Point,
    location: Point,
    fixed_after: usize,
    mut feasible: F,
) -> Option<(usize, f64)>
where
    F: FnMut(usize) -> bool,
{
    let mut best: Option<(usize, f64)> = None;
    for index in fixed_after..=route.len() {
        if !feasible(index) {
            continue;
        }
        let cost = insertion_cost(vehicle_pos, route, location, index);
        if best.map_or(true, |(_, c)| cost < c) {
            best = Some((index, cost));
        }
    }
    best
}

/// `route` with `stop` spliced in at `index`.
pub fn with_inserted(route: &[RouteStop], stop: RouteStop, index: usize) -> Vec<RouteStop> {
    let mut out = Vec::with_capacity(route.len() + 1);
    out.extend_from_slice(&route[..index]);
    out.push(stop);
    out.extend_from_slice(&route[index..]);
    out
}

/// Replays occupancy over `route` and confirms it never exceeds `capacity`.
pub fn capacity_ok(route: &[RouteStop], onboard: usize, capacity: usize) -> bool {
    occupancy_profile(route, onboard)
        .iter()
        .all(|&occ| occ >= 0 && occ <= capacity as i32)
}

/// Full structural check of a committed route: occupancy bounds, pickup
/// before dropoff, no duplicated stops, and exactly one dropoff (no pickup)
/// for every rider already in the vehicle. This is the independent
/// validator run after every accepted match.
pub fn validate_route(
    route: &[RouteStop],
    onboard: &[OnboardRider],
    capacity: usize,
) -> Result<(), RouteError> {
    let mut occ = onboard.len() as i32;
    if occ > capacity as i32 {
        return Err(RouteError::CapacityExceeded { at: 0, occupancy: occ, capacity });
    }
    let mut pickups: HashMap<RequestId, usize> = HashMap::new();
    let mut dropoffs: HashMap<RequestId, usize> = HashMap::new();
    for (i, stop) in route.iter().enumerate() {
        match stop.kind {
            StopKind::Pickup => {
                occ += 1;
                if pickups.insert(stop.request, i).is_some() {
                    return Err(RouteError::DuplicateStop(stop.request, StopKind::Pickup));
                }
            }
            StopKind::Dropoff => {
                occ -= 1;
                if dropoffs.insert(stop.request, i).is_some() {
                    return Err(RouteError::DuplicateStop(stop.request, StopKind::Dropoff));
                }
            }
        }
        if occ > capacity as i32 {
            return Err(RouteError::CapacityExceeded { at: i, occupancy: occ, capacity });
        }
        if occ < 0 {
            return Err(RouteError::NegativeOccupancy { at: i });
        }
    }
    for rider in onboard {
        match dropoffs.get(&rider.request) {
            None => return Err(RouteError::MissingDropoff(rider.request)),
            Some(_) if pickups.contains_key(&rider.request) => {
                return Err(RouteError::DuplicateStop(rider.request, StopKind::Pickup));
            }
            Some(_) => {}
        }
    }
    for (&request, &pi) in &pickups {
        match dropoffs.get(&request) {
            None => return Err(RouteError::UnpairedPickup(request)),
            Some(&di) if di < pi => return Err(RouteError::DropoffBeforePickup(request)),
            Some(_) => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Point;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn insertion_cost_empty_route_is_approach_distance() {
        let cost = insertion_cost(pt(0.0, 0.0), &[], pt(2.0, 1.0), 0);
        assert_eq!(cost, 3.0);
    }

    #[test]
    fn insertion_on_manhattan_collinear_segment_is_free() {
        let r = RequestId(0);
        let route = vec![
            RouteStop::pickup(r, pt(0.0, 0.0)),
            RouteStop::dropoff(r, pt(4.0, 0.0)),
        ];
        // (2, 0) lies on the straight segment, zero detour.
        assert_eq!(insertion_cost(pt(0.0, 0.0), &route, pt(2.0, 0.0), 1), 0.0);
        // (2, 1) is off-axis but still Manhattan-between the endpoints.
        assert_eq!(insertion_cost(pt(0.0, 0.0), &route, pt(2.0, 1.0), 1), 2.0);
    }

    #[test]
    fn cheapest_insertion_picks_zero_detour_slot() {
        let r = RequestId(0);
        let route = vec![
            RouteStop::pickup(r, pt(0.0, 0.0)),
            RouteStop::dropoff(r, pt(4.0, 0.0)),
        ];
        let (idx, cost) =
            cheapest_insertion(&route, pt(-1.0, 0.0), pt(2.0, 0.0), 0, |_| true).unwrap();
        assert_eq!(idx, 1);
        assert_eq!(cost, 0.0);
    }

    #[test]
    fn cheapest_insertion_respects_feasibility_and_floor() {
        let r = RequestId(0);
        let route = vec![
            RouteStop::pickup(r, pt(0.0, 0.0)),
            RouteStop::dropoff(r, pt(4.0, 0.0)),
        ];
        // Zero-detour slot 1 is forbidden; next best is slot 2 (append).
        let (idx, _) =
            cheapest_insertion(&route, pt(-1.0, 0.0), pt(2.0, 0.0), 0, |i| i != 1).unwrap();
        assert_eq!(idx, 2);
        // fixed_after skips early slots entirely.
        let (idx, _) =
            cheapest_insertion(&route, pt(-1.0, 0.0), pt(2.0, 0.0), 2, |_| true).unwrap();
        assert_eq!(idx, 2);
        assert!(cheapest_insertion(&route, pt(0.0, 0.0), pt(2.0, 0.0), 0, |_| false).is_none());
    }

    #[test]
    fn validate_route_accepts_well_formed() {
        let a = RequestId(0);
        let b = RequestId(1);
        let route = vec![
            RouteStop::pickup(a, pt(1.0, 0.0)),
            RouteStop::pickup(b, pt(2.0, 0.0)),
            RouteStop::dropoff(a, pt(3.0, 0.0)),
            RouteStop::dropoff(b, pt(4.0, 0.0)),
        ];
        assert!(validate_route(&route, &[], 2).is_ok());
        assert!(matches!(
            validate_route(&route, &[], 1),
            Err(RouteError::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn validate_route_rejects_structural_faults() {
        let a = RequestId(0);
        let bad_order = vec![
            RouteStop::dropoff(a, pt(1.0, 0.0)),
            RouteStop::pickup(a, pt(2.0, 0.0)),
        ];
        assert!(validate_route(&bad_order, &[], 4).is_err());

        let unpaired = vec![RouteStop::pickup(a, pt(1.0, 0.0))];
        assert_eq!(validate_route(&unpaired, &[], 4), Err(RouteError::UnpairedPickup(a)));

        let rider = OnboardRider {
            request: a,
            wait_minutes: 0.0,
            pickup_time: 0.0,
            single_drive_minutes: 1.0,
        };
        assert_eq!(validate_route(&[], &[rider], 4), Err(RouteError::MissingDropoff(a)));
    }
}
