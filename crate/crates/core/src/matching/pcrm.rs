//! Polar-coordinates ride-matching: a source-side gate around the vehicle,
//! a destination-side gate along the remaining route, and linear-scan
//! insertion, with both gates shrinking as onboard riders accumulate delay.

use crate::geometry::{
    adaptive_factor, in_oval_zone, in_source_zone, in_triangle_zone, AdaptiveState, PolarFrame,
};
use crate::matching::insertion::{
    capacity_ok, cheapest_insertion, insertion_cost, with_inserted,
};
use crate::matching::MatchDecision;
use crate::model::{euclid_dist, manhattan_dist, Point, RouteStop, TripRequest, Vehicle, ZoneParams};

/// Delay state of the worst-off rider currently in `vehicle`, the rider
/// with the largest weighted penalty at time `now`. An empty vehicle has
/// zero delay and keeps the zone at its initial size.
pub fn adaptive_state(vehicle: &Vehicle, now: f64, c_w: f64, c_t: f64) -> AdaptiveState {
    let mut worst = AdaptiveState::default();
    let mut worst_penalty = 0.0;
    for rider in &vehicle.onboard {
        let state = AdaptiveState {
            longest_wait: rider.wait_minutes,
            longest_trip: (now - rider.pickup_time).max(0.0),
            single_time_of_longest: rider.single_drive_minutes,
        };
        let penalty = state.penalty(c_w, c_t);
        if penalty > worst_penalty {
            worst_penalty = penalty;
            worst = state;
        }
    }
    worst
}

/// The heading frame of a moving vehicle: pole at its position, axis toward
/// the first route point that is not the position itself. `None` for a
/// vehicle with no usable heading.
fn heading_frame(vehicle: &Vehicle) -> Option<PolarFrame> {
    vehicle
        .route
        .iter()
        .map(|s| s.location)
        .find(|p| *p != vehicle.position)
        .and_then(|p| PolarFrame::toward(vehicle.position, p))
}

/// Direction anchor for the tail zone of the route after source insertion.
/// Routes that held a single stop before insertion take their tail
/// direction from the vehicle position instead of the inserted point.
fn tail_anchor(vehicle: &Vehicle, extended: &[RouteStop], original_len: usize) -> Point {
    let tail = extended[extended.len() - 1].location;
    let anchor = if original_len >= 2 {
        extended[extended.len() - 2].location
    } else {
        vehicle.position
    };
    if anchor == tail { vehicle.position } else { anchor }
}

/// Evaluates one vehicle: source gate, cheapest pickup slot, then the
/// destination gate dictating the dropoff position. Idle vehicles admit any
/// origin within `r_s` (the zone degenerates to a disk) and skip the
/// destination gate, since an empty vehicle detours nobody.
fn pcrm_candidate(
    request: &TripRequest,
    vehicle: &Vehicle,
    zone: &ZoneParams,
    now: f64,
) -> Option<MatchDecision> {
    if vehicle.capacity == 0 {
        return None;
    }

    if vehicle.is_idle() {
        if euclid_dist(vehicle.position, request.origin) > zone.r_s {
            return None;
        }
        let added = manhattan_dist(vehicle.position, request.origin)
            + manhattan_dist(request.origin, request.destination);
        return Some(MatchDecision {
            vehicle: vehicle.id,
            pickup_index: 0,
            dropoff_index: 1,
            added_km: added,
        });
    }

    // The cosine taper never exceeds r_s, so anything farther fails the
    // source gate no matter the angle.
    if euclid_dist(vehicle.position, request.origin) > zone.r_s {
        return None;
    }

    let state = adaptive_state(vehicle, now, zone.c_w, zone.c_t);
    let n_s = adaptive_factor(zone.n_s_init, &state, zone.c_w, zone.c_t, zone.tau);
    let n_d = adaptive_factor(zone.n_d_init, &state, zone.c_w, zone.c_t, zone.tau);

    let source_ok = match heading_frame(vehicle) {
        Some(frame) => in_source_zone(&frame, request.origin, zone.r_s, n_s),
        // No usable heading: fall back to the idle disk rule for the gate,
        // but keep the destination gate since other riders are affected.
        None => true, // distance already checked above
    };
    if !source_ok {
        return None;
    }

    let occupancy = vehicle.occupancy_profile();
    let capacity = vehicle.capacity as i32;
    let (pickup_index, pickup_cost) = cheapest_insertion(
        &vehicle.route,
        vehicle.position,
        request.origin,
        0,
        |slot| occupancy[slot] < capacity,
    )?;

    let extended = with_inserted(
        &vehicle.route,
        RouteStop::pickup(request.id, request.origin),
        pickup_index,
    );

    let dropoff_index = dictated_dropoff(request, vehicle, &extended, pickup_index, n_d, zone)?;
    let dropoff_cost = insertion_cost(vehicle.position, &extended, request.destination, dropoff_index);

    let decision = MatchDecision {
        vehicle: vehicle.id,
        pickup_index,
        dropoff_index,
        added_km: pickup_cost + dropoff_cost,
    };
    debug_assert!(gates_hold(request, vehicle, zone, now, &decision));
    Some(decision)
}

/// Scans the route from the inserted pickup onward: the first oval zone
/// containing the destination dictates insertion right after its pole; a
/// destination only inside the tail zone is appended. Zone positions that
/// would break capacity are passed over.
fn dictated_dropoff(
    request: &TripRequest,
    vehicle: &Vehicle,
    extended: &[RouteStop],
    pickup_index: usize,
    n_d: f64,
    zone: &ZoneParams,
) -> Option<usize> {
    let dest = request.destination;
    let onboard = vehicle.onboard.len();
    let feasible = |index: usize| {
        let candidate = with_inserted(extended, RouteStop::dropoff(request.id, dest), index);
        capacity_ok(&candidate, onboard, vehicle.capacity)
    };

    for pole in pickup_index..extended.len() - 1 {
        if in_oval_zone(extended[pole].location, extended[pole + 1].location, dest, n_d)
            && feasible(pole + 1)
        {
            return Some(pole + 1);
        }
    }

    let tail = extended[extended.len() - 1].location;
    let anchor = tail_anchor(vehicle, extended, vehicle.route.len());
    if anchor != tail
        && in_triangle_zone(anchor, tail, dest, zone.phi_deg)
        && feasible(extended.len())
    {
        return Some(extended.len());
    }
    None
}

/// Ride-matching over the whole fleet: among vehicles passing both gates,
/// the decision with the least added Manhattan distance wins; ties go to
/// the lowest vehicle id.
pub fn pcrm_match(
    request: &TripRequest,
    fleet: &[Vehicle],
    zone: &ZoneParams,
    now: f64,
) -> Option<MatchDecision> {
    let mut best: Option<MatchDecision> = None;
    for vehicle in fleet {
        if let Some(candidate) = pcrm_candidate(request, vehicle, zone, now) {
            if candidate.beats(&best) {
                best = Some(candidate);
            }
        }
    }
    best
}

/// Re-derives the adapted factors and re-evaluates every gate behind an
/// accepted decision against the pre-commit vehicle state. Used as a
/// soundness check after matching.
pub fn gates_hold(
    request: &TripRequest,
    vehicle: &Vehicle,
    zone: &ZoneParams,
    now: f64,
    decision: &MatchDecision,
) -> bool {
    if vehicle.is_idle() {
        return euclid_dist(vehicle.position, request.origin) <= zone.r_s
            && decision.pickup_index == 0
            && decision.dropoff_index == 1;
    }
    let state = adaptive_state(vehicle, now, zone.c_w, zone.c_t);
    let n_s = adaptive_factor(zone.n_s_init, &state, zone.c_w, zone.c_t, zone.tau);
    let n_d = adaptive_factor(zone.n_d_init, &state, zone.c_w, zone.c_t, zone.tau);

    let source_ok = match heading_frame(vehicle) {
        Some(frame) => in_source_zone(&frame, request.origin, zone.r_s, n_s),
        None => euclid_dist(vehicle.position, request.origin) <= zone.r_s,
    };
    if !source_ok {
        return false;
    }

    let extended = with_inserted(
        &vehicle.route,
        RouteStop::pickup(request.id, request.origin),
        decision.pickup_index,
    );
    if decision.dropoff_index < extended.len() {
        let pole = decision.dropoff_index - 1;
        pole >= decision.pickup_index
            && in_oval_zone(
                extended[pole].location,
                extended[pole + 1].location,
                request.destination,
                n_d,
            )
    } else {
        let tail = extended[extended.len() - 1].location;
        let anchor = tail_anchor(vehicle, &extended, vehicle.route.len());
        anchor != tail && in_triangle_zone(anchor, tail, request.destination, zone.phi_deg)
    }
}
