//! Domain types shared by every other module.
//!
//! Conventions: positions are planar kilometers (x east, y north), times are
//! minutes, speeds are kilometers per minute. Travel and mileage accounting
//! use Manhattan distance throughout; zone geometry uses Euclidean distance
//! (see the `geometry` module).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("illegal request state transition: {from:?} -> {to:?}")]
    IllegalTransition { from: RequestState, to: RequestState },
    #[error("speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A position on the plane, in kilometers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Manhattan (taxicab) distance in kilometers.
pub fn manhattan_dist(a: Point, b: Point) -> f64 {
    (a.x - b.x).abs() + (a.y - b.y).abs()
}

/// Straight-line distance in kilometers.
pub fn euclid_dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RequestId(pub u32);

impl RequestId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VehicleId(pub u32);

impl VehicleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Lifecycle of a trip request. Legal transitions are
/// pending -> assigned -> on_board -> completed, or pending -> rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestState {
    Pending,
    Assigned,
    OnBoard,
    Completed,
    Rejected,
}

/// A rider's trip request with its timing facts as they become known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripRequest {
    pub id: RequestId,
    pub origin: Point,
    pub destination: Point,
    /// Minutes from simulation start at which the request appears.
    pub release_time: f64,
    /// Minutes the rider is willing to wait before giving up.
    pub patience: f64,
    pub state: RequestState,
    pub assigned_time: Option<f64>,
    pub pickup_time: Option<f64>,
    pub dropoff_time: Option<f64>,
}

impl TripRequest {
    pub fn new(id: RequestId, origin: Point, destination: Point, release_time: f64, patience: f64) -> Self {
        TripRequest {
            id,
            origin,
            destination,
            release_time,
            patience,
            state: RequestState::Pending,
            assigned_time: None,
            pickup_time: None,
            dropoff_time: None,
        }
    }

    /// Last instant at which the request may still be matched.
    pub fn expiry_time(&self) -> f64 {
        self.release_time + self.patience
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.state, RequestState::Completed | RequestState::Rejected)
    }

    pub fn assign(&mut self, now: f64) -> Result<(), ModelError> {
        if self.state != RequestState::Pending {
            return Err(self.illegal(RequestState::Assigned));
        }
        self.state = RequestState::Assigned;
        self.assigned_time = Some(now.max(self.release_time));
        Ok(())
    }

    pub fn board(&mut self, now: f64) -> Result<(), ModelError> {
        if self.state != RequestState::Assigned {
            return Err(self.illegal(RequestState::OnBoard));
        }
        self.state = RequestState::OnBoard;
        self.pickup_time = Some(now.max(self.assigned_time.unwrap_or(now)));
        Ok(())
    }

    pub fn complete(&mut self, now: f64) -> Result<(), ModelError> {
        if self.state != RequestState::OnBoard {
            return Err(self.illegal(RequestState::Completed));
        }
        self.state = RequestState::Completed;
        self.dropoff_time = Some(now.max(self.pickup_time.unwrap_or(now)));
        Ok(())
    }

    pub fn reject(&mut self) -> Result<(), ModelError> {
        if self.state != RequestState::Pending {
            return Err(self.illegal(RequestState::Rejected));
        }
        self.state = RequestState::Rejected;
        Ok(())
    }

    /// Abandonment of an assigned-but-not-yet-picked-up request. Only the
    /// pickup-expiry policy uses this; the default policy never cancels
    /// after assignment.
    pub fn cancel(&mut self) -> Result<(), ModelError> {
        if self.state != RequestState::Assigned {
            return Err(self.illegal(RequestState::Rejected));
        }
        self.state = RequestState::Rejected;
        self.assigned_time = None;
        Ok(())
    }

    fn illegal(&self, to: RequestState) -> ModelError {
        ModelError::IllegalTransition { from: self.state, to }
    }

    /// Completed waiting time (assignment to pickup), when known.
    pub fn wait_minutes(&self) -> Option<f64> {
        Some(self.pickup_time? - self.assigned_time?)
    }

    /// Completed in-vehicle time (pickup to dropoff), when known.
    pub fn trip_minutes(&self) -> Option<f64> {
        Some(self.dropoff_time? - self.pickup_time?)
    }
}

/// Estimated solo-drive time for a request: Manhattan distance from origin
/// to destination at the given speed.
pub fn single_drive_time(request: &TripRequest, speed: f64) -> Result<f64, ModelError> {
    if speed <= 0.0 {
        return Err(ModelError::NonPositiveSpeed(speed));
    }
    Ok(manhattan_dist(request.origin, request.destination) / speed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopKind {
    Pickup,
    Dropoff,
}

/// One scheduled pickup or dropoff inside a vehicle's route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteStop {
    pub location: Point,
    pub kind: StopKind,
    pub request: RequestId,
}

impl RouteStop {
    pub fn pickup(request: RequestId, location: Point) -> Self {
        RouteStop { location, kind: StopKind::Pickup, request }
    }

    pub fn dropoff(request: RequestId, location: Point) -> Self {
        RouteStop { location, kind: StopKind::Dropoff, request }
    }

    fn occupancy_delta(&self) -> i32 {
        match self.kind {
            StopKind::Pickup => 1,
            StopKind::Dropoff => -1,
        }
    }
}

/// Timing facts for a rider currently inside a vehicle; feeds the adaptive
/// zone shrink and is dropped again at dropoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnboardRider {
    pub request: RequestId,
    /// Final waiting time, assignment to pickup.
    pub wait_minutes: f64,
    pub pickup_time: f64,
    /// Solo-drive estimate for the rider's own trip.
    pub single_drive_minutes: f64,
}

/// A vehicle with its ordered route of outstanding stops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: VehicleId,
    pub position: Point,
    pub capacity: usize,
    /// Kilometers per minute.
    pub speed: f64,
    pub route: Vec<RouteStop>,
    pub onboard: Vec<OnboardRider>,
    /// Total Manhattan kilometers driven so far.
    pub odometer: f64,
}

impl Vehicle {
    pub fn new(id: VehicleId, position: Point, capacity: usize, speed: f64) -> Self {
        Vehicle {
            id,
            position,
            capacity,
            speed,
            route: Vec::new(),
            onboard: Vec::new(),
            odometer: 0.0,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.route.is_empty()
    }

    /// Occupancy before each route stop is visited: entry `i` is the rider
    /// count while driving toward stop `i`; one extra entry covers the state
    /// after the final stop.
    pub fn occupancy_profile(&self) -> Vec<i32> {
        occupancy_profile(&self.route, self.onboard.len())
    }

    /// Total Manhattan length of the remaining route, starting from the
    /// vehicle's current position.
    pub fn route_length(&self) -> f64 {
        route_length(self.position, &self.route)
    }
}

/// Occupancy ahead of each stop of `route`, starting from `onboard` riders.
pub fn occupancy_profile(route: &[RouteStop], onboard: usize) -> Vec<i32> {
    let mut occ = onboard as i32;
    let mut profile = Vec::with_capacity(route.len() + 1);
    profile.push(occ);
    for stop in route {
        occ += stop.occupancy_delta();
        profile.push(occ);
    }
    profile
}

/// Manhattan length of `route` driven from `start`.
pub fn route_length(start: Point, route: &[RouteStop]) -> f64 {
    let mut total = 0.0;
    let mut prev = start;
    for stop in route {
        total += manhattan_dist(prev, stop.location);
        prev = stop.location;
    }
    total
}

/// Parameters shaping the constrained zones and their adaptive shrink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneParams {
    /// Source-zone polar radius, kilometers.
    pub r_s: f64,
    /// Half-angle of the triangular tail zone, degrees.
    pub phi_deg: f64,
    /// Initial source-side angle adjustment factor (shrinks adaptively).
    pub n_s_init: f64,
    /// Initial destination-side angle adjustment factor (shrinks adaptively).
    pub n_d_init: f64,
    /// Adaptive rate: minutes of weighted delay per unit of shrink exponent.
    pub tau: f64,
    /// Penalty weight on rider waiting time.
    pub c_w: f64,
    /// Penalty weight on extra in-vehicle time.
    pub c_t: f64,
}

impl Default for ZoneParams {
    fn default() -> Self {
        ZoneParams {
            r_s: 0.7,
            phi_deg: 60.0,
            n_s_init: 2.0,
            n_d_init: 1.0,
            tau: 20.0,
            c_w: 1.1,
            c_t: 1.0,
        }
    }
}

impl ZoneParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |ok: bool, msg: &str| {
            if ok { Ok(()) } else { Err(ModelError::InvalidParameter(msg.to_string())) }
        };
        check(self.r_s > 0.0, "r_s must be positive")?;
        check(self.phi_deg > 0.0 && self.phi_deg <= 90.0, "phi_deg must be in (0, 90]")?;
        check(self.n_s_init > 0.0 && self.n_s_init <= 2.0, "n_s_init must be in (0, 2]")?;
        check(self.n_d_init > 0.0 && self.n_d_init <= 1.0, "n_d_init must be in (0, 1]")?;
        check(self.tau > 0.0, "tau must be positive")?;
        check(self.c_w >= 0.0 && self.c_t >= 0.0, "penalty weights must be non-negative")
    }
}

/// An axis-aligned rectangle of the plane, kilometers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmBounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl KmBounds {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        KmBounds { min_x, min_y, max_x, max_y }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.min_x, self.max_x), p.y.clamp(self.min_y, self.max_y))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.min_x < self.max_x && self.min_y < self.max_y {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter("bounds must have positive extent".to_string()))
        }
    }
}

/// Relative importance of the three indexes in the unified score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    /// Mileage-saving weight.
    pub alpha: f64,
    /// Serving-ability weight.
    pub beta: f64,
    /// Inconvenience weight (subtracted).
    pub gamma: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { alpha: 1.0, beta: 1.0, gamma: 0.1 }
    }
}

impl Weights {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.alpha >= 0.0 && self.beta >= 0.0 && self.gamma >= 0.0 {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter("weights must be non-negative".to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manhattan_dist_examples() {
        assert_eq!(manhattan_dist(Point::new(0.0, 0.0), Point::new(0.0, 0.0)), 0.0);
        assert_eq!(manhattan_dist(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 7.0);
        assert_eq!(manhattan_dist(Point::new(-1.0, 2.0), Point::new(2.0, -2.0)), 7.0);
    }

    #[test]
    fn single_drive_time_examples() {
        let mk = |o: Point, d: Point| TripRequest::new(RequestId(0), o, d, 0.0, 20.0);
        let same = mk(Point::new(0.0, 0.0), Point::new(0.0, 0.0));
        assert_eq!(single_drive_time(&same, 0.5).unwrap(), 0.0);

        let diag = mk(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        assert_eq!(single_drive_time(&diag, 0.5).unwrap(), 4.0);

        // 7 km at 0.35 km/min.
        let long = mk(Point::new(0.0, 0.0), Point::new(3.0, 4.0));
        assert!((single_drive_time(&long, 0.35).unwrap() - 20.0).abs() < 1e-9);

        assert!(matches!(single_drive_time(&same, 0.0), Err(ModelError::NonPositiveSpeed(_))));
        assert!(matches!(single_drive_time(&same, -1.0), Err(ModelError::NonPositiveSpeed(_))));
    }

    #[test]
    fn request_lifecycle_happy_path() {
        let mut r = TripRequest::new(
            RequestId(1),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            5.0,
            20.0,
        );
        r.assign(6.0).unwrap();
        r.board(8.0).unwrap();
        r.complete(12.0).unwrap();
        assert_eq!(r.state, RequestState::Completed);
        assert_eq!(r.wait_minutes(), Some(2.0));
        assert_eq!(r.trip_minutes(), Some(4.0));
        assert!(r.pickup_time.unwrap() >= r.assigned_time.unwrap());
        assert!(r.assigned_time.unwrap() >= r.release_time);
    }

    #[test]
    fn illegal_transitions_rejected() {
        let mut r = TripRequest::new(
            RequestId(1),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            0.0,
            20.0,
        );
        // Cannot board or complete from pending.
        assert!(r.board(1.0).is_err());
        assert!(r.complete(1.0).is_err());

        r.assign(0.0).unwrap();
        assert!(r.assign(1.0).is_err());
        assert!(r.complete(1.0).is_err());
        assert!(r.reject().is_err()); // assigned requests stay assigned

        r.board(1.0).unwrap();
        assert!(r.cancel().is_err()); // cancel only applies before pickup
        r.complete(2.0).unwrap();
        assert!(r.board(3.0).is_err());
    }

    #[test]
    fn rejected_is_terminal() {
        let mut r = TripRequest::new(
            RequestId(0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            0.0,
            1.0,
        );
        r.reject().unwrap();
        assert!(r.is_terminal());
        assert!(r.assign(2.0).is_err());
    }

    #[test]
    fn occupancy_profile_tracks_prefix() {
        let a = RequestId(0);
        let b = RequestId(1);
        let p = Point::new(0.0, 0.0);
        let route = vec![
            RouteStop::pickup(a, p),
            RouteStop::pickup(b, p),
            RouteStop::dropoff(a, p),
            RouteStop::dropoff(b, p),
        ];
        assert_eq!(occupancy_profile(&route, 1), vec![1, 2, 3, 2, 1]);
    }

    #[test]
    fn route_length_sums_manhattan_legs() {
        let r = RequestId(0);
        let route = vec![
            RouteStop::pickup(r, Point::new(1.0, 0.0)),
            RouteStop::dropoff(r, Point::new(1.0, 2.0)),
        ];
        assert_eq!(route_length(Point::new(0.0, 0.0), &route), 3.0);
        assert_eq!(route_length(Point::new(0.0, 0.0), &[]), 0.0);
    }

    #[test]
    fn zone_params_validation() {
        assert!(ZoneParams::default().validate().is_ok());
        assert!(ZoneParams { r_s: 0.0, ..Default::default() }.validate().is_err());
        assert!(ZoneParams { phi_deg: 91.0, ..Default::default() }.validate().is_err());
        assert!(ZoneParams { n_s_init: 2.5, ..Default::default() }.validate().is_err());
        assert!(ZoneParams { n_d_init: 0.0, ..Default::default() }.validate().is_err());
        assert!(ZoneParams { tau: 0.0, ..Default::default() }.validate().is_err());
    }
}
