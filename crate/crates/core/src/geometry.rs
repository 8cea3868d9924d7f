//! Polar-coordinate transforms and constrained-zone membership predicates.
//!
//! All predicates here use straight-line (Euclidean) distance: the zone
//! boundaries are cosine/sine curves in polar coordinates and only make
//! sense in Euclidean terms. Travel-time and mileage accounting elsewhere
//! stay Manhattan.

use crate::model::{euclid_dist, Point};
use std::f64::consts::FRAC_PI_2;

/// Floor for the adaptive angle factors: large onboard delays shrink a zone
/// toward nothing rather than driving the factor negative.
pub const MIN_ANGLE_FACTOR: f64 = 0.01;

/// A polar coordinate frame: a pole plus a unit axis direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarFrame {
    pub pole: Point,
    /// Unit vector from the pole along the polar axis.
    pub axis: (f64, f64),
}

impl PolarFrame {
    /// Frame whose axis points from `pole` toward `reference`. Returns
    /// `None` when the two coincide and no direction exists.
    pub fn toward(pole: Point, reference: Point) -> Option<Self> {
        let dx = reference.x - pole.x;
        let dy = reference.y - pole.y;
        let len = (dx * dx + dy * dy).sqrt();
        if len == 0.0 {
            return None;
        }
        Some(PolarFrame { pole, axis: (dx / len, dy / len) })
    }
}

/// Polar coordinates of `q` in `frame`: radial distance and the signed
/// angle from the axis in [-pi, pi]. A point at the pole maps to (0, 0).
pub fn to_polar(frame: &PolarFrame, q: Point) -> (f64, f64) {
    let dx = q.x - frame.pole.x;
    let dy = q.y - frame.pole.y;
    let rho = (dx * dx + dy * dy).sqrt();
    if rho == 0.0 {
        return (0.0, 0.0);
    }
    let (ax, ay) = frame.axis;
    let cross = ax * dy - ay * dx;
    let dot = ax * dx + ay * dy;
    (rho, cross.atan2(dot))
}

/// Source-side zone test: `src` qualifies when its scaled polar angle stays
/// within a quarter turn and its distance from the pole is under the
/// cosine-tapered radius `r_s * cos(|theta| / n_s)`.
pub fn in_source_zone(frame: &PolarFrame, src: Point, r_s: f64, n_s: f64) -> bool {
    let (rho, theta) = to_polar(frame, src);
    let scaled = theta.abs() / n_s;
    scaled <= FRAC_PI_2 && rho <= r_s * scaled.cos()
}

/// Destination-side oval test for the route segment `pole -> next`: `dest`
/// qualifies when its distance from the pole is under the segment length
/// tapered by `1 - sin(|theta| / n_d)`. A zero-length segment admits
/// nothing.
pub fn in_oval_zone(pole: Point, next: Point, dest: Point, n_d: f64) -> bool {
    let frame = match PolarFrame::toward(pole, next) {
        Some(f) => f,
        None => return false,
    };
    let (rho, theta) = to_polar(&frame, dest);
    let scaled = theta.abs() / n_d;
    scaled <= FRAC_PI_2 && rho <= euclid_dist(pole, next) * (1.0 - scaled.sin())
}

/// Tail zone test: `dest` qualifies when the angle between `tail -> dest`
/// and the forward extension of `tail_prev -> tail` is at most `phi_deg`.
/// A destination exactly at the tail counts as inside.
pub fn in_triangle_zone(tail_prev: Point, tail: Point, dest: Point, phi_deg: f64) -> bool {
    let frame = match PolarFrame::toward(tail_prev, tail) {
        Some(f) => f,
        None => return false,
    };
    if dest == tail {
        return true;
    }
    let dx = dest.x - tail.x;
    let dy = dest.y - tail.y;
    let (ax, ay) = frame.axis;
    // Unsigned angle between the extension ray and tail->dest.
    let angle = (ax * dy - ay * dx).abs().atan2(ax * dx + ay * dy);
    angle <= phi_deg.to_radians()
}

/// Delay facts for the worst-off rider currently inside a vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdaptiveState {
    /// Waiting time of that rider, minutes.
    pub longest_wait: f64,
    /// In-vehicle time of that rider so far, minutes.
    pub longest_trip: f64,
    /// Solo-drive estimate for that rider's own trip, minutes.
    pub single_time_of_longest: f64,
}

impl AdaptiveState {
    /// Weighted delay penalty: waiting plus in-vehicle excess over the
    /// solo-drive estimate.
    pub fn penalty(&self, c_w: f64, c_t: f64) -> f64 {
        c_w * self.longest_wait + c_t * (self.longest_trip - self.single_time_of_longest).max(0.0)
    }
}

/// Adaptive shrink of an angle factor: the initial value `n_init` minus an
/// exponential in the onboard delay penalty, clamped to
/// [`MIN_ANGLE_FACTOR`, `n_init`]. Zero delay returns exactly `n_init`.
pub fn adaptive_factor(n_init: f64, state: &AdaptiveState, c_w: f64, c_t: f64, tau: f64) -> f64 {
    debug_assert!(tau > 0.0 && n_init > 0.0);
    let shrunk = n_init - ((state.penalty(c_w, c_t) / tau).exp() - 1.0);
    shrunk.clamp(MIN_ANGLE_FACTOR, n_init)
}
