//! Discrete-time fleet simulation: releases requests, matches them through
//! the configured strategy, moves vehicles along Manhattan legs, and records
//! every lifecycle event for the metrics pass.

use crate::matching::{apply_decision, validate_route, RouteError, StrategyConfig};
use crate::metrics::{self, MetricParams, MetricsError, MetricsReport};
use crate::model::{
    manhattan_dist, single_drive_time, KmBounds, ModelError, OnboardRider, Point, RequestId,
    RequestState, StopKind, TripRequest, Vehicle, VehicleId, Weights,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("workload not sorted by release time at index {0}")]
    UnsortedWorkload(usize),
    #[error("malformed request at index {index}: {reason}")]
    MalformedRequest { index: usize, reason: String },
    #[error("strategy produced an infeasible decision for request {request:?}: {source}")]
    InvalidDecision { request: RequestId, source: RouteError },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("vehicles failed to drain their routes after the horizon")]
    DrainStalled,
}

/// When a waiting rider gives up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpiryPolicy {
    /// A request unassigned by release + patience is rejected; once
    /// assigned it stays.
    #[default]
    Assignment,
    /// A rider not picked up by release + patience abandons even after
    /// assignment; the stops are pulled back out of the route.
    Pickup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Tick length, minutes.
    #[serde(default = "default_tick")]
    pub tick: f64,
    /// Minutes during which requests are released and matched; vehicles
    /// drain afterwards.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_fleet_size")]
    pub fleet_size: usize,
    /// Riders per vehicle.
    #[serde(default = "default_capacity")]
    pub capacity: usize,
    /// Kilometers per minute.
    #[serde(default = "default_speed")]
    pub speed: f64,
    /// Default rider patience, minutes.
    #[serde(default = "default_patience")]
    pub patience: f64,
    #[serde(default)]
    pub strategy: StrategyConfig,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default)]
    pub seed: u64,
    /// Initial vehicle positions are drawn uniformly over this box.
    #[serde(default = "default_region")]
    pub region: KmBounds,
    #[serde(default)]
    pub expiry: ExpiryPolicy,
}

fn default_tick() -> f64 {
    0.1
}
fn default_horizon() -> f64 {
    60.0
}
fn default_fleet_size() -> usize {
    10
}
fn default_capacity() -> usize {
    4
}
fn default_speed() -> f64 {
    0.35
}
fn default_patience() -> f64 {
    20.0
}
fn default_region() -> KmBounds {
    KmBounds::new(0.0, 0.0, 10.0, 10.0)
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            tick: default_tick(),
            horizon: default_horizon(),
            fleet_size: default_fleet_size(),
            capacity: default_capacity(),
            speed: default_speed(),
            patience: default_patience(),
            strategy: StrategyConfig::default(),
            weights: Weights::default(),
            seed: 0,
            region: default_region(),
            expiry: ExpiryPolicy::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidConfig(msg.to_string()));
        if !(self.tick > 0.0) {
            return bad("tick must be positive");
        }
        if !(self.horizon > 0.0) {
            return bad("horizon must be positive");
        }
        if self.fleet_size == 0 {
            return bad("fleet_size must be positive");
        }
        if self.capacity == 0 {
            return bad("capacity must be positive");
        }
        if !(self.speed > 0.0) {
            return bad("speed must be positive");
        }
        if !(self.patience > 0.0) {
            return bad("patience must be positive");
        }
        self.region.validate().map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        self.strategy.validate().map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        self.weights.validate().map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        Ok(())
    }

    pub fn metric_params(&self) -> MetricParams {
        MetricParams {
            weights: self.weights,
            c_w: self.strategy.zone.c_w,
            c_t: self.strategy.zone.c_t,
            speed: self.speed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Event {
    Released { request: RequestId },
    Assigned { request: RequestId, vehicle: VehicleId },
    PickedUp { request: RequestId, vehicle: VehicleId },
    DroppedOff { request: RequestId, vehicle: VehicleId },
    Rejected { request: RequestId },
    Moved { vehicle: VehicleId, from: Point, to: Point },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimedEvent {
    pub time: f64,
    pub event: Event,
}

/// Append-only, time-ordered record of everything that happened in a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EventLog {
    events: Vec<TimedEvent>,
}

impl EventLog {
    pub fn events(&self) -> &[TimedEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    fn push(&mut self, time: f64, event: Event) {
        debug_assert!(
            self.events.last().map_or(true, |last| time >= last.time),
            "event log went backwards: {time} after {:?}",
            self.events.last()
        );
        self.events.push(TimedEvent { time, event });
    }
}

/// A stop the vehicle reached during one advance, with the exact sub-tick
/// arrival time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopArrival {
    pub stop: crate::model::RouteStop,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveSegment {
    pub from: Point,
    pub to: Point,
    /// Time at the end of the segment.
    pub time: f64,
}

#[derive(Debug, Default)]
pub struct VehicleAdvance {
    pub arrivals: Vec<StopArrival>,
    pub moves: Vec<MoveSegment>,
}

/// Moves a vehicle for `dt` minutes from time `now`: each route leg is
/// driven Manhattan-style, x before y, with leftover motion carrying into
/// the next leg. Reached stops are popped and reported with exact times.
pub fn advance_vehicle(vehicle: &mut Vehicle, dt: f64, now: f64) -> VehicleAdvance {
    let mut out = VehicleAdvance::default();
    if dt <= 0.0 || vehicle.route.is_empty() {
        return out;
    }
    let mut budget = vehicle.speed * dt;
    let mut consumed = 0.0;
    while budget > 0.0 {
        let Some(next) = vehicle.route.first().copied() else { break };
        let leg = manhattan_dist(vehicle.position, next.location);
        if leg <= budget {
            let from = vehicle.position;
            vehicle.position = next.location;
            vehicle.route.remove(0);
            consumed += leg;
            budget -= leg;
            vehicle.odometer += leg;
            let time = now + consumed / vehicle.speed;
            if leg > 0.0 {
                out.moves.push(MoveSegment { from, to: vehicle.position, time });
            }
            out.arrivals.push(StopArrival { stop: next, time });
        } else {
            let from = vehicle.position;
            let dx = next.location.x - vehicle.position.x;
            let step_x = dx.abs().min(budget);
            vehicle.position.x += if dx >= 0.0 { step_x } else { -step_x };
            let dy = next.location.y - vehicle.position.y;
            let step_y = dy.abs().min(budget - step_x);
            vehicle.position.y += if dy >= 0.0 { step_y } else { -step_y };
            consumed += step_x + step_y;
            vehicle.odometer += step_x + step_y;
            out.moves.push(MoveSegment { from, to: vehicle.position, time: now + consumed / vehicle.speed });
            break;
        }
    }
    out
}

/// Everything a finished run produces: the event log, the metrics report,
/// and the final request and vehicle states.
#[derive(Debug)]
pub struct SimOutcome {
    pub log: EventLog,
    pub report: MetricsReport,
    pub requests: Vec<TripRequest>,
    pub vehicles: Vec<Vehicle>,
}

/// Runs one complete episode over a workload sorted by release time.
/// Request ids are normalized to their workload positions.
pub fn run(config: &SimConfig, workload: &[TripRequest]) -> Result<SimOutcome, SimError> {
    config.validate()?;
    validate_workload(workload)?;

    let mut requests: Vec<TripRequest> = workload.to_vec();
    for (i, r) in requests.iter_mut().enumerate() {
        r.id = RequestId(i as u32);
    }

    let strategy = config.strategy.build();
    let mut vehicles = spawn_fleet(config);
    let mut log = EventLog::default();
    let mut pending: Vec<RequestId> = Vec::new();
    let mut next_release = 0usize;

    let total_ticks = (config.horizon / config.tick).ceil() as u64;
    for k in 0..total_ticks {
        let now = k as f64 * config.tick;

        // 1. Release requests that have appeared by now.
        while next_release < requests.len() && requests[next_release].release_time <= now + 1e-9 {
            let id = requests[next_release].id;
            log.push(now, Event::Released { request: id });
            pending.push(id);
            next_release += 1;
        }

        // 2. Try to match every pending request, oldest first.
        let mut still_pending = Vec::with_capacity(pending.len());
        for id in pending.drain(..) {
            let decision = strategy.propose(&requests[id.index()], &vehicles, now);
            match decision {
                Some(d) => {
                    let request = &mut requests[id.index()];
                    let vehicle = &mut vehicles[d.vehicle.index()];
                    apply_decision(vehicle, request, &d);
                    validate_route(&vehicle.route, &vehicle.onboard, vehicle.capacity)
                        .map_err(|source| SimError::InvalidDecision { request: id, source })?;
                    request.assign(now)?;
                    log.push(now, Event::Assigned { request: id, vehicle: d.vehicle });
                }
                None => still_pending.push(id),
            }
        }
        pending = still_pending;

        // 3. Give up on riders whose patience ran out.
        expire_pending(&mut pending, &mut requests, &mut log, now);
        if config.expiry == ExpiryPolicy::Pickup {
            expire_assigned(&mut vehicles, &mut requests, &mut log, now);
        }

        // 4 & 5. Move the fleet, firing pickups and dropoffs on arrival.
        advance_fleet(&mut vehicles, &mut requests, &mut log, config, now, config.tick)?;
    }

    // After the horizon: no more assignments; whoever is still waiting is
    // rejected, and vehicles finish their committed routes.
    let end = total_ticks as f64 * config.tick;
    while next_release < requests.len() {
        let id = requests[next_release].id;
        log.push(end, Event::Released { request: id });
        pending.push(id);
        next_release += 1;
    }
    for id in pending.drain(..) {
        requests[id.index()].reject()?;
        log.push(end, Event::Rejected { request: id });
    }

    let remaining_km: f64 = vehicles.iter().map(|v| v.route_length()).sum();
    let remaining_stops: usize = vehicles.iter().map(|v| v.route.len()).sum();
    let max_drain_ticks =
        (remaining_km / (config.speed * config.tick)).ceil() as u64 + remaining_stops as u64 + 8;
    let mut k = total_ticks;
    while vehicles.iter().any(|v| !v.route.is_empty()) {
        if k - total_ticks > max_drain_ticks {
            return Err(SimError::DrainStalled);
        }
        let now = k as f64 * config.tick;
        if config.expiry == ExpiryPolicy::Pickup {
            expire_assigned(&mut vehicles, &mut requests, &mut log, now);
        }
        advance_fleet(&mut vehicles, &mut requests, &mut log, config, now, config.tick)?;
        k += 1;
    }

    let report = metrics::compute(&log, &requests, &config.metric_params())?;
    Ok(SimOutcome { log, report, requests, vehicles })
}

fn validate_workload(workload: &[TripRequest]) -> Result<(), SimError> {
    let mut prev = f64::NEG_INFINITY;
    for (index, r) in workload.iter().enumerate() {
        let fail = |reason: &str| {
            Err(SimError::MalformedRequest { index, reason: reason.to_string() })
        };
        if !r.origin.is_finite() || !r.destination.is_finite() {
            return fail("non-finite coordinates");
        }
        if r.origin == r.destination {
            return fail("origin equals destination");
        }
        if !(r.patience > 0.0) {
            return fail("patience must be positive");
        }
        if !r.release_time.is_finite() || r.release_time < 0.0 {
            return fail("release time must be non-negative");
        }
        if r.state != RequestState::Pending {
            return fail("request already started its lifecycle");
        }
        if r.release_time < prev {
            return Err(SimError::UnsortedWorkload(index));
        }
        prev = r.release_time;
    }
    Ok(())
}

fn spawn_fleet(config: &SimConfig) -> Vec<Vehicle> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.fleet_size)
        .map(|i| {
            let x = rng.gen_range(config.region.min_x..=config.region.max_x);
            let y = rng.gen_range(config.region.min_y..=config.region.max_y);
            Vehicle::new(VehicleId(i as u32), Point::new(x, y), config.capacity, config.speed)
        })
        .collect()
}

fn expire_pending(
    pending: &mut Vec<RequestId>,
    requests: &mut [TripRequest],
    log: &mut EventLog,
    now: f64,
) {
    let mut kept = Vec::with_capacity(pending.len());
    for id in pending.drain(..) {
        if now > requests[id.index()].expiry_time() {
            requests[id.index()].reject().expect("pending request must be rejectable");
            log.push(now, Event::Rejected { request: id });
        } else {
            kept.push(id);
        }
    }
    *pending = kept;
}

/// Pickup-expiry policy: assigned riders past their patience abandon, and
/// their stops are removed from the route.
fn expire_assigned(
    vehicles: &mut [Vehicle],
    requests: &mut [TripRequest],
    log: &mut EventLog,
    now: f64,
) {
    for vehicle in vehicles.iter_mut() {
        let expired: Vec<RequestId> = vehicle
            .route
            .iter()
            .filter(|s| s.kind == StopKind::Pickup)
            .map(|s| s.request)
            .filter(|id| {
                let r = &requests[id.index()];
                r.state == RequestState::Assigned && now > r.expiry_time()
            })
            .collect();
        for id in expired {
            vehicle.route.retain(|s| s.request != id);
            requests[id.index()].cancel().expect("assigned request must be cancellable");
            log.push(now, Event::Rejected { request: id });
        }
    }
}

fn advance_fleet(
    vehicles: &mut [Vehicle],
    requests: &mut [TripRequest],
    log: &mut EventLog,
    config: &SimConfig,
    now: f64,
    dt: f64,
) -> Result<(), SimError> {
    let mut buffer: Vec<TimedEvent> = Vec::new();
    for vehicle in vehicles.iter_mut() {
        let advance = advance_vehicle(vehicle, dt, now);
        for seg in &advance.moves {
            buffer.push(TimedEvent {
                time: seg.time,
                event: Event::Moved { vehicle: vehicle.id, from: seg.from, to: seg.to },
            });
        }
        for arrival in &advance.arrivals {
            let id = arrival.stop.request;
            let request = &mut requests[id.index()];
            match arrival.stop.kind {
                StopKind::Pickup => {
                    request.board(arrival.time)?;
                    vehicle.onboard.push(OnboardRider {
                        request: id,
                        wait_minutes: request.wait_minutes().unwrap_or(0.0),
                        pickup_time: arrival.time,
                        single_drive_minutes: single_drive_time(request, config.speed)?,
                    });
                    buffer.push(TimedEvent {
                        time: arrival.time,
                        event: Event::PickedUp { request: id, vehicle: vehicle.id },
                    });
                }
                StopKind::Dropoff => {
                    request.complete(arrival.time)?;
                    vehicle.onboard.retain(|r| r.request != id);
                    buffer.push(TimedEvent {
                        time: arrival.time,
                        event: Event::DroppedOff { request: id, vehicle: vehicle.id },
                    });
                }
            }
            debug_assert!(vehicle.onboard.len() <= vehicle.capacity);
        }
    }
    // Vehicles are advanced one at a time, so interleave their events back
    // into global time order before logging.
    buffer.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("event times are finite"));
    for e in buffer {
        log.push(e.time, e.event);
    }
    Ok(())
}
