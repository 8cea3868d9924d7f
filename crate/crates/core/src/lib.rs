//! Dispatch simulator and matching library for dynamic ridesharing.
//!
//! The centerpiece is a polar-coordinates ride-matching strategy: a rider
//! is pooled into a vehicle only when their origin falls inside a
//! cosine-bounded zone ahead of the vehicle and their destination inside
//! sine-bounded lobes along the remaining route (or an angular cone past
//! its end), with both zones shrinking as riders already on board
//! accumulate delay. Two baselines, a trapezoid-gated matcher and an
//! online greedy matcher, run behind the same interface for comparison.
//!
//! A discrete-time fleet simulation drives the matchers over a workload
//! and produces mileage-saving, serving-ability, and inconvenience
//! indexes, combined into a single unified score.

pub mod data;
pub mod geometry;
pub mod matching;
pub mod metrics;
pub mod model;
pub mod sim;

pub use matching::{MatchDecision, MatchStrategy, StrategyConfig, StrategyKind, TrapezoidParams};
pub use metrics::{MetricParams, MetricsReport};
pub use model::{
    KmBounds, Point, RequestId, RequestState, RouteStop, StopKind, TripRequest, Vehicle,
    VehicleId, Weights, ZoneParams,
};
pub use sim::{run, EventLog, ExpiryPolicy, SimConfig, SimOutcome};
