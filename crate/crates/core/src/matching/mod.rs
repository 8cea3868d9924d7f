//! Matching strategies behind a common interface: the polar-zone matcher
//! and the two baselines it is compared against.

mod baselines;
mod insertion;
mod pcrm;

pub use baselines::{ddm_match, og_match};
pub use insertion::{
    capacity_ok, cheapest_insertion, insertion_cost, validate_route, with_inserted, RouteError,
};
pub use pcrm::{adaptive_state, gates_hold, pcrm_match};

use crate::model::{ModelError, RouteStop, TripRequest, Vehicle, VehicleId, ZoneParams};
use serde::{Deserialize, Serialize};

/// An accepted pairing of a request with a vehicle: where both stops go in
/// the vehicle's route and what the detour costs. `pickup_index` addresses
/// the route after the pickup is spliced in; `dropoff_index` addresses the
/// route after both are.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchDecision {
    pub vehicle: VehicleId,
    pub pickup_index: usize,
    pub dropoff_index: usize,
    pub added_km: f64,
}

impl MatchDecision {
    /// Fleet-wide selection order: least added distance, ties to the lowest
    /// vehicle id.
    pub(crate) fn beats(&self, incumbent: &Option<MatchDecision>) -> bool {
        incumbent.as_ref().map_or(true, |b| {
            self.added_km < b.added_km
                || (self.added_km == b.added_km && self.vehicle < b.vehicle)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Pcrm,
    Ddm,
    Og,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Pcrm => "pcrm",
            StrategyKind::Ddm => "ddm",
            StrategyKind::Og => "og",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pcrm" => Ok(StrategyKind::Pcrm),
            "ddm" => Ok(StrategyKind::Ddm),
            "og" => Ok(StrategyKind::Og),
            other => Err(ModelError::InvalidParameter(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Trapezoid gate dimensions for the data-driven baseline, kilometers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidParams {
    pub near_width: f64,
    pub far_width: f64,
    pub depth: f64,
}

impl Default for TrapezoidParams {
    fn default() -> Self {
        TrapezoidParams { near_width: 0.4, far_width: 1.6, depth: 2.0 }
    }
}

impl TrapezoidParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.near_width > 0.0 && self.far_width > 0.0 && self.depth > 0.0 {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter(
                "trapezoid widths and depth must be positive".to_string(),
            ))
        }
    }
}

/// Which matcher runs and with what parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    #[serde(default = "default_kind")]
    pub kind: StrategyKind,
    #[serde(default)]
    pub zone: ZoneParams,
    #[serde(default)]
    pub ddm: TrapezoidParams,
}

fn default_kind() -> StrategyKind {
    StrategyKind::Pcrm
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            kind: StrategyKind::Pcrm,
            zone: ZoneParams::default(),
            ddm: TrapezoidParams::default(),
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.zone.validate()?;
        if self.kind == StrategyKind::Ddm {
            self.ddm.validate()?;
        }
        Ok(())
    }

    pub fn build(&self) -> Box<dyn MatchStrategy> {
        match self.kind {
            StrategyKind::Pcrm => Box::new(PcrmStrategy { zone: self.zone }),
            StrategyKind::Ddm => Box::new(DdmStrategy { trapezoid: self.ddm }),
            StrategyKind::Og => Box::new(OgStrategy),
        }
    }
}

/// A pluggable matcher: proposes a decision for one pending request against
/// the current fleet, mutating nothing.
pub trait MatchStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    fn propose(&self, request: &TripRequest, fleet: &[Vehicle], now: f64)
        -> Option<MatchDecision>;
}

pub struct PcrmStrategy {
    pub zone: ZoneParams,
}

impl MatchStrategy for PcrmStrategy {
    fn name(&self) -> &'static str {
        "pcrm"
    }

    fn propose(
        &self,
        request: &TripRequest,
        fleet: &[Vehicle],
        now: f64,
    ) -> Option<MatchDecision> {
        pcrm_match(request, fleet, &self.zone, now)
    }
}

pub struct DdmStrategy {
    pub trapezoid: TrapezoidParams,
}

impl MatchStrategy for DdmStrategy {
    fn name(&self) -> &'static str {
        "ddm"
    }

    fn propose(
        &self,
        request: &TripRequest,
        fleet: &[Vehicle],
        now: f64,
    ) -> Option<MatchDecision> {
        ddm_match(request, fleet, &self.trapezoid, now)
    }
}

pub struct OgStrategy;

impl MatchStrategy for OgStrategy {
    fn name(&self) -> &'static str {
        "og"
    }

    fn propose(
        &self,
        request: &TripRequest,
        fleet: &[Vehicle],
        now: f64,
    ) -> Option<MatchDecision> {
        og_match(request, fleet, now)
    }
}

/// Splices the decision's pickup and dropoff stops into the vehicle route.
/// The caller is expected to run `validate_route` afterwards.
pub fn apply_decision(vehicle: &mut Vehicle, request: &TripRequest, decision: &MatchDecision) {
    debug_assert_eq!(vehicle.id, decision.vehicle);
    vehicle
        .route
        .insert(decision.pickup_index, RouteStop::pickup(request.id, request.origin));
    vehicle
        .route
        .insert(decision.dropoff_index, RouteStop::dropoff(request.id, request.destination));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Point, RequestId};

    #[test]
    fn strategy_kind_parses_known_names_only() {
        assert_eq!("pcrm".parse::<StrategyKind>().unwrap(), StrategyKind::Pcrm);
        assert_eq!("DDM".parse::<StrategyKind>().unwrap(), StrategyKind::Ddm);
        assert_eq!(" og ".parse::<StrategyKind>().unwrap(), StrategyKind::Og);
        assert!("hungarian".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn apply_decision_yields_validating_route() {
        let mut v = Vehicle::new(VehicleId(0), Point::new(0.0, 0.0), 4, 0.5);
        let req = TripRequest::new(
            RequestId(0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            0.0,
            20.0,
        );
        let d = og_match(&req, std::slice::from_ref(&v), 0.0).unwrap();
        apply_decision(&mut v, &req, &d);
        assert_eq!(v.route.len(), 2);
        assert!(validate_route(&v.route, &v.onboard, v.capacity).is_ok());
    }
}
