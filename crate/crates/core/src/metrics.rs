//! Performance indexes computed from a finished episode's event log.
//!
//! - ICI: weighted rider inconvenience, waiting time plus in-vehicle time
//!   in excess of the solo-drive estimate, summed over served riders.
//! - MSI: fraction of mileage saved versus everyone driving solo,
//!   (total solo km - total driven km) / total driven km.
//! - SAI: fraction of requests served before their patience ran out.
//! - UI: alpha * MSI + beta * SAI - gamma * mean per-served ICI.
//!
//! The UI term uses the *mean* ICI per served rider: with the default
//! gamma, a raw sum over a large workload would swamp the other two terms.
//! Both the total and the mean are reported. The extra-trip term is floored
//! at zero for the headline value (a pooled trip that beats the solo
//! estimate is no inconvenience); the unfloored sum is reported alongside.

use crate::model::{manhattan_dist, RequestId, RequestState, TripRequest, VehicleId, Weights};
use crate::sim::{Event, EventLog};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("served request {0:?} is missing timing data")]
    MissingTiming(RequestId),
    #[error("request {0:?} never reached a terminal state")]
    NonTerminal(RequestId),
    #[error("vehicles served requests without driving any distance")]
    ZeroMileageWithService,
    #[error("speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
}

/// Constants the indexes depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    pub weights: Weights,
    /// Penalty weight on waiting time.
    pub c_w: f64,
    /// Penalty weight on extra in-vehicle time.
    pub c_t: f64,
    /// Kilometers per minute, for the solo-drive estimate.
    pub speed: f64,
}

/// Completed timing of one served rider.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiderTiming {
    pub request: RequestId,
    pub wait_minutes: f64,
    pub trip_minutes: f64,
    pub single_minutes: f64,
}

/// Extracts timings for every served request; a served request with missing
/// timestamps is a hard error, as is any request left mid-lifecycle.
pub fn rider_timings(
    requests: &[TripRequest],
    speed: f64,
) -> Result<Vec<RiderTiming>, MetricsError> {
    if !(speed > 0.0) {
        return Err(MetricsError::NonPositiveSpeed(speed));
    }
    let mut out = Vec::new();
    for r in requests {
        match r.state {
            RequestState::Completed => {
                let wait = r.wait_minutes().ok_or(MetricsError::MissingTiming(r.id))?;
                let trip = r.trip_minutes().ok_or(MetricsError::MissingTiming(r.id))?;
                out.push(RiderTiming {
                    request: r.id,
                    wait_minutes: wait,
                    trip_minutes: trip,
                    single_minutes: manhattan_dist(r.origin, r.destination) / speed,
                });
            }
            RequestState::Rejected => {}
            _ => return Err(MetricsError::NonTerminal(r.id)),
        }
    }
    Ok(out)
}

/// Inconvenience totals over a set of served riders.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IciTotals {
    /// Extra-trip term floored at zero per rider.
    pub clamped: f64,
    /// Raw sum, extra-trip term unfloored.
    pub raw: f64,
}

/// Weighted inconvenience summed over served riders.
pub fn ici(timings: &[RiderTiming], c_w: f64, c_t: f64) -> IciTotals {
    let mut totals = IciTotals::default();
    for t in timings {
        let excess = t.trip_minutes - t.single_minutes;
        totals.clamped += c_w * t.wait_minutes + c_t * excess.max(0.0);
        totals.raw += c_w * t.wait_minutes + c_t * excess;
    }
    totals
}

/// Solo-equivalent and actually-driven kilometers for one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleMileage {
    pub vehicle: VehicleId,
    /// Sum of origin->destination Manhattan distances of the requests this
    /// vehicle served.
    pub single_km: f64,
    /// Kilometers this vehicle actually drove.
    pub shared_km: f64,
}

/// Mileage saving index over the fleet. No service at all yields 0 by
/// convention; service with zero driven mileage is an accounting error.
pub fn msi(per_vehicle: &[VehicleMileage]) -> Result<f64, MetricsError> {
    let single: f64 = per_vehicle.iter().map(|m| m.single_km).sum();
    let shared: f64 = per_vehicle.iter().map(|m| m.shared_km).sum();
    if shared <= 0.0 {
        return if single > 0.0 { Err(MetricsError::ZeroMileageWithService) } else { Ok(0.0) };
    }
    Ok((single - shared) / shared)
}

/// Serving ability index: served / total, or 1 for an empty request set.
pub fn sai(requests: &[TripRequest]) -> f64 {
    if requests.is_empty() {
        return 1.0;
    }
    let served = requests.iter().filter(|r| r.state == RequestState::Completed).count();
    served as f64 / requests.len() as f64
}

/// Unified index from its three parts; `ici_mean` is the per-served-rider
/// mean in weighted minutes.
pub fn ui(msi: f64, sai: f64, ici_mean: f64, weights: &Weights) -> f64 {
    weights.alpha * msi + weights.beta * sai - weights.gamma * ici_mean
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourlyMetrics {
    pub hour: u32,
    pub requests: usize,
    pub served: usize,
    pub msi: f64,
    pub sai: f64,
    pub ici_mean: f64,
    pub ui: f64,
}

/// The full set of indexes for one episode, plus per-hour breakdowns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub requests_total: usize,
    pub requests_served: usize,
    pub requests_rejected: usize,
    pub msi: f64,
    pub sai: f64,
    pub ici_total: f64,
    pub ici_total_unclamped: f64,
    pub ici_mean_per_served: f64,
    pub ui: f64,
    pub mean_wait_minutes: f64,
    pub mean_extra_trip_minutes: f64,
    pub total_single_km: f64,
    pub total_shared_km: f64,
    pub hourly: Vec<HourlyMetrics>,
}

/// Builds the report from the event log and the final request table.
/// Mileage comes entirely from movement events; request-vehicle attribution
/// comes from assignment events.
pub fn compute(
    log: &EventLog,
    requests: &[TripRequest],
    params: &MetricParams,
) -> Result<MetricsReport, MetricsError> {
    let timings = rider_timings(requests, params.speed)?;

    // Per-vehicle mileage accounting from the log.
    let mut assigned_vehicle: BTreeMap<RequestId, VehicleId> = BTreeMap::new();
    let mut shared: BTreeMap<VehicleId, f64> = BTreeMap::new();
    for e in log.events() {
        match e.event {
            Event::Assigned { request, vehicle } => {
                assigned_vehicle.insert(request, vehicle);
            }
            Event::Moved { vehicle, from, to } => {
                *shared.entry(vehicle).or_insert(0.0) += manhattan_dist(from, to);
            }
            _ => {}
        }
    }
    let mut single: BTreeMap<VehicleId, f64> = BTreeMap::new();
    for r in requests.iter().filter(|r| r.state == RequestState::Completed) {
        let vehicle = assigned_vehicle
            .get(&r.id)
            .copied()
            .ok_or(MetricsError::MissingTiming(r.id))?;
        *single.entry(vehicle).or_insert(0.0) += manhattan_dist(r.origin, r.destination);
    }
    let vehicle_ids: Vec<VehicleId> =
        shared.keys().chain(single.keys()).copied().collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
    let per_vehicle: Vec<VehicleMileage> = vehicle_ids
        .into_iter()
        .map(|v| VehicleMileage {
            vehicle: v,
            single_km: single.get(&v).copied().unwrap_or(0.0),
            shared_km: shared.get(&v).copied().unwrap_or(0.0),
        })
        .collect();

    let msi_value = msi(&per_vehicle)?;
    let sai_value = sai(requests);
    let totals = ici(&timings, params.c_w, params.c_t);
    let served = timings.len();
    let ici_mean = if served > 0 { totals.clamped / served as f64 } else { 0.0 };
    let ui_value = ui(msi_value, sai_value, ici_mean, &params.weights);

    let mean_wait = mean(timings.iter().map(|t| t.wait_minutes));
    let mean_extra = mean(timings.iter().map(|t| t.trip_minutes - t.single_minutes));

    Ok(MetricsReport {
        requests_total: requests.len(),
        requests_served: served,
        requests_rejected: requests.iter().filter(|r| r.state == RequestState::Rejected).count(),
        msi: msi_value,
        sai: sai_value,
        ici_total: totals.clamped,
        ici_total_unclamped: totals.raw,
        ici_mean_per_served: ici_mean,
        ui: ui_value,
        mean_wait_minutes: mean_wait,
        mean_extra_trip_minutes: mean_extra,
        total_single_km: per_vehicle.iter().map(|m| m.single_km).sum(),
        total_shared_km: per_vehicle.iter().map(|m| m.shared_km).sum(),
        hourly: hourly_breakdown(log, requests, &timings, params),
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    if n > 0 { sum / n as f64 } else { 0.0 }
}

/// Reporting convention for the per-hour series: requests bucket by release
/// hour; driven mileage buckets by movement-event time.
fn hourly_breakdown(
    log: &EventLog,
    requests: &[TripRequest],
    timings: &[RiderTiming],
    params: &MetricParams,
) -> Vec<HourlyMetrics> {
    let hour_of = |minutes: f64| (minutes / 60.0).floor().max(0.0) as u32;

    let mut shared_by_hour: BTreeMap<u32, f64> = BTreeMap::new();
    for e in log.events() {
        if let Event::Moved { from, to, .. } = e.event {
            *shared_by_hour.entry(hour_of(e.time)).or_insert(0.0) += manhattan_dist(from, to);
        }
    }

    #[derive(Default)]
    struct Bucket {
        requests: usize,
        served: usize,
        single_km: f64,
        ici_sum: f64,
    }
    let timing_by_id: BTreeMap<RequestId, &RiderTiming> =
        timings.iter().map(|t| (t.request, t)).collect();
    let mut buckets: BTreeMap<u32, Bucket> = BTreeMap::new();
    for r in requests {
        let bucket = buckets.entry(hour_of(r.release_time)).or_default();
        bucket.requests += 1;
        if let Some(t) = timing_by_id.get(&r.id) {
            bucket.served += 1;
            bucket.single_km += manhattan_dist(r.origin, r.destination);
            bucket.ici_sum += params.c_w * t.wait_minutes
                + params.c_t * (t.trip_minutes - t.single_minutes).max(0.0);
        }
    }

    let last_hour = buckets
        .keys()
        .copied()
        .chain(shared_by_hour.keys().copied())
        .max();
    let Some(last_hour) = last_hour else { return Vec::new() };

    (0..=last_hour)
        .map(|hour| {
            let empty = Bucket::default();
            let bucket = buckets.get(&hour).unwrap_or(&empty);
            let shared = shared_by_hour.get(&hour).copied().unwrap_or(0.0);
            let hour_msi =
                if shared > 0.0 { (bucket.single_km - shared) / shared } else { 0.0 };
            let hour_sai = if bucket.requests > 0 {
                bucket.served as f64 / bucket.requests as f64
            } else {
                1.0
            };
            let hour_ici_mean =
                if bucket.served > 0 { bucket.ici_sum / bucket.served as f64 } else { 0.0 };
            HourlyMetrics {
                hour,
                requests: bucket.requests,
                served: bucket.served,
                msi: hour_msi,
                sai: hour_sai,
                ici_mean: hour_ici_mean,
                ui: ui(hour_msi, hour_sai, hour_ici_mean, &params.weights),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Point;

    fn timing(wait: f64, trip: f64, single: f64) -> RiderTiming {
        RiderTiming { request: RequestId(0), wait_minutes: wait, trip_minutes: trip, single_minutes: single }
    }

    #[test]
    fn ici_zero_for_punctual_rider() {
        let totals = ici(&[timing(0.0, 5.0, 5.0)], 1.1, 1.0);
        assert_eq!(totals.clamped, 0.0);
        assert_eq!(totals.raw, 0.0);
    }

    #[test]
    fn ici_weights_waiting_time() {
        let totals = ici(&[timing(2.0, 5.0, 5.0)], 1.1, 1.0);
        assert_eq!(totals.clamped, 1.1 * 2.0);
    }

    #[test]
    fn ici_three_rider_hand_sum() {
        let riders = [timing(2.0, 5.0, 5.0), timing(3.0, 6.5, 5.0), timing(0.0, 9.0, 7.0)];
        let totals = ici(&riders, 1.1, 1.0);
        // 1.1*(2+3+0) + (0 + 1.5 + 2) = 9.0
        assert!((totals.clamped - 9.0).abs() < 1e-12);
        assert_eq!(totals.clamped, totals.raw);
    }

    #[test]
    fn ici_clamps_faster_than_solo_trips() {
        let totals = ici(&[timing(0.0, 3.0, 5.0)], 1.1, 1.0);
        assert_eq!(totals.clamped, 0.0);
        assert_eq!(totals.raw, -2.0);
    }

    #[test]
    fn ici_zero_weights_zero_everything() {
        let riders = [timing(10.0, 50.0, 5.0), timing(3.0, 6.5, 5.0)];
        assert_eq!(ici(&riders, 0.0, 0.0).clamped, 0.0);
    }

    #[test]
    fn msi_identities() {
        let m = |single, shared| VehicleMileage { vehicle: VehicleId(0), single_km: single, shared_km: shared };
        // Solo rider served from the rider's own origin: no saving.
        assert_eq!(msi(&[m(3.0, 3.0)]).unwrap(), 0.0);
        // Perfect pooling of two identical trips with no approach.
        assert_eq!(msi(&[m(2.0, 1.0)]).unwrap(), 1.0);
        // No service, no mileage: zero by convention.
        assert_eq!(msi(&[]).unwrap(), 0.0);
        assert_eq!(msi(&[m(0.0, 0.0)]).unwrap(), 0.0);
        // Service without mileage is an accounting fault.
        assert_eq!(msi(&[m(2.0, 0.0)]), Err(MetricsError::ZeroMileageWithService));
    }

    #[test]
    fn msi_two_vehicle_hand_value() {
        let rows = [
            VehicleMileage { vehicle: VehicleId(0), single_km: 5.0, shared_km: 4.0 },
            VehicleMileage { vehicle: VehicleId(1), single_km: 3.0, shared_km: 2.5 },
        ];
        assert_eq!(msi(&rows).unwrap(), 1.5 / 6.5);
    }

    #[test]
    fn sai_counts_served_fraction() {
        let mk = |state| {
            let mut r = TripRequest::new(
                RequestId(0),
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                0.0,
                20.0,
            );
            r.state = state;
            r
        };
        assert_eq!(sai(&[]), 1.0);
        assert_eq!(sai(&[mk(RequestState::Completed)]), 1.0);
        assert_eq!(sai(&[mk(RequestState::Rejected)]), 0.0);
        let four = vec![
            mk(RequestState::Completed),
            mk(RequestState::Completed),
            mk(RequestState::Completed),
            mk(RequestState::Rejected),
        ];
        assert_eq!(sai(&four), 0.75);
    }

    #[test]
    fn ui_is_affine_with_documented_signs() {
        let w = Weights::default();
        assert_eq!(ui(0.0, 1.0, 0.0, &w), 1.0);
        // Matches the reported magnitudes: strong saving, full service,
        // modest inconvenience.
        assert!((ui(0.38, 1.0, 3.9, &w) - 0.99).abs() < 1e-12);
        // With alpha = gamma = 0 the index reduces to the serving rate.
        let only_service = Weights { alpha: 0.0, beta: 1.0, gamma: 0.0 };
        assert_eq!(ui(0.7, 0.42, 99.0, &only_service), 0.42);
    }

    #[test]
    fn rider_timings_requires_terminal_states() {
        let mut r = TripRequest::new(
            RequestId(0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            0.0,
            20.0,
        );
        r.assign(0.0).unwrap();
        assert_eq!(rider_timings(&[r.clone()], 0.5), Err(MetricsError::NonTerminal(RequestId(0))));
        r.board(1.0).unwrap();
        r.complete(3.0).unwrap();
        let t = rider_timings(&[r.clone()], 0.5).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].wait_minutes, 1.0);
        assert_eq!(t[0].trip_minutes, 2.0);
        assert_eq!(t[0].single_minutes, 2.0);

        // Forged completed state without timestamps is a hard error.
        let mut forged = TripRequest::new(
            RequestId(1),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            0.0,
            20.0,
        );
        forged.state = RequestState::Completed;
        assert_eq!(
            rider_timings(&[forged], 0.5),
            Err(MetricsError::MissingTiming(RequestId(1)))
        );
    }
}
