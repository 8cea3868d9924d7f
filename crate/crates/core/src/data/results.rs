//! Result serialization: sweep and comparison CSVs, flat JSON reports, and
//! workload export in the same trip-record schema the ingester reads.

use crate::data::{DataError, Projection};
use crate::metrics::MetricsReport;
use crate::model::TripRequest;
use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// One sweep grid cell; heatmap-ready, one row per (r_s, phi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r_s: f64,
    pub phi: f64,
    pub msi: f64,
    pub sai: f64,
    pub ici_total: f64,
    pub ici_mean: f64,
    pub ui: f64,
}

/// One per-hour observation of one strategy in a comparison run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub hour: u32,
    pub strategy: String,
    pub msi: f64,
    pub sai: f64,
    pub ici_mean: f64,
    pub ui: f64,
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: std::io::Read>(reader: R) -> Result<Vec<SweepRow>, DataError> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().collect::<Result<Vec<_>, _>>().map_err(DataError::from)
}

pub fn write_compare_csv<W: Write>(rows: &[CompareRow], writer: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_compare_csv<R: std::io::Read>(reader: R) -> Result<Vec<CompareRow>, DataError> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().collect::<Result<Vec<_>, _>>().map_err(DataError::from)
}

/// A single report as one flat CSV row.
pub fn write_report_csv<W: Write>(report: &MetricsReport, writer: W) -> Result<(), DataError> {
    #[derive(Serialize)]
    struct Row {
        requests_total: usize,
        requests_served: usize,
        requests_rejected: usize,
        msi: f64,
        sai: f64,
        ici_total: f64,
        ici_total_unclamped: f64,
        ici_mean: f64,
        ui: f64,
        mean_wait_minutes: f64,
        mean_extra_trip_minutes: f64,
        total_single_km: f64,
        total_shared_km: f64,
    }
    let mut w = csv::Writer::from_writer(writer);
    w.serialize(Row {
        requests_total: report.requests_total,
        requests_served: report.requests_served,
        requests_rejected: report.requests_rejected,
        msi: report.msi,
        sai: report.sai,
        ici_total: report.ici_total,
        ici_total_unclamped: report.ici_total_unclamped,
        ici_mean: report.ici_mean_per_served,
        ui: report.ui,
        mean_wait_minutes: report.mean_wait_minutes,
        mean_extra_trip_minutes: report.mean_extra_trip_minutes,
        total_single_km: report.total_single_km,
        total_shared_km: report.total_shared_km,
    })?;
    w.flush()?;
    Ok(())
}

/// The report as a flat JSON object with the run configuration echoed under
/// `"config"` for provenance.
pub fn write_report_json<W: Write, C: Serialize>(
    report: &MetricsReport,
    config: &C,
    mut writer: W,
) -> Result<(), DataError> {
    let mut value = serde_json::to_value(report)?;
    let obj = value.as_object_mut().expect("report serializes to an object");
    obj.insert("config".to_string(), serde_json::to_value(config)?);
    let pretty = serde_json::to_string_pretty(&value)?;
    writer.write_all(pretty.as_bytes())?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Exports a planar workload as a trip-record CSV in the ingester's own
/// schema: times become ISO-8601 datetimes from `epoch`, positions become
/// degrees through `projection`.
pub fn write_workload_csv<W: Write>(
    workload: &[TripRequest],
    projection: &Projection,
    epoch: NaiveDateTime,
    writer: W,
) -> Result<(), DataError> {
    #[derive(Serialize)]
    struct Row {
        pickup_datetime: String,
        pickup_lon: f64,
        pickup_lat: f64,
        dropoff_lon: f64,
        dropoff_lat: f64,
    }
    let mut w = csv::Writer::from_writer(writer);
    for r in workload {
        let millis = (r.release_time * 60_000.0).round() as i64;
        let dt = epoch + Duration::milliseconds(millis);
        let (plat, plon) = projection.to_geo(r.origin);
        let (dlat, dlon) = projection.to_geo(r.destination);
        w.serialize(Row {
            pickup_datetime: dt.format("%Y-%m-%dT%H:%M:%S%.3f").to_string(),
            pickup_lon: plon,
            pickup_lat: plat,
            dropoff_lon: dlon,
            dropoff_lat: dlat,
        })?;
    }
    w.flush()?;
    Ok(())
}
