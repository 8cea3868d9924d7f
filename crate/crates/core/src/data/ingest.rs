//! Trip-record CSV ingestion: parses NYC-taxi-style rows, filters them to a
//! time window and geographic box, and projects them into the planar frame
//! the simulator works in.

use crate::data::{DataError, GeoBounds, Projection};
use crate::model::{RequestId, TripRequest};
use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Header names for the five required columns. Trip-record schemas vary by
/// source and year, so every name is remappable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub pickup_datetime: String,
    pub pickup_lon: String,
    pub pickup_lat: String,
    pub dropoff_lon: String,
    pub dropoff_lat: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            pickup_datetime: "pickup_datetime".to_string(),
            pickup_lon: "pickup_lon".to_string(),
            pickup_lat: "pickup_lat".to_string(),
            dropoff_lon: "dropoff_lon".to_string(),
            dropoff_lat: "dropoff_lat".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    #[serde(default)]
    pub columns: ColumnMap,
    /// Rows outside this box are dropped. `None` keeps everything and
    /// anchors the projection at the data's own extent midpoint.
    #[serde(default)]
    pub bounds: Option<GeoBounds>,
    /// Rows outside this window are dropped; release times count from its
    /// start. `None` spans the file.
    #[serde(default)]
    pub window: Option<(NaiveDateTime, NaiveDateTime)>,
    /// Patience stamped onto every ingested request, minutes.
    pub patience: f64,
    /// Abort on the first malformed row instead of skipping it.
    #[serde(default)]
    pub strict: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            columns: ColumnMap::default(),
            bounds: None,
            window: None,
            patience: 20.0,
            strict: false,
        }
    }
}

/// Outcome of an ingestion pass, including what was filtered and why.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub workload: Vec<TripRequest>,
    pub total_rows: usize,
    pub skipped_malformed: usize,
    pub dropped_outside: usize,
    pub window: (NaiveDateTime, NaiveDateTime),
    pub projection: Projection,
}

struct RawTrip {
    pickup: NaiveDateTime,
    pickup_lat: f64,
    pickup_lon: f64,
    dropoff_lat: f64,
    dropoff_lon: f64,
}

const DATETIME_FORMATS: [&str; 2] = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"];

pub(crate) fn parse_datetime(s: &str) -> Option<NaiveDateTime> {
    DATETIME_FORMATS
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(s.trim(), fmt).ok())
}

pub fn ingest_csv(path: &Path, options: &IngestOptions) -> Result<IngestReport, DataError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let col_time = column(&options.columns.pickup_datetime)?;
    let col_plon = column(&options.columns.pickup_lon)?;
    let col_plat = column(&options.columns.pickup_lat)?;
    let col_dlon = column(&options.columns.dropoff_lon)?;
    let col_dlat = column(&options.columns.dropoff_lat)?;

    let mut raws: Vec<RawTrip> = Vec::new();
    let mut total_rows = 0usize;
    let mut skipped_malformed = 0usize;
    for (i, record) in reader.records().enumerate() {
        total_rows += 1;
        let line = i + 2; // header is line 1
        let parse = || -> Result<RawTrip, String> {
            let record = record.as_ref().map_err(|e| e.to_string())?;
            let field = |idx: usize| record.get(idx).ok_or_else(|| "short row".to_string());
            let number = |idx: usize| -> Result<f64, String> {
                field(idx)?.trim().parse::<f64>().map_err(|e| e.to_string())
            };
            let pickup = parse_datetime(field(col_time)?)
                .ok_or_else(|| format!("unparseable datetime '{}'", field(col_time).unwrap_or("")))?;
            let raw = RawTrip {
                pickup,
                pickup_lat: number(col_plat)?,
                pickup_lon: number(col_plon)?,
                dropoff_lat: number(col_dlat)?,
                dropoff_lon: number(col_dlon)?,
            };
            if !raw.pickup_lat.is_finite()
                || !raw.pickup_lon.is_finite()
                || !raw.dropoff_lat.is_finite()
                || !raw.dropoff_lon.is_finite()
            {
                return Err("non-finite coordinate".to_string());
            }
            if raw.pickup_lat == raw.dropoff_lat && raw.pickup_lon == raw.dropoff_lon {
                return Err("pickup equals dropoff".to_string());
            }
            Ok(raw)
        };
        match parse() {
            Ok(raw) => raws.push(raw),
            Err(reason) => {
                if options.strict {
                    return Err(DataError::MalformedRow { line, reason });
                }
                skipped_malformed += 1;
            }
        }
    }
    if raws.is_empty() {
        return Err(DataError::EmptyWorkload);
    }

    let window = match options.window {
        Some(w) => w,
        None => {
            let min = raws.iter().map(|r| r.pickup).min().expect("non-empty");
            let max = raws.iter().map(|r| r.pickup).max().expect("non-empty");
            (min, max)
        }
    };

    let projection = match options.bounds {
        Some(b) => {
            let (lat, lon) = b.centroid();
            Projection::new(lat, lon)
        }
        None => {
            let lat_mid = 0.5
                * (raws.iter().map(|r| r.pickup_lat).fold(f64::INFINITY, f64::min)
                    + raws.iter().map(|r| r.pickup_lat).fold(f64::NEG_INFINITY, f64::max));
            let lon_mid = 0.5
                * (raws.iter().map(|r| r.pickup_lon).fold(f64::INFINITY, f64::min)
                    + raws.iter().map(|r| r.pickup_lon).fold(f64::NEG_INFINITY, f64::max));
            Projection::new(lat_mid, lon_mid)
        }
    };

    let mut dropped_outside = 0usize;
    let mut workload: Vec<TripRequest> = Vec::new();
    for raw in &raws {
        if raw.pickup < window.0 || raw.pickup > window.1 {
            dropped_outside += 1;
            continue;
        }
        if let Some(b) = options.bounds {
            let inside = b.contains(raw.pickup_lat, raw.pickup_lon)
                && b.contains(raw.dropoff_lat, raw.dropoff_lon);
            if !inside {
                dropped_outside += 1;
                continue;
            }
        }
        let release = (raw.pickup - window.0).num_milliseconds() as f64 / 60_000.0;
        workload.push(TripRequest::new(
            RequestId(0), // renumbered after sorting
            projection.to_km(raw.pickup_lat, raw.pickup_lon),
            projection.to_km(raw.dropoff_lat, raw.dropoff_lon),
            release,
            options.patience,
        ));
    }
    if workload.is_empty() {
        return Err(DataError::EmptyWorkload);
    }

    workload.sort_by(|a, b| a.release_time.partial_cmp(&b.release_time).expect("finite times"));
    for (i, r) in workload.iter_mut().enumerate() {
        r.id = RequestId(i as u32);
    }

    Ok(IngestReport { workload, total_rows, skipped_malformed, dropped_outside, window, projection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "pickup_datetime,pickup_lon,pickup_lat,dropoff_lon,dropoff_lat\n";

    #[test]
    fn empty_file_is_an_error() {
        let f = write_csv(HEADER);
        assert!(matches!(
            ingest_csv(f.path(), &IngestOptions::default()),
            Err(DataError::EmptyWorkload)
        ));
    }

    #[test]
    fn lenient_mode_skips_malformed_rows() {
        let body = format!(
            "{HEADER}\
             2016-03-02 18:00:00,-73.98,40.75,-73.96,40.77\n\
             2016-03-02 18:01:00,not-a-number,40.75,-73.96,40.77\n\
             2016-03-02 18:02:00,-73.99,40.74,-73.95,40.78\n\
             2016-03-02 18:03:00,-73.97,40.76,-73.94,40.76\n"
        );
        let f = write_csv(&body);
        let report = ingest_csv(f.path(), &IngestOptions::default()).unwrap();
        assert_eq!(report.total_rows, 4);
        assert_eq!(report.skipped_malformed, 1);
        assert_eq!(report.workload.len(), 3);
        // Release times count from the window start (first row).
        assert_eq!(report.workload[0].release_time, 0.0);
        assert_eq!(report.workload[1].release_time, 2.0);
        // Sorted and renumbered.
        assert!(report.workload.windows(2).all(|w| w[0].release_time <= w[1].release_time));
        assert_eq!(report.workload[2].id, RequestId(2));
    }

    #[test]
    fn strict_mode_aborts_on_malformed() {
        let body = format!("{HEADER}2016-03-02 18:01:00,bad,40.75,-73.96,40.77\n");
        let f = write_csv(&body);
        let opts = IngestOptions { strict: true, ..IngestOptions::default() };
        assert!(matches!(ingest_csv(f.path(), &opts), Err(DataError::MalformedRow { line: 2, .. })));
    }

    #[test]
    fn bounds_and_window_filter_with_counts() {
        let body = format!(
            "{HEADER}\
             2016-03-02 18:00:00,-73.98,40.75,-73.96,40.77\n\
             2016-03-02 18:10:00,-80.00,40.75,-73.96,40.77\n\
             2016-03-02 23:00:00,-73.98,40.75,-73.96,40.77\n"
        );
        let f = write_csv(&body);
        let opts = IngestOptions {
            bounds: Some(GeoBounds { min_lat: 40.5, min_lon: -74.1, max_lat: 41.0, max_lon: -73.7 }),
            window: Some((
                parse_datetime("2016-03-02 18:00:00").unwrap(),
                parse_datetime("2016-03-02 19:00:00").unwrap(),
            )),
            ..IngestOptions::default()
        };
        let report = ingest_csv(f.path(), &opts).unwrap();
        assert_eq!(report.workload.len(), 1);
        assert_eq!(report.dropped_outside, 2);
    }

    #[test]
    fn missing_column_is_reported_by_name() {
        let f = write_csv("pickup_datetime,pickup_lon,pickup_lat,dropoff_lon\nx,1,2,3\n");
        match ingest_csv(f.path(), &IngestOptions::default()) {
            Err(DataError::MissingColumn(name)) => assert_eq!(name, "dropoff_lat"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn header_remapping_works() {
        let body = "tpep_pickup_datetime,plon,plat,dlon,dlat\n\
                    2016-03-02T18:00:00,-73.98,40.75,-73.96,40.77\n";
        let f = write_csv(body);
        let opts = IngestOptions {
            columns: ColumnMap {
                pickup_datetime: "tpep_pickup_datetime".to_string(),
                pickup_lon: "plon".to_string(),
                pickup_lat: "plat".to_string(),
                dropoff_lon: "dlon".to_string(),
                dropoff_lat: "dlat".to_string(),
            },
            ..IngestOptions::default()
        };
        assert_eq!(ingest_csv(f.path(), &opts).unwrap().workload.len(), 1);
    }

    #[test]
    fn ingestion_is_idempotent() {
        let body = format!(
            "{HEADER}\
             2016-03-02 18:05:00,-73.98,40.75,-73.96,40.77\n\
             2016-03-02 18:00:00,-73.99,40.74,-73.95,40.78\n\
             2016-03-02 18:05:00,-73.97,40.76,-73.94,40.76\n"
        );
        let f = write_csv(&body);
        let a = ingest_csv(f.path(), &IngestOptions::default()).unwrap();
        let b = ingest_csv(f.path(), &IngestOptions::default()).unwrap();
        assert_eq!(a.workload, b.workload);
        // Ties on release time keep file order.
        assert!(a.workload[1].origin.x < a.workload[2].origin.x);
    }
}
