//! Equirectangular projection between geographic degrees and local planar
//! kilometers, anchored at a reference point. Adequate at city scale and
//! trivially invertible.

use crate::model::Point;
use serde::{Deserialize, Serialize};

pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// A latitude/longitude box, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoBounds {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl GeoBounds {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        lat >= self.min_lat && lat <= self.max_lat && lon >= self.min_lon && lon <= self.max_lon
    }

    pub fn centroid(&self) -> (f64, f64) {
        (0.5 * (self.min_lat + self.max_lat), 0.5 * (self.min_lon + self.max_lon))
    }
}

/// Planar frame anchored at (`anchor_lat`, `anchor_lon`): x is east, y is
/// north, both in kilometers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub anchor_lat: f64,
    pub anchor_lon: f64,
}

impl Projection {
    pub fn new(anchor_lat: f64, anchor_lon: f64) -> Self {
        Projection { anchor_lat, anchor_lon }
    }

    pub fn to_km(&self, lat: f64, lon: f64) -> Point {
        let scale = self.anchor_lat.to_radians().cos();
        Point::new(
            EARTH_RADIUS_KM * scale * (lon - self.anchor_lon).to_radians(),
            EARTH_RADIUS_KM * (lat - self.anchor_lat).to_radians(),
        )
    }

    pub fn to_geo(&self, p: Point) -> (f64, f64) {
        let scale = self.anchor_lat.to_radians().cos();
        (
            self.anchor_lat + (p.y / EARTH_RADIUS_KM).to_degrees(),
            self.anchor_lon + (p.x / (EARTH_RADIUS_KM * scale)).to_degrees(),
        )
    }
}
