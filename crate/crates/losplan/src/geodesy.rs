//! Spherical-earth geodesic primitives: great-circle distance, bearings,
//! intermediate points along an arc, and curvature-corrected elevation angles.
//!
//! All angles at the API boundary are degrees; meters everywhere else.
//! The earth is a sphere of mean radius [`EARTH_RADIUS_M`]; at the ≤ 50 km
//! ranges this tool plans for, the spherical error is far below DEM
//! vertical noise.

use thiserror::Error;

/// Mean earth radius in meters (IUGG mean radius R1).
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesyError {
    /// The two points coincide, so the quantity (bearing, arc sampling) is undefined.
    #[error("coincident points: azimuth/arc undefined")]
    CoincidentPoints,
    /// A zero path length was passed where a positive distance is required.
    #[error("zero distance: elevation angle undefined")]
    ZeroDistance,
}

/// A geodetic coordinate on the spherical earth model.
///
/// Latitude in [-90, +90] degrees; longitude normalized to [-180, +180).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    lat_deg: f64,
    lon_deg: f64,
}

impl GeoPoint {
    /// Builds a point, normalizing longitude into [-180, +180).
    ///
    /// Returns `None` for out-of-range or non-finite latitude.
    pub fn new(lat_deg: f64, lon_deg: f64) -> Option<Self> {
        if !lat_deg.is_finite() || !lon_deg.is_finite() || !(-90.0..=90.0).contains(&lat_deg) {
            return None;
        }
        Some(GeoPoint {
            lat_deg,
            lon_deg: normalize_lon(lon_deg),
        })
    }

    pub fn lat(&self) -> f64 {
        self.lat_deg
    }

    pub fn lon(&self) -> f64 {
        self.lon_deg
    }

    fn to_radians(self) -> (f64, f64) {
        (self.lat_deg.to_radians(), self.lon_deg.to_radians())
    }
}

/// Wraps a longitude into [-180, +180). In-range values pass through
/// untouched so user coordinates survive bit-for-bit into the outputs.
fn normalize_lon(lon: f64) -> f64 {
    if (-180.0..180.0).contains(&lon) {
        return lon;
    }
    let mut l = (lon + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can land on +180.0 exactly when the input is e.g. 180.0 - eps
    // rounded up; keep the half-open convention.
    if l >= 180.0 {
        l -= 360.0;
    }
    l
}

/// End-to-end geometry of one great-circle path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    /// Great-circle length in meters.
    pub total_distance_m: f64,
    /// Forward azimuth at the start point, degrees clockwise from north in [0, 360).
    pub azimuth_fwd_deg: f64,
    /// Forward azimuth at the end point looking back, degrees in [0, 360).
    pub azimuth_rev_deg: f64,
}

impl PathGeometry {
    /// Distance plus both azimuths for the path `a -> b`.
    pub fn between(a: GeoPoint, b: GeoPoint) -> Result<Self, GeodesyError> {
        Ok(PathGeometry {
            total_distance_m: great_circle_distance(a, b),
            azimuth_fwd_deg: initial_bearing(a, b)?,
            azimuth_rev_deg: initial_bearing(b, a)?,
        })
    }
}

/// Haversine great-circle distance in meters.
///
/// Symmetric in its arguments (the expression is term-for-term symmetric)
/// and zero iff the points coincide after longitude normalization.
pub fn great_circle_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let (lat1, lon1) = a.to_radians();
    let (lat2, lon2) = b.to_radians();
    let half_dlat = (lat2 - lat1) * 0.5;
    let half_dlon = (lon2 - lon1) * 0.5;
    let h = half_dlat.sin() * half_dlat.sin()
        + lat1.cos() * lat2.cos() * half_dlon.sin() * half_dlon.sin();
    let central = 2.0 * h.sqrt().atan2((1.0 - h).sqrt());
    EARTH_RADIUS_M * central
}

/// Forward azimuth from `a` towards `b`, degrees clockwise from true north in [0, 360).
pub fn initial_bearing(a: GeoPoint, b: GeoPoint) -> Result<f64, GeodesyError> {
    if a == b {
        return Err(GeodesyError::CoincidentPoints);
    }
    let (lat1, lon1) = a.to_radians();
    let (lat2, lon2) = b.to_radians();
    let dlon = lon2 - lon1;
    let y = dlon.sin() * lat2.cos();
    let x = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
    let deg = y.atan2(x).to_degrees();
    let mut norm = deg.rem_euclid(360.0);
    if norm >= 360.0 {
        norm = 0.0;
    }
    Ok(norm)
}

/// Point at `fraction` of the great-circle arc from `a` to `b`.
///
/// Fraction 0 returns `a` exactly and fraction 1 returns `b` exactly, so
/// profile endpoints match the site coordinates bit-for-bit.
pub fn intermediate_point(a: GeoPoint, b: GeoPoint, fraction: f64) -> Result<GeoPoint, GeodesyError> {
    if a == b {
        return Err(GeodesyError::CoincidentPoints);
    }
    debug_assert!((0.0..=1.0).contains(&fraction));
    if fraction == 0.0 {
        return Ok(a);
    }
    if fraction == 1.0 {
        return Ok(b);
    }
    let (lat1, lon1) = a.to_radians();
    let (lat2, lon2) = b.to_radians();
    let delta = great_circle_distance(a, b) / EARTH_RADIUS_M;
    let sin_delta = delta.sin();
    if sin_delta == 0.0 {
        // Identical after rounding, or exactly antipodal; either way no
        // unique arc exists.
        return Err(GeodesyError::CoincidentPoints);
    }
    let wa = ((1.0 - fraction) * delta).sin() / sin_delta;
    let wb = (fraction * delta).sin() / sin_delta;
    let x = wa * lat1.cos() * lon1.cos() + wb * lat2.cos() * lon2.cos();
    let y = wa * lat1.cos() * lon1.sin() + wb * lat2.cos() * lon2.sin();
    let z = wa * lat1.sin() + wb * lat2.sin();
    let lat = z.atan2((x * x + y * y).sqrt());
    let lon = y.atan2(x);
    Ok(GeoPoint {
        lat_deg: lat.to_degrees(),
        lon_deg: normalize_lon(lon.to_degrees()),
    })
}

/// Vertical aiming angle in degrees from the local horizontal at the start
/// of a path of length `d` meters, between absolute heights `h_start` and
/// `h_end` (meters AMSL), under effective-earth factor `k`.
///
/// The second term drops the far end by the effective-earth curvature at
/// range `d`; pass `k = f64::INFINITY` for the flat-earth slope alone.
pub fn elevation_angle(d_m: f64, h_start_m: f64, h_end_m: f64, k: f64) -> Result<f64, GeodesyError> {
    if d_m <= 0.0 {
        return Err(GeodesyError::ZeroDistance);
    }
    let slope = (h_end_m - h_start_m) / d_m;
    let curvature = d_m / (2.0 * k * EARTH_RADIUS_M);
    Ok((slope - curvature).atan().to_degrees())
}

/// Destination point at `distance_m` along `bearing_deg` from `start`.
///
/// Used to trace coverage-radius circles on the map outputs.
pub fn destination_point(start: GeoPoint, bearing_deg: f64, distance_m: f64) -> GeoPoint {
    let (lat1, lon1) = start.to_radians();
    let delta = distance_m / EARTH_RADIUS_M;
    let theta = bearing_deg.to_radians();
    let lat2 = (lat1.sin() * delta.cos() + lat1.cos() * delta.sin() * theta.cos()).asin();
    let lon2 = lon1
        + (theta.sin() * delta.sin() * lat1.cos()).atan2(delta.cos() - lat1.sin() * lat2.sin());
    GeoPoint {
        lat_deg: lat2.to_degrees(),
        lon_deg: normalize_lon(lon2.to_degrees()),
    }
}
