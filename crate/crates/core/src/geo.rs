//! Great-circle geometry on a spherical Earth.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Mean Earth radius in meters, used for every distance in the crate.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn distance(self, other: LatLon) -> f64 {
        haversine((self.lat, self.lon), (other.lat, other.lon))
    }

    /// Point displaced `north_m` / `east_m` meters using a local
    /// equirectangular approximation around `self`.
    pub fn offset(self, north_m: f64, east_m: f64) -> LatLon {
        let lat = self.lat + (north_m / EARTH_RADIUS_M).to_degrees();
        let lon = self.lon + (east_m / (EARTH_RADIUS_M * lat.to_radians().cos())).to_degrees();
        LatLon { lat, lon }
    }

    /// Linear interpolation in coordinate space.
    pub fn lerp(self, other: LatLon, f: f64) -> LatLon {
        LatLon {
            lat: self.lat + (other.lat - self.lat) * f,
            lon: self.lon + (other.lon - self.lon) * f,
        }
    }
}

/// Haversine great-circle distance in meters between two `(lat, lon)` pairs
/// given in degrees.
pub fn haversine<T: Scalar>(p: (T, T), q: (T, T)) -> T {
    let two = T::of(2.0);
    let phi1 = p.0.to_radians();
    let phi2 = q.0.to_radians();
    let dphi = (q.0 - p.0).to_radians();
    let dlambda = (q.1 - p.1).to_radians();
    let a = (dphi / two).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / two).sin().powi(2);
    // rounding can push `a` a hair above 1 for antipodal points
    let a = a.min(T::one()).max(T::zero());
    two * T::of(EARTH_RADIUS_M) * a.sqrt().asin()
}

/// Total haversine length of a polyline.
pub fn polyline_length(points: &[LatLon]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Cumulative haversine arc length at each vertex (first entry is 0).
pub fn cumulative_lengths(points: &[LatLon]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(points.len());
    out.push(0.0);
    for w in points.windows(2) {
        acc += w[0].distance(w[1]);
        out.push(acc);
    }
    out
}

/// Point at arc-length fraction `f` in `[0, 1]` along a polyline.
pub fn point_at_fraction(points: &[LatLon], cum: &[f64], f: f64) -> LatLon {
    let total = *cum.last().unwrap_or(&0.0);
    if points.len() == 1 || total <= 0.0 {
        return points[0];
    }
    let target = f.clamp(0.0, 1.0) * total;
    // last segment whose start is <= target
    let seg = match cum.partition_point(|&c| c <= target) {
        0 => 0,
        i => (i - 1).min(points.len() - 2),
    };
    let len = cum[seg + 1] - cum[seg];
    let local = if len > 0.0 {
        ((target - cum[seg]) / len).clamp(0.0, 1.0)
    } else {
        0.0
    };
    points[seg].lerp(points[seg + 1], local)
}

/// Arc-length fraction in `[0, 1]` of the point on the polyline closest to
/// `p`, using a local planar projection per segment.
pub fn project_fraction(points: &[LatLon], cum: &[f64], p: LatLon) -> f64 {
    let total = *cum.last().unwrap_or(&0.0);
    if points.len() < 2 || total <= 0.0 {
        return 0.0;
    }
    let mut best = (f64::INFINITY, 0.0);
    for (s, w) in points.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let kx = a.lat.to_radians().cos();
        let (bx, by) = ((b.lon - a.lon) * kx, b.lat - a.lat);
        let (px, py) = ((p.lon - a.lon) * kx, p.lat - a.lat);
        let denom = bx * bx + by * by;
        let t = if denom > 0.0 {
            ((px * bx + py * by) / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (dx, dy) = (px - t * bx, py - t * by);
        let d2 = dx * dx + dy * dy;
        if d2 < best.0 {
            best = (d2, cum[s] + t * (cum[s + 1] - cum[s]));
        }
    }
    (best.1 / total).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_points_are_zero_apart() {
        assert_eq!(haversine((48.72, 21.26), (48.72, 21.26)), 0.0);
    }

    #[test]
    fn one_degree_of_longitude_on_equator() {
        // spherical law of cosines: R * acos(cos(1 deg))
        let oracle = EARTH_RADIUS_M * 1f64.to_radians();
        let d = haversine((0.0, 0.0), (0.0, 1.0));
        assert!((d - oracle).abs() < 1e-6);
        assert!((d - 111_195.0).abs() < 5.0);
    }

    #[test]
    fn symmetric() {
        let a = haversine((48.72, 21.26), (48.72, 21.27));
        let b = haversine((48.72, 21.27), (48.72, 21.26));
        assert_eq!(a, b);
    }

    #[test]
    fn f32_and_f64_agree_roughly() {
        let d64 = haversine((0.0f64, 0.0), (0.0, 1.0));
        let d32 = haversine((0.0f32, 0.0), (0.0, 1.0));
        assert!((d64 - d32 as f64).abs() < 5.0);
    }

    #[test]
    fn offset_round_trips_distance() {
        let o = LatLon::new(48.72, 21.26);
        assert!((o.distance(o.offset(100.0, 0.0)) - 100.0).abs() < 0.01);
        assert!((o.distance(o.offset(0.0, 100.0)) - 100.0).abs() < 0.01);
    }

    #[test]
    fn fraction_and_projection_are_inverse() {
        let pts = vec![
            LatLon::new(48.0, 21.0),
            LatLon::new(48.001, 21.0),
            LatLon::new(48.001, 21.002),
        ];
        let cum = cumulative_lengths(&pts);
        for f in [0.0, 0.1, 0.3, 0.5, 0.77, 1.0] {
            let p = point_at_fraction(&pts, &cum, f);
            let g = project_fraction(&pts, &cum, p);
            assert!((f - g).abs() < 1e-6, "{f} vs {g}");
        }
    }
}
