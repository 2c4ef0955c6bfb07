use thiserror::Error;

/// Mean Earth radius used for all great-circle distances.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        if !(-90.0..=90.0).contains(&self.lat) || !(-180.0..=180.0).contains(&self.lon) {
            return Err(GeoError::OutOfRange { lat: self.lat, lon: self.lon });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeoError {
    #[error("coordinate out of range: lat {lat}, lon {lon}")]
    OutOfRange { lat: f64, lon: f64 },
    #[error("degenerate region: zero area")]
    DegenerateRegion,
}

/// Great-circle distance in meters.
pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> Result<f64, GeoError> {
    a.validate()?;
    b.validate()?;
    Ok(haversine_unchecked(a, b))
}

pub(crate) fn haversine_unchecked(a: GeoPoint, b: GeoPoint) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let s1 = libm::sin(dlat / 2.0);
    let s2 = libm::sin(dlon / 2.0);
    let h = s1 * s1 + libm::cos(lat1) * libm::cos(lat2) * s2 * s2;
    2.0 * EARTH_RADIUS_M * libm::asin(libm::sqrt(h.min(1.0)))
}

/// Axis-aligned latitude/longitude box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: GeoPoint,
    pub max: GeoPoint,
}

impl BoundingBox {
    pub fn new(min: GeoPoint, max: GeoPoint) -> Result<Self, GeoError> {
        min.validate()?;
        max.validate()?;
        if !(max.lat > min.lat && max.lon > min.lon) {
            return Err(GeoError::DegenerateRegion);
        }
        Ok(Self { min, max })
    }

    /// Roughly the New York City area.
    pub fn nyc() -> Self {
        Self { min: GeoPoint::new(40.60, -74.05), max: GeoPoint::new(40.85, -73.75) }
    }

    pub fn centroid(&self) -> GeoPoint {
        GeoPoint::new((self.min.lat + self.max.lat) / 2.0, (self.min.lon + self.max.lon) / 2.0)
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        (self.min.lat..=self.max.lat).contains(&p.lat) && (self.min.lon..=self.max.lon).contains(&p.lon)
    }

    /// Point at fractional coordinates `(u, v)` in `[0, 1]^2`.
    pub fn lerp(&self, u: f64, v: f64) -> GeoPoint {
        GeoPoint::new(
            self.min.lat + v * (self.max.lat - self.min.lat),
            self.min.lon + u * (self.max.lon - self.min.lon),
        )
    }

    /// Fractional coordinates of `p`, clamped to the box.
    pub fn unit_coords(&self, p: GeoPoint) -> (f64, f64) {
        let u = (p.lon - self.min.lon) / (self.max.lon - self.min.lon);
        let v = (p.lat - self.min.lat) / (self.max.lat - self.min.lat);
        (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0))
    }

    /// Index of the grid cell containing `p` in an `nx` by `ny` partition.
    pub fn cell(&self, p: GeoPoint, nx: usize, ny: usize) -> usize {
        let (u, v) = self.unit_coords(p);
        let ix = ((u * nx as f64) as usize).min(nx - 1);
        let iy = ((v * ny as f64) as usize).min(ny - 1);
        iy * nx + ix
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coincident_points_are_zero() {
        let p = GeoPoint::new(40.7, -74.0);
        assert_eq!(haversine_m(p, p).unwrap(), 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        let bad = GeoPoint::new(91.0, 0.0);
        assert!(matches!(
            haversine_m(bad, GeoPoint::default()),
            Err(GeoError::OutOfRange { .. })
        ));
        assert!(haversine_m(GeoPoint::default(), GeoPoint::new(0.0, -181.0)).is_err());
    }

    // One degree of latitude along a meridian is R * pi / 180.
    #[test]
    fn meridian_degree() {
        let d = haversine_m(GeoPoint::new(10.0, 20.0), GeoPoint::new(11.0, 20.0)).unwrap();
        let expected = EARTH_RADIUS_M * core::f64::consts::PI / 180.0;
        assert!((d - expected).abs() < 1e-6);
    }

    #[test]
    fn cell_index_clamps() {
        let bb = BoundingBox::nyc();
        assert_eq!(bb.cell(bb.min, 4, 4), 0);
        assert_eq!(bb.cell(bb.max, 4, 4), 15);
        assert_eq!(bb.cell(GeoPoint::new(0.0, 0.0), 4, 4), 3);
    }

    #[test]
    fn degenerate_box() {
        let p = GeoPoint::new(40.0, -74.0);
        assert_eq!(BoundingBox::new(p, p), Err(GeoError::DegenerateRegion));
    }
}
