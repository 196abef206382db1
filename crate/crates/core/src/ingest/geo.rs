/// Mean Earth radius in statute miles.
pub const EARTH_RADIUS_MI: f64 = 3958.8;

/// Great-circle distance in miles between two points given in degrees,
/// by the haversine formula on a sphere of radius [`EARTH_RADIUS_MI`].
pub fn haversine_gcd(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    // clamp guards asin against a > 1 from rounding near antipodes
    2.0 * EARTH_RADIUS_MI * a.sqrt().min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Spherical law of cosines; independent of the haversine route.
    fn law_of_cosines(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
        let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
        let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * (lon2 - lon1).to_radians().cos();
        EARTH_RADIUS_MI * c.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn identical_points() {
        assert_eq!(haversine_gcd(40.75, -73.99, 40.75, -73.99), 0.0);
    }

    #[test]
    fn antipodal_on_equator_is_half_circumference() {
        let d = haversine_gcd(0.0, 0.0, 0.0, 180.0);
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_MI).abs() < 1e-9);
        assert!((d - 12437.0).abs() < 0.1);
    }

    #[test]
    fn midtown_pair_matches_law_of_cosines() {
        // 40-digit law-of-cosines evaluation of this pair
        let frozen = 1.083_543_793_544_072;
        let d = haversine_gcd(40.7536, -73.9772, 40.7411, -73.9897);
        assert!((d - frozen).abs() < 1e-6, "{d}");
        let oracle = law_of_cosines(40.7536, -73.9772, 40.7411, -73.9897);
        assert!((d - oracle).abs() < 1e-6);
    }

    fn coord() -> impl Strategy<Value = (f64, f64)> {
        (-90.0..=90.0f64, -180.0..=180.0f64)
    }

    proptest! {
        #[test]
        fn symmetric_and_nonnegative(a in coord(), b in coord()) {
            let ab = haversine_gcd(a.0, a.1, b.0, b.1);
            let ba = haversine_gcd(b.0, b.1, a.0, a.1);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-9);
        }

        #[test]
        fn triangle_inequality(a in coord(), b in coord(), c in coord()) {
            let ab = haversine_gcd(a.0, a.1, b.0, b.1);
            let bc = haversine_gcd(b.0, b.1, c.0, c.1);
            let ac = haversine_gcd(a.0, a.1, c.0, c.1);
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn agrees_with_law_of_cosines_for_city_scale(
            lat in 40.5..41.0f64, lon in -74.1..-73.7f64,
            dlat in -0.1..0.1f64, dlon in -0.1..0.1f64,
        ) {
            let h = haversine_gcd(lat, lon, lat + dlat, lon + dlon);
            let l = law_of_cosines(lat, lon, lat + dlat, lon + dlon);
            // acos loses ~sqrt(eps) near zero distance
            prop_assert!((h - l).abs() < 1e-4);
        }
    }
}
