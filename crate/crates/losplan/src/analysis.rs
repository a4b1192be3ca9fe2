//! Line-of-sight evaluation over terrain profiles: direct-ray clearance,
//! effective-earth bulge, first-Fresnel-zone margin, obstacle extraction,
//! and single-knife-edge diffraction loss.
//!
//! Curvature is handled by adding the earth bulge to the terrain rather
//! than bending the ray (the flat-ray representation): clearance at sample
//! `i` is `los_height - terrain - bulge`, and a sample blocks the ray when
//! that goes negative.

use thiserror::Error;

use crate::dem::{DemError, TileStore};
use crate::geodesy::{self, GeodesyError, PathGeometry};
use crate::planner::Site;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Dem(#[from] DemError),
    #[error(transparent)]
    Geodesy(#[from] GeodesyError),
}

/// Evenly sampled elevations along the great-circle path between two sites.
///
/// By convention the profile runs school -> tower: `start` is the school
/// end, sample 0 sits at its coordinates.
#[derive(Debug, Clone)]
pub struct TerrainProfile {
    pub start: Site,
    pub end: Site,
    /// Meters from origin; strictly increasing, `[0] == 0`, last == total length.
    pub distances_m: Vec<f64>,
    /// Terrain meters AMSL per sample.
    pub elevations_m: Vec<f64>,
}

impl TerrainProfile {
    pub fn n_samples(&self) -> usize {
        self.distances_m.len()
    }

    pub fn total_distance_m(&self) -> f64 {
        *self.distances_m.last().expect("profile has >= 2 samples")
    }

    /// Absolute antenna heights (terrain + mast) at the two ends.
    pub fn antenna_heights_amsl(&self) -> (f64, f64) {
        (
            self.elevations_m[0] + self.start.antenna_height_m,
            self.elevations_m[self.elevations_m.len() - 1] + self.end.antenna_height_m,
        )
    }
}

/// Samples the DEM at uniform arc fractions between the two sites.
///
/// `n = max(2, ceil(distance/spacing) + 1)` samples; the endpoint samples
/// are the DEM values at the site coordinates themselves.
pub fn build_profile(
    a: &Site,
    b: &Site,
    store: &TileStore,
    spacing_m: f64,
) -> Result<TerrainProfile, AnalysisError> {
    let total = geodesy::great_circle_distance(a.location, b.location);
    if total <= 0.0 {
        return Err(GeodesyError::CoincidentPoints.into());
    }
    let n = ((total / spacing_m).ceil() as usize + 1).max(2);
    let mut distances = Vec::with_capacity(n);
    let mut elevations = Vec::with_capacity(n);
    for i in 0..n {
        let fraction = i as f64 / (n - 1) as f64;
        let point = geodesy::intermediate_point(a.location, b.location, fraction)?;
        distances.push(total * fraction);
        elevations.push(store.elevation_at(point)?);
    }
    Ok(TerrainProfile {
        start: a.clone(),
        end: b.clone(),
        distances_m: distances,
        elevations_m: elevations,
    })
}

/// Per-sample geometry of the ray against the terrain.
#[derive(Debug, Clone)]
pub struct ClearanceTrace {
    /// Direct-ray height, meters AMSL.
    pub los_height_m: Vec<f64>,
    /// Earth bulge, zero at the endpoints and maximal mid-path.
    pub bulge_m: Vec<f64>,
    /// First-zone Fresnel radius, zero at the endpoints.
    pub fresnel_radius_m: Vec<f64>,
    /// `los_height - terrain - bulge`.
    pub clearance_m: Vec<f64>,
    /// `fresnel_fraction * fresnel_radius`.
    pub required_m: Vec<f64>,
}

/// Radius of Fresnel zone `n` at distances `d1`/`d2` from the endpoints.
pub fn fresnel_radius(zone: u32, freq_hz: f64, d1_m: f64, d2_m: f64) -> f64 {
    debug_assert!(zone >= 1 && freq_hz > 0.0 && d1_m >= 0.0 && d2_m >= 0.0);
    let total = d1_m + d2_m;
    if total <= 0.0 {
        return 0.0;
    }
    let wavelength = SPEED_OF_LIGHT_M_S / freq_hz;
    (f64::from(zone) * wavelength * d1_m * d2_m / total).sqrt()
}

/// Apparent terrain rise from earth curvature under the flat-ray
/// representation: `d1 * d2 / (2 k R)`.
pub fn earth_bulge(d1_m: f64, d2_m: f64, k: f64) -> f64 {
    d1_m * d2_m / (2.0 * k * geodesy::EARTH_RADIUS_M)
}

/// Fresnel-Kirchhoff diffraction parameter for an edge `h` meters above
/// (positive) or below (negative) the ray.
pub fn diffraction_parameter(h_m: f64, d1_m: f64, d2_m: f64, freq_hz: f64) -> f64 {
    let wavelength = SPEED_OF_LIGHT_M_S / freq_hz;
    h_m * (2.0 * (d1_m + d2_m) / (wavelength * d1_m * d2_m)).sqrt()
}

/// ITU-R P.526 single-knife-edge loss approximation J(nu), in dB.
///
/// Zero below the nu = -0.78 validity threshold.
pub fn knife_edge_loss_from_nu(nu: f64) -> f64 {
    if nu <= -0.78 {
        return 0.0;
    }
    6.9 + 20.0 * (((nu - 0.1) * (nu - 0.1) + 1.0).sqrt() + nu - 0.1).log10()
}

/// Diffraction loss over a single obstruction `intrusion_m` above the ray,
/// `d1`/`d2` meters from the two ends.
pub fn knife_edge_loss(intrusion_m: f64, d1_m: f64, d2_m: f64, freq_hz: f64) -> f64 {
    knife_edge_loss_from_nu(diffraction_parameter(intrusion_m, d1_m, d2_m, freq_hz))
}

/// Free-space path loss in dB: `20 log10(d_km) + 20 log10(f_MHz) + 32.44`.
pub fn free_space_path_loss(d_m: f64, freq_hz: f64) -> f64 {
    debug_assert!(d_m > 0.0 && freq_hz > 0.0);
    20.0 * (d_m / 1000.0).log10() + 20.0 * (freq_hz / 1e6).log10() + 32.44
}

/// Computes the ray/bulge/Fresnel series for a profile.
pub fn clearance_trace(
    profile: &TerrainProfile,
    freq_hz: f64,
    fresnel_fraction: f64,
    k: f64,
) -> ClearanceTrace {
    let n = profile.n_samples();
    let total = profile.total_distance_m();
    let (h_start, h_end) = profile.antenna_heights_amsl();
    let mut trace = ClearanceTrace {
        los_height_m: Vec::with_capacity(n),
        bulge_m: Vec::with_capacity(n),
        fresnel_radius_m: Vec::with_capacity(n),
        clearance_m: Vec::with_capacity(n),
        required_m: Vec::with_capacity(n),
    };
    for i in 0..n {
        let d = profile.distances_m[i];
        let remaining = total - d;
        let los = h_start + (h_end - h_start) * (d / total);
        let bulge = earth_bulge(d, remaining, k);
        let fresnel = fresnel_radius(1, freq_hz, d, remaining);
        trace.los_height_m.push(los);
        trace.bulge_m.push(bulge);
        trace.fresnel_radius_m.push(fresnel);
        trace.clearance_m.push(los - profile.elevations_m[i] - bulge);
        trace.required_m.push(fresnel_fraction * fresnel);
    }
    trace
}

/// A maximal contiguous run of samples where the ray is blocked.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub start_index: usize,
    pub end_index: usize,
    /// Sample of deepest intrusion within the run.
    pub peak_index: usize,
    /// Meters the (curvature-corrected) terrain rises above the ray at the
    /// peak; always positive inside a run.
    pub intrusion_m: f64,
}

/// Link verdict, ordered from best to worst.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Ray clear with full configured Fresnel margin everywhere.
    Clear,
    /// Ray clear but the Fresnel band is infringed somewhere.
    Marginal,
    /// Ray blocked by this many distinct obstacles.
    Obstructed(usize),
    /// Could not be analyzed (DEM coverage gap).
    Unevaluated,
}

impl Classification {
    /// Token used in CSV/GeoJSON outputs (obstacle count is a separate column).
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Clear => "CLEAR",
            Classification::Marginal => "MARGINAL",
            Classification::Obstructed(_) => "OBSTRUCTED",
            Classification::Unevaluated => "UNEVALUATED",
        }
    }
}

/// Everything the planner and reports need to know about one school-tower pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkAssessment {
    pub school_id: String,
    pub tower_id: String,
    pub path: PathGeometry,
    pub classification: Classification,
    /// `min(clearance - required)` over the profile; `None` when unevaluated.
    pub min_clearance_margin_m: Option<f64>,
    pub obstacles: Vec<Obstacle>,
    /// Present iff the link has exactly one obstacle.
    pub knife_edge_loss_db: Option<f64>,
    /// Aiming azimuth from the school towards the tower, degrees from north.
    pub azimuth_to_tower_deg: f64,
    /// Curvature-corrected vertical aiming angle from the school antenna.
    pub elevation_to_tower_deg: Option<f64>,
    /// Tile key that prevented evaluation, when classification is Unevaluated.
    pub missing_tile: Option<String>,
}

/// Scans the clearance sign sequence for maximal blocked runs, endpoint
/// samples excluded (the DEM pixel under a mast often sits above its base).
fn extract_obstacles(clearance_m: &[f64]) -> Vec<Obstacle> {
    let n = clearance_m.len();
    let mut obstacles = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 1..n - 1 {
        if clearance_m[i] < 0.0 {
            if run_start.is_none() {
                run_start = Some(i);
            }
        } else if let Some(start) = run_start.take() {
            obstacles.push(finish_run(clearance_m, start, i - 1));
        }
    }
    if let Some(start) = run_start {
        obstacles.push(finish_run(clearance_m, start, n - 2));
    }
    obstacles
}

fn finish_run(clearance_m: &[f64], start: usize, end: usize) -> Obstacle {
    let mut peak = start;
    for i in start..=end {
        if clearance_m[i] < clearance_m[peak] {
            peak = i;
        }
    }
    Obstacle {
        start_index: start,
        end_index: end,
        peak_index: peak,
        intrusion_m: -clearance_m[peak],
    }
}

/// Full LOS verdict for one profile. The profile's `start` site is the
/// school end; aiming angles are computed from it.
pub fn assess_link(
    profile: &TerrainProfile,
    freq_hz: f64,
    fresnel_fraction: f64,
    k: f64,
) -> LinkAssessment {
    let trace = clearance_trace(profile, freq_hz, fresnel_fraction, k);
    let obstacles = extract_obstacles(&trace.clearance_m);
    let min_margin = trace
        .clearance_m
        .iter()
        .zip(&trace.required_m)
        .map(|(c, r)| c - r)
        .fold(f64::INFINITY, f64::min);
    let classification = if !obstacles.is_empty() {
        Classification::Obstructed(obstacles.len())
    } else if min_margin < 0.0 {
        Classification::Marginal
    } else {
        Classification::Clear
    };
    let total = profile.total_distance_m();
    let knife_edge_loss_db = if obstacles.len() == 1 {
        let peak = &obstacles[0];
        let d1 = profile.distances_m[peak.peak_index];
        Some(knife_edge_loss(peak.intrusion_m, d1, total - d1, freq_hz))
    } else {
        None
    };
    let (h_start, h_end) = profile.antenna_heights_amsl();
    let path = PathGeometry::between(profile.start.location, profile.end.location)
        .expect("profile endpoints are distinct");
    LinkAssessment {
        school_id: profile.start.id.clone(),
        tower_id: profile.end.id.clone(),
        path,
        classification,
        min_clearance_margin_m: Some(min_margin),
        obstacles,
        knife_edge_loss_db,
        azimuth_to_tower_deg: path.azimuth_fwd_deg,
        elevation_to_tower_deg: Some(
            geodesy::elevation_angle(total, h_start, h_end, k)
                .expect("profile has positive length"),
        ),
        missing_tile: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{Site, SiteKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const FREQ: f64 = 5.0e9;
    const K: f64 = 4.0 / 3.0;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "left={a} right={b} tol={tol}");
    }

    fn site(id: &str, lat: f64, lon: f64, height: f64, kind: SiteKind) -> Site {
        Site {
            id: id.into(),
            location: crate::geodesy::GeoPoint::new(lat, lon).unwrap(),
            antenna_height_m: height,
            kind,
        }
    }

    /// Profile with explicit distance/elevation vectors; sites only carry
    /// the antenna heights and distinct coordinates.
    fn synthetic_profile(total_m: f64, elevations: Vec<f64>, h_school: f64, h_tower: f64) -> TerrainProfile {
        let n = elevations.len();
        let distances = (0..n).map(|i| total_m * i as f64 / (n - 1) as f64).collect();
        TerrainProfile {
            start: site("school", 0.0, 0.0, h_school, SiteKind::PrimarySchool),
            end: site(
                "tower",
                0.0,
                total_m / 111_194.9,
                h_tower,
                SiteKind::Tower,
            ),
            distances_m: distances,
            elevations_m: elevations,
        }
    }

    #[test]
    fn fresnel_radius_reference_values() {
        approx(fresnel_radius(1, FREQ, 5_000.0, 5_000.0), 12.243_2, 0.01);
        approx(fresnel_radius(1, FREQ, 15_500.0, 15_500.0), 21.556_4, 0.02);
        assert_eq!(fresnel_radius(1, FREQ, 0.0, 10_000.0), 0.0);
    }

    #[test]
    fn earth_bulge_reference_values() {
        approx(earth_bulge(25_000.0, 25_000.0, K), 36.79, 0.1);
        approx(earth_bulge(15_500.0, 15_500.0, K), 14.14, 0.1);
        assert_eq!(earth_bulge(0.0, 31_000.0, K), 0.0);
    }

    #[test]
    fn knife_edge_reference_values() {
        // J evaluated from the stated approximation.
        approx(knife_edge_loss_from_nu(0.0), 6.032_85, 0.01);
        approx(knife_edge_loss_from_nu(1.0), 13.925_73, 0.01);
        assert_eq!(knife_edge_loss_from_nu(-1.0), 0.0);
        assert_eq!(knife_edge_loss_from_nu(-0.78), 0.0);
    }

    #[test]
    fn knife_edge_loss_composes_nu() {
        // h chosen so nu == 1 exactly.
        let d1 = 4_000.0;
        let d2 = 9_000.0;
        let h = 1.0 / (2.0 * (d1 + d2) / ((SPEED_OF_LIGHT_M_S / FREQ) * d1 * d2)).sqrt();
        approx(knife_edge_loss(h, d1, d2, FREQ), knife_edge_loss_from_nu(1.0), 1e-9);
    }

    #[test]
    fn knife_edge_monotone_in_nu() {
        let mut prev = f64::NEG_INFINITY;
        let mut nu = -0.78;
        while nu <= 5.0 {
            let j = knife_edge_loss_from_nu(nu);
            assert!(j >= prev - 1e-12, "J decreased at nu={nu}");
            prev = j;
            nu += 0.01;
        }
    }

    #[test]
    fn fspl_reference_values() {
        approx(free_space_path_loss(31_000.0, FREQ), 136.246_6, 0.05);
        approx(free_space_path_loss(1_000.0, 1e6), 32.44, 1e-9);
        let doubled = free_space_path_loss(2_000.0, 1e6) - free_space_path_loss(1_000.0, 1e6);
        approx(doubled, 6.020_6, 0.01);
    }

    #[test]
    fn flat_terrain_ten_km_is_clear() {
        // Tower 30 m, school 10 m, 10 km, flat 0 m terrain: max bulge 1.47 m,
        // max required 7.35 m, worst margin comfortably positive.
        let profile = synthetic_profile(10_000.0, vec![0.0; 335], 10.0, 30.0);
        let a = assess_link(&profile, FREQ, 0.6, K);
        assert_eq!(a.classification, Classification::Clear);
        assert!(a.obstacles.is_empty());
        assert!(a.min_clearance_margin_m.unwrap() > 0.0);
        assert!(a.knife_edge_loss_db.is_none());
        let trace = clearance_trace(&profile, FREQ, 0.6, K);
        approx(trace.bulge_m[167], 1.471_5, 0.01);
        approx(trace.required_m[167], 7.345_9, 0.01);
    }

    #[test]
    fn single_hill_is_obstructed_with_expected_intrusion() {
        // Flat 0 m terrain with a triangular hill around mid-path whose
        // effective peak pokes 5 m above the ray.
        let n = 335;
        let total = 10_000.0;
        let h_school = 10.0;
        let h_tower = 30.0;
        let mid = (n - 1) / 2;
        let d_mid = total * mid as f64 / (n - 1) as f64;
        let los_mid = h_school + (h_tower - h_school) * d_mid / total;
        let apex = los_mid - earth_bulge(d_mid, total - d_mid, K) + 5.0;
        let half_width = 20usize; // samples each side
        let mut elev = vec![0.0; n];
        for (offset, e) in elev[mid - half_width..=mid + half_width].iter_mut().enumerate() {
            let t = 1.0 - (offset as f64 - half_width as f64).abs() / half_width as f64;
            *e = apex * t;
        }
        let profile = synthetic_profile(total, elev, h_school, h_tower);
        let a = assess_link(&profile, FREQ, 0.6, K);
        assert_eq!(a.classification, Classification::Obstructed(1));
        assert_eq!(a.obstacles.len(), 1);
        assert_eq!(a.obstacles[0].peak_index, mid);
        approx(a.obstacles[0].intrusion_m, 5.0, 1e-9);
        assert!(a.knife_edge_loss_db.unwrap() > 6.0);
    }

    #[test]
    fn fresnel_infringed_but_ray_clear_is_marginal() {
        // Mid-path clearance +2 m against required 7.35 m.
        let n = 335;
        let total = 10_000.0;
        let mid = (n - 1) / 2;
        let mut elev = vec![0.0; n];
        let d_mid = total * 0.5;
        let los_mid = 10.0 + (30.0 - 10.0) * 0.5;
        elev[mid] = los_mid - earth_bulge(d_mid, d_mid, K) - 2.0;
        let profile = synthetic_profile(total, elev, 10.0, 30.0);
        let a = assess_link(&profile, FREQ, 0.6, K);
        assert_eq!(a.classification, Classification::Marginal);
        assert!(a.obstacles.is_empty());
        approx(a.min_clearance_margin_m.unwrap(), 2.0 - 7.345_9, 0.02);
    }

    #[test]
    fn build_profile_sample_counts() {
        use tempfile::TempDir;
        let dir = TempDir::new().unwrap();
        let samples = vec![0i16; 1201 * 1201];
        crate::dem::write_tile(&dir.path().join("N00E000.hgt"), 1201, &samples).unwrap();
        let store = TileStore::new(dir.path(), crate::dem::VoidPolicy::default());

        let a = site("s", 0.2, 0.1, 10.0, SiteKind::PrimarySchool);
        let lon_31km = 0.1 + 31_000.0 / (crate::geodesy::EARTH_RADIUS_M * 1.0f64.to_radians());
        let b = site("t", 0.2, lon_31km, 25.0, SiteKind::Tower);
        let profile = build_profile(&a, &b, &store, 30.0).unwrap();
        assert_eq!(profile.n_samples(), 1035);
        assert!(profile.elevations_m.iter().all(|&e| e == 0.0));
        approx(profile.total_distance_m(), 31_000.0, 1.0);

        // 10 m path floors at the two endpoint samples.
        let c = site("u", 0.2, 0.1 + 10.0 / 111_195.0, 10.0, SiteKind::PrimarySchool);
        let short = build_profile(&a, &c, &store, 30.0).unwrap();
        assert_eq!(short.n_samples(), 2);
    }

    #[test]
    fn build_profile_propagates_missing_tile() {
        use tempfile::TempDir;
        let dir = TempDir::new().unwrap();
        let store = TileStore::new(dir.path(), crate::dem::VoidPolicy::default());
        let a = site("s", 0.2, 0.1, 10.0, SiteKind::PrimarySchool);
        let b = site("t", 0.2, 0.4, 25.0, SiteKind::Tower);
        match build_profile(&a, &b, &store, 30.0) {
            Err(AnalysisError::Dem(DemError::MissingTile { key })) => assert_eq!(key, "N00E000"),
            other => panic!("expected MissingTile, got {other:?}"),
        }
    }

    #[test]
    fn reversal_preserves_classification_and_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
        for _ in 0..100 {
            let n = rng.gen_range(10..200);
            let total = rng.gen_range(2_000.0..45_000.0);
            let base: f64 = rng.gen_range(0.0..500.0);
            let elev: Vec<f64> = (0..n)
                .map(|_| base + rng.gen_range(-30.0..60.0))
                .collect();
            let fwd = synthetic_profile(total, elev.clone(), 10.0, 30.0);
            let mut rev_elev = elev;
            rev_elev.reverse();
            let mut rev = synthetic_profile(total, rev_elev, 30.0, 10.0);
            std::mem::swap(&mut rev.start, &mut rev.end);
            // swap put the tower (30 m) first; heights must mirror exactly
            rev.start.antenna_height_m = 30.0;
            rev.end.antenna_height_m = 10.0;

            let fa = assess_link(&fwd, FREQ, 0.6, K);
            let ra = assess_link(&rev, FREQ, 0.6, K);
            assert_eq!(fa.classification, ra.classification);
            approx(
                fa.min_clearance_margin_m.unwrap(),
                ra.min_clearance_margin_m.unwrap(),
                1e-6,
            );
        }
    }

    #[test]
    fn raising_both_antennas_never_hurts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xcafe);
        for _ in 0..100 {
            let n = rng.gen_range(10..150);
            let total = rng.gen_range(2_000.0..45_000.0);
            let elev: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..120.0)).collect();
            let lift = rng.gen_range(0.1..40.0);
            let low = synthetic_profile(total, elev.clone(), 10.0, 30.0);
            let high = synthetic_profile(total, elev, 10.0 + lift, 30.0 + lift);
            let m_low = assess_link(&low, FREQ, 0.6, K).min_clearance_margin_m.unwrap();
            let m_high = assess_link(&high, FREQ, 0.6, K).min_clearance_margin_m.unwrap();
            assert!(m_high >= m_low - 1e-9, "lift {lift} lowered margin {m_low} -> {m_high}");
        }
    }

    #[test]
    fn obstacle_runs_match_brute_force_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xbeef);
        for _ in 0..200 {
            let n = rng.gen_range(3..=200);
            let total = rng.gen_range(1_000.0..40_000.0);
            let elev: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..80.0)).collect();
            let profile = synthetic_profile(total, elev, 10.0, 30.0);
            let got = assess_link(&profile, FREQ, 0.6, K).obstacles;

            // Independent scan: recompute the clearance signs sample by
            // sample and collect maximal negative runs.
            let (h0, h1) = profile.antenna_heights_amsl();
            let blocked: Vec<bool> = (0..n)
                .map(|i| {
                    let d = profile.distances_m[i];
                    let los = h0 + (h1 - h0) * d / total;
                    let c = los
                        - profile.elevations_m[i]
                        - d * (total - d) / (2.0 * K * crate::geodesy::EARTH_RADIUS_M);
                    c < 0.0
                })
                .collect();
            let mut want: Vec<(usize, usize)> = Vec::new();
            let mut i = 1;
            while i + 1 < n {
                if blocked[i] {
                    let s = i;
                    while i + 1 < n && blocked[i] {
                        i += 1;
                    }
                    want.push((s, i - 1));
                } else {
                    i += 1;
                }
            }
            let got_runs: Vec<(usize, usize)> =
                got.iter().map(|o| (o.start_index, o.end_index)).collect();
            assert_eq!(got_runs, want);
            for o in &got {
                assert!(o.intrusion_m > 0.0);
                assert!(o.start_index <= o.peak_index && o.peak_index <= o.end_index);
            }
        }
    }

    #[test]
    fn fresnel_radius_peaks_nearest_midpath() {
        let profile = synthetic_profile(14_000.0, vec![0.0; 101], 10.0, 30.0);
        let trace = clearance_trace(&profile, FREQ, 0.6, K);
        let argmax = trace
            .fresnel_radius_m
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 50);
        let bulge_argmax = trace
            .bulge_m
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(bulge_argmax, 50);
        assert_eq!(trace.fresnel_radius_m[0], 0.0);
        assert_eq!(*trace.fresnel_radius_m.last().unwrap(), 0.0);
        assert_eq!(trace.bulge_m[0], 0.0);
        assert_eq!(*trace.bulge_m.last().unwrap(), 0.0);
    }

    #[test]
    fn zero_fresnel_fraction_never_classifies_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xabcd);
        for _ in 0..200 {
            let n = rng.gen_range(3..120);
            let total = rng.gen_range(1_000.0..40_000.0);
            let elev: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..80.0)).collect();
            let profile = synthetic_profile(total, elev, 10.0, 30.0);
            let a = assess_link(&profile, FREQ, 0.0, K);
            assert_ne!(a.classification, Classification::Marginal);
        }
    }
}
