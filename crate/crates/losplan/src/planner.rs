//! Batch orchestration: enumerate school-tower candidates inside the
//! coverage radius, assess every pair (in parallel when the `parallel`
//! feature is on), and pick each school's serving tower.
//!
//! Determinism is a hard contract here: every pair is assessed
//! independently, results are collected in candidate order, and no numeric
//! path reduces across pairs, so the output is bitwise identical for any
//! worker count.

use std::collections::BTreeMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::analysis::{self, AnalysisError, Classification, LinkAssessment};
use crate::dem::{DemError, TileStore};
use crate::geodesy::{self, GeoPoint, PathGeometry};

/// What a site is; towers serve, schools get served.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteKind {
    Tower,
    PrimarySchool,
    SecondarySchool,
}

impl SiteKind {
    pub fn label(&self) -> &'static str {
        match self {
            SiteKind::Tower => "tower",
            SiteKind::PrimarySchool => "primary",
            SiteKind::SecondarySchool => "secondary",
        }
    }
}

/// A tower or school: id, position, mast height above ground.
#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: String,
    pub location: GeoPoint,
    pub antenna_height_m: f64,
    pub kind: SiteKind,
}

/// One school-tower pairing to evaluate, indices into the input lists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub school_idx: usize,
    pub tower_idx: usize,
    pub distance_m: f64,
}

/// Numeric knobs for one batch run.
#[derive(Debug, Clone)]
pub struct BatchConfig {
    pub frequency_hz: f64,
    pub fresnel_fraction: f64,
    pub k_factor: f64,
    pub sample_spacing_m: f64,
    pub workers: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            frequency_hz: 5.0e9,
            fresnel_fraction: 0.6,
            k_factor: 4.0 / 3.0,
            sample_spacing_m: 30.0,
            workers: 1,
        }
    }
}

/// All pairs within `radius_m` (closed boundary), ordered by school input
/// order, then tower distance ascending, ties by tower id.
pub fn enumerate_candidates(
    towers: &[Site],
    schools: &[Site],
    radius_m: f64,
) -> Vec<Candidate> {
    let mut pairs = Vec::new();
    for (school_idx, school) in schools.iter().enumerate() {
        let mut reachable: Vec<Candidate> = towers
            .iter()
            .enumerate()
            .filter_map(|(tower_idx, tower)| {
                let d = geodesy::great_circle_distance(school.location, tower.location);
                (d <= radius_m).then_some(Candidate {
                    school_idx,
                    tower_idx,
                    distance_m: d,
                })
            })
            .collect();
        reachable.sort_by(|a, b| {
            a.distance_m
                .partial_cmp(&b.distance_m)
                .expect("finite distances")
                .then_with(|| towers[a.tower_idx].id.cmp(&towers[b.tower_idx].id))
        });
        pairs.extend(reachable);
    }
    pairs
}

/// Assesses one candidate; analysis failures degrade to UNEVALUATED rather
/// than aborting the batch.
fn assess_pair(
    school: &Site,
    tower: &Site,
    store: &TileStore,
    config: &BatchConfig,
) -> LinkAssessment {
    match analysis::build_profile(school, tower, store, config.sample_spacing_m) {
        Ok(profile) => analysis::assess_link(
            &profile,
            config.frequency_hz,
            config.fresnel_fraction,
            config.k_factor,
        ),
        Err(err) => {
            let missing_tile = match &err {
                AnalysisError::Dem(DemError::MissingTile { key }) => Some(key.clone()),
                _ => None,
            };
            // Geometry needs no DEM; a coincident pair is the only case
            // where even the azimuth is undefined.
            let path = PathGeometry::between(school.location, tower.location).unwrap_or(
                PathGeometry {
                    total_distance_m: 0.0,
                    azimuth_fwd_deg: 0.0,
                    azimuth_rev_deg: 0.0,
                },
            );
            LinkAssessment {
                school_id: school.id.clone(),
                tower_id: tower.id.clone(),
                path,
                classification: Classification::Unevaluated,
                min_clearance_margin_m: None,
                obstacles: Vec::new(),
                knife_edge_loss_db: None,
                azimuth_to_tower_deg: path.azimuth_fwd_deg,
                elevation_to_tower_deg: None,
                missing_tile,
            }
        }
    }
}

/// Sequential batch engine; also the fallback when the `parallel` feature
/// is disabled.
pub fn run_batch_sequential(
    pairs: &[Candidate],
    towers: &[Site],
    schools: &[Site],
    store: &TileStore,
    config: &BatchConfig,
) -> Vec<LinkAssessment> {
    pairs
        .iter()
        .map(|p| assess_pair(&schools[p.school_idx], &towers[p.tower_idx], store, config))
        .collect()
}

/// Assesses every candidate pair on a work pool of `config.workers`
/// threads. Output order follows `pairs` regardless of scheduling.
#[cfg(feature = "parallel")]
pub fn run_batch(
    pairs: &[Candidate],
    towers: &[Site],
    schools: &[Site],
    store: &TileStore,
    config: &BatchConfig,
) -> Vec<LinkAssessment> {
    if config.workers <= 1 {
        return run_batch_sequential(pairs, towers, schools, store, config);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .expect("building worker pool");
    pool.install(|| {
        pairs
            .par_iter()
            .map(|p| assess_pair(&schools[p.school_idx], &towers[p.tower_idx], store, config))
            .collect()
    })
}

#[cfg(not(feature = "parallel"))]
pub fn run_batch(
    pairs: &[Candidate],
    towers: &[Site],
    schools: &[Site],
    store: &TileStore,
    config: &BatchConfig,
) -> Vec<LinkAssessment> {
    run_batch_sequential(pairs, towers, schools, store, config)
}

/// Picks the serving tower among one school's assessments.
///
/// Priority: Clear by distance, then Marginal by distance, then
/// single-obstacle by knife-edge loss (ties by distance); everything else
/// is unservable. Final ties break on tower id, so the choice is invariant
/// under reordering of the assessment list.
pub fn select_tower<'a>(assessments: &[&'a LinkAssessment]) -> Option<&'a LinkAssessment> {
    fn rank(a: &LinkAssessment) -> Option<(u8, f64, f64)> {
        match a.classification {
            Classification::Clear => Some((0, a.path.total_distance_m, 0.0)),
            Classification::Marginal => Some((1, a.path.total_distance_m, 0.0)),
            Classification::Obstructed(1) => Some((
                2,
                a.knife_edge_loss_db.unwrap_or(f64::INFINITY),
                a.path.total_distance_m,
            )),
            _ => None,
        }
    }
    assessments
        .iter()
        .filter_map(|a| rank(a).map(|r| (r, *a)))
        .min_by(|(ra, a), (rb, b)| {
            ra.partial_cmp(rb)
                .expect("finite ranking keys")
                .then_with(|| a.tower_id.cmp(&b.tower_id))
        })
        .map(|(_, a)| a)
}

/// Per-tower classification counts over all assessments aimed at it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TowerTally {
    pub clear: usize,
    pub marginal: usize,
    pub obstructed: usize,
    pub unevaluated: usize,
}

/// The full plan: one assignment per school plus everything assessed.
#[derive(Debug, Clone)]
pub struct PlanResult {
    /// school id -> serving tower id, or `None` for unserved schools.
    /// Every school appears exactly once.
    pub assignments: BTreeMap<String, Option<String>>,
    pub assessments: Vec<LinkAssessment>,
    pub tower_tallies: BTreeMap<String, TowerTally>,
}

impl PlanResult {
    /// The chosen assessment for a served school.
    pub fn chosen(&self, school_id: &str) -> Option<&LinkAssessment> {
        let tower_id = self.assignments.get(school_id)?.as_ref()?;
        self.assessments
            .iter()
            .find(|a| a.school_id == school_id && &a.tower_id == tower_id)
    }
}

/// Runs the selection policy over a finished batch.
pub fn build_plan(
    towers: &[Site],
    schools: &[Site],
    assessments: Vec<LinkAssessment>,
) -> PlanResult {
    let mut assignments = BTreeMap::new();
    for school in schools {
        let mine: Vec<&LinkAssessment> = assessments
            .iter()
            .filter(|a| a.school_id == school.id)
            .collect();
        let chosen = select_tower(&mine).map(|a| a.tower_id.clone());
        assignments.insert(school.id.clone(), chosen);
    }
    let mut tower_tallies: BTreeMap<String, TowerTally> = towers
        .iter()
        .map(|t| (t.id.clone(), TowerTally::default()))
        .collect();
    for a in &assessments {
        let tally = tower_tallies.entry(a.tower_id.clone()).or_default();
        match a.classification {
            Classification::Clear => tally.clear += 1,
            Classification::Marginal => tally.marginal += 1,
            Classification::Obstructed(_) => tally.obstructed += 1,
            Classification::Unevaluated => tally.unevaluated += 1,
        }
    }
    PlanResult {
        assignments,
        assessments,
        tower_tallies,
    }
}
