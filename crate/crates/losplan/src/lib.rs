//! Batch microwave line-of-sight planner.
//!
//! Given a list of telecom towers, a list of schools, and a directory of
//! SRTM elevation tiles, this crate decides for every in-range
//! school-tower pair whether an unobstructed 5 GHz link exists (direct ray
//! with configurable first-Fresnel-zone clearance and effective-earth
//! curvature), assigns each school to its best tower, and emits CSV
//! tables, GeoJSON, terrain-profile SVGs, and a static HTML map.
//!
//! Pipeline: [`cli::parse_sites_csv`] -> [`planner::enumerate_candidates`]
//! -> [`planner::run_batch`] -> [`planner::build_plan`] ->
//! [`report::write_all`]. The batch stage is data-parallel (rayon) when
//! the default `parallel` feature is enabled and falls back to a
//! sequential loop without it; outputs are bitwise identical either way.

pub mod analysis;
pub mod cli;
pub mod dem;
pub mod geodesy;
pub mod planner;
pub mod report;

pub use analysis::{Classification, LinkAssessment};
pub use geodesy::GeoPoint;
pub use planner::{PlanResult, Site, SiteKind};
