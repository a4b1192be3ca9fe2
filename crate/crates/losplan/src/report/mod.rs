//! Plan outputs: the links CSV, per-tower CSVs, GeoJSON, per-link terrain
//! profile SVGs, and the self-contained HTML map.
//!
//! Every artifact is byte-deterministic for identical inputs: rows are
//! sorted, maps are BTree-backed, floats go through one fixed-decimal
//! formatter, and nothing embeds timestamps.

mod geojson;
mod html;
mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{self, Classification, LinkAssessment};
use crate::dem::TileStore;
use crate::planner::{BatchConfig, PlanResult, Site};

pub use html::extract_plan_geojson;
pub use svg::render_profile_svg;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error writing {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("rebuilding profile {school_id} -> {tower_id} for rendering: {message}")]
    Profile {
        school_id: String,
        tower_id: String,
        message: String,
    },
}

/// Knobs the writers need beyond the plan itself.
#[derive(Debug, Clone)]
pub struct ReportParams {
    pub radius_m: f64,
    pub batch: BatchConfig,
}

/// Paths of everything written.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub out_dir: PathBuf,
    pub links_csv: PathBuf,
    pub map_geojson: PathBuf,
    pub map_html: PathBuf,
    pub tower_tables: Vec<PathBuf>,
    pub profile_svgs: Vec<PathBuf>,
}

/// Fixed-decimal rendering used by every artifact, so the same value
/// produces the same characters in CSV, GeoJSON, and popups.
pub(crate) fn fixed(value: f64, decimals: usize) -> String {
    let s = format!("{value:.decimals$}");
    // Normalize "-0.0" and friends to their unsigned spelling.
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// The f64 that serializes (via serde_json / JS shortest round-trip) to
/// exactly `fixed(value, decimals)`.
pub(crate) fn fixed_num(value: f64, decimals: usize) -> f64 {
    fixed(value, decimals).parse().expect("fixed() emits a float")
}

/// Filesystem-safe slug for ids used in artifact names.
pub(crate) fn file_slug(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub(crate) fn profile_rel_path(school_id: &str, tower_id: &str) -> String {
    format!("profiles/{}__{}.svg", file_slug(school_id), file_slug(tower_id))
}

pub(crate) fn tower_table_rel_path(tower_id: &str) -> String {
    format!("towers/{}.csv", file_slug(tower_id))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes the whole bundle under `out_dir`.
pub fn write_all(
    plan: &PlanResult,
    towers: &[Site],
    schools: &[Site],
    store: &TileStore,
    params: &ReportParams,
    out_dir: &Path,
) -> Result<ReportBundle, ReportError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let towers_dir = out_dir.join("towers");
    let profiles_dir = out_dir.join("profiles");
    fs::create_dir_all(&towers_dir).map_err(io_err(&towers_dir))?;
    fs::create_dir_all(&profiles_dir).map_err(io_err(&profiles_dir))?;

    let profile_svgs = write_profiles(plan, towers, schools, store, params, &profiles_dir)?;

    let links_csv = out_dir.join("links.csv");
    write_links_csv(plan, schools, params, &links_csv)?;

    let tower_tables = write_tower_tables(plan, towers, schools, params, &towers_dir)?;

    let geojson_value = geojson::plan_geojson(plan, towers, schools, store, params);
    let geojson_text = serde_json::to_string_pretty(&geojson_value).expect("geojson serializes");
    let map_geojson = out_dir.join("map.geojson");
    fs::write(&map_geojson, &geojson_text).map_err(io_err(&map_geojson))?;

    let map_html = out_dir.join("map.html");
    fs::write(&map_html, html::render_map_html(&geojson_text, params)).map_err(io_err(&map_html))?;

    Ok(ReportBundle {
        out_dir: out_dir.to_path_buf(),
        links_csv,
        map_geojson,
        map_html,
        tower_tables,
        profile_svgs,
    })
}

/// One terrain-profile SVG per assessed (evaluable) link.
fn write_profiles(
    plan: &PlanResult,
    towers: &[Site],
    schools: &[Site],
    store: &TileStore,
    params: &ReportParams,
    profiles_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    let school_by_id: BTreeMap<&str, &Site> =
        schools.iter().map(|s| (s.id.as_str(), s)).collect();
    let tower_by_id: BTreeMap<&str, &Site> = towers.iter().map(|t| (t.id.as_str(), t)).collect();
    let mut written = Vec::new();
    for a in &plan.assessments {
        if a.classification == Classification::Unevaluated {
            continue;
        }
        let (school, tower) = match (
            school_by_id.get(a.school_id.as_str()),
            tower_by_id.get(a.tower_id.as_str()),
        ) {
            (Some(s), Some(t)) => (*s, *t),
            _ => continue,
        };
        let profile =
            analysis::build_profile(school, tower, store, params.batch.sample_spacing_m).map_err(
                |e| ReportError::Profile {
                    school_id: a.school_id.clone(),
                    tower_id: a.tower_id.clone(),
                    message: e.to_string(),
                },
            )?;
        let trace = analysis::clearance_trace(
            &profile,
            params.batch.frequency_hz,
            params.batch.fresnel_fraction,
            params.batch.k_factor,
        );
        let path = profiles_dir.join(format!(
            "{}__{}.svg",
            file_slug(&a.school_id),
            file_slug(&a.tower_id)
        ));
        fs::write(&path, render_profile_svg(&profile, &trace, a)).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

const LINKS_HEADER: [&str; 13] = [
    "school_id",
    "school_kind",
    "lat",
    "lon",
    "tower_id",
    "distance_km",
    "azimuth_deg",
    "elevation_deg",
    "classification",
    "min_margin_m",
    "n_obstacles",
    "knife_edge_loss_db",
    "fspl_db",
];

/// Columns shared by links.csv and the per-tower tables for one assessment.
pub(crate) fn assessment_columns(a: &LinkAssessment, freq_hz: f64) -> [String; 8] {
    [
        fixed(a.path.total_distance_m / 1000.0, 3),
        fixed(a.azimuth_to_tower_deg, 1),
        a.elevation_to_tower_deg.map(|e| fixed(e, 1)).unwrap_or_default(),
        a.classification.label().to_string(),
        a.min_clearance_margin_m.map(|m| fixed(m, 2)).unwrap_or_default(),
        if a.classification == Classification::Unevaluated {
            String::new()
        } else {
            a.obstacles.len().to_string()
        },
        a.knife_edge_loss_db.map(|l| fixed(l, 2)).unwrap_or_default(),
        if a.path.total_distance_m > 0.0 {
            fixed(analysis::free_space_path_loss(a.path.total_distance_m, freq_hz), 2)
        } else {
            String::new()
        },
    ]
}

/// One row per school, sorted by school id; the row carries the chosen
/// tower's assessment or an UNSERVED marker.
pub fn write_links_csv(
    plan: &PlanResult,
    schools: &[Site],
    params: &ReportParams,
    path: &Path,
) -> Result<(), ReportError> {
    let school_by_id: BTreeMap<&str, &Site> =
        schools.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut w = csv::Writer::from_path(path).map_err(|source| ReportError::Csv {
        path: path.display().to_string(),
        source,
    })?;
    let csv_err = |source| ReportError::Csv {
        path: path.display().to_string(),
        source,
    };
    w.write_record(LINKS_HEADER).map_err(csv_err)?;
    for (school_id, tower) in &plan.assignments {
        let school = match school_by_id.get(school_id.as_str()) {
            Some(s) => *s,
            None => continue,
        };
        let mut record: Vec<String> = vec![
            school.id.clone(),
            school.kind.label().to_string(),
            fixed(school.location.lat(), 6),
            fixed(school.location.lon(), 6),
        ];
        match tower.as_ref().and_then(|_| plan.chosen(school_id)) {
            Some(a) => {
                record.push(a.tower_id.clone());
                record.extend(assessment_columns(a, params.batch.frequency_hz));
            }
            None => {
                record.push(String::new());
                let mut empties = vec![String::new(); 8];
                empties[3] = "UNSERVED".to_string();
                record.extend(empties);
            }
        }
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

const TOWER_HEADER: [&str; 13] = [
    "school_id",
    "school_kind",
    "lat",
    "lon",
    "distance_km",
    "azimuth_deg",
    "elevation_deg",
    "classification",
    "min_margin_m",
    "n_obstacles",
    "knife_edge_loss_db",
    "fspl_db",
    "assigned",
];

/// One CSV per tower listing every school assessed against it.
fn write_tower_tables(
    plan: &PlanResult,
    towers: &[Site],
    schools: &[Site],
    params: &ReportParams,
    towers_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    let school_by_id: BTreeMap<&str, &Site> =
        schools.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut by_tower: BTreeMap<&str, Vec<&LinkAssessment>> = towers
        .iter()
        .map(|t| (t.id.as_str(), Vec::new()))
        .collect();
    for a in &plan.assessments {
        by_tower.entry(a.tower_id.as_str()).or_default().push(a);
    }
    let mut written = Vec::new();
    for (tower_id, mut rows) in by_tower {
        rows.sort_by(|a, b| a.school_id.cmp(&b.school_id));
        let path = towers_dir.join(format!("{}.csv", file_slug(tower_id)));
        let csv_err = |source| ReportError::Csv {
            path: path.display().to_string(),
            source,
        };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(TOWER_HEADER).map_err(csv_err)?;
        for a in rows {
            let school = match school_by_id.get(a.school_id.as_str()) {
                Some(s) => *s,
                None => continue,
            };
            let assigned = plan.assignments.get(&a.school_id)
                == Some(&Some(a.tower_id.clone()));
            let mut record: Vec<String> = vec![
                a.school_id.clone(),
                school.kind.label().to_string(),
                fixed(school.location.lat(), 6),
                fixed(school.location.lon(), 6),
            ];
            record.extend(assessment_columns(a, params.batch.frequency_hz));
            record.push(if assigned { "yes" } else { "no" }.to_string());
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush().map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}
