//! Command-line front end: flag/env parsing, site-list ingestion,
//! validation, pipeline orchestration, and the run summary.
//!
//! Exit codes: 0 success, 2 config error, 3 input parse error, 4 DEM
//! directory missing, 1 output I/O failure. Partial analysis failures
//! (UNEVALUATED pairs) still exit 0 and are counted in the summary.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::analysis::Classification;
use crate::dem::{TileStore, VoidPolicy};
use crate::geodesy::GeoPoint;
use crate::planner::{self, BatchConfig, Site, SiteKind};
use crate::report::{self, ReportError, ReportParams};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: duplicate id \"{id}\"")]
    DuplicateId {
        path: String,
        line: u64,
        id: String,
    },
    #[error("{path}:{line}: coordinate out of range: {what}")]
    OutOfRangeCoordinate {
        path: String,
        line: u64,
        what: String,
    },
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("DEM directory not found: {0}")]
    DemDirMissing(PathBuf),
    #[error(transparent)]
    Output(#[from] ReportError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Output(_) => 1,
            RunError::Config(_) => 2,
            RunError::Input(_) => 3,
            RunError::DemDirMissing(_) => 4,
        }
    }
}

/// Pipeline stage to stop after, for debugging intermediate products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    /// Write candidates.csv after the radius search and stop.
    Candidates,
    /// Write assessments.csv after the LOS batch and stop.
    Assess,
    /// Write links.csv after tower selection and stop (no maps/profiles).
    Plan,
}

/// Everything one run needs; defaults match the CLI flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub towers_path: PathBuf,
    pub schools_path: PathBuf,
    pub dem_dir: PathBuf,
    pub out_dir: PathBuf,
    pub radius_m: f64,
    pub frequency_hz: f64,
    pub fresnel_fraction: f64,
    pub k_factor: f64,
    pub sample_spacing_m: f64,
    pub default_school_height_m: f64,
    pub workers: usize,
    pub stop_after: Option<Stage>,
}

impl RunConfig {
    fn validate(&self) -> Result<(), RunError> {
        let positive = [
            (self.radius_m, "radius"),
            (self.frequency_hz, "frequency"),
            (self.sample_spacing_m, "sample spacing"),
            (self.default_school_height_m, "school antenna height"),
            (self.k_factor, "k-factor"),
        ];
        for (value, name) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(RunError::Config(format!("{name} must be positive, got {value}")));
            }
        }
        if !(0.0..=1.0).contains(&self.fresnel_fraction) {
            return Err(RunError::Config(format!(
                "fresnel fraction must be in [0, 1], got {}",
                self.fresnel_fraction
            )));
        }
        if self.workers == 0 {
            return Err(RunError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    fn batch(&self) -> BatchConfig {
        BatchConfig {
            frequency_hz: self.frequency_hz,
            fresnel_fraction: self.fresnel_fraction,
            k_factor: self.k_factor,
            sample_spacing_m: self.sample_spacing_m,
            workers: self.workers,
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Flags mirror the config; every flag also reads a `LOSPLAN_*` variable.
#[derive(Debug, Parser)]
#[command(
    name = "losplan",
    version,
    about = "Batch microwave line-of-sight planner: assigns schools to towers over SRTM terrain"
)]
pub struct Cli {
    /// Towers CSV: id,lat,lon,height_m
    #[arg(long, env = "LOSPLAN_TOWERS")]
    pub towers: PathBuf,
    /// Schools CSV: id,lat,lon,level[,height_m]
    #[arg(long, env = "LOSPLAN_SCHOOLS")]
    pub schools: PathBuf,
    /// Directory of SRTM .hgt tiles
    #[arg(long, env = "LOSPLAN_DEM_DIR")]
    pub dem_dir: PathBuf,
    /// Output directory for all artifacts
    #[arg(long, env = "LOSPLAN_OUT_DIR")]
    pub out_dir: PathBuf,
    /// Candidate radius around each tower, km
    #[arg(long, env = "LOSPLAN_RADIUS_KM", default_value_t = 50.0)]
    pub radius_km: f64,
    /// Link frequency, GHz
    #[arg(long, env = "LOSPLAN_FREQ_GHZ", default_value_t = 5.0)]
    pub freq_ghz: f64,
    /// Required fraction of the first Fresnel zone
    #[arg(long, env = "LOSPLAN_FRESNEL_FRACTION", default_value_t = 0.6)]
    pub fresnel_fraction: f64,
    /// Effective-earth-radius factor
    #[arg(long, env = "LOSPLAN_K_FACTOR", default_value_t = 4.0 / 3.0)]
    pub k_factor: f64,
    /// Terrain sample spacing along each path, m
    #[arg(long, env = "LOSPLAN_SPACING_M", default_value_t = 30.0)]
    pub spacing_m: f64,
    /// Default school antenna height above ground, m
    #[arg(long, env = "LOSPLAN_SCHOOL_HEIGHT_M", default_value_t = 10.0)]
    pub school_height_m: f64,
    /// Worker threads for the assessment batch (default: all cores)
    #[arg(long, env = "LOSPLAN_WORKERS")]
    pub workers: Option<usize>,
    /// Stop after a pipeline stage and emit its intermediate CSV
    #[arg(long, env = "LOSPLAN_STOP_AFTER", value_enum)]
    pub stop_after: Option<Stage>,
}

impl Cli {
    pub fn into_config(self) -> RunConfig {
        RunConfig {
            towers_path: self.towers,
            schools_path: self.schools,
            dem_dir: self.dem_dir,
            out_dir: self.out_dir,
            radius_m: self.radius_km * 1000.0,
            frequency_hz: self.freq_ghz * 1e9,
            fresnel_fraction: self.fresnel_fraction,
            k_factor: self.k_factor,
            sample_spacing_m: self.spacing_m,
            default_school_height_m: self.school_height_m,
            workers: self.workers.unwrap_or_else(default_workers),
            stop_after: self.stop_after,
        }
    }
}

/// Which list a CSV holds, and the defaults that apply to it.
#[derive(Debug, Clone, Copy)]
pub enum SiteFileKind {
    /// id,lat,lon,height_m - height is mandatory.
    Towers,
    /// id,lat,lon,level[,height_m] - height falls back to the default.
    Schools { default_height_m: f64 },
}

/// Parses a site list, rejecting duplicate ids and out-of-range
/// coordinates with the offending line number.
pub fn parse_sites_csv(path: &Path, kind: SiteFileKind) -> Result<Vec<Site>, InputError> {
    let path_str = path.display().to_string();
    let io_err = |e: csv::Error| match e.kind() {
        csv::ErrorKind::Io(_) => InputError::Io {
            path: path_str.clone(),
            message: e.to_string(),
        },
        _ => InputError::Parse {
            path: path_str.clone(),
            line: e
                .position()
                .map_or(0, |p| p.line()),
            message: e.to_string(),
        },
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(io_err)?;

    let headers = reader.headers().map_err(io_err)?.clone();
    let expected: &[&str] = match kind {
        SiteFileKind::Towers => &["id", "lat", "lon", "height_m"],
        SiteFileKind::Schools { .. } => &["id", "lat", "lon", "level"],
    };
    let got: Vec<&str> = headers.iter().collect();
    let header_ok = got.len() >= expected.len()
        && got[..expected.len()] == *expected
        && (got.len() == expected.len()
            || (matches!(kind, SiteFileKind::Schools { .. })
                && got.len() == 5
                && got[4] == "height_m"));
    if !header_ok {
        return Err(InputError::Parse {
            path: path_str,
            line: 1,
            message: format!(
                "header must be \"{}\"{}, got \"{}\"",
                expected.join(","),
                if matches!(kind, SiteFileKind::Schools { .. }) {
                    " (optionally plus height_m)"
                } else {
                    ""
                },
                got.join(",")
            ),
        });
    }

    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut sites = Vec::new();
    for record in reader.records() {
        let record = record.map_err(io_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| InputError::Parse {
            path: path_str.clone(),
            line,
            message,
        };
        let field = |i: usize| record.get(i).unwrap_or("");

        let id = field(0).to_string();
        if id.is_empty() {
            return Err(parse_err("empty id".into()));
        }
        if !seen.insert(id.clone()) {
            return Err(InputError::DuplicateId {
                path: path_str.clone(),
                line,
                id,
            });
        }
        let lat: f64 = field(1)
            .parse()
            .map_err(|_| parse_err(format!("bad latitude \"{}\"", field(1))))?;
        let lon: f64 = field(2)
            .parse()
            .map_err(|_| parse_err(format!("bad longitude \"{}\"", field(2))))?;
        let location =
            GeoPoint::new(lat, lon).ok_or_else(|| InputError::OutOfRangeCoordinate {
                path: path_str.clone(),
                line,
                what: format!("lat {lat}, lon {lon}"),
            })?;

        let (site_kind, height) = match kind {
            SiteFileKind::Towers => {
                let h: f64 = field(3)
                    .parse()
                    .map_err(|_| parse_err(format!("bad height_m \"{}\"", field(3))))?;
                (SiteKind::Tower, h)
            }
            SiteFileKind::Schools { default_height_m } => {
                let level = match field(3).to_ascii_lowercase().as_str() {
                    "primary" => SiteKind::PrimarySchool,
                    "secondary" => SiteKind::SecondarySchool,
                    other => {
                        return Err(parse_err(format!(
                            "level must be primary or secondary, got \"{other}\""
                        )))
                    }
                };
                let h = match record.get(4) {
                    None | Some("") => default_height_m,
                    Some(raw) => raw
                        .parse()
                        .map_err(|_| parse_err(format!("bad height_m \"{raw}\"")))?,
                };
                (level, h)
            }
        };
        if !height.is_finite() || height <= 0.0 {
            return Err(parse_err(format!("antenna height must be positive, got {height}")));
        }
        sites.push(Site {
            id,
            location,
            antenna_height_m: height,
            kind: site_kind,
        });
    }
    Ok(sites)
}

/// Aggregate figures for one run; `text()` is what lands in summary.txt.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub n_towers: usize,
    pub n_schools: usize,
    pub n_pairs: usize,
    pub clear: usize,
    pub marginal: usize,
    pub obstructed: usize,
    pub unevaluated: usize,
    pub served: usize,
    pub unserved: usize,
    pub void_hits: u64,
    pub missing_tiles: Vec<String>,
    pub warnings: Vec<String>,
    pub wall: Duration,
}

impl RunSummary {
    pub fn pairs_per_second(&self) -> f64 {
        let secs = self.wall.as_secs_f64();
        if secs > 0.0 {
            self.n_pairs as f64 / secs
        } else {
            0.0
        }
    }

    /// Deterministic for identical inputs except the final wall-time line.
    pub fn text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("towers:           {}\n", self.n_towers));
        s.push_str(&format!("schools:          {}\n", self.n_schools));
        s.push_str(&format!("candidate pairs:  {}\n", self.n_pairs));
        s.push_str(&format!("  clear:          {}\n", self.clear));
        s.push_str(&format!("  marginal:       {}\n", self.marginal));
        s.push_str(&format!("  obstructed:     {}\n", self.obstructed));
        s.push_str(&format!("  unevaluated:    {}\n", self.unevaluated));
        s.push_str(&format!("served schools:   {}\n", self.served));
        s.push_str(&format!("unserved schools: {}\n", self.unserved));
        s.push_str(&format!("void samples hit: {}\n", self.void_hits));
        s.push_str(&format!(
            "missing tiles:    {}\n",
            if self.missing_tiles.is_empty() {
                "none".to_string()
            } else {
                self.missing_tiles.join(" ")
            }
        ));
        for w in &self.warnings {
            s.push_str(&format!("warning:          {w}\n"));
        }
        s.push_str(&format!(
            "wall time:        {:.3} s ({:.1} pairs/s)\n",
            self.wall.as_secs_f64(),
            self.pairs_per_second()
        ));
        s
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|source| {
        RunError::Output(ReportError::Io {
            path: path.display().to_string(),
            source,
        })
    })
}

/// Executes parse -> enumerate -> assess -> select -> report and prints
/// the summary. Stops early when `stop_after` is set.
pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    config.validate()?;
    if !config.dem_dir.is_dir() {
        return Err(RunError::DemDirMissing(config.dem_dir.clone()));
    }
    fs::create_dir_all(&config.out_dir).map_err(|source| {
        RunError::Output(ReportError::Io {
            path: config.out_dir.display().to_string(),
            source,
        })
    })?;

    let towers = parse_sites_csv(&config.towers_path, SiteFileKind::Towers)?;
    let schools = parse_sites_csv(
        &config.schools_path,
        SiteFileKind::Schools {
            default_height_m: config.default_school_height_m,
        },
    )?;

    let mut warnings = Vec::new();
    if towers.is_empty() {
        warnings.push("towers file contains no sites".to_string());
    }
    if schools.is_empty() {
        warnings.push("schools file contains no sites; nothing to assign".to_string());
    }

    let started = Instant::now();
    let mut summary = RunSummary {
        n_towers: towers.len(),
        n_schools: schools.len(),
        n_pairs: 0,
        clear: 0,
        marginal: 0,
        obstructed: 0,
        unevaluated: 0,
        served: 0,
        unserved: 0,
        void_hits: 0,
        missing_tiles: Vec::new(),
        warnings,
        wall: Duration::ZERO,
    };

    let pairs = planner::enumerate_candidates(&towers, &schools, config.radius_m);
    summary.n_pairs = pairs.len();

    if config.stop_after == Some(Stage::Candidates) {
        write_candidates_csv(&pairs, &towers, &schools, &config.out_dir.join("candidates.csv"))?;
        return finish(config, summary, started);
    }

    let store = TileStore::new(&config.dem_dir, VoidPolicy::TreatAsZero);
    let batch = config.batch();
    let assessments = planner::run_batch(&pairs, &towers, &schools, &store, &batch);

    let mut missing: BTreeSet<String> = BTreeSet::new();
    for a in &assessments {
        match a.classification {
            Classification::Clear => summary.clear += 1,
            Classification::Marginal => summary.marginal += 1,
            Classification::Obstructed(_) => summary.obstructed += 1,
            Classification::Unevaluated => summary.unevaluated += 1,
        }
        if let Some(tile) = &a.missing_tile {
            missing.insert(tile.clone());
        }
    }
    summary.missing_tiles = missing.into_iter().collect();

    if config.stop_after == Some(Stage::Assess) {
        write_assessments_csv(
            &assessments,
            &schools,
            &batch,
            &config.out_dir.join("assessments.csv"),
        )?;
        summary.void_hits = store.void_hits();
        return finish(config, summary, started);
    }

    let plan = planner::build_plan(&towers, &schools, assessments);
    summary.served = plan.assignments.values().filter(|t| t.is_some()).count();
    summary.unserved = plan.assignments.len() - summary.served;

    let params = ReportParams {
        radius_m: config.radius_m,
        batch: batch.clone(),
    };
    if config.stop_after == Some(Stage::Plan) {
        report::write_links_csv(&plan, &schools, &params, &config.out_dir.join("links.csv"))?;
    } else {
        report::write_all(&plan, &towers, &schools, &store, &params, &config.out_dir)?;
    }
    summary.void_hits = store.void_hits();
    finish(config, summary, started)
}

fn finish(
    config: &RunConfig,
    mut summary: RunSummary,
    started: Instant,
) -> Result<RunSummary, RunError> {
    summary.wall = started.elapsed();
    let text = summary.text();
    write_text(&config.out_dir.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(summary)
}

fn write_candidates_csv(
    pairs: &[planner::Candidate],
    towers: &[Site],
    schools: &[Site],
    path: &Path,
) -> Result<(), RunError> {
    let csv_err = |source| {
        RunError::Output(ReportError::Csv {
            path: path.display().to_string(),
            source,
        })
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["school_id", "tower_id", "distance_km"])
        .map_err(csv_err)?;
    for p in pairs {
        w.write_record([
            schools[p.school_idx].id.as_str(),
            towers[p.tower_idx].id.as_str(),
            &report::fixed(p.distance_m / 1000.0, 3),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| {
        RunError::Output(ReportError::Io {
            path: path.display().to_string(),
            source,
        })
    })?;
    Ok(())
}

fn write_assessments_csv(
    assessments: &[crate::analysis::LinkAssessment],
    schools: &[Site],
    batch: &BatchConfig,
    path: &Path,
) -> Result<(), RunError> {
    use std::collections::BTreeMap;
    let school_by_id: BTreeMap<&str, &Site> =
        schools.iter().map(|s| (s.id.as_str(), s)).collect();
    let csv_err = |source| {
        RunError::Output(ReportError::Csv {
            path: path.display().to_string(),
            source,
        })
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
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
    ])
    .map_err(csv_err)?;
    for a in assessments {
        let Some(school) = school_by_id.get(a.school_id.as_str()) else {
            continue;
        };
        let mut record: Vec<String> = vec![
            a.school_id.clone(),
            school.kind.label().to_string(),
            report::fixed(school.location.lat(), 6),
            report::fixed(school.location.lon(), 6),
            a.tower_id.clone(),
        ];
        record.extend(report::assessment_columns(a, batch.frequency_hz));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|source| {
        RunError::Output(ReportError::Io {
            path: path.display().to_string(),
            source,
        })
    })?;
    Ok(())
}
