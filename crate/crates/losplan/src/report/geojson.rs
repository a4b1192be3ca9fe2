//! GeoJSON view of a plan: tower and school points, served-link lines, and
//! coverage-radius rings. Coordinates are `[lon, lat]` per the GeoJSON
//! convention; numeric properties are pre-rounded so the same characters
//! appear here as in the CSVs.

use serde_json::{json, Value};

use crate::analysis;
use crate::dem::TileStore;
use crate::geodesy::{self, GeoPoint};
use crate::planner::{PlanResult, Site};

use super::{fixed_num, profile_rel_path, tower_table_rel_path, ReportParams};

/// Vertices per coverage-radius ring.
const RADIUS_RING_POINTS: usize = 64;

fn point_coords(p: GeoPoint) -> Value {
    json!([p.lon(), p.lat()])
}

fn feature(geometry: Value, properties: Value) -> Value {
    json!({
        "type": "Feature",
        "geometry": geometry,
        "properties": properties,
    })
}

/// Builds the whole FeatureCollection for a finished plan.
pub fn plan_geojson(
    plan: &PlanResult,
    towers: &[Site],
    schools: &[Site],
    store: &TileStore,
    params: &ReportParams,
) -> Value {
    let mut features: Vec<Value> = Vec::new();

    let mut sorted_towers: Vec<&Site> = towers.iter().collect();
    sorted_towers.sort_by(|a, b| a.id.cmp(&b.id));
    for tower in &sorted_towers {
        let tally = plan.tower_tallies.get(&tower.id).copied().unwrap_or_default();
        features.push(feature(
            json!({"type": "Point", "coordinates": point_coords(tower.location)}),
            json!({
                "feature_type": "tower",
                "id": tower.id,
                "antenna_height_m": tower.antenna_height_m,
                "clear": tally.clear,
                "marginal": tally.marginal,
                "obstructed": tally.obstructed,
                "unevaluated": tally.unevaluated,
                "table_href": tower_table_rel_path(&tower.id),
            }),
        ));
    }

    let mut sorted_schools: Vec<&Site> = schools.iter().collect();
    sorted_schools.sort_by(|a, b| a.id.cmp(&b.id));
    for school in &sorted_schools {
        let chosen = plan.chosen(&school.id);
        let classification = chosen
            .map(|a| a.classification.label())
            .unwrap_or("UNSERVED");
        let ground = store.elevation_at(school.location).ok();
        let mut props = json!({
            "feature_type": "school",
            "id": school.id,
            "kind": school.kind.label(),
            "classification": classification,
            "ground_elev_m": ground.map(|g| fixed_num(g, 1)),
        });
        if let Some(a) = chosen {
            let extra = json!({
                "tower_id": a.tower_id,
                "distance_km": fixed_num(a.path.total_distance_m / 1000.0, 3),
                "azimuth_deg": fixed_num(a.azimuth_to_tower_deg, 1),
                "elevation_deg": a.elevation_to_tower_deg.map(|e| fixed_num(e, 1)),
                "n_obstacles": a.obstacles.len(),
                "fspl_db": fixed_num(
                    analysis::free_space_path_loss(
                        a.path.total_distance_m,
                        params.batch.frequency_hz,
                    ),
                    2,
                ),
                "profile_href": profile_rel_path(&a.school_id, &a.tower_id),
                "table_href": tower_table_rel_path(&a.tower_id),
            });
            merge(&mut props, extra);
        }
        features.push(feature(
            json!({"type": "Point", "coordinates": point_coords(school.location)}),
            props,
        ));
    }

    // One LineString per served school, none for unserved.
    let tower_by_id: std::collections::BTreeMap<&str, &Site> =
        towers.iter().map(|t| (t.id.as_str(), t)).collect();
    for school in &sorted_schools {
        let Some(a) = plan.chosen(&school.id) else {
            continue;
        };
        let Some(tower) = tower_by_id.get(a.tower_id.as_str()) else {
            continue;
        };
        features.push(feature(
            json!({
                "type": "LineString",
                "coordinates": [point_coords(school.location), point_coords(tower.location)],
            }),
            json!({
                "feature_type": "link",
                "school_id": a.school_id,
                "tower_id": a.tower_id,
                "classification": a.classification.label(),
            }),
        ));
    }

    for tower in &sorted_towers {
        features.push(feature(
            json!({
                "type": "Polygon",
                "coordinates": [radius_ring(tower.location, params.radius_m)],
            }),
            json!({
                "feature_type": "radius",
                "tower_id": tower.id,
                "radius_m": params.radius_m,
            }),
        ));
    }

    json!({"type": "FeatureCollection", "features": features})
}

/// Closed ring approximating the coverage circle with a 64-gon.
fn radius_ring(center: GeoPoint, radius_m: f64) -> Value {
    let mut ring: Vec<Value> = (0..RADIUS_RING_POINTS)
        .map(|i| {
            let bearing = 360.0 * i as f64 / RADIUS_RING_POINTS as f64;
            point_coords(geodesy::destination_point(center, bearing, radius_m))
        })
        .collect();
    ring.push(ring[0].clone());
    Value::Array(ring)
}

fn merge(base: &mut Value, extra: Value) {
    if let (Value::Object(b), Value::Object(e)) = (base, extra) {
        for (k, v) in e {
            b.insert(k, v);
        }
    }
}
