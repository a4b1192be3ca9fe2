//! The static HTML map: one self-contained file with the plan GeoJSON and
//! a fixed, vendored rendering script baked in. The only thing it fetches
//! at view time is the background map tiles.

use serde_json::json;

use super::ReportParams;

const TEMPLATE: &str = include_str!("../../assets/map_template.html");

pub fn render_map_html(geojson_text: &str, params: &ReportParams) -> String {
    let config = json!({
        "radius_m": params.radius_m,
        "frequency_hz": params.batch.frequency_hz,
        "fresnel_fraction": params.batch.fresnel_fraction,
    });
    // "</" must not appear inside inline <script> payloads; "<\/" is the
    // JSON-legal spelling of the same characters.
    let inline_geojson = geojson_text.replace("</", "<\\/");
    TEMPLATE
        .replace("__CONFIG_JSON__", &config.to_string())
        .replace("__PLAN_GEOJSON__", &inline_geojson)
}

/// Pulls the inline plan GeoJSON back out of a rendered map.html.
///
/// This is the popup data source, so consistency checks compare against it.
pub fn extract_plan_geojson(html: &str) -> Option<serde_json::Value> {
    let marker = "<script id=\"plan-data\" type=\"application/json\">";
    let start = html.find(marker)? + marker.len();
    let end = html[start..].find("</script>")? + start;
    serde_json::from_str(&html[start..end]).ok()
}
