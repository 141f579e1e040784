//! Trajectory serialization: GeoJSON feature collections, schematic SVG under
//! an equirectangular projection, and a plain JSON visit listing. All outputs
//! are byte-deterministic for identical inputs.

use serde::{Deserialize, Serialize};

use crate::extract::Trajectory;

/// Drawing parameters for the SVG chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartConfig {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    pub labels: bool,
    pub point_radius: f64,
}

impl Default for ChartConfig {
    fn default() -> Self {
        ChartConfig {
            width: 800,
            height: 400,
            margin: 20,
            labels: true,
            point_radius: 3.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ChartError {
    #[error("invalid chart config: width and height must exceed twice the margin")]
    InvalidConfig,
}

impl ChartConfig {
    pub fn new(width: u32, height: u32, margin: u32) -> Result<Self, ChartError> {
        let cfg = ChartConfig {
            width,
            height,
            margin,
            ..ChartConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ChartError> {
        if self.width > 2 * self.margin && self.height > 2 * self.margin {
            Ok(())
        } else {
            Err(ChartError::InvalidConfig)
        }
    }
}

/// GeoJSON document types, restricted to what trajectories need.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct GeoJsonDocument {
    #[serde(rename = "type")]
    pub kind: String,
    pub features: Vec<GeoJsonFeature>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct GeoJsonFeature {
    #[serde(rename = "type")]
    pub kind: String,
    pub geometry: GeoJsonGeometry,
    pub properties: Option<VisitProperties>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type")]
pub enum GeoJsonGeometry {
    Point {
        /// `[longitude, latitude]`
        coordinates: [f64; 2],
    },
    LineString {
        coordinates: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct VisitProperties {
    pub name: String,
    /// 1-based visit order.
    pub sequence: usize,
    pub geoname_id: u64,
}

/// Builds the GeoJSON feature collection: one Point per visit in order, then
/// one LineString through all visit coordinates when there are two or more.
pub fn to_geojson_document(tr: &Trajectory) -> GeoJsonDocument {
    let mut features: Vec<GeoJsonFeature> = tr
        .visits
        .iter()
        .enumerate()
        .map(|(i, v)| GeoJsonFeature {
            kind: "Feature".to_owned(),
            geometry: GeoJsonGeometry::Point {
                coordinates: [v.longitude(), v.latitude()],
            },
            properties: Some(VisitProperties {
                name: v.value().to_owned(),
                sequence: i + 1,
                geoname_id: v.geoname_id,
            }),
        })
        .collect();
    if tr.visits.len() >= 2 {
        features.push(GeoJsonFeature {
            kind: "Feature".to_owned(),
            geometry: GeoJsonGeometry::LineString {
                coordinates: tr
                    .visits
                    .iter()
                    .map(|v| [v.longitude(), v.latitude()])
                    .collect(),
            },
            properties: None,
        });
    }
    GeoJsonDocument {
        kind: "FeatureCollection".to_owned(),
        features,
    }
}

/// Serializes the trajectory as a compact GeoJSON string.
pub fn to_geojson(tr: &Trajectory) -> String {
    serde_json::to_string(&to_geojson_document(tr)).expect("geojson serialization is infallible")
}

/// Serializes the trajectory as pretty-printed JSON (visit list with names,
/// ids, coordinates, and indices).
pub fn to_json(tr: &Trajectory) -> String {
    let mut s = serde_json::to_string_pretty(tr).expect("trajectory serialization is infallible");
    s.push('\n');
    s
}

/// Equirectangular projection of (latitude, longitude) into the drawing area.
pub fn project(latitude: f64, longitude: f64, cfg: &ChartConfig) -> (f64, f64) {
    let w = f64::from(cfg.width) - 2.0 * f64::from(cfg.margin);
    let h = f64::from(cfg.height) - 2.0 * f64::from(cfg.margin);
    let x = f64::from(cfg.margin) + (longitude + 180.0) / 360.0 * w;
    let y = f64::from(cfg.margin) + (90.0 - latitude) / 180.0 * h;
    (x, y)
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn fmt_coord(v: f64) -> String {
    // two decimals is sub-pixel at chart scale and keeps output stable
    format!("{:.2}", v)
}

/// Renders the trajectory as a schematic SVG 1.1 document: a polyline through
/// the visits in order, a circle per visit, and optional sequence labels.
pub fn to_svg(tr: &Trajectory, cfg: &ChartConfig) -> Result<String, ChartError> {
    cfg.validate()?;
    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = cfg.width,
        h = cfg.height
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        cfg.width, cfg.height
    ));
    let points: Vec<(f64, f64)> = tr
        .visits
        .iter()
        .map(|v| project(v.latitude(), v.longitude(), cfg))
        .collect();
    if points.len() >= 2 {
        let path = points
            .iter()
            .map(|(x, y)| format!("{},{}", fmt_coord(*x), fmt_coord(*y)))
            .collect::<Vec<_>>()
            .join(" ");
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"{path}\"/>\n"
        ));
    }
    for (i, (x, y)) in points.iter().enumerate() {
        svg.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#c23b22\"/>\n",
            fmt_coord(*x),
            fmt_coord(*y),
            cfg.point_radius
        ));
        if cfg.labels {
            let label = format!("{}. {}", i + 1, tr.visits[i].value());
            svg.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\" font-size=\"10\" font-family=\"sans-serif\">{}</text>\n",
                fmt_coord(x + cfg.point_radius + 2.0),
                fmt_coord(y - 2.0),
                xml_escape(&label)
            ));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
