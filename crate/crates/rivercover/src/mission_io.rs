//! Mission serialization: QGC WPL 110, GPX and GeoJSON.
//!
//! Waypoint formats are decimated to an autopilot budget (700 waypoints by
//! default) before export. GeoJSON keeps the full plan structure — pass
//! direction, lane index and segment id ride along as feature properties —
//! so it round-trips exactly; WPL and GPX carry geometry only and import as
//! a bare track (documented lossiness). All numeric output is fixed
//! precision: seven decimals for degrees, three for meters.

use serde_json::Value;

use crate::geometry::{Point, Polyline};
use crate::planner::{Algorithm, CoveragePlan, Direction, Pass, PlanElement};
use crate::river_map::GeoRef;
use crate::{Error, Result};

/// Default autopilot waypoint limit.
pub const DEFAULT_WAYPOINT_BUDGET: usize = 700;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissionFormat {
    QgcWpl110,
    Gpx,
    GeoJson,
}

impl MissionFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MissionFormat::QgcWpl110 => "wpl",
            MissionFormat::Gpx => "gpx",
            MissionFormat::GeoJson => "geojson",
        }
    }
}

/// A serialized mission.
#[derive(Debug, Clone)]
pub struct MissionFile {
    pub format: MissionFormat,
    pub body: String,
}

/// Flattens a plan into a single waypoint chain, dropping repeated joints.
pub fn plan_waypoints(plan: &CoveragePlan) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    for element in &plan.elements {
        for p in element.polyline().points() {
            if out.last().is_none_or(|q| q.distance(*p) > 1e-9) {
                out.push(*p);
            }
        }
    }
    out
}

/// Douglas-Peucker decimation to at most `budget` points, by binary search
/// on the tolerance.
pub fn decimate_points(points: &[Point], budget: usize) -> Vec<Point> {
    if points.len() <= budget || budget < 2 {
        return points.to_vec();
    }
    let polyline = Polyline::new(points.to_vec());
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    // grow hi until it decimates enough
    while polyline.simplified(hi).len() > budget && hi < 1e7 {
        hi *= 2.0;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if polyline.simplified(mid).len() > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    polyline.simplified(hi).points().to_vec()
}

/// Serializes a plan. Lat/lon formats (WPL, GPX) need a georeference.
pub fn export_plan(
    plan: &CoveragePlan,
    format: MissionFormat,
    geo: Option<&GeoRef>,
    waypoint_budget: usize,
) -> Result<MissionFile> {
    if plan.elements.is_empty() {
        return Err(Error::validation("cannot export an empty plan"));
    }
    let body = match format {
        MissionFormat::QgcWpl110 => {
            let geo = geo.ok_or_else(|| {
                Error::validation("QGC WPL output needs a georeference (--geo lat,lon)")
            })?;
            let pts = decimate_points(&plan_waypoints(plan), waypoint_budget);
            let mut out = String::from("QGC WPL 110\n");
            for (i, p) in pts.iter().enumerate() {
                let (lat, lon) = geo.to_lat_lon(*p);
                let current = if i == 0 { 1 } else { 0 };
                // index, current, frame, command, p1..p4, lat, lon, alt, autocontinue
                out.push_str(&format!(
                    "{i}\t{current}\t0\t16\t0\t0\t0\t0\t{lat:.7}\t{lon:.7}\t0.000\t1\n"
                ));
            }
            out
        }
        MissionFormat::Gpx => {
            let geo = geo.ok_or_else(|| {
                Error::validation("GPX output needs a georeference (--geo lat,lon)")
            })?;
            let pts = decimate_points(&plan_waypoints(plan), waypoint_budget);
            let mut out = String::from(
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<gpx version=\"1.1\" creator=\"rivercover\" xmlns=\"http://www.topografix.com/GPX/1/1\">\n  <trk>\n",
            );
            out.push_str(&format!("    <name>{}</name>\n    <trkseg>\n", plan.algorithm.name()));
            for p in &pts {
                let (lat, lon) = geo.to_lat_lon(*p);
                out.push_str(&format!(
                    "      <trkpt lat=\"{lat:.7}\" lon=\"{lon:.7}\"></trkpt>\n"
                ));
            }
            out.push_str("    </trkseg>\n  </trk>\n</gpx>\n");
            out
        }
        MissionFormat::GeoJson => plan_to_geojson(plan, geo),
    };
    Ok(MissionFile { format, body })
}

fn plan_to_geojson(plan: &CoveragePlan, geo: Option<&GeoRef>) -> String {
    let coords = |pl: &Polyline| -> Vec<Value> {
        pl.points()
            .iter()
            .map(|p| match geo {
                Some(g) => {
                    let (lat, lon) = g.to_lat_lon(*p);
                    serde_json::json!([lon, lat])
                }
                None => serde_json::json!([p.x, p.y]),
            })
            .collect()
    };
    let features: Vec<Value> = plan
        .elements
        .iter()
        .map(|e| match e {
            PlanElement::Pass(p) => serde_json::json!({
                "type": "Feature",
                "properties": {
                    "kind": "pass",
                    "lane_index": p.lane_index,
                    "segment_id": p.segment_id,
                    "direction": match p.direction {
                        Direction::Upstream => "upstream",
                        Direction::Downstream => "downstream",
                    },
                },
                "geometry": {"type": "LineString", "coordinates": coords(&p.polyline)},
            }),
            PlanElement::Connector(c) => serde_json::json!({
                "type": "Feature",
                "properties": {"kind": "connector"},
                "geometry": {"type": "LineString", "coordinates": coords(c)},
            }),
        })
        .collect();
    let doc = serde_json::json!({
        "type": "FeatureCollection",
        "properties": {
            "algorithm": plan.algorithm.name(),
            "spacing_m": plan.spacing,
            "start": [plan.start.x, plan.start.y],
            "coordinates": if geo.is_some() { "wgs84" } else { "metric" },
        },
        "features": features,
    });
    serde_json::to_string_pretty(&doc).unwrap()
}

/// Parses a mission file back into a plan.
///
/// GeoJSON restores the full structure. WPL and GPX yield geometry only: a
/// single connector chain with no direction metadata, under the algorithm
/// label `m-cover`.
pub fn import_plan(file: &MissionFile, geo: Option<&GeoRef>) -> Result<CoveragePlan> {
    match file.format {
        MissionFormat::GeoJson => import_geojson(&file.body),
        MissionFormat::QgcWpl110 => {
            let geo = geo.ok_or_else(|| {
                Error::validation("importing QGC WPL needs the matching georeference")
            })?;
            let mut pts = Vec::new();
            for (i, line) in file.body.lines().enumerate() {
                if i == 0 {
                    if !line.starts_with("QGC WPL 110") {
                        return Err(Error::validation("not a QGC WPL 110 file"));
                    }
                    continue;
                }
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() < 12 {
                    return Err(Error::validation(format!("WPL row {i}: too few fields")));
                }
                let lat: f64 = fields[8]
                    .parse()
                    .map_err(|_| Error::validation(format!("WPL row {i}: bad latitude")))?;
                let lon: f64 = fields[9]
                    .parse()
                    .map_err(|_| Error::validation(format!("WPL row {i}: bad longitude")))?;
                pts.push(geo.from_lat_lon(lat, lon));
            }
            geometry_only_plan(pts)
        }
        MissionFormat::Gpx => {
            let geo = geo.ok_or_else(|| {
                Error::validation("importing GPX needs the matching georeference")
            })?;
            let mut pts = Vec::new();
            for chunk in file.body.split("<trkpt").skip(1) {
                let lat = extract_attr(chunk, "lat")?;
                let lon = extract_attr(chunk, "lon")?;
                pts.push(geo.from_lat_lon(lat, lon));
            }
            geometry_only_plan(pts)
        }
    }
}

fn extract_attr(chunk: &str, name: &str) -> Result<f64> {
    let key = format!("{name}=\"");
    let start = chunk
        .find(&key)
        .ok_or_else(|| Error::validation(format!("GPX trkpt missing {name}")))?
        + key.len();
    let end = chunk[start..]
        .find('"')
        .ok_or_else(|| Error::validation("GPX attribute not terminated"))?;
    chunk[start..start + end]
        .parse()
        .map_err(|_| Error::validation(format!("GPX: bad {name} value")))
}

fn geometry_only_plan(pts: Vec<Point>) -> Result<CoveragePlan> {
    if pts.len() < 2 {
        return Err(Error::validation("mission contains fewer than 2 waypoints"));
    }
    let start = pts[0];
    Ok(CoveragePlan {
        elements: vec![PlanElement::Connector(Polyline::new(pts))],
        spacing: 0.0,
        algorithm: Algorithm::MCover,
        start,
    })
}

fn import_geojson(body: &str) -> Result<CoveragePlan> {
    let doc: Value = serde_json::from_str(body)
        .map_err(|e| Error::validation(format!("bad GeoJSON: {e}")))?;
    let props = doc.get("properties").cloned().unwrap_or(Value::Null);
    let algorithm = Algorithm::parse(
        props
            .get("algorithm")
            .and_then(Value::as_str)
            .unwrap_or("m-cover"),
    )?;
    let spacing = props.get("spacing_m").and_then(Value::as_f64).unwrap_or(0.0);
    let wgs84 = props.get("coordinates").and_then(Value::as_str) == Some("wgs84");
    if wgs84 {
        return Err(Error::validation(
            "GeoJSON plan in geographic coordinates; re-export in metric for import",
        ));
    }
    let start = props
        .get("start")
        .and_then(Value::as_array)
        .map(|a| {
            Point::new(
                a.first().and_then(Value::as_f64).unwrap_or(0.0),
                a.get(1).and_then(Value::as_f64).unwrap_or(0.0),
            )
        })
        .unwrap_or(Point::new(0.0, 0.0));
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::validation("GeoJSON plan has no features"))?;
    let mut elements = Vec::with_capacity(features.len());
    for f in features {
        let coords = f
            .pointer("/geometry/coordinates")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::validation("feature has no LineString coordinates"))?;
        let pts: Vec<Point> = coords
            .iter()
            .filter_map(|c| {
                let a = c.as_array()?;
                Some(Point::new(a.first()?.as_f64()?, a.get(1)?.as_f64()?))
            })
            .collect();
        let polyline = Polyline::new(pts);
        let fprops = f.get("properties").cloned().unwrap_or(Value::Null);
        match fprops.get("kind").and_then(Value::as_str) {
            Some("pass") => {
                let direction = match fprops.get("direction").and_then(Value::as_str) {
                    Some("upstream") => Direction::Upstream,
                    _ => Direction::Downstream,
                };
                elements.push(PlanElement::Pass(Pass {
                    polyline,
                    lane_index: fprops
                        .get("lane_index")
                        .and_then(Value::as_u64)
                        .unwrap_or(0) as usize,
                    direction,
                    segment_id: fprops
                        .get("segment_id")
                        .and_then(Value::as_u64)
                        .unwrap_or(0) as usize,
                }));
            }
            _ => elements.push(PlanElement::Connector(polyline)),
        }
    }
    if elements.is_empty() {
        return Err(Error::validation("GeoJSON plan has no elements"));
    }
    Ok(CoveragePlan {
        elements,
        spacing,
        algorithm,
        start,
    })
}
