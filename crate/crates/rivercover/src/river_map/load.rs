//! Map ingestion: PGM rasters and GeoJSON polygons.
//!
//! PGM pixels at or above mid-gray are water (`Free`); the image is flipped
//! vertically so grid row 0 sits at the bottom of the metric frame. A
//! GeoJSON polygon source must carry `resolution_m` and `open_edges`
//! properties; the polygon is rasterized by cell-center containment with a
//! one-cell obstacle pad, and the two declared edges become the openings.

use std::path::Path;

use serde_json::Value;

use crate::geometry::Point;
use crate::{Error, Result};

use super::{GeoRef, Opening, RiverMap};

/// A map source: raster file path, polygon file path, or in-memory text.
pub enum MapSource<'a> {
    PgmPath(&'a Path, f64),
    GeoJsonPath(&'a Path),
    GeoJsonText(&'a str),
}

/// Loads a river map from a PGM raster or a GeoJSON polygon document.
///
/// File type is chosen by extension: `.pgm` needs a resolution (meters per
/// cell) unless the file carries a `# resolution_m` comment; anything else
/// is parsed as GeoJSON.
pub fn load_map(path: &Path, pgm_resolution: Option<f64>) -> Result<RiverMap> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => {
            let bytes = std::fs::read(path).map_err(|e| {
                Error::validation(format!("unreadable document {}: {e}", path.display()))
            })?;
            let res = match pgm_resolution.or_else(|| pgm_metadata(&bytes).0) {
                Some(r) => r,
                None => {
                    return Err(Error::validation(
                        "PGM input needs a resolution (meters per cell)",
                    ))
                }
            };
            parse_pgm(&bytes, res)
        }
        _ => load_geojson_polygon(&std::fs::read_to_string(path)?),
    }
}

/// Loads a binary or ASCII PGM, thresholding at mid-gray (bright = free).
pub fn load_pgm(path: &Path, resolution: f64) -> Result<RiverMap> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::validation(format!("unreadable document {}: {e}", path.display())))?;
    parse_pgm(&bytes, resolution)
}

/// Reads the metadata comments: `# resolution_m V` and
/// `# opening X1 Y1 X2 Y2` lines (openings in map meters). Maps whose free
/// region does not reach the raster frame carry their inlet and outlet this
/// way; plain rasters fall back to frame-run detection.
fn pgm_metadata(bytes: &[u8]) -> (Option<f64>, Vec<Opening>) {
    let mut resolution = None;
    let mut openings = Vec::new();
    for line in bytes.split(|&b| b == b'\n').take(64) {
        let Ok(text) = std::str::from_utf8(line) else {
            break;
        };
        let Some(comment) = text.trim().strip_prefix('#') else {
            continue;
        };
        let fields: Vec<&str> = comment.split_whitespace().collect();
        match fields.as_slice() {
            ["resolution_m", v] => resolution = v.parse().ok(),
            ["opening", x1, y1, x2, y2] => {
                if let (Ok(x1), Ok(y1), Ok(x2), Ok(y2)) =
                    (x1.parse(), y1.parse(), x2.parse(), y2.parse())
                {
                    openings.push(Opening {
                        segment: (Point::new(x1, y1), Point::new(x2, y2)),
                    });
                }
            }
            _ => {}
        }
    }
    (resolution, openings)
}

pub fn parse_pgm(bytes: &[u8], resolution: f64) -> Result<RiverMap> {
    let (_, meta_openings) = pgm_metadata(bytes);
    let mut pos = 0usize;
    let mut tokens: Vec<u64> = Vec::new();
    let magic = read_token(bytes, &mut pos)
        .ok_or_else(|| Error::validation("PGM: missing magic number"))?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(Error::validation(format!("PGM: unsupported magic {other}"))),
    };
    while tokens.len() < 3 {
        let t = read_token(bytes, &mut pos)
            .ok_or_else(|| Error::validation("PGM: truncated header"))?;
        let v = t
            .parse::<u64>()
            .map_err(|_| Error::validation(format!("PGM: bad header token {t}")))?;
        tokens.push(v);
    }
    let (w, h, maxval) = (tokens[0] as usize, tokens[1] as usize, tokens[2]);
    if maxval == 0 || maxval > 255 {
        return Err(Error::validation("PGM: maxval must be in 1..=255"));
    }
    let mut values = Vec::with_capacity(w * h);
    if binary {
        // single whitespace byte separates header from raster data
        let data = &bytes[pos + 1..];
        if data.len() < w * h {
            return Err(Error::validation("PGM: truncated raster data"));
        }
        values.extend(data[..w * h].iter().map(|&b| b as u64));
    } else {
        while values.len() < w * h {
            let t = read_token(bytes, &mut pos)
                .ok_or_else(|| Error::validation("PGM: truncated raster data"))?;
            values.push(
                t.parse::<u64>()
                    .map_err(|_| Error::validation(format!("PGM: bad pixel {t}")))?,
            );
        }
    }
    let threshold = maxval / 2;
    // image row 0 is the top of the frame; grid row 0 is the bottom
    let mut free = vec![false; w * h];
    for iy in 0..h {
        for ix in 0..w {
            free[(h - 1 - iy) * w + ix] = values[iy * w + ix] > threshold;
        }
    }
    let openings = if meta_openings.is_empty() {
        None
    } else {
        Some(meta_openings)
    };
    RiverMap::from_binary(&free, w, h, resolution, openings, None)
}

fn read_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

/// Writes the map as a binary PGM (free = white), image row 0 on top.
/// Resolution and openings ride along as comments so the file reloads
/// without external parameters.
pub fn save_pgm(map: &RiverMap, path: &Path) -> Result<()> {
    let (w, h) = (map.grid_width(), map.grid_height());
    let mut header = format!("P5\n# resolution_m {}\n", map.resolution());
    for o in map.openings() {
        header.push_str(&format!(
            "# opening {} {} {} {}\n",
            o.segment.0.x, o.segment.0.y, o.segment.1.x, o.segment.1.y
        ));
    }
    header.push_str(&format!("{} {}\n255\n", w, h));
    let mut out = header.into_bytes();
    for iy in (0..h).rev() {
        for ix in 0..w {
            out.push(if map.cell(ix, iy) == super::Cell::Free { 255 } else { 0 });
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Loads a GeoJSON Polygon feature with `resolution_m` and `open_edges`
/// properties. Coordinates are interpreted as meters in the local frame;
/// an optional `origin` property `[lat, lon]` or `[lat, lon, rotation_deg]`
/// attaches a georeference.
pub fn load_geojson_polygon(text: &str) -> Result<RiverMap> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| Error::validation(format!("unreadable GeoJSON document: {e}")))?;
    let feature = match doc.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => doc
            .get("features")
            .and_then(Value::as_array)
            .and_then(|f| f.first())
            .ok_or_else(|| Error::validation("GeoJSON: empty FeatureCollection"))?,
        Some("Feature") => &doc,
        other => {
            return Err(Error::validation(format!(
                "GeoJSON: expected Feature or FeatureCollection, got {other:?}"
            )))
        }
    };
    let props = feature.get("properties").cloned().unwrap_or(Value::Null);
    let resolution = props
        .get("resolution_m")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::validation("GeoJSON polygon needs a resolution_m property"))?;
    let open_edges = props
        .get("open_edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::validation("GeoJSON polygon needs an open_edges property"))?;
    if open_edges.len() != 2 {
        return Err(Error::validation("open_edges must list exactly two edge indices"));
    }
    let e0 = open_edges[0].as_u64().unwrap_or(u64::MAX) as usize;
    let e1 = open_edges[1].as_u64().unwrap_or(u64::MAX) as usize;

    let geom = feature
        .get("geometry")
        .ok_or_else(|| Error::validation("GeoJSON feature has no geometry"))?;
    if geom.get("type").and_then(Value::as_str) != Some("Polygon") {
        return Err(Error::validation("GeoJSON geometry must be a Polygon"));
    }
    let ring_json = geom
        .get("coordinates")
        .and_then(Value::as_array)
        .and_then(|r| r.first())
        .and_then(Value::as_array)
        .ok_or_else(|| Error::validation("GeoJSON polygon has no outer ring"))?;
    let mut ring: Vec<Point> = Vec::with_capacity(ring_json.len());
    for c in ring_json {
        let xy = c
            .as_array()
            .filter(|a| a.len() >= 2)
            .ok_or_else(|| Error::validation("GeoJSON: bad ring coordinate"))?;
        ring.push(Point::new(
            xy[0].as_f64().unwrap_or(f64::NAN),
            xy[1].as_f64().unwrap_or(f64::NAN),
        ));
    }
    // drop the closing duplicate if present
    if ring.len() > 1 && ring[0].distance(*ring.last().unwrap()) < 1e-9 {
        ring.pop();
    }
    if ring.len() < 3 {
        return Err(Error::validation("GeoJSON polygon ring needs >= 3 vertices"));
    }
    if e0 >= ring.len() || e1 >= ring.len() || e0 == e1 {
        return Err(Error::validation("open_edges indices out of range"));
    }
    let geo = props.get("origin").and_then(Value::as_array).map(|o| GeoRef {
        origin_lat: o.first().and_then(Value::as_f64).unwrap_or(0.0),
        origin_lon: o.get(1).and_then(Value::as_f64).unwrap_or(0.0),
        rotation_rad: o.get(2).and_then(Value::as_f64).unwrap_or(0.0).to_radians(),
    });
    from_polygon(&ring, [e0, e1], resolution, geo)
}

/// Rasterizes a simple polygon ring into a river map. `open_edges` are
/// indices of the two ring edges (edge `i` runs from vertex `i` to `i+1`)
/// that form the inlet and outlet.
pub fn from_polygon(
    ring: &[Point],
    open_edges: [usize; 2],
    resolution: f64,
    geo: Option<GeoRef>,
) -> Result<RiverMap> {
    if resolution <= 0.0 {
        return Err(Error::validation(format!(
            "resolution must be > 0, got {resolution}"
        )));
    }
    let min_x = ring.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let min_y = ring.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let max_x = ring.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let max_y = ring.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    // shift so the polygon sits one obstacle cell inside the grid
    let pad = 1.5 * resolution;
    let shift = Point::new(pad - min_x, pad - min_y);
    let w = ((max_x - min_x + 2.0 * pad) / resolution).ceil() as usize + 1;
    let h = ((max_y - min_y + 2.0 * pad) / resolution).ceil() as usize + 1;
    let shifted: Vec<Point> = ring.iter().map(|p| *p + shift).collect();

    // scanline fill with even-odd semantics over cell centers
    let mut free = vec![false; w * h];
    let n_ring = shifted.len();
    let mut crossings: Vec<f64> = Vec::new();
    for iy in 0..h {
        let y = (iy as f64 + 0.5) * resolution;
        crossings.clear();
        for i in 0..n_ring {
            let a = shifted[i];
            let b = shifted[(i + 1) % n_ring];
            if (a.y > y) != (b.y > y) {
                crossings.push(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
            }
        }
        crossings.sort_by(|p, q| p.partial_cmp(q).unwrap());
        for pair in crossings.chunks_exact(2) {
            let lo = ((pair[0] / resolution - 0.5).ceil().max(0.0)) as usize;
            let hi = (pair[1] / resolution - 0.5).floor();
            if hi < 0.0 {
                continue;
            }
            let hi = (hi as usize).min(w - 1);
            for ix in lo..=hi {
                free[iy * w + ix] = true;
            }
        }
    }
    let openings = open_edges
        .iter()
        .map(|&e| Opening {
            segment: (shifted[e], shifted[(e + 1) % shifted.len()]),
        })
        .collect();
    RiverMap::from_binary(&free, w, h, resolution, Some(openings), geo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_ascii_roundtrip() {
        let txt = b"P2\n# comment\n6 5\n255\n0 0 0 0 0 0\n0 255 255 255 255 0\n0 255 255 255 255 0\n0 255 255 255 255 0\n0 0 0 0 0 0\n";
        let map = parse_pgm(txt, 2.0).unwrap();
        assert_eq!(map.grid_width(), 6);
        assert_eq!(map.free_count(), 12);
    }

    #[test]
    fn pgm_binary_parse() {
        let mut bytes = b"P5\n4 4\n255\n".to_vec();
        bytes.extend_from_slice(&[
            0, 0, 0, 0, //
            0, 255, 255, 0, //
            0, 255, 255, 0, //
            0, 0, 0, 0,
        ]);
        let map = parse_pgm(&bytes, 1.0).unwrap();
        assert_eq!(map.free_count(), 4);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_pgm(b"not a pgm", 1.0).is_err());
        assert!(load_geojson_polygon("{не valid json").is_err());
    }

    #[test]
    fn polygon_band_area_matches_rasterization() {
        // 2760 m x 90 m band at 3 m/cell: free count should be close to
        // area / res^2 = 27600
        let ring = vec![
            Point::new(0.0, 0.0),
            Point::new(2760.0, 0.0),
            Point::new(2760.0, 90.0),
            Point::new(0.0, 90.0),
        ];
        // open edges: the two short sides (edge 1: east, edge 3: west)
        let map = from_polygon(&ring, [1, 3], 3.0, None).unwrap();
        let count = map.free_count() as f64;
        let expected = 2760.0 * 90.0 / 9.0;
        assert!(
            (count - expected).abs() / expected < 0.02,
            "free count {count} vs expected {expected}"
        );
        assert_eq!(map.openings().len(), 2);
    }

    #[test]
    fn geojson_polygon_document() {
        let doc = r#"{
          "type": "Feature",
          "properties": {"resolution_m": 2.0, "open_edges": [1, 3]},
          "geometry": {"type": "Polygon", "coordinates": [[
            [0,0],[100,0],[100,40],[0,40],[0,0]
          ]]}
        }"#;
        let map = load_geojson_polygon(doc).unwrap();
        assert!(map.free_count() > 0);
        assert_eq!(map.openings().len(), 2);
    }
}
