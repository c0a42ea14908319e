//! Vector inputs for recipes.
//!
//! Footprints are GeoJSON-shaped, but coordinates are read as planar metres in
//! the recipe's CRS, not as WGS84 longitude/latitude. Pass a projection to
//! treat them as planetocentric `[lon, lat]` degrees instead.

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::builders::{SpaceSolidInput, UnitInput, UnitSolid};
use crate::crs::ProjectionSpec;
use crate::error::{Error, Result};
use crate::geometry::{Point2, Point3, Polygon2, SolidMesh};

#[derive(Debug, Clone, PartialEq)]
pub enum InputGeometry {
    Point(Point2),
    Polygon(Polygon2),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputFeature {
    pub geometry: InputGeometry,
    pub properties: Map<String, Value>,
}

impl InputFeature {
    pub fn polygon(&self) -> Result<&Polygon2> {
        match &self.geometry {
            InputGeometry::Polygon(p) => Ok(p),
            InputGeometry::Point(_) => Err(Error::Recipe("expected a polygon, found a point".into())),
        }
    }
}

/// Features of a GeoJSON document (FeatureCollection, Feature or bare
/// geometry). MultiPolygons yield one feature per part.
pub fn read_features(text: &str, projection: Option<&ProjectionSpec>) -> Result<Vec<InputFeature>> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e))?;
    let mut out = Vec::new();
    collect(&v, "$", projection, &mut out)?;
    Ok(out)
}

fn collect(v: &Value, loc: &str, proj: Option<&ProjectionSpec>, out: &mut Vec<InputFeature>) -> Result<()> {
    let ty = v.get("type").and_then(Value::as_str).ok_or_else(|| Error::parse(loc, "missing `type`"))?;
    match ty {
        "FeatureCollection" => {
            let fs = v
                .get("features")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::parse(loc, "missing `features`"))?;
            for (i, f) in fs.iter().enumerate() {
                collect(f, &format!("{loc}.features[{i}]"), proj, out)?;
            }
        }
        "Feature" => {
            let props = match v.get("properties") {
                Some(Value::Object(m)) => m.clone(),
                _ => Map::new(),
            };
            let g = v.get("geometry").ok_or_else(|| Error::parse(loc, "missing `geometry`"))?;
            for geometry in geometries(g, &format!("{loc}.geometry"), proj)? {
                out.push(InputFeature { geometry, properties: props.clone() });
            }
        }
        _ => {
            for geometry in geometries(v, loc, proj)? {
                out.push(InputFeature { geometry, properties: Map::new() });
            }
        }
    }
    Ok(())
}

fn geometries(g: &Value, loc: &str, proj: Option<&ProjectionSpec>) -> Result<Vec<InputGeometry>> {
    let ty = g.get("type").and_then(Value::as_str).ok_or_else(|| Error::parse(loc, "missing `type`"))?;
    let coords = g.get("coordinates").ok_or_else(|| Error::parse(loc, "missing `coordinates`"))?;
    let point = |c: &Value| -> Result<Point2> {
        let a = c.as_array().filter(|a| a.len() >= 2).ok_or_else(|| Error::parse(loc, "bad position"))?;
        let x = a[0].as_f64().ok_or_else(|| Error::parse(loc, "bad position"))?;
        let y = a[1].as_f64().ok_or_else(|| Error::parse(loc, "bad position"))?;
        match proj {
            Some(p) => {
                let (px, py) = p.forward(y, x)?;
                Ok([px, py])
            }
            None => Ok([x, y]),
        }
    };
    let ring = |r: &Value| -> Result<Vec<Point2>> {
        let mut pts = r
            .as_array()
            .ok_or_else(|| Error::parse(loc, "bad ring"))?
            .iter()
            .map(point)
            .collect::<Result<Vec<_>>>()?;
        if pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        Ok(pts)
    };
    let polygon = |p: &Value| -> Result<Polygon2> {
        let rings = p.as_array().ok_or_else(|| Error::parse(loc, "bad polygon"))?;
        let mut rings = rings.iter().map(ring).collect::<Result<Vec<_>>>()?;
        if rings.is_empty() {
            return Err(Error::parse(loc, "polygon without rings"));
        }
        let exterior = rings.remove(0);
        Polygon2::new(exterior, rings)
    };
    match ty {
        "Point" => Ok(vec![InputGeometry::Point(point(coords)?)]),
        "MultiPoint" => list(coords, loc)?.iter().map(|c| point(c).map(InputGeometry::Point)).collect(),
        "Polygon" => Ok(vec![InputGeometry::Polygon(polygon(coords)?)]),
        "MultiPolygon" => list(coords, loc)?.iter().map(|c| polygon(c).map(InputGeometry::Polygon)).collect(),
        other => Err(Error::parse(loc, format!("unsupported geometry `{other}`"))),
    }
}

fn list<'v>(v: &'v Value, loc: &str) -> Result<&'v Vec<Value>> {
    v.as_array().ok_or_else(|| Error::parse(loc, "coordinates are not an array"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolidsFile {
    building_id: String,
    #[serde(default)]
    building_attrs: Map<String, Value>,
    #[serde(default)]
    envelope: Option<Vec<Vec<Vec<Vec<Point3>>>>>,
    #[serde(default)]
    units: Vec<UnitFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitFile {
    unit_id: String,
    #[serde(default)]
    unit_attrs: Map<String, Value>,
    #[serde(default)]
    footprint: Option<Vec<Point2>>,
    #[serde(default)]
    z_low: Option<f64>,
    #[serde(default)]
    z_high: Option<f64>,
    #[serde(default)]
    shells: Option<Vec<Vec<Vec<Vec<Point3>>>>>,
}

/// Building/space input:
///
/// ```json
/// {"building_id": "building1", "building_attrs": {},
///  "units": [{"unit_id": "u1", "unit_attrs": {},
///             "footprint": [[0,0],[5,0],[5,4],[0,4]], "z_low": 0, "z_high": 3}]}
/// ```
///
/// A unit may give `shells` (faces of rings of `[x, y, z]`) instead of a
/// footprint and heights. `envelope` optionally replaces the bounding solid.
pub fn read_space_solids(text: &str) -> Result<SpaceSolidInput> {
    let f: SolidsFile = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e))?;
    let units = f
        .units
        .into_iter()
        .map(|u| {
            let loc = format!("unit {}", u.unit_id);
            let solid = match (u.footprint, u.z_low, u.z_high, u.shells) {
                (Some(fp), Some(z_low), Some(z_high), None) => UnitSolid::Prism {
                    footprint: Polygon2::new(fp, vec![])?,
                    z_low,
                    z_high,
                },
                (None, None, None, Some(shells)) => UnitSolid::Mesh(SolidMesh { shells }),
                _ => return Err(Error::parse(loc, "give either footprint + z_low + z_high, or shells")),
            };
            Ok(UnitInput {
                unit_id: u.unit_id,
                unit_attrs: u.unit_attrs,
                solid,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SpaceSolidInput {
        building_id: f.building_id,
        building_attrs: f.building_attrs,
        envelope: f.envelope.map(|shells| SolidMesh { shells }),
        units,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crs::moon_albers_30185;

    #[test]
    fn feature_collection() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"name":"a"},
             "geometry":{"type":"Polygon","coordinates":[[[0,0],[0,2],[2,2],[2,0],[0,0]]]}},
            {"type":"Feature","properties":{"name":"b"},"geometry":{"type":"Point","coordinates":[5,6]}},
            {"type":"Feature","properties":{},"geometry":{"type":"MultiPolygon","coordinates":[
                [[[0,0],[1,0],[1,1],[0,0]]], [[[5,5],[6,5],[6,6],[5,5]]]]}}]}"#;
        let fs = read_features(text, None).unwrap();
        assert_eq!(fs.len(), 4);
        let p = fs[0].polygon().unwrap();
        assert_eq!(p.area(), 4.0);
        assert_eq!(p.exterior().len(), 4);
        assert_eq!(fs[0].properties["name"], "a");
        assert_eq!(fs[1].geometry, InputGeometry::Point([5.0, 6.0]));
        assert!(fs[1].polygon().is_err());
    }

    #[test]
    fn geographic_points_are_projected() {
        let text = r#"{"type":"Point","coordinates":[23.47314, 0.67416]}"#;
        let spec = moon_albers_30185();
        let fs = read_features(text, Some(&spec)).unwrap();
        let (x, y) = spec.forward(0.67416, 23.47314).unwrap();
        assert_eq!(fs[0].geometry, InputGeometry::Point([x, y]));
    }

    #[test]
    fn bad_inputs() {
        assert!(read_features(r#"{"type":"LineString","coordinates":[[0,0],[1,1]]}"#, None).is_err());
        assert!(read_features(r#"{"type":"Polygon","coordinates":[[[0,0],[1,1],[2,2]]]}"#, None).is_err());
        assert!(read_features("[", None).is_err());
    }

    #[test]
    fn space_solids() {
        let text = r#"{"building_id":"building1","units":[
            {"unit_id":"0pNy6pOyf7JPmXRLgxs3sW","footprint":[[0,0],[5,0],[5,4],[0,4]],"z_low":0,"z_high":3},
            {"unit_id":"u2","shells":[[[[[0,0,0],[0,1,0],[1,0,0]]]]]}]}"#;
        let s = read_space_solids(text).unwrap();
        assert_eq!(s.units.len(), 2);
        assert!(matches!(s.units[1].solid, UnitSolid::Mesh(_)));
        let bad = r#"{"building_id":"b","units":[{"unit_id":"u","z_low":0}]}"#;
        assert!(read_space_solids(bad).is_err());
    }
}
