use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::{Boundaries, CityDocument, CityObject, ExtensionRef, Geometry, Transform, VertexIndex};
use crate::error::{Error, Result};

/// Serialize to CityJSON text (compact, keys sorted, trailing newline).
pub fn write_document(doc: &CityDocument) -> Result<String> {
    check_writable(doc)?;
    let mut objects = Map::new();
    for (id, o) in &doc.objects {
        let mut m = Map::new();
        m.insert("type".into(), Value::String(o.object_type.clone()));
        m.insert("attributes".into(), Value::Object(o.attributes.clone()));
        m.insert("geometry".into(), Value::Array(o.geometry.iter().map(geometry_json).collect()));
        if !o.parents.is_empty() {
            m.insert("parents".into(), json!(o.parents));
        }
        if !o.children.is_empty() {
            m.insert("children".into(), json!(o.children));
        }
        objects.insert(id.clone(), Value::Object(m));
    }
    let mut metadata = doc.metadata.clone();
    metadata.insert("referenceSystem".into(), Value::String(doc.reference_system.clone()));

    let mut root = Map::new();
    root.insert("type".into(), json!("CityJSON"));
    root.insert("version".into(), json!(doc.version));
    root.insert(
        "transform".into(),
        json!({"scale": doc.transform.scale, "translate": doc.transform.translate}),
    );
    root.insert("metadata".into(), Value::Object(metadata));
    if !doc.extensions.is_empty() {
        let ext: Map<String, Value> = doc
            .extensions
            .iter()
            .map(|(k, e)| (k.clone(), json!({"url": e.url, "version": e.version})))
            .collect();
        root.insert("extensions".into(), Value::Object(ext));
    }
    root.insert("CityObjects".into(), Value::Object(objects));
    root.insert("vertices".into(), json!(doc.vertices));
    let mut text = serde_json::to_string(&Value::Object(root))
        .map_err(|e| Error::InvariantViolation(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn geometry_json(g: &Geometry) -> Value {
    let boundaries = match &g.boundaries {
        Boundaries::MultiSurface(s) => json!(s),
        Boundaries::Solid(s) => json!(s),
    };
    json!({"type": g.kind().as_str(), "lod": g.lod, "boundaries": boundaries})
}

fn check_writable(doc: &CityDocument) -> Result<()> {
    if doc.transform.scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvariantViolation("transform scale must be positive".into()));
    }
    let n = doc.vertices.len();
    for o in doc.objects.values() {
        for g in &o.geometry {
            if g.boundaries.rings().flatten().any(|&i| i >= n) {
                return Err(Error::InvariantViolation(format!("object `{}` has a vertex index ≥ {n}", o.id)));
            }
        }
    }
    Ok(())
}

/// Parse CityJSON text; vertex indices must be in range.
pub fn read_document(text: &str) -> Result<CityDocument> {
    let doc = read_document_unchecked(text)?;
    let n = doc.vertices.len();
    for o in doc.objects.values() {
        for (k, g) in o.geometry.iter().enumerate() {
            if let Some(&i) = g.boundaries.rings().flatten().find(|&&i| i >= n) {
                return Err(Error::parse(
                    format!("CityObjects.{}.geometry[{k}]", o.id),
                    format!("object `{}` references vertex {i} but the pool has {n}", o.id),
                ));
            }
        }
    }
    Ok(doc)
}

/// Parse CityJSON text without checking vertex index ranges, so that a
/// validator can report them.
pub fn read_document_unchecked(text: &str) -> Result<CityDocument> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e))?;
    let root = root.as_object().ok_or_else(|| Error::parse("$", "top level is not an object"))?;
    if root.get("type").and_then(Value::as_str) != Some("CityJSON") {
        return Err(Error::parse("type", "expected \"CityJSON\""));
    }
    let version = root
        .get("version")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse("version", "missing or not a string"))?
        .to_string();

    let raw_vertices = match root.get("vertices") {
        None => Vec::new(),
        Some(v) => v.as_array().ok_or_else(|| Error::parse("vertices", "not an array"))?.clone(),
    };
    let (transform, vertices) = match root.get("transform") {
        Some(t) => (read_transform(t)?, read_int_vertices(&raw_vertices)?),
        None => read_untransformed(&raw_vertices)?,
    };

    let mut metadata = match root.get("metadata") {
        None => Map::new(),
        Some(m) => m.as_object().ok_or_else(|| Error::parse("metadata", "not an object"))?.clone(),
    };
    let reference_system = match metadata.remove("referenceSystem") {
        None => String::new(),
        Some(Value::String(s)) => s,
        Some(_) => return Err(Error::parse("metadata.referenceSystem", "not a string")),
    };

    let mut extensions = BTreeMap::new();
    if let Some(ext) = root.get("extensions") {
        let ext = ext.as_object().ok_or_else(|| Error::parse("extensions", "not an object"))?;
        for (name, e) in ext {
            let loc = format!("extensions.{name}");
            let field = |k: &str| -> Result<String> {
                e.get(k)
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .ok_or_else(|| Error::parse(&loc, format!("missing `{k}`")))
            };
            extensions.insert(
                name.clone(),
                ExtensionRef {
                    url: field("url")?,
                    version: field("version")?,
                },
            );
        }
    }

    let mut objects = BTreeMap::new();
    if let Some(cos) = root.get("CityObjects") {
        let cos = cos.as_object().ok_or_else(|| Error::parse("CityObjects", "not an object"))?;
        for (id, o) in cos {
            objects.insert(id.clone(), read_object(id, o)?);
        }
    }

    let mut doc = CityDocument {
        version,
        transform,
        vertices,
        objects,
        reference_system,
        extensions,
        metadata,
        index: VertexIndex::default(),
    };
    doc.rebuild_index();
    Ok(doc)
}

fn read_transform(t: &Value) -> Result<Transform> {
    let triple = |k: &str| -> Result<[f64; 3]> {
        let loc = format!("transform.{k}");
        let arr = t.get(k).and_then(Value::as_array).ok_or_else(|| Error::parse(&loc, "missing"))?;
        if arr.len() != 3 {
            return Err(Error::parse(&loc, "expected 3 numbers"));
        }
        let mut out = [0.0; 3];
        for (i, v) in arr.iter().enumerate() {
            out[i] = v.as_f64().ok_or_else(|| Error::parse(&loc, "not a number"))?;
        }
        Ok(out)
    };
    Ok(Transform {
        scale: triple("scale")?,
        translate: triple("translate")?,
    })
}

fn read_int_vertices(raw: &[Value]) -> Result<Vec<[i64; 3]>> {
    raw.iter()
        .enumerate()
        .map(|(i, v)| {
            let loc = format!("vertices[{i}]");
            let arr = v.as_array().filter(|a| a.len() == 3).ok_or_else(|| Error::parse(&loc, "expected 3 integers"))?;
            let mut out = [0i64; 3];
            for (k, c) in arr.iter().enumerate() {
                out[k] = c.as_i64().ok_or_else(|| Error::parse(&loc, "expected integers"))?;
            }
            Ok(out)
        })
        .collect()
}

/// Legacy files may omit the transform. Integral coordinates keep scale 1;
/// fractional ones are quantized at the default scale.
fn read_untransformed(raw: &[Value]) -> Result<(Transform, Vec<[i64; 3]>)> {
    if let Ok(v) = read_int_vertices(raw) {
        return Ok((
            Transform {
                scale: [1.0; 3],
                translate: [0.0; 3],
            },
            v,
        ));
    }
    let t = Transform::default();
    let v = raw
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let loc = format!("vertices[{i}]");
            let arr = v.as_array().filter(|a| a.len() == 3).ok_or_else(|| Error::parse(&loc, "expected 3 numbers"))?;
            let mut p = [0.0; 3];
            for (k, c) in arr.iter().enumerate() {
                p[k] = c.as_f64().ok_or_else(|| Error::parse(&loc, "not a number"))?;
            }
            Ok(t.quantize(p))
        })
        .collect::<Result<_>>()?;
    Ok((t, v))
}

fn read_object(id: &str, o: &Value) -> Result<CityObject> {
    let loc = format!("CityObjects.{id}");
    let o = o.as_object().ok_or_else(|| Error::parse(&loc, "not an object"))?;
    let object_type = o
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse(&loc, "missing `type`"))?
        .to_string();
    let attributes = match o.get("attributes") {
        None => Map::new(),
        Some(a) => a.as_object().ok_or_else(|| Error::parse(&loc, "`attributes` is not an object"))?.clone(),
    };
    let ids = |k: &str| -> Result<Vec<String>> {
        match o.get(k) {
            None => Ok(Vec::new()),
            Some(v) => v
                .as_array()
                .and_then(|a| a.iter().map(|x| x.as_str().map(str::to_string)).collect::<Option<Vec<_>>>())
                .ok_or_else(|| Error::parse(&loc, format!("`{k}` is not a list of ids"))),
        }
    };
    let mut geometry = Vec::new();
    if let Some(gs) = o.get("geometry") {
        let gs = gs.as_array().ok_or_else(|| Error::parse(&loc, "`geometry` is not an array"))?;
        for (k, g) in gs.iter().enumerate() {
            geometry.push(read_geometry(&format!("{loc}.geometry[{k}]"), g)?);
        }
    }
    Ok(CityObject {
        id: id.to_string(),
        object_type,
        attributes,
        geometry,
        parents: ids("parents")?,
        children: ids("children")?,
    })
}

fn read_geometry(loc: &str, g: &Value) -> Result<Geometry> {
    let kind = g.get("type").and_then(Value::as_str).ok_or_else(|| Error::parse(loc, "missing `type`"))?;
    let lod = match g.get("lod") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => return Err(Error::parse(loc, "missing `lod`")),
    };
    let b = g.get("boundaries").ok_or_else(|| Error::parse(loc, "missing `boundaries`"))?;
    let boundaries = match kind {
        "MultiSurface" => Boundaries::MultiSurface(surfaces(loc, b)?),
        "Solid" => Boundaries::Solid(list(loc, b, |s| surfaces(loc, s))?),
        other => return Err(Error::parse(loc, format!("unsupported geometry type `{other}`"))),
    };
    Ok(Geometry { lod, boundaries })
}

fn list<T>(loc: &str, v: &Value, f: impl Fn(&Value) -> Result<T>) -> Result<Vec<T>> {
    v.as_array()
        .ok_or_else(|| Error::parse(loc, "malformed boundaries"))?
        .iter()
        .map(f)
        .collect()
}

fn surfaces(loc: &str, v: &Value) -> Result<Vec<Vec<Vec<usize>>>> {
    list(loc, v, |s| {
        list(loc, s, |r| {
            list(loc, r, |i| {
                i.as_u64()
                    .map(|i| i as usize)
                    .ok_or_else(|| Error::parse(loc, "vertex index is not a non-negative integer"))
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crs::crs_url;
    use crate::model::{new_document, WorldGeometry};

    fn sample() -> CityDocument {
        let mut d = new_document(&crs_url("EPSG", "103885").unwrap(), Transform::default()).unwrap();
        d.declare_extension("3DSpace", "https://example.org/space.ext.json", "2.0");
        d.metadata.insert("title".into(), json!("demo"));
        let mut a = Map::new();
        a.insert("craterID".into(), json!(14300));
        a.insert("diameter".into(), json!(47520.0));
        a.insert("target".into(), json!("Mars"));
        a.insert("approvalDate".into(), json!(2007));
        let square = vec![vec![[0.0, 0.0, 1.5], [2.0, 0.0, 1.5], [2.0, 2.0, 1.5], [0.0, 2.0, 1.5]]];
        d.add_object(
            None,
            CityObject::new("14300", "GenericCityObject").with_attributes(a),
            vec![WorldGeometry::multi_surface(vec![square])],
        )
        .unwrap();
        d.add_object(None, CityObject::new("kid", "GenericCityObject").with_parent("14300"), vec![])
            .unwrap();
        d
    }

    #[test]
    fn round_trip() {
        let d = sample();
        let text = write_document(&d).unwrap();
        let back = read_document(&text).unwrap();
        assert_eq!(back, d);
        assert!(text.contains(r#""diameter":47520.0"#));
        assert!(text.contains(r#""craterID":14300"#));
        assert_eq!(write_document(&back).unwrap(), text);
    }

    #[test]
    fn empty_round_trip() {
        let d = new_document("https://www.opengis.net/def/crs/EPSG/0/103885", Transform::default()).unwrap();
        assert_eq!(read_document(&write_document(&d).unwrap()).unwrap(), d);
    }

    #[test]
    fn out_of_range_index_names_object() {
        let text = write_document(&sample()).unwrap().replace("[[[0,1,2,3]]]", "[[[0,1,2,9]]]");
        match read_document(&text) {
            Err(Error::Parse { location, message }) => {
                assert!(location.contains("14300"));
                assert!(message.contains("14300"));
            }
            other => panic!("{other:?}"),
        }
        assert!(read_document_unchecked(&text).is_ok());
    }

    #[test]
    fn numeric_lod_and_missing_transform() {
        let text = r#"{"type":"CityJSON","version":"1.0","CityObjects":{"a":{"type":"Building",
            "geometry":[{"type":"MultiSurface","lod":2,"boundaries":[[[0,1,2]]]}]}},
            "vertices":[[0,0,0],[1,0,0],[0,1,0]]}"#;
        let d = read_document(text).unwrap();
        assert_eq!(d.objects["a"].geometry[0].lod, "2");
        assert_eq!(d.transform.scale, [1.0; 3]);
        let frac = text.replace("[1,0,0]", "[1.25,0,0]");
        let d = read_document(&frac).unwrap();
        assert_eq!(d.vertices[1], [1250, 0, 0]);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(read_document("{"), Err(Error::Parse { .. })));
        assert!(matches!(read_document(r#"{"type":"Other"}"#), Err(Error::Parse { .. })));
        let bad_geom = r#"{"type":"CityJSON","version":"2.0","CityObjects":{"a":{"type":"X",
            "geometry":[{"type":"MultiPoint","lod":"1","boundaries":[0]}]}}}"#;
        assert!(matches!(read_document(bad_geom), Err(Error::Parse { .. })));
    }
}
