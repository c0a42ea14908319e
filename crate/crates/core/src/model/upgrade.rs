use super::{CityDocument, CURRENT_VERSION};
use crate::crs::urn_to_url;
use crate::error::{Error, Result};

/// Metadata members renamed between 1.0 and 2.0.
const RENAMED: [(&str, &str); 2] = [("datasetTitle", "title"), ("datasetReferenceDate", "referenceDate")];
/// Metadata members without a 2.0 counterpart.
const DROPPED: [&str; 1] = ["presentLoDs"];

/// Convert a 1.0 document to 2.0. Objects, vertices, transform and
/// extensions are left untouched.
pub fn upgrade_document(mut doc: CityDocument) -> Result<CityDocument> {
    if doc.version == CURRENT_VERSION {
        return Err(Error::AlreadyCurrent(doc.version));
    }
    if doc.version != "1.0" {
        return Err(Error::Precondition(format!("cannot upgrade from version `{}`", doc.version)));
    }
    doc.reference_system = urn_to_url(&doc.reference_system);
    for (old, new) in RENAMED {
        if let Some(v) = doc.metadata.remove(old) {
            doc.metadata.entry(new).or_insert(v);
        }
    }
    for k in DROPPED {
        doc.metadata.remove(k);
    }
    doc.version = CURRENT_VERSION.into();
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{new_document, read_document, Transform};
    use serde_json::json;

    fn legacy(urn: &str) -> CityDocument {
        let mut d = new_document(urn, Transform::default()).unwrap();
        d.version = "1.0".into();
        d
    }

    #[test]
    fn urns_become_urls() {
        // hand-rewritten expectations
        let cases = [
            ("urn:ogc:def:crs:ESRI::103885", "https://www.opengis.net/def/crs/EPSG/0/103885"),
            ("urn:ogc:def:crs:EPSG::7415", "https://www.opengis.net/def/crs/EPSG/0/7415"),
            ("urn:ogc:def:crs:IAU_2015::30185", "https://www.opengis.net/def/crs/IAU_2015/0/30185"),
        ];
        for (urn, url) in cases {
            assert_eq!(upgrade_document(legacy(urn)).unwrap().reference_system, url);
        }
    }

    #[test]
    fn metadata_is_relocated() {
        let mut d = legacy("urn:ogc:def:crs:EPSG::7415");
        d.metadata.insert("datasetTitle".into(), json!("Old"));
        d.metadata.insert("presentLoDs".into(), json!({"1": 3}));
        let u = upgrade_document(d).unwrap();
        assert_eq!(u.metadata.get("title"), Some(&json!("Old")));
        assert!(!u.metadata.contains_key("presentLoDs"));
        assert!(!u.metadata.contains_key("datasetTitle"));
    }

    #[test]
    fn current_documents_are_rejected() {
        let d = new_document("https://www.opengis.net/def/crs/EPSG/0/7415", Transform::default()).unwrap();
        assert!(matches!(upgrade_document(d), Err(Error::AlreadyCurrent(_))));
    }

    #[test]
    fn objects_survive() {
        let text = r#"{"type":"CityJSON","version":"1.0","metadata":{"referenceSystem":"urn:ogc:def:crs:EPSG::7415"},
            "CityObjects":{"b":{"type":"Building","attributes":{"h":3},
            "geometry":[{"type":"MultiSurface","lod":1,"boundaries":[[[0,1,2]]]}]}},
            "vertices":[[0,0,0],[1,0,0],[0,1,0]]}"#;
        let d = read_document(text).unwrap();
        let u = upgrade_document(d.clone()).unwrap();
        assert_eq!(u.objects, d.objects);
        assert_eq!(u.vertices, d.vertices);
        assert_eq!(u.transform, d.transform);
    }
}
