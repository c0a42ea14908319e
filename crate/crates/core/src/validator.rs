//! Document conformance checks. See [`crate::issue`] for the code table.

use std::collections::{BTreeMap, HashSet};

use serde_json::Value;

use crate::crs::parse_crs_url;
use crate::geometry::check_watertight_indexed;
use crate::issue::Issue;
use crate::model::{Boundaries, CityDocument, CORE_TYPES};
use crate::registry::ExtensionRegistry;

pub const RELATED_OBJECT_ID: &str = "relatedObjectID";

fn object_path(id: &str) -> String {
    format!("CityObjects.{id}")
}

pub fn validate_core(doc: &CityDocument) -> Vec<Issue> {
    let mut issues = Vec::new();
    if doc.version != "1.0" && doc.version != "2.0" {
        issues.push(Issue::error("VERSION", "version", format!("unsupported version `{}`", doc.version)));
    }
    if doc.transform.scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        issues.push(Issue::error(
            "TRANSFORM_SCALE",
            "transform.scale",
            format!("scale must be positive, got {:?}", doc.transform.scale),
        ));
    }
    if doc.version == "2.0" && parse_crs_url(&doc.reference_system).is_none() {
        issues.push(Issue::error(
            "CRS_URL",
            "metadata.referenceSystem",
            format!("`{}` is not an OGC CRS URL", doc.reference_system),
        ));
    }

    let n = doc.vertices.len();
    for (id, o) in &doc.objects {
        for (k, g) in o.geometry.iter().enumerate() {
            let path = format!("{}.geometry[{k}]", object_path(id));
            if let Some(&i) = g.boundaries.rings().flatten().find(|&&i| i >= n) {
                issues.push(Issue::error("VTX_RANGE", &path, format!("vertex index {i} ≥ pool size {n}")).on(id));
            }
            let short = g
                .boundaries
                .rings()
                .filter(|r| r.iter().collect::<HashSet<_>>().len() < 3)
                .count();
            if short > 0 {
                issues.push(
                    Issue::error("RING_SHORT", &path, format!("{short} ring(s) with fewer than 3 distinct vertices"))
                        .on(id),
                );
            }
        }
        for (field, links, back) in [("parents", &o.parents, true), ("children", &o.children, false)] {
            for other in links {
                let path = format!("{}.{field}", object_path(id));
                match doc.objects.get(other) {
                    None => issues.push(Issue::error("REL_MISSING", path, format!("`{other}` is not in the document")).on(id)),
                    Some(t) => {
                        let mirrored = if back { &t.children } else { &t.parents };
                        if !mirrored.contains(id) {
                            let msg = format!(
                                "`{other}` does not list `{id}` among its {}",
                                if back { "children" } else { "parents" }
                            );
                            issues.push(Issue::error("REL_ASYMMETRY", path, msg).on(id));
                        }
                    }
                }
            }
        }
    }

    let mut seen = HashSet::with_capacity(n);
    let dups = doc.vertices.iter().filter(|v| !seen.insert(**v)).count();
    if dups > 0 {
        issues.push(Issue::warning("DUP_VERTEX", "vertices", format!("{dups} repeated vertex triplet(s)")));
    }
    issues
}

/// Check objects against `registry`. Undeclared attributes on extension
/// objects are warnings unless `strict`.
pub fn validate_extension(doc: &CityDocument, registry: &ExtensionRegistry, strict: bool) -> Vec<Issue> {
    let mut issues = Vec::new();
    if !doc.extensions.contains_key(&registry.extension_name) {
        issues.push(Issue::error(
            "EXT_NOT_DECLARED",
            "extensions",
            format!("extension `{}` is not declared", registry.extension_name),
        ));
    }

    for (id, o) in &doc.objects {
        let path = object_path(id);
        let ty = o.object_type.as_str();
        let resolved = if let Some(rest) = ty.strip_prefix('+') {
            if registry.lookup(ty).is_none() {
                issues.push(
                    Issue::error("EXT_UNKNOWN_TYPE", format!("{path}.type"), format!("`+{rest}` is not defined by the extension"))
                        .on(id),
                );
                continue;
            }
            ty.to_string()
        } else if CORE_TYPES.contains(&ty) {
            continue;
        } else {
            issues.push(
                Issue::error("EXT_NAME_PREFIX", format!("{path}.type"), format!("non-core type `{ty}` lacks the `+` prefix"))
                    .on(id),
            );
            let prefixed = format!("+{ty}");
            if registry.lookup(&prefixed).is_none() {
                continue;
            }
            prefixed
        };

        let specs = registry.effective_attributes(&resolved);
        for spec in &specs {
            let apath = format!("{path}.attributes.{}", spec.name);
            match o.attributes.get(&spec.name) {
                None if spec.required => issues.push(
                    Issue::error("ATTR_REQUIRED", apath, format!("`{}` is required on {resolved}", spec.name)).on(id),
                ),
                None => {}
                Some(v) if !spec.kind_accepts(v) => issues.push(
                    Issue::error("ATTR_TYPE", apath, format!("expected a {:?} value, got {v}", spec.value_kind)).on(id),
                ),
                Some(v) => {
                    if let Some(s) = v.as_str() {
                        if !spec.enum_accepts(s) {
                            issues.push(Issue::error("ATTR_ENUM", apath, format!("`{s}` is not an allowed value")).on(id));
                        }
                    }
                }
            }
        }
        for name in o.attributes.keys() {
            if !specs.iter().any(|s| &s.name == name) {
                let apath = format!("{path}.attributes.{name}");
                let msg = format!("`{name}` is not declared for {resolved}");
                issues.push(if strict {
                    Issue::error("ATTR_UNKNOWN", apath, msg).on(id)
                } else {
                    Issue::warning("ATTR_UNKNOWN", apath, msg).on(id)
                });
            }
        }

        if registry.geometry_required(&resolved) && o.geometry.is_empty() {
            issues.push(Issue::error("GEOM_REQUIRED", format!("{path}.geometry"), format!("{resolved} needs geometry")).on(id));
        }

        if let Some(Value::String(target)) = o.attributes.get(RELATED_OBJECT_ID) {
            let rpath = format!("{path}.attributes.{RELATED_OBJECT_ID}");
            match doc.objects.get(target) {
                None => issues.push(Issue::error("REF_INTEGRITY", rpath, format!("`{target}` is not in the document")).on(id)),
                Some(t) if !registry.association_allowed(&resolved, &t.object_type) => issues.push(
                    Issue::error(
                        "REF_TARGET_TYPE",
                        rpath,
                        format!("{resolved} cannot relate to `{target}` of type {}", t.object_type),
                    )
                    .on(id),
                ),
                Some(_) => {}
            }
        }

        for rel in registry.compositions() {
            if registry.is_a(&resolved, &rel.target) {
                let wholes = o
                    .parents
                    .iter()
                    .filter(|p| doc.objects.get(*p).is_some_and(|w| registry.is_a(&w.object_type, &rel.source)))
                    .count() as u32;
                if !rel.source_multiplicity.admits(wholes) {
                    issues.push(
                        Issue::error(
                            "MULT_COMPOSITION",
                            format!("{path}.parents"),
                            format!("{wholes} {} parent(s), expected {}", rel.source, rel.source_multiplicity),
                        )
                        .on(id),
                    );
                }
            }
            if registry.is_a(&resolved, &rel.source) {
                let parts = o
                    .children
                    .iter()
                    .filter(|c| doc.objects.get(*c).is_some_and(|p| registry.is_a(&p.object_type, &rel.target)))
                    .count() as u32;
                if !rel.target_multiplicity.admits(parts) {
                    issues.push(
                        Issue::error(
                            "MULT_COMPOSITION",
                            format!("{path}.children"),
                            format!("{parts} {} child(ren), expected {}", rel.target, rel.target_multiplicity),
                        )
                        .on(id),
                    );
                }
            }
        }
    }
    issues
}

/// Watertightness of every Solid, one issue per code and geometry.
pub fn validate_solids(doc: &CityDocument) -> Vec<Issue> {
    let mut issues = Vec::new();
    // coordinates are meaningless under a bad scale; TRANSFORM_SCALE covers it
    if doc.transform.scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return issues;
    }
    let n = doc.vertices.len();
    for (id, o) in &doc.objects {
        for (k, g) in o.geometry.iter().enumerate() {
            let Boundaries::Solid(shells) = &g.boundaries else {
                continue;
            };
            if g.boundaries.rings().flatten().any(|&i| i >= n) {
                continue;
            }
            let mut by_code: BTreeMap<&str, Vec<String>> = BTreeMap::new();
            for issue in check_watertight_indexed(shells, |i| doc.world_vertex(i)) {
                let code = match issue.code.as_str() {
                    "UNMATCHED_EDGE" => "SOLID_OPEN",
                    "NON_PLANAR" => "SOLID_NONPLANAR",
                    _ => "SOLID_ORIENTATION",
                };
                by_code.entry(code).or_default().push(issue.message);
            }
            let path = format!("{}.geometry[{k}]", object_path(id));
            for (code, msgs) in by_code {
                let msg = format!("{} defect(s); first: {}", msgs.len(), msgs[0]);
                issues.push(Issue::error(code, &path, msg).on(id));
            }
        }
    }
    issues
}

/// All checks in order: core, extension (when a registry is given), solids.
pub fn validate(doc: &CityDocument, registry: Option<&ExtensionRegistry>, strict: bool) -> Vec<Issue> {
    let mut issues = validate_core(doc);
    if let Some(r) = registry {
        issues.extend(validate_extension(doc, r, strict));
    }
    issues.extend(validate_solids(doc));
    issues
}
