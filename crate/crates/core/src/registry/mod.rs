//! The extension's feature model as data: feature types, their attributes,
//! and the relationships between them.
//!
//! [`builtin_registry`] returns the `3DSpace` model. [`validate_registry`]
//! checks any registry for naming, reference and inheritance problems, and
//! [`schema::emit_extension_schema`] writes the CityJSON extension file.

pub mod schema;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::issue::Issue;

pub use schema::{emit_extension_schema, registry_from_schema};

pub const EXTENSION_NAME: &str = "3DSpace";
pub const EXTENSION_VERSION: &str = "2.0";
pub const EXTENSION_URL: &str =
    "https://raw.githubusercontent.com/geospatialstudies/space/refs/heads/main/space.ext.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueKind {
    String,
    Number,
    Integer,
    DateString,
    Enum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub value_kind: ValueKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_values: Option<Vec<String>>,
    pub required: bool,
}

impl AttributeSpec {
    fn new(name: &str, value_kind: ValueKind, required: bool) -> Self {
        AttributeSpec {
            name: name.to_string(),
            value_kind,
            allowed_values: None,
            required,
        }
    }

    fn string(name: &str) -> Self {
        Self::new(name, ValueKind::String, false)
    }

    fn number(name: &str) -> Self {
        Self::new(name, ValueKind::Number, false)
    }

    fn integer(name: &str) -> Self {
        Self::new(name, ValueKind::Integer, false)
    }

    fn one_of(name: &str, values: &[&str]) -> Self {
        AttributeSpec {
            allowed_values: Some(values.iter().map(|v| v.to_string()).collect()),
            ..Self::new(name, ValueKind::Enum, false)
        }
    }

    fn required(mut self) -> Self {
        self.required = true;
        self
    }

    /// Whether `value` satisfies the kind (not the enum membership).
    pub fn kind_accepts(&self, value: &serde_json::Value) -> bool {
        match self.value_kind {
            ValueKind::String | ValueKind::Enum => value.is_string(),
            ValueKind::Number => value.is_number(),
            ValueKind::Integer => value.is_i64() || value.is_u64(),
            ValueKind::DateString => value.as_str().is_some_and(is_iso_date),
        }
    }

    pub fn enum_accepts(&self, value: &str) -> bool {
        match &self.allowed_values {
            Some(values) => values.iter().any(|v| v == value),
            None => true,
        }
    }
}

/// `YYYY-MM-DD` with plausible month/day ranges.
fn is_iso_date(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return false;
    }
    let digits = |r: std::ops::Range<usize>| b[r].iter().all(u8::is_ascii_digit);
    if !(digits(0..4) && digits(5..7) && digits(8..10)) {
        return false;
    }
    let month: u32 = s[5..7].parse().unwrap_or(0);
    let day: u32 = s[8..10].parse().unwrap_or(0);
    (1..=12).contains(&month) && (1..=31).contains(&day)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoreBase {
    AbstractCityObject,
    AbstractBuilding,
}

impl CoreBase {
    pub fn schema_ref(self) -> &'static str {
        match self {
            CoreBase::AbstractCityObject => "cityobjects.schema.json#/_AbstractCityObject",
            CoreBase::AbstractBuilding => "cityobjects.schema.json#/_AbstractBuilding",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureTypeSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    pub core_base: CoreBase,
    pub attributes: Vec<AttributeSpec>,
    pub geometry_required: bool,
    pub toplevel: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationshipKind {
    Composition,
    Association,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Realization {
    ParentsChildren,
    RelatedObjectId,
}

/// A UML-style multiplicity range; `max == None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Multiplicity {
    pub min: u32,
    pub max: Option<u32>,
}

impl Multiplicity {
    pub const ONE: Multiplicity = Multiplicity { min: 1, max: Some(1) };
    pub const OPTIONAL: Multiplicity = Multiplicity { min: 0, max: Some(1) };
    pub const MANY: Multiplicity = Multiplicity { min: 0, max: None };

    pub fn admits(&self, count: u32) -> bool {
        count >= self.min && self.max.is_none_or(|m| count <= m)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(m) if m == self.min => write!(f, "{m}"),
            Some(m) => write!(f, "{}..{m}", self.min),
            None => write!(f, "{}..*", self.min),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationshipSpec {
    pub kind: RelationshipKind,
    pub source: String,
    pub target: String,
    pub source_multiplicity: Multiplicity,
    pub target_multiplicity: Multiplicity,
    pub realization: Realization,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionRegistry {
    pub extension_name: String,
    pub extension_version: String,
    pub schema_url: String,
    pub types: Vec<FeatureTypeSpec>,
    pub relationships: Vec<RelationshipSpec>,
}

pub const SURFACE_OBJECT: &str = "+SpaceSurfaceObject";
pub const CRATER: &str = "+SpaceCrater";
pub const PLAN_UNIT: &str = "+SpacePlanUnit";
pub const BUILDING: &str = "+SpaceBuilding";
pub const BUILDING_UNIT: &str = "+SpaceBuildingUnit";
pub const LEGAL: &str = "+SpaceLegal";
pub const SCIENTIFIC_EVIDENCE: &str = "+SpaceScientificEvidence";
pub const PROTECTED_AREA: &str = "+SpaceProtectedArea";
pub const COMMON_AREA: &str = "+SpaceCommonArea";
pub const RESTRICTION: &str = "+SpaceRestriction";

pub const EVIDENCE_TYPES: [&str; 3] = ["waterIce", "geological", "astrobiological"];
pub const RESTRICTION_TYPES: [&str; 4] = ["historicalSite", "mining", "scientific", "settlement"];
pub const ANALYSIS_TYPES: [&str; 4] = ["2DBuffer", "3DBuffer", "Extrusion", "BufferExtrusion"];
pub const PLAN_USE_TYPES: [&str; 2] = ["mining", "settlement"];

fn feature(
    name: &str,
    parent: Option<&str>,
    core_base: CoreBase,
    attributes: Vec<AttributeSpec>,
) -> FeatureTypeSpec {
    FeatureTypeSpec {
        name: name.to_string(),
        parent: parent.map(str::to_string),
        core_base,
        attributes,
        geometry_required: false,
        toplevel: true,
    }
}

fn relationship(
    kind: RelationshipKind,
    source: &str,
    source_multiplicity: Multiplicity,
    target: &str,
    target_multiplicity: Multiplicity,
) -> RelationshipSpec {
    RelationshipSpec {
        kind,
        source: source.to_string(),
        target: target.to_string(),
        source_multiplicity,
        target_multiplicity,
        realization: match kind {
            RelationshipKind::Composition => Realization::ParentsChildren,
            RelationshipKind::Association => Realization::RelatedObjectId,
        },
    }
}

/// The `3DSpace` feature model.
pub fn builtin_registry() -> ExtensionRegistry {
    use AttributeSpec as A;
    use CoreBase::*;

    let mut legal = feature(
        LEGAL,
        None,
        AbstractCityObject,
        vec![A::string("legalObjectID"), A::string("relatedObjectID")],
    );
    legal.geometry_required = true;

    let mut unit = feature(
        BUILDING_UNIT,
        None,
        AbstractCityObject,
        vec![A::string("unitUseType")],
    );
    unit.toplevel = false;

    let types = vec![
        feature(
            SURFACE_OBJECT,
            None,
            AbstractCityObject,
            vec![
                A::string("objectName"),
                A::string("objectType"),
                A::new("registrationDate", ValueKind::DateString, false),
            ],
        ),
        feature(
            CRATER,
            Some(SURFACE_OBJECT),
            AbstractCityObject,
            vec![
                A::integer("craterID").required(),
                A::string("craterName").required(),
                A::number("diameter").required(),
                A::number("depth"),
                A::number("albedo"),
                A::integer("IAUID"),
                A::integer("approvalDate"),
                A::string("target"),
            ],
        ),
        feature(
            PLAN_UNIT,
            None,
            AbstractCityObject,
            vec![
                A::one_of("planUseType", &PLAN_USE_TYPES).required(),
                A::string("punitObjectType"),
                A::number("undergroundDepth"),
                A::number("abovegroundDepth"),
            ],
        ),
        feature(
            BUILDING,
            None,
            AbstractBuilding,
            vec![
                A::string("buildingState"),
                A::string("buildingID"),
                A::string("buildingObjectID"),
            ],
        ),
        unit,
        legal,
        feature(
            SCIENTIFIC_EVIDENCE,
            Some(LEGAL),
            AbstractCityObject,
            vec![A::one_of("evidenceType", &EVIDENCE_TYPES).required()],
        ),
        feature(
            PROTECTED_AREA,
            Some(LEGAL),
            AbstractCityObject,
            vec![A::string("areaName").required()],
        ),
        feature(
            COMMON_AREA,
            Some(LEGAL),
            AbstractCityObject,
            vec![A::string("areaUseType")],
        ),
        feature(
            RESTRICTION,
            Some(LEGAL),
            AbstractCityObject,
            vec![
                A::one_of("restrictionType", &RESTRICTION_TYPES).required(),
                A::one_of("restrictionAnalysisType", &ANALYSIS_TYPES),
                A::number("restrictionValue"),
                A::string("restrictionUnit"),
            ],
        ),
    ];

    use Multiplicity as M;
    use RelationshipKind::*;
    let mut relationships = vec![relationship(
        Composition,
        BUILDING,
        M::ONE,
        BUILDING_UNIT,
        M::MANY,
    )];
    for target in [SCIENTIFIC_EVIDENCE, PROTECTED_AREA, SURFACE_OBJECT, PLAN_UNIT] {
        relationships.push(relationship(Association, RESTRICTION, M::MANY, target, M::OPTIONAL));
    }
    for target in [BUILDING, BUILDING_UNIT, PLAN_UNIT] {
        relationships.push(relationship(Association, LEGAL, M::MANY, target, M::OPTIONAL));
    }

    ExtensionRegistry {
        extension_name: EXTENSION_NAME.to_string(),
        extension_version: EXTENSION_VERSION.to_string(),
        schema_url: EXTENSION_URL.to_string(),
        types,
        relationships,
    }
}

impl ExtensionRegistry {
    pub fn lookup(&self, name: &str) -> Option<&FeatureTypeSpec> {
        self.types.iter().find(|t| t.name == name)
    }

    /// `name` followed by its ancestors, nearest first. Stops on cycles or
    /// unknown parents.
    pub fn lineage(&self, name: &str) -> Vec<&FeatureTypeSpec> {
        let mut out: Vec<&FeatureTypeSpec> = Vec::new();
        let mut cur = self.lookup(name);
        while let Some(t) = cur {
            if out.iter().any(|seen| seen.name == t.name) {
                break;
            }
            out.push(t);
            cur = t.parent.as_deref().and_then(|p| self.lookup(p));
        }
        out
    }

    /// True when `name` equals `ancestor` or inherits from it.
    pub fn is_a(&self, name: &str, ancestor: &str) -> bool {
        self.lineage(name).iter().any(|t| t.name == ancestor)
    }

    /// Own and inherited attributes, own first.
    pub fn effective_attributes(&self, name: &str) -> Vec<&AttributeSpec> {
        self.lineage(name)
            .into_iter()
            .flat_map(|t| t.attributes.iter())
            .collect()
    }

    pub fn geometry_required(&self, name: &str) -> bool {
        self.lineage(name).iter().any(|t| t.geometry_required)
    }

    /// Whether an object of `source_type` may point at `target_type` through
    /// `relatedObjectID`. Both ends honor inheritance.
    pub fn association_allowed(&self, source_type: &str, target_type: &str) -> bool {
        self.relationships.iter().any(|r| {
            r.realization == Realization::RelatedObjectId
                && self.is_a(source_type, &r.source)
                && self.is_a(target_type, &r.target)
        })
    }

    pub fn compositions(&self) -> impl Iterator<Item = &RelationshipSpec> {
        self.relationships
            .iter()
            .filter(|r| r.kind == RelationshipKind::Composition)
    }
}

/// All invariant violations of `registry`; empty when valid.
pub fn validate_registry(registry: &ExtensionRegistry) -> Vec<Issue> {
    let mut issues = Vec::new();
    let mut seen = HashSet::new();
    for t in &registry.types {
        let path = format!("types/{}", t.name);
        if !t.name.starts_with('+') || t.name.len() < 2 {
            issues.push(Issue::error(
                "NAME_PREFIX",
                &path,
                format!("extension type `{}` must start with '+'", t.name),
            ));
        }
        if !seen.insert(t.name.as_str()) {
            issues.push(Issue::error(
                "DUPLICATE_NAME",
                &path,
                format!("type `{}` is declared more than once", t.name),
            ));
        }
        if let Some(p) = &t.parent {
            if registry.lookup(p).is_none() {
                issues.push(Issue::error(
                    "DANGLING_REF",
                    &path,
                    format!("parent `{p}` is not a registered type"),
                ));
            }
        }
        let mut attr_names = HashSet::new();
        for a in &t.attributes {
            let apath = format!("{path}/attributes/{}", a.name);
            if a.name.is_empty() || !attr_names.insert(a.name.as_str()) {
                issues.push(Issue::error(
                    "DUPLICATE_NAME",
                    &apath,
                    format!("attribute name `{}` is empty or repeated", a.name),
                ));
            }
            let has_values = a.allowed_values.as_ref().is_some_and(|v| !v.is_empty());
            let enum_ok = match a.value_kind {
                ValueKind::Enum => has_values,
                _ => a.allowed_values.is_none(),
            };
            if !enum_ok {
                issues.push(Issue::error(
                    "ENUM_VALUES",
                    &apath,
                    "enum attributes need values; other kinds must not carry any",
                ));
            }
        }
    }

    let by_name: HashMap<&str, &FeatureTypeSpec> =
        registry.types.iter().map(|t| (t.name.as_str(), t)).collect();
    for t in &registry.types {
        // walk the parent chain; revisiting the start means a cycle
        let mut cur = t.parent.as_deref();
        let mut steps = 0;
        let mut inherited: Vec<&str> = Vec::new();
        while let Some(p) = cur {
            if p == t.name {
                issues.push(Issue::error(
                    "CYCLE",
                    format!("types/{}", t.name),
                    format!("parent chain of `{}` loops back to itself", t.name),
                ));
                break;
            }
            steps += 1;
            if steps > registry.types.len() {
                break;
            }
            match by_name.get(p) {
                Some(pt) => {
                    inherited.extend(pt.attributes.iter().map(|a| a.name.as_str()));
                    cur = pt.parent.as_deref();
                }
                None => break,
            }
        }
        for a in &t.attributes {
            if inherited.contains(&a.name.as_str()) {
                issues.push(Issue::error(
                    "ATTR_SHADOW",
                    format!("types/{}/attributes/{}", t.name, a.name),
                    format!("`{}` redeclares an inherited attribute", a.name),
                ));
            }
        }
    }

    for (i, r) in registry.relationships.iter().enumerate() {
        let path = format!("relationships/{i}");
        for end in [&r.source, &r.target] {
            if !by_name.contains_key(end.as_str()) {
                issues.push(Issue::error(
                    "DANGLING_REF",
                    &path,
                    format!("relationship endpoint `{end}` is not a registered type"),
                ));
            }
        }
        let expected = match r.kind {
            RelationshipKind::Composition => Realization::ParentsChildren,
            RelationshipKind::Association => Realization::RelatedObjectId,
        };
        if r.realization != expected {
            issues.push(Issue::error(
                "REALIZATION",
                &path,
                format!("{:?} must be realized as {:?}", r.kind, expected),
            ));
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes(issues: &[Issue]) -> Vec<String> {
        issues.iter().map(|i| i.code.clone()).collect()
    }

    #[test]
    fn builtin_has_ten_prefixed_types() {
        let r = builtin_registry();
        assert_eq!(r.types.len(), 10);
        assert!(r.types.iter().all(|t| t.name.starts_with('+')));
        assert_eq!(r.extension_name, "3DSpace");
        assert_eq!(r.extension_version, "2.0");
    }

    #[test]
    fn crater_inherits_from_surface_object() {
        let r = builtin_registry();
        assert_eq!(r.lookup(CRATER).unwrap().parent.as_deref(), Some(SURFACE_OBJECT));
        assert!(r.is_a(CRATER, SURFACE_OBJECT));
        assert!(!r.is_a(SURFACE_OBJECT, CRATER));
    }

    #[test]
    fn legal_requires_geometry_and_subclasses_inherit_it() {
        let r = builtin_registry();
        assert!(r.lookup(LEGAL).unwrap().geometry_required);
        assert!(!r.lookup(RESTRICTION).unwrap().geometry_required);
        assert!(r.geometry_required(RESTRICTION));
        assert!(!r.geometry_required(CRATER));
    }

    #[test]
    fn core_bases() {
        let r = builtin_registry();
        assert_eq!(r.lookup(BUILDING).unwrap().core_base, CoreBase::AbstractBuilding);
        for name in [SURFACE_OBJECT, PLAN_UNIT, LEGAL] {
            assert_eq!(r.lookup(name).unwrap().core_base, CoreBase::AbstractCityObject);
        }
    }

    #[test]
    fn every_named_attribute_lives_in_exactly_one_type() {
        let r = builtin_registry();
        let named = [
            "objectName", "objectType", "registrationDate", "craterID", "craterName",
            "diameter", "depth", "albedo", "IAUID", "approvalDate", "target",
            "planUseType", "punitObjectType", "undergroundDepth", "abovegroundDepth",
            "buildingState", "buildingID", "buildingObjectID", "unitUseType",
            "legalObjectID", "relatedObjectID", "evidenceType", "areaName", "areaUseType",
            "restrictionType", "restrictionAnalysisType", "restrictionValue", "restrictionUnit",
        ];
        for n in named {
            let owners = r
                .types
                .iter()
                .filter(|t| t.attributes.iter().any(|a| a.name == n))
                .count();
            assert_eq!(owners, 1, "{n}");
        }
        let total: usize = r.types.iter().map(|t| t.attributes.len()).sum();
        assert_eq!(total, named.len());
    }

    #[test]
    fn enums_match_closed_vocabularies() {
        let r = builtin_registry();
        let attr = |t: &str, a: &str| {
            r.lookup(t)
                .unwrap()
                .attributes
                .iter()
                .find(|x| x.name == a)
                .unwrap()
                .clone()
        };
        assert_eq!(
            attr(SCIENTIFIC_EVIDENCE, "evidenceType").allowed_values.unwrap(),
            vec!["waterIce", "geological", "astrobiological"]
        );
        assert_eq!(
            attr(RESTRICTION, "restrictionType").allowed_values.unwrap(),
            vec!["historicalSite", "mining", "scientific", "settlement"]
        );
    }

    #[test]
    fn builtin_is_valid() {
        assert!(validate_registry(&builtin_registry()).is_empty());
    }

    #[test]
    fn relationships() {
        let r = builtin_registry();
        assert_eq!(r.relationships.len(), 8);
        assert!(r.association_allowed(RESTRICTION, PLAN_UNIT));
        assert!(r.association_allowed(RESTRICTION, CRATER));
        assert!(r.association_allowed(LEGAL, BUILDING_UNIT));
        assert!(!r.association_allowed(LEGAL, CRATER));
        assert!(!r.association_allowed(CRATER, PLAN_UNIT));
        let comp: Vec<_> = r.compositions().collect();
        assert_eq!(comp.len(), 1);
        assert_eq!(comp[0].source_multiplicity.to_string(), "1");
        assert_eq!(comp[0].target_multiplicity.to_string(), "0..*");
    }

    #[test]
    fn cycle_is_reported() {
        let mut r = builtin_registry();
        r.types.push(feature("+A", Some("+B"), CoreBase::AbstractCityObject, vec![]));
        r.types.push(feature("+B", Some("+A"), CoreBase::AbstractCityObject, vec![]));
        assert!(codes(&validate_registry(&r)).iter().any(|c| c == "CYCLE"));
    }

    #[test]
    fn dangling_relationship_target() {
        let mut r = builtin_registry();
        r.relationships.push(relationship(
            RelationshipKind::Association,
            RESTRICTION,
            Multiplicity::MANY,
            "+Ghost",
            Multiplicity::OPTIONAL,
        ));
        assert_eq!(codes(&validate_registry(&r)), vec!["DANGLING_REF"]);
    }

    #[test]
    fn missing_prefix_and_shadowing() {
        let mut r = builtin_registry();
        r.types.push(feature("SpaceX", None, CoreBase::AbstractCityObject, vec![]));
        r.types.push(feature(
            "+Sub",
            Some(LEGAL),
            CoreBase::AbstractCityObject,
            vec![AttributeSpec::string("legalObjectID")],
        ));
        let c = codes(&validate_registry(&r));
        assert!(c.iter().any(|c| c == "NAME_PREFIX"));
        assert!(c.iter().any(|c| c == "ATTR_SHADOW"));
    }

    #[test]
    fn enum_without_values() {
        let mut r = builtin_registry();
        r.types[0].attributes[0].value_kind = ValueKind::Enum;
        assert_eq!(codes(&validate_registry(&r)), vec!["ENUM_VALUES"]);
    }

    #[test]
    fn date_strings() {
        assert!(is_iso_date("2024-05-31"));
        assert!(!is_iso_date("2024-13-01"));
        assert!(!is_iso_date("2024/05/31"));
        assert!(!is_iso_date("24-05-31"));
    }
}
