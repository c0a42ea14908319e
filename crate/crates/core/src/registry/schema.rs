//! CityJSON extension file (`*.ext.json`) emission and the matching reader.

use serde_json::{json, Map, Value};

use super::{
    builtin_registry, validate_registry, AttributeSpec, CoreBase, ExtensionRegistry,
    FeatureTypeSpec, ValueKind,
};
use crate::error::{Error, Result};

const CITYJSON_VERSION: &str = "2.0";
const LOCAL_REF_PREFIX: &str = "#/extraCityObjects/";

fn attribute_schema(a: &AttributeSpec) -> Value {
    match a.value_kind {
        ValueKind::String => json!({"type": "string"}),
        ValueKind::Number => json!({"type": "number"}),
        ValueKind::Integer => json!({"type": "integer"}),
        ValueKind::DateString => json!({"type": "string", "format": "date"}),
        ValueKind::Enum => json!({
            "type": "string",
            "enum": a.allowed_values.clone().unwrap_or_default(),
        }),
    }
}

fn type_schema(t: &FeatureTypeSpec) -> Value {
    let base_ref = match &t.parent {
        Some(p) => format!("{LOCAL_REF_PREFIX}{p}"),
        None => t.core_base.schema_ref().to_string(),
    };

    let mut attr_props = Map::new();
    for a in &t.attributes {
        attr_props.insert(a.name.clone(), attribute_schema(a));
    }
    let mut attributes = json!({"type": "object", "properties": attr_props});
    let required_attrs: Vec<&str> = t
        .attributes
        .iter()
        .filter(|a| a.required)
        .map(|a| a.name.as_str())
        .collect();
    if !required_attrs.is_empty() {
        attributes["required"] = json!(required_attrs);
    }

    let mut required = vec!["type"];
    if t.geometry_required {
        required.push("geometry");
    }
    if !t.toplevel {
        required.push("parents");
    }

    json!({
        "allOf": [
            {"$ref": base_ref},
            {
                "properties": {
                    "type": {"enum": [t.name]},
                    "toplevel": {"type": "boolean", "enum": [t.toplevel]},
                    "attributes": attributes,
                },
                "required": required,
            }
        ]
    })
}

/// Serialize `registry` as a CityJSON extension file. Output is pretty-printed
/// with sorted keys, so equal registries give identical bytes.
pub fn emit_extension_schema(registry: &ExtensionRegistry) -> Result<String> {
    let issues = validate_registry(registry);
    if !issues.is_empty() {
        return Err(Error::RegistryInvalid(issues));
    }
    let mut extra = Map::new();
    for t in &registry.types {
        extra.insert(t.name.clone(), type_schema(t));
    }
    let doc = json!({
        "type": "CityJSONExtension",
        "name": registry.extension_name,
        "description": "Surface objects and logical spaces on celestial bodies",
        "url": registry.schema_url,
        "version": registry.extension_version,
        "versionCityJSON": CITYJSON_VERSION,
        "extraAttributes": {},
        "extraCityObjects": extra,
        "extraRootProperties": {},
        "extraSemanticSurfaces": {},
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json values always serialize");
    text.push('\n');
    Ok(text)
}

fn schema_err(path: &str, msg: &str) -> Error {
    Error::parse(format!("extension schema {path}"), msg)
}

fn parse_attribute(name: &str, schema: &Value, required: bool) -> Result<AttributeSpec> {
    let path = format!("attribute {name}");
    let ty = schema.get("type").and_then(Value::as_str);
    let (value_kind, allowed_values) = match (ty, schema.get("enum"), schema.get("format")) {
        (Some("string"), Some(values), _) => {
            let values = values
                .as_array()
                .ok_or_else(|| schema_err(&path, "enum must be an array"))?
                .iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| schema_err(&path, "enum values must be strings"))?;
            (ValueKind::Enum, Some(values))
        }
        (Some("string"), None, Some(f)) if f == "date" => (ValueKind::DateString, None),
        (Some("string"), None, _) => (ValueKind::String, None),
        (Some("number"), _, _) => (ValueKind::Number, None),
        (Some("integer"), _, _) => (ValueKind::Integer, None),
        _ => return Err(schema_err(&path, "unsupported attribute schema")),
    };
    Ok(AttributeSpec {
        name: name.to_string(),
        value_kind,
        allowed_values,
        required,
    })
}

fn parse_type(name: &str, schema: &Value) -> Result<FeatureTypeSpec> {
    let parts = schema
        .get("allOf")
        .and_then(Value::as_array)
        .filter(|a| a.len() == 2)
        .ok_or_else(|| schema_err(name, "expected an allOf with two members"))?;
    let base = parts[0]
        .get("$ref")
        .and_then(Value::as_str)
        .ok_or_else(|| schema_err(name, "first allOf member must be a $ref"))?;
    let (parent, core_base) = if let Some(p) = base.strip_prefix(LOCAL_REF_PREFIX) {
        (Some(p.to_string()), CoreBase::AbstractCityObject)
    } else if base == CoreBase::AbstractBuilding.schema_ref() {
        (None, CoreBase::AbstractBuilding)
    } else if base == CoreBase::AbstractCityObject.schema_ref() {
        (None, CoreBase::AbstractCityObject)
    } else {
        return Err(schema_err(name, "unrecognized base reference"));
    };

    let body = &parts[1];
    let required: Vec<&str> = body
        .get("required")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let props = body.get("properties");
    let toplevel = props
        .and_then(|p| p.pointer("/toplevel/enum/0"))
        .and_then(Value::as_bool)
        .unwrap_or(!required.contains(&"parents"));
    let attrs = props.and_then(|p| p.get("attributes"));
    let required_attrs: Vec<&str> = attrs
        .and_then(|a| a.get("required"))
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let mut attributes = Vec::new();
    if let Some(map) = attrs.and_then(|a| a.get("properties")).and_then(Value::as_object) {
        for (attr_name, attr_schema) in map {
            attributes.push(parse_attribute(
                attr_name,
                attr_schema,
                required_attrs.contains(&attr_name.as_str()),
            )?);
        }
    }
    Ok(FeatureTypeSpec {
        name: name.to_string(),
        parent,
        core_base,
        attributes,
        geometry_required: required.contains(&"geometry"),
        toplevel,
    })
}

/// Rebuild a registry from an extension file written by
/// [`emit_extension_schema`].
///
/// Extension files carry no relationship section, so relationships are taken
/// from the built-in model and kept only where both ends are declared in the
/// file. Attribute order follows the file's (sorted) key order.
pub fn registry_from_schema(text: &str) -> Result<ExtensionRegistry> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {} column {}", e.line(), e.column()), e)
    })?;
    if doc.get("type").and_then(Value::as_str) != Some("CityJSONExtension") {
        return Err(schema_err("/type", "not a CityJSONExtension document"));
    }
    let field = |k: &str| -> Result<String> {
        doc.get(k)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| schema_err(&format!("/{k}"), "missing string field"))
    };
    let objects = doc
        .get("extraCityObjects")
        .and_then(Value::as_object)
        .ok_or_else(|| schema_err("/extraCityObjects", "missing object"))?;
    let types = objects
        .iter()
        .map(|(name, schema)| parse_type(name, schema))
        .collect::<Result<Vec<_>>>()?;
    let relationships = builtin_registry()
        .relationships
        .into_iter()
        .filter(|r| {
            types.iter().any(|t| t.name == r.source) && types.iter().any(|t| t.name == r.target)
        })
        .collect();
    let registry = ExtensionRegistry {
        extension_name: field("name")?,
        extension_version: field("version")?,
        schema_url: field("url")?,
        types,
        relationships,
    };
    let issues = validate_registry(&registry);
    if !issues.is_empty() {
        return Err(Error::RegistryInvalid(issues));
    }
    Ok(registry)
}
