//! Findings reported by the registry check, the watertightness check and the
//! document validator.
//!
//! Codes are stable strings. The complete table:
//!
//! | code | severity | raised by |
//! |---|---|---|
//! | `NAME_PREFIX` | error | registry: extension type name lacks the `+` prefix |
//! | `DUPLICATE_NAME` | error | registry: repeated type or attribute name |
//! | `DANGLING_REF` | error | registry: parent or relationship endpoint not registered |
//! | `CYCLE` | error | registry: parent chain loops |
//! | `ATTR_SHADOW` | error | registry: attribute redeclares an inherited one |
//! | `ENUM_VALUES` | error | registry: enum kind without values, or values on a non-enum |
//! | `REALIZATION` | error | registry: relationship kind and realization disagree |
//! | `UNMATCHED_EDGE` | error | solid: edge not shared by exactly two faces |
//! | `ORIENTATION` | error | solid: edge traversed twice in the same direction |
//! | `NON_PLANAR` | error | solid: face deviates from its plane |
//! | `NONPOSITIVE_VOLUME` | error | solid: signed volume ≤ 0 |
//! | `VERSION` | error | core: unsupported `version` |
//! | `TRANSFORM_SCALE` | error | core: non-positive scale component |
//! | `VTX_RANGE` | error | core: vertex index out of range |
//! | `RING_SHORT` | error | core: ring with fewer than 3 distinct vertices |
//! | `REL_MISSING` | error | core: parent/child id not in the document |
//! | `REL_ASYMMETRY` | error | core: parent/child links not mirrored |
//! | `CRS_URL` | error | core: malformed reference system for 2.0 |
//! | `DUP_VERTEX` | warning | core: repeated vertex triplet |
//! | `EXT_NOT_DECLARED` | error | extension: document does not declare the extension |
//! | `EXT_UNKNOWN_TYPE` | error | extension: `+` type not in the registry |
//! | `EXT_NAME_PREFIX` | error | extension: non-core type without `+` prefix |
//! | `ATTR_TYPE` | error | extension: attribute value of the wrong kind |
//! | `ATTR_ENUM` | error | extension: value outside the enum |
//! | `ATTR_REQUIRED` | error | extension: required attribute missing |
//! | `ATTR_UNKNOWN` | warning (error when strict) | extension: undeclared attribute |
//! | `GEOM_REQUIRED` | error | extension: geometry missing where required |
//! | `REF_INTEGRITY` | error | extension: `relatedObjectID` does not resolve |
//! | `REF_TARGET_TYPE` | error | extension: `relatedObjectID` targets a disallowed type |
//! | `MULT_COMPOSITION` | error | extension: part without exactly one whole parent |
//! | `SOLID_OPEN` | error | solids: unmatched edges |
//! | `SOLID_ORIENTATION` | error | solids: inconsistent or inverted orientation |
//! | `SOLID_NONPLANAR` | error | solids: non-planar face |

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub code: String,
    pub severity: Severity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub object_id: Option<String>,
    pub path: String,
    pub message: String,
}

impl Issue {
    pub fn error(code: &str, path: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            code: code.to_string(),
            severity: Severity::Error,
            object_id: None,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn warning(code: &str, path: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            severity: Severity::Warning,
            ..Issue::error(code, path, message)
        }
    }

    pub fn on(mut self, object_id: impl Into<String>) -> Self {
        self.object_id = Some(object_id.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} {}", self.code)?;
        if let Some(id) = &self.object_id {
            write!(f, " [{id}]")?;
        }
        write!(f, " {}: {}", self.path, self.message)
    }
}

/// Number of error-severity issues.
pub fn error_count(issues: &[Issue]) -> usize {
    issues.iter().filter(|i| i.is_error()).count()
}
